"""``svx`` command line: analyze, extract, adversary, curve, distributed, verify.

Exit codes: 0 extractable, 1 impossible (or a failed verify check), 2 gap,
3 runtime error, 64 usage error or malformed input.
"""

from __future__ import annotations

import argparse
import sys
import time
from fractions import Fraction

import numpy as np

from . import adversary, binary_sv, distributed, extractor
from .core import BudgetExceeded, DEFAULT_BUDGET, DEFAULT_TOL
from .io import (InputError, dump_report, joint_from_obj, read_json, spec_from_obj, spec_to_obj,
                 table_from_obj)

EXIT_OK, EXIT_IMPOSSIBLE, EXIT_GAP, EXIT_ERROR, EXIT_USAGE = 0, 1, 2, 3, 64
STATUS_EXIT = {extractor.EXTRACTABLE: EXIT_OK, distributed.COMMON_EXTRACTABLE: EXIT_OK,
               extractor.IMPOSSIBLE: EXIT_IMPOSSIBLE, extractor.GAP: EXIT_GAP}


class UsageError(Exception):
    pass


class Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _fraction_arg(s: str):
    try:
        return Fraction(s) if "/" in s else float(s)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {s!r}") from None


# ---------------------------------------------------------------------------


def cmd_analyze(args) -> int:
    obj, digest = read_json(args.spec)
    spec = spec_from_obj(obj, args.exact)
    v = extractor.verdict(spec, args.tol)
    rep = {"command": "analyze", "input_digest": digest, "input": spec_to_obj(spec),
           "exact": spec.exact, "verdict": v.status, "note": v.note}
    if v.witness is not None:
        w = v.witness
        rep["psi"] = {"values": list(w.values), "max_abs": w.max_abs, "min_variance": w.min_variance,
                      "means": list(w.means), "variances": list(w.variances)}
        rep["checks"] = {"psi_zero_mean": w.is_valid(args.tol)}
    elif v.status == extractor.IMPOSSIBLE:
        if v.subset is not None:
            rep["restricted_subset"] = list(v.subset)
        cert = adversary.build_g_certificate(spec, args.tol)
        if cert is None:
            rep["certificate"] = None
        else:
            rep["certificate"] = {
                "delta": cert.delta_exact if cert.delta_exact is not None else cert.delta,
                "delta_float": cert.delta, "epsilon": cert.epsilon, "M": cert.m_f,
                "g_half": cert.g(Fraction(1, 2) if isinstance(cert.epsilon, Fraction) else 0.5),
                "margin": cert.margin(), "method": cert.method}
    _emit(dump_report(rep), args.out)
    return STATUS_EXIT[v.status]


def _read_stream(path: str) -> list:
    with open(path) as fh:
        text = fh.read()
    try:
        return [int(t) for t in text.replace(",", " ").split()]
    except ValueError:
        raise InputError(f"{path}: stream must contain integer symbols") from None


def cmd_extract(args) -> int:
    obj, digest = read_json(args.spec)
    spec = spec_from_obj(obj, args.exact)
    v = extractor.verdict(spec, args.tol)
    if v.status != extractor.EXTRACTABLE:
        print(f"svx extract: spec is {v.status}, nothing to extract", file=sys.stderr)
        return STATUS_EXIT[v.status]
    n = args.n
    M = args.M if args.M is not None else extractor.default_threshold(n)
    cfg = extractor.MartingaleConfig(M, n)
    k = args.k if args.k is not None else args.trials
    if args.stream:
        symbols = _read_stream(args.stream)
        if any(not 0 <= c < spec.alphabet_size for c in symbols):
            raise InputError("stream symbol outside the alphabet")
        traces = extractor.extract_bits(v.witness, cfg, symbols, k)
        bits = np.array([t.bit for t in traces], dtype=int)
        tau = np.array([t.tau for t in traces], dtype=int)
        policy = "stream"
    else:
        res = extractor.simulate_walks(spec, v.witness, cfg, k, args.policy, args.seed)
        bits, tau, policy = res.bits.astype(int), res.tau, args.policy
    br = extractor.bias_bracket(cfg, v.witness)
    stats = {"k": k, "n": n, "M": M, "policy": policy, "seed": args.seed,
             "freq_one": float(bits.mean()) if k else None,
             "bracket": {"lo": br.lo, "hi": br.hi, "tail": br.tail},
             "tau": {"mean": float(tau.mean()) if k else None, "max": int(tau.max()) if k else None,
                     "capped": int((tau == n).sum()) if k else 0}}
    rep = {"command": "extract", "input_digest": digest, "bits": "".join(map(str, bits.tolist())),
           "stats": stats, "psi": list(v.witness.values)}
    if args.out:
        _emit(dump_report(rep), args.out)
    else:
        sys.stdout.write(rep["bits"] + "\n")
        sys.stdout.write(dump_report({"command": "extract", "input_digest": digest, "stats": stats}))
    return EXIT_OK


def _strategy_obj(tree) -> dict:
    return {"".join(map(str, h)) or "": s for h, s in sorted(tree.choice.items(), key=lambda kv: (len(kv[0]), kv[0]))}


def cmd_adversary(args) -> int:
    obj, digest = read_json(args.spec)
    spec = spec_from_obj(obj, args.exact)
    tobj, tdigest = read_json(args.table)
    table = table_from_obj(tobj, spec.alphabet_size)
    ab = adversary.alpha_beta(spec, table, args.budget)
    rep = {"command": "adversary", "input_digest": digest, "table_digest": tdigest,
           "exact": spec.exact, "n": table.depth, "alpha": ab.alpha, "beta": ab.beta,
           "alpha_float": float(ab.alpha), "beta_float": float(ab.beta),
           "strategy_min": _strategy_obj(adversary.optimal_strategy(spec, table, adversary.MIN, args.budget)),
           "strategy_max": _strategy_obj(adversary.optimal_strategy(spec, table, adversary.MAX, args.budget))}
    _emit(dump_report(rep), args.out)
    return EXIT_OK


def cmd_curve(args) -> int:
    delta = args.delta
    if not 0 < float(delta) < 0.5:
        raise UsageError("--delta must lie in (0, 1/2)")
    if not 0 <= args.n <= 20:
        raise UsageError("--n must lie in [0, 20]")
    pts = binary_sv.f_delta_curve(float(delta), args.n)
    gap = binary_sv.curve_gap(pts)
    csv_text = binary_sv.curve_to_csv(pts)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(csv_text)
        sys.stdout.write(dump_report({"command": "curve", "delta": delta, "n_max": args.n,
                                     "points": len(pts), "gap": gap, "csv": args.out}))
    else:
        sys.stdout.write(csv_text)
        print(f"gap {gap:.17g}", file=sys.stderr)
    return EXIT_OK


def cmd_distributed(args) -> int:
    obj, digest = read_json(args.spec)
    jspec = joint_from_obj(obj, args.exact)
    r = distributed.distributed_verdict(jspec, args.tol)
    rep = {"command": "distributed", "input_digest": digest, "verdict": r.status, "reason": r.reason,
           "rho": r.rho_per_die}
    if r.part is not None:
        rep["common_part"] = {"component_of_a": list(r.part.component_of_a),
                              "component_of_b": list(r.part.component_of_b),
                              "num_components": r.part.num_components,
                              "num_nonsingleton": r.part.num_nonsingleton}
        rep["induced"] = spec_to_obj(r.induced)
    if r.witsenhausen is not None:
        rep["witsenhausen"] = {"die": r.witsenhausen_die, "rho": r.witsenhausen.rho,
                               "center": float(r.witsenhausen.center())}
    if r.certificate is not None:
        c = r.certificate
        rep["certificate"] = {"rho_cond": c.rho_cond, "delta": c.delta, "delta_prime": c.delta_prime,
                              "epsilon": c.epsilon, "M": c.M, "tau": c.tau, "center": float(c.center()),
                              "corners": [float(x) for x in c.corners()], "method": c.method}
    if r.status == distributed.COMMON_EXTRACTABLE:
        n = args.n
        M = args.M if args.M is not None else extractor.default_threshold(n)
        cfg = extractor.MartingaleConfig(M, n)
        k = args.trials
        demo = distributed.common_extract(jspec, cfg, k, seed=args.seed, report=r)
        br = extractor.bias_bracket(cfg, demo.witness)
        rep["psi"] = list(demo.witness.values)
        rep["demo"] = {"k": k, "n": n, "M": M, "seed": args.seed, "agreement": demo.agreement,
                       "freq_one": float(np.mean(demo.alice)) if k else None,
                       "bracket": {"lo": br.lo, "hi": br.hi, "tail": br.tail}}
    _emit(dump_report(rep), args.out)
    return STATUS_EXIT[r.status]


# ---------------------------------------------------------------------------
# verify suites


def _suite_appendix_c():
    yield "prefix-optimality n<=4 delta in {1/4,1/3,9/20}", all(
        binary_sv.verify_prefix_optimality(Fraction(d), n).ok
        for d in ("1/4", "1/3", "9/20") for n in range(5))
    small = [d for d in binary_sv.DEFAULT_LEMMA_DELTAS if d <= Fraction(1, 2)]
    yield "basedelta-lemma n<=8 delta<=1/2", binary_sv.verify_basedelta_lemma(8, small).ok
    yield "basedelta-lemma n<=8 full 19-delta grid", binary_sv.verify_basedelta_lemma(8).ok


def _suite_adversary():
    spec = binary_sv.binary_spec(Fraction(1, 3))
    cert = adversary.build_g_certificate(spec)
    yield "g-certificate delta=2/3", cert is not None and cert.delta_exact == Fraction(2, 3)
    curve = binary_sv.f_delta_curve(1 / 3, 8)
    for n in range(4):
        phi = adversary.phi_set(spec, n)
        yield f"g dominates phi_{n}", adversary.check_g_dominates(cert, phi)
        yield f"phi_{n} pairs each dominate a curve point", bool(
            binary_sv.dominates_curve_point(phi.as_array(), curve).all())


def _suite_witsenhausen():
    rng = np.random.default_rng(0)
    ok = True
    for _ in range(100):
        P = rng.dirichlet(np.ones(9)).reshape(3, 3)
        ok &= abs(distributed.maximal_correlation(np.kron(P, P)).rho
                  - distributed.maximal_correlation(P).rho) <= 1e-9
    yield "tensorization 100 random 3x3", bool(ok)
    ok = True
    for _ in range(100):
        P = rng.dirichlet(np.ones(9)).reshape(3, 3)
        W = rng.dirichlet(np.ones(3), size=3)
        ok &= distributed.maximal_correlation(P @ W).rho <= distributed.maximal_correlation(P).rho + 1e-9
    yield "data processing 100 random channels", bool(ok)
    from .instances import dsbs
    cert = distributed.witsenhausen_certificate(dsbs(0.1))
    ts = distributed.distributed_triples(dsbs(0.1), 2, f=cert.f)
    yield "triple cloud f >= 0 (n=2)", bool(cert.f(*ts.points.T).min() >= -1e-12)
    yield "induction step inequality", ts.step_slack >= -1e-9


SUITES = {"appendix-c": _suite_appendix_c, "adversary": _suite_adversary, "witsenhausen": _suite_witsenhausen}


def cmd_verify(args) -> int:
    names = list(SUITES) if args.suite == "all" else [args.suite]
    if any(n not in SUITES for n in names):
        raise UsageError(f"unknown suite {args.suite!r}; choose from {', '.join(SUITES)} or all")
    all_ok = True
    for name in names:
        t0 = time.perf_counter()
        for label, ok in SUITES[name]():
            dt = time.perf_counter() - t0
            print(f"{'PASS' if ok else 'FAIL'}  {name}: {label}  ({dt:.2f}s)")
            all_ok &= bool(ok)
            t0 = time.perf_counter()
    return EXIT_OK if all_ok else EXIT_IMPOSSIBLE


# ---------------------------------------------------------------------------


def build_parser() -> Parser:
    common = Parser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--trials", type=int, default=100)
    common.add_argument("--n", type=int, default=1000)
    common.add_argument("--M", type=float, default=None)
    common.add_argument("--tol", type=float, default=DEFAULT_TOL)
    common.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    common.add_argument("--exact", action="store_true", help="read decimal entries as exact rationals")
    common.add_argument("--out", default=None)

    p = Parser(prog="svx", description="Extraction analysis for adversarial dice sources.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=Parser)
    a = sub.add_parser("analyze", parents=[common], help="verdict with witness or certificate")
    a.add_argument("spec")
    a.set_defaults(func=cmd_analyze)
    e = sub.add_parser("extract", parents=[common], help="run the martingale extractor")
    e.add_argument("spec")
    e.add_argument("--k", type=int, default=None, help="number of bits (default: --trials)")
    e.add_argument("--policy", default="adaptive-sign", help="constant[:s] | uniform | adaptive-sign")
    e.add_argument("--stream", default=None, help="file of symbols to extract from instead of simulating")
    e.set_defaults(func=cmd_extract)
    d = sub.add_parser("adversary", parents=[common], help="optimal biases for an extractor table")
    d.add_argument("spec")
    d.add_argument("table")
    d.set_defaults(func=cmd_adversary)
    c = sub.add_parser("curve", parents=[common], help="achievable-region curve of the binary source as CSV")
    c.add_argument("--delta", type=_fraction_arg, required=True)
    c.set_defaults(func=cmd_curve, n=12)
    j = sub.add_parser("distributed", parents=[common], help="common-bit verdict for a joint source")
    j.add_argument("spec")
    j.set_defaults(func=cmd_distributed)
    v = sub.add_parser("verify", parents=[common], help="run an exhaustive check suite")
    v.add_argument("suite")
    v.set_defaults(func=cmd_verify)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        t0 = time.perf_counter()
        code = args.func(args)
        print(f"svx {args.command}: {time.perf_counter() - t0:.3f}s", file=sys.stderr)
        return code
    except UsageError as exc:
        print(f"svx: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except InputError as exc:
        print(f"svx: input error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (BudgetExceeded, ValueError, OSError) as exc:
        print(f"svx: error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
