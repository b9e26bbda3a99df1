"""Two-party sources: maximal correlation, common parts and the common-bit certificates."""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import numpy as np
import scipy.linalg

from .core import DEFAULT_BUDGET, BudgetExceeded, JointSourceSpec, SourceSpec, trial_rng
from . import extractor
from .adversary import all_tables, min_spread

EDGE_TOL = 1e-12
COMMON_EXTRACTABLE = "COMMON-EXTRACTABLE"
IMPOSSIBLE = extractor.IMPOSSIBLE
GAP = extractor.GAP
DEFAULT_TAU = 1e-3


class HypothesisViolated(ValueError):
    """Some nonzero function of the common part has the same mean under every die."""


class CertificateUnavailable(ValueError):
    pass


# ---------------------------------------------------------------------------
# maximal correlation


@dataclass(frozen=True)
class MaxCorrResult:
    rho: float
    witness_x: np.ndarray
    witness_y: np.ndarray
    independent: bool = False


def maximal_correlation(joint) -> MaxCorrResult:
    """Second singular value of ``p(a,b) / sqrt(p(a) p(b))`` restricted to the marginal supports."""
    P = np.asarray(joint, dtype=float)
    if np.any(P < 0) or abs(P.sum() - 1) > 1e-9:
        raise ValueError("joint must be a probability matrix")
    pa, pb = P.sum(axis=1), P.sum(axis=0)
    ia, ib = np.flatnonzero(pa > 0), np.flatnonzero(pb > 0)
    wx, wy = np.zeros(P.shape[0]), np.zeros(P.shape[1])
    if len(ia) < 2 or len(ib) < 2:
        return MaxCorrResult(0.0, wx, wy, independent=True)
    sa, sb = np.sqrt(pa[ia]), np.sqrt(pb[ib])
    Q = P[np.ix_(ia, ib)] / np.outer(sa, sb) - np.outer(sa, sb)
    U, s, Vt = np.linalg.svd(Q)
    rho = float(min(max(s[0], 0.0), 1.0))
    wx[ia] = U[:, 0] / sa
    wy[ib] = Vt[0] / sb
    if wx @ P @ wy < 0:
        wy = -wy
    return MaxCorrResult(rho, wx, wy, independent=rho <= 1e-12)


# ---------------------------------------------------------------------------
# common part


@dataclass(frozen=True)
class CommonPart:
    component_of_a: tuple
    component_of_b: tuple
    num_components: int
    num_nonsingleton: int

    def members(self, c: int) -> tuple:
        a = [i for i, x in enumerate(self.component_of_a) if x == c]
        b = [j for j, x in enumerate(self.component_of_b) if x == c]
        return a, b


def _find(parent, i):
    while parent[i] != i:
        parent[i] = parent[parent[i]]
        i = parent[i]
    return i


def common_part(matrices, tol: float = EDGE_TOL) -> CommonPart:
    """Connected components of the bipartite support graph of one matrix or a union of matrices.

    Components with at least one edge get ids ``0..k-1`` in order of their
    smallest vertex; isolated vertices follow.
    """
    mats = [np.asarray(m, dtype=float) for m in (matrices if np.ndim(matrices[0]) == 2 else [matrices])]
    A, B = mats[0].shape
    parent = list(range(A + B))
    edge = np.zeros((A, B), dtype=bool)
    for m in mats:
        edge |= m > tol
    for a, b in zip(*np.nonzero(edge)):
        ra, rb = _find(parent, a), _find(parent, A + b)
        if ra != rb:
            parent[max(ra, rb)] = min(ra, rb)
    roots = [_find(parent, v) for v in range(A + B)]
    has_edge = np.concatenate([edge.any(axis=1), edge.any(axis=0)])
    ids = {}
    for v in range(A + B):
        if has_edge[v] and roots[v] not in ids:
            ids[roots[v]] = len(ids)
    k = len(ids)
    for v in range(A + B):
        if roots[v] not in ids:
            ids[roots[v]] = len(ids)
    comp = [ids[r] for r in roots]
    return CommonPart(tuple(comp[:A]), tuple(comp[A:]), len(ids), k)


def _blocks(P: np.ndarray, part: CommonPart):
    for c in range(part.num_nonsingleton):
        ia, ib = part.members(c)
        block = P[np.ix_(ia, ib)]
        yield c, block


def conditional_maximal_correlation(joint, part: CommonPart, per_component: bool = False):
    """Largest maximal correlation among the normalized blocks of positive mass."""
    P = np.asarray(joint, dtype=float)
    rhos = {}
    for c, block in _blocks(P, part):
        mass = block.sum()
        if mass > EDGE_TOL:
            rhos[c] = maximal_correlation(block / mass).rho
    best = max(rhos.values(), default=0.0)
    return (best, rhos) if per_component else best


def induced_common_spec(jspec: JointSourceSpec, tol: float = EDGE_TOL):
    """Spec over the common part of the union support graph, with its part."""
    T = jspec.tensor()
    part = common_part(jspec.tensor(False), tol)
    dice = []
    for s in range(jspec.num_dice):
        row = []
        for c in range(part.num_nonsingleton):
            ia, ib = part.members(c)
            row.append(sum(T[s][a][b] for a in ia for b in ib))
        dice.append(row)
    if part.num_nonsingleton == 0:
        raise ValueError("support graph has no edges")
    return SourceSpec.from_dice(dice), part


# ---------------------------------------------------------------------------
# certificates


def perturb_spec(jspec: JointSourceSpec, tau=DEFAULT_TAU) -> JointSourceSpec:
    """Mix every die with the average die: ``(1 - tau) p_s + tau * mean_t p_t``."""
    if not 0 <= tau <= 1:
        raise ValueError("tau must lie in [0, 1]")
    exact = jspec.exact and isinstance(tau, (Fraction, int))
    T = jspec.tensor(exact)
    avg = T.sum(axis=0) / jspec.num_dice
    out = (1 - tau) * T + tau * avg[None]
    new = JointSourceSpec(jspec.a_size, jspec.b_size, tuple(tuple(tuple(r) for r in m) for m in out.tolist()))
    if 0 < tau < 1:
        supp = [np.asarray(m, dtype=float) > EDGE_TOL for m in new.tensor(False)]
        assert all((s == supp[0]).all() for s in supp), "perturbed supports differ"
        assert common_part(new.tensor(False)) == common_part(jspec.tensor(False)), "common part changed"
    return new


@dataclass(frozen=True)
class DeltaConstants:
    delta: float
    delta_prime: float
    delta_a: float | None
    delta_b: float | None
    delta_prime_a: float
    delta_prime_b: float
    delta_exact: Fraction | None
    method: str


def _side_marginals(jspec: JointSourceSpec, side: str) -> np.ndarray:
    return jspec.marginal_a(False) if side == "a" else jspec.marginal_b(False)


def _spread_side(jspec: JointSourceSpec, side: str, sample_check: int):
    exact = jspec.exact
    Pm = jspec.marginal_a(exact) if side == "a" else jspec.marginal_b(exact)
    diffs = [list(Pm[s] - Pm[0]) for s in range(1, Pm.shape[0])]
    if not diffs or np.allclose(np.array(diffs, dtype=float), 0, atol=1e-12):
        return None
    return min_spread(Pm.tolist(), diffs, sample_check)


def _delta_prime_side(Pm: np.ndarray, comp: tuple, num_comp: int, tol: float) -> float:
    """``min_s sqrt((1 - t_s) / t_s)`` with ``t_s`` the largest share of ``||X||_s^2`` captured by the common part."""
    k = Pm.shape[1]
    rows = [Pm[s] - Pm[0] for s in range(1, Pm.shape[0])] + [np.ones(k)]
    Qb = scipy.linalg.null_space(np.array(rows))
    if Qb.shape[1] == 0:
        return math.inf
    ids = sorted(set(comp))
    C = np.zeros((len(ids), k))
    C[[ids.index(c) for c in comp], range(k)] = 1.0
    best = math.inf
    for p in Pm:
        if np.any(p <= 0):
            raise CertificateUnavailable("marginal has a zero entry; perturb the spec first")
        pc = C @ p
        Pi = (C.T / pc) @ (C * p)  # conditional expectation onto functions of the component
        D = np.diag(p)
        num = Qb.T @ Pi.T @ D @ Pi @ Qb
        den = Qb.T @ D @ Qb
        t = float(scipy.linalg.eigh(num, den, eigvals_only=True)[-1])
        if t >= 1 - tol:
            raise HypothesisViolated("a nonzero function of the common part has die-independent mean")
        if t > 0:
            best = min(best, math.sqrt((1 - t) / t))
    return best


def compute_delta_constants(jspec: JointSourceSpec, tol: float = 1e-9, sample_check: int = 0) -> DeltaConstants:
    """The spread constant and the common-part leakage constant of a (perturbed) joint spec."""
    sa = _spread_side(jspec, "a", sample_check)
    sb = _spread_side(jspec, "b", sample_check)
    if sa is None and sb is None:
        raise CertificateUnavailable("all dice have the same marginals; the spread constant is undefined")
    vals = [s for s in (sa, sb) if s is not None]
    best = min(vals, key=lambda s: s.value)
    part = common_part(jspec.tensor(False))
    dpa = _delta_prime_side(_side_marginals(jspec, "a"), part.component_of_a, part.num_components, tol)
    dpb = _delta_prime_side(_side_marginals(jspec, "b"), part.component_of_b, part.num_components, tol)
    method = "+".join(sorted({s.method for s in vals}))
    return DeltaConstants(best.value, min(dpa, dpb), sa.value if sa else None, sb.value if sb else None,
                          dpa, dpb, best.exact, method)


@dataclass(frozen=True)
class FCertificate:
    """``f(x,y,z) = M(x+y) - 2(M+eps)z + 2xy - (1-eps)(x^2+y^2)``, nonnegative on achievable triples."""

    rho_cond: float
    delta: float
    delta_prime: float
    epsilon: float
    M: float
    a_size: int
    b_size: int
    tau: float = 0.0
    method: str = ""

    def f(self, x, y, z):
        e, M = self.epsilon, self.M
        return M * (x + y) - 2 * (M + e) * z + 2 * x * y - (1 - e) * (x * x + y * y)

    def _f_exact(self, x, y, z) -> Fraction:
        # Fraction(float) is exact, so the identities below hold without rounding
        e, M = Fraction(self.epsilon), Fraction(self.M)
        x, y, z = Fraction(x), Fraction(y), Fraction(z)
        return M * (x + y) - 2 * (M + e) * z + 2 * x * y - (1 - e) * (x * x + y * y)

    def center(self) -> Fraction:
        return self._f_exact(Fraction(1, 2), Fraction(1, 2), Fraction(1, 2))

    def corners(self) -> tuple:
        return tuple(self._f_exact(*c) for c in TRIPLE_CORNERS)


def certificate_epsilon(delta_prime: float, rho: float):
    """Half of the largest admissible ``eps``.

    The leakage bound controls norms, so the final inequality needs the
    squared constant; the smaller of the two forms is used.
    """
    if math.isinf(delta_prime):
        return 0.5 * (1 - rho)
    d, d2 = delta_prime, delta_prime**2
    return 0.5 * min(d * (1 - rho) / (1 + d), d2 * (1 - rho) / (1 + d2))


def build_f_certificate(jspec: JointSourceSpec, tau=DEFAULT_TAU, tol: float = 1e-9,
                        sample_check: int = 0) -> FCertificate:
    """Certificate on the perturbed spec; raises when a precondition fails."""
    pspec = perturb_spec(jspec, tau) if tau else jspec
    part = common_part(pspec.tensor(False))
    rho = max(conditional_maximal_correlation(m, part) for m in pspec.tensor(False))
    if rho >= 1 - tol:
        raise CertificateUnavailable(f"conditional maximal correlation {rho} is not below 1")
    dc = compute_delta_constants(pspec, tol, sample_check)
    eps = certificate_epsilon(dc.delta_prime, rho)
    M = 24 * jspec.a_size * jspec.b_size / dc.delta + 2
    return FCertificate(rho, dc.delta, dc.delta_prime, eps, M, jspec.a_size, jspec.b_size, tau, dc.method)


@dataclass(frozen=True)
class WitsenhausenCert:
    rho: float

    def f(self, x, y, z):
        r = self.rho
        return (x + y) * r - 2 * z + 2 * x * y - (x * x + y * y) * r

    def center(self) -> Fraction:
        r, h = Fraction(self.rho), Fraction(1, 2)
        return (h + h) * r - 2 * h + 2 * h * h - (h * h + h * h) * r


def witsenhausen_certificate(joint) -> WitsenhausenCert:
    """Certificate for i.i.d. copies of a joint with maximal correlation below 1."""
    rho = maximal_correlation(joint).rho
    if rho >= 1 - 1e-12:
        raise CertificateUnavailable("maximal correlation is 1: common data exists")
    return WitsenhausenCert(rho)


# ---------------------------------------------------------------------------
# distributed triples


TRIPLE_CORNERS = ((1, 1, 1), (1, 0, 0), (0, 1, 0), (0, 0, 0))


@dataclass
class TripleSet:
    n: int
    points: np.ndarray
    step_slack: float | None = None

    def unique(self) -> np.ndarray:
        return np.unique(np.round(self.points, 15), axis=0)


def _as_dice(jspec_or_joint) -> np.ndarray:
    if isinstance(jspec_or_joint, JointSourceSpec):
        return jspec_or_joint.tensor(False)
    T = np.asarray(jspec_or_joint, dtype=float)
    return T[None] if T.ndim == 2 else T


def distributed_triples(jspec_or_joint, n: int, budget: int = DEFAULT_BUDGET, f: Callable | None = None) -> TripleSet:
    """``(alpha(I), beta(J), gamma(I, J))`` over all pairs of depth-``n`` zero sets.

    ``alpha`` and ``beta`` take the max over dice of the expected child value,
    ``gamma`` the min.  With ``f`` given, every internal node is also checked
    for ``f(parent) >= min_s E_s[f(children)]`` and the smallest slack is stored.
    """
    T = _as_dice(jspec_or_joint)
    S, A, B = T.shape
    if 2 ** (A**n) * 2 ** (B**n) > budget:
        raise BudgetExceeded(f"2**{A}**{n} * 2**{B}**{n} table pairs exceeds budget {budget}")
    I = (all_tables(A, n) == 0).astype(float)  # (NI, A^n), value 1 on the zero set
    J = (all_tables(B, n) == 0).astype(float)
    NI, NJ = len(I), len(J)
    pa, pb = T.sum(axis=2), T.sum(axis=1)
    alpha = I.copy()
    beta = J.copy()
    gamma = I[:, None, :, None] * J[None, :, None, :]  # (NI, NJ, A^k, B^k)
    slack = math.inf
    for k in range(n, 0, -1):
        ac = alpha.reshape(NI, A ** (k - 1), A)
        bc = beta.reshape(NJ, B ** (k - 1), B)
        gc = gamma.reshape(NI, NJ, A ** (k - 1), A, B ** (k - 1), B)
        alpha = np.einsum("ipa,sa->ips", ac, pa).max(axis=2)
        beta = np.einsum("jqb,sb->jqs", bc, pb).max(axis=2)
        gamma = np.einsum("ijpaqb,sab->ijpqs", gc, T).min(axis=4)
        if f is not None:
            fc = f(ac[:, None, :, :, None, None], bc[None, :, None, None, :, :], gc)
            child = np.einsum("ijpaqb,sab->ijpqs", fc, T).min(axis=4)
            parent = f(alpha[:, None, :, None], beta[None, :, None, :], gamma)
            slack = min(slack, float((parent - child).min()))
    pts = np.stack([np.broadcast_to(alpha[:, None, 0], (NI, NJ)),
                    np.broadcast_to(beta[None, :, 0], (NI, NJ)), gamma[:, :, 0, 0]], axis=-1).reshape(-1, 3)
    return TripleSet(n, pts, slack if f is not None else None)


# ---------------------------------------------------------------------------
# pipeline


@dataclass
class DistributedReport:
    status: str
    reason: str
    rho_per_die: list
    part: CommonPart | None = None
    induced: SourceSpec | None = None
    inner: extractor.Verdict | None = None
    certificate: FCertificate | None = None
    witsenhausen: WitsenhausenCert | None = None
    witsenhausen_die: int | None = None
    rho_cond: float | None = None
    notes: list = field(default_factory=list)


def distributed_verdict(jspec: JointSourceSpec, tol: float = 1e-9, tau=DEFAULT_TAU,
                        sample_check: int = 0) -> DistributedReport:
    """Whether the two parties can agree on an unbiased bit, with a witness or certificate."""
    jspec.check()
    T = jspec.tensor(False)
    rhos = [maximal_correlation(m).rho for m in T]
    for s, r in enumerate(rhos):
        if r < 1 - tol:
            return DistributedReport(IMPOSSIBLE, f"die {s} has maximal correlation {r:.6g} < 1; "
                                     "the adversary can play it on every step", rhos,
                                     witsenhausen=WitsenhausenCert(r), witsenhausen_die=s)
    induced, part = induced_common_spec(jspec)
    if part.num_nonsingleton < 2:
        return DistributedReport(IMPOSSIBLE, "union support graph has fewer than two non-singleton components",
                                 rhos, part, induced)
    v = extractor.verdict(induced, tol)
    rep = DistributedReport(GAP, "", rhos, part, induced, v)
    if v.status == extractor.EXTRACTABLE:
        rep.status, rep.reason = COMMON_EXTRACTABLE, "the common part admits a zero-mean witness"
        return rep
    if v.status == extractor.IMPOSSIBLE and v.subset is None:
        try:
            cert = build_f_certificate(jspec, tau, tol, sample_check)
        except (CertificateUnavailable, HypothesisViolated) as exc:
            rep.reason = f"no nonzero zero-mean function of the common part, but certificate failed: {exc}"
            return rep
        rep.status, rep.reason, rep.certificate, rep.rho_cond = (
            IMPOSSIBLE, "no nonzero function of the common part has zero mean under every die", cert, cert.rho_cond)
        return rep
    rep.reason = ("common part only fails the support-restricted test" if v.status == extractor.IMPOSSIBLE
                  else "common part falls in the gap between the two tests")
    return rep


def sample_joint_sequence(jspec: JointSourceSpec, strategy, n: int, seed: int = 0, trial: int = 0) -> list:
    """``n`` pairs ``(a, b)``; ``strategy`` maps the pair history to a die (or is a die index)."""
    rng = trial_rng(seed, trial)
    T = jspec.tensor(False)
    B = jspec.b_size
    cdfs = [np.cumsum(m.ravel()).tolist() for m in T]
    last = jspec.a_size * B - 1
    out = []
    U = rng.random(2 * n).reshape(n, 2) if n else np.zeros((0, 2))
    for i in range(n):
        u_die, u_sym = U[i]
        if isinstance(strategy, (int, np.integer)):
            s = int(strategy)
        elif strategy == "uniform":
            s = min(int(u_die * len(T)), len(T) - 1)
        else:
            s = int(strategy(out))
        idx = min(bisect.bisect_right(cdfs[s], u_sym), last)
        out.append(divmod(idx, B))
    return out


@dataclass
class CommonExtractResult:
    alice: list
    bob: list
    traces_alice: list
    traces_bob: list
    config: extractor.MartingaleConfig
    witness: extractor.PsiWitness

    @property
    def agreement(self) -> float:
        if not self.alice:
            return 1.0
        return float(np.mean([a == b for a, b in zip(self.alice, self.bob)]))


class CommonWalkStrategy:
    """Adaptive-sign play on the common part: push the walk against its sign."""

    def __init__(self, induced: SourceSpec, part: CommonPart, psi, block_length: int):
        values = psi.as_array()
        self.up, self.down = extractor.adaptive_sign_dice(induced, values)
        self.psi = values
        self.comp = part.component_of_a
        self.n = block_length

        self._seen = 0
        self._y = 0.0

    def __call__(self, history) -> int:
        # incremental walk; restarts when a new history or a new block begins
        if len(history) < self._seen:
            self._seen, self._y = 0, 0.0
        for i in range(self._seen, len(history)):
            if i % self.n == 0:
                self._y = 0.0
            self._y += self.psi[self.comp[history[i][0]]]
        self._seen = len(history)
        y = 0.0 if len(history) % self.n == 0 else self._y
        return self.down if y >= 0 else self.up


def common_extract(jspec: JointSourceSpec, config: extractor.MartingaleConfig, k: int,
                   strategy="adaptive-sign", seed: int = 0, trial: int = 0,
                   report: DistributedReport | None = None) -> CommonExtractResult:
    """Both parties map their symbols to the common part and run the martingale extractor."""
    report = report or distributed_verdict(jspec)
    if report.status != COMMON_EXTRACTABLE:
        raise ValueError(f"verdict is {report.status}, not {COMMON_EXTRACTABLE}")
    psi, part = report.inner.witness, report.part
    if strategy == "adaptive-sign":
        strategy = CommonWalkStrategy(report.induced, part, psi, config.block_length)
    pairs = sample_joint_sequence(jspec, strategy, k * config.block_length, seed, trial)
    ca = [part.component_of_a[a] for a, _ in pairs]
    cb = [part.component_of_b[b] for _, b in pairs]
    ta = extractor.extract_bits(psi, config, ca, k)
    tb = extractor.extract_bits(psi, config, cb, k)
    return CommonExtractResult([t.bit for t in ta], [t.bit for t in tb], ta, tb, config, psi)


# ---------------------------------------------------------------------------
# derandomization


@dataclass(frozen=True)
class DerandomizeResult:
    table_a: np.ndarray
    table_b: np.ndarray
    epsilon: float
    disagree_before: float
    disagree_after: float
    bias_a_after: float
    bias_b_after: float

    @property
    def ok(self) -> bool:
        e = self.epsilon
        return (self.disagree_after <= 3 * e + 1e-12 and self.bias_a_after <= 2 * e + 1e-12
                and self.bias_b_after <= 2 * e + 1e-12)


def derandomize(p0_a, p0_b, joint) -> DerandomizeResult:
    """Round ``Pr[K1 = 0 | a]`` and ``Pr[K2 = 0 | b]`` to deterministic bits (ties go to 0).

    ``joint[a, b]`` is the distribution of the two observations; the
    parties' private coins are independent given them.  ``epsilon`` is the
    measured premise: the largest of the disagreement and the two biases.
    """
    P = np.asarray(joint, dtype=float)
    qa, qb = np.asarray(p0_a, dtype=float), np.asarray(p0_b, dtype=float)
    pa, pb = P.sum(axis=1), P.sum(axis=0)
    disagree = float(np.sum(P * (np.outer(qa, 1 - qb) + np.outer(1 - qa, qb))))
    eps = max(disagree, abs(float(pa @ qa) - 0.5), abs(float(pb @ qb) - 0.5))
    ka = np.where(qa >= 0.5, 0, 1)
    kb = np.where(qb >= 0.5, 0, 1)
    after = float(np.sum(P * (ka[:, None] != kb[None, :])))
    return DerandomizeResult(ka, kb, eps, disagree, after,
                             abs(float(pa @ (ka == 0)) - 0.5), abs(float(pb @ (kb == 0)) - 0.5))


# ---------------------------------------------------------------------------
# decompositions used by the certificate


def common_projection(X, p, comp) -> tuple:
    """Split ``X = U + U'`` with ``U`` constant on components and ``E[U' | component] = 0`` under ``p``."""
    X, p = np.asarray(X, dtype=float), np.asarray(p, dtype=float)
    comp = np.asarray(comp)
    U = np.zeros_like(X)
    for c in np.unique(comp):
        m = comp == c
        w = p[m].sum()
        U[m] = (p[m] @ X[m]) / w if w > 0 else 0.0
    return U, X - U
