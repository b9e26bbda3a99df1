"""Base-delta expansions and the achievable-region curve of the binary source.

The binary source has dice ``(delta, 1 - delta)`` and ``(1 - delta, delta)``.
For a bit string ``x`` the expansion ``(0.x)_delta`` is the largest
probability of output 0 that an adversary can force on the left-prefix
extractor whose zero set has ``int(x, 2)`` leaves.
"""

from __future__ import annotations

import csv
import io
import itertools
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .core import ExtractorTable, SourceSpec
from .adversary import all_tables, alpha_beta_batch

DEFAULT_LEMMA_DELTAS = tuple(Fraction(k, 20) for k in range(1, 20))


def binary_spec(delta) -> SourceSpec:
    d = Fraction(delta) if isinstance(delta, (Fraction, int, str)) else float(delta)
    return SourceSpec.from_dice([[d, 1 - d], [1 - d, d]])


def base_delta(bits, delta):
    """``sum_i x_i (1-delta)^i (delta/(1-delta))^{s_i}`` with ``s_i`` the number of ones before position ``i``."""
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0, 1)")
    bits = [int(b) for b in (bits if not isinstance(bits, str) else list(bits))]
    r = delta / (1 - delta)
    total = 0 * delta
    ones = 0
    for i, x in enumerate(bits, start=1):
        if x:
            total += (1 - delta) ** i * r**ones
            ones += 1
    return total


def int_bits(x: int, n: int) -> tuple:
    return tuple((x >> (n - 1 - i)) & 1 for i in range(n))


def all_base_delta(n: int, delta) -> np.ndarray:
    """``(0.x)_delta`` for every length-``n`` string ``x`` in lexicographic order.

    Uses ``v(1y) = (1 - delta) + delta v(y)`` and ``v(0y) = (1 - delta) v(y)``.
    Returns an object array of Fractions when ``delta`` is a Fraction.
    """
    exact = isinstance(delta, Fraction)
    v = np.array([Fraction(0)] if exact else [0.0], dtype=object if exact else float)
    for _ in range(n):
        v = np.concatenate([(1 - delta) * v, (1 - delta) + delta * v])
    return v


@dataclass(frozen=True)
class CurvePoint:
    alpha: float
    beta: float


def f_delta_curve(delta, n_max: int) -> np.ndarray:
    """Sorted, deduplicated ``((0.x)_{1-delta}, (0.x)_delta)`` over strings of length ``<= n_max``, plus ``(1, 1)``.

    Strings shorter than ``n_max`` pad with zeros to the same values, so only
    length ``n_max`` is enumerated.
    """
    if not 0 < float(delta) < 0.5:
        raise ValueError("delta must lie in (0, 1/2)")
    if not 0 <= n_max <= 20:
        raise ValueError("n_max must lie in [0, 20]")
    d = float(delta)
    pts = np.column_stack([all_base_delta(n_max, 1 - d), all_base_delta(n_max, d)])
    pts = np.vstack([pts, [[1.0, 1.0]]])
    pts = np.unique(pts, axis=0)
    return pts[np.lexsort((pts[:, 1], pts[:, 0]))]


def curve_gap(points) -> float:
    """Smallest Chebyshev distance from a point of the cloud to ``(1/2, 1/2)``."""
    pts = np.asarray(points, dtype=float)
    return float(np.max(np.abs(pts - 0.5), axis=1).min())


def left_prefix_table(n: int, x: int) -> ExtractorTable:
    """Binary depth-``n`` table whose first ``x`` leaves are labelled 0."""
    if not 0 <= x <= 2**n:
        raise ValueError(f"x must lie in [0, 2**{n}]")
    return ExtractorTable(2, n, tuple([0] * x + [1] * (2**n - x)))


def prefix_value(x: int, n: int, delta):
    """Expansion of the ``n``-bit binary form of ``x``; 1 when ``x = 2**n``."""
    if x == 2**n:
        return 1 + 0 * delta
    return base_delta(int_bits(x, n), delta)


@dataclass
class PrefixReport:
    ok: bool
    checked: int
    violations: list = field(default_factory=list)


def verify_prefix_optimality(delta, n: int) -> PrefixReport:
    """Every zero set of size ``x`` has ``beta >= (0.bin x)_delta``, with equality on left prefixes."""
    if n > 4:
        raise ValueError("exhaustive check limited to n <= 4")
    delta = Fraction(delta) if not isinstance(delta, float) else Fraction(str(delta))
    spec = binary_spec(delta)
    labels = all_tables(2, n)
    _, beta = alpha_beta_batch(spec, labels, exact=True)
    sizes = (labels == 0).sum(axis=1)
    targets = [prefix_value(x, n, delta) for x in range(2**n + 1)]
    bad = []
    for row, b, x in zip(labels, beta, sizes):
        if b < targets[x]:
            bad.append(("below", "".join(map(str, row)), b, targets[x]))
    for x in range(2**n + 1):
        t = left_prefix_table(n, x)
        _, b = alpha_beta_batch(spec, np.array(t.labels), exact=True)
        if b[0] != targets[x]:
            bad.append(("prefix", t.bitstring(), b[0], targets[x]))
    return PrefixReport(not bad, len(labels), bad)


@dataclass
class LemmaReport:
    ok: bool
    checked: int
    failures: int
    corollary_failures: int
    counterexample: tuple | None = None
    failures_by_delta: dict = field(default_factory=dict)


def _lemma_lhs_rhs(n: int, delta):
    """Triples ``x + y = z`` (``x >= y``, all ``< 2**n``) and the two sides of the main inequality."""
    v = all_base_delta(n, delta)
    xs, ys = np.meshgrid(np.arange(2**n), np.arange(2**n), indexing="ij")
    mask = (xs >= ys) & (xs + ys < 2**n)
    x, y = xs[mask], ys[mask]
    z = x + y
    lhs = v[x] + (delta / (1 - delta)) * v[y]
    return x, y, z, lhs, v[z]


def _corollary_lhs_rhs(n: int, delta):
    """Integer triples ``x + y = z`` with ``x >= y``, ``x, y < 2**n``; right side uses ``n + 1`` bits."""
    v = all_base_delta(n, delta)
    w = all_base_delta(n + 1, delta)
    xs, ys = np.meshgrid(np.arange(2**n), np.arange(2**n), indexing="ij")
    mask = xs >= ys
    x, y = xs[mask], ys[mask]
    z = x + y
    lhs = (1 - delta) * v[x] + delta * v[y]
    return x, y, z, lhs, w[z]


def verify_basedelta_lemma(n_max: int = 8, deltas=DEFAULT_LEMMA_DELTAS, screen_tol: float = 1e-12) -> LemmaReport:
    """Check the carry inequality for expansions over all lengths ``<= n_max`` and every ``delta``.

    Main form: ``(0.x)_d + d/(1-d) (0.y)_d >= (0.z)_d`` whenever the binary
    values satisfy ``x + y = z`` and ``x >= y``.  Second form:
    ``(1-d)(0.x)_d + d (0.y)_d >= (0.z)_d`` with ``z`` written on one more bit.
    A float screen flags candidates which are then rechecked in exact arithmetic.
    """
    if n_max > 8:
        raise ValueError("n_max must be <= 8")
    checked = fails = cfails = 0
    first = None
    by_delta = {}
    for delta in deltas:
        dq = Fraction(delta) if not isinstance(delta, float) else Fraction(str(delta))
        df = float(dq)
        nd = 0
        for n in range(1, n_max + 1):
            for form, fn in (("main", _lemma_lhs_rhs), ("corollary", _corollary_lhs_rhs)):
                x, y, z, lhs, rhs = fn(n, df)
                checked += len(x)
                suspects = np.flatnonzero(lhs < rhs + screen_tol)
                if suspects.size == 0:
                    continue
                ve = all_base_delta(n, dq)
                we = all_base_delta(n + 1, dq) if form == "corollary" else ve
                for i in suspects:
                    xi, yi, zi = int(x[i]), int(y[i]), int(z[i])
                    if form == "main":
                        l = ve[xi] + dq / (1 - dq) * ve[yi]
                    else:
                        l = (1 - dq) * ve[xi] + dq * ve[yi]
                    if l < we[zi]:
                        nd += 1
                        if form == "main":
                            fails += 1
                        else:
                            cfails += 1
                        if first is None:
                            nz = n if form == "main" else n + 1
                            first = (form, dq, "".join(map(str, int_bits(xi, n))),
                                     "".join(map(str, int_bits(yi, n))),
                                     "".join(map(str, int_bits(zi, nz))))
        by_delta[dq] = nd
    return LemmaReport(fails + cfails == 0, checked, fails, cfails, first, by_delta)


def domination_frontier(points) -> np.ndarray:
    """Points not dominated by another point (domination: smaller-or-equal alpha and larger-or-equal beta)."""
    pts = np.unique(np.asarray(points, dtype=float), axis=0)
    order = np.lexsort((-pts[:, 1], pts[:, 0]))
    pts = pts[order]
    keep = []
    best_beta = -np.inf
    for a, b in pts:
        if b > best_beta:
            keep.append((a, b))
            best_beta = b
    return np.array(keep)


def dominated_by(points, curve, tol: float = 1e-12) -> np.ndarray:
    """For each point, whether some curve point has ``alpha <= a + tol`` and ``beta >= b - tol``."""
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    cur = np.asarray(curve, dtype=float)
    order = np.argsort(cur[:, 0], kind="stable")
    ca = cur[order, 0]
    cb = np.maximum.accumulate(cur[order, 1])
    idx = np.searchsorted(ca, pts[:, 0] + tol, side="right") - 1
    ok = idx >= 0
    out = np.zeros(len(pts), dtype=bool)
    out[ok] = cb[idx[ok]] >= pts[ok, 1] - tol
    return out


def dominates_curve_point(points, curve, tol: float = 1e-12) -> np.ndarray:
    """For each point, whether it dominates some curve point: ``alpha <= a_F + tol`` and ``beta >= b_F - tol``.

    This is the direction in which achievable pairs relate to the curve: the
    left-prefix table of the same size has the largest alpha and the smallest
    beta.  Unlike :func:`dominated_by`, it excludes ``(1/2, 1/2)``.
    """
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    cur = np.asarray(curve, dtype=float)
    order = np.argsort(cur[:, 0], kind="stable")
    ca = cur[order, 0]
    # smallest beta among curve points with alpha_F >= a
    cb = np.minimum.accumulate(cur[order, 1][::-1])[::-1]
    idx = np.searchsorted(ca, pts[:, 0] - tol, side="left")
    ok = idx < len(ca)
    out = np.zeros(len(pts), dtype=bool)
    out[ok] = cb[idx[ok]] <= pts[ok, 1] + tol
    return out


def curve_to_csv(points) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["alpha", "beta"])
    for a, b in np.asarray(points, dtype=float):
        w.writerow([f"{a:.17g}", f"{b:.17g}"])
    return buf.getvalue()


def curve_from_csv(text: str) -> np.ndarray:
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or rows[0] != ["alpha", "beta"]:
        raise ValueError("expected header alpha,beta")
    return np.array([[float(a), float(b)] for a, b in rows[1:]]).reshape(-1, 2)
