"""Exact minimax analysis of deterministic extractors and the impossibility certificates."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
import scipy.optimize

from .core import (DEFAULT_BUDGET, BudgetExceeded, Distribution, ExtractorTable,
                   RandomizedStrategy, SourceSpec, StrategyTree, enumerate_strings)
from . import linalg

MIN, MAX = "MIN", "MAX"
INTERIOR_SLACK = 1e-6


@dataclass(frozen=True)
class AlphaBeta:
    alpha: object
    beta: object


def _check_budget(spec: SourceSpec, depth: int, budget: int) -> None:
    if spec.alphabet_size**depth > budget:
        raise BudgetExceeded(f"{spec.alphabet_size}**{depth} leaves exceeds budget {budget}")


def _leaf_values(labels: np.ndarray, exact: bool) -> np.ndarray:
    ind = (np.asarray(labels) == 0).astype(int)
    if exact:
        return np.vectorize(Fraction, otypes=[object])(ind)
    return ind.astype(float)


def alpha_beta_batch(spec: SourceSpec, labels: np.ndarray, exact: bool | None = None):
    """Root ``(alpha, beta)`` for a batch of tables given as rows of 0/1 labels.

    In exact mode the dice are scaled to integers by their common denominator
    so the recursion runs over integers; results are returned as Fractions.
    """
    if exact is None:
        exact = spec.exact
    k = spec.alphabet_size
    labels = np.atleast_2d(labels)
    depth = int(round(math.log(labels.shape[1], k))) if k > 1 else 0
    ind = (labels == 0).astype(np.int64)
    if exact:
        P = spec.matrix(True)
        D = math.lcm(*(Fraction(v).denominator for v in P.ravel()))
        Pi = np.array([[int(Fraction(v) * D) for v in row] for row in P], dtype=object)
        if D**depth < 2**62:
            Pi = Pi.astype(np.int64)
        else:
            ind = ind.astype(object)
        a, b = ind, ind.copy()
    else:
        Pi = spec.matrix(False)
        a, b = ind.astype(float), ind.astype(float)
    while a.shape[1] > 1:
        B, L = a.shape
        a = (a.reshape(B, L // k, k) @ Pi.T).min(axis=2)
        b = (b.reshape(B, L // k, k) @ Pi.T).max(axis=2)
    if exact:
        scale = D**depth
        return (np.array([Fraction(int(v), scale) for v in a[:, 0]], dtype=object),
                np.array([Fraction(int(v), scale) for v in b[:, 0]], dtype=object))
    return a[:, 0], b[:, 0]


def alpha_beta(spec: SourceSpec, table: ExtractorTable, budget: int = DEFAULT_BUDGET,
               exact: bool | None = None) -> AlphaBeta:
    """Min and max over adversaries of ``Pr[bit = 0]`` for a deterministic extractor."""
    if table.alphabet_size != spec.alphabet_size:
        raise ValueError("table and spec alphabets differ")
    _check_budget(spec, table.depth, budget)
    a, b = alpha_beta_batch(spec, np.array(table.labels), exact)
    return AlphaBeta(a[0], b[0])


def optimal_strategy(spec: SourceSpec, table: ExtractorTable, objective: str = MAX,
                     budget: int = DEFAULT_BUDGET) -> StrategyTree:
    """Deterministic strategy attaining ``alpha`` (MIN) or ``beta`` (MAX); ties go to the smallest die."""
    _check_budget(spec, table.depth, budget)
    P = spec.matrix()
    k, n = spec.alphabet_size, table.depth
    vals = _leaf_values(np.array(table.labels), spec.exact)
    choice = {}
    for depth in range(n - 1, -1, -1):
        node = vals.reshape(-1, k) @ P.T  # (k**depth, S)
        new = []
        for h_idx, (h, row) in enumerate(zip(enumerate_strings(k, depth), node)):
            row = list(row)
            best = min(row) if objective == MIN else max(row)
            s = row.index(best)
            choice[h] = s
            new.append(best)
        vals = np.array(new, dtype=object if spec.exact else float)
    return StrategyTree(k, n, choice)


@dataclass(frozen=True)
class PhiSet:
    n: int
    points: frozenset

    def as_array(self) -> np.ndarray:
        return np.array(sorted((float(a), float(b)) for a, b in self.points))


def all_tables(alphabet_size: int, n: int, budget: int = DEFAULT_BUDGET) -> np.ndarray:
    """Every 0/1 labelling of the ``alphabet_size**n`` leaves, one per row."""
    L = alphabet_size**n
    if 2**L > budget:
        raise BudgetExceeded(f"2**{L} tables exceeds budget {budget}")
    idx = np.arange(2**L, dtype=np.int64)
    return ((idx[:, None] >> np.arange(L - 1, -1, -1)) & 1).astype(np.int8)


def phi_set(spec: SourceSpec, n: int, budget: int = DEFAULT_BUDGET, exact: bool | None = None) -> PhiSet:
    """All achievable ``(alpha, beta)`` pairs over extractors of depth ``n``."""
    labels = all_tables(spec.alphabet_size, n, budget)
    a, b = alpha_beta_batch(spec, labels, exact)
    return PhiSet(n, frozenset(zip(a.tolist(), b.tolist())))


# ---------------------------------------------------------------------------
# g certificate


def zero_mean_basis(k: int) -> list:
    """Rational spanning set of the functions with zero uniform mean: ``e_0 - e_j``."""
    return [[Fraction(1 if i == 0 else (-1 if i == j else 0)) for i in range(k)] for j in range(1, k)]


@dataclass(frozen=True)
class SpreadMinimum:
    """Minimum over the unit sphere of a subspace of ``max_{s,t} E_s[T] - E_t[T]``."""

    value: float
    exact: Fraction | None
    method: str
    direction: np.ndarray | None = None
    sample_min: float | None = None


def min_spread(P_rows, span_vectors, sample_check: int = 0, seed: int = 0) -> SpreadMinimum:
    """Minimum spread of the dice expectations on the ``||.||_*`` unit sphere of ``span(span_vectors)``.

    ``||T||_*`` is the root mean square of ``T`` under the uniform distribution.
    """
    P = np.array([[float(v) for v in r] for r in P_rows])
    k = P.shape[1]
    Q = linalg.orthonormal_basis(span_vectors, k, weight=1.0 / k)
    d = Q.shape[1]
    if d == 0:
        raise ValueError("subspace is {0}; spread minimum undefined")
    G = P @ Q
    exact_val = None
    if d == 1:
        # closed form on the two-point sphere; exact when the inputs are rational
        v = _rational_direction(span_vectors)
        if v is not None and all(isinstance(x, Fraction) for r in P_rows for x in r):
            means = [sum(Fraction(x) * y for x, y in zip(r, v)) for r in P_rows]
            norm2 = sum(y * y for y in v) / k
            sq = (max(means) - min(means)) ** 2 / norm2
            exact_val = linalg.sqrt_fraction(sq)
            value = float(exact_val) if exact_val is not None else math.sqrt(sq)
        else:
            value = float(G.max() - G.min())
        res = SpreadMinimum(value, exact_val, "closed-form", Q[:, 0])
    else:
        out = linalg.min_spread_vertex(G)
        if out is not None:
            res = SpreadMinimum(out[0], None, "vertex-enumeration", Q @ out[1])
        else:
            val, w = linalg.min_spread_multistart(G, seed=seed)
            res = SpreadMinimum(val, None, "numerical", Q @ w)
    if sample_check:
        sm = linalg.sampled_spread_min(G, sample_check, seed)
        res = SpreadMinimum(res.value, res.exact, res.method, res.direction, sm)
    return res


def _rational_direction(vectors):
    """A single nonzero rational vector spanning a 1-dimensional ``span(vectors)``."""
    for v in vectors:
        if all(isinstance(x, (Fraction, int)) for x in v) and any(x != 0 for x in v):
            return [Fraction(x) for x in v]
    return None


@dataclass(frozen=True)
class GEpsilonCert:
    """``g(x) = x + eps * x * (1 - x)`` separating achievable pairs from ``(1/2, 1/2)``."""

    epsilon: float
    delta: float
    alphabet_size: int
    m_f: float = 1.0
    delta_exact: Fraction | None = None
    method: str = ""
    sample_min: float | None = None

    def f(self, x):
        return x * (1 - x)

    def g(self, x):
        return x + self.epsilon * self.f(x)

    def margin(self) -> float:
        """Smallest Chebyshev distance to ``(1/2, 1/2)`` of any point with ``beta >= g(alpha)``."""
        e = float(self.epsilon)
        return (math.sqrt(4 + e * e) - 2) / (2 * e)


def build_g_certificate(spec: SourceSpec, tol: float = 1e-9, sample_check: int = 0) -> GEpsilonCert | None:
    """Certificate for impossibility, or None when the gap constant vanishes."""
    k = spec.alphabet_size
    if k < 2:
        return None
    span = zero_mean_basis(k)
    sm = min_spread(spec.dice if spec.exact else spec.matrix(False).tolist(), span, sample_check)
    if sm.value <= tol:
        return None
    m_f = 1
    if sm.exact is not None:
        eps = Fraction(1, 2) * min(Fraction(1, m_f), sm.exact / (2 * m_f * k))
        return GEpsilonCert(eps, float(sm.exact), k, m_f, sm.exact, sm.method, sm.sample_min)
    eps = 0.5 * min(1.0 / m_f, sm.value / (2 * m_f * k))
    return GEpsilonCert(eps, sm.value, k, m_f, None, sm.method, sm.sample_min)


def check_g_dominates(cert: GEpsilonCert, phi, tol: float = 1e-12) -> bool:
    """True iff ``beta >= g(alpha) - tol`` for every point."""
    pts = phi.points if isinstance(phi, PhiSet) else phi
    return all(float(b) >= float(cert.g(float(a))) - tol for a, b in pts)


# ---------------------------------------------------------------------------
# tilting adversary


class NotInterior(ValueError):
    pass


class HullViolation(ValueError):
    def __init__(self, history, conditional):
        super().__init__(f"conditional {np.round(conditional, 6).tolist()} after history "
                         f"{''.join(map(str, history)) or '<empty>'} lies outside the dice hull")
        self.history = history
        self.conditional = conditional


def hull_weights(P: np.ndarray, target: np.ndarray, slack: float = 0.0):
    """Weights ``lam >= slack`` summing to 1 with ``lam @ P = target``, or None."""
    S = P.shape[0]
    A_eq = np.vstack([P.T, np.ones((1, S))])
    b_eq = np.concatenate([target, [1.0]])
    res = scipy.optimize.linprog(np.zeros(S), A_eq=A_eq, b_eq=b_eq, bounds=[(slack, None)] * S, method="highs")
    if res.status != 0:
        return None
    lam = np.clip(res.x, 0, None)
    return lam / lam.sum()


@dataclass(frozen=True)
class TiltResult:
    strategy: RandomizedStrategy
    achieved: float
    target_bit: int
    core_set: tuple
    q_mass: float
    distribution: np.ndarray


def tilt_adversary(spec: SourceSpec, table: ExtractorTable, q, eps: float,
                   budget: int = DEFAULT_BUDGET) -> TiltResult:
    """Randomized adversary boosting a half-mass part of the zero set by ``1 + eps``.

    ``achieved`` is the probability of ``target_bit`` (0, or 1 when the
    complement table had to be used).
    """
    _check_budget(spec, table.depth, budget)
    P = spec.matrix(False)
    qv = Distribution(tuple(q)).as_array().astype(float) if not isinstance(q, Distribution) else q.as_array().astype(float)
    if hull_weights(P, qv, INTERIOR_SLACK) is None:
        raise NotInterior(f"q = {qv.tolist()} is not interior to the dice hull")
    k, n = spec.alphabet_size, table.depth
    qn = np.ones(1)
    for _ in range(n):
        qn = np.outer(qn, qv).ravel()
    target_bit = 0
    member = np.array(table.labels) == 0
    if qn[member].sum() < 0.5:
        member, target_bit = ~member, 1
    core = member.copy()
    mass = qn[core].sum()
    order = sorted(np.flatnonzero(member), key=lambda i: -qn[i])
    for i in order:
        if mass - qn[i] >= 0.5:
            core[i] = False
            mass -= qn[i]
    Q0 = qn[core].sum()
    if (1 + eps) * Q0 >= 1:
        raise HullViolation((), np.array([(1 + eps) * Q0]))
    kappa = (1 - (1 + eps) * Q0) / (1 - Q0)
    pt = np.where(core, (1 + eps) * qn, kappa * qn)
    weights = {}
    level = pt
    levels = [pt]
    for _ in range(n):
        level = level.reshape(-1, k).sum(axis=1)
        levels.append(level)
    levels.reverse()  # levels[d] has k**d entries
    for d in range(n):
        parent, child = levels[d], levels[d + 1].reshape(-1, k)
        for h_idx, h in enumerate(enumerate_strings(k, d)):
            if parent[h_idx] <= 0:
                continue
            cond = child[h_idx] / parent[h_idx]
            lam = hull_weights(P, cond)
            if lam is None:
                raise HullViolation(h, cond)
            weights[h] = tuple(lam.tolist())
    default = tuple(hull_weights(P, qv).tolist())
    achieved = float(pt[member].sum())
    return TiltResult(RandomizedStrategy(spec.num_dice, weights, default), achieved, target_bit,
                      tuple(int(i) for i in np.flatnonzero(core)), float(Q0), pt)
