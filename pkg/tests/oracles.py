"""Independent reference computations used to freeze expected values.

None of these call into the package's numerical routines; they follow the
definitions directly and are only fast enough for tiny instances.
"""

from __future__ import annotations

import itertools
import math
from fractions import Fraction

import numpy as np
import scipy.optimize
import sympy


def nullspace_dim(rows) -> int:
    """Dimension of the right nullspace by sympy's exact rank."""
    M = sympy.Matrix([[sympy.Rational(str(v)) if not isinstance(v, Fraction) else sympy.Rational(v.numerator, v.denominator)
                       for v in r] for r in rows])
    return M.shape[1] - M.rank()


def prob_zero_under_strategy(dice, zero_set, n, strategy) -> Fraction:
    """Exact ``Pr[C^n in zero_set]`` when ``strategy(history)`` picks the die."""
    k = len(dice[0])
    total = Fraction(0)
    for s in itertools.product(range(k), repeat=n):
        if s not in zero_set:
            continue
        p = Fraction(1)
        for i in range(n):
            p *= Fraction(dice[strategy(s[:i])][s[i]])
        total += p
    return total


def extremes_by_strategy_enumeration(dice, zero_set, n):
    """Min and max of ``Pr[zero]`` over every deterministic strategy tree (tiny ``n`` only)."""
    k, S = len(dice[0]), len(dice)
    histories = [h for i in range(n) for h in itertools.product(range(k), repeat=i)]
    lo, hi = None, None
    for choice in itertools.product(range(S), repeat=len(histories)):
        table = dict(zip(histories, choice))
        p = prob_zero_under_strategy(dice, zero_set, n, lambda h: table[h])
        lo = p if lo is None or p < lo else lo
        hi = p if hi is None or p > hi else hi
    return lo, hi


def base_delta_by_definition(bits, delta):
    """Literal sum ``x_i (1-d)^i (d/(1-d))^{s_i}``."""
    total = 0 * delta
    for i in range(1, len(bits) + 1):
        if bits[i - 1]:
            s = sum(bits[: i - 1])
            total += (1 - delta) ** i * (delta / (1 - delta)) ** s
    return total


def max_correlation_bruteforce(P, grid: int = 400, seed: int = 0) -> float:
    """``max E[XY]`` over zero-mean unit-variance ``X``, ``Y`` by search over ``X``.

    For fixed ``X`` the best ``Y`` is the normalized conditional mean
    ``E[X | B]``, so the objective is ``||E[X|B]||``.  ``X`` is parametrized on
    the unit sphere of zero-mean functions; a grid (or random starts) is
    refined by Nelder-Mead.
    """
    P = np.asarray(P, dtype=float)
    pa, pb = P.sum(axis=1), P.sum(axis=0)
    keep_a, keep_b = pa > 0, pb > 0
    P = P[np.ix_(keep_a, keep_b)]
    pa, pb = pa[keep_a], pb[keep_b]
    A = len(pa)
    if A < 2 or len(pb) < 2:
        return 0.0
    # orthonormal basis (under p_a) of zero-mean functions
    basis = []
    for j in range(1, A):
        v = np.zeros(A)
        v[j] = 1.0
        v -= pa @ v
        for b in basis:
            v -= (pa * v) @ b * b
        nv = math.sqrt(pa @ (v * v))
        if nv > 1e-12:
            basis.append(v / nv)
    B = np.array(basis).T

    def value(theta):
        c = np.asarray(theta, dtype=float)
        c = c / np.linalg.norm(c)
        x = B @ c
        cond = (x @ P) / pb
        return math.sqrt(max(pb @ (cond * cond), 0.0))

    d = B.shape[1]
    if d == 1:
        return value([1.0])
    if d == 2:
        starts = [[math.cos(t), math.sin(t)] for t in np.linspace(0, math.pi, grid, endpoint=False)]
    else:
        rng = np.random.default_rng(seed)
        starts = rng.standard_normal((grid, d))
    best_start = max(starts, key=value)
    res = scipy.optimize.minimize(lambda t: -value(t), best_start, method="Nelder-Mead",
                                  options={"xatol": 1e-13, "fatol": 1e-15, "maxiter": 20000})
    return max(value(best_start), -res.fun)


def components_by_bfs(P, tol=1e-12):
    """Connected components of the bipartite support graph via breadth-first search; returns frozensets."""
    P = np.asarray(P)
    A, B = P.shape
    adj = {("a", i): set() for i in range(A)} | {("b", j): set() for j in range(B)}
    for i in range(A):
        for j in range(B):
            if P[i, j] > tol:
                adj[("a", i)].add(("b", j))
                adj[("b", j)].add(("a", i))
    seen, comps = set(), []
    for v in adj:
        if v in seen:
            continue
        stack, comp = [v], set()
        while stack:
            u = stack.pop()
            if u in comp:
                continue
            comp.add(u)
            stack.extend(adj[u] - comp)
        seen |= comp
        comps.append(frozenset(comp))
    return comps
