"""Small linear-algebra helpers that work over floats and over Fractions."""

from __future__ import annotations

import itertools
import math
from fractions import Fraction

import numpy as np
import scipy.linalg

PIVOT_RTOL = 1e-10


def _is_exact_matrix(rows) -> bool:
    return all(isinstance(v, (Fraction, int)) and not isinstance(v, bool) for r in rows for v in r)


def rref(matrix, rtol: float = PIVOT_RTOL):
    """Reduced row echelon form with partial column pivoting.

    Returns ``(R, pivots)``.  Entries of Fraction/int type are eliminated
    exactly; otherwise pivots smaller than ``rtol`` times the largest entry
    are treated as zero.
    """
    rows = [list(r) for r in matrix]
    exact = _is_exact_matrix(rows)
    if exact:
        rows = [[Fraction(v) for v in r] for r in rows]
        thresh = 0
    else:
        rows = [[float(v) for v in r] for r in rows]
        scale = max((abs(v) for r in rows for v in r), default=0.0)
        thresh = rtol * scale
    m = len(rows)
    ncols = len(rows[0]) if rows else 0
    pivots = []
    r = 0
    for c in range(ncols):
        if r >= m:
            break
        best = max(range(r, m), key=lambda i: abs(rows[i][c]))
        if abs(rows[best][c]) <= thresh:
            if not exact:
                for i in range(r, m):
                    rows[i][c] = 0.0
            continue
        rows[r], rows[best] = rows[best], rows[r]
        piv = rows[r][c]
        rows[r] = [v / piv for v in rows[r]]
        for i in range(m):
            if i != r and rows[i][c] != 0:
                f = rows[i][c]
                rows[i] = [a - f * b for a, b in zip(rows[i], rows[r])]
        pivots.append(c)
        r += 1
    return rows, pivots


def nullspace(matrix, rtol: float = PIVOT_RTOL, ncols: int | None = None) -> list:
    """Basis of the right nullspace, one list per basis vector (free variable set to 1)."""
    rows = [list(r) for r in matrix]
    if not rows:
        if ncols is None:
            raise ValueError("ncols is required for an empty matrix")
        return [[Fraction(int(i == j)) for i in range(ncols)] for j in range(ncols)]
    ncols = len(rows[0])
    exact = _is_exact_matrix(rows)
    R, pivots = rref(rows, rtol)
    one = Fraction(1) if exact else 1.0
    zero = Fraction(0) if exact else 0.0
    basis = []
    for free in (c for c in range(ncols) if c not in pivots):
        v = [zero] * ncols
        v[free] = one
        for i, p in enumerate(pivots):
            v[p] = -R[i][free]
        basis.append(v)
    return basis


def rank(matrix, rtol: float = PIVOT_RTOL) -> int:
    return len(rref(matrix, rtol)[1])


def orthonormal_basis(vectors, dim: int, weight: float = 1.0, tol: float = 1e-10) -> np.ndarray:
    """Columns spanning ``vectors`` that are orthonormal under ``weight * <x, y>``."""
    if len(vectors) == 0:
        return np.zeros((dim, 0))
    V = np.array([[float(v) for v in vec] for vec in vectors]).T
    Q = scipy.linalg.orth(V, rcond=tol)
    return Q / math.sqrt(weight)


def sqrt_fraction(x: Fraction) -> Fraction | None:
    """Exact square root of a nonnegative Fraction when numerator and denominator are squares."""
    x = Fraction(x)
    if x < 0:
        return None
    rn, rd = math.isqrt(x.numerator), math.isqrt(x.denominator)
    if rn * rn == x.numerator and rd * rd == x.denominator:
        return Fraction(rn, rd)
    return None


def pair_differences(G: np.ndarray) -> np.ndarray:
    """Rows ``G[s] - G[t]`` for every ordered pair ``s != t``."""
    k = G.shape[0]
    return np.array([G[s] - G[t] for s in range(k) for t in range(k) if s != t]).reshape(-1, G.shape[1])


def spread(G: np.ndarray, w: np.ndarray) -> float:
    """``max_{s,t} (G[s] - G[t]) . w`` which equals ``max G w - min G w``."""
    vals = G @ w
    return float(vals.max() - vals.min())


def min_spread_vertex(G: np.ndarray, combo_limit: int = 200_000, tol: float = 1e-9):
    """Minimum of :func:`spread` over the Euclidean unit sphere, by vertex enumeration.

    ``spread`` is a seminorm whose unit ball is the polytope
    ``{w : D w <= 1}`` with ``D`` the pair differences.  The minimum of the
    seminorm on the sphere is ``1 / max |w|`` over that polytope, attained at
    a vertex.  Returns ``(value, argmin)`` or ``None`` when there are too
    many candidate vertices.  Value is 0 when the seminorm has a kernel.
    """
    d = G.shape[1]
    if d == 0:
        raise ValueError("empty subspace")
    D = pair_differences(G)
    if D.shape[0] == 0 or np.linalg.matrix_rank(D, tol=tol) < d:
        if D.shape[0] == 0:
            w = np.zeros(d)
            w[0] = 1.0
        else:
            w = scipy.linalg.null_space(D, rcond=tol)[:, 0]
        return 0.0, w
    # unique rows up to sign symmetry: D contains both r and -r
    m = D.shape[0]
    if math.comb(m, d) > combo_limit:
        return None
    best_norm, best_w = 0.0, None
    for idx in itertools.combinations(range(m), d):
        A = D[list(idx)]
        if abs(np.linalg.det(A)) < 1e-12:
            continue
        w = np.linalg.solve(A, np.ones(d))
        if np.all(D @ w <= 1 + 1e-9):
            nrm = float(np.linalg.norm(w))
            if nrm > best_norm:
                best_norm, best_w = nrm, w
    if best_w is None:
        return None
    return 1.0 / best_norm, best_w / best_norm


def min_spread_multistart(G: np.ndarray, restarts: int = 64, seed: int = 0):
    """Multi-start local minimization of :func:`spread` on the unit sphere."""
    import scipy.optimize

    d = G.shape[1]
    rng = np.random.default_rng(seed)
    best = (math.inf, None)

    def obj(w):
        n = np.linalg.norm(w)
        return spread(G, w / n) if n > 0 else math.inf

    for _ in range(restarts):
        w0 = rng.standard_normal(d)
        res = scipy.optimize.minimize(obj, w0, method="Nelder-Mead",
                                      options={"xatol": 1e-10, "fatol": 1e-12, "maxiter": 4000 * d})
        w = res.x / np.linalg.norm(res.x)
        val = spread(G, w)
        if val < best[0]:
            best = (val, w)
    return best


def sampled_spread_min(G: np.ndarray, samples: int = 1_000_000, seed: int = 0, chunk: int = 100_000) -> float:
    """Minimum of :func:`spread` over random points on the unit sphere (an upper bound on the true minimum)."""
    d = G.shape[1]
    rng = np.random.default_rng(seed)
    best = math.inf
    done = 0
    while done < samples:
        k = min(chunk, samples - done)
        W = rng.standard_normal((k, d))
        W /= np.linalg.norm(W, axis=1, keepdims=True)
        vals = G @ W.T
        best = min(best, float((vals.max(axis=0) - vals.min(axis=0)).min()))
        done += k
    return best
