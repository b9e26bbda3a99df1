"""Witness search, verdicts and the martingale stopping-time extractor."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .core import DEFAULT_TOL, SourceSpec, trial_rng
from .linalg import nullspace

EXTRACTABLE = "EXTRACTABLE"
IMPOSSIBLE = "IMPOSSIBLE"
GAP = "GAP"

SUBSET_BUDGET = 16
# mixing directions used when no single basis vector has positive variance everywhere
PAIR_DIRECTIONS = ((1, 1), (1, -1), (1, 2), (2, 1), (1, -2), (2, -1), (1, 3), (3, 1))


@dataclass(frozen=True)
class PsiWitness:
    """Zero-mean test function ``psi`` on the alphabet, scaled so ``max|psi| = 1``."""

    values: tuple
    max_abs: float
    min_variance: float
    means: tuple = ()
    variances: tuple = ()

    def as_array(self) -> np.ndarray:
        return np.array([float(v) for v in self.values])

    def is_valid(self, tol: float = DEFAULT_TOL) -> bool:
        return max(abs(float(m)) for m in self.means) <= tol and float(self.min_variance) > tol


def psi_moments(spec: SourceSpec, values) -> tuple:
    """Means and variances of ``values`` under every die."""
    exact = spec.exact and all(isinstance(v, (Fraction, int)) for v in values)
    P = spec.matrix(exact=exact)
    v = np.array(list(values), dtype=object if exact else float)
    means = P @ v
    second = P @ (v * v)
    var = second - means * means
    return tuple(means.tolist()), tuple(var.tolist())


def make_witness(spec: SourceSpec, values) -> PsiWitness:
    """Normalize ``values`` (max|.| = 1, first nonzero entry positive) and attach moments."""
    vals = list(values)
    scale = max(abs(v) for v in vals)
    if scale == 0:
        raise ValueError("psi is identically zero")
    first = next(v for v in vals if v != 0)
    sign = 1 if first > 0 else -1
    vals = [sign * v / scale for v in vals]
    means, var = psi_moments(spec, vals)
    return PsiWitness(tuple(vals), 1 if isinstance(scale, Fraction) else 1.0, min(var), means, var)


def find_psi(spec: SourceSpec, tol: float = DEFAULT_TOL) -> PsiWitness | None:
    """Nonzero ``psi`` with zero mean and positive variance under every die, or None."""
    basis = nullspace(spec.matrix())
    if not basis:
        return None
    candidates = [list(b) for b in basis]
    for i, j in itertools.combinations(range(len(basis)), 2):
        for a, b in PAIR_DIRECTIONS:
            candidates.append([a * x + b * y for x, y in zip(basis[i], basis[j])])
    for vec in candidates:
        if all(v == 0 for v in vec):
            continue
        w = make_witness(spec, vec)
        if float(w.min_variance) > tol and max(abs(float(m)) for m in w.means) <= tol:
            return w
    return None


def restricted_support(spec: SourceSpec, subset: Iterable[int]) -> list:
    subset = list(subset)
    return [c for c in range(spec.alphabet_size) if any(spec.dice[s][c] > 0 for s in subset)]


def check_restricted_necessary(spec: SourceSpec, subset: Iterable[int]) -> bool:
    """True iff no nonzero ``psi`` supported on the dice's joint support has zero mean under every die in ``subset``."""
    subset = sorted(set(subset))
    if not subset:
        raise ValueError("subset of dice must be nonempty")
    cols = restricted_support(spec, subset)
    if not cols:
        raise ValueError("dice in subset have empty support")
    rows = [[spec.dice[s][c] for c in cols] for s in subset]
    return len(nullspace(rows)) == 0


@dataclass(frozen=True)
class Verdict:
    status: str
    witness: PsiWitness | None = None
    note: str = ""
    subset: tuple | None = None


def verdict(spec: SourceSpec, tol: float = DEFAULT_TOL, subset_budget: int = SUBSET_BUDGET) -> Verdict:
    """EXTRACTABLE with a witness, IMPOSSIBLE, or GAP when neither test fires."""
    spec.check()
    w = find_psi(spec, tol)
    if w is not None:
        return Verdict(EXTRACTABLE, w, "zero-mean witness with positive variance found")
    if not spec.is_degenerate():
        if nullspace(spec.matrix()):
            # non-degenerate dice cannot give a zero variance to a nonzero zero-mean psi
            return Verdict(GAP, None, "nullspace nontrivial but no positive-variance witness found")
        return Verdict(IMPOSSIBLE, None, "only psi = 0 has zero mean under every die")
    k = spec.num_dice
    if k > subset_budget:
        return Verdict(GAP, None, f"degenerate spec with {k} dice exceeds subset budget {subset_budget}")
    for r in range(1, k + 1):
        for sub in itertools.combinations(range(k), r):
            if check_restricted_necessary(spec, sub):
                return Verdict(IMPOSSIBLE, None, "support-restricted system has only the zero solution", sub)
    return Verdict(GAP, None, "degenerate spec: neither the sufficient nor the restricted necessary test fires")


# ---------------------------------------------------------------------------
# martingale extractor


@dataclass(frozen=True)
class MartingaleConfig:
    threshold: float
    block_length: int

    def __post_init__(self):
        if self.threshold < 1:
            raise ValueError("threshold M must be >= 1")
        if self.block_length < 1:
            raise ValueError("block length n must be >= 1")


def default_threshold(n: int) -> int:
    """Smallest integer ``M`` with ``M**3 >= n``."""
    m = max(1, round(n ** (1 / 3)))
    while m**3 < n:
        m += 1
    while m > 1 and (m - 1) ** 3 >= n:
        m -= 1
    return m


# slack for comparing float walk positions against the threshold
WALK_TOL = 1e-9


@dataclass(frozen=True)
class BitTrace:
    bit: int
    tau: int
    y_tau: float


class StreamExhausted(ValueError):
    pass


def extract_bit(psi, config: MartingaleConfig, stream) -> BitTrace:
    """Run the walk ``Y_t = Y_{t-1} + psi(c_t)`` until ``|Y_t| >= M`` or ``n`` symbols are read.

    ``stream`` is an iterable of symbols; only the symbols up to the stopping
    time are consumed from an iterator.
    """
    values = psi.as_array() if isinstance(psi, PsiWitness) else np.asarray(psi, dtype=float)
    M, n = config.threshold, config.block_length
    it = iter(stream)
    y = 0.0
    for t in range(1, n + 1):
        try:
            c = next(it)
        except StopIteration:
            raise StreamExhausted(f"stream ended after {t - 1} symbols, before the stopping time") from None
        y += values[int(c)]
        if abs(y) >= M - WALK_TOL:
            return BitTrace(int(y >= M - WALK_TOL), t, y)
    return BitTrace(int(y >= M - WALK_TOL), n, y)


def extract_bits(psi, config: MartingaleConfig, stream: Sequence, k: int) -> list:
    """Extract ``k`` bits from consecutive length-``n`` blocks of ``stream``."""
    n = config.block_length
    stream = list(stream)
    if len(stream) < k * n:
        raise StreamExhausted(f"need {k * n} symbols for {k} blocks, got {len(stream)}")
    return [extract_bit(psi, config, stream[i * n:(i + 1) * n]) for i in range(k)]


@dataclass(frozen=True)
class BiasBracket:
    lo: float
    hi: float
    tail: float


def bias_bracket(config: MartingaleConfig, psi) -> BiasBracket:
    """Guaranteed range for ``Pr[bit = 1]`` and the bound on ``Pr[tau = n]``."""
    m = float(psi.max_abs)
    v = float(psi.min_variance)
    if v <= 0:
        raise ValueError("witness variance must be positive")
    M, n = float(config.threshold), config.block_length
    tail = (M + m) ** 2 / (v * n)
    return BiasBracket(M / (2 * M + m) - tail, (M + m) / (2 * M + m) + tail, tail)


# ---------------------------------------------------------------------------
# vectorized Monte Carlo


def _policy_dice(spec: SourceSpec, psi: np.ndarray, policy: str):
    """Return ``choose(y, u_die) -> die index array`` for a named adversary policy."""
    P = spec.matrix(exact=False)
    S = P.shape[0]
    if policy == "uniform":
        cdf = np.cumsum(np.full(S, 1.0 / S))
        return lambda y, u: np.minimum(np.searchsorted(cdf, u, side="right"), S - 1)
    if policy.startswith("constant"):
        s = int(policy.split(":")[1]) if ":" in policy else 0
        return lambda y, u: np.full(y.shape, s, dtype=int)
    if policy == "adaptive-sign":
        up, down = adaptive_sign_dice(spec, psi)
        return lambda y, u: np.where(y >= 0, down, up)
    raise ValueError(f"unknown policy {policy!r}")


def adaptive_sign_dice(spec: SourceSpec, psi: np.ndarray) -> tuple:
    """Dice maximizing ``Pr[psi > 0]`` and ``Pr[psi < 0]``: pushed against the sign of the walk."""
    P = spec.matrix(exact=False)
    up = int(np.argmax(P[:, psi > 0].sum(axis=1)))
    down = int(np.argmax(P[:, psi < 0].sum(axis=1)))
    return up, down


@dataclass(frozen=True)
class WalkSignStrategy:
    """History-to-die rule playing the adaptive-sign policy for a given ``psi``."""

    psi: tuple
    up: int
    down: int

    @classmethod
    def for_spec(cls, spec: SourceSpec, psi) -> "WalkSignStrategy":
        values = psi.as_array() if isinstance(psi, PsiWitness) else np.asarray(psi, dtype=float)
        up, down = adaptive_sign_dice(spec, values)
        return cls(tuple(values.tolist()), up, down)

    def __call__(self, history) -> int:
        y = sum(self.psi[c] for c in history)
        return self.down if y >= 0 else self.up


@dataclass
class WalkResults:
    bits: np.ndarray
    tau: np.ndarray
    y_tau: np.ndarray
    config: MartingaleConfig = field(repr=False)

    def summary(self) -> dict:
        t = len(self.bits)
        p1 = float(self.bits.mean()) if t else float("nan")
        return {
            "trials": t,
            "freq_one": p1,
            "sigma": math.sqrt(max(p1 * (1 - p1), 0.25 / max(t, 1)) / max(t, 1)),
            "freq_tau_eq_n": float((self.tau == self.config.block_length).mean()) if t else float("nan"),
            "mean_y_tau": float(self.y_tau.mean()) if t else float("nan"),
            "std_y_tau": float(self.y_tau.std()) if t else float("nan"),
            "mean_tau": float(self.tau.mean()) if t else float("nan"),
            "max_tau": int(self.tau.max()) if t else 0,
        }


def simulate_walks(spec: SourceSpec, psi, config: MartingaleConfig, trials: int,
                   policy: str = "adaptive-sign", seed: int = 0, chunk: int = 1024,
                   first_trial: int = 0) -> WalkResults:
    """Monte Carlo of :func:`extract_bit` against a named adversary policy.

    Trial ``i`` draws two uniforms per step (die, symbol) from
    ``trial_rng(seed, first_trial + i)``, so its outcome matches
    :func:`svx.core.sample_sequence` with the same strategy and does not depend
    on how trials are batched.
    """
    values = psi.as_array() if isinstance(psi, PsiWitness) else np.asarray(psi, dtype=float)
    choose = _policy_dice(spec, values, policy)
    cdfs = np.cumsum(spec.matrix(exact=False), axis=1)
    K = cdfs.shape[1]
    M, n = float(config.threshold), config.block_length
    rngs = [trial_rng(seed, first_trial + i) for i in range(trials)]
    bits = np.zeros(trials, dtype=np.int8)
    tau = np.full(trials, n, dtype=np.int64)
    y_tau = np.zeros(trials)
    active = np.arange(trials)
    y = np.zeros(trials)
    t = 0
    while active.size and t < n:
        L = min(chunk, n - t)
        U = np.stack([rngs[i].random(2 * L).reshape(L, 2) for i in active])
        ya = y[active]
        alive = np.ones(active.size, dtype=bool)
        stop_t = np.full(active.size, -1, dtype=np.int64)
        for j in range(L):
            die = choose(ya, U[:, j, 0])
            sym = (U[:, j, 1][:, None] >= cdfs[die]).sum(axis=1)
            np.minimum(sym, K - 1, out=sym)
            ya = np.where(alive, ya + values[sym], ya)
            hit = alive & (np.abs(ya) >= M - WALK_TOL)
            stop_t[hit] = t + j + 1
            alive &= ~hit
            if not alive.any():
                break
        y[active] = ya
        done = stop_t > 0
        idx = active[done]
        tau[idx] = stop_t[done]
        y_tau[idx] = ya[done]
        bits[idx] = (ya[done] >= M - WALK_TOL).astype(np.int8)
        active = active[~done]
        t += L
    if active.size:
        y_tau[active] = y[active]
        bits[active] = (y[active] >= M - WALK_TOL).astype(np.int8)
    return WalkResults(bits, tau, y_tau, config)
