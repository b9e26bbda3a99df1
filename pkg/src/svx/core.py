"""Value types for adversarial dice sources, extractor tables and strategies.

Probabilities are either floats or :class:`fractions.Fraction`.  A spec whose
entries are all fractions (or ints) is in *exact mode*; the dynamic programs
downstream then run over rationals and return exact results.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterator, Mapping, Sequence, Union

import numpy as np

Number = Union[float, Fraction]

DEFAULT_TOL = 1e-9
NORMALIZATION_TOL = 1e-12
DEFAULT_BUDGET = 2**24


class BudgetExceeded(ValueError):
    """Raised when an enumeration would exceed the configured budget."""


class DepthMismatch(ValueError):
    pass


def is_exact(x) -> bool:
    return isinstance(x, (Fraction, int)) and not isinstance(x, bool)


def as_number(x, exact: bool = False) -> Number:
    """Coerce ``x`` (int, float, Fraction or ``"p/q"`` string) to a probability value."""
    if isinstance(x, str):
        x = x.strip()
        if "/" in x:
            return Fraction(x)
        return Fraction(x) if exact else float(x)
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int) and not isinstance(x, bool):
        return Fraction(x)
    if exact:
        return Fraction(str(x))
    return float(x)


def to_array(rows, exact: bool) -> np.ndarray:
    if exact:
        return np.array([[Fraction(v) for v in r] for r in rows], dtype=object)
    return np.array([[float(v) for v in r] for r in rows], dtype=float)


@dataclass(frozen=True)
class Distribution:
    """A probability vector over a finite alphabet."""

    probs: tuple

    def __post_init__(self):
        probs = tuple(as_number(p) for p in self.probs)
        object.__setattr__(self, "probs", probs)
        if not probs:
            raise ValueError("empty distribution")
        if any(p < 0 for p in probs):
            raise ValueError(f"negative probability in {probs}")
        total = sum(probs)
        if all(is_exact(p) for p in probs):
            if total != 1:
                raise ValueError(f"probabilities sum to {total}, not 1")
        elif abs(float(total) - 1.0) > NORMALIZATION_TOL:
            raise ValueError(f"probabilities sum to {float(total)!r}, not 1")

    @property
    def exact(self) -> bool:
        return all(is_exact(p) for p in self.probs)

    def __len__(self):
        return len(self.probs)

    def as_array(self) -> np.ndarray:
        if self.exact:
            return np.array(self.probs, dtype=object)
        return np.array([float(p) for p in self.probs])


@dataclass(frozen=True)
class SourceSpec:
    """A finite family of dice over the alphabet ``{0, ..., alphabet_size - 1}``.

    Construction only normalizes the entries; use :func:`validate_spec` for a
    report or :meth:`check` to raise on invalid input.
    """

    alphabet_size: int
    dice: tuple
    labels: tuple | None = None

    def __post_init__(self):
        dice = tuple(tuple(as_number(p) for p in die) for die in self.dice)
        object.__setattr__(self, "dice", dice)
        if self.labels is not None:
            object.__setattr__(self, "labels", tuple(self.labels))

    @classmethod
    def from_dice(cls, dice, labels=None) -> "SourceSpec":
        dice = [list(d) for d in dice]
        if not dice:
            raise ValueError("a spec needs at least one die")
        return cls(len(dice[0]), tuple(tuple(d) for d in dice), labels)

    @property
    def num_dice(self) -> int:
        return len(self.dice)

    @property
    def exact(self) -> bool:
        return all(is_exact(p) for die in self.dice for p in die)

    def matrix(self, exact: bool | None = None) -> np.ndarray:
        """Dice as a ``(num_dice, alphabet_size)`` array (object dtype in exact mode)."""
        if exact is None:
            exact = self.exact
        return to_array(self.dice, exact)

    def to_float(self) -> "SourceSpec":
        return SourceSpec(self.alphabet_size, tuple(tuple(float(p) for p in d) for d in self.dice), self.labels)

    def is_degenerate(self, tol: float = 0.0) -> bool:
        return any(p <= tol for die in self.dice for p in die)

    def check(self) -> None:
        report = validate_spec(self)
        if not report.ok:
            raise ValueError("invalid source spec: " + "; ".join(report.violations))


@dataclass(frozen=True)
class JointSourceSpec:
    """A family of joint dice ``p_s(a, b)`` over ``A x B``."""

    a_size: int
    b_size: int
    dice: tuple

    def __post_init__(self):
        dice = tuple(tuple(tuple(as_number(p) for p in row) for row in m) for m in self.dice)
        object.__setattr__(self, "dice", dice)

    @classmethod
    def from_matrices(cls, matrices) -> "JointSourceSpec":
        matrices = [np.asarray(m, dtype=object) if _all_exact(m) else np.asarray(m, dtype=float) for m in matrices]
        a, b = matrices[0].shape
        return cls(a, b, tuple(tuple(tuple(row) for row in m.tolist()) for m in matrices))

    @property
    def num_dice(self) -> int:
        return len(self.dice)

    @property
    def exact(self) -> bool:
        return all(is_exact(p) for m in self.dice for row in m for p in row)

    def tensor(self, exact: bool | None = None) -> np.ndarray:
        """Dice as a ``(num_dice, a_size, b_size)`` array."""
        if exact is None:
            exact = self.exact
        dtype = object if exact else float
        conv = Fraction if exact else float
        return np.array([[[conv(p) for p in row] for row in m] for m in self.dice], dtype=dtype)

    def marginal_a(self, exact: bool | None = None) -> np.ndarray:
        return self.tensor(exact).sum(axis=2)

    def marginal_b(self, exact: bool | None = None) -> np.ndarray:
        return self.tensor(exact).sum(axis=1)

    def check(self) -> None:
        problems = []
        if not self.dice:
            problems.append("no dice")
        for s, m in enumerate(self.dice):
            if len(m) != self.a_size or any(len(r) != self.b_size for r in m):
                problems.append(f"die {s}: expected {self.a_size}x{self.b_size} matrix")
                continue
            flat = [p for r in m for p in r]
            if any(p < 0 for p in flat):
                problems.append(f"die {s}: negative entry")
            total = sum(flat)
            if abs(float(total) - 1.0) > NORMALIZATION_TOL:
                problems.append(f"die {s}: sum = {float(total):.12g}")
        if problems:
            raise ValueError("invalid joint spec: " + "; ".join(problems))


def _all_exact(m) -> bool:
    return all(is_exact(p) for row in m for p in row)


@dataclass(frozen=True)
class ValidationReport:
    ok: bool
    violations: tuple = ()
    degenerate: bool = False


def validate_spec(spec: SourceSpec) -> ValidationReport:
    """Report nonnegativity, normalization and dimension problems, and flag degeneracy."""
    violations = []
    if spec.alphabet_size < 1:
        violations.append(f"alphabet size {spec.alphabet_size} < 1")
    if not spec.dice:
        violations.append("no dice")
    for s, die in enumerate(spec.dice):
        if len(die) != spec.alphabet_size:
            violations.append(f"die {s}: {len(die)} entries, expected {spec.alphabet_size}")
        if any(p < 0 for p in die):
            violations.append(f"die {s}: negative entry")
        total = sum(die)
        if is_exact(total):
            if total != 1:
                violations.append(f"die {s}: sum = {total}")
        elif abs(total - 1.0) > NORMALIZATION_TOL:
            violations.append(f"die {s}: sum = {total:.12g}")
    degenerate = any(p == 0 for die in spec.dice for p in die)
    return ValidationReport(not violations, tuple(violations), degenerate)


@dataclass(frozen=True)
class ExtractorTable:
    """Deterministic extractor on strings of length ``depth``.

    ``labels[i]`` is the output bit for the ``i``-th string in lexicographic
    order (symbol 0 most significant).  The zero set is the set of strings
    labelled 0.
    """

    alphabet_size: int
    depth: int
    labels: tuple

    def __post_init__(self):
        labels = tuple(int(b) for b in self.labels)
        object.__setattr__(self, "labels", labels)
        if len(labels) != self.alphabet_size**self.depth:
            raise ValueError(
                f"expected {self.alphabet_size}**{self.depth} labels, got {len(labels)}"
            )
        if any(b not in (0, 1) for b in labels):
            raise ValueError("labels must be bits")

    @classmethod
    def from_string(cls, alphabet_size: int, bits: str) -> "ExtractorTable":
        n = 0
        while alphabet_size**n < len(bits):
            n += 1
        return cls(alphabet_size, n, tuple(int(ch) for ch in bits))

    @classmethod
    def from_zero_set(cls, alphabet_size: int, depth: int, strings) -> "ExtractorTable":
        labels = [1] * alphabet_size**depth
        for s in strings:
            labels[string_index(s, alphabet_size)] = 0
        return cls(alphabet_size, depth, tuple(labels))

    @classmethod
    def join(cls, children: Sequence["ExtractorTable"]) -> "ExtractorTable":
        k = len(children)
        depth = children[0].depth
        if any(c.depth != depth or c.alphabet_size != k for c in children):
            raise ValueError("children must share depth and match the alphabet size")
        return cls(k, depth + 1, tuple(b for c in children for b in c.labels))

    def child(self, symbol: int) -> "ExtractorTable":
        if self.depth == 0:
            raise ValueError("a depth-0 table has no children")
        width = self.alphabet_size ** (self.depth - 1)
        return ExtractorTable(self.alphabet_size, self.depth - 1, self.labels[symbol * width:(symbol + 1) * width])

    def children(self) -> list:
        return [self.child(c) for c in range(self.alphabet_size)]

    def complement(self) -> "ExtractorTable":
        return ExtractorTable(self.alphabet_size, self.depth, tuple(1 - b for b in self.labels))

    def zero_set(self) -> list:
        return [s for s, b in zip(enumerate_strings(self.alphabet_size, self.depth), self.labels) if b == 0]

    def __call__(self, string) -> int:
        return self.labels[string_index(string, self.alphabet_size)]

    def bitstring(self) -> str:
        return "".join(map(str, self.labels))


def string_index(string, alphabet_size: int) -> int:
    idx = 0
    for c in string:
        idx = idx * alphabet_size + int(c)
    return idx


def enumerate_strings(alphabet_size: int, n: int, budget: int = DEFAULT_BUDGET) -> Iterator[tuple]:
    """All strings of length ``n`` in lexicographic order, symbol 0 most significant."""
    if alphabet_size < 1 or n < 0:
        raise ValueError("need alphabet_size >= 1 and n >= 0")
    if alphabet_size**n > budget:
        raise BudgetExceeded(f"{alphabet_size}**{n} strings exceeds budget {budget}")
    return itertools.product(range(alphabet_size), repeat=n)


@dataclass(frozen=True)
class StrategyTree:
    """Deterministic adversary: history (tuple of symbols) -> die index."""

    alphabet_size: int
    depth: int
    choice: Mapping = field(hash=False)

    def __post_init__(self):
        object.__setattr__(self, "choice", dict(self.choice))

    @classmethod
    def constant(cls, alphabet_size: int, depth: int, die: int = 0) -> "StrategyTree":
        choice = {}
        for i in range(depth):
            for h in enumerate_strings(alphabet_size, i):
                choice[h] = die
        return cls(alphabet_size, depth, choice)

    def validate(self, num_dice: int) -> None:
        for i in range(self.depth):
            for h in enumerate_strings(self.alphabet_size, i):
                if h not in self.choice:
                    raise ValueError(f"history {h} has no die")
                if not 0 <= self.choice[h] < num_dice:
                    raise ValueError(f"history {h}: die {self.choice[h]} out of range")

    def __call__(self, history) -> int:
        return self.choice[tuple(history)]


@dataclass(frozen=True)
class RandomizedStrategy:
    """History-dependent mixture over dice: history -> weights (one per die)."""

    num_dice: int
    weights: Mapping = field(hash=False)
    default: tuple | None = None

    def __post_init__(self):
        object.__setattr__(self, "weights", dict(self.weights))

    def mixture(self, history) -> tuple:
        w = self.weights.get(tuple(history), self.default)
        if w is None:
            raise KeyError(f"no mixture for history {tuple(history)}")
        return w


Strategy = Union[int, StrategyTree, RandomizedStrategy, Callable]


def trial_rng(seed: int, trial: int = 0) -> np.random.Generator:
    """Independent generator for one trial, derived from ``(seed, trial)`` only."""
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(trial,)))


def _pick(cdf: np.ndarray, u: float) -> int:
    return min(int(np.searchsorted(cdf, u, side="right")), len(cdf) - 1)


def sample_sequence(spec: SourceSpec, strategy: Strategy, n: int, seed: int = 0, trial: int = 0) -> list:
    """Draw ``n`` symbols, letting ``strategy`` pick a die from the history before each draw.

    ``strategy`` may be a die index (constant adversary), a :class:`StrategyTree`,
    a :class:`RandomizedStrategy` or any callable ``history -> die``.
    """
    if isinstance(strategy, StrategyTree) and strategy.depth < n:
        raise DepthMismatch(f"strategy depth {strategy.depth} < n = {n}")
    rng = trial_rng(seed, trial)
    P = spec.matrix(exact=False)
    cdfs = np.cumsum(P, axis=1)
    history: list = []
    for _ in range(n):
        u_die, u_sym = rng.random(2)
        if isinstance(strategy, RandomizedStrategy):
            die = _pick(np.cumsum(np.asarray(strategy.mixture(history), dtype=float)), u_die)
        elif isinstance(strategy, (int, np.integer)):
            die = int(strategy)
        else:
            die = int(strategy(history))
        history.append(_pick(cdfs[die], u_sym))
    return history
