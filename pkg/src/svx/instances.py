"""Named sources used by the demos, the CLI samples and the tests."""

from __future__ import annotations

from fractions import Fraction

import numpy as np

from .core import JointSourceSpec, SourceSpec


def binary_sv(delta=Fraction(1, 3)) -> SourceSpec:
    """Two coins with heads probability ``delta`` and ``1 - delta``."""
    d = Fraction(delta) if not isinstance(delta, float) else delta
    return SourceSpec.from_dice([[d, 1 - d], [1 - d, d]])


def three_symbol() -> SourceSpec:
    """Two dice over three symbols; ``psi = (1/3, 1/3, -1)`` has zero mean under both."""
    h, q = Fraction(1, 2), Fraction(1, 4)
    return SourceSpec.from_dice([[h, q, q], [q, h, q]])


def single_block_joint() -> np.ndarray:
    """Joint with two diagonal blocks, the lower one a product block."""
    return np.array([[0.1, 0, 0, 0], [0.1, 0.2, 0, 0], [0, 0, 0.1, 0.1], [0, 0, 0.2, 0.2]])


def merging_pair() -> JointSourceSpec:
    """Two dice with three components each whose supports merge into two."""
    m1 = [[0.1, 0, 0, 0], [0, 0.2, 0, 0], [0, 0, 0.1, 0.1], [0, 0, 0.3, 0.2]]
    m2 = [[0.2, 0, 0, 0], [0.1, 0.1, 0, 0], [0, 0, 0.3, 0], [0, 0, 0, 0.3]]
    return JointSourceSpec.from_matrices([m1, m2])


def erasure(erase=Fraction(1, 100), delta=Fraction(1, 3)) -> JointSourceSpec:
    """A coin ``c`` from die ``s``; Alice sees ``(c, s)``, Bob sees ``(c, s)`` with ``s`` erased w.p. ``erase``.

    Alice's symbol is ``2c + s``; Bob's is ``3c + t`` with ``t`` in ``{0, 1, erased=2}``.
    """
    coins = [[delta, 1 - delta], [1 - delta, delta]]
    dice = []
    for s in range(2):
        m = [[Fraction(0)] * 6 for _ in range(4)]
        for c in range(2):
            m[2 * c + s][3 * c + s] = coins[s][c] * (1 - erase)
            m[2 * c + s][3 * c + 2] = coins[s][c] * erase
        dice.append(m)
    return JointSourceSpec.from_matrices(dice)


def copied(spec: SourceSpec) -> JointSourceSpec:
    """Both parties see the same symbol drawn from ``spec``."""
    k = spec.alphabet_size
    dice = []
    for die in spec.dice:
        m = [[die[a] if a == b else 0 * die[a] for b in range(k)] for a in range(k)]
        dice.append(m)
    return JointSourceSpec.from_matrices(dice)


def dsbs(eps: float) -> np.ndarray:
    """Uniform bit pair that differs with probability ``eps``."""
    return np.array([[(1 - eps) / 2, eps / 2], [eps / 2, (1 - eps) / 2]])


def noisy_binary_pair(delta: float = 1 / 3, flip: float = 0.1) -> JointSourceSpec:
    """Alice sees a coin from one of two biased dice; Bob sees it through a binary symmetric channel."""
    dice = []
    for d in (delta, 1 - delta):
        pa = np.array([d, 1 - d])
        ch = np.array([[1 - flip, flip], [flip, 1 - flip]])
        dice.append(pa[:, None] * ch)
    return JointSourceSpec.from_matrices(dice)
