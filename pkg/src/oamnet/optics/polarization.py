"""Jones-calculus alphabet for BB84 and the quarter-wave action of the sorter prisms.

The sorter prism acts on polarization as P = diag(1, i). Applying it d times
permutes the four BB84 states: odd d swaps the diagonal and circular sets,
even d keeps each set and d = 2 swaps the two states inside a set.
"""

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from oamnet.errors import NotBb84StateError
from oamnet.utils import FIDELITY_TOL

_I_POWERS = (1, 1j, -1, -1j)
_SQRT_HALF = 1 / math.sqrt(2)
NORM_TOL = 1e-12


class Basis(Enum):
    DIAGONAL = "diagonal"
    CIRCULAR = "circular"

    def __str__(self):
        return self.value

    @property
    def short(self) -> str:
        return "D" if self is Basis.DIAGONAL else "C"

    def swapped(self) -> "Basis":
        return Basis.CIRCULAR if self is Basis.DIAGONAL else Basis.DIAGONAL


@dataclass(frozen=True)
class JonesVector:
    """Horizontal and vertical complex amplitudes."""

    h: complex
    v: complex

    def __post_init__(self):
        if abs(self.norm() - 1) > NORM_TOL:
            raise ValueError(f"Jones vector must have unit norm, got {self.norm():.15g}")

    @classmethod
    def from_array(cls, array) -> "JonesVector":
        return cls(complex(array[0]), complex(array[1]))

    @property
    def array(self) -> np.ndarray:
        return np.array([self.h, self.v], dtype=complex)

    def norm(self) -> float:
        return math.sqrt(abs(self.h) ** 2 + abs(self.v) ** 2)

    def inner(self, other: "JonesVector") -> complex:
        """<self|other>"""
        return self.h.conjugate() * other.h + self.v.conjugate() * other.v

    def scaled(self, factor: complex) -> "JonesVector":
        return JonesVector(self.h * factor, self.v * factor)


@dataclass(frozen=True)
class Bb84State:
    basis: Basis
    bit: int

    def __post_init__(self):
        if self.bit not in (0, 1):
            raise ValueError(f"bit must be 0 or 1, got {self.bit!r}")

    @property
    def label(self) -> str:
        return STATE_LABELS[self]


# (diagonal, 0) = |45>, (diagonal, 1) = |135>, (circular, 0) = |L>, (circular, 1) = |R>
CANONICAL_STATES = {
    Bb84State(Basis.DIAGONAL, 0): JonesVector(_SQRT_HALF, _SQRT_HALF),
    Bb84State(Basis.DIAGONAL, 1): JonesVector(_SQRT_HALF, -_SQRT_HALF),
    Bb84State(Basis.CIRCULAR, 0): JonesVector(_SQRT_HALF, 1j * _SQRT_HALF),
    Bb84State(Basis.CIRCULAR, 1): JonesVector(_SQRT_HALF, -1j * _SQRT_HALF),
}

STATE_LABELS = {
    Bb84State(Basis.DIAGONAL, 0): "45",
    Bb84State(Basis.DIAGONAL, 1): "135",
    Bb84State(Basis.CIRCULAR, 0): "L",
    Bb84State(Basis.CIRCULAR, 1): "R",
}

QWP_MATRIX = np.array([[1, 0], [0, 1j]], dtype=complex)


def canonical_state(state: Bb84State) -> JonesVector:
    return CANONICAL_STATES[state]


def state_by_label(label: str) -> Bb84State:
    for state, name in STATE_LABELS.items():
        if name == label:
            return state
    raise KeyError(f"no BB84 state labelled {label!r}")


def qwp_apply(j: JonesVector) -> JonesVector:
    return qwp_power(j, 1)


def qwp_power(j: JonesVector, d: int) -> JonesVector:
    """P^d j with P = diag(1, i); the phase i^d is taken exactly so P^4 is the identity."""
    if d < 0:
        raise ValueError(f"quarter-wave depth must be nonnegative, got {d}")
    return JonesVector(j.h, j.v * _I_POWERS[d % 4])


def state_equivalent_up_to_phase(a: JonesVector, b: JonesVector) -> bool:
    return abs(a.inner(b)) > 1 - FIDELITY_TOL


def physical_basis(logical: Basis, d: int) -> Basis:
    """Image of a logical basis after d quarter-wave plates."""
    return logical.swapped() if d % 2 else logical


def permuted_state(state: Bb84State, d: int) -> Bb84State:
    """The canonical state equal, up to phase, to P^d applied to state."""
    return decode_bb84(qwp_power(canonical_state(state), d), 0)


def decode_bb84(j: JonesVector, d: int) -> Bb84State:
    """
    The sender-frame state s with P^d canonical_state(s) equal to j up to global phase.

    Raises:
        NotBb84StateError: j is not one of the four canonical states
    """
    for state, vector in CANONICAL_STATES.items():
        if state_equivalent_up_to_phase(qwp_power(vector, d), j):
            return state
    raise NotBb84StateError(f"not a BB84 state: ({j.h:.6g}, {j.v:.6g})")


def outcome_probabilities(j: JonesVector, basis: Basis) -> tuple[float, float]:
    """Probabilities of bit 0 and bit 1 for a projective measurement in basis."""
    p0 = abs(canonical_state(Bb84State(basis, 0)).inner(j)) ** 2
    p1 = abs(canonical_state(Bb84State(basis, 1)).inner(j)) ** 2
    total = p0 + p1
    return p0 / total, p1 / total


def measure(j: JonesVector, basis: Basis, rng: np.random.Generator) -> tuple[int, JonesVector]:
    """
    Projective measurement of j onto the basis pair.

    Matched bases on canonical states do not consume randomness.
    """
    p0, _ = outcome_probabilities(j, basis)
    if p0 > 1 - FIDELITY_TOL:
        bit = 0
    elif p0 < FIDELITY_TOL:
        bit = 1
    else:
        bit = 0 if rng.random() < p0 else 1
    return bit, canonical_state(Bb84State(basis, bit))


def flip_within_basis(j: JonesVector) -> JonesVector:
    """Bit flip inside whichever BB84 basis j belongs to; equal to P^2."""
    return qwp_power(j, 2)
