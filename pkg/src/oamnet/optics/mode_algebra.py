"""Laguerre-Gaussian modes in the Hermite-Gaussian basis and beam-rotation unitaries.

An LG mode of order N = n + m is the column of N+1 amplitudes over HG_{N-k,k},
k = 0..N. A beam rotator of angle alpha acts on that column as an (N+1)x(N+1)
unitary whose eigenvectors are the LG modes of the order, with eigenvalue
exp(-i*ell*alpha) for signed ell = n - m.
"""

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from oamnet.errors import OrderCapError

DEFAULT_ORDER_CAP = 30

_I_POWERS = (1, 1j, -1, -1j)


@dataclass(frozen=True)
class ModeIndices:
    n: int
    m: int

    def __post_init__(self):
        if self.n < 0 or self.m < 0:
            raise ValueError(f"mode indices must be nonnegative, got n={self.n}, m={self.m}")

    @property
    def ell(self) -> int:
        return self.n - self.m

    @property
    def p(self) -> int:
        return min(self.n, self.m)

    @property
    def order(self) -> int:
        return self.n + self.m


@dataclass(frozen=True, eq=False)
class ModeVector:
    """Order-N transverse mode as N+1 complex amplitudes; index k labels HG_{N-k,k}."""

    order: int
    amplitudes: np.ndarray

    def __post_init__(self):
        amplitudes = np.array(self.amplitudes, dtype=complex)
        if amplitudes.shape != (self.order + 1,):
            raise ValueError(
                f"order {self.order} mode needs {self.order + 1} amplitudes, "
                f"got shape {amplitudes.shape}"
            )
        amplitudes.setflags(write=False)
        object.__setattr__(self, "amplitudes", amplitudes)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def overlap(self, other: "ModeVector") -> complex:
        """Inner product <self|other>."""
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def allclose(self, other: "ModeVector", atol: float = 1e-10) -> bool:
        return self.order == other.order and np.allclose(
            self.amplitudes, other.amplitudes, rtol=0, atol=atol
        )

    def __add__(self, other: "ModeVector") -> "ModeVector":
        return ModeVector(self.order, self.amplitudes + other.amplitudes)

    def scaled(self, factor: complex) -> "ModeVector":
        return ModeVector(self.order, self.amplitudes * factor)


def _check_order(order: int, cap: int) -> None:
    if order < 0:
        raise ValueError(f"mode order must be nonnegative, got {order}")
    if order > cap:
        raise OrderCapError("mode order", order, cap)


def indices_from_lp(ell: int, p: int) -> ModeIndices:
    """n, m for signed ell and radial index p (ell = n - m, p = min(n, m))."""
    if p < 0:
        raise ValueError(f"radial index p must be nonnegative, got {p}")
    if ell >= 0:
        return ModeIndices(n=p + ell, m=p)
    return ModeIndices(n=p, m=p - ell)


def lp_of_order(order: int) -> list[tuple[int, int]]:
    """All (ell, p) pairs of one order, ell running N, N-2, ..., -N."""
    return [(ell, (order - abs(ell)) // 2) for ell in range(order, -order - 1, -2)]


def derivative_terms(n: int, m: int) -> list[int]:
    """
    Taylor coefficients of (1 - t)^n (1 + t)^m, i.e. (1/k!) d^k/dt^k at t = 0.

    Built by integer convolution of the linear factors; int64 is exact up to the order cap.
    """
    poly = np.array([1], dtype=np.int64)
    for _ in range(n):
        poly = np.convolve(poly, np.array([1, -1], dtype=np.int64))
    for _ in range(m):
        poly = np.convolve(poly, np.array([1, 1], dtype=np.int64))
    return [int(c) for c in poly]


def binomial_terms(n: int, m: int) -> list[int]:
    """Same coefficients as derivative_terms from the closed binomial double sum."""
    order = n + m
    return [
        sum(
            (-1) ** j * math.comb(n, j) * math.comb(m, k - j)
            for j in range(max(0, k - m), min(k, n) + 1)
        )
        for k in range(order + 1)
    ]


def lg_coefficients(n: int, m: int, cap: int = DEFAULT_ORDER_CAP) -> ModeVector:
    """
    HG-basis column vector of the LG mode with indices n, m.

    a(n,m,k) = i^k [ (N-k)! k! / (2^N n! m!) ]^(1/2) c_k, with c_k the Taylor
    coefficient of (1 - t)^n (1 + t)^m. The square-root argument is staged as an
    exact rational so large orders do not overflow.
    """
    indices = ModeIndices(n, m)
    order = indices.order
    _check_order(order, cap)

    denominator = 2**order * math.factorial(n) * math.factorial(m)
    amplitudes = []
    for k, term in enumerate(derivative_terms(n, m)):
        if term == 0:
            amplitudes.append(0j)
            continue
        weight = Fraction(math.factorial(order - k) * math.factorial(k) * term * term, denominator)
        magnitude = math.sqrt(weight) * (1 if term > 0 else -1)
        amplitudes.append(_I_POWERS[k % 4] * magnitude)
    return ModeVector(order, np.array(amplitudes, dtype=complex))


def lg_mode(ell: int, p: int, cap: int = DEFAULT_ORDER_CAP) -> ModeVector:
    indices = indices_from_lp(ell, p)
    return lg_coefficients(indices.n, indices.m, cap=cap)


def rotation_matrix(order: int, alpha: float, cap: int = DEFAULT_ORDER_CAP) -> np.ndarray:
    """
    Beam-rotation unitary [rot(alpha)]_N built spectrally from the LG modes of the order.

    Returns:
        (N+1)x(N+1) complex array, sum over ell of exp(-i ell alpha) |v_ell><v_ell|
    """
    _check_order(order, cap)
    matrix = np.zeros((order + 1, order + 1), dtype=complex)
    for ell, p in lp_of_order(order):
        v = lg_mode(ell, p, cap=cap).amplitudes
        matrix += np.exp(-1j * ell * alpha) * np.outer(v, v.conj())
    return matrix


def closed_form_rotation_n2(alpha: float) -> np.ndarray:
    """Explicit order-2 rotator, used to cross-check the spectral construction."""
    c2, s2 = math.cos(alpha) ** 2, math.sin(alpha) ** 2
    s = math.sin(2 * alpha) / math.sqrt(2)
    return np.array(
        [
            [c2, s, s2],
            [-s, math.cos(2 * alpha), s],
            [s2, -s, c2],
        ],
        dtype=complex,
    )


def apply_rotation(mode: ModeVector, alpha: float, cap: int = DEFAULT_ORDER_CAP) -> ModeVector:
    return ModeVector(mode.order, rotation_matrix(mode.order, alpha, cap=cap) @ mode.amplitudes)


def eigenphase_residual(ell: int, p: int, alpha: float) -> float:
    """Largest deviation of rot(alpha)|ell,p> from exp(-i ell alpha)|ell,p>."""
    mode = lg_mode(ell, p)
    rotated = apply_rotation(mode, alpha)
    expected = mode.amplitudes * np.exp(-1j * ell * alpha)
    return float(np.max(np.abs(rotated.amplitudes - expected)))
