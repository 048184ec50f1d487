"""BB84 building blocks with quarter-wave frame compensation.

Bits and bases are always expressed in the sender's (logical) frame. A photon
that met d plates on its way is in the physical frame P^d; a compensating
receiver measures in the physical image of its logical basis and maps the
outcome back.
"""

import itertools
from dataclasses import dataclass, replace

import numpy as np

from oamnet.errors import InsufficientSampleError, TranscriptLengthError
from oamnet.optics.polarization import (
    Basis,
    Bb84State,
    JonesVector,
    canonical_state,
    decode_bb84,
    measure,
    outcome_probabilities,
    physical_basis,
    qwp_power,
)
from oamnet.optics.sorter_optics import PhotonRecord

BASES = (Basis.DIAGONAL, Basis.CIRCULAR)
DEFAULT_SAMPLE_FRACTION = 0.1
DEFAULT_ABORT_THRESHOLD = 0.11


@dataclass(frozen=True)
class PreparedPhoton:
    bit: int
    basis: Basis
    photon: PhotonRecord


def bb84_prepare(
    count: int, receiver_ell: int, rng: np.random.Generator, origin: str = ""
) -> list[PreparedPhoton]:
    """Uniform independent bit and basis per photon, addressed to receiver_ell."""
    if count < 1:
        raise ValueError(f"photon count must be at least 1, got {count}")
    bits = rng.integers(0, 2, size=count)
    bases = rng.integers(0, 2, size=count)
    prepared = []
    for index, (bit, basis_index) in enumerate(zip(bits.tolist(), bases.tolist())):
        basis = BASES[basis_index]
        photon = PhotonRecord(
            ell=receiver_ell,
            p=0,
            polarization=canonical_state(Bb84State(basis, bit)),
            origin=origin,
            sequence=index,
        )
        prepared.append(PreparedPhoton(bit, basis, photon))
    return prepared


def measure_in_frame(
    polarization: JonesVector, depth: int, logical: Basis, rng: np.random.Generator
) -> tuple[int, JonesVector]:
    """
    Measure the logical basis of a photon that met `depth` plates.

    Returns:
        (logical bit, collapsed physical Jones vector)
    """
    _, collapsed = measure(polarization, physical_basis(logical, depth), rng)
    return decode_bb84(collapsed, depth).bit, collapsed


def bb84_measure_incoming(
    record: PhotonRecord, depth: int, compensate: bool, rng: np.random.Generator
) -> tuple[Basis, int]:
    basis = BASES[int(rng.integers(0, 2))]
    if compensate:
        bit, _ = measure_in_frame(record.polarization, depth, basis, rng)
    else:
        bit, _ = measure(record.polarization, basis, rng)
    return basis, bit


def eavesdrop_intercept_resend(
    record: PhotonRecord, depth: int, rng: np.random.Generator
) -> PhotonRecord:
    """Measure in a random basis of the photon's current frame and resend the collapsed state."""
    basis = BASES[int(rng.integers(0, 2))]
    _, collapsed = measure_in_frame(record.polarization, depth, basis, rng)
    return replace(record, polarization=collapsed)


def sift(sender_bases, receiver_bases) -> list[int]:
    """Indices where the two parties chose the same logical basis."""
    sender_bases, receiver_bases = list(sender_bases), list(receiver_bases)
    if len(sender_bases) != len(receiver_bases):
        raise TranscriptLengthError(
            f"sender has {len(sender_bases)} rounds, receiver has {len(receiver_bases)}"
        )
    return [i for i, (a, b) in enumerate(zip(sender_bases, receiver_bases)) if a == b]


def choose_sample(sifted_count: int, fraction: float, rng: np.random.Generator) -> list[int]:
    """Positions (into the sifted key) disclosed for error estimation; at least one."""
    if sifted_count < 1:
        raise InsufficientSampleError("insufficient sifted bits for a QBER sample")
    size = min(sifted_count, max(1, round(fraction * sifted_count)))
    return sorted(rng.choice(sifted_count, size=size, replace=False).tolist())


def estimate_qber(sender_bits, receiver_bits, sample_indices) -> float:
    sample = list(sample_indices)
    if not sample:
        raise InsufficientSampleError("insufficient sample: no disclosed bits")
    errors = sum(1 for i in sample if sender_bits[i] != receiver_bits[i])
    return errors / len(sample)


def drop_indices(bits, indices) -> list[int]:
    removed = set(indices)
    return [bit for i, bit in enumerate(bits) if i not in removed]


def intercept_error_probability() -> float:
    """
    Error rate on sifted bits when every photon is intercepted and resent.

    Enumerates sender basis and bit, Eve's basis, and Eve's outcome; the receiver
    measures in the sender's basis (sifted rounds only).
    """
    total = 0.0
    cases = 0
    for basis, bit, eve_basis in itertools.product(BASES, (0, 1), BASES):
        sent = canonical_state(Bb84State(basis, bit))
        for eve_bit, p_eve in enumerate(outcome_probabilities(sent, eve_basis)):
            resent = canonical_state(Bb84State(eve_basis, eve_bit))
            total += p_eve * outcome_probabilities(resent, basis)[1 - bit]
        cases += 1
    return total / cases


def expected_intercept_qber(fraction: float) -> float:
    return fraction * intercept_error_probability()


def frame_error_probability(depth: int, compensate: bool) -> float:
    """Sifted error rate on a noiseless link behind `depth` plates."""
    if compensate:
        return 0.0
    total = 0.0
    for basis, bit in itertools.product(BASES, (0, 1)):
        arrived = qwp_power(canonical_state(Bb84State(basis, bit)), depth)
        total += outcome_probabilities(arrived, basis)[1 - bit]
    return total / 4
