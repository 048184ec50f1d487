import numpy as np
import pytest

from oamnet.errors import InsufficientSampleError, TranscriptLengthError
from oamnet.optics.polarization import (
    Basis,
    Bb84State,
    canonical_state,
    decode_bb84,
    measure,
    qwp_power,
)
from oamnet.optics.sorter_optics import PhotonRecord
from oamnet.qkd.bb84 import (
    bb84_measure_incoming,
    bb84_prepare,
    choose_sample,
    drop_indices,
    eavesdrop_intercept_resend,
    estimate_qber,
    expected_intercept_qber,
    frame_error_probability,
    intercept_error_probability,
    measure_in_frame,
    sift,
)

D, C = Basis.DIAGONAL, Basis.CIRCULAR
FORTY_FIVE = canonical_state(Bb84State(D, 0))


def test_prepare_is_reproducible():
    first = bb84_prepare(4, 2, np.random.default_rng(17), origin="Alice")
    second = bb84_prepare(4, 2, np.random.default_rng(17), origin="Alice")
    assert first == second
    assert [(item.bit, item.basis) for item in first] == [(1, D), (1, C), (0, C), (0, D)]
    assert [item.photon.sequence for item in first] == [0, 1, 2, 3]
    for item in first:
        assert item.photon.ell == 2
        assert item.photon.polarization == canonical_state(Bb84State(item.basis, item.bit))


def test_prepare_statistics():
    prepared = bb84_prepare(100_000, 1, np.random.default_rng(5))
    diagonal = sum(item.basis is D for item in prepared) / len(prepared)
    ones = sum(item.bit for item in prepared) / len(prepared)
    assert diagonal == pytest.approx(0.5, abs=0.01)
    assert ones == pytest.approx(0.5, abs=0.01)


def test_prepare_needs_photons():
    with pytest.raises(ValueError):
        bb84_prepare(0, 1, np.random.default_rng(0))


def test_compensated_measurement_after_two_plates():
    rng = np.random.default_rng(0)
    arrived = qwp_power(FORTY_FIVE, 2)
    assert all(measure_in_frame(arrived, 2, D, rng)[0] == 0 for _ in range(100))


@pytest.mark.parametrize("depth", range(9))
def test_compensation_recovers_every_state(depth):
    rng = np.random.default_rng(depth)
    for basis, bit in [(D, 0), (D, 1), (C, 0), (C, 1)]:
        arrived = qwp_power(canonical_state(Bb84State(basis, bit)), depth)
        assert measure_in_frame(arrived, depth, basis, rng)[0] == bit


def test_depth_zero_is_plain_bb84():
    rng_a, rng_b = np.random.default_rng(3), np.random.default_rng(3)
    record = PhotonRecord(ell=1, p=0, polarization=FORTY_FIVE)
    for _ in range(50):
        assert bb84_measure_incoming(record, 0, True, rng_a) == bb84_measure_incoming(
            record, 0, False, rng_b
        )


def test_uncompensated_odd_depth_is_random():
    rng = np.random.default_rng(12)
    arrived = qwp_power(FORTY_FIVE, 1)
    trials = 20_000
    ones = sum(measure(arrived, D, rng)[0] for _ in range(trials))
    assert ones / trials == pytest.approx(0.5, abs=0.02)


def test_sift():
    assert sift([D, C, D, C], [D, D, D, C]) == [0, 2, 3]
    assert sift([C, D, C], [C, D, C]) == [0, 1, 2]
    with pytest.raises(TranscriptLengthError):
        sift([D, C], [D])


def test_sift_fraction():
    rng = np.random.default_rng(21)
    sender = rng.integers(0, 2, size=100_000).tolist()
    receiver = rng.integers(0, 2, size=100_000).tolist()
    assert len(sift(sender, receiver)) / 100_000 == pytest.approx(0.5, abs=0.01)


def test_estimate_qber():
    key = [0, 1] * 50
    assert estimate_qber(key, key, range(100)) == 0
    assert estimate_qber(key, [1 - bit for bit in key], range(100)) == 1
    noisy = list(key)
    for index in (5, 40, 77):
        noisy[index] = 1 - noisy[index]
    assert estimate_qber(key, noisy, range(100)) == 0.03
    with pytest.raises(InsufficientSampleError, match="insufficient sample"):
        estimate_qber(key, key, [])


def test_choose_sample():
    sample = choose_sample(100, 0.1, np.random.default_rng(0))
    assert len(sample) == 10
    assert sample == sorted(set(sample))
    assert len(choose_sample(3, 0.1, np.random.default_rng(0))) == 1
    with pytest.raises(InsufficientSampleError):
        choose_sample(0, 0.1, np.random.default_rng(0))


def test_drop_indices():
    assert drop_indices([1, 0, 1, 1, 0], [0, 3]) == [0, 1, 0]


def test_matched_interception_leaves_the_state_alone():
    rng = np.random.default_rng(0)
    assert measure_in_frame(FORTY_FIVE, 0, D, rng)[1] == FORTY_FIVE


def test_interception_resends_a_bb84_state():
    rng = np.random.default_rng(9)
    for depth in (0, 1, 2):
        record = PhotonRecord(ell=2, p=0, polarization=qwp_power(FORTY_FIVE, depth))
        for _ in range(20):
            resent = eavesdrop_intercept_resend(record, depth, rng)
            decode_bb84(resent.polarization, 0)
            assert resent.ell == record.ell


def test_intercept_enumeration():
    assert intercept_error_probability() == pytest.approx(0.25, abs=1e-12)
    assert expected_intercept_qber(0.5) == pytest.approx(0.125, abs=1e-12)
    assert expected_intercept_qber(0.0) == 0


@pytest.mark.parametrize(
    "depth, compensate, expected",
    [(0, False, 0.0), (1, False, 0.5), (2, False, 1.0), (3, False, 0.5), (3, True, 0.0)],
)
def test_frame_error_probability(depth, compensate, expected):
    assert frame_error_probability(depth, compensate) == pytest.approx(expected, abs=1e-12)
