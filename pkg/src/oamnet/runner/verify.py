"""Built-in invariant suite behind `oamnet verify`."""

import itertools
import math
from dataclasses import dataclass

import numpy as np

from oamnet.optics.mode_algebra import (
    closed_form_rotation_n2,
    eigenphase_residual,
    lg_mode,
    lp_of_order,
    rotation_matrix,
)
from oamnet.optics.polarization import (
    CANONICAL_STATES,
    canonical_state,
    decode_bb84,
    qwp_power,
    state_by_label,
    state_equivalent_up_to_phase,
)
from oamnet.optics.sorter_optics import (
    PhotonRecord,
    build_sorter_tree,
    leaf_distribution,
    route_photon,
    validate_tree,
)
from oamnet.qkd.bb84 import intercept_error_probability

MATRIX_TOL = 1e-10
CHECK_ANGLES = (0.0, 0.3, 1.0, math.pi / 4, math.pi / 2, 2.5)

# Arrival state after 1, 2 and 3 prisms, by launched state
QWP_PERMUTATIONS = {
    "45": ("L", "135", "R"),
    "135": ("R", "45", "L"),
    "L": ("135", "R", "45"),
    "R": ("45", "L", "135"),
}

SORTER_ADDRESSES = (1, 2, 3, 4)
PHOTONS_PER_ADDRESS = 10_000


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str


def check_lg_vector() -> CheckResult:
    expected = np.array([0.5, -1j / math.sqrt(2), -0.5])
    error = float(np.max(np.abs(lg_mode(2, 0).amplitudes - expected)))
    return CheckResult("lg-N2-vector", error < MATRIX_TOL, f"max deviation {error:.2e}")


def check_rotation_closed_form() -> CheckResult:
    error = max(
        float(np.max(np.abs(rotation_matrix(2, alpha) - closed_form_rotation_n2(alpha))))
        for alpha in CHECK_ANGLES
    )
    return CheckResult(
        "rot-N2-closed-form",
        error < MATRIX_TOL,
        f"{len(CHECK_ANGLES)} angles, max deviation {error:.2e}",
    )


def check_eigenphases(max_order: int = 6) -> CheckResult:
    cases = [
        (ell, p, alpha)
        for order in range(max_order + 1)
        for ell, p in lp_of_order(order)
        for alpha in CHECK_ANGLES
    ]
    worst = max(eigenphase_residual(ell, p, alpha) for ell, p, alpha in cases)
    return CheckResult(
        f"eigenphase-N{max_order}",
        worst < MATRIX_TOL,
        f"{len(cases)} cases, max residual {worst:.2e}",
    )


def check_unitarity(max_order: int = 6) -> CheckResult:
    worst = 0.0
    for order, alpha in itertools.product(range(max_order + 1), CHECK_ANGLES):
        matrix = rotation_matrix(order, alpha)
        identity = np.eye(order + 1)
        worst = max(worst, float(np.max(np.abs(matrix @ matrix.conj().T - identity))))
    return CheckResult(
        f"unitarity-N{max_order}", worst < MATRIX_TOL, f"max |R R^H - I| {worst:.2e}"
    )


def check_qwp_permutations() -> CheckResult:
    failures = []
    cases = 0
    for label, arrivals in QWP_PERMUTATIONS.items():
        launched = canonical_state(state_by_label(label))
        for depth, expected in enumerate(arrivals, start=1):
            cases += 1
            arrived = qwp_power(launched, depth)
            if not state_equivalent_up_to_phase(arrived, canonical_state(state_by_label(expected))):
                failures.append(f"P^{depth}|{label}>")
    detail = f"{cases} cases" + (f", failed: {', '.join(failures)}" if failures else "")
    return CheckResult("table1-permutations", not failures, detail)


def check_decode_inverse(max_depth: int = 8) -> CheckResult:
    failures = [
        (state.label, depth)
        for state, depth in itertools.product(CANONICAL_STATES, range(max_depth + 1))
        if decode_bb84(qwp_power(canonical_state(state), depth), depth) != state
    ]
    cases = len(CANONICAL_STATES) * (max_depth + 1)
    detail = f"{cases} cases" + (f", failed: {failures}" if failures else "")
    return CheckResult("decode-inverse", not failures, detail)


def check_sorter_determinism(seed: int = 0) -> CheckResult:
    tree = build_sorter_tree(SORTER_ADDRESSES)
    try:
        validate_tree(tree, SORTER_ADDRESSES)
    except ValueError as exc:
        return CheckResult("sorter-determinism-1234", False, str(exc))

    rng = np.random.default_rng(seed)
    polarization = canonical_state(state_by_label("45"))
    misrouted = 0
    worst = 0.0
    for ell in SORTER_ADDRESSES:
        target = tree.leaf_for(ell).leaf_id
        worst = max(worst, abs(1 - leaf_distribution(ell, tree)[target]))
        photon = PhotonRecord(ell=ell, p=0, polarization=polarization)
        for _ in range(PHOTONS_PER_ADDRESS):
            if route_photon(photon, tree, rng).leaf.leaf_id != target:
                misrouted += 1
    return CheckResult(
        "sorter-determinism-1234",
        misrouted == 0 and worst <= 1e-12,
        f"{tree.stage_count()} stages, {misrouted} misrouted, audit deviation {worst:.1e}",
    )


def check_intercept_enumeration() -> CheckResult:
    probability = intercept_error_probability()
    return CheckResult(
        "intercept-enumeration",
        abs(probability - 0.25) < 1e-12,
        f"sifted error under full intercept-resend = {probability:.6f}",
    )


CHECKS = (
    check_lg_vector,
    check_rotation_closed_form,
    check_eigenphases,
    check_unitarity,
    check_qwp_permutations,
    check_decode_inverse,
    check_sorter_determinism,
    check_intercept_enumeration,
)


def run_checks() -> list[CheckResult]:
    return [check() for check in CHECKS]
