import cmath
import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oamnet.errors import OrderCapError, UnsortableSetError
from oamnet.optics.mode_algebra import apply_rotation, lg_mode, lp_of_order
from oamnet.optics.polarization import (
    Basis,
    Bb84State,
    canonical_state,
    state_by_label,
    state_equivalent_up_to_phase,
)
from oamnet.optics.sorter_optics import (
    PhotonRecord,
    SorterStage,
    build_sorter_tree,
    candidate_stages,
    deterministic_port,
    leaf_distribution,
    path_probability,
    route_photon,
    stage_paths,
    stage_phase,
    stage_port_probabilities,
    tree_from_dict,
    tree_to_dict,
    validate_tree,
)
from oamnet.utils import reduce_phase

FORTY_FIVE = canonical_state(Bb84State(Basis.DIAGONAL, 0))


def photon(ell: int, polarization=FORTY_FIVE) -> PhotonRecord:
    return PhotonRecord(ell=ell, p=0, polarization=polarization)


def test_stage_phase():
    assert stage_phase(2, SorterStage(math.pi, 0.0)) == pytest.approx(0.0, abs=1e-12)
    assert stage_phase(0, SorterStage(1.7, 0.3)) == pytest.approx(0.3)
    half_turn = stage_phase(3, SorterStage(math.pi / 2, -math.pi / 2))
    assert abs(abs(half_turn) - math.pi) < 1e-12


@pytest.mark.parametrize("ell, expected", [(2, (1, 0)), (1, (0, 1)), (0, (1, 0))])
def test_port_probabilities(ell, expected):
    stage = SorterStage(math.pi, 0.0)
    assert stage_port_probabilities(ell, stage) == pytest.approx(expected, abs=1e-12)
    assert deterministic_port(ell, stage) == expected.index(1)


def test_non_deterministic_port():
    assert deterministic_port(1, SorterStage(math.pi / 2, 0.0)) is None


def test_stage_angles_validated():
    with pytest.raises(ValueError):
        SorterStage(7.0, 0.0)


def test_candidate_schedule_starts_with_the_half_turn():
    stages = list(candidate_stages(True, max_halvings=1))
    assert stages[0] == SorterStage(math.pi, 0.0, True)
    assert stages[2].delta_phi_c == pytest.approx(-math.pi / 2)
    assert len(stages) == 16
    assert all(-2 * math.pi < stage.delta_phi_c <= 0 for stage in stages)


def test_four_address_tree():
    tree = build_sorter_tree([1, 2, 3, 4])
    stages = dict(stage_paths(tree))
    assert stages["root"].alpha == pytest.approx(math.pi)
    assert stages["root"].delta_phi_c == 0.0
    assert stages["0"].alpha == pytest.approx(math.pi / 2)
    assert stages["1"].alpha == pytest.approx(math.pi / 2)
    assert tree.leaf_for(2).path.startswith("0")
    assert tree.leaf_for(4).path.startswith("0")
    assert tree.leaf_for(1).path.startswith("1")
    assert tree.leaf_for(3).path == "11"
    assert {leaf.depth for leaf in tree.leaves()} == {2}
    assert tree.stage_count() == 3


def test_singleton_tree_is_one_leaf():
    tree = build_sorter_tree([7])
    assert tree.stage_count() == 0
    assert tree.root.depth == 0
    assert tree.root.leaf_id == "leaf:root"
    routed = route_photon(photon(7), tree, np.random.default_rng(0))
    assert routed.photon.qwp_depth == 0
    assert not routed.stray


def test_two_address_tree_is_one_stage():
    tree = build_sorter_tree([1, 2])
    ((path, stage),) = stage_paths(tree)
    assert stage == SorterStage(math.pi, 0.0)
    assert tree.leaf_for(2).path == "0"
    assert tree.leaf_for(1).path == "1"


def test_address_cap():
    with pytest.raises(OrderCapError):
        build_sorter_tree([1, 9])
    with pytest.raises(ValueError):
        build_sorter_tree([])


def test_unsortable_set_names_the_subset():
    with pytest.raises(UnsortableSetError) as excinfo:
        build_sorter_tree([1, 3], max_halvings=0)
    assert excinfo.value.subset == (1, 3)


def test_routing_applies_one_prism_per_stage():
    tree = build_sorter_tree([1, 2, 3, 4])
    routed = route_photon(photon(3), tree, np.random.default_rng(0))
    assert routed.leaf == tree.leaf_for(3)
    assert routed.photon.qwp_depth == 2

    routed = route_photon(photon(2), tree, np.random.default_rng(0))
    assert routed.photon.qwp_depth == 2
    assert state_equivalent_up_to_phase(
        routed.photon.polarization, canonical_state(state_by_label("135"))
    )


def test_stages_without_prisms_keep_polarization():
    tree = build_sorter_tree([1, 2, 3, 4], use_qwp=False)
    routed = route_photon(photon(4), tree, np.random.default_rng(0))
    assert routed.photon.qwp_depth == 0
    assert routed.photon.polarization == FORTY_FIVE


def test_empirical_routing_is_deterministic():
    tree = build_sorter_tree([1, 2, 3, 4])
    rng = np.random.default_rng(99)
    for ell in (1, 2, 3, 4):
        target = tree.leaf_for(ell)
        assert all(route_photon(photon(ell), tree, rng).leaf == target for _ in range(10_000))


def test_unconfigured_ell_is_stray_and_split():
    tree = build_sorter_tree([1, 2, 3, 4])
    distribution = leaf_distribution(0, tree)
    assert sum(distribution.values()) == pytest.approx(1.0)
    rng = np.random.default_rng(1)
    results = [route_photon(photon(5), tree, rng) for _ in range(200)]
    assert all(result.stray for result in results)


def test_path_probability():
    tree = build_sorter_tree([1, 2, 3, 4])
    leaf_id = tree.leaf_for(3).leaf_id
    assert path_probability(3, tree, leaf_id) == pytest.approx(1.0, abs=1e-12)
    assert path_probability(1, tree, leaf_id) == pytest.approx(0.0, abs=1e-12)


ADDRESS_SETS = [
    subset
    for size in range(1, 6)
    for subset in itertools.combinations(range(-5, 6), size)
]


def test_synthesized_trees_route_every_address_with_certainty():
    assert len(ADDRESS_SETS) == 1023
    for addresses in ADDRESS_SETS:
        tree = build_sorter_tree(addresses)
        validate_tree(tree, addresses)
        for ell in addresses:
            reach = leaf_distribution(ell, tree)[tree.leaf_for(ell).leaf_id]
            assert abs(reach - 1) <= 1e-12, (addresses, ell)
        assert all(len(leaf.addresses) == 1 for leaf in tree.leaves())


@settings(deadline=None)
@given(
    st.integers(0, 6).flatmap(lambda order: st.sampled_from(lp_of_order(order))),
    st.floats(min_value=-6.0, max_value=6.0),
    st.floats(min_value=-6.0, max_value=6.0),
)
def test_stage_phase_is_the_rotation_eigenphase_plus_delay(lp, alpha, delta_phi_c):
    ell, p = lp
    stage = SorterStage(alpha, delta_phi_c)
    mode = lg_mode(ell, p)
    eigenvalue = np.vdot(mode.amplitudes, apply_rotation(mode, alpha).amplitudes)
    mismatch = reduce_phase(stage_phase(ell, stage) - delta_phi_c + cmath.phase(eigenvalue))
    assert abs(mismatch) < 1e-9


def test_tree_round_trip():
    tree = build_sorter_tree([4, 2, 3, 1])
    assert tree_from_dict(tree_to_dict(tree)) == tree
    assert tree_to_dict(tree)["stage"]["alpha"] == "pi"


def test_validate_rejects_non_deterministic_tree():
    data = {
        "stage": {"alpha": "1/2 pi", "delta_phi_c": "0"},
        "port0": {"leaf": [2]},
        "port1": {"leaf": [1]},
    }
    with pytest.raises(ValueError, match="probability"):
        validate_tree(tree_from_dict(data), [1, 2])


def test_validate_rejects_missing_address():
    tree = build_sorter_tree([1, 2])
    with pytest.raises(ValueError):
        validate_tree(tree, [1, 2, 3])
