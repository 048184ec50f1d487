"""Mach-Zehnder OAM sorter stages and cascaded sorter trees.

A stage puts a beam rotator (angle alpha) and a delay plate (delta_phi_c) in one
arm. A photon of signed ell picks up the interferometric phase
phi = ell * alpha + delta_phi_c and leaves port 0 with probability cos^2(phi/2).
Trees are synthesized so every configured address leaves each stage it meets
with probability exactly 0 or 1.
"""

import logging
import math
from dataclasses import dataclass, field, replace
from fractions import Fraction

import numpy as np

from oamnet.errors import OrderCapError, UnsortableSetError
from oamnet.optics.polarization import JonesVector, qwp_apply
from oamnet.utils import DETERMINISM_TOL, format_angle, parse_angle, pi_multiple, reduce_phase

logger = logging.getLogger(__name__)

DEFAULT_MAX_ABS_ELL = 8
DEFAULT_MAX_HALVINGS = 8
_TWO_PI = 2 * math.pi


@dataclass(frozen=True)
class SorterStage:
    alpha: float
    delta_phi_c: float
    applies_qwp: bool = True

    def __post_init__(self):
        for name in ("alpha", "delta_phi_c"):
            value = getattr(self, name)
            if not -_TWO_PI < value <= _TWO_PI + 1e-12:
                raise ValueError(f"{name}={value} outside (-2pi, 2pi]")


@dataclass(frozen=True)
class SorterLeaf:
    addresses: frozenset[int]
    depth: int
    path: str = ""

    @property
    def leaf_id(self) -> str:
        return f"leaf:{self.path}" if self.path else "leaf:root"


@dataclass(frozen=True)
class SorterNode:
    stage: SorterStage
    port0: "SorterNode | SorterLeaf"
    port1: "SorterNode | SorterLeaf"
    depth: int
    path: str = ""


@dataclass(frozen=True)
class SorterTree:
    root: SorterNode | SorterLeaf
    addresses: frozenset[int] = field(default_factory=frozenset)

    def leaves(self) -> list[SorterLeaf]:
        return [leaf for leaf, _ in leaf_paths(self)]

    def leaf_by_id(self, leaf_id: str) -> SorterLeaf:
        for leaf in self.leaves():
            if leaf.leaf_id == leaf_id:
                return leaf
        raise KeyError(f"no leaf {leaf_id!r} in sorter tree")

    def leaf_for(self, ell: int) -> SorterLeaf:
        for leaf in self.leaves():
            if ell in leaf.addresses:
                return leaf
        raise KeyError(f"address {ell} is not configured in this sorter")

    def stage_count(self) -> int:
        return len(stage_paths(self))


@dataclass(frozen=True)
class PhotonRecord:
    """One photon in transit: OAM address and polarization travel together."""

    ell: int
    p: int
    polarization: JonesVector
    qwp_depth: int = 0
    origin: str = ""
    sequence: int = 0
    tag: str = "signal"


@dataclass(frozen=True)
class RouteResult:
    leaf: SorterLeaf
    photon: PhotonRecord
    stray: bool


def stage_phase(ell: int, stage: SorterStage) -> float:
    return reduce_phase(ell * stage.alpha + stage.delta_phi_c)


def stage_port_probabilities(ell: int, stage: SorterStage) -> tuple[float, float]:
    """(p0, p1); phi = 0 (mod 2pi) is constructive at port 0."""
    half = stage_phase(ell, stage) / 2
    return math.cos(half) ** 2, math.sin(half) ** 2


def deterministic_port(ell: int, stage: SorterStage) -> int | None:
    """0 or 1 when ell leaves the stage through a single port, else None."""
    p0, _ = stage_port_probabilities(ell, stage)
    if p0 >= 1 - DETERMINISM_TOL:
        return 0
    if p0 <= DETERMINISM_TOL:
        return 1
    return None


def candidate_stages(use_qwp: bool, max_halvings: int = DEFAULT_MAX_HALVINGS):
    """
    Stage schedule searched at every node.

    Angles alpha = pi / 2^j for j = 0, 1, ...; at each angle the delays
    -k * step with step = min(pi/4, alpha) for k = 0, 1, ... while k * step < 2pi.
    """
    for j in range(max_halvings + 1):
        alpha = Fraction(1, 2**j)
        step = min(Fraction(1, 4), alpha)
        k = 0
        while k * step < 2:
            yield SorterStage(pi_multiple(alpha), pi_multiple(-k * step), use_qwp)
            k += 1


def split_addresses(addresses, stage: SorterStage) -> tuple[frozenset, frozenset] | None:
    port0, port1 = set(), set()
    for ell in addresses:
        port = deterministic_port(ell, stage)
        if port is None:
            return None
        (port0 if port == 0 else port1).add(ell)
    if not port0 or not port1:
        return None
    return frozenset(port0), frozenset(port1)


def build_sorter_tree(
    addresses,
    use_qwp: bool = True,
    max_abs_ell: int = DEFAULT_MAX_ABS_ELL,
    max_halvings: int = DEFAULT_MAX_HALVINGS,
) -> SorterTree:
    """
    Synthesize a cascade that sends every address to its own leaf.

    Args:
        addresses: nonempty collection of distinct signed ell values
        use_qwp: whether every stage carries the quarter-wave prisms
        max_abs_ell: address cap
        max_halvings: how far the angle schedule halves alpha

    Raises:
        UnsortableSetError: some subset has no deterministic split in the schedule
    """
    address_set = frozenset(int(ell) for ell in addresses)
    if not address_set:
        raise ValueError("sorter needs at least one address")
    for ell in address_set:
        if abs(ell) > max_abs_ell:
            raise OrderCapError("|ell|", abs(ell), max_abs_ell)

    def build(subset: frozenset, depth: int, path: str):
        if len(subset) == 1:
            return SorterLeaf(subset, depth, path)
        for stage in candidate_stages(use_qwp, max_halvings):
            split = split_addresses(subset, stage)
            if split is not None:
                logger.debug(
                    "stage path=%s alpha=%s delta_phi_c=%s port0=%s port1=%s",
                    path or "root",
                    format_angle(stage.alpha),
                    format_angle(stage.delta_phi_c),
                    sorted(split[0]),
                    sorted(split[1]),
                )
                return SorterNode(
                    stage,
                    build(split[0], depth + 1, path + "0"),
                    build(split[1], depth + 1, path + "1"),
                    depth,
                    path,
                )
        raise UnsortableSetError(subset)

    return SorterTree(build(address_set, 0, ""), address_set)


def route_photon(
    photon: PhotonRecord, tree: SorterTree, rng: np.random.Generator
) -> RouteResult:
    """
    Walk the tree, applying P at every stage that carries prisms.

    Ports are sampled only where the photon's ell is not routed deterministically;
    a photon whose ell is not in the leaf it reaches is flagged stray.
    """
    node = tree.root
    while isinstance(node, SorterNode):
        port = deterministic_port(photon.ell, node.stage)
        if port is None:
            p0, _ = stage_port_probabilities(photon.ell, node.stage)
            port = 0 if rng.random() < p0 else 1
        if node.stage.applies_qwp:
            photon = replace(
                photon,
                polarization=qwp_apply(photon.polarization),
                qwp_depth=photon.qwp_depth + 1,
            )
        node = node.port0 if port == 0 else node.port1
    return RouteResult(node, photon, stray=photon.ell not in node.addresses)


def leaf_paths(tree: SorterTree) -> list[tuple[SorterLeaf, list[tuple[SorterStage, int]]]]:
    """Every leaf with the (stage, port) sequence leading to it, port-0 branches first."""
    found = []

    def walk(node, trail):
        if isinstance(node, SorterLeaf):
            found.append((node, trail))
            return
        walk(node.port0, trail + [(node.stage, 0)])
        walk(node.port1, trail + [(node.stage, 1)])

    walk(tree.root, [])
    return found


def stage_paths(tree: SorterTree) -> list[tuple[str, SorterStage]]:
    stages = []

    def walk(node):
        if isinstance(node, SorterNode):
            stages.append((node.path or "root", node.stage))
            walk(node.port0)
            walk(node.port1)

    walk(tree.root)
    return stages


def leaf_distribution(ell: int, tree: SorterTree) -> dict[str, float]:
    """Exhaustive probability of reaching each leaf, multiplying port probabilities."""
    distribution = {}
    for leaf, trail in leaf_paths(tree):
        probability = 1.0
        for stage, port in trail:
            probability *= stage_port_probabilities(ell, stage)[port]
        distribution[leaf.leaf_id] = probability
    return distribution


def path_probability(ell: int, tree: SorterTree, leaf_id: str) -> float:
    return leaf_distribution(ell, tree)[tree.leaf_by_id(leaf_id).leaf_id]


def validate_tree(tree: SorterTree, addresses) -> None:
    """Every address sits in exactly one leaf and reaches it with probability 1."""
    address_set = frozenset(addresses)
    seen: dict[int, str] = {}
    for leaf in tree.leaves():
        for ell in leaf.addresses:
            if ell in seen:
                raise ValueError(f"address {ell} appears in {seen[ell]} and {leaf.leaf_id}")
            seen[ell] = leaf.leaf_id
    if set(seen) != address_set:
        raise ValueError(
            f"sorter leaves hold {sorted(seen)}, network addresses are {sorted(address_set)}"
        )
    for ell, leaf_id in seen.items():
        reach = leaf_distribution(ell, tree)[leaf_id]
        if abs(reach - 1) > DETERMINISM_TOL:
            raise ValueError(f"address {ell} reaches {leaf_id} with probability {reach:.6g}")


def tree_to_dict(tree: SorterTree) -> dict:
    def encode(node):
        if isinstance(node, SorterLeaf):
            return {"leaf": sorted(node.addresses)}
        return {
            "stage": {
                "alpha": format_angle(node.stage.alpha),
                "delta_phi_c": format_angle(node.stage.delta_phi_c),
                "applies_qwp": node.stage.applies_qwp,
            },
            "port0": encode(node.port0),
            "port1": encode(node.port1),
        }

    return encode(tree.root)


def tree_from_dict(data: dict) -> SorterTree:
    def decode(item, depth, path):
        if "leaf" in item:
            return SorterLeaf(frozenset(int(ell) for ell in item["leaf"]), depth, path)
        stage_data = item["stage"]
        stage = SorterStage(
            parse_angle(stage_data["alpha"]),
            parse_angle(stage_data["delta_phi_c"]),
            bool(stage_data.get("applies_qwp", True)),
        )
        return SorterNode(
            stage,
            decode(item["port0"], depth + 1, path + "0"),
            decode(item["port1"], depth + 1, path + "1"),
            depth,
            path,
        )

    root = decode(data, 0, "")
    tree = SorterTree(root)
    addresses = frozenset().union(*(leaf.addresses for leaf in tree.leaves()))
    return SorterTree(root, addresses)
