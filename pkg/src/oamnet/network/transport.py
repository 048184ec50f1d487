"""Transport of single photons through the network, with the sender-ID preamble."""

from dataclasses import dataclass, replace

import numpy as np

from oamnet.errors import OrderCapError
from oamnet.network.topology import NetworkConfig, encode_address
from oamnet.optics.polarization import (
    Basis,
    Bb84State,
    canonical_state,
    flip_within_basis,
    qwp_power,
)
from oamnet.optics.sorter_optics import PhotonRecord, route_photon

PREAMBLE = (Bb84State(Basis.CIRCULAR, 1), Bb84State(Basis.CIRCULAR, 0))


@dataclass(frozen=True)
class Delivery:
    arrived: bool
    user: str | None = None
    photon: PhotonRecord | None = None
    leaf_id: str | None = None
    stray: bool = False
    crosstalk: bool = False


LOST = Delivery(arrived=False)


def transmit(photon: PhotonRecord, config: NetworkConfig, rng: np.random.Generator) -> Delivery:
    """
    Carry one photon from the in-port to whichever user's drop port it reaches.

    Order of effects: loss, ell crosstalk, sorter routing, drop-port plates,
    polarization flip. A silent noise model consumes no randomness.
    """
    if abs(photon.ell) > config.max_abs_ell:
        raise OrderCapError("photon |ell|", abs(photon.ell), config.max_abs_ell)

    noise = config.noise
    crosstalk = False
    if noise.loss_prob or noise.ell_crosstalk_prob:
        u = rng.random()
        if u < noise.loss_prob:
            return LOST
        if u < noise.loss_prob + noise.ell_crosstalk_prob:
            shift = -1 if rng.random() < 0.5 else 1
            photon = replace(photon, ell=photon.ell + shift)
            crosstalk = True

    route = route_photon(photon, config.sorter, rng)
    photon = route.photon
    owner = config.owner_of(route.leaf)

    plates = config.user(owner).drop_plates if owner is not None else 0
    if plates:
        photon = replace(
            photon,
            polarization=qwp_power(photon.polarization, plates),
            qwp_depth=photon.qwp_depth + plates,
        )

    if noise.pol_flip_prob and rng.random() < noise.pol_flip_prob:
        photon = replace(photon, polarization=flip_within_basis(photon.polarization))

    return Delivery(
        arrived=owner is not None,
        user=owner,
        photon=photon,
        leaf_id=route.leaf.leaf_id,
        stray=route.stray,
        crosstalk=crosstalk,
    )


def sender_preamble(sender: str, receiver: str, config: NetworkConfig) -> list[PhotonRecord]:
    """Two photons announcing the sender: right-handed, then left-handed."""
    ell = encode_address(receiver, config)
    config.user(sender)
    return [
        PhotonRecord(
            ell=ell,
            p=0,
            polarization=canonical_state(state),
            origin=sender,
            sequence=index,
            tag="preamble",
        )
        for index, state in enumerate(PREAMBLE)
    ]


def detect_preamble(received) -> bool:
    """True iff the first two decoded states are R then L."""
    received = list(received)
    return len(received) >= 2 and tuple(received[:2]) == PREAMBLE
