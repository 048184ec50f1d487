import logging
from dataclasses import dataclass

from oamnet.errors import InportBusyError, InsufficientSampleError
from oamnet.network.mux import Busy, InportMux
from oamnet.network.topology import NetworkConfig, encode_address
from oamnet.network.transcript import Transcript
from oamnet.network.transport import detect_preamble, sender_preamble, transmit
from oamnet.optics.polarization import Basis, Bb84State
from oamnet.qkd.bb84 import (
    DEFAULT_ABORT_THRESHOLD,
    DEFAULT_SAMPLE_FRACTION,
    bb84_measure_incoming,
    bb84_prepare,
    choose_sample,
    drop_indices,
    eavesdrop_intercept_resend,
    estimate_qber,
    measure_in_frame,
    sift,
)
from oamnet.utils import make_streams

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Eavesdropper:
    """Intercept-resend attacker acting on a fraction of the photons."""

    intercept_fraction: float = 1.0

    def __post_init__(self):
        if not 0.0 <= self.intercept_fraction <= 1.0:
            raise ValueError(f"intercept_fraction={self.intercept_fraction} outside [0, 1]")


@dataclass(frozen=True)
class SessionConfig:
    session_id: str
    sender: str
    receiver: str
    photon_count: int
    seed: int
    eavesdropper: Eavesdropper | None = None
    compensate_depth: bool = True
    sample_fraction: float = DEFAULT_SAMPLE_FRACTION
    abort_threshold: float = DEFAULT_ABORT_THRESHOLD

    def __post_init__(self):
        if self.photon_count < 1:
            raise ValueError(f"photon_count must be at least 1, got {self.photon_count}")
        if not 0.0 < self.sample_fraction < 1.0:
            raise ValueError(f"sample_fraction={self.sample_fraction} outside (0, 1)")
        if not 0.0 <= self.abort_threshold <= 1.0:
            raise ValueError(f"abort_threshold={self.abort_threshold} outside [0, 1]")
        if not 0 <= self.seed < 2**64:
            raise ValueError(f"seed must be an unsigned 64-bit integer, got {self.seed}")
        if self.sender == self.receiver:
            raise ValueError(f"sender and receiver are both {self.sender!r}")


@dataclass(frozen=True)
class Bb84SessionResult:
    session_id: str
    sender: str
    receiver: str
    seed: int
    raw_count: int
    sifted_count: int
    sample_size: int
    qber_estimate: float
    sifted_error_rate: float
    key_bits_sender: tuple[int, ...]
    key_bits_receiver: tuple[int, ...]
    verdict: str
    preamble_detected: bool
    lost_count: int
    stray_count: int
    intercepted_count: int
    transcript_id: str

    @property
    def keys_agree(self) -> bool:
        return self.key_bits_sender == self.key_bits_receiver


def run_session(
    session: SessionConfig,
    network: NetworkConfig,
    mux: InportMux | None = None,
    transcript: Transcript | None = None,
    wait_for_inport: bool = False,
) -> Bb84SessionResult:
    """
    One BB84 exchange under a single in-port lease and a single seed.

    Preamble, prepare, transmit (with optional intercept-resend), measure, sift,
    estimate QBER on a disclosed sample and strip it from the keys.

    Raises:
        InportBusyError: another sender holds the in-port
        UnknownUserError: sender or receiver not in the network
        InsufficientSampleError: no sifted bits to sample
    """
    transcript_id = f"{session.session_id}:{session.seed}"
    transcript = transcript if transcript is not None else Transcript(transcript_id)
    mux = mux if mux is not None else InportMux(transcript)

    network.user(session.sender)
    receiver_ell = encode_address(session.receiver, network)
    depth = network.leaf_depth(session.receiver)
    streams = make_streams(session.seed)

    grant = mux.acquire(session.sender, network, block=wait_for_inport)
    if isinstance(grant, Busy):
        raise InportBusyError(grant.requester, grant.holder)

    try:
        measured_depth = depth if session.compensate_depth else 0

        decoded = []
        for photon in sender_preamble(session.sender, session.receiver, network):
            delivery = transmit(photon, network, streams["channel"])
            if delivery.arrived and delivery.user == session.receiver:
                bit, _ = measure_in_frame(
                    delivery.photon.polarization,
                    measured_depth,
                    Basis.CIRCULAR,
                    streams["receiver"],
                )
                decoded.append(Bb84State(Basis.CIRCULAR, bit))
        preamble_detected = detect_preamble(decoded)
        transcript.record(
            "preamble",
            sender=session.sender,
            receiver=session.receiver,
            decoded=",".join(state.label for state in decoded),
            detected=preamble_detected,
        )

        prepared = bb84_prepare(
            session.photon_count, receiver_ell, streams["sender"], origin=session.sender
        )
        eve = session.eavesdropper
        sender_bits, sender_bases, receiver_bits, receiver_bases = [], [], [], []
        lost = stray = intercepted = 0
        for item in prepared:
            photon = item.photon
            if eve is not None and streams["eavesdropper"].random() < eve.intercept_fraction:
                photon = eavesdrop_intercept_resend(
                    photon, photon.qwp_depth, streams["eavesdropper"]
                )
                intercepted += 1
            delivery = transmit(photon, network, streams["channel"])
            if not delivery.arrived:
                lost += 1
                continue
            if delivery.user != session.receiver:
                stray += 1
                continue
            basis, bit = bb84_measure_incoming(
                delivery.photon, depth, session.compensate_depth, streams["receiver"]
            )
            sender_bits.append(item.bit)
            sender_bases.append(item.basis)
            receiver_bits.append(bit)
            receiver_bases.append(basis)

        matched = sift(sender_bases, receiver_bases)
        if not matched:
            raise InsufficientSampleError(
                f"{session.session_id}: insufficient sifted bits for the QBER sample"
            )
        sifted_sender = [sender_bits[i] for i in matched]
        sifted_receiver = [receiver_bits[i] for i in matched]
        sifted_errors = sum(a != b for a, b in zip(sifted_sender, sifted_receiver))

        sample = choose_sample(len(matched), session.sample_fraction, streams["receiver"])
        qber = estimate_qber(sifted_sender, sifted_receiver, sample)
        verdict = "abort" if qber > session.abort_threshold else "ok"

        result = Bb84SessionResult(
            session_id=session.session_id,
            sender=session.sender,
            receiver=session.receiver,
            seed=session.seed,
            raw_count=len(sender_bits),
            sifted_count=len(matched),
            sample_size=len(sample),
            qber_estimate=qber,
            sifted_error_rate=sifted_errors / len(matched),
            key_bits_sender=tuple(drop_indices(sifted_sender, sample)),
            key_bits_receiver=tuple(drop_indices(sifted_receiver, sample)),
            verdict=verdict,
            preamble_detected=preamble_detected,
            lost_count=lost,
            stray_count=stray,
            intercepted_count=intercepted,
            transcript_id=transcript_id,
        )
        transcript.record(
            "session-summary",
            session_id=session.session_id,
            raw=result.raw_count,
            sifted=result.sifted_count,
            sample=result.sample_size,
            qber=f"{qber:.6f}",
            verdict=verdict,
        )
        logger.info(
            "%s %s->%s sifted=%d qber=%.4f verdict=%s",
            session.session_id,
            session.sender,
            session.receiver,
            result.sifted_count,
            qber,
            verdict,
        )
        return result
    finally:
        mux.release(session.sender)
