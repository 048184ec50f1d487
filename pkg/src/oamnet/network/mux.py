"""Single in-port shared by all senders, steered by two rotating mirrors.

Only one sender may hold the in-port at a time; acquiring it sets the mirrors to
that sender's angles from the network's table.
"""

import threading
from dataclasses import dataclass

from oamnet.errors import OamnetError
from oamnet.network.topology import NetworkConfig, mirror_angles
from oamnet.network.transcript import Transcript
from oamnet.utils import format_angle


@dataclass(frozen=True)
class LeaseGrant:
    sender: str
    angles: tuple[float, float]


@dataclass(frozen=True)
class Busy:
    requester: str
    holder: str


class InportMux:
    def __init__(self, transcript: Transcript | None = None):
        self.transcript = transcript if transcript is not None else Transcript("inport")
        self._holder: str | None = None
        self._angles: tuple[float, float] | None = None
        self._cond = threading.Condition()

    @property
    def holder(self) -> str | None:
        return self._holder

    @property
    def angles(self) -> tuple[float, float] | None:
        return self._angles

    def acquire(
        self,
        sender: str,
        config: NetworkConfig,
        block: bool = False,
        timeout: float | None = None,
    ) -> LeaseGrant | Busy:
        """
        Grant the in-port to sender, or report who holds it.

        With block=True, waits for the current holder to release (up to timeout).
        """
        angles = mirror_angles(sender, config)
        with self._cond:
            if block:
                self._cond.wait_for(lambda: self._holder is None, timeout=timeout)
            if self._holder is not None:
                self.transcript.record("lease-busy", sender=sender, holder=self._holder)
                return Busy(sender, self._holder)
            self._holder = sender
            self._angles = angles
            self.transcript.record(
                "lease-granted",
                sender=sender,
                alpha1=format_angle(angles[0]),
                alpha2=format_angle(angles[1]),
            )
            return LeaseGrant(sender, angles)

    def release(self, sender: str) -> None:
        with self._cond:
            if self._holder != sender:
                raise OamnetError(
                    f"{sender!r} does not hold the in-port (holder: {self._holder!r})"
                )
            self._holder = None
            self._angles = None
            self.transcript.record("lease-released", sender=sender)
            self._cond.notify_all()


def acquire_inport(sender: str, mux: InportMux, config: NetworkConfig) -> LeaseGrant | Busy:
    return mux.acquire(sender, config)
