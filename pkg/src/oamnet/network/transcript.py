import logging

import pandas as pd

logger = logging.getLogger(__name__)


class Transcript:
    """Ordered structured events of one session (or one mux) for audit and replay checks."""

    def __init__(self, transcript_id: str = ""):
        self.transcript_id = transcript_id
        self.events: list[dict] = []

    def record(self, kind: str, **fields) -> dict:
        event = {"seq": len(self.events), "kind": kind, **fields}
        self.events.append(event)
        logger.debug(
            "%s %s %s",
            self.transcript_id or "-",
            kind,
            " ".join(f"{key}={value}" for key, value in fields.items()),
        )
        return event

    def of_kind(self, kind: str) -> list[dict]:
        return [event for event in self.events if event["kind"] == kind]

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(self.events)
