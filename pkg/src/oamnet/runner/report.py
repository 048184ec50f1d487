"""Session execution for a scenario and the line-delimited report it produces.

Report columns (fixed order, header row first):
session_id,sender,receiver,raw_count,sifted_count,qber,verdict,seed
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

import pandas as pd

from oamnet.errors import OamnetError
from oamnet.network.mux import InportMux
from oamnet.qkd.session import Bb84SessionResult, SessionConfig, run_session
from oamnet.runner.scenario import Scenario

logger = logging.getLogger(__name__)

# Worker cap for parallel runs; sessions still take turns on the in-port
MAX_WORKERS = 4

REPORT_COLUMNS = [
    "session_id",
    "sender",
    "receiver",
    "raw_count",
    "sifted_count",
    "qber",
    "verdict",
    "seed",
]


@dataclass(frozen=True)
class SessionOutcome:
    session: SessionConfig
    result: Bb84SessionResult | None = None
    error: str | None = None

    @property
    def verdict(self) -> str:
        return "error" if self.result is None else self.result.verdict


def override_sessions(
    scenario: Scenario, seed: int | None = None, photons: int | None = None
) -> Scenario:
    """Apply --seed (seed + index per session) and --photons to every session."""
    sessions = []
    for index, session in enumerate(scenario.sessions):
        if seed is not None:
            session = replace(session, seed=seed + index)
        if photons is not None:
            session = replace(session, photon_count=photons)
        sessions.append(session)
    return replace(scenario, sessions=tuple(sessions))


def run_scenario(scenario: Scenario, parallel: bool = False) -> list[SessionOutcome]:
    """
    Execute every session in order over one shared in-port.

    With parallel=True sessions are dispatched to at most MAX_WORKERS threads.
    Each waits for the in-port lease, so transmissions never overlap; only the
    setup and bookkeeping around them run concurrently. Outcomes keep scenario order.
    """
    mux = InportMux()

    def execute(session: SessionConfig) -> SessionOutcome:
        try:
            result = run_session(session, scenario.network, mux=mux, wait_for_inport=parallel)
        except OamnetError as exc:
            logger.error("%s failed: %s", session.session_id, exc)
            return SessionOutcome(session, error=str(exc))
        return SessionOutcome(session, result=result)

    if not parallel:
        return [execute(session) for session in scenario.sessions]
    with ThreadPoolExecutor(max_workers=max(1, min(MAX_WORKERS, len(scenario.sessions)))) as pool:
        return list(pool.map(execute, scenario.sessions))


def build_report(outcomes: list[SessionOutcome]) -> pd.DataFrame:
    rows = []
    for outcome in outcomes:
        result = outcome.result
        rows.append(
            {
                "session_id": outcome.session.session_id,
                "sender": outcome.session.sender,
                "receiver": outcome.session.receiver,
                "raw_count": result.raw_count if result else 0,
                "sifted_count": result.sifted_count if result else 0,
                "qber": result.qber_estimate if result else float("nan"),
                "verdict": outcome.verdict,
                "seed": outcome.session.seed,
            }
        )
    return pd.DataFrame(rows, columns=REPORT_COLUMNS)


def report_text(df: pd.DataFrame) -> str:
    return df.to_csv(index=False, float_format="%.6f", na_rep="", lineterminator="\n")


def write_report(df: pd.DataFrame, output_path: Path) -> Path:
    output_path.parent.mkdir(parents=True, exist_ok=True)
    output_path.write_text(report_text(df), encoding="utf-8")
    return output_path


def default_report_path(scenario: Scenario) -> Path:
    if scenario.report:
        return Path(scenario.report)
    stem = scenario.source.stem if scenario.source is not None else "scenario"
    return Path("reports") / f"{stem}.csv"
