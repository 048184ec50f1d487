"""Scenario files: a TOML document describing the network and an ordered list of sessions.

See docs/scenario-format.md for the grammar.
"""

import re
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from dataclasses import dataclass, field
from pathlib import Path

import tomli_w

from oamnet.errors import OrderCapError, ScenarioError, UnsortableSetError
from oamnet.network.topology import NetworkConfig, NoiseModel, User
from oamnet.optics.sorter_optics import (
    DEFAULT_MAX_ABS_ELL,
    build_sorter_tree,
    tree_from_dict,
    tree_to_dict,
)
from oamnet.qkd.bb84 import DEFAULT_ABORT_THRESHOLD, DEFAULT_SAMPLE_FRACTION
from oamnet.qkd.session import Eavesdropper, SessionConfig
from oamnet.utils import format_angle, parse_angle

_TOML_LINE = re.compile(r"at line (\d+)")

NOISE_FIELDS = ("ell_crosstalk_prob", "pol_flip_prob", "loss_prob")


@dataclass(frozen=True)
class Scenario:
    network: NetworkConfig
    sessions: tuple[SessionConfig, ...] = ()
    report: str | None = None
    source: Path | None = field(default=None, compare=False)


class _Source:
    """Raw scenario text, used to anchor diagnostics to a line."""

    def __init__(self, text: str):
        self.lines = text.splitlines()

    def entry_span(self, header: str, index: int) -> tuple[int, int] | None:
        """First and last line of the index-th [[header]] block, sub-tables included."""
        starts = [
            number
            for number, line in enumerate(self.lines, start=1)
            if line.split("#")[0].strip() == f"[[{header}]]"
        ]
        if index >= len(starts):
            return None
        first, last = starts[index], len(self.lines)
        for number in range(first + 1, len(self.lines) + 1):
            stripped = self.lines[number - 1].strip()
            if stripped.startswith("[") and not stripped.startswith(f"[{header}."):
                last = number - 1
                break
        return first, last

    def line(self, *needles, span: tuple[int, int] | None = None) -> int | None:
        first, last = span if span is not None else (1, len(self.lines))
        for number in range(first, last + 1):
            if all(str(needle) in self.lines[number - 1] for needle in needles):
                return number
        return first if span is not None else None

    def error(
        self, field_name: str, message: str, *needles, span: tuple[int, int] | None = None
    ) -> ScenarioError:
        if needles:
            line = self.line(*needles, span=span)
        else:
            line = span[0] if span is not None else None
        return ScenarioError(field_name, message, line)


def _require(table: dict, key: str, where: str, src: _Source, kind: type, span=None):
    if key not in table:
        if span is not None:
            raise src.error(f"{where}.{key}", "missing required field", span=span)
        table_name = where.split("[")[0]
        raise src.error(f"{where}.{key}", "missing required field", f"[{table_name}")
    value = table[key]
    if not isinstance(value, kind) or (kind is int and isinstance(value, bool)):
        message = f"expected {kind.__name__}, got {value!r}"
        raise src.error(f"{where}.{key}", message, key, span=span)
    return value


def _number(table: dict, key: str, where: str, src: _Source, default: float, span=None) -> float:
    value = table.get(key, default)
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise src.error(f"{where}.{key}", f"expected a number, got {value!r}", key, span=span)
    return float(value)


def _flag(table: dict, key: str, where: str, src: _Source, default: bool, span=None) -> bool:
    value = table.get(key, default)
    if not isinstance(value, bool):
        raise src.error(f"{where}.{key}", f"expected true or false, got {value!r}", key, span=span)
    return value


def _table(data: dict, key: str, where: str, src: _Source, span=None) -> dict:
    value = data.get(key, {})
    if not isinstance(value, dict):
        raise src.error(where, f"expected a table, got {value!r}", key, span=span)
    return value


def _array_of_tables(data: dict, key: str, where: str, src: _Source) -> list:
    value = data.get(key, [])
    if not isinstance(value, list):
        raise src.error(where, f"expected an array of tables, got {value!r}", key)
    return value


def _parse_users(data: dict, src: _Source) -> list[User]:
    entries = _array_of_tables(data, "users", "network.users", src)
    if not entries:
        raise src.error("network.users", "at least one user is required", "[network")
    users, by_ell = [], {}
    for index, entry in enumerate(entries):
        where = f"network.users[{index}]"
        span = src.entry_span("network.users", index)
        if not isinstance(entry, dict):
            raise src.error(where, f"expected a table, got {entry!r}", span=span)
        name = _require(entry, "name", where, src, str, span)
        ell = entry.get("ell")
        if ell is not None and (isinstance(ell, bool) or not isinstance(ell, int)):
            raise src.error(f"{where}.ell", f"expected integer, got {ell!r}", "ell", span=span)
        if ell is not None and ell in by_ell:
            raise src.error(
                f"{where}.ell",
                f"duplicate address ell={ell} for users {by_ell[ell]!r} and {name!r}",
                "ell",
                ell,
                span=span,
            )
        drop_plates = entry.get("drop_plates", 0)
        if isinstance(drop_plates, bool) or not isinstance(drop_plates, int):
            raise src.error(
                f"{where}.drop_plates",
                f"expected a nonnegative integer, got {drop_plates!r}",
                "drop_plates",
                span=span,
            )
        try:
            users.append(User(name, ell, drop_plates))
        except ValueError as exc:
            raise src.error(where, str(exc), span=span) from None
        if ell is not None:
            by_ell[ell] = name
    return users


def _parse_mirrors(data: dict, users: list[User], src: _Source) -> dict:
    names = {user.name for user in users}
    table = {}
    for name, pair in _table(data, "mirrors", "network.mirrors", src).items():
        field_name = f"network.mirrors.{name}"
        if name not in names:
            raise src.error(field_name, f"unknown user {name!r}", name, "=")
        if not isinstance(pair, list) or len(pair) != 2:
            raise src.error(field_name, "expected [alpha1, alpha2]", name, "=")
        try:
            table[name] = (parse_angle(pair[0]), parse_angle(pair[1]))
        except ValueError as exc:
            raise src.error(field_name, str(exc), name, "=") from None
    for user in users:
        if user.name not in table:
            raise src.error(
                f"network.mirrors.{user.name}", "no mirror angles for user", "[network.mirrors"
            )
    return table


def _parse_noise(data: dict, src: _Source) -> NoiseModel:
    values = {key: _number(data, key, "network.noise", src, 0.0) for key in NOISE_FIELDS}
    try:
        return NoiseModel(**values)
    except ValueError as exc:
        raise src.error("network.noise", str(exc), "[network.noise") from None


def _parse_network(data, src: _Source) -> NetworkConfig:
    if not isinstance(data, dict):
        raise src.error("network", "missing [network] table")
    max_abs_ell = data.get("max_abs_ell", DEFAULT_MAX_ABS_ELL)
    if isinstance(max_abs_ell, bool) or not isinstance(max_abs_ell, int) or max_abs_ell < 1:
        raise src.error("network.max_abs_ell", "expected a positive integer", "max_abs_ell")
    users = _parse_users(data, src)
    table = _parse_mirrors(data, users, src)
    noise = _parse_noise(_table(data, "noise", "network.noise", src), src)

    addresses = [user.ell for user in users if user.ell is not None]
    if not addresses:
        raise src.error(
            "network.users", "no user has an address (ell), nothing can receive", "[[network.users"
        )
    use_qwp = _flag(data, "use_qwp", "network", src, True)
    explicit = _table(data, "sorter", "network.sorter", src) if "sorter" in data else None
    try:
        if explicit is not None:
            sorter = tree_from_dict(explicit)
        else:
            sorter = build_sorter_tree(addresses, use_qwp=use_qwp, max_abs_ell=max_abs_ell)
    except (UnsortableSetError, OrderCapError) as exc:
        raise src.error("network.users", str(exc), "ell") from None
    except (KeyError, ValueError, TypeError, AttributeError) as exc:
        raise src.error("network.sorter", str(exc), "[network.sorter") from None

    try:
        return NetworkConfig(tuple(users), table, sorter, noise, max_abs_ell)
    except ValueError as exc:
        raise src.error("network", str(exc), "[network") from None


def _parse_session(entry, index: int, network: NetworkConfig, src: _Source):
    where = f"sessions[{index}]"
    span = src.entry_span("sessions", index)
    if not isinstance(entry, dict):
        raise src.error(where, f"expected a table, got {entry!r}", span=span)
    session_id = entry.get("id", f"session-{index}")
    if not isinstance(session_id, str):
        raise src.error(f"{where}.id", f"expected str, got {session_id!r}", "id", span=span)
    sender = _require(entry, "sender", where, src, str, span)
    receiver = _require(entry, "receiver", where, src, str, span)
    for role, name in (("sender", sender), ("receiver", receiver)):
        if name not in network.mirror_table:
            raise src.error(f"{where}.{role}", f"unknown user {name!r}", role, name, span=span)
    if network.user(receiver).ell is None:
        raise src.error(
            f"{where}.receiver", f"{receiver!r} has no address", "receiver", receiver, span=span
        )
    photons = _require(entry, "photons", where, src, int, span)
    seed = _require(entry, "seed", where, src, int, span)

    eve = None
    if "eavesdropper" in entry:
        eve_where = f"{where}.eavesdropper"
        eve_table = _table(entry, "eavesdropper", eve_where, src, span)
        fraction = _number(eve_table, "intercept_fraction", eve_where, src, 1.0, span)
        try:
            eve = Eavesdropper(fraction)
        except ValueError as exc:
            raise src.error(
                f"{eve_where}.intercept_fraction", str(exc), "intercept", span=span
            ) from None

    compensate = _flag(entry, "compensate_depth", where, src, True, span)
    sample_fraction = _number(entry, "sample_fraction", where, src, DEFAULT_SAMPLE_FRACTION, span)
    abort_threshold = _number(entry, "abort_threshold", where, src, DEFAULT_ABORT_THRESHOLD, span)
    try:
        return SessionConfig(
            session_id=session_id,
            sender=sender,
            receiver=receiver,
            photon_count=photons,
            seed=seed,
            eavesdropper=eve,
            compensate_depth=compensate,
            sample_fraction=sample_fraction,
            abort_threshold=abort_threshold,
        )
    except ValueError as exc:
        key = next((key for key in entry if str(exc).startswith(key)), None)
        if key is None:
            raise src.error(where, str(exc), span=span) from None
        raise src.error(f"{where}.{key}", str(exc), key, span=span) from None


def parse_scenario_text(text: str, source: Path | None = None) -> Scenario:
    """
    Parse and fully validate a scenario document.

    Raises:
        ScenarioError: naming the offending field and, when it can be found, its line
    """
    src = _Source(text)
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        match = _TOML_LINE.search(str(exc))
        line = int(match.group(1)) if match else None
        raise ScenarioError("<document>", str(exc), line) from None

    network = _parse_network(data.get("network"), src)
    sessions = tuple(
        _parse_session(entry, index, network, src)
        for index, entry in enumerate(_array_of_tables(data, "sessions", "sessions", src))
    )
    seen = set()
    for index, session in enumerate(sessions):
        if session.session_id in seen:
            raise src.error(
                f"sessions[{index}].id",
                f"duplicate session id {session.session_id!r}",
                session.session_id,
                span=src.entry_span("sessions", index),
            )
        seen.add(session.session_id)

    report = _table(data, "output", "output", src).get("report")
    if report is not None and not isinstance(report, str):
        raise src.error("output.report", f"expected a path, got {report!r}", "report")
    return Scenario(network, sessions, report, source)


def parse_scenario(path) -> Scenario:
    path = Path(path)
    return parse_scenario_text(path.read_text(encoding="utf-8"), source=path)


def scenario_to_dict(scenario: Scenario) -> dict:
    network = scenario.network
    users = []
    for user in network.users:
        entry = {"name": user.name}
        if user.ell is not None:
            entry["ell"] = user.ell
        if user.drop_plates:
            entry["drop_plates"] = user.drop_plates
        users.append(entry)

    data = {
        "network": {
            "max_abs_ell": network.max_abs_ell,
            "users": users,
            "mirrors": {
                name: [format_angle(a1), format_angle(a2)]
                for name, (a1, a2) in network.mirror_table.items()
            },
            "noise": {key: getattr(network.noise, key) for key in NOISE_FIELDS},
            "sorter": tree_to_dict(network.sorter),
        },
        "sessions": [],
    }
    for session in scenario.sessions:
        entry = {
            "id": session.session_id,
            "sender": session.sender,
            "receiver": session.receiver,
            "photons": session.photon_count,
            "seed": session.seed,
            "compensate_depth": session.compensate_depth,
            "sample_fraction": session.sample_fraction,
            "abort_threshold": session.abort_threshold,
        }
        if session.eavesdropper is not None:
            entry["eavesdropper"] = {
                "intercept_fraction": session.eavesdropper.intercept_fraction
            }
        data["sessions"].append(entry)
    if scenario.report is not None:
        data["output"] = {"report": scenario.report}
    return data


def serialize_scenario(scenario: Scenario) -> str:
    return tomli_w.dumps(scenario_to_dict(scenario))
