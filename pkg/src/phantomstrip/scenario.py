"""Scenario document ingestion and report emission.

Scenario files are strict JSON: unknown fields are rejected and every
diagnostic names the offending field path, because a silently ignored
typo in an energy config corrupts results without any visible failure.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
from datetime import datetime, timezone
from typing import Optional, Tuple

from phantomstrip import __version__
from phantomstrip.control import (
    Action,
    ButtonMap,
    MacroTable,
    MasterToggle,
    RunMacro,
    ToggleOutlet,
    action_from_json,
    default_button_map,
)
from phantomstrip.ircodec import DEFAULT_PARAMS, IrFrame, ProtocolParams
from phantomstrip.sim import (
    ApplianceIntent,
    ApplianceProfile,
    EnergyReport,
    PowerMode,
    RemotePress,
    ScheduleEvent,
    SimConfig,
)

SCHEMA_VERSION = 1

_MODE_NAMES = {mode.value: mode for mode in PowerMode}
_INTENT_MODE_NAMES = {
    name: mode for name, mode in _MODE_NAMES.items() if mode is not PowerMode.OFF
}


class ScenarioError(ValueError):
    """Scenario or report document rejected; the message names the field."""


def _fail(path: str, message: str) -> "ScenarioError":
    return ScenarioError(f"{path}: {message}")


def _expect_object(value: object, path: str) -> dict:
    if not isinstance(value, dict):
        raise _fail(path, f"expected an object, got {type(value).__name__}")
    return value


def _expect_array(value: object, path: str) -> list:
    if not isinstance(value, list):
        raise _fail(path, f"expected an array, got {type(value).__name__}")
    return value


def _expect_keys(doc: dict, path: str, required: set, optional: set = frozenset()) -> None:
    missing = required - doc.keys()
    if missing:
        raise _fail(path, f"missing required field(s): {', '.join(sorted(missing))}")
    unknown = doc.keys() - required - optional
    if unknown:
        raise _fail(path, f"unknown field(s): {', '.join(sorted(unknown))}")


def _expect_int(value: object, path: str, minimum: Optional[int] = None) -> int:
    if not isinstance(value, int) or isinstance(value, bool):
        raise _fail(path, f"expected an integer, got {value!r}")
    if minimum is not None and value < minimum:
        raise _fail(path, f"must be >= {minimum}, got {value}")
    return value


def _expect_number(value: object, path: str, minimum: Optional[float] = None) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise _fail(path, f"expected a number, got {value!r}")
    if minimum is not None and value < minimum:
        raise _fail(path, f"must be >= {minimum}, got {value}")
    return float(value)


def _expect_bool(value: object, path: str) -> bool:
    if not isinstance(value, bool):
        raise _fail(path, f"expected true or false, got {value!r}")
    return value


def _expect_string(value: object, path: str) -> str:
    if not isinstance(value, str):
        raise _fail(path, f"expected a string, got {value!r}")
    return value


@dataclasses.dataclass(frozen=True)
class ScenarioDoc:
    """A parsed, fully validated scenario file."""

    schema_version: int
    config: SimConfig
    source_sha256: str


def to_sim_config(doc: ScenarioDoc) -> SimConfig:
    return doc.config


def _parse_watts(doc: object, path: str) -> dict:
    table = _expect_object(doc, path)
    _expect_keys(
        table,
        path,
        required={"operational", "active_standby", "passive_standby"},
        optional={"off"},
    )
    return {
        _MODE_NAMES[name]: _expect_number(value, f"{path}.{name}", minimum=0.0)
        for name, value in table.items()
    }


def _parse_appliances(doc: object, outlet_count: int, path: str) -> Tuple[ApplianceProfile, ...]:
    entries = _expect_array(doc, path)
    by_outlet: dict = {}
    for i, entry in enumerate(entries):
        entry_path = f"{path}[{i}]"
        entry = _expect_object(entry, entry_path)
        _expect_keys(entry, entry_path, required={"outlet", "name", "watts"})
        outlet = _expect_int(entry["outlet"], f"{entry_path}.outlet", minimum=0)
        if outlet >= outlet_count:
            raise _fail(
                f"{entry_path}.outlet",
                f"outlet {outlet} does not exist on a {outlet_count}-outlet strip",
            )
        if outlet in by_outlet:
            raise _fail(f"{entry_path}.outlet", f"outlet {outlet} is bound twice")
        name = _expect_string(entry["name"], f"{entry_path}.name")
        watts = _parse_watts(entry["watts"], f"{entry_path}.watts")
        try:
            by_outlet[outlet] = ApplianceProfile(name, watts)
        except ValueError as exc:
            raise _fail(entry_path, str(exc)) from None
    unbound = sorted(set(range(outlet_count)) - by_outlet.keys())
    if unbound:
        raise _fail(path, f"no appliance bound to outlet(s) {unbound}")
    return tuple(by_outlet[i] for i in range(outlet_count))


def _validate_action(action: Action, outlet_count: int, macros: MacroTable, path: str) -> None:
    if isinstance(action, ToggleOutlet) and action.outlet >= outlet_count:
        raise _fail(
            path, f"outlet {action.outlet} does not exist on a {outlet_count}-outlet strip"
        )
    if isinstance(action, RunMacro) and action.macro_id not in macros:
        raise _fail(path, f"macro {action.macro_id} is not defined in this document")


def _parse_macros(doc: object, outlet_count: int, path: str) -> MacroTable:
    entries = _expect_array(doc, path)
    table: dict = {}
    for i, entry in enumerate(entries):
        entry_path = f"{path}[{i}]"
        entry = _expect_object(entry, entry_path)
        _expect_keys(entry, entry_path, required={"id", "body"})
        macro_id = _expect_int(entry["id"], f"{entry_path}.id", minimum=0)
        if macro_id in table:
            raise _fail(f"{entry_path}.id", f"macro {macro_id} is defined twice")
        body = []
        for j, action_doc in enumerate(_expect_array(entry["body"], f"{entry_path}.body")):
            action_path = f"{entry_path}.body[{j}]"
            try:
                action = action_from_json(action_doc)
            except ValueError as exc:
                raise _fail(action_path, str(exc)) from None
            if isinstance(action, RunMacro):
                raise _fail(action_path, "macros must not invoke other macros")
            _validate_action(action, outlet_count, MacroTable(), action_path)
            body.append(action)
        table[macro_id] = tuple(body)
    try:
        return MacroTable(table)
    except ValueError as exc:
        raise _fail(path, str(exc)) from None


def _parse_buttons(
    doc: object, outlet_count: int, macros: MacroTable, path: str
) -> ButtonMap:
    entries = _expect_array(doc, path)
    bindings: dict = {}
    for i, entry in enumerate(entries):
        entry_path = f"{path}[{i}]"
        entry = _expect_object(entry, entry_path)
        _expect_keys(entry, entry_path, required={"address", "command", "action"})
        address = _expect_int(entry["address"], f"{entry_path}.address", minimum=0)
        command = _expect_int(entry["command"], f"{entry_path}.command", minimum=0)
        if address > 255 or command > 255:
            raise _fail(entry_path, "address and command must lie in 0..255")
        if (address, command) in bindings:
            raise _fail(entry_path, f"button ({address}, {command}) is bound twice")
        try:
            action = action_from_json(entry["action"])
        except ValueError as exc:
            raise _fail(f"{entry_path}.action", str(exc)) from None
        _validate_action(action, outlet_count, macros, f"{entry_path}.action")
        bindings[(address, command)] = action
    try:
        return ButtonMap(bindings)
    except ValueError as exc:
        raise _fail(path, str(exc)) from None


def _parse_press(doc: dict, path: str) -> IrFrame:
    if "repeat" in doc:
        _expect_keys(doc, path, required={"repeat"})
        if _expect_bool(doc["repeat"], f"{path}.repeat") is not True:
            raise _fail(f"{path}.repeat", "only true is meaningful here")
        return IrFrame.repeat()
    _expect_keys(doc, path, required={"address", "command"})
    address = _expect_int(doc["address"], f"{path}.address", minimum=0)
    command = _expect_int(doc["command"], f"{path}.command", minimum=0)
    try:
        return IrFrame.data(address, command)
    except ValueError as exc:
        raise _fail(path, str(exc)) from None


def _parse_events(doc: object, outlet_count: int, path: str) -> Tuple[ScheduleEvent, ...]:
    entries = _expect_array(doc, path)
    events = []
    for i, entry in enumerate(entries):
        entry_path = f"{path}[{i}]"
        entry = _expect_object(entry, entry_path)
        if "intent" in entry:
            _expect_keys(entry, entry_path, required={"time_s", "intent"})
            intent_doc = _expect_object(entry["intent"], f"{entry_path}.intent")
            _expect_keys(intent_doc, f"{entry_path}.intent", required={"outlet", "mode"})
            outlet = _expect_int(intent_doc["outlet"], f"{entry_path}.intent.outlet", minimum=0)
            if outlet >= outlet_count:
                raise _fail(
                    f"{entry_path}.intent.outlet",
                    f"outlet {outlet} does not exist on a {outlet_count}-outlet strip",
                )
            mode_name = _expect_string(intent_doc["mode"], f"{entry_path}.intent.mode")
            if mode_name not in _INTENT_MODE_NAMES:
                raise _fail(
                    f"{entry_path}.intent.mode",
                    f"expected one of {sorted(_INTENT_MODE_NAMES)}, got {mode_name!r}"
                    + (" (off is not an intent)" if mode_name == PowerMode.OFF.value else ""),
                )
            subject: object = ApplianceIntent(outlet, _INTENT_MODE_NAMES[mode_name])
        elif "press" in entry:
            _expect_keys(entry, entry_path, required={"time_s", "press"})
            press_doc = _expect_object(entry["press"], f"{entry_path}.press")
            subject = RemotePress(_parse_press(press_doc, f"{entry_path}.press"))
        else:
            raise _fail(entry_path, "each event needs an 'intent' or a 'press' field")
        time_s = _expect_int(entry["time_s"], f"{entry_path}.time_s", minimum=0)
        events.append(ScheduleEvent(time_s, subject))
    return tuple(events)


def _parse_initial(doc: object, outlet_count: int, path: str):
    initial = _expect_object(doc, path)
    _expect_keys(initial, path, required=set(), optional={"coil_on", "modes"})
    coil_on = None
    if "coil_on" in initial:
        raw = _expect_array(initial["coil_on"], f"{path}.coil_on")
        coil_on = tuple(
            _expect_bool(v, f"{path}.coil_on[{i}]") for i, v in enumerate(raw)
        )
        if len(coil_on) != outlet_count:
            raise _fail(f"{path}.coil_on", f"expected {outlet_count} entries, got {len(coil_on)}")
    modes = None
    if "modes" in initial:
        raw = _expect_array(initial["modes"], f"{path}.modes")
        parsed = []
        for i, name in enumerate(raw):
            name = _expect_string(name, f"{path}.modes[{i}]")
            if name not in _INTENT_MODE_NAMES:
                raise _fail(
                    f"{path}.modes[{i}]",
                    f"expected one of {sorted(_INTENT_MODE_NAMES)}, got {name!r}",
                )
            parsed.append(_INTENT_MODE_NAMES[name])
        modes = tuple(parsed)
        if len(modes) != outlet_count:
            raise _fail(f"{path}.modes", f"expected {outlet_count} entries, got {len(modes)}")
    return coil_on, modes


def parse_scenario(text: str) -> ScenarioDoc:
    """Parse and fully validate a scenario document."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"invalid JSON: {exc}") from None
    doc = _expect_object(doc, "$")
    _expect_keys(
        doc,
        "$",
        required={"schema_version", "strip", "appliances", "events", "horizon_s"},
        optional={"buttons", "macros", "initial"},
    )
    version = _expect_int(doc["schema_version"], "$.schema_version")
    if version != SCHEMA_VERSION:
        raise _fail("$.schema_version", f"this tool reads version {SCHEMA_VERSION}, got {version}")

    strip = _expect_object(doc["strip"], "$.strip")
    _expect_keys(strip, "$.strip", required={"outlet_count"}, optional={"relay_coil_watts"})
    outlet_count = _expect_int(strip["outlet_count"], "$.strip.outlet_count", minimum=1)
    coil_watts = _expect_number(
        strip.get("relay_coil_watts", 0.0), "$.strip.relay_coil_watts", minimum=0.0
    )

    profiles = _parse_appliances(doc["appliances"], outlet_count, "$.appliances")
    macros = _parse_macros(doc.get("macros", []), outlet_count, "$.macros")
    if "buttons" in doc:
        button_map = _parse_buttons(doc["buttons"], outlet_count, macros, "$.buttons")
    elif outlet_count > 254:
        raise _fail(
            "$.strip.outlet_count",
            "the default button map covers at most 254 outlets; "
            "supply an explicit buttons section",
        )
    else:
        button_map = default_button_map(outlet_count)
    events = _parse_events(doc["events"], outlet_count, "$.events")
    horizon_s = _expect_int(doc["horizon_s"], "$.horizon_s", minimum=0)

    coil_on = modes = None
    if "initial" in doc:
        coil_on, modes = _parse_initial(doc["initial"], outlet_count, "$.initial")

    try:
        config = SimConfig(
            outlet_count=outlet_count,
            profiles=profiles,
            button_map=button_map,
            macros=macros,
            events=events,
            horizon_s=horizon_s,
            relay_coil_watts=coil_watts,
            initial_coil_on=coil_on,
            initial_modes=modes,
        )
    except ValueError as exc:
        raise ScenarioError(f"$.events: {exc}") from None
    sha = hashlib.sha256(text.encode("utf-8")).hexdigest()
    return ScenarioDoc(schema_version=version, config=config, source_sha256=sha)


def load_scenario(path: str) -> ScenarioDoc:
    with open(path, "r", encoding="utf-8") as handle:
        return parse_scenario(handle.read())


# --- report emission ---------------------------------------------------------


def _round_wh(value: Optional[float]) -> Optional[float]:
    return None if value is None else round(value, 3)


def report_to_json(
    report: EnergyReport,
    scenario_sha256: Optional[str] = None,
    generated_at: Optional[str] = None,
) -> dict:
    """Serialize a report; watt-hour figures are rounded to 3 decimals."""
    if generated_at is None:
        generated_at = datetime.now(timezone.utc).isoformat(timespec="seconds")
    return {
        "schema_version": SCHEMA_VERSION,
        "meta": {
            "scenario_sha256": scenario_sha256,
            "tool_version": __version__,
            "generated_at": generated_at,
        },
        "horizon_s": report.horizon_s,
        "outlets": [
            {
                "name": outlet.name,
                "by_mode": {
                    mode.value: _round_wh(outlet.by_mode[mode]) for mode in PowerMode
                },
                "total_wh": _round_wh(outlet.total_wh),
            }
            for outlet in report.outlets
        ],
        "overhead_wh": _round_wh(report.overhead_wh),
        "total_wh": _round_wh(report.total_wh),
        "standby_wh": _round_wh(report.standby_wh),
        "standby_share": report.standby_share,
        "aggregate_passive_standby_w": report.aggregate_passive_standby_w,
        "within_typical_home_band": report.within_typical_home_band,
        "baseline_total_wh": _round_wh(report.baseline_total_wh),
        "savings_vs_baseline_wh": _round_wh(report.savings_vs_baseline_wh),
        "savings_share": report.savings_share,
    }


def dumps_report(
    report: EnergyReport,
    scenario_sha256: Optional[str] = None,
    generated_at: Optional[str] = None,
) -> str:
    return json.dumps(
        report_to_json(report, scenario_sha256, generated_at), indent=2
    ) + "\n"


# --- protocol parameter files ------------------------------------------------

_PARAM_FIELDS = {
    "leader_mark",
    "leader_space",
    "bit_mark",
    "zero_space",
    "one_space",
    "repeat_space",
    "frame_gap",
    "tolerance",
}


def params_from_json(text: str) -> ProtocolParams:
    """Read a pulse-timing override file; omitted fields keep their defaults."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"invalid JSON: {exc}") from None
    doc = _expect_object(doc, "$")
    _expect_keys(doc, "$", required=set(), optional=_PARAM_FIELDS)
    kwargs = {}
    for name in _PARAM_FIELDS & doc.keys():
        if name == "tolerance":
            kwargs[name] = _expect_number(doc[name], f"$.{name}")
        else:
            kwargs[name] = _expect_int(doc[name], f"$.{name}", minimum=1)
    try:
        return dataclasses.replace(DEFAULT_PARAMS, **kwargs)
    except ValueError as exc:
        raise ScenarioError(f"$: {exc}") from None
