"""Control-unit state machine.

Maps decoded IR frames to outlet actions: per-outlet toggles through the
numbered buttons, a master button that cuts every outlet and restores the
previous pattern on re-press, and user-programmed macros. All transitions
are pure functions over value types; ``ControlUnit`` is a thin stateful
wrapper for callers that process a command stream.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from typing import Iterable, Mapping, Optional, Sequence, Tuple

from phantomstrip.ircodec import FrameKind, IrFrame

MAX_MACRO_ACTIONS = 32

#: A repeat burst arriving within this window of the previous frame is part
#: of a held button. Held buttons never re-fire their action: every action
#: kind here is a press-edge toggle and auto-repeat would oscillate outlets.
REPEAT_CHAIN_WINDOW_US = 200_000


class UnknownMacroError(LookupError):
    """Raised when a RunMacro action names a macro id that is not programmed."""


@dataclass(frozen=True)
class ToggleOutlet:
    outlet: int

    def __post_init__(self) -> None:
        if self.outlet < 0:
            raise ValueError("outlet index must be non-negative")


@dataclass(frozen=True)
class MasterToggle:
    pass


@dataclass(frozen=True)
class RunMacro:
    macro_id: int


@dataclass(frozen=True)
class NoOp:
    pass


Action = object  # ToggleOutlet | MasterToggle | RunMacro | NoOp


@dataclass(frozen=True)
class OutletTransition:
    """One relay coil change: outlet index, old and new coil state, time."""

    outlet: int
    was_on: bool
    now_on: bool
    timestamp_us: int


@dataclass(frozen=True)
class CommandEvent:
    frame: IrFrame
    timestamp_us: int


class ButtonMap:
    """Total mapping from (address, command) codes to actions.

    Unmapped codes read as NoOp; explicit NoOp entries are dropped so the
    entry count reflects only meaningful bindings.
    """

    def __init__(self, entries: Optional[Mapping[Tuple[int, int], Action]] = None):
        self._entries: dict = {}
        for (address, command), action in (entries or {}).items():
            for part in (address, command):
                if not isinstance(part, int) or isinstance(part, bool) or not 0 <= part <= 0xFF:
                    raise ValueError(
                        f"button code ({address}, {command}) out of the 0..255 range"
                    )
            if isinstance(action, NoOp):
                continue
            if not isinstance(action, (ToggleOutlet, MasterToggle, RunMacro)):
                raise ValueError(f"{action!r} is not an action")
            self._entries[(address, command)] = action

    def action_for(self, address: int, command: int) -> Action:
        return self._entries.get((address, command), NoOp())

    def entries(self) -> dict:
        return dict(self._entries)

    def __len__(self) -> int:
        return len(self._entries)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, ButtonMap) and self._entries == other._entries

    def __repr__(self) -> str:
        return f"ButtonMap({self._entries!r})"


class MacroTable:
    """Programmed macros: id -> ordered ToggleOutlet/MasterToggle actions.

    Bodies never nest other macros and are capped at MAX_MACRO_ACTIONS, so
    macro execution is trivially bounded.
    """

    def __init__(self, macros: Optional[Mapping[int, Sequence[Action]]] = None):
        self._macros: dict = {}
        for macro_id, body in (macros or {}).items():
            self._macros[int(macro_id)] = _validated_body(body)

    def body(self, macro_id: int) -> tuple:
        try:
            return self._macros[macro_id]
        except KeyError:
            raise UnknownMacroError(f"macro {macro_id} is not programmed") from None

    def __contains__(self, macro_id: int) -> bool:
        return macro_id in self._macros

    def items(self):
        return self._macros.items()

    def __len__(self) -> int:
        return len(self._macros)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, MacroTable) and self._macros == other._macros

    def __repr__(self) -> str:
        return f"MacroTable({self._macros!r})"


def _validated_body(body: Sequence[Action]) -> tuple:
    body = tuple(body)
    if len(body) > MAX_MACRO_ACTIONS:
        raise ValueError(
            f"macro body exceeds {MAX_MACRO_ACTIONS} actions ({len(body)})"
        )
    for action in body:
        if isinstance(action, RunMacro):
            raise ValueError("macros must not invoke other macros")
        if not isinstance(action, (ToggleOutlet, MasterToggle)):
            raise ValueError(
                f"macro bodies may only contain outlet toggles and the master "
                f"toggle, got {action!r}"
            )
    return body


def program_macro(macros: MacroTable, macro_id: int, body: Sequence[Action]) -> MacroTable:
    """Return a table with ``macro_id`` bound to ``body`` (replacing any binding)."""
    updated = dict(macros.items())
    updated[int(macro_id)] = _validated_body(body)
    return MacroTable(updated)


@dataclass(frozen=True)
class StripState:
    """Relay coil states plus the master cut-off.

    Two invariants keep master semantics an involution:
    master off forces every coil low, and while the strip is live the
    snapshot mirrors the coils (it only diverges while the master holds
    the pre-shutdown pattern).
    """

    coil: tuple
    master_off: bool
    snapshot: tuple

    def __post_init__(self) -> None:
        if len(self.coil) < 1:
            raise ValueError("a strip has at least one outlet")
        if len(self.coil) != len(self.snapshot):
            raise ValueError("coil and snapshot lengths differ")
        if self.master_off and any(self.coil):
            raise ValueError("master off requires every coil to be de-energized")
        if not self.master_off and self.coil != self.snapshot:
            raise ValueError("while live, the snapshot must mirror the coils")

    @property
    def outlet_count(self) -> int:
        return len(self.coil)

    @classmethod
    def all_off(cls, outlet_count: int) -> "StripState":
        coils = (False,) * outlet_count
        return cls(coil=coils, master_off=False, snapshot=coils)

    @classmethod
    def live(cls, coils: Iterable[bool]) -> "StripState":
        coils = tuple(bool(c) for c in coils)
        return cls(coil=coils, master_off=False, snapshot=coils)

    @classmethod
    def shut(cls, snapshot: Iterable[bool]) -> "StripState":
        snapshot = tuple(bool(c) for c in snapshot)
        return cls(coil=(False,) * len(snapshot), master_off=True, snapshot=snapshot)


def default_button_map(outlet_count: int) -> ButtonMap:
    """The factory mapping: commands 1..n toggle outlets 0..n-1, command 0
    is the master button, everything else is unmapped. All at address 0.

    For a three-outlet strip this is exactly four bindings: one per
    appliance plus the full shutdown.
    """
    if not 1 <= outlet_count <= 254:
        raise ValueError("outlet_count must lie in 1..254")
    entries: dict = {(0, 0): MasterToggle()}
    for k in range(1, outlet_count + 1):
        entries[(0, k)] = ToggleOutlet(k - 1)
    return ButtonMap(entries)


def apply_action(
    state: StripState,
    macros: MacroTable,
    action: Action,
    timestamp_us: int,
):
    """Apply one action; returns (new state, coil transitions in order)."""
    if isinstance(action, NoOp):
        return state, []

    if isinstance(action, MasterToggle):
        return _master_toggle(state, timestamp_us)

    if isinstance(action, ToggleOutlet):
        if action.outlet >= state.outlet_count:
            raise ValueError(
                f"outlet {action.outlet} out of range for a "
                f"{state.outlet_count}-outlet strip"
            )
        transitions = []
        if state.master_off:
            # Any outlet press means the user wants the strip live again:
            # restore the snapshot first, then toggle.
            state, transitions = _master_toggle(state, timestamp_us)
        old = state.coil[action.outlet]
        coils = list(state.coil)
        coils[action.outlet] = not old
        new_coils = tuple(coils)
        transitions.append(
            OutletTransition(action.outlet, old, not old, timestamp_us)
        )
        return StripState(new_coils, False, new_coils), transitions

    if isinstance(action, RunMacro):
        body = macros.body(action.macro_id)
        transitions = []
        for step in body:
            state, step_transitions = apply_action(state, macros, step, timestamp_us)
            transitions.extend(step_transitions)
        return state, transitions

    raise TypeError(f"unknown action {action!r}")


def _master_toggle(state: StripState, timestamp_us: int):
    if state.master_off:
        restored = state.snapshot
        transitions = [
            OutletTransition(i, False, True, timestamp_us)
            for i, on in enumerate(restored)
            if on
        ]
        return StripState(restored, False, restored), transitions
    transitions = [
        OutletTransition(i, True, False, timestamp_us)
        for i, on in enumerate(state.coil)
        if on
    ]
    off = (False,) * state.outlet_count
    return StripState(off, True, state.coil), transitions


@dataclass(frozen=True)
class RepeatContext:
    """What the last frame was, for resolving held-button repeat bursts."""

    last_data_frame: IrFrame
    last_frame_at_us: int


@dataclass(frozen=True)
class CommandResult:
    state: StripState
    transitions: tuple
    action: Action
    context: Optional[RepeatContext]


def apply_command(
    state: StripState,
    button_map: ButtonMap,
    macros: MacroTable,
    event: CommandEvent,
    context: Optional[RepeatContext] = None,
) -> CommandResult:
    """Apply one decoded frame.

    Data frames fire their mapped action. A repeat burst chained within
    REPEAT_CHAIN_WINDOW_US of the previous frame resolves to the held
    button's action but applies nothing; an orphan repeat is a NoOp.
    """
    frame = event.frame
    if frame.kind is FrameKind.DATA:
        action = button_map.action_for(frame.address, frame.command)
        new_state, transitions = apply_action(state, macros, action, event.timestamp_us)
        return CommandResult(
            new_state,
            tuple(transitions),
            action,
            RepeatContext(frame, event.timestamp_us),
        )

    # Repeat burst.
    if (
        context is not None
        and event.timestamp_us - context.last_frame_at_us <= REPEAT_CHAIN_WINDOW_US
    ):
        held = context.last_data_frame
        action = button_map.action_for(held.address, held.command)
        refreshed = replace(context, last_frame_at_us=event.timestamp_us)
        return CommandResult(state, (), action, refreshed)
    return CommandResult(state, (), NoOp(), None)


class ControlUnit:
    """Stateful wrapper threading StripState and the repeat context.

    Callers must serialize handle() invocations (single logical writer).
    """

    def __init__(
        self,
        state: StripState,
        button_map: ButtonMap,
        macros: MacroTable,
    ):
        self.state = state
        self.button_map = button_map
        self.macros = macros
        self._context: Optional[RepeatContext] = None

    def handle(self, event: CommandEvent) -> CommandResult:
        result = apply_command(
            self.state, self.button_map, self.macros, event, self._context
        )
        self.state = result.state
        self._context = result.context
        return result

    def press(self, action: Action, timestamp_us: int) -> tuple:
        """Apply an action directly (a front-panel press, no IR involved)."""
        new_state, transitions = apply_action(
            self.state, self.macros, action, timestamp_us
        )
        self.state = new_state
        return tuple(transitions)


# --- persistence -----------------------------------------------------------

def action_to_json(action: Action) -> dict:
    if isinstance(action, ToggleOutlet):
        return {"type": "toggle", "outlet": action.outlet}
    if isinstance(action, MasterToggle):
        return {"type": "master"}
    if isinstance(action, RunMacro):
        return {"type": "macro", "id": action.macro_id}
    raise ValueError(f"action {action!r} has no persistent form")


def action_from_json(doc: object) -> Action:
    if not isinstance(doc, dict):
        raise ValueError("action must be an object")
    kind = doc.get("type")
    if kind == "toggle":
        _require_keys(doc, {"type", "outlet"})
        outlet = doc["outlet"]
        if not isinstance(outlet, int) or isinstance(outlet, bool) or outlet < 0:
            raise ValueError("toggle action needs a non-negative integer outlet")
        return ToggleOutlet(outlet)
    if kind == "master":
        _require_keys(doc, {"type"})
        return MasterToggle()
    if kind == "macro":
        _require_keys(doc, {"type", "id"})
        macro_id = doc["id"]
        if not isinstance(macro_id, int) or isinstance(macro_id, bool):
            raise ValueError("macro action needs an integer id")
        return RunMacro(macro_id)
    raise ValueError(f"unknown action type {kind!r}")


def _require_keys(doc: dict, expected: set) -> None:
    extra = set(doc) - expected
    if extra:
        raise ValueError(f"unknown keys {sorted(extra)}")
    missing = expected - set(doc)
    if missing:
        raise ValueError(f"missing keys {sorted(missing)}")


def control_config_to_json(
    outlet_count: int, button_map: ButtonMap, macros: MacroTable
) -> dict:
    return {
        "outlet_count": outlet_count,
        "buttons": [
            {"address": address, "command": command, "action": action_to_json(action)}
            for (address, command), action in sorted(button_map.entries().items())
        ],
        "macros": [
            {"id": macro_id, "body": [action_to_json(a) for a in body]}
            for macro_id, body in sorted(macros.items())
        ],
    }


def control_config_from_json(doc: dict):
    """Parse the persistence document; returns (outlet_count, ButtonMap, MacroTable)."""
    if not isinstance(doc, dict):
        raise ValueError("control config must be an object")
    _require_keys(doc, {"outlet_count", "buttons", "macros"})
    outlet_count = doc.get("outlet_count")
    if not isinstance(outlet_count, int) or isinstance(outlet_count, bool) or outlet_count < 1:
        raise ValueError("outlet_count must be a positive integer")
    buttons_doc = doc.get("buttons", [])
    macros_doc = doc.get("macros", [])
    if not isinstance(buttons_doc, list):
        raise ValueError("buttons must be an array")
    if not isinstance(macros_doc, list):
        raise ValueError("macros must be an array")
    entries = {}
    for i, entry in enumerate(buttons_doc):
        if not isinstance(entry, dict):
            raise ValueError(f"buttons[{i}] must be an object")
        _require_keys(entry, {"address", "command", "action"})
        try:
            address, command = entry["address"], entry["command"]
        except KeyError as missing:
            raise ValueError(f"buttons[{i}] is missing {missing}") from None
        key = (address, command)
        if key in entries:
            raise ValueError(f"buttons[{i}] duplicates code {key}")
        entries[key] = action_from_json(entry.get("action"))
    macros = {}
    for i, entry in enumerate(macros_doc):
        if not isinstance(entry, dict):
            raise ValueError(f"macros[{i}] must be an object")
        _require_keys(entry, {"id", "body"})
        macro_id = entry.get("id")
        if not isinstance(macro_id, int) or isinstance(macro_id, bool):
            raise ValueError(f"macros[{i}].id must be an integer")
        if macro_id in macros:
            raise ValueError(f"macros[{i}] duplicates id {macro_id}")
        body = entry.get("body")
        if not isinstance(body, list):
            raise ValueError(f"macros[{i}].body must be an array")
        macros[macro_id] = [action_from_json(a) for a in body]
    return outlet_count, ButtonMap(entries), MacroTable(macros)


def dumps_control_config(outlet_count: int, button_map: ButtonMap, macros: MacroTable) -> str:
    return json.dumps(
        control_config_to_json(outlet_count, button_map, macros), indent=2
    )
