"""Brute-force 1-second-grid energy integrator, used as a test oracle.

Independent of the package's event-driven ledger: it replays a scenario
onto per-second numpy wattage arrays (one row per outlet, one column per
second) and literally sums them. Event times must be whole seconds, which
the random-scenario generators guarantee, so the grid is exact.

Only the switching logic is borrowed from the package (it is oracle-checked
separately); everything about energy is recomputed from scratch here.
"""

import numpy as np

from phantomstrip.control import CommandEvent, ControlUnit, StripState
from phantomstrip.ircodec import DEFAULT_PARAMS, FrameKind, decode_train, encode_frame, encode_repeat
from phantomstrip.sim import PowerMode, RemotePress


def _decode_roundtrip(frame, protocol):
    if frame.kind is FrameKind.DATA:
        train = encode_frame(protocol, frame)
    else:
        train = encode_repeat(protocol)
    outcome = decode_train(protocol, train)
    assert len(outcome.frames) == 1 and not outcome.diagnostics
    return outcome.frames[0]


def integrate_wh(config, baseline=False):
    """Total energy in Wh: (per-outlet array, overhead) summed second by second."""
    n = config.outlet_count
    horizon = config.horizon_s
    watts = np.zeros((n, horizon), dtype=np.float64)
    coil_rows = np.zeros((n, horizon), dtype=np.float64)

    if baseline:
        coils = [True] * n
        events = [e for e in config.events if not isinstance(e.subject, RemotePress)]
    else:
        coils = list(config.initial_coil_on)
        events = list(config.events)

    unit = ControlUnit(StripState.live(coils), config.button_map, config.macros)
    intents = list(config.initial_modes)

    def draw(i):
        if not unit.state.coil[i]:
            return 0.0
        return config.profiles[i].watts[intents[i]]

    cursor = 0
    for event in events:
        t = event.time_s
        for i in range(n):
            watts[i, cursor:t] = draw(i)
            coil_rows[i, cursor:t] = 1.0 if unit.state.coil[i] else 0.0
        cursor = t
        if isinstance(event.subject, RemotePress):
            frame = _decode_roundtrip(event.subject.frame, config.protocol)
            unit.handle(CommandEvent(frame, t * 1_000_000))
        else:
            intents[event.subject.outlet] = event.subject.mode
    for i in range(n):
        watts[i, cursor:horizon] = draw(i)
        coil_rows[i, cursor:horizon] = 1.0 if unit.state.coil[i] else 0.0

    outlet_ws = float(watts.sum())  # watt-seconds on the 1 s grid
    overhead_ws = float(coil_rows.sum()) * config.relay_coil_watts
    return (outlet_ws + overhead_ws) / 3600.0


def standby_wh(config):
    """Standby-only energy (active + passive standby while powered), in Wh."""
    n = config.outlet_count
    horizon = config.horizon_s
    watts = np.zeros((n, horizon), dtype=np.float64)

    unit = ControlUnit(
        StripState.live(list(config.initial_coil_on)), config.button_map, config.macros
    )
    intents = list(config.initial_modes)
    standby = (PowerMode.ACTIVE_STANDBY, PowerMode.PASSIVE_STANDBY)

    def draw(i):
        if unit.state.coil[i] and intents[i] in standby:
            return config.profiles[i].watts[intents[i]]
        return 0.0

    cursor = 0
    for event in config.events:
        t = event.time_s
        for i in range(n):
            watts[i, cursor:t] = draw(i)
        cursor = t
        if isinstance(event.subject, RemotePress):
            frame = _decode_roundtrip(event.subject.frame, config.protocol)
            unit.handle(CommandEvent(frame, t * 1_000_000))
        else:
            intents[event.subject.outlet] = event.subject.mode
    for i in range(n):
        watts[i, cursor:horizon] = draw(i)

    return float(watts.sum()) / 3600.0
