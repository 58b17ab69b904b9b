"""Discrete-event household energy simulator.

Appliances are piecewise-constant loads: each one sits in exactly one of
four modes (operational, active standby, passive standby, off) and draws a
fixed wattage per mode. Off is never an intent — it is what happens when
the strip's relay cuts the outlet, and it always draws zero.

Energy accumulates in exact integer microwatt-microseconds so interval
splitting, replay, and live/batch comparisons are bit-identical; watt-hours
are derived only at report time.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from enum import Enum
from typing import List, Mapping, Optional, Sequence, Tuple

from phantomstrip import control as _control
from phantomstrip import ircodec as _ircodec
from phantomstrip import relay as _relay
from phantomstrip.control import ButtonMap, CommandEvent, MacroTable, StripState
from phantomstrip.ircodec import FrameKind, IrFrame, ProtocolParams

US_PER_S = 1_000_000
_UWUS_PER_WH = 3.6e15  # microwatt-microseconds in one watt-hour

#: Per-appliance passive-standby draw seen in practice; anything outside
#: raises StandbyRangeWarning at profile construction.
TYPICAL_STANDBY_RANGE_W = (0.5, 30.0)

#: Whole-home aggregate standby band; reports flag scenarios inside it.
TYPICAL_HOME_STANDBY_BAND_W = (20.0, 60.0)


class StandbyRangeWarning(UserWarning):
    """Passive-standby wattage outside the typical per-appliance range."""


class ZeroTotalError(ValueError):
    """Standby share is undefined when no energy was consumed at all."""


class PowerMode(Enum):
    OPERATIONAL = "operational"
    ACTIVE_STANDBY = "active_standby"
    PASSIVE_STANDBY = "passive_standby"
    OFF = "off"


_MODE_ORDER = (
    PowerMode.OPERATIONAL,
    PowerMode.ACTIVE_STANDBY,
    PowerMode.PASSIVE_STANDBY,
    PowerMode.OFF,
)
_MODE_INDEX = {mode: i for i, mode in enumerate(_MODE_ORDER)}
_STANDBY_MODES = (PowerMode.ACTIVE_STANDBY, PowerMode.PASSIVE_STANDBY)


def _microwatts(watts: float) -> int:
    return round(watts * US_PER_S)


@dataclass(frozen=True)
class ApplianceProfile:
    """Per-mode wattage model for one appliance.

    Off always draws nothing, and draw is monotone across the remaining
    modes: operational >= active standby >= passive standby >= 0.
    """

    name: str
    watts: Mapping

    def __post_init__(self) -> None:
        table = dict(self.watts)
        for mode in (PowerMode.OPERATIONAL, PowerMode.ACTIVE_STANDBY, PowerMode.PASSIVE_STANDBY):
            if mode not in table:
                raise ValueError(f"profile {self.name!r} is missing watts[{mode.value}]")
        table.setdefault(PowerMode.OFF, 0.0)
        if table[PowerMode.OFF] != 0:
            raise ValueError(
                f"profile {self.name!r}: off means disconnected and must draw 0 W"
            )
        if table[PowerMode.PASSIVE_STANDBY] < 0:
            raise ValueError(f"profile {self.name!r}: wattages must be non-negative")
        if not (
            table[PowerMode.OPERATIONAL]
            >= table[PowerMode.ACTIVE_STANDBY]
            >= table[PowerMode.PASSIVE_STANDBY]
        ):
            raise ValueError(
                f"profile {self.name!r}: wattages must be ordered "
                "operational >= active_standby >= passive_standby"
            )
        lo, hi = TYPICAL_STANDBY_RANGE_W
        ps = table[PowerMode.PASSIVE_STANDBY]
        if not lo <= ps <= hi:
            warnings.warn(
                f"profile {self.name!r}: passive standby draw {ps} W is outside "
                f"the typical {lo}-{hi} W range",
                StandbyRangeWarning,
                stacklevel=2,
            )
        object.__setattr__(self, "watts", table)

    @classmethod
    def rated(
        cls,
        name: str,
        operational: float,
        active_standby: float,
        passive_standby: float,
    ) -> "ApplianceProfile":
        return cls(
            name,
            {
                PowerMode.OPERATIONAL: operational,
                PowerMode.ACTIVE_STANDBY: active_standby,
                PowerMode.PASSIVE_STANDBY: passive_standby,
                PowerMode.OFF: 0.0,
            },
        )

    def draw(self, mode: PowerMode) -> float:
        return self.watts[mode]


@dataclass(frozen=True)
class ApplianceIntent:
    """The user's intent for one appliance; off is never an intent."""

    outlet: int
    mode: PowerMode

    def __post_init__(self) -> None:
        if self.outlet < 0:
            raise ValueError("outlet index must be non-negative")
        if self.mode is PowerMode.OFF:
            raise ValueError(
                "off is not an intent; it is the consequence of cutting power"
            )


@dataclass(frozen=True)
class RemotePress:
    frame: IrFrame


@dataclass(frozen=True)
class ScheduleEvent:
    time_s: int
    subject: object  # ApplianceIntent | RemotePress

    def __post_init__(self) -> None:
        if not isinstance(self.time_s, int) or isinstance(self.time_s, bool) or self.time_s < 0:
            raise ValueError("event time must be a non-negative integer second count")
        if not isinstance(self.subject, (ApplianceIntent, RemotePress)):
            raise ValueError(f"unknown event subject {self.subject!r}")


@dataclass(frozen=True)
class SimConfig:
    """Everything one simulation run needs.

    Events must arrive time-sorted; same-time events are normalized so
    remote presses apply before intent changes, preserving input order
    within each kind.
    """

    outlet_count: int
    profiles: Tuple[ApplianceProfile, ...]
    button_map: ButtonMap
    macros: MacroTable
    events: Tuple[ScheduleEvent, ...]
    horizon_s: int
    relay_coil_watts: float = 0.0
    initial_coil_on: Optional[Tuple[bool, ...]] = None
    initial_modes: Optional[Tuple[PowerMode, ...]] = None
    protocol: ProtocolParams = _ircodec.DEFAULT_PARAMS

    def __post_init__(self) -> None:
        if self.outlet_count < 1:
            raise ValueError("a strip has at least one outlet")
        if len(self.profiles) != self.outlet_count:
            raise ValueError("need exactly one appliance profile per outlet")
        if not isinstance(self.horizon_s, int) or self.horizon_s < 0:
            raise ValueError("horizon must be a non-negative integer second count")
        if self.relay_coil_watts < 0:
            raise ValueError("relay coil draw cannot be negative")

        events = tuple(self.events)
        previous = 0
        for event in events:
            if event.time_s < previous:
                raise ValueError("events out of order (times must be non-decreasing)")
            previous = event.time_s
            if event.time_s > self.horizon_s:
                raise ValueError(
                    f"event at t={event.time_s}s lies beyond the {self.horizon_s}s horizon"
                )
            subject = event.subject
            if isinstance(subject, ApplianceIntent) and subject.outlet >= self.outlet_count:
                raise ValueError(
                    f"intent event addresses outlet {subject.outlet} of a "
                    f"{self.outlet_count}-outlet strip"
                )
        # Same-time presses land before intent changes, deterministically.
        normalized = tuple(
            sorted(
                events,
                key=lambda e: (e.time_s, 0 if isinstance(e.subject, RemotePress) else 1),
            )
        )
        object.__setattr__(self, "events", normalized)

        coils = self.initial_coil_on
        coils = (True,) * self.outlet_count if coils is None else tuple(bool(c) for c in coils)
        if len(coils) != self.outlet_count:
            raise ValueError("initial_coil_on length must equal outlet_count")
        object.__setattr__(self, "initial_coil_on", coils)

        modes = self.initial_modes
        modes = (
            (PowerMode.PASSIVE_STANDBY,) * self.outlet_count
            if modes is None
            else tuple(modes)
        )
        if len(modes) != self.outlet_count:
            raise ValueError("initial_modes length must equal outlet_count")
        if any(m is PowerMode.OFF for m in modes):
            raise ValueError("off is not an intent; initial modes must be live modes")
        object.__setattr__(self, "initial_modes", modes)


def effective_draw(profile: ApplianceProfile, intent: PowerMode, powered: bool) -> float:
    """Watts actually drawn: the intended mode's rating, or nothing when cut."""
    if intent is PowerMode.OFF:
        raise ValueError("off is not an intent; it is the consequence of cutting power")
    if powered:
        return profile.watts[intent]
    return profile.watts[PowerMode.OFF]


class EnergyLedger:
    """Exact per-outlet, per-mode energy accumulators.

    Internally integer microwatt-microseconds; converted to watt-hours
    only when read. Accumulators never decrease.
    """

    def __init__(self, outlet_count: int):
        if outlet_count < 1:
            raise ValueError("a strip has at least one outlet")
        self._cells: List[List[int]] = [[0] * len(_MODE_ORDER) for _ in range(outlet_count)]
        self._overhead: int = 0
        self.time_us: int = 0

    @property
    def outlet_count(self) -> int:
        return len(self._cells)

    def energy_wh(self, outlet: int, mode: PowerMode) -> float:
        return self._cells[outlet][_MODE_INDEX[mode]] / _UWUS_PER_WH

    def outlet_mode_table(self, outlet: int) -> dict:
        return {mode: self.energy_wh(outlet, mode) for mode in _MODE_ORDER}

    @property
    def overhead_wh(self) -> float:
        return self._overhead / _UWUS_PER_WH

    def raw_cells(self) -> list:
        """Integer accumulators (copy), for exact comparisons in tests."""
        return [list(row) for row in self._cells]

    @property
    def raw_overhead(self) -> int:
        return self._overhead


def integrate_interval(
    ledger: EnergyLedger,
    strip: StripState,
    intents: Sequence[PowerMode],
    profiles: Sequence[ApplianceProfile],
    dt_us: int,
    coil_watts: float = 0.0,
) -> EnergyLedger:
    """Accrue one piecewise-constant interval onto the ledger.

    ``dt_us`` is an integer microsecond count; power is held constant over
    the interval, so splitting it anywhere yields identical accumulators.
    """
    if not isinstance(dt_us, int) or isinstance(dt_us, bool):
        raise ValueError("dt_us must be an integer microsecond count")
    if dt_us < 0:
        raise ValueError("cannot integrate a negative interval")
    if dt_us == 0:
        return ledger
    if len(intents) != strip.outlet_count or len(profiles) != strip.outlet_count:
        raise ValueError("intents and profiles must match the strip's outlet count")

    energized = 0
    for outlet in range(strip.outlet_count):
        coil = strip.coil[outlet]
        powered = _relay.outlet_powered(_relay.RelayState(coil))
        if coil:
            energized += 1
        draw_w = effective_draw(profiles[outlet], intents[outlet], powered)
        mode = intents[outlet] if powered else PowerMode.OFF
        ledger._cells[outlet][_MODE_INDEX[mode]] += _microwatts(draw_w) * dt_us
    ledger._overhead += _microwatts(coil_watts) * energized * dt_us
    ledger.time_us += dt_us
    return ledger


@dataclass(frozen=True)
class OutletEnergy:
    name: str
    by_mode: Mapping
    total_wh: float


@dataclass(frozen=True)
class EnergyReport:
    """Integrated energy for one run, plus the savings the strip achieved.

    ``standby_share`` and the savings fields are None when their
    denominator run consumed nothing at all.
    """

    outlets: Tuple[OutletEnergy, ...]
    overhead_wh: float
    total_wh: float
    standby_wh: float
    standby_share: Optional[float]
    aggregate_passive_standby_w: float
    within_typical_home_band: bool
    horizon_s: int
    baseline_total_wh: Optional[float] = None
    savings_vs_baseline_wh: Optional[float] = None
    savings_share: Optional[float] = None


def standby_share(report: EnergyReport) -> float:
    """Fraction of total energy spent in active+passive standby."""
    if report.total_wh <= 0:
        raise ZeroTotalError("standby share is undefined for a zero-energy run")
    return report.standby_wh / report.total_wh


def _simulate(config: SimConfig, baseline: bool) -> EnergyLedger:
    """Run the event loop; ``baseline`` forces every coil on and drops presses."""
    if baseline:
        coils = (True,) * config.outlet_count
        events = tuple(
            e for e in config.events if not isinstance(e.subject, RemotePress)
        )
    else:
        coils = config.initial_coil_on
        events = config.events

    unit = _control.ControlUnit(
        StripState.live(coils), config.button_map, config.macros
    )
    intents = list(config.initial_modes)
    ledger = EnergyLedger(config.outlet_count)

    now_us = 0
    for event in events:
        event_us = event.time_s * US_PER_S
        integrate_interval(
            ledger, unit.state, intents, config.profiles,
            event_us - now_us, config.relay_coil_watts,
        )
        now_us = event_us
        subject = event.subject
        if isinstance(subject, RemotePress):
            _press(unit, subject.frame, event_us, config.protocol)
        else:
            intents[subject.outlet] = subject.mode
    integrate_interval(
        ledger, unit.state, intents, config.profiles,
        config.horizon_s * US_PER_S - now_us, config.relay_coil_watts,
    )
    return ledger


def _press(
    unit: _control.ControlUnit,
    frame: IrFrame,
    timestamp_us: int,
    protocol: ProtocolParams,
) -> None:
    # The full signal path: the remote's burst is modulated and decoded
    # before the control unit ever sees a command.
    if frame.kind is FrameKind.DATA:
        train = _ircodec.encode_frame(protocol, frame)
    else:
        train = _ircodec.encode_repeat(protocol)
    outcome = _ircodec.decode_train(protocol, train)
    if len(outcome.frames) != 1 or outcome.diagnostics:
        raise RuntimeError("internal codec round-trip failed for a scheduled press")
    unit.handle(CommandEvent(outcome.frames[0], timestamp_us))


def build_report(
    profiles: Sequence[ApplianceProfile],
    horizon_s: int,
    ledger: EnergyLedger,
    baseline_ledger: Optional[EnergyLedger] = None,
) -> EnergyReport:
    """Summarize a ledger (and optionally its baseline twin) into a report."""
    outlets = []
    for i, profile in enumerate(profiles):
        by_mode = ledger.outlet_mode_table(i)
        outlets.append(
            OutletEnergy(
                name=profile.name,
                by_mode=by_mode,
                total_wh=sum(by_mode.values()),
            )
        )
    overhead_wh = ledger.overhead_wh
    total_wh = sum(o.total_wh for o in outlets) + overhead_wh
    standby_wh = sum(o.by_mode[m] for o in outlets for m in _STANDBY_MODES)
    share = standby_wh / total_wh if total_wh > 0 else None

    aggregate_ps = sum(p.watts[PowerMode.PASSIVE_STANDBY] for p in profiles)
    lo, hi = TYPICAL_HOME_STANDBY_BAND_W

    baseline_total = None
    savings = None
    savings_share = None
    if baseline_ledger is not None:
        baseline_outlet_total = sum(
            sum(baseline_ledger.outlet_mode_table(i).values())
            for i in range(len(profiles))
        )
        baseline_total = baseline_outlet_total + baseline_ledger.overhead_wh
        savings = baseline_total - total_wh
        savings_share = savings / baseline_total if baseline_total > 0 else None

    return EnergyReport(
        outlets=tuple(outlets),
        overhead_wh=overhead_wh,
        total_wh=total_wh,
        standby_wh=standby_wh,
        standby_share=share,
        aggregate_passive_standby_w=aggregate_ps,
        within_typical_home_band=lo <= aggregate_ps <= hi,
        horizon_s=horizon_s,
        baseline_total_wh=baseline_total,
        savings_vs_baseline_wh=savings,
        savings_share=savings_share,
    )


def run_scenario(config: SimConfig) -> EnergyReport:
    """Simulate the scenario and report energy, standby share, and savings
    against the always-plugged baseline."""
    ledger = _simulate(config, baseline=False)
    baseline_ledger = _simulate(config, baseline=True)
    return build_report(config.profiles, config.horizon_s, ledger, baseline_ledger)


def savings_vs_baseline(config: SimConfig):
    """Run both the automated scenario and its always-plugged baseline.

    Returns (baseline report, automated report); the automated report's
    savings fields are filled from the pair.
    """
    automated = run_scenario(config)
    baseline_ledger = _simulate(config, baseline=True)
    baseline = build_report(config.profiles, config.horizon_s, baseline_ledger)
    return baseline, automated
