"""Random scenario generator shared by the simulator and acceptance tests.

Event times land on whole seconds so the 1-second brute-force oracle grid
is exact. Passive-standby draws stay inside 0.5-30 W so generation never
trips range warnings.
"""

import random

from phantomstrip.control import ButtonMap, MacroTable, MasterToggle, RunMacro, ToggleOutlet, default_button_map
from phantomstrip.ircodec import IrFrame
from phantomstrip.sim import (
    ApplianceIntent,
    ApplianceProfile,
    PowerMode,
    RemotePress,
    ScheduleEvent,
    SimConfig,
)

LIVE_MODES = (PowerMode.OPERATIONAL, PowerMode.ACTIVE_STANDBY, PowerMode.PASSIVE_STANDBY)


def random_profile(rng: random.Random, name: str) -> ApplianceProfile:
    ps = round(rng.uniform(0.5, 30.0), 1)
    active = round(rng.uniform(ps, ps + 50.0), 1)
    operational = round(rng.uniform(active, 2500.0), 1)
    return ApplianceProfile.rated(name, operational, active, ps)


def random_config(
    rng: random.Random,
    max_outlets: int = 8,
    max_events: int = 100,
    max_horizon_s: int = 72 * 3600,
    operational_intents: bool = True,
) -> SimConfig:
    n = rng.randint(1, max_outlets)
    profiles = tuple(random_profile(rng, f"appliance {i}") for i in range(n))
    horizon = rng.randint(60, max_horizon_s)

    button_map = default_button_map(n)
    macros = MacroTable()
    if rng.random() < 0.4:
        body = [
            rng.choice([ToggleOutlet(rng.randrange(n)), MasterToggle()])
            for _ in range(rng.randint(1, 5))
        ]
        macros = MacroTable({0: body})
        entries = dict(button_map.entries())
        entries[(0, 200)] = RunMacro(0)
        button_map = ButtonMap(entries)

    modes = LIVE_MODES if operational_intents else LIVE_MODES[1:]
    events = []
    for t in sorted(rng.randint(0, horizon) for _ in range(rng.randint(0, max_events))):
        if rng.random() < 0.5:
            events.append(
                ScheduleEvent(t, ApplianceIntent(rng.randrange(n), rng.choice(modes)))
            )
        else:
            roll = rng.random()
            if roll < 0.15:
                frame = IrFrame.repeat()
            elif roll < 0.8:
                # mostly mapped buttons: master, outlets, sometimes the macro
                frame = IrFrame.data(0, rng.randint(0, n if not macros else 200))
            else:
                frame = IrFrame.data(rng.randint(0, 255), rng.randint(0, 255))
            events.append(ScheduleEvent(t, RemotePress(frame)))

    return SimConfig(
        outlet_count=n,
        profiles=profiles,
        button_map=button_map,
        macros=macros,
        events=tuple(events),
        horizon_s=horizon,
        relay_coil_watts=rng.choice([0.0, 0.0, 0.25, 0.5, 1.0]),
        initial_coil_on=tuple(rng.random() < 0.7 for _ in range(n)),
        initial_modes=tuple(rng.choice(modes) for _ in range(n)),
    )
