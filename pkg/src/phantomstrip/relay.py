"""Relay contact model.

A relay is a two-position switch: the moving COM contact rests on NC while
the coil is off and snaps to NO while the coil is energized. The strip
wires NO to the mains and COM to the appliance, so an idle coil physically
cuts the outlet — the fail-safe that eliminates standby draw.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum


class ContactTerminal(Enum):
    COM = "COM"
    NC = "NC"
    NO = "NO"


@dataclass(frozen=True)
class RelayState:
    coil_energized: bool


@dataclass(frozen=True)
class WiringPlan:
    """Which terminal feeds from the mains and which feeds the appliance.

    The appliance always hangs off COM (the moving contact); the mains may
    land on NO (cut when idle, the strip's wiring) or NC (live when idle).
    """

    mains_terminal: ContactTerminal
    appliance_terminal: ContactTerminal = ContactTerminal.COM

    def __post_init__(self) -> None:
        if self.appliance_terminal is not ContactTerminal.COM:
            raise ValueError("the appliance must connect to COM")
        if self.mains_terminal is self.appliance_terminal:
            raise ValueError("mains and appliance cannot share a terminal")


#: NO to mains, COM to appliance: outlets are dead unless their coil is driven.
DEFAULT_WIRING = WiringPlan(mains_terminal=ContactTerminal.NO)


def contact_closed(relay: RelayState, a: ContactTerminal, b: ContactTerminal) -> bool:
    """True iff terminals ``a`` and ``b`` are electrically connected."""
    if a is b:
        raise ValueError("a contact pair needs two distinct terminals")
    pair = {a, b}
    if pair == {ContactTerminal.COM, ContactTerminal.NO}:
        return relay.coil_energized
    if pair == {ContactTerminal.COM, ContactTerminal.NC}:
        return not relay.coil_energized
    # NC-NO: the moving contact can only ever bridge one of them to COM.
    return False


def outlet_powered(relay: RelayState, wiring: WiringPlan = DEFAULT_WIRING) -> bool:
    """True iff mains current can reach the appliance through this relay."""
    return contact_closed(relay, wiring.mains_terminal, wiring.appliance_terminal)
