"""Relay contact model tests; small enough to enumerate exhaustively."""

import itertools

import pytest

from phantomstrip.relay import (
    DEFAULT_WIRING,
    ContactTerminal,
    RelayState,
    WiringPlan,
    contact_closed,
    outlet_powered,
)

COM, NC, NO = ContactTerminal.COM, ContactTerminal.NC, ContactTerminal.NO


class TestContactClosed:
    @pytest.mark.parametrize("coil,a,b,closed", [
        (False, COM, NC, True),
        (False, COM, NO, False),
        (True, COM, NC, False),
        (True, COM, NO, True),
        (False, NC, NO, False),
        (True, NC, NO, False),
    ])
    def test_truth_table(self, coil, a, b, closed):
        relay = RelayState(coil)
        assert contact_closed(relay, a, b) is closed
        assert contact_closed(relay, b, a) is closed  # symmetric

    def test_same_terminal_rejected(self):
        for terminal in ContactTerminal:
            with pytest.raises(ValueError):
                contact_closed(RelayState(False), terminal, terminal)


class TestWiring:
    def test_default_wiring_powers_only_energized_coils(self):
        assert DEFAULT_WIRING.mains_terminal is NO
        assert outlet_powered(RelayState(True)) is True
        assert outlet_powered(RelayState(False)) is False

    def test_nc_wiring_inverts(self):
        wiring = WiringPlan(mains_terminal=NC)
        assert outlet_powered(RelayState(True), wiring) is False
        assert outlet_powered(RelayState(False), wiring) is True

    def test_appliance_must_sit_on_com(self):
        with pytest.raises(ValueError):
            WiringPlan(mains_terminal=NO, appliance_terminal=NC)

    def test_terminals_must_differ(self):
        with pytest.raises(ValueError):
            WiringPlan(mains_terminal=COM)

    def test_outlet_powered_matches_contact_closed_everywhere(self):
        for coil, mains in itertools.product([False, True], [NC, NO]):
            wiring = WiringPlan(mains_terminal=mains)
            assert outlet_powered(RelayState(coil), wiring) == contact_closed(
                RelayState(coil), COM, mains
            )
