"""Scenario document parsing and report emission tests."""

import copy
import json

import pytest

from phantomstrip.control import MasterToggle, RunMacro, ToggleOutlet
from phantomstrip.ircodec import DEFAULT_PARAMS, FrameKind
from phantomstrip.scenario import (
    ScenarioError,
    dumps_report,
    params_from_json,
    parse_scenario,
    report_to_json,
    to_sim_config,
)
from phantomstrip.sim import ApplianceIntent, PowerMode, RemotePress, run_scenario

MINIMAL = {
    "schema_version": 1,
    "strip": {"outlet_count": 1},
    "appliances": [
        {
            "outlet": 0,
            "name": "lamp",
            "watts": {"operational": 60.0, "active_standby": 2.0, "passive_standby": 1.0},
        }
    ],
    "events": [],
    "horizon_s": 3600,
}


def doc_with(**overrides):
    doc = copy.deepcopy(MINIMAL)
    doc.update(overrides)
    return doc


def parse(doc):
    return parse_scenario(json.dumps(doc))


class TestParsing:
    def test_minimal_document_parses(self):
        scen = parse(MINIMAL)
        cfg = to_sim_config(scen)
        assert cfg.outlet_count == 1
        assert cfg.horizon_s == 3600
        assert cfg.relay_coil_watts == 0.0
        assert cfg.profiles[0].name == "lamp"
        assert len(cfg.button_map) == 2  # master + one outlet by default

    def test_minimal_run_is_zero_energy_when_coil_off(self):
        scen = parse(doc_with(initial={"coil_on": [False]}))
        report = run_scenario(to_sim_config(scen))
        assert report.total_wh == 0.0

    def test_source_hash_is_stable_sha256(self):
        import hashlib
        text = json.dumps(MINIMAL)
        assert parse_scenario(text).source_sha256 == hashlib.sha256(text.encode()).hexdigest()

    def test_events_parse_to_subjects(self):
        doc = doc_with(events=[
            {"time_s": 5, "press": {"address": 0, "command": 1}},
            {"time_s": 6, "press": {"repeat": True}},
            {"time_s": 7, "intent": {"outlet": 0, "mode": "operational"}},
        ])
        cfg = to_sim_config(parse(doc))
        press, repeat, intent = cfg.events
        assert isinstance(press.subject, RemotePress)
        assert press.subject.frame.command == 1
        assert repeat.subject.frame.kind is FrameKind.REPEAT
        assert isinstance(intent.subject, ApplianceIntent)
        assert intent.subject.mode is PowerMode.OPERATIONAL

    def test_buttons_section_replaces_default_map(self):
        doc = doc_with(buttons=[
            {"address": 3, "command": 7, "action": {"type": "toggle", "outlet": 0}},
        ])
        cfg = to_sim_config(parse(doc))
        assert len(cfg.button_map) == 1
        assert cfg.button_map.action_for(3, 7) == ToggleOutlet(0)
        assert cfg.button_map.action_for(0, 0).__class__.__name__ == "NoOp"

    def test_macros_parse_and_bind(self):
        doc = doc_with(
            macros=[{"id": 2, "body": [{"type": "toggle", "outlet": 0}, {"type": "master"}]}],
            buttons=[{"address": 0, "command": 9, "action": {"type": "macro", "id": 2}}],
        )
        cfg = to_sim_config(parse(doc))
        assert cfg.macros.body(2) == (ToggleOutlet(0), MasterToggle())
        assert cfg.button_map.action_for(0, 9) == RunMacro(2)

    def test_initial_section(self):
        doc = doc_with(initial={"coil_on": [False], "modes": ["active_standby"]})
        cfg = to_sim_config(parse(doc))
        assert cfg.initial_coil_on == (False,)
        assert cfg.initial_modes == (PowerMode.ACTIVE_STANDBY,)


class TestRejection:
    def assert_fails(self, doc, fragment):
        with pytest.raises(ScenarioError, match=fragment):
            parse(doc)

    def test_invalid_json_reports_position(self):
        with pytest.raises(ScenarioError, match="invalid JSON"):
            parse_scenario("{nope")

    def test_unknown_top_level_field(self):
        self.assert_fails(doc_with(comment="hi"), r"\$: unknown field\(s\): comment")

    def test_missing_required_field(self):
        doc = doc_with()
        del doc["horizon_s"]
        self.assert_fails(doc, "missing required field")

    def test_wrong_schema_version(self):
        self.assert_fails(doc_with(schema_version=2), "version 1")

    def test_unknown_strip_field(self):
        self.assert_fails(
            doc_with(strip={"outlet_count": 1, "fuse_amps": 13}),
            r"\$\.strip: unknown field",
        )

    def test_unknown_watts_key(self):
        doc = doc_with()
        doc["appliances"][0]["watts"]["idle"] = 1.0
        self.assert_fails(doc, r"\$\.appliances\[0\]\.watts: unknown field")

    def test_wattage_ordering_violation_names_entry(self):
        doc = doc_with()
        doc["appliances"][0]["watts"]["passive_standby"] = 99.0
        self.assert_fails(doc, r"\$\.appliances\[0\]: .*ordered")

    def test_nonzero_off_rejected(self):
        doc = doc_with()
        doc["appliances"][0]["watts"]["off"] = 0.1
        self.assert_fails(doc, "0 W")

    def test_unbound_outlet(self):
        doc = doc_with(strip={"outlet_count": 2})
        self.assert_fails(doc, r"no appliance bound to outlet\(s\) \[1\]")

    def test_outlet_bound_twice(self):
        doc = doc_with()
        doc["appliances"].append(copy.deepcopy(doc["appliances"][0]))
        self.assert_fails(doc, "bound twice")

    def test_appliance_outlet_out_of_range(self):
        doc = doc_with()
        doc["appliances"][0]["outlet"] = 5
        self.assert_fails(doc, r"outlet 5 does not exist")

    def test_off_is_not_an_intent_mode(self):
        doc = doc_with(events=[{"time_s": 0, "intent": {"outlet": 0, "mode": "off"}}])
        self.assert_fails(doc, "off is not an intent")

    def test_event_needs_intent_or_press(self):
        self.assert_fails(doc_with(events=[{"time_s": 0}]), "'intent' or a 'press'")

    def test_event_cannot_be_both(self):
        doc = doc_with(events=[{
            "time_s": 0,
            "intent": {"outlet": 0, "mode": "operational"},
            "press": {"address": 0, "command": 0},
        }])
        self.assert_fails(doc, "unknown field")

    def test_press_needs_byte_range(self):
        doc = doc_with(events=[{"time_s": 0, "press": {"address": 0, "command": 300}}])
        self.assert_fails(doc, "0..255")

    def test_repeat_false_is_meaningless(self):
        doc = doc_with(events=[{"time_s": 0, "press": {"repeat": False}}])
        self.assert_fails(doc, "only true")

    def test_unsorted_events(self):
        doc = doc_with(events=[
            {"time_s": 5, "intent": {"outlet": 0, "mode": "operational"}},
            {"time_s": 4, "intent": {"outlet": 0, "mode": "passive_standby"}},
        ])
        self.assert_fails(doc, r"\$\.events: .*out of order")

    def test_event_beyond_horizon(self):
        doc = doc_with(events=[{"time_s": 9000, "intent": {"outlet": 0, "mode": "operational"}}])
        self.assert_fails(doc, "horizon")

    def test_button_referencing_undefined_macro(self):
        doc = doc_with(buttons=[
            {"address": 0, "command": 9, "action": {"type": "macro", "id": 4}},
        ])
        self.assert_fails(doc, "macro 4 is not defined")

    def test_macro_body_cannot_nest_macros(self):
        doc = doc_with(macros=[{"id": 0, "body": [{"type": "macro", "id": 1}]}])
        self.assert_fails(doc, "must not invoke")

    def test_macro_toggle_out_of_range(self):
        doc = doc_with(macros=[{"id": 0, "body": [{"type": "toggle", "outlet": 3}]}])
        self.assert_fails(doc, r"\$\.macros\[0\]\.body\[0\]: outlet 3")

    def test_duplicate_button_binding(self):
        doc = doc_with(buttons=[
            {"address": 0, "command": 1, "action": {"type": "master"}},
            {"address": 0, "command": 1, "action": {"type": "toggle", "outlet": 0}},
        ])
        self.assert_fails(doc, "bound twice")

    def test_duplicate_macro_id(self):
        doc = doc_with(macros=[
            {"id": 0, "body": [{"type": "master"}]},
            {"id": 0, "body": [{"type": "master"}]},
        ])
        self.assert_fails(doc, "defined twice")

    def test_initial_coil_length(self):
        self.assert_fails(
            doc_with(initial={"coil_on": [True, False]}),
            r"\$\.initial\.coil_on: expected 1 entries",
        )

    def test_booleans_are_not_integers(self):
        doc = doc_with(horizon_s=True)
        self.assert_fails(doc, "expected an integer")

    def test_non_object_document(self):
        with pytest.raises(ScenarioError, match="expected an object"):
            parse_scenario("[1, 2]")


class TestReportEmission:
    def make_report(self):
        return run_scenario(to_sim_config(parse(MINIMAL)))

    def test_watt_hours_rounded_to_three_decimals(self):
        doc = report_to_json(self.make_report(), generated_at="t")
        # 1 W passive standby for one hour
        assert doc["total_wh"] == 1.0
        assert doc["outlets"][0]["by_mode"]["passive_standby"] == 1.0
        for value in (doc["total_wh"], doc["standby_wh"], doc["overhead_wh"]):
            assert round(value, 3) == value

    def test_metadata_fields(self):
        doc = report_to_json(self.make_report(), scenario_sha256="abc", generated_at="now")
        assert doc["meta"] == {
            "scenario_sha256": "abc",
            "tool_version": __import__("phantomstrip").__version__,
            "generated_at": "now",
        }

    def test_generated_at_defaults_to_utc_timestamp(self):
        doc = report_to_json(self.make_report())
        assert "T" in doc["meta"]["generated_at"]
        assert doc["meta"]["generated_at"].endswith("+00:00")

    def test_dumps_report_is_json(self):
        text = dumps_report(self.make_report(), "sha")
        doc = json.loads(text)
        assert doc["schema_version"] == 1
        assert doc["standby_share"] == 1.0
        assert doc["within_typical_home_band"] is False

    def test_mode_keys_are_mode_names(self):
        doc = report_to_json(self.make_report(), generated_at="t")
        assert set(doc["outlets"][0]["by_mode"]) == {
            "operational", "active_standby", "passive_standby", "off",
        }


class TestParamsFiles:
    def test_empty_object_is_defaults(self):
        assert params_from_json("{}") == DEFAULT_PARAMS

    def test_partial_override(self):
        params = params_from_json('{"tolerance": 0.1, "bit_mark": 600}')
        assert params.tolerance == 0.1
        assert params.bit_mark == 600
        assert params.leader_mark == DEFAULT_PARAMS.leader_mark

    def test_unknown_field_rejected(self):
        with pytest.raises(ScenarioError, match="unknown field"):
            params_from_json('{"carrier_khz": 38}')

    def test_invalid_combination_rejected(self):
        with pytest.raises(ScenarioError, match="overlap"):
            params_from_json('{"one_space": 700}')

    def test_invalid_json_rejected(self):
        with pytest.raises(ScenarioError, match="invalid JSON"):
            params_from_json("{")
