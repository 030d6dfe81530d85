import json

import pytest

from summonsim.cli import main
from summonsim.geodesy import UtmPoint, utm_to_wgs84
from summonsim.launcher import (
    ConfigError,
    LaunchConfig,
    Scenario,
    TraceParseError,
    launch,
    replay,
    run_scenario,
)


def quiet_config(**overrides):
    return LaunchConfig(http_enabled=False, **overrides)


def nearby_goal_wgs84(north=30.0, east=0.0):
    cfg = LaunchConfig()
    return utm_to_wgs84(
        UtmPoint(
            cfg.sim.start_easting + east,
            cfg.sim.start_northing + north,
            cfg.sim.utm_zone,
            cfg.sim.hemisphere,
        )
    )


def summon_scenario(duration=60.0, north=30.0, assertions=None):
    goal = nearby_goal_wgs84(north=north)
    return Scenario(
        duration=duration,
        events=[
            {"t": 0.5, "type": "summon",
             "latitude": goal.latitude, "longitude": goal.longitude},
        ],
        assertions=assertions or [],
    )


class TestLaunchConfig:
    def test_defaults_validate(self):
        LaunchConfig().validate()

    def test_both_localization_nodes_rejected(self):
        cfg = quiet_config(localization_nodes=("actor_localization", "odom_repub"))
        with pytest.raises(ConfigError):
            cfg.validate()

    def test_no_localization_node_rejected(self):
        with pytest.raises(ConfigError):
            quiet_config(localization_nodes=()).validate()

    def test_unknown_localization_node_rejected(self):
        with pytest.raises(ConfigError):
            quiet_config(localization_nodes=("ekf",)).validate()

    def test_seed_mandatory_with_logical_clock(self):
        with pytest.raises(ConfigError):
            quiet_config(clock="logical", seed=None).validate()
        quiet_config(clock="wall", seed=None).validate()

    def test_bad_clock_rejected(self):
        with pytest.raises(ConfigError):
            quiet_config(clock="lamport").validate()

    def test_steering_sense_must_be_unit(self):
        quiet_config(steering_sense=-1.0).validate()
        with pytest.raises(ConfigError):
            quiet_config(steering_sense=0.5).validate()

    def test_telemetry_floor(self):
        with pytest.raises(ConfigError):
            quiet_config(telemetry_hz=1.0).validate()

    def test_from_json_round_trip(self):
        cfg = LaunchConfig.from_json(json.dumps({
            "seed": 5,
            "http_enabled": False,
            "sim": {"max_speed": 3.0},
            "planner": {"cruise_speed": 1.0},
        }))
        assert cfg.seed == 5
        assert cfg.sim.max_speed == 3.0
        assert cfg.planner.cruise_speed == 1.0

    def test_from_json_unknown_keys_rejected(self):
        with pytest.raises(ConfigError):
            LaunchConfig.from_json('{"warp_drive": true}')
        with pytest.raises(ConfigError):
            LaunchConfig.from_json('{"sim": {"mass": 900}}')

    def test_from_json_bad_json_rejected(self):
        with pytest.raises(ConfigError):
            LaunchConfig.from_json("not json")
        with pytest.raises(ConfigError):
            LaunchConfig.from_json("[1, 2]")

    def test_zone_mismatch_rejected(self):
        cfg = quiet_config()
        cfg.planner.utm_zone = 18
        with pytest.raises(ConfigError):
            cfg.validate()


class TestScenario:
    def test_valid_scenario_parses(self):
        sc = Scenario.from_json(json.dumps({
            "duration": 10.0,
            "events": [
                {"t": 5.0, "type": "set_gps_mode", "mode": "SPP"},
                {"t": 1.0, "type": "summon", "latitude": 42.0, "longitude": -83.0},
            ],
            "assertions": [{"type": "stopped_at_end"}],
        }))
        assert sc.duration == 10.0
        assert [e["t"] for e in sc.events] == [1.0, 5.0]  # sorted by time

    def test_missing_duration_rejected(self):
        with pytest.raises(ConfigError):
            Scenario.from_json('{"events": []}')

    def test_nonpositive_duration_rejected(self):
        with pytest.raises(ConfigError):
            Scenario.from_json('{"duration": 0}')

    def test_unknown_event_type_rejected(self):
        with pytest.raises(ConfigError):
            Scenario.from_json(json.dumps({
                "duration": 1.0,
                "events": [{"t": 0.0, "type": "teleport"}],
            }))

    def test_unknown_assertion_rejected(self):
        with pytest.raises(ConfigError):
            Scenario.from_json(json.dumps({
                "duration": 1.0,
                "assertions": [{"type": "flew"}],
            }))


class TestSystemClock:
    def test_tick_count_matches_duration(self):
        with launch(quiet_config()) as system:
            system.run_until(1.0)
            assert system._tick_count == round(system.config.sim.tick_hz)
            assert system.sim_time == pytest.approx(1.0)

    def test_telemetry_rate(self):
        with launch(quiet_config(telemetry_hz=10.0)) as system:
            system.run_until(2.0)
            assert len(system.frames) == 20


class TestRunScenario:
    def test_idle_scenario_passes(self):
        sc = Scenario(duration=2.0, assertions=[{"type": "stopped_at_end"}])
        assert run_scenario(quiet_config(), sc) == 0

    def test_summon_scenario_arrives(self):
        sc = summon_scenario(
            duration=60.0, north=30.0,
            assertions=[{"type": "arrived", "by": 60.0}, {"type": "stopped_at_end"}],
        )
        assert run_scenario(quiet_config(), sc) == 0

    def test_unreachable_deadline_fails(self):
        # 30 m goal cannot be reached in 2 s at cruise speed
        sc = summon_scenario(
            duration=2.0, north=30.0, assertions=[{"type": "arrived", "by": 2.0}]
        )
        assert run_scenario(quiet_config(), sc) == 1


class TestDeterminism:
    def run_traced(self, path, seed=11):
        cfg = quiet_config(seed=seed, trace=str(path))
        sc = summon_scenario(duration=20.0, north=25.0)
        run_scenario(cfg, sc)
        return path.read_bytes()

    def test_identical_inputs_identical_traces(self, tmp_path):
        a = self.run_traced(tmp_path / "a.ndjson")
        b = self.run_traced(tmp_path / "b.ndjson")
        assert a == b

    def test_different_seed_different_trace(self, tmp_path):
        a = self.run_traced(tmp_path / "a.ndjson", seed=11)
        b = self.run_traced(tmp_path / "b.ndjson", seed=12)
        assert a != b


class TestReplay:
    @pytest.fixture
    def trace(self, tmp_path):
        path = tmp_path / "trace.ndjson"
        cfg = quiet_config(trace=str(path))
        run_scenario(cfg, summon_scenario(duration=10.0))
        return path

    def test_clean_trace_has_no_violations(self, trace):
        report = replay(trace)
        assert report.violations == []
        assert report.records > 0
        assert report.topics > 5

    def test_replay_is_idempotent(self, trace):
        assert replay(trace).to_text() == replay(trace).to_text()

    def test_seq_gap_is_fifo_violation(self, trace, tmp_path):
        lines = trace.read_text().splitlines()
        rec = json.loads(lines[10])
        rec["seq"] += 3
        lines[10] = json.dumps(rec)
        bad = tmp_path / "gap.ndjson"
        bad.write_text("\n".join(lines) + "\n")
        report = replay(bad)
        assert any("FIFO violation" in v for v in report.violations)

    def test_corrupt_line_raises_with_line_number(self, trace, tmp_path):
        lines = trace.read_text().splitlines()
        lines[4] = "{oops"
        bad = tmp_path / "corrupt.ndjson"
        bad.write_text("\n".join(lines) + "\n")
        with pytest.raises(TraceParseError) as exc:
            replay(bad)
        assert exc.value.line_no == 5

    def test_unknown_topic_is_violation(self, trace, tmp_path):
        lines = trace.read_text().splitlines()
        rec = json.loads(lines[0])
        rec["topic"] = "/made/up"
        bad = tmp_path / "topic.ndjson"
        bad.write_text(json.dumps(rec) + "\n")
        report = replay(bad)
        assert any("unknown topic" in v for v in report.violations)


class TestCli:
    def write_scenario(self, tmp_path, scenario):
        goal = nearby_goal_wgs84(north=20.0)
        path = tmp_path / "scenario.json"
        path.write_text(json.dumps(scenario))
        return path

    def test_run_scenario_exit_zero(self, tmp_path):
        cfg = tmp_path / "config.json"
        cfg.write_text('{"http_enabled": false}')
        sc = self.write_scenario(tmp_path, {"duration": 1.0})
        assert main(["run", "--config", str(cfg), "--scenario", str(sc)]) == 0

    def test_failing_assertion_exit_one(self, tmp_path):
        cfg = tmp_path / "config.json"
        cfg.write_text('{"http_enabled": false}')
        goal = nearby_goal_wgs84(north=500.0)
        sc = self.write_scenario(tmp_path, {
            "duration": 1.0,
            "events": [{"t": 0.1, "type": "summon",
                        "latitude": goal.latitude, "longitude": goal.longitude}],
            "assertions": [{"type": "arrived", "by": 1.0}],
        })
        assert main(["run", "--config", str(cfg), "--scenario", str(sc)]) == 1

    def test_bad_config_exit_two(self, tmp_path):
        cfg = tmp_path / "config.json"
        cfg.write_text('{"clock": "lamport"}')
        assert main(["run", "--config", str(cfg)]) == 2

    def test_missing_file_exit_two(self, tmp_path):
        assert main(["run", "--config", str(tmp_path / "none.json")]) == 2
        assert main(["replay", str(tmp_path / "none.ndjson")]) == 2

    def test_replay_cli_round_trip(self, tmp_path, capsys):
        cfg = tmp_path / "config.json"
        trace = tmp_path / "trace.ndjson"
        cfg.write_text('{"http_enabled": false}')
        sc = self.write_scenario(tmp_path, {"duration": 1.0})
        assert main(["run", "--config", str(cfg), "--scenario", str(sc),
                     "--trace", str(trace)]) == 0
        assert main(["replay", str(trace)]) == 0
        out = capsys.readouterr().out
        assert "violations: 0" in out
