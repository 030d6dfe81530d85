import json
import socket
import threading

import pytest
import requests

from summonsim import messages as m
from summonsim.bus import Bus
from summonsim.geodesy import GeoPoint, wgs84_to_utm
from summonsim.launcher import LaunchConfig, launch
from summonsim.summon_service import PointAndGoNode, SummonService, TelemetryFrame


@pytest.fixture
def system():
    cfg = LaunchConfig(http_port=0)
    s = launch(cfg)
    yield s
    s.close()


def url(system, path):
    return f"http://{system.service.host}:{system.service.port}{path}"


class TestSummonEndpoint:
    def test_valid_summon_publishes_one_point_and_go(self, system):
        r = requests.post(url(system, "/summon"),
                          data='{"latitude":42.47,"longitude":-83.25}')
        assert r.status_code == 200
        assert r.json() == {"status": "ok"}
        received = []
        system.bus.subscribe(m.TOPIC_POINT_AND_GO, received.append)
        system.step()
        assert len(received) == 1
        assert received[0].payload == m.PointAndGo(42.47, -83.25, "go to waypoint")

    def test_malformed_json_is_400_and_publishes_nothing(self, system):
        received = []
        system.bus.subscribe(m.TOPIC_POINT_AND_GO, received.append)
        r = requests.post(url(system, "/summon"), data='{"latitude":"abc"}')
        assert r.status_code == 400
        assert r.json()["status"] == "error"
        system.step(5)
        assert received == []

    def test_out_of_range_is_400(self, system):
        r = requests.post(url(system, "/summon"),
                          data='{"latitude":91,"longitude":0}')
        assert r.status_code == 400

    def test_wrong_method_is_405(self, system):
        assert requests.get(url(system, "/summon")).status_code == 405

    def test_wrong_path_is_404(self, system):
        r = requests.post(url(system, "/nope"), data="{}")
        assert r.status_code == 404

    def test_sequential_posts_get_sequential_seqs(self, system):
        received = []
        system.bus.subscribe(m.TOPIC_POINT_AND_GO, received.append)
        for _ in range(2):
            assert requests.post(
                url(system, "/summon"), data='{"latitude":1,"longitude":2}'
            ).status_code == 200
            system.step()
        assert [env.seq for env in received] == [0, 1]


class TestPointAndGoNode:
    @pytest.fixture
    def bus(self):
        b = Bus()
        b.register_all(m.TOPIC_TYPES)
        PointAndGoNode(b)
        return b

    def test_translates_to_waypoint_and_mode(self, bus):
        waypoints, modes = [], []
        bus.subscribe(m.TOPIC_WAYPOINT, waypoints.append)
        bus.subscribe(m.TOPIC_MOBILITY_MODE, modes.append)
        bus.publish(m.TOPIC_POINT_AND_GO, m.PointAndGo(42.47, -83.25), 0.0)
        bus.dispatch_all()
        assert modes[0].payload == m.MobilityMode(14, 0)
        expected = wgs84_to_utm(GeoPoint(42.47, -83.25))
        wp = waypoints[0].payload
        assert wp.easting == pytest.approx(expected.easting, abs=1e-6)
        assert wp.northing == pytest.approx(expected.northing, abs=1e-6)
        assert (wp.utm_zone, wp.hemisphere) == (expected.zone, expected.hemisphere)

    def test_unrecognized_mobility_mode_publishes_nothing(self, bus):
        waypoints, modes = [], []
        bus.subscribe(m.TOPIC_WAYPOINT, waypoints.append)
        bus.subscribe(m.TOPIC_MOBILITY_MODE, modes.append)
        bus.publish(m.TOPIC_POINT_AND_GO, m.PointAndGo(1.0, 2.0, "hover"), 0.0)
        bus.dispatch_all()
        assert waypoints == [] and modes == []

    def test_mode_precedes_waypoint(self, bus):
        order = []
        bus.subscribe(m.TOPIC_WAYPOINT, lambda e: order.append("waypoint"))
        bus.subscribe(m.TOPIC_MOBILITY_MODE, lambda e: order.append("mode"))
        bus.publish(m.TOPIC_POINT_AND_GO, m.PointAndGo(1.0, 2.0), 0.0)
        bus.dispatch_all()
        assert order == ["mode", "waypoint"]


def read_frames(system, count, out):
    with requests.get(url(system, "/telemetry"), stream=True, timeout=10) as resp:
        lines = resp.iter_lines()
        for _ in range(count):
            out.append(json.loads(next(lines)))


class TestTelemetry:
    def test_idle_vehicle_constant_frames(self, system):
        frames = []
        t = threading.Thread(target=read_frames, args=(system, 3, frames), daemon=True)
        t.start()
        while t.is_alive():
            system.step()
            t.join(timeout=0.001)
        assert len(frames) == 3
        assert frames[0]["goal"] is None
        assert frames[0]["arrived"] is False
        assert frames[0]["vehicle"] == frames[2]["vehicle"]
        times = [f["sim_time"] for f in frames]
        assert times == sorted(times)

    def test_multiple_clients_each_get_frames(self, system):
        a, b = [], []
        ts = [
            threading.Thread(target=read_frames, args=(system, 2, out), daemon=True)
            for out in (a, b)
        ]
        for t in ts:
            t.start()
        while any(t.is_alive() for t in ts):
            system.step()
            for t in ts:
                t.join(timeout=0.001)
        assert len(a) == 2 and len(b) == 2

    def test_estop_visible_in_frames(self, system):
        assert requests.post(url(system, "/estop"), data='{"on":true}').status_code == 200
        system.step(system._telemetry_div)
        assert system.last_frame.estop is True

    def test_frame_json_shape(self):
        frame = TelemetryFrame(
            sim_time=1.0,
            vehicle=GeoPoint(42.0, -83.0),
            heading=0.5,
            goal=None,
            fix="RTK",
            estop=False,
            arrived=False,
            obstacles_nearby=False,
        )
        obj = json.loads(frame.to_json())
        assert set(obj) == {
            "sim_time", "vehicle", "goal", "fix", "estop", "arrived", "obstacles_nearby",
        }
        assert set(obj["vehicle"]) == {"latitude", "longitude", "heading"}


class TestEstopEndpoint:
    def test_estop_on_halts_vehicle(self, system):
        assert requests.post(url(system, "/estop"), data='{"on":true}').status_code == 200
        system.step()
        assert system.vehicle.state.physical_estop

    def test_estop_off_with_reset(self, system):
        requests.post(url(system, "/estop"), data='{"on":true}')
        system.step(60)
        assert system.low_level_controller.estopped
        requests.post(url(system, "/estop"), data='{"on":false,"reset":true}')
        system.step()
        assert not system.vehicle.state.physical_estop
        assert not system.low_level_controller.estopped
        assert not system.estop_heartbeat.latch.estopped

    def test_get_estop_is_405(self, system):
        assert requests.get(url(system, "/estop")).status_code == 405

    def test_bad_body_is_400(self, system):
        assert requests.post(url(system, "/estop"), data='{"on":3}').status_code == 400


class TestServiceLifecycle:
    def test_port_busy_raises_config_error(self):
        from summonsim.launcher import ConfigError

        blocker = socket.socket()
        blocker.bind(("127.0.0.1", 0))
        port = blocker.getsockname()[1]
        try:
            with pytest.raises(ConfigError):
                launch(LaunchConfig(http_port=port))
        finally:
            blocker.close()

    def test_disconnecting_client_releases_slot(self, system):
        resp = requests.get(url(system, "/telemetry"), stream=True, timeout=10)
        while system.service.hub.client_count() == 0:
            system.step()
        resp.close()
        # hub notices on the next push attempt after the write fails, or when
        # the handler thread unwinds; poke it until the slot is gone
        for _ in range(200):
            if system.service.hub.client_count() == 0:
                break
            system.step(system._telemetry_div)
        assert system.service.hub.client_count() == 0
