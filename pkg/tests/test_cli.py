"""CLI surface tests: run/compare/emulate-physical wiring and exit codes."""

import json
import socket
import threading
import time
from concurrent.futures import ThreadPoolExecutor

import pytest
from click.testing import CliRunner

from twinloop.cli import main
from twinloop.emulator import PhysicalEmulator, TcpTwinLink
from twinloop.scenario import default_scenario, export_run, run

SCENARIO_FILE = "scenarios/jump_scare.json"


@pytest.fixture
def runner():
    return CliRunner()


def free_port():
    with socket.socket() as s:
        s.bind(("127.0.0.1", 0))
        return s.getsockname()[1]


def combined(result):
    # click >= 8.2 captures stderr separately from result.output
    try:
        return result.output + result.stderr
    except ValueError:
        return result.output


def write_scenario(tmp_path, name="variant.json", **mods):
    data = default_scenario().to_dict()
    for key, value in mods.items():
        if isinstance(value, dict) and isinstance(data.get(key), dict):
            data[key].update(value)
        else:
            data[key] = value
    path = tmp_path / name
    path.write_text(json.dumps(data))
    return str(path)


class TestRun:
    def test_av_run_writes_report_and_kpi(self, runner, tmp_path):
        out = tmp_path / "report.json"
        kpi = tmp_path / "kpi.csv"
        result = runner.invoke(
            main,
            ["run", "--scenario", SCENARIO_FILE, "--mode", "av", "--seed", "42",
             "--out", str(out), "--kpi", str(kpi)],
        )
        assert result.exit_code == 0, result.output
        assert "terminated=stopped" in result.output
        assert "collision=no" in result.output
        report = json.loads(out.read_text())["report"]
        assert report["mode"] == "av"
        assert report["completed"] is True
        assert kpi.read_text().splitlines()[0] == "t,s,speed,throttle,brake,accel,peer_gap"

    def test_collision_run_exits_one(self, runner, tmp_path):
        scenario = write_scenario(tmp_path, controller={"panic_brake": 0.0})
        out = tmp_path / "report.json"
        result = runner.invoke(
            main,
            ["run", "--scenario", scenario, "--mode", "av", "--seed", "1", "--out", str(out)],
        )
        assert result.exit_code == 1
        assert "collision=yes" in result.output
        assert json.loads(out.read_text())["report"]["collision"] is True

    def test_unreadable_scenario_exits_two(self, runner, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text("{\"name\": \"broken\"}")
        out = tmp_path / "report.json"
        result = runner.invoke(
            main, ["run", "--scenario", str(bad), "--mode", "av", "--seed", "1", "--out", str(out)]
        )
        assert result.exit_code == 2
        assert "bad scenario" in combined(result)

    def test_hv_without_gateway_exits_two(self, runner, tmp_path):
        out = tmp_path / "report.json"
        result = runner.invoke(
            main,
            ["run", "--scenario", SCENARIO_FILE, "--mode", "hv", "--seed", "1", "--out", str(out)],
        )
        assert result.exit_code == 2
        assert "no driver connected" in combined(result)

    def test_hv_driver_timeout_exits_two(self, runner, tmp_path):
        out = tmp_path / "report.json"
        result = runner.invoke(
            main,
            ["run", "--scenario", SCENARIO_FILE, "--mode", "hv", "--seed", "1",
             "--out", str(out), "--gateway-port", "0", "--driver-timeout", "0.2"],
        )
        assert result.exit_code == 2
        assert "no driver connected" in combined(result)

    def test_missing_options_exit_two(self, runner):
        result = runner.invoke(main, ["run"])
        assert result.exit_code == 2


class TestRunHvGateway:
    def drive(self, port, stop):
        from websockets.sync.client import connect

        from twinloop.gateway import InputEvent, input_event_message
        from twinloop.protocol import decode_message, encode_message

        deadline = time.monotonic() + 5
        ws = None
        while ws is None and time.monotonic() < deadline:
            try:
                ws = connect(f"ws://127.0.0.1:{port}")
            except OSError:
                time.sleep(0.05)
        assert ws is not None, "gateway never came up"
        try:
            ws.send(encode_message({"type": "hello", "role": "driver", "modality": "wheel"}))
            ack = decode_message(ws.recv(timeout=5))
            assert ack["accepted"], ack
            event = InputEvent(device="wheel", axes={"pedal_brake": 1.0})
            ws.send(encode_message(input_event_message(event, ack["session_id"], seq=1)))
            while not stop.is_set():
                try:
                    msg = decode_message(ws.recv(timeout=0.5))
                except TimeoutError:
                    continue
                if msg["type"] == "result":
                    self.result_report = msg["report"]
                    return
        finally:
            ws.close()

    def test_hv_run_with_live_driver(self, runner, tmp_path):
        scenario = write_scenario(tmp_path, duration_max_s=0.6)
        out = tmp_path / "report.json"
        port = free_port()
        stop = threading.Event()
        self.result_report = None
        driver = threading.Thread(target=self.drive, args=(port, stop), daemon=True)
        driver.start()
        try:
            result = runner.invoke(
                main,
                ["run", "--scenario", scenario, "--mode", "hv", "--seed", "1",
                 "--out", str(out), "--gateway-port", str(port)],
            )
        finally:
            stop.set()
            driver.join(timeout=10)
        assert result.exit_code == 0, result.output
        assert "driver connected: sess-1" in result.output
        report = json.loads(out.read_text())["report"]
        assert report["mode"] == "hv"
        assert report["terminated"] == "duration"
        assert report["session_id"] == "sess-1"
        assert self.result_report is not None, "driver never saw the result message"
        assert self.result_report["session_id"] == "sess-1"


class TestRunAttached:
    def test_lockstep_attachment(self, runner, tmp_path):
        emulator = PhysicalEmulator(lockstep=True).start()
        out = tmp_path / "report.json"
        try:
            result = runner.invoke(
                main,
                ["run", "--scenario", SCENARIO_FILE, "--mode", "av", "--seed", "42",
                 "--out", str(out), "--attach-physical", f"127.0.0.1:{emulator.port}",
                 "--lockstep"],
            )
        finally:
            emulator.stop()
        assert result.exit_code == 0, result.output
        assert "attached physical twin" in result.output
        assert "terminated=stopped" in result.output

    def test_unreachable_endpoint_exits_two(self, runner, tmp_path):
        out = tmp_path / "report.json"
        result = runner.invoke(
            main,
            ["run", "--scenario", SCENARIO_FILE, "--mode", "av", "--seed", "1",
             "--out", str(out), "--attach-physical", f"127.0.0.1:{free_port()}"],
        )
        assert result.exit_code == 2
        assert "physical twin unreachable" in combined(result)


class TestCompare:
    @pytest.fixture
    def report_files(self, tmp_path):
        paths = []
        for mode in ("av", "cav"):
            result = run(default_scenario(mode=mode, seed=42))
            path = tmp_path / f"{mode}.json"
            export_run(result, path)
            paths.append(str(path))
        return paths

    def test_table_orders_by_stop_distance(self, runner, report_files):
        result = runner.invoke(main, ["compare", *report_files])
        assert result.exit_code == 0
        lines = result.output.splitlines()
        assert lines[0].startswith("mode")
        assert lines[2].startswith("cav")  # shorter stop ranks first
        assert lines[3].startswith("av")

    def test_csv_output(self, runner, report_files):
        result = runner.invoke(main, ["compare", "--csv", *report_files])
        assert result.exit_code == 0
        lines = result.output.splitlines()
        assert lines[0] == "mode,stop_distance_s,peak_accel,peak_decel,min_gap,collision,reaction_time,completed"
        assert len(lines) == 3

    def test_incomparable_reports_exit_two(self, runner, tmp_path, report_files):
        import dataclasses

        from twinloop.scenario import load_run, RunResult

        other = load_run(report_files[0])
        doctored = RunResult(
            report=dataclasses.replace(other.report, geometry_fingerprint="deadbeef00000000"),
            samples=other.samples,
        )
        path = tmp_path / "other.json"
        export_run(doctored, path)
        result = runner.invoke(main, ["compare", report_files[0], str(path)])
        assert result.exit_code == 2
        assert "incomparable" in combined(result)


class TestPq:
    RESPONSES = "\n".join(
        ["participant,configuration,item_id,rating"]
        + [f"p1,gamepad,{i},7" for i in (1, 2, 3, 6, 9, 19, 21, 23, 24, 31)]
        + [f"p2,wheel,{i},1" for i in (1, 2, 3, 6, 9, 19, 21, 23, 24, 31)]
    )

    def test_score_writes_factor_sums(self, runner, tmp_path):
        src = tmp_path / "responses.csv"
        src.write_text(self.RESPONSES + "\n")
        out = tmp_path / "scores.csv"
        result = runner.invoke(
            main,
            ["pq", "score", "--set", "interaction", "--in", str(src), "--out", str(out)],
        )
        assert result.exit_code == 0, result.output
        assert "scored 2 responses from 2 participants" in result.output
        lines = out.read_text().splitlines()
        assert lines[0].startswith("participant,configuration,set,f1_involvement")
        assert lines[1] == "p1,gamepad,interaction,28,,28,14,70"
        assert lines[2] == "p2,wheel,interaction,4,,4,2,10"

    def test_score_reversed_f4_column(self, runner, tmp_path):
        src = tmp_path / "responses.csv"
        src.write_text(self.RESPONSES + "\n")
        out = tmp_path / "scores.csv"
        result = runner.invoke(
            main,
            ["pq", "score", "--set", "interaction", "--in", str(src),
             "--out", str(out), "--reversed-f4"],
        )
        assert result.exit_code == 0
        lines = out.read_text().splitlines()
        assert lines[0].endswith("f4_interface_quality_reversed")
        # two interface items: reverse-coded sum is 8*2 - raw
        assert lines[1].endswith(",70,2")
        assert lines[2].endswith(",10,14")

    def test_score_incomplete_response_exits_two(self, runner, tmp_path):
        src = tmp_path / "responses.csv"
        src.write_text("participant,configuration,item_id,rating\np1,gamepad,1,7\n")
        out = tmp_path / "scores.csv"
        result = runner.invoke(
            main, ["pq", "score", "--set", "interaction", "--in", str(src), "--out", str(out)]
        )
        assert result.exit_code == 2
        assert "missing" in combined(result)

    def test_order_prints_balanced_square(self, runner):
        result = runner.invoke(main, ["pq", "order", "--n", "4"])
        assert result.exit_code == 0
        assert result.output.splitlines() == ["1 2 4 3", "2 3 1 4", "3 4 2 1", "4 1 3 2"]

    def test_order_odd_n_exits_two(self, runner):
        result = runner.invoke(main, ["pq", "order", "--n", "3"])
        assert result.exit_code == 2
        assert "even" in combined(result)


class TestEmulatePhysical:
    def test_serves_until_duration_elapses(self, runner, tmp_path):
        config = tmp_path / "vehicle.json"
        config.write_text(json.dumps({"lockstep": True, "vehicle_id": "bench"}))
        port = free_port()
        with ThreadPoolExecutor(max_workers=1) as pool:
            future = pool.submit(
                runner.invoke,
                main,
                ["emulate-physical", "--listen", f"127.0.0.1:{port}",
                 "--config", str(config), "--duration", "2.0"],
            )
            link = None
            deadline = time.monotonic() + 5
            while link is None and time.monotonic() < deadline:
                try:
                    link = TcpTwinLink("127.0.0.1", port, vehicle_id="bench", lockstep=True)
                except OSError:
                    time.sleep(0.05)
            assert link is not None, "emulator never came up"
            try:
                from twinloop.scene import clamp_command

                link.send(clamp_command(0.0, 1.0, 0.0, seq=0))
                assert link.refresh().state.speed > 0
            finally:
                link.close()
            result = future.result(timeout=10)
        assert result.exit_code == 0, result.output
        assert f"listening on 127.0.0.1:{port}" in result.output
        assert "emulator stopped" in result.output

    def test_bad_listen_address_exits_two(self, runner, tmp_path):
        config = tmp_path / "vehicle.json"
        config.write_text("{}")
        result = runner.invoke(
            main, ["emulate-physical", "--listen", "nope", "--config", str(config)]
        )
        assert result.exit_code == 2
        assert "host:port" in combined(result)
