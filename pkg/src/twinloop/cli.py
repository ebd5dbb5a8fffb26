"""Command line entry points.

`twinloop run` executes one scenario and writes its report; `twinloop compare`
ranks reports from the same geometry side by side; `twinloop emulate-physical`
serves the standalone physical-twin endpoint.

Exit codes: 0 when the run completed without collision or thread loss, 1 when
it completed badly (collision) or lost the thread, 2 for operational errors
(bad scenario, no driver, incomparable reports).
"""

from __future__ import annotations

import sys
import time

import click

from .emulator import PhysicalEmulator, TcpTwinLink, load_vehicle_file, parse_address
from .scenario import (
    EGO_ID,
    MODES,
    comparison_csv,
    compare as order_reports,
    export_kpi_csv,
    export_run,
    load_run,
    load_scenario,
    render_comparison,
    run as run_scenario,
)


def _fail(message: str) -> None:
    click.echo(f"error: {message}", err=True)
    sys.exit(2)


@click.group()
@click.version_option(package_name="twinloop")
def main() -> None:
    """Digital-twin vehicle co-simulation: scenarios, twin links, cockpits."""


@main.command("run")
@click.option("--scenario", "scenario_path", required=True, type=click.Path(exists=True, dir_okay=False), help="Scenario JSON file.")
@click.option("--mode", required=True, type=click.Choice(MODES), help="Ego control mode.")
@click.option("--seed", required=True, type=int, help="RNG seed for the V2X channel.")
@click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False, writable=True), help="Report JSON destination.")
@click.option("--kpi", "kpi_path", default=None, type=click.Path(dir_okay=False, writable=True), help="Also write the per-tick KPI log as CSV.")
@click.option("--attach-physical", "attach", default=None, metavar="HOST:PORT", help="Drive a physical-twin endpoint instead of local ego dynamics.")
@click.option("--gateway-port", default=None, type=int, help="Serve cockpit sessions on this websocket port (0 = ephemeral).")
@click.option("--driver-timeout", default=None, type=float, help="Give up waiting for a driver after this many seconds (hv only).")
@click.option("--lockstep", is_flag=True, help="Attached endpoint steps once per command; do not pace wall time.")
def run_cmd(scenario_path, mode, seed, out_path, kpi_path, attach, gateway_port, driver_timeout, lockstep):
    """Execute one scenario run and write its report."""
    try:
        spec = load_scenario(scenario_path, mode=mode, seed=seed)
    except (ValueError, KeyError, OSError) as exc:
        _fail(f"bad scenario: {exc}")

    gateway = None
    link = None
    command_source = None
    observer = None
    realtime = None
    try:
        if gateway_port is not None:
            from .gateway import GatewayServer

            scene_info = {"name": spec.name, "map": spec.map.to_dict(), "mode": spec.mode}
            gateway = GatewayServer(port=gateway_port, scene_info=scene_info).start()
            click.echo(f"gateway listening on ws://127.0.0.1:{gateway.port}")
            observer = gateway.hub.observer
            realtime = True
            if spec.mode == "hv":
                click.echo("waiting for a driver session...")
                if not gateway.wait_for_driver(driver_timeout):
                    _fail("no driver connected")
                command_source = gateway.hub.driver_source(spec.dt)
                click.echo(f"driver connected: {command_source.session_id}")
        if attach is not None:
            host, port = parse_address(attach)
            link = TcpTwinLink(host, port, vehicle_id=EGO_ID, lockstep=lockstep)
            click.echo(f"attached physical twin at {host}:{port}")
            if lockstep:
                realtime = False

        result = run_scenario(
            spec,
            command_source=command_source,
            physical_link=link,
            observer=observer,
            realtime=realtime,
        )
    except ValueError as exc:
        _fail(str(exc))
    except (ConnectionError, OSError, TimeoutError) as exc:
        _fail(f"physical twin unreachable: {exc}")
    finally:
        if link is not None:
            link.close()
        if gateway is not None:
            time.sleep(0.2)  # let pumps flush the result message
            gateway.stop()

    export_run(result, out_path)
    if kpi_path is not None:
        export_kpi_csv(result.samples, kpi_path)

    r = result.report
    stop = "-" if r.stop_distance_s is None else f"{r.stop_distance_s:.2f}m"
    click.echo(
        f"mode={r.mode} terminated={r.terminated} stop={stop} "
        f"peak_decel={r.peak_decel:.2f}m/s2 collision={'yes' if r.collision else 'no'}"
    )
    click.echo(f"report: {out_path}")
    if kpi_path is not None:
        click.echo(f"kpi: {kpi_path}")
    sys.exit(result.exit_code)


@main.command("compare")
@click.argument("reports", nargs=-1, required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--csv", "as_csv", is_flag=True, help="Emit CSV instead of the aligned table.")
def compare_cmd(reports, as_csv):
    """Rank run reports from the same scenario geometry side by side."""
    try:
        loaded = [load_run(p).report for p in reports]
        ordered = order_reports(loaded)
    except (ValueError, KeyError, OSError) as exc:
        _fail(str(exc))
    if as_csv:
        click.echo(comparison_csv(ordered), nl=False)
    else:
        click.echo(render_comparison(ordered))


@main.group("pq")
def pq_group() -> None:
    """Presence-questionnaire scoring and session-order tools."""


@pq_group.command("score")
@click.option("--set", "set_name", required=True, type=click.Choice(["observation", "interaction"]), help="Item subset the responses answer.")
@click.option("--in", "in_path", required=True, type=click.Path(exists=True, dir_okay=False), help="Long-format responses CSV (participant,configuration,item_id,rating).")
@click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False, writable=True), help="Per-response factor scores CSV destination.")
@click.option("--reversed-f4", is_flag=True, help="Add a reverse-coded interface-quality column.")
def pq_score_cmd(set_name, in_path, out_path, reversed_f4):
    """Score questionnaire responses into the four presence factors."""
    from .pq import read_responses_csv, write_scores_csv

    try:
        responses = read_responses_csv(in_path, set_name)
    except (ValueError, OSError) as exc:
        _fail(str(exc))
    write_scores_csv(responses, out_path, reversed_f4=reversed_f4)
    participants = {r.participant_id for r in responses}
    click.echo(f"scored {len(responses)} responses from {len(participants)} participants")
    click.echo(f"scores: {out_path}")


@pq_group.command("order")
@click.option("--n", "n", required=True, type=int, help="Number of conditions (must be even).")
def pq_order_cmd(n):
    """Print a balanced Latin-square session order, one row per group."""
    from .pq import latin_square

    try:
        square = latin_square(n)
    except ValueError as exc:
        _fail(str(exc))
    for row in square:
        click.echo(" ".join(str(c + 1) for c in row))


@main.command("emulate-physical")
@click.option("--listen", required=True, metavar="HOST:PORT", help="Bind address (port 0 = ephemeral).")
@click.option("--config", "config_path", required=True, type=click.Path(exists=True, dir_okay=False), help="Vehicle JSON file.")
@click.option("--duration", default=0.0, type=float, help="Stop serving after this many seconds (0 = run until interrupted).")
def emulate_physical_cmd(listen, config_path, duration):
    """Serve a standalone physical-twin vehicle endpoint."""
    try:
        host, port = parse_address(listen)
        kwargs = load_vehicle_file(config_path)
    except (ValueError, KeyError, OSError) as exc:
        _fail(str(exc))
    emulator = PhysicalEmulator(host=host, port=port, **kwargs).start()
    mode = "lockstep" if emulator.lockstep else f"wall-clock dt={emulator.settings.dt}"
    click.echo(f"physical twin {emulator.vehicle_id!r} ({mode}) listening on {host}:{emulator.port}")
    try:
        if duration > 0:
            time.sleep(duration)
        else:
            while True:
                time.sleep(3600)
    except KeyboardInterrupt:
        pass
    finally:
        emulator.stop()
    click.echo("emulator stopped")


if __name__ == "__main__":
    main()
