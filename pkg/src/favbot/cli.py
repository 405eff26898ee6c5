"""Command-line entry points: characterization sweeps, tracking missions,
scouting runs, classifier training, and the live server.

Every subcommand records a ``run.json`` in its output directory with the
fully resolved configuration, so any output can be regenerated bit for bit
from that file alone.  Exit codes: 0 success (mission reached, where one is
run), 1 usage error, 2 runtime error, 3 mission finished without reaching
the target.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import signal
import sys
import time
from pathlib import Path

from favbot import __version__
from favbot.controller import (
    Controller,
    MissionReport,
    Phase,
    load_registry,
    packaged_registry_text,
)
from favbot.kinematics import Pose, characterize_trajectory, wrap_angle, write_trajectory_csv
from favbot.resonance import load_default_table, load_mode_table
from favbot.scenario import load_scenario, load_scenario_file, packaged_scenario_text
from favbot.vision import (
    TrainConfig,
    generate_dataset,
    metrics_to_csv,
    packaged_params,
    read_params_file,
    train,
    write_params_file,
)
from favbot.world import StarTarget, World

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_RUNTIME = 2
EXIT_NOT_REACHED = 3

SWEEP_BOUNDS = (-300.0, -300.0, 300.0, 300.0)

SCOUT_FREQ_A = 58
SCOUT_FREQ_B = 59
# per-segment spans in the exact 2.0 : 1.7 ratio that makes a 58/59 pair
# retrace its own arc, and long enough that one pair sweeps more than 90
# degrees of heading
SCOUT_DURATION_A_S = 10.0
SCOUT_DURATION_B_S = 8.5


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _load_table(path: str | None):
    if path is None:
        return load_default_table()
    with open(path, encoding="utf-8") as fh:
        return load_mode_table(fh.read())


def _load_scenario_arg(name_or_path: str, seed: int | None, noise: bool | None) -> World:
    if Path(name_or_path).exists():
        return load_scenario_file(name_or_path, seed=seed, noise=noise)
    return load_scenario(packaged_scenario_text(name_or_path), seed=seed, noise=noise)


def _load_registry_arg(name_or_path: str):
    if Path(name_or_path).exists():
        with open(name_or_path, encoding="utf-8") as fh:
            return load_registry(fh.read())
    return load_registry(packaged_registry_text(name_or_path))


def _noise_override(value: str) -> bool | None:
    return {"auto": None, "on": True, "off": False}[value]


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_run_json(out: Path, command: str, config: dict) -> None:
    doc = {"command": command, "version": __version__, "config": config}
    (out / "run.json").write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")


def _write_pose_csv(path: Path, telemetry) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "x", "y", "theta"])
        for e in telemetry.events("pose"):
            w.writerow([repr(e["t"]), repr(e["x"]), repr(e["y"]), repr(e["theta"])])


# ------------------------------------------------------------------- sweep


def cmd_sweep(args) -> int:
    if not 1 <= args.lo <= args.hi <= 100:
        raise UsageError(f"frequency range [{args.lo}, {args.hi}] must lie within [1, 100]")
    out = _out_dir(args)
    table = _load_table(args.calibration)
    rows = []
    for freq in range(args.lo, args.hi + 1):
        world = World(
            robot=Pose(0.0, 0.0, 0.0),
            target=StarTarget(position=(299.0, 299.0)),
            bounds=SWEEP_BOUNDS,
            seed=args.seed,
            noise=args.noise,
        )
        samples = world.step_actuation(table, freq, args.duration)
        dec = characterize_trajectory(samples, world.tick_dt)
        rows.append((freq, dec.v, dec.v_t, dec.v_l, dec.omega))
        if args.trajectories:
            write_trajectory_csv(out / f"trajectory_{freq:03d}.csv", samples)
    with open(out / "characterization.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["freq_khz", "v", "v_t", "v_l", "omega"])
        for freq, v, v_t, v_l, omega in rows:
            w.writerow([freq, repr(v), repr(v_t), repr(v_l), repr(omega)])
    _write_run_json(
        out,
        "sweep",
        {
            "lo": args.lo,
            "hi": args.hi,
            "duration_s": args.duration,
            "seed": args.seed,
            "noise": args.noise,
            "calibration": args.calibration,
            "trajectories": args.trajectories,
        },
    )
    print(f"swept {len(rows)} frequencies -> {out / 'characterization.csv'}")
    return EXIT_OK


# ------------------------------------------------------------------- track


def cmd_track(args) -> int:
    out = _out_dir(args)
    table = _load_table(args.calibration)
    noise = _noise_override(args.noise)
    world = _load_scenario_arg(args.scenario, args.seed, noise)
    params = packaged_params() if args.weights is None else read_params_file(args.weights)
    registry = _load_registry_arg(args.params)

    ctl = Controller(world=world, table=table, params=params, max_cycles=args.max_cycles)
    ctl.registry = registry
    ctl.handle_command(101)
    report = ctl.run_mission()

    _write_pose_csv(out / "trajectory.csv", world.telemetry)
    report.trajectory_csv_path = str(out / "trajectory.csv")
    (out / "report.json").write_text(report.to_json() + "\n")
    world.telemetry.write_jsonl(out / "telemetry.jsonl")
    _write_run_json(
        out,
        "track",
        {
            "params": args.params,
            "scenario": args.scenario,
            "seed": args.seed,
            "noise": args.noise,
            "max_cycles": args.max_cycles,
            "weights": args.weights,
            "calibration": args.calibration,
        },
    )
    print(
        f"mission {report.outcome} after {report.cycles} cycles, "
        f"{len(report.over_corrections)} over-correction(s) -> {out / 'report.json'}"
    )
    return EXIT_OK if report.outcome == "reached" else EXIT_NOT_REACHED


# ------------------------------------------------------------------- scout


def cmd_scout(args) -> int:
    if args.cycles < 1:
        raise UsageError(f"cycles must be at least 1, got {args.cycles}")
    out = _out_dir(args)
    table = _load_table(args.calibration)
    world = World(
        robot=Pose(30.0, 30.0, 0.0),
        target=StarTarget(position=(55.0, 30.0)),
        seed=args.seed,
        noise=args.noise,
    )
    plan = [
        (SCOUT_FREQ_A, args.dur_58) if i % 2 == 0 else (SCOUT_FREQ_B, args.dur_59)
        for i in range(args.cycles)
    ]
    start = world.robot
    for freq, duration in plan:
        world.step_actuation(table, freq, duration)

    thetas = [start.theta] + [e["theta"] for e in world.telemetry.events("pose")]
    unwrapped = [thetas[0]]
    for a, b in zip(thetas, thetas[1:]):
        unwrapped.append(unwrapped[-1] + wrap_angle(b - a))
    total_rotation = sum(abs(b - a) for a, b in zip(unwrapped, unwrapped[1:]))
    heading_range = max(unwrapped) - min(unwrapped)
    net = math.hypot(world.robot.x - start.x, world.robot.y - start.y)

    summary = {
        "cycles": args.cycles,
        "segments": [{"freq_khz": f, "duration_s": d} for f, d in plan],
        "net_displacement_cm": net,
        "heading_range_deg": math.degrees(heading_range),
        "total_rotation_deg": math.degrees(total_rotation),
    }
    (out / "scout.json").write_text(json.dumps(summary, indent=2) + "\n")
    _write_pose_csv(out / "trajectory.csv", world.telemetry)
    _write_run_json(
        out,
        "scout",
        {
            "cycles": args.cycles,
            "dur_58": args.dur_58,
            "dur_59": args.dur_59,
            "seed": args.seed,
            "noise": args.noise,
            "calibration": args.calibration,
        },
    )
    print(
        f"scouted {args.cycles} cycles: net displacement {net:.3f} cm, "
        f"heading range {math.degrees(heading_range):.1f} deg"
    )
    return EXIT_OK


# ------------------------------------------------------------------- train


def cmd_train(args) -> int:
    out = _out_dir(args)
    cfg = TrainConfig(
        epochs=args.epochs,
        batch_size=args.batch_size,
        learning_rate=args.lr,
        dataset_size=args.samples,
        val_fraction=args.val_fraction,
        seed=args.seed,
    )
    images, labels = generate_dataset(args.samples, seed=args.seed)
    params, metrics = train(cfg, (images, labels))
    write_params_file(out / "weights.favw", params)
    (out / "metrics.csv").write_text(metrics_to_csv(metrics))
    _write_run_json(
        out,
        "train",
        {
            "samples": args.samples,
            "epochs": args.epochs,
            "batch_size": args.batch_size,
            "lr": args.lr,
            "val_fraction": args.val_fraction,
            "seed": args.seed,
        },
    )
    print(
        f"trained {args.epochs} epochs on {args.samples} samples: "
        f"final val acc {metrics[-1].val_accuracy:.4f} -> {out / 'weights.favw'}"
    )
    return EXIT_OK


# ------------------------------------------------------------------- serve


def cmd_serve(args) -> int:
    from favbot.protocol import ProtocolServer

    out = _out_dir(args)
    table = _load_table(args.calibration)
    noise = _noise_override(args.noise)
    world = _load_scenario_arg(args.scenario, args.seed, noise)
    params = packaged_params() if args.weights is None else read_params_file(args.weights)
    ctl = Controller(world=world, table=table, params=params, max_cycles=args.max_cycles)
    server = ProtocolServer(
        ctl, host=args.host, command_port=args.command_port, telemetry_port=args.telemetry_port
    )
    server.start()

    gateway = None
    if args.gateway_port is not None:
        try:
            from favbot.gateway import build_app, start_gateway
        except ImportError:
            server.stop()
            raise RuntimeError(
                "the web gateway needs the 'gateway' extra: pip install favbot[gateway]"
            ) from None
        if args.console is not None and not Path(args.console).is_dir():
            server.stop()
            raise RuntimeError(f"console directory not found: {args.console}")
        app = build_app(server.command_address, server.telemetry_address, args.console)
        gateway = start_gateway(app, args.host, args.gateway_port)

    stop = {"flag": False}

    def _signal(_num, _frame):
        stop["flag"] = True

    signal.signal(signal.SIGINT, _signal)
    signal.signal(signal.SIGTERM, _signal)

    cmd_host, cmd_port = server.command_address
    tel_host, tel_port = server.telemetry_address
    ready = f"ready command={cmd_host}:{cmd_port} telemetry={tel_host}:{tel_port}"
    if gateway is not None:
        ready += f" gateway={gateway.address[0]}:{gateway.address[1]}"
    print(ready, flush=True)

    report_written = False
    try:
        while not stop["flag"]:
            server.pump(world.telemetry)
            if ctl.phase is Phase.AUTONOMOUS:
                ctl.autonomous_cycle()
            elif ctl.phase is Phase.FINISHED and not report_written:
                report = MissionReport(
                    outcome=ctl.outcome, cycles=ctl.cycle_count, records=list(ctl.records)
                )
                _write_pose_csv(out / "trajectory.csv", world.telemetry)
                report.trajectory_csv_path = str(out / "trajectory.csv")
                (out / "report.json").write_text(report.to_json() + "\n")
                report_written = True
                print(f"mission {report.outcome} after {report.cycles} cycles", flush=True)
            else:
                time.sleep(0.01)
    finally:
        server.pump(world.telemetry)
        if gateway is not None:
            gateway.stop()
        server.stop()
        world.telemetry.write_jsonl(out / "telemetry.jsonl")
        _write_run_json(
            out,
            "serve",
            {
                "scenario": args.scenario,
                "seed": args.seed,
                "noise": args.noise,
                "max_cycles": args.max_cycles,
                "weights": args.weights,
                "calibration": args.calibration,
                "host": args.host,
            },
        )
    return EXIT_OK


# ------------------------------------------------------------------ parser


def build_parser() -> _Parser:
    parser = _Parser(prog="favbot", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def common(p):
        p.add_argument("--out", required=True, help="output directory")
        p.add_argument("--seed", type=int, default=None, help="override RNG seed")
        p.add_argument("--calibration", default=None, help="mode table CSV path")

    p = sub.add_parser("sweep", help="characterize every frequency in a range")
    common(p)
    p.set_defaults(seed=0)
    p.add_argument("--lo", type=int, default=1)
    p.add_argument("--hi", type=int, default=100)
    p.add_argument("--duration", type=float, default=30.0, help="seconds per frequency")
    p.add_argument("--noise", action="store_true", help="enable actuation noise")
    p.add_argument(
        "--no-trajectories",
        dest="trajectories",
        action="store_false",
        help="skip per-frequency trajectory CSVs",
    )
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("track", help="run one closed-loop tracking mission")
    common(p)
    p.add_argument("--params", required=True, help="parameter set name (set1/set2) or TOML path")
    p.add_argument("--scenario", default="approach", help="scenario name or TOML path")
    p.add_argument("--noise", choices=("auto", "on", "off"), default="auto")
    p.add_argument("--max-cycles", type=int, default=100)
    p.add_argument("--weights", default=None, help="classifier weights (.favw); default packaged")
    p.set_defaults(func=cmd_track)

    p = sub.add_parser("scout", help="alternate the two scan modes in place")
    common(p)
    p.set_defaults(seed=0)
    p.add_argument("--cycles", type=int, default=10)
    p.add_argument("--dur-58", type=float, default=SCOUT_DURATION_A_S, help="58 kHz segment span")
    p.add_argument("--dur-59", type=float, default=SCOUT_DURATION_B_S, help="59 kHz segment span")
    p.add_argument("--noise", action="store_true", help="enable actuation noise")
    p.set_defaults(func=cmd_scout)

    p = sub.add_parser("train", help="generate a dataset and train the classifier")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--samples", type=int, default=100_000)
    p.add_argument("--epochs", type=int, default=20)
    p.add_argument("--batch-size", type=int, default=64)
    p.add_argument("--lr", type=float, default=1e-3)
    p.add_argument("--val-fraction", type=float, default=0.1)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("serve", help="serve the command and telemetry channels")
    common(p)
    p.add_argument("--scenario", default="approach", help="scenario name or TOML path")
    p.add_argument("--noise", choices=("auto", "on", "off"), default="auto")
    p.add_argument("--max-cycles", type=int, default=100)
    p.add_argument("--weights", default=None, help="classifier weights (.favw); default packaged")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--command-port", type=int, default=7501)
    p.add_argument("--telemetry-port", type=int, default=7502)
    p.add_argument(
        "--gateway-port",
        type=int,
        default=None,
        help="also serve a WebSocket gateway on this port (needs the gateway extra)",
    )
    p.add_argument("--console", default=None, help="built console directory to serve at /")
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as e:
        print(f"usage error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except KeyboardInterrupt:
        return EXIT_OK
    except Exception as e:  # noqa: BLE001  (CLI boundary: report, do not crash)
        print(f"error: {e}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
