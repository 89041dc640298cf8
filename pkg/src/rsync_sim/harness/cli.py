"""Command-line entry point: ``rsync-sim <command> ...``.

Exit status is 0 on success, 1 for invalid input (bad arguments, scenario
or track content) and 2 when a file cannot be read or written.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import asdict

from ..estimation import fit_all
from ..motion import AXES, KINDS, SINUSOIDAL, RhythmicMotion
from ..sensing import SensorModel, observe, read_track, write_track
from .calibration import CalibrationTargets, calibrate
from .config import SweepSpec, parse_value, read_scenario
from .reports import CSV, JSON, results_csv, results_json, sweep_csv
from .runner import aggregate, run_scenario, run_sweep

EXIT_OK, EXIT_INVALID, EXIT_IO = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _floats(text: str, n: int | None = None) -> list[float]:
    try:
        vals = [float(v) for v in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None
    if n is not None and len(vals) != n:
        raise argparse.ArgumentTypeError(f"expected {n} values, got {len(vals)}")
    return vals


def _amplitudes(text):
    return _floats(text, 6)


def _emit(text: str, path):
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", newline="") as fh:
            fh.write(text)


def _summary(rows) -> str:
    lines = [f"{'policy':<14}{'n':>4}{'finish':>8}{'err_mean':>10}{'err_med':>10}{'err_max':>10}{'dur_mean':>10}"]
    for a in rows:
        lines.append(f"{a.policy:<14}{a.n_trials:>4}{a.finish_rate:>8.2f}{a.error_mean:>10.3f}"
                     f"{a.error_median:>10.3f}{a.error_max:>10.3f}{a.duration_mean:>10.2f}")
    return "\n".join(lines) + "\n"


def cmd_simulate(args) -> int:
    sc = read_scenario(args.scenario)
    reps = run_scenario(sc)
    text = results_json(reps, sc) if args.format == JSON else results_csv(reps)
    _emit(text, args.out)
    sys.stderr.write(_summary(aggregate(reps)))
    return EXIT_OK


def cmd_sweep(args) -> int:
    sc = read_scenario(args.scenario)
    values = tuple(parse_value(v) for v in args.values.split(","))
    rep = run_sweep(SweepSpec(args.param, values, sc))
    _emit(sweep_csv(rep), args.out)
    return EXIT_OK


def cmd_fit(args) -> int:
    track = read_track(args.track)
    fits = fit_all(track)
    print(f"{'axis':<5}{'alpha':>16}{'omega':>16}{'freq_hz':>16}{'phi':>16}{'offset':>16}{'rmse':>14}  status")
    for name, f in zip(AXES, fits):
        freq = f.frequency if f.omega > 0 else 0.0
        print(f"{name:<5}{f.alpha:>16.9g}{f.omega:>16.9g}{freq:>16.9g}{f.phi:>16.9g}{f.offset:>16.9g}"
              f"{f.rmse:>14.6g}  {f.status}")
    return EXIT_OK


def cmd_gen_track(args) -> int:
    m = RhythmicMotion.from_amplitudes(args.amplitudes, args.frequency, args.phase, args.kind)
    s = SensorModel(fps=args.fps, duration=args.duration, sigma_trans=args.sigma_trans,
                    sigma_rot=args.sigma_rot, seed=args.seed)
    write_track(observe(m, s), args.out)
    return EXIT_OK


def cmd_calibrate(args) -> int:
    sc = read_scenario(args.scenario)
    targets = CalibrationTargets(args.freq_rmse, args.phase_rmse, args.latency_spread)
    res = calibrate(sc, targets, n_seeds=args.seeds)
    _emit(json.dumps(asdict(res), indent=2) + "\n", args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="rsync-sim", description="Synchronisation policies on a rhythmically moving platform.")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("simulate", help="run every trial of one scenario file")
    s.add_argument("scenario")
    s.add_argument("-o", "--out", help="results file (default: stdout)")
    s.add_argument("--format", choices=(CSV, JSON), default=CSV)
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("sweep", help="re-run a scenario over values of one parameter")
    s.add_argument("scenario")
    s.add_argument("--param", required=True, help="dotted path, e.g. motion.frequency")
    s.add_argument("--values", required=True, help="comma-separated values")
    s.add_argument("-o", "--out", help="sweep CSV (default: stdout)")
    s.set_defaults(func=cmd_sweep)

    s = sub.add_parser("fit", help="fit per-axis sinusoids to a track CSV")
    s.add_argument("track")
    s.set_defaults(func=cmd_fit)

    s = sub.add_parser("gen-track", help="write a synthetic track CSV")
    s.add_argument("-o", "--out", required=True)
    s.add_argument("--amplitudes", type=_amplitudes, default=[25.0, 0, 0, 0, 0, 0],
                   help="six comma-separated amplitudes (mm, deg)")
    s.add_argument("--frequency", type=float, default=0.2)
    s.add_argument("--phase", type=float, default=0.0)
    s.add_argument("--kind", choices=KINDS, default=SINUSOIDAL)
    s.add_argument("--fps", type=float, default=15.0)
    s.add_argument("--duration", type=float, default=60.0)
    s.add_argument("--sigma-trans", type=float, default=0.0)
    s.add_argument("--sigma-rot", type=float, default=0.0)
    s.add_argument("--seed", type=int, default=0)
    s.set_defaults(func=cmd_gen_track)

    s = sub.add_parser("calibrate", help="tune noise magnitudes to target fit and latency statistics")
    s.add_argument("scenario")
    s.add_argument("--seeds", type=int, default=10)
    s.add_argument("--freq-rmse", type=float, default=0.03)
    s.add_argument("--phase-rmse", type=float, default=0.22)
    s.add_argument("--latency-spread", type=float, default=0.576)
    s.add_argument("-o", "--out", help="result JSON (default: stdout)")
    s.set_defaults(func=cmd_calibrate)
    return p


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_INVALID
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
