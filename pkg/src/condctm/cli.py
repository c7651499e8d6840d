"""Command-line interface: ``monitor``, ``simulate`` and ``bands``.

Exit status
-----------
0  finished, null never rejected
3  ``monitor`` rejected the null at some step
2  bad input (unreadable file, non-numeric line, invalid option values)

Number formatting
-----------------
Floats are written as Python's shortest round-trip ``repr``, so every value
parses back to the exact double that was computed.
"""
from __future__ import annotations

import argparse
import configparser
import csv
import json
import math
import sys
from dataclasses import asdict
from pathlib import Path

from . import __version__
from .detector import VARIANTS, Detector, DetectorConfig
from .ecdf import dkw_epsilon
from .sim import SCENARIO_KINDS, Scenario, aggregate_power, compare_variants, stopping_summary

EXIT_OK = 0
EXIT_INPUT_ERROR = 2
EXIT_REJECTED = 3

DEFAULT_SEED = 0
RECORD_FIELDS = ("t", "score", "p_value", "eta", "bet_factor", "wealth", "decision")


class InputError(Exception):
    pass


def parse_score_line(line: str, where: str, lineno: int) -> float | None:
    """Parse one line of a score file; blank lines give ``None``."""
    text = line.strip()
    if not text:
        return None
    try:
        value = float(text)
    except ValueError:
        raise InputError(f"{where}:{lineno}: not a number: {text!r}") from None
    if not math.isfinite(value):
        raise InputError(f"{where}:{lineno}: score must be finite, got {text!r}")
    return value


def iter_scores(lines, where: str):
    for lineno, line in enumerate(lines, start=1):
        value = parse_score_line(line, where, lineno)
        if value is not None:
            yield value


def read_scores(path: str) -> list[float]:
    try:
        with open(path) as fh:
            return list(iter_scores(fh, path))
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None


class RecordWriter:
    def __init__(self, out, fmt: str):
        self.out, self.fmt = out, fmt
        if fmt == "csv":
            self._csv = csv.writer(out, lineterminator="\n")
            self._csv.writerow(RECORD_FIELDS)

    def write(self, record: dict) -> None:
        if self.fmt == "csv":
            self._csv.writerow([record[f] for f in RECORD_FIELDS])
        else:
            self.out.write(json.dumps(record) + "\n")
        self.out.flush()


def cmd_monitor(args) -> int:
    cfg = DetectorConfig(alpha=args.alpha, delta=args.delta, k=args.k, clip=args.clip,
                         variant=args.variant, warmup=args.warmup)
    ref = read_scores(args.ref_file)
    if not ref:
        raise InputError(f"{args.ref_file}: reference file contains no scores")
    det = Detector(ref, cfg, seed=args.seed)

    if args.scores == "-":
        source, where, close = sys.stdin, "<stdin>", False
    else:
        try:
            source, where, close = open(args.scores), args.scores, True
        except OSError as exc:
            raise InputError(f"cannot read {args.scores}: {exc.strerror}") from None

    out = sys.stdout if args.output in (None, "-") else open(args.output, "w", newline="")
    writer = RecordWriter(out, args.format)
    try:
        for x in iter_scores(source, where):
            step = det.step(x)
            writer.write({
                "t": step.t, "score": x, "p_value": step.p_value, "eta": step.eta,
                "bet_factor": step.bet_factor, "wealth": step.wealth, "decision": step.decision,
            })
            if args.stop_on_reject and det.rejected:
                break
    finally:
        if close:
            source.close()
        if out is not sys.stdout:
            out.close()
    return EXIT_REJECTED if det.rejected else EXIT_OK


# --- simulate ---------------------------------------------------------------------

_SCENARIO_KEYS = {
    "null": (),
    "immediate_shift": ("d",),
    "delayed_shift": ("t0", "d"),
    "gradual": ("lambda",),
    "ar1": ("a", "sigma2"),
}
_REQUIRED = ("scenario", "n_ref", "trials", "horizon", "variants")
_OPTIONAL = ("base_seed", "alpha", "delta", "k", "clip", "warmup", "paired",
             "d", "t0", "lambda", "a", "sigma2")


def _int_list(text: str) -> list[int]:
    return [int(v) for v in text.replace(",", " ").split()]


def parse_sim_config(text: str) -> dict:
    """Parse a flat ``key = value`` simulation config into typed values."""
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        cp.read_string("[simulate]\n" + text)
    except configparser.Error as exc:
        raise InputError(f"malformed config: {exc}") from None
    raw = dict(cp["simulate"])
    unknown = set(raw) - set(_REQUIRED) - set(_OPTIONAL)
    if unknown:
        raise InputError(f"unknown config keys: {', '.join(sorted(unknown))}")
    missing = [k for k in _REQUIRED if k not in raw]
    kind = raw.get("scenario")
    if kind is not None and kind not in SCENARIO_KINDS:
        raise InputError(f"unknown scenario kind {kind!r}; expected one of {SCENARIO_KINDS}")
    if kind is not None:
        missing += [k for k in _SCENARIO_KEYS[kind] if k not in raw]
    if missing:
        raise InputError(f"missing required config keys: {', '.join(missing)}")

    try:
        conf = {
            "scenario": kind,
            "n_ref": _int_list(raw["n_ref"]),
            "trials": int(raw["trials"]),
            "horizon": int(raw["horizon"]),
            "variants": [v.strip() for v in raw["variants"].split(",") if v.strip()],
            "base_seed": int(raw.get("base_seed", DEFAULT_SEED)),
            "alpha": float(raw.get("alpha", 0.05)),
            "delta": float(raw.get("delta", 0.1)),
            "k": float(raw.get("k", 1e-6)),
            "clip": float(raw.get("clip", 0.1)),
            "warmup": int(raw.get("warmup", 0)),
            "paired": cp["simulate"].getboolean("paired", True),
            "d": float(raw.get("d", 0.0)),
            "t0": int(raw.get("t0", 1)),
            "lambda": float(raw.get("lambda", 0.0)),
            "a": float(raw.get("a", 0.7)),
            "sigma2": float(raw.get("sigma2", 1.0)),
        }
    except ValueError as exc:
        raise InputError(f"bad config value: {exc}") from None
    if conf["trials"] < 1:
        raise InputError("trials must be >= 1")
    if not conf["n_ref"] or min(conf["n_ref"]) < 1:
        raise InputError("n_ref must list positive sizes")
    bad = [v for v in conf["variants"] if v not in VARIANTS]
    if bad or not conf["variants"]:
        raise InputError(f"variants must be drawn from {VARIANTS}, got {conf['variants']}")
    return conf


def run_simulation(conf: dict, out_dir: Path) -> None:
    scenario = Scenario(conf["scenario"], conf["horizon"], d=conf["d"], t0=conf["t0"],
                        lam=conf["lambda"], a=conf["a"], sigma2=conf["sigma2"])
    cfg = DetectorConfig(alpha=conf["alpha"], delta=conf["delta"], k=conf["k"],
                         clip=conf["clip"], warmup=conf["warmup"])
    out_dir.mkdir(parents=True, exist_ok=True)
    variants = conf["variants"]
    with open(out_dir / "power.csv", "w", newline="") as pf, \
            open(out_dir / "summary.csv", "w", newline="") as sf:
        pw = csv.writer(pf, lineterminator="\n")
        sw = csv.writer(sf, lineterminator="\n")
        pw.writerow(["n_ref", "t", *variants])
        sw.writerow(["n_ref", "variant", "median_tau", "mean_tau", "rejection_rate"])
        for n in conf["n_ref"]:
            results = compare_variants(scenario, cfg, variants, n, conf["trials"],
                                       conf["base_seed"], conf["paired"])
            curves = {v: aggregate_power(r) for v, r in results.items()}
            for i, t in enumerate(curves[variants[0]].times):
                pw.writerow([n, int(t), *(float(curves[v].power[i]) for v in variants)])
            for v in variants:
                s = stopping_summary(results[v])
                sw.writerow([n, v, s["median_tau"], s["mean_tau"], s["rejection_rate"]])
    manifest = {
        "version": __version__,
        "config": conf,
        "scenario": asdict(scenario),
        "detector": {k: v for k, v in asdict(cfg).items() if k != "variant"},
        "seeding": "trial i uses seed base_seed + i",
    }
    (out_dir / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")


def cmd_simulate(args) -> int:
    try:
        text = Path(args.config).read_text()
    except OSError as exc:
        raise InputError(f"cannot read {args.config}: {exc.strerror}") from None
    conf = parse_sim_config(text)
    if args.seed is not None:
        conf["base_seed"] = args.seed
    run_simulation(conf, Path(args.out_dir))
    return EXIT_OK


def cmd_bands(args) -> int:
    print(f"{dkw_epsilon(args.n, args.delta):.6f}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="condctm", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    mon = sub.add_parser("monitor", help="run a detector over a score stream")
    mon.add_argument("ref_file", help="reference scores, one per line")
    mon.add_argument("scores", nargs="?", default="-", help="test scores, one per line ('-' = stdin)")
    mon.add_argument("--alpha", type=float, default=0.05)
    mon.add_argument("--delta", type=float, default=0.1)
    mon.add_argument("--k", type=float, default=1e-6)
    mon.add_argument("--clip", type=float, default=0.1)
    mon.add_argument("--warmup", type=int, default=50)
    mon.add_argument("--variant", choices=VARIANTS, default="conditional")
    mon.add_argument("--seed", type=int, default=DEFAULT_SEED)
    mon.add_argument("--format", choices=("csv", "jsonl"), default="csv")
    mon.add_argument("--stop-on-reject", action="store_true")
    mon.add_argument("--output", "-o", help="write records here instead of stdout")
    mon.set_defaults(func=cmd_monitor)

    sim = sub.add_parser("simulate", help="run a synthetic experiment from a config file")
    sim.add_argument("config")
    sim.add_argument("--out-dir", default="results")
    sim.add_argument("--seed", type=int, default=None, help="override base_seed from the config")
    sim.set_defaults(func=cmd_simulate)

    bands = sub.add_parser("bands", help="print the DKW half-width")
    bands.add_argument("--n", type=int, required=True)
    bands.add_argument("--delta", type=float, required=True)
    bands.set_defaults(func=cmd_bands)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (InputError, ValueError) as exc:
        print(f"condctm: error: {exc}", file=sys.stderr)
        return EXIT_INPUT_ERROR


if __name__ == "__main__":
    sys.exit(main())
