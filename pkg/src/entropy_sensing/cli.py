"""Command-line driver.

Subcommands: calibrate, sweep-snr, roc, noise-uncertainty, gamma,
cooperative. Settings resolve in order: command-line flag, then the flat
JSON object given by ``--config``, then the built-in default. Thresholds
come from ``--calibration FILE`` when given, otherwise they are calibrated
inline at ``--pf``.
"""

from __future__ import annotations

import argparse
import json
import math
import re
import sys
from pathlib import Path

from . import __version__
from .calibration import CalibrationRecord, DetectorKind, load_records, save_records
from .cooperative import FusionRule
from .detectors import Thresholds
from .errors import ConfigurationError, SensingError
from .harness import (
    CooperativeSpec,
    DetectorSpec,
    SweepSpec,
    calibrate_detectors,
    gamma_sweep,
    noise_uncertainty_sweep,
    roc_curve,
    sweep_snr,
    write_csv,
)
from .signal import ChannelKind, ChannelModel, Hypothesis, NoiseModel, ScenarioConfig, SignalParams

DEFAULTS = {
    "channel": "rayleigh",
    "frame_len": 1024,
    "symbol_rate": 1e6,
    "sample_rate": 64e6,
    "bins": 15,
    "noise_dbm": -95.0,
    "offset": 0.0,
    "detector": "two-stage",
    "delta0": "0.3",
    "snr": "-10",
    "trials": 10_000,
    "calibration_trials": 100_000,
    "seed": 0,
    "users": 5,
    "rule": "two-bit,and,or,voting",
    "counting_frame_len": None,
    "offsets": "-2:2:1",
    "hypothesis": "H1",
    "workers": None,
}


def parse_grid(text) -> list[float]:
    """``"a:b:step"`` (inclusive) or a comma list."""
    if isinstance(text, (int, float)):
        return [float(text)]
    text = str(text).strip()
    if ":" in text:
        parts = [float(p) for p in text.split(":")]
        if len(parts) != 3 or parts[2] == 0:
            raise ConfigurationError(f"bad grid {text!r}; expected start:stop:step")
        start, stop, step = parts
        count = int(math.floor((stop - start) / step + 1e-9)) + 1
        if count < 1:
            raise ConfigurationError(f"grid {text!r} is empty")
        return [round(start + i * step, 12) for i in range(count)]
    values = [float(p) for p in text.split(",") if p.strip()]
    if not values:
        raise ConfigurationError("empty grid")
    return values


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("scenario")
    g.add_argument("--config", help="flat JSON object with default values for any flag")
    g.add_argument("--channel", choices=[c.value for c in ChannelKind])
    g.add_argument("--frame-len", type=int)
    g.add_argument("--symbol-rate", type=float)
    g.add_argument("--sample-rate", type=float)
    g.add_argument("--bins", type=int)
    g.add_argument("--noise-dbm", type=float, help="nominal noise power in dBm")
    g.add_argument("--offset", type=float, help="noise uncertainty offset in dB")
    g = common.add_argument_group("detection")
    g.add_argument("--detector", help="comma list of kinds, optional ':N' frame-length suffix "
                                      "('cooperative' for calibrate with --rule)")
    g.add_argument("--delta0", help="comma list of gate half-widths for two-stage detectors")
    g.add_argument("--pf", help="target false-alarm probability (comma list for roc)")
    g.add_argument("--calibration", help="calibration record file (JSON)")
    g.add_argument("--calibration-trials", type=int)
    g = common.add_argument_group("run")
    g.add_argument("--snr", help="SNR grid in dB: start:stop:step or comma list")
    g.add_argument("--trials", type=int)
    g.add_argument("--seed", type=int)
    g.add_argument("--workers", type=int)
    g.add_argument("--out", help="output path (CSV, or JSON for calibrate)")

    coop = argparse.ArgumentParser(add_help=False)
    coop.add_argument("--users", type=int)
    coop.add_argument("--rule", help="comma list of two-bit, and, or, voting, <n>-out-of-k")
    coop.add_argument("--counting-frame-len", type=int,
                      help="frame length for counting-rule locals (default 2x frame length)")

    parser = argparse.ArgumentParser(prog="entropy-sensing", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("calibrate", parents=[common, coop], help="write calibration records")
    sub.add_parser("sweep-snr", parents=[common], help="Pd/Pf against SNR")
    sub.add_parser("roc", parents=[common], help="ROC points at one SNR")
    p = sub.add_parser("noise-uncertainty", parents=[common], help="fixed thresholds, varying noise")
    p.add_argument("--offsets", help="noise offsets in dB: start:stop:step or comma list")
    p = sub.add_parser("gamma", parents=[common], help="complexity ratio against SNR")
    p.add_argument("--hypothesis", choices=["H0", "H1"])
    sub.add_parser("cooperative", parents=[common, coop], help="fused Pd/Pf against SNR")
    return parser


def _merge(args: argparse.Namespace) -> dict:
    opts = {k: v for k, v in vars(args).items() if k != "config"}
    if args.config:
        try:
            data = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigurationError(f"cannot read config {args.config}: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigurationError("config file must hold a flat JSON object")
        for key, value in data.items():
            name = key.replace("-", "_")
            if name not in opts and name not in DEFAULTS:
                raise ConfigurationError(f"unknown config key {key!r}")
            if opts.get(name) is None:
                opts[name] = value
    for key, value in DEFAULTS.items():
        if opts.get(key) is None:
            opts[key] = value
    return opts


def _scenario(o: dict) -> ScenarioConfig:
    try:
        return ScenarioConfig(
            signal=SignalParams(float(o["symbol_rate"]), float(o["sample_rate"]), int(o["frame_len"])),
            noise=NoiseModel(float(o["noise_dbm"]), float(o["offset"])),
            channel=ChannelModel(ChannelKind(o["channel"])),
            snr_db=parse_grid(o["snr"])[0],
        )
    except ValueError as exc:
        raise ConfigurationError(str(exc)) from exc


def _detectors(o: dict) -> list[DetectorSpec]:
    out = []
    deltas = parse_grid(o["delta0"])
    for item in str(o["detector"]).split(","):
        item = item.strip()
        if not item:
            continue
        kind, _, n = item.partition(":")
        try:
            kind = DetectorKind(kind)
        except ValueError:
            raise ConfigurationError(f"unknown detector {kind!r}") from None
        frame_len = int(n) if n else None
        if kind is DetectorKind.TWO_STAGE:
            out.extend(DetectorSpec(kind, int(o["bins"]), d, frame_len) for d in deltas)
        else:
            out.append(DetectorSpec(kind, int(o["bins"]), 0.0, frame_len))
    if not out:
        raise ConfigurationError("no detector selected")
    return out


def _cooperative(o: dict) -> list[CooperativeSpec]:
    users = int(o["users"])
    delta0 = parse_grid(o["delta0"])[0]
    counting_len = o["counting_frame_len"] or 2 * int(o["frame_len"])
    specs = []
    for text in str(o["rule"]).split(","):
        rule = FusionRule.parse(text)
        if rule.is_two_bit:
            specs.append(CooperativeSpec(rule, users, "two-stage", int(o["bins"]), delta0))
        else:
            specs.append(CooperativeSpec(rule, users, "one-stage", int(o["bins"]), 0.0,
                                         int(counting_len)))
    return specs


def _record_matches(rec: CalibrationRecord, det, scenario: ScenarioConfig, pf: float | None) -> bool:
    frame_len = det.scenario_for(scenario).frame_len
    if isinstance(det, CooperativeSpec):
        kind = "cooperative"
        rule, users = det.rule.label, det.users
    else:
        kind, rule, users = det.kind.value, "", 1
    return (rec.detector == kind and rec.frame_len == frame_len and rec.bins == det.bins
            and math.isclose(rec.delta0, det.delta0) and rec.rule == rule and rec.users == users
            and (pf is None or math.isclose(rec.target_pf, pf)))


def _thresholds_for(rec: CalibrationRecord) -> Thresholds:
    if rec.detector == DetectorKind.ENERGY.value:
        return Thresholds(energy_lambda=rec.threshold)
    return Thresholds(lam=rec.threshold, delta0=rec.delta0)


def _describe(det) -> str:
    return det.label + (f" rule={det.rule.label} users={det.users}" if isinstance(det, CooperativeSpec) else "")


def _from_records(path, detectors, scenario, pf) -> dict:
    try:
        records = load_records(path)
    except (OSError, json.JSONDecodeError, TypeError) as exc:
        raise ConfigurationError(f"cannot read calibration record {path}: {exc}") from exc
    out = {}
    for det in detectors:
        match = [r for r in records if _record_matches(r, det, scenario, pf)]
        if not match:
            raise ConfigurationError(f"missing calibration record for {_describe(det)} in {path}")
        out[det] = _thresholds_for(match[0])
    return out


def _resolve(o: dict, detectors, scenario) -> tuple[dict, float]:
    """Thresholds from a record file or inline calibration, plus the target Pf."""
    if o["calibration"]:
        pf = float(parse_grid(o["pf"])[0]) if o["pf"] is not None else None
        th = _from_records(o["calibration"], detectors, scenario, pf)
        if pf is None:
            recs = load_records(o["calibration"])
            pf = next(r.target_pf for r in recs if _record_matches(r, detectors[0], scenario, None))
        return th, pf
    if o["pf"] is None:
        raise ConfigurationError(
            "missing calibration record: pass --calibration FILE or --pf for inline calibration")
    pf = parse_grid(o["pf"])[0]
    th = calibrate_detectors(scenario, detectors, pf, int(o["calibration_trials"]),
                             int(o["seed"]), o["workers"])
    return th, pf


def _write_rows(o: dict, rows) -> None:
    if not o["out"]:
        raise ConfigurationError("--out is required")
    try:
        write_csv(o["out"], rows)
    except OSError as exc:
        raise ConfigurationError(f"cannot write {o['out']}: {exc}") from exc


def _cmd_calibrate(o: dict) -> str:
    scenario = _scenario(o)
    if o["pf"] is None:
        raise ConfigurationError("calibrate needs --pf")
    coop = str(o["detector"]).strip() == "cooperative"
    dets = _cooperative(o) if coop else _detectors(o)
    records = []
    for pf in parse_grid(o["pf"]):
        th = calibrate_detectors(scenario, dets, pf, int(o["calibration_trials"]),
                                 int(o["seed"]), o["workers"])
        for det in dets:
            t = th[det]
            coop = isinstance(det, CooperativeSpec)
            records.append(CalibrationRecord(
                detector="cooperative" if coop else det.kind.value,
                frame_len=det.scenario_for(scenario).frame_len, bins=det.bins, delta0=det.delta0,
                target_pf=pf, threshold=t.energy_lambda if t.lam is None else t.lam,
                trials=int(o["calibration_trials"]), seed=int(o["seed"]),
                channel=scenario.channel.kind.value,
                nominal_power_dbmw=scenario.noise.nominal_power_dbmw,
                rule=det.rule.label if coop else "", users=det.users))
    if not o["out"]:
        raise ConfigurationError("--out is required")
    try:
        save_records(o["out"], records)
    except OSError as exc:
        raise ConfigurationError(f"cannot write {o['out']}: {exc}") from exc
    return f"wrote {len(records)} calibration records to {o['out']}"


def _cmd_sweep(o: dict) -> str:
    scenario = _scenario(o)
    dets = _detectors(o)
    th, pf = _resolve(o, dets, scenario)
    spec = SweepSpec(scenario, dets, parse_grid(o["snr"]), pf, int(o["trials"]), int(o["seed"]),
                     thresholds=th, workers=o["workers"])
    rows = sweep_snr(spec)
    _write_rows(o, rows)
    return f"sweep-snr: {len(rows)} rows -> {o['out']}"


def _cmd_roc(o: dict) -> str:
    scenario = _scenario(o)
    dets = _detectors(o)
    if o["calibration"]:
        recs = load_records(o["calibration"])
        grid = sorted({r.target_pf for r in recs if _record_matches(r, dets[0], scenario, None)})
        if o["pf"] is not None:
            grid = parse_grid(o["pf"])
        th = {pf: _from_records(o["calibration"], dets, scenario, pf) for pf in grid}
    elif o["pf"] is not None:
        grid, th = parse_grid(o["pf"]), None
    else:
        raise ConfigurationError(
            "missing calibration record: pass --calibration FILE or --pf for inline calibration")
    if not grid:
        raise ConfigurationError(f"missing calibration record for {_describe(dets[0])}")
    rows = roc_curve(scenario, dets, grid, int(o["trials"]), int(o["seed"]),
                     int(o["calibration_trials"]), o["workers"], th)
    _write_rows(o, rows)
    return f"roc: {len(rows)} rows -> {o['out']}"


def _cmd_noise(o: dict) -> str:
    scenario = _scenario(o).with_offset(0.0)
    dets = _detectors(o)
    th, pf = _resolve(o, dets, scenario)
    rows = noise_uncertainty_sweep(scenario, dets, parse_grid(o["offsets"]), pf, int(o["trials"]),
                                   int(o["seed"]), workers=o["workers"], thresholds=th)
    _write_rows(o, rows)
    return f"noise-uncertainty: {len(rows)} rows -> {o['out']}"


def _cmd_gamma(o: dict) -> str:
    scenario = _scenario(o)
    dets = [d for d in _detectors(o) if d.is_two_stage]
    if not dets:
        raise ConfigurationError("gamma needs a two-stage detector")
    th, pf = _resolve(o, dets, scenario)
    spec = SweepSpec(scenario, dets, parse_grid(o["snr"]), pf, int(o["trials"]), int(o["seed"]),
                     thresholds=th, workers=o["workers"])
    rows = gamma_sweep(spec, Hypothesis[o["hypothesis"]])
    _write_rows(o, rows)
    return f"gamma: {len(rows)} rows -> {o['out']}"


def _cmd_cooperative(o: dict) -> str:
    scenario = _scenario(o)
    dets = _cooperative(o)
    th, pf = _resolve(o, dets, scenario)
    spec = SweepSpec(scenario, dets, parse_grid(o["snr"]), pf, int(o["trials"]), int(o["seed"]),
                     thresholds=th, workers=o["workers"])
    rows = sweep_snr(spec)
    _write_rows(o, rows)
    return f"cooperative: {len(rows)} rows -> {o['out']}"


COMMANDS = {
    "calibrate": _cmd_calibrate,
    "sweep-snr": _cmd_sweep,
    "roc": _cmd_roc,
    "noise-uncertainty": _cmd_noise,
    "gamma": _cmd_gamma,
    "cooperative": _cmd_cooperative,
}


_NEGATIVE = re.compile(r"^-\.?\d")


def _join_negative_values(argv: list[str]) -> list[str]:
    """Rewrite ``--opt -16:-6:1`` as ``--opt=-16:-6:1`` so argparse keeps the value."""
    out: list[str] = []
    i = 0
    while i < len(argv):
        tok = argv[i]
        if (tok.startswith("--") and "=" not in tok and i + 1 < len(argv)
                and _NEGATIVE.match(argv[i + 1])):
            out.append(f"{tok}={argv[i + 1]}")
            i += 2
            continue
        out.append(tok)
        i += 1
    return out


def run_cli(argv=None) -> int:
    parser = _build_parser()
    argv = _join_negative_values(list(sys.argv[1:] if argv is None else argv))
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        o = _merge(args)
        message = COMMANDS[args.command](o)
    except (SensingError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(message)
    return 0


def main() -> None:
    sys.exit(run_cli())
