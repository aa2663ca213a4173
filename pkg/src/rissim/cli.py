"""Command-line front end.

Subcommands: ``run``, ``sweep``, ``theory``, ``calibrate`` and ``emit-defaults``.
Exit codes: 0 on success, 2 on configuration errors, 3 on runtime errors.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
import time
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from . import __version__
from .config import ConfigError, config_hash, emit_defaults, parse_config, with_overrides
from .engine import CampaignResult, SimConfig, Strategy, run_campaign
from .metrics import EmpiricalCdf
from .theory import RateInputs, theory_table

log = logging.getLogger("rissim")

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 2, 3
OUT_ENV = "RISSIM_OUT"
METRICS = ("coupling_loss", "sinr", "spectral_efficiency")


class RuntimeFailure(RuntimeError):
    pass


@dataclass
class RunManifest:
    config_hash: str
    seed: int
    version: str
    wall_time_s: float
    files: dict[str, list[str]]

    def to_json(self) -> str:
        return json.dumps(self.__dict__, sort_keys=True, indent=2) + "\n"


def _int_list(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _str_list(text: str) -> list[str]:
    return [t.strip() for t in text.split(",") if t.strip()]


def _sizes(text: str) -> list[tuple[int, int]]:
    out = []
    for tok in _str_list(text):
        try:
            a, b = tok.lower().split("x")
            out.append((int(a), int(b)))
        except ValueError:
            raise argparse.ArgumentTypeError(f"expected sizes like 8x8,16x16, got {tok!r}") from None
    return out


def write_cdf_csv(cdf: EmpiricalCdf, path: Path) -> None:
    lines = ["value,cdf"]
    lines += [f"{v:.9g},{p:.9g}" for v, p in zip(cdf.sorted_values, cdf.probabilities)]
    _write_text(path, "\n".join(lines) + "\n")


def _write_text(path: Path, text: str) -> None:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise RuntimeFailure(f"cannot write {path}: {exc.strerror}") from None


def _median_deltas(summary: dict, baseline: str) -> dict:
    base = summary[baseline]
    return {
        label: {m: stats[m]["p50"] - base[m]["p50"] for m in METRICS}
        for label, stats in summary.items()
        if label != baseline
    }


def write_results(results: list[tuple[str, CampaignResult]], out_dir, wall_time: float) -> RunManifest:
    """Write per-strategy CDF files plus ``summary.json`` and ``manifest.json``.

    ``results`` pairs an optional label prefix with each campaign. Every file
    except the manifest (which records wall time) is byte-deterministic.
    """
    out = Path(out_dir)
    files: dict[str, list[str]] = {}
    summary: dict = {}
    first = results[0][1]
    for prefix, res in results:
        for label in res.metrics:
            name = f"{prefix}{label}"
            paths = []
            for metric, cdf in res.cdfs(label).items():
                p = out / name / f"{metric}.csv"
                write_cdf_csv(cdf, p)
                paths.append(p.relative_to(out).as_posix())
            files[name] = paths
            summary[name] = res.summary()[label]
    labels = list(summary)
    baseline = "no_ris" if "no_ris" in summary else labels[0]
    doc = {
        "version": __version__,
        "seed": first.config.seed,
        "drops": first.config.drops,
        "config": first.config.as_dict(),
        "strategies": summary,
        "baseline": baseline,
        "median_deltas": _median_deltas(summary, baseline),
    }
    _write_text(out / "summary.json", json.dumps(doc, sort_keys=True, indent=2) + "\n")
    manifest = RunManifest(config_hash(first.config), first.config.seed, __version__, round(wall_time, 3), files)
    _write_text(out / "manifest.json", manifest.to_json())
    return manifest


def _base_config(args) -> SimConfig:
    cfg = parse_config(args.config) if args.config else SimConfig()
    return with_overrides(cfg, seed=args.seed, drops=args.drops, beams=args.beams)


def _strategies(args, cfg: SimConfig) -> list[Strategy]:
    names = args.strategy or [cfg.strategy]
    levels = args.levels or ([cfg.levels] if cfg.levels else [])
    out: list[Strategy] = []
    for name in names:
        s = Strategy.parse(name, 1, cfg.beams)  # validates the name
        if s.kind == "discrete" and not any(ch.isdigit() for ch in name):
            if not levels:
                raise ConfigError("strategy 'discrete' needs a level count", "strategy.levels")
            out.extend(Strategy("discrete", d) for d in levels)
        else:
            out.append(Strategy.parse(name, None, cfg.beams))
    # drop duplicates, keep order
    seen, uniq = set(), []
    for s in out:
        if s.label not in seen:
            seen.add(s.label)
            uniq.append(s)
    return uniq


def _out_dir(args) -> Path:
    return Path(args.out or os.environ.get(OUT_ENV) or "out")


def cmd_run(args) -> int:
    cfg = _base_config(args)
    strategies = _strategies(args, cfg)
    t0 = time.perf_counter()
    res = run_campaign(cfg, strategies, threads=args.threads)
    man = write_results([("", res)], _out_dir(args), time.perf_counter() - t0)
    for label in res.metrics:
        s = res.summary()[label]
        print(f"{label}: median CL {s['coupling_loss']['p50']:.2f} dB, SINR {s['sinr']['p50']:.2f} dB, "
              f"SE {s['spectral_efficiency']['p50']:.3f} b/s/Hz")
    print(f"wrote {_out_dir(args)} (config {man.config_hash[:12]})")
    return EXIT_OK


def cmd_sweep(args) -> int:
    cfg = _base_config(args)
    strategies = _strategies(args, cfg)
    sizes = args.ris_sizes or [None]
    t0 = time.perf_counter()
    results = []
    for size in sizes:
        c = cfg if size is None else replace(cfg, ris_horizontal=size[0], ris_vertical=size[1])
        prefix = "" if size is None else f"n{size[0] * size[1]}_"
        results.append((prefix, run_campaign(c, strategies, threads=args.threads)))
    write_results(results, _out_dir(args), time.perf_counter() - t0)
    doc = json.loads((_out_dir(args) / "summary.json").read_text(encoding="utf-8"))
    print(f"baseline {doc['baseline']}")
    for label, d in doc["median_deltas"].items():
        print(f"{label}: dCL {d['coupling_loss']:+.2f} dB, dSINR {d['sinr']:+.2f} dB, "
              f"dSE {d['spectral_efficiency']:+.3f} b/s/Hz")
    return EXIT_OK


def cmd_calibrate(args) -> int:
    cfg = _base_config(args)
    t0 = time.perf_counter()
    res = run_campaign(cfg, [Strategy("no_ris")], threads=args.threads)
    out = _out_dir(args)
    write_results([("calibration_", res)], out, time.perf_counter() - t0)
    for name, cdf in res.cdfs("no_ris").items():
        if name == "spectral_efficiency":
            continue
        p5, p50, p95 = cdf.percentile([5, 50, 95])
        print(f"{name}: p5 {p5:.2f}  p50 {p50:.2f}  p95 {p95:.2f}")
    return EXIT_OK


def cmd_theory(args) -> int:
    n = args.n_elements
    snr = 10.0 ** (args.snr_db / 10.0)
    inputs = RateInputs(args.direct, np.full(n, args.cascade), 1.0, 1.0 / snr)
    print(f"{'D':>6} {'sinc':>8} {'rate':>10}")
    for d, s, r in theory_table(args.levels, inputs, n):
        print(f"{d:>6d} {s:>8.4f} {r:>10.4f}")
    return EXIT_OK


def cmd_emit_defaults(args) -> int:
    text = emit_defaults()
    if args.out:
        _write_text(Path(args.out), text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _positive(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="rissim", description="RIS-assisted multi-cell Monte-Carlo simulator")
    p.add_argument("--version", action="version", version=__version__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def campaign_args(sp):
        sp.add_argument("--config", help="INI configuration file")
        sp.add_argument("--seed", type=int)
        sp.add_argument("--drops", type=_positive)
        sp.add_argument("--out", help=f"output directory (default ${OUT_ENV} or ./out)")
        sp.add_argument("--strategy", type=_str_list, help="comma-separated strategies")
        sp.add_argument("--levels", type=_int_list, help="comma-separated phase level counts for discrete")
        sp.add_argument("--beams", type=_positive)
        sp.add_argument("--threads", type=_positive, default=1)

    campaign_args(sp := sub.add_parser("run", help="run one campaign"))
    sp.set_defaults(func=cmd_run)
    campaign_args(sp := sub.add_parser("sweep", help="run several strategies / RIS sizes"))
    sp.add_argument("--ris-sizes", type=_sizes, help="RIS panel sizes such as 8x8,16x16")
    sp.set_defaults(func=cmd_sweep)
    campaign_args(sp := sub.add_parser("calibrate", help="no-RIS coupling loss and SINR CDFs"))
    sp.set_defaults(func=cmd_calibrate)

    sp = sub.add_parser("theory", help="closed-form discrete-phase rate table")
    sp.add_argument("--levels", type=_int_list, default=[1, 2, 4, 8, 16])
    sp.add_argument("--n-elements", type=_positive, default=256)
    sp.add_argument("--direct", type=float, default=1.0, help="|H| amplitude")
    sp.add_argument("--cascade", type=float, default=0.01, help="mean cascade amplitude E|r|")
    sp.add_argument("--snr-db", type=float, default=0.0, help="P/noise in dB")
    sp.set_defaults(func=cmd_theory)

    sp = sub.add_parser("emit-defaults", help="print the default configuration")
    sp.add_argument("--out", help="write to this file instead of stdout")
    sp.set_defaults(func=cmd_emit_defaults)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (RuntimeFailure, ValueError, ArithmeticError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
