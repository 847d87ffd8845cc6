"""Command-line runner: configuration, seeding, execution and deterministic output.

``hbtsim --preset fig4|fig5|fig6`` reproduces the published scan regimes end
to end (classical, time-delay, boson); ``--preset efficiency`` runs the
single-detector efficiency experiment.  Every flag default can be overridden
by an ``HBTSIM_<FLAG>`` environment variable or a flat key=value config file.
Outputs: ``scan.csv``, ``summary.json`` and ``manifest.json`` in ``--out``.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__, analysis, oracle
from .core import DelayConfig
from .experiment import Geometry, RunConfig, run_efficiency, run_scan

PRESETS = {
    "fig4": {},
    "fig5": {"delay": True},
    "fig6": {"delay": True, "routing": "boson"},
    "efficiency": {},
}

FMT = "%.17g"   # fixed decimal format for bit-exact regression runs


def _env(name: str, default):
    return os.environ.get("HBTSIM_" + name.upper().replace("-", "_"), default)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hbtsim",
                                description="event-by-event two-photon interference simulator")
    p.add_argument("--preset", choices=sorted(PRESETS), default=_env("preset", "fig4"))
    p.add_argument("--config", type=Path, default=None,
                   help="flat key=value file; keys are flag names")
    p.add_argument("--n-tot", type=int, default=_env("n-tot", 2_000_000))
    p.add_argument("--n-f", type=int, default=_env("n-f", 50))
    p.add_argument("--gamma", type=float, default=_env("gamma", 0.99))
    p.add_argument("--ports", type=int, default=_env("ports", 2))
    p.add_argument("--big-x", type=float, default=_env("big-x", 100_000.0),
                   help="screen distance X in units c/f")
    p.add_argument("--d", type=float, default=_env("d", 2_000.0),
                   help="source separation in units c/f")
    p.add_argument("--y1-min", type=float, default=_env("y1-min", -100.0))
    p.add_argument("--y1-max", type=float, default=_env("y1-max", 100.0))
    p.add_argument("--y1-steps", type=int, default=_env("y1-steps", 41))
    p.add_argument("--routing", choices=["classical", "boson"], default=None)
    p.add_argument("--delay", action="store_true", default=None,
                   help="enable the stochastic click-delay model")
    p.add_argument("--tmax", type=float, default=_env("tmax", 1000.0))
    p.add_argument("--window", type=float, default=_env("window", 1.0))
    p.add_argument("--h", type=float, default=_env("h", 8.0))
    p.add_argument("--spectral", choices=["mono", "pdc"], default=_env("spectral", "mono"))
    p.add_argument("--f0", type=float, default=_env("f0", 2.0))
    p.add_argument("--linewidth", type=float, default=_env("linewidth", 0.1))
    p.add_argument("--seed", type=int, default=_env("seed", 12345))
    p.add_argument("--jobs", type=int, default=_env("jobs", 1))
    p.add_argument("--out", type=Path, default=Path(_env("out", ".")))
    p.add_argument("--efficiency-messages", type=int,
                   default=_env("efficiency-messages", 100_000))
    return p


def _apply_config_file(parser: argparse.ArgumentParser, argv: list[str]) -> list[str]:
    """Turn key=value lines of --config into parser defaults (flags still win)."""
    probe = argparse.ArgumentParser(add_help=False)
    probe.add_argument("--config", type=Path, default=None)
    known, _ = probe.parse_known_args(argv)
    if known.config is None:
        return argv
    try:
        text = known.config.read_text()
    except OSError as exc:
        parser.error(f"cannot read config file: {exc}")
    overrides = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            parser.error(f"{known.config}:{lineno}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        overrides[key.replace("-", "_")] = value
    defaults = {}
    for action in parser._actions:
        if action.dest in overrides:
            raw = overrides.pop(action.dest)
            defaults[action.dest] = raw if action.type is None else action.type(raw)
    if overrides:
        parser.error(f"unknown config keys: {', '.join(sorted(overrides))}")
    parser.set_defaults(**defaults)
    return argv


def config_from_args(args) -> tuple[RunConfig, Geometry, np.ndarray]:
    preset = PRESETS[args.preset]
    routing = args.routing if args.routing is not None else preset.get("routing", "classical")
    delay_on = args.delay if args.delay is not None else preset.get("delay", False)
    delay = DelayConfig(t_max=float(args.tmax), h=float(args.h),
                        window=float(args.window)) if delay_on else None
    cfg = RunConfig(n_tot=int(args.n_tot), n_f=int(args.n_f), gamma=float(args.gamma),
                    ports=int(args.ports), routing=routing, delay=delay,
                    spectral=args.spectral, f0=float(args.f0),
                    linewidth=float(args.linewidth), seed=int(args.seed))
    g = Geometry(screen_distance=float(args.big_x), source_separation=float(args.d))
    if int(args.y1_steps) < 1:
        raise ValueError("y1-steps must be positive")
    y1 = np.linspace(float(args.y1_min), float(args.y1_max), int(args.y1_steps))
    return cfg, g, y1


def _config_dict(cfg: RunConfig, g: Geometry) -> dict:
    d = dataclasses.asdict(cfg)
    if cfg.delay is not None:
        d["delay"] = dataclasses.asdict(cfg.delay)
    d["geometry"] = dataclasses.asdict(g)
    return d


def write_scan_csv(path: Path, scan, cfg: RunConfig) -> None:
    cols = ["y1", "n_tot", "n_count_d0", "n_count_d1", "n_coincidence",
            "oracle_coincidence", "delta_t"]
    lines = [",".join(cols)]
    for p in scan:
        pred = float(oracle.predicted_coincidence(p.delta_t, p.n_tot, cfg.frequency))
        lines.append(",".join([
            FMT % p.y1, str(p.n_tot), str(p.n_count_d0), str(p.n_count_d1),
            str(p.n_coincidence), FMT % pred, FMT % p.delta_t,
        ]))
    path.write_text("\n".join(lines) + "\n")


def _fit_dict(fit: analysis.FitResult) -> dict:
    return {
        "offset": fit.offset, "contrast": fit.contrast,
        "offset_stderr": fit.offset_stderr, "contrast_stderr": fit.contrast_stderr,
        "cosine_coeff": fit.cosine_coeff,
        "cosine_coeff_stderr": fit.cosine_coeff_stderr,
        "residual_norm": fit.residual_norm,
    }


def run_main(args) -> int:
    cfg, g, y1 = config_from_args(args)
    out: Path = args.out
    out.mkdir(parents=True, exist_ok=True)
    started = time.time()

    if args.preset == "efficiency":
        eff = run_efficiency(int(args.efficiency_messages), gamma=cfg.gamma,
                             ports=cfg.ports, seed=cfg.seed)
        summary = {"preset": "efficiency", "n_messages": int(args.efficiency_messages),
                   "efficiency": eff}
        (out / "summary.json").write_text(json.dumps(summary, indent=2) + "\n")
        manifest = {"version": __version__, "config": _config_dict(cfg, g),
                    "preset": args.preset, "wall_clock_s": time.time() - started,
                    "summary": summary}
        (out / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")
        print(f"efficiency = {eff:.5f}")
        return 0

    scan = run_scan(g, cfg, y1, jobs=int(args.jobs))
    write_scan_csv(out / "scan.csv", scan, cfg)

    fit_c = analysis.fit_scan(scan, cfg.frequency, "coincidence")
    fit_d0 = analysis.fit_scan(scan, cfg.frequency, "d0")
    fit_d1 = analysis.fit_scan(scan, cfg.frequency, "d1")
    raw_v = analysis.visibility_from_counts([p.n_coincidence for p in scan])
    dts = np.array([p.delta_t for p in scan])
    summary = {
        "preset": args.preset,
        "fit": {"coincidence": _fit_dict(fit_c), "singles_d0": _fit_dict(fit_d0),
                "singles_d1": _fit_dict(fit_d1)},
        "visibility_fit": fit_c.visibility,
        "visibility_raw": raw_v,
        "oracle": {
            "visibility_classical": oracle.visibility(oracle.correlation(dts, "classical")),
            "visibility_boson": oracle.visibility(oracle.correlation(dts, "boson")),
        },
    }
    (out / "summary.json").write_text(json.dumps(summary, indent=2) + "\n")

    manifest = {
        "version": __version__,
        "preset": args.preset,
        "config": _config_dict(cfg, g),
        "y1": [float(v) for v in y1],
        "wall_clock_s": time.time() - started,
        "points": [dataclasses.asdict(p) for p in scan],
        "summary": summary,
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")
    print(f"{args.preset}: a = {fit_c.offset:.4f}, b = {fit_c.contrast:.4f}, "
          f"raw V = {raw_v:.4f}  ({len(scan)} points, n_tot = {cfg.n_tot})")
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    _apply_config_file(parser, argv)
    args = parser.parse_args(argv)          # exits 2 on bad flags
    try:
        return run_main(args)
    except (ValueError, np.linalg.LinAlgError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
