"""Command-line front end: subcommand dispatch, manifests, selftest.

Exit codes: 0 success, 1 config error, 2 numerical failure, 3 selftest
failure. Every run writes exactly one JSON manifest recording the full
scenario, its hash, seed, scale, subcommand, output paths, and wall-clock
duration. The default output directory comes from ``RISMIMO_OUT_DIR``
(falling back to ``./rismimo-out``).
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
from dataclasses import asdict, dataclass, replace
from pathlib import Path

import numpy as np

from . import experiments
from .channel import dump_channel_csv, make_channel_pair
from .config import ScenarioConfig, config_hash, parse_config
from .errors import ConfigError, SimulationError
from .experiments import (
    ALL_SCHEMES,
    SCHEME_DFOC,
    SCHEME_DNUM,
    SCHEME_ND,
    evaluate_point,
    write_csv,
    write_ccdf_csv,
)
from .geometry import place_topology
from .ris import NumericalOptions, nd_ris_optimal, save_ris_config
from .spectrum import closed_form_capacity, effective_rank, mutual_information, water_filling

__version__ = "0.1.0"

ENV_OUT_DIR = "RISMIMO_OUT_DIR"

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_NUMERICAL = 2
EXIT_SELFTEST = 3


@dataclass
class RunManifest:
    subcommand: str
    config_hash: str
    seed: int
    scale: float
    outputs: list[str]
    duration_s: float
    version: str
    scenario: dict


def _write_manifest(out_dir: Path, name: str, manifest: RunManifest) -> Path:
    path = out_dir / f"{name}_manifest.json"
    path.write_text(json.dumps(asdict(manifest), indent=2, sort_keys=True) + "\n")
    return path


def _scenario_dict(cfg: ScenarioConfig) -> dict:
    d = asdict(cfg)
    for key in ("focus_tx", "focus_rx"):
        if d[key] is not None:
            d[key] = [float(v) for v in d[key]]
    return d


def _load_config(args) -> ScenarioConfig:
    cfg = parse_config(args.config) if args.config else ScenarioConfig()
    if args.scale != 1.0:
        cfg = cfg.scaled(args.scale)
    cfg.validate()
    return cfg


def _parse_floats(raw: str, flag: str) -> list[float]:
    try:
        return [float(v) for v in raw.split(",") if v.strip() != ""]
    except ValueError:
        raise ConfigError(f"{flag}: expected comma-separated numbers, got {raw!r}") from None


def _parse_schemes(raw: str) -> frozenset:
    schemes = frozenset(s.strip() for s in raw.split(",") if s.strip())
    unknown = schemes - ALL_SCHEMES
    if unknown:
        raise ConfigError(f"--schemes: unknown scheme(s) {sorted(unknown)}; pick from nd,dfoc,dnum")
    if not schemes:
        raise ConfigError("--schemes: at least one scheme required")
    return schemes


def _out_dir(args) -> Path:
    out = args.out_dir or os.environ.get(ENV_OUT_DIR) or "rismimo-out"
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _linspace(lo: float, hi: float, n: int) -> list[float]:
    return [float(v) for v in np.linspace(lo, hi, n)]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rismimo",
        description="Near-field RIS-aided MIMO link simulator",
    )
    parser.add_argument("--version", action="version", version=f"rismimo {__version__}")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def common(p, default_schemes):
        p.add_argument("--config", help="scenario config file (key = value text)")
        p.add_argument("--seed", type=int, default=0, help="RNG seed recorded in the manifest")
        p.add_argument("--scale", type=float, default=1.0, help="panel axis-count scale factor")
        p.add_argument("--workers", type=int, default=None, help="worker count (default: all cores)")
        p.add_argument("--out-dir", default=None, help=f"output directory (default ${ENV_OUT_DIR} or ./rismimo-out)")
        p.add_argument("--schemes", default=default_schemes, help="comma list from nd,dfoc,dnum")

    p = sub.add_parser("paraxial", help="rates vs distance in the aligned deployment")
    common(p, "nd,dfoc,dnum")
    p.add_argument("--d-values", default="4,5,6,7,8", help="comma list of distances in meters")

    p = sub.add_parser("rate-map", help="rate-ratio map over receiver positions")
    common(p, "nd,dfoc")
    p.add_argument("--tx-center", default="2.0,13.0,0.0", help="transmitter mid-point x,y,z")
    p.add_argument("--x-range", default="-10,10", help="map x extent lo,hi in meters")
    p.add_argument("--y-range", default="0,15", help="map y extent lo,hi in meters")
    p.add_argument("--grid", default="20x20", help="map resolution COLSxROWS, e.g. 20x20")
    p.add_argument("--guard", type=float, default=experiments.DEFAULT_MAP_GUARD,
                   help="skip receivers closer than this to the surface (m)")

    p = sub.add_parser("er-map", help="effective-rank map over receiver positions")
    common(p, "nd,dfoc")
    p.add_argument("--tx-center", default="2.0,13.0,0.0")
    p.add_argument("--x-range", default="-10,10")
    p.add_argument("--y-range", default="0,15")
    p.add_argument("--grid", default="20x20")
    p.add_argument("--guard", type=float, default=experiments.DEFAULT_MAP_GUARD)

    p = sub.add_parser("angle-sweep", help="rates vs symmetric angle theta_F = -theta_B")
    common(p, "nd,dfoc,dnum")
    p.add_argument("--theta-max", type=float, default=math.pi / 2 - 0.05)
    p.add_argument("--theta-count", type=int, default=16)

    p = sub.add_parser("dist-sweep", help="rates vs surface-receiver distance")
    common(p, "nd,dfoc,dnum")
    p.add_argument("--d-b-values", default="1,1.5,2,2.5,3,4,5,6,8,10")

    p = sub.add_parser("rot-focus-sweep", help="rates vs receiver rotation and focus displacement")
    common(p, "nd,dfoc,dnum")
    p.add_argument("--psi-b-values", default=f"{-math.pi / 8},{math.pi / 8},{math.pi / 4}")
    p.add_argument("--delta-count", type=int, default=11, help="focus displacements on [0, 1] m")

    p = sub.add_parser("single-point", help="evaluate one scenario and print the summary")
    common(p, "nd,dfoc,dnum")
    p.add_argument("--dump-channels", action="store_true", help="write h_forward/h_backward CSV dumps")
    p.add_argument("--save-ris", action="store_true", help="write the produced surface configurations")

    p = sub.add_parser("selftest", help="run the built-in invariant suite")
    common(p, "nd,dfoc,dnum")

    return parser


def _sweep_template(cfg: ScenarioConfig, subcommand: str) -> ScenarioConfig:
    if subcommand == "paraxial":
        return replace(cfg, theta_f=0.0, theta_b=math.pi, psi_f=0.0, psi_b=0.0)
    if subcommand == "dist-sweep":
        return replace(cfg, theta_f=math.pi / 8, theta_b=3 * math.pi / 8)
    if subcommand == "rot-focus-sweep":
        return replace(cfg, theta_f=math.pi / 4, theta_b=math.pi / 3, d_f=2.0, d_b=3.5, psi_f=0.0)
    return cfg


def _run_sweep(args) -> tuple[list[Path], ScenarioConfig]:
    cfg = _load_config(args)
    schemes = _parse_schemes(args.schemes)
    template = _sweep_template(cfg, args.subcommand)
    out_dir = _out_dir(args)
    name = args.subcommand.replace("-", "_")
    num_opts = NumericalOptions(seed=args.seed)

    if args.subcommand == "paraxial":
        result = experiments.paraxial_sweep(
            template, _parse_floats(args.d_values, "--d-values"), schemes, num_opts, args.workers
        )
    elif args.subcommand in ("rate-map", "er-map"):
        tx_center = _parse_floats(args.tx_center, "--tx-center")
        if len(tx_center) != 3:
            raise ConfigError(f"--tx-center: expected x,y,z, got {args.tx_center!r}")
        x_lo, x_hi = _parse_floats(args.x_range, "--x-range")
        y_lo, y_hi = _parse_floats(args.y_range, "--y-range")
        try:
            nx, ny = (int(v) for v in args.grid.lower().split("x"))
        except ValueError:
            raise ConfigError(f"--grid: expected COLSxROWS, got {args.grid!r}") from None
        result = experiments.rate_map(
            template,
            tx_center,
            _linspace(x_lo, x_hi, nx),
            _linspace(y_lo, y_hi, ny),
            schemes,
            num_opts,
            args.guard,
            args.workers,
        )
    elif args.subcommand == "angle-sweep":
        thetas = _linspace(0.0, args.theta_max, args.theta_count)
        result = experiments.angle_sweep(template, thetas, schemes, num_opts, args.workers)
    elif args.subcommand == "dist-sweep":
        result = experiments.distance_sweep(
            template, _parse_floats(args.d_b_values, "--d-b-values"), schemes, num_opts, args.workers
        )
    elif args.subcommand == "rot-focus-sweep":
        psis = _parse_floats(args.psi_b_values, "--psi-b-values")
        deltas = _linspace(0.0, 1.0, args.delta_count)
        result = experiments.rotation_focus_sweep(
            template, psis, deltas, schemes, num_opts, args.workers
        )
    else:  # pragma: no cover - guarded by argparse
        raise ConfigError(f"unknown sweep {args.subcommand}")

    csv_path = out_dir / f"{name}.csv"
    write_csv(result, csv_path)
    outputs = [csv_path]

    if args.subcommand == "rate-map":
        ratios = result.ratios()
        if ratios.size:
            ccdf_path = out_dir / f"{name}_ratio_ccdf.csv"
            write_ccdf_csv(ratios, ccdf_path, label="ratio")
            outputs.append(ccdf_path)
        for col, tag in (("rate_nd", "rate_nd"), ("rate_dfoc", "rate_dfoc")):
            vals = result.column(col)
            if vals.size:
                path = out_dir / f"{name}_{tag}_ccdf.csv"
                write_ccdf_csv(vals, path, label=tag)
                outputs.append(path)
    if args.subcommand == "er-map":
        for col, tag in (("er_nd", "er_nd"), ("er_dfoc", "er_dfoc")):
            vals = result.column(col)
            if vals.size:
                path = out_dir / f"{name}_{tag}_ccdf.csv"
                write_ccdf_csv(vals, path, label=tag)
                outputs.append(path)
    return outputs, template


def _run_single_point(args) -> tuple[list[Path], ScenarioConfig]:
    cfg = _load_config(args)
    schemes = _parse_schemes(args.schemes)
    out_dir = _out_dir(args)
    outputs: list[Path] = []

    evaluation = evaluate_point(
        cfg, schemes, NumericalOptions(seed=args.seed), keep_configs=args.save_ris
    )
    rec = evaluation.record
    if rec.skipped:
        raise SimulationError("scenario is degenerate (co-located elements or panels)")

    if SCHEME_ND in schemes and evaluation.nd_spectrum is not None:
        ms = evaluation.nd_spectrum
        print(
            f"scheme=nd rate_bits={rec.rate_nd!r} eff_rank={rec.er_nd!r} "
            f"mu_mw={ms.mu!r} active_modes={ms.active_modes}"
        )
    if SCHEME_DFOC in schemes and evaluation.foc_spectrum is not None:
        ms = evaluation.foc_spectrum
        print(
            f"scheme=dfoc rate_bits={rec.rate_dfoc!r} eff_rank={rec.er_dfoc!r} "
            f"mu_mw={ms.mu!r} active_modes={ms.active_modes}"
        )
    if SCHEME_DNUM in schemes and evaluation.num_result is not None:
        res = evaluation.num_result
        print(
            f"scheme=dnum rate_bits={rec.rate_dnum!r} iterations={res.iterations} "
            f"converged={res.converged}"
        )
    if rec.ratio is not None:
        print(f"ratio_dfoc_over_nd={rec.ratio!r}")

    if args.dump_channels:
        tx, ris, rx = place_topology(cfg)
        pair = make_channel_pair(tx, ris, rx, cfg.carrier_freq)
        for name, mat in (("h_forward", pair.h_forward), ("h_backward", pair.h_backward)):
            path = out_dir / f"{name}.csv"
            dump_channel_csv(mat, path)
            outputs.append(path)
    if args.save_ris:
        if evaluation.nd_config is not None:
            path = out_dir / "ris_nd.txt"
            save_ris_config(evaluation.nd_config, path)
            outputs.append(path)
        if evaluation.foc_config is not None:
            path = out_dir / "ris_dfoc.txt"
            save_ris_config(evaluation.foc_config, path)
            outputs.append(path)
    return outputs, cfg


def _selftest_checks(seed: int):
    """Yield (name, passed) pairs for the built-in invariant suite."""
    rng = np.random.default_rng(np.random.SeedSequence(seed))

    def cgauss(shape):
        return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)

    # closed-form capacity equals the log-det mutual information
    ok = True
    for _ in range(20):
        h_f, h_b = cgauss((8, 4)), cgauss((4, 8))
        ms, q, phi = closed_form_capacity(h_f, h_b, 4.0, 0.5)
        mi = mutual_information(h_b @ phi @ h_f, q, 0.5)
        ok &= abs(mi - ms.capacity_bits) <= 1e-9 * max(1.0, ms.capacity_bits)
    yield "closed_form_logdet_equivalence", ok

    # water-filling KKT conditions
    ok = True
    for _ in range(100):
        g = np.sort(rng.uniform(0.05, 5.0, size=rng.integers(1, 17)))[::-1]
        budget = float(rng.uniform(0.5, 20.0))
        ms = water_filling(g, budget, 1.0)
        ok &= abs(ms.powers.sum() - budget) <= 1e-12 * budget
        active = ms.powers > 0
        ok &= bool(np.all(np.abs(ms.mu - 1.0 / g[active] - ms.powers[active]) < 1e-10))
    yield "water_filling_kkt", ok

    # unitarity and passivity of the optimal surface
    h_f, h_b = cgauss((16, 4)), cgauss((4, 16))
    phi_cfg = nd_ris_optimal(h_f, h_b)
    ok = phi_cfg.unitarity_defect() < 1e-10
    for _ in range(10):
        s = cgauss(16)
        ok &= abs(np.linalg.norm(phi_cfg.matrix @ s) - np.linalg.norm(s)) < 1e-10 * np.linalg.norm(s)
    yield "surface_unitarity_passivity", ok

    # diagonal-X family achieves the same rate
    ms, q, _ = closed_form_capacity(h_f, h_b, 4.0, 0.5)
    from .spectrum import svd as _svd

    sf = _svd(h_f, full_matrices=True)
    sb = _svd(h_b, full_matrices=True)
    ok = True
    for _ in range(20):
        x = np.exp(1j * rng.uniform(0, 2 * np.pi, 16))
        phi_x = sb.v @ (x[:, None] * sf.u.conj().T)
        mi = mutual_information(h_b @ phi_x @ h_f, q, 0.5)
        ok &= abs(mi - ms.capacity_bits) <= 1e-9 * max(1.0, ms.capacity_bits)
    yield "diagonal_x_invariance", ok

    # scheme ordering on a small deployment
    cfg = ScenarioConfig(tx_dims=(1, 4), ris_dims=(1, 16), rx_dims=(1, 4), d_f=3.0, d_b=3.0)
    ev = evaluate_point(cfg, ALL_SCHEMES, NumericalOptions(max_iters=10))
    rec = ev.record
    ok = (
        not rec.skipped
        and rec.rate_nd >= rec.rate_dnum - 1e-9
        and rec.rate_dnum >= rec.rate_dfoc - 1e-9
        and all(b >= a - 1e-12 for a, b in zip(ev.num_result.trace, ev.num_result.trace[1:]))
    )
    yield "scheme_dominance", ok

    # effective rank sanity
    ok = (
        effective_rank(np.ones(4)) == 4.0
        and effective_rank(np.array([1.0, 0.0, 0.0])) == 1.0
        and abs(effective_rank(np.array([2.0, 1.0])) - 1.8898815748423097) < 1e-12
    )
    yield "effective_rank_values", ok

    # determinism of the engine across worker counts
    d_values = [3.0, 5.0]
    tmpl = replace(cfg, theta_f=0.0, theta_b=math.pi, psi_f=0.0, psi_b=0.0)
    res1 = experiments.paraxial_sweep(tmpl, d_values, frozenset({"nd", "dfoc"}), workers=1)
    res2 = experiments.paraxial_sweep(tmpl, d_values, frozenset({"nd", "dfoc"}), workers=4)
    import io

    def render(res):
        buf = io.StringIO()
        for r in res.records:
            buf.write(repr((r.rate_nd, r.rate_dfoc, r.er_nd, r.er_dfoc, r.ratio, r.skipped)))
        return buf.getvalue()

    yield "sweep_determinism", render(res1) == render(res2)


def _run_selftest(args) -> int:
    failures = 0
    for name, passed in _selftest_checks(args.seed):
        print(f"{'PASS' if passed else 'FAIL'} {name}")
        if not passed:
            failures += 1
    print(f"selftest: {failures} failure(s)")
    return EXIT_SELFTEST if failures else EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    started = time.monotonic()
    try:
        if args.subcommand == "selftest":
            status = _run_selftest(args)
            return status
        if args.subcommand == "single-point":
            outputs, cfg = _run_single_point(args)
        else:
            outputs, cfg = _run_sweep(args)
        out_dir = _out_dir(args)
        manifest = RunManifest(
            subcommand=args.subcommand,
            config_hash=config_hash(cfg),
            seed=args.seed,
            scale=args.scale,
            outputs=[str(p) for p in outputs],
            duration_s=time.monotonic() - started,
            version=__version__,
            scenario=_scenario_dict(cfg),
        )
        manifest_path = _write_manifest(out_dir, args.subcommand.replace("-", "_"), manifest)
        print(f"manifest: {manifest_path}")
        return EXIT_OK
    except ConfigError as exc:
        print(json.dumps({"error": "config", "message": str(exc)}), file=sys.stderr)
        return EXIT_CONFIG
    except SimulationError as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}), file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
