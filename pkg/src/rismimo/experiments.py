"""Scenario evaluation, sweep engine, and the study suite (maps, curves, CCDFs).

One grid point = one scenario evaluated under up to three surface schemes:
``nd`` (optimal non-diagonal), ``dfoc`` (closed-form focusing diagonal) and
``dnum`` (numerically optimized diagonal, initialized at the focusing
design). Grid points are independent work items run on a bounded thread
pool and collected into a pre-sized buffer indexed by grid position, so
the output ordering never depends on scheduling; BLAS is pinned to one
thread inside the pool for bit-reproducible results at any worker count.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
from threadpoolctl import threadpool_limits

from .channel import make_channel_pair
from .config import ScenarioConfig
from .errors import DegenerateGeometryError, InvalidInputError
from .geometry import place_topology
from .ris import (
    NumericalOptions,
    RisConfiguration,
    compose_channel,
    d_ris_focusing,
    d_ris_numerical,
    nd_ris_optimal,
)
from .spectrum import (
    effective_rank,
    paired_mode_spectrum,
    rank_tolerance,
    svd,
    water_filling,
)

SCHEME_ND = "nd"
SCHEME_DFOC = "dfoc"
SCHEME_DNUM = "dnum"
ALL_SCHEMES = frozenset({SCHEME_ND, SCHEME_DFOC, SCHEME_DNUM})

DEFAULT_MAP_GUARD = 0.25
"Receivers closer than this (meters) to any surface element are skip-flagged."

CSV_HEADER = (
    "x,y,d_F,d_B,theta_F,theta_B,psi_F,psi_B,"
    "rate_nd,rate_dfoc,rate_dnum,er_nd,er_dfoc,ratio,skipped"
)


@dataclass
class PointRecord:
    """Per-grid-point results; None where a scheme was not run or the point was skipped."""

    x: float
    y: float
    d_f: float
    d_b: float
    theta_f: float
    theta_b: float
    psi_f: float
    psi_b: float
    rate_nd: float | None = None
    rate_dfoc: float | None = None
    rate_dnum: float | None = None
    er_nd: float | None = None
    er_dfoc: float | None = None
    ratio: float | None = None
    skipped: bool = False


@dataclass
class SweepResult:
    """Axis labels, grid shape, and one record per grid point (row-major)."""

    axes: tuple[str, ...]
    grid_shape: tuple[int, ...]
    records: list[PointRecord] = field(default_factory=list)

    def ratios(self) -> np.ndarray:
        return np.array([r.ratio for r in self.records if r.ratio is not None])

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.records if getattr(r, name) is not None])


@dataclass
class PointEvaluation:
    """Everything computed for one scenario (used by single-point reporting)."""

    record: PointRecord
    nd_spectrum: object | None = None
    foc_spectrum: object | None = None
    nd_config: RisConfiguration | None = None
    foc_config: RisConfiguration | None = None
    num_result: object | None = None


def _fmt(value) -> str:
    return "" if value is None else repr(float(value))


def write_csv(result: SweepResult, path) -> None:
    "One row per grid point in grid order; floats via repr, skipped as 0/1."
    lines = [CSV_HEADER]
    for r in result.records:
        lines.append(
            ",".join(
                [
                    _fmt(r.x),
                    _fmt(r.y),
                    _fmt(r.d_f),
                    _fmt(r.d_b),
                    _fmt(r.theta_f),
                    _fmt(r.theta_b),
                    _fmt(r.psi_f),
                    _fmt(r.psi_b),
                    _fmt(r.rate_nd),
                    _fmt(r.rate_dfoc),
                    _fmt(r.rate_dnum),
                    _fmt(r.er_nd),
                    _fmt(r.er_dfoc),
                    _fmt(r.ratio),
                    "1" if r.skipped else "0",
                ]
            )
        )
    Path(path).write_text("\n".join(lines) + "\n")


def ccdf(values, n_points: int = 200) -> tuple[np.ndarray, np.ndarray]:
    """Complementary CDF P(X >= x) on n_points evenly spaced abscissae.

    The abscissae span the observed range, so the first probability is 1.
    """
    v = np.sort(np.asarray(values, dtype=float))
    if v.size == 0:
        raise InvalidInputError("CCDF of an empty sample")
    x = np.linspace(v[0], v[-1], n_points)
    prob = 1.0 - np.searchsorted(v, x, side="left") / v.size
    return x, prob


def write_ccdf_csv(values, path, n_points: int = 200, label: str = "value") -> None:
    x, p = ccdf(values, n_points)
    lines = [f"{label},ccdf"]
    lines.extend(f"{repr(float(a))},{repr(float(b))}" for a, b in zip(x, p))
    Path(path).write_text("\n".join(lines) + "\n")


def beam_projection(h: np.ndarray, v: np.ndarray, i: int, normalization: float | None = None):
    """Magnitudes of ``h @ v[:, i]`` across receive elements, plus their norm.

    ``v`` holds right singular vectors as columns; when ``v[:, i]`` is the
    i-th right singular vector of ``h``, the returned norm equals the i-th
    singular value. Pass ``normalization`` (e.g. the product of the top
    forward/backward singular values) to scale both outputs.
    """
    h = np.asarray(h)
    if not 0 <= i < v.shape[1]:
        raise InvalidInputError(f"mode index {i} out of range for {v.shape[1]} modes")
    beam = h @ v[:, i]
    mags = np.abs(beam)
    norm = float(np.linalg.norm(beam))
    if normalization is not None:
        mags = mags / normalization
        norm = norm / normalization
    return mags, norm


def evaluate_point(
    cfg: ScenarioConfig,
    schemes=frozenset({SCHEME_ND, SCHEME_DFOC}),
    num_opts: NumericalOptions | None = None,
    guard: float | None = None,
    keep_configs: bool = False,
) -> PointEvaluation:
    """Evaluate one scenario under the requested schemes.

    Rates use each scheme's own water-filled transmit covariance. ``nd``
    comes from the closed-form spectrum (no K x K matrix is formed unless
    ``keep_configs`` asks for it); ``dfoc``/``dnum`` factor the composed
    channel. A ``guard`` distance skip-flags receivers too close to the
    surface; degenerate geometry is skip-flagged, never raised.
    """
    unknown = set(schemes) - ALL_SCHEMES
    if unknown:
        raise InvalidInputError(f"unknown schemes: {sorted(unknown)}")
    cfg.validate()  # config problems propagate; only geometric degeneracy skip-flags
    rx_mid = cfg.d_b * np.array([math.cos(cfg.theta_b), math.sin(cfg.theta_b), 0.0])
    record = PointRecord(
        x=float(rx_mid[0]),
        y=float(rx_mid[1]),
        d_f=cfg.d_f,
        d_b=cfg.d_b,
        theta_f=cfg.theta_f,
        theta_b=cfg.theta_b,
        psi_f=cfg.psi_f,
        psi_b=cfg.psi_b,
    )
    out = PointEvaluation(record=record)

    try:
        tx, ris, rx = place_topology(cfg)
        if guard is not None:
            closest = float(
                np.min(np.linalg.norm(ris.elements - rx.mid_point, axis=1))
            )
            if closest < guard:
                record.skipped = True
                return out
        if float(np.linalg.norm(tx.mid_point - rx.mid_point)) < 1e-9:
            # co-located end panels (e.g. the angle sweep at theta = 0)
            record.skipped = True
            return out
        pair = make_channel_pair(tx, ris, rx, cfg.carrier_freq)
    except DegenerateGeometryError:
        record.skipped = True
        return out

    h_f, h_b = pair.h_forward, pair.h_backward

    if SCHEME_ND in schemes:
        if keep_configs:
            svd_f = svd(h_f, full_matrices=True)
            svd_b = svd(h_b, full_matrices=True)
            s_f, s_b = svd_f.s, svd_b.s
            out.nd_config = nd_ris_optimal(h_f, h_b, svd_f, svd_b)
        else:
            s_f = np.linalg.svd(h_f, compute_uv=False)
            s_b = np.linalg.svd(h_b, compute_uv=False)
        spectrum = paired_mode_spectrum(
            s_f, s_b, h_f.shape, h_b.shape, cfg.tx_power, cfg.noise_power
        )
        record.rate_nd = spectrum.capacity_bits
        record.er_nd = effective_rank(np.sqrt(spectrum.gains))
        out.nd_spectrum = spectrum

    foc = None
    if SCHEME_DFOC in schemes or SCHEME_DNUM in schemes:
        focus_tx = cfg.focus_tx if cfg.focus_tx is not None else tx.mid_point
        focus_rx = cfg.focus_rx if cfg.focus_rx is not None else rx.mid_point
        try:
            foc = d_ris_focusing(ris, focus_tx, focus_rx, pair.kappa)
        except DegenerateGeometryError:
            record.skipped = True
            return out
        out.foc_config = foc

    if SCHEME_DFOC in schemes:
        h_end = compose_channel(h_f, h_b, foc)
        trip = svd(h_end)
        tol = rank_tolerance(trip.s, h_end.shape)
        pos = trip.s[trip.s > tol]
        ms = water_filling(pos * pos, cfg.tx_power, cfg.noise_power)
        record.rate_dfoc = ms.capacity_bits
        record.er_dfoc = effective_rank(trip.s)
        out.foc_spectrum = ms
        if record.rate_nd is not None and record.rate_nd > 0:
            record.ratio = record.rate_dfoc / record.rate_nd

    if SCHEME_DNUM in schemes:
        res = d_ris_numerical(h_f, h_b, cfg.tx_power, cfg.noise_power, foc, num_opts)
        record.rate_dnum = res.rate_bits
        out.num_result = res

    return out


def _run_grid(configs, axes, grid_shape, schemes, num_opts, guard, workers) -> SweepResult:
    """Evaluate scenarios on a bounded pool, collecting by grid index."""
    if workers is None:
        workers = os.cpu_count() or 1
    workers = max(1, int(workers))
    records: list[PointRecord | None] = [None] * len(configs)

    def job(idx_cfg):
        idx, cfg = idx_cfg
        return idx, evaluate_point(cfg, schemes, num_opts, guard).record

    with threadpool_limits(limits=1):
        if workers == 1:
            results = map(job, enumerate(configs))
            for idx, rec in results:
                records[idx] = rec
        else:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                for idx, rec in pool.map(job, enumerate(configs)):
                    records[idx] = rec
    return SweepResult(axes=axes, grid_shape=grid_shape, records=records)


def paraxial_sweep(
    template: ScenarioConfig,
    d_values,
    schemes=frozenset({SCHEME_ND, SCHEME_DFOC}),
    num_opts: NumericalOptions | None = None,
    workers: int | None = None,
) -> SweepResult:
    """Rates versus distance in the aligned deployment (d_f = d_b = d).

    The template must already be paraxial: transmitter on the surface
    normal, receiver on the opposite side, no panel rotations.
    """
    if not (
        abs(template.theta_f) < 1e-12
        and abs(template.theta_b - math.pi) < 1e-12
        and template.psi_f == 0.0
        and template.psi_b == 0.0
    ):
        raise InvalidInputError("paraxial sweep needs theta_f=0, theta_b=pi, psi_f=psi_b=0")
    configs = [replace(template, d_f=float(d), d_b=float(d)) for d in d_values]
    return _run_grid(configs, ("d",), (len(configs),), schemes, num_opts, None, workers)


def rate_map(
    template: ScenarioConfig,
    tx_center,
    x_values,
    y_values,
    schemes=frozenset({SCHEME_ND, SCHEME_DFOC}),
    num_opts: NumericalOptions | None = None,
    guard: float = DEFAULT_MAP_GUARD,
    workers: int | None = None,
) -> SweepResult:
    """Rates and their ratio over a 2-D grid of receiver positions.

    The transmitter stays at ``tx_center``; each grid point (x, y, 0) is a
    receiver mid-point, converted to (d_b, theta_b). Points within
    ``guard`` meters of any surface element are skip-flagged.
    """
    tx_center = np.asarray(tx_center, dtype=float).reshape(3)
    d_f = float(np.linalg.norm(tx_center))
    theta_f = math.atan2(tx_center[1], tx_center[0])
    configs = []
    for x in x_values:
        for y in y_values:
            d_b = math.hypot(x, y)
            theta_b = math.atan2(y, x)
            configs.append(
                replace(template, d_f=d_f, theta_f=theta_f, d_b=max(d_b, 1e-12), theta_b=theta_b)
            )
    return _run_grid(
        configs,
        ("x", "y"),
        (len(x_values), len(y_values)),
        schemes,
        num_opts,
        guard,
        workers,
    )


def effective_rank_map(
    template: ScenarioConfig,
    tx_center,
    x_values,
    y_values,
    schemes=frozenset({SCHEME_ND, SCHEME_DFOC}),
    num_opts: NumericalOptions | None = None,
    guard: float = DEFAULT_MAP_GUARD,
    workers: int | None = None,
) -> SweepResult:
    "Same grid as rate_map; consumers read the effective-rank columns."
    return rate_map(template, tx_center, x_values, y_values, schemes, num_opts, guard, workers)


def angle_sweep(
    template: ScenarioConfig,
    theta_values,
    schemes=ALL_SCHEMES,
    num_opts: NumericalOptions | None = None,
    workers: int | None = None,
) -> SweepResult:
    """Rates versus the symmetric departure angle (theta_f = -theta_b = theta).

    Distances come from the template. theta = 0 puts both end panels at
    the same mid-point when d_f = d_b; that point is skip-flagged.
    """
    configs = [
        replace(template, theta_f=float(t), theta_b=-float(t)) for t in theta_values
    ]
    return _run_grid(configs, ("theta",), (len(configs),), schemes, num_opts, None, workers)


def distance_sweep(
    template: ScenarioConfig,
    d_b_values,
    schemes=ALL_SCHEMES,
    num_opts: NumericalOptions | None = None,
    workers: int | None = None,
) -> SweepResult:
    "Rates versus the surface-to-receiver distance; everything else from the template."
    configs = [replace(template, d_b=float(d)) for d in d_b_values]
    return _run_grid(configs, ("d_b",), (len(configs),), schemes, num_opts, None, workers)


def rotation_focus_sweep(
    template: ScenarioConfig,
    psi_b_values,
    delta_values,
    schemes=ALL_SCHEMES,
    num_opts: NumericalOptions | None = None,
    workers: int | None = None,
) -> SweepResult:
    """Rates versus receiver rotation and receive-focus displacement.

    For each (psi_b, delta): the transmit focus stays at the transmitter
    mid-point, while the receive focus moves delta meters from the
    receiver mid-point along the direction of the receiver's last
    element, i.e. along the rotated panel axis. The x/y columns carry
    (psi_b, delta).
    """
    configs = []
    for psi_b in psi_b_values:
        for delta in delta_values:
            cfg = replace(template, psi_b=float(psi_b))
            tx, _, rx = place_topology(cfg)
            last = rx.elements[-1]
            axis = last - rx.mid_point
            norm = float(np.linalg.norm(axis))
            if norm > 0:
                focus_rx = rx.mid_point + float(delta) * axis / norm
            else:
                focus_rx = rx.mid_point.copy()
            cfg = replace(cfg, focus_tx=tx.mid_point.copy(), focus_rx=focus_rx)
            configs.append(cfg)
    result = _run_grid(
        configs,
        ("psi_b", "delta"),
        (len(psi_b_values), len(delta_values)),
        schemes,
        num_opts,
        None,
        workers,
    )
    flat = [(p, d) for p in psi_b_values for d in delta_values]
    for rec, (p, d) in zip(result.records, flat):
        rec.x = float(p)
        rec.y = float(d)
    return result
