"""Surface designs: optimal non-diagonal, closed-form focusing, numerical diagonal.

Three ways to configure the reflecting surface:

* ``nd_ris_optimal`` - the capacity-achieving full unitary matrix
  ``V_B @ U_F^H`` built from the individual channel SVDs.
* ``d_ris_focusing`` - diagonal phases from the product of two conjugated
  focusing profiles, one aimed at a point near the transmitter and one
  near the receiver (mid-points by default). Closed form, no channel
  state needed beyond geometry.
* ``d_ris_numerical`` - alternating maximization over the transmit
  covariance (water-filling) and the K diagonal phases (cyclic
  coordinate ascent with a golden-section line search per phase).

``diagonalization_residual`` measures how far a given surface leaves the
end-to-end channel from its ideal diagonal form.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DegenerateGeometryError, InvalidInputError
from .geometry import ArrayGeometry
from .spectrum import (
    LOG2,
    SvdTriple,
    rank_tolerance,
    svd,
    water_filling,
)

TWO_PI = 2.0 * np.pi

FULL_UNITARY = "full_unitary"
DIAGONAL_PHASES = "diagonal_phases"


@dataclass(frozen=True)
class RisConfiguration:
    """A reflection configuration: either K diagonal phases or a full K x K unitary."""

    kind: str
    matrix: np.ndarray | None = None
    phases: np.ndarray | None = None

    @staticmethod
    def full(matrix: np.ndarray) -> "RisConfiguration":
        m = np.asarray(matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise InvalidInputError(f"full reflection matrix must be square, got {m.shape}")
        return RisConfiguration(kind=FULL_UNITARY, matrix=m)

    @staticmethod
    def diagonal(phases: np.ndarray) -> "RisConfiguration":
        p = np.mod(np.asarray(phases, dtype=float).reshape(-1), TWO_PI)
        return RisConfiguration(kind=DIAGONAL_PHASES, phases=p)

    @property
    def n_elements(self) -> int:
        return self.matrix.shape[0] if self.kind == FULL_UNITARY else self.phases.size

    def as_matrix(self) -> np.ndarray:
        "Densify to a K x K complex matrix."
        if self.kind == FULL_UNITARY:
            return self.matrix
        return np.diag(np.exp(1j * self.phases))

    def apply_to(self, h_f: np.ndarray) -> np.ndarray:
        "Compute ``Phi @ h_f`` without densifying a diagonal configuration."
        if self.kind == FULL_UNITARY:
            return self.matrix @ h_f
        return np.exp(1j * self.phases)[:, None] * h_f

    def unitarity_defect(self) -> float:
        "max |Phi Phi^H - I|; exact zero for diagonal phase configurations."
        if self.kind == DIAGONAL_PHASES:
            return 0.0
        k = self.matrix.shape[0]
        return float(np.max(np.abs(self.matrix @ self.matrix.conj().T - np.eye(k))))


def compose_channel(h_f: np.ndarray, h_b: np.ndarray, phi: RisConfiguration) -> np.ndarray:
    "End-to-end M x N channel ``h_b @ Phi @ h_f``."
    return h_b @ phi.apply_to(h_f)


def nd_ris_optimal(
    h_f: np.ndarray,
    h_b: np.ndarray,
    svd_f: SvdTriple | None = None,
    svd_b: SvdTriple | None = None,
) -> RisConfiguration:
    """Capacity-achieving full unitary configuration ``V_B @ U_F^H``.

    Requires the full (not thin) factors so every surface element is
    steered; pass cached full SVDs to avoid refactorizing.
    """
    if svd_f is None:
        svd_f = svd(np.asarray(h_f), full_matrices=True)
    if svd_b is None:
        svd_b = svd(np.asarray(h_b), full_matrices=True)
    return RisConfiguration.full(svd_b.v @ svd_f.u.conj().T)


def focusing_phases(ris: ArrayGeometry, focus_tx, focus_rx, kappa: float) -> np.ndarray:
    """Per-element phases ``-kappa * (d_to_tx_focus + d_to_rx_focus)`` wrapped to [0, 2pi)."""
    focus_tx = np.asarray(focus_tx, dtype=float).reshape(3)
    focus_rx = np.asarray(focus_rx, dtype=float).reshape(3)
    d_tx = np.linalg.norm(ris.elements - focus_tx, axis=1)
    d_rx = np.linalg.norm(ris.elements - focus_rx, axis=1)
    if np.min(d_tx) <= 0 or np.min(d_rx) <= 0:
        raise DegenerateGeometryError("a focusing point coincides with a surface element")
    return np.mod(-kappa * (d_tx + d_rx), TWO_PI)


def d_ris_focusing(ris: ArrayGeometry, focus_tx, focus_rx, kappa: float) -> RisConfiguration:
    """Closed-form diagonal design from two conjugated focusing profiles.

    Element k gets phase ``-kappa * (|r_k - focus_tx| + |r_k - focus_rx|)``,
    the product of a profile focused on a point near the transmitter and a
    profile focused on a point near the receiver, each conjugating its
    spherical curvature. The surface then behaves like a thin lens imaging
    one focus onto the other, which preserves the full mode structure of
    the two hops: in the aligned (paraxial) symmetric deployment the rate
    matches the optimal non-diagonal surface to machine precision, and it
    stays close in gently non-paraxial deployments.
    """
    return RisConfiguration.diagonal(focusing_phases(ris, focus_tx, focus_rx, kappa))


@dataclass
class NumericalOptions:
    """Knobs for the alternating diagonal-phase optimizer.

    ``rel_tol`` stops the outer loop once an iteration improves the rate
    by less than this relative amount; ``phase_search_tol`` is the
    golden-section refinement width in radians. ``seed`` is accepted for
    interface stability; the optimizer itself is deterministic.
    """

    max_iters: int = 50
    rel_tol: float = 1e-6
    phase_search_tol: float = 1e-6
    seed: int | None = None


@dataclass
class NumericalResult:
    config: RisConfiguration
    rate_bits: float
    trace: list[float] = field(default_factory=list)
    converged: bool = True
    iterations: int = 0


_INV_GOLDEN = (np.sqrt(5.0) - 1.0) / 2.0


def _golden_max(fun, lo: float, hi: float, xtol: float) -> tuple[float, float]:
    "Golden-section maximization of a unimodal scalar function on [lo, hi]."
    a, b = lo, hi
    x1 = b - _INV_GOLDEN * (b - a)
    x2 = a + _INV_GOLDEN * (b - a)
    f1, f2 = fun(x1), fun(x2)
    while b - a > xtol:
        if f1 < f2:
            a = x1
            x1, f1 = x2, f2
            x2 = a + _INV_GOLDEN * (b - a)
            f2 = fun(x2)
        else:
            b = x2
            x2, f2 = x1, f1
            x1 = b - _INV_GOLDEN * (b - a)
            f1 = fun(x1)
    return (x1, f1) if f1 >= f2 else (x2, f2)


def _waterfill_root(h: np.ndarray, total_power: float, noise_power: float) -> np.ndarray:
    """Square root L of the water-filling-optimal covariance for channel h.

    Q = L L^H with L = V[:, :r] * sqrt(p); columns limited to active modes.
    """
    trip = svd(h)
    tol = rank_tolerance(trip.s, h.shape)
    pos = trip.s[trip.s > tol]
    if pos.size == 0:
        return np.zeros((h.shape[1], 0))
    ms = water_filling(pos * pos, total_power, noise_power)
    r = ms.active_modes
    return trip.v[:, :r] * np.sqrt(ms.powers[:r])


def _rate_bits(h: np.ndarray, root: np.ndarray, noise_power: float) -> float:
    "log2 det(I + h Q h^H / noise) through the singular values of h @ root."
    if root.shape[1] == 0:
        return 0.0
    s = np.linalg.svd(h @ root, compute_uv=False)
    return float(np.sum(np.log1p(s * s / noise_power)) / LOG2)


def d_ris_numerical(
    h_f: np.ndarray,
    h_b: np.ndarray,
    total_power: float,
    noise_power: float,
    init: RisConfiguration,
    opts: NumericalOptions | None = None,
) -> NumericalResult:
    """Alternating maximization of the rate over diagonal unit-modulus phases.

    Each outer iteration runs (a) a cyclic coordinate-ascent sweep over the
    K phases with the transmit covariance held fixed - the rate restricted
    to one phase is maximized by a golden-section search over three arcs
    partitioning the circle at the current phase - and then (b) a
    water-filling update of the covariance at the new phases. A move is
    kept only if the freshly evaluated rate does not decrease, so the
    per-iteration trace is non-decreasing by construction.

    Returns the best iterate; ``converged`` is False when the loop hit
    ``max_iters`` before the relative rate gain dropped below ``rel_tol``.
    """
    if init.kind != DIAGONAL_PHASES:
        raise InvalidInputError("numerical optimizer needs a diagonal-phase initial configuration")
    opts = opts or NumericalOptions()
    h_f = np.asarray(h_f, dtype=complex)
    h_b = np.asarray(h_b, dtype=complex)
    k = h_f.shape[0]
    if init.phases.size != k:
        raise InvalidInputError(f"initial phases have length {init.phases.size}, channel has K={k}")

    phases = init.phases.copy()
    coeff = np.exp(1j * phases)

    def compose() -> np.ndarray:
        return h_b @ (coeff[:, None] * h_f)

    h_cur = compose()
    root = _waterfill_root(h_cur, total_power, noise_power)
    obj = _rate_bits(h_cur, root, noise_power)
    trace = [obj]

    converged = False
    iterations = 0
    eye_m = np.eye(h_b.shape[0])
    for it in range(opts.max_iters):
        iterations = it + 1
        # (a) phase sweep at fixed covariance root
        for idx in range(k):
            b = h_b[:, idx]
            f_row = h_f[idx, :]
            update = np.outer(b, f_row)
            c_mat = h_cur - coeff[idx] * update
            g0 = c_mat @ root
            w = f_row @ root
            if w.size == 0:
                continue
            v = g0 @ w.conj()
            t_mat = eye_m + g0 @ g0.conj().T + float(np.vdot(w, w).real) * np.outer(b, b.conj())
            sol = np.linalg.solve(t_mat, np.column_stack([b, v]))
            a_cross = complex(v.conj() @ sol[:, 0])  # v^H T^{-1} b
            p_vv = float((v.conj() @ sol[:, 1]).real)  # v^H T^{-1} v
            q_bb = float((b.conj() @ sol[:, 0]).real)  # b^H T^{-1} b
            base = 1.0 + abs(a_cross) ** 2 - p_vv * q_bb

            def slice_rate(phi: float) -> float:
                val = base + 2.0 * (a_cross * np.exp(1j * phi)).real
                return np.log2(max(val, 1e-300))

            best_phi, best_val = phases[idx], slice_rate(phases[idx])
            start = phases[idx]
            for arc in range(3):
                lo = start + arc * TWO_PI / 3.0
                hi = start + (arc + 1) * TWO_PI / 3.0
                x, fx = _golden_max(slice_rate, lo, hi, opts.phase_search_tol)
                if fx > best_val:
                    best_phi, best_val = x, fx
            best_phi = float(np.mod(best_phi, TWO_PI))
            cand_coeff = np.exp(1j * best_phi)
            h_cand = c_mat + cand_coeff * update
            cand_obj = _rate_bits(h_cand, root, noise_power)
            if cand_obj > obj:
                phases[idx] = best_phi
                coeff[idx] = cand_coeff
                h_cur = h_cand
                obj = cand_obj
        # (b) covariance update at the new phases
        h_cur = compose()  # refresh to kill accumulated update drift
        cand_root = _waterfill_root(h_cur, total_power, noise_power)
        cand_obj = _rate_bits(h_cur, cand_root, noise_power)
        if cand_obj > obj:
            root = cand_root
            obj = cand_obj
        trace.append(obj)
        gain = trace[-1] - trace[-2]
        if gain <= opts.rel_tol * max(abs(trace[-2]), 1e-30):
            converged = True
            break

    return NumericalResult(
        config=RisConfiguration.diagonal(phases),
        rate_bits=obj,
        trace=trace,
        converged=converged,
        iterations=iterations,
    )


def diagonalization_residual(
    h_f: np.ndarray,
    h_b: np.ndarray,
    phi: RisConfiguration,
    svd_f: SvdTriple | None = None,
    svd_b: SvdTriple | None = None,
) -> float:
    """Relative distance of the end-to-end channel from its ideal diagonal form.

    Rotating ``h_b @ Phi @ h_f`` by the backward left and forward right
    singular bases should leave the diagonal matrix of paired singular
    value products; the Frobenius norm of what is left over, divided by
    the norm of that target, is 0 exactly when the surface diagonalizes
    the link (as the optimal unitary does) and grows as mode mixing takes
    over. The measure compares against the positive-real target, so
    per-mode phase offsets register too (capacity is insensitive to them;
    this diagnostic, by definition, is not): a capacity-achieving surface
    whose strongest mode carries a residual phase near pi can score close
    to 2.
    """
    h_f = np.asarray(h_f)
    h_b = np.asarray(h_b)
    if svd_f is None:
        svd_f = svd(h_f, full_matrices=True)
    if svd_b is None:
        svd_b = svd(h_b, full_matrices=True)
    m, n = h_b.shape[0], h_f.shape[1]
    core = svd_b.u.conj().T @ compose_channel(h_f, h_b, phi) @ svd_f.v
    gamma = np.zeros((m, n))
    r = min(m, n, svd_f.s.size, svd_b.s.size)
    gamma[np.arange(r), np.arange(r)] = svd_b.s[:r] * svd_f.s[:r]
    denom = np.linalg.norm(gamma)
    if denom == 0:
        raise InvalidInputError("both channels are rank-zero; the diagonal target vanishes")
    return float(np.linalg.norm(core - gamma) / denom)


def ris_config_to_text(cfg: RisConfiguration) -> str:
    """Serialize a configuration to the documented text format.

    Line 1: the kind tag; line 2: K. Diagonal: one phase (radians, repr)
    per line. Full: one matrix row per line, interleaved re,im pairs.
    """
    lines = [cfg.kind, str(cfg.n_elements)]
    if cfg.kind == DIAGONAL_PHASES:
        lines.extend(repr(float(p)) for p in cfg.phases)
    else:
        for row in cfg.matrix:
            parts = []
            for value in row:
                parts.append(repr(float(value.real)))
                parts.append(repr(float(value.imag)))
            lines.append(",".join(parts))
    return "\n".join(lines) + "\n"


def ris_config_from_text(text: str) -> RisConfiguration:
    "Inverse of ris_config_to_text."
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if len(lines) < 2:
        raise InvalidInputError("truncated surface configuration text")
    kind, k = lines[0].strip(), int(lines[1])
    body = lines[2:]
    if kind == DIAGONAL_PHASES:
        if len(body) != k:
            raise InvalidInputError(f"expected {k} phases, found {len(body)}")
        return RisConfiguration.diagonal(np.array([float(v) for v in body]))
    if kind == FULL_UNITARY:
        if len(body) != k:
            raise InvalidInputError(f"expected {k} matrix rows, found {len(body)}")
        rows = []
        for line in body:
            vals = [float(v) for v in line.split(",")]
            if len(vals) != 2 * k:
                raise InvalidInputError(f"expected {2 * k} values per row, found {len(vals)}")
            rows.append(np.array(vals[0::2]) + 1j * np.array(vals[1::2]))
        return RisConfiguration.full(np.vstack(rows))
    raise InvalidInputError(f"unknown surface configuration kind {kind!r}")


def save_ris_config(cfg: RisConfiguration, path) -> None:
    Path(path).write_text(ris_config_to_text(cfg))


def load_ris_config(path) -> RisConfiguration:
    return ris_config_from_text(Path(path).read_text())
