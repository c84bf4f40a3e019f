"""SVD machinery, water-filling, closed-form capacity, and effective rank.

The end-to-end capacity of the relayed MIMO link is reached by pairing the
descending singular values of the forward and backward channels, water-
filling the transmit power over the squared products, and steering the
surface so the composite channel is diagonal in the proper bases. All rates
are in bit/s/Hz (log base 2).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError, NumericalFailureError

LOG2 = np.log(2.0)

RANK_TOL_FACTOR = 1e-12
"Singular values below max(S) * 1e-12 * max(dim) count as zero."


@dataclass(frozen=True)
class SvdTriple:
    """Factors with ``a = u @ diag(s) @ v.conj().T``, s descending."""

    u: np.ndarray
    s: np.ndarray
    v: np.ndarray

    def reconstruct(self) -> np.ndarray:
        "Multiply the factors back together (handles full rectangular factors)."
        r = self.s.size
        return (self.u[:, :r] * self.s) @ self.v[:, :r].conj().T


@dataclass(frozen=True)
class ModeSpectrum:
    """Water-filling result over the per-mode power gains.

    ``gains[i]`` multiplies ``powers[i]/noise`` inside log2(1 + .); the
    allocation satisfies ``powers[i] = mu - noise/gains[i]`` on active
    modes and 0 elsewhere, with the active modes forming a prefix of the
    descending gain order.
    """

    gains: np.ndarray  # descending, squared singular-value products
    powers: np.ndarray  # mW, sums to the power budget
    mu: float  # water level, mW
    capacity_bits: float  # bit/s/Hz

    @property
    def active_modes(self) -> int:
        return int(np.count_nonzero(self.powers > 0))


def svd(a: np.ndarray, full_matrices: bool = False) -> SvdTriple:
    """Singular value decomposition returning (U, S, V) with ``a = U diag(S) V^H``.

    ``full_matrices=True`` keeps all left/right singular vectors, which the
    surface design needs (the optimal reflection matrix uses every column
    of the K x K factors).
    """
    a = np.asarray(a)
    try:
        u, s, vh = np.linalg.svd(a, full_matrices=full_matrices)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailureError(f"SVD did not converge for a {a.shape[0]}x{a.shape[1]} matrix") from exc
    return SvdTriple(u=u, s=s, v=vh.conj().T)


def rank_tolerance(s: np.ndarray, shape: tuple[int, int]) -> float:
    "Numerical-rank cutoff for a singular value list of a matrix with this shape."
    if s.size == 0:
        return 0.0
    return float(np.max(s)) * RANK_TOL_FACTOR * max(shape)


def water_filling(gains, total_power: float, noise_power: float) -> ModeSpectrum:
    """Optimal power allocation over parallel channels with the given gains.

    Maximizes sum log2(1 + g_i p_i / noise) subject to sum p_i = total.
    The water level is found exactly by the sorted-prefix method: with k
    active modes mu = (P + sum_{i<=k} noise/g_i) / k, and the accepted k is
    the largest one whose k-th power is still positive.

    Gains must be positive and sorted descending (strip zero modes first;
    they can carry no rate).
    """
    g = np.asarray(gains, dtype=float)
    if g.ndim != 1 or g.size == 0:
        raise InvalidInputError("water-filling needs a non-empty 1-D gain vector")
    if np.any(g <= 0):
        raise InvalidInputError("water-filling gains must be positive")
    if np.any(np.diff(g) > 0):
        raise InvalidInputError("water-filling gains must be sorted descending")
    if total_power <= 0:
        raise InvalidInputError(f"total_power must be > 0, got {total_power}")
    if noise_power <= 0:
        raise InvalidInputError(f"noise_power must be > 0, got {noise_power}")

    thresholds = noise_power / g  # ascending
    mu_candidates = (total_power + np.cumsum(thresholds)) / np.arange(1, g.size + 1)
    feasible = np.nonzero(mu_candidates > thresholds)[0]
    k = int(feasible[-1]) + 1  # k >= 1 always: mu_1 = P + noise/g_1 > noise/g_1
    mu = float(mu_candidates[k - 1])

    powers = np.zeros_like(g)
    powers[:k] = mu - thresholds[:k]
    capacity = float(np.sum(np.log1p(g[:k] * powers[:k] / noise_power)) / LOG2)
    return ModeSpectrum(gains=g, powers=powers, mu=mu, capacity_bits=capacity)


def mode_gains(s_f: np.ndarray, s_b: np.ndarray, n_modes: int) -> np.ndarray:
    "Squared products of paired singular values, zero-padded to n_modes."
    prod = np.zeros(n_modes)
    m = min(n_modes, s_f.size, s_b.size)
    prod[:m] = s_f[:m] * s_b[:m]
    return prod * prod


def paired_mode_spectrum(
    s_f: np.ndarray,
    s_b: np.ndarray,
    shape_f: tuple[int, int],
    shape_b: tuple[int, int],
    total_power: float,
    noise_power: float,
) -> ModeSpectrum:
    """Water-filling over the paired forward/backward singular values.

    Singular values below their channel's numerical-rank tolerance are
    treated as zero; zero-gain modes are excluded from the allocation and
    padded back with zero power, so the spectrum always spans min(N, M)
    modes.
    """
    n_modes = min(shape_f[1], shape_b[0])
    tol_f = rank_tolerance(s_f, shape_f)
    tol_b = rank_tolerance(s_b, shape_b)
    pf = np.zeros(n_modes)
    pb = np.zeros(n_modes)
    mf = min(n_modes, s_f.size)
    mb = min(n_modes, s_b.size)
    pf[:mf] = np.where(s_f[:mf] > tol_f, s_f[:mf], 0.0)
    pb[:mb] = np.where(s_b[:mb] > tol_b, s_b[:mb], 0.0)
    gains = (pf * pb) ** 2

    n_active = int(np.count_nonzero(gains > 0))
    if n_active == 0:
        raise InvalidInputError("both channels are numerically rank-zero; no mode can carry power")
    ms = water_filling(gains[:n_active], total_power, noise_power)
    powers = np.zeros(n_modes)
    powers[:n_active] = ms.powers
    return ModeSpectrum(gains=gains, powers=powers, mu=ms.mu, capacity_bits=ms.capacity_bits)


def closed_form_capacity(
    h_f: np.ndarray,
    h_b: np.ndarray,
    total_power: float,
    noise_power: float,
    svd_f: SvdTriple | None = None,
    svd_b: SvdTriple | None = None,
) -> tuple[ModeSpectrum, np.ndarray, np.ndarray]:
    """Closed-form end-to-end capacity with the optimal unitary surface.

    Returns ``(spectrum, q, phi)`` where ``phi = V_B @ U_F^H`` is the
    capacity-achieving K x K reflection matrix, ``q`` is the transmit
    covariance (diagonal water-filling powers rotated into the forward
    channel's right singular basis, trace = total_power), and
    ``spectrum.capacity_bits`` equals the mutual information of
    ``(h_b @ phi @ h_f, q)``.

    Pass precomputed full SVDs to share one factorization across the
    surface designs; mixing factors from different decompositions of the
    same channel is safe only when they come from this module's ``svd``.
    """
    h_f = np.asarray(h_f)
    h_b = np.asarray(h_b)
    k_f, n = h_f.shape
    m, k_b = h_b.shape
    if k_f != k_b:
        raise InvalidInputError(f"channel dims disagree on K: forward {h_f.shape}, backward {h_b.shape}")
    if svd_f is None:
        svd_f = svd(h_f, full_matrices=True)
    if svd_b is None:
        svd_b = svd(h_b, full_matrices=True)
    if svd_f.u.shape != (k_f, k_f) or svd_b.v.shape != (k_b, k_b):
        raise InvalidInputError("closed_form_capacity needs full (not thin) channel SVDs")

    n_modes = min(n, m)
    spectrum = paired_mode_spectrum(
        svd_f.s, svd_b.s, h_f.shape, h_b.shape, total_power, noise_power
    )
    q = (svd_f.v[:, :n_modes] * spectrum.powers) @ svd_f.v[:, :n_modes].conj().T
    phi = svd_b.v @ svd_f.u.conj().T
    return spectrum, q, phi


def mutual_information(h: np.ndarray, q: np.ndarray, noise_power: float) -> float:
    """``log2 det(I + h q h^H / noise)`` in bit/s/Hz.

    Evaluated through the singular values of ``h @ q^(1/2)`` (square root
    from the eigendecomposition of q), which stays accurate for Gram
    condition numbers up to ~1e12. q must be Hermitian PSD.
    """
    h = np.asarray(h, dtype=complex)
    q = np.asarray(q, dtype=complex)
    if q.ndim != 2 or q.shape[0] != q.shape[1] or q.shape[0] != h.shape[1]:
        raise InvalidInputError(f"covariance shape {q.shape} does not match channel {h.shape}")
    if noise_power <= 0:
        raise InvalidInputError(f"noise_power must be > 0, got {noise_power}")
    scale = float(np.max(np.abs(q))) if q.size else 0.0
    asym = float(np.max(np.abs(q - q.conj().T))) if q.size else 0.0
    if asym > 1e-8 * max(1.0, scale):
        raise InvalidInputError(f"covariance is not Hermitian (asymmetry {asym:.3e})")

    evals, evecs = np.linalg.eigh((q + q.conj().T) / 2.0)
    evals = np.clip(evals, 0.0, None)
    root = evecs * np.sqrt(evals)
    s = np.linalg.svd(h @ root, compute_uv=False)
    return float(np.sum(np.log1p(s * s / noise_power)) / LOG2)


def effective_rank(singular_values) -> float:
    """Exponential of the Shannon entropy of the normalized singular values.

    A continuous proxy for the usable mode count: 1 for a rank-1 spectrum,
    n for n equal values, scale-invariant in between. Computed in base 2
    (exp2 of the entropy in bits), which is the same number.
    """
    s = np.asarray(singular_values, dtype=float)
    if s.ndim != 1 or s.size == 0:
        raise InvalidInputError("effective rank needs a non-empty 1-D singular value list")
    if np.any(s < 0):
        raise InvalidInputError("singular values must be non-negative")
    total = s.sum()
    if total == 0:
        raise InvalidInputError("effective rank is undefined for an all-zero spectrum")
    p = s / total
    p = p[p > 0]
    entropy_bits = -float(np.sum(p * np.log2(p)))
    return float(np.exp2(entropy_bits))
