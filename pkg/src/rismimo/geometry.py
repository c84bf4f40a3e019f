"""Antenna panel construction and 3-D placement of the transmitter/RIS/receiver topology."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import ScenarioConfig
from .errors import InvalidDimensionError

SPEED_OF_LIGHT = 299792458.0
"Speed of light in m/s."


def wavelength(carrier_freq: float) -> float:
    "Wavelength in meters for a carrier frequency in Hz."
    return SPEED_OF_LIGHT / carrier_freq


def half_wavelength(carrier_freq: float) -> float:
    "Half-wavelength element spacing in meters for a carrier frequency in Hz."
    return 0.5 * SPEED_OF_LIGHT / carrier_freq


@dataclass(frozen=True)
class ArrayGeometry:
    """A planar antenna panel.

    Elements are ordered row-major with the column (local y) index fastest:
    the element at grid position (r, c) is ``elements[r * cols + c]``.
    ``mid_point`` is the panel center, which coincides with the arithmetic
    mean of the element positions.
    """

    elements: np.ndarray  # (count, 3) positions, meters
    mid_point: np.ndarray  # (3,)
    rows: int  # count along the local z-axis
    cols: int  # count along the local y-axis
    spacing: float  # meters between adjacent elements

    def __post_init__(self):
        self.elements.setflags(write=False)
        self.mid_point.setflags(write=False)

    @property
    def count(self) -> int:
        return self.elements.shape[0]


def build_array(
    rows: int,
    cols: int,
    spacing: float,
    center,
    rotation_about_z: float = 0.0,
) -> ArrayGeometry:
    """Build a ``rows x cols`` panel centered on ``center``.

    The unrotated panel lies in a plane parallel to the global yz-plane
    (columns along y, rows along z) with its normal along +x.
    ``rotation_about_z`` turns the panel about the vertical axis through
    ``center``, so the panel always contains the z-direction.
    """
    if rows < 1 or cols < 1:
        raise InvalidDimensionError(f"panel needs at least one element per axis, got {rows}x{cols}")
    if spacing <= 0:
        raise InvalidDimensionError(f"element spacing must be positive, got {spacing}")
    center = np.asarray(center, dtype=float).reshape(3)

    y_off = (np.arange(cols) - (cols - 1) / 2.0) * spacing
    z_off = (np.arange(rows) - (rows - 1) / 2.0) * spacing
    zz, yy = np.meshgrid(z_off, y_off, indexing="ij")
    local = np.column_stack([np.zeros(rows * cols), yy.ravel(), zz.ravel()])

    c, s = np.cos(rotation_about_z), np.sin(rotation_about_z)
    rot = np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])
    elements = local @ rot.T + center
    return ArrayGeometry(elements=elements, mid_point=center.copy(), rows=rows, cols=cols, spacing=spacing)


def place_topology(cfg: ScenarioConfig) -> tuple[ArrayGeometry, ArrayGeometry, ArrayGeometry]:
    """Realize the (transmitter, RIS, receiver) panels for a scenario.

    The RIS mid-point sits at the origin with the panel parallel to the
    yz-plane (normal along +x). The transmitter mid-point is at distance
    ``d_f`` from the origin at angle ``theta_f`` from the RIS normal,
    measured counterclockwise in the xy-plane; the receiver at
    ``(d_b, theta_b)``. ``psi_f`` / ``psi_b`` rotate the end panels about
    the vertical axis through their own mid-points, so all three panels
    are parallel when both rotations are zero.
    """
    cfg.validate()
    spacing = cfg.spacing if cfg.spacing is not None else half_wavelength(cfg.carrier_freq)
    ris = build_array(*cfg.ris_dims, spacing, np.zeros(3), 0.0)
    c_tx = cfg.d_f * np.array([np.cos(cfg.theta_f), np.sin(cfg.theta_f), 0.0])
    c_rx = cfg.d_b * np.array([np.cos(cfg.theta_b), np.sin(cfg.theta_b), 0.0])
    tx = build_array(*cfg.tx_dims, spacing, c_tx, cfg.psi_f)
    rx = build_array(*cfg.rx_dims, spacing, c_rx, cfg.psi_b)
    return tx, ris, rx


def pairwise_distances(a: ArrayGeometry, b: ArrayGeometry) -> np.ndarray:
    """Euclidean distances between two panels, shaped ``(b.count, a.count)``.

    Entry (k, n) is the distance from element n of ``a`` to element k of
    ``b``. Zero entries (co-located elements) are returned as-is; channel
    generation rejects them.
    """
    diff = b.elements[:, None, :] - a.elements[None, :, :]
    return np.sqrt(np.sum(diff * diff, axis=2))
