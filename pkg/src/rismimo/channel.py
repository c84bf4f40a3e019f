"""Line-of-sight near-field channel generation from panel geometry.

Each entry is ``exp(j*kappa*d) / (4*pi*d)`` for the element-to-element
distance d, i.e. a free-space spherical wave sampled at the panels. An
optional Friis-style switch multiplies the amplitude by the wavelength for
cross-checks against tools using that convention; it is off by default.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DegenerateGeometryError
from .geometry import ArrayGeometry, pairwise_distances, wavelength as _wavelength

FOUR_PI = 4.0 * np.pi


@dataclass(frozen=True)
class ChannelPair:
    """Forward (TX->RIS, K x N) and backward (RIS->RX, M x K) channel matrices."""

    h_forward: np.ndarray
    h_backward: np.ndarray
    wavelength: float
    kappa: float  # 2*pi / wavelength, rad/m

    def __post_init__(self):
        self.h_forward.setflags(write=False)
        self.h_backward.setflags(write=False)

    @property
    def n_tx(self) -> int:
        return self.h_forward.shape[1]

    @property
    def n_ris(self) -> int:
        return self.h_forward.shape[0]

    @property
    def n_rx(self) -> int:
        return self.h_backward.shape[0]


def los_channel(distances: np.ndarray, kappa: float, friis_amplitude: bool = False) -> np.ndarray:
    """Entrywise free-space response ``exp(j*kappa*d) / (4*pi*d)``.

    ``friis_amplitude=True`` uses ``lambda/(4*pi*d)`` instead (adds the
    wavelength factor); rate comparisons between designs are unaffected by
    this common scaling, absolute rates are not.
    """
    d = np.asarray(distances, dtype=float)
    if d.size == 0 or np.min(d) <= 0.0:
        raise DegenerateGeometryError(
            f"non-positive propagation distance (min {np.min(d) if d.size else 'n/a'}); "
            "co-located elements have a diverging free-space amplitude"
        )
    amp = 1.0 / (FOUR_PI * d)
    if friis_amplitude:
        amp = amp * (2.0 * np.pi / kappa)
    return amp * np.exp(1j * kappa * d)


def make_channel_pair(
    tx: ArrayGeometry,
    ris: ArrayGeometry,
    rx: ArrayGeometry,
    carrier_freq: float,
    friis_amplitude: bool = False,
) -> ChannelPair:
    """Build the forward and backward line-of-sight channels at a carrier frequency."""
    lam = _wavelength(carrier_freq)
    kappa = 2.0 * np.pi / lam
    h_f = los_channel(pairwise_distances(tx, ris), kappa, friis_amplitude)
    h_b = los_channel(pairwise_distances(ris, rx), kappa, friis_amplitude)
    return ChannelPair(h_forward=h_f, h_backward=h_b, wavelength=lam, kappa=kappa)


def dump_channel_csv(matrix: np.ndarray, path) -> None:
    """Dump a complex matrix for cross-validation against other tools.

    Layout: first line ``rows,cols``; then one line per matrix row
    (row-major) holding interleaved ``re,im`` pairs, floats via repr.
    """
    m = np.asarray(matrix, dtype=complex)
    lines = [f"{m.shape[0]},{m.shape[1]}"]
    for row in m:
        parts = []
        for v in row:
            parts.append(repr(float(v.real)))
            parts.append(repr(float(v.imag)))
        lines.append(",".join(parts))
    Path(path).write_text("\n".join(lines) + "\n")


def load_channel_csv(path) -> np.ndarray:
    "Inverse of dump_channel_csv."
    lines = Path(path).read_text().splitlines()
    rows, cols = (int(v) for v in lines[0].split(","))
    out = np.empty((rows, cols), dtype=complex)
    for i in range(rows):
        vals = [float(v) for v in lines[1 + i].split(",")]
        re = np.array(vals[0::2])
        im = np.array(vals[1::2])
        out[i] = re + 1j * im
    return out
