"""Scenario configuration: parsing, validation, serialization, unit conversion.

The config grammar is flat ``key = value`` text with at most one dotted
section prefix (``topology.d_f = 7.0``). ``#`` starts a comment. Angles are
radians; every angle key also accepts a ``_deg`` alternative. Powers cross
the boundary in dBm (``tx_power_dbm``, ``noise_dbm``) or directly in linear
milliwatts (``tx_power_mw``, ``noise_mw``); internally everything is linear
mW. Unknown keys are rejected by name.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .errors import ConfigError

DEFAULT_CARRIER_FREQ = 28e9
DEFAULT_TX_DIMS = (4, 8)  # (rows along z, cols along y) -> N = 32
DEFAULT_RIS_DIMS = (2, 512)  # K = 1024
DEFAULT_RX_DIMS = (1, 16)  # M = 16
DEFAULT_TX_POWER_DBM = 0.0
DEFAULT_NOISE_DBM = -97.0


def dbm_to_mw(dbm: float) -> float:
    "Convert a dBm level to linear milliwatts."
    return 10.0 ** (dbm / 10.0)


def mw_to_dbm(mw: float) -> float:
    "Convert linear milliwatts to dBm."
    if mw <= 0:
        raise ConfigError(f"power must be positive to express in dBm, got {mw} mW")
    return 10.0 * math.log10(mw)


@dataclass
class ScenarioConfig:
    """Full description of one transmitter/RIS/receiver deployment.

    Distances in meters, angles in radians, powers in linear mW. Angles
    ``theta_f`` / ``theta_b`` are measured from the RIS normal (+x axis),
    counterclockwise in the xy-plane. ``focus_tx`` / ``focus_rx`` override
    the focusing points of the diagonal RIS design; ``None`` means the
    mid-point of the corresponding panel. ``spacing`` of ``None`` means
    half-wavelength at ``carrier_freq``.
    """

    d_f: float = 7.0
    d_b: float = 7.0
    theta_f: float = 0.0
    theta_b: float = math.pi
    psi_f: float = 0.0
    psi_b: float = 0.0
    tx_dims: tuple[int, int] = DEFAULT_TX_DIMS
    ris_dims: tuple[int, int] = DEFAULT_RIS_DIMS
    rx_dims: tuple[int, int] = DEFAULT_RX_DIMS
    carrier_freq: float = DEFAULT_CARRIER_FREQ
    tx_power: float = dbm_to_mw(DEFAULT_TX_POWER_DBM)
    noise_power: float = dbm_to_mw(DEFAULT_NOISE_DBM)
    spacing: float | None = None
    focus_tx: np.ndarray | None = None
    focus_rx: np.ndarray | None = None

    def validate(self) -> None:
        "Raise ConfigError naming the violated bound on the first bad field."
        positives = [
            ("d_f", self.d_f),
            ("d_b", self.d_b),
            ("carrier_freq", self.carrier_freq),
            ("tx_power", self.tx_power),
            ("noise_power", self.noise_power),
        ]
        for name, value in positives:
            if not (value > 0):
                raise ConfigError(f"{name} must be > 0, got {value}")
        for name, dims in [("tx", self.tx_dims), ("ris", self.ris_dims), ("rx", self.rx_dims)]:
            rows, cols = dims
            if rows < 1 or cols < 1:
                raise ConfigError(f"{name} dims must be >= 1 per axis, got {rows}x{cols}")
        if self.spacing is not None and not (self.spacing > 0):
            raise ConfigError(f"spacing must be > 0, got {self.spacing}")
        for name, point in [("focus.tx", self.focus_tx), ("focus.rx", self.focus_rx)]:
            if point is not None and np.asarray(point, dtype=float).shape != (3,):
                raise ConfigError(f"{name} must be a 3-D point")

    @property
    def n_tx(self) -> int:
        return self.tx_dims[0] * self.tx_dims[1]

    @property
    def n_ris(self) -> int:
        return self.ris_dims[0] * self.ris_dims[1]

    @property
    def n_rx(self) -> int:
        return self.rx_dims[0] * self.rx_dims[1]

    def scaled(self, scale: float) -> "ScenarioConfig":
        """Shrink (or grow) every panel axis count by ``scale``, min 1 per axis."""
        if scale <= 0:
            raise ConfigError(f"scale must be > 0, got {scale}")

        def scale_dims(dims):
            return (max(1, round(dims[0] * scale)), max(1, round(dims[1] * scale)))

        return replace(
            self,
            tx_dims=scale_dims(self.tx_dims),
            ris_dims=scale_dims(self.ris_dims),
            rx_dims=scale_dims(self.rx_dims),
        )


_ANGLE_KEYS = {
    "topology.theta_f": "theta_f",
    "topology.theta_b": "theta_b",
    "topology.psi_f": "psi_f",
    "topology.psi_b": "psi_b",
}

_SCALAR_KEYS = {
    "carrier_freq_hz",
    "spacing_m",
    "topology.d_f",
    "topology.d_b",
    "tx_power_dbm",
    "tx_power_mw",
    "noise_dbm",
    "noise_mw",
}

_DIM_KEYS = {"tx.rows", "tx.cols", "ris.rows", "ris.cols", "rx.rows", "rx.cols"}

_POINT_KEYS = {"focus.tx", "focus.rx"}

_KNOWN_KEYS = (
    _SCALAR_KEYS
    | _DIM_KEYS
    | _POINT_KEYS
    | set(_ANGLE_KEYS)
    | {k + "_deg" for k in _ANGLE_KEYS}
)


def _parse_float(key: str, raw: str) -> float:
    try:
        return float(raw)
    except ValueError:
        raise ConfigError(f"{key}: expected a number, got {raw!r}") from None


def _parse_int(key: str, raw: str) -> int:
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(f"{key}: expected an integer, got {raw!r}") from None


def _parse_point(key: str, raw: str) -> np.ndarray:
    parts = [p.strip() for p in raw.split(",")]
    if len(parts) != 3:
        raise ConfigError(f"{key}: expected 'x, y, z', got {raw!r}")
    return np.array([_parse_float(key, p) for p in parts])


def parse_config_text(text: str) -> ScenarioConfig:
    """Parse config text into a validated ScenarioConfig over the built-in defaults."""
    entries: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if key in entries:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        entries[key] = value

    unknown = sorted(set(entries) - _KNOWN_KEYS)
    if unknown:
        raise ConfigError("unknown keys: " + ", ".join(unknown))

    cfg = ScenarioConfig()

    for pair in [("tx_power_dbm", "tx_power_mw"), ("noise_dbm", "noise_mw")]:
        if pair[0] in entries and pair[1] in entries:
            raise ConfigError(f"give only one of {pair[0]} / {pair[1]}")
    for rad_key in _ANGLE_KEYS:
        if rad_key in entries and rad_key + "_deg" in entries:
            raise ConfigError(f"give only one of {rad_key} / {rad_key}_deg")

    if "carrier_freq_hz" in entries:
        cfg.carrier_freq = _parse_float("carrier_freq_hz", entries["carrier_freq_hz"])
    if "spacing_m" in entries:
        cfg.spacing = _parse_float("spacing_m", entries["spacing_m"])
    if "topology.d_f" in entries:
        cfg.d_f = _parse_float("topology.d_f", entries["topology.d_f"])
    if "topology.d_b" in entries:
        cfg.d_b = _parse_float("topology.d_b", entries["topology.d_b"])
    if "tx_power_dbm" in entries:
        cfg.tx_power = dbm_to_mw(_parse_float("tx_power_dbm", entries["tx_power_dbm"]))
    if "tx_power_mw" in entries:
        cfg.tx_power = _parse_float("tx_power_mw", entries["tx_power_mw"])
    if "noise_dbm" in entries:
        cfg.noise_power = dbm_to_mw(_parse_float("noise_dbm", entries["noise_dbm"]))
    if "noise_mw" in entries:
        cfg.noise_power = _parse_float("noise_mw", entries["noise_mw"])

    for key, attr in _ANGLE_KEYS.items():
        if key in entries:
            setattr(cfg, attr, _parse_float(key, entries[key]))
        elif key + "_deg" in entries:
            setattr(cfg, attr, math.radians(_parse_float(key + "_deg", entries[key + "_deg"])))

    for panel in ("tx", "ris", "rx"):
        rows_key, cols_key = f"{panel}.rows", f"{panel}.cols"
        dims = list(getattr(cfg, f"{panel}_dims"))
        if rows_key in entries:
            dims[0] = _parse_int(rows_key, entries[rows_key])
        if cols_key in entries:
            dims[1] = _parse_int(cols_key, entries[cols_key])
        setattr(cfg, f"{panel}_dims", (dims[0], dims[1]))

    if "focus.tx" in entries:
        cfg.focus_tx = _parse_point("focus.tx", entries["focus.tx"])
    if "focus.rx" in entries:
        cfg.focus_rx = _parse_point("focus.rx", entries["focus.rx"])

    cfg.validate()
    return cfg


def parse_config(path) -> ScenarioConfig:
    "Parse a scenario config file; an empty file yields the built-in full-scale defaults."
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    return parse_config_text(text)


def serialize_config(cfg: ScenarioConfig) -> str:
    """Canonical text form; reparsing yields a field-wise identical config.

    Base units only (Hz, m, rad, linear mW), floats via repr (shortest
    round-trip), keys in a fixed order; this is also the hashing input.
    """
    lines = [
        f"carrier_freq_hz = {cfg.carrier_freq!r}",
        f"tx_power_mw = {cfg.tx_power!r}",
        f"noise_mw = {cfg.noise_power!r}",
        f"topology.d_f = {cfg.d_f!r}",
        f"topology.d_b = {cfg.d_b!r}",
        f"topology.theta_f = {cfg.theta_f!r}",
        f"topology.theta_b = {cfg.theta_b!r}",
        f"topology.psi_f = {cfg.psi_f!r}",
        f"topology.psi_b = {cfg.psi_b!r}",
        f"tx.rows = {cfg.tx_dims[0]}",
        f"tx.cols = {cfg.tx_dims[1]}",
        f"ris.rows = {cfg.ris_dims[0]}",
        f"ris.cols = {cfg.ris_dims[1]}",
        f"rx.rows = {cfg.rx_dims[0]}",
        f"rx.cols = {cfg.rx_dims[1]}",
    ]
    if cfg.spacing is not None:
        lines.append(f"spacing_m = {cfg.spacing!r}")
    if cfg.focus_tx is not None:
        lines.append("focus.tx = " + ", ".join(repr(float(v)) for v in cfg.focus_tx))
    if cfg.focus_rx is not None:
        lines.append("focus.rx = " + ", ".join(repr(float(v)) for v in cfg.focus_rx))
    return "\n".join(lines) + "\n"


def config_hash(cfg: ScenarioConfig) -> str:
    "SHA-256 of the canonical serialization; stable across platforms."
    return hashlib.sha256(serialize_config(cfg).encode()).hexdigest()
