"""Near-field RIS-aided MIMO link simulator.

Library layout:

* ``geometry`` - panel construction and 3-D topology placement
* ``channel`` - line-of-sight spherical-wave channel matrices
* ``spectrum`` - SVD, water-filling, closed-form capacity, effective rank
* ``ris`` - the three surface designs and the diagonalization diagnostic
* ``experiments`` - sweep engine, maps, CCDFs, beam projections
* ``cli`` - command-line front end (``rismimo`` entry point)
"""

from .channel import ChannelPair, los_channel, make_channel_pair
from .config import ScenarioConfig, dbm_to_mw, mw_to_dbm, parse_config, serialize_config
from .errors import (
    ConfigError,
    DegenerateGeometryError,
    InvalidDimensionError,
    InvalidInputError,
    NumericalFailureError,
    SimulationError,
)
from .geometry import ArrayGeometry, build_array, half_wavelength, pairwise_distances, place_topology
from .ris import (
    NumericalOptions,
    NumericalResult,
    RisConfiguration,
    compose_channel,
    d_ris_focusing,
    d_ris_numerical,
    diagonalization_residual,
    nd_ris_optimal,
)
from .spectrum import (
    ModeSpectrum,
    SvdTriple,
    closed_form_capacity,
    effective_rank,
    mutual_information,
    svd,
    water_filling,
)

__version__ = "0.1.0"

__all__ = [
    "ArrayGeometry",
    "ChannelPair",
    "ConfigError",
    "DegenerateGeometryError",
    "InvalidDimensionError",
    "InvalidInputError",
    "ModeSpectrum",
    "NumericalFailureError",
    "NumericalOptions",
    "NumericalResult",
    "RisConfiguration",
    "ScenarioConfig",
    "SimulationError",
    "SvdTriple",
    "build_array",
    "closed_form_capacity",
    "compose_channel",
    "d_ris_focusing",
    "d_ris_numerical",
    "dbm_to_mw",
    "diagonalization_residual",
    "effective_rank",
    "half_wavelength",
    "los_channel",
    "make_channel_pair",
    "mutual_information",
    "mw_to_dbm",
    "nd_ris_optimal",
    "pairwise_distances",
    "parse_config",
    "place_topology",
    "serialize_config",
    "svd",
    "water_filling",
]
