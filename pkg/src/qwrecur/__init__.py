"""Recurrence of coined quantum walks on Z^d.

Modules
-------
coins      coin operators, displacement sets and initial states
evolution  exact position-space evolution and return-probability series
polya      Polya numbers, decay fits, recurrence classification
spectral   band structure, stationary points, flat-band analysis
formats    CSV/JSON readers and writers
cli        the ``qwrecur`` command
"""

from .coins import (
    CoinOperator,
    CoinState,
    DisplacementSet,
    fourier_coin,
    grover_coin,
    grover_family_coin,
    hadamard,
    named_state,
    tensor_coin,
    unbiased_coin_1d,
)
from .evolution import ProductWalk, ReturnSeries, evolve_auto, evolve_collect, evolve_product
from .polya import classify_recurrence, fit_decay_exponent, polya_partial, tensor_polya_estimate
from .spectral import band_structure, find_saddles, flat_band_overlap

__version__ = "0.1.0"

__all__ = [
    "CoinOperator",
    "CoinState",
    "DisplacementSet",
    "fourier_coin",
    "grover_coin",
    "grover_family_coin",
    "hadamard",
    "named_state",
    "tensor_coin",
    "unbiased_coin_1d",
    "ProductWalk",
    "ReturnSeries",
    "evolve_auto",
    "evolve_collect",
    "evolve_product",
    "classify_recurrence",
    "fit_decay_exponent",
    "polya_partial",
    "tensor_polya_estimate",
    "band_structure",
    "find_saddles",
    "flat_band_overlap",
]
