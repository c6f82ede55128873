"""csgi: time-varying causal coupling inference for time-series pairs.

The library scores directed coupling with the Comparative Surrogate Granger
Index (CSGI): the normalized gap in explained variance between a predictor
fed the real candidate driver and one fed a surrogate stand-in. Predictors
range from linear autoregressions (slgc) to a two-headed temporal-
convolutional autoencoder (taci); convergent cross mapping and transfer
entropy are included as reference methods, alongside simulators for the
benchmark systems with known ground-truth coupling.
"""

__version__ = "0.1.0"

from . import ccm, dynsys, errors, metrics, nn, pipeline, slgc, surrogate, taci, te, timeseries
from .dynsys import (
    CouplingSchedule,
    SimOutput,
    simulate_coupled_ar,
    simulate_henon,
    simulate_henon_nonstationary,
    simulate_rossler_lorenz,
    simulate_two_species,
)
from .metrics import CsgiTimecourse, csgi, directionality, egci, r_squared, rolling_csgi
from .surrogate import SurrogateKind, fourier_surrogate, uniform_surrogate
from .taci import TaciConfig, build_model, desk_config, evaluate_pair, train_pair
from .timeseries import TimeSeries, autocorrelation_time, make_sequences, zscore

__all__ = [
    "__version__",
    "ccm",
    "dynsys",
    "errors",
    "metrics",
    "nn",
    "pipeline",
    "slgc",
    "surrogate",
    "taci",
    "te",
    "timeseries",
    "TimeSeries",
    "zscore",
    "autocorrelation_time",
    "make_sequences",
    "CouplingSchedule",
    "SimOutput",
    "simulate_rossler_lorenz",
    "simulate_two_species",
    "simulate_coupled_ar",
    "simulate_henon",
    "simulate_henon_nonstationary",
    "SurrogateKind",
    "uniform_surrogate",
    "fourier_surrogate",
    "r_squared",
    "egci",
    "csgi",
    "directionality",
    "rolling_csgi",
    "CsgiTimecourse",
    "TaciConfig",
    "desk_config",
    "build_model",
    "train_pair",
    "evaluate_pair",
]
