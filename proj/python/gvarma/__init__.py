"""Forecasting and tracking of time series on graphs."""

from ._core import (
    Forecast,
    GpVarModel,
    Graph,
    GVarmaModel,
    InvalidInput,
    NumericalError,
    SpectralBasis,
    fit_gpvar,
    fit_gvarma,
    gpvar_predict,
    gpvar_simulate,
    gvarma_predict,
    gvarma_simulate,
    ijft,
    jft,
    knn_graph,
    random_gpvar,
    random_gvarma,
    random_graph,
    rnmse,
    spectral_basis,
    split,
    track,
)

__all__ = [
    "Forecast",
    "GpVarModel",
    "Graph",
    "GVarmaModel",
    "InvalidInput",
    "NumericalError",
    "SpectralBasis",
    "fit_gpvar",
    "fit_gvarma",
    "gpvar_predict",
    "gpvar_simulate",
    "gvarma_predict",
    "gvarma_simulate",
    "ijft",
    "jft",
    "knn_graph",
    "random_gpvar",
    "random_gvarma",
    "random_graph",
    "rnmse",
    "spectral_basis",
    "split",
    "track",
]
