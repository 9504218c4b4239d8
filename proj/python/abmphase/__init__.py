"""Data-driven phase-transition discovery for interacting-agent ensembles.

Thin wrapper over the C++ core. The heavy lifting (SDE simulation,
diffusion maps, network training, bifurcation analysis) happens in the
compiled extension; this package re-exports it.
"""

from ._abmphase import (  # noqa: F401
    DiffusionEmbedding,
    EulerNetModel,
    ModelParams,
    SimConfig,
    YNetModel,
    __version__,
    bifurcation_diagram,
    config_schema,
    diffusion_amplitude,
    drift,
    fit_embedding,
    histogram,
    load_euler_net,
    load_ynet,
    local_linear_residuals,
    moments,
    nystrom_extend,
    run_pipeline,
    sample_pearson,
    save_euler_net,
    save_ynet,
    simulate_trajectory,
    train_euler_net,
    train_ynet,
)

__all__ = [
    "DiffusionEmbedding",
    "EulerNetModel",
    "ModelParams",
    "SimConfig",
    "YNetModel",
    "__version__",
    "bifurcation_diagram",
    "config_schema",
    "diffusion_amplitude",
    "drift",
    "fit_embedding",
    "histogram",
    "load_euler_net",
    "load_ynet",
    "local_linear_residuals",
    "moments",
    "nystrom_extend",
    "run_pipeline",
    "sample_pearson",
    "save_euler_net",
    "save_ynet",
    "simulate_trajectory",
    "train_euler_net",
    "train_ynet",
]
