"""Free-energy numerical toolkit.

Canonical-ensemble thermodynamics, two-model KL minimization (Gaussian
mixture vs. kernel density), regularized single-hidden-layer networks,
and finite-difference reaction-diffusion dynamics, plus a deterministic
CLI experiment runner.
"""

__version__ = "0.1.0"

from .thermo import EnsembleSpec, ThermoReport, compute_thermodynamics, ensemble_free_energy
from .mixture import (
    BandwidthOptions,
    BandwidthResult,
    Dataset,
    EmFit,
    EmOptions,
    GmmModel,
    KCandidate,
    KdeModel,
    KlEstimate,
    SelectionReport,
    estimate_bandwidth,
    fit_gmm_em,
    gmm_log_density,
    kde_density,
    kde_log_density,
    kl_free_energy,
    responsibilities,
    select_cluster_number,
    silverman_bandwidth_sq,
)
from .fnn import (
    DivergenceError,
    LossBreakdown,
    SlfnModel,
    SupervisedSet,
    TrainResult,
    contractive_ae_loss,
    estimate_reg_param,
    forward,
    input_jacobian,
    loss_regularized,
    train_gd,
    train_pil,
)
from .rd import (
    Field1D,
    RdState2D,
    SimulationResult,
    Snapshot,
    StepControl,
    free_energy_1d,
    gray_scott_kinetics,
    pattern_metric,
    simulate,
    stability_bound_1d,
    stability_bound_2d,
    step_gradient_flow_1d,
    step_turing_2d,
)
from .datagen import BlobSpec, RegressionSpec, gen_blobs, gen_regression
from .seeding import derive_rng

__all__ = [
    "BandwidthOptions",
    "BandwidthResult",
    "BlobSpec",
    "Dataset",
    "DivergenceError",
    "EmFit",
    "EmOptions",
    "EnsembleSpec",
    "Field1D",
    "GmmModel",
    "KCandidate",
    "KdeModel",
    "KlEstimate",
    "LossBreakdown",
    "RdState2D",
    "RegressionSpec",
    "SelectionReport",
    "SimulationResult",
    "SlfnModel",
    "Snapshot",
    "StepControl",
    "SupervisedSet",
    "ThermoReport",
    "TrainResult",
    "compute_thermodynamics",
    "contractive_ae_loss",
    "derive_rng",
    "ensemble_free_energy",
    "estimate_bandwidth",
    "estimate_reg_param",
    "fit_gmm_em",
    "forward",
    "free_energy_1d",
    "gen_blobs",
    "gen_regression",
    "gmm_log_density",
    "gray_scott_kinetics",
    "input_jacobian",
    "kde_density",
    "kde_log_density",
    "kl_free_energy",
    "loss_regularized",
    "pattern_metric",
    "responsibilities",
    "select_cluster_number",
    "silverman_bandwidth_sq",
    "simulate",
    "stability_bound_1d",
    "stability_bound_2d",
    "step_gradient_flow_1d",
    "step_turing_2d",
    "train_gd",
    "train_pil",
]
