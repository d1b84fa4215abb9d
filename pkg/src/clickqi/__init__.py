"""Gaussian-state quantum illumination with Geiger-mode click detection."""

from .conditioning import (
    TMSV,
    DegenerateHeraldingError,
    UnsupportedShapeError,
    herald_click,
    herald_no_click,
    photon_distribution,
    wigner_mixture,
)
from .detection import DetectorModel, click_prob, no_click_prob
from .gaussian import (
    GaussianMixture,
    GaussianState,
    SymplecticMatrix,
    beamsplitter_symplectic,
    coherent_state,
    loss_channel,
    mean_photon_number,
    overlap,
    partial_trace,
    symplectic_eigenvalues,
    symplectic_form,
    thermal_state,
    vacuum_state,
    wigner,
)
from .illumination import (
    Scenario,
    ShotLikelihoods,
    match_click_probability,
    p_click_h0,
    p_click_h1_coherent,
    p_click_h1_pnst,
    p_click_h1_vst,
    posterior_update,
    return_state_h1,
    single_shot_error,
)
from .sequential import (
    EnsembleSummary,
    TrajectoryConfig,
    TrajectoryRecord,
    paired_comparison,
    run_ensemble,
    run_trajectory,
)

__version__ = "0.1.0"
