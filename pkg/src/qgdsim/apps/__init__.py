"""Application drivers built on the descent engines."""

from .classify import (
    CentroidFit,
    SVMModel,
    active_set,
    assign_cluster,
    centroid_objective,
    fit_centroid,
    fit_clusters,
    first_argmax,
    svm_classify,
    svm_to_objective,
    train_svm,
)
from .common import Dataset, contraction_steps, descend_from, growth_descent, overlap_readout, quadratic_rate
from .linear import (
    FitReport,
    LinearSolveReport,
    LinearSystem,
    fit_least_squares,
    linear_to_objective,
    lsq_to_objective,
    power_features,
    predict_fit,
    solve_linear,
)
from .network import (
    QUADRATIC_RELU,
    QUARTIC_RELU,
    NetworkArch,
    encode_network_params,
    nn_forward_encoded,
    nn_forward_quantum,
    nn_loss_objective,
    train_network,
)
from .spectral import (
    EigenEstimate,
    IsingModel,
    covariance,
    deflate_objective,
    energy_readout,
    ising_excited_state,
    ising_ground_state,
    ising_objective,
    pca_objective,
    pca_project,
    principal_direction,
)

__all__ = [name for name in dir() if not name.startswith("_")]
