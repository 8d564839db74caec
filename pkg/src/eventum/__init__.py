"""Counting-measurement simulator for a decaying two-level atom."""

from .atom import AtomParams, DilationOps, analytic_rho, build_dilation, channel_apply, integrate_master, lindblad_rhs, spontaneous_decay_law
from .chainspace import (
    Chain,
    ChainVector,
    CoherentParams,
    chain_split,
    coherent_eval,
    expectation_analytic,
    expectation_mc,
    expectation_quadrature,
    mc_expectations,
    number_operator_eval,
    projector_eval,
    psi_t_closed,
    psi_t_eval,
    sample_poisson_chain,
    semi_tensor_apply,
)
from .config import ExperimentConfig, default_config, load_config, read_config_file
from .filtering import (
    ObservationRecord,
    conditional_counts,
    conditional_expectation,
    conditional_ket,
    kappa,
    observation_probabilities,
    output_distribution,
    renormalized_sigma,
    sample_observation,
    sde_replay,
    tower_check,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
