"""Distinguishability of bosonic states under Gaussian, W+ and unrestricted measurements."""

__version__ = "0.1.0"

from .gaussian_core import (
    CoherentConstellation,
    GaussianMixturePdf,
    GaussianPdf,
    GaussianState,
    SymplecticCircuit,
    apply_circuit,
    coherent_overlap,
    condition_on_homodyne,
    wigner_of_coherent,
    wigner_of_constellation,
    wigner_of_thermal,
)
from .fock_oracle import (
    density_from_constellation,
    fidelity_fock,
    hs_norm_sq_gram,
    quantum_chernoff,
    trace_distance_fock,
    trace_distance_gram,
)
from .wigner_metrics import (
    classical_chernoff_equal_cov,
    classical_chernoff_mc,
    l1_distance_equal_cov,
    l1_distance_mc,
)
from .gocc_sim import GoccProtocol, gocc_norm_from_error, heterodyne_sample, run_protocol_error_prob, wplus_bias
from .hiding import HidingParams, capacity_awgn, capacity_noiseless, choose_L, run_hiding_experiment
from .bounds import corollary_energy_bound, optimize_corollary_c, proposition_povm_bias, tower_audit, verify_wplus_validity
