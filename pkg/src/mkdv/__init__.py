"""Pseudospectral mKdV toolkit: evolution, wave-packet probes, scattering profile
extraction, Painleve II matching and approximate-solution construction."""

__version__ = "0.1.0"

from .grid import (Grid, Field, ConservedTriple, make_grid, to_spectrum, from_spectrum,
                   forward_transform, inverse_transform, airy_propagate,
                   spectral_derivative, dealias, conserved, write_snapshot, read_snapshot)
from .special import (airy_ai, log_gamma, theta_correction, q_sigma,
                      ConnectionCoefficients, connection_coefficients)
from .evolve import (EvolveConfig, SolverState, DivergenceError, PowerLawPerturbation,
                     nonlinearity, step_ifrk4, evolve, initial_data, soliton_profile,
                     vector_field_diagnostics, h11_size, sponge_profile)
from .painleve import (PainleveSolution, PainleveDivergence, left_asymptote,
                       solve_painleve, right_match)
from .wavepacket import (PacketSpec, GammaTrace, GammaProbe, phase_phi, packet, gamma,
                         gamma_trace, ode_phase_solution)
from .asymptotics import (RegionPartition, ScatteringProfile, classify, region_masks,
                          extract_profile, oscillatory_prediction,
                          oscillatory_prediction_field, selfsimilar_prediction,
                          region_error_norms, decay_check, selfsimilar_trace)
from .completeness import (PrescribedData, prescribed_data, dyadic_bands, zeta,
                           regularized_W, QTable, build_q_table, u_app,
                           match_experiment)
