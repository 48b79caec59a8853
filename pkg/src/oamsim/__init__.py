"""Twisted-electron electromagnetic moments and intrinsic-OAM ring dynamics."""

from .am_core import (AmOperators, PolarizationState, QuantumState,
                      build_operators, coherent_state,
                      initial_polarization_closed, polarization_state,
                      polarization_tensor, polarization_vector, tensor_mixture)
from .dynamics import (ComparisonReport, DynamicsScenario, PolarizationSeries,
                       ScanResult, SplittingTable, build_hamiltonian,
                       closed_form, closed_form_frozen, closed_form_resonance,
                       closed_form_tmp, evolve_oracle, level_splitting,
                       oracle_vs_closed_form, quadrupole_coefficient_frozen,
                       quadrupole_coefficient_resonance, resonance_scan)
from .errors import ConfigError, ConvergenceError, DomainError
from .moments import (EcqmTensor, MomentSet, beam_diameter,
                      delta_omega_estimate, ecqm, eqm_scale_check,
                      intrinsic_eqm, moment_set, quadrupole_tensor_operator,
                      spectroscopic_eqm, tmp_coefficient, tmp_electron,
                      tmp_energy_shift)
from .ring_config import (Kinematics, LandauGeometry, RingSetup,
                          field_gradients, frozen_residual, frozen_setup,
                          kinematics, landau_geometry, larmor_omega)

__version__ = "0.1.0"
