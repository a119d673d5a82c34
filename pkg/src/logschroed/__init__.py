"""Radial solver, diagnostics, and spectra for the logarithmic Schroedinger
equation -Lap u + V(|x|) u = B(|x|) u log u^2 with singular or repulsive
potentials, plus the power-nonlinearity family and its small-exponent limit."""

from .potential import (CheckResult, PerturbationPair, Potential,
                        check_uniqueness_condition, constant, from_table,
                        inverted_harmonic, liouville_potential,
                        liouville_potential_slope, log_power,
                        potential_growth_advisory, power_admissible)
from .radial_ivp import (CROSSES_ZERO, GROWS, UNDETERMINED, Classification,
                         IVPConfig, IVPSolution, LogProblem, PowerProblem,
                         bessel_mode, integrate, startup)
from .shooting import (GroundProfile, GroundState, LargeBetaReport,
                       ShootingResult, build_profile, find_all_roots,
                       find_ground, large_beta_check, scan_beta)
from .variational import (RadialProfile, energy_I, nehari_J, nehari_project,
                          profile_from_ground, sphere_area)
from .diagnostics import (EnergyProfile, RatioReport, TailReport,
                          energy_pattern_check, liouville_transform,
                          pointwise_energy, ratio_monotonicity, tail_checks,
                          uniqueness_defect)
from .spectrum import (LinearizedOperator, NondegeneracyVerdict,
                       SpectrumResult, assemble, lowest_eigenvalues,
                       lowest_of, nondegeneracy_check, operator_from_arrays,
                       universal_pair_rayleigh)
from .powerlaw import (DecayFit, LimitStudy, PowerRun, decay_bound_check,
                       limit_study, power_log_bound, radial_bound_check,
                       reference_log_solution, rescaled_profile, solve_power)

__version__ = "0.1.0"
