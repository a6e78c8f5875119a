"""Numerical toolkit for weighted Bergman kernels, equilibrium measures and
quantum ergodicity of random polynomial sections on the Riemann sphere."""

__version__ = "0.1.0"

from .dictionary import TestDictionary, TestFunction, default_dictionary
from .ensembles import (
    HaarFrame,
    RandomSection,
    expected_mass_check,
    make_rng,
    sample_gaussian,
    sample_haar,
    sample_spherical,
)
from .equilibrium import (
    EquilibriumMeasure,
    Envelope,
    compare_routes,
    density_of_states_defects,
    envelope_oracle,
    equilibrium_measure,
    phi_extremal_sup,
)
from .exceptions import (
    ConditioningError,
    ConfigurationError,
    QErgodicError,
    RootFindingError,
    SolverError,
)
from .grid import KAPPA, GridDensity, GridSpec, PotentialGrid
from .hilb import BergmanSpace, bergman_density, bergman_kernel, gram_matrix, orthonormalize
from .model import SupportMeasure, Weight, bernstein_markov_ratio, build_measure, build_weight
from .onbstats import (
    orbit_integral_check,
    szego_traces,
    toeplitz,
    y_statistic,
    ergodic_property_experiment,
)
from .qe import QEReport, g_moment_mc, l1_potential_error, offdiag_second_moment, qe_defect
from .qe import variance_xn_experiment
from .zeros import empirical_zero_measure, expected_zero_current, section_roots
from .zeros import zero_convergence_experiment

__all__ = [name for name in dir() if not name.startswith("_")]
