"""Spectral-Galerkin heat and strongly damped wave semiflows at resonance.

The package covers the Dirichlet eigenbasis and its resonant splitting, the
Nemytskii operator by Gauss-Legendre quadrature, exponential integrators,
checks of the Landesman-Lazer / strong resonance / geometric conditions,
Conley-index exponent bookkeeping, and numerical searches for connecting
orbits.
"""
from .conditions import (ConditionReport, check_geometric, check_landesman_lazer,
                         check_strong_resonance)
from .conley import (ConleyVerdict, ResonantAtZeroError, cumulative_dims, equilibrium_exponent,
                     invariant_set_exponent, orbit_verdict)
from .nemytskii import (Nonlinearity, QuadratureGrid, apply_nemytskii, arctan, build_grid,
                        constant_kernel, constant_mode, cubic, parse_nonlinearity, saturating,
                        synthesize, verify_bound, zero)
from .orbits import (ConnectionReport, Equilibrium, Scenario, drift_demo, find_equilibria,
                     search_connections, shoot_unstable)
from .semiflow import Trajectory, WaveState, heat_flow, phi1, phi2, wave_flow
from .spectral_core import (EigenSystem, ModalField, SpectralDecomposition, SpectralDomain,
                            build_eigensystem, decompose, fractional_norm, interval,
                            mode_count_below, mode_count_for_groups, parse_domain, project,
                            rectangle)

__version__ = "0.1.0"

__all__ = [
    "SpectralDomain", "EigenSystem", "ModalField", "SpectralDecomposition", "interval", "rectangle",
    "parse_domain", "build_eigensystem", "mode_count_below", "mode_count_for_groups", "decompose",
    "project", "fractional_norm",
    "Nonlinearity", "QuadratureGrid", "arctan", "saturating", "constant_kernel", "constant_mode",
    "cubic", "zero", "parse_nonlinearity", "build_grid", "synthesize", "apply_nemytskii",
    "verify_bound",
    "WaveState", "Trajectory", "phi1", "phi2", "heat_flow", "wave_flow",
    "ConditionReport", "check_landesman_lazer", "check_strong_resonance", "check_geometric",
    "ConleyVerdict", "ResonantAtZeroError", "cumulative_dims", "equilibrium_exponent",
    "invariant_set_exponent", "orbit_verdict",
    "Equilibrium", "ConnectionReport", "Scenario", "find_equilibria", "shoot_unstable",
    "drift_demo", "search_connections",
]
