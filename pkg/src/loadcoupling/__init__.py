"""Energy minimization in interference-coupled cellular networks.

Solvers for the load coupling equation (load from power and rates), the
power coupling equation (power from load and rates), rate satisfiability via
the coupling matrix spectral radius, and the full-load minimum-energy point.
"""
__version__ = "0.1.0"

from .errors import (DomainError, LoadCouplingError, NotImplementableError,
                     PowerDivergenceError, ScenarioError, UnsatisfiableError)
from .feasibility import (SatisfiabilityReport, build_lambda, is_satisfiable,
                          spectral_radius)
from .load_solver import SolveReport, Termination, check_feasible_load, solve_load
from .model import EnergyReport, Network, energy, load_map, sinr
from .optimizer import (BaselineResult, OptimizationResult, SweepTable,
                        convergence_trace, minimize_energy, sample_load_region,
                        sweep_demand, sweep_load, uniform_power_baseline)
from .power_solver import (EtaContext, IapOptions, Mode, eta, iap, iap_capped,
                           interference_map, solve_cell_power)
from .scenario_io import (Scenario, SyntheticSpec, from_gain_table, generate_synthetic,
                          load_scenario, save_scenario)
