"""Parabolic double phase energies, anisotropic space-time mollification and
numerical checks of smooth approximation with energy convergence."""

from .cylinder import Cylinder, shrink_cylinder
from .exponents import ExponentSet
from .functionals import EnergyBreakdown, energy_F, energy_P, integrand_H, norm_C_L2, norm_Lp, norm_Lp_W1p
from .gaps import GapVerdict, blowup_exponent, check_gap, gap_bounded, gap_general, gap_s
from .grid import GridField, gradient, read_grid, write_grid
from .kernel import MollifierKernel, ParabolicMollifier, kernel_eval, kernel_mass, mollify
from .scenarios import Scenario, load_scenario, run, suite
from .verification import (
    ConvergenceReport, ModulusTable, check_I_decomposition, check_jensen_gradient, check_star_chain,
    gradient_blowup_rate, run_convergence, time_modulus,
)
from .weights import HolderSeminormEstimator, Weight, constant_weight, ramp_power_weight, shifted_weight

__all__ = [
    "Cylinder", "shrink_cylinder", "ExponentSet", "EnergyBreakdown", "energy_F", "energy_P", "integrand_H",
    "norm_C_L2", "norm_Lp", "norm_Lp_W1p", "GapVerdict", "blowup_exponent", "check_gap", "gap_bounded",
    "gap_general", "gap_s", "GridField", "gradient", "read_grid", "write_grid", "MollifierKernel",
    "ParabolicMollifier", "kernel_eval", "kernel_mass", "mollify", "Scenario", "load_scenario", "run", "suite",
    "ConvergenceReport", "ModulusTable", "check_I_decomposition", "check_jensen_gradient", "check_star_chain",
    "gradient_blowup_rate", "run_convergence", "time_modulus", "HolderSeminormEstimator", "Weight",
    "constant_weight", "ramp_power_weight", "shifted_weight",
]
