"""Bifurcation of Delta u + e^u = 0 on the strip R x [0, lambda] from
the y-independent solution log(2 sech^2 x)."""
from .grid import (StripGrid, StripField, HalfOperators, trivial_solution_2d,
                   base_exponential, residual_2d, sup_norm, zero_field)
from .spectrum import (Profile1D, SpectrumReport, poschl_teller_ground,
                       poschl_teller_levels, pt_dense_matrix, x_levels,
                       bound_state_kappa, linearized_spectrum, per_mode_spectrum,
                       full_spectrum, detect_bifurcations, product_field)
from .bifurcation import (BifurcationDiagnostics, Branch, BranchPoint, NewtonHistory,
                          bifurcation_diagnostics, newton_solve, continue_branch,
                          fit_branch, rescale_to_exact_period, period_epsilon,
                          extend_by_reflection, neumann_defect, seam_residuals,
                          classified_solution, stencil_residual,
                          validate_stencil_order)

__all__ = [n for n in dir() if not n.startswith("_")]
