"""Radial 3D solutions of the biharmonic Liouville equation by fixed point."""
from .grid import RadialGrid, RadialProfile
from .fixed_point import (PicardReport, EpsContinuation, apply_T_eps, picard_solve,
                          continue_eps_to_zero, default_schedule,
                          integral_equation_residual, tail_bound)
from .diagnostics import (laplacian_radial_green, laplacian_fd, pohozaev_residual,
                          volume, volume_simpson, volume_mapped_trapezoid,
                          rescale_solution, bilaplacian, biharmonic_residual,
                          linear_tail_fit, far_field_fit)

__all__ = [n for n in dir() if not n.startswith("_")]
