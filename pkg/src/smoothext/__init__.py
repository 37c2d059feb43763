"""Finite-element solver for sign-changing transmission problems by optimal control.

The equation ``-div(eps grad u) = f`` with ``eps`` positive on one region and
negative on the other is split into two coercive problems coupled through a
control on the interface; the control minimizes the interface jump plus a
mesh-dependent Tikhonov term.
"""
from . import analysis, bench, fem, linalg, mesh, optimize, quadrature, transmission
from .analysis import corner_lambda0, corner_wellposed, annulus_wellposed
from .bench import make_case, run_convergence
from .mesh import Mesh, generate_corner_halfdisk, generate_disk_annulus, generate_square_split
from .optimize import OptimizerOptions, Schedule, minimize
from .transmission import TransmissionProblem, prepare

__version__ = "0.1.0"

__all__ = [
    "analysis", "bench", "fem", "linalg", "mesh", "optimize", "quadrature", "transmission",
    "corner_lambda0", "corner_wellposed", "annulus_wellposed", "make_case", "run_convergence",
    "Mesh", "generate_corner_halfdisk", "generate_disk_annulus", "generate_square_split",
    "OptimizerOptions", "Schedule", "minimize", "TransmissionProblem", "prepare",
]
