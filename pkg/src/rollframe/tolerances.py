"""Default numerical tolerances.

All functions take these as keyword defaults so callers (and experiment
configs) can override them per call.
"""

RANK_TOL = 1e-9
LIN_TOL = 1e-9
FD_TOL = 1e-5
QUAD_TOL = 1e-8
ODE_TOL = 1e-6
STRAIGHT_TOL = 1e-5

# central-difference step for first derivatives, scaled by max(1, |x|)
FD_STEP = 1e-5
# second derivatives need a wider stencil: rounding grows like eps / h**2
FD_HESS_STEP = 1e-3

# condition number above which a fundamental-solution sample is rejected
COND_MAX = 1e12

DEFAULTS = {
    "rank_tol": RANK_TOL,
    "lin_tol": LIN_TOL,
    "fd_tol": FD_TOL,
    "quad_tol": QUAD_TOL,
    "ode_tol": ODE_TOL,
    "straight_tol": STRAIGHT_TOL,
}
