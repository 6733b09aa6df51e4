"""Extended-precision laboratory for orthogonal polynomials with the
double-well quartic weight exp(-N(t z^2/2 + g z^4/4)), t < 0, g > 0.

Oracle recurrence tables (Stieltjes orthogonalization at hundreds of bits)
provide the ground truth against which the closed-form semiclassical
apparatus is verified: the string-equation residuals, the Lax-pair
identities, WKB and Airy parametrices of the approximate Riemann-Hilbert
solution, the Plancherel-Rotach-type formulas in all three regimes, and the
sine/Airy scaling limits of the Christoffel-Darboux kernel.
"""

from .precision import PrecisionCtx, DEFAULT_CTX
from .ortho import WeightParams, RecurrenceTable, build_table, weight, \
    eval_pn, eval_psi, eval_psi_deriv, r1_closed_form
from .freud import freud_residual, recursive_identity_residual, freud_forward, \
    formal_cycle, FormalCycle, rn0
from .semiclassics import SemiFrame, make_frame, turning_points, psi0, psi_wkb, \
    stokes_constants, lambda_n0
from .asympt import bulk_psi, bulk_psi_semiclassical, outer_psi, edge_psi, \
    hn_asympt, classify_regime, RegimeTag
from .kernels import qn_kernel, qn_diag, density_pn, density_limit, \
    sine_scaled, airy_scaled, sine_kernel_limit, airy_kernel_limit

__version__ = "0.1.0"

__all__ = [
    "PrecisionCtx", "DEFAULT_CTX",
    "WeightParams", "RecurrenceTable", "build_table", "weight",
    "eval_pn", "eval_psi", "eval_psi_deriv", "r1_closed_form",
    "freud_residual", "recursive_identity_residual", "freud_forward",
    "formal_cycle", "FormalCycle", "rn0",
    "SemiFrame", "make_frame", "turning_points", "psi0", "psi_wkb",
    "stokes_constants", "lambda_n0",
    "bulk_psi", "bulk_psi_semiclassical", "outer_psi", "edge_psi",
    "hn_asympt", "classify_regime", "RegimeTag",
    "qn_kernel", "qn_diag", "density_pn", "density_limit",
    "sine_scaled", "airy_scaled", "sine_kernel_limit", "airy_kernel_limit",
    "__version__",
]
