"""Working-precision context threaded through every numeric operation."""

from __future__ import annotations

from dataclasses import dataclass, field

import mpmath
from mpmath import mpf, mpc

mp = mpmath.mp

# Extra mantissa bits used inside operations so that results are correct
# at the declared precision.
GUARD_BITS = 16


class NonFiniteValue(ArithmeticError):
    """A NaN or infinity appeared where a finite number is required."""


@dataclass(frozen=True)
class PrecisionCtx:
    """Reproducible numeric environment: mantissa bits plus derived tolerances.

    ``eps`` is the comparison tolerance 2**(-bits + GUARD_BITS);
    ``quad_rel_tol`` is the target relative quadrature error.  All results
    produced under one context are bit-for-bit reproducible for identical
    inputs.
    """

    bits: int = 512
    quad_rel_tol: mpf = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        if self.bits < 64:
            raise ValueError(f"bits must be >= 64, got {self.bits}")
        if self.quad_rel_tol is None:
            object.__setattr__(self, "quad_rel_tol", mpf(2) ** (-400))
        else:
            object.__setattr__(self, "quad_rel_tol", mpf(self.quad_rel_tol))
        if self.quad_rel_tol < self.eps:
            raise ValueError("quad_rel_tol must be >= eps")

    @property
    def eps(self) -> mpf:
        return mpf(2) ** (-self.bits + GUARD_BITS)

    @property
    def dps(self) -> int:
        """Decimal digits that round-trip the full mantissa."""
        return int(self.bits * 0.30103) + 10

    def workprec(self, extra: int = 0):
        """Context manager setting mpmath working precision (plus guard)."""
        return mp.workprec(self.bits + GUARD_BITS + extra)

    def to_str(self, x) -> str:
        """Full-precision decimal string (round-trips through mpf at self.bits)."""
        with mp.workprec(self.bits):
            return mpmath.nstr(+mpf(x), self.dps, strip_zeros=False)


DEFAULT_CTX = PrecisionCtx()


def ensure_finite(x, what: str = "value"):
    """Reject NaN/inf: error states must never propagate as numbers."""
    vals = (x.real, x.imag) if isinstance(x, mpc) else (x,)
    for v in vals:
        if mpmath.isnan(v) or mpmath.isinf(v):
            raise NonFiniteValue(f"{what} is not finite: {x}")
    return x
