"""Christoffel-Darboux kernel, eigenvalue densities, and the two scaling limits.

Index convention: the rank-(m+1) projection kernel onto span(psi_0..psi_m)
is written in its two-term Christoffel-Darboux form with sqrt(R_{m+1});
densities are normalized by the number of summed states so that the total
mass is exactly one.
"""

from __future__ import annotations

from dataclasses import dataclass

import mpmath
from mpmath import mpf

from .precision import PrecisionCtx
from .numerics import airy_ai, airy_ai_prime
from .ortho import RecurrenceTable, WeightParams, eval_psi, eval_psi_deriv


class DiagonalRequested(ValueError):
    """The two-point formula is singular at z = w; use the diagonal form."""


class OutsideBulkPoint(ValueError):
    """Scaling center must sit where the limit density is positive."""


def qn_kernel(table: RecurrenceTable, ncut: int, z, w):
    """Two-point kernel in Christoffel-Darboux form (projection rank ncut+1)."""
    if ncut + 1 > table.M:
        raise IndexError(f"ncut={ncut} needs table degree >= {ncut + 1}")
    ctx = PrecisionCtx(bits=table.bits)
    with ctx.workprec(32):
        z, w = mpf(z), mpf(w)
        if z == w:
            raise DiagonalRequested("z == w: use qn_diag")
        r = mpmath.sqrt(table.R[ncut + 1])
        return r * (eval_psi(table, ncut + 1, z) * eval_psi(table, ncut, w)
                    - eval_psi(table, ncut, z) * eval_psi(table, ncut + 1, w)) / (z - w)


def qn_sum(table: RecurrenceTable, ncut: int, z, w):
    """Direct-sum form sum_{j=0}^{ncut} psi_j(z) psi_j(w) (the oracle route)."""
    ctx = PrecisionCtx(bits=table.bits)
    with ctx.workprec(32):
        z, w = mpf(z), mpf(w)
        return mpmath.fsum(eval_psi(table, j, z) * eval_psi(table, j, w)
                           for j in range(ncut + 1))


def qn_diag(table: RecurrenceTable, ncut: int, z):
    """Diagonal kernel value via the exact-derivative confluent form.

    Never computed as a z -> w limit of the two-point formula (catastrophic
    cancellation); the derivative identity keeps it exact.
    """
    if ncut + 4 > table.M:
        raise IndexError(f"diagonal with ncut={ncut} needs table degree >= {ncut + 4}")
    ctx = PrecisionCtx(bits=table.bits)
    with ctx.workprec(32):
        z = mpf(z)
        r = mpmath.sqrt(table.R[ncut + 1])
        return r * (eval_psi_deriv(table, ncut + 1, z) * eval_psi(table, ncut, z)
                    - eval_psi_deriv(table, ncut, z) * eval_psi(table, ncut + 1, z))


def density_pn(table: RecurrenceTable, ncut: int, z):
    """Finite-size eigenvalue density: diagonal kernel over the state count.

    Normalized by ncut+1 (the projection rank) so the total mass is exactly 1.
    """
    return qn_diag(table, ncut, z) / (ncut + 1)


def density_limit(params: WeightParams, z):
    """Limiting density (g|z|/2 pi) sqrt((z^2-z1^2)(z2^2-z^2)) on the two cuts."""
    params.require_two_cut_at_unit_ratio()
    ctx = PrecisionCtx()
    with ctx.workprec(32):
        z = mpf(z)
        t, g = params.t, params.g
        z1sq = (-t - 2 * mpmath.sqrt(g)) / g
        z2sq = (-t + 2 * mpmath.sqrt(g)) / g
        v = (z * z - z1sq) * (z2sq - z * z)
        if v <= 0:
            return mpf(0)
        return g * abs(z) / (2 * mpmath.pi) * mpmath.sqrt(v)


def sine_scaled(table: RecurrenceTable, ncut: int, z0, u, v):
    """Bulk-rescaled kernel [m p(z0)]^{-1} Q_m(z0 + u/(m p), z0 + v/(m p)).

    Converges to sin(pi(u-v))/(pi(u-v)) as the size grows; returned at
    finite size for rate studies.
    """
    ctx = PrecisionCtx(bits=table.bits)
    with ctx.workprec(32):
        z0, u, v = mpf(z0), mpf(u), mpf(v)
        p0 = density_limit(table.params, z0)
        if not p0 > 0:
            raise OutsideBulkPoint(f"limit density vanishes at z0={mpmath.nstr(z0, 8)}")
        scale = ncut * p0
        if u == v:
            return qn_diag(table, ncut, z0 + u / scale) / scale
        return qn_kernel(table, ncut, z0 + u / scale, z0 + v / scale) / scale


def sine_kernel_limit(u, v):
    with PrecisionCtx().workprec(32):
        u, v = mpf(u), mpf(v)
        if u == v:
            return mpf(1)
        return mpmath.sin(mpmath.pi * (u - v)) / (mpmath.pi * (u - v))


def edge_scaling_constant(params: WeightParams):
    """c = 2^{1/3} sqrt(g) z2 at unit ratio: the edge scaling rate."""
    with PrecisionCtx().workprec(32):
        t, g = params.t, params.g
        z2 = mpmath.sqrt((-t + 2 * mpmath.sqrt(g)) / g)
        return 2 ** (mpf(1) / 3) * mpmath.sqrt(g) * z2


def airy_scaled(table: RecurrenceTable, ncut: int, u, v):
    """Edge-rescaled kernel (c m^{2/3})^{-1} Q_m at z2 + (u, v)/(c m^{2/3})."""
    ctx = PrecisionCtx(bits=table.bits)
    with ctx.workprec(32):
        u, v = mpf(u), mpf(v)
        params = table.params
        t, g = params.t, params.g
        z2 = mpmath.sqrt((-t + 2 * mpmath.sqrt(g)) / g)
        c = edge_scaling_constant(params)
        scale = c * mpf(ncut) ** (mpf(2) / 3)
        if u == v:
            return qn_diag(table, ncut, z2 + u / scale) / scale
        return qn_kernel(table, ncut, z2 + u / scale, z2 + v / scale) / scale


def airy_kernel_limit(u, v, ctx: PrecisionCtx):
    """[Ai(u) Ai'(v) - Ai'(u) Ai(v)]/(u - v), confluent on the diagonal."""
    with ctx.workprec(32):
        u, v = mpf(u), mpf(v)
        if u == v:
            return airy_ai_prime(u, ctx) ** 2 - u * airy_ai(u, ctx) ** 2
        return (airy_ai(u, ctx) * airy_ai_prime(v, ctx)
                - airy_ai_prime(u, ctx) * airy_ai(v, ctx)) / (u - v)


# ---------------------------------------------------------------------------
# edge frame scalars (unit tests of the scaling geometry)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EdgeScalingFrame:
    """Closed-form scalars entering the edge scaling limit at z2."""

    lam_prime: mpf
    n: int
    z1: mpf
    z2: mpf
    c: mpf
    phi0_prime_at_z2: mpf
    rho_at_z2: mpf
    omega_at_z2: mpf


def make_edge_scaling_frame(params: WeightParams, n: int, ctx: PrecisionCtx) -> EdgeScalingFrame:
    with ctx.workprec(32):
        t, g = params.t, params.g
        lam_p = (n + mpf(1) / 2) / params.N
        z1 = mpmath.sqrt((-t - 2 * mpmath.sqrt(lam_p * g)) / g)
        z2 = mpmath.sqrt((-t + 2 * mpmath.sqrt(lam_p * g)) / g)
        kappa_13 = 2 ** (mpf(1) / 3) * lam_p ** (mpf(1) / 6) * mpmath.sqrt(g) * z2
        rho2 = -2 ** (-mpf(2) / 3) * lam_p ** (-mpf(1) / 3)
        sgn = 1 if n % 2 == 0 else -1
        om2 = -sgn * 2 ** (mpf(1) / 3) * lam_p ** (-mpf(1) / 3) * z1 / (4 * z2)
        return EdgeScalingFrame(lam_prime=lam_p, n=n, z1=z1, z2=z2,
                                c=edge_scaling_constant(params),
                                phi0_prime_at_z2=kappa_13,
                                rho_at_z2=rho2, omega_at_z2=om2)


def _edge_q(frame: EdgeScalingFrame, params: WeightParams, z):
    return (params.g * z ** 2 + params.t) / (2 * mpmath.sqrt(frame.lam_prime * params.g))


def phi0_func(frame: EdgeScalingFrame, params: WeightParams, z):
    """phi0(z) = [(3/2) int_{z2}^z sqrt(U0(v))]^{2/3} for z > z2, closed form."""
    ctx = PrecisionCtx()
    with ctx.workprec(32):
        z = mpf(z)
        q = _edge_q(frame, params, z)
        sq = mpmath.sqrt(q * q - 1)
        integral = frame.lam_prime / 2 * (q * sq - mpmath.log(q + sq))
        return (mpf(3) / 2 * integral) ** (mpf(2) / 3)


def rho_func(frame: EdgeScalingFrame, params: WeightParams, z):
    """rho(z) = xi(z)/sqrt(phi0(z)) with xi = -acosh(q)/2, for z > z2."""
    ctx = PrecisionCtx()
    with ctx.workprec(32):
        z = mpf(z)
        q = _edge_q(frame, params, z)
        return -mpmath.acosh(q) / 2 / mpmath.sqrt(phi0_func(frame, params, z))


def omega_func(frame: EdgeScalingFrame, params: WeightParams, z):
    """omega(z) = eta(z)/sqrt(phi0(z)) with eta = -(-1)^n acosh(r)/4, z > z2."""
    ctx = PrecisionCtx()
    with ctx.workprec(32):
        z = mpf(z)
        q = _edge_q(frame, params, z)
        rp = 2 * mpmath.sqrt(frame.lam_prime * params.g)
        r = (rp - params.t * q) / (rp * q - params.t)
        sgn = 1 if frame.n % 2 == 0 else -1
        return -sgn * mpmath.acosh(r) / 4 / mpmath.sqrt(phi0_func(frame, params, z))
