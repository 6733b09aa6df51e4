"""Direct evaluators for the main asymptotic formulas, per regime.

Each evaluator renders one printed formula: oscillatory bulk, exponentially
small outer, and Airy edge.  Amplitudes consistently use the half-shifted
ratio (n + 1/2)/N, which is within the formulas' own O(1/N) slack and makes
the two printed bulk forms agree to rounding (the executable content of the
phase lemma).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import mpmath
from mpmath import mpf

from .precision import PrecisionCtx
from .numerics import airy_ai
from . import semiclassics as sc
from .semiclassics import SemiFrame, OutsideBulk


class OutsideRegime(ValueError):
    """Evaluator called outside its regime window."""


class RegimeTag(enum.Enum):
    BULK = "bulk"
    OUTER = "outer"
    EDGE = "edge"


def classify_regime(frame: SemiFrame, z_real, delta=None) -> tuple:
    """(tag, edge index or None) for nonnegative real z.

    One window half-width delta for both the edge disks and the bulk/outer
    margins; classification preference is Edge > Bulk > Outer.
    """
    z = mpf(z_real)
    if z < 0:
        raise ValueError("classify nonnegative z; negative z follows by parity")
    d = frame.delta if delta is None else mpf(delta)
    if abs(z - frame.z1) <= d:
        return RegimeTag.EDGE, 1
    if abs(z - frame.z2) <= d:
        return RegimeTag.EDGE, 2
    if frame.z1 + d < z < frame.z2 - d:
        return RegimeTag.BULK, None
    return RegimeTag.OUTER, None


@dataclass(frozen=True)
class EdgeFrame:
    """Edge-evaluation constants at turning point j."""

    j: int
    Dn: mpf
    sigma0: int
    un_coeffs: tuple   # the 1/N-corrected degree-6 polynomial under the root


def edge_frame(frame: SemiFrame, j: int) -> EdgeFrame:
    with frame.ctx.workprec(32):
        n = frame.n
        sigma0 = (2 - j) * (n // 2)
        dn = frame.params.N ** (mpf(1) / 6) * mpmath.sqrt(frame.params.g)
        if sigma0 % 2:
            dn = -dn
        return EdgeFrame(j=j, Dn=dn, sigma0=sigma0, un_coeffs=frame.nu2_coeffs)


def _amplitude_bulk(frame: SemiFrame, z, sinphi):
    # (1/sqrt(pi)) (g/lam')^{1/4} sqrt(z)/sqrt(sin phi)
    return (frame.params.g / frame.lam_prime) ** mpf("0.25") \
        * mpmath.sqrt(z) / (mpmath.sqrt(mpmath.pi) * mpmath.sqrt(sinphi))


def bulk_psi(frame: SemiFrame, z_real):
    """Oscillatory approximation between the turning points."""
    with frame.ctx.workprec(32):
        z = mpf(z_real)
        try:
            phase = sc.phase_rhs_arccos(frame, z)
        except OutsideBulk as exc:
            raise OutsideRegime(str(exc)) from exc
        q, _ = sc._bulk_qr(frame, z)
        sinphi = mpmath.sqrt(1 - q * q)
        return _amplitude_bulk(frame, z, sinphi) * mpmath.cos(phase + mpmath.pi / 4)


def bulk_psi_semiclassical(frame: SemiFrame, z_real):
    """The same approximation in its |U|^{-1/4}-normalized printed form.

    Amplitude from the potential polynomial at the half-shifted ratio; phase
    shared with ``bulk_psi`` (that the two printed forms coincide is the
    executable phase identity).
    """
    with frame.ctx.workprec(32):
        z = mpf(z_real)
        try:
            phase = sc.phase_rhs_arccos(frame, z)
        except OutsideBulk as exc:
            raise OutsideRegime(str(exc)) from exc
        p = frame.params
        u0 = z ** 2 * (((p.g * z ** 2 + p.t) / 2) ** 2 - frame.lam_prime * p.g)
        amp = z * mpmath.sqrt(p.g / mpmath.pi) / abs(u0) ** mpf("0.25")
        return amp * mpmath.cos(phase + mpmath.pi / 4)


def outer_psi(frame: SemiFrame, z_real):
    """Exponentially small approximation outside the oscillatory band.

    Nonnegative z only (negative z follows from parity); the inner-gap sign
    alternates with floor(n/2).
    """
    with frame.ctx.workprec(32):
        z = mpf(z_real)
        if z < 0:
            raise OutsideRegime("outer evaluator takes z >= 0; use parity")
        tag, _ = classify_regime(frame, z)
        if tag is not RegimeTag.OUTER:
            raise OutsideRegime(f"z={mpmath.nstr(z, 8)} not in the outer regime")
        q, r = sc._bulk_qr(frame, z)
        phi = mpmath.acosh(abs(q))
        chi = mpmath.acosh(abs(r))
        n = frame.n
        sigma = 0 if z > frame.z2 else n // 2
        sgn_chi = 1 if n % 2 == 0 else -1
        cn = (frame.params.g / frame.lam_prime) ** mpf("0.25") / (2 * mpmath.sqrt(mpmath.pi))
        body = mpmath.exp(-(n + mpf(1) / 2) / 2 * (mpmath.sinh(2 * phi) / 2 - phi)
                          + sgn_chi * chi / 4)
        val = cn * mpmath.sqrt(z) / mpmath.sqrt(mpmath.sinh(phi)) * body
        return -val if sigma % 2 else val


def edge_psi(frame: SemiFrame, z_real, j: int):
    """Airy approximation in the turning-point window at z_j."""
    with frame.ctx.workprec(32):
        z = mpf(z_real)
        ef = edge_frame(frame, j)
        w, wp = sc._w_and_deriv(frame, z, j)
        arg = frame.params.N ** (mpf(2) / 3) * w
        return ef.Dn * z / mpmath.sqrt(abs(wp)) * airy_ai(arg, frame.ctx)


def hn_asympt(frame: SemiFrame):
    """Leading asymptotics of the squared norm h_n (equals exp(2 lambda_n^0))."""
    with frame.ctx.workprec(32):
        p = frame.params
        lam = frame.lam
        return 2 * mpmath.pi * mpmath.sqrt(frame.Rn0) * mpmath.exp(
            p.N * p.t ** 2 / (4 * p.g)
            - p.N * lam / 2 * (1 + mpmath.log(p.g / lam)))
