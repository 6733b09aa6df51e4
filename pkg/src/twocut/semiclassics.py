"""WKB and Airy parametrices for the approximate Riemann-Hilbert solution.

Branch conventions follow one rule: every multivalued scalar is reduced to
principal-branch evaluations of expressions that are provably cut-free on
the needed domain.  In particular the turning-point variable is computed as

    w(z) = (z - zN) * rho(z)**(2/3),
    rho(z) = 3 * int_0^1 tau^2 sqrt(A(zN + tau^2 (z - zN))) dtau,

where A is the polynomial nu^2(u)/(u - zN); rho is analytic and stays near
the positive reals on the whole turning-point neighborhood, so no branch
tracking is required and w is real with sign(z - zN) on the real axis.

Left half-plane values of the WKB matrix are defined through the parity
relation (the raw principal-branch product is only single-valued for
Re z > 0); consistency of this glue across the imaginary axis is exercised
by the tests.
"""

from __future__ import annotations

from dataclasses import dataclass

import mpmath
from mpmath import mpf, mpc

from .precision import PrecisionCtx, ensure_finite
from .matrix2 import Matrix2C, sigma3_conj
from .numerics import airy_ai_complex, find_root, integrate
from .ortho import WeightParams
from .freud import rn0


class OnCut(ArithmeticError):
    """Evaluation on a branch cut without a side designation."""


class InsideOmega(ValueError):
    """WKB formula requested inside the turning-point neighborhoods."""


class OutsideDomain(ValueError):
    """Turning-point formula requested outside its validity region."""


class NearTurningPoint(ValueError):
    """Diagonalizer requested inside the guard radius of a turning point."""


class AmbiguousRegion(ValueError):
    """A boundary point needs a side hint to resolve region membership."""


class OutsideBulk(ValueError):
    """Operation restricted to the open interval between the turning points."""


@dataclass(frozen=True)
class TurningPoints:
    lam: mpf
    z1: mpf
    z2: mpf
    z1N: mpf
    z2N: mpf


@dataclass(frozen=True)
class StokesData:
    s1: mpc
    s2: mpc
    s3: mpc
    s4: mpc


@dataclass(frozen=True)
class SemiFrame:
    """Derived constants for one (weight, degree) pair.

    Carries the period-2 leading coefficients, turning points (exact and
    1/N-shifted), the constants of the WKB normalization, and the ellipse
    around the right cut.  All downstream operations are pure in the frame.
    """

    params: WeightParams
    n: int
    ctx: PrecisionCtx
    lam: mpf
    lam_prime: mpf
    Rn0: mpf          # leading coefficient at index n
    Rpm0: mpf         # leading coefficient at the two neighbor indices
    alpha_n: mpf
    z1: mpf
    z2: mpf
    z1N: mpf
    z2N: mpf
    z0: mpf           # ellipse center
    a_axis: mpf
    b_axis: mpf
    delta: mpf        # bulk/edge margin
    guard: mpf        # turning-point guard radius
    nu2_coeffs: tuple  # descending coefficients of the degree-6 polynomial nu^2


def make_frame(params: WeightParams, n: int, ctx: PrecisionCtx,
               b_frac: float = 0.15, delta_frac: float = 0.1,
               margin_frac: float = 0.02) -> SemiFrame:
    """Build the semiclassical frame for degree n.

    Requires lambda = n/N inside the two-cut window, with a configurable
    relative margin off 0 and off the critical ratio.
    """
    with ctx.workprec(32):
        t, g, N = params.t, params.g, params.N
        lam = mpf(n) / N
        lam_cr = params.lambda_cr
        if not (margin_frac * lam_cr < lam < (1 - margin_frac) * lam_cr):
            raise ValueError(
                f"lambda={mpmath.nstr(lam, 8)} outside the margined two-cut window "
                f"(0, {mpmath.nstr(lam_cr, 8)})")
        lam_p = (n + mpf(1) / 2) / N
        s = mpmath.sqrt(t ** 2 - 4 * lam * g)
        sign = 1 if n % 2 else -1     # (-1)^n with n even -> -1 branch
        Rn0 = (-t + sign * s) / (2 * g)
        Rpm0 = (-t - sign * s) / (2 * g)
        alpha_n = -sign * s / 2       # (-1)^n sqrt(t^2-4 lam g)/2
        z1 = mpmath.sqrt((-t - 2 * mpmath.sqrt(lam * g)) / g)
        z2 = mpmath.sqrt((-t + 2 * mpmath.sqrt(lam * g)) / g)

        # nu^2 = z^2[(g z^2 + t)^2/4 - lam' g] + (t/2 + g Rn0)/N, descending coeffs
        c6 = g ** 2 / 4
        c4 = t * g / 2
        c2 = t ** 2 / 4 - lam_p * g
        c0 = (t / 2 + g * Rn0) / N
        coeffs = (c6, mpf(0), c4, mpf(0), c2, mpf(0), c0)

        def nu2(x):
            return _polyval(coeffs, x)

        def nu2d(x):
            return _polyval(_polyder(coeffs), x)

        z1N = find_root(nu2, nu2d, z1, ctx)
        z2N = find_root(nu2, nu2d, z2, ctx)

        z0 = (z1 + z2) / 2
        b_axis = mpf(b_frac) * (z2 - z1)
        a_axis = mpmath.sqrt((z0 - z1) ** 2 + b_axis ** 2)
        if not z0 - a_axis > 0:
            raise ValueError("ellipse would contain the origin; shrink b_frac")
        return SemiFrame(
            params=params, n=n, ctx=ctx, lam=lam, lam_prime=lam_p,
            Rn0=Rn0, Rpm0=Rpm0, alpha_n=alpha_n,
            z1=z1, z2=z2, z1N=z1N, z2N=z2N,
            z0=z0, a_axis=a_axis, b_axis=b_axis,
            delta=mpf(delta_frac) * (z2 - z1),
            guard=mpf("0.05") * (z2 - z1),
            nu2_coeffs=coeffs,
        )


def turning_points(frame: SemiFrame) -> TurningPoints:
    return TurningPoints(lam=frame.lam, z1=frame.z1, z2=frame.z2,
                         z1N=frame.z1N, z2N=frame.z2N)


def _polyval(coeffs, x):
    acc = coeffs[0]
    for c in coeffs[1:]:
        acc = acc * x + c
    return acc


def _polyder(coeffs):
    d = len(coeffs) - 1
    return tuple(c * (d - i) for i, c in enumerate(coeffs[:-1]))


def _polydiv_linear(coeffs, r):
    """Divide a descending-coefficient polynomial by (x - r); drop the remainder."""
    out = [coeffs[0]]
    for c in coeffs[1:-1]:
        out.append(c + r * out[-1])
    return tuple(out)


def _as_number(z):
    return mpc(z) if isinstance(z, (complex, mpc)) else mpf(z)


# ---------------------------------------------------------------------------
# scalar building blocks
# ---------------------------------------------------------------------------

def a0_matrix(frame: SemiFrame, z) -> Matrix2C:
    """Coefficient matrix of the model linear system at the period-2 values."""
    with frame.ctx.workprec(32):
        z = _as_number(z)
        p = frame.params
        a11 = frame.alpha_n * z - p.g * z ** 3 / 2
        a12 = mpmath.sqrt(frame.Rn0) * p.g * z ** 2
        return Matrix2C(a11, a12, -a12, -a11)


def _xvar(frame: SemiFrame, z):
    p = frame.params
    return (p.t + p.g * z ** 2) / (2 * mpmath.sqrt(frame.lam * p.g))


def _sqrt_x2m1(x):
    # principal sqrt(x-1)*sqrt(x+1): cut exactly on x in [-1, 1], positive for
    # x > 1, negative for x < -1, upper-side limit on the cut for real input
    return mpmath.sqrt(x - 1) * mpmath.sqrt(x + 1)


def mu(frame: SemiFrame, z):
    """Spectral square root mu(z) = (zg/2) sqrt((z^2-z1^2)(z^2-z2^2)).

    Branch positive on (z2, inf), cuts on the two bulk intervals; real input
    on a cut returns the upper-side limit.
    """
    with frame.ctx.workprec(32):
        z = _as_number(z)
        x = _xvar(frame, z)
        return z * mpmath.sqrt(frame.lam * frame.params.g) * _sqrt_x2m1(x)


def mu_prime(frame: SemiFrame, z):
    """d mu/dz on the same branch."""
    with frame.ctx.workprec(32):
        z = _as_number(z)
        p = frame.params
        lg = frame.lam * p.g
        x = _xvar(frame, z)
        sq = _sqrt_x2m1(x)
        m = z * mpmath.sqrt(lg) * sq
        # 2 mu mu' = 2 z lg (x^2-1) + z^2 lg * 2 x x',  x' = g z / sqrt(lg)
        return (z * lg * (x * x - 1) + z ** 3 * p.g * mpmath.sqrt(lg) * x) / m


def xi(frame: SemiFrame, z):
    """Phase primitive xi(z) = int_{z2}^z mu, in closed form.

    Analytic off the single cut (-inf, z2]; real input on the cut returns the
    upper-side limit.
    """
    with frame.ctx.workprec(32):
        z = _as_number(z)
        x = _xvar(frame, z)
        sq = _sqrt_x2m1(x)
        return (frame.lam / 2) * (x * sq - mpmath.log(x + sq))


def xi_bulk_upper(frame: SemiFrame, x_real):
    """Exact upper-side boundary value of xi on the bulk interval (pure imaginary)."""
    with frame.ctx.workprec(32):
        z = mpf(x_real)
        x = _xvar(frame, z)
        if not -1 < x < 1:
            raise OutsideBulk(f"z={mpmath.nstr(z, 8)} not strictly between the turning points")
        s = mpmath.sqrt(1 - x * x)
        return mpc(0, 1) * (frame.lam / 2) * (x * s - mpmath.acos(x))


def xi_by_quadrature(frame: SemiFrame, z):
    """int_{z2}^z mu along the straight segment, endpoint singularity removed.

    Cross-check for the closed form; the substitution tau = sigma^2 restores
    spectral accuracy at the z2 endpoint.
    """
    with frame.ctx.workprec(32):
        z = _as_number(z)
        dz = z - frame.z2

        def f(sig):
            return sig * mu(frame, frame.z2 + sig * sig * dz)

        return 2 * dz * integrate(f, 0, 1, frame.ctx)


def gamma_lambda(frame: SemiFrame):
    """Constant term of the large-z expansion of xi - V/2 + (n/N) ln z."""
    with frame.ctx.workprec(32):
        t, g = frame.params.t, frame.params.g
        lam = frame.lam
        return t ** 2 / (8 * g) - (lam / 4) * mpmath.log(g / lam) - lam / 4


def _cvar(frame: SemiFrame):
    # c = sqrt(g/lam) Rn0 = x0 - (-1)^n sqrt(x0^2 - 1)
    return mpmath.sqrt(frame.params.g / frame.lam) * frame.Rn0


def a_func(frame: SemiFrame, z):
    """Eigenvector ratio a(z) = (mu - a11)/a12 in its closed form."""
    with frame.ctx.workprec(32):
        z = _as_number(z)
        x = _xvar(frame, z)
        sq = _sqrt_x2m1(x)
        c = _cvar(frame)
        return (frame.lam / frame.params.g) ** mpf("0.25") \
            * (x + sq + c) / (mpmath.sqrt(c) * z)


def a_func_direct(frame: SemiFrame, z):
    """(mu - a11)/a12 straight from the matrix entries (cross-check route)."""
    with frame.ctx.workprec(32):
        z = _as_number(z)
        m = a0_matrix(frame, z)
        return (mu(frame, z) - m.a11) / m.a12


def d_func(frame: SemiFrame, z):
    """d(z) = -(1/2) ln a(z), anchored so d -> 0 at the right turning point."""
    with frame.ctx.workprec(32):
        return -mpmath.log(a_func(frame, z)) / 2


def d_bulk_upper(frame: SemiFrame, x_real):
    """Exact upper-side value of d on the bulk interval (pure imaginary)."""
    with frame.ctx.workprec(32):
        z = mpf(x_real)
        x = _xvar(frame, z)
        if not -1 < x < 1:
            raise OutsideBulk(f"z={mpmath.nstr(z, 8)} not strictly between the turning points")
        c = _cvar(frame)
        aval = (frame.lam / frame.params.g) ** mpf("0.25") \
            * (x + mpc(0, 1) * mpmath.sqrt(1 - x * x) + c) / (mpmath.sqrt(c) * z)
        return -mpmath.log(aval) / 2


def t0_matrix(frame: SemiFrame, z) -> Matrix2C:
    """Eigenvector matrix T0 with det 1; singular at the four turning points."""
    with frame.ctx.workprec(32):
        z = _as_number(z)
        for zt in (frame.z1, frame.z2, -frame.z1, -frame.z2):
            if abs(z - zt) < frame.guard:
                raise NearTurningPoint(
                    f"z={mpmath.nstr(z, 8)} within guard radius of {mpmath.nstr(zt, 8)}")
        x = _xvar(frame, z)
        sq = _sqrt_x2m1(x)
        c = _cvar(frame)
        # (mu - a11)/(2 mu) = zeta3 / zeta1 with the single-valued split
        pref = mpmath.sqrt(x + sq + c) / mpmath.sqrt(2 * sq)
        beta = 1 / a_func(frame, z)
        return Matrix2C(pref, pref * beta, pref * beta, pref)


def nu_sq(frame: SemiFrame, z):
    """The degree-6 polynomial nu^2(z) (the 1/N-corrected spectral square)."""
    with frame.ctx.workprec(32):
        return _polyval(frame.nu2_coeffs, _as_number(z))


def nu(frame: SemiFrame, z_real):
    """nu on the real line: positive beyond z2N, negative on (0, z1N),
    upper-side (positive imaginary) limit between z1N and z2N."""
    with frame.ctx.workprec(32):
        z = mpf(z_real)
        v = nu_sq(frame, z)
        if z >= frame.z2N or (0 < z <= frame.z1N):
            root = mpmath.sqrt(abs(v))
            return root if z >= frame.z2N else -root
        return mpc(0, 1) * mpmath.sqrt(abs(v))


# ---------------------------------------------------------------------------
# turning-point machinery
# ---------------------------------------------------------------------------

def _check_tp_domain(frame: SemiFrame, z, j: int):
    # chart radius: generous enough to cover the ellipse half and the edge
    # window, small enough that the rho-path never meets another zero of A
    zc = _as_number(z)
    zN = frame.z2N if j == 2 else frame.z1N
    if abs(zc - zN) > mpf("0.62") * (frame.z2 - frame.z1):
        raise OutsideDomain(f"z={mpmath.nstr(zc, 8)} outside the chart around "
                            f"{mpmath.nstr(zN, 8)}")
    half_slack = frame.delta / 2
    if j == 2 and zc.real < frame.z1 + half_slack:
        raise OutsideDomain("right turning-point chart needs Re z >= z1 + delta/2")
    if j == 1 and zc.real > frame.z2 - half_slack:
        raise OutsideDomain("left turning-point chart needs Re z <= z2 - delta/2")


def _w_and_deriv(frame: SemiFrame, z, j: int):
    """Analytic (w, w') at z for the chart around z_jN.

    Uses the cut-free rho-integral form; sqrt(A) stays near the positive
    reals on the whole chart, which is asserted.
    """
    _check_tp_domain(frame, z, j)
    ctx = frame.ctx
    with ctx.workprec(32):
        z = _as_number(z)
        zN = frame.z2N if j == 2 else frame.z1N
        quot = _polydiv_linear(frame.nu2_coeffs, zN)   # A = nu^2/(u - zN)
        if j == 1:
            quot = tuple(-c for c in quot)             # A~ = nu^2/(zN - u)
        quot_d = _polyder(quot)
        dz = z - zN

        def sqrt_a(tau):
            aval = _polyval(quot, zN + tau * tau * dz)
            re = aval.real if isinstance(aval, mpc) else aval
            if re <= 0:
                raise OutsideDomain("sqrt(A) left the principal half-plane on the chart")
            return mpmath.sqrt(aval)

        rho = 3 * integrate(lambda tau: tau * tau * sqrt_a(tau), 0, 1, ctx)
        rho_d = mpf(3) / 2 * integrate(
            lambda tau: tau ** 4 * _polyval(quot_d, zN + tau * tau * dz) / sqrt_a(tau),
            0, 1, ctx)
        r23 = rho ** (mpf(2) / 3)
        if j == 2:
            w = dz * r23
            wp = r23 + dz * (mpf(2) / 3) * rho_d / rho ** (mpf(1) / 3)
        else:
            w = -dz * r23
            wp = -r23 - dz * (mpf(2) / 3) * rho_d / rho ** (mpf(1) / 3)
        return ensure_finite(w, "w"), ensure_finite(wp, "w'")


def w_change(frame: SemiFrame, z, j: int):
    """Turning-point variable w(z; z_j): real-analytic on the chart,
    positive on the exponential side of z_jN."""
    return _w_and_deriv(frame, z, j)[0]


def gauge_w(frame: SemiFrame, z, j: int) -> Matrix2C:
    """Gauge matrix W(z; z_j) with the stated positivity branches.

    The j=1 prefactor is realized as sqrt(-a12/w'), which is the principal
    branch equal to -i sqrt(a12/w') on the chart.
    """
    ctx = frame.ctx
    with ctx.workprec(32):
        z = _as_number(z)
        w, wp = _w_and_deriv(frame, z, j)
        m = a0_matrix(frame, z)
        if j == 2:
            pref = mpmath.sqrt(m.a12 / wp)
        else:
            pref = mpmath.sqrt(-m.a12 / wp)
        return Matrix2C(pref, mpf(0),
                        -pref * m.a11 / m.a12, pref * wp / m.a12)


def phi_model(zarg, side: str, j: int, N: int, ctx: PrecisionCtx) -> Matrix2C:
    """Model Airy solutions of the local equation, scaled exactly as printed.

    side is "up" or "down"; the rotated solutions swap (and flip sign)
    between the two turning points so that the same unipotent jump appears.
    """
    with ctx.workprec(32):
        zeta = _as_number(zarg) * mpf(N) ** (mpf(2) / 3)
        om = mpmath.exp(mpc(0, 2) * mpmath.pi / 3)     # e^{2 pi i/3}
        y0, y0p = airy_ai_complex(zeta, ctx)
        if (j == 2 and side == "up") or (j == 1 and side == "down"):
            # y1 = e^{-i pi/6} Ai(e^{-2 pi i/3} zeta)
            a, ap = airy_ai_complex(zeta / om, ctx)
            y, yp = mpmath.exp(mpc(0, -1) * mpmath.pi / 6) * a, \
                mpmath.exp(mpc(0, -1) * 5 * mpmath.pi / 6) * ap
        else:
            # y2 = e^{i pi/6} Ai(e^{2 pi i/3} zeta)
            a, ap = airy_ai_complex(zeta * om, ctx)
            y, yp = mpmath.exp(mpc(0, 1) * mpmath.pi / 6) * a, \
                mpmath.exp(mpc(0, 1) * 5 * mpmath.pi / 6) * ap
        if j == 1:
            y, yp = -y, -yp
        n16 = mpf(N) ** (mpf(1) / 6)
        rt2pi = mpmath.sqrt(2 * mpmath.pi)
        return Matrix2C(n16 * y0 / rt2pi, n16 * y * rt2pi,
                        y0p / n16 / rt2pi, yp / n16 * rt2pi)


def s_matrix() -> Matrix2C:
    """The single nontrivial Stokes matrix [[1, -2 pi i], [0, 1]]."""
    return Matrix2C(mpf(1), mpc(0, -2) * mpmath.pi, mpf(0), mpf(1))


def psi_tp(frame: SemiFrame, z, side: str, j: int) -> Matrix2C:
    """Turning-point parametrix C W(z; z_j) Phi_{u,d}(w(z; z_j))."""
    ctx = frame.ctx
    with ctx.workprec(32):
        w, _ = _w_and_deriv(frame, z, j)
        const = frame.Rn0 ** mpf("-0.25") * mpmath.sqrt(2 * mpmath.pi)
        if j == 1 and frame.n // 2 % 2 == 1:
            const = -const
        W = gauge_w(frame, z, j)
        Phi = phi_model(w, side, j, frame.params.N, ctx)
        return (W @ Phi).scale(const)


def psi_wkb(frame: SemiFrame, z) -> Matrix2C:
    """WKB parametrix on the complement of the two ellipses.

    Right half-plane values come from the principal-branch product; the
    left half-plane is defined by the parity relation (the product itself
    is only single-valued for Re z > 0).  Real input on the gap segment
    returns the upper-side limit.
    """
    ctx = frame.ctx
    with ctx.workprec(32):
        z = _as_number(z)
        e_omega = ((abs(z.real) - frame.z0) / frame.a_axis) ** 2 \
            + (z.imag / frame.b_axis) ** 2
        if e_omega < mpf("0.9999"):
            raise InsideOmega(f"z={mpmath.nstr(z, 8)} lies in a turning-point ellipse")
        if z.real < 0:
            inner = psi_wkb(frame, -z)
            out = sigma3_conj(inner)
            return out if frame.n % 2 == 0 else out.scale(mpf(-1))
        t0 = t0_matrix(frame, z)
        xiv = xi(frame, z)
        c0 = frame.Rn0 ** mpf("-0.25")
        rt2pi = mpmath.sqrt(2 * mpmath.pi)
        # columns scaled by e^{-N xi}/sqrt(2 pi) and e^{+N xi} sqrt(2 pi)
        eneg = mpmath.exp(-frame.params.N * xiv) / rt2pi
        epos = mpmath.exp(frame.params.N * xiv) * rt2pi
        return Matrix2C(c0 * t0.a11 * eneg, c0 * t0.a12 * epos,
                        c0 * t0.a21 * eneg, c0 * t0.a22 * epos)


def _flip_hint(side_hint):
    if side_hint is None:
        return None
    sw = {"up": "down", "down": "up", "left": "right", "right": "left"}
    return ",".join(sw.get(tok, tok) for tok in side_hint.split(","))


def psi0(frame: SemiFrame, z, side_hint: str | None = None) -> Matrix2C:
    """The assembled approximate solution: WKB outside, Airy charts inside,
    parity reflection on the mirrored ellipse.

    side_hint tokens: up/down (real axis inside the ellipse), left/right
    (the vertical chart seam), in/out (the ellipse boundary).
    """
    ctx = frame.ctx
    hints = set() if side_hint is None else set(side_hint.split(","))
    with ctx.workprec(32):
        z = _as_number(z)
        if z.real < 0 or (z.real == 0 and "right" not in hints):
            if z.real == 0 and not ({"left", "right"} & hints):
                raise AmbiguousRegion("imaginary-axis point needs left/right hint")
            inner = psi0(frame, -z, _flip_hint(side_hint))
            out = sigma3_conj(inner)
            return out if frame.n % 2 == 0 else out.scale(mpf(-1))
        e = ((z.real - frame.z0) / frame.a_axis) ** 2 + (z.imag / frame.b_axis) ** 2
        on_boundary = abs(e - 1) <= mpf("1e-12")
        if on_boundary:
            if "in" in hints:
                inside = True
            elif "out" in hints:
                inside = False
            else:
                raise AmbiguousRegion("point on the ellipse boundary needs in/out hint")
        else:
            inside = e < 1
        if not inside:
            return psi_wkb(frame, z)
        # chart side
        if z.imag > 0:
            side = "up"
        elif z.imag < 0:
            side = "down"
        elif "up" in hints:
            side = "up"
        elif "down" in hints:
            side = "down"
        else:
            raise AmbiguousRegion("real-axis point inside the ellipse needs up/down hint")
        # chart index
        if abs(z.real - frame.z0) <= mpf("1e-12") * frame.z0:
            if "left" in hints:
                j = 1
            elif "right" in hints:
                j = 2
            else:
                raise AmbiguousRegion("chart-seam point needs left/right hint")
        else:
            j = 1 if z.real < frame.z0 else 2
        return psi_tp(frame, z, side, j)


def lambda_n0(frame: SemiFrame):
    """Normalization exponent lambda_n^0 = N gamma_n + ln(2 pi)/2 + ln(Rn0)/4."""
    with frame.ctx.workprec(32):
        return frame.params.N * gamma_lambda(frame) + mpmath.log(2 * mpmath.pi) / 2 \
            + mpmath.log(frame.Rn0) / 4


# ---------------------------------------------------------------------------
# phase identity (bulk interval)
# ---------------------------------------------------------------------------

def _bulk_qr(frame: SemiFrame, z):
    p = frame.params
    q = (p.g * z ** 2 + p.t) / (2 * mpmath.sqrt(frame.lam_prime * p.g))
    r = (2 * mpmath.sqrt(frame.lam_prime * p.g) - p.t * q) \
        / (2 * mpmath.sqrt(frame.lam_prime * p.g) * q - p.t)
    return q, r


def phase_lhs_closed(frame: SemiFrame, x_real):
    """i^{-1} [N xi + d] with the exact upper-side boundary values."""
    with frame.ctx.workprec(32):
        val = frame.params.N * xi_bulk_upper(frame, x_real) + d_bulk_upper(frame, x_real)
        return val.imag


def phase_rhs_arccos(frame: SemiFrame, x_real):
    """((n + 1/2)/2)(sin(2 phi)/2 - phi) - (-1)^n chi/4 at lambda'."""
    with frame.ctx.workprec(32):
        z = mpf(x_real)
        _require_bulk(frame, z)
        q, r = _bulk_qr(frame, z)
        phi = mpmath.acos(_clamp1(q, frame.ctx))
        chi = mpmath.acos(_clamp1(r, frame.ctx))
        n = frame.n
        sgn = 1 if n % 2 == 0 else -1
        return (n + mpf(1) / 2) / 2 * (mpmath.sin(2 * phi) / 2 - phi) - sgn * chi / 4


def phase_lhs_contour(frame: SemiFrame, x_real):
    """i^{-1} N int_{z2N}^z nu du by quadrature (upper side): the oracle."""
    with frame.ctx.workprec(32):
        z = mpf(x_real)
        _require_bulk(frame, z)
        zN = frame.z2N
        quot = _polydiv_linear(frame.nu2_coeffs, zN)
        dz = z - zN   # negative in the bulk

        def f(tau):
            aval = _polyval(quot, zN + tau * tau * dz)
            return tau * tau * mpmath.sqrt(aval)

        rho = 3 * integrate(f, 0, 1, frame.ctx)
        # I = (2/3) s^3 rho with s = i |dz|^{1/2}:  i^{-1} I = -(2/3)|dz|^{3/2} rho
        return -frame.params.N * mpf(2) / 3 * abs(dz) ** mpf("1.5") * rho


def phase_identity_check(frame: SemiFrame, x_real):
    """|closed-form phase - arccos form|; the Lemma-7.6 residual."""
    with frame.ctx.workprec(32):
        return abs(phase_lhs_closed(frame, x_real) - phase_rhs_arccos(frame, x_real))


def _require_bulk(frame: SemiFrame, z):
    if not (frame.z1 + frame.delta < z < frame.z2 - frame.delta):
        raise OutsideBulk(
            f"z={mpmath.nstr(z, 8)} outside ({mpmath.nstr(frame.z1 + frame.delta, 8)}, "
            f"{mpmath.nstr(frame.z2 - frame.delta, 8)})")


def _clamp1(v, ctx: PrecisionCtx):
    # principal arccos with endpoint snapping for |v|-1 within rounding
    if isinstance(v, mpf) and abs(abs(v) - 1) <= ctx.eps:
        return mpf(1) if v > 0 else mpf(-1)
    return v


# ---------------------------------------------------------------------------
# Stokes constants
# ---------------------------------------------------------------------------

def stokes_constants(params: WeightParams, h0, R1, ctx: PrecisionCtx) -> StokesData:
    """The four connection constants from the ray-to-ray contour integrals.

    s_j = N h_0 (int over the bent contour from the (j+1)-th to the j-th
    bisector ray) of (t + g u^2 + g R_1) e^{N V_+(u)} du; the weight data
    (h_0, R_1) come from an oracle table.
    """
    from .numerics import integrate_decaying

    with ctx.workprec(32):
        t, g, N = params.t, params.g, params.N

        def f(u):
            return (t + g * u * u + g * mpf(R1)) \
                * mpmath.exp(N * (t * u * u / 2 + g * u ** 4 / 4))

        rays = []
        for jj in range(4):
            direction = mpmath.exp(mpc(0, 1) * (mpmath.pi / 4 + jj * mpmath.pi / 2))
            rays.append(integrate_decaying(f, direction, ctx))
        s = []
        for jj in range(4):
            s.append(N * mpf(h0) * (rays[jj] - rays[(jj + 1) % 4]))
        return StokesData(s1=s[0], s2=s[1], s3=s[2], s4=s[3])


# ---------------------------------------------------------------------------
# jump diagnostics
# ---------------------------------------------------------------------------

def boundary_jump_norm(frame: SemiFrame, z):
    """sup-norm of Psi_TP(z) Psi_WKB(z)^{-1} - I at a point of the ellipse boundary."""
    with frame.ctx.workprec(32):
        z = _as_number(z)
        side = "up" if z.imag >= 0 else "down"
        j = 1 if z.real < frame.z0 else 2
        inner = psi_tp(frame, z, side, j)
        outer = psi_wkb(frame, z)
        return (inner @ outer.inv() - Matrix2C.identity()).norm()


def seam_jump_norm(frame: SemiFrame, y):
    """sup-norm of Psi_TP(.; z1) Psi_TP(.; z2)^{-1} - I on the chart seam Re z = z0."""
    with frame.ctx.workprec(32):
        z = mpc(frame.z0, mpf(y))
        side = "up" if z.imag >= 0 else "down"
        left = psi_tp(frame, z, side, 1)
        right = psi_tp(frame, z, side, 2)
        return (left @ right.inv() - Matrix2C.identity()).norm()


def s_jump_residual(frame: SemiFrame, x_real):
    """Residual of Psi0_+ = Psi0_- S on the real axis inside the ellipse,
    relative to the larger side."""
    with frame.ctx.workprec(32):
        up = psi0(frame, mpf(x_real), side_hint="up")
        down = psi0(frame, mpf(x_real), side_hint="down")
        lhs = up
        rhs = down @ s_matrix()
        scale = max(lhs.norm(), rhs.norm())
        return (lhs - rhs).norm() / scale


def l_jump(frame: SemiFrame, x_real):
    """(norm of Psi0 S Psi0^{-1} - I, exp(-2 N Re xi)) at a real point outside."""
    with frame.ctx.workprec(32):
        z = mpf(x_real)
        wkb = psi_wkb(frame, z)
        jump = wkb @ s_matrix() @ wkb.inv() - Matrix2C.identity()
        bound = mpmath.exp(-2 * frame.params.N * xi(frame, z).real)
        return jump.norm(), bound


def e_tau_residual(frame: SemiFrame, za, zb):
    """Ratio test of the scalar gauge factor against its path quadrature.

    Integrates diag(T^{-1} T')_{11} along the straight segment [za, zb]
    (which must avoid the cuts) and compares exp(-integral) with the ratio
    of ((mu - a11)/(2 mu))^{1/2}; returns |quotient - 1|.
    """
    with frame.ctx.workprec(32):
        za, zb = _as_number(za), _as_number(zb)

        def beta(zz):
            return 1 / a_func(frame, zz)

        def beta_prime(zz):
            m = a0_matrix(frame, zz)
            a11p = frame.alpha_n - 3 * frame.params.g * zz ** 2 / 2
            a12p = 2 * mpmath.sqrt(frame.Rn0) * frame.params.g * zz
            mup = mu_prime(frame, zz)
            muv = mu(frame, zz)
            return (a12p * (muv - m.a11) - m.a12 * (mup - a11p)) / (muv - m.a11) ** 2

        def integrand(s):
            zz = za + s * (zb - za)
            b = beta(zz)
            return -b * beta_prime(zz) / (1 - b * b) * (zb - za)

        val = integrate(integrand, 0, 1, frame.ctx)

        def pref(zz):
            x = _xvar(frame, zz)
            sq = _sqrt_x2m1(x)
            return mpmath.sqrt(x + sq + _cvar(frame)) / mpmath.sqrt(2 * sq)

        lhs = mpmath.exp(-val)
        rhs = pref(zb) / pref(za)
        return abs(lhs / rhs - 1)
