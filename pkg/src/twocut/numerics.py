"""Quadrature, ray integration, Newton root finding, and Airy functions.

Everything here is a pure function of (inputs, ctx) and is deterministic:
adaptive panels always split at the midpoint, truncation radii are found by
a fixed doubling scan, and series are summed to a fixed cutoff rule.
"""

from __future__ import annotations

from dataclasses import dataclass

import mpmath
from mpmath import mpf, mpc

from .precision import PrecisionCtx, ensure_finite

GL_ORDER = 32

_gl_cache: dict = {}


class NonConvergence(ArithmeticError):
    """Panel budget exhausted before reaching the quadrature tolerance."""


class NoDecay(ArithmeticError):
    """Ray integrand failed to decrease over a doubling of the radius."""


class Divergence(ArithmeticError):
    """Newton iteration failed to contract (or hit the iteration cap)."""


class SeriesDomainExceeded(ArithmeticError):
    """Argument outside the range where the Maclaurin series is affordable."""


def gauss_legendre_nodes(order: int, ctx: PrecisionCtx):
    """Nodes and weights of the Gauss-Legendre rule on [-1, 1].

    Newton iteration on P_order from Chebyshev initial guesses; cached per
    (order, bits).  Even orders only (the symmetric half is mirrored).
    """
    if order % 2:
        raise ValueError("even quadrature order required")
    key = (order, ctx.bits)
    if key in _gl_cache:
        return _gl_cache[key]
    with ctx.workprec(32):
        nodes, weights = [], []
        for k in range(order // 2):
            # k-th positive root counted from 1 downward
            x = mpmath.cos(mpmath.pi * (k + mpf(3) / 4) / (order + mpf(1) / 2))
            for _ in range(100):
                p0, p1 = mpf(1), x
                for j in range(2, order + 1):
                    p0, p1 = p1, ((2 * j - 1) * x * p1 - (j - 1) * p0) / j
                dp = order * (x * p1 - p0) / (x * x - 1)
                dx = p1 / dp
                x -= dx
                if abs(dx) < ctx.eps / 16:
                    break
            p0, p1 = mpf(1), x
            for j in range(2, order + 1):
                p0, p1 = p1, ((2 * j - 1) * x * p1 - (j - 1) * p0) / j
            dp = order * (x * p1 - p0) / (x * x - 1)
            w = 2 / ((1 - x * x) * dp * dp)
            nodes.append(x)
            weights.append(w)
        full_nodes = [-x for x in nodes] + [x for x in reversed(nodes)]
        full_weights = list(weights) + list(reversed(weights))
    _gl_cache[key] = (full_nodes, full_weights)
    return _gl_cache[key]


def _panel(f, a, b, nodes, weights):
    c = (a + b) / 2
    h = (b - a) / 2
    s = mpf(0)
    for x, w in zip(nodes, weights):
        s += w * f(c + h * x)
    return s * h


@dataclass
class QuadStats:
    panels: int = 0
    order: int = GL_ORDER
    truncation_radius: object = None


def integrate(f, a, b, ctx: PrecisionCtx, abs_tol=None, max_panels: int = 40000,
              stats: QuadStats | None = None):
    """Adaptive composite Gauss-Legendre integral of f over [a, b].

    A panel is accepted when its one-bisection refinement moves the value by
    less than the local tolerance share; splitting is always at the midpoint.
    Relative target is ctx.quad_rel_tol unless abs_tol is given.

    Raises NonConvergence when the panel budget runs out (integrand too
    rough for the requested tolerance).
    """
    with ctx.workprec(32):
        a, b = mpf(a), mpf(b)
        nodes, weights = gauss_legendre_nodes(GL_ORDER, ctx)
        whole = _panel(f, a, b, nodes, weights)
        # (interval, coarse value); deterministic LIFO processing
        stack = [(a, b, whole)]
        total = mpf(0)
        scale = abs(whole)
        count = 1
        while stack:
            x0, x1, coarse = stack.pop()
            if count > max_panels:
                raise NonConvergence(
                    f"panel budget {max_panels} exhausted on [{x0}, {x1}]")
            xm = (x0 + x1) / 2
            left = _panel(f, x0, xm, nodes, weights)
            right = _panel(f, xm, x1, nodes, weights)
            count += 2
            refined = left + right
            scale = max(scale, abs(refined), abs(total))
            if abs_tol is not None:
                tol_loc = mpf(abs_tol) * (x1 - x0) / (b - a)
            else:
                tol_loc = ctx.quad_rel_tol * scale * (x1 - x0) / (b - a)
            if abs(refined - coarse) <= tol_loc:
                total += refined
            else:
                stack.append((xm, x1, right))
                stack.append((x0, xm, left))
        if stats is not None:
            stats.panels = count
            stats.order = GL_ORDER
        return ensure_finite(total, "integral")


def integrate_decaying(f, direction, ctx: PrecisionCtx, r0=mpf(1),
                       max_doublings: int = 60, stats: QuadStats | None = None):
    """Integral of f along the ray r*direction, r in (0, inf).

    Requires superexponential decay of |f| along the ray.  The ray is
    truncated at the first dyadic radius where the local integrand bound
    drops below quad_rel_tol relative to the running peak, then handed to
    ``integrate`` on the parameterized segment.  The integrand may grow
    before it decays (weights with interior maxima); NoDecay is raised only
    if no decrease is ever observed.
    """
    with ctx.workprec(32):
        direction = mpc(direction)
        direction /= abs(direction)

        def mag(r):
            # max of |f| on a small probe set near radius r: guards against
            # sampling an oscillatory integrand exactly at a zero
            return max(abs(f(r * direction)), abs(f(r * mpf("1.0371") * direction)),
                       abs(f(r * mpf("0.9644") * direction)))

        r = mpf(r0)
        peak = mag(r)
        prev = peak
        decayed = False
        cutoff = None
        for _ in range(max_doublings):
            r *= 2
            cur = mag(r)
            peak = max(peak, cur)
            if cur < prev:
                decayed = True
            if cur <= ctx.quad_rel_tol * peak / 16:
                cutoff = r
                break
            if not decayed and cur > 4 * prev and r > 2 ** 20:
                raise NoDecay("integrand not decreasing along the ray")
            prev = cur
        if cutoff is None:
            raise NoDecay("no superexponential decay detected within radius budget")
        if stats is not None:
            stats.truncation_radius = cutoff
        val = integrate(lambda s: f(s * direction), 0, cutoff, ctx, stats=stats)
        return val * direction


def find_root(f, df, x0, ctx: PrecisionCtx, max_iter: int = 64):
    """Newton iteration for a simple root of f near x0.

    Stops at |f(x)| < eps * scale with scale set by the initial data.
    Raises Divergence if |f| fails to halve over any 8 consecutive
    iterations or the iteration cap is hit (multiple roots end up here:
    their contraction is only linear and deterministic).
    """
    with ctx.workprec(32):
        x = mpf(x0)
        fx = f(x)
        scale = max(abs(fx), abs(x * df(x)), mpf(2) ** (-ctx.bits // 2))
        window = []
        for _ in range(max_iter):
            if abs(fx) < ctx.eps * scale:
                return x
            d = df(x)
            if d == 0:
                raise Divergence("zero derivative in Newton step")
            x = x - fx / d
            fx = f(x)
            window.append(abs(fx))
            if len(window) > 8:
                window.pop(0)
                if window[-1] > window[0] / 2:
                    raise Divergence("no contraction over 8 iterations")
        if abs(fx) < ctx.eps * scale:
            return x
        raise Divergence(f"iteration cap {max_iter} reached, |f|={mpmath.nstr(abs(fx), 8)}")


# ---------------------------------------------------------------------------
# Airy functions
# ---------------------------------------------------------------------------

# Maclaurin branch is used up to this point; beyond it the asymptotic
# expansion already reaches 512-bit relative accuracy (its smallest term is
# ~ exp(-(4/3)x^{3/2})).
X_SWITCH = 48.0

# Cap on the extra mantissa bits spent to absorb Maclaurin cancellation;
# limits the usable |z| of the series branch.
MAX_SERIES_BOOST = 6000


def _series_boost(z) -> int:
    # cancellation in the Maclaurin sum costs ~ (4/3)|z|^{3/2} * log2(e) bits
    r = abs(z)
    if r < 2:
        return 64
    return int(2.0 * r ** 1.5) + 64


def _airy_maclaurin(z, ctx: PrecisionCtx, want_second: bool = False):
    """Ai, Ai' (and optionally Ai'') by the Maclaurin series, any complex z."""
    boost = _series_boost(z)
    if boost > MAX_SERIES_BOOST:
        raise SeriesDomainExceeded(
            f"|z|={float(abs(z)):.3g} needs {boost} guard bits (cap {MAX_SERIES_BOOST})")
    with ctx.workprec(boost):
        z = mpc(z) if isinstance(z, (complex, mpc)) else mpf(z)
        c1 = mpf(3) ** mpf("-2/3") / mpmath.gamma(mpf(2) / 3)
        c2 = mpf(3) ** mpf("-1/3") / mpmath.gamma(mpf(1) / 3)
        z3 = z ** 3
        # f = sum a_k, g = sum b_k with a_0 = 1, b_0 = z
        a = mpf(1)
        b = z
        f = a
        g = b
        fp = mpf(0)   # f'
        gp = mpf(1)   # g'
        fpp = mpf(0)  # f''
        gpp = mpf(0)  # g''
        tiny = mpf(2) ** (-(ctx.bits + boost))
        k = 0
        while True:
            # |a_k| and |b_k| both eventually decay factorially
            if k > 4 and abs(a) < tiny * (1 + abs(f)) and abs(b) < tiny * (1 + abs(g)):
                break
            a = a * z3 / ((3 * k + 2) * (3 * k + 3))
            b = b * z3 / ((3 * k + 3) * (3 * k + 4))
            k += 1
            f += a
            g += b
            if z != 0:
                fp += a * (3 * k) / z
                gp += b * (3 * k + 1) / z
                if want_second:
                    fpp += a * (3 * k) * (3 * k - 1) / z ** 2
                    gpp += b * (3 * k + 1) * (3 * k) / z ** 2
            if k > 100000:
                raise SeriesDomainExceeded("Maclaurin series failed to terminate")
        ai = c1 * f - c2 * g
        aip = c1 * fp - c2 * gp
        if want_second:
            return ai, aip, c1 * fpp - c2 * gpp
        return ai, aip


def _airy_asymptotic(x, ctx: PrecisionCtx):
    """Ai, Ai' for large positive real x from the divergent expansion.

    Coefficients u_k follow the standard recurrence
    u_k = u_{k-1} (6k-5)(6k-1) / (72 k), v_k = u_k (6k+1)/(1-6k);
    summation stops at the smallest term.
    """
    with ctx.workprec(64):
        x = mpf(x)
        zeta = 2 * x ** mpf("1.5") / 3
        u = mpf(1)
        s_ai = mpf(1)
        s_aip = mpf(1)
        term_prev = mpf(1)
        k = 0
        while True:
            k += 1
            u = u * (6 * k - 5) * (6 * k - 1) / (72 * k)
            term = u / zeta ** k
            if abs(term) >= abs(term_prev) or k > 2000:
                break
            v = u * (6 * k + 1) / (1 - 6 * k)
            s_ai += (-1) ** k * term
            s_aip += (-1) ** k * v / zeta ** k
            term_prev = term
        pref = mpmath.exp(-zeta) / (2 * mpmath.sqrt(mpmath.pi))
        ai = pref * s_ai / x ** mpf("0.25")
        aip = -pref * s_aip * x ** mpf("0.25")
        return ai, aip


def _airy_asymptotic_neg(x, ctx: PrecisionCtx):
    """Ai, Ai' for large positive x evaluated at -x (oscillatory sector)."""
    with ctx.workprec(64):
        x = mpf(x)
        zeta = 2 * x ** mpf("1.5") / 3
        u = mpf(1)
        # P/Q split of sum (-1)^k u_k (i/zeta)^k into even/odd k
        p_ai, q_ai = mpf(1), mpf(0)
        p_aip, q_aip = mpf(1), mpf(0)
        term_prev = mpf(1)
        k = 0
        while True:
            k += 1
            u = u * (6 * k - 5) * (6 * k - 1) / (72 * k)
            term = u / zeta ** k
            if abs(term) >= abs(term_prev) or k > 2000:
                break
            v = u * (6 * k + 1) / (1 - 6 * k)
            sgn = (-1) ** (k // 2)
            if k % 2 == 0:
                p_ai += sgn * term
                p_aip += sgn * v / zeta ** k
            else:
                q_ai += sgn * term
                q_aip += sgn * v / zeta ** k
            term_prev = term
        c = mpmath.cos(zeta - mpmath.pi / 4)
        s = mpmath.sin(zeta - mpmath.pi / 4)
        rt = mpmath.sqrt(mpmath.pi)
        ai = (c * p_ai + s * q_ai) / (rt * x ** mpf("0.25"))
        aip = (s * p_aip - c * q_aip) * x ** mpf("0.25") / rt
        return ai, aip


def _airy_pair(x, ctx: PrecisionCtx):
    xf = mpf(x)
    if xf > X_SWITCH:
        return _airy_asymptotic(xf, ctx)
    if xf < -X_SWITCH:
        return _airy_asymptotic_neg(-xf, ctx)
    return _airy_maclaurin(xf, ctx)


def airy_ai(x, ctx: PrecisionCtx):
    """Ai(x) for real x at ctx precision."""
    return _airy_pair(x, ctx)[0]


def airy_ai_prime(x, ctx: PrecisionCtx):
    """Ai'(x) for real x at ctx precision."""
    return _airy_pair(x, ctx)[1]


def airy_ai_complex(z, ctx: PrecisionCtx):
    """(Ai(z), Ai'(z)) for complex z via the Maclaurin series.

    Restricted to the |z| range where the cancellation boost stays under
    MAX_SERIES_BOOST; raises SeriesDomainExceeded beyond.
    """
    return _airy_maclaurin(z, ctx)


def airy_ai_second(x, ctx: PrecisionCtx):
    """Ai''(x) summed independently of the ODE (for residual tests)."""
    return _airy_maclaurin(x, ctx, want_second=True)[2]


_overlap_checked: set = set()


def verify_airy_overlap(ctx: PrecisionCtx, points=(46, 47, 49, 51)) -> None:
    """Assert the two real-axis branches agree across the switch point.

    Runs once per context; AssertionError here means X_SWITCH is
    mis-calibrated for the requested precision.
    """
    if ctx.bits in _overlap_checked:
        return
    tol = ctx.eps * 64
    for p in points:
        for sgn in (1, -1):
            x = mpf(sgn * p)
            a_ser, ap_ser = _airy_maclaurin(x, ctx)
            if x > 0:
                a_asy, ap_asy = _airy_asymptotic(x, ctx)
            else:
                a_asy, ap_asy = _airy_asymptotic_neg(-x, ctx)
            assert abs(a_ser - a_asy) <= tol * abs(a_ser), \
                f"Airy branch mismatch at x={x}"
            assert abs(ap_ser - ap_asy) <= tol * abs(ap_ser), \
                f"Airy' branch mismatch at x={x}"
    _overlap_checked.add(ctx.bits)
