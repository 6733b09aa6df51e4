"""The integrable structure behind the recurrence: transfer and ODE matrices.

All operations here are residual tests of exact algebraic identities of the
true coefficients; on oracle tables every one of them is quadrature-small,
which is the deepest validation of the tables themselves.
"""

from __future__ import annotations

import mpmath
from mpmath import mpf

from .precision import PrecisionCtx
from .matrix2 import Matrix2C
from .ortho import RecurrenceTable, eval_psi
from .freud import theta


class A12Zero(ArithmeticError):
    """The Schroedinger reduction degenerates at zeros of a_12."""


def u_matrix(table: RecurrenceTable, n: int, z) -> Matrix2C:
    """Transfer matrix moving (psi_n, psi_{n-1}) one step up in degree."""
    if not 0 <= n <= table.M - 1:
        raise IndexError(f"transfer matrix needs 0 <= n <= M-1, got {n}")
    ctx = PrecisionCtx(bits=table.bits)
    with ctx.workprec(32):
        z = mpf(z) if not isinstance(z, (mpmath.mpc, complex)) else mpmath.mpc(z)
        rib = 1 / mpmath.sqrt(table.R[n + 1])
        return Matrix2C(rib * z, -rib * mpmath.sqrt(table.R[n]), mpf(1), mpf(0))


def a_matrix(table: RecurrenceTable, n: int, z) -> Matrix2C:
    """Traceless coefficient matrix of the differential half of the pair."""
    if not 1 <= n <= table.M - 1:
        raise IndexError(f"ODE matrix needs 1 <= n <= M-1, got {n}")
    ctx = PrecisionCtx(bits=table.bits)
    p = table.params
    with ctx.workprec(32):
        z = mpf(z) if not isinstance(z, (mpmath.mpc, complex)) else mpmath.mpc(z)
        t, g = p.t, p.g
        R = table.R
        rt = mpmath.sqrt(R[n])
        a11 = -(t * z / 2 + g * z ** 3 / 2 + g * z * R[n])
        a12 = rt * (t + g * z ** 2 + g * (R[n] + R[n + 1]))
        a21 = -rt * (t + g * z ** 2 + g * (R[n - 1] + R[n]))
        return Matrix2C(a11, a12, a21, -a11)


def _a_matrix_prime(table: RecurrenceTable, n: int, z) -> Matrix2C:
    p = table.params
    t, g = p.t, p.g
    R = table.R
    rt = mpmath.sqrt(R[n])
    return Matrix2C(-(t / 2 + 3 * g * z ** 2 / 2 + g * R[n]),
                    rt * 2 * g * z,
                    -rt * 2 * g * z,
                    t / 2 + 3 * g * z ** 2 / 2 + g * R[n])


def det_a_identity_residual(table: RecurrenceTable, n: int, z):
    """det A_n + (tz/2 + gz^3/2)^2 - g n z^2/N - R_n theta_{n-1} theta_n."""
    ctx = PrecisionCtx(bits=table.bits)
    p = table.params
    with ctx.workprec(32):
        z = mpf(z)
        m = a_matrix(table, n, z)
        return m.det() + (p.t * z / 2 + p.g * z ** 3 / 2) ** 2 \
            - p.g * n * z ** 2 / p.N - table.R[n] * theta(table, n - 1) * theta(table, n)


def ode_residual(table: RecurrenceTable, n: int, z):
    """Residual of (psi_n, psi_{n-1})' = N A_n (psi_n, psi_{n-1}).

    Derivatives come from the exact four-term identity, so the result is
    bounded by the table's quadrature error times the local scale.
    """
    from .ortho import eval_psi_deriv

    ctx = PrecisionCtx(bits=table.bits)
    with ctx.workprec(32):
        z = mpf(z)
        m = a_matrix(table, n, z)
        v1, v2 = eval_psi(table, n, z), eval_psi(table, n - 1, z)
        d1, d2 = eval_psi_deriv(table, n, z), eval_psi_deriv(table, n - 1, z)
        w1, w2 = m.apply(v1, v2)
        N = table.params.N
        scale = N * max(abs(w1), abs(w2)) + abs(d1) + abs(d2)
        return max(abs(d1 - N * w1), abs(d2 - N * w2)) / scale


def compatibility_residual(table: RecurrenceTable, n: int, z) -> Matrix2C:
    """U_n' - N (A_{n+1} U_n - U_n A_n), entrywise."""
    if not 1 <= n <= table.M - 2:
        raise IndexError(f"compatibility needs 1 <= n <= M-2, got {n}")
    ctx = PrecisionCtx(bits=table.bits)
    with ctx.workprec(32):
        z = mpf(z)
        un = u_matrix(table, n, z)
        up = Matrix2C(1 / mpmath.sqrt(table.R[n + 1]), mpf(0), mpf(0), mpf(0))
        lhs = up
        rhs = (a_matrix(table, n + 1, z) @ un - un @ a_matrix(table, n, z)).scale(
            mpf(table.params.N))
        return lhs - rhs


def j_value(table: RecurrenceTable, n: int):
    """J_n = N R_n [t + g(R_{n-1} + R_n + R_{n+1})]; J_0 = 0, increments by one."""
    if n == 0:
        return mpf(0)
    if not 1 <= n <= table.M - 1:
        raise IndexError(f"J_n needs 0 <= n <= M-1, got {n}")
    p = table.params
    R = table.R
    ctx = PrecisionCtx(bits=table.bits)
    with ctx.workprec(32):
        return p.N * R[n] * (p.t + p.g * (R[n - 1] + R[n] + R[n + 1]))


def schrodinger_check(table: RecurrenceTable, n: int, z):
    """Relative residual of -zeta'' + N^2 U_hat zeta = 0 for zeta = a12^{-1/2} psi_n.

    zeta'' comes from differentiating the first-order system symbolically
    (psi'' = N(A' + N A^2) psi on the first row), never from finite
    differences; U_hat is assembled from its three-part decomposition.
    """
    from .ortho import eval_psi_deriv

    if not 3 <= n <= table.M - 4:
        raise IndexError(f"schrodinger check needs 3 <= n <= M-4, got {n}")
    ctx = PrecisionCtx(bits=table.bits)
    p = table.params
    with ctx.workprec(32):
        z = mpf(z)
        t, g, N = p.t, p.g, p.N
        R = table.R
        th_prev, th = theta(table, n - 1), theta(table, n)
        a12 = mpmath.sqrt(R[n]) * (th + g * z ** 2)
        if abs(a12) < mpf(2) ** (-table.bits // 2):
            raise A12Zero(f"a12 vanishes near z={mpmath.nstr(z, 8)}")
        m = a_matrix(table, n, z)
        mp_ = _a_matrix_prime(table, n, z)
        v1, v2 = eval_psi(table, n, z), eval_psi(table, n - 1, z)
        psi = v1
        psi_d = eval_psi_deriv(table, n, z)
        acc = mp_ + (m @ m).scale(mpf(N))
        psi_dd = N * (acc.a11 * v1 + acc.a12 * v2)
        # zeta'' for zeta = f psi with f = a12^{-1/2}
        a12_d = mpmath.sqrt(R[n]) * 2 * g * z
        a12_dd = mpmath.sqrt(R[n]) * 2 * g
        f = 1 / mpmath.sqrt(a12)
        f_d = -a12_d / (2 * a12 ** mpf("1.5"))
        f_dd = 3 * a12_d ** 2 / (4 * a12 ** mpf("2.5")) - a12_dd / (2 * a12 ** mpf("1.5"))
        zeta = f * psi
        zeta_dd = f_dd * psi + 2 * f_d * psi_d + f * psi_dd
        u0 = z ** 2 * (((g * z ** 2 + t) / 2) ** 2 - (n + mpf(1) / 2) / N * g)
        u1 = (t / 2 + g * R[n]) / N
        u2 = -R[n] * th_prev * th \
            - (th * (t + g * z ** 2 + 2 * g * R[n]) / (g * z ** 2 + th)) / N \
            + (g * (2 * g * z ** 2 - th) / (g * z ** 2 + th) ** 2) / N ** 2
        uhat = u0 + u1 + u2
        resid = -zeta_dd + N ** 2 * uhat * zeta
        return abs(resid) / (N ** 2 * abs(uhat * zeta))


def uhat_components(table: RecurrenceTable, n: int, z):
    """(U0, U1, U2) of the Schroedinger potential decomposition."""
    ctx = PrecisionCtx(bits=table.bits)
    p = table.params
    with ctx.workprec(32):
        z = mpf(z)
        t, g, N = p.t, p.g, p.N
        R = table.R
        th_prev, th = theta(table, n - 1), theta(table, n)
        u0 = z ** 2 * (((g * z ** 2 + t) / 2) ** 2 - (n + mpf(1) / 2) / N * g)
        u1 = (t / 2 + g * R[n]) / N
        u2 = -R[n] * th_prev * th \
            - (th * (t + g * z ** 2 + 2 * g * R[n]) / (g * z ** 2 + th)) / N \
            + (g * (2 * g * z ** 2 - th) / (g * z ** 2 + th) ** 2) / N ** 2
        return u0, u1, u2


def det_transport_invariant(table: RecurrenceTable, z, n_start: int, n_stop: int):
    """Transport a second column by the transfer recursion; return the
    maximal drift of the conserved combination sqrt(R_n) det over the range.

    The z-independence half of the determinant claim is carried by the
    trace-free ODE together with ``ode_residual``; this op checks the
    transport half.
    """
    ctx = PrecisionCtx(bits=table.bits)
    with ctx.workprec(32):
        z = mpf(z)
        phi_cur, phi_prev = mpf(1), mpf(0)   # second column at n_start
        k_ref = None
        drift = mpf(0)
        for n in range(n_start, n_stop + 1):
            psi_cur = eval_psi(table, n, z)
            psi_prev = eval_psi(table, n - 1, z)
            k = mpmath.sqrt(table.R[n]) * (psi_cur * phi_prev - psi_prev * phi_cur)
            if k_ref is None:
                k_ref = k
            else:
                drift = max(drift, abs(k / k_ref - 1))
            if n < n_stop:
                m = u_matrix(table, n, z)
                phi_cur, phi_prev = m.apply(phi_cur, phi_prev)
        return drift
