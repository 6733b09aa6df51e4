"""Freud equation residuals, the unstable forward map, and the period-2 cycle.

Residual operations quantify how well a coefficient sequence satisfies the
string equation n/N = R_n [t + g(R_{n-1} + R_n + R_{n+1})] and its algebraic
consequences; on oracle tables they sit at quadrature level.  The forward
iteration exists to document its instability, not to produce data.
"""

from __future__ import annotations

from dataclasses import dataclass

import mpmath
from mpmath import mpf

from .precision import PrecisionCtx
from .ortho import RecurrenceTable, WeightParams


class NearCritical(ArithmeticError):
    """lambda too close to t^2/(4g): the period-2 system degenerates."""


def theta(table: RecurrenceTable, n: int):
    """theta_n = t + g R_n + g R_{n+1} from stored coefficients."""
    if not 0 <= n <= table.M - 1:
        raise IndexError(f"theta_{n} needs 0 <= n <= M-1")
    p = table.params
    return p.t + p.g * table.R[n] + p.g * table.R[n + 1]


def freud_residual(table: RecurrenceTable, n: int):
    """n/N - R_n [t + g(R_{n-1} + R_n + R_{n+1})]; tiny on oracle tables."""
    if not 1 <= n <= table.M - 1:
        raise IndexError(f"freud residual needs 1 <= n <= M-1, got {n}")
    p = table.params
    R = table.R
    ctx = PrecisionCtx(bits=table.bits)
    with ctx.workprec():
        return mpf(n) / p.N - R[n] * (p.t + p.g * (R[n - 1] + R[n] + R[n + 1]))


def recursive_identity_residual(table: RecurrenceTable, n: int):
    """R_{n+1} theta_n theta_{n+1} - R_n theta_{n-1} theta_n - theta_n / N."""
    if not 1 <= n <= table.M - 2:
        raise IndexError(f"recursive identity needs 1 <= n <= M-2, got {n}")
    p = table.params
    R = table.R
    ctx = PrecisionCtx(bits=table.bits)
    with ctx.workprec():
        th_prev = theta(table, n - 1)
        th = theta(table, n)
        th_next = theta(table, n + 1)
        return R[n + 1] * th * th_next - R[n] * th_prev * th - th / p.N


@dataclass(frozen=True)
class ForwardRun:
    """Outcome of iterating the Freud map forward from (R_0, R_1)."""

    R: tuple
    first_bad: int | None   # first index breaking positivity or the a-priori bound


def freud_forward(params: WeightParams, R1, nmax: int, ctx: PrecisionCtx) -> ForwardRun:
    """Iterate R_{n+1} = (n/(N R_n) - t)/g - R_{n-1} - R_n from (0, R1).

    Records the first index where the sequence leaves the admissible region
    (divergence is the expected outcome; returned as data, never raised).
    """
    with ctx.workprec():
        t, g, N = params.t, params.g, params.N
        R = [mpf(0), mpf(R1)]
        first_bad = None
        if not R[1] > 0:
            return ForwardRun(R=tuple(R), first_bad=1)
        for n in range(1, nmax):
            nxt = (mpf(n) / (N * R[n]) - t) / g - R[n - 1] - R[n]
            R.append(nxt)
            lam = mpf(n + 1) / N
            bound = (-t + mpmath.sqrt(t ** 2 + 4 * lam * g)) / (2 * g)
            if first_bad is None and not (0 < nxt < bound):
                first_bad = n + 1
            if not nxt > 0:
                break
        return ForwardRun(R=tuple(R), first_bad=first_bad)


@dataclass(frozen=True)
class FormalCycle:
    """Leading period-2 values and their 1/N^2 corrections at fixed lambda."""

    lam: mpf
    L0: mpf
    R0: mpf
    L1: mpf
    R1: mpf


def formal_cycle(params: WeightParams, lam, ctx: PrecisionCtx,
                 discrete_delta: bool = False) -> FormalCycle:
    """Solve the period-2 ansatz of the Freud equation at ratio lambda.

    L0, R0 are the roots of g u^2 + t u + lambda = 0; the corrections
    (L1, R1) solve the linear 2x2 system driven by the second lambda
    derivatives of (L0, R0).  With ``discrete_delta`` the analytic second
    derivative is replaced by the centered second difference with step 1/N
    (the pre-limit form), for comparison.
    """
    with ctx.workprec():
        lam = mpf(lam)
        t, g = params.t, params.g
        disc = t ** 2 - 4 * lam * g
        if disc < ctx.eps * t ** 2:
            raise NearCritical(f"t^2 - 4 lambda g = {mpmath.nstr(disc, 8)} too small")
        if not lam > 0:
            raise ValueError("lambda must be positive")

        def L0f(x):
            return (-t - mpmath.sqrt(t ** 2 - 4 * x * g)) / (2 * g)

        def R0f(x):
            return (-t + mpmath.sqrt(t ** 2 - 4 * x * g)) / (2 * g)

        L0, R0 = L0f(lam), R0f(lam)
        if discrete_delta:
            step = mpf(1) / params.N
            dL0 = (L0f(lam - step) - 2 * L0 + L0f(lam + step)) / step ** 2
            dR0 = (R0f(lam - step) - 2 * R0 + R0f(lam + step)) / step ** 2
        else:
            s = mpmath.sqrt(disc)
            dL0 = 2 * g / s ** 3
            dR0 = -2 * g / s ** 3
        # [[R0+L0, 2 R0], [2 L0, R0+L0]] @ (R1, L1) = (-R0 dL0, -L0 dR0)
        a, b = R0 + L0, 2 * R0
        c, d = 2 * L0, R0 + L0
        det = a * d - b * c
        rhs1, rhs2 = -R0 * dL0, -L0 * dR0
        R1 = (d * rhs1 - b * rhs2) / det
        L1 = (a * rhs2 - c * rhs1) / det
        return FormalCycle(lam=lam, L0=L0, R0=R0, L1=L1, R1=R1)


def rn0(params: WeightParams, n: int):
    """Leading period-2 approximation at lambda = n/N (parity-dependent root)."""
    t, g = params.t, params.g
    lam = mpf(n) / params.N
    s = mpmath.sqrt(t ** 2 - 4 * lam * g)
    sign = -1 if n % 2 == 0 else 1
    return (-t + sign * s) / (2 * g)
