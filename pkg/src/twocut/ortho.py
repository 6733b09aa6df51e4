"""Ground truth: the quartic weight, oracle recurrence tables, wavefunctions.

Recurrence coefficients are produced by a Stieltjes orthogonalization on a
shared composite Gauss-Legendre grid that is refined (deterministic midpoint
splitting of every panel) until the whole coefficient vector stabilizes.
The Freud equation is never iterated forward here: it is numerically
unstable and serves only as a residual test (see the freud module).
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass

import mpmath
from mpmath import mpf, mpc

from .precision import PrecisionCtx, ensure_finite
from .numerics import GL_ORDER, NonConvergence, gauss_legendre_nodes, integrate_decaying


class PrecisionExhausted(ArithmeticError):
    """A squared norm lost all significant digits (raise bits)."""


class InvariantViolation(ArithmeticError):
    """A computed coefficient breaks a proven bound."""


@dataclass(frozen=True)
class WeightParams:
    """Parameters (t, g, N) of the weight exp(-N (t z^2/2 + g z^4/4))."""

    t: mpf
    g: mpf
    N: int

    def __post_init__(self):
        object.__setattr__(self, "t", mpf(self.t))
        object.__setattr__(self, "g", mpf(self.g))
        if not self.t < 0:
            raise ValueError(f"t must be negative, got {self.t}")
        if not self.g > 0:
            raise ValueError(f"g must be positive, got {self.g}")
        if self.N < 1:
            raise ValueError(f"N must be a positive integer, got {self.N}")

    @property
    def lambda_cr(self) -> mpf:
        """Critical ratio t^2/(4g) separating two-cut from one-cut."""
        return self.t ** 2 / (4 * self.g)

    def require_two_cut_at_unit_ratio(self) -> None:
        """The n = N universality runs need t < -2 sqrt(g)."""
        if not self.t < -2 * mpmath.sqrt(self.g):
            raise ValueError(f"two-cut regime at n=N needs t < -2 sqrt(g), got t={self.t}")

    def potential(self, z):
        return self.t * z ** 2 / 2 + self.g * z ** 4 / 4

    def cache_key(self, M: int, ctx: PrecisionCtx) -> str:
        ts = mpmath.nstr(self.t, 30).replace("-", "m").replace(".", "p")
        gs = mpmath.nstr(self.g, 30).replace("-", "m").replace(".", "p")
        return f"t{ts}_g{gs}_N{self.N}_M{M}_b{ctx.bits}"


def weight(z, params: WeightParams, ctx: PrecisionCtx):
    """The orthogonality weight exp(-N V(z))."""
    with ctx.workprec():
        return mpmath.exp(-params.N * params.potential(mpf(z)))


@dataclass(frozen=True)
class RecurrenceTable:
    """Oracle arrays h_0..h_M and R_0..R_M for fixed weight parameters.

    R_0 = 0 by convention and R_n = h_n/h_{n-1} exactly as stored.  Immutable
    once built; all downstream asymptotic claims are measured against it.
    """

    params: WeightParams
    M: int
    bits: int
    h: tuple
    R: tuple
    Z: mpf           # truncation radius of the integration domain
    panels: int      # composite panels per half-line at the accepted level

    def __post_init__(self):
        if len(self.h) != self.M + 1 or len(self.R) != self.M + 1:
            raise ValueError("h and R must have M+1 entries")


def truncation_radius(params: WeightParams, M: int, ctx: PrecisionCtx) -> mpf:
    """Smallest grid point Z with N V(Z) - 2M ln Z > ln(1/quad_rel_tol) + 64.

    Bounds the discarded tail of P_n^2 exp(-N V); scanned on a fixed 1/16
    lattice beyond the well minimum for determinism.
    """
    with ctx.workprec():
        target = mpmath.log(1 / ctx.quad_rel_tol) + 64
        z = max(mpf(1), mpmath.sqrt(-params.t / params.g))
        z = mpmath.ceil(z * 16) / mpf(16)
        while True:
            if params.N * params.potential(z) - 2 * M * mpmath.log(z) > target:
                return z
            z += mpf(1) / 16
            if z > 10 ** 6:
                raise NonConvergence("no finite truncation radius found")


def _stieltjes_pass(params: WeightParams, M: int, ctx: PrecisionCtx, Z: mpf, panels: int):
    """One discretized-Stieltjes sweep on a fixed composite grid.

    Returns (h, R) with h_n = 2 * sum_i w_i P_n(x_i)^2 e^{-N V(x_i)} over a
    uniform composite GL grid on [0, Z] (the weight is even).
    """
    nodes, wts = gauss_legendre_nodes(GL_ORDER, ctx)
    N = params.N
    with ctx.workprec(32):
        hpanel = Z / panels
        xs = []
        ws = []
        for p in range(panels):
            c = hpanel * (2 * p + 1) / 2
            hh = hpanel / 2
            for xg, wg in zip(nodes, wts):
                xs.append(c + hh * xg)
                ws.append(wg * hh)
        # combined quadrature weight including the orthogonality weight
        wall = [wq * mpmath.exp(-N * params.potential(x)) for x, wq in zip(xs, ws)]

        prev = [mpf(0)] * len(xs)   # P_{-1}
        cur = [mpf(1)] * len(xs)    # P_0
        h0 = 2 * mpmath.fsum(w * c * c for w, c in zip(wall, cur))
        h = [h0]
        R = [mpf(0)]
        for n in range(1, M + 1):
            rn_prev = R[n - 1]
            new = [x * c - rn_prev * p for x, c, p in zip(xs, cur, prev)]
            hn = 2 * mpmath.fsum(w * v * v for w, v in zip(wall, new))
            ensure_finite(hn, f"h_{n}")
            if hn <= 0:
                raise PrecisionExhausted(
                    f"h_{n} lost all significant digits at {ctx.bits} bits")
            R.append(hn / h[n - 1])
            h.append(hn)
            prev, cur = cur, new
        return h, R


def build_table(params: WeightParams, M: int, ctx: PrecisionCtx,
                cache_dir: str | None = None,
                start_panels: int = 64, max_panels: int = 1 << 17) -> RecurrenceTable:
    """Build (or load) the oracle recurrence table of degree M.

    The composite grid is doubled until two consecutive levels agree on
    every h_n and R_n to well below quad_rel_tol; the finer level is kept,
    so the accepted coefficients sit far inside the tolerance.
    """
    if M < 1:
        raise ValueError("M must be >= 1")
    if cache_dir is not None:
        cached = load_cached_table(params, M, ctx, cache_dir)
        if cached is not None:
            return cached

    Z = truncation_radius(params, M, ctx)
    stab_tol = 256 * ctx.quad_rel_tol
    with ctx.workprec(32):
        panels = start_panels
        prev_h = prev_R = None
        while panels <= max_panels:
            h, R = _stieltjes_pass(params, M, ctx, Z, panels)
            if prev_R is not None:
                dh = max(abs(a - b) / abs(b) for a, b in zip(prev_h, h))
                dr = max(abs(a - b) / abs(b) for a, b in zip(prev_R[1:], R[1:]))
                if max(dh, dr) <= stab_tol:
                    # round to the declared precision so that cache round-trips
                    # (and fresh builds) are bit-identical
                    with mpmath.mp.workprec(ctx.bits):
                        hr = tuple(+x for x in h)
                        rr = tuple(+x for x in R)
                        zr = +Z
                    table = RecurrenceTable(params=params, M=M, bits=ctx.bits,
                                            h=hr, R=rr, Z=zr, panels=panels)
                    _check_invariants(table, ctx)
                    if cache_dir is not None:
                        save_table(table, ctx, cache_dir)
                    return table
            prev_h, prev_R = h, R
            panels *= 2
    raise NonConvergence(f"recurrence table did not stabilize within {max_panels} panels")


def _check_invariants(table: RecurrenceTable, ctx: PrecisionCtx) -> None:
    p = table.params
    with ctx.workprec():
        for n in range(1, table.M + 1):
            lam = mpf(n) / p.N
            bound = (-p.t + mpmath.sqrt(p.t ** 2 + 4 * lam * p.g)) / (2 * p.g)
            if not (0 < table.R[n] < bound):
                raise InvariantViolation(
                    f"R_{n} = {mpmath.nstr(table.R[n], 10)} outside (0, {mpmath.nstr(bound, 10)})")


def eval_pn(table: RecurrenceTable, n: int, z):
    """Monic orthogonal polynomial P_n(z) by the upward three-term recurrence."""
    if not 0 <= n <= table.M:
        raise IndexError(f"n={n} outside table range 0..{table.M}")
    ctx = PrecisionCtx(bits=table.bits)
    with ctx.workprec(32):
        z = mpc(z) if isinstance(z, (complex, mpc)) else mpf(z)
        p_prev, p_cur = mpf(0), mpf(1)
        for k in range(n):
            p_prev, p_cur = p_cur, z * p_cur - table.R[k] * p_prev
        return p_cur


def eval_psi(table: RecurrenceTable, n: int, z):
    """Wavefunction psi_n(z) = P_n(z) e^{-N V(z)/2} / sqrt(h_n)."""
    if not 0 <= n <= table.M:
        raise IndexError(f"n={n} outside table range 0..{table.M}")
    ctx = PrecisionCtx(bits=table.bits)
    p = table.params
    with ctx.workprec(32):
        zv = mpc(z) if isinstance(z, (complex, mpc)) else mpf(z)
        return eval_pn(table, n, zv) * mpmath.exp(-p.N * p.potential(zv) / 2) \
            / mpmath.sqrt(table.h[n])


def eval_psi_deriv(table: RecurrenceTable, n: int, z):
    """Exact derivative psi_n'(z) assembled from psi_{n+-1}, psi_{n+-3}.

    Four-term identity with coefficients built from the recurrence table;
    no numerical differentiation is involved.
    """
    if not 3 <= n <= table.M - 3:
        raise IndexError(f"psi' needs 3 <= n <= M-3, got n={n}, M={table.M}")
    ctx = PrecisionCtx(bits=table.bits)
    p = table.params
    R = table.R
    with ctx.workprec(32):
        N, t, g = p.N, p.t, p.g
        sq = mpmath.sqrt
        c_p3 = -(N * g / 2) * sq(R[n + 1] * R[n + 2] * R[n + 3])
        c_p1 = -(N * t / 2) * sq(R[n + 1]) - (N * g / 2) * sq(R[n + 1]) * (R[n] + R[n + 1] + R[n + 2])
        c_m1 = (N * t / 2) * sq(R[n]) + (N * g / 2) * sq(R[n]) * (R[n - 1] + R[n] + R[n + 1])
        c_m3 = (N * g / 2) * sq(R[n - 2] * R[n - 1] * R[n])
        return (c_p3 * eval_psi(table, n + 3, z) + c_p1 * eval_psi(table, n + 1, z)
                + c_m1 * eval_psi(table, n - 1, z) + c_m3 * eval_psi(table, n - 3, z))


# ---------------------------------------------------------------------------
# R_1 via the parabolic cylinder function D_{-1/2}
# ---------------------------------------------------------------------------

def _pcf_integrals(zarg, ctx: PrecisionCtx):
    """F = int_0^inf e^{-z u - u^2/2} u^{-1/2} du and G = -F' via u = s^2."""
    zarg = mpf(zarg)
    F = 2 * integrate_decaying(lambda s: mpmath.exp(-zarg * s * s - s ** 4 / 2), 1, ctx)
    G = 2 * integrate_decaying(lambda s: s * s * mpmath.exp(-zarg * s * s - s ** 4 / 2), 1, ctx)
    return F, G


def pcf_d_half_rep1(zarg, ctx: PrecisionCtx):
    """D_{-1/2}(z) from its real Laplace-type integral representation."""
    with ctx.workprec(32):
        zarg = mpf(zarg)
        F, _ = _pcf_integrals(zarg, ctx)
        return mpmath.exp(-zarg ** 2 / 4) * F / mpmath.sqrt(mpmath.pi)


def pcf_d_half_rep2(zarg, ctx: PrecisionCtx):
    """D_{-1/2}(z) from the oscillatory cosine representation."""
    with ctx.workprec(32):
        zarg = mpf(zarg)
        val = 2 * integrate_decaying(
            lambda s: mpmath.exp(-s ** 4 / 2) * mpmath.cos(zarg * s * s + mpmath.pi / 4), 1, ctx)
        return mpmath.sqrt(2 / mpmath.pi) * mpmath.exp(zarg ** 2 / 4) * val


def r1_closed_form(params: WeightParams, ctx: PrecisionCtx):
    """First recurrence coefficient from the log-derivative of e^{z^2/4} D_{-1/2}.

    Evaluated at z = t sqrt(N/(2g)); the derivative of the integral
    representation turns the expression into a ratio of two decaying-ray
    integrals.
    """
    with ctx.workprec(32):
        zarg = params.t * mpmath.sqrt(mpf(params.N) / (2 * params.g))
        F, G = _pcf_integrals(zarg, ctx)
        return mpmath.sqrt(2 / (params.N * params.g)) * G / F


# ---------------------------------------------------------------------------
# Table cache
# ---------------------------------------------------------------------------

def table_cache_path(params: WeightParams, M: int, ctx: PrecisionCtx, cache_dir: str) -> str:
    return os.path.join(cache_dir, params.cache_key(M, ctx) + ".json")


def save_table(table: RecurrenceTable, ctx: PrecisionCtx, cache_dir: str) -> None:
    """Write the table as one JSON document with full-precision decimal strings."""
    import filelock

    os.makedirs(cache_dir, exist_ok=True)
    path = table_cache_path(table.params, table.M, ctx, cache_dir)
    doc = {
        "t": ctx.to_str(table.params.t),
        "g": ctx.to_str(table.params.g),
        "N": table.params.N,
        "M": table.M,
        "bits": table.bits,
        "order": GL_ORDER,
        "panels": table.panels,
        "Z": ctx.to_str(table.Z),
        "h": [ctx.to_str(x) for x in table.h],
        "R": [ctx.to_str(x) for x in table.R],
    }
    with filelock.FileLock(path + ".lock"):
        tmp = path + ".tmp"
        with open(tmp, "w") as f:
            json.dump(doc, f, indent=1, sort_keys=True)
            f.write("\n")
        os.replace(tmp, path)


def load_cached_table(params: WeightParams, M: int, ctx: PrecisionCtx,
                      cache_dir: str) -> RecurrenceTable | None:
    path = table_cache_path(params, M, ctx, cache_dir)
    if not os.path.exists(path):
        return None
    with open(path) as f:
        doc = json.load(f)
    if doc["N"] != params.N or doc["M"] != M or doc["bits"] != ctx.bits:
        return None
    # parse at exactly the declared precision: the stored decimal strings
    # carry enough digits that this round-trips bit-for-bit
    with mpmath.mp.workprec(ctx.bits):
        return RecurrenceTable(
            params=params, M=M, bits=ctx.bits,
            h=tuple(mpf(s) for s in doc["h"]),
            R=tuple(mpf(s) for s in doc["R"]),
            Z=mpf(doc["Z"]), panels=int(doc["panels"]),
        )
