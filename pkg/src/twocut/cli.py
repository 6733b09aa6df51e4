"""Batch front-end: table cache management, comparison runs, parametrix probes.

Subcommands
    table       build or load an oracle recurrence table, write cache + manifest
    compare     run one comparison harness (rn, bulk, outer, edge, hn,
                kernel-sine, kernel-airy, identities) and emit CSV/JSON reports
    psi0-probe  tabulate parametrix entries and jump residuals at given points

Exit status: 0 all checks pass, 1 any check fails, 2 configuration/IO error.
Config files are plain ``key = value`` lines; every number is kept as a
decimal string until it reaches mpmath.
"""

from __future__ import annotations

import argparse
import os
import sys
import time

import mpmath
from mpmath import mpf, mpc

from .precision import PrecisionCtx
from . import ortho, freud, semiclassics as sc, asympt, kernels, laxpair, reports


DEFAULT_CACHE_ENV = "TWOCUT_CACHE_DIR"


class ConfigError(Exception):
    pass


def parse_config_file(path: str) -> dict:
    cfg = {}
    try:
        with open(path) as f:
            for line in f:
                line = line.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise ConfigError(f"bad config line: {line!r}")
                k, v = line.split("=", 1)
                cfg[k.strip()] = v.strip()
    except OSError as exc:
        raise ConfigError(str(exc)) from exc
    return cfg


def build_run_config(args) -> dict:
    """Merge config file and CLI flags (flags win); values stay strings."""
    cfg = {
        "t": "-4", "g": "1", "N": "40", "M": "", "n": "", "bits": "512",
        "N_list": "", "lambda": "1", "delta_frac": "0.1", "b_frac": "0.15",
        "out_dir": "twocut_out", "name": "run",
    }
    if args.config:
        cfg.update(parse_config_file(args.config))
    for key in ("t", "g", "N", "M", "n", "bits", "N_list", "out_dir", "name"):
        v = getattr(args, key.replace("-", "_"), None)
        if v is not None:
            cfg[key] = str(v)
    if getattr(args, "lam", None) is not None:
        cfg["lambda"] = str(args.lam)
    return cfg


def _ctx_of(cfg) -> PrecisionCtx:
    return PrecisionCtx(bits=int(cfg["bits"]))


def _params_of(cfg) -> ortho.WeightParams:
    return ortho.WeightParams(t=mpf(cfg["t"]), g=mpf(cfg["g"]), N=int(cfg["N"]))


def _cache_dir(args) -> str:
    if args.cache_dir:
        return args.cache_dir
    return os.environ.get(DEFAULT_CACHE_ENV, ".twocut_tables")


def _default_m(cfg) -> int:
    return int(cfg["M"]) if cfg["M"] else int(cfg["N"]) + 6


def _get_table(cfg, ctx, cache_dir, M=None):
    params = _params_of(cfg)
    return ortho.build_table(params, M or _default_m(cfg), ctx, cache_dir=cache_dir)


def cmd_table(args) -> int:
    cfg = build_run_config(args)
    ctx = _ctx_of(cfg)
    cache_dir = _cache_dir(args)
    t0 = time.time()
    table = _get_table(cfg, ctx, cache_dir)
    key = table.params.cache_key(table.M, ctx)
    out_dir = cfg["out_dir"]
    os.makedirs(out_dir, exist_ok=True)
    checks = {"R0_is_zero": table.R[0] == 0,
              "h_positive": all(h > 0 for h in table.h)}
    reports.write_manifest(os.path.join(out_dir, f"{cfg['name']}_table_manifest.json"),
                           cfg, [key], checks, time.time() - t0)
    print(f"table {key}: M={table.M} panels={table.panels} "
          f"cache={ortho.table_cache_path(table.params, table.M, ctx, cache_dir)}")
    return 0 if all(checks.values()) else 1


def _n_list(cfg) -> list:
    if cfg["N_list"]:
        return [int(s) for s in cfg["N_list"].replace(" ", "").split(",")]
    return [int(cfg["N"])]


def _emit(report: reports.ErrorReport, cfg, cache_keys, checks, out_dir, t0) -> None:
    os.makedirs(out_dir, exist_ok=True)
    base = os.path.join(out_dir, f"{cfg['name']}_{report.name}")
    report.write_csv(base + ".csv")
    report.write_json(base + ".json")
    reports.write_manifest(base + "_manifest.json", cfg, cache_keys, checks,
                           time.time() - t0)


def _compare_rn(cfg, ctx, cache_dir, t0):
    lam = mpf(cfg["lambda"])
    rep = reports.ErrorReport(name="rn", meta={"lambda": cfg["lambda"], "bits": ctx.bits})
    keys, errs = [], {}
    for N in _n_list(cfg):
        params = ortho.WeightParams(t=mpf(cfg["t"]), g=mpf(cfg["g"]), N=N)
        n_even = int(mpmath.nint(lam * N))
        n_even -= n_even % 2
        n_odd = n_even + 1
        table = ortho.build_table(params, max(n_odd + 2, 4), ctx, cache_dir=cache_dir)
        keys.append(params.cache_key(table.M, ctx))
        for n in (n_even, n_odd):
            r0 = freud.rn0(params, n)
            rep.add(N, table.R[n], r0)
            errs.setdefault(n % 2, []).append(abs(table.R[n] - r0))
    ok = True
    for par, es in errs.items():
        for a, b in zip(es, es[1:]):
            ok = ok and bool(b < a)
    if len(_n_list(cfg)) > 1:
        rep.fit_rate()
    return rep, keys, {"errors_decrease": ok}


def _compare_pointwise(cfg, ctx, cache_dir, t0, regime):
    params = _params_of(cfg)
    n = int(cfg["n"]) if cfg["n"] else params.N
    table = _get_table(cfg, ctx, cache_dir, M=max(n + 6, _default_m(cfg)))
    fr = sc.make_frame(params, n, ctx,
                       b_frac=float(cfg["b_frac"]), delta_frac=float(cfg["delta_frac"]))
    rep = reports.ErrorReport(name=regime, meta={"N": params.N, "n": n, "bits": ctx.bits})
    if regime == "bulk":
        lo, hi = fr.z1 + fr.delta, fr.z2 - fr.delta
        zs = [lo + (hi - lo) * mpf(2 * i + 1) / 40 for i in range(20)]
        env = max(abs(ortho.eval_psi(table, n, z)) for z in zs)
        for z in zs:
            rep.add(z, ortho.eval_psi(table, n, z), asympt.bulk_psi(fr, z), scale=env)
    elif regime == "outer":
        zs = [fr.z2 + fr.delta + mpf(i) / 8 for i in range(5)] \
            + [fr.z1 - fr.delta - mpf(i) / 16 for i in range(4) if fr.z1 - fr.delta - mpf(i) / 16 > 0]
        for z in zs:
            rep.add(z, ortho.eval_psi(table, n, z), asympt.outer_psi(fr, z))
    elif regime == "edge":
        zs = [fr.z2 - mpf("0.2") + mpf("0.4") * i / 20 for i in range(21)]
        env = max(abs(ortho.eval_psi(table, n, z)) for z in zs)
        for z in zs:
            rep.add(z, ortho.eval_psi(table, n, z), asympt.edge_psi(fr, z, 2), scale=env)
    else:
        raise ConfigError(f"unknown pointwise regime {regime}")
    sup = max(r.rel_err for r in rep.rows)
    return rep, [params.cache_key(table.M, ctx)], {"sup_rel_err_below_half": bool(sup < 0.5)}


def _compare_hn(cfg, ctx, cache_dir, t0):
    rep = reports.ErrorReport(name="hn", meta={"bits": ctx.bits})
    keys = []
    gaps = []
    for N in _n_list(cfg):
        params = ortho.WeightParams(t=mpf(cfg["t"]), g=mpf(cfg["g"]), N=N)
        table = ortho.build_table(params, N + 2, ctx, cache_dir=cache_dir)
        keys.append(params.cache_key(table.M, ctx))
        fr = sc.make_frame(params, N, ctx)
        rep.add(N, mpmath.log(table.h[N]), 2 * sc.lambda_n0(fr))
        gaps.append(abs(mpmath.log(table.h[N]) - 2 * sc.lambda_n0(fr)))
    ok = all(b < a for a, b in zip(gaps, gaps[1:]))
    if len(gaps) > 1:
        rep.fit_rate()
    return rep, keys, {"gap_decreases": ok}


def _compare_kernel(cfg, ctx, cache_dir, t0, which):
    grid = [mpf(v) for v in (-2, -1, 0, 1, 2)]
    rep = reports.ErrorReport(name=which, meta={"bits": ctx.bits})
    keys = []
    sups = []
    for N in _n_list(cfg):
        params = ortho.WeightParams(t=mpf(cfg["t"]), g=mpf(cfg["g"]), N=N)
        table = ortho.build_table(params, N + 6, ctx, cache_dir=cache_dir)
        keys.append(params.cache_key(table.M, ctx))
        sup = mpf(0)
        for u in grid:
            for v in grid:
                if which == "kernel-sine":
                    got = kernels.sine_scaled(table, N, mpf(cfg.get("z0", "2")), u, v)
                    want = kernels.sine_kernel_limit(u, v)
                else:
                    got = kernels.airy_scaled(table, N, u, v)
                    want = kernels.airy_kernel_limit(u, v, ctx)
                sup = max(sup, abs(got - want))
        rep.add(N, 0, sup, scale=1)
        sups.append(sup)
    ok = all(b < a for a, b in zip(sups, sups[1:]))
    return rep, keys, {"sup_error_decreases": ok}


def _compare_identities(cfg, ctx, cache_dir, t0):
    """The full exact-identity suite at the configured weight."""
    params = _params_of(cfg)
    N = params.N
    table = _get_table(cfg, ctx, cache_dir)
    fr = sc.make_frame(params, min(N, table.M - 6), ctx)
    tol = 1000 * ctx.quad_rel_tol
    checks = {}
    rep = reports.ErrorReport(name="identities", meta={"bits": ctx.bits, "N": N})

    def record(name, resid, bound):
        checks[name] = bool(abs(resid) <= bound)
        rep.add(name, 0, abs(resid), scale=1)

    ns = [n for n in range(1, table.M - 1, max(1, (table.M - 2) // 8))]
    record("freud_residual", max(abs(freud.freud_residual(table, n)) for n in ns), tol)
    record("recursion_identity",
           max(abs(freud.recursive_identity_residual(table, n)) for n in ns[:-1] or ns), tol)
    zprobe = (fr.z1 + fr.z2) / 2
    n_mid = max(3, min(table.M - 4, N // 2))
    record("trace_a", abs(laxpair.a_matrix(table, n_mid, zprobe).trace()), ctx.eps)
    record("det_a_identity", abs(laxpair.det_a_identity_residual(table, n_mid, zprobe)), tol)
    record("compatibility", laxpair.compatibility_residual(table, n_mid, zprobe).norm(), tol)
    record("j_increment", max(abs(laxpair.j_value(table, k + 1) - laxpair.j_value(table, k) - 1)
                              for k in range(min(10, table.M - 2))), tol)
    record("schrodinger", laxpair.schrodinger_check(table, n_mid, zprobe), 10 * tol)
    from .numerics import airy_ai_complex
    zt = mpc("1.1", "0.3")
    om = mpmath.exp(mpc(0, 2) * mpmath.pi / 3)
    conn = airy_ai_complex(zt, ctx)[0] + om * airy_ai_complex(om * zt, ctx)[0] \
        + (1 / om) * airy_ai_complex(zt / om, ctx)[0]
    record("airy_connection", abs(conn), 64 * ctx.eps)
    fu = sc.phi_model(mpf("0.05"), "up", 2, N, ctx)
    fd = sc.phi_model(mpf("0.05"), "down", 2, N, ctx)
    record("phi_jump", (fu - fd @ sc.s_matrix()).norm() / fu.norm(), 64 * ctx.eps)
    record("s_jump", sc.s_jump_residual(fr, zprobe), 64 * ctx.eps)
    from .matrix2 import sigma3_conj
    zs = mpc("2.8", "0.4")
    m_pos = sc.psi0(fr, zs)
    m_neg = sigma3_conj(sc.psi0(fr, -zs))
    if fr.n % 2:
        m_neg = m_neg.scale(mpf(-1))
    record("psi0_symmetry", (m_pos - m_neg).norm() / m_pos.norm(), 64 * ctx.eps)
    record("det_t0", abs(sc.t0_matrix(fr, zs).det() - 1), 64 * ctx.eps)
    t0m = sc.t0_matrix(fr, zs)
    a0 = sc.a0_matrix(fr, zs)
    muv = sc.mu(fr, zs)
    from .matrix2 import Matrix2C
    record("t0_diagonalization",
           (t0m.inv() @ a0 @ t0m + Matrix2C.diag(muv, -muv)).norm() / a0.norm(), 64 * ctx.eps)
    record("xi_quadrature", abs(sc.xi(fr, mpc(3, 1)) - sc.xi_by_quadrature(fr, mpc(3, 1))), tol)
    record("e_tau", sc.e_tau_residual(fr, mpc("2.8", "0.3"), mpc("3.2", "0.8")), tol)
    gram_ok = _gram_check(table, ctx, 8)
    checks["orthogonality_gram"] = gram_ok
    rep.add("orthogonality_gram", 0, 0 if gram_ok else 1, scale=1)
    return rep, [params.cache_key(table.M, ctx)], checks


def _gram_check(table, ctx, nmax) -> bool:
    """Gram matrix of the wavefunctions is the identity to 10 quad_rel_tol."""
    from .numerics import integrate

    tol = 10 * ctx.quad_rel_tol
    with ctx.workprec(32):
        for i in range(nmax + 1):
            for j in range(i, nmax + 1):
                if (i + j) % 2:
                    continue   # odd parity integrand: exactly zero
                val = 2 * integrate(
                    lambda x: ortho.eval_psi(table, i, x) * ortho.eval_psi(table, j, x),
                    0, table.Z, ctx, abs_tol=ctx.quad_rel_tol)
                want = 1 if i == j else 0
                if abs(val - want) > tol:
                    return False
    return True


def cmd_compare(args) -> int:
    cfg = build_run_config(args)
    ctx = _ctx_of(cfg)
    cache_dir = _cache_dir(args)
    t0 = time.time()
    regime = args.regime
    if regime == "rn":
        rep, keys, checks = _compare_rn(cfg, ctx, cache_dir, t0)
    elif regime in ("bulk", "outer", "edge"):
        rep, keys, checks = _compare_pointwise(cfg, ctx, cache_dir, t0, regime)
    elif regime == "hn":
        rep, keys, checks = _compare_hn(cfg, ctx, cache_dir, t0)
    elif regime in ("kernel-sine", "kernel-airy"):
        rep, keys, checks = _compare_kernel(cfg, ctx, cache_dir, t0, regime)
    elif regime == "identities":
        rep, keys, checks = _compare_identities(cfg, ctx, cache_dir, t0)
    else:
        raise ConfigError(f"unknown regime {regime}")
    _emit(rep, cfg, keys, checks, cfg["out_dir"], t0)
    for name, ok in sorted(checks.items()):
        print(f"{'PASS' if ok else 'FAIL'} {regime}:{name}")
    return 0 if all(checks.values()) else 1


def cmd_psi0_probe(args) -> int:
    cfg = build_run_config(args)
    ctx = _ctx_of(cfg)
    cache_dir = _cache_dir(args)
    t0 = time.time()
    params = _params_of(cfg)
    n = int(cfg["n"]) if cfg["n"] else params.N
    fr = sc.make_frame(params, n, ctx,
                       b_frac=float(cfg["b_frac"]), delta_frac=float(cfg["delta_frac"]))
    rep = reports.ErrorReport(name="psi0_probe", meta={"N": params.N, "n": n, "bits": ctx.bits})
    checks = {}
    points = []
    for spec_str in args.z:
        if ":" in spec_str:
            zs, hint = spec_str.split(":", 1)
        else:
            zs, hint = spec_str, None
        points.append((mpmath.mpmathify(zs), hint))
    for z, hint in points:
        try:
            m = sc.psi0(fr, z, side_hint=hint)
            rep.add(str(z), 0, m.norm(), scale=1)
        except sc.AmbiguousRegion as exc:
            checks[f"point_{z}"] = False
            print(f"FAIL psi0 at {z}: {exc}")
            continue
    # jump residual summary at canonical diagnostic points
    checks["s_jump"] = bool(sc.s_jump_residual(fr, (fr.z1 + fr.z2) / 2) <= 64 * ctx.eps)
    th = mpf("0.9")
    zb = fr.z0 + fr.a_axis * mpmath.cos(th) + mpc(0, 1) * fr.b_axis * mpmath.sin(th)
    jn = sc.boundary_jump_norm(fr, zb)
    checks["boundary_jump_small"] = bool(jn < 1)
    rep.add("boundary_jump", 0, jn, scale=1)
    _emit(rep, cfg, [], checks, cfg["out_dir"], t0)
    for name, ok in sorted(checks.items()):
        print(f"{'PASS' if ok else 'FAIL'} psi0-probe:{name}")
    return 0 if all(checks.values()) else 1


def make_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="twocut",
                                 description="quartic double-well orthogonal polynomial laboratory")
    ap.add_argument("--config", help="key = value config file")
    ap.add_argument("--cache-dir", help=f"table cache directory (or ${DEFAULT_CACHE_ENV})")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--t", help="quadratic coefficient (t < 0)")
        p.add_argument("--g", help="quartic coefficient (g > 0)")
        p.add_argument("--N", help="semiclassical parameter")
        p.add_argument("--M", help="max table degree")
        p.add_argument("--n", help="wavefunction degree (default N)")
        p.add_argument("--bits", help="working precision bits")
        p.add_argument("--N-list", dest="N_list", help="comma list of N values")
        p.add_argument("--lam", help="target ratio n/N for rn sweeps")
        p.add_argument("--out-dir", dest="out_dir", help="report directory")
        p.add_argument("--name", help="experiment name prefix")

    p_table = sub.add_parser("table", help="build or load an oracle table")
    common(p_table)
    p_table.set_defaults(func=cmd_table)

    p_cmp = sub.add_parser("compare", help="run a comparison harness")
    common(p_cmp)
    p_cmp.add_argument("regime", choices=["rn", "bulk", "outer", "edge", "hn",
                                          "kernel-sine", "kernel-airy", "identities"])
    p_cmp.add_argument("--z0", help="bulk scaling center for kernel-sine")
    p_cmp.set_defaults(func=cmd_compare)

    p_probe = sub.add_parser("psi0-probe", help="tabulate parametrix values and jumps")
    common(p_probe)
    p_probe.add_argument("z", nargs="+", help="points, optionally 'z:hint' with "
                                              "hint tokens up/down/left/right/in/out")
    p_probe.set_defaults(func=cmd_psi0_probe)
    return ap


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
