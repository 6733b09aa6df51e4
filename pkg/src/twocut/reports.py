"""Tabular error reports with CSV/JSON emission and run manifests."""

from __future__ import annotations

import csv
import json
import os
import time
from dataclasses import dataclass, field

import mpmath


@dataclass(frozen=True)
class ReportRow:
    x: object          # abscissa (grid point or N)
    oracle: object
    formula: object
    abs_err: object
    rel_err: object


@dataclass
class ErrorReport:
    """Grid of oracle-vs-formula rows plus a fitted convergence rate."""

    name: str
    rows: list = field(default_factory=list)
    meta: dict = field(default_factory=dict)
    rate: float | None = None

    def add(self, x, oracle, formula, scale=None) -> None:
        oracle = mpmath.mpf(oracle) if not isinstance(oracle, (mpmath.mpf, mpmath.mpc)) else oracle
        abs_err = abs(formula - oracle)
        denom = abs(oracle) if scale is None else abs(scale)
        rel = abs_err / denom if denom > 0 else mpmath.mpf("inf")
        self.rows.append(ReportRow(x=x, oracle=oracle, formula=formula,
                                   abs_err=abs_err, rel_err=rel))

    def fit_rate(self, pairs=None) -> float:
        """Least-squares slope of log(err) vs log(x); pairs defaults to rows."""
        pts = pairs if pairs is not None else [(r.x, r.abs_err) for r in self.rows]
        xs = [mpmath.log(mpmath.mpf(p[0])) for p in pts]
        ys = [mpmath.log(mpmath.mpf(p[1])) for p in pts]
        nn = len(xs)
        mx = sum(xs) / nn
        my = sum(ys) / nn
        num = sum((a - mx) * (b - my) for a, b in zip(xs, ys))
        den = sum((a - mx) ** 2 for a in xs)
        self.rate = float(num / den)
        return self.rate

    def _fmt(self, v) -> str:
        if isinstance(v, (mpmath.mpf, mpmath.mpc)):
            return mpmath.nstr(v, 30)
        return str(v)

    def write_csv(self, path: str) -> None:
        with open(path, "w", newline="") as f:
            w = csv.writer(f)
            w.writerow(["x", "oracle", "formula", "abs_err", "rel_err"])
            for r in self.rows:
                w.writerow([self._fmt(r.x), self._fmt(r.oracle), self._fmt(r.formula),
                            self._fmt(r.abs_err), self._fmt(r.rel_err)])

    def write_json(self, path: str) -> None:
        doc = {
            "name": self.name,
            "meta": {k: self._fmt(v) if isinstance(v, (mpmath.mpf, mpmath.mpc)) else v
                     for k, v in sorted(self.meta.items())},
            "rate": self.rate,
            "rows": [[self._fmt(r.x), self._fmt(r.oracle), self._fmt(r.formula),
                      self._fmt(r.abs_err), self._fmt(r.rel_err)] for r in self.rows],
        }
        with open(path, "w") as f:
            json.dump(doc, f, indent=1, sort_keys=True)
            f.write("\n")


def write_manifest(path: str, config: dict, cache_keys: list,
                   checks: dict, wall_time: float) -> None:
    """One manifest per emitted data set; every report references one."""
    doc = {
        "tool": "twocut 0.1.0",
        "timestamp": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
        "config": {k: str(v) for k, v in sorted(config.items())},
        "table_cache_keys": sorted(cache_keys),
        "checks": {k: bool(v) for k, v in sorted(checks.items())},
        "wall_time_s": round(wall_time, 3),
    }
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "w") as f:
        json.dump(doc, f, indent=1, sort_keys=True)
        f.write("\n")
