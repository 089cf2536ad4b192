"""Restriction formula and boundary exponents, in closed form and by Monte Carlo.

For a hull ``A`` at positive distance from 0, with ``phi`` the map from
``H \\ A`` onto ``H`` fixing 0 and infinity and ``phi(z) ~ z`` at infinity,
chordal SLE(8/3) avoids ``A`` with probability ``phi'(0)^alpha``, ``alpha = 5/8``.
The slit ``[x, x + i eps sqrt 2]`` is hit with probability decaying like ``eps^s``,
``s = 8/kappa - 1``; for kappa = 8/3 the rescaled limit is ``B_1(x) = alpha / x^2``.
"""
from __future__ import annotations

import csv
import io
import json
import math
import warnings
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .detector import DetectorConfig, hull_hits
from .loewner import (
    DEFAULT_SEED,
    HullSpec,
    SleParams,
    flow_real_point,
    monitor_hits,
    polyline_hits,
    sample_driving,
    trace,
    vertical_slit,
)

__all__ = [
    "ExperimentRecord",
    "ExponentFit",
    "RestrictionParams",
    "analytic_avoid_probability",
    "b1_limit_check",
    "boundary_exponent_fit",
    "estimator_concordance",
    "exponent_schedule",
    "finite_eps_reference",
    "B1_COLUMNS",
    "martingale_check",
    "mc_avoid_probability",
    "phi_prime_0",
    "restriction_record",
    "table_csv",
]

KAPPA_RESTRICTION = Fraction(8, 3)
ALPHA_RESTRICTION = Fraction(5, 8)


@dataclass(frozen=True)
class RestrictionParams:
    alpha: float = float(ALPHA_RESTRICTION)
    kappa: float = float(KAPPA_RESTRICTION)

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError("alpha must be positive")
        if not 0 < self.kappa < 8:
            raise ValueError("kappa must lie in (0, 8)")

    @property
    def s(self) -> float:
        return 8.0 / self.kappa - 1.0


def phi_prime_0(h: HullSpec) -> float:
    """``phi'(0)`` for the uniformizing map of ``H \\ A``."""
    if not h.x > 0 or (h.kind == "half_disk" and h.size >= h.x):
        raise ValueError("hull touches 0")
    if h.kind == "vertical_slit":
        return h.x / math.hypot(h.x, h.size)
    return 1.0 - (h.size / h.x) ** 2


def analytic_avoid_probability(h: HullSpec, rp: RestrictionParams = RestrictionParams()) -> float:
    return phi_prime_0(h) ** rp.alpha


def finite_eps_reference(x: float, eps: float, alpha: float = float(ALPHA_RESTRICTION)) -> float:
    """``eps^-2 P[hit [x, x + i eps sqrt 2]]`` from the restriction formula; tends to ``alpha / x^2``."""
    return -math.expm1(-0.5 * alpha * math.log1p(2.0 * eps * eps / (x * x))) / (eps * eps)


# -- records ------------------------------------------------------------------

@dataclass
class ExperimentRecord:
    experiment: str
    params: dict
    estimate: float
    stderr: float
    analytic: float | None
    n_paths: int
    seed: int
    extra: dict = field(default_factory=dict)

    def within(self, n_sigma: float = 3.0, slack: float = 0.0) -> bool:
        return abs(self.estimate - self.analytic) <= n_sigma * self.stderr + slack

    def to_dict(self) -> dict:
        d = asdict(self)
        if not d["extra"]:
            del d["extra"]
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)


def table_csv(rows: Sequence[dict], columns: Sequence[str]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([repr(float(r[c])) if isinstance(r[c], (float, np.floating)) else r[c] for c in columns])
    return buf.getvalue()


def _binomial(k: int, n: int) -> tuple[float, float]:
    p = k / n
    return p, math.sqrt(p * (1.0 - p) / n)


def _params_dict(p: SleParams) -> dict:
    return {"kappa": p.kappa, "T": p.T, "n_steps": p.n_steps}


# -- Monte Carlo ----------------------------------------------------------------

def _hits(p, hulls, n_paths, method, config, workers):
    if method == "track":
        return hull_hits(p, hulls, n_paths, config, workers=workers)
    if method == "monitor":
        return monitor_hits(p, hulls, n_paths, workers=workers)
    raise ValueError(f"unknown hit detector {method!r}")


def mc_avoid_probability(
    p: SleParams,
    h: HullSpec,
    n_paths: int,
    method: str = "track",
    config: DetectorConfig = DetectorConfig(),
    workers: int = 1,
) -> tuple[float, float]:
    """Fraction of paths avoiding ``h`` and its binomial standard error."""
    hits = _hits(p, [h], n_paths, method, config, workers)[:, 0]
    return _binomial(int(n_paths - hits.sum()), n_paths)


def restriction_record(p: SleParams, h: HullSpec, n_paths: int, **kw) -> ExperimentRecord:
    est, se = mc_avoid_probability(p, h, n_paths, **kw)
    return ExperimentRecord(
        "restriction",
        {**_params_dict(p), "hull": h.kind, "x": h.x, "size": h.size},
        est,
        se,
        analytic_avoid_probability(h),
        n_paths,
        p.seed,
    )


def exponent_schedule(kappa: float, x: float, eps_grid: Sequence[float]) -> tuple[float, int]:
    """Default ``(T, n_steps)`` for slit-hitting runs at base point ``x``.

    Almost every hit happens before capacity ``4 x^2`` for kappa <= 4; for
    kappa > 4 late returns matter and ``16 x^2`` is used.  The step is chosen
    so that one step's slit is at most 0.3 (kappa <= 4) or 0.6 (kappa > 4)
    of the smallest slit height; for kappa > 4 bridge refinement resolves
    the rest.
    """
    T = (16.0 if kappa > 4 else 4.0) * x * x
    h_min = min(eps_grid) * math.sqrt(2.0)
    dt = ((0.3 if kappa > 4 else 0.15) * h_min) ** 2
    return T, max(1000, math.ceil(T / dt))


def _slits(x, eps_grid):
    return [vertical_slit(x, e * math.sqrt(2.0)) for e in eps_grid]


def _wls_slope(logx, logp, w):
    W = w.sum()
    xm = (w * logx).sum() / W
    ym = (w * logp).sum() / W
    return float((w * (logx - xm) * (logp - ym)).sum() / (w * (logx - xm) ** 2).sum())


@dataclass
class ExponentFit:
    s_hat: float
    stderr: float
    table: list
    excluded: list
    kappa: float
    x: float
    T: float
    n_steps: int
    n_paths: int
    seed: int

    @property
    def s_theory(self) -> float:
        return 8.0 / self.kappa - 1.0

    def record(self) -> ExperimentRecord:
        return ExperimentRecord(
            "exponent",
            {"kappa": self.kappa, "x": self.x, "T": self.T, "n_steps": self.n_steps,
             "eps_grid": [r["eps"] for r in self.table]},
            self.s_hat, self.stderr, self.s_theory, self.n_paths, self.seed,
            {"excluded": self.excluded},
        )

    def csv(self) -> str:
        return table_csv(self.table, ["eps", "p_hat", "stderr"])


def boundary_exponent_fit(
    kappa: float,
    x: float,
    eps_grid: Sequence[float],
    n_paths: int,
    *,
    T: float | None = None,
    n_steps: int | None = None,
    seed: int = DEFAULT_SEED,
    n_boot: int = 200,
    config: DetectorConfig = DetectorConfig(),
    workers: int = 1,
) -> ExponentFit:
    """Slope of ``log P[hit slit at x of height eps sqrt 2]`` against ``log eps``.

    Weighted least squares with binomial weights; the standard error comes
    from a path bootstrap.  Cells without hits are dropped with a warning.
    """
    if not 0 < kappa < 8:
        raise ValueError("need 0 < kappa < 8")
    eps_grid = [float(e) for e in eps_grid]
    T0, n0 = exponent_schedule(kappa, x, eps_grid)
    p = SleParams(kappa, T if T is not None else T0, n_steps if n_steps is not None else n0, seed)
    hits = hull_hits(p, _slits(x, eps_grid), n_paths, config, workers=workers)
    counts = hits.sum(axis=0)
    table, keep, excluded = [], [], []
    for q, e in enumerate(eps_grid):
        ph, se = _binomial(int(counts[q]), n_paths)
        table.append({"eps": e, "p_hat": ph, "stderr": se})
        if counts[q] == 0:
            excluded.append(e)
        else:
            keep.append(q)
    if excluded:
        warnings.warn(f"no hits at eps={excluded}; excluded from the fit", RuntimeWarning, stacklevel=2)
    if len(keep) < 2:
        raise ValueError("fewer than two grid cells with hits")
    keep = np.array(keep)
    logx = np.log(np.array(eps_grid))[keep]

    def fit(c):
        ph = c[keep] / n_paths
        if np.any(ph <= 0):
            return math.nan
        w = n_paths * ph / np.maximum(1.0 - ph, 1.0 / n_paths)
        return _wls_slope(logx, np.log(ph), w)

    s_hat = fit(counts)
    rng = np.random.Generator(np.random.Philox(key=(seed << 64) | 0xB007))
    boots = []
    for _ in range(n_boot):
        rows = rng.integers(0, n_paths, n_paths)
        b = fit(hits[rows].sum(axis=0))
        if not math.isnan(b):
            boots.append(b)
    stderr = float(np.std(boots, ddof=1)) if len(boots) > 1 else math.nan
    return ExponentFit(s_hat, stderr, table, excluded, kappa, x, p.T, p.n_steps, n_paths, seed)


def b1_limit_check(
    p: SleParams,
    x: float,
    eps_grid: Sequence[float],
    n_paths: int,
    config: DetectorConfig = DetectorConfig(),
    workers: int = 1,
) -> list[dict]:
    """Rows ``eps, p_hat, stderr, scaled, scaled_stderr, exact_finite, limit`` with ``scaled = p_hat / eps^2``."""
    eps_grid = [float(e) for e in eps_grid]
    hits = hull_hits(p, _slits(x, eps_grid), n_paths, config, workers=workers)
    rp = RestrictionParams()
    rows = []
    for q, e in enumerate(eps_grid):
        ph, se = _binomial(int(hits[:, q].sum()), n_paths)
        rows.append({
            "eps": e,
            "p_hat": ph,
            "stderr": se,
            "scaled": ph / (e * e),
            "scaled_stderr": se / (e * e),
            "exact_finite": finite_eps_reference(x, e, rp.alpha),
            "limit": rp.alpha / (x * x),
        })
    return rows


B1_COLUMNS = ["eps", "p_hat", "stderr", "scaled", "scaled_stderr", "exact_finite", "limit"]


def martingale_check(p: SleParams, x: float, n_paths: int, alpha: float = float(ALPHA_RESTRICTION),
                     workers: int = 1) -> ExperimentRecord:
    """Mean of ``g_T'(x)^2 alpha / (g_T(x) - W_T)^2`` against its time-0 value ``alpha / x^2``."""
    g, dg, w = flow_real_point(p, x, n_paths, workers=workers)
    alive = ~np.isnan(g)
    m = np.zeros(n_paths)
    m[alive] = dg[alive] ** 2 * alpha / (g[alive] - w[alive]) ** 2
    est = float(m.mean())
    se = float(m.std(ddof=1) / math.sqrt(n_paths))
    return ExperimentRecord("martingale", {**_params_dict(p), "x": x, "alpha": alpha}, est, se,
                            alpha / (x * x), n_paths, p.seed, {"swallowed": int((~alive).sum())})


def estimator_concordance(
    p: SleParams,
    hulls: Sequence[HullSpec],
    n_paths: int,
    config: DetectorConfig = DetectorConfig(),
) -> dict:
    """Per-hull agreement of the image tracker and the tip monitor with the trace polyline.

    The polyline ``gamma(t_i)`` is computed by the reverse zipper, O(n^2) per path,
    so keep ``p.n_steps`` small.
    """
    hulls = list(hulls)
    track = hull_hits(p, hulls, n_paths, config)
    mon = monitor_hits(p, hulls, n_paths)
    poly = np.zeros_like(track)
    for i in range(n_paths):
        tr = trace(sample_driving(p, i))
        poly[i] = [polyline_hits(tr, h) for h in hulls]
    return {
        "track_vs_polyline": (track == poly).mean(axis=0),
        "monitor_vs_polyline": (mon == poly).mean(axis=0),
        "p_track": track.mean(axis=0),
        "p_monitor": mon.mean(axis=0),
        "p_polyline": poly.mean(axis=0),
    }
