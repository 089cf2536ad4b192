"""Chordal Loewner flow with piecewise-constant driving.

Each capacity step ``dt`` with frozen driving value ``w`` is the exact
vertical-slit map ``z -> w + sqrt((z - w)^2 + 4 dt)`` (branch onto the upper
half-plane), so the discrete hull is a composition of tiny slits of height
``2 sqrt(dt)`` and every flowed point stays in the closed upper half-plane.

Driving increments come from counter-based Philox streams keyed by
``(seed, path_index)``; a path is reproducible on its own, independent of
batch size or worker count.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numba as nb
import numpy as np

__all__ = [
    "DEFAULT_SEED",
    "DrivingPath",
    "FlowState",
    "HullSpec",
    "SleParams",
    "TracePolyline",
    "flow_point",
    "half_disk",
    "hit_slit",
    "map_paths",
    "monitor_hits",
    "path_rng",
    "polyline_hits",
    "sample_driving",
    "step_map",
    "trace",
    "vertical_slit",
]

DEFAULT_SEED = 20030131
_TWO64 = 1 << 64


# -- parameters and driving -------------------------------------------------

@dataclass(frozen=True)
class SleParams:
    kappa: float
    T: float = 1.0
    n_steps: int = 20_000
    seed: int = DEFAULT_SEED

    def __post_init__(self):
        if not self.kappa >= 0:
            raise ValueError(f"kappa must be non-negative, got {self.kappa}")
        if not self.T > 0:
            raise ValueError(f"total capacity must be positive, got {self.T}")
        if self.n_steps < 1:
            raise ValueError("n_steps must be at least 1")
        if not 0 <= self.seed < _TWO64:
            raise ValueError("seed must be a 64-bit unsigned integer")

    @property
    def dt(self) -> float:
        return self.T / self.n_steps


@dataclass(frozen=True)
class DrivingPath:
    dt: float
    dw: np.ndarray
    kappa: float = 0.0
    seed: int | None = None
    path_index: int | None = None

    @property
    def n_steps(self) -> int:
        return len(self.dw)

    @property
    def T(self) -> float:
        return self.dt * len(self.dw)

    def values(self) -> np.ndarray:
        """Driving value in force during each step (W at the step's start); length n_steps."""
        w = np.empty(len(self.dw))
        w[0] = 0.0
        np.cumsum(self.dw[:-1], out=w[1:])
        return w

    def final_value(self) -> float:
        return float(np.sum(self.dw))

    def scaled(self, lam: float) -> "DrivingPath":
        """Brownian rescaling ``dt -> lam dt``, ``dw -> sqrt(lam) dw``."""
        return DrivingPath(self.dt * lam, self.dw * math.sqrt(lam), self.kappa, self.seed, self.path_index)


def path_rng(seed: int, path_index: int) -> np.random.Generator:
    """Counter-based stream for one path."""
    if not 0 <= seed < _TWO64 or not 0 <= path_index < _TWO64:
        raise ValueError("seed and path index must be 64-bit unsigned")
    return np.random.Generator(np.random.Philox(key=(seed << 64) | path_index))


def sample_driving(p: SleParams, path_index: int = 0) -> DrivingPath:
    rng = path_rng(p.seed, path_index)
    dw = rng.standard_normal(p.n_steps) * math.sqrt(p.kappa * p.dt)
    return DrivingPath(p.dt, dw, p.kappa, p.seed, path_index)


def driving_batch(p: SleParams, start: int, stop: int) -> np.ndarray:
    """Increments for paths ``start..stop-1`` as rows of a 2-D array."""
    scale = math.sqrt(p.kappa * p.dt)
    out = np.empty((stop - start, p.n_steps))
    for r, idx in enumerate(range(start, stop)):
        path_rng(p.seed, idx).standard_normal(p.n_steps, out=out[r])
    out *= scale
    return out


# -- elementary maps --------------------------------------------------------

@nb.njit(cache=True, nogil=True)
def _step(z, w, dt):
    """One slit map; returns (image, swallowed)."""
    u = z - w
    if u.imag == 0.0:
        if u.real == 0.0:
            return complex(w, 0.0), True
        r = math.sqrt(u.real * u.real + 4.0 * dt)
        return complex(w + (r if u.real > 0 else -r), 0.0), False
    s = np.sqrt(u * u + 4.0 * dt)
    if s.imag < 0.0:
        s = -s
    elif s.imag == 0.0:
        # point on the current slit
        return complex(w + s.real, 0.0), True
    return w + s, False


@nb.njit(cache=True, nogil=True)
def _step_inverse(z, w, dt):
    u = z - w
    s = np.sqrt(u * u - 4.0 * dt)
    if s.imag < 0.0 or (s.imag == 0.0 and u.imag == 0.0 and abs(u.real) < 2.0 * math.sqrt(dt)):
        s = -s if s.imag < 0.0 else complex(0.0, math.sqrt(4.0 * dt - u.real * u.real))
    return w + s


def step_map(z: complex, w: float, dt: float) -> complex | None:
    """Image of ``z`` under one capacity-``dt`` slit map at ``w``; ``None`` if swallowed."""
    if complex(z).imag < 0:
        raise ValueError("point must lie in the closed upper half-plane")
    if dt == 0:
        return complex(z)
    out, swallowed = _step(complex(z), float(w), float(dt))
    return None if swallowed else out


# -- flowing single points --------------------------------------------------

@dataclass(frozen=True)
class FlowState:
    z: complex
    swallowed_at: float | None
    min_gap: float
    deriv: complex = 1.0


@nb.njit(cache=True, nogil=True)
def _flow(dw, dt, z0):
    w = 0.0
    z = z0
    d = 1.0 + 0.0j
    gap = abs(z - w)
    real = z.imag == 0.0
    n = dw.shape[0]
    for i in range(n):
        u = z - w
        g = abs(u)
        if g < gap:
            gap = g
        if gap == 0.0:
            return z, i, 0.0, d
        z_new, sw = _step(z, w, dt)
        if sw:
            return z_new, i, 0.0, d
        d = d * (u / (z_new - w))
        z = z_new
        w_new = w + dw[i]
        if real and (z.real - w) * (z.real - w_new) < 0.0:
            # driving jumped across a boundary point
            return z, i + 1, 0.0, d
        w = w_new
    g = abs(z - w)
    if g < gap:
        gap = g
    return z, -1, gap, d


def flow_point(d: DrivingPath, z0: complex) -> FlowState:
    """Flow ``z0`` through every step; records swallowing time and ``min_t |z_t - W_t|``."""
    z0 = complex(z0)
    if z0.imag < 0:
        raise ValueError("starting point must lie in the closed upper half-plane")
    z, idx, gap, deriv = _flow(np.ascontiguousarray(d.dw, dtype=np.float64), d.dt, z0)
    swallowed = None if idx < 0 else idx * d.dt
    return FlowState(complex(z), swallowed, float(gap), complex(deriv))


# -- trace ------------------------------------------------------------------

@dataclass(frozen=True)
class TracePolyline:
    points: np.ndarray
    times: np.ndarray

    def to_csv(self) -> str:
        rows = ["t,re,im"]
        for t, z in zip(self.times, self.points):
            rows.append(f"{float(t)!r},{float(z.real)!r},{float(z.imag)!r}")
        return "\n".join(rows) + "\n"


@nb.njit(cache=True, nogil=True)
def _trace(dw, dt, stride):
    n = dw.shape[0]
    w = np.empty(n)
    acc = 0.0
    for i in range(n):
        w[i] = acc
        acc += dw[i]
    m = n // stride
    pts = np.empty(m + 1, dtype=np.complex128)
    pts[0] = 0.0
    for r in range(1, m + 1):
        i = r * stride
        z = complex(w[i - 1], 2.0 * math.sqrt(dt))
        for l in range(i - 2, -1, -1):
            z = _step_inverse(z, w[l], dt)
        pts[r] = z
    return pts


def trace(d: DrivingPath, stride: int = 1) -> TracePolyline:
    """Curve points ``gamma(t_i)`` at every ``stride``-th step (cost O(n^2 / stride))."""
    if stride < 1:
        raise ValueError("stride must be positive")
    pts = _trace(np.ascontiguousarray(d.dw, dtype=np.float64), d.dt, int(stride))
    times = np.arange(len(pts)) * stride * d.dt
    return TracePolyline(pts, times)


# -- hulls ------------------------------------------------------------------

SLIT, HALF_DISK = 0, 1


@dataclass(frozen=True)
class HullSpec:
    """Vertical slit ``[x, x + iL]`` or half-disk of radius ``r`` centred at real ``x``."""

    kind: str
    x: float
    size: float

    def __post_init__(self):
        if self.kind not in ("vertical_slit", "half_disk"):
            raise ValueError(f"unknown hull kind {self.kind!r}")
        if not self.size > 0:
            raise ValueError("hull size must be positive")
        if not self.x > 0 or (self.kind == "half_disk" and self.size >= self.x):
            raise ValueError("hull must be bounded away from 0 (x > 0, and r < x for a half-disk)")

    @property
    def code(self) -> int:
        return SLIT if self.kind == "vertical_slit" else HALF_DISK

    @property
    def reach(self) -> float:
        """Largest distance from 0 of a hull point."""
        if self.kind == "vertical_slit":
            return math.hypot(self.x, self.size)
        return abs(self.x) + self.size

    def point(self, s: float) -> complex:
        return complex(_hull_point(self.code, self.x, self.size, s))

    def boundary_samples(self) -> list[complex]:
        """Default monitoring points: slit tip and midpoint, 5 points on the half-disk arc."""
        if self.kind == "vertical_slit":
            return [self.point(1.0), self.point(0.5)]
        return [self.point(s) for s in np.linspace(0.0, 1.0, 7)[1:-1]]


def vertical_slit(x: float, L: float) -> HullSpec:
    return HullSpec("vertical_slit", float(x), float(L))


def half_disk(x: float, r: float) -> HullSpec:
    return HullSpec("half_disk", float(x), float(r))


@nb.njit(cache=True, nogil=True)
def _hull_point(kind, x, size, s):
    if kind == 0:
        return complex(x, size * s)
    th = math.pi * (1.0 - s)
    return complex(x + size * math.cos(th), size * math.sin(th))


@nb.njit(cache=True, nogil=True)
def _monitor_path(dw, dt, pts, threshold):
    """Spec-style monitor: any point swallowed or closer than ``threshold`` to the driving."""
    for k in range(pts.shape[0]):
        z, idx, gap, d = _flow(dw, dt, pts[k])
        if idx >= 0 or gap < threshold:
            return True
    return False


def hit_slit(d: DrivingPath, x: float, eps: float, delta_hit: float = 0.02) -> bool:
    """Whether the curve meets ``[x, x + i eps sqrt 2]``, by monitoring its tip and midpoint.

    HIT iff a monitored point is swallowed or comes within ``delta_hit * eps``
    of the driving value.
    """
    if x == 0 or not eps > 0:
        raise ValueError("need x != 0 and eps > 0")
    height = eps * math.sqrt(2.0)
    pts = np.array([complex(x, height), complex(x, height / 2)])
    return bool(_monitor_path(np.ascontiguousarray(d.dw, dtype=np.float64), d.dt, pts, delta_hit * eps))


# -- many paths ---------------------------------------------------------------

def map_paths(
    p: SleParams,
    n_paths: int,
    kernel: Callable[[np.ndarray, int], np.ndarray],
    batch: int = 128,
    workers: int = 1,
) -> np.ndarray:
    """Run ``kernel(dw_batch, first_index)`` over path batches and stack results in path order."""
    starts = list(range(0, n_paths, batch))

    def run(start):
        stop = min(start + batch, n_paths)
        return kernel(driving_batch(p, start, stop), start)

    if workers <= 1:
        parts = [run(s) for s in starts]
    else:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            parts = list(ex.map(run, starts))
    if not parts:
        return np.empty((0,))
    return np.concatenate(parts, axis=0)


def monitor_hits(
    p: SleParams, hulls: Sequence[HullSpec], n_paths: int, delta_hit: float = 0.02, batch: int = 128, workers: int = 1
) -> np.ndarray:
    """Boolean array (n_paths, n_hulls) from the boundary-point monitor."""
    pts = [np.array(h.boundary_samples(), dtype=np.complex128) for h in hulls]
    scales = [h.size for h in hulls]

    def kernel(dw, start):
        out = np.empty((dw.shape[0], len(hulls)), dtype=bool)
        for r in range(dw.shape[0]):
            for q in range(len(hulls)):
                out[r, q] = _monitor_path(dw[r], p.dt, pts[q], delta_hit * scales[q])
        return out

    return map_paths(p, n_paths, kernel, batch=batch, workers=workers).reshape(n_paths, len(hulls))


@nb.njit(cache=True, nogil=True)
def _flow_real_batch(dw, dt, x, out_z, out_d, out_w):
    for p in range(dw.shape[0]):
        z, idx, gap, d = _flow(dw[p], dt, complex(x, 0.0))
        out_z[p] = z.real if idx < 0 else np.nan
        out_d[p] = d.real
        s = 0.0
        for i in range(dw.shape[1]):
            s += dw[p, i]
        out_w[p] = s


def flow_real_point(p: SleParams, x: float, n_paths: int, batch: int = 256, workers: int = 1):
    """``(g_T(x), g_T'(x), W_T)`` per path; ``g_T(x)`` is NaN for swallowed points."""

    def kernel(dw, start):
        m = dw.shape[0]
        z = np.empty(m)
        d = np.empty(m)
        w = np.empty(m)
        _flow_real_batch(dw, p.dt, float(x), z, d, w)
        return np.stack([z, d, w], axis=1)

    res = map_paths(p, n_paths, kernel, batch=batch, workers=workers)
    return res[:, 0], res[:, 1], res[:, 2]


def polyline_hits(tr: TracePolyline, hull: HullSpec) -> bool:
    """Whether the trace polyline meets the hull (segment crossing / entering the disk)."""
    pts = tr.points
    if hull.kind == "vertical_slit":
        return bool(_polyline_meets_segment(pts, complex(hull.x, 0.0), complex(hull.x, hull.size)))
    return bool(_polyline_meets_disk(pts, complex(hull.x, 0.0), hull.size))


@nb.njit(cache=True, nogil=True)
def _seg_point_dist(a, b, p):
    ab = b - a
    L2 = ab.real * ab.real + ab.imag * ab.imag
    if L2 == 0.0:
        return abs(p - a)
    t = ((p - a).real * ab.real + (p - a).imag * ab.imag) / L2
    if t < 0.0:
        t = 0.0
    elif t > 1.0:
        t = 1.0
    return abs(p - (a + t * ab))


@nb.njit(cache=True, nogil=True)
def _cross(o, a, b):
    return (a - o).real * (b - o).imag - (a - o).imag * (b - o).real


@nb.njit(cache=True, nogil=True)
def _seg_seg_dist(a, b, c, d):
    d1 = _cross(c, d, a)
    d2 = _cross(c, d, b)
    d3 = _cross(a, b, c)
    d4 = _cross(a, b, d)
    if ((d1 > 0.0 and d2 < 0.0) or (d1 < 0.0 and d2 > 0.0)) and ((d3 > 0.0 and d4 < 0.0) or (d3 < 0.0 and d4 > 0.0)):
        return 0.0
    m = _seg_point_dist(c, d, a)
    m = min(m, _seg_point_dist(c, d, b))
    m = min(m, _seg_point_dist(a, b, c))
    m = min(m, _seg_point_dist(a, b, d))
    return m


@nb.njit(cache=True, nogil=True)
def _polyline_meets_segment(pts, c, d):
    for i in range(pts.shape[0] - 1):
        if _seg_seg_dist(pts[i], pts[i + 1], c, d) == 0.0:
            return True
    return False


@nb.njit(cache=True, nogil=True)
def _polyline_meets_disk(pts, center, r):
    for i in range(pts.shape[0] - 1):
        if _seg_point_dist(pts[i], pts[i + 1], center) <= r:
            return True
    return False
