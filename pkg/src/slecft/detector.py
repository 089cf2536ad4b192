"""Hull-hit detection by tracking the hull's image under the discrete flow.

The hull ``A`` is sampled by points ordered along it.  Before each step the
polyline through their current images is tested against the slit that step is
about to add; if they meet, the curve hits ``A``.  Segments too coarse to decide
are bisected, the new parameter being flowed from time 0.

A frozen-driving step cannot resolve a hull foot being enclosed: when the
driving jumps over the image of a foot, the step is replayed as a Brownian
bridge of ``substeps`` finer steps, recursively up to ``max_depth`` levels.  At
the finest level a crossing that is still unresolved counts as a hit when the
hull image is larger than the slit height there, and as a swallowed (missed)
hull otherwise.

Bridge normals come from a counter hash keyed by ``(seed, path_index)`` and the
position in the refinement tree, so results do not depend on batching.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numba as nb
import numpy as np

from .loewner import (
    DrivingPath,
    HullSpec,
    SleParams,
    _hull_point,
    _seg_seg_dist,
    _step,
    map_paths,
)

__all__ = ["DetectorConfig", "bridge_key", "hull_hit_step", "hull_hits"]

_MASK = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


@dataclass(frozen=True)
class DetectorConfig:
    n_init: int = 9
    cap: int = 512
    res_factor: float = 0.5
    pocket_factor: float = 1.0
    substeps: int = 8
    max_depth: int = 12
    margin: float | None = None
    hit_margin: float = 0.0

    def __post_init__(self):
        if self.n_init < 2 or self.cap < self.n_init:
            raise ValueError("need 2 <= n_init <= cap")
        if self.substeps < 2 or self.max_depth < 0:
            raise ValueError("need substeps >= 2 and max_depth >= 0")

    def approach_margin(self, kappa: float) -> float:
        """Near-approach refinement margin in slit heights; by default only for kappa > 4.

        For kappa > 4 the driving touches the image of the hull like a Bessel
        process of dimension < 2 hitting 0, which a bridge between two positive
        samples a few slit heights away still does with sizeable probability.
        For kappa <= 4 there are no such touches and extra refinement only
        perturbs the grid.
        """
        if self.margin is not None:
            return self.margin
        return 2.0 if kappa > 4 else 0.0


def _mix_py(x: int) -> int:
    x &= _MASK
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK
    return x ^ (x >> 31)


def bridge_key(seed: int, path_index: int) -> int:
    """64-bit key of the refinement stream of one path."""
    return _mix_py(seed ^ _mix_py(path_index + _GOLDEN))


@nb.njit(cache=True, nogil=True)
def _mix(x):
    x = (x ^ (x >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    x = (x ^ (x >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return x ^ (x >> np.uint64(31))


@nb.njit(cache=True, nogil=True)
def _normal(ctx, k):
    a = _mix(ctx ^ _mix(np.uint64(2 * k + 1)))
    b = _mix(a ^ np.uint64(_GOLDEN))
    u1 = (float(a >> np.uint64(11)) + 1.0) * 2.0**-53
    u2 = float(b >> np.uint64(11)) * 2.0**-53
    return math.sqrt(-2.0 * math.log(u1)) * math.cos(2.0 * math.pi * u2)


@nb.njit(cache=True, nogil=True)
def _value(L, i, w0, subv):
    if L == 0:
        return w0[i]
    return subv[L, i]


@nb.njit(cache=True, nogil=True)
def _sweep_meets(zs, lo_j, hi_j, lo, hi, h):
    """Does the image polyline ``zs[lo_j..hi_j]`` meet the strip ``[lo, hi] x [0, h]``?"""
    c00 = complex(lo, 0.0)
    c10 = complex(hi, 0.0)
    c01 = complex(lo, h)
    c11 = complex(hi, h)
    for j in range(lo_j, hi_j + 1):
        z = zs[j]
        if lo <= z.real <= hi and z.imag <= h:
            return True
    for j in range(lo_j, hi_j):
        a = zs[j]
        b = zs[j + 1]
        if min(a.real, b.real) > hi or max(a.real, b.real) < lo or min(a.imag, b.imag) > h:
            continue
        if (_seg_seg_dist(a, b, c00, c01) == 0.0 or _seg_seg_dist(a, b, c10, c11) == 0.0
                or _seg_seg_dist(a, b, c01, c11) == 0.0):
            return True
    return False


@nb.njit(cache=True, nogil=True)
def _reflow(z, L, i, idx, w0, subv, dtl):
    # levels above L are mid-way through their step idx[l] - 1
    for l in range(L + 1):
        done = i if l == L else idx[l] - 1
        for s in range(done):
            z, sw = _step(z, _value(l, s, w0, subv), dtl[l])
            if sw:
                return z, True
    return z, False


@nb.njit(cache=True, nogil=True)
def _open_level(L, step, a, b, subv, dtl, nst, idx, ctx, kappa, m):
    """Set up level ``L + 1`` as a Brownian bridge from ``a`` to ``b`` over step ``step`` of level ``L``."""
    ctx[L + 1] = _mix(ctx[L] ^ (np.uint64(step) * np.uint64(_GOLDEN) + np.uint64(L + 1)))
    dts = dtl[L] / m
    B = a
    subv[L + 1, 0] = a
    for k in range(m - 1):
        rem = m - k
        sd = math.sqrt(kappa * dts * (rem - 1) / rem)
        B = B + (b - B) / rem + sd * _normal(ctx[L + 1], k)
        subv[L + 1, k + 1] = B
    subv[L + 1, m] = b
    dtl[L + 1] = dts
    nst[L + 1] = m
    idx[L + 1] = 0


@nb.njit(cache=True, nogil=True)
def _extent(zs, cnt, j0):
    e = 0.0
    for j in range(cnt):
        d = abs(zs[j] - zs[j0])
        if d > e:
            e = d
    return e


@nb.njit(cache=True, nogil=True)
def _track(w0, dt, kappa, key, kind, hx, hsize, ip, fp):
    """Main-grid step of the first hit; -1 if none, -2-i if the hull is swallowed at step i."""
    n_init, cap, m, max_depth = ip
    res_factor, pocket_factor, margin, hit_margin = fp
    n = w0.shape[0] - 1
    D = max_depth + 1
    par = np.empty(cap)
    zs = np.empty(cap, dtype=np.complex128)
    for j in range(n_init):
        par[j] = j / (n_init - 1)
        zs[j] = _hull_point(kind, hx, hsize, par[j])
    cnt = n_init
    prev_par = np.empty((D, cap))
    prev_zs = np.empty((D, cap), dtype=np.complex128)
    prev_cnt = np.zeros(D, dtype=np.int64)
    subv = np.empty((D, m + 1))
    dtl = np.empty(D)
    nst = np.empty(D, dtype=np.int64)
    idx = np.zeros(D, dtype=np.int64)
    skip = np.zeros(D, dtype=np.bool_)
    ctx = np.empty(D, dtype=np.uint64)
    dtl[0] = dt
    nst[0] = n
    ctx[0] = key
    n_feet = 1 if kind == 0 else 2
    L = 0
    while True:
        i = idx[L]
        main = i if L == 0 else idx[0] - 1
        h = 2.0 * math.sqrt(dtl[L])
        deep = L < max_depth
        if i > 0 and not skip[L]:
            # did the driving, over the step just taken, jump across a foot or (for
            # margin > 0) pass within margin slit heights under the image?
            wp = _value(L, i - 1, w0, subv)
            wn = _value(L, i, w0, subv)
            crossed = -1
            for f in range(n_feet):
                fj = 0 if f == 0 else cnt - 1
                zf = zs[fj].real
                if (zf - wp) * (zf - wn) < 0.0:
                    crossed = fj
                    break
            g = margin if deep else hit_margin
            if crossed >= 0 or _sweep_meets(zs, 1, cnt - n_feet, min(wp, wn) - g * h,
                                            max(wp, wn) + g * h, (1.0 + g) * h):
                if deep:
                    cnt = prev_cnt[L]
                    for j in range(cnt):
                        par[j] = prev_par[L, j]
                        zs[j] = prev_zs[L, j]
                    _open_level(L, i - 1, wp, wn, subv, dtl, nst, idx, ctx, kappa, m)
                    skip[L] = True
                    skip[L + 1] = False
                    L += 1
                    continue
                if crossed < 0 or _extent(zs, cnt, crossed) > pocket_factor * h:
                    return main
                return -2 - main
        skip[L] = False
        if i == nst[L]:
            if L == 0:
                return -1
            L -= 1
            continue
        wi = _value(L, i, w0, subv)
        top = complex(wi, h)
        bot = complex(wi, 0.0)
        res = res_factor * h
        j = 0
        while j < cnt - 1:
            a = zs[j]
            b = zs[j + 1]
            seglen = abs(b - a)
            if (min(a.real, b.real) > wi + seglen or max(a.real, b.real) < wi - seglen
                    or min(a.imag, b.imag) > h + seglen):
                j += 1
                continue
            dist = _seg_seg_dist(a, b, bot, top)
            if dist == 0.0 or dist < seglen:
                if seglen > res and cnt < cap:
                    pm = 0.5 * (par[j] + par[j + 1])
                    zm, sw = _reflow(_hull_point(kind, hx, hsize, pm), L, i, idx, w0, subv, dtl)
                    if sw:
                        return main
                    for q in range(cnt, j + 1, -1):
                        par[q] = par[q - 1]
                        zs[q] = zs[q - 1]
                    par[j + 1] = pm
                    zs[j + 1] = zm
                    cnt += 1
                    continue
                if dist == 0.0:
                    return main
            j += 1
        prev_cnt[L] = cnt
        for j in range(cnt):
            prev_par[L, j] = par[j]
            prev_zs[L, j] = zs[j]
        for j in range(cnt):
            z, sw = _step(zs[j], wi, dtl[L])
            if sw:
                return main
            zs[j] = z
        idx[L] = i + 1


@nb.njit(cache=True, nogil=True)
def _track_batch(dw, dt, kappa, keys, kinds, hxs, sizes, ip, fp, out):
    n = dw.shape[1]
    w0 = np.empty(n + 1)
    for r in range(dw.shape[0]):
        acc = 0.0
        for i in range(n):
            w0[i] = acc
            acc += dw[r, i]
        w0[n] = acc
        for q in range(kinds.shape[0]):
            out[r, q] = _track(w0, dt, kappa, keys[r], kinds[q], hxs[q], sizes[q], ip, fp)


def _run(dw, dt, kappa, keys, hulls, cfg, out):
    kinds = np.array([h.code for h in hulls], dtype=np.int64)
    hxs = np.array([h.x for h in hulls], dtype=np.float64)
    sizes = np.array([h.size for h in hulls], dtype=np.float64)
    ip = (int(cfg.n_init), int(cfg.cap), int(cfg.substeps), int(cfg.max_depth))
    fp = (float(cfg.res_factor), float(cfg.pocket_factor), float(cfg.approach_margin(kappa)),
          float(cfg.hit_margin))
    _track_batch(np.ascontiguousarray(dw, dtype=np.float64), float(dt), float(kappa), keys, kinds, hxs, sizes,
                 ip, fp, out)


def hull_hit_step(d: DrivingPath, hull: HullSpec, config: DetectorConfig = DetectorConfig()) -> int | None:
    """Step index at which the curve first meets ``hull``; ``None`` if it does not by time T."""
    key = bridge_key(d.seed or 0, d.path_index or 0)
    out = np.empty((1, 1), dtype=np.int64)
    _run(d.dw[None, :], d.dt, d.kappa, np.array([key], dtype=np.uint64), [hull], config, out)
    r = int(out[0, 0])
    return r if r >= 0 else None


def hull_hits(
    p: SleParams,
    hulls: Sequence[HullSpec],
    n_paths: int,
    config: DetectorConfig = DetectorConfig(),
    batch: int = 64,
    workers: int = 1,
) -> np.ndarray:
    """Boolean array (n_paths, n_hulls): does path ``i`` meet hull ``q`` by time ``p.T``."""
    hulls = list(hulls)

    def kernel(dw, start):
        keys = np.array([bridge_key(p.seed, start + r) for r in range(dw.shape[0])], dtype=np.uint64)
        out = np.empty((dw.shape[0], len(hulls)), dtype=np.int64)
        _run(dw, p.dt, p.kappa, keys, hulls, config, out)
        return out >= 0

    return map_paths(p, n_paths, kernel, batch=batch, workers=workers).reshape(n_paths, len(hulls))
