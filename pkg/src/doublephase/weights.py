"""The coefficient ``a(x, t) >= 0`` and its parabolic Hoelder data.

Hoelder continuity is measured in the parabolic metric
``max{|x1 - x2|^alpha, |t1 - t2|^(alpha/2)}`` with Euclidean ``|x1 - x2|``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Union

import numpy as np
from scipy.interpolate import RegularGridInterpolator
from scipy.stats import qmc
from sklearn.base import BaseEstimator

from ._validation import check_samples
from .cylinder import Cylinder
from .grid import GridField


@dataclass(frozen=True, eq=False)
class Weight:
    form: Union[Callable, GridField]
    alpha: float
    seminorm: Optional[float] = None
    nonneg: bool = True
    label: str = "custom"
    domain: Optional[Cylinder] = None

    def __post_init__(self):
        if not 0 < self.alpha <= 1:
            raise ValueError(f"alpha must lie in (0, 1], got {self.alpha}")
        if isinstance(self.form, GridField):
            g = self.form
            if self.nonneg and np.any(g.values < 0):
                raise ValueError("weight grid has negative values")
            axes = (g.times,) + tuple(g.axis(k) for k in range(g.n))
            interp = RegularGridInterpolator(axes, g.values, method="linear", bounds_error=True)
            object.__setattr__(self, "_interp", interp)
            if self.domain is None:
                object.__setattr__(self, "domain", g.domain)

    def __call__(self, x, t) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        t = np.asarray(t, dtype=float)
        if isinstance(self.form, GridField):
            x, t = np.broadcast_arrays(x, t[..., None])
            pts = np.concatenate([t[..., :1], x], axis=-1)
            out = self._interp(pts.reshape(-1, pts.shape[-1])).reshape(pts.shape[:-1])
        else:
            out = np.asarray(self.form(x, t), dtype=float)
            out = np.broadcast_to(out, np.broadcast_shapes(x.shape[:-1], t.shape))
        if self.nonneg and np.any(out < 0):
            raise ValueError(f"weight {self.label!r} takes negative values")
        return out

    def on_grid(self, like: GridField) -> np.ndarray:
        X, T = like.points()
        return self(X, T)


def constant_weight(value: float, alpha: float = 1.0) -> Weight:
    if value < 0:
        raise ValueError("constant weight must be nonnegative")
    return Weight(lambda x, t: np.full(np.broadcast_shapes(x.shape[:-1], np.shape(t)), float(value)),
                  alpha, seminorm=0.0, label=f"constant({value})")


def ramp_power_weight(lam: float, alpha: float, offset: float = 0.0, axis: int = 0,
                      direction: str = "space") -> Weight:
    """``lam * max{x_axis - offset, 0}^alpha`` or, with ``direction='time'``,
    ``lam * max{t - offset, 0}^(alpha/2)``. In both cases ``[a]_alpha = lam``."""
    if lam < 0:
        raise ValueError("lambda must be nonnegative")
    if direction == "space":
        def form(x, t):
            return lam * np.maximum(x[..., axis] - offset, 0.0) ** alpha
    elif direction == "time":
        def form(x, t):
            return lam * np.maximum(t - offset, 0.0) ** (alpha / 2.0)
    else:
        raise ValueError(f"direction must be 'space' or 'time', got {direction!r}")
    return Weight(form, alpha, seminorm=float(lam), label=f"ramp-power({lam}, {alpha})")


def grid_weight(field: GridField, alpha: float, seminorm: Optional[float] = None) -> Weight:
    return Weight(field, alpha, seminorm=seminorm, label="grid")


def _lattice(h: float, n: int, density: int) -> tuple[np.ndarray, np.ndarray]:
    if density < 5:
        raise ValueError(f"sampling density must be at least 5 points per axis, got {density}")
    ax = np.linspace(-h, h, density)
    grids = np.meshgrid(*([ax] * n), indexing="ij")
    ys = np.stack([g.ravel() for g in grids], axis=1)
    ys = ys[np.linalg.norm(ys, axis=1) <= h * (1 + 1e-12)]
    taus = np.linspace(-h * h, h * h, density)
    return ys, taus


def shifted_weight(weight: Weight, h: float, x, t, density: int = 5) -> float:
    """``a_h(z) = inf over Q_h(z) of a``, as a minimum over a sampling lattice.

    The lattice has ``density`` points per axis across ``[-h, h]`` (clipped to
    the ball) and across ``[-h^2, h^2]`` in time; its minimum can only sit
    above the true infimum.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    n = x.shape[-1]
    if weight.domain is not None and not weight.domain.contains(Cylinder.parabolic(h, n, x, t), tol=1e-9):
        raise ValueError(f"Q_h(z) with h={h} leaves the weight's domain")
    ys, taus = _lattice(h, n, density)
    X = x + ys[:, None, :]
    T = t + taus[None, :]
    return float(np.min(weight(np.broadcast_to(X, (len(ys), len(taus), n)), np.broadcast_to(T, (len(ys), len(taus))))))


def shifted_weight_field(weight: Weight, h: float, target: GridField, source: Optional[GridField] = None,
                         stencil=None, window=None, density: int = 5) -> np.ndarray:
    """``a_h`` at every node of ``target``.

    Minimum over the sampling lattice of ``Q_h(z)`` and, when ``source`` and
    the mollification ``stencil``/``window`` are given, also over the grid
    nodes the stencil touches, so that ``a_h(z) <= a(z - sigma)`` at every
    node ``sigma`` carrying kernel weight.
    """
    X, T = target.points()
    ys, taus = _lattice(h, target.n, density)
    out = np.full(target.shape, np.inf)
    for tau in taus:
        for y in ys:
            out = np.minimum(out, weight(X + y, T + tau))
    if source is not None and stencil is not None:
        A = weight.on_grid(source)
        tw, sw = window[0], window[1:]
        rs = stencil.reach
        ext = tuple(slice(s.start - rs, s.stop + rs) for s in sw)
        tmp = np.full((tw.stop - tw.start,) + tuple(s.stop - s.start for s in ext), np.inf)
        for k in stencil.temporal_offsets:
            tmp = np.minimum(tmp, A[(slice(tw.start - k, tw.stop - k),) + ext])
        count = tuple(s.stop - s.start for s in sw)
        for off in stencil.spatial_offsets:
            sl = tuple(slice(rs - o, rs - o + c) for o, c in zip(off, count))
            out = np.minimum(out, tmp[(slice(None),) + sl])
    return out


class HolderSeminormEstimator(BaseEstimator):
    """Lower estimate of the parabolic Hoelder seminorm from samples.

    ``fit(X, y)`` takes space-time points ``X`` of shape ``(N, n+1)`` (time in
    the last column) and values ``y``; ``seminorm_`` is the largest ratio
    ``|y_i - y_j| / max{|x_i - x_j|^alpha, |t_i - t_j|^(alpha/2)}`` over all
    pairs with distinct points.
    """

    def __init__(self, alpha=1.0):
        self.alpha = alpha

    def fit(self, X, y):
        X, y = check_samples(X, y)
        if not 0 < self.alpha <= 1:
            raise ValueError(f"alpha must lie in (0, 1], got {self.alpha}")
        xs, ts = X[:, :-1], X[:, -1]
        best, pairs, arg = 0.0, 0, (0, 0)
        for i in range(len(y) - 1):
            dx = np.linalg.norm(xs[i + 1:] - xs[i], axis=1)
            dt = np.abs(ts[i + 1:] - ts[i])
            den = np.maximum(dx ** self.alpha, dt ** (self.alpha / 2.0))
            ok = den > 0
            pairs += int(ok.sum())
            if not ok.any():
                continue
            ratio = np.abs(y[i + 1:][ok] - y[i]) / den[ok]
            j = int(np.argmax(ratio))
            if ratio[j] > best:
                best = float(ratio[j])
                arg = (i, i + 1 + int(np.nonzero(ok)[0][j]))
        self.seminorm_ = best
        self.n_pairs_ = pairs
        self.argmax_pair_ = arg
        return self


def sample_points(domain: Cylinder, count: int) -> np.ndarray:
    """First ``count`` points of an unscrambled Halton sequence in ``domain``.

    Prefixes are nested: more samples always contain the fewer ones.
    """
    n = domain.dim_n
    u = qmc.Halton(d=n + 1, scramble=False).random(count)
    lo = np.append(np.asarray(domain.center_x) - domain.radius, domain.t_lo)
    hi = np.append(np.asarray(domain.center_x) + domain.radius, domain.t_hi)
    return lo + u * (hi - lo)


def holder_seminorm_estimate(weight: Weight, alpha: float, sample_count: int,
                             domain: Optional[Cylinder] = None) -> float:
    """Max pair ratio over the first ``sample_count`` Halton points; nondecreasing
    in ``sample_count``."""
    if sample_count < 2:
        raise ValueError("need at least 2 samples")
    domain = domain or weight.domain
    if domain is None:
        raise ValueError("a sampling domain is required for callable weights")
    pts = sample_points(domain, sample_count)
    vals = weight(pts[:, :-1], pts[:, -1])
    return HolderSeminormEstimator(alpha=alpha).fit(pts, vals).seminorm_
