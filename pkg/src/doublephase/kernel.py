"""Parabolic bump kernel and space-time mollification on grids.

The kernel is ``kappa(x, t) = k_n(|x|) * k_1(t)`` with the bump profiles
``k_m(s) = c_m exp(1/(s^2 - 1))`` on ``|s| < 1`` (zero elsewhere) and ``c_m``
chosen so that ``k_m(|x|)`` has unit mass on ``R^m``. It is scaled
parabolically, ``kappa_h(x, t) = h^(-n-2) kappa(x/h, t/h^2)``, so that its
support is the cylinder ``B_h(0) x (-h^2, h^2)``.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from functools import lru_cache
from math import gamma, pi

import numpy as np
from scipy import integrate
from sklearn.base import BaseEstimator, TransformerMixin

from .cylinder import Cylinder
from .grid import GridField, gradient

_QUAD_TOL = 1e-10


def _bump(s):
    s = np.asarray(s, dtype=float)
    out = np.zeros_like(s)
    inside = np.abs(s) < 1.0
    out[inside] = np.exp(1.0 / (s[inside] ** 2 - 1.0))
    return out


def _sphere_area(m: int) -> float:
    return 2.0 * pi ** (m / 2.0) / gamma(m / 2.0)


@lru_cache(maxsize=None)
def normalization_constant(m: int, tol: float = _QUAD_TOL) -> float:
    """``c_m`` such that ``int_{R^m} k_m(|x|) dx = 1`` (adaptive quadrature)."""
    if m < 1:
        raise ValueError(f"dimension must be >= 1, got {m}")
    radial, _ = integrate.quad(
        lambda r: r ** (m - 1) * np.exp(1.0 / (r * r - 1.0)) if r < 1.0 else 0.0,
        0.0, 1.0, epsabs=tol * 1e-3, epsrel=tol, limit=200,
    )
    return 1.0 / (_sphere_area(m) * radial)


def profile_eval(m: int, s):
    """``k_m(s)``; vectorized over ``s``."""
    out = normalization_constant(m) * _bump(s)
    return out if np.ndim(s) else float(out)


@dataclass(frozen=True)
class MollifierKernel:
    dim_n: int
    quad_tol: float = _QUAD_TOL
    c_n: float = field(init=False)
    c_1: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "c_n", normalization_constant(self.dim_n, self.quad_tol))
        object.__setattr__(self, "c_1", normalization_constant(1, self.quad_tol))

    def profile(self, m: int, s):
        return profile_eval(m, s)

    def __call__(self, h: float, x, t):
        return kernel_eval(h, x, t, n=self.dim_n)

    def peak(self, h: float) -> float:
        """``max kappa_h = kappa_h(0, 0) = h^(-n-2) c_n c_1 e^-2``."""
        return h ** (-self.dim_n - 2) * self.c_n * self.c_1 * np.exp(-2.0)


def kernel_eval(h: float, x, t, n: int | None = None):
    """``kappa_h(x, t)``; ``x`` has shape ``(..., n)`` (or is a scalar when n=1)."""
    if not h > 0:
        raise ValueError(f"h must be positive, got {h}")
    x = np.asarray(x, dtype=float)
    if n is None:
        n = x.shape[-1] if x.ndim else 1
    if n == 1 and (x.ndim == 0 or x.shape[-1] != 1):
        r = np.abs(x)
    else:
        r = np.linalg.norm(x, axis=-1)
    val = h ** (-n - 2) * profile_eval(n, r / h) * profile_eval(1, np.asarray(t, dtype=float) / h ** 2)
    return val if np.ndim(val) else float(val)


def kernel_mass(h: float, n: int, points: int = 121) -> float:
    """Tensor trapezoid integral of ``kappa_h`` over ``[-h, h]^n x [-h^2, h^2]``."""
    xs = np.linspace(-h, h, points)
    ts = np.linspace(-h * h, h * h, points)
    # spatial factor is radial: integrate k_n(|x|/h) on the n-cube, then the time factor
    grids = np.meshgrid(*([xs] * n), indexing="ij")
    r = np.sqrt(sum(g ** 2 for g in grids))
    space = profile_eval(n, r / h)
    for _ in range(n):
        space = np.trapezoid(space, xs, axis=0)
    time = np.trapezoid(profile_eval(1, ts / h ** 2), ts)
    return float(h ** (-n - 2) * space * time)


def dump_profile(path, m: int, num: int = 201) -> None:
    """Write ``(s, k_m(s))`` samples on ``[-1.25, 1.25]`` as CSV."""
    s = np.linspace(-1.25, 1.25, num)
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["s", f"kappa_{m}"])
        for si, vi in zip(s, profile_eval(m, s)):
            wr.writerow([repr(float(si)), repr(float(vi))])


@dataclass(frozen=True)
class Stencil:
    """Discrete kernel on the grid lattice, spatial and temporal factors
    each renormalized to unit mass."""

    h: float
    spatial_offsets: np.ndarray  # (K, n) integer node offsets
    spatial_weights: np.ndarray  # (K,)
    temporal_offsets: np.ndarray  # (L,)
    temporal_weights: np.ndarray  # (L,)
    time_resolved: bool
    profile: str = "radial"

    @property
    def reach(self) -> int:
        return int(np.abs(self.spatial_offsets).max())

    @property
    def time_reach(self) -> int:
        return int(np.abs(self.temporal_offsets).max())


def build_stencil(h: float, dx: float, dt: float, n: int, *, spatial_profile: str = "radial",
                  strict_time: bool = True) -> Stencil:
    if not h > 0:
        raise ValueError(f"h must be positive, got {h}")
    if h < 2.0 * dx * (1 - 1e-9):
        raise ValueError(f"h={h} is under-resolved by the grid: need h >= 2*dx = {2 * dx}")
    time_resolved = h * h >= 2.0 * dt * (1 - 1e-9)
    if strict_time and not time_resolved:
        raise ValueError(f"h={h} is under-resolved in time: need h^2 >= 2*dt = {2 * dt}")

    rs = int(np.ceil(h / dx))
    axis = np.arange(-rs, rs + 1)
    if spatial_profile == "radial":
        grids = np.meshgrid(*([axis] * n), indexing="ij")
        offsets = np.stack([g.ravel() for g in grids], axis=1)
        weights = profile_eval(n, np.linalg.norm(offsets * dx, axis=1) / h)
    elif spatial_profile == "box":
        w1 = profile_eval(1, axis * dx / h)
        grids = np.meshgrid(*([axis] * n), indexing="ij")
        offsets = np.stack([g.ravel() for g in grids], axis=1)
        weights = np.prod(w1[offsets + rs], axis=1)
    else:
        raise ValueError(f"unknown spatial profile {spatial_profile!r}")
    keep = weights > 0
    offsets, weights = offsets[keep], weights[keep]

    kt = int(np.ceil(h * h / dt))
    toff = np.arange(-kt, kt + 1)
    tw = profile_eval(1, toff * dt / (h * h))
    keep_t = tw > 0
    toff, tw = toff[keep_t], tw[keep_t]

    return Stencil(h, offsets, weights / weights.sum(), toff, tw / tw.sum(), bool(time_resolved),
                   spatial_profile)


def _default_target(f: GridField, h: float) -> Cylinder:
    d = f.domain
    return Cylinder(d.center_x, d.radius - h, d.t_lo + h * h, d.t_hi - h * h)


def _check_containment(f: GridField, target: Cylinder, stencil: Stencil, win) -> None:
    h = stencil.h
    if not f.domain.contains(target.expand(h), tol=1e-9):
        raise ValueError(
            f"containment violated: Q + Q_h(0) with h={h} leaves the data cylinder {f.domain}"
        )
    rs, kt = stencil.reach, stencil.time_reach
    if win[0].start - kt < 0 or win[0].stop - 1 + kt > f.nt - 1:
        raise ValueError(f"containment violated in time for h={h}")
    for s in win[1:]:
        if s.start - rs < 0 or s.stop - 1 + rs > f.nx - 1:
            raise ValueError(f"containment violated in space for h={h}")


def apply_stencil(values: np.ndarray, stencil: Stencil, win) -> np.ndarray:
    """``sum_sigma w(sigma) f(z - sigma)`` at every node of the window ``win``.

    The temporal factor is applied first, then the spatial one; the kernel is
    a product of the two so this equals the full space-time sum. Increments
    ``f(z - sigma) - f(z)`` are accumulated onto ``f(z)``, so constants come
    out bitwise unchanged. Offsets are visited in a fixed order, which makes
    the result bit-reproducible.
    """
    tw = win[0]
    sw = win[1:]
    rs = stencil.reach
    ext = tuple(slice(s.start - rs, s.stop + rs) for s in sw)
    centre = values[(tw,) + ext]
    tmp = centre.astype(float, copy=True)
    for k, wk in zip(stencil.temporal_offsets, stencil.temporal_weights):
        if k:
            tmp += wk * (values[(slice(tw.start - k, tw.stop - k),) + ext] - centre)

    count = tuple(s.stop - s.start for s in sw)
    if stencil.profile == "box":
        return _apply_box(tmp, stencil, count)
    mid = tmp[(slice(None),) + tuple(slice(rs, rs + c) for c in count)]
    out = mid.copy()
    for off, ws in zip(stencil.spatial_offsets, stencil.spatial_weights):
        if np.any(off):
            sl = tuple(slice(rs - o, rs - o + c) for o, c in zip(off, count))
            out += ws * (tmp[(slice(None),) + sl] - mid)
    return out


def _apply_box(tmp: np.ndarray, stencil: Stencil, count) -> np.ndarray:
    rs = stencil.reach
    n = len(count)
    # the product weights factor per axis; recover the 1-D factor from axis 0
    offs = stencil.spatial_offsets
    on_axis = np.all(offs[:, 1:] == 0, axis=1) if n > 1 else np.ones(len(offs), bool)
    k1, w1 = offs[on_axis, 0], stencil.spatial_weights[on_axis]
    w1 = w1 / w1.sum()
    out = tmp
    for ax in range(n):
        sl = [slice(None)] * out.ndim
        sl[ax + 1] = slice(rs, rs + count[ax])
        mid = out[tuple(sl)]
        acc = mid.copy()
        for k, wk in zip(k1, w1):
            if k:
                sl[ax + 1] = slice(rs - k, rs - k + count[ax])
                acc += wk * (out[tuple(sl)] - mid)
        out = acc
    return out


class ParabolicMollifier(TransformerMixin, BaseEstimator):
    """Convolution with the parabolic kernel ``kappa_h``, evaluated at the grid
    nodes of a target cylinder.

    ``fit`` learns the discrete stencil and the target window from the grid
    geometry of a field; ``transform`` applies it to any field on that grid.
    With ``target=None`` the target is the data cylinder shrunk by ``h``
    (radius ``- h``, each time end ``-/+ h^2``).
    """

    def __init__(self, h=0.1, target=None, spatial_profile="radial", strict_time=True):
        self.h = h
        self.target = target
        self.spatial_profile = spatial_profile
        self.strict_time = strict_time

    def fit(self, X: GridField, y=None):
        from ._validation import check_grid_field

        X = check_grid_field(X)
        target = self.target if self.target is not None else _default_target(X, self.h)
        self.stencil_ = build_stencil(self.h, X.dx, X.dt, X.n, spatial_profile=self.spatial_profile,
                                      strict_time=self.strict_time)
        self.window_ = X.window(target)
        self.target_ = X.snapped(target)
        self.grid_shape_ = X.shape
        self.grid_domain_ = X.domain
        _check_containment(X, self.target_, self.stencil_, self.window_)
        return self

    def transform(self, X: GridField) -> GridField:
        from ._validation import check_grid_field, check_is_fitted_mollifier

        check_is_fitted_mollifier(self)
        X = check_grid_field(X)
        if X.shape != self.grid_shape_ or X.domain != self.grid_domain_:
            raise ValueError("field lives on a different grid than the one this mollifier was fitted on")
        return GridField(self.target_, apply_stencil(X.values, self.stencil_, self.window_))

    def transform_array(self, values: np.ndarray) -> np.ndarray:
        """Apply to a raw node array shaped like the fitted grid."""
        return apply_stencil(values, self.stencil_, self.window_)


def mollify(f: GridField, h: float, Q: Cylinder | None = None, **kwargs) -> GridField:
    """``[f]^h`` on the grid nodes of ``Q``."""
    return ParabolicMollifier(h=h, target=Q, **kwargs).fit_transform(f)


def mollify_gradient_commute_check(w: GridField, h: float, Q: Cylinder | None = None, **kwargs) -> float:
    """Max over interior nodes of ``Q`` of ``|D([w]^h) - [Dw]^h|``."""
    mol = ParabolicMollifier(h=h, target=Q, **kwargs).fit(w)
    d_of_mollified = gradient(mol.transform(w))
    mollified_grad = [mol.transform(c) for c in gradient(w)]
    diff = np.sqrt(sum((a.values - b.values) ** 2 for a, b in zip(d_of_mollified, mollified_grad)))
    interior = (slice(None),) + (slice(1, -1),) * w.n
    return float(diff[interior].max())
