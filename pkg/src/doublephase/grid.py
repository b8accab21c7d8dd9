"""Node-valued scalar fields on tensor space-time grids.

Values are stored with time as the leading (slowest) axis, followed by the
``n`` spatial axes: ``values.shape == (nt, nx, ..., nx)``.

File layout (``write_grid`` / ``read_grid``), ASCII, one token group per line::

    GRIDFIELD 1 <n> <nx> <nt> <radius> <t_lo> <t_hi> <c_1> ... <c_n>
    <value>
    <value>
    ...

Floats are written with ``repr`` (shortest round-trip form), so a read/write
cycle reproduces every bit. Values follow in row-major order of
``values.shape``: time slowest, last spatial axis fastest.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np

from .cylinder import Cylinder

_MAGIC = "GRIDFIELD"
_VERSION = "1"
_SNAP_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class GridField:
    domain: Cylinder
    values: np.ndarray

    def __post_init__(self):
        vals = np.array(self.values, dtype=float, copy=True)
        n = self.domain.dim_n
        if vals.ndim != n + 1:
            raise ValueError(f"values must have {n + 1} axes (time + {n} space), got {vals.ndim}")
        if len(set(vals.shape[1:])) != 1:
            raise ValueError(f"spatial axes must share one node count, got {vals.shape[1:]}")
        if vals.shape[0] < 2 or vals.shape[1] < 2:
            raise ValueError(f"need at least 2 nodes per axis, got {vals.shape}")
        if not np.all(np.isfinite(vals)):
            raise ValueError("grid field values must be finite")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    # -- construction ---------------------------------------------------

    @classmethod
    def from_function(cls, func: Callable, domain: Cylinder, nx: int, nt: int) -> "GridField":
        """Sample ``func(x, t)``; ``x`` has shape ``(..., n)``, ``t`` shape ``(...)``."""
        proto = cls(domain, np.zeros((nt,) + (nx,) * domain.dim_n))
        X, T = proto.points()
        return cls(domain, np.broadcast_to(func(X, T), proto.shape))

    def with_values(self, values) -> "GridField":
        return GridField(self.domain, values)

    # -- geometry -------------------------------------------------------

    @property
    def n(self) -> int:
        return self.domain.dim_n

    @property
    def nx(self) -> int:
        return self.values.shape[1]

    @property
    def nt(self) -> int:
        return self.values.shape[0]

    @property
    def shape(self) -> tuple[int, ...]:
        return self.values.shape

    @property
    def dx(self) -> float:
        return 2.0 * self.domain.radius / (self.nx - 1)

    @property
    def dt(self) -> float:
        return self.domain.duration / (self.nt - 1)

    @property
    def spacing(self) -> tuple[float, float]:
        return self.dx, self.dt

    def axis(self, k: int) -> np.ndarray:
        """Coordinates along spatial axis ``k``."""
        c, r = self.domain.center_x[k], self.domain.radius
        return c + np.linspace(-r, r, self.nx)

    @property
    def times(self) -> np.ndarray:
        return np.linspace(self.domain.t_lo, self.domain.t_hi, self.nt)

    def points(self) -> tuple[np.ndarray, np.ndarray]:
        """Node coordinates ``X`` (shape ``values.shape + (n,)``) and ``T``."""
        grids = np.meshgrid(self.times, *[self.axis(k) for k in range(self.n)], indexing="ij")
        return np.stack(grids[1:], axis=-1), grids[0]

    def window(self, Q: Cylinder) -> tuple[slice, ...]:
        """Index window of the nodes lying in ``Q``, trimmed to a cube.

        Returned as ``(time_slice, space_slice_1, ..., space_slice_n)``.
        """
        if Q.dim_n != self.n:
            raise ValueError("dimension mismatch between grid and cylinder")
        t = self.times
        tol_t = _SNAP_TOL * max(1.0, self.dt)
        it = np.nonzero((t >= Q.t_lo - tol_t) & (t <= Q.t_hi + tol_t))[0]
        tol_x = _SNAP_TOL * max(1.0, self.dx)
        ranges = []
        for k in range(self.n):
            a = self.axis(k)
            c = Q.center_x[k]
            ranges.append(np.nonzero(np.abs(a - c) <= Q.radius + tol_x)[0])
        count = min(len(r) for r in ranges)
        if len(it) < 2 or count < 2:
            raise ValueError(f"cylinder {Q} holds too few grid nodes")
        spatial = []
        for r in ranges:
            extra = len(r) - count
            lo = r[0] + extra // 2
            spatial.append(slice(lo, lo + count))
        return (slice(it[0], it[-1] + 1),) + tuple(spatial)

    def snapped(self, Q: Cylinder) -> Cylinder:
        """Node-aligned cylinder spanned by ``window(Q)``."""
        win = self.window(Q)
        t = self.times
        lo = [self.axis(k)[s.start] for k, s in enumerate(win[1:])]
        hi = [self.axis(k)[s.stop - 1] for k, s in enumerate(win[1:])]
        center = 0.5 * (np.asarray(lo) + np.asarray(hi))
        radius = 0.5 * (hi[0] - lo[0])
        return Cylinder(center, radius, t[win[0].start], t[win[0].stop - 1])

    def restrict(self, Q: Cylinder) -> "GridField":
        """Sub-field on the grid nodes inside ``Q``."""
        return GridField(self.snapped(Q), self.values[self.window(Q)])


def gradient(w: GridField) -> tuple[GridField, ...]:
    """Spatial gradient by finite differences, one field per component.

    Central differences at interior nodes, one-sided second-order stencils
    on the spatial boundary. No differencing in time. Boundary stencils are
    written in difference form so constants differentiate to exactly zero.
    """
    if w.nx < 3:
        raise ValueError(f"gradient needs nx >= 3, got {w.nx}")
    return tuple(GridField(w.domain, _diff(w.values, w.dx, k + 1)) for k in range(w.n))


def _diff(v: np.ndarray, dx: float, axis: int) -> np.ndarray:
    v = np.moveaxis(v, axis, 0)
    d = np.empty_like(v, dtype=float)
    d[1:-1] = (v[2:] - v[:-2]) / (2.0 * dx)
    d[0] = (4.0 * (v[1] - v[0]) - (v[2] - v[0])) / (2.0 * dx)
    d[-1] = ((v[-3] - v[-1]) - 4.0 * (v[-2] - v[-1])) / (2.0 * dx)
    return np.moveaxis(d, 0, axis)


def gradient_norm(w: GridField) -> GridField:
    comps = gradient(w)
    return w.with_values(np.sqrt(sum(c.values ** 2 for c in comps)))


def _trapz_space(values: np.ndarray, dx: float, n: int) -> np.ndarray:
    out = values
    for _ in range(n):
        out = np.trapezoid(out, dx=dx, axis=-1)
    return out


def space_integrals(values: np.ndarray, like: GridField) -> np.ndarray:
    """Spatial trapezoid integral of every time slice of ``values``."""
    return _trapz_space(np.asarray(values, dtype=float), like.dx, like.n)


def integrate_space(f: GridField, t_index: int) -> float:
    return float(_trapz_space(f.values[t_index], f.dx, f.n))


def integrate_spacetime(f: GridField) -> float:
    """Trapezoid in time over the spatial trapezoid integrals."""
    return float(np.trapezoid(space_integrals(f.values, f), dx=f.dt))


def write_grid(path, f: GridField) -> None:
    d = f.domain
    header = [_MAGIC, _VERSION, str(f.n), str(f.nx), str(f.nt), repr(d.radius), repr(d.t_lo), repr(d.t_hi)]
    header += [repr(c) for c in d.center_x]
    lines = [" ".join(header)]
    lines += [repr(float(v)) for v in f.values.ravel(order="C")]
    Path(path).write_text("\n".join(lines) + "\n")


def read_grid(path) -> GridField:
    text = Path(path).read_text().split("\n")
    head = text[0].split()
    if len(head) < 8 or head[0] != _MAGIC or head[1] != _VERSION:
        raise ValueError(f"{path}: not a GRIDFIELD v{_VERSION} file")
    n, nx, nt = (int(v) for v in head[2:5])
    radius, t_lo, t_hi = (float(v) for v in head[5:8])
    center = [float(v) for v in head[8:]]
    if len(center) != n:
        raise ValueError(f"{path}: header declares n={n} but gives {len(center)} center coordinates")
    vals = np.array([float(v) for v in text[1:] if v.strip()])
    expected = nt * nx ** n
    if vals.size != expected:
        raise ValueError(f"{path}: expected {expected} values, found {vals.size}")
    return GridField(Cylinder(center, radius, t_lo, t_hi), vals.reshape((nt,) + (nx,) * n))
