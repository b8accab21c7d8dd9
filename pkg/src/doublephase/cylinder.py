"""Space-time cylinders ``Q = B x I``.

Spatial balls are axis-aligned boxes in the sup-metric: ``B`` is the cube of
half-width ``radius`` around ``center_x``. The parabolic cylinder of size
``h`` is ``Q_h(0) = B_h(0) x (-h**2, h**2)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Sequence

import numpy as np

_TOL = 1e-12


@dataclass(frozen=True)
class Cylinder:
    center_x: tuple[float, ...]
    radius: float
    t_lo: float
    t_hi: float

    def __init__(self, center_x: Sequence[float], radius: float, t_lo: float, t_hi: float):
        center = tuple(float(c) for c in np.atleast_1d(center_x))
        if len(center) < 1:
            raise ValueError("cylinder needs spatial dimension >= 1")
        if not radius > 0:
            raise ValueError(f"cylinder radius must be positive, got {radius}")
        if not t_lo < t_hi:
            raise ValueError(f"empty time interval ({t_lo}, {t_hi})")
        object.__setattr__(self, "center_x", center)
        object.__setattr__(self, "radius", float(radius))
        object.__setattr__(self, "t_lo", float(t_lo))
        object.__setattr__(self, "t_hi", float(t_hi))

    @classmethod
    def parabolic(cls, h: float, dim_n: int, center=None, t0: float = 0.0) -> "Cylinder":
        """``Q_h(z) = B_h(x) x (t - h^2, t + h^2)``."""
        center = np.zeros(dim_n) if center is None else center
        return cls(center, h, t0 - h * h, t0 + h * h)

    @property
    def dim_n(self) -> int:
        return len(self.center_x)

    @property
    def duration(self) -> float:
        return self.t_hi - self.t_lo

    @property
    def measure(self) -> float:
        return (2.0 * self.radius) ** self.dim_n * self.duration

    def expand(self, h: float) -> "Cylinder":
        """Minkowski sum ``Q + Q_h(0)``."""
        return Cylinder(self.center_x, self.radius + h, self.t_lo - h * h, self.t_hi + h * h)

    def corners(self) -> np.ndarray:
        """All ``2**(n+1)`` corners as rows ``(x_1, ..., x_n, t)``."""
        c = np.asarray(self.center_x)
        rows = []
        for signs in product((-1.0, 1.0), repeat=self.dim_n):
            for t in (self.t_lo, self.t_hi):
                rows.append(np.append(c + self.radius * np.asarray(signs), t))
        return np.array(rows)

    def contains_point(self, x, t, tol: float = _TOL) -> bool:
        x = np.asarray(x, dtype=float)
        inside_x = np.all(np.abs(x - np.asarray(self.center_x)) <= self.radius + tol)
        return bool(inside_x and self.t_lo - tol <= t <= self.t_hi + tol)

    def contains(self, other: "Cylinder", tol: float = _TOL) -> bool:
        """Box containment, decided by checking the corners of ``other``."""
        if other.dim_n != self.dim_n:
            return False
        return all(self.contains_point(row[:-1], row[-1], tol) for row in other.corners())

    def to_dict(self) -> dict:
        return {
            "center": list(self.center_x),
            "radius": self.radius,
            "t_lo": self.t_lo,
            "t_hi": self.t_hi,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Cylinder":
        return cls(d["center"], d["radius"], d["t_lo"], d["t_hi"])


def shrink_cylinder(Qtilde: Cylinder, h0: float) -> Cylinder:
    """Largest ``Q`` concentric with ``Qtilde`` such that ``Q + Q_h0(0)`` fits.

    The spatial half-width drops by ``h0`` and each end of the time interval
    is trimmed by ``h0**2``.
    """
    if not h0 > 0:
        raise ValueError(f"h0 must be positive, got {h0}")
    if h0 >= Qtilde.radius or 2.0 * h0 * h0 >= Qtilde.duration:
        raise ValueError(
            f"h0={h0} too large for cylinder of radius {Qtilde.radius} and "
            f"duration {Qtilde.duration}: Q + Q_h0(0) would leave an empty interior"
        )
    Q = Cylinder(Qtilde.center_x, Qtilde.radius - h0, Qtilde.t_lo + h0 * h0, Qtilde.t_hi - h0 * h0)
    assert Qtilde.contains(Q.expand(h0), tol=1e-9)
    return Q
