"""Double phase integrand, energies and Bochner-type norms on grids."""

from __future__ import annotations

import json
from dataclasses import dataclass, asdict
from typing import Optional

import numpy as np

from .cylinder import Cylinder
from .exponents import ExponentSet
from .grid import GridField, gradient, space_integrals
from .weights import Weight


def H_values(a, xi_norm, exps: ExponentSet):
    """``|xi|^p + a |xi|^q`` elementwise."""
    xi = np.asarray(xi_norm, dtype=float)
    return xi ** exps.p + np.asarray(a) * xi ** exps.q


def integrand_H(weight: Weight, exps: ExponentSet, x, t, xi_norm) -> float:
    if np.any(np.asarray(xi_norm) < 0):
        raise ValueError("xi_norm must be nonnegative")
    a = weight(np.atleast_1d(np.asarray(x, dtype=float)), t)
    out = H_values(a, xi_norm, exps)
    return out if np.ndim(out) else float(out)


@dataclass(frozen=True)
class EnergyBreakdown:
    p_part: float
    q_part: float
    l2_sup: float
    total_P: float
    total_F: float

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def _spacetime(values: np.ndarray, like: GridField) -> float:
    return float(np.trapezoid(space_integrals(values, like), dx=like.dt))


def _on(w: GridField, Q: Optional[Cylinder]):
    """Window of ``Q`` in ``w``'s grid (whole grid for ``None``) and its geometry."""
    if Q is None:
        return (slice(None),) * w.values.ndim, w
    win = w.window(Q)
    return win, GridField(w.snapped(Q), w.values[win])


def _grad_norm_values(w: GridField) -> np.ndarray:
    return np.sqrt(sum(c.values ** 2 for c in gradient(w)))


def _breakdown(w: GridField, weight: Weight, exps: ExponentSet, Q: Optional[Cylinder]) -> EnergyBreakdown:
    if not isinstance(exps, ExponentSet):
        raise TypeError("exps must be an ExponentSet")
    win, sub = _on(w, Q)
    g = _grad_norm_values(w)[win]
    a = weight.on_grid(sub)
    p_part = _spacetime(g ** exps.p, sub)
    q_part = _spacetime(a * g ** exps.q, sub)
    l2_sup = float(np.max(space_integrals(sub.values ** 2, sub)))
    total_P = p_part + q_part
    return EnergyBreakdown(p_part, q_part, l2_sup, total_P, l2_sup + total_P)


def energy_P(w: GridField, weight: Weight, exps: ExponentSet, Q: Optional[Cylinder] = None) -> EnergyBreakdown:
    """``P(w, Q) = iint_Q |Dw|^p + a |Dw|^q``.

    Gradients are taken on ``w``'s own grid and then restricted to the nodes
    of ``Q``. The full breakdown, including the ``L^2`` term, is returned.
    """
    return _breakdown(w, weight, exps, Q)


def energy_F(w: GridField, weight: Weight, exps: ExponentSet, Q: Optional[Cylinder] = None) -> EnergyBreakdown:
    """``F(w, Q) = max_t int_B |w|^2 + P(w, Q)``, the max taken over the grid's
    time slices (end slices included)."""
    return _breakdown(w, weight, exps, Q)


def norm_Lp(w: GridField, p: float, Q: Optional[Cylinder] = None) -> float:
    if p < 1:
        raise ValueError("p must be >= 1")
    _, sub = _on(w, Q)
    return _spacetime(np.abs(sub.values) ** p, sub) ** (1.0 / p)


def norm_Lp_W1p(w: GridField, p: float, Q: Optional[Cylinder] = None) -> float:
    """``(int_I int_B |w|^p + |Dw|^p dx dt)^(1/p)``."""
    if p < 1:
        raise ValueError("p must be >= 1")
    win, sub = _on(w, Q)
    g = _grad_norm_values(w)[win]
    return _spacetime(np.abs(sub.values) ** p + g ** p, sub) ** (1.0 / p)


def slice_L2_norms(w: GridField, Q: Optional[Cylinder] = None) -> np.ndarray:
    _, sub = _on(w, Q)
    return np.sqrt(space_integrals(sub.values ** 2, sub))


def norm_C_L2(w: GridField, Q: Optional[Cylinder] = None) -> float:
    """``max_t ||w(., t)||_{L^2(B)}`` over grid time slices."""
    return float(np.max(slice_L2_norms(w, Q)))
