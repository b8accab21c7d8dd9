"""Gap-bound conditions relating ``q - p`` to ``alpha``, ``n``, ``p`` and ``s``.

Comparisons are carried out in exact rational arithmetic on the (binary)
float inputs, so the verdicts and the sign of the blow-up exponent agree
exactly, boundary cases included.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, asdict
from fractions import Fraction
from typing import Optional

from .exponents import ExponentSet

REGIMES = ("general", "bounded", "s-integrable")

BRANCH_GENERAL = "p*alpha/(n+2)"
BRANCH_ALPHA = "alpha"
BRANCH_S = "s*alpha/(n+s)"


@dataclass(frozen=True)
class GapVerdict:
    regime: str
    bound: float
    margin: float
    active_branch: str
    satisfied: bool
    tie: bool = False
    crossover_s: Optional[float] = None

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=False)


def _exact(exps: ExponentSet):
    return Fraction(exps.n), Fraction(exps.p), Fraction(exps.q), Fraction(exps.alpha)


def _s_term(exps: ExponentSet) -> Fraction:
    n, _, _, a = _exact(exps)
    if math.isinf(exps.s):
        return a
    s = Fraction(exps.s)
    return s * a / (n + s)


def _verdict(regime, p, q, term, branch, tie=False, crossover=None) -> GapVerdict:
    bound = p + term
    margin = bound - q
    return GapVerdict(regime, float(bound), float(margin), branch, margin >= 0, tie, crossover)


def gap_general(exps: ExponentSet) -> GapVerdict:
    """``q <= p + p*alpha/(n+2)``."""
    n, p, q, a = _exact(exps)
    return _verdict("general", p, q, p * a / (n + 2), BRANCH_GENERAL)


def gap_bounded(exps: ExponentSet) -> GapVerdict:
    """``q <= p + max{p*alpha/(n+2), alpha}``; ties go to the ``alpha`` branch."""
    n, p, q, a = _exact(exps)
    general = p * a / (n + 2)
    if general > a:
        return _verdict("bounded", p, q, general, BRANCH_GENERAL)
    return _verdict("bounded", p, q, a, BRANCH_ALPHA, tie=general == a)


def gap_s(exps: ExponentSet) -> GapVerdict:
    """``q <= p + max{s*alpha/(n+s), p*alpha/(n+2)}``.

    ``crossover_s = p*n/(n-p+2)`` is reported when ``n + 2 > p``; from there
    on the ``s`` branch dominates.
    """
    if exps.s is None:
        raise ValueError("the s-integrable regime needs an exponent s")
    n, p, q, a = _exact(exps)
    general = p * a / (n + 2)
    s_term = _s_term(exps)
    crossover = float(p * n / (n - p + 2)) if n + 2 > p else None
    if general > s_term:
        return _verdict("s-integrable", p, q, general, BRANCH_GENERAL, crossover=crossover)
    return _verdict("s-integrable", p, q, s_term, BRANCH_S, tie=general == s_term, crossover=crossover)


def check_gap(regime: str, exps: ExponentSet) -> GapVerdict:
    if regime == "general":
        return gap_general(exps)
    if regime == "bounded":
        return gap_bounded(exps)
    if regime == "s-integrable":
        return gap_s(exps)
    raise ValueError(f"unknown regime {regime!r}; expected one of {REGIMES}")


def _blowup_exact(regime: str, exps: ExponentSet) -> Fraction:
    n, p, q, a = _exact(exps)
    general = a - (n + 2) * (q - p) / p
    if regime == "general":
        return general
    if regime == "bounded":
        return max(a - (q - p), general)
    if regime == "s-integrable":
        if exps.s is None:
            raise ValueError("the s-integrable regime needs an exponent s")
        if math.isinf(exps.s):
            s_branch = a - (q - p)
        else:
            s = Fraction(exps.s)
            s_branch = a - (n + s) * (q - p) / s
        return max(s_branch, general)
    raise ValueError(f"unknown regime {regime!r}; expected one of {REGIMES}")


def blowup_exponent(regime: str, exps: ExponentSet) -> float:
    """Exponent ``e`` of the factor ``h**e`` multiplying the shifted integrand.

    ``alpha - (n+2)(q-p)/p`` in the general regime. In the bounded and
    s-integrable regimes the gradient bound ``h**-1`` (resp.
    ``h**-(n+s)/s``) is used only where it beats the general one, so the
    exponent is the larger of the two candidates. ``e >= 0`` exactly when the
    regime's gap condition holds.
    """
    return float(_blowup_exact(regime, exps))
