from __future__ import annotations

import math
from dataclasses import dataclass, asdict
from typing import Optional


@dataclass(frozen=True)
class ExponentSet:
    """Growth exponents ``2 <= p < q``, Hoelder exponent ``alpha`` of the
    coefficient, spatial dimension ``n`` and the optional time-integrability
    exponent ``s`` (``math.inf`` is accepted and stands for boundedness)."""

    n: int
    p: float
    q: float
    alpha: float
    s: Optional[float] = None

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ValueError(f"n must be an integer >= 1, got {self.n}")
        if not 2 <= self.p < self.q:
            raise ValueError(f"need 2 <= p < q, got p={self.p}, q={self.q}")
        if not math.isfinite(self.q):
            raise ValueError("q must be finite")
        if not 0 < self.alpha <= 1:
            raise ValueError(f"alpha must lie in (0, 1], got {self.alpha}")
        if self.s is not None and not self.s >= 2:
            raise ValueError(f"s must be >= 2 when given, got {self.s}")
        object.__setattr__(self, "n", int(self.n))

    def to_dict(self) -> dict:
        d = asdict(self)
        if d["s"] is not None and math.isinf(d["s"]):
            d["s"] = "inf"
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ExponentSet":
        s = d.get("s")
        if isinstance(s, str):
            s = float(s)
        return cls(n=d["n"], p=float(d["p"]), q=float(d["q"]), alpha=float(d["alpha"]), s=s)
