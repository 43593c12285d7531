"""Result records shared by the LP and SOS hierarchies."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, Optional

NEG_INF = float("-inf")


@dataclass
class HierarchyResult:
    """Outcome of one hierarchy level.

    ``bound`` is ``-inf`` when the level admits no certificate (or the rank
    is below the objective degree) and ``nan`` after a solver failure.
    """

    rank: int
    bound: float
    direction: str = "lower"
    status: str = "optimal"
    hierarchy: str = ""
    certificate: Any = None
    wall_time: float = 0.0
    exact_bound: Optional[Fraction] = None
    details: Dict[str, Any] = field(default_factory=dict)

    @property
    def is_finite(self) -> bool:
        return math.isfinite(self.bound)

    def to_record(self) -> Dict[str, Any]:
        rec = {
            "hierarchy": self.hierarchy,
            "rank": self.rank,
            "direction": self.direction,
            "status": self.status,
            "bound": self.bound if math.isfinite(self.bound) else str(self.bound),
            "wall_time": round(self.wall_time, 6),
        }
        if self.exact_bound is not None:
            rec["exact_bound"] = str(self.exact_bound)
        for k, v in self.details.items():
            if isinstance(v, (str, int, float, bool)) or v is None:
                rec[k] = v
        return rec
