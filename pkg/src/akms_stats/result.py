from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal

Fallback = Literal["none", "residue_to_integral", "series_to_integral"]


@dataclass(frozen=True)
class EvalResult:
    """A computed value with an absolute error estimate and diagnostics."""

    value: float
    abs_err_est: float = 0.0
    terms_used: int = 0
    fallback: Fallback = "none"
    info: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        if math.isfinite(self.value) and not (
            math.isfinite(self.abs_err_est) and self.abs_err_est >= 0.0
        ):
            raise ValueError(f"bad error estimate {self.abs_err_est!r}")

    def __float__(self) -> float:
        return float(self.value)
