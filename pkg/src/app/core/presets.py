from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum

from app.core.models import ModelParams


class LoanTerm(str, Enum):
    WITHIN_ONE_YEAR = "within_one_year"
    ONE_TO_FIVE_YEARS = "one_to_five_years"
    ABOVE_FIVE_YEARS = "above_five_years"


# Benchmark loan rates in basis points, so principal * rate stays exact for round principals.
BENCHMARK_RATE_BP: dict[LoanTerm, int] = {
    LoanTerm.WITHIN_ONE_YEAR: 435,
    LoanTerm.ONE_TO_FIVE_YEARS: 475,
    LoanTerm.ABOVE_FIVE_YEARS: 490,
}

RATE_TARGETS = ("I1", "I2")


@dataclass(slots=True, frozen=True)
class RatePreset:
    loan_term_class: LoanTerm
    principal: float

    def __post_init__(self) -> None:
        if self.principal < 0:
            raise ValueError("principal must be >= 0")

    @property
    def annual_rate(self) -> float:
        return BENCHMARK_RATE_BP[self.loan_term_class] / 10_000

    @property
    def interest(self) -> float:
        return self.principal * BENCHMARK_RATE_BP[self.loan_term_class] / 10_000


def apply_rate_preset(preset: RatePreset, params: ModelParams, target: str = "I1") -> ModelParams:
    if target not in RATE_TARGETS:
        raise ValueError(f"rate presets apply to {RATE_TARGETS}, not {target!r}")
    return replace(params, **{target: preset.interest})


_BISTABLE = ModelParams(
    R1=10.0,
    R2=10.0,
    R3=10.0,
    C1=1.0,
    C2=1.2,
    C3=0.15,
    r=5.0,
    theta=0.5,
    K=4.0,
    I1=1.0,
    I2=0.5,
    S=6.0,
)

PARAMETER_PRESETS: dict[str, ModelParams] = {
    # (0,0,0) and (1,1,1) are both ESS, with a saddle in the interior.
    "bistable": _BISTABLE,
    # Financing never pays for the SME, so every path ends at (0,0,0).
    "no_financing": replace(_BISTABLE, r=1.0, C1=2.0, C3=0.3),
    "blockchain": replace(_BISTABLE, m1=0.5, m2=0.5, m3=0.1),
}


def get_parameter_preset(name: str) -> ModelParams:
    try:
        return PARAMETER_PRESETS[name]
    except KeyError:
        known = ", ".join(sorted(PARAMETER_PRESETS))
        raise KeyError(f"Unknown parameter preset {name!r}; known presets: {known}") from None
