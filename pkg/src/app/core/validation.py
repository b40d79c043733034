from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Iterable

from app.core.errors import ParameterValidationError
from app.core.models import ModelParams

NON_NEGATIVE_FIELDS = ("C1", "C2", "C3", "m1", "m2", "m3", "K", "I1", "I2")
REDUCTION_PAIRS = (("m1", "C1"), ("m2", "C2"), ("m3", "C3"))


class ViolationKind(str, Enum):
    THETA_OUT_OF_RANGE = "ThetaOutOfRange"
    NEGATIVE_COST = "NegativeCost"
    REDUCTION_EXCEEDS_COST = "ReductionExceedsCost"
    NON_FINITE = "NonFiniteValue"


@dataclass(slots=True, frozen=True)
class ParamViolation:
    kind: ViolationKind
    field: str
    message: str


def find_param_violations(params: ModelParams) -> list[ParamViolation]:
    violations: list[ParamViolation] = []
    values = params.as_dict()

    non_finite = {name for name, value in values.items() if not math.isfinite(value)}
    for name in sorted(non_finite):
        violations.append(
            ParamViolation(ViolationKind.NON_FINITE, name, f"{name}={values[name]!r} is not a finite number")
        )

    if "theta" not in non_finite and not 0.0 <= params.theta <= 1.0:
        violations.append(
            ParamViolation(
                ViolationKind.THETA_OUT_OF_RANGE,
                "theta",
                f"theta={params.theta!r} must lie in [0, 1]",
            )
        )

    for name in NON_NEGATIVE_FIELDS:
        if name not in non_finite and values[name] < 0:
            violations.append(
                ParamViolation(ViolationKind.NEGATIVE_COST, name, f"{name}={values[name]!r} must be >= 0")
            )

    for reduction, cost in REDUCTION_PAIRS:
        if reduction in non_finite or cost in non_finite:
            continue
        if values[reduction] > values[cost]:
            violations.append(
                ParamViolation(
                    ViolationKind.REDUCTION_EXCEEDS_COST,
                    reduction,
                    f"{reduction}={values[reduction]!r} exceeds {cost}={values[cost]!r}",
                )
            )

    return violations


def validate_params(params: ModelParams) -> ModelParams:
    violations = find_param_violations(params)
    if violations:
        raise ParameterValidationError(violations)
    return params


@dataclass(slots=True)
class OutputConflicts:
    existing_files: list[str]

    @property
    def has_conflicts(self) -> bool:
        return bool(self.existing_files)


def detect_output_conflicts(output_dir: Path, expected_output_names: Iterable[str]) -> OutputConflicts:
    existing_files = [name for name in expected_output_names if (output_dir / name).exists()]
    return OutputConflicts(existing_files=existing_files)
