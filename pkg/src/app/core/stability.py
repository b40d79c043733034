from __future__ import annotations

import logging
import math
from dataclasses import replace

import numpy as np

from app.core.errors import ComparisonDegenerateError
from app.core.game import FloatArray, field_brackets, state_field_norm
from app.core.models import (
    ConditionRecord,
    EquilibriumKind,
    Equilibrium,
    EquilibriumReport,
    EssConditionReport,
    ModelComparison,
    ModelParams,
    StabilityClass,
    StabilityType,
    StrategyState,
)

logger = logging.getLogger(__name__)

CERTIFICATION_TOL = 1e-9
HYPERBOLICITY_TOL = 1e-9

# E1 ... E8 in the conventional order.
VERTICES: tuple[tuple[float, float, float], ...] = (
    (0.0, 0.0, 0.0),
    (1.0, 0.0, 0.0),
    (0.0, 1.0, 0.0),
    (0.0, 0.0, 1.0),
    (0.0, 1.0, 1.0),
    (1.0, 0.0, 1.0),
    (1.0, 1.0, 0.0),
    (1.0, 1.0, 1.0),
)
FULL_COOPERATION_INDEX = 8


def _safe_ratio(numerator: float, denominator: float) -> float | None:
    if denominator == 0:
        return None
    ratio = numerator / denominator
    return ratio if math.isfinite(ratio) else None


def vertex_equilibria() -> list[Equilibrium]:
    return [
        Equilibrium(point=StrategyState(*vertex), kind=EquilibriumKind.VERTEX, index=index)
        for index, vertex in enumerate(VERTICES, start=1)
    ]


def _certified(params: ModelParams, candidate: tuple[float, float, float]) -> StrategyState | None:
    if not all(0.0 < value < 1.0 or value == 1.0 for value in candidate):
        return None
    state = StrategyState(*candidate)
    norm = state_field_norm(params, state)
    if norm >= CERTIFICATION_TOL:
        logger.debug("rejected candidate %s with field norm %.3e", candidate, norm)
        return None
    return state


def interior_equilibrium(params: ModelParams) -> Equilibrium | None:
    """Simultaneous root of the three brackets: yz = a, xz = b, xy = c."""
    c1, c2, c3 = params.net_costs
    a = _safe_ratio(c1, params.sme_net_gain)
    b = _safe_ratio(c2, params.core_net_gain)
    c = _safe_ratio(c3, params.I2)
    if a is None or b is None or c is None or min(a, b, c) <= 0:
        return None

    candidate = (math.sqrt(b * c / a), math.sqrt(a * c / b), math.sqrt(a * b / c))
    if not all(0.0 < value < 1.0 for value in candidate):
        return None

    state = _certified(params, candidate)
    if state is None:
        return None
    return Equilibrium(point=state, kind=EquilibriumKind.INTERIOR)


def face_equilibria(params: ModelParams) -> list[Equilibrium]:
    c1, c2, c3 = params.net_costs
    a = _safe_ratio(c1, params.sme_net_gain)
    b = _safe_ratio(c2, params.core_net_gain)
    c = _safe_ratio(c3, params.I2)

    candidates: list[tuple[float, float, float]] = []
    if c is not None and b is not None:
        candidates.append((1.0, c, b))
    if c is not None and a is not None:
        candidates.append((c, 1.0, a))
    if b is not None and a is not None:
        candidates.append((b, a, 1.0))

    found: list[Equilibrium] = []
    for candidate in candidates:
        free = [value for value in candidate if value != 1.0]
        if len(free) != 2 or not all(0.0 < value < 1.0 for value in free):
            continue
        state = _certified(params, candidate)
        if state is not None:
            found.append(Equilibrium(point=state, kind=EquilibriumKind.FACE_OR_EDGE))
    return found


def enumerate_equilibria(params: ModelParams, include_faces: bool = False) -> list[Equilibrium]:
    equilibria = vertex_equilibria()
    interior = interior_equilibrium(params)
    if interior is not None:
        equilibria.append(interior)
    if include_faces:
        equilibria.extend(face_equilibria(params))
    return equilibria


def jacobian(params: ModelParams, state: StrategyState) -> FloatArray:
    p = params
    x, y, z = state.x, state.y, state.z
    bracket_f, bracket_g, bracket_h = field_brackets(p, x, y, z)
    gain_f = p.r - p.theta * (p.K + p.I1)
    gain_g = (p.I1 - p.I2 + p.S) - (1 - p.theta) * (p.K + p.I1)
    spread_x = x * (1 - x)
    spread_y = y * (1 - y)
    spread_z = z * (1 - z)

    return np.array(
        [
            [(1 - 2 * x) * bracket_f, spread_x * z * gain_f, spread_x * y * gain_f],
            [spread_y * z * gain_g, (1 - 2 * y) * bracket_g, spread_y * x * gain_g],
            [spread_z * y * p.I2, spread_z * x * p.I2, (1 - 2 * z) * bracket_h],
        ],
        dtype=np.float64,
    )


def eigenvalues(matrix: FloatArray) -> tuple[complex, complex, complex]:
    matrix = np.asarray(matrix, dtype=np.float64)
    diagonal = np.diagonal(matrix)
    if not np.any(matrix - np.diag(diagonal)):
        return tuple(complex(value) for value in diagonal)  # type: ignore[return-value]
    return tuple(complex(value) for value in np.linalg.eigvals(matrix))  # type: ignore[return-value]


def classify_eigenvalues(values: tuple[complex, complex, complex], tol: float = HYPERBOLICITY_TOL) -> StabilityClass:
    real_parts = [value.real for value in values]
    if any(abs(part) <= tol for part in real_parts):
        kind = StabilityType.NON_HYPERBOLIC
    elif all(part < 0 for part in real_parts):
        kind = StabilityType.ESS
    elif all(part > 0 for part in real_parts):
        kind = StabilityType.UNSTABLE
    else:
        kind = StabilityType.SADDLE
    return StabilityClass(kind=kind, eigenvalues=values, tol=tol)


def classify(params: ModelParams, equilibrium: Equilibrium, tol: float = HYPERBOLICITY_TOL) -> StabilityClass:
    return classify_eigenvalues(eigenvalues(jacobian(params, equilibrium.point)), tol)


def analyze_equilibria(
    params: ModelParams,
    tol: float = HYPERBOLICITY_TOL,
    include_faces: bool = False,
) -> list[EquilibriumReport]:
    return [
        EquilibriumReport(
            equilibrium=equilibrium,
            stability=classify(params, equilibrium, tol),
            field_norm=state_field_norm(params, equilibrium.point),
        )
        for equilibrium in enumerate_equilibria(params, include_faces=include_faces)
    ]


def full_cooperation() -> Equilibrium:
    return vertex_equilibria()[FULL_COOPERATION_INDEX - 1]


def ess_conditions(params: ModelParams) -> EssConditionReport:
    p = params
    burden = p.theta * (p.K + p.I1)
    baseline = p.is_baseline
    conditions = (
        ConditionRecord(
            label="A1",
            expression="r > C1 + θ(I1 + K)" if baseline else "r + m1 > C1 + θ(I1 + K)",
            lhs=p.r + p.m1,
            rhs=p.C1 + burden,
            published_form="r > 1 + θ(I1 + K)",
            note="published form has the constant 1 where the E8 eigenvalue gives C1",
        ),
        ConditionRecord(
            label="A2",
            expression="S + θ(I1 + K) > I2 + K + C2" if baseline else "S + θ(I1 + K) + m2 > I2 + K + C2",
            lhs=p.S + burden + p.m2,
            rhs=p.I2 + p.K + p.C2,
            published_form="S + θ(I1 + K) > I2 + K + C2",
        ),
        ConditionRecord(
            label="A3",
            expression="I2 > C3" if baseline else "I2 + m3 > C3",
            lhs=p.I2 + p.m3,
            rhs=p.C3,
            published_form="I2 > C3",
        ),
    )
    return EssConditionReport(conditions=conditions, model_tag="baseline" if baseline else "blockchain")


def baseline_of(params: ModelParams) -> ModelParams:
    return replace(params, m1=0.0, m2=0.0, m3=0.0)


def compare_models(params: ModelParams, tol: float = HYPERBOLICITY_TOL) -> ModelComparison:
    if params.is_baseline:
        raise ComparisonDegenerateError(
            "m1 = m2 = m3 = 0: the blockchain model equals the baseline, nothing to compare"
        )

    baseline_params = baseline_of(params)
    baseline = ess_conditions(baseline_params)
    blockchain = ess_conditions(params)

    reductions = (params.m1, params.m2, params.m3)
    pareto_flag = all(
        after >= before and (reduction == 0 or after > before)
        for before, after, reduction in zip(baseline.margins, blockchain.margins, reductions)
    )

    e8 = full_cooperation()
    return ModelComparison(
        baseline=baseline,
        blockchain=blockchain,
        baseline_e8=classify(baseline_params, e8, tol),
        blockchain_e8=classify(params, e8, tol),
        pareto_flag=pareto_flag,
    )
