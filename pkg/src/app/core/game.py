from __future__ import annotations

from itertools import product

import numpy as np
import numpy.typing as npt

from app.core.models import ExpectedPayoffs, ModelParams, PayoffTriple, PureProfile, StrategyState

FloatArray = npt.NDArray[np.float64]

# x: SME accepts financing, y: core enterprise guarantees, z: financial institution cooperates
PURE_PROFILES: tuple[PureProfile, ...] = tuple(
    PureProfile(finance, guarantee, cooperate)
    for finance, guarantee, cooperate in product((True, False), repeat=3)
)


def pure_payoffs(params: ModelParams, profile: PureProfile) -> PayoffTriple:
    p = params
    u_alpha = p.R1
    u_beta = p.R2
    u_gamma = p.R3

    if profile.sme_finances:
        u_alpha += -p.C1 + p.m1
    if profile.core_guarantees:
        u_beta += -p.C2 + p.m2
    if profile.fi_cooperates:
        u_gamma += -p.C3 + p.m3

    # A completed financing round needs all three players on board.
    if profile.sme_finances and profile.core_guarantees and profile.fi_cooperates:
        u_alpha += p.r - p.theta * (p.K + p.I1)
        u_beta += p.I1 - p.I2 + p.S - (1 - p.theta) * (p.K + p.I1)
        u_gamma += p.I2

    return PayoffTriple(u_alpha=u_alpha, u_beta=u_beta, u_gamma=u_gamma)


def payoff_table(params: ModelParams) -> list[tuple[PureProfile, PayoffTriple]]:
    return [(profile, pure_payoffs(params, profile)) for profile in PURE_PROFILES]


def expected_payoffs(params: ModelParams, state: StrategyState) -> ExpectedPayoffs:
    p = params
    x, y, z = state.x, state.y, state.z

    e_x = p.R1 - p.C1 + p.m1 + y * z * (p.r - p.theta * (p.K + p.I1))
    e_not_x = p.R1
    e_y = p.R2 - p.C2 + p.m2 + x * z * (p.I1 - p.I2 + p.S - (1 - p.theta) * (p.K + p.I1))
    e_not_y = p.R2
    e_z = p.R3 - p.C3 + p.m3 + x * y * p.I2
    e_not_z = p.R3

    return ExpectedPayoffs(
        E_x=e_x,
        E_not_x=e_not_x,
        E_s=x * e_x + (1 - x) * e_not_x,
        E_y=e_y,
        E_not_y=e_not_y,
        E_c=y * e_y + (1 - y) * e_not_y,
        E_z=e_z,
        E_not_z=e_not_z,
        E_d=z * e_z + (1 - z) * e_not_z,
    )


def field_brackets(
    params: ModelParams,
    x: float | FloatArray,
    y: float | FloatArray,
    z: float | FloatArray,
) -> tuple[float | FloatArray, float | FloatArray, float | FloatArray]:
    p = params
    bracket_f = y * z * p.r - y * z * p.theta * (p.K + p.I1) - p.C1 + p.m1
    bracket_g = x * z * (p.I1 - p.I2 + p.S) - x * z * (1 - p.theta) * (p.K + p.I1) - p.C2 + p.m2
    bracket_h = x * y * p.I2 - p.C3 + p.m3
    return bracket_f, bracket_g, bracket_h


def replicator_field(params: ModelParams, state: StrategyState) -> tuple[float, float, float]:
    x, y, z = state.x, state.y, state.z
    bracket_f, bracket_g, bracket_h = field_brackets(params, x, y, z)
    return (
        x * (1 - x) * bracket_f,
        y * (1 - y) * bracket_g,
        z * (1 - z) * bracket_h,
    )


def replicator_field_from_payoffs(params: ModelParams, state: StrategyState) -> tuple[float, float, float]:
    payoffs = expected_payoffs(params, state)
    return (
        state.x * (payoffs.E_x - payoffs.E_s),
        state.y * (payoffs.E_y - payoffs.E_c),
        state.z * (payoffs.E_z - payoffs.E_d),
    )


def field_array(params: ModelParams, points: FloatArray) -> FloatArray:
    # points has shape (..., 3)
    x = points[..., 0]
    y = points[..., 1]
    z = points[..., 2]
    bracket_f, bracket_g, bracket_h = field_brackets(params, x, y, z)
    return np.stack(
        (
            x * (1 - x) * bracket_f,
            y * (1 - y) * bracket_g,
            z * (1 - z) * bracket_h,
        ),
        axis=-1,
    )


def field_norm(params: ModelParams, points: FloatArray) -> FloatArray:
    velocity = field_array(params, points)
    return np.sqrt(np.sum(velocity * velocity, axis=-1))


def state_field_norm(params: ModelParams, state: StrategyState) -> float:
    return float(field_norm(params, np.asarray(state.as_tuple(), dtype=np.float64)))
