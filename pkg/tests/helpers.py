from __future__ import annotations

import numpy as np

from app.core.models import ModelParams, StrategyState


def random_params(rng: np.random.Generator, **overrides: float) -> ModelParams:
    costs = rng.uniform(0.0, 5.0, size=3)
    reductions = costs * rng.uniform(0.0, 1.0, size=3)
    values = {
        "R1": rng.uniform(0.0, 20.0),
        "R2": rng.uniform(0.0, 20.0),
        "R3": rng.uniform(0.0, 20.0),
        "C1": costs[0],
        "C2": costs[1],
        "C3": costs[2],
        "r": rng.uniform(0.0, 10.0),
        "theta": rng.uniform(0.0, 1.0),
        "K": rng.uniform(0.0, 5.0),
        "I1": rng.uniform(0.0, 3.0),
        "I2": rng.uniform(0.0, 3.0),
        "S": rng.uniform(0.0, 8.0),
        "m1": reductions[0],
        "m2": reductions[1],
        "m3": reductions[2],
    }
    values.update(overrides)
    return ModelParams(**{key: float(value) for key, value in values.items()})


def random_state(rng: np.random.Generator) -> StrategyState:
    return StrategyState(*(float(value) for value in rng.uniform(0.0, 1.0, size=3)))


def params_payload(params: ModelParams, **overrides: float) -> dict[str, float]:
    payload = params.as_dict()
    payload.update(overrides)
    return payload
