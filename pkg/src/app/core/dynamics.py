from __future__ import annotations

import hashlib
import json
import logging
import math
from typing import Callable

import numpy as np
import numpy.typing as npt

from app.core.errors import NonFiniteStateError
from app.core.game import FloatArray, field_array, field_norm
from app.core.models import (
    AttractorKey,
    BasinReport,
    BasinSample,
    ConvergedTo,
    IntegratorConfig,
    MaxTimeReached,
    ModelParams,
    StrategyState,
    Terminal,
    Trajectory,
)

logger = logging.getLogger(__name__)

ProgressCallback = Callable[[int, int], None]
BoolArray = npt.NDArray[np.bool_]

ATTRACTOR_DECIMALS = 6


def params_digest(params: ModelParams) -> str:
    payload = json.dumps(params.as_dict(), sort_keys=True)
    return hashlib.sha1(payload.encode("utf-8")).hexdigest()[:12]


def _rk4_raw(params: ModelParams, points: FloatArray, h: float) -> FloatArray:
    k1 = field_array(params, points)
    k2 = field_array(params, points + 0.5 * h * k1)
    k3 = field_array(params, points + 0.5 * h * k2)
    k4 = field_array(params, points + h * k3)
    return points + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _excursion(raw: FloatArray) -> float:
    return float(max(np.max(-raw, initial=0.0), np.max(raw - 1.0, initial=0.0)))


def _to_state(point: FloatArray) -> StrategyState:
    return StrategyState(float(point[0]), float(point[1]), float(point[2]))


def _total_steps(config: IntegratorConfig) -> int:
    return max(1, math.ceil(config.t_max / config.step_size - 1e-9))


def step(params: ModelParams, state: StrategyState, h: float) -> StrategyState:
    if not h > 0:
        raise ValueError("step size must be positive")
    raw = _rk4_raw(params, np.asarray(state.as_tuple(), dtype=np.float64), h)
    if not np.all(np.isfinite(raw)):
        raise NonFiniteStateError(f"RK4 step from {state.as_tuple()} produced {raw.tolist()}")
    return _to_state(np.clip(raw, 0.0, 1.0))


def nearest_vertex(point: tuple[float, float, float]) -> tuple[float, float, float]:
    return tuple(1.0 if value >= 0.5 else 0.0 for value in point)  # type: ignore[return-value]


def attribute_terminal(point: tuple[float, float, float], vertex_snap_eps: float) -> tuple[AttractorKey, bool]:
    vertex = nearest_vertex(point)
    distance = math.dist(point, vertex)
    if distance <= vertex_snap_eps:
        return vertex, True
    return tuple(round(value, ATTRACTOR_DECIMALS) for value in point), False  # type: ignore[return-value]


def integrate(params: ModelParams, initial: StrategyState, config: IntegratorConfig) -> Trajectory:
    h = config.step_size
    eps = config.convergence_eps
    point = np.asarray([initial.as_tuple()], dtype=np.float64)

    samples: list[tuple[float, StrategyState]] = [(0.0, initial)]
    max_excursion = 0.0
    converged = bool(field_norm(params, point)[0] < eps)
    total_steps = _total_steps(config)

    index = 0
    while not converged and index < total_steps:
        index += 1
        raw = _rk4_raw(params, point, h)
        if not np.all(np.isfinite(raw)):
            raise NonFiniteStateError(
                f"Integration from {initial.as_tuple()} became non-finite at t={index * h:g}"
            )
        max_excursion = max(max_excursion, _excursion(raw))
        point = np.clip(raw, 0.0, 1.0)
        converged = bool(field_norm(params, point)[0] < eps)

        if converged or index % config.record_every == 0 or index == total_steps:
            samples.append((index * h, _to_state(point[0])))

    final = samples[-1][1]
    terminal: Terminal
    if converged:
        key, snapped = attribute_terminal(final.as_tuple(), config.vertex_snap_eps)
        terminal = ConvergedTo(point=StrategyState(*key) if snapped else final, snapped_to_vertex=snapped)
    else:
        terminal = MaxTimeReached(final=final)

    logger.debug("trajectory from %s finished after %d steps: %s", initial.as_tuple(), index, terminal)
    return Trajectory(
        params_id=params_digest(params),
        samples=tuple(samples),
        terminal=terminal,
        max_excursion=max_excursion,
    )


def draw_initial_states(n_samples: int, seed: int) -> FloatArray:
    rng = np.random.default_rng(seed)
    points = rng.random((n_samples, 3))
    # rng.random covers [0, 1); push exact zeros off the face.
    return np.where(points == 0.0, np.finfo(np.float64).tiny, points)


def integrate_batch(
    params: ModelParams,
    initial_points: FloatArray,
    config: IntegratorConfig,
    on_progress: ProgressCallback | None = None,
) -> tuple[FloatArray, BoolArray, float]:
    """Integrate many initial points at once without recording paths.

    Each row undergoes exactly the arithmetic ``integrate`` performs on it, so
    terminal points match the per-trajectory result bit for bit.
    """
    h = config.step_size
    eps = config.convergence_eps
    points = np.array(initial_points, dtype=np.float64, copy=True)
    converged = field_norm(params, points) < eps
    active = np.flatnonzero(~converged)
    total_steps = _total_steps(config)
    progress_stride = max(1, total_steps // 100)
    max_excursion = 0.0

    index = 0
    while active.size and index < total_steps:
        index += 1
        raw = _rk4_raw(params, points[active], h)
        if not np.all(np.isfinite(raw)):
            raise NonFiniteStateError(f"Batch integration became non-finite at t={index * h:g}")
        max_excursion = max(max_excursion, _excursion(raw))
        clamped = np.clip(raw, 0.0, 1.0)
        points[active] = clamped
        done = field_norm(params, clamped) < eps
        converged[active[done]] = True
        active = active[~done]

        if on_progress and (index % progress_stride == 0 or not active.size):
            on_progress(int(converged.sum()), len(points))

    return points, converged, max_excursion


def sample_basins(
    params: ModelParams,
    n_samples: int,
    seed: int,
    config: IntegratorConfig,
    on_progress: ProgressCallback | None = None,
) -> BasinReport:
    if n_samples < 1:
        raise ValueError("n_samples must be at least 1")

    initial_points = draw_initial_states(n_samples, seed)
    final_points, converged, max_excursion = integrate_batch(params, initial_points, config, on_progress)

    counts: dict[AttractorKey, int] = {}
    samples: list[BasinSample] = []
    unresolved = 0
    for start, end, done in zip(initial_points, final_points, converged):
        attractor: AttractorKey | None = None
        if done:
            attractor, _ = attribute_terminal(tuple(float(v) for v in end), config.vertex_snap_eps)
            counts[attractor] = counts.get(attractor, 0) + 1
        else:
            unresolved += 1
        samples.append(BasinSample(initial=_to_state(start), attractor=attractor))

    logger.debug("basin sampling seed=%d: %s, unresolved=%d", seed, counts, unresolved)
    return BasinReport(
        attractor_counts=dict(sorted(counts.items())),
        total_samples=n_samples,
        unresolved=unresolved,
        seed=seed,
        samples=tuple(samples),
        max_excursion=max_excursion,
    )
