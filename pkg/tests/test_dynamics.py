from __future__ import annotations

from dataclasses import replace

import numpy as np
import pytest

from app.core.dynamics import draw_initial_states, integrate, integrate_batch, sample_basins, step
from app.core.errors import NonFiniteStateError
from app.core.game import replicator_field, state_field_norm
from app.core.models import ConvergedTo, IntegratorConfig, StrategyState
from app.core.presets import PARAMETER_PRESETS
from app.core.stability import VERTICES

ORIGIN = (0.0, 0.0, 0.0)
FULL = (1.0, 1.0, 1.0)


def test_step_keeps_vertices_fixed(bistable):
    for vertex in VERTICES:
        assert step(bistable, StrategyState(*vertex), 0.01).as_tuple() == vertex


def test_step_is_consistent_with_the_field(worked_params):
    state = StrategyState(0.3, 0.6, 0.4)
    velocity = np.array(replicator_field(worked_params, state))

    def defect(h: float) -> float:
        moved = np.array(step(worked_params, state, h).as_tuple())
        return float(np.linalg.norm(moved - np.array(state.as_tuple()) - h * velocity))

    coarse, fine = defect(1e-2), defect(1e-3)
    assert fine < coarse / 50
    assert coarse < 1e-3


def test_cooperation_decays_when_supervision_outweighs_interest(worked_params):
    params = replace(worked_params, C3=0.8)
    state = StrategyState(1.0, 1.0, 0.5)
    moved = step(params, state, 0.01)
    assert moved.z < 0.5
    assert (moved.x, moved.y) == (1.0, 1.0)


def test_step_rejects_non_finite_results(bistable):
    with pytest.raises(NonFiniteStateError):
        step(bistable, StrategyState(0.5, 0.5, 0.5), 1e308)


def test_integrate_from_vertex_is_a_single_sample(bistable):
    trajectory = integrate(bistable, StrategyState(1.0, 0.0, 1.0), IntegratorConfig())
    assert len(trajectory.samples) == 1
    assert trajectory.terminal == ConvergedTo(point=StrategyState(1.0, 0.0, 1.0), snapped_to_vertex=True)


@pytest.mark.parametrize(
    ("start", "attractor"),
    [((0.9, 0.9, 0.9), FULL), ((0.05, 0.05, 0.05), ORIGIN)],
)
def test_bistable_paths_reach_both_ess(bistable, start, attractor):
    config = IntegratorConfig()
    trajectory = integrate(bistable, StrategyState(*start), config)

    assert isinstance(trajectory.terminal, ConvergedTo)
    assert trajectory.terminal.point.as_tuple() == attractor
    final = trajectory.final_state
    assert np.linalg.norm(np.array(final.as_tuple()) - np.array(attractor)) < 1e-3
    assert state_field_norm(bistable, final) < config.convergence_eps


def test_trajectory_samples_stay_in_cube(bistable):
    trajectory = integrate(bistable, StrategyState(0.6, 0.7, 0.65), IntegratorConfig(record_every=5))
    times = [t for t, _ in trajectory.samples]
    assert all(later > earlier for earlier, later in zip(times, times[1:]))
    assert all(0.0 <= value <= 1.0 for _, state in trajectory.samples for value in state.as_tuple())
    assert trajectory.max_excursion <= 1e-9


def test_integration_stops_at_t_max(bistable):
    config = IntegratorConfig(t_max=1.0, record_every=25)
    trajectory = integrate(bistable, StrategyState(0.5, 0.5, 0.5), config)
    assert not trajectory.converged
    assert trajectory.samples[-1][0] == pytest.approx(1.0)
    assert [t for t, _ in trajectory.samples] == pytest.approx([0.0, 0.25, 0.5, 0.75, 1.0])


def test_cooperation_is_monotone_on_the_guaranteed_edge(worked_params):
    for c3, decreasing in ((0.8, True), (0.3, False)):
        params = replace(worked_params, C3=c3)
        trajectory = integrate(params, StrategyState(1.0, 1.0, 0.5), IntegratorConfig(t_max=20.0, record_every=1))
        zs = [state.z for _, state in trajectory.samples]
        pairs = list(zip(zs, zs[1:]))
        if decreasing:
            assert all(later <= earlier for earlier, later in pairs)
        else:
            assert all(later >= earlier for earlier, later in pairs)


def test_single_sample_report(bistable):
    report = sample_basins(bistable, 1, seed=3, config=IntegratorConfig())
    assert report.total_samples == 1
    assert sum(report.attractor_counts.values()) + report.unresolved == 1
    assert report.seed == 3


def test_initial_draws_lie_in_open_cube():
    points = draw_initial_states(500, seed=11)
    assert points.shape == (500, 3)
    assert np.all(points > 0.0) and np.all(points < 1.0)


def test_unprofitable_financing_always_ends_at_origin():
    params = PARAMETER_PRESETS["no_financing"]
    report = sample_basins(params, 200, seed=5, config=IntegratorConfig())
    resolved = report.total_samples - report.unresolved
    assert resolved > 0
    assert report.attractor_counts == {ORIGIN: resolved}


def test_bistable_basins_split_between_two_vertices(bistable):
    report = sample_basins(bistable, 1000, seed=2024, config=IntegratorConfig())
    assert set(report.attractor_counts) == {ORIGIN, FULL}
    assert report.attractor_counts[ORIGIN] > 0
    assert report.attractor_counts[FULL] > 0
    assert sum(report.attractor_counts.values()) + report.unresolved == 1000
    assert report.max_excursion <= 1e-9


def test_basin_sampling_is_reproducible(bistable):
    config = IntegratorConfig()
    first = sample_basins(bistable, 64, seed=9, config=config)
    second = sample_basins(bistable, 64, seed=9, config=config)
    assert first == second


def test_batch_integration_matches_single_trajectories(bistable):
    config = IntegratorConfig()
    starts = draw_initial_states(6, seed=21)
    finals, converged, _ = integrate_batch(bistable, starts, config)
    for start, final, done in zip(starts, finals, converged):
        trajectory = integrate(bistable, StrategyState(*(float(v) for v in start)), config)
        assert done == trajectory.converged
        assert tuple(float(v) for v in final) == trajectory.final_state.as_tuple()


def test_halving_the_step_keeps_every_attribution(bistable):
    coarse = sample_basins(bistable, 100, seed=77, config=IntegratorConfig(step_size=0.01))
    fine = sample_basins(bistable, 100, seed=77, config=IntegratorConfig(step_size=0.005))
    assert [sample.attractor for sample in coarse.samples] == [sample.attractor for sample in fine.samples]
