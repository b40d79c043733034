from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable

from app.core.config import ExperimentConfig
from app.core.dynamics import integrate, sample_basins
from app.core.errors import ConfigValidationError, NonFiniteStateError, UsageError
from app.core.game import payoff_table
from app.core.models import (
    BasinReport,
    EquilibriumReport,
    EssConditionReport,
    ModelComparison,
    ModelParams,
    PayoffTriple,
    PureProfile,
    StabilityClass,
    StrategyState,
    Trajectory,
)
from app.core.stability import (
    FULL_COOPERATION_INDEX,
    analyze_equilibria,
    classify,
    compare_models,
    ess_conditions,
    full_cooperation,
)
from app.core.validation import find_param_violations

ProgressCallback = Callable[[int, int], None]
LogCallback = Callable[[str], None]

FULL_COOPERATION = (1.0, 1.0, 1.0)


@dataclass(slots=True)
class SimulationRun:
    index: int
    initial: StrategyState
    trajectory: Trajectory


@dataclass(slots=True)
class FailedRun:
    index: int
    initial: StrategyState
    message: str


@dataclass(slots=True)
class SimulationResult:
    runs: list[SimulationRun]
    failed: list[FailedRun]

    @property
    def total(self) -> int:
        return len(self.runs) + len(self.failed)


@dataclass(slots=True)
class StabilityResult:
    params: ModelParams
    equilibria: list[EquilibriumReport]
    ess: EssConditionReport

    @property
    def full_cooperation(self) -> EquilibriumReport:
        return next(report for report in self.equilibria if report.equilibrium.index == FULL_COOPERATION_INDEX)


@dataclass(slots=True)
class SweepRow:
    cell: dict[str, float]
    params: ModelParams
    e8: StabilityClass
    ess: EssConditionReport
    basin_share: float | None = None


@dataclass(slots=True)
class SweepResult:
    axis_names: list[str]
    rows: list[SweepRow]
    basin_samples: int


class ExperimentRunner:
    def simulate(
        self,
        config: ExperimentConfig,
        on_progress: ProgressCallback | None = None,
        on_log: LogCallback | None = None,
    ) -> SimulationResult:
        initial_states = config.initial_states.resolve()
        if not initial_states:
            raise UsageError("initial_states is empty; nothing to simulate")

        total = len(initial_states)
        runs: list[SimulationRun] = []
        failed: list[FailedRun] = []

        for index, initial in enumerate(initial_states, start=1):
            if on_log:
                on_log(f"[{index}/{total}] Integrating from {initial.as_tuple()}")
            try:
                trajectory = integrate(config.params, initial, config.integrator)
                runs.append(SimulationRun(index=index, initial=initial, trajectory=trajectory))
                if on_log:
                    on_log(f"Finished: {trajectory.terminal}")
            except NonFiniteStateError as error:
                failed.append(FailedRun(index=index, initial=initial, message=str(error)))
                if on_log:
                    on_log(f"Failed: {initial.as_tuple()} ({error})")
            finally:
                if on_progress:
                    on_progress(index, total)

        return SimulationResult(runs=runs, failed=failed)

    def stability(self, config: ExperimentConfig) -> StabilityResult:
        options = config.stability
        return StabilityResult(
            params=config.params,
            equilibria=analyze_equilibria(config.params, tol=options.tol, include_faces=options.include_faces),
            ess=ess_conditions(config.params),
        )

    def basins(
        self,
        config: ExperimentConfig,
        on_progress: ProgressCallback | None = None,
        on_log: LogCallback | None = None,
    ) -> BasinReport:
        if on_log:
            on_log(f"Sampling {config.basins.n_samples} initial states with seed {config.seed}")
        report = sample_basins(
            config.params,
            config.basins.n_samples,
            config.seed,
            config.integrator,
            on_progress=on_progress,
        )
        if on_log:
            on_log(f"Resolved {report.total_samples - report.unresolved}/{report.total_samples} samples")
        return report

    def compare(self, config: ExperimentConfig) -> ModelComparison:
        return compare_models(config.params, tol=config.stability.tol)

    def sweep(
        self,
        config: ExperimentConfig,
        on_progress: ProgressCallback | None = None,
        on_log: LogCallback | None = None,
    ) -> SweepResult:
        if config.sweep is None:
            raise UsageError("the sweep command needs a 'sweep' section in the configuration")

        cells = list(config.sweep.cells())
        total = len(cells)
        basin_samples = config.sweep.basin_samples
        e8 = full_cooperation()
        rows: list[SweepRow] = []

        for index, cell in enumerate(cells, start=1):
            params = replace(config.params, **cell)
            violations = find_param_violations(params)
            if violations:
                raise ConfigValidationError(violations)

            basin_share: float | None = None
            if basin_samples:
                report = sample_basins(params, basin_samples, config.seed, config.integrator)
                basin_share = report.share(FULL_COOPERATION)

            rows.append(
                SweepRow(
                    cell=cell,
                    params=params,
                    e8=classify(params, e8, config.stability.tol),
                    ess=ess_conditions(params),
                    basin_share=basin_share,
                )
            )
            if on_log:
                on_log(f"[{index}/{total}] {cell} -> E8 {rows[-1].e8.kind.value}")
            if on_progress:
                on_progress(index, total)

        return SweepResult(
            axis_names=[axis.name for axis in config.sweep.axes],
            rows=rows,
            basin_samples=basin_samples,
        )

    def payoffs(self, config: ExperimentConfig) -> list[tuple[PureProfile, PayoffTriple]]:
        return payoff_table(config.params)
