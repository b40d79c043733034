from __future__ import annotations

import math
from dataclasses import dataclass, fields
from enum import Enum
from typing import Iterator


@dataclass(slots=True, frozen=True)
class ModelParams:
    """Scalar parameters of the SME / core enterprise / financial institution game.

    All amounts share one currency unit. ``m1``-``m3`` are the cost reductions
    brought by the blockchain platform; zero reproduces the baseline model.
    """

    R1: float
    R2: float
    R3: float
    C1: float
    C2: float
    C3: float
    r: float
    theta: float
    K: float
    I1: float
    I2: float
    S: float
    m1: float = 0.0
    m2: float = 0.0
    m3: float = 0.0

    @classmethod
    def field_names(cls) -> tuple[str, ...]:
        return tuple(item.name for item in fields(cls))

    def as_dict(self) -> dict[str, float]:
        return {name: getattr(self, name) for name in self.field_names()}

    @property
    def is_baseline(self) -> bool:
        return self.m1 == 0 and self.m2 == 0 and self.m3 == 0

    @property
    def net_costs(self) -> tuple[float, float, float]:
        return (self.C1 - self.m1, self.C2 - self.m2, self.C3 - self.m3)

    @property
    def sme_net_gain(self) -> float:
        return self.r - self.theta * (self.K + self.I1)

    @property
    def core_net_gain(self) -> float:
        return self.I1 - self.I2 + self.S - (1 - self.theta) * (self.K + self.I1)


@dataclass(slots=True, frozen=True)
class StrategyState:
    x: float
    y: float
    z: float

    def __post_init__(self) -> None:
        for name in ("x", "y", "z"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name}={value!r} is outside [0, 1]")

    def __iter__(self) -> Iterator[float]:
        yield self.x
        yield self.y
        yield self.z

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.x, self.y, self.z)


@dataclass(slots=True, frozen=True)
class PureProfile:
    sme_finances: bool
    core_guarantees: bool
    fi_cooperates: bool

    def probability(self, state: StrategyState) -> float:
        px = state.x if self.sme_finances else 1.0 - state.x
        py = state.y if self.core_guarantees else 1.0 - state.y
        pz = state.z if self.fi_cooperates else 1.0 - state.z
        return px * py * pz

    @property
    def label(self) -> str:
        return "/".join(
            (
                "finance" if self.sme_finances else "refuse",
                "guarantee" if self.core_guarantees else "refuse",
                "cooperate" if self.fi_cooperates else "refuse",
            )
        )


@dataclass(slots=True, frozen=True)
class PayoffTriple:
    u_alpha: float
    u_beta: float
    u_gamma: float


@dataclass(slots=True, frozen=True)
class ExpectedPayoffs:
    E_x: float
    E_not_x: float
    E_s: float
    E_y: float
    E_not_y: float
    E_c: float
    E_z: float
    E_not_z: float
    E_d: float


@dataclass(slots=True, frozen=True)
class IntegratorConfig:
    step_size: float = 0.01
    t_max: float = 500.0
    convergence_eps: float = 1e-8
    vertex_snap_eps: float = 1e-3
    record_every: int = 10

    def __post_init__(self) -> None:
        for name in ("step_size", "t_max", "convergence_eps", "vertex_snap_eps"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be a positive finite number, got {value!r}")
        if self.record_every < 1:
            raise ValueError("record_every must be at least 1")


@dataclass(slots=True, frozen=True)
class ConvergedTo:
    point: StrategyState
    snapped_to_vertex: bool


@dataclass(slots=True, frozen=True)
class MaxTimeReached:
    final: StrategyState


Terminal = ConvergedTo | MaxTimeReached


@dataclass(slots=True, frozen=True)
class Trajectory:
    params_id: str
    samples: tuple[tuple[float, StrategyState], ...]
    terminal: Terminal
    max_excursion: float = 0.0

    @property
    def converged(self) -> bool:
        return isinstance(self.terminal, ConvergedTo)

    @property
    def final_state(self) -> StrategyState:
        return self.samples[-1][1]


AttractorKey = tuple[float, float, float]


@dataclass(slots=True, frozen=True)
class BasinSample:
    initial: StrategyState
    attractor: AttractorKey | None


@dataclass(slots=True, frozen=True)
class BasinReport:
    attractor_counts: dict[AttractorKey, int]
    total_samples: int
    unresolved: int
    seed: int
    samples: tuple[BasinSample, ...] = ()
    max_excursion: float = 0.0

    def share(self, attractor: AttractorKey) -> float:
        if self.total_samples <= 0:
            return 0.0
        return self.attractor_counts.get(attractor, 0) / self.total_samples


class EquilibriumKind(str, Enum):
    VERTEX = "Vertex"
    INTERIOR = "Interior"
    FACE_OR_EDGE = "FaceOrEdge"


@dataclass(slots=True, frozen=True)
class Equilibrium:
    point: StrategyState
    kind: EquilibriumKind
    index: int | None = None

    @property
    def label(self) -> str:
        if self.kind is EquilibriumKind.VERTEX:
            return f"E{self.index}"
        if self.kind is EquilibriumKind.INTERIOR:
            return "interior"
        return "face"


class StabilityType(str, Enum):
    ESS = "ESS"
    UNSTABLE = "Unstable"
    SADDLE = "Saddle"
    NON_HYPERBOLIC = "NonHyperbolic"


@dataclass(slots=True, frozen=True)
class StabilityClass:
    kind: StabilityType
    eigenvalues: tuple[complex, complex, complex]
    tol: float = 1e-9


@dataclass(slots=True, frozen=True)
class EquilibriumReport:
    equilibrium: Equilibrium
    stability: StabilityClass
    field_norm: float


@dataclass(slots=True, frozen=True)
class ConditionRecord:
    label: str
    expression: str
    lhs: float
    rhs: float
    published_form: str | None = None
    note: str | None = None

    @property
    def margin(self) -> float:
        return self.lhs - self.rhs

    @property
    def satisfied(self) -> bool:
        return self.margin > 0


@dataclass(slots=True, frozen=True)
class EssConditionReport:
    conditions: tuple[ConditionRecord, ConditionRecord, ConditionRecord]
    model_tag: str

    @property
    def margins(self) -> tuple[float, float, float]:
        return tuple(condition.margin for condition in self.conditions)  # type: ignore[return-value]

    @property
    def all_satisfied(self) -> bool:
        return all(condition.satisfied for condition in self.conditions)


@dataclass(slots=True, frozen=True)
class ModelComparison:
    baseline: EssConditionReport
    blockchain: EssConditionReport
    baseline_e8: StabilityClass
    blockchain_e8: StabilityClass
    pareto_flag: bool

    @property
    def margin_shifts(self) -> tuple[float, float, float]:
        return tuple(
            after - before for before, after in zip(self.baseline.margins, self.blockchain.margins)
        )  # type: ignore[return-value]

    @property
    def flipped_to_ess(self) -> bool:
        return (
            self.baseline_e8.kind is not StabilityType.ESS
            and self.blockchain_e8.kind is StabilityType.ESS
        )
