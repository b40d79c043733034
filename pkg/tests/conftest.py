from __future__ import annotations

import json
from pathlib import Path
from typing import Any

import numpy as np
import pytest

from app.core.models import ModelParams
from app.core.presets import PARAMETER_PRESETS


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240611)


@pytest.fixture
def worked_params() -> ModelParams:
    """Hand-checkable parameter set used for substitution checks."""
    return ModelParams(
        R1=10.0, R2=10.0, R3=10.0,
        C1=2.0, C2=3.0, C3=0.3,
        r=5.0, theta=0.5, K=4.0, I1=1.0, I2=0.5, S=6.0,
    )


@pytest.fixture
def bistable() -> ModelParams:
    return PARAMETER_PRESETS["bistable"]


@pytest.fixture
def write_config(tmp_path: Path):
    def _write(payload: dict[str, Any] | str, name: str = "experiment.json") -> Path:
        path = tmp_path / name
        text = payload if isinstance(payload, str) else json.dumps(payload, indent=2)
        path.write_text(text, encoding="utf-8")
        return path

    return _write
