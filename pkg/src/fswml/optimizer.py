"""Grid search over process settings for the highest predicted UTS."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import NamedTuple, Optional, Sequence

import numpy as np

from .dataset import NUMERIC_FEATURES, TOOL_FEATURES, TOOL_MATERIALS
from .models import Model, feature_names, predict_rows

EXPERIMENT_LEVELS = {
    "rotational": (900.0, 1200.0, 1500.0),
    "welding": (25.0, 35.0, 45.0),
    "force": (2.0, 3.0, 4.0),
}


class Setting(NamedTuple):
    rotational_speed: float
    welding_speed: float
    axial_force: float
    tool: Optional[str] = None


@dataclass(frozen=True)
class ParameterGrid:
    rotational_levels: tuple[float, ...] = EXPERIMENT_LEVELS["rotational"]
    welding_levels: tuple[float, ...] = EXPERIMENT_LEVELS["welding"]
    force_levels: tuple[float, ...] = EXPERIMENT_LEVELS["force"]
    tool_levels: Optional[tuple[str, ...]] = TOOL_MATERIALS

    def __post_init__(self) -> None:
        for name in ("rotational_levels", "welding_levels", "force_levels"):
            levels = getattr(self, name)
            if not levels:
                raise ValueError(f"{name} must be non-empty")
            if any(not v > 0 for v in levels):
                raise ValueError(f"{name} must be positive, got {levels}")
        if self.tool_levels is not None:
            if not self.tool_levels:
                raise ValueError("tool_levels must be non-empty when given")
            unknown = set(self.tool_levels) - set(TOOL_MATERIALS)
            if unknown:
                raise ValueError(f"unknown tool levels {sorted(unknown)}")

    @classmethod
    def dense(cls, steps: int, tool_levels: Optional[tuple[str, ...]] = TOOL_MATERIALS) -> "ParameterGrid":
        """Each numeric range between the experimental extremes split into `steps` evenly spaced levels."""
        if steps < 2:
            raise ValueError(f"dense grids need at least 2 steps, got {steps}")

        def span(levels):
            return tuple(float(v) for v in np.linspace(min(levels), max(levels), steps))

        return cls(span(EXPERIMENT_LEVELS["rotational"]), span(EXPERIMENT_LEVELS["welding"]),
                   span(EXPERIMENT_LEVELS["force"]), tool_levels)


@dataclass(frozen=True)
class BaseMetal:
    name: str = "AA6061"
    tensile_strength: float = 310.0

    def __post_init__(self) -> None:
        if not self.tensile_strength > 0:
            raise ValueError(f"base-metal tensile strength must be positive, got {self.tensile_strength}")


@dataclass(frozen=True)
class Recommendation:
    setting: Setting
    predicted_uts: float
    joint_efficiency: float
    runner_ups: tuple[tuple[Setting, float], ...] = field(default=())
    base: BaseMetal = BaseMetal()

    def to_dict(self) -> dict:
        def setting_dict(s: Setting) -> dict:
            d = s._asdict()
            if d["tool"] is None:
                del d["tool"]
            return d

        return {
            "setting": setting_dict(self.setting),
            "predicted_uts_mpa": self.predicted_uts,
            "joint_efficiency": self.joint_efficiency,
            "joint_efficiency_pct": format_efficiency(self.joint_efficiency),
            "base_metal": {"name": self.base.name, "tensile_strength_mpa": self.base.tensile_strength},
            "runner_ups": [{"setting": setting_dict(s), "predicted_uts_mpa": v} for s, v in self.runner_ups],
        }


def enumerate_grid(grid: ParameterGrid, include_tool: bool = False) -> list[Setting]:
    """Cartesian product, rotational speed outermost and tool innermost."""
    if include_tool:
        if grid.tool_levels is None:
            raise ValueError("grid has no tool levels but include_tool was requested")
        tools: Sequence[Optional[str]] = grid.tool_levels
    else:
        tools = (None,)
    return [Setting(*combo) for combo in itertools.product(
        grid.rotational_levels, grid.welding_levels, grid.force_levels, tools)]


def joint_efficiency(uts: float, base: BaseMetal = BaseMetal()) -> float:
    if not uts > 0:
        raise ValueError(f"UTS must be positive, got {uts}")
    return uts / base.tensile_strength


def format_efficiency(efficiency: float) -> str:
    return f"{efficiency * 100:.1f}%"


def encode_settings(settings: Sequence[Setting], names: Sequence[str]) -> np.ndarray:
    """Feature rows in the column order a model was trained with."""
    names = tuple(names)
    if names[:3] != NUMERIC_FEATURES or names[3:] not in ((), TOOL_FEATURES):
        raise ValueError(f"unsupported feature layout {names}")
    with_tool = len(names) > 3
    X = np.zeros((len(settings), len(names)))
    for i, s in enumerate(settings):
        X[i, :3] = (s.rotational_speed, s.welding_speed, s.axial_force)
        if with_tool:
            X[i, 3 + TOOL_MATERIALS.index(s.tool)] = 1.0
    return X


def recommend(model: Model, grid: ParameterGrid = ParameterGrid(), base: BaseMetal = BaseMetal(),
              k: int = 5) -> Recommendation:
    """Predict every grid setting and return the argmax plus the next `k`.

    Whether the tool is part of each setting follows the model's features.
    Equal predictions keep enumeration order.
    """
    names = feature_names(model)
    include_tool = len(names) > 3
    if include_tool and grid.tool_levels is None:
        raise ValueError("model was trained with tool material but the grid has no tool levels")
    settings = enumerate_grid(grid, include_tool)
    preds = predict_rows(model, encode_settings(settings, names))
    order = sorted(range(len(settings)), key=lambda i: -preds[i])  # stable
    best = order[0]
    runner_ups = tuple((settings[i], float(preds[i])) for i in order[1:k + 1])
    value = float(preds[best])
    return Recommendation(settings[best], value, joint_efficiency(value, base), runner_ups, base)
