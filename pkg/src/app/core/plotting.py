from __future__ import annotations

from pathlib import Path
from typing import Sequence

import matplotlib
import numpy as np

matplotlib.use("Agg")

from matplotlib.backends.backend_agg import FigureCanvasAgg
from matplotlib.figure import Figure
from PIL import Image

from app.core.models import ConvergedTo, EquilibriumReport, StabilityType, Trajectory

PANELS = (("x", "y", 0, 1), ("x", "z", 0, 2), ("y", "z", 1, 2))
SVG_HASH_SALT = "phase-plot"


def build_phase_figure(
    trajectories: Sequence[Trajectory],
    equilibria: Sequence[EquilibriumReport] = (),
    title: str | None = None,
) -> Figure:
    figure = Figure(figsize=(12, 4.2))
    FigureCanvasAgg(figure)
    axes = figure.subplots(1, 3)

    for axis, (label_a, label_b, first, second) in zip(axes, PANELS):
        for trajectory in trajectories:
            coordinates = [state.as_tuple() for _, state in trajectory.samples]
            xs = [point[first] for point in coordinates]
            ys = [point[second] for point in coordinates]
            axis.plot(xs, ys, linewidth=0.9, color="#3b6ea5", alpha=0.8)
            axis.plot(xs[0], ys[0], marker="o", markersize=3, color="#3b6ea5")

            terminal = trajectory.terminal
            if isinstance(terminal, ConvergedTo):
                end = terminal.point.as_tuple()
                axis.plot(end[first], end[second], marker="*", markersize=11, color="#c0392b")
            else:
                end = terminal.final.as_tuple()
                axis.plot(end[first], end[second], marker="x", markersize=7, color="#7f8c8d")

        for report in equilibria:
            if report.stability.kind is StabilityType.ESS:
                point = report.equilibrium.point.as_tuple()
                axis.plot(
                    point[first],
                    point[second],
                    marker="s",
                    markersize=9,
                    markerfacecolor="none",
                    markeredgecolor="#27ae60",
                    markeredgewidth=1.5,
                )

        axis.set_xlim(-0.03, 1.03)
        axis.set_ylim(-0.03, 1.03)
        axis.set_aspect("equal")
        axis.set_xlabel(label_a)
        axis.set_ylabel(label_b)
        axis.set_title(f"{label_a}-{label_b}")
        axis.grid(True, linewidth=0.3, alpha=0.5)

    if title:
        figure.suptitle(title)
    figure.tight_layout()
    return figure


def write_svg(figure: Figure, path: Path) -> Path:
    with matplotlib.rc_context({"svg.hashsalt": SVG_HASH_SALT}):
        figure.savefig(path, format="svg", metadata={"Date": None})
    return path


def write_webp(figure: Figure, path: Path, quality: int = 90) -> Path:
    canvas = figure.canvas
    canvas.draw()
    image = Image.fromarray(np.asarray(canvas.buffer_rgba()))
    image.convert("RGB").save(path, format="WEBP", quality=quality, method=6)
    return path
