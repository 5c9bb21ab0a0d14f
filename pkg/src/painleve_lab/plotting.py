"""SVG figures (matplotlib, Agg backend, reproducible output)."""
from __future__ import annotations

import json
from pathlib import Path
from typing import Optional, Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .io import header  # noqa: E402


def _save(fig, path, config: dict) -> Path:
    path = Path(path)
    with matplotlib.rc_context({"svg.hashsalt": "painleve-lab", "svg.fonttype": "none"}):
        fig.savefig(path, format="svg",
                    metadata={"Date": None, "Creator": None,
                              "Description": json.dumps(header(config), sort_keys=True)})
    plt.close(fig)
    return path


def julia_svg(points: Sequence[complex], path, config: dict, landmark: Optional[complex] = -1) -> Path:
    """Closed polyline through the traced boundary points."""
    xs = [p.real for p in points] + [points[0].real]
    ys = [p.imag for p in points] + [points[0].imag]
    fig, ax = plt.subplots(figsize=(5, 4))
    ax.plot(xs, ys, lw=0.6, color="k")
    if landmark is not None:
        ax.plot([landmark.real if isinstance(landmark, complex) else landmark], [0.0], "o",
                ms=3, color="tab:red")
    ax.set_aspect("equal")
    ax.set_xlabel("Re x")
    ax.set_ylabel("Im x")
    return _save(fig, path, config)


def psi_svg(t: Sequence[float], scaled: Sequence[float], path, config: dict,
            label: str = r"$10^9(\Psi + c)$") -> Path:
    fig, ax = plt.subplots(figsize=(5, 3))
    ax.plot(list(t), list(scaled), lw=0.8, color="k")
    ax.set_xlabel(r"$\ln\ln(1/z)$")
    ax.set_ylabel(label)
    return _save(fig, path, config)
