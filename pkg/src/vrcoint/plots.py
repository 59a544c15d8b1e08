"""Figure rendering for simulation results.

One PNG per design panel (dynamics, r2, T), with one rejection-frequency
curve per test variant. Files are written atomically next to the delimited
results.
"""

from __future__ import annotations

import os
import tempfile

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import pandas as pd

from vrcoint.experiments import panel_pivots

X_LABELS = {"c": r"$-c$", "lambda_u": r"$\lambda_u$"}


def panel_slug(dynamics: str, r2: float, T: int) -> str:
    dyn = dynamics.replace("(", "").replace(")", "").replace(",", "-")
    return f"{dyn}_r2{r2:g}_T{T:g}"


def _save_atomic(fig, path: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".png")
    os.close(fd)
    try:
        fig.savefig(tmp, dpi=150, bbox_inches="tight")
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def render_power_panels(
    frame: pd.DataFrame, x: str, out_stem: str, level: float | None = None
) -> list[str]:
    """Render one rejection-curve figure per panel; returns the file paths.

    ``x`` is the column plotted on the horizontal axis ("c" is shown negated,
    so curves run from the null outward).
    """
    paths = []
    for (dynamics, r2, T), pivot in panel_pivots(frame, x=x).items():
        fig, ax = plt.subplots(figsize=(6.0, 4.0))
        xs = -pivot.index.to_numpy() if x == "c" else pivot.index.to_numpy()
        order = xs.argsort()
        for label in pivot.columns:
            ax.plot(xs[order], pivot[label].to_numpy()[order], marker="o",
                    markersize=3, linewidth=1.2, label=label)
        if level is not None:
            ax.axhline(level, color="0.6", linewidth=0.8, linestyle="--")
        ax.set_xlabel(X_LABELS.get(x, x))
        ax.set_ylabel("rejection frequency")
        title = f"{dynamics}, $R^2$={r2:g}" + (f", T={T:g}" if T else "")
        ax.set_title(title)
        ax.set_ylim(-0.02, 1.02)
        ax.grid(alpha=0.3)
        ax.legend(fontsize=8, ncol=2)
        path = f"{out_stem}_{panel_slug(dynamics, r2, T)}.png"
        _save_atomic(fig, path)
        plt.close(fig)
        paths.append(path)
    return paths
