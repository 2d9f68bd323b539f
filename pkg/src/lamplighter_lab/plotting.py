"""Matplotlib rendering of report curves."""
from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

STYLE = {
    "figure.figsize": (6.4, 4.0),
    "figure.dpi": 110,
    "font.size": 10,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "legend.frameon": False,
    "lines.linewidth": 1.4,
}

# curves whose values span many decades read better on a log axis
_LOG_HINTS = ("tv", "sep", "unif", "mgf", "survival")


def _wants_log(cols: dict) -> bool:
    names = [c for c in cols if c != "t" and not c.endswith("_se")]
    if not any(any(h in c for h in _LOG_HINTS) for c in names):
        return False
    vals = np.concatenate([np.asarray(cols[c], dtype=float) for c in names])
    vals = vals[np.isfinite(vals)]
    return vals.size > 0 and vals.min() > 0 and vals.max() / vals.min() > 100


def plot_curve(ax, cols: dict, title: str = "") -> None:
    t = np.asarray(cols["t"], dtype=float)
    for name, values in cols.items():
        if name == "t" or name.endswith("_se"):
            continue
        y = np.asarray(values, dtype=float)
        (line,) = ax.plot(t, y, label=name)
        se = cols.get(f"{name}_se")
        if se is not None:
            se = np.asarray(se, dtype=float)
            ax.fill_between(t, y - 3 * se, y + 3 * se, color=line.get_color(), alpha=0.2, lw=0)
    if _wants_log(cols):
        ax.set_yscale("log")
    ax.set_xlabel("t")
    ax.set_title(title, fontsize=10)
    ax.legend(fontsize=8)


def render_curves(curves: dict, out_dir) -> list[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    with plt.rc_context(STYLE):
        for name, cols in sorted(curves.items()):
            fig, ax = plt.subplots()
            plot_curve(ax, cols, name)
            fig.tight_layout()
            path = out / f"{name}.png"
            # fixed metadata keeps repeated renders byte-identical
            fig.savefig(path, metadata={"Software": None})
            plt.close(fig)
            paths.append(path)
    return paths
