"""Information-plane figures rendered from report dictionaries.

Output is SVG with a pinned hash salt and scrubbed date metadata so the same
report always renders to the same bytes.  Axes follow the convention used
throughout: utility on x, leakage on y, desirable corner at the bottom right.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .regression import RegressionPlane, _frontier_values

_REGION_COLOR = "#9fc8e8"
_FRONTIER_COLOR = "#1f7a33"


def _classification_region(ax, report: dict) -> None:
    poly = report.get("feasible_polygon")
    if not poly:
        return
    verts = np.asarray(poly["vertices"], dtype=float)
    if len(verts) >= 3:
        ax.fill(verts[:, 0], verts[:, 1], color=_REGION_COLOR, alpha=0.5, zorder=1,
                label="known feasible region")
    seg = np.asarray(poly["frontier_segment"], dtype=float)
    ax.plot(seg[:, 0], seg[:, 1], color=_FRONTIER_COLOR, lw=2, zorder=3,
            label="frontier inner bound")
    ax.plot(seg[:, 0], seg[:, 1], "o", color="black", ms=5, zorder=4)


def _regression_region(ax, report: dict) -> None:
    plane_stats = report.get("plane") or {}
    frontier = report.get("frontier") or {}
    polyline = frontier.get("polyline")
    if polyline:
        pts = np.asarray([[p["utility"], p["leakage"]] for p in polyline])
        ax.plot(pts[:, 0], pts[:, 1], color=_FRONTIER_COLOR, lw=2, zorder=3, label="frontier")
        ax.plot(pts[[0, -1], 0], pts[[0, -1], 1], "o", color="black", ms=5, zorder=4)
    needed = {"var_y", "var_a", "cov_ya"}
    if needed <= set(plane_stats):
        plane = RegressionPlane(
            var_y=plane_stats["var_y"], var_a=plane_stats["var_a"], cov_ya=plane_stats["cov_ya"]
        )
        swapped = RegressionPlane(var_y=plane.var_a, var_a=plane.var_y, cov_ya=plane.cov_ya)
        alphas = np.linspace(0.0, plane.rho_sq, 200)
        lower = np.column_stack([_frontier_values(plane, alphas), alphas * plane.var_a])
        betas = np.linspace(0.0, swapped.rho_sq, 200)
        upper = np.column_stack([betas * plane.var_y, _frontier_values(swapped, betas)])
        boundary = np.vstack(
            [
                [0.0, 0.0],
                lower,
                [plane.var_y, plane.var_a],
                upper[::-1],
                [0.0, 0.0],
            ]
        )
        ax.fill(boundary[:, 0], boundary[:, 1], color=_REGION_COLOR, alpha=0.5, zorder=1,
                label="feasible region")


def render_information_plane(report: dict, out_path: str) -> None:
    """Render a report to a deterministic SVG file."""
    plt.rcParams["svg.hashsalt"] = "infoplane"
    fig, ax = plt.subplots(figsize=(6.4, 4.8), dpi=100)
    task = report.get("task", "classification")
    if task == "classification":
        _classification_region(ax, report)
        ax.set_xlabel("utility I(Y;Z) [bits]")
        ax.set_ylabel("leakage I(A;Z) [bits]")
    else:
        _regression_region(ax, report)
        ax.set_xlabel("utility Var E[Y|Z]")
        ax.set_ylabel("leakage Var E[A|Z]")
    vertices = report.get("vertices") or {}
    rect = vertices.get("rectangle")
    if rect:
        ax.set_xlim(-0.02 * max(rect["max_utility"], 1e-9), 1.05 * max(rect["max_utility"], 1e-9))
        ax.set_ylim(-0.02 * max(rect["max_leakage"], 1e-9), 1.05 * max(rect["max_leakage"], 1e-9))
    for point in report.get("points", []):
        ax.plot(point["utility"], point["leakage"], "s", ms=6, zorder=5)
        ax.annotate(
            point["name"],
            (point["utility"], point["leakage"]),
            textcoords="offset points",
            xytext=(4, 4),
            fontsize=8,
        )
    ax.legend(loc="upper left", fontsize=8)
    ax.set_title(f"information plane ({task})", fontsize=10)
    fig.tight_layout()
    fig.savefig(out_path, format="svg", metadata={"Date": None})
    plt.close(fig)
