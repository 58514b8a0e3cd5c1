"""Figure rendering for scenario reports.

Every function writes a PNG next to the scenario's CSV side files and
returns the path.  All rendering goes through the Agg backend so runs
stay headless.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

_RC = {
    "figure.figsize": (5.0, 4.0),
    "figure.dpi": 130,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "font.size": 9,
}


def _new_axes(title):
    with plt.rc_context(_RC):
        fig, ax = plt.subplots()
    ax.set_title(title)
    return fig, ax


def _finish(fig, path) -> str:
    path = Path(path)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
    return str(path)


def save_norm_ball_2d(path, grid, values, label, reference=None) -> str:
    """Unit ball boundary of a planar norm, optionally with a reference."""
    fig, ax = _new_axes("unit ball")
    angles = np.arctan2(grid[:, 1], grid[:, 0])
    order = np.argsort(angles)
    radii = 1.0 / np.asarray(values)[order]
    pts = grid[order] * radii[:, None]
    ax.plot(
        np.append(pts[:, 0], pts[0, 0]), np.append(pts[:, 1], pts[0, 1]),
        label=label,
    )
    if reference is not None:
        ref_vals, ref_label = reference
        ref_r = 1.0 / np.asarray(ref_vals)[order]
        ref_pts = grid[order] * ref_r[:, None]
        ax.plot(
            np.append(ref_pts[:, 0], ref_pts[0, 0]),
            np.append(ref_pts[:, 1], ref_pts[0, 1]),
            "--",
            label=ref_label,
        )
    ax.set_aspect("equal")
    ax.legend(loc="upper right")
    return _finish(fig, path)


def save_decay_curve(path, r_list, ratios, label) -> str:
    """Log-log decay of the symmetric-difference ratios, with a slope-1 guide."""
    fig, ax = _new_axes("symmetric-difference decay")
    r = np.asarray(r_list, dtype=float)
    y = np.asarray(ratios, dtype=float)
    ax.loglog(r, y, "o-", label=label)
    guide = y[0] * (r / r[0])
    ax.loglog(r, guide, "k--", alpha=0.5, label="slope 1")
    ax.set_xlabel("r")
    ax.set_ylabel("ratio")
    ax.legend()
    return _finish(fig, path)


def save_orbit_angles(path, angles, label) -> str:
    """Orbit of the reference direction on the unit circle."""
    fig, ax = _new_axes("orbit coverage")
    angles = np.asarray(angles, dtype=float)
    ax.plot(np.cos(angles), np.sin(angles), ".", ms=3, label=label)
    circle = np.linspace(0, 2 * np.pi, 256)
    ax.plot(np.cos(circle), np.sin(circle), "k-", lw=0.5, alpha=0.4)
    ax.set_aspect("equal")
    ax.legend(loc="upper right")
    return _finish(fig, path)


def save_profile(path, xs, ys, xlabel, ylabel, label) -> str:
    fig, ax = _new_axes(ylabel)
    ax.plot(xs, ys, "o-", ms=3, label=label)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.legend()
    return _finish(fig, path)


def save_matrix_heatmap(path, matrix, label) -> str:
    fig, ax = _new_axes(label)
    im = ax.imshow(np.abs(matrix), cmap="viridis")
    fig.colorbar(im, ax=ax, fraction=0.046)
    ax.grid(False)
    return _finish(fig, path)
