"""Figure rendering for the report paths.

Every CLI command that writes delimited output can also render a matplotlib
figure next to it: the (f, g) trajectory with the Wronskian for profiles,
(rho, a) tracks for leaves, and a region overview for foliation reports.
Rendering uses the Agg backend and never opens a window.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

_FIG_KW = {"dpi": 150, "bbox_inches": "tight"}


def save_trajectory_figure(profile, path, n: int = 1000):
    """Trajectory rho -> (f, g) beside the Wronskian D(rho)."""
    rho = np.linspace(profile.rho_min, profile.rho_max, n)
    f = profile.f(rho)
    g = profile.g(rho)
    D = profile.wronskian(rho)
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 4))
    ax1.plot(f, g, lw=1.2)
    ax1.plot([f[0]], [g[0]], "o", ms=4, color="tab:red", label="axis end")
    ax1.axhline(0.0, color="0.8", lw=0.6)
    ax1.axvline(0.0, color="0.8", lw=0.6)
    ax1.set_xlabel("f")
    ax1.set_ylabel("g")
    ax1.set_title("trajectory")
    ax1.legend(frameon=False, fontsize=8)
    ax2.plot(rho, D, lw=1.2)
    ax2.axhline(0.0, color="0.8", lw=0.6)
    ax2.set_xlabel("rho")
    ax2.set_ylabel("D = f g' - f' g")
    ax2.set_title("Wronskian")
    fig.savefig(path, **_FIG_KW)
    plt.close(fig)
    return path


def save_leaf_figure(leaf, path):
    """rho(s) and a(s) of one leaf plus its (rho, a) track."""
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 4))
    ax1.plot(leaf.s, leaf.rho, lw=1.0, label="rho(s)")
    ax1.set_xlabel("s")
    ax1.set_ylabel("rho")
    ax1b = ax1.twinx()
    ax1b.plot(leaf.s, leaf.a, lw=1.0, color="tab:orange", label="a(s)")
    ax1b.set_ylabel("a")
    ax1.set_title(f"leaf (p, q) = ({leaf.p}, {leaf.q})")
    ax2.plot(leaf.rho, leaf.a, lw=1.0)
    ax2.set_xlabel("rho")
    ax2.set_ylabel("a")
    ax2.set_title("(rho, a) track")
    fig.savefig(path, **_FIG_KW)
    plt.close(fig)
    return path


def save_foliation_figure(report, path):
    """Leaf tracks colored by region, orbit-torus radii marked."""
    fig, ax = plt.subplots(figsize=(7, 4.5))
    cmap = plt.get_cmap("tab10")
    for leaf in report.leaves:
        ax.plot(leaf.rho, leaf.a - leaf.a[0], lw=0.8,
                color=cmap(leaf.region % 10), alpha=0.8)
    for t in report.orbit_census["tori"]:
        ax.axvline(t.r, color="0.4", lw=0.8, ls="--")
    ax.set_xlabel("rho")
    ax.set_ylabel("a (shifted)")
    ax.set_title(f"foliation: {report.stability}, "
                 f"{len(report.regions)} regions")
    fig.savefig(path, **_FIG_KW)
    plt.close(fig)
    return path
