"""Figure rendering for the report paths.

Uses the non-interactive backend so figures can be written headlessly next
to the delimited output files.
"""

from __future__ import annotations

import math
from typing import Mapping, Optional, Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)
import numpy as np  # noqa: E402

from .analysis import PeCurvePoint, RatePoint  # noqa: E402

__all__ = ["save_pe_figure", "save_region_figure"]

_DPI = 150


def save_region_figure(
    points_by_scheme: Mapping[str, Sequence[RatePoint]],
    combined: Optional[Sequence[tuple[float, float]]],
    path: str,
) -> None:
    """Render rate frontiers (and optionally their envelope) to a file."""
    fig, ax = plt.subplots(figsize=(6.0, 4.5))
    for label, points in points_by_scheme.items():
        good = [
            p for p in points if math.isfinite(p.r1) and math.isfinite(p.r2)
        ]
        if not good:
            continue
        ax.plot(
            [p.r1 for p in good],
            [p.r2 for p in good],
            label=label,
            linewidth=1.5,
        )
    if combined:
        ax.plot(
            [q for q, _ in combined],
            [r for _, r in combined],
            label="combined",
            linestyle="--",
            linewidth=1.0,
            color="black",
        )
    ax.set_xlabel("$R_1$ (bits/use)")
    ax.set_ylabel("$R_2$ (bits/use)")
    ax.grid(True, alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)


def save_pe_figure(
    curves: Mapping[str, Sequence[PeCurvePoint]], path: str
) -> None:
    """Render error probability versus blocklength on a log scale.

    Exact zeros cannot appear on the log axis and are left out.
    """
    fig, ax = plt.subplots(figsize=(6.0, 4.5))
    for label, points in curves.items():
        pts = sorted(points, key=lambda p: p.n)
        ns = np.array([p.n for p in pts], dtype=float)
        for user, style in ((1, "-"), (2, "--")):
            pe = np.array(
                [p.pe1 if user == 1 else p.pe2 for p in pts], dtype=float
            )
            pe = np.where(pe > 0.0, pe, np.nan)
            if np.all(np.isnan(pe)):
                continue
            ax.semilogy(
                ns, pe, style, label=f"{label} user {user}", linewidth=1.5
            )
    ax.set_xlabel("blocklength $n$")
    ax.set_ylabel("symbol error probability")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)
