"""Static monitoring charts rendered to files next to the delimited outputs.

Two stacked panels: the T^2 series and the SPE series, each with a dashed
horizontal line at its alarm threshold. Figures are deterministic: the SVG
hash salt is pinned and no date metadata is embedded, so identical inputs
produce byte-identical files.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

matplotlib.rcParams["svg.hashsalt"] = "olppmon"

_STAT_COLOR = "#1f77b4"
_THRESHOLD_COLOR = "#d62728"


def render_monitoring_chart(records, j_th_t2: float, j_th_spe: float | None,
                            path, log_scale: bool = False,
                            title: str | None = None) -> None:
    """Plot per-sample statistics against their thresholds and save the figure.

    The output format follows the file extension (SVG recommended). The two
    threshold lines carry gid attributes (threshold-t2 / threshold-spe) so
    rendered SVGs are machine-checkable.
    """
    path = Path(path)
    idx = [r.index for r in records]
    t2_series = [r.t2 for r in records]
    spe_series = [r.spe for r in records]

    fig, (ax_t2, ax_spe) = plt.subplots(2, 1, sharex=True, figsize=(8, 5))
    ax_t2.plot(idx, t2_series, color=_STAT_COLOR, linewidth=0.8)
    ax_t2.axhline(j_th_t2, color=_THRESHOLD_COLOR, linestyle="--", linewidth=1.2,
                  gid="threshold-t2", label="threshold")
    ax_t2.set_ylabel("$T^2$")
    ax_t2.legend(loc="upper left", fontsize=8)

    ax_spe.plot(idx, spe_series, color=_STAT_COLOR, linewidth=0.8)
    if j_th_spe is not None:
        ax_spe.axhline(j_th_spe, color=_THRESHOLD_COLOR, linestyle="--",
                       linewidth=1.2, gid="threshold-spe", label="threshold")
        ax_spe.legend(loc="upper left", fontsize=8)
    else:
        ax_spe.text(0.02, 0.9, "SPE inactive (no residual subspace)",
                    transform=ax_spe.transAxes, fontsize=8)
    ax_spe.set_ylabel("SPE")
    ax_spe.set_xlabel("sample")

    if log_scale:
        ax_t2.set_yscale("log")
        if any(v > 0 for v in spe_series):
            ax_spe.set_yscale("log")
    if title:
        fig.suptitle(title)

    fig.tight_layout()
    fig.savefig(path, metadata=_deterministic_metadata(path))
    plt.close(fig)


def _deterministic_metadata(path: Path) -> dict | None:
    suffix = path.suffix.lower()
    if suffix == ".svg":
        return {"Date": None}
    if suffix == ".png":
        return {"Software": None}
    return None
