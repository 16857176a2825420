"""PNG renderings of the CSV tables written by the CLI.

Figures are drawn on the Agg canvas directly (no pyplot state), and the
PNG metadata is stripped so reruns produce identical bytes.
"""
from __future__ import annotations

from matplotlib.backends.backend_agg import FigureCanvasAgg
from matplotlib.figure import Figure

AXIS_LABELS = {
    "p_tx_dbm": "transmit power (dBm)",
    "r_bps_hz": "QoS threshold R (bit/s/Hz)",
    "n_elements": "RIS elements N",
    "ris_y_m": "RIS y position (m)",
}
MODE_STYLE = {
    "static_only": ("static only", "-"),
    "ris_only": ("RIS only", "--"),
    "ris_plus_static": ("RIS + static", "-."),
}


def _split(column):
    """``se_ris_only`` -> (``se``, ``ris_only``)."""
    prefix, _, mode = column.partition("_")
    return prefix, mode


def _save(fig, path):
    FigureCanvasAgg(fig)
    fig.savefig(path, dpi=120, metadata={"Software": None})


def plot_sweep(header, rows, path, title=""):
    """One line per mode column of a sweep table against its first column."""
    rows = [list(r) for r in rows]
    fig = Figure(figsize=(6.0, 4.0))
    ax = fig.add_subplot()
    x = [r[0] for r in rows]
    ylabel = None
    for j, col in enumerate(header):
        prefix, mode = _split(col)
        if mode not in MODE_STYLE or prefix not in ("se", "cov"):
            continue
        label, style = MODE_STYLE[mode]
        ax.plot(x, [r[j] for r in rows], style, marker=".", label=label)
        ylabel = "mean SE (bit/s/Hz)" if prefix == "se" else "coverage probability"
    ax.set_xlabel(AXIS_LABELS.get(header[0], header[0]))
    if ylabel:
        ax.set_ylabel(ylabel)
    if ylabel == "coverage probability":
        ax.set_ylim(-0.02, 1.02)
    ax.grid(True, alpha=0.3)
    ax.legend()
    if title:
        ax.set_title(title)
    fig.tight_layout()
    _save(fig, path)


def plot_cdf(header, rows, path, title=""):
    """Empirical SE CDFs from a rank-aligned ``cum_prob, se_<mode>...`` table."""
    rows = [list(r) for r in rows]
    fig = Figure(figsize=(6.0, 4.0))
    ax = fig.add_subplot()
    prob = [r[0] for r in rows]
    for j, col in enumerate(header[1:], start=1):
        label, style = MODE_STYLE.get(_split(col)[1], (col, "-"))
        ax.step([r[j] for r in rows], prob, style, where="post", label=label)
    ax.set_xlabel("SE (bit/s/Hz)")
    ax.set_ylabel("CDF")
    ax.grid(True, alpha=0.3)
    ax.legend()
    if title:
        ax.set_title(title)
    fig.tight_layout()
    _save(fig, path)
