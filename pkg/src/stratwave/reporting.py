"""Machine-readable run outputs: CSV data, JSON summaries, and figures.

CSV numbers are written with repr-faithful formatting so that a repeated run
with the same configuration is byte-identical.  Figures are matplotlib
renderings of the CSV contents; no verdict depends on them.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

__all__ = [
    "fmt",
    "write_csv",
    "write_json",
    "decay_figure",
    "witness_figure",
]


def fmt(value) -> str:
    """Stable scalar formatting for CSV cells."""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    return str(value)


def write_csv(path, header: list[str], rows) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([fmt(v) for v in row])
    return path


def write_json(path, payload: dict) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True, default=_json_default)
        fh.write("\n")
    return path


def _json_default(obj):
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    raise TypeError(f"not JSON serializable: {type(obj)}")


def _mpl():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def decay_figure(path, report, title: str | None = None) -> Path:
    """Log-log sup-modulus vs t with the fitted and theoretical slopes."""
    plt = _mpl()
    t = np.asarray(report.t_kept)
    y = np.asarray(report.sup_modulus)
    fig, ax = plt.subplots(figsize=(6.0, 4.2))
    ax.loglog(t, y, "o", color="tab:blue", label="sup |kernel|")
    anchor = y[0]
    ax.loglog(t, anchor * (t / t[0]) ** report.slope, "-", color="tab:blue", alpha=0.7,
              label=f"fit slope {report.slope:+.3f} ± {report.slope_ci:.3f}")
    ax.loglog(t, anchor * (t / t[0]) ** report.theory_slope, "--", color="tab:red", alpha=0.8,
              label=f"theory slope {report.theory_slope:+.3f}")
    ax.set_xlabel("t")
    ax.set_ylabel("sup over Z of |kernel|")
    ax.set_title(title or report.spec_name)
    ax.legend(frameon=False, fontsize=9)
    ax.grid(True, which="both", alpha=0.25)
    fig.tight_layout()
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def witness_figure(path, result, title: str | None = None) -> Path:
    plt = _mpl()
    t = np.asarray(result.ts)
    y = np.asarray(result.moduli)
    fig, ax = plt.subplots(figsize=(6.0, 4.2))
    ax.loglog(t, y, "s", color="tab:green", label="|witness|")
    if result.classification == "power-law":
        ax.loglog(t, y[0] * (t / t[0]) ** result.exponent, "-", color="tab:green", alpha=0.7,
                  label=f"fit slope {result.exponent:+.3f}")
    else:
        ax.axhline(y[0], linestyle="-", color="tab:green", alpha=0.7, label="constant")
    ax.set_xlabel("t")
    ax.set_ylabel("|witness value|")
    ax.set_title(title or f"{result.spec_name} ({result.kind})")
    ax.legend(frameon=False, fontsize=9)
    ax.grid(True, which="both", alpha=0.25)
    fig.tight_layout()
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
