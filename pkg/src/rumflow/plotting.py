"""Interval charts from a bounds CSV.

Kept apart from the library: only this module imports matplotlib, which is an
optional extra (``pip install .[plot]``).

    python -m rumflow.plotting bounds.csv bounds.png
"""

from __future__ import annotations

import csv
import sys

from .model import to_fraction


def read_rows(path) -> list:
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


def render_intervals(rows, path):
    """One horizontal bar per pair: the sharp interval over the naive one when present."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    labels = [f"{r['menu']} : {r['alternative']}" for r in rows]
    fig, ax = plt.subplots(figsize=(7, 0.35 * len(rows) + 1.2))
    labelled = set()

    def once(name):
        if name in labelled:
            return None
        labelled.add(name)
        return name

    for i, r in enumerate(rows):
        if r.get("naive_lower"):
            lo, hi = float(to_fraction(r["naive_lower"])), float(to_fraction(r["naive_upper"]))
            ax.plot([lo, hi], [i + 0.15, i + 0.15], color="tab:red", lw=3, label=once("naive"))
        lo, hi = float(to_fraction(r["lower"])), float(to_fraction(r["upper"]))
        ax.plot([lo, hi], [i - 0.15, i - 0.15], color="tab:blue", lw=3, marker="|", label=once("sharp"))
    ax.set_yticks(range(len(rows)))
    ax.set_yticklabels(labels)
    ax.set_xlim(-0.02, 1.02)
    ax.set_xlabel("choice frequency")
    ax.invert_yaxis()
    if ax.get_legend_handles_labels()[0]:
        ax.legend(loc="lower right")
    fig.tight_layout()
    # fixed metadata keeps repeated renders identical
    fig.savefig(path, metadata={"Software": None} if str(path).endswith(".png") else None)
    plt.close(fig)


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    if len(argv) != 2:
        sys.stderr.write("usage: python -m rumflow.plotting BOUNDS.csv OUT.png\n")
        return 2
    render_intervals(read_rows(argv[0]), argv[1])
    return 0


if __name__ == "__main__":
    sys.exit(main())
