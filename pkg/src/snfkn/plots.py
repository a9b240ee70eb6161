"""Figure rendering for verification sweeps.

One PNG per suite run, written next to the CSV.  The CSV remains the asserted
contract; figures are a convenience view of the same rows.
"""
from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .verify import SuiteResult

__all__ = ["render_suite_png"]


def _numeric_columns(result: SuiteResult):
    cols = []
    for k, name in enumerate(result.columns):
        vals = [row[k] for row in result.rows]
        if all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in vals):
            cols.append((name, [float(v) for v in vals]))
    return cols

def render_suite_png(result: SuiteResult, path: str) -> None:
    numeric = _numeric_columns(result)
    if not numeric:
        return
    x_name, x_vals = numeric[0]
    series = numeric[1:] or numeric
    fig, ax = plt.subplots(figsize=(7.0, 4.5))
    if result.suite == "tightness-tradeoff":
        # The crossover curves are the whole point here.
        by_name = dict(numeric)
        ax.plot(by_name["delta"], by_name["dict_distance"], "o-", label="to best dictator")
        ax.plot(by_name["delta"], by_name["dict_bracket"], "--", label="min(delta, eps/delta)")
        ax.plot(by_name["delta"], by_name["const_distance"], "s-", label="to best constant")
        ax.plot(by_name["delta"], by_name["const_bracket"], ":", label="delta + eps/delta")
        ax.set_xlabel("delta")
        ax.set_ylabel("squared L2 distance")
    else:
        for name, vals in series:
            if name == x_name:
                continue
            ax.plot(x_vals, vals, marker=".", linestyle="-", linewidth=0.8, label=name)
        ax.set_xlabel(x_name)
    ax.set_title(f"{result.suite} ({'pass' if result.passed else 'FAIL'})")
    ax.legend(loc="best", fontsize=8)
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=110)
    plt.close(fig)
