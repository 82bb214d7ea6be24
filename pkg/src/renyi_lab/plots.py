"""Figure rendering for scan tables and campaign reports.

Import stays local to the report path: the library itself never pulls in
matplotlib.  The Agg backend keeps rendering headless; every function takes
an output path and writes a PNG next to the delimited output.
"""

from __future__ import annotations

import math

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be pinned first)

from .harness import CampaignReport, ScanResult


def plot_alpha_scan(result: ScanResult, path: str) -> str:
    """Line plot of both divergences against the order, log-x.

    The order-inf row becomes a horizontal asymptote; infinite values on
    finite orders are simply left out of the curves.
    """
    finite_rows = [
        (order, d, dp)
        for order, d, dp in zip(result.orders, result.d_values, result.d_prime_values)
        if not math.isinf(order)
    ]
    xs = [r[0] for r in finite_rows]
    sandwiched = [r[1] if not math.isinf(r[1]) else None for r in finite_rows]
    traditional = [
        r[2] if r[2] is not None and not math.isinf(r[2]) else None for r in finite_rows
    ]

    fig, ax = plt.subplots(figsize=(7.0, 4.5))
    ax.plot(xs, sandwiched, marker=".", lw=1.2, label="sandwiched")
    ax.plot(xs, traditional, marker=".", ms=3, lw=0.9, alpha=0.8, label="traditional")
    inf_value = result.d_values[-1]
    if not math.isinf(inf_value):
        ax.axhline(inf_value, color="gray", ls="--", lw=0.8, label="order-inf limit")
    ax.axvline(1.0, color="black", lw=0.5, alpha=0.4)
    ax.set_xscale("log")
    ax.set_xlabel("order")
    ax.set_ylabel("divergence (nats)")
    ax.legend(frameon=False, fontsize=9)
    ax.set_title("Renyi divergence order scan")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def plot_campaign_margins(report: CampaignReport, path: str) -> str:
    """Bar chart of worst finite margins per group, with the tolerance line."""
    labels = list(report.groups.keys())
    margins = []
    for stats in report.groups.values():
        value = stats.get("min_margin")
        margins.append(0.0 if value is None or isinstance(value, str) else value)

    fig, ax = plt.subplots(figsize=(max(5.0, 1.1 * len(labels) + 2.0), 4.0))
    colors = ["tab:red" if m < 0 else "tab:blue" for m in margins]
    ax.bar(range(len(labels)), margins, color=colors)
    tol = report.config.get("tolerance")
    if tol:
        ax.axhline(-tol, color="tab:red", ls="--", lw=0.8, label=f"-tolerance ({tol:g})")
        ax.legend(frameon=False, fontsize=9)
    ax.axhline(0.0, color="black", lw=0.6)
    ax.set_xticks(range(len(labels)))
    ax.set_xticklabels(labels, rotation=30, ha="right", fontsize=8)
    ax.set_ylabel("worst finite margin")
    status = "pass" if report.passed else "FAIL"
    ax.set_title(f"{report.claim}: {report.instances} instances, {status}")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
