"""Report figures (matplotlib, Agg backend, fixed metadata for byte-stable PNGs)."""

from __future__ import annotations

from pathlib import Path
from typing import Dict, List, Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

PNG_META = {"Software": None}


def _save(fig, path: Path) -> str:
    fig.tight_layout()
    fig.savefig(path, format="png", dpi=100, metadata=PNG_META)
    plt.close(fig)
    return path.name


def _as_float(v) -> float:
    if isinstance(v, str) and "/" in v:
        num, den = v.split("/")
        return int(num) / int(den)
    return float(v)


def agreement_histogram(values: Sequence[float], bar: float, path: Path) -> str:
    fig, ax = plt.subplots(figsize=(5, 3.2))
    ax.hist(values, bins=40, color="#4c72b0")
    ax.axvline(bar, color="#c44e52", lw=1, label="chance")
    ax.set_xlabel("agreement with target")
    ax.set_ylabel("trials")
    ax.legend(frameon=False)
    return _save(fig, path)


def hybrid_curve(summary: Dict, path: Path) -> str:
    hybrids = summary["hybrids"]
    xs = [h["i"] for h in hybrids]
    ys = [_as_float(h["prob"]) for h in hybrids]
    err = [h.get("halfwidth") or 0.0 for h in hybrids]
    fig, ax = plt.subplots(figsize=(5, 3.2))
    ax.errorbar(xs, ys, yerr=err, marker="o", ms=3, capsize=2)
    ax.set_xlabel("hybrid index i")
    ax.set_ylabel("Pr[p_i = 1]")
    return _save(fig, path)


def dichotomy_bars(report: Dict, path: Path) -> str:
    fig, ax = plt.subplots(figsize=(4, 3))
    counts = [report.get("G0_size", 0), report.get("G1_size", 0), report["outcomes"].count("FAIL")]
    ax.bar(["G0", "G1", "FAIL"], counts, color=["#55a868", "#4c72b0", "#c44e52"])
    ax.axhline(report["largeness_bound"], color="k", lw=0.8, ls="--")
    ax.set_ylabel("functions")
    return _save(fig, path)


def render_report(out_dir: Path, agreements: Dict[str, List[float]], summaries: List[Dict],
                  dichotomies: List[Dict]) -> List[str]:
    names = []
    for k, (src, values) in enumerate(sorted(agreements.items())):
        if values:
            names.append(agreement_histogram(values, 0.5, out_dir / f"agreement_{k}.png"))
    for k, s in enumerate(summaries):
        if s.get("hybrids"):
            names.append(hybrid_curve(s, out_dir / f"hybrids_{k}.png"))
    for k, d in enumerate(dichotomies):
        if "outcomes" in d:
            names.append(dichotomy_bars(d, out_dir / f"dichotomy_{k}.png"))
    return names
