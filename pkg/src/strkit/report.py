"""Evaluation report rendering: aligned text, JSON, and chart files.

The text table and the JSON document carry the same numbers; the JSON keeps
full float precision while the table rounds for display. Figures are a
side output and are not covered by byte-determinism guarantees.
"""

from __future__ import annotations

import json
from pathlib import Path

from .fileio import atomic_write_text
from .metrics import EvalReport, PartitionStats

STYLES = ("ablation", "final")


def _pct(stats: PartitionStats) -> str:
    return f"{stats.crw * 100:.1f}" if stats.n_samples else "n/a"


def _ed_total(stats: PartitionStats) -> str:
    return str(stats.ed_total) if stats.n_samples else "n/a"


def _combined_pct(report: EvalReport) -> str:
    if report.iv.n_samples and report.oov.n_samples:
        return f"{report.combined_crw * 100:.1f}"
    return "n/a"


def _table(headers, row) -> str:
    widths = [max(len(h), len(v)) for h, v in zip(headers, row)]
    head = "  ".join(h.ljust(w) for h, w in zip(headers, widths)).rstrip()
    body = "  ".join(v.ljust(w) for v, w in zip(row, widths)).rstrip()
    return f"{head}\n{body}"


def format_report(report: EvalReport, style: str = "final") -> str:
    """Aligned text table; `ablation` shows overall CRW/mean-ED, `final`
    shows the per-partition breakdown plus the combined score."""
    if style not in STYLES:
        raise ValueError(f"style must be one of {STYLES}, got {style!r}")
    if style == "ablation":
        stats = report.overall
        med = f"{stats.ed_mean:.2f}" if stats.n_samples else "n/a"
        table = _table(("CRW", "mED"), (_pct(stats), med))
    else:
        table = _table(
            ("IV CRW", "IV ED", "OOV CRW", "OOV ED", "IV&OOV CRW"),
            (_pct(report.iv), _ed_total(report.iv), _pct(report.oov),
             _ed_total(report.oov), _combined_pct(report)),
        )
    counts = (
        f"samples: IV={report.iv.n_samples} OOV={report.oov.n_samples} "
        f"ALL={report.overall.n_samples}"
    )
    return f"{table}\n\n{counts}\nmissing predictions: {report.n_missing}\n"


def _stats_dict(stats: PartitionStats) -> dict:
    return {
        "n_samples": stats.n_samples,
        "n_correct": stats.n_correct,
        "crw": stats.crw,
        "ed_total": stats.ed_total,
        "ed_mean": stats.ed_mean,
    }


def structured_report(report: EvalReport, style: str = "final") -> dict:
    if style not in STYLES:
        raise ValueError(f"style must be one of {STYLES}, got {style!r}")
    return {
        "style": style,
        "iv": _stats_dict(report.iv),
        "oov": _stats_dict(report.oov),
        "all": _stats_dict(report.overall),
        "combined_crw": report.combined_crw,
        "n_missing": report.n_missing,
    }


def write_structured(report: EvalReport, path, style: str = "final") -> None:
    doc = structured_report(report, style)
    atomic_write_text(path, json.dumps(doc, indent=2, sort_keys=True) + "\n")


def render_figures(report: EvalReport, out_dir) -> list:
    """Bar charts for CRW and edit distance, written as PNG files.

    PNG text metadata is suppressed so reruns differ only if the numbers do.
    """
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    labels = ["IV", "OOV", "ALL"]
    parts = [report.iv, report.oov, report.overall]
    written = []

    fig, ax = plt.subplots(figsize=(4.5, 3.2))
    ax.bar(labels + ["combined"],
           [p.crw * 100 for p in parts] + [report.combined_crw * 100],
           color=["#4878d0", "#ee854a", "#6acc64", "#956cb4"])
    ax.set_ylabel("CRW (%)")
    ax.set_ylim(0, 100)
    ax.set_title("Word accuracy by partition")
    fig.tight_layout()
    crw_path = out_dir / "crw.png"
    fig.savefig(crw_path, metadata={"Software": None})
    plt.close(fig)
    written.append(crw_path)

    fig, ax = plt.subplots(figsize=(4.5, 3.2))
    ax.bar(labels, [p.ed_mean for p in parts], color="#d65f5f")
    ax.set_ylabel("mean edit distance")
    ax.set_title("Edit distance by partition")
    fig.tight_layout()
    ed_path = out_dir / "edit_distance.png"
    fig.savefig(ed_path, metadata={"Software": None})
    plt.close(fig)
    written.append(ed_path)

    return written
