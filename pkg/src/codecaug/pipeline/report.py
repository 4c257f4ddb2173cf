"""Experiment reports: accuracy matrices, derived statistics, rendering.

The accuracy matrix (training conditions x evaluation conditions, column
0 = uncoded) is the source of truth; every derived column is pure
arithmetic over it and can be recomputed exactly. Rendering is
deterministic: no timestamps, stable ordering, fixed float formatting.
"""

import csv
import io
import json
from dataclasses import asdict, dataclass

import numpy as np

from ..errors import PipelineError


def summarize_report(accuracies, reference_row=None) -> dict:
    """Derived statistics for an accuracy matrix.

    relative_decrease[r][c-1] = 100*(1 - acc[r][c]/acc[r][0]) per row;
    with reference_row given, relative_increase[c] compares the final
    row against the reference row per column, mean_relative_increase
    averages it over the codec (non-uncoded) columns, and
    min_accuracy_ratio_vs_uncoded is the final row's worst coded/uncoded
    ratio.
    """
    acc = np.asarray(accuracies, dtype=np.float64)
    if acc.ndim != 2 or acc.size == 0:
        raise PipelineError(f"accuracy matrix must be 2-D and non-empty, got shape {acc.shape}")
    if np.any(acc < 0) or np.any(acc > 1):
        raise PipelineError("accuracies must lie in [0, 1]")
    rows, cols = acc.shape

    relative_decrease = []
    for r in range(rows):
        if cols > 1 and acc[r, 0] == 0:
            raise PipelineError(f"zero reference accuracy in row {r}")
        relative_decrease.append(
            [100.0 * (1.0 - acc[r, c] / acc[r, 0]) for c in range(1, cols)]
        )

    relative_increase = None
    mean_relative_increase = None
    if reference_row is not None:
        if not 0 <= reference_row < rows:
            raise PipelineError(f"reference_row {reference_row} out of range")
        ref = acc[reference_row]
        if np.any(ref == 0):
            raise PipelineError("zero reference accuracy")
        last = acc[-1]
        relative_increase = [100.0 * (last[c] - ref[c]) / ref[c] for c in range(cols)]
        if cols > 1:
            mean_relative_increase = float(np.mean(relative_increase[1:]))

    min_ratio = None
    if cols > 1 and acc[-1, 0] > 0:
        min_ratio = float(np.min(acc[-1, 1:] / acc[-1, 0]))

    return {
        "relative_decrease": relative_decrease,
        "relative_increase": relative_increase,
        "mean_relative_increase": mean_relative_increase,
        "min_accuracy_ratio_vs_uncoded": min_ratio,
    }


@dataclass
class ExperimentReport:
    experiment: str  # "a" | "b"
    eval_conditions: list  # "none" first, then codec spec strings
    row_names: list
    accuracies: list  # rows x eval_conditions, plain floats
    reference_row: int = None
    odg: list = None  # per eval condition; None for the uncoded column
    fit_slope: float = None
    fit_intercept: float = None
    fit_r2: float = None
    per_seed: dict = None  # row name -> {seed: [accuracies]}
    derived: dict = None

    def matrix(self) -> np.ndarray:
        return np.asarray(self.accuracies, dtype=np.float64)

    def recompute_derived(self) -> dict:
        return summarize_report(self.accuracies, self.reference_row)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data) -> "ExperimentReport":
        return cls(**data)


def report_to_json(report: ExperimentReport) -> str:
    return json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n"


def report_from_json(text: str) -> ExperimentReport:
    return ExperimentReport.from_dict(json.loads(text))


def _fmt(x, digits=3):
    return "N/A" if x is None else f"{x:.{digits}f}"


def _render_csv(report: ExperimentReport) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["condition"] + list(report.eval_conditions))
    for name, row in zip(report.row_names, report.accuracies):
        writer.writerow([name] + [repr(float(a)) for a in row])
    derived = report.derived or report.recompute_derived()
    for name, row in zip(report.row_names, derived["relative_decrease"]):
        writer.writerow([f"relative_decrease[%]:{name}", ""] + [repr(float(v)) for v in row])
    if derived["relative_increase"] is not None:
        ref = report.row_names[report.reference_row]
        writer.writerow(
            [f"relative_increase_vs_{ref}[%]"] + [repr(float(v)) for v in derived["relative_increase"]]
        )
        if derived["mean_relative_increase"] is not None:
            writer.writerow(["mean_relative_increase[%]", repr(derived["mean_relative_increase"])])
    if derived["min_accuracy_ratio_vs_uncoded"] is not None:
        writer.writerow(
            ["min_accuracy_ratio_vs_uncoded", repr(derived["min_accuracy_ratio_vs_uncoded"])]
        )
    if report.odg is not None:
        writer.writerow(["mean_odg"] + ["" if v is None else repr(float(v)) for v in report.odg])
    return out.getvalue()


def _render_markdown_a(report: ExperimentReport) -> str:
    derived = report.derived or report.recompute_derived()
    acc = report.accuracies[0]
    odg = report.odg or [None] * len(acc)
    lines = [
        "| Condition | Mean ODG | Accuracy | Relative decrease [%] |",
        "|:---|---:|---:|---:|",
    ]
    for c, cond in enumerate(report.eval_conditions):
        dec = "N/A" if c == 0 else f"{derived['relative_decrease'][0][c - 1]:.1f}"
        lines.append(f"| {cond} | {_fmt(odg[c], 2)} | {acc[c]:.3f} | {dec} |")
    if report.fit_r2 is not None:
        lines.append("")
        lines.append(f"ODG vs accuracy linear fit: R^2 = {report.fit_r2:.2f}")
    return "\n".join(lines) + "\n"


def _render_markdown_b(report: ExperimentReport) -> str:
    derived = report.derived or report.recompute_derived()
    header = "| Index | Condition | " + " | ".join(report.eval_conditions) + " |"
    rule = "|---:|:---|" + "---:|" * len(report.eval_conditions)
    lines = [header, rule]
    for r, (name, row) in enumerate(zip(report.row_names, report.accuracies), start=1):
        cells = " | ".join(f"{a:.3f}" for a in row)
        lines.append(f"| {r} | {name} | {cells} |")
    if derived["relative_increase"] is not None:
        ref = report.row_names[report.reference_row]
        cells = " | ".join(f"{v:.1f}" for v in derived["relative_increase"])
        lines.append(f"| | relative increase from {ref} [%] | {cells} |")
        footer = []
        if derived["mean_relative_increase"] is not None:
            footer.append(
                f"mean relative increase over codec conditions: "
                f"{derived['mean_relative_increase']:.1f}%"
            )
        if derived["min_accuracy_ratio_vs_uncoded"] is not None:
            footer.append(
                f"final-row minimum coded/uncoded accuracy ratio: "
                f"{derived['min_accuracy_ratio_vs_uncoded']:.3f}"
            )
        if footer:
            lines.append("")
            lines.extend(footer)
    return "\n".join(lines) + "\n"


def render_report(report: ExperimentReport, fmt: str) -> str:
    """Render to "csv" (lossless repr floats), "json" (lossless), or
    "markdown" (rows = conditions, derived statistics as footer)."""
    if fmt == "json":
        return report_to_json(report)
    if fmt == "csv":
        return _render_csv(report)
    if fmt == "markdown":
        if report.experiment == "a":
            return _render_markdown_a(report)
        return _render_markdown_b(report)
    raise PipelineError(f"unknown report format {fmt!r}")


def write_report(report: ExperimentReport, out_dir):
    """Write report.json/csv/md (and scatter.csv for ODG reports)."""
    import os

    os.makedirs(out_dir, exist_ok=True)
    for fmt, name in (("json", "report.json"), ("csv", "report.csv"), ("markdown", "report.md")):
        with open(os.path.join(out_dir, name), "w", encoding="utf-8", newline="\n") as fh:
            fh.write(render_report(report, fmt))
    if report.odg is not None:
        from ..quality import write_scatter_csv

        pairs = [
            (cond, report.odg[c], report.accuracies[-1][c])
            for c, cond in enumerate(report.eval_conditions)
            if report.odg[c] is not None
        ]
        write_scatter_csv(os.path.join(out_dir, "scatter.csv"), pairs)
