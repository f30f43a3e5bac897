"""
Fixed-width text tables for a RunReport.

Rates print as "0.55 (0.02)": two decimals rounded half away from zero, standard
error in parentheses. A cell with no valid trials prints as "—", never as 0.00.
Output depends on nothing but the report, so rendered files are byte-stable.
"""

from decimal import ROUND_HALF_UP, Decimal
from typing import Optional, Sequence

from pipelines.report_model import ALL, CurvePoint, RateCell, ReportKind, RunReport

EMPTY = "—"
LABEL_WIDTH = 16
CELL_WIDTH = 14
CURVE_WIDTH = 8
OVERALL = "Overall"
POOLED = "All models"

_CENT = Decimal("0.01")


def fmt2(value: float) -> str:
    return str(Decimal(repr(float(value))).quantize(_CENT, rounding=ROUND_HALF_UP))


def rate_text(cell: Optional[RateCell]) -> str:
    if cell is None or cell.rate is None:
        return EMPTY
    return f"{fmt2(cell.rate.scaled_rate)} ({fmt2(cell.rate.se)})"


def accuracy_text(cell: Optional[RateCell]) -> str:
    if cell is None or cell.rate is None:
        return EMPTY
    return f"{fmt2(cell.rate.raw_accuracy)} ({fmt2(cell.rate.se)})"


def _line(label: str, cells: Sequence[str], width: int = CELL_WIDTH) -> str:
    return f"{label:<{LABEL_WIDTH}}" + "".join(f"{cell:>{width}}" for cell in cells)


def _table(title: str, header: Sequence[str], rows: Sequence[tuple[str, Sequence[str]]], width: int = CELL_WIDTH) -> list[str]:
    lines = [title, "", _line("Model", header, width)]
    lines.extend(_line(label, cells, width) for label, cells in rows)
    return lines


def _task_text(report: RunReport, model_id: str, task: str) -> str:
    cell = report.row(model_id, task)
    return accuracy_text(cell) if task == "Define" else rate_text(cell)


def _domain_table(report: RunReport, title: str, task: str) -> list[str]:
    rows = []
    for model_id, label in [(m, m) for m in report.model_ids] + [(ALL, OVERALL)]:
        cells = [rate_text(report.row(model_id, task, domain)) for domain in report.domains]
        cells.append(rate_text(report.row(model_id, task)))
        rows.append((label, cells))
    return _table(title, [*report.domains, OVERALL], rows)


def _domain_task_table(report: RunReport, title: str, tasks: Sequence[str]) -> list[str]:
    rows = []
    for domain in report.domains:
        rows.append((domain, []))
        for model_id, label in [(m, m) for m in report.model_ids] + [(ALL, POOLED)]:
            rows.append((f"  {label}", [rate_text(report.row(model_id, task, domain)) for task in tasks]))
    rows.append((OVERALL, [rate_text(report.row(ALL, task)) for task in tasks]))
    lines = [title, "", _line("Domain / Model", tasks)]
    lines.extend(_line(label, cells) if cells else label for label, cells in rows)
    return lines


def render_benchmark(report: RunReport) -> str:
    rows = [(m, [_task_text(report, m, task) for task in report.tasks]) for m in report.model_ids]
    rows.append((OVERALL, [_task_text(report, ALL, task) for task in report.tasks]))
    lines = _table("Potemkin rates given a correct definition (standard errors in parentheses)", report.tasks, rows)
    lines += ["", "Define shows definition accuracy over every concept.", ""]
    lines += _domain_task_table(report, "Potemkin rate by domain (standard errors in parentheses)", [task for task in report.tasks if task != "Define"])
    return "\n".join(lines) + "\n"


def render_domains(report: RunReport, title: str) -> str:
    return "\n".join(_domain_table(report, title, report.tasks[0])) + "\n"


def _curve_rows(curves: Sequence[CurvePoint], model_ids: Sequence[str], field: str) -> list[tuple[str, list[str]]]:
    rows = []
    for model_id, label in [(m, m) for m in model_ids] + [(ALL, POOLED)]:
        points = sorted((p for p in curves if p.model_id == model_id), key=lambda p: p.k)
        if field == "value":
            rows.append((label, [EMPTY if p.value is None else fmt2(p.value) for p in points]))
        else:
            rows.append((label, [str(p.contributing) for p in points]))
    return rows


def render_expansion(report: RunReport) -> str:
    ks = sorted({p.k for p in report.curves})
    header = [f"k={k}" for k in ks]
    lines = _table(
        "Keystone expansion: share of keystone-passing concepts understood",
        header,
        _curve_rows(report.curves, report.model_ids, "value"),
        CURVE_WIDTH,
    )
    lines.append("")
    lines += _table(
        "Concepts passing the keystone",
        header,
        _curve_rows(report.curves, report.model_ids, "contributing"),
        CURVE_WIDTH,
    )
    return "\n".join(lines) + "\n"


def render_report(report: RunReport) -> str:
    if report.kind == ReportKind.BENCHMARK:
        return render_benchmark(report)
    if report.kind == ReportKind.EXPANSION:
        return render_expansion(report)
    if report.kind == ReportKind.INCOHERENCE:
        return render_domains(report, "Incoherence scores (standard errors in parentheses)")
    return render_domains(report, "Automatic potemkin rate, a lower bound (standard errors in parentheses)")
