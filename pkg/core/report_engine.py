# core/report_engine.py

from pathlib import Path

from reportlab.lib import colors
from reportlab.lib.pagesizes import A4
from reportlab.lib.styles import getSampleStyleSheet
from reportlab.platypus import (
    PageBreak,
    Paragraph,
    SimpleDocTemplate,
    Spacer,
    Table,
    TableStyle,
)

from config.numerics import REPORT_SIGNIFICANT_DIGITS
from core.experiment_runner import ExperimentReport


class ReportEngineError(Exception):
    """Custom exception for report generation errors."""
    pass


TABLE_STYLE = TableStyle([
    ("GRID", (0, 0), (-1, -1), 0.5, colors.black),
    ("BACKGROUND", (0, 0), (-1, 0), colors.lightgrey),
    ("FONTSIZE", (0, 0), (-1, -1), 8),
])

ROWS_PER_PAGE = 40


def _cell(value):
    if isinstance(value, float):
        return f"{value:.{REPORT_SIGNIFICANT_DIGITS}g}"
    if value is None:
        return "-"
    return str(value)


def render(report: ExperimentReport, as_json: bool = False) -> str:
    return report.to_json() if as_json else report.to_csv()


def write_report(report: ExperimentReport, out: Path | None, as_json: bool = False) -> str:
    """Render the report; write it to `out` when given. Returns the text."""
    text = render(report, as_json)
    if out is not None:
        try:
            Path(out).write_text(text)
        except OSError as e:
            raise ReportEngineError(f"Cannot write report to {out}: {e}")
    return text


def generate_pdf_report(report: ExperimentReport, output_file: Path) -> Path:
    """
    Render an experiment report as a PDF.

    Parameters
    ----------
    report : ExperimentReport
        Any experiment, check or analysis report.
    output_file : Path
        Destination; parent directories are created.

    Returns
    -------
    Path
        Path to generated PDF file.
    """
    output_file = Path(output_file)
    try:
        output_file.parent.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise ReportEngineError(f"Cannot create {output_file.parent}: {e}")

    styles = getSampleStyleSheet()
    story = []

    # ---------------------------
    # PAGE 1 — HEADER & METADATA
    # ---------------------------
    story.append(Paragraph(f"<b>Experiment report: {report.experiment}</b>", styles["Title"]))
    story.append(Spacer(1, 12))

    reference = (
        "-" if report.limit_reference is None else _cell(float(report.limit_reference))
    )
    meta_table_data = [
        ["Field", "Value"],
        ["Experiment", report.experiment],
        ["Rows", str(len(report.rows))],
        ["Limit reference", reference],
        ["Provenance", report.limit_provenance],
    ]
    for key, value in report.metadata.items():
        text = str(value)
        meta_table_data.append([key, text if len(text) <= 80 else text[:77] + "..."])

    meta_table = Table(meta_table_data, colWidths=[140, 340])
    meta_table.setStyle(TABLE_STYLE)
    story.append(meta_table)
    story.append(PageBreak())

    # ---------------------------
    # PAGE 2+ — VALUES
    # ---------------------------
    header = ["index", "quotient_size", *report.columns]
    body = [
        [_cell(index), _cell(size), *(_cell(values.get(c)) for c in report.columns)]
        for index, size, values in report.rows
    ]

    if not body:
        story.append(Paragraph("No rows (all tower indices exceeded the size cap).",
                               styles["Normal"]))
    for start in range(0, len(body), ROWS_PER_PAGE):
        story.append(Paragraph("<b>Values</b>", styles["Heading2"]))
        story.append(Spacer(1, 12))
        values_table = Table([header, *body[start:start + ROWS_PER_PAGE]], repeatRows=1)
        values_table.setStyle(TABLE_STYLE)
        story.append(values_table)
        if start + ROWS_PER_PAGE < len(body):
            story.append(PageBreak())

    # ---------------------------
    # BUILD PDF
    # ---------------------------
    doc = SimpleDocTemplate(
        str(output_file),
        pagesize=A4,
        rightMargin=36,
        leftMargin=36,
        topMargin=36,
        bottomMargin=36,
    )

    try:
        doc.build(story)
    except Exception as e:
        raise ReportEngineError(f"PDF generation failed: {e}")

    return output_file
