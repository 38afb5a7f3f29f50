"""
Rich console rendering for run summaries and report comparisons

Everything goes to stderr; stdout carries JSON only.
"""

from typing import Any, Dict, Mapping, Optional

from rich.console import Console
from rich.panel import Panel
from rich.table import Table

from ..utils.logger import get_logger


def _fmt(value: Any, digits: int = 6) -> str:
    if value is None:
        return "-"
    if isinstance(value, float):
        return f"{value:.{digits}g}"
    return str(value)


class ReportRenderer:
    """Human-readable views of qubits reports"""

    def __init__(self, console: Optional[Console] = None):
        self.console = console or Console(stderr=True)
        self.logger = get_logger(__name__)

    def show_run(self, document: Mapping[str, Any]):
        """Panel with the headline numbers of a cluster/baseline report"""
        clusters = document.get("clusters") or {}
        lines = [
            f"[bold]kind:[/bold] {document.get('kind')}   [bold]n:[/bold] {document.get('n')}   "
            f"[bold]k:[/bold] {document.get('k')}",
            f"[bold]sizes:[/bold] {clusters.get('sizes')}",
            f"[bold]outliers:[/bold] {clusters.get('outlier_count')}",
        ]
        if "lambda1" in document:
            lines.append(
                f"[bold]lambda1:[/bold] {_fmt(document['lambda1'])}   "
                f"[bold]lambda2:[/bold] {_fmt(document['lambda2'])}"
            )
        energy = clusters.get("energy")
        if energy:
            lines.append(f"[bold]energy:[/bold] {_fmt(energy.get('total'), 10)}")
        if document.get("overlap") is not None:
            lines.append(f"[bold]overlap:[/bold] {_fmt(document['overlap'], 4)}")
        rmse = clusters.get("rmse")
        if rmse:
            shown = ", ".join(f"{label}: {_fmt(value, 4)}" for label, value in list(rmse.items())[:8])
            lines.append(f"[bold]rmse:[/bold] {shown}{' ...' if len(rmse) > 8 else ''}")

        self.console.print(Panel("\n".join(lines), title="qubits run", border_style="blue"))

    def show_comparison(self, comparison: Mapping[str, Any]):
        """Side-by-side table for ``eval``"""
        kinds = comparison.get("kinds", {})
        table = Table(title=f"dataset {str(comparison.get('dataset_digest'))[:12]}")
        table.add_column("Metric", style="cyan")
        table.add_column(f"A ({kinds.get('a')})", style="white")
        table.add_column(f"B ({kinds.get('b')})", style="white")
        table.add_column("B - A", style="magenta")

        sizes = comparison.get("sizes", {})
        table.add_row("sizes (sorted)", _fmt(sizes.get("sorted_a")), _fmt(sizes.get("sorted_b")), "")
        variance = sizes.get("population_variance", {})
        table.add_row("size variance", _fmt(variance.get("a")), _fmt(variance.get("b")), "")

        outliers = comparison.get("outlier_count", {})
        table.add_row("outliers", _fmt(outliers.get("a")), _fmt(outliers.get("b")), _fmt(outliers.get("delta")))

        overlap = comparison.get("overlap", {})
        table.add_row("overlap", _fmt(overlap.get("a"), 4), _fmt(overlap.get("b"), 4),
                      _fmt(overlap.get("delta"), 4))

        for term, values in (comparison.get("energy") or {}).items():
            if values.get("a") is None and values.get("b") is None:
                continue
            table.add_row(f"energy.{term}", _fmt(values.get("a")), _fmt(values.get("b")),
                          _fmt(values.get("delta")))

        for row in comparison.get("rmse") or []:
            table.add_row(f"rmse class {row['class']}", _fmt(row.get("a"), 4), _fmt(row.get("b"), 4),
                          _fmt(row.get("delta"), 4))

        self.console.print(table)

    def show_synth(self, summary: Dict[str, Any]):
        self.console.print(
            f"[green]Wrote {summary['n_frames']} frames of "
            f"{summary['frame_shape'][0]}x{summary['frame_shape'][1]} to {summary['output']}[/green]"
        )
