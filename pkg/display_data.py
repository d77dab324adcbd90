from typing import Any, Dict, List, Optional, Sequence

from prettytable import PrettyTable


class DisplayData:
    """Handles table formatting for command output."""

    def __init__(self, rows: Sequence[Dict[str, Any]], columns: Optional[List[str]] = None):
        self.rows = list(rows)
        self.columns = columns if columns is not None else (list(self.rows[0].keys()) if self.rows else [])

    @staticmethod
    def _cell(value: Any) -> str:
        if isinstance(value, complex):
            return f"{value.real:.10g}{value.imag:+.10g}i"
        if isinstance(value, float):
            return f"{value:.10g}"
        return str(value)

    def build_table(self, sort_by: Optional[str] = None) -> PrettyTable:
        """Table with the rows, optionally sorted by comma-separated column names."""
        table = PrettyTable()
        table.field_names = self.columns
        rows = self.rows
        if sort_by:
            sort_fields = [name.strip() for name in sort_by.split(',')]
            rows = sorted(rows, key=lambda row: tuple(row.get(name) for name in sort_fields))
        for row in rows:
            table.add_row([self._cell(row.get(name, "")) for name in self.columns])
        table.align = 'l'
        table.max_width = 100
        return table

    def display_table(self, title: Optional[str] = None, sort_by: Optional[str] = None) -> None:
        """Print the rows as a left aligned table."""
        table = self.build_table(sort_by)
        if title:
            table.title = title
        print(table)


def display_verify_report(results: List[Dict[str, Any]]) -> None:
    """PASS/FAIL per acceptance criterion with its runtime."""
    rows = [{"Criterion": r["criterion"],
             "Result": "PASS" if r["passed"] else "FAIL",
             "Seconds": round(r["seconds"], 2),
             "Detail": r["detail"]} for r in results]
    DisplayData(rows, ["Criterion", "Result", "Seconds", "Detail"]).display_table("Acceptance checks")
