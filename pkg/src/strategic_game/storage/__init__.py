from .report_store import CsvTable, ReportBundle, ReportStore, provenance_label, render_table

__all__ = ["CsvTable", "ReportBundle", "ReportStore", "provenance_label", "render_table"]
