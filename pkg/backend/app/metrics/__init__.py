"""
Network outcome measures, directed modularity and the metrics table.
"""

from .analyze import COLUMNS, MetricRecord, MetricsTable, analyze_checkpoint

__all__ = ["COLUMNS", "MetricRecord", "MetricsTable", "analyze_checkpoint"]
