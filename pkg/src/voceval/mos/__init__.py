"""Listening-test hosting and mean-opinion-score statistics."""

from .stats import MosSummary, format_mos, summarize, t_quantile_975

__all__ = ["MosSummary", "format_mos", "summarize", "t_quantile_975"]
