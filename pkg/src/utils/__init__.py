"""Utility functions for Name Evolution Miner"""

from .converters import (
    histogram_to_csv,
    render_text_table,
    report_to_document,
)
from .error_handler import ErrorHandler

__all__ = [
    'histogram_to_csv',
    'render_text_table',
    'report_to_document',
    'ErrorHandler',
]
