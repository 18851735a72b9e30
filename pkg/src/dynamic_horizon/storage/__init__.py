"""Run artifacts: event log and report tables."""

from .event_log import append_event, jsonl_sink
from .reports import read_table, write_table

__all__ = ["append_event", "jsonl_sink", "read_table", "write_table"]
