"""Event bus for run/stage telemetry."""

from __future__ import annotations

from typing import Any, Callable

from ..schemas import RunEvent
from ..utils.filesystem import utc_now_iso

EventSink = Callable[[dict[str, Any]], None]


class EventBus:
    """Best-effort event bus.

    Events are forwarded to registered sinks (the JSONL event log in the CLI).
    Any sink failure is swallowed so that training cannot fail due to
    observability issues.
    """

    def __init__(self, *, run_id: str = "run") -> None:
        self.run_id = run_id
        self._sinks: list[EventSink] = []

    def register_sink(self, sink: EventSink) -> None:
        if sink not in self._sinks:
            self._sinks.append(sink)

    def remove_sink(self, sink: EventSink) -> None:
        self._sinks = [item for item in self._sinks if item != sink]

    def publish(
        self,
        *,
        event_type: str,
        stage: str,
        message: str,
        severity: str = "info",
        payload: dict[str, Any] | None = None,
        run_id: str | None = None,
    ) -> dict[str, Any]:
        envelope = RunEvent(
            event_type=event_type,
            run_id=run_id or self.run_id,
            stage=stage,
            message=message,
            severity=severity if severity in {"info", "warn", "error"} else "info",
            created_at=utc_now_iso(),
            payload=payload or {},
        )
        row = envelope.model_dump(mode="json")

        for sink in list(self._sinks):
            try:
                sink(row)
            except Exception:
                continue

        return row


def publish(bus: EventBus | None, **kwargs: Any) -> None:
    """Publish when a bus is present."""
    if bus is not None:
        bus.publish(**kwargs)
