from __future__ import annotations

import json

from dynamic_horizon.runtime.event_bus import EventBus, publish
from dynamic_horizon.storage.event_log import jsonl_sink


def test_events_append_as_json_lines(tmp_path):
    path = tmp_path / "logs" / "events.jsonl"
    bus = EventBus(run_id="sweep")
    bus.register_sink(jsonl_sink(path))
    bus.publish(event_type="window.started", stage="walk_forward", message="window 0", payload={"window": 0})
    bus.publish(event_type="sweep.point_failed", stage="sweep", message="boom", severity="fatal", run_id="point-3")

    rows = [json.loads(line) for line in path.read_text().splitlines()]
    assert [row["event_type"] for row in rows] == ["window.started", "sweep.point_failed"]
    assert rows[0]["run_id"] == "sweep"
    assert rows[0]["payload"] == {"window": 0}
    assert rows[1]["run_id"] == "point-3"
    assert rows[1]["severity"] == "info"
    assert rows[1]["created_at"]


def test_failing_sink_does_not_stop_other_sinks():
    seen: list[dict] = []

    def broken(row: dict) -> None:
        raise OSError("disk full")

    bus = EventBus()
    bus.register_sink(broken)
    bus.register_sink(seen.append)
    bus.register_sink(seen.append)
    row = bus.publish(event_type="labels.calibrated", stage="labeling", message="beta=0.67")
    assert seen == [row]

    bus.remove_sink(seen.append)
    publish(bus, event_type="labels.calibrated", stage="labeling", message="again")
    publish(None, event_type="ignored", stage="none", message="no bus")
    assert len(seen) == 1
