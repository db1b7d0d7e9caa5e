"""Streaming reader for time-stamped rating logs.

Accepted formats: UTF-8 CSV with header ``item_id,user_id,rating,timestamp``,
or JSON lines carrying the same field names. Events are grouped by item and
sorted by timestamp; equal timestamps keep their input order.
"""

import csv
import json
from pathlib import Path
from typing import Dict, Iterable, Iterator, List, Tuple, Union

from pydantic import ValidationError

from app.exceptions import ParseError
from app.logger import logger
from app.schema import ItemHistory, RatingEvent, RatingScale


FIELDS = ("item_id", "user_id", "rating", "timestamp")

PathLike = Union[str, Path]


def _parse_int(value, field: str, line: int) -> int:
    try:
        if isinstance(value, bool):
            raise ValueError
        if isinstance(value, float) and not value.is_integer():
            raise ValueError
        return int(value)
    except (TypeError, ValueError):
        raise ParseError(f"{field} must be an integer, got {value!r}", line) from None


def _to_event(record: dict, scale: RatingScale, line: int) -> RatingEvent:
    missing = [field for field in FIELDS if record.get(field) in (None, "")]
    if missing:
        raise ParseError(f"missing field(s) {', '.join(missing)}", line)
    rating = scale.check_rating(_parse_int(record["rating"], "rating", line), line)
    try:
        return RatingEvent(
            item_id=str(record["item_id"]),
            user_id=str(record["user_id"]),
            rating=rating,
            timestamp=_parse_int(record["timestamp"], "timestamp", line),
        )
    except ValidationError as e:
        raise ParseError(e.errors()[0]["msg"], line) from None


def _csv_records(lines: Iterable[str]) -> Iterator[Tuple[int, dict]]:
    reader = csv.DictReader(lines)
    if reader.fieldnames is None:
        return
    header = [name.strip() for name in reader.fieldnames]
    if tuple(header) != FIELDS:
        raise ParseError(f"expected header {','.join(FIELDS)}, got {','.join(header)}", 1)
    reader.fieldnames = header
    for record in reader:
        if None in record:
            raise ParseError("too many columns", reader.line_num)
        yield reader.line_num, record


def _jsonl_records(lines: Iterable[str]) -> Iterator[Tuple[int, dict]]:
    for line_number, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as e:
            raise ParseError(f"invalid JSON: {e.msg}", line_number) from None
        if not isinstance(record, dict):
            raise ParseError("each line must be a JSON object", line_number)
        yield line_number, record


def iter_events(
    lines: Iterable[str], scale: RatingScale, fmt: str = "csv"
) -> Iterator[RatingEvent]:
    """Parse rating events one record at a time."""
    records = _jsonl_records(lines) if fmt == "jsonl" else _csv_records(lines)
    for line_number, record in records:
        yield _to_event(record, scale, line_number)


def group_events(events: Iterable[RatingEvent]) -> Dict[str, ItemHistory]:
    """Group events by item, ordered by item id, each history time-sorted."""
    grouped: Dict[str, List[RatingEvent]] = {}
    for event in events:
        grouped.setdefault(event.item_id, []).append(event)

    histories = {}
    for item_id in sorted(grouped):
        # list.sort is stable, so equal timestamps keep their input order
        ordered = sorted(grouped[item_id], key=lambda e: e.timestamp)
        histories[item_id] = ItemHistory(
            item_id=item_id,
            ratings=tuple(e.rating for e in ordered),
            timestamps=tuple(e.timestamp for e in ordered),
            user_ids=tuple(e.user_id for e in ordered),
        )
    return histories


def detect_format(path: PathLike) -> str:
    return "jsonl" if Path(path).suffix.lower() in (".jsonl", ".json", ".ndjson") else "csv"


def ingest(
    source: Union[PathLike, Iterable[str]], scale: RatingScale, fmt: str = None
) -> Dict[str, ItemHistory]:
    """Read a rating log into per-item sorted histories.

    ``source`` is a file path or any iterable of text lines (an open file, a
    list of strings). The format is taken from the file suffix unless given.
    """
    if isinstance(source, (str, Path)):
        fmt = fmt or detect_format(source)
        with open(source, newline="", encoding="utf-8-sig") as f:
            histories = group_events(iter_events(f, scale, fmt))
        logger.info(f"Ingested {len(histories)} items from {source}")
        return histories
    return group_events(iter_events(source, scale, fmt or "csv"))
