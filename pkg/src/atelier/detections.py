"""Detections interchange CSV and the retained-detection post-processing filter."""

from __future__ import annotations

import csv
import io
import re

from .model import BoundingBox, DetectionFilterConfig, DetectionRecord

DETECTIONS_HEADER = ["image_id", "raw_label", "confidence", "ymin", "xmin", "ymax", "xmax"]


class DetectionsFormatError(ValueError):
    """Raised when the detections CSV is structurally unusable (header/encoding)."""


def normalize_label(raw: str) -> str:
    """Canonicalize a detector label: trim, lowercase, spaces and slashes to underscores."""
    s = raw.strip().lower().replace("/", "_")
    return re.sub(r"\s+", "_", s)


def parse_detections_csv(content: bytes) -> tuple[list[DetectionRecord], list[str]]:
    """Parse interchange CSV into records; rows breaking invariants are skipped and reported."""
    try:
        text = content.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise DetectionsFormatError(f"not UTF-8: {exc}") from exc
    reader = csv.DictReader(io.StringIO(text))
    if reader.fieldnames is None:
        raise DetectionsFormatError("missing header")
    if list(reader.fieldnames) != DETECTIONS_HEADER:
        missing = set(DETECTIONS_HEADER) - set(reader.fieldnames)
        if missing:
            raise DetectionsFormatError(f"missing header column(s): {', '.join(sorted(missing))}")
        raise DetectionsFormatError(
            f"unexpected header {reader.fieldnames!r}, want {DETECTIONS_HEADER!r}"
        )

    records: list[DetectionRecord] = []
    issues: list[str] = []
    for row_no, row in enumerate(reader, start=2):
        try:
            confidence = float(row["confidence"])
            box = BoundingBox(
                ymin=float(row["ymin"]),
                xmin=float(row["xmin"]),
                ymax=float(row["ymax"]),
                xmax=float(row["xmax"]),
            )
        except (TypeError, ValueError):
            issues.append(f"row {row_no}: non-numeric confidence or coordinate")
            continue
        if not row["image_id"]:
            issues.append(f"row {row_no}: image_id: empty")
            continue
        if not 0.0 <= confidence <= 1.0:
            issues.append(f"row {row_no}: confidence out of [0,1]: {confidence}")
            continue
        if not box.is_valid():
            issues.append(f"row {row_no}: invalid bounding box {box}")
            continue
        records.append(
            DetectionRecord(
                image_id=row["image_id"],
                label=normalize_label(row["raw_label"]),
                raw_label=row["raw_label"],
                confidence=confidence,
                box=box,
            )
        )
    return records, issues


def _fmt(value: float) -> str:
    return repr(value)


def serialize_detections_csv(records: list[DetectionRecord]) -> bytes:
    """Emit the interchange CSV; deterministic for a fixed input order."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(DETECTIONS_HEADER)
    for r in records:
        writer.writerow(
            [
                r.image_id,
                r.raw_label,
                _fmt(r.confidence),
                _fmt(r.box.ymin),
                _fmt(r.box.xmin),
                _fmt(r.box.ymax),
                _fmt(r.box.xmax),
            ]
        )
    return buf.getvalue().encode("utf-8")


def filter_detections(
    records: list[DetectionRecord], config: DetectionFilterConfig = DetectionFilterConfig()
) -> list[DetectionRecord]:
    """Keep, per image, the top-confidence detections above the floor.

    Output is grouped by image in first-appearance order; within an image,
    descending confidence with ties broken by input order then label.
    """
    by_image: dict[str, list[tuple[int, DetectionRecord]]] = {}
    for pos, rec in enumerate(records):
        by_image.setdefault(rec.image_id, []).append((pos, rec))

    out: list[DetectionRecord] = []
    for image_id, entries in by_image.items():
        kept = [
            (pos, rec)
            for pos, rec in entries
            if rec.confidence >= config.min_confidence and rec.label not in config.label_blocklist
        ]
        kept.sort(key=lambda pr: (-pr[1].confidence, pr[0], pr[1].label))
        out.extend(rec for _, rec in kept[: config.max_per_image])
    return out
