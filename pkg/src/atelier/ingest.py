"""Metadata CSV parsing/serialization, field normalization, and image matching."""

from __future__ import annotations

import csv
import io
import re
from dataclasses import dataclass, field

from .model import ArtworkRecord, LocationType, Source, validate_record

METADATA_HEADER = [
    "id",
    "title",
    "artist",
    "year_min",
    "year_max",
    "location_name",
    "location_type",
    "latitude",
    "longitude",
    "source",
    "source_url",
    "copyright",
    "image_path",
    "phash",
]

# Accepted year expressions (after trimming, optional "ca."/"circa" prefix):
#   "1944"            -> [1944, 1944]
#   "1943-1944"       -> [1943, 1944]   (hyphen or en dash, spaces allowed)
# Anything else yields no year plus an issue; never a guess.
_YEAR_RE = re.compile(r"^(?:ca\.?|circa)?\s*(\d{3,4})(?:\s*[-–]\s*(\d{3,4}))?$", re.IGNORECASE)

_SOURCE_ALIASES = {
    "ushmm": Source.USHMM,
    "joods": Source.JOODS,
    "joods cultureel kwartier": Source.JOODS,
    "niod": Source.NIOD,
    "niod beeldbank": Source.NIOD,
    "other": Source.OTHER,
}


class MetadataFormatError(ValueError):
    """Raised when the metadata CSV is structurally unusable (header/encoding)."""


@dataclass(frozen=True)
class IngestReport:
    n_rows_read: int = 0
    n_records_ok: int = 0
    issues: list = field(default_factory=list)  # (row number, field, message)
    unmatched_records: list = field(default_factory=list)
    unmatched_files: list = field(default_factory=list)


@dataclass(frozen=True)
class ImageMatchReport:
    matched_ids: list
    unmatched_records: list
    unmatched_files: list


@dataclass
class RecordDraft:
    """Pre-normalization record with raw string fields, as produced by harvesting."""

    id: str = ""
    title: str = ""
    artist: str = ""
    year: str = ""
    location_name: str = ""
    location_type: str = ""
    source: str = ""
    source_url: str = ""
    copyright: str = ""
    image_path: str = ""


def _clean(text: str) -> str:
    return re.sub(r"\s+", " ", text).strip()


def parse_year_expression(raw: str) -> tuple[int, int] | None:
    """Apply the year rule table; None when the expression is not recognized."""
    m = _YEAR_RE.match(_clean(raw))
    if not m:
        return None
    lo = int(m.group(1))
    hi = int(m.group(2)) if m.group(2) else lo
    if lo > hi:
        return None
    return lo, hi


def normalize_source(raw: str) -> Source:
    return _SOURCE_ALIASES.get(_clean(raw).lower(), Source.OTHER)


def normalize_record(draft: RecordDraft) -> tuple[ArtworkRecord, list[str]]:
    """Turn a raw draft into a clean ArtworkRecord; unparseable values become issues."""
    issues: list[str] = []

    year_min = year_max = None
    year_raw = _clean(draft.year)
    if year_raw:
        parsed = parse_year_expression(year_raw)
        if parsed is None:
            issues.append(f"year: unparseable expression {year_raw!r}")
        else:
            year_min, year_max = parsed

    loc_type_raw = _clean(draft.location_type).lower()
    try:
        location_type = LocationType(loc_type_raw) if loc_type_raw else LocationType.UNKNOWN
    except ValueError:
        issues.append(f"location_type: unknown value {loc_type_raw!r}")
        location_type = LocationType.UNKNOWN

    record = ArtworkRecord(
        id=_clean(draft.id),
        title=_clean(draft.title),
        artist=_clean(draft.artist),
        year_min=year_min,
        year_max=year_max,
        location_name=_clean(draft.location_name),
        location_type=location_type,
        source=normalize_source(draft.source),
        source_url=draft.source_url.strip(),
        copyright=_clean(draft.copyright),
        image_path=draft.image_path.strip(),
    )
    return record, issues


def _parse_row(row: dict, row_no: int) -> tuple[ArtworkRecord | None, list[tuple]]:
    issues: list[tuple] = []

    def opt_int(name: str):
        v = row[name].strip()
        if not v:
            return None, True
        try:
            return int(v), True
        except ValueError:
            issues.append((row_no, name, f"not an integer: {v!r}"))
            return None, False

    def opt_float(name: str):
        v = row[name].strip()
        if not v:
            return None, True
        try:
            return float(v), True
        except ValueError:
            issues.append((row_no, name, f"not a number: {v!r}"))
            return None, False

    year_min, ok1 = opt_int("year_min")
    year_max, ok2 = opt_int("year_max")
    latitude, ok3 = opt_float("latitude")
    longitude, ok4 = opt_float("longitude")

    phash = None
    ok5 = True
    phash_raw = row["phash"].strip()
    if phash_raw:
        if re.fullmatch(r"[0-9a-f]{16}", phash_raw):
            phash = int(phash_raw, 16)
        else:
            issues.append((row_no, "phash", f"not 16-char lowercase hex: {phash_raw!r}"))
            ok5 = False

    try:
        location_type = LocationType(row["location_type"]) if row["location_type"] else LocationType.UNKNOWN
    except ValueError:
        issues.append((row_no, "location_type", f"unknown value: {row['location_type']!r}"))
        return None, issues
    try:
        source = Source(row["source"]) if row["source"] else Source.OTHER
    except ValueError:
        issues.append((row_no, "source", f"unknown value: {row['source']!r}"))
        return None, issues

    if not (ok1 and ok2 and ok3 and ok4 and ok5):
        return None, issues

    record = ArtworkRecord(
        id=row["id"],
        title=row["title"],
        artist=row["artist"],
        year_min=year_min,
        year_max=year_max,
        location_name=row["location_name"],
        location_type=location_type,
        latitude=latitude,
        longitude=longitude,
        source=source,
        source_url=row["source_url"],
        copyright=row["copyright"],
        image_path=row["image_path"],
        phash=phash,
    )
    violations = validate_record(record)
    if violations:
        issues.extend((row_no, v.field, v.message) for v in violations)
        return None, issues
    return record, issues


def parse_metadata_csv(content: bytes) -> tuple[list[ArtworkRecord], IngestReport]:
    """Parse the metadata CSV; strict on the header set, tolerant of column order."""
    try:
        text = content.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise MetadataFormatError(f"not UTF-8: {exc}") from exc
    reader = csv.DictReader(io.StringIO(text))
    if reader.fieldnames is None:
        raise MetadataFormatError("missing header")
    have = set(reader.fieldnames)
    want = set(METADATA_HEADER)
    if have != want:
        missing = sorted(want - have)
        extra = sorted(have - want)
        parts = []
        if missing:
            parts.append(f"missing column(s): {', '.join(missing)}")
        if extra:
            parts.append(f"unexpected column(s): {', '.join(extra)}")
        raise MetadataFormatError("; ".join(parts))

    records: list[ArtworkRecord] = []
    issues: list[tuple] = []
    n_rows = 0
    for row_no, row in enumerate(reader, start=2):
        n_rows += 1
        record, row_issues = _parse_row(row, row_no)
        issues.extend(row_issues)
        if record is not None:
            records.append(record)
    report = IngestReport(n_rows_read=n_rows, n_records_ok=len(records), issues=issues)
    return records, report


def serialize_metadata_csv(records: list[ArtworkRecord]) -> bytes:
    """Emit the canonical column order; absent numerics as empty strings."""
    for r in records:
        violations = validate_record(r)
        if violations:
            raise ValueError(f"invalid record {r.id!r}: {violations[0].field}: {violations[0].message}")
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(METADATA_HEADER)
    for r in records:
        writer.writerow(
            [
                r.id,
                r.title,
                r.artist,
                "" if r.year_min is None else str(r.year_min),
                "" if r.year_max is None else str(r.year_max),
                r.location_name,
                r.location_type.value,
                "" if r.latitude is None else repr(r.latitude),
                "" if r.longitude is None else repr(r.longitude),
                r.source.value,
                r.source_url,
                r.copyright,
                r.image_path,
                "" if r.phash is None else f"{r.phash:016x}",
            ]
        )
    return buf.getvalue().encode("utf-8")


def match_images(records: list[ArtworkRecord], files: list[str]) -> ImageMatchReport:
    """Exact, case-sensitive match of record image paths against available files."""
    file_set = set(files)
    matched = [r.id for r in records if r.image_path and r.image_path in file_set]
    unmatched_records = [r.id for r in records if not (r.image_path and r.image_path in file_set)]
    referenced = {r.image_path for r in records if r.image_path}
    unmatched_files = [f for f in files if f not in referenced]
    return ImageMatchReport(
        matched_ids=matched,
        unmatched_records=unmatched_records,
        unmatched_files=unmatched_files,
    )
