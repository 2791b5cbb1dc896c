"""Canonical domain types shared by every pipeline stage."""

from __future__ import annotations

from dataclasses import dataclass, field, fields
from enum import Enum
from typing import Optional


class LocationType(str, Enum):
    CAMP = "camp"
    GHETTO = "ghetto"
    CITY = "city"
    REGION = "region"
    COUNTRY = "country"
    UNKNOWN = "unknown"


class Source(str, Enum):
    USHMM = "USHMM"
    JOODS = "JOODS"
    NIOD = "NIOD"
    OTHER = "OTHER"


# Survivor selection prefers richer sources first.
SOURCE_PRIORITY = {Source.USHMM: 0, Source.JOODS: 1, Source.NIOD: 2, Source.OTHER: 3}


@dataclass(frozen=True)
class ArtworkRecord:
    """One artwork's normalized metadata row."""

    id: str
    title: str = ""
    artist: str = ""
    year_min: Optional[int] = None
    year_max: Optional[int] = None
    location_name: str = ""
    location_type: LocationType = LocationType.UNKNOWN
    latitude: Optional[float] = None
    longitude: Optional[float] = None
    source: Source = Source.OTHER
    source_url: str = ""
    copyright: str = ""
    image_path: str = ""
    phash: Optional[int] = None

    @property
    def geocoded(self) -> bool:
        return self.latitude is not None and self.longitude is not None

    def filled_field_count(self) -> int:
        """Number of non-empty / present metadata fields (dedup survivor metric)."""
        n = 0
        for f in fields(self):
            v = getattr(self, f.name)
            if v is None or v == "":
                continue
            if f.name == "location_type" and v is LocationType.UNKNOWN:
                continue
            if f.name == "source" and v is Source.OTHER:
                continue
            n += 1
        return n


@dataclass(frozen=True)
class BoundingBox:
    """Axis-aligned box in normalized image coordinates."""

    ymin: float
    xmin: float
    ymax: float
    xmax: float

    def is_valid(self) -> bool:
        return 0.0 <= self.ymin < self.ymax <= 1.0 and 0.0 <= self.xmin < self.xmax <= 1.0


@dataclass(frozen=True)
class DetectionRecord:
    """One detected object attached to an artwork image."""

    image_id: str
    label: str
    raw_label: str
    confidence: float
    box: BoundingBox


@dataclass(frozen=True)
class DetectionFilterConfig:
    """Post-processing knobs for retained detections."""

    min_confidence: float = 0.2
    max_per_image: int = 20
    max_raw_per_image: int = 100
    label_blocklist: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        if not 0.0 <= self.min_confidence <= 1.0:
            raise ValueError(f"min_confidence out of range: {self.min_confidence}")
        if not 1 <= self.max_per_image <= self.max_raw_per_image:
            raise ValueError(
                f"max_per_image must be in [1, {self.max_raw_per_image}], got {self.max_per_image}"
            )


@dataclass(frozen=True)
class CollectionStats:
    n_images: int
    n_detections_retained: int
    mean_detections_per_image: float
    n_geocoded: int


@dataclass(frozen=True)
class Violation:
    """One broken record invariant; data, not an exception."""

    field: str
    message: str


def validate_record(record: ArtworkRecord) -> list[Violation]:
    """Check every per-record invariant; empty list means the record is well formed."""
    out: list[Violation] = []
    if not record.id:
        out.append(Violation("id", "empty"))
    if record.year_min is not None and record.year_max is not None:
        if record.year_min > record.year_max:
            out.append(
                Violation("year_min", f"year_min {record.year_min} > year_max {record.year_max}")
            )
    if (record.latitude is None) != (record.longitude is None):
        out.append(Violation("latitude", "latitude and longitude must be present together"))
    if record.latitude is not None and not -90.0 <= record.latitude <= 90.0:
        out.append(Violation("latitude", f"out of range [-90, 90]: {record.latitude}"))
    if record.longitude is not None and not -180.0 <= record.longitude <= 180.0:
        out.append(Violation("longitude", f"out of range [-180, 180]: {record.longitude}"))
    if record.phash is not None and not 0 <= record.phash < 2**64:
        out.append(Violation("phash", "not a 64-bit unsigned integer"))
    return out
