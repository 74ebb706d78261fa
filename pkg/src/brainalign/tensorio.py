"""File formats exchanged between pipeline stages.

Three carriers, all byte-stable across platforms:

* NAT1: binary tensor container for every array-like object (time series,
  beta maps, embeddings, score tensors). Little-endian, float64 only in v1.
* events TSV: one row per trial with onset/duration in seconds.
* masks TSV: line-oriented ROI voxel masks, one ROI per line.

See docs/formats.md for the byte-level layout and hex-dump examples.
"""

import csv
import struct
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from .errors import (
    BadMagicError,
    DataError,
    TruncatedPayloadError,
    UnsupportedRankError,
)

MAGIC = b"NAT1"
DTYPE_F64 = 1
MAX_RANK = 4

HEMISPHERES = ("LH", "RH")

_EVENT_COLUMNS = ("onset", "duration", "trial_id", "condition")


# ---------------------------------------------------------------------------
# NAT1 binary tensors
# ---------------------------------------------------------------------------

def write_tensor(path, values):
    """Write a float64 array to ``path`` in the NAT1 container format.

    Layout: magic ``NAT1``, dtype code (u8, 1 = float64), ndim (u8),
    one u64 per dimension, then the row-major little-endian payload.
    Round-trips bitwise: ``read_tensor(write_tensor(x)) == x``.

    Parameters
    ----------
    path : str or Path
    values : array_like
        Converted to a C-contiguous float64 array; rank must be 1..4.
    """
    arr = np.asarray(values, dtype="<f8")
    # ascontiguousarray would silently promote 0-d to 1-d, so check first
    if not 1 <= arr.ndim <= MAX_RANK:
        raise UnsupportedRankError(
            f"tensor rank {arr.ndim} outside supported range 1..{MAX_RANK}"
        )
    arr = np.ascontiguousarray(arr)
    header = MAGIC + struct.pack("<BB", DTYPE_F64, arr.ndim)
    header += struct.pack(f"<{arr.ndim}Q", *arr.shape)
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(arr.tobytes())


def read_tensor(path):
    """Read a NAT1 file back into a float64 ndarray.

    Raises :class:`BadMagicError`, :class:`UnsupportedRankError`, or
    :class:`TruncatedPayloadError` for the corresponding corruptions;
    trailing bytes after the payload are also rejected.
    """
    blob = Path(path).read_bytes()
    if blob[:4] != MAGIC:
        raise BadMagicError(f"{path}: bad magic {blob[:4]!r}")
    if len(blob) < 6:
        raise TruncatedPayloadError(f"{path}: header cut short")
    dtype_code, ndim = struct.unpack_from("<BB", blob, 4)
    if dtype_code != DTYPE_F64:
        raise DataError(f"{path}: unsupported dtype code {dtype_code}")
    if not 1 <= ndim <= MAX_RANK:
        raise UnsupportedRankError(f"{path}: declared rank {ndim}")
    dims_end = 6 + 8 * ndim
    if len(blob) < dims_end:
        raise TruncatedPayloadError(f"{path}: dimension block cut short")
    shape = struct.unpack_from(f"<{ndim}Q", blob, 6)
    count = 1
    for d in shape:
        count *= d
    expected = dims_end + 8 * count
    if len(blob) < expected:
        raise TruncatedPayloadError(
            f"{path}: payload has {len(blob) - dims_end} bytes, "
            f"expected {8 * count}"
        )
    if len(blob) > expected:
        raise DataError(f"{path}: {len(blob) - expected} trailing bytes")
    flat = np.frombuffer(blob, dtype="<f8", count=count, offset=dims_end)
    return flat.reshape(shape).copy()


# ---------------------------------------------------------------------------
# Event tables
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Event:
    trial_id: str
    onset: float
    duration: float
    condition: str


class EventTable:
    """Ordered collection of trials; trial ids unique, times non-negative."""

    def __init__(self, events):
        events = tuple(events)
        seen = set()
        for ev in events:
            if ev.trial_id in seen:
                raise DataError(f"duplicate trial_id {ev.trial_id!r}")
            seen.add(ev.trial_id)
            if ev.onset < 0:
                raise DataError(f"trial {ev.trial_id!r}: negative onset")
            if ev.duration < 0:
                raise DataError(f"trial {ev.trial_id!r}: negative duration")
        self.events = events

    def __len__(self):
        return len(self.events)

    def __iter__(self):
        return iter(self.events)

    def __getitem__(self, i):
        return self.events[i]

    def __eq__(self, other):
        return isinstance(other, EventTable) and self.events == other.events

    def conditions(self):
        """Condition names in sorted order."""
        return sorted({ev.condition for ev in self.events})

    def onsets(self):
        return np.array([ev.onset for ev in self.events])


def read_events(path):
    """Parse an events TSV (header: onset, duration, trial_id, condition)."""
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh, delimiter="\t")
        header = reader.fieldnames or []
        missing = [c for c in _EVENT_COLUMNS if c not in header]
        if missing:
            raise DataError(f"{path}: missing column(s) {', '.join(missing)}")
        events = []
        for lineno, row in enumerate(reader, start=2):
            try:
                onset = float(row["onset"])
                duration = float(row["duration"])
            except (TypeError, ValueError):
                raise DataError(f"{path}:{lineno}: non-numeric onset/duration")
            events.append(
                Event(row["trial_id"], onset, duration, row["condition"])
            )
    return EventTable(events)


def write_events(path, table):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, delimiter="\t", lineterminator="\n")
        writer.writerow(_EVENT_COLUMNS)
        for ev in table:
            writer.writerow([repr(ev.onset), repr(ev.duration),
                             ev.trial_id, ev.condition])


# ---------------------------------------------------------------------------
# ROI masks
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RoiMask:
    name: str
    hemisphere: str
    voxel_indices: tuple

    @property
    def key(self):
        """Composed ROI identifier used in filenames and result tables."""
        return f"{self.hemisphere}_{self.name}"


class RoiMaskSet:
    """Named voxel masks; names must exist in the shipped ROI metadata."""

    def __init__(self, masks):
        masks = tuple(masks)
        known = known_roi_names()
        seen = set()
        for m in masks:
            if m.hemisphere not in HEMISPHERES:
                raise DataError(f"mask {m.name!r}: bad hemisphere {m.hemisphere!r}")
            if m.name not in known:
                raise DataError(
                    f"mask {m.name!r} not in ROI metadata table "
                    f"({', '.join(sorted(known))})"
                )
            if (m.name, m.hemisphere) in seen:
                raise DataError(f"duplicate mask {m.key}")
            seen.add((m.name, m.hemisphere))
            if len(set(m.voxel_indices)) != len(m.voxel_indices):
                raise DataError(f"mask {m.key}: repeated voxel index")
            if len(m.voxel_indices) == 0:
                raise DataError(f"mask {m.key}: empty")
            if min(m.voxel_indices) < 0:
                raise DataError(f"mask {m.key}: negative voxel index")
        self.masks = masks

    def __len__(self):
        return len(self.masks)

    def __iter__(self):
        return iter(self.masks)

    def keys(self):
        return [m.key for m in self.masks]


def read_masks(path):
    """Parse a masks TSV: ``name<TAB>hemisphere<TAB>i,j,k`` per line.

    Blank lines and lines starting with ``#`` are skipped.
    """
    masks = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 3:
                raise DataError(f"{path}:{lineno}: expected 3 tab-separated fields")
            name, hemisphere, idx_csv = parts
            try:
                indices = tuple(int(tok) for tok in idx_csv.split(",") if tok != "")
            except ValueError:
                raise DataError(f"{path}:{lineno}: non-integer voxel index")
            masks.append(RoiMask(name, hemisphere, indices))
    return RoiMaskSet(masks)


def write_masks(path, mask_set):
    with open(path, "w") as fh:
        for m in mask_set:
            idx = ",".join(str(i) for i in m.voxel_indices)
            fh.write(f"{m.name}\t{m.hemisphere}\t{idx}\n")


# ---------------------------------------------------------------------------
# ROI metadata (static, shipped with the package)
# ---------------------------------------------------------------------------

def roi_metadata():
    """Rows of the shipped ROI table: (name, hemisphere, region, domains)."""
    text = (resources.files("brainalign") / "data" / "roi_metadata.tsv").read_text()
    rows = []
    for line in text.splitlines():
        if not line.strip() or line.startswith("#"):
            continue
        name, hemisphere, region, domains = line.split("\t")
        rows.append((name, hemisphere, region, domains))
    return rows


def known_roi_names():
    return {name for name, _, _, _ in roi_metadata()}
