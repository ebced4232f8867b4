"""File formats: images, affinity maps, edge maps, label maps, hierarchies.

Binary layouts (all little-endian unless noted):

  AFF8  magic "AFF8", u32 H, u32 W, u32 reserved=0, then 8*H*W float32
        values channel-major: all NW values row-major, then all N, ...
  EDG1  magic "EDG1", u32 H, u32 W, then H*W float32 values row-major.
  HRS1  magic "HRS1", u32 node_count, u32 merge_count, u32 round_count,
        merge_count records of (u32 u, u32 v, f32 gain), then
        round_count u32 cumulative merge counts (one per round).

Label maps are stored either as binary PGM (P5, maxval 65535, samples
big-endian per the Netpbm convention) or as CSV of integers, H rows by
W columns. Images load from 8-bit RGB PNG or binary PPM (P6); formats
are detected by magic bytes, not extension.
"""

from __future__ import annotations

import csv
import io
import struct
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
from PIL import Image, UnidentifiedImageError

from .errors import ArgumentError, FormatError
from .types import AffinityMap, EdgeProbMap, LabelMap, RgbImage

_AFF8_MAGIC = b"AFF8"
_EDG1_MAGIC = b"EDG1"
_HRS1_MAGIC = b"HRS1"

# Refuse absurd header dimensions before allocating: caps H*W at 2^28.
_MAX_PIXELS = 1 << 28


def _check_dims(h: int, w: int, what: str) -> None:
    if h == 0 or w == 0:
        raise FormatError(f"{what}: zero-sized dimensions {h}x{w}")
    if h * w > _MAX_PIXELS:
        raise FormatError(f"{what}: dimensions {h}x{w} overflow the supported size")


# ---------------------------------------------------------------------------
# images
# ---------------------------------------------------------------------------

def load_image(path) -> RgbImage:
    """Load an 8-bit RGB image (PNG or binary PPM) normalised to [0, 1]."""
    raw = Path(path).read_bytes()
    if raw[:2] == b"P6":
        return _parse_ppm(raw)
    if raw[:8] == b"\x89PNG\r\n\x1a\n":
        try:
            with Image.open(io.BytesIO(raw)) as img:
                rgb = img.convert("RGB")
                arr = np.asarray(rgb, dtype=np.uint8)
        except (UnidentifiedImageError, OSError, ValueError) as exc:
            raise FormatError(f"cannot decode PNG {path}: {exc}") from exc
        if arr.size == 0:
            raise FormatError(f"zero-sized image: {path}")
        return RgbImage(arr.astype(np.float64) / 255.0)
    raise FormatError(f"unsupported image format (want PNG or P6 PPM): {path}")


def _parse_ppm(raw: bytes) -> RgbImage:
    """Parse binary PPM (P6). Header tokens may be separated by comments."""
    pos = 2
    fields = []
    while len(fields) < 3:
        while pos < len(raw) and raw[pos : pos + 1].isspace():
            pos += 1
        if pos < len(raw) and raw[pos : pos + 1] == b"#":
            while pos < len(raw) and raw[pos] != 0x0A:
                pos += 1
            continue
        start = pos
        while pos < len(raw) and not raw[pos : pos + 1].isspace():
            pos += 1
        if pos == start:
            raise FormatError("truncated PPM header")
        fields.append(raw[start:pos])
    try:
        width, height, maxval = (int(f) for f in fields)
    except ValueError as exc:
        raise FormatError(f"bad PPM header fields {fields}") from exc
    if maxval != 255:
        raise FormatError(f"only 8-bit PPM supported, got maxval {maxval}")
    _check_dims(height, width, "PPM")
    pos += 1  # single whitespace byte after maxval
    payload = raw[pos : pos + 3 * height * width]
    if len(payload) < 3 * height * width:
        raise FormatError("PPM payload shorter than width*height*3 bytes")
    arr = np.frombuffer(payload, dtype=np.uint8).reshape(height, width, 3)
    return RgbImage(arr.astype(np.float64) / 255.0)


def write_ppm(image: RgbImage, path) -> None:
    """Write an image as binary PPM (P6), quantised back to 8 bits."""
    arr = np.clip(np.rint(image.data * 255.0), 0, 255).astype(np.uint8)
    with open(path, "wb") as f:
        f.write(b"P6\n%d %d\n255\n" % (image.width, image.height))
        f.write(arr.tobytes())


def write_boundary_overlay(image: RgbImage, labels: LabelMap, path) -> None:
    """Write a PNG of the image with label boundaries painted red."""
    if (labels.height, labels.width) != (image.height, image.width):
        raise ArgumentError("label map dimensions do not match the image")
    lab = labels.labels
    boundary = np.zeros(lab.shape, dtype=bool)
    boundary[:, :-1] |= lab[:, :-1] != lab[:, 1:]
    boundary[:, 1:] |= lab[:, :-1] != lab[:, 1:]
    boundary[:-1, :] |= lab[:-1, :] != lab[1:, :]
    boundary[1:, :] |= lab[:-1, :] != lab[1:, :]
    rgb = np.clip(np.rint(image.data * 255.0), 0, 255).astype(np.uint8).copy()
    rgb[boundary] = (255, 0, 0)
    Image.fromarray(rgb, mode="RGB").save(path, format="PNG")


# ---------------------------------------------------------------------------
# affinity maps
# ---------------------------------------------------------------------------

def read_affinity(path, permutation: Optional[Sequence[int]] = None) -> AffinityMap:
    """Read an AFF8 file. Out-of-frame channel slots are zeroed on load.

    permutation reorders a foreign producer's channels into this
    package's order before the out-of-frame repair runs (repairing
    first would wipe values that are in-frame under the source order);
    permutation[c] is the source channel holding our channel c.
    """
    raw = Path(path).read_bytes()
    if raw[:4] != _AFF8_MAGIC:
        raise FormatError(f"bad AFF8 magic in {path}: {raw[:4]!r}")
    if len(raw) < 16:
        raise FormatError(f"truncated AFF8 header in {path}")
    h, w, _reserved = struct.unpack_from("<III", raw, 4)
    _check_dims(h, w, "AFF8")
    need = 8 * h * w
    payload = np.frombuffer(raw, dtype="<f4", count=(len(raw) - 16) // 4, offset=16)
    if payload.size < need:
        raise FormatError(f"AFF8 payload holds {payload.size} values, need {need}")
    data = payload[:need].reshape(8, h, w)
    if not np.all(np.isfinite(data)) or data.min() < 0.0 or data.max() > 1.0:
        raise FormatError(f"AFF8 values outside [0, 1] in {path}")
    if permutation is not None:
        if sorted(permutation) != list(range(8)):
            raise ArgumentError(
                f"channel permutation must be a bijection on 0..7, got {permutation}"
            )
        data = data[list(permutation)]
    return AffinityMap(data)


def write_affinity(amap: AffinityMap, path) -> None:
    with open(path, "wb") as f:
        f.write(_AFF8_MAGIC)
        f.write(struct.pack("<III", amap.height, amap.width, 0))
        f.write(amap.data.astype("<f4").tobytes())


def permute_channels(amap: AffinityMap, perm: Sequence[int]) -> AffinityMap:
    """Reorder channels of a foreign affinity map into this package's order.

    perm[c] is the source channel that holds what we call channel c.
    """
    if sorted(perm) != list(range(8)):
        raise ArgumentError(f"channel permutation must be a bijection on 0..7, got {perm}")
    return AffinityMap(amap.data[list(perm)])


# ---------------------------------------------------------------------------
# edge probability maps
# ---------------------------------------------------------------------------

def read_edge_probs(path) -> EdgeProbMap:
    raw = Path(path).read_bytes()
    if raw[:4] != _EDG1_MAGIC:
        raise FormatError(f"bad EDG1 magic in {path}: {raw[:4]!r}")
    if len(raw) < 12:
        raise FormatError(f"truncated EDG1 header in {path}")
    h, w = struct.unpack_from("<II", raw, 4)
    _check_dims(h, w, "EDG1")
    payload = np.frombuffer(raw, dtype="<f4", count=(len(raw) - 12) // 4, offset=12)
    if payload.size < h * w:
        raise FormatError(f"EDG1 payload holds {payload.size} values, need {h * w}")
    data = payload[: h * w].reshape(h, w)
    if not np.all(np.isfinite(data)) or data.min() < 0.0 or data.max() > 1.0:
        raise FormatError(f"EDG1 values outside [0, 1] in {path}")
    return EdgeProbMap(data)


def write_edge_probs(emap: EdgeProbMap, path) -> None:
    with open(path, "wb") as f:
        f.write(_EDG1_MAGIC)
        f.write(struct.pack("<II", emap.height, emap.width))
        f.write(emap.data.astype("<f4").tobytes())


# ---------------------------------------------------------------------------
# label maps
# ---------------------------------------------------------------------------

def read_labels(path) -> LabelMap:
    """Read a label map from 16-bit PGM (P5) or CSV; labels come back dense."""
    raw = Path(path).read_bytes()
    if raw[:2] == b"P5":
        return _parse_pgm_labels(raw)
    return _parse_csv_labels(raw)


def _parse_pgm_labels(raw: bytes) -> LabelMap:
    pos = 2
    fields = []
    while len(fields) < 3:
        while pos < len(raw) and raw[pos : pos + 1].isspace():
            pos += 1
        if pos < len(raw) and raw[pos : pos + 1] == b"#":
            while pos < len(raw) and raw[pos] != 0x0A:
                pos += 1
            continue
        start = pos
        while pos < len(raw) and not raw[pos : pos + 1].isspace():
            pos += 1
        if pos == start:
            raise FormatError("truncated PGM header")
        fields.append(raw[start:pos])
    try:
        width, height, maxval = (int(f) for f in fields)
    except ValueError as exc:
        raise FormatError(f"bad PGM header fields {fields}") from exc
    if maxval != 65535:
        raise FormatError(f"label PGM must have maxval 65535, got {maxval}")
    _check_dims(height, width, "PGM")
    pos += 1
    payload = raw[pos : pos + 2 * height * width]
    if len(payload) < 2 * height * width:
        raise FormatError("PGM payload shorter than width*height samples")
    arr = np.frombuffer(payload, dtype=">u2").reshape(height, width)
    return LabelMap.from_raw(arr.astype(np.int64))


def _parse_csv_labels(raw: bytes) -> LabelMap:
    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise FormatError("label file is neither P5 PGM nor text CSV") from exc
    rows = []
    try:
        for lineno, row in enumerate(csv.reader(io.StringIO(text)), start=1):
            if not row or all(cell.strip() == "" for cell in row):
                continue
            try:
                rows.append([int(cell) for cell in row])
            except ValueError as exc:
                raise FormatError(f"non-integer label on CSV line {lineno}") from exc
    except csv.Error as exc:
        raise FormatError(f"malformed label CSV: {exc}") from exc
    if not rows:
        raise FormatError("empty label CSV")
    width = len(rows[0])
    for lineno, row in enumerate(rows, start=1):
        if len(row) != width:
            raise FormatError(f"ragged CSV: line {lineno} has {len(row)} values, expected {width}")
    return LabelMap.from_raw(np.asarray(rows, dtype=np.int64))


def write_labels(labels: LabelMap, path) -> None:
    """Write a label map; CSV when the suffix is .csv, 16-bit PGM otherwise."""
    if Path(path).suffix.lower() == ".csv":
        with open(path, "w", newline="") as f:
            writer = csv.writer(f)
            for row in labels.labels:
                writer.writerow([int(v) for v in row])
        return
    if labels.k > 65535:
        raise ArgumentError(f"PGM label output supports at most 65535 labels, got {labels.k}")
    with open(path, "wb") as f:
        f.write(b"P5\n%d %d\n65535\n" % (labels.width, labels.height))
        f.write(labels.labels.astype(">u2").tobytes())


# ---------------------------------------------------------------------------
# merge hierarchies
# ---------------------------------------------------------------------------

def read_hierarchy(path):
    from .hers import MergeHierarchy

    raw = Path(path).read_bytes()
    if raw[:4] != _HRS1_MAGIC:
        raise FormatError(f"bad HRS1 magic in {path}: {raw[:4]!r}")
    if len(raw) < 16:
        raise FormatError(f"truncated HRS1 header in {path}")
    node_count, merge_count, round_count = struct.unpack_from("<III", raw, 4)
    need = 16 + merge_count * 12 + round_count * 4
    if len(raw) < need:
        raise FormatError(f"HRS1 file holds {len(raw)} bytes, need {need}")
    records = np.frombuffer(
        raw, dtype=np.dtype([("u", "<u4"), ("v", "<u4"), ("gain", "<f4")]),
        count=merge_count, offset=16,
    )
    boundaries = np.frombuffer(raw, dtype="<u4", count=round_count, offset=16 + merge_count * 12)
    if node_count == 0 or merge_count >= max(node_count, 1):
        raise FormatError(
            f"HRS1 has {merge_count} merges for {node_count} nodes (need < node_count)"
        )
    if merge_count and max(records["u"].max(), records["v"].max()) >= node_count:
        raise FormatError(f"HRS1 merge endpoint exceeds node count {node_count}")
    if round_count and (
        np.any(np.diff(boundaries.astype(np.int64)) < 0) or boundaries[-1] != merge_count
    ):
        raise FormatError("HRS1 round boundaries are not a cumulative merge count")
    return MergeHierarchy(
        node_count=node_count,
        merge_u=records["u"].astype(np.int64),
        merge_v=records["v"].astype(np.int64),
        merge_gain=records["gain"].astype(np.float64),
        round_boundaries=[int(b) for b in boundaries],
    )


def write_hierarchy(hierarchy, path) -> None:
    records = np.empty(
        len(hierarchy.merge_u), dtype=np.dtype([("u", "<u4"), ("v", "<u4"), ("gain", "<f4")])
    )
    records["u"] = hierarchy.merge_u
    records["v"] = hierarchy.merge_v
    records["gain"] = hierarchy.merge_gain
    with open(path, "wb") as f:
        f.write(_HRS1_MAGIC)
        f.write(
            struct.pack(
                "<III",
                hierarchy.node_count,
                len(hierarchy.merge_u),
                len(hierarchy.round_boundaries),
            )
        )
        f.write(records.tobytes())
        f.write(np.asarray(hierarchy.round_boundaries, dtype="<u4").tobytes())
