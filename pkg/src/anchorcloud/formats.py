"""File formats: OFF and XYZ clouds, anchor manifests, feature files, reports.

These are the toolkit's data contracts. Parsers reject malformed input with
line- or offset-bearing errors rather than letting partial clouds escape,
and the binary feature file round-trips bit for bit.

Feature file layout (all integers little-endian)::

    magic   4 bytes  "AFV1"
    version u16      currently 1
    count   u32      number of feature rows
    dim     u32      values per row
    payload count * dim IEEE-754 binary32, row-major, little-endian
    ids     count entries of (u32 byte length, UTF-8 bytes)
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import TYPE_CHECKING, Iterator

import numpy as np

from .errors import FormatError, ParseError
from .geometry import PointCloud

if TYPE_CHECKING:
    from .evaluation import EvalReport

MAGIC = b"AFV1"
VERSION = 1


# ---------------------------------------------------------------------------
# point-cloud text formats
# ---------------------------------------------------------------------------


def _significant_lines(text: str) -> Iterator[tuple[int, str]]:
    """Yield (1-based line number, stripped line), skipping blanks and comments."""
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if line and not line.startswith("#"):
            yield lineno, line


def _parse_floats(fields: list[str], lineno: int, what: str) -> tuple[float, float, float]:
    if len(fields) < 3:
        raise ParseError(f"{what} needs at least 3 numeric fields", line=lineno)
    try:
        return float(fields[0]), float(fields[1]), float(fields[2])
    except ValueError as exc:
        raise ParseError(f"non-numeric {what}: {exc}", line=lineno) from None


def parse_off(source: str | bytes, cloud_id: str = "", label: str | None = None) -> PointCloud:
    """Parse an OFF mesh, keeping the vertices and discarding the faces.

    Both header variants are accepted: counts on the line after ``OFF`` and
    counts glued onto the ``OFF`` line itself.
    """
    text = source.decode("utf-8") if isinstance(source, bytes) else source
    lines = _significant_lines(text)

    try:
        lineno, header = next(lines)
    except StopIteration:
        raise ParseError("empty OFF input", line=1) from None
    if not header.startswith("OFF"):
        raise ParseError("missing OFF header", line=lineno)
    rest = header[3:].strip()
    if not rest:
        try:
            lineno, rest = next(lines)
        except StopIteration:
            raise ParseError("missing count line after OFF header", line=lineno) from None
    counts = rest.split()
    if len(counts) not in (2, 3):
        raise ParseError(f"expected 'vertices faces [edges]' counts, got {rest!r}", line=lineno)
    try:
        n_vertices, n_faces = int(counts[0]), int(counts[1])
    except ValueError:
        raise ParseError(f"non-integer counts {rest!r}", line=lineno) from None
    if n_vertices < 1:
        raise ParseError(f"header declares {n_vertices} vertices", line=lineno)

    points = np.empty((n_vertices, 3))
    for i in range(n_vertices):
        try:
            lineno, line = next(lines)
        except StopIteration:
            raise ParseError(
                f"header declares {n_vertices} vertices, found {i}", line=lineno
            ) from None
        points[i] = _parse_floats(line.split(), lineno, "vertex")

    for i in range(n_faces):
        try:
            lineno, line = next(lines)
        except StopIteration:
            raise ParseError(
                f"header declares {n_faces} faces, found {i}", line=lineno
            ) from None
        fields = line.split()
        try:
            indices = [int(f) for f in fields[1 : 1 + int(fields[0])]]
        except (ValueError, IndexError):
            raise ParseError(f"malformed face {line!r}", line=lineno) from None
        if len(indices) != int(fields[0]) or any(not 0 <= v < n_vertices for v in indices):
            raise ParseError(f"face references invalid vertex in {line!r}", line=lineno)

    for lineno, line in lines:
        raise ParseError(f"unexpected trailing content {line!r}", line=lineno)

    return PointCloud(cloud_id, points, label)


def parse_xyz(source: str | bytes, cloud_id: str = "", label: str | None = None) -> PointCloud:
    """Parse whitespace-separated coordinate rows; extra columns are ignored."""
    text = source.decode("utf-8") if isinstance(source, bytes) else source
    points = []
    for lineno, line in _significant_lines(text):
        points.append(_parse_floats(line.split(), lineno, "point row"))
    if not points:
        raise ParseError("no points in XYZ input", line=1)
    return PointCloud(cloud_id, np.array(points), label)


def _coordinate_rows(points) -> Iterator[str]:
    pts = points.points if isinstance(points, PointCloud) else np.asarray(points)
    for x, y, z in pts:
        yield f"{x:.17g} {y:.17g} {z:.17g}"


def write_off(points) -> str:
    pts = points.points if isinstance(points, PointCloud) else np.asarray(points)
    body = "\n".join(_coordinate_rows(pts))
    return f"OFF\n{len(pts)} 0 0\n{body}\n"


def write_xyz(points) -> str:
    return "\n".join(_coordinate_rows(points)) + "\n"


CLOUD_SUFFIXES = (".off", ".xyz")


def load_cloud(path, cloud_id: str | None = None, label: str | None = None) -> PointCloud:
    """Read a cloud file, dispatching on its extension (.off or .xyz)."""
    path = Path(path)
    if cloud_id is None:
        cloud_id = path.stem
    suffix = path.suffix.lower()
    if suffix == ".off":
        return parse_off(path.read_text(encoding="utf-8"), cloud_id, label)
    if suffix == ".xyz":
        return parse_xyz(path.read_text(encoding="utf-8"), cloud_id, label)
    raise ParseError(f"unsupported cloud format {path.suffix!r} for {path}")


# ---------------------------------------------------------------------------
# binary feature file
# ---------------------------------------------------------------------------


def write_feature_file(path, features: np.ndarray, ids: list[str]) -> None:
    """Write feature rows and their ids in the AFV1 binary layout."""
    values = np.ascontiguousarray(np.asarray(features), dtype="<f4")
    if values.ndim != 2:
        raise FormatError(f"features must be 2-D; got shape {values.shape}")
    count, dim = values.shape
    if count == 0 or dim == 0:
        raise FormatError(f"cannot write an empty feature file ({count} x {dim})")
    if len(ids) != count:
        raise FormatError(f"{count} feature rows but {len(ids)} ids")
    blob = bytearray()
    blob += MAGIC
    blob += struct.pack("<HII", VERSION, count, dim)
    blob += values.tobytes(order="C")
    for name in ids:
        encoded = name.encode("utf-8")
        blob += struct.pack("<I", len(encoded))
        blob += encoded
    Path(path).write_bytes(bytes(blob))


def read_feature_file(path) -> tuple[np.ndarray, list[str]]:
    """Read an AFV1 file back into (float32 rows, ids). Bitwise faithful."""
    data = Path(path).read_bytes()
    if len(data) < 14:
        raise FormatError(f"{path}: too short to hold a header")
    if data[:4] != MAGIC:
        raise FormatError(f"{path}: bad magic {data[:4]!r}")
    version, count, dim = struct.unpack_from("<HII", data, 4)
    if version != VERSION:
        raise FormatError(f"{path}: unsupported version {version}")
    if dim == 0:
        raise FormatError(f"{path}: feature dim is 0")
    offset = 14
    payload_len = 4 * count * dim
    if len(data) < offset + payload_len:
        raise FormatError(f"{path}: truncated payload")
    features = np.frombuffer(
        data, dtype="<f4", count=count * dim, offset=offset
    ).reshape(count, dim)
    offset += payload_len
    ids = []
    for _ in range(count):
        if len(data) < offset + 4:
            raise FormatError(f"{path}: truncated id table")
        (length,) = struct.unpack_from("<I", data, offset)
        offset += 4
        if len(data) < offset + length:
            raise FormatError(f"{path}: truncated id table")
        ids.append(data[offset : offset + length].decode("utf-8"))
        offset += length
    if offset != len(data):
        raise FormatError(f"{path}: {len(data) - offset} unexpected trailing bytes")
    return features.copy(), ids


# ---------------------------------------------------------------------------
# anchor manifest
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ManifestAnchor:
    file: str
    path: Path
    generator: str = "other"
    seed: int = 0
    prompt_index: int = 0


@dataclass(frozen=True)
class ManifestCategory:
    name: str
    prompts: tuple[str, ...]
    anchors: tuple[ManifestAnchor, ...]


@dataclass(frozen=True)
class AnchorManifest:
    categories: tuple[ManifestCategory, ...]
    base_dir: Path
    prompt_template: str | None = None


def parse_manifest(path) -> AnchorManifest:
    """Load and validate an anchor manifest (JSON).

    Relative anchor file paths resolve against the manifest's directory.
    File existence is not checked here; bank construction does that.
    """
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON: {exc}", line=exc.lineno) from None

    raw_categories = doc.get("categories")
    if not isinstance(raw_categories, list) or not raw_categories:
        raise ParseError(f"{path}: manifest needs a non-empty 'categories' list")

    base_dir = path.parent
    categories = []
    seen = set()
    for raw in raw_categories:
        name = raw.get("name")
        if not isinstance(name, str) or not name:
            raise ParseError(f"{path}: category without a name")
        if name in seen:
            raise ParseError(f"{path}: duplicate category {name!r}")
        seen.add(name)
        prompts = tuple(raw.get("prompts", []))
        if not all(isinstance(p, str) for p in prompts):
            raise ParseError(f"{path}: category {name!r} has non-string prompts")
        raw_anchors = raw.get("anchors", [])
        if not raw_anchors:
            raise ParseError(f"{path}: category {name!r} has no anchors")
        anchors = []
        for entry in raw_anchors:
            file = entry.get("file")
            if not isinstance(file, str) or not file:
                raise ParseError(f"{path}: anchor without a file in category {name!r}")
            prompt_index = int(entry.get("prompt_index", 0))
            if not 0 <= prompt_index < len(prompts):
                raise ParseError(
                    f"{path}: anchor {file!r} references prompt {prompt_index} "
                    f"but category {name!r} has {len(prompts)} prompts"
                )
            anchors.append(
                ManifestAnchor(
                    file=file,
                    path=(base_dir / file).resolve(),
                    generator=str(entry.get("generator", "other")),
                    seed=int(entry.get("seed", 0)),
                    prompt_index=prompt_index,
                )
            )
        categories.append(ManifestCategory(name, prompts, tuple(anchors)))

    return AnchorManifest(
        categories=tuple(categories),
        base_dir=base_dir,
        prompt_template=doc.get("prompt_template"),
    )


# ---------------------------------------------------------------------------
# evaluation reports
# ---------------------------------------------------------------------------


def eval_report_to_dict(report: "EvalReport") -> dict:
    """JSON-ready view of an evaluation report."""
    return {
        "categories": list(report.categories),
        "confusion": report.confusion.tolist(),
        "per_class_acc": {
            name: (None if np.isnan(value) else round(float(value), 4))
            for name, value in zip(report.categories, report.per_class_acc)
        },
        "oacc": round(float(report.oacc), 4),
        "macc": round(float(report.macc), 4),
        "n_samples": int(report.n_samples),
        "absent_categories": list(report.absent_categories),
    }


def render_report_table(report: "EvalReport") -> str:
    """Fixed-width human-readable summary of an evaluation report."""
    width = max(len(c) for c in report.categories)
    width = max(width, len("category"))
    lines = [f"{'category':<{width}}  {'acc%':>7}  {'n':>5}"]
    for i, name in enumerate(report.categories):
        n = int(report.confusion[i].sum())
        acc = report.per_class_acc[i]
        shown = "  --" if np.isnan(acc) else f"{acc:7.2f}"
        lines.append(f"{name:<{width}}  {shown:>7}  {n:>5}")
    lines.append("-" * (width + 16))
    lines.append(f"{'oAcc':<{width}}  {report.oacc:7.2f}  {report.n_samples:>5}")
    lines.append(f"{'mAcc':<{width}}  {report.macc:7.2f}")
    if report.absent_categories:
        lines.append("absent from test set: " + ", ".join(report.absent_categories))
    return "\n".join(lines)
