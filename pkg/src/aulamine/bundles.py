"""Shared on-disk bundle layout for trained models.

A bundle is a directory holding a JSON ``manifest.json`` plus raw binary
array files. Arrays are stored row-major, little-endian, with the dtype
and shape declared in the manifest, so a reader can verify file lengths
before trusting the content.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

import numpy as np

__all__ = [
    "BundleError",
    "write_manifest",
    "read_manifest",
    "write_array",
    "read_array",
    "write_lines",
    "read_lines",
    "file_sha256",
    "bundle_sha256",
]

MANIFEST_NAME = "manifest.json"

# dtype tags used in manifests; always little-endian on disk
_DTYPES = {"float32": "<f4", "int32": "<i4"}


class BundleError(Exception):
    """Raised when a bundle is missing, corrupted, or version-incompatible."""


def write_manifest(bundle_dir: Path, manifest: dict) -> None:
    bundle_dir = Path(bundle_dir)
    bundle_dir.mkdir(parents=True, exist_ok=True)
    path = bundle_dir / MANIFEST_NAME
    path.write_text(
        json.dumps(manifest, indent=2, sort_keys=True, ensure_ascii=False) + "\n",
        encoding="utf-8",
    )


def read_manifest(bundle_dir: Path, kind: str, version: int) -> dict:
    """Load and validate a bundle manifest.

    Checks that the manifest exists, declares the expected ``kind``, and
    carries the expected format ``version``.
    """
    path = Path(bundle_dir) / MANIFEST_NAME
    if not path.is_file():
        raise BundleError(f"no bundle manifest at {path}")
    try:
        manifest = json.loads(path.read_text(encoding="utf-8"))
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise BundleError(f"unreadable manifest at {path}: {exc}") from exc
    if manifest.get("kind") != kind:
        raise BundleError(
            f"bundle at {bundle_dir} is a {manifest.get('kind')!r} bundle, expected {kind!r}"
        )
    got = manifest.get("format_version")
    if got != version:
        raise BundleError(
            f"bundle format version mismatch at {bundle_dir}: got {got}, expected {version}"
        )
    return manifest


def write_array(bundle_dir: Path, name: str, array: np.ndarray) -> dict:
    """Write ``array`` to ``<bundle_dir>/<name>.bin`` and return its manifest entry."""
    if array.dtype == np.float32:
        tag = "float32"
    elif array.dtype == np.int32:
        tag = "int32"
    else:
        raise BundleError(f"unsupported array dtype {array.dtype} for {name}")
    data = np.ascontiguousarray(array).astype(_DTYPES[tag], copy=False).tobytes()
    path = Path(bundle_dir) / f"{name}.bin"
    path.write_bytes(data)
    return {"file": f"{name}.bin", "dtype": tag, "shape": list(array.shape)}


def read_array(bundle_dir: Path, entry: dict) -> np.ndarray:
    """Read an array previously written by :func:`write_array`.

    Verifies the file length against the declared shape before decoding.
    """
    path = Path(bundle_dir) / entry["file"]
    if not path.is_file():
        raise BundleError(f"missing array file {path}")
    dtype = np.dtype(_DTYPES[entry["dtype"]])
    shape = tuple(int(n) for n in entry["shape"])
    expected = int(np.prod(shape)) * dtype.itemsize if shape else dtype.itemsize
    data = path.read_bytes()
    if len(data) != expected:
        raise BundleError(
            f"corrupted array file {path}: {len(data)} bytes, expected {expected}"
        )
    return np.frombuffer(data, dtype=dtype).reshape(shape).copy()


def write_lines(bundle_dir: Path, name: str, lines: list[str]) -> dict:
    path = Path(bundle_dir) / f"{name}.txt"
    path.write_text("".join(line + "\n" for line in lines), encoding="utf-8")
    return {"file": f"{name}.txt", "count": len(lines)}


def read_lines(bundle_dir: Path, entry: dict) -> list[str]:
    path = Path(bundle_dir) / entry["file"]
    if not path.is_file():
        raise BundleError(f"missing text file {path}")
    lines = path.read_text(encoding="utf-8").splitlines()
    if len(lines) != entry["count"]:
        raise BundleError(
            f"corrupted text file {path}: {len(lines)} lines, expected {entry['count']}"
        )
    return lines


def file_sha256(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


def bundle_sha256(bundle_dir: Path) -> str:
    """Hash of every file in a bundle directory, stable in file order."""
    h = hashlib.sha256()
    for path in sorted(Path(bundle_dir).rglob("*")):
        if path.is_file():
            h.update(path.relative_to(bundle_dir).as_posix().encode("utf-8"))
            h.update(file_sha256(path).encode("ascii"))
    return h.hexdigest()
