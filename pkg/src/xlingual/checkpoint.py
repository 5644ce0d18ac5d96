"""Binary checkpoint serialization.

Layout, all integers little-endian:

  8 bytes   magic "MSIMCSE1"
  u32       tensor count
  per tensor:
    u16     name length in bytes
    bytes   UTF-8 name
    u8      rank
    u64*r   dimensions
    f64*n   row-major data
  u32       CRC32 of every preceding byte

Identical parameters always serialize to identical bytes: tensors are
written in sorted-name order. Loading validates magic, structure, and
checksum and raises CorruptCheckpointError on any inconsistency rather
than crashing.
"""

from __future__ import annotations

import struct
import zlib
from pathlib import Path

import numpy as np

from . import autodiff as ad
from .encoder import EncoderParams
from .errors import ConfigError, CorruptCheckpointError, ShapeError

MAGIC = b"MSIMCSE1"
_MAX_RANK = 8
_MAX_NAME = 4096


def save_tensors(named: dict[str, np.ndarray], path: str | Path) -> None:
    """Serialize a name -> array mapping in sorted-name order."""
    chunks = [MAGIC, struct.pack("<I", len(named))]
    for name in sorted(named):
        arr = np.asarray(named[name], dtype=np.float64)
        if arr.ndim:  # ascontiguousarray would promote rank-0 to rank-1
            arr = np.ascontiguousarray(arr)
        if arr.ndim > _MAX_RANK:
            raise CorruptCheckpointError(
                f"tensor {name!r} has rank {arr.ndim}, format allows up to {_MAX_RANK}"
            )
        encoded = name.encode("utf-8")
        if len(encoded) > _MAX_NAME:
            raise CorruptCheckpointError(f"tensor name too long ({len(encoded)} bytes)")
        chunks.append(struct.pack("<H", len(encoded)))
        chunks.append(encoded)
        chunks.append(struct.pack("<B", arr.ndim))
        for dim in arr.shape:
            chunks.append(struct.pack("<Q", dim))
        chunks.append(arr.astype("<f8").tobytes(order="C"))
    body = b"".join(chunks)
    crc = zlib.crc32(body) & 0xFFFFFFFF
    with open(path, "wb") as fh:
        fh.write(body)
        fh.write(struct.pack("<I", crc))


def load_tensors(path: str | Path) -> dict[str, np.ndarray]:
    """Parse a checkpoint file back into a name -> array mapping."""
    try:
        blob = Path(path).read_bytes()
    except OSError as exc:
        raise CorruptCheckpointError(f"cannot read checkpoint {path}: {exc}") from None
    if len(blob) < len(MAGIC) + 4 + 4:
        raise CorruptCheckpointError(f"{path}: file too short to be a checkpoint")
    if blob[: len(MAGIC)] != MAGIC:
        raise CorruptCheckpointError(f"{path}: bad magic bytes")
    body, (stored_crc,) = blob[:-4], struct.unpack("<I", blob[-4:])
    if zlib.crc32(body) & 0xFFFFFFFF != stored_crc:
        raise CorruptCheckpointError(f"{path}: checksum mismatch")

    offset = len(MAGIC)

    def take(n: int, what: str) -> bytes:
        nonlocal offset
        if offset + n > len(body):
            raise CorruptCheckpointError(f"{path}: truncated while reading {what}")
        piece = body[offset:offset + n]
        offset += n
        return piece

    (count,) = struct.unpack("<I", take(4, "tensor count"))
    named: dict[str, np.ndarray] = {}
    for i in range(count):
        (name_len,) = struct.unpack("<H", take(2, f"tensor {i} name length"))
        if name_len == 0 or name_len > _MAX_NAME:
            raise CorruptCheckpointError(f"{path}: tensor {i} has invalid name length")
        try:
            name = take(name_len, f"tensor {i} name").decode("utf-8")
        except UnicodeDecodeError:
            raise CorruptCheckpointError(f"{path}: tensor {i} name is not UTF-8") from None
        (rank,) = struct.unpack("<B", take(1, f"tensor {name!r} rank"))
        if rank > _MAX_RANK:
            raise CorruptCheckpointError(
                f"{path}: tensor {name!r} claims rank {rank}, allowed up to {_MAX_RANK}"
            )
        dims = []
        for d in range(rank):
            (dim,) = struct.unpack("<Q", take(8, f"tensor {name!r} dim {d}"))
            dims.append(dim)
        size = 1
        for dim in dims:
            size *= dim
        if size * 8 > len(body) - offset:
            raise CorruptCheckpointError(
                f"{path}: tensor {name!r} shape {tuple(dims)} exceeds remaining data"
            )
        raw = take(size * 8, f"tensor {name!r} data")
        if name in named:
            raise CorruptCheckpointError(f"{path}: duplicate tensor name {name!r}")
        named[name] = np.frombuffer(raw, dtype="<f8").reshape(dims).astype(np.float64)
    if offset != len(body):
        raise CorruptCheckpointError(f"{path}: {len(body) - offset} trailing bytes")
    return named


def save_checkpoint(params: EncoderParams, path: str | Path) -> None:
    save_tensors(params.named_tensors(), path)


def load_checkpoint(path: str | Path) -> EncoderParams:
    """Rebuild encoder parameters from a checkpoint file."""
    named = load_tensors(path)
    required = {"embedding", "output.weight", "output.bias", "dropout_rate"}
    missing = required - named.keys()
    if missing:
        raise CorruptCheckpointError(f"{path}: missing tensors {sorted(missing)}")
    hidden_idx = set()
    for name in named:
        if name.startswith("hidden."):
            parts = name.split(".")
            if len(parts) != 3 or parts[2] not in ("weight", "bias") or not parts[1].isdigit():
                raise CorruptCheckpointError(f"{path}: unrecognized tensor name {name!r}")
            hidden_idx.add(int(parts[1]))
        elif name not in required:
            raise CorruptCheckpointError(f"{path}: unrecognized tensor name {name!r}")
    if hidden_idx != set(range(len(hidden_idx))):
        raise CorruptCheckpointError(f"{path}: hidden layer indices are not contiguous")
    hidden = []
    for i in range(len(hidden_idx)):
        w_name, b_name = f"hidden.{i}.weight", f"hidden.{i}.bias"
        if w_name not in named or b_name not in named:
            raise CorruptCheckpointError(f"{path}: hidden layer {i} is incomplete")
        hidden.append((ad.leaf(named[w_name], w_name), ad.leaf(named[b_name], b_name)))
    dropout = named["dropout_rate"]
    if dropout.ndim != 0:
        raise CorruptCheckpointError(f"{path}: dropout_rate must be a scalar tensor")
    try:
        return EncoderParams(
            embedding=ad.leaf(named["embedding"], "embedding"),
            hidden=tuple(hidden),
            out_w=ad.leaf(named["output.weight"], "output.weight"),
            out_b=ad.leaf(named["output.bias"], "output.bias"),
            dropout=float(dropout),
        )
    except (ShapeError, ConfigError) as exc:
        raise CorruptCheckpointError(f"{path}: inconsistent tensors ({exc})") from None
