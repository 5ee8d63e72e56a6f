"""Binary checkpoint container.

Layout::

    b"DSTXCKPT"                 8-byte magic
    uint32 LE                   format version
    uint64 LE                   manifest length n
    n bytes                     UTF-8 JSON manifest (sorted keys)
    blobs                       raw little-endian arrays, back to back

The manifest lists every blob as ``{"name", "dtype", "shape", "offset"}``
with offsets relative to the start of the blob section, together with the
model dimensions, mode, vocabulary and its SHA-256 hash.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

MAGIC = b"DSTXCKPT"
VERSION = 1
_DTYPES = {"<f8", "<f4", "<i8"}


class CheckpointError(ValueError):
    pass


@dataclass
class Checkpoint:
    meta: dict
    arrays: dict = field(default_factory=dict)

    def group(self, prefix):
        """Arrays under ``prefix/`` with the prefix stripped."""
        n = len(prefix) + 1
        return {k[n:]: v for k, v in self.arrays.items() if k.startswith(prefix + "/")}


def _le(a):
    a = np.asarray(a)
    if a.dtype.kind == "f":
        return a.astype("<f4" if a.dtype.itemsize == 4 else "<f8", copy=False)
    if a.dtype.kind in "iu":
        return a.astype("<i8", copy=False)
    raise CheckpointError(f"unsupported dtype {a.dtype}")


def dumps(ckpt: Checkpoint) -> bytes:
    entries, blobs, offset = [], [], 0
    for name in sorted(ckpt.arrays):
        a = np.ascontiguousarray(_le(ckpt.arrays[name]))
        raw = a.tobytes()
        entries.append(
            {"name": name, "dtype": a.dtype.str, "shape": list(a.shape), "offset": offset}
        )
        blobs.append(raw)
        offset += len(raw)
    manifest = dict(ckpt.meta, arrays=entries)
    text = json.dumps(manifest, sort_keys=True, separators=(",", ":")).encode("utf-8")
    return MAGIC + struct.pack("<IQ", VERSION, len(text)) + text + b"".join(blobs)


def loads(data: bytes, expected_vocab_hash=None) -> Checkpoint:
    if data[:8] != MAGIC:
        raise CheckpointError("not a checkpoint file (bad magic)")
    try:
        version, n = struct.unpack("<IQ", data[8:20])
    except struct.error:
        raise CheckpointError("truncated checkpoint header") from None
    if version != VERSION:
        raise CheckpointError(f"unsupported checkpoint version {version}")
    try:
        manifest = json.loads(data[20 : 20 + n].decode("utf-8"))
        entries = manifest.pop("arrays")
    except (UnicodeDecodeError, json.JSONDecodeError, KeyError, AttributeError) as e:
        raise CheckpointError(f"corrupted manifest: {e}") from None

    vocab = manifest.get("vocab")
    if vocab is not None:
        import hashlib

        h = hashlib.sha256("\n".join(vocab).encode("utf-8")).hexdigest()
        if h != manifest.get("vocab_hash"):
            raise CheckpointError("vocabulary does not match its recorded hash")
    if expected_vocab_hash is not None and manifest.get("vocab_hash") != expected_vocab_hash:
        raise CheckpointError("checkpoint vocabulary hash mismatch")

    body = memoryview(data)[20 + n :]
    arrays = {}
    try:
        for e in entries:
            if e["dtype"] not in _DTYPES:
                raise CheckpointError(f"bad dtype {e['dtype']!r} for {e['name']}")
            dt = np.dtype(e["dtype"])
            count = int(np.prod(e["shape"], dtype=np.int64))
            start = e["offset"]
            stop = start + count * dt.itemsize
            if stop > len(body):
                raise CheckpointError(f"blob {e['name']} runs past end of file")
            a = np.frombuffer(body[start:stop], dtype=dt).reshape(e["shape"])
            arrays[e["name"]] = a.astype(dt.newbyteorder("="), copy=True)
    except (KeyError, TypeError) as e:
        raise CheckpointError(f"corrupted manifest entry: {e}") from None
    return Checkpoint(manifest, arrays)


def save(ckpt: Checkpoint, path):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_bytes(dumps(ckpt))
    tmp.replace(path)


def load(path, expected_vocab_hash=None) -> Checkpoint:
    return loads(Path(path).read_bytes(), expected_vocab_hash)
