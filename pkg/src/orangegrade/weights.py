"""Flat named-array weight archive.

Binary layout, all integers little-endian u32 unless noted::

    magic        4 bytes  b"OGWA"
    version      u32      1
    kind_len     u32      then kind_len bytes of UTF-8 architecture name
    num_classes  u32
    count        u32      number of records
    count x record:
        name_len u32, name (UTF-8)
        dtype    u8       0 = float32
        ndim     u32, then ndim x u32 dims
        data     prod(dims) x float32, little-endian, C order

Records keep the order they were written in, so save -> load -> save is
byte-identical.
"""

from __future__ import annotations

import struct
from collections import OrderedDict
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

MAGIC = b"OGWA"
VERSION = 1
_F32 = 0


class WeightsFileMissing(FileNotFoundError):
    pass


class ArchiveFormatError(ValueError):
    pass


@dataclass
class WeightArchive:
    kind: str
    num_classes: int
    tensors: "OrderedDict[str, np.ndarray]" = field(default_factory=OrderedDict)

    def to_bytes(self) -> bytes:
        out = [MAGIC, struct.pack("<I", VERSION)]
        kind = self.kind.encode("utf-8")
        out += [struct.pack("<I", len(kind)), kind]
        out += [struct.pack("<II", self.num_classes, len(self.tensors))]
        for name, arr in self.tensors.items():
            raw = name.encode("utf-8")
            arr = np.ascontiguousarray(arr, dtype="<f4")
            out += [struct.pack("<I", len(raw)), raw, struct.pack("<BI", _F32, arr.ndim)]
            out += [struct.pack(f"<{arr.ndim}I", *arr.shape), arr.tobytes()]
        return b"".join(out)

    @classmethod
    def from_bytes(cls, buf: bytes) -> "WeightArchive":
        view = memoryview(buf)
        pos = 0

        def take(n):
            nonlocal pos
            if pos + n > len(view):
                raise ArchiveFormatError("truncated weight archive")
            chunk = view[pos:pos + n]
            pos += n
            return chunk

        def u32():
            return struct.unpack("<I", take(4))[0]

        if bytes(take(4)) != MAGIC:
            raise ArchiveFormatError("not a weight archive (bad magic)")
        version = u32()
        if version != VERSION:
            raise ArchiveFormatError(f"unsupported archive version {version}")
        kind = bytes(take(u32())).decode("utf-8")
        num_classes = u32()
        count = u32()
        tensors = OrderedDict()
        for _ in range(count):
            name = bytes(take(u32())).decode("utf-8")
            (dtype,) = struct.unpack("<B", take(1))
            if dtype != _F32:
                raise ArchiveFormatError(f"{name}: unsupported dtype code {dtype}")
            ndim = u32()
            shape = struct.unpack(f"<{ndim}I", take(4 * ndim))
            n = int(np.prod(shape, dtype=np.int64))
            data = np.frombuffer(take(4 * n), dtype="<f4").reshape(shape)
            tensors[name] = data.astype(np.float32)
        if pos != len(view):
            raise ArchiveFormatError("trailing bytes after last record")
        return cls(kind, num_classes, tensors)

    def save(self, path) -> None:
        Path(path).write_bytes(self.to_bytes())


def load_archive(path) -> WeightArchive:
    path = Path(path)
    if not path.is_file():
        raise WeightsFileMissing(f"weight archive not found: {path}")
    return WeightArchive.from_bytes(path.read_bytes())
