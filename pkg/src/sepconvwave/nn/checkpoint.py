"""Binary model checkpoints.

Layout (everything little-endian):

* magic ``b"SCNN"``
* format version, u32
* a record per tensor, until end of file:
  name length u32, name bytes (UTF-8), rank u64, extents rank x u64,
  data as float64

Round trips are bit-exact: the float64 payload is written raw.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

__all__ = ["MAGIC", "VERSION", "save_tensors", "load_tensors", "save_model", "load_model"]

MAGIC = b"SCNN"
VERSION = 1


def write_tensor(fh, name: str, array: np.ndarray) -> None:
    data = np.asarray(array, dtype="<f8")
    if data.ndim and not data.flags.c_contiguous:
        data = np.ascontiguousarray(data)
    encoded = name.encode("utf-8")
    fh.write(struct.pack("<I", len(encoded)))
    fh.write(encoded)
    fh.write(struct.pack("<Q", data.ndim))
    fh.write(struct.pack(f"<{data.ndim}Q", *data.shape))
    fh.write(data.tobytes())


def read_tensor(fh):
    head = fh.read(4)
    if not head:
        return None
    (name_len,) = struct.unpack("<I", head)
    name = fh.read(name_len).decode("utf-8")
    (rank,) = struct.unpack("<Q", fh.read(8))
    shape = struct.unpack(f"<{rank}Q", fh.read(8 * rank)) if rank else ()
    count = int(np.prod(shape)) if shape else 1
    data = np.frombuffer(fh.read(8 * count), dtype="<f8").reshape(shape)
    return name, data.astype(np.float64)


def save_tensors(path, tensors: dict[str, np.ndarray]) -> None:
    path = Path(path)
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<I", VERSION))
        for name, array in tensors.items():
            write_tensor(fh, name, array)


def load_tensors(path) -> dict[str, np.ndarray]:
    with open(path, "rb") as fh:
        if fh.read(4) != MAGIC:
            raise ValueError(f"{path}: not a checkpoint file (bad magic)")
        (version,) = struct.unpack("<I", fh.read(4))
        if version != VERSION:
            raise ValueError(f"{path}: unsupported checkpoint version {version}")
        tensors = {}
        while True:
            record = read_tensor(fh)
            if record is None:
                return tensors
            tensors[record[0]] = record[1]


def save_model(path, model) -> None:
    save_tensors(path, model.state_dict())


def load_model(path, model) -> None:
    model.load_state_dict(load_tensors(path))
