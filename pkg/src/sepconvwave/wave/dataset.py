"""Dataset generation, standard scaling and the binary dataset format.

A sample couples a parameter vector with the simulated displacement and
velocity on the zoom window plus their ring traces.  Files use the
``WDS1`` layout (little-endian): magic, format version u32, grid block,
sample count u64, then per-sample records of 3 float64 parameters
followed by the four tensors in the checkpoint tensor encoding (rank
u64, extents u64, float64 data).  Identical grids and samples produce
byte-identical files.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .grid import GridSpec, extract_boundary, restrict
from .sampling import WaveParams, lhs_sample
from .solver import solve_wave, velocity_field

__all__ = [
    "Sample",
    "WaveDataset",
    "Scaler",
    "default_bounds",
    "make_sample",
    "generate_dataset",
    "save_dataset",
    "load_dataset",
]

MAGIC = b"WDS1"
VERSION = 1


@dataclass(frozen=True)
class Sample:
    params: WaveParams
    u: np.ndarray
    v: np.ndarray
    boundary_u: np.ndarray
    boundary_v: np.ndarray


@dataclass
class WaveDataset:
    grid: GridSpec
    samples: list[Sample]

    def __len__(self) -> int:
        return len(self.samples)

    def stack(self, field: str) -> np.ndarray:
        """All samples' arrays stacked on a leading batch axis."""
        return np.stack([getattr(s, field) for s in self.samples])

    def param_matrix(self) -> np.ndarray:
        return np.array([list(s.params) for s in self.samples])


def default_bounds(grid: GridSpec) -> list[tuple[float, float]]:
    """Sampling box: omega in [pi, 4 pi], source anywhere in the domain."""
    return [
        (np.pi, 4.0 * np.pi),
        (-grid.lx, grid.lx),
        (-grid.ly, grid.ly),
    ]


def make_sample(params: WaveParams, grid: GridSpec) -> Sample:
    full_u = solve_wave(params, grid)
    full_v = velocity_field(full_u, grid.dt)
    return Sample(
        params=params,
        u=restrict(full_u, grid),
        v=restrict(full_v, grid),
        boundary_u=extract_boundary(full_u, grid),
        boundary_v=extract_boundary(full_v, grid),
    )


def generate_dataset(
    grid: GridSpec,
    n_samples: int,
    seed: int,
    bounds=None,
) -> WaveDataset:
    """Simulate ``n_samples`` parameter vectors drawn by stratified LHS.

    Sources are excluded from the zoom-window footprint, keeping the
    window source-free for the submodel.
    """
    if bounds is None:
        bounds = default_bounds(grid)
    params = lhs_sample(n_samples, bounds, seed=seed, exclusion=grid.zoom_footprint())
    return WaveDataset(grid, [make_sample(p, grid) for p in params])


class Scaler:
    """Standard scaler with one (mean, std) pair per field.

    Fit on the training split only; degenerate spreads fall back to
    ``std = 1`` so constants map to zero.
    """

    _GUARD = 1e-12

    def __init__(self):
        self.stats: dict[str, tuple[float, float]] = {}

    def fit(self, train: WaveDataset) -> "Scaler":
        for field in ("u", "v"):
            data = train.stack(field)
            std = float(data.std())
            self.stats[field] = (float(data.mean()), std if std > self._GUARD else 1.0)
        return self

    def transform(self, x: np.ndarray, field: str) -> np.ndarray:
        mean, std = self.stats[field]
        return (x - mean) / std

    def inverse(self, x: np.ndarray, field: str) -> np.ndarray:
        mean, std = self.stats[field]
        return x * std + mean


def _write_plain_tensor(fh, array: np.ndarray) -> None:
    data = np.asarray(array, dtype="<f8")
    fh.write(struct.pack("<Q", data.ndim))
    fh.write(struct.pack(f"<{data.ndim}Q", *data.shape))
    fh.write(data.tobytes())


def _read_plain_tensor(fh) -> np.ndarray:
    (rank,) = struct.unpack("<Q", fh.read(8))
    shape = struct.unpack(f"<{rank}Q", fh.read(8 * rank)) if rank else ()
    count = int(np.prod(shape)) if shape else 1
    return np.frombuffer(fh.read(8 * count), dtype="<f8").reshape(shape).astype(np.float64)


_GRID_FIELDS = ("lx", "ly", "c", "dt")
_GRID_INTS = ("nx", "ny", "zoom_ix", "zoom_iy", "zoom_nx", "zoom_ny", "nt")


def save_dataset(path, dataset: WaveDataset) -> None:
    path = Path(path)
    g = dataset.grid
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<I", VERSION))
        fh.write(struct.pack("<4d", *(getattr(g, f) for f in _GRID_FIELDS)))
        fh.write(struct.pack("<7Q", *(getattr(g, f) for f in _GRID_INTS)))
        fh.write(struct.pack("<Q", len(dataset.samples)))
        for s in dataset.samples:
            fh.write(struct.pack("<3d", *s.params))
            for field in (s.u, s.v, s.boundary_u, s.boundary_v):
                _write_plain_tensor(fh, field)


def load_dataset(path) -> WaveDataset:
    with open(path, "rb") as fh:
        if fh.read(4) != MAGIC:
            raise ValueError(f"{path}: not a dataset file (bad magic)")
        (version,) = struct.unpack("<I", fh.read(4))
        if version != VERSION:
            raise ValueError(f"{path}: unsupported dataset version {version}")
        floats = struct.unpack("<4d", fh.read(32))
        ints = struct.unpack("<7Q", fh.read(56))
        grid = GridSpec(
            **dict(zip(_GRID_FIELDS, floats)),
            **{k: int(v) for k, v in zip(_GRID_INTS, ints)},
        )
        (count,) = struct.unpack("<Q", fh.read(8))
        samples = []
        for _ in range(count):
            params = WaveParams(*struct.unpack("<3d", fh.read(24)))
            u = _read_plain_tensor(fh)
            v = _read_plain_tensor(fh)
            bu = _read_plain_tensor(fh)
            bv = _read_plain_tensor(fh)
            samples.append(Sample(params, u, v, bu, bv))
        return WaveDataset(grid, samples)
