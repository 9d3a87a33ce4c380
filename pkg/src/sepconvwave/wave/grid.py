"""Cartesian simulation grid with a nested zoom window.

The full domain ``[-lx, lx] x [-ly, ly]`` is discretized by ``nx x ny``
nodes including the boundary; the zone of interest is a contiguous index
window of that node set, so restriction is a pure index-window copy and
the window's rectangle ring gives the boundary-trace nodes.  The time
step is tied to the explicit-scheme stability bound
``c * dt * sqrt(1/dx^2 + 1/dy^2) <= 1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = ["GridSpec", "make_grid", "restrict", "extract_boundary", "boundary_index_arrays"]


@dataclass(frozen=True)
class GridSpec:
    lx: float
    ly: float
    nx: int
    ny: int
    zoom_ix: int
    zoom_iy: int
    zoom_nx: int
    zoom_ny: int
    nt: int
    dt: float
    c: float

    @property
    def dx(self) -> float:
        return 2.0 * self.lx / (self.nx - 1)

    @property
    def dy(self) -> float:
        return 2.0 * self.ly / (self.ny - 1)

    @property
    def t_final(self) -> float:
        return (self.nt - 1) * self.dt

    @property
    def n_boundary(self) -> int:
        return 2 * self.zoom_ny + 2 * (self.zoom_nx - 2)

    def xs(self) -> np.ndarray:
        return -self.lx + self.dx * np.arange(self.nx)

    def ys(self) -> np.ndarray:
        return -self.ly + self.dy * np.arange(self.ny)

    def times(self) -> np.ndarray:
        return self.dt * np.arange(self.nt)

    def cfl_number(self) -> float:
        return self.c * self.dt * math.sqrt(1.0 / self.dx**2 + 1.0 / self.dy**2)

    def zoom_footprint(self) -> tuple[float, float, float, float]:
        """(x_lo, x_hi, y_lo, y_hi) covered by the zoom window nodes."""
        xs, ys = self.xs(), self.ys()
        return (
            xs[self.zoom_ix],
            xs[self.zoom_ix + self.zoom_nx - 1],
            ys[self.zoom_iy],
            ys[self.zoom_iy + self.zoom_ny - 1],
        )

    def validate(self) -> None:
        if self.nx < 3 or self.ny < 3 or self.nt < 2:
            raise ValueError("grid needs nx, ny >= 3 and nt >= 2")
        if self.zoom_nx < 3 or self.zoom_ny < 3:
            raise ValueError("zoom window needs at least 3 nodes per side")
        if not (0 <= self.zoom_ix and self.zoom_ix + self.zoom_nx <= self.nx):
            raise ValueError("zoom window outside the grid in x")
        if not (0 <= self.zoom_iy and self.zoom_iy + self.zoom_ny <= self.ny):
            raise ValueError("zoom window outside the grid in y")
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if self.cfl_number() > 1.0:
            raise ValueError(
                f"stability bound violated: c*dt*sqrt(1/dx^2+1/dy^2) = "
                f"{self.cfl_number():.6f} > 1"
            )


def make_grid(
    nx: int = 64,
    ny: int = 64,
    zoom_nx: int = 16,
    zoom_ny: int = 16,
    nt: int = 64,
    lx: float = 1.0,
    ly: float = 1.0,
    c: float = 1.0,
    cfl_margin: float = 0.9,
    t_final: float | None = None,
    zoom_ix: int | None = None,
    zoom_iy: int | None = None,
) -> GridSpec:
    """Build a validated grid.

    Without ``t_final`` the time step is the stability bound scaled by
    ``cfl_margin`` and the final time follows from ``nt``.  With
    ``t_final`` given, ``nt`` is raised as needed so the step stays
    within the margin and ``dt = t_final / (nt - 1)`` exactly.
    """
    if not 0 < cfl_margin <= 1.0:
        raise ValueError("cfl_margin must be in (0, 1]")
    dx = 2.0 * lx / (nx - 1)
    dy = 2.0 * ly / (ny - 1)
    dt_max = cfl_margin / (c * math.sqrt(1.0 / dx**2 + 1.0 / dy**2))
    if t_final is None:
        dt = dt_max
    else:
        nt = max(int(math.ceil(t_final / dt_max)) + 1, nt, 2)
        dt = t_final / (nt - 1)
    if zoom_ix is None:
        zoom_ix = (nx - zoom_nx) // 2
    if zoom_iy is None:
        zoom_iy = (ny - zoom_ny) // 2
    grid = GridSpec(
        lx=lx, ly=ly, nx=nx, ny=ny,
        zoom_ix=zoom_ix, zoom_iy=zoom_iy, zoom_nx=zoom_nx, zoom_ny=zoom_ny,
        nt=nt, dt=dt, c=c,
    )
    grid.validate()
    return grid


def restrict(field: np.ndarray, grid: GridSpec) -> np.ndarray:
    """Index-window copy of a full-domain field onto the zoom window.

    Works on ``[nx, ny]`` and ``[nt, nx, ny]`` arrays alike.
    """
    if field.shape[-2] != grid.nx or field.shape[-1] != grid.ny:
        raise ValueError(f"expected trailing shape ({grid.nx}, {grid.ny}), got {field.shape}")
    return field[
        ...,
        grid.zoom_ix : grid.zoom_ix + grid.zoom_nx,
        grid.zoom_iy : grid.zoom_iy + grid.zoom_ny,
    ].copy()


def boundary_index_arrays(grid: GridSpec) -> tuple[np.ndarray, np.ndarray]:
    """Zoom-relative (i, j) indices of the window's rectangle ring.

    Canonical order: first row, last row, then the interior of the first
    and last columns.  The order is part of the trace format.
    """
    znx, zny = grid.zoom_nx, grid.zoom_ny
    ii = []
    jj = []
    ii += [0] * zny
    jj += list(range(zny))
    ii += [znx - 1] * zny
    jj += list(range(zny))
    ii += list(range(1, znx - 1))
    jj += [0] * (znx - 2)
    ii += list(range(1, znx - 1))
    jj += [zny - 1] * (znx - 2)
    return np.array(ii), np.array(jj)


def extract_boundary(field: np.ndarray, grid: GridSpec) -> np.ndarray:
    """Traces of a full-domain ``[nt, nx, ny]`` field on the zoom ring."""
    zoom = restrict(field, grid)
    ii, jj = boundary_index_arrays(grid)
    if zoom.ndim == 2:
        return zoom[ii, jj].copy()
    return zoom[:, ii, jj].copy()
