"""Spatial grids on (0, x_max] with exact weighted cell masses.

A grid is a partition of (0, x_max] into cells; the quadrature weight of a
cell is its exact mu-mass and functions are sampled at cell midpoints.  Cell
edges can be snapped to prescribed breakpoints so that indicator functions of
section intervals integrate exactly.
"""

from __future__ import annotations

import math
from collections import OrderedDict
from dataclasses import dataclass
from typing import Callable, Iterable

import numpy as np

from .errors import MixedGrids
from .measure import Interval, WeightedMeasure


class Grid:
    """Nonuniform grid with geometric clustering near the origin.

    ``ratio`` controls the stretch: cell widths grow by the factor
    ratio^(1/n) per cell, so ratio = 1 gives a uniform grid and larger values
    refine toward 0 where the weight x^alpha needs resolution.
    """

    def __init__(self, measure: WeightedMeasure, edges: np.ndarray):
        edges = np.asarray(edges, dtype=np.float64)
        if edges.ndim != 1 or edges.size < 3:
            raise ValueError("need at least two cells")
        if edges[0] < 0.0 or np.any(np.diff(edges) <= 0.0):
            raise ValueError("edges must start at >= 0 and increase strictly")
        self.measure = measure
        self.edges = edges
        self.nodes = 0.5 * (edges[:-1] + edges[1:])
        p = 1.0 + measure.alpha
        powers = edges**p / p
        self.weights = np.diff(powers)
        self._matrix_cache: OrderedDict = OrderedDict()

    @classmethod
    def build(
        cls,
        measure: WeightedMeasure,
        n: int,
        x_max: float,
        ratio: float = 100.0,
        breakpoints: Iterable[float] = (),
    ) -> "Grid":
        if n < 2 or x_max <= 0.0 or ratio < 1.0:
            raise ValueError("need n >= 2, x_max > 0, ratio >= 1")
        i = np.arange(n + 1, dtype=np.float64) / n
        if ratio == 1.0:
            edges = x_max * i
        else:
            edges = x_max * (ratio**i - 1.0) / (ratio - 1.0)
        edges[0] = 0.0
        edges[-1] = x_max
        pts = sorted({float(b) for b in breakpoints if 0.0 < b < x_max})
        if pts:
            keep = np.ones(edges.size, dtype=bool)
            for b in pts:
                j = int(np.searchsorted(edges, b))
                # drop stretched edges crowding the breakpoint
                for jj in (j - 1, j):
                    if 0 < jj < edges.size - 1:
                        local = edges[min(jj + 1, edges.size - 1)] - edges[max(jj - 1, 0)]
                        if abs(edges[jj] - b) < 0.25 * local:
                            keep[jj] = False
            edges = np.unique(np.concatenate([edges[keep], np.asarray(pts)]))
        return cls(measure, edges)

    def __len__(self) -> int:
        return self.nodes.size

    @property
    def x_max(self) -> float:
        return float(self.edges[-1])

    def index_of(self, x: float) -> int:
        """Index of the cell whose node is nearest to x."""
        j = int(np.clip(np.searchsorted(self.edges, x) - 1, 0, len(self) - 1))
        if j + 1 < len(self) and abs(self.nodes[j + 1] - x) < abs(self.nodes[j] - x):
            return j + 1
        return j

    def snap_edge(self, x: float) -> int:
        """Index of the edge nearest to x."""
        j = int(np.clip(np.searchsorted(self.edges, x), 0, self.edges.size - 1))
        if j > 0 and abs(self.edges[j - 1] - x) <= abs(self.edges[j] - x):
            return j - 1
        return j

    def snap_interval(self, interval: Interval | tuple[float, float]) -> "CellRange":
        a, b = (interval.a, interval.b) if isinstance(interval, Interval) else interval
        i0 = self.snap_edge(a)
        i1 = self.snap_edge(b)
        if i1 <= i0:
            i1 = min(i0 + 1, self.edges.size - 1)
            i0 = i1 - 1
        return CellRange(self, i0, i1)

    def indicator(self, cells: "CellRange") -> np.ndarray:
        out = np.zeros(len(self))
        out[cells.i0 : cells.i1] = 1.0
        return out

    def cache_get(self, key):
        if key in self._matrix_cache:
            self._matrix_cache.move_to_end(key)
            return self._matrix_cache[key]
        return None

    def cache_put(self, key, value, cap: int = 16):
        self._matrix_cache[key] = value
        self._matrix_cache.move_to_end(key)
        while len(self._matrix_cache) > cap:
            self._matrix_cache.popitem(last=False)


@dataclass(frozen=True)
class CellRange:
    """Contiguous run of grid cells; the snapped form of an interval."""

    grid: Grid
    i0: int
    i1: int

    @property
    def interval(self) -> Interval:
        return Interval(float(self.grid.edges[self.i0]), float(self.grid.edges[self.i1]))

    @property
    def mass(self) -> float:
        """Exact mu-mass of the snapped interval (sum of cell masses)."""
        return float(self.grid.weights[self.i0 : self.i1].sum())

    @property
    def length(self) -> float:
        return float(self.grid.edges[self.i1] - self.grid.edges[self.i0])

    def __len__(self) -> int:
        return self.i1 - self.i0


class GridFunction:
    """Function sampled at grid nodes; norms use the grid's exact weights."""

    __slots__ = ("grid", "values")

    def __init__(self, grid: Grid, values: np.ndarray):
        values = np.asarray(values, dtype=np.float64)
        if values.shape != grid.nodes.shape:
            raise ValueError("value array does not match grid")
        self.grid = grid
        self.values = values

    @classmethod
    def from_callable(cls, grid: Grid, f: Callable) -> "GridFunction":
        return cls(grid, np.asarray(f(grid.nodes), dtype=np.float64))

    @classmethod
    def ones(cls, grid: Grid) -> "GridFunction":
        return cls(grid, np.ones(len(grid)))

    @classmethod
    def point_mass(cls, grid: Grid, x: float) -> "GridFunction":
        """Discrete unit point mass: indicator of one cell over its mu-mass."""
        j = grid.index_of(x)
        values = np.zeros(len(grid))
        values[j] = 1.0 / grid.weights[j]
        return cls(grid, values)

    def _check(self, other: "GridFunction") -> None:
        if other.grid is not self.grid:
            raise MixedGrids("grid functions live on different grids")

    def integral(self) -> float:
        return float(self.grid.weights @ self.values)

    def l1(self) -> float:
        return float(self.grid.weights @ np.abs(self.values))

    def l2(self) -> float:
        return math.sqrt(float(self.grid.weights @ self.values**2))

    def linf(self) -> float:
        return float(np.max(np.abs(self.values)))

    def __add__(self, other: "GridFunction") -> "GridFunction":
        self._check(other)
        return GridFunction(self.grid, self.values + other.values)

    def __sub__(self, other: "GridFunction") -> "GridFunction":
        self._check(other)
        return GridFunction(self.grid, self.values - other.values)

    def __mul__(self, scalar: float) -> "GridFunction":
        return GridFunction(self.grid, self.values * float(scalar))

    __rmul__ = __mul__

    def copy(self) -> "GridFunction":
        return GridFunction(self.grid, self.values.copy())
