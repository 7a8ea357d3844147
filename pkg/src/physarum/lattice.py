"""The 2D environment: habitability mask, chemoattractant field, and the
diffusion/decay update.

Coordinates are continuous; the cell containing a point is
``(floor(x), floor(y))`` with row-major ``[y, x]`` array indexing.  The x axis
always wraps periodically.  The y axis is closed for the tube arena and only
wraps on the all-habitable torus used by diffusion tests.
"""

from __future__ import annotations

import numpy as np

from . import _kernels
from .errors import ConfigError


class ArenaMask:
    """Which cells agents and trail may occupy.

    The mask is immutable after construction.  ``wrap_y`` controls vertical
    wrap in :func:`diffuse_and_decay` only; agent movement always treats the
    vertical extent as closed, which is indistinguishable on arenas whose
    borders are walls.
    """

    __slots__ = ("habitable", "wrap_y", "__weakref__")

    def __init__(self, habitable: np.ndarray, wrap_y: bool = False):
        arr = np.ascontiguousarray(habitable, dtype=bool)
        if arr.ndim != 2:
            raise ValueError(f"habitable mask must be 2-D, got shape {arr.shape}")
        height, width = arr.shape
        if width < 3 or height < 3:
            raise ConfigError(f"arena must be at least 3x3 cells, got {width}x{height}")
        if not arr.any():
            raise ConfigError("arena has no habitable cells")
        arr.setflags(write=False)
        self.habitable = arr
        self.wrap_y = bool(wrap_y)

    @property
    def width(self) -> int:
        return self.habitable.shape[1]

    @property
    def height(self) -> int:
        return self.habitable.shape[0]

    @property
    def habitable_count(self) -> int:
        return int(self.habitable.sum())

    def habitable_u8(self) -> np.ndarray:
        # Zero-copy view for the compiled kernels.
        return self.habitable.view(np.uint8)

    def __repr__(self) -> str:
        return (f"ArenaMask({self.width}x{self.height}, "
                f"{self.habitable_count} habitable, wrap_y={self.wrap_y})")


def build_tube_arena(width: int, height: int, border_rows: int) -> ArenaMask:
    """Full-width habitable band with inhabitable border rows above and below.

    The left and right edges carry no wall; the horizontal wrap joins them.
    """
    width = int(width)
    height = int(height)
    border_rows = int(border_rows)
    if border_rows < 0:
        raise ConfigError(f"border_rows must be >= 0, got {border_rows}")
    if width < 3 or height < 3:
        raise ConfigError(f"arena must be at least 3x3 cells, got {width}x{height}")
    if height <= 2 * border_rows:
        raise ConfigError(
            f"no habitable band remains: height {height} with {border_rows} border rows"
        )
    habitable = np.zeros((height, width), dtype=bool)
    habitable[border_rows:height - border_rows, :] = True
    return ArenaMask(habitable, wrap_y=False)


def build_torus(width: int, height: int) -> ArenaMask:
    """Fully habitable lattice wrapping in both axes (diffusion test bed)."""
    return ArenaMask(np.ones((int(height), int(width)), dtype=bool), wrap_y=True)


class TrailLattice:
    """Scalar chemoattractant concentrations, one value per cell.

    Values are non-negative, and 0 at every inhabitable cell after each
    simulation step.  Double precision by default; pass ``dtype=np.float32``
    to :meth:`zeros` for a single-precision field.
    """

    __slots__ = ("values",)

    def __init__(self, values: np.ndarray):
        arr = np.ascontiguousarray(values)
        if arr.ndim != 2:
            raise ValueError(f"trail must be 2-D, got shape {arr.shape}")
        if not np.issubdtype(arr.dtype, np.floating):
            arr = arr.astype(np.float64)
        self.values = arr

    @classmethod
    def zeros(cls, mask: ArenaMask, dtype=np.float64) -> "TrailLattice":
        return cls(np.zeros((mask.height, mask.width), dtype=dtype))

    @property
    def width(self) -> int:
        return self.values.shape[1]

    @property
    def height(self) -> int:
        return self.values.shape[0]

    def total_mass(self) -> float:
        return float(self.values.sum())

    def copy(self) -> "TrailLattice":
        return TrailLattice(self.values.copy())

    def __repr__(self) -> str:
        return f"TrailLattice({self.width}x{self.height}, mass={self.total_mass():.6g})"


class Region:
    """An immutable set of lattice cells, stored as a boolean mask."""

    __slots__ = ("mask", "_flat")

    def __init__(self, mask: np.ndarray):
        arr = np.ascontiguousarray(mask, dtype=bool)
        if arr.ndim != 2:
            raise ValueError(f"region mask must be 2-D, got shape {arr.shape}")
        arr.setflags(write=False)
        self.mask = arr
        self._flat = None

    @classmethod
    def empty(cls, shape: tuple) -> "Region":
        return cls(np.zeros(shape, dtype=bool))

    @classmethod
    def from_cells(cls, shape: tuple, cells) -> "Region":
        """Region from an iterable of (x, y) coordinates."""
        mask = np.zeros(shape, dtype=bool)
        for x, y in cells:
            mask[y, x] = True
        return cls(mask)

    def flat_indices(self) -> np.ndarray:
        if self._flat is None:
            self._flat = np.flatnonzero(self.mask)
        return self._flat

    def mask_u8(self) -> np.ndarray:
        return self.mask.view(np.uint8)

    @property
    def cell_count(self) -> int:
        return int(self.flat_indices().size)

    def columns(self) -> np.ndarray:
        """Sorted x indices of columns containing at least one region cell."""
        return np.flatnonzero(self.mask.any(axis=0))

    def union(self, other: "Region") -> "Region":
        return Region(self.mask | other.mask)

    def __eq__(self, other):
        return isinstance(other, Region) and np.array_equal(self.mask, other.mask)

    def __hash__(self):
        return hash((self.mask.shape, self.mask.tobytes()))

    def __repr__(self) -> str:
        return f"Region({self.cell_count} cells of {self.mask.shape[1]}x{self.mask.shape[0]})"


def wrap_x(x: float, width: int) -> float:
    """Reduce a continuous x coordinate into [0, width) periodically."""
    if width <= 0:
        raise ValueError(f"width must be positive, got {width}")
    w = float(width)
    r = x % w
    if r >= w:
        # x just below zero can round x % w up to w itself
        r -= w
    return r


def diffuse_and_decay(trail: TrailLattice, mask: ArenaMask, decay: float) -> TrailLattice:
    """One diffusion step: 3x3 uniform mean filter, then multiplicative decay.

    Each habitable cell becomes ``neighbourhood_sum / 9 * (1 - decay)`` where
    the sum accumulates in raster order (row above, own row, row below; west,
    center, east within each row).  Inhabitable cells contribute 0 to their
    neighbours' sums and come out 0.  Horizontal neighbours wrap; vertical
    neighbours wrap only when ``mask.wrap_y``, otherwise cells beyond the top
    or bottom edge read 0.  Pure function: the input lattice is left
    untouched.
    """
    if not 0.0 <= decay <= 1.0:
        raise ConfigError(f"decay must be in [0, 1], got {decay!r}")
    if trail.values.shape != mask.habitable.shape:
        raise ValueError(
            f"trail {trail.values.shape} does not match mask {mask.habitable.shape}"
        )
    out = _kernels.diffuse_kernel(trail.values, mask.habitable_u8(),
                                  mask.wrap_y, float(decay))
    return TrailLattice(out)


def add_to_region(trail: TrailLattice, region: Region, amount: float) -> None:
    """Add `amount` to every cell of the region, in place."""
    if amount < 0:
        raise ValueError(f"amount must be >= 0, got {amount!r}")
    if amount == 0:
        return
    if trail.values.shape != region.mask.shape:
        raise ValueError(
            f"trail {trail.values.shape} does not match region {region.mask.shape}"
        )
    _kernels.masked_add(trail.values, region.mask_u8(), float(amount))


def scale_region(trail: TrailLattice, region: Region, factor: float) -> None:
    """Multiply every cell of the region by `factor` in [0, 1], in place."""
    if not 0.0 <= factor <= 1.0:
        raise ConfigError(f"scale factor must be in [0, 1], got {factor!r}")
    if factor == 1.0:
        return
    if trail.values.shape != region.mask.shape:
        raise ValueError(
            f"trail {trail.values.shape} does not match region {region.mask.shape}"
        )
    _kernels.masked_scale(trail.values, region.mask_u8(), float(factor))
