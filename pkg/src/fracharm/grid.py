"""Axis-parallel cubes, uniformly sampled functions, and midpoint quadrature.

Conventions shared by the whole package:

* A box is a tuple of per-axis ``(lo, hi)`` intervals.  Dimensions 1 and 2
  are supported; nothing here is written for general n.
* Samples live at cell centers ``lo + (i + 1/2) h`` with one spacing ``h``
  for every axis.  Quadrature is the midpoint rule, which is exact for
  functions that are constant on cells and for affine functions.
* Cell membership in a cube is half-open per axis (``[lo, hi)``), so that
  tilings by disjoint cubes are exact at the sample level.
* Two grid functions combine only when box and spacing agree exactly.
  There is no implicit resampling anywhere.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np

__all__ = [
    "GridMismatchError",
    "Cube",
    "GridFunction",
    "DyadicFamily",
    "integrate",
    "weighted_lp_quasinorm",
    "dyadic_cubes",
]

_SUPPORTED_DIMS = (1, 2)


class GridMismatchError(ValueError):
    """Raised when two grid functions with different box or spacing are combined."""


def _as_box(box) -> tuple[tuple[float, float], ...]:
    out = tuple((float(lo), float(hi)) for lo, hi in box)
    if len(out) not in _SUPPORTED_DIMS:
        raise ValueError(f"only dimensions {_SUPPORTED_DIMS} are supported, got {len(out)}")
    for lo, hi in out:
        if not (math.isfinite(lo) and math.isfinite(hi) and hi > lo):
            raise ValueError(f"degenerate box interval ({lo}, {hi})")
    return out


@dataclass(frozen=True)
class Cube:
    """Axis-parallel cube given by its center and side length."""

    center: tuple[float, ...]
    side: float

    def __post_init__(self):
        center = tuple(float(c) for c in np.atleast_1d(np.asarray(self.center, dtype=float)))
        object.__setattr__(self, "center", center)
        object.__setattr__(self, "side", float(self.side))
        if len(self.center) not in _SUPPORTED_DIMS:
            raise ValueError(f"cube dimension must be one of {_SUPPORTED_DIMS}")
        if not (math.isfinite(self.side) and self.side > 0):
            raise ValueError("cube side must be positive and finite")
        if not all(math.isfinite(c) for c in self.center):
            raise ValueError("cube center must be finite")

    @property
    def dim(self) -> int:
        return len(self.center)

    @property
    def lo(self) -> tuple[float, ...]:
        return tuple(c - self.side / 2 for c in self.center)

    @property
    def hi(self) -> tuple[float, ...]:
        return tuple(c + self.side / 2 for c in self.center)

    @property
    def volume(self) -> float:
        return self.side ** self.dim

    def dilate(self, tau: float) -> "Cube":
        """Concentric enlargement by a factor tau > 1."""
        if not tau > 1:
            raise ValueError(f"dilation factor must exceed 1, got {tau}")
        return Cube(self.center, self.side * tau)

    def star(self) -> "Cube":
        """The concentric enlargement by 2*sqrt(dim)."""
        return self.dilate(2.0 * math.sqrt(self.dim))

    def scaled(self, factor: float, about: Sequence[float] | None = None) -> "Cube":
        """Rescale side (and center, when ``about`` is given) by a positive factor.

        Unlike :meth:`dilate` this is plain coordinate scaling, so shrinking
        is allowed; it is the primitive used for dilation sweeps.
        """
        if not factor > 0:
            raise ValueError("scale factor must be positive")
        if about is None:
            return Cube(self.center, self.side * factor)
        a = np.asarray(about, dtype=float)
        c = a + factor * (np.asarray(self.center) - a)
        return Cube(tuple(c), self.side * factor)

    def translated(self, shift: Sequence[float]) -> "Cube":
        s = np.asarray(shift, dtype=float)
        return Cube(tuple(np.asarray(self.center) + s), self.side)

    def contains(self, points: np.ndarray) -> np.ndarray:
        """Half-open membership test for points of shape (..., dim)."""
        pts = np.asarray(points, dtype=float)
        if pts.shape[-1] != self.dim:
            raise ValueError("point dimension does not match cube dimension")
        lo = np.asarray(self.lo)
        hi = np.asarray(self.hi)
        return np.all((pts >= lo) & (pts < hi), axis=-1)

    def indicator(self, box, h: float) -> "GridFunction":
        """Sample the indicator of this cube on the given grid."""
        zero = GridFunction.zeros(box, h)
        mask = self.contains(zero.coords())
        return zero.with_samples(np.where(mask, 1.0, 0.0))

    def descriptor(self) -> dict:
        return {"center": list(self.center), "side": self.side}


def _axis_counts(box, h) -> tuple[int, ...]:
    counts = []
    for lo, hi in box:
        raw = (hi - lo) / h
        cnt = round(raw)
        if cnt < 1 or abs(raw - cnt) > 1e-9 * max(1.0, abs(raw)):
            raise ValueError(f"box extent ({lo}, {hi}) is not an integer multiple of h={h}")
        counts.append(cnt)
    return tuple(counts)


@dataclass(frozen=True)
class GridFunction:
    """Real-valued function sampled at the cell centers of a uniform grid."""

    box: tuple[tuple[float, float], ...]
    h: float
    samples: np.ndarray

    def __post_init__(self):
        box = _as_box(self.box)
        object.__setattr__(self, "box", box)
        object.__setattr__(self, "h", float(self.h))
        if not (math.isfinite(self.h) and self.h > 0):
            raise ValueError("grid spacing must be positive and finite")
        arr = np.array(self.samples, dtype=float, copy=True)
        if arr.shape != _axis_counts(box, self.h):
            raise ValueError(
                f"sample shape {arr.shape} does not match box {box} at h={self.h}"
            )
        if not np.all(np.isfinite(arr)):
            raise ValueError("samples must all be finite")
        arr.setflags(write=False)
        object.__setattr__(self, "samples", arr)

    # -- construction -----------------------------------------------------

    @classmethod
    def zeros(cls, box, h: float) -> "GridFunction":
        return cls(_as_box(box), float(h), np.zeros(_axis_counts(_as_box(box), float(h))))

    @classmethod
    def from_callable(cls, box, h: float, fn: Callable) -> "GridFunction":
        g = cls.zeros(box, h)
        pts = g.coords()
        if g.dim == 1:
            vals = np.asarray(fn(pts[..., 0]), dtype=float)
        else:
            vals = np.asarray(fn(pts[..., 0], pts[..., 1]), dtype=float)
        return g.with_samples(np.broadcast_to(vals, g.samples.shape))

    def with_samples(self, samples: np.ndarray) -> "GridFunction":
        return GridFunction(self.box, self.h, samples)

    # -- geometry ----------------------------------------------------------

    @property
    def dim(self) -> int:
        return len(self.box)

    @property
    def cell_volume(self) -> float:
        return self.h ** self.dim

    def axis_centers(self, axis: int) -> np.ndarray:
        lo, hi = self.box[axis]
        cnt = self.samples.shape[axis]
        return lo + (np.arange(cnt) + 0.5) * self.h

    @cached_property
    def _coords(self) -> np.ndarray:
        axes = [self.axis_centers(a) for a in range(self.dim)]
        if self.dim == 1:
            return axes[0][:, None]
        gx, gy = np.meshgrid(axes[0], axes[1], indexing="ij")
        return np.stack([gx, gy], axis=-1)

    def coords(self) -> np.ndarray:
        """Cell-center coordinates, shape ``samples.shape + (dim,)``."""
        return self._coords

    def same_grid(self, other: "GridFunction") -> bool:
        return self.box == other.box and self.h == other.h

    def _require_same_grid(self, other: "GridFunction"):
        if not self.same_grid(other):
            raise GridMismatchError(
                f"grids differ: {self.box}@{self.h} vs {other.box}@{other.h}"
            )

    # -- arithmetic ---------------------------------------------------------

    def __add__(self, other):
        if isinstance(other, GridFunction):
            self._require_same_grid(other)
            return self.with_samples(self.samples + other.samples)
        return self.with_samples(self.samples + float(other))

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, GridFunction):
            self._require_same_grid(other)
            return self.with_samples(self.samples - other.samples)
        return self.with_samples(self.samples - float(other))

    def __mul__(self, other):
        if isinstance(other, GridFunction):
            self._require_same_grid(other)
            return self.with_samples(self.samples * other.samples)
        return self.with_samples(self.samples * float(other))

    __rmul__ = __mul__

    def __abs__(self):
        return self.with_samples(np.abs(self.samples))

    def power(self, p: float) -> "GridFunction":
        return self.with_samples(np.power(self.samples, p))

    def maximum(self, other: "GridFunction") -> "GridFunction":
        self._require_same_grid(other)
        return self.with_samples(np.maximum(self.samples, other.samples))

    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.samples)))

    # -- serialization -------------------------------------------------------

    def sidecar_path(self, path) -> Path:
        return Path(path).with_suffix(".meta.json")

    def to_csv(self, path) -> None:
        """Write ``x[,y],value`` rows plus a sidecar JSON grid descriptor.

        Floats are written with repr, so a read-back reproduces every sample
        bit for bit.
        """
        path = Path(path)
        pts = self.coords().reshape(-1, self.dim)
        vals = self.samples.reshape(-1)
        header = ["x", "value"] if self.dim == 1 else ["x", "y", "value"]
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(header)
            for p, v in zip(pts, vals):
                writer.writerow([repr(float(c)) for c in p] + [repr(float(v))])
        meta = {"box": [list(iv) for iv in self.box], "h": self.h, "dim": self.dim}
        with open(self.sidecar_path(path), "w") as fh:
            json.dump(meta, fh, indent=1)
            fh.write("\n")

    @classmethod
    def read_csv(cls, path, sidecar=None) -> "GridFunction":
        path = Path(path)
        sidecar = Path(sidecar) if sidecar is not None else path.with_suffix(".meta.json")
        with open(sidecar) as fh:
            meta = json.load(fh)
        box = _as_box(meta["box"])
        h = float(meta["h"])
        shape = _axis_counts(box, h)
        vals = []
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            next(reader)
            for row in reader:
                vals.append(float(row[-1]))
        return cls(box, h, np.asarray(vals).reshape(shape))


# -- quadrature and norms ----------------------------------------------------


def integrate(f: GridFunction) -> float:
    """Midpoint-rule integral over the box: ``h^dim * sum(samples)``."""
    return float(f.cell_volume * np.sum(f.samples))


def weighted_lp_quasinorm(f: GridFunction, p: float, w: GridFunction | None = None) -> float:
    """``(integral of |f|^p w)^(1/p)`` for any p > 0; w omitted means w == 1."""
    if not p > 0:
        raise ValueError(f"exponent p must be positive, got {p}")
    fp = np.abs(f.samples) ** p
    if w is not None:
        f._require_same_grid(w)
        if np.any(w.samples < 0):
            raise ValueError("weight samples must be nonnegative")
        fp = fp * w.samples
    return float((f.cell_volume * np.sum(fp)) ** (1.0 / p))


# -- dyadic families ----------------------------------------------------------


@dataclass(frozen=True)
class DyadicFamily:
    """Grid-aligned dyadic cubes tiling a window at each level j (side 2^j)."""

    window: tuple[tuple[float, float], ...]
    j_min: int
    j_max: int
    cubes: tuple[Cube, ...]

    @property
    def dim(self) -> int:
        return len(self.window)

    def levels(self) -> range:
        return range(self.j_min, self.j_max + 1)

    def cubes_at(self, j: int) -> tuple[Cube, ...]:
        return tuple(q for q in self.cubes if q.side == 2.0 ** j)

    def descriptor(self) -> dict:
        return {"window": [list(iv) for iv in self.window],
                "levels": [self.j_min, self.j_max]}


def dyadic_cubes(window, j_min: int, j_max: int, h: float | None = None) -> DyadicFamily:
    """All dyadic cubes of sides 2^j, j_min <= j <= j_max, tiling the window.

    Each level must tile the window exactly, so the window sides have to be
    integer multiples of the largest cube side.  When ``h`` is given, levels
    finer than the grid spacing are rejected.
    """
    window = _as_box(window)
    if j_min > j_max:
        raise ValueError(f"empty level range [{j_min}, {j_max}]")
    if h is not None and 2.0 ** j_min < h:
        raise ValueError(f"level 2^{j_min} is finer than grid spacing h={h}")
    cubes: list[Cube] = []
    for j in range(j_min, j_max + 1):
        side = 2.0 ** j
        counts = []
        for lo, hi in window:
            raw = (hi - lo) / side
            cnt = round(raw)
            if cnt < 1 or abs(raw - cnt) > 1e-9 * max(1.0, raw):
                raise ValueError(
                    f"window extent ({lo}, {hi}) is not tiled by side 2^{j}"
                )
            counts.append(cnt)
        if len(window) == 1:
            lo = window[0][0]
            for i in range(counts[0]):
                cubes.append(Cube((lo + (i + 0.5) * side,), side))
        else:
            (lox, _), (loy, _) = window
            for i in range(counts[0]):
                for k in range(counts[1]):
                    cubes.append(Cube((lox + (i + 0.5) * side, loy + (k + 0.5) * side), side))
    return DyadicFamily(window, j_min, j_max, tuple(cubes))
