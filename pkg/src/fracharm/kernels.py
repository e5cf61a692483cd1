"""Fractional integral kernels, their defining conditions, and desk quadrature.

Every kernel here has the shape K(x, y_1..y_m) = factor(x) * profile(t) with
t = sum_i |x - y_i|, which covers the model kernel t^(gamma - mn) and mild
perturbations of it.  The operator applies K against m grid functions by
midpoint quadrature over input cell-center tuples.  Exactly singular tuples
(every y_i in the cell of x) are re-integrated once on a 3^(mn)-fold
subdivision of the cell tuple with the still-singular center dropped; the
dropped mass is O(h^gamma) because the singularity is integrable.

Derivative-based checks (smoothness condition, Taylor remainder) use central
finite differences with step equal to 1/16 of the distance to the diagonal,
so truncation error stays a sub-percent effect at desk scale.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import product as _product

import numpy as np

from .grid import Cube, GridFunction

__all__ = [
    "KernelSpec",
    "KenigSteinKernel",
    "PerturbedKernel",
    "TaylorData",
    "apply_frac_operator",
    "kernel_size_check",
    "kernel_smoothness_check",
    "taylor_polynomial",
    "taylor_remainder_check",
    "local_product_bound_check",
]


def _fast_power(t: np.ndarray, e: float) -> np.ndarray:
    """t^e for positive t with shortcuts for the half-integer exponents the
    model kernel actually produces (they dominate the operator's runtime)."""
    if e == -0.5:
        return 1.0 / np.sqrt(t)
    if e == -1.0:
        return 1.0 / t
    if e == -1.5:
        return 1.0 / (t * np.sqrt(t))
    if e == -2.0:
        return 1.0 / (t * t)
    if e == -2.5:
        return 1.0 / (t * t * np.sqrt(t))
    if e == -3.0:
        return 1.0 / (t * t * t)
    if e == -3.5:
        return 1.0 / (t * t * t * np.sqrt(t))
    return np.power(t, e)


@dataclass(frozen=True)
class KernelSpec:
    """m-linear kernel in dimension n with fractional order gamma in (0, mn).

    Subclasses provide ``profile`` (a function of the summed slot distances)
    and optionally ``point_factor``; ``evaluate`` is derived from those.
    ``order`` records the smoothness order the harness intends to use;
    ``size_const`` and ``smooth_const`` record the constants the kernel is
    believed to satisfy in its defining inequalities.
    """

    m: int
    n: int
    gamma: float
    order: int = 1
    size_const: float = 1.0
    smooth_const: float = 1.0

    def __post_init__(self):
        if self.m < 1 or self.n not in (1, 2):
            raise ValueError("need m >= 1 and n in {1, 2}")
        if not 0 < self.gamma < self.m * self.n:
            raise ValueError(f"gamma must lie in (0, {self.m * self.n})")
        if self.order < 1:
            raise ValueError("smoothness order must be at least 1")

    @property
    def kind(self) -> str:
        raise NotImplementedError

    def profile(self, t: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def point_factor(self, x: np.ndarray) -> np.ndarray | float:
        return 1.0

    def evaluate(self, x: np.ndarray, ys: np.ndarray) -> np.ndarray:
        """K at x (..., n) against slot points ys (..., m, n)."""
        x = np.asarray(x, dtype=float)
        ys = np.asarray(ys, dtype=float)
        t = np.linalg.norm(x[..., None, :] - ys, axis=-1).sum(axis=-1)
        return self.point_factor(x) * self.profile(t)

    def params(self) -> dict:
        return {}

    def descriptor(self) -> dict:
        return {"kind": self.kind, "m": self.m, "n": self.n,
                "gamma": self.gamma, "N": self.order, "params": self.params()}


@dataclass(frozen=True)
class KenigSteinKernel(KernelSpec):
    """The model kernel (sum of slot distances)^(gamma - mn)."""

    @property
    def kind(self) -> str:
        return "kenig-stein"

    def profile(self, t: np.ndarray) -> np.ndarray:
        return _fast_power(t, self.gamma - self.m * self.n)


@dataclass(frozen=True)
class PerturbedKernel(KernelSpec):
    """Model profile times scale * (1 + amplitude * sin(frequency * x_1)).

    Keeps the size condition with constant scale * (1 + |amplitude|); breaks
    exact homogeneity, which is what makes it a useful stress input.
    """

    amplitude: float = 0.0
    frequency: float = 1.0
    scale: float = 1.0

    def __post_init__(self):
        super().__post_init__()
        if abs(self.amplitude) >= 1 or self.scale <= 0:
            raise ValueError("need |amplitude| < 1 and scale > 0")

    @property
    def kind(self) -> str:
        return "perturbed"

    def profile(self, t: np.ndarray) -> np.ndarray:
        return _fast_power(t, self.gamma - self.m * self.n)

    def point_factor(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return self.scale * (1.0 + self.amplitude * np.sin(self.frequency * x[..., 0]))

    def params(self) -> dict:
        return {"amplitude": self.amplitude, "frequency": self.frequency,
                "scale": self.scale}


# -- operator application -----------------------------------------------------


_EINSUM = {1: "ca,a->c", 2: "cab,a,b->c", 3: "cabd,a,b,d->c", 4: "cabde,a,b,d,e->c"}


def _subdivision_profile_sum(kernel: KernelSpec, h: float) -> float:
    """Sum of profile over the once-subdivided singular cell tuple, with the
    still-singular center dropped."""
    offsets = (-h / 3.0, 0.0, h / 3.0)
    mn = kernel.m * kernel.n
    total = 0.0
    for combo in _product(offsets, repeat=mn):
        t = 0.0
        for i in range(kernel.m):
            slot = combo[i * kernel.n : (i + 1) * kernel.n]
            t += math.hypot(*slot) if kernel.n == 2 else abs(slot[0])
        if t > 0.0:
            total += float(kernel.profile(np.asarray(t)))
    return total


def apply_frac_operator(kernel: KernelSpec, fs, points=None, chunk: int | None = None):
    """Midpoint-quadrature application of the m-linear fractional operator.

    With ``points=None`` evaluates at every cell center and returns a
    GridFunction; otherwise returns the value array at the given points of
    shape (P, n).  Cost grows with the product of slot support sizes, so the
    multilinearity times dimension is capped at 4.
    """
    fs = list(fs)
    if len(fs) != kernel.m:
        raise ValueError(f"kernel expects {kernel.m} inputs, got {len(fs)}")
    g0 = fs[0]
    for f in fs[1:]:
        g0._require_same_grid(f)
    if g0.dim != kernel.n:
        raise ValueError("grid dimension does not match the kernel")
    mn = kernel.m * kernel.n
    if mn > 4:
        raise ValueError("m * n above 4 is outside the desk-scale cost cap")
    h = g0.h
    cells = g0.coords().reshape(-1, g0.dim)
    flat = [f.samples.reshape(-1) for f in fs]
    sup = [np.nonzero(v)[0] for v in flat]

    on_grid = points is None
    X = cells if on_grid else np.atleast_2d(np.asarray(points, dtype=float))
    if X.shape[-1] != g0.dim:
        raise ValueError("points have the wrong dimension")
    out = np.zeros(X.shape[0])

    if all(idx.size for idx in sup):
        Y = [cells[idx] for idx in sup]
        V = [flat[i][sup[i]] for i in range(kernel.m)]
        # cells where every slot can collide with x (supports all overlap)
        sing_cells = sup[0]
        for i in range(1, kernel.m):
            sing_cells = np.intersect1d(sing_cells, sup[i])
        sing_pos = [np.searchsorted(sup[i], sing_cells) for i in range(kernel.m)]
        tuples_per_x = int(np.prod([idx.size for idx in sup]))
        if chunk is None:
            chunk = max(1, (1 << 22) // max(tuples_per_x, 1))
        spec = _EINSUM[kernel.m]
        for c0 in range(0, X.shape[0], chunk):
            xb = X[c0 : c0 + chunk]
            if g0.dim == 1:
                D = [np.abs(xb[:, 0][:, None] - Yi[:, 0][None, :]) for Yi in Y]
            else:
                D = [np.linalg.norm(xb[:, None, :] - Yi[None, :, :], axis=-1)
                     for Yi in Y]
            t = D[0]
            for i in range(1, kernel.m):
                shape = [t.shape[0]] + [1] * i + [D[i].shape[1]]
                t = t[..., None] + D[i].reshape(shape)
            with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
                W = kernel.profile(t)
            if not on_grid:
                # off-grid points may collide exactly with an input center;
                # such zero-measure tuples carry no quadrature mass
                W[~np.isfinite(W)] = 0.0
            if on_grid and sing_cells.size:
                # zero the exactly singular tuples in this chunk
                inside = (sing_cells >= c0) & (sing_cells < c0 + xb.shape[0])
                if np.any(inside):
                    locs = tuple(pos[inside] for pos in sing_pos)
                    W[(sing_cells[inside] - c0,) + locs] = 0.0
            out[c0 : c0 + xb.shape[0]] = np.einsum(spec, W, *V, optimize=True)

        if on_grid and sing_cells.size:
            # one-shot subdivision correction at the singular cells
            s_corr = _subdivision_profile_sum(kernel, h)
            prods = np.ones(sing_cells.size)
            for v in flat:
                prods *= v[sing_cells]
            out[sing_cells] += s_corr * prods / 3.0 ** mn

    out *= h ** mn
    out = out * kernel.point_factor(X)
    if on_grid:
        return g0.with_samples(out.reshape(g0.samples.shape))
    return out


# -- kernel condition checks ---------------------------------------------------


def _sample_configurations(kernel: KernelSpec, count: int, seed: int,
                           radius: float, min_t: float, per_slot: bool = False):
    """Uniform configurations with t = sum_i |x - y_i| above min_t; with
    per_slot=True every individual slot distance must clear min_t instead,
    which is the right admissible set for derivative estimates (the kernel
    has a kink on each slot diagonal, not only at t = 0)."""
    rng = np.random.default_rng(seed)
    xs = np.empty((0, kernel.n))
    ys = np.empty((0, kernel.m, kernel.n))
    while xs.shape[0] < count:
        draw = max(count, 64)
        x = rng.uniform(-radius, radius, size=(draw, kernel.n))
        y = rng.uniform(-radius, radius, size=(draw, kernel.m, kernel.n))
        d = np.linalg.norm(x[:, None, :] - y, axis=-1)
        keep = (d.min(axis=-1) if per_slot else d.sum(axis=-1)) > min_t
        xs = np.concatenate([xs, x[keep]])
        ys = np.concatenate([ys, y[keep]])
    xs, ys = xs[:count], ys[:count]
    d = np.linalg.norm(xs[:, None, :] - ys, axis=-1)
    return xs, ys, d.sum(axis=-1), d.min(axis=-1)


def kernel_size_check(kernel: KernelSpec, sample_count: int = 400, *,
                      seed: int = 0, radius: float = 2.0, min_t: float = 1e-3) -> float:
    """Max over random off-diagonal configurations of |K| * t^(mn - gamma)."""
    x, ys, t, _ = _sample_configurations(kernel, sample_count, seed, radius, min_t)
    vals = np.abs(kernel.evaluate(x, ys))
    return float(np.max(vals * _fast_power(t, kernel.m * kernel.n - kernel.gamma)))


def _axis_stencil(order: int):
    # central iterated-difference coefficients and node offsets in step units
    coeffs = [(-1.0) ** j * math.comb(order, j) for j in range(order + 1)]
    nodes = [order / 2.0 - j for j in range(order + 1)]
    return coeffs, nodes


def _multi_indices(n: int, total: int):
    if n == 1:
        return [(total,)]
    return [(k, total - k) for k in range(total + 1)]


def _derivative_sum(kernel: KernelSpec, x, ys, order: int, step):
    """Sum over slots and |beta| = order of |FD estimate of the slot
    derivative|, vectorized over the sample axis."""
    total = np.zeros(x.shape[0])
    for slot in range(kernel.m):
        for beta in _multi_indices(kernel.n, order):
            acc = np.zeros(x.shape[0])
            per_axis = [_axis_stencil(b) for b in beta]
            for parts in _product(*(range(b + 1) for b in beta)):
                coef = np.ones(x.shape[0])
                offset = np.zeros((x.shape[0], kernel.n))
                for axis, j in enumerate(parts):
                    c, nodes = per_axis[axis]
                    coef = coef * c[j]
                    offset[:, axis] += nodes[j] * step
                shifted = ys.copy()
                shifted[:, slot, :] += offset
                acc += coef * kernel.evaluate(x, shifted)
            total += np.abs(acc) / step ** order
    return total


def kernel_smoothness_check(kernel: KernelSpec, order: int, sample_count: int = 200,
                            fd_step: float | None = None, *, seed: int = 0,
                            radius: float = 2.0, min_t: float = 1e-2) -> float:
    """Max over samples of (sum of slot derivatives of order N, estimated by
    central differences) * t^(mn + N - gamma); order 0 is the size check."""
    if order < 0:
        raise ValueError("order must be nonnegative")
    if order == 0:
        return kernel_size_check(kernel, sample_count, seed=seed,
                                 radius=radius, min_t=min_t)
    x, ys, t, dmin = _sample_configurations(kernel, sample_count, seed, radius,
                                            min_t, per_slot=True)
    # the step must clear the nearest slot kink, not just the full diagonal:
    # with m >= 2 a slot can sit much closer to x than t/16
    if fd_step is None:
        step = dmin / 16.0
    else:
        if np.any(dmin <= 8.0 * order * fd_step):
            raise ValueError("samples too near a slot diagonal for the chosen fd_step")
        step = np.full_like(t, float(fd_step))
    deriv = _derivative_sum(kernel, x, ys, order, step)
    power = _fast_power(t, kernel.m * kernel.n + order - kernel.gamma)
    return float(np.max(deriv * power))


# -- Taylor machinery ----------------------------------------------------------


@dataclass(frozen=True)
class TaylorData:
    """Degree-(order-1) Taylor expansion of the kernel in one slot about a
    cube center; coefficients are finite-difference values computed per
    evaluation configuration since they depend on x and the other slots."""

    kernel: KernelSpec
    slot: int
    center: tuple
    order: int

    def coefficients(self, x: np.ndarray, ys: np.ndarray) -> dict:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        ys = np.asarray(ys, dtype=float).reshape(x.shape[0], self.kernel.m, self.kernel.n)
        base = ys.copy()
        base[:, self.slot, :] = np.asarray(self.center)
        # step relative to the expansion slot's own distance from x, so the
        # stencil never reaches the kink at y_slot = x even when other slots
        # dominate the total distance
        step = np.linalg.norm(x - np.asarray(self.center), axis=-1) / 16.0
        out = {}
        for total in range(self.order):
            for beta in _multi_indices(self.kernel.n, total):
                if total == 0:
                    out[beta] = self.kernel.evaluate(x, base)
                    continue
                acc = np.zeros(x.shape[0])
                per_axis = [_axis_stencil(b) for b in beta]
                for parts in _product(*(range(b + 1) for b in beta)):
                    coef = np.ones(x.shape[0])
                    offset = np.zeros((x.shape[0], self.kernel.n))
                    for axis, j in enumerate(parts):
                        c, nodes = per_axis[axis]
                        coef = coef * c[j]
                        offset[:, axis] += nodes[j] * step
                    shifted = base.copy()
                    shifted[:, self.slot, :] += offset
                    acc += coef * self.kernel.evaluate(x, shifted)
                out[beta] = acc / step ** total
        return out

    def evaluate(self, x: np.ndarray, ys: np.ndarray) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        ys = np.asarray(ys, dtype=float).reshape(x.shape[0], self.kernel.m, self.kernel.n)
        coeffs = self.coefficients(x, ys)
        dy = ys[:, self.slot, :] - np.asarray(self.center)
        val = np.zeros(x.shape[0])
        for beta, c in coeffs.items():
            mono = np.ones(x.shape[0])
            fact = 1.0
            for axis, b in enumerate(beta):
                mono = mono * dy[:, axis] ** b
                fact *= math.factorial(b)
            val += c * mono / fact
        return val


def taylor_polynomial(kernel: KernelSpec, slot: int, center, order: int) -> TaylorData:
    if not 0 <= slot < kernel.m:
        raise ValueError("slot out of range")
    if order < 1:
        raise ValueError("order must be at least 1")
    center = tuple(float(c) for c in np.atleast_1d(center))
    if len(center) != kernel.n:
        raise ValueError("center has the wrong dimension")
    return TaylorData(kernel=kernel, slot=slot, center=center, order=order)


def taylor_remainder_check(kernel: KernelSpec, td: TaylorData, cube: Cube, *,
                           n_samples: int = 200, seed: int = 0,
                           x_span=(1.01, 4.0)) -> float:
    """Max over samples of |K - P| * t^(mn + N - gamma) / side^N with the
    expansion slot in the cube and x outside its star."""
    if cube.dim != kernel.n:
        raise ValueError("cube dimension does not match the kernel")
    if tuple(td.center) != cube.center:
        raise ValueError("expansion center must be the cube center")
    rng = np.random.default_rng(seed)
    n, m, side = kernel.n, kernel.m, cube.side
    c = np.asarray(cube.center)
    star = cube.star()

    def annulus(count):
        # infinity-norm annulus strictly outside the star
        r = side * math.sqrt(n) * rng.uniform(x_span[0], x_span[1], size=count)
        u = rng.uniform(-1.0, 1.0, size=(count, n))
        amax = np.max(np.abs(u), axis=1, keepdims=True)
        return c + r[:, None] * u / amax

    x = annulus(n_samples)
    if np.any(star.contains(x)):
        raise ValueError("sampled x fell inside the star of the cube")
    ys = np.empty((n_samples, m, n))
    for i in range(m):
        if i == td.slot:
            ys[:, i, :] = c + side * rng.uniform(-0.5, 0.5, size=(n_samples, n))
        else:
            ys[:, i, :] = annulus(n_samples)
    t = np.linalg.norm(x[:, None, :] - ys, axis=-1).sum(axis=-1)
    rem = np.abs(kernel.evaluate(x, ys) - td.evaluate(x, ys))
    power = _fast_power(t, m * n + td.order - kernel.gamma)
    return float(np.max(rem * power / side ** td.order))


# -- pointwise product bound ----------------------------------------------------


def local_product_bound_check(kernel: KernelSpec, cubes, gamma_split, x, *,
                              box, h: float) -> float:
    """|T(indicators)(x)| / prod side_i^gamma_i for x in every star.

    The stars must intersect and contain x; the gamma split must be positive
    and sum to the kernel's gamma.
    """
    cubes = list(cubes)
    gamma_split = [float(g) for g in gamma_split]
    if len(cubes) != kernel.m or len(gamma_split) != kernel.m:
        raise ValueError("need one cube and one gamma share per slot")
    if any(g <= 0 for g in gamma_split):
        raise ValueError("gamma shares must be positive")
    if abs(sum(gamma_split) - kernel.gamma) > 1e-12:
        raise ValueError("gamma shares must sum to the kernel gamma")
    pt = np.atleast_2d(np.asarray(x, dtype=float))
    for q in cubes:
        if not q.star().contains(pt)[0]:
            raise ValueError("x must lie in the star of every cube")
    fs = [q.indicator(box, h) for q in cubes]
    val = apply_frac_operator(kernel, fs, points=pt)[0]
    denom = 1.0
    for q, g in zip(cubes, gamma_split):
        denom *= q.side ** g
    return float(abs(val) / denom)
