"""One-dimensional discrete convex analysis.

A :class:`SampledConvexFunction` is a convex function known on a strictly
increasing grid, plus a tag saying what happens off the grid: either
``+inf`` (:class:`PlusInfinityOutside`) or affine continuation with given
slopes (:class:`AffineExtension`). The two tags are exchanged by the
Legendre transform, which is computed by merging the sorted slope sequence
of the input with the sorted target slopes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NonConvex, SlopeOutOfRange
from .textio import load_columns, save_columns

DEFAULT_SLOPE_POINTS = 2001
CONVEXITY_TOL = 1e-12


@dataclass(frozen=True)
class PlusInfinityOutside:
    """The function is ``+inf`` off its grid."""

    def tag(self) -> str:
        return "plus-infinity"


@dataclass(frozen=True)
class AffineExtension:
    """The function continues affinely with these slopes left and right of its grid."""

    left_slope: float
    right_slope: float

    def __post_init__(self):
        if not self.left_slope <= self.right_slope:
            raise ValueError("left extension slope must not exceed the right one")

    def tag(self) -> str:
        return f"affine {self.left_slope!r} {self.right_slope!r}"


Extension = PlusInfinityOutside | AffineExtension


@dataclass(frozen=True)
class Polytope:
    """A compact interval ``[p_min, p_max]``: the one-dimensional moment polytope."""

    p_min: float
    p_max: float

    def __post_init__(self):
        if not self.p_min < self.p_max:
            raise ValueError("polytope needs p_min < p_max")

    @property
    def width(self) -> float:
        return self.p_max - self.p_min

    def contains(self, p, tol: float = 1e-12) -> bool:
        p = np.asarray(p)
        return bool(np.all((p >= self.p_min - tol) & (p <= self.p_max + tol)))


@dataclass(frozen=True, eq=False)
class SampledConvexFunction:
    grid: np.ndarray
    values: np.ndarray
    extension: Extension = PlusInfinityOutside()

    def __post_init__(self):
        x = np.asarray(self.grid, dtype=float).ravel()
        v = np.asarray(self.values, dtype=float).ravel()
        if x.shape != v.shape or x.size == 0:
            raise ValueError("grid and values must be nonempty and of equal length")
        if not np.all(np.isfinite(x)) or not np.all(np.isfinite(v)):
            raise ValueError("grid and values must be finite (use the extension tag for +inf)")
        if np.any(np.diff(x) <= 0):
            raise ValueError("grid must be strictly increasing")
        object.__setattr__(self, "grid", x)
        object.__setattr__(self, "values", v)
        s = self.slopes
        # rounding in f(x) perturbs each chord slope by ~eps |f| / dx
        noise = 8 * np.finfo(float).eps * np.maximum(np.abs(v[1:]), np.abs(v[:-1])) / np.diff(x)
        slack = CONVEXITY_TOL * np.maximum(1.0, np.abs(s)) + noise
        if s.size > 1 and np.any(np.diff(s) < -(slack[1:] + slack[:-1])):
            raise NonConvex("discrete slopes must be nondecreasing")
        ext = self.extension
        if isinstance(ext, AffineExtension) and s.size:
            if ext.left_slope > s[0] + slack[0] or ext.right_slope < s[-1] - slack[-1]:
                raise NonConvex("affine extension slopes must bracket the interior slopes")
        if x.size == 1 and isinstance(ext, PlusInfinityOutside):
            raise ValueError("a single-point function needs an affine extension")

    @property
    def slopes(self) -> np.ndarray:
        """Slopes of the chords between consecutive grid points."""
        return np.diff(self.values) / np.diff(self.grid)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        out = np.interp(x, self.grid, self.values)
        ext = self.extension
        left, right = x < self.grid[0], x > self.grid[-1]
        if isinstance(ext, PlusInfinityOutside):
            out = np.where(left | right, np.inf, out)
        else:
            out = np.where(left, self.values[0] + ext.left_slope * (x - self.grid[0]), out)
            out = np.where(right, self.values[-1] + ext.right_slope * (x - self.grid[-1]), out)
        return out

    @classmethod
    def from_callable(cls, f, grid, extension: Extension = PlusInfinityOutside()):
        grid = np.asarray(grid, dtype=float)
        return cls(grid, np.asarray(f(grid), dtype=float), extension)

    @classmethod
    def load(cls, path) -> SampledConvexFunction:
        _, x, v, meta = load_columns(path)
        return cls(x, v, _parse_extension(meta.get("extension", "plus-infinity")))

    def save(self, path, header=("x", "value")) -> None:
        save_columns(path, self.grid, self.values, header, {"extension": self.extension.tag()})


def _parse_extension(text: str) -> Extension:
    parts = text.split()
    if parts == ["plus-infinity"]:
        return PlusInfinityOutside()
    if len(parts) == 3 and parts[0] == "affine":
        return AffineExtension(float(parts[1]), float(parts[2]))
    raise ValueError(f"unknown extension tag {text!r}")


def subgradient_image(f: SampledConvexFunction) -> tuple[float, float]:
    """``[min slope, max slope]`` of ``f``, widened to the extension slopes if affine."""
    ext = f.extension
    if isinstance(ext, AffineExtension):
        return float(ext.left_slope), float(ext.right_slope)
    s = f.slopes
    return float(s[0]), float(s[-1])


def default_slopes(f: SampledConvexFunction, n: int = DEFAULT_SLOPE_POINTS) -> np.ndarray:
    lo, hi = subgradient_image(f)
    if lo == hi:
        return np.array([lo])
    return np.linspace(lo, hi, n)


def _argmax_indices(chord_slopes: np.ndarray, targets: np.ndarray) -> np.ndarray:
    """For sorted ``targets``, the grid index maximizing ``x_i p - v_i``.

    The maximizer for slope ``p`` is ``#{i : s_i < p}`` (ties are harmless).
    Both inputs are sorted, so a stable sort of their concatenation is a
    single linear merge of two runs.
    """
    n = chord_slopes.size
    merged = np.argsort(np.concatenate([chord_slopes, targets]), kind="stable")
    is_target = merged >= n
    before = np.cumsum(~is_target)
    return before[is_target]


def legendre_transform(
    f: SampledConvexFunction, slopes=None, *, n_slopes: int = DEFAULT_SLOPE_POINTS
) -> SampledConvexFunction:
    """Convex conjugate ``f*(p) = sup_x (x p - f(x))`` sampled at ``slopes``.

    For ``f`` with :class:`PlusInfinityOutside` the supremum runs over the grid
    and the result carries ``AffineExtension(x_0, x_N)``. For ``f`` with
    :class:`AffineExtension` the conjugate is ``+inf`` outside the extension
    slopes, and asking for such a slope raises :class:`SlopeOutOfRange`.
    Exact for piecewise-linear ``f``.
    """
    p = default_slopes(f, n_slopes) if slopes is None else np.asarray(slopes, dtype=float).ravel()
    if p.size == 0:
        raise ValueError("need at least one target slope")
    ext = f.extension
    if isinstance(ext, AffineExtension):
        tol_lo = CONVEXITY_TOL * max(1.0, abs(ext.left_slope))
        tol_hi = CONVEXITY_TOL * max(1.0, abs(ext.right_slope))
        bad = (p < ext.left_slope - tol_lo) | (p > ext.right_slope + tol_hi)
        if np.any(bad):
            raise SlopeOutOfRange(
                f"slope {p[bad][0]:g} outside [{ext.left_slope:g}, {ext.right_slope:g}]"
                " where the conjugate is +inf"
            )
    order = None
    if np.any(np.diff(p) < 0):
        order = np.argsort(p, kind="stable")
        p = p[order]
    idx = _argmax_indices(f.slopes, p)
    vals = f.grid[idx] * p - f.values[idx]
    if order is not None:
        out = np.empty_like(vals)
        out[order] = vals
        vals, p = out, p[np.argsort(order)]
    p_sorted, uniq = np.unique(p, return_index=True)
    vals = vals[uniq]
    if isinstance(ext, AffineExtension):
        new_ext: Extension = PlusInfinityOutside()
    else:
        new_ext = AffineExtension(float(f.grid[0]), float(f.grid[-1]))
    return _trusted(p_sorted, vals, new_ext)


def _trusted(grid, values, extension) -> SampledConvexFunction:
    # conjugates are convex by construction; re-checking would only trip on
    # the cancellation in x p - f(x) when neighbouring slopes nearly coincide
    obj = object.__new__(SampledConvexFunction)
    object.__setattr__(obj, "grid", grid)
    object.__setattr__(obj, "values", values)
    object.__setattr__(obj, "extension", extension)
    return obj


def _merge_close(s: np.ndarray, keep_ends: bool = False, rel: float = 1e-9) -> np.ndarray:
    """Sorted unique ``s`` with each kept value more than ``rel`` above the previous kept one."""
    s = np.unique(s)
    if s.size < 2:
        return s
    kept = [s[0]]
    for v in s[1:]:
        if v - kept[-1] > rel * max(1.0, abs(v)):
            kept.append(v)
    if keep_ends and kept[-1] != s[-1]:
        kept[-1] = s[-1]
    return np.asarray(kept)


def biconjugate(f: SampledConvexFunction, slopes=None) -> SampledConvexFunction:
    """``f**`` evaluated back on ``f``'s grid.

    By default the intermediate slope grid is the set of chord slopes of
    ``f`` (plus the extension slopes), which makes the round trip exact up to
    rounding for every convex sampled ``f``. Slopes closer than a relative
    ``1e-9`` are merged first.
    """
    if slopes is None:
        ext = f.extension
        if isinstance(ext, AffineExtension):
            inner = np.clip(f.slopes, ext.left_slope, ext.right_slope)
            parts = [[ext.left_slope], inner, [ext.right_slope]]
            slopes = _merge_close(np.concatenate(parts), keep_ends=True)
        else:
            slopes = _merge_close(f.slopes)
    fstar = legendre_transform(f, slopes)
    if fstar.grid.size == 1:
        # conjugate of a point function is affine: x -> x p0 - v0
        p0, v0 = fstar.grid[0], fstar.values[0]
        return SampledConvexFunction(f.grid, f.grid * p0 - v0, AffineExtension(p0, p0))
    return legendre_transform(fstar, f.grid)


def brute_force_conjugate(x, fx, p, chunk: int = 256) -> np.ndarray:
    """``max_i (x_i p_j - f_i)`` by exhaustive search; an O(NM) reference."""
    x, fx, p = (np.asarray(a, dtype=float) for a in (x, fx, p))
    out = np.empty(p.shape)
    for start in range(0, p.size, chunk):
        pj = p[start : start + chunk, None]
        out[start : start + chunk] = np.max(pj * x[None, :] - fx[None, :], axis=1)
    return out


__all__ = [
    "PlusInfinityOutside",
    "AffineExtension",
    "Polytope",
    "SampledConvexFunction",
    "subgradient_image",
    "default_slopes",
    "legendre_transform",
    "biconjugate",
    "brute_force_conjugate",
]

