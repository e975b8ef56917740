"""Masked 3D grid domain and its discrete differential operators.

A :class:`Mask` selects the active voxels of a ``(p_i, p_j, p_k)`` lattice.
Scalar fields over the active voxels live in :class:`MaskedVolume`; their
forward-difference gradients live in :class:`VectorField`, one component per
axis.  A gradient component is defined only where a voxel *and* its forward
neighbour are both active; everywhere else (mask boundary or grid border) it
is identically zero.  :func:`divergence` is the exact negative adjoint of
:func:`gradient`, so ``<gradient(v), f> == -<v, divergence(f)>`` holds to
roundoff for every volume/field pair on the same mask.

The isotropic total variation :func:`tv` sums the Euclidean norms of the
per-voxel gradient triples.  :func:`laplacian_lipschitz` estimates the
spectral norm of ``divergence(gradient(.))``, which bounds the step size of
the dual projection loop in :mod:`tvreg.tvprox`.

Active voxels are ordered lexicographically by ``(k, j, i)`` ascending
(z-major); every flat array indexed "by active ordinal" follows this order.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass

import numpy as np

from .spectral import power_iteration_norm

__all__ = [
    "Mask",
    "MaskedVolume",
    "VectorField",
    "gradient",
    "divergence",
    "tv",
    "laplacian_lipschitz",
]


def _axis_slices(axis):
    lo = [slice(None)] * 3
    hi = [slice(None)] * 3
    lo[axis] = slice(None, -1)
    hi[axis] = slice(1, None)
    return tuple(lo), tuple(hi)


_LO, _HI = zip(*(_axis_slices(a) for a in range(3)))


class Mask:
    """Set of active voxels on a 3D lattice, with a fixed active ordering.

    Parameters
    ----------
    flags : array_like of bool, shape (p_i, p_j, p_k)
        True marks an active voxel.  At least one voxel must be active.

    Attributes
    ----------
    dims : tuple of int
        Lattice extents ``(p_i, p_j, p_k)``.
    p : int
        Number of active voxels.
    flags : ndarray of bool
        The (read-only) activity grid.
    active_coords : ndarray of int, shape (p, 3)
        Rows are ``(i, j, k)`` coordinates in active-ordinal order, which is
        lexicographic by ``(k, j, i)`` ascending.
    pair : tuple of 3 bool ndarrays
        ``pair[a][i, j, k]`` is True when the voxel and its forward
        neighbour along axis ``a`` are both active; these are the sites
        carrying a gradient component.
    """

    def __init__(self, flags):
        flags = np.array(flags, dtype=bool)
        if flags.ndim != 3:
            raise ValueError(f"mask must be 3-dimensional, got shape {flags.shape}")
        if not flags.any():
            raise ValueError("mask must contain at least one active voxel")
        flags.setflags(write=False)
        self.flags = flags
        self.dims = flags.shape

        kk, jj, ii = np.nonzero(flags.transpose(2, 1, 0))
        self._embed_index = (ii, jj, kk)
        self.p = int(ii.size)
        coords = np.stack([ii, jj, kk], axis=1)
        coords.setflags(write=False)
        self.active_coords = coords

        ordinal_grid = np.full(self.dims, -1, dtype=np.int64)
        ordinal_grid[ii, jj, kk] = np.arange(self.p)
        self._ordinal_grid = ordinal_grid

        pair = []
        for a in range(3):
            pa = np.zeros(self.dims, dtype=bool)
            pa[_LO[a]] = flags[_LO[a]] & flags[_HI[a]]
            pa.setflags(write=False)
            pair.append(pa)
        self.pair = tuple(pair)

        self._lap_norm = None
        self._lap_lock = threading.Lock()

    @classmethod
    def full(cls, dims):
        """Mask with every voxel of a ``dims`` lattice active."""
        return cls(np.ones(dims, dtype=bool))

    def ordinal(self, i, j, k):
        """Active ordinal(s) of coordinates ``(i, j, k)``.

        Raises
        ------
        ValueError
            If any coordinate refers to an inactive voxel.
        """
        o = self._ordinal_grid[i, j, k]
        if np.any(np.asarray(o) < 0):
            raise ValueError("coordinates do not lie in the mask")
        return o

    def coords(self, ordinal):
        """Coordinates ``(i, j, k)`` of active ordinal(s)."""
        return self.active_coords[ordinal]

    def embed(self, values):
        """Scatter active-ordinal values into a dense zero-padded grid."""
        dense = np.zeros(self.dims)
        dense[self._embed_index] = values
        return dense

    def extract(self, dense):
        """Gather the active voxels of a dense grid, in active order."""
        return np.asarray(dense[self._embed_index], dtype=float)

    def same_domain(self, other):
        """Whether ``other`` selects the same voxels on the same lattice."""
        return self is other or (
            self.dims == other.dims and np.array_equal(self.flags, other.flags)
        )

    def laplacian_norm(self):
        """Cached :func:`laplacian_lipschitz` at default parameters."""
        if self._lap_norm is None:
            with self._lap_lock:
                if self._lap_norm is None:
                    self._lap_norm = laplacian_lipschitz(self)
        return self._lap_norm

    def __repr__(self):
        return f"Mask(dims={self.dims}, p={self.p})"


@dataclass(frozen=True)
class MaskedVolume:
    """Scalar field over the active voxels of a mask.

    ``values`` holds one float per active voxel, in active-ordinal order.
    All values must be finite.
    """

    mask: Mask
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.shape != (self.mask.p,):
            raise ValueError(
                f"expected {self.mask.p} values, got shape {values.shape}"
            )
        if not np.all(np.isfinite(values)):
            raise ValueError("volume values must be finite")
        object.__setattr__(self, "values", values)

    @classmethod
    def zeros(cls, mask):
        return cls(mask, np.zeros(mask.p))

    @classmethod
    def from_dense(cls, mask, dense):
        """Restrict a dense ``mask.dims`` grid to the active voxels."""
        return cls(mask, mask.extract(dense))

    def to_dense(self):
        """Dense grid with inactive voxels zero-filled."""
        return self.mask.embed(self.values)


@dataclass(frozen=True)
class VectorField:
    """Per-axis forward-difference components over the active voxels.

    Components are zero wherever the forward neighbour along their axis is
    inactive or off the grid (the gradient-image property); the constructor
    rejects fields violating this, since the divergence formula and the
    dual-ball projection both rely on it.
    """

    mask: Mask
    x: np.ndarray
    y: np.ndarray
    z: np.ndarray

    def __post_init__(self):
        for name, a in (("x", 0), ("y", 1), ("z", 2)):
            comp = np.asarray(getattr(self, name), dtype=float)
            if comp.shape != (self.mask.p,):
                raise ValueError(
                    f"component {name}: expected {self.mask.p} values, "
                    f"got shape {comp.shape}"
                )
            if not np.all(np.isfinite(comp)):
                raise ValueError(f"component {name} must be finite")
            carries = self.mask.pair[a][self.mask._embed_index]
            if np.any(comp[~carries] != 0.0):
                raise ValueError(
                    f"component {name} must vanish across mask boundaries"
                )
            object.__setattr__(self, name, comp)

    @classmethod
    def zeros(cls, mask):
        zero = np.zeros(mask.p)
        return cls(mask, zero, zero.copy(), zero.copy())

    def components(self):
        """Components stacked as a ``(3, p)`` array."""
        return np.stack([self.x, self.y, self.z])


# -- dense-grid kernels -------------------------------------------------------
#
# The public operations below wrap these; tvprox iterates on the dense form
# directly so the inner loop stays fully vectorized.


def gradient_dense(mask, dense):
    """Forward-difference gradient of a dense volume, ``(3, *dims)``."""
    out = np.zeros((3,) + mask.dims)
    for a in range(3):
        comp = out[a]
        comp[_LO[a]] = dense[_HI[a]] - dense[_LO[a]]
        comp *= mask.pair[a]
    return out


def divergence_dense(mask, field):
    """Negative adjoint of :func:`gradient_dense` for a ``(3, *dims)`` field.

    Per axis this is the backward difference of the component, with the
    one-sided cases at mask boundaries: a voxel whose backward neighbour is
    inactive keeps its own component; the contribution of the last active
    voxel of a run is carried with a minus sign.  Components across
    boundaries are masked out, which makes the adjoint identity exact for
    arbitrary input arrays.
    """
    out = np.zeros(mask.dims)
    for a in range(3):
        d = field[a] * mask.pair[a]
        out += d
        out[_HI[a]] -= d[_LO[a]]
    return out


def tv_dense(mask, dense):
    """Isotropic total variation of a dense volume."""
    g = gradient_dense(mask, dense)
    return float(np.sqrt((g * g).sum(axis=0)).sum())


# -- public operations --------------------------------------------------------


def gradient(v):
    """Forward-difference gradient of a masked volume.

    Component ``a`` at voxel ``w`` is ``value(forward neighbour) - value(w)``
    when both sites are active, and 0 otherwise.
    """
    g = gradient_dense(v.mask, v.to_dense())
    return VectorField(v.mask, *(v.mask.extract(g[a]) for a in range(3)))


def divergence(f):
    """Divergence of a vector field; exact negative adjoint of the gradient."""
    field = np.stack([f.mask.embed(c) for c in (f.x, f.y, f.z)])
    return MaskedVolume.from_dense(f.mask, divergence_dense(f.mask, field))


def tv(v):
    """Isotropic total variation: sum of per-voxel gradient norms."""
    return tv_dense(v.mask, v.to_dense())


def laplacian_lipschitz(mask, *, seed=0, tol=1e-7, max_iter=10000):
    """Spectral norm of the masked Laplacian ``divergence . gradient``.

    The Laplacian is self-adjoint and negative semidefinite, so the power
    method on it converges to the largest eigenvalue magnitude, which is the
    value bounding the dual step size.  Deterministic given ``seed``.  Emits
    :class:`~tvreg.exceptions.ConvergenceWarning` if ``max_iter`` is reached
    before the relative tolerance ``tol``; the estimate is still returned.
    """

    def matvec(values):
        dense = mask.embed(values)
        return mask.extract(divergence_dense(mask, gradient_dense(mask, dense)))

    return power_iteration_norm(
        matvec, mask.p, seed=seed, tol=tol, max_iter=max_iter
    )
