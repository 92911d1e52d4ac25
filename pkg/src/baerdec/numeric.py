"""Floating-point linear-algebra substrate: frames, rank decisions, subspace ops.

Every rank, kernel and subspace-equality decision in the package funnels
through this module so that there is exactly one tolerance policy:

* a singular value counts toward a rank iff it exceeds
  ``rank_rel * max(sigma_max, floor)``, where ``floor`` anchors the decision
  to the natural scale of the operation (0 for a bare factorization, the
  norm of the mapped operator for preimages, 1 for stacks of projections or
  unit-length frame columns);
* two subspaces are equal iff their orthogonal projections differ by at most
  ``1e-10 * dim`` in Frobenius norm.

Orthonormal frames, not projection matrices, are the canonical carrier of a
subspace; the empty frame (k = 0) is a first-class value representing the
zero subspace.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InputError

# Subspace equality: ||P - Q||_F <= SUBSPACE_EQ_REL * dim.
SUBSPACE_EQ_REL = 1e-10
# Orthonormality drift tolerated at frame construction time.
FRAME_ORTHO_TOL = 1e-12


@dataclass(frozen=True)
class ToleranceProfile:
    """Thresholds governing all floating-point decisions.

    ``rank_rel``: relative singular-value cutoff for rank decisions.
    ``res_rel``: relative residual threshold for "this matrix is zero".
    ``max_iter_slack``: extra subspace-iteration steps allowed beyond the
    ambient dimension before the engine declares instability.
    """

    rank_rel: float = 1e-10
    res_rel: float = 1e-8
    max_iter_slack: int = 1

    def __post_init__(self):
        if not 0.0 < self.rank_rel < 1.0:
            raise InputError(f"rank_rel must lie in (0, 1), got {self.rank_rel!r}")
        if not 0.0 < self.res_rel < 1.0:
            raise InputError(f"res_rel must lie in (0, 1), got {self.res_rel!r}")
        if self.max_iter_slack < 0:
            raise InputError("max_iter_slack must be nonnegative")

    def tightened(self, factor: float = 100.0) -> "ToleranceProfile":
        """Profile with the rank cutoff divided by ``factor`` (retry policy)."""
        return ToleranceProfile(self.rank_rel / factor, self.res_rel, self.max_iter_slack)


DEFAULT_TOL = ToleranceProfile()


def as_square_matrix(m, min_dim: int = 1) -> np.ndarray:
    """Validate and return ``m`` as a finite square complex128 array."""
    a = np.asarray(m, dtype=np.complex128)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise InputError(f"expected a square matrix, got shape {a.shape}")
    if a.shape[0] < min_dim:
        raise InputError(f"matrix dimension must be at least {min_dim}, got {a.shape[0]}")
    if a.size and not np.isfinite(a).all():
        raise InputError("matrix entries must be finite (no NaN/Inf)")
    return a


def frob(m) -> float:
    """Frobenius norm."""
    return float(np.linalg.norm(np.asarray(m)))


@dataclass(frozen=True)
class Frame:
    """Orthonormal columns spanning a subspace of C^dim.

    ``cols`` has shape (dim, k); k = 0 is the zero subspace.
    """

    cols: np.ndarray

    def __post_init__(self):
        cols = np.asarray(self.cols, dtype=np.complex128)
        if cols.ndim != 2:
            raise InputError(f"frame columns must form a 2-d array, got shape {cols.shape}")
        if cols.shape[1] > cols.shape[0]:
            raise InputError(f"frame has more columns than the ambient dimension: {cols.shape}")
        gram = cols.conj().T @ cols
        k = cols.shape[1]
        if np.linalg.norm(gram - np.eye(k)) > FRAME_ORTHO_TOL * max(1, k):
            raise InputError("frame columns are not orthonormal")
        cols = cols.copy()
        cols.setflags(write=False)
        object.__setattr__(self, "cols", cols)

    @property
    def dim(self) -> int:
        return self.cols.shape[0]

    @property
    def size(self) -> int:
        """Dimension of the spanned subspace."""
        return self.cols.shape[1]

    @classmethod
    def zero(cls, dim: int) -> "Frame":
        return cls(np.zeros((dim, 0), dtype=np.complex128))

    @classmethod
    def full(cls, dim: int) -> "Frame":
        return cls(np.eye(dim, dtype=np.complex128))

    def projection_matrix(self) -> np.ndarray:
        p = self.cols @ self.cols.conj().T
        return (p + p.conj().T) / 2.0

    def complement(self, tol: ToleranceProfile = DEFAULT_TOL) -> "Frame":
        """Orthonormal basis of the orthogonal complement."""
        if self.size == 0:
            return Frame.full(self.dim)
        return kernel_frame(self.cols.conj().T, tol, floor=1.0)


def rank_revealing_frame(m, tol: ToleranceProfile = DEFAULT_TOL, floor: float = 0.0) -> Frame:
    """Orthonormal basis of the column space of ``m`` (any rectangular array).

    A singular value counts toward the rank iff it exceeds
    ``rank_rel * max(sigma_max, floor)``; the rank is 0 when sigma_max = 0.
    """
    a = np.asarray(m, dtype=np.complex128)
    if a.ndim != 2:
        raise InputError(f"expected a matrix, got shape {a.shape}")
    if a.size and not np.isfinite(a).all():
        raise InputError("matrix entries must be finite (no NaN/Inf)")
    if a.shape[1] == 0 or a.shape[0] == 0:
        return Frame.zero(a.shape[0])
    u, s, _ = np.linalg.svd(a, full_matrices=False)
    cut = tol.rank_rel * max(float(s[0]), floor)
    rank = int(np.count_nonzero(s > cut))
    return Frame(u[:, :rank])


def kernel_frame(m, tol: ToleranceProfile = DEFAULT_TOL, floor: float = 0.0) -> Frame:
    """Orthonormal basis of the null space of ``m``, same cutoff rule."""
    a = np.asarray(m, dtype=np.complex128)
    if a.ndim != 2:
        raise InputError(f"expected a matrix, got shape {a.shape}")
    n = a.shape[1]
    if a.shape[0] == 0 or n == 0:
        return Frame.full(n)
    # The wide case needs the full V to expose all null directions.
    _, s, vh = np.linalg.svd(a, full_matrices=a.shape[0] < n)
    cut = tol.rank_rel * max(float(s[0]) if s.size else 0.0, floor)
    rank = int(np.count_nonzero(s > cut))
    return Frame(vh[rank:].conj().T)


def subspace_intersection(frames, tol: ToleranceProfile = DEFAULT_TOL) -> Frame:
    """Orthonormal basis of the intersection of the spanned subspaces.

    A vector lies in the intersection iff every complement projection
    annihilates it, so the kernel of the stacked complements is taken.
    Projections have unit scale, hence the rank floor of 1.
    """
    frames = list(frames)
    if not frames:
        raise InputError("subspace_intersection needs at least one frame")
    dim = frames[0].dim
    for f in frames:
        if f.dim != dim:
            raise InputError(f"mismatched ambient dimensions: {f.dim} != {dim}")
    if len(frames) == 1:
        return frames[0]
    eye = np.eye(dim)
    stacked = np.vstack([eye - f.projection_matrix() for f in frames])
    return kernel_frame(stacked, tol, floor=1.0)


def preimage_subspace(a, f: Frame, tol: ToleranceProfile = DEFAULT_TOL) -> Frame:
    """Orthonormal basis of {v : a v in span f} = ker((I - P_f) a)."""
    a = as_square_matrix(a, min_dim=0)
    if a.shape[0] != f.dim:
        raise InputError(f"matrix dimension {a.shape[0]} != frame dimension {f.dim}")
    m = (np.eye(f.dim) - f.projection_matrix()) @ a
    return kernel_frame(m, tol, floor=frob(a))


def subspace_equal(f: Frame, g: Frame) -> bool:
    """Subspace equality via projection distance (the one comparison used everywhere)."""
    if f.dim != g.dim:
        raise InputError(f"mismatched ambient dimensions: {f.dim} != {g.dim}")
    return frob(f.projection_matrix() - g.projection_matrix()) <= SUBSPACE_EQ_REL * f.dim
