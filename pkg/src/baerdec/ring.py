"""The *-ring layer over n x n complex matrices.

Range projections of elements, the complete lattice the projections form,
commutation residuals, corner compression and range projections of powers.
The range projection of x is the minimal projection p with p x = x; here it
is the orthogonal projection onto the column space of x.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InputError, InternalConsistencyError
from .numeric import (
    DEFAULT_TOL,
    SUBSPACE_EQ_REL,
    Frame,
    ToleranceProfile,
    as_square_matrix,
    frob,
    rank_revealing_frame,
    subspace_intersection,
)

# Hermitian-idempotent drift allowed by the Projection invariant:
# ||P^2 - P||_F and ||P - P*||_F bounded by PROJ_INVARIANT_REL * dim.
PROJ_INVARIANT_REL = 1e-10


@dataclass(frozen=True)
class Projection:
    """Self-adjoint idempotent, stored with an orthonormal range frame.

    The matrix is derived from the frame (P = F F*), which keeps repeated
    lattice arithmetic from accumulating idempotency drift.
    """

    frame: Frame
    matrix: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        m = self.frame.projection_matrix()
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.frame.dim

    @property
    def rank(self) -> int:
        return self.frame.size

    @classmethod
    def zero(cls, dim: int) -> "Projection":
        return cls(Frame.zero(dim))

    @classmethod
    def identity(cls, dim: int) -> "Projection":
        return cls(Frame.full(dim))

    @classmethod
    def from_matrix(cls, m, tol: ToleranceProfile = DEFAULT_TOL) -> "Projection":
        """Canonicalize an approximate projection matrix.

        The frame is re-extracted from the Hermitian average (P + P*)/2 with
        eigenvalue threshold 1/2; drift beyond PROJ_INVARIANT_REL * dim is an
        internal-consistency failure (callers at the input boundary translate
        it into an input error).
        """
        a = as_square_matrix(m, min_dim=0)
        dim = a.shape[0]
        drift = max(frob(a @ a - a), frob(a - a.conj().T))
        if drift > PROJ_INVARIANT_REL * max(dim, 1):
            raise InternalConsistencyError(
                f"matrix is not a projection within tolerance (drift {drift:.3e})"
            )
        h = (a + a.conj().T) / 2.0
        w, v = np.linalg.eigh(h) if dim else (np.zeros(0), np.zeros((0, 0)))
        return cls(Frame(v[:, w > 0.5]))

    def complement(self) -> "Projection":
        return Projection(self.frame.complement())


def projections_equal(p: Projection, q: Projection) -> bool:
    """Equality as subspaces: ||P - Q||_F <= 1e-10 * dim."""
    if p.dim != q.dim:
        raise InputError(f"mismatched dimensions: {p.dim} != {q.dim}")
    return frob(p.matrix - q.matrix) <= SUBSPACE_EQ_REL * p.dim


def leq_residual(p: Projection, q: Projection) -> float:
    """Residual of p <= q, namely ||q p - p||_F (zero iff ran p inside ran q)."""
    return frob(q.matrix @ p.matrix - p.matrix)


@dataclass(frozen=True)
class TupleInstance:
    """Ordered tuple of same-dimension matrices, the joint input of a decomposition."""

    elements: tuple
    labels: tuple | None = None

    def __post_init__(self):
        elems = tuple(as_square_matrix(x, min_dim=0) for x in self.elements)
        if not elems:
            raise InputError("tuple instance must be nonempty")
        dim = elems[0].shape[0]
        for x in elems:
            if x.shape[0] != dim:
                raise InputError("tuple entries must share one dimension")
        for x in elems:
            x.setflags(write=False)
        object.__setattr__(self, "elements", elems)
        if self.labels is not None:
            labels = tuple(str(s) for s in self.labels)
            if len(labels) != len(elems):
                raise InputError("labels must match the number of entries")
            object.__setattr__(self, "labels", labels)

    @property
    def dim(self) -> int:
        return self.elements[0].shape[0]

    def __len__(self) -> int:
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    def norm_scale(self) -> float:
        """Largest Frobenius norm among the entries."""
        return max(frob(x) for x in self.elements)


def as_tuple_instance(t) -> TupleInstance:
    """Coerce a TupleInstance, a sequence of matrices, or a single matrix."""
    if isinstance(t, TupleInstance):
        return t
    if isinstance(t, np.ndarray):
        return TupleInstance((t,))
    return TupleInstance(tuple(t))


def left_projection(x, tol: ToleranceProfile = DEFAULT_TOL) -> Projection:
    """The minimal projection p with p x = x: projection onto the column space."""
    x = as_square_matrix(x, min_dim=0)
    return Projection(rank_revealing_frame(x, tol))


def right_projection(x, tol: ToleranceProfile = DEFAULT_TOL) -> Projection:
    """The minimal projection q with x q = x (left projection of the adjoint)."""
    x = as_square_matrix(x, min_dim=0)
    return left_projection(x.conj().T, tol)


def _uniform_dim(ps, dim):
    ps = list(ps)
    if ps:
        d = ps[0].dim
        for p in ps:
            if p.dim != d:
                raise InputError(f"mismatched dimensions: {p.dim} != {d}")
        if dim is not None and dim != d:
            raise InputError(f"explicit dim {dim} contradicts projections of dim {d}")
        return ps, d
    if dim is None:
        raise InputError("empty projection list needs an explicit dim")
    return ps, dim


def proj_sup(ps, tol: ToleranceProfile = DEFAULT_TOL, dim: int | None = None) -> Projection:
    """Supremum: projection onto the span of the union of ranges; sup of nothing is 0."""
    ps, d = _uniform_dim(ps, dim)
    if not ps:
        return Projection.zero(d)
    stacked = np.hstack([p.frame.cols for p in ps])
    return Projection(rank_revealing_frame(stacked, tol, floor=1.0))


def proj_inf(ps, tol: ToleranceProfile = DEFAULT_TOL, dim: int | None = None) -> Projection:
    """Infimum: projection onto the intersection of ranges; inf of nothing is 1.

    Computed as the complement of the sup of complements and cross-checked
    against the direct subspace intersection; disagreement means a rank
    decision went wrong somewhere.
    """
    ps, d = _uniform_dim(ps, dim)
    if not ps:
        return Projection.identity(d)
    primary = proj_sup([p.complement() for p in ps], tol, dim=d).complement()
    direct = subspace_intersection([p.frame for p in ps], tol)
    if frob(primary.matrix - direct.projection_matrix()) > SUBSPACE_EQ_REL * max(d, 1):
        raise InternalConsistencyError(
            "projection infimum: complement-of-sup and direct intersection disagree"
        )
    return primary


def commutation_residual(a, b) -> float:
    """||a b - b a||_F; accepts matrices or projections."""
    a = np.asarray(getattr(a, "matrix", a), dtype=np.complex128)
    b = np.asarray(getattr(b, "matrix", b), dtype=np.complex128)
    if a.shape != b.shape:
        raise InputError(f"mismatched shapes: {a.shape} vs {b.shape}")
    return frob(a @ b - b @ a)


def corner_compress(x, p: Projection) -> np.ndarray:
    """The matrix of p x p in the frame coordinates of p (rank x rank).

    Multiplicative on elements commuting with p; otherwise it is just the
    compression. The 0 x 0 corner is legal.
    """
    x = as_square_matrix(x, min_dim=0)
    if x.shape[0] != p.dim:
        raise InputError(f"matrix dimension {x.shape[0]} != projection dimension {p.dim}")
    f = p.frame.cols
    return f.conj().T @ x @ f


def corner_embed(m, p: Projection) -> np.ndarray:
    """Embed a rank x rank corner matrix back into the ambient space."""
    m = np.asarray(m, dtype=np.complex128)
    f = p.frame.cols
    if m.shape != (p.rank, p.rank):
        raise InputError(f"corner matrix shape {m.shape} != ({p.rank}, {p.rank})")
    return f @ m @ f.conj().T


def power_range_chain(x, max_power: int, tol: ToleranceProfile = DEFAULT_TOL) -> list:
    """Frames of the column spaces of x^1, ..., x^max_power.

    Computed by the stable recursion ran(x^(m+1)) = x . ran(x^m) with a fresh
    orthonormalization per step; the chain is decreasing and stabilizes by
    the ambient dimension.
    """
    x = as_square_matrix(x, min_dim=0)
    if max_power < 1:
        raise InputError("max_power must be at least 1")
    scale = frob(x)
    chain = [rank_revealing_frame(x, tol, floor=scale)]
    for _ in range(1, max_power):
        prev = chain[-1]
        if prev.size == 0:
            chain.append(prev)
            continue
        chain.append(rank_revealing_frame(x @ prev.cols, tol, floor=scale))
    return chain


def power_range_projection(x, m: int, tol: ToleranceProfile = DEFAULT_TOL) -> Projection:
    """Range projection of x^m; powers beyond the dimension add nothing,
    so m is capped at dim."""
    x = as_square_matrix(x, min_dim=0)
    if m < 1:
        raise InputError("power must be a positive integer")
    dim = x.shape[0]
    if dim == 0:
        return Projection.zero(0)
    eff = min(m, dim)
    return Projection(power_range_chain(x, eff, tol)[-1])
