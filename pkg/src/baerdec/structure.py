"""Structure theory of (power) partial isometries.

Finite-dimensional isometries are unitary, so the Wold split of an isometry
degenerates: the shift part is always zero and the engine asserting that is
itself a consistency check.  The interesting finite-dimensional content is
the truncated-shift analysis of power partial isometries: away from its
maximal unitary part such an element is nilpotent and unitarily equivalent
to a direct sum of truncated shifts, whose multiplicity of length k is the
second difference r_{k-1} - 2 r_k + r_{k+1} of the rank sequence
r_k = rank(x^k).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .engine import CellDecomposition, max_property_projection
from .errors import InputError, InternalConsistencyError
from .numeric import DEFAULT_TOL, ToleranceProfile, frob, rank_revealing_frame
from .properties import builtin_property, lift_spec
from .ring import (
    Projection,
    as_tuple_instance,
    commutation_residual,
    corner_compress,
    left_projection,
    power_range_projection,
)


@dataclass(frozen=True)
class ShiftProfile:
    """Unitary part plus truncated-shift multiplicities of a power partial isometry.

    ``multiplicities[k]`` counts shift blocks of length k >= 1.  The pure
    isometry and pure co-isometry ranks are identically zero in finite
    dimension but kept so reports stay schema-compatible with carriers where
    they are not.
    """

    unitary_projection: Projection
    multiplicities: dict
    pure_isometry_rank: int = 0
    pure_coisometry_rank: int = 0

    def __post_init__(self):
        for k, m in self.multiplicities.items():
            if k < 1 or m < 0:
                raise InputError(f"bad multiplicity entry {k}:{m}")

    @property
    def dim(self) -> int:
        return self.unitary_projection.dim

    def check_dimension_bookkeeping(self):
        total = self.unitary_projection.rank + sum(
            k * m for k, m in self.multiplicities.items()
        )
        if total != self.dim:
            raise InternalConsistencyError(
                f"shift profile accounts for {total} of {self.dim} dimensions"
            )


@dataclass(frozen=True)
class WoldReport:
    unitary_projection: Projection
    shift_rank: int


def _isometry_defect(x) -> float:
    n = x.shape[0]
    return frob(x.conj().T @ x - np.eye(n))


def wold(x, tol: ToleranceProfile = DEFAULT_TOL) -> WoldReport:
    """Split an isometry into unitary and shift parts.

    In finite dimension the shift rank must come out 0; anything else is an
    internal-consistency failure, not a mathematical possibility.
    """
    t = as_tuple_instance(x)
    x = t.elements[0]
    defect = _isometry_defect(x)
    if defect > tol.res_rel * (1.0 + frob(x)) ** 2:
        raise InputError(f"not an isometry: ||x*x - 1||_F = {defect:.6g}")
    p_u = max_property_projection(t, builtin_property("unitary", t.dim), tol).projection
    shift_rank = t.dim - p_u.rank
    if shift_rank != 0:
        raise InternalConsistencyError(
            f"finite-dimensional isometry produced shift rank {shift_rank}"
        )
    return WoldReport(unitary_projection=p_u, shift_rank=shift_rank)


@dataclass(frozen=True)
class HalmosWallenReport:
    """Either a ShiftProfile or the first power at which the gate failed."""

    is_power_partial_isometry: bool
    profile: ShiftProfile | None = None
    first_failing_power: int | None = None
    failing_residual: float | None = None


def power_partial_isometry_defect(x, k: int) -> float:
    """||x^k (x^k)* x^k - x^k||_F, zero iff the k-th power is a partial isometry."""
    xk = np.linalg.matrix_power(x, k)
    return frob(xk @ xk.conj().T @ xk - xk)


def halmos_wallen(x, tol: ToleranceProfile = DEFAULT_TOL) -> HalmosWallenReport:
    """Unitary-plus-truncated-shifts analysis of a power partial isometry.

    Powers need checking only up to the dimension; beyond that the rank
    sequence has stabilized and nothing new can fail.  A failed gate is a
    verdict, not an exception.
    """
    t = as_tuple_instance(x)
    x = t.elements[0]
    dim = t.dim
    for k in range(1, dim + 1):
        xk_norm = frob(np.linalg.matrix_power(x, k))
        defect = power_partial_isometry_defect(x, k)
        if defect > tol.res_rel * (1.0 + xk_norm) ** 3:
            return HalmosWallenReport(
                is_power_partial_isometry=False,
                first_failing_power=k,
                failing_residual=defect,
            )

    p_u = max_property_projection(t, builtin_property("unitary", dim), tol).projection
    comp = p_u.complement()
    corner = corner_compress(x, comp)
    ranks = _corner_rank_sequence(corner, tol)
    multiplicities = {}
    for k in range(1, comp.rank + 1):
        m = ranks[k - 1] - 2 * ranks[k] + ranks[k + 1]
        if m < 0:
            raise InternalConsistencyError(
                f"negative multiplicity at block length {k}: rank sequence {ranks}"
            )
        if m:
            multiplicities[k] = m
    profile = ShiftProfile(unitary_projection=p_u, multiplicities=multiplicities)
    profile.check_dimension_bookkeeping()
    return HalmosWallenReport(is_power_partial_isometry=True, profile=profile)


def _corner_rank_sequence(corner, tol):
    """r_0 = corner dimension, r_k = rank(corner^k), k up to dimension + 1.

    Second differences amplify noise, so each rank decision is anchored to
    the norm of the corner itself.
    """
    d = corner.shape[0]
    ranks = [d]
    power = np.eye(d, dtype=np.complex128)
    floor = frob(corner)
    for _ in range(d + 1):
        power = power @ corner
        ranks.append(rank_revealing_frame(power, tol, floor=floor).size)
    return ranks


def defect_projection(x, m: int, tol: ToleranceProfile = DEFAULT_TOL) -> Projection:
    """Range projection of x^m (1 - [x]); m = 0 gives 1 - [x] itself.

    The range of the product equals the image of ran(1 - [x]) under x^m, so
    it is computed by m stable image steps, each rank decision anchored to
    the norm of x (a noise-level image must come out as the zero subspace).
    Cost grows linearly in m.
    """
    t = as_tuple_instance(x)
    x = t.elements[0]
    if m < 0:
        raise InputError("power must be nonnegative")
    frame = left_projection(x, tol).frame.complement(tol)
    scale = frob(x)
    for _ in range(m):
        if frame.size == 0:
            break
        frame = rank_revealing_frame(x @ frame.cols, tol, floor=scale)
    return Projection(frame)


def defect_telescoping_residual(x, m: int, tol: ToleranceProfile = DEFAULT_TOL) -> float:
    """|| [x^m (1 - [x])] - ([x^m] - [x^(m+1)]) ||_F.

    The identity holds for isometries; for general power partial isometries
    it is checked empirically (the ranges of powers are nested, so the
    difference of consecutive range projections is again a projection).
    """
    t = as_tuple_instance(x)
    x = t.elements[0]
    if m < 1:
        raise InputError("telescoping check needs m >= 1")
    lhs = defect_projection(x, m, tol).matrix
    pm = power_range_projection(x, m, tol).matrix
    pm1 = power_range_projection(x, m + 1, tol).matrix
    return frob(lhs - (pm - pm1))


@dataclass(frozen=True)
class WoldSlocinskiReport:
    """Four-cell split of a doubly commuting pair of isometries plus model identities.

    In finite dimension every cell except the unitary-unitary one is zero
    and the model-sum identities hold degenerately; their residuals are
    still evaluated literally.  The telescoping checks on the inputs are
    reported separately.
    """

    cells: CellDecomposition
    identity_residuals: dict
    telescoping: tuple  # ((label, m, residual), ...)


def wold_slocinski(x, y, tol: ToleranceProfile = DEFAULT_TOL) -> WoldSlocinskiReport:
    """Wold split of a doubly commuting pair of isometries, with model identities."""
    t = as_tuple_instance((x, y))
    x, y = t.elements
    dim = t.dim
    for label, z in (("x", x), ("y", y)):
        defect = _isometry_defect(z)
        if defect > tol.res_rel * (1.0 + frob(z)) ** 2:
            raise InputError(f"{label} is not an isometry: ||z*z - 1||_F = {defect:.6g}")
    scale = tol.res_rel * (1.0 + frob(x)) * (1.0 + frob(y))
    if commutation_residual(x, y) > scale or commutation_residual(x, y.conj().T) > scale:
        raise InputError("pair is not doubly commuting within tolerance")

    unitary = builtin_property("unitary", dim)
    rep_x = max_property_projection(t, lift_spec(unitary, 2, 0), tol)
    rep_y = max_property_projection(t, lift_spec(unitary, 2, 1), tol)
    pux, puy = rep_x.projection, rep_y.projection
    eye = np.eye(dim, dtype=np.complex128)
    mk = lambda m: Projection.from_matrix(m, tol)  # noqa: E731
    cells = CellDecomposition(
        properties=("unitary@x", "unitary@y"),
        cells=(
            ((1, 1), mk(pux.matrix @ puy.matrix)),
            ((1, 0), mk(pux.matrix @ (eye - puy.matrix))),
            ((0, 1), mk((eye - pux.matrix) @ puy.matrix)),
            ((0, 0), mk((eye - pux.matrix) @ (eye - puy.matrix))),
        ),
        reports=(rep_x, rep_y),
    )
    total = sum(c.matrix for _, c in cells.cells)
    if frob(total - eye) > tol.res_rel * max(dim, 1):
        raise InternalConsistencyError("Wold cells do not sum to the identity")

    p_us = cells.cell((1, 0)).matrix
    p_su = cells.cell((0, 1)).matrix
    p_ss = cells.cell((0, 0)).matrix

    # Model sums; every defect projection of a finite-dimensional isometry is
    # zero, so these are degenerate identities checked literally.
    defects_x = [defect_projection(x, i, tol).matrix for i in range(dim + 1)]
    defects_y = [defect_projection(y, i, tol).matrix for i in range(dim + 1)]
    sum_us = sum(p_us @ x @ dy for dy in defects_y)
    sum_su = sum(p_su @ y @ dx for dx in defects_x)
    lp_x = left_projection(x, tol).matrix
    lp_y = left_projection(y, tol).matrix
    res_x = eye - lp_x
    res_y = eye - lp_y
    sum_ss = np.zeros((dim, dim), dtype=np.complex128)
    for m in range(dim + 1):
        xm = np.linalg.matrix_power(x, m)
        for n in range(dim + 1):
            yn = np.linalg.matrix_power(y, n)
            sum_ss = sum_ss + left_projection(p_ss @ xm @ yn @ res_x @ res_y, tol).matrix
    identity_residuals = {
        "p_us x = sum_i p_us x [y^i(1-[y])]": frob(p_us @ x - sum_us),
        "p_su y = sum_i p_su y [x^i(1-[x])]": frob(p_su @ y - sum_su),
        "p_ss = sum_mn [p_ss x^m y^n (1-[x])(1-[y])]": frob(p_ss - sum_ss),
    }

    telescoping = tuple(
        (label, m, defect_telescoping_residual(z, m, tol))
        for label, z in (("x", x), ("y", y))
        for m in range(1, dim + 1)
    )
    return WoldSlocinskiReport(
        cells=cells,
        identity_residuals=identity_residuals,
        telescoping=telescoping,
    )
