"""Decomposition engine.

For a tuple of matrices and a property given by compression-equivariant
functionals, there is a unique maximal projection commuting with every entry
whose corner has the property while the complementary corner is completely
without it.  Abstractly that projection is a supremum over a set of
projections; concretely it is computed here as the largest jointly reducing
subspace contained in the constraint subspace:

* a projection q satisfies q <= 1 - [F] iff ran q is orthogonal to ran F,
  i.e. ran q lies in ker F*; intersecting over the functionals gives the
  constraint subspace S;
* a projection commutes with every entry iff its range is invariant under
  every entry and every adjoint (a reducing subspace);
* feasible subspaces are closed under span, so a unique largest one exists
  and the decreasing iteration V_0 = S, V_{k+1} = V_k intersected with the
  preimages of V_k under every entry and adjoint reaches it in at most dim
  steps.

Functional values that vanish within the residual tolerance are treated as
exact zeros before the constraint is assembled; everything else reuses the
global rank cutoff.  On an internal-consistency failure the computation is
retried once with the rank cutoff tightened by 100.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, replace

import numpy as np

from .errors import InputError, InternalConsistencyError, NumericalInstabilityError
from .numeric import (
    DEFAULT_TOL,
    Frame,
    ToleranceProfile,
    frob,
    preimage_subspace,
    rank_revealing_frame,
    subspace_equal,
    subspace_intersection,
)
from .properties import (
    PropertySpec,
    builtin_property,
    concat_specs,
    evaluate,
    functional_scales,
    lift_spec,
)
from .ring import (
    Projection,
    TupleInstance,
    as_tuple_instance,
    commutation_residual,
    corner_compress,
    leq_residual,
    projections_equal,
)

# Product law and planted-recovery agreement for independently computed
# projections (looser than raw subspace equality: two engine runs each carry
# their own rounding).
PROJECTION_AGREEMENT_TOL = 1e-6


@dataclass(frozen=True)
class AuditResult:
    """Outcome of rerunning the engine on the complementary corner."""

    rank: int
    residual: float


@dataclass(frozen=True)
class DecompositionReport:
    """Verdict record for one maximal-projection computation."""

    spec_name: str
    projection: Projection
    residuals: tuple
    commutation_residuals: tuple
    iterations: int
    constraint_rank: int
    dimension_trace: tuple
    complement_audit: AuditResult | None = None

    @property
    def dim(self) -> int:
        return self.projection.dim

    @property
    def rank(self) -> int:
        return self.projection.rank


@dataclass(frozen=True)
class CellDecomposition:
    """2^k pairwise orthogonal cells indexed by property bit-vectors, summing to 1."""

    properties: tuple
    cells: tuple  # ((bits, Projection), ...)
    reports: tuple

    def cell(self, bits) -> Projection:
        bits = tuple(int(b) for b in bits)
        for b, p in self.cells:
            if b == bits:
                return p
        raise InputError(f"no cell {bits} in decomposition over {self.properties}")


def _commutation_bound(tol, x, p_norm):
    return tol.res_rel * (1.0 + frob(x)) * (1.0 + p_norm)


def _constraint_frame(values, scales, tol):
    """Orthogonal complement of the span of the functional ranges.

    Values that are zero within the residual acceptance are dropped first;
    without that, noise-level matrices would contribute spurious ranges.
    """
    dim = values[0].shape[0]
    kept = [v for v, s in zip(values, scales) if frob(v) > tol.res_rel * s]
    if not kept:
        return Frame.full(dim), 0
    floor = max(
        s for v, s in zip(values, scales) if frob(v) > tol.res_rel * s
    )
    span = rank_revealing_frame(np.hstack(kept), tol, floor=floor)
    return span.complement(tol), span.size


def _solve(t: TupleInstance, spec: PropertySpec, tol: ToleranceProfile):
    values = evaluate(spec, t, unit=None, tol=tol)
    scales = functional_scales(spec, t)
    constraint, _ = _constraint_frame(values, scales, tol)
    constraint_rank = constraint.size

    maps = []
    for x in t:
        maps.append(x)
        maps.append(x.conj().T)

    v = constraint
    trace = [v.size]
    iterations = 0
    max_steps = t.dim + tol.max_iter_slack
    while v.size > 0:
        candidates = [v] + [preimage_subspace(a, v, tol) for a in maps]
        w = subspace_intersection(candidates, tol)
        iterations += 1
        trace.append(w.size)
        if w.size == v.size and subspace_equal(w, v):
            v = w
            break
        v = w
        if iterations > max_steps:
            raise NumericalInstabilityError(
                f"reducing-subspace iteration did not stabilize within {max_steps} steps",
                trace=trace,
            )

    p = Projection(v)

    comm = tuple(commutation_residual(p.matrix, x) for x in t)
    p_norm = frob(p.matrix)
    for x, r in zip(t, comm):
        if r > _commutation_bound(tol, x, p_norm):
            raise InternalConsistencyError(
                f"projection fails to commute with a tuple entry (residual {r:.3e})"
            )

    corner_values = evaluate(spec, t, unit=p, tol=tol)
    residuals = tuple(frob(cv) for cv in corner_values)
    for r, s in zip(residuals, scales):
        if r > tol.res_rel * s:
            raise InternalConsistencyError(
                f"property functional does not vanish on the corner (residual {r:.3e})"
            )

    return DecompositionReport(
        spec_name=spec.name,
        projection=p,
        residuals=residuals,
        commutation_residuals=comm,
        iterations=iterations,
        constraint_rank=constraint_rank,
        dimension_trace=tuple(trace),
    )


def max_property_projection(t, spec: PropertySpec, tol: ToleranceProfile = DEFAULT_TOL,
                            audit: bool = True) -> DecompositionReport:
    """The unique maximal projection whose corner has the property.

    The complementary corner is completely without it; with ``audit=True``
    (the default) that is verified by rerunning the engine there and
    demanding a zero fixed point.
    """
    t = as_tuple_instance(t)
    if len(t) != spec.arity:
        raise InputError(f"property {spec.name!r} has arity {spec.arity}, tuple has {len(t)}")

    def attempt(tp):
        report = _solve(t, spec, tp)
        if audit:
            audit_result = audit_complete_absence(t, spec, report.projection, tp)
            if audit_result.rank != 0:
                raise InternalConsistencyError(
                    f"complement corner still carries the property "
                    f"(audit rank {audit_result.rank}): projection is not maximal"
                )
            report = replace(report, complement_audit=audit_result)
        return report

    try:
        return attempt(tol)
    except InternalConsistencyError:
        return attempt(tol.tightened())


def audit_complete_absence(t, spec: PropertySpec, p: Projection,
                           tol: ToleranceProfile = DEFAULT_TOL) -> AuditResult:
    """Rerun the engine on the complementary corner of ``p``.

    Rank 0 certifies that the complement is completely without the property,
    i.e. that ``p`` is maximal; a nonzero rank is the caller's signal that it
    is not.
    """
    t = as_tuple_instance(t)
    comp = p.complement()
    if comp.rank == 0:
        return AuditResult(0, 0.0)
    corner = TupleInstance(tuple(corner_compress(x, comp) for x in t))
    inner = max_property_projection(corner, spec, tol, audit=False)
    return AuditResult(inner.projection.rank, frob(inner.projection.matrix))


def combine_properties(t, specs, tol: ToleranceProfile = DEFAULT_TOL) -> CellDecomposition:
    """Cell decomposition along several properties of the same tuple.

    The maximal projections of equivariant properties commute pairwise, and
    the product of two of them equals the maximal projection of the combined
    functional family; both facts are asserted here (the product law by an
    independent recomputation).  The 2^k products of the projections and
    their complements partition the identity.
    """
    t = as_tuple_instance(t)
    specs = list(specs)
    if not specs:
        raise InputError("combine_properties needs at least one property")
    reports = [max_property_projection(t, s, tol) for s in specs]
    ps = [r.projection for r in reports]

    p_norms = [frob(p.matrix) for p in ps]
    for (i, pa), (j, pb) in itertools.combinations(enumerate(ps), 2):
        r = commutation_residual(pa, pb)
        if r > tol.res_rel * (1.0 + p_norms[i]) * (1.0 + p_norms[j]):
            raise InternalConsistencyError(
                f"maximal projections for {specs[i].name!r} and {specs[j].name!r} "
                f"do not commute (residual {r:.3e}); rerun with a tighter rank cutoff"
            )
        union = concat_specs(f"{specs[i].name}+{specs[j].name}", [specs[i], specs[j]])
        joint = max_property_projection(t, union, tol).projection
        d = frob(pa.matrix @ pb.matrix - joint.matrix)
        if d > PROJECTION_AGREEMENT_TOL:
            raise InternalConsistencyError(
                f"product law violated for {union.name!r} (deviation {d:.3e})"
            )

    dim = t.dim
    eye = np.eye(dim, dtype=np.complex128)
    cells = []
    total = np.zeros((dim, dim), dtype=np.complex128)
    for bits in itertools.product((1, 0), repeat=len(ps)):
        m = eye.copy()
        for b, p in zip(bits, ps):
            m = m @ (p.matrix if b else eye - p.matrix)
        cell = Projection.from_matrix(m, tol)
        cells.append((bits, cell))
        total = total + cell.matrix
    if frob(total - eye) > tol.res_rel * max(dim, 1):
        raise InternalConsistencyError("cell projections do not sum to the identity")
    for (ba, ca), (bb, cb) in itertools.combinations(cells, 2):
        if frob(ca.matrix @ cb.matrix) > tol.res_rel * max(dim, 1):
            raise InternalConsistencyError(f"cells {ba} and {bb} are not orthogonal")

    return CellDecomposition(
        properties=tuple(s.name for s in specs),
        cells=tuple(cells),
        reports=tuple(reports),
    )


@dataclass(frozen=True)
class TripleDecomposition:
    """Identity split of a pair: doubly commuting part, compatible rest, remainder."""

    doubly_commuting: Projection  # p
    compatible: Projection  # q, with p <= q
    summands: tuple  # ((label, Projection) * 3)
    reports: tuple


def triple_decompose(x, y, tol: ToleranceProfile = DEFAULT_TOL) -> TripleDecomposition:
    """Split a pair into doubly commuting, compatible-but-not, and incompatible parts.

    Doubly commuting pairs are compatible, so the doubly commuting projection
    p lies under the compatible projection q; the three summands are p, q - p
    and 1 - q.
    """
    t = as_tuple_instance((x, y))
    rep_dc = max_property_projection(t, builtin_property("doubly_commuting", t.dim), tol)
    rep_cp = max_property_projection(t, builtin_property("compatible", t.dim), tol)
    p, q = rep_dc.projection, rep_cp.projection
    r = leq_residual(p, q)
    if r > tol.res_rel * max(t.dim, 1):
        raise InternalConsistencyError(
            f"doubly commuting part is not below the compatible part (residual {r:.3e})"
        )
    middle = Projection.from_matrix(q.matrix - q.matrix @ p.matrix, tol)
    return TripleDecomposition(
        doubly_commuting=p,
        compatible=q,
        summands=(
            ("doubly_commuting", p),
            ("compatible_not_doubly_commuting", middle),
            ("not_compatible", q.complement()),
        ),
        reports=(rep_dc, rep_cp),
    )


@dataclass(frozen=True)
class CanonicalReport:
    """Verdict on the existence of a quaternary split of a pair by one property.

    ``p_x`` and ``p_y`` are the maximal projections of each element on its
    own; ``q_x`` and ``q_y`` are the maximal projections taken inside the
    commutant of the whole pair.  The split exists iff the individual
    projections already commute with the other element, which happens iff
    they coincide with the joint ones.
    """

    exists: bool
    p_x: Projection
    p_y: Projection
    q_x: Projection
    q_y: Projection
    commutation: dict
    cells: tuple | None  # ((bits, Projection) * 4) when the split exists

    @property
    def verdict(self) -> str:
        return "EXISTS" if self.exists else "NO"


def canonical_decompose(x, y, spec: PropertySpec,
                        tol: ToleranceProfile = DEFAULT_TOL) -> CanonicalReport:
    """Test and, if possible, produce the quaternary split of (x, y) by ``spec``."""
    if spec.arity != 1:
        raise InputError("canonical decomposition needs an arity-1 property")
    x = as_tuple_instance(x).elements[0]
    y = as_tuple_instance(y).elements[0]
    pair = as_tuple_instance((x, y))

    p_x = max_property_projection((x,), spec, tol).projection
    p_y = max_property_projection((y,), spec, tol).projection
    q_x = max_property_projection(pair, lift_spec(spec, 2, 0), tol).projection
    q_y = max_property_projection(pair, lift_spec(spec, 2, 1), tol).projection

    for label, small, big in (("q_x <= p_x", q_x, p_x), ("q_y <= p_y", q_y, p_y)):
        r = leq_residual(small, big)
        if r > tol.res_rel * max(pair.dim, 1):
            raise InternalConsistencyError(f"joint projection escapes the single one "
                                           f"({label} residual {r:.3e})")

    p_norm = max(frob(p_x.matrix), frob(p_y.matrix))
    commutation = {
        "p_x,x": commutation_residual(p_x, x),
        "p_x,y": commutation_residual(p_x, y),
        "p_y,x": commutation_residual(p_y, x),
        "p_y,y": commutation_residual(p_y, y),
    }
    bound = max(_commutation_bound(tol, x, p_norm), _commutation_bound(tol, y, p_norm))
    commutes = all(v <= bound for v in commutation.values())
    coincide = projections_equal(p_x, q_x) and projections_equal(p_y, q_y)
    if commutes != coincide:
        raise InternalConsistencyError(
            "canonical-decomposition criteria disagree: commutation says "
            f"{commutes}, projection equality says {coincide}"
        )

    cells = None
    if commutes:
        eye = np.eye(pair.dim, dtype=np.complex128)
        mk = lambda m: Projection.from_matrix(m, tol)  # noqa: E731
        cells = (
            ((1, 1), mk(p_x.matrix @ p_y.matrix)),
            ((1, 0), mk(p_x.matrix @ (eye - p_y.matrix))),
            ((0, 1), mk((eye - p_x.matrix) @ p_y.matrix)),
            ((0, 0), mk((eye - p_x.matrix) @ (eye - p_y.matrix))),
        )
    return CanonicalReport(
        exists=commutes,
        p_x=p_x,
        p_y=p_y,
        q_x=q_x,
        q_y=q_y,
        commutation=commutation,
        cells=cells,
    )
