"""Deterministic test-instance generators.

Three kinds of ground truth come out of here: the worked nine-dimensional
pair of nilpotent partial-isometry sums (compatible but noncommuting, with
known power ranges), planted block instances whose maximal projection is
known by construction, and power partial isometries with a known shift
profile.  Every generator is a pure function of its seed, and every planted
instance is audited at construction time: blocks flagged as having a
property are checked by direct evaluation, blocks flagged as completely
without it are checked by a zero engine fixed point.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .engine import max_property_projection
from .errors import FixtureError, InputError
from .numeric import DEFAULT_TOL, ToleranceProfile, frob
from .properties import PropertySpec, builtin_property, evaluate, functional_scales
from .ring import Projection, TupleInstance
from .structure import ShiftProfile

# Properties whose "completely without" blocks need at least 2 dimensions
# (every 1x1 matrix is normal, and 1x1 pairs always commute).
_MIN_WITHOUT = {
    "normal": 2,
    "commuting": 2,
    "doubly_commuting": 2,
    "compatible": 2,
    "partial_isometry": 1,
    "unitary": 1,
    "isometry": 1,
    "coisometry": 1,
}


def random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed unitary: complex Gaussian, QR, diagonal phases normalized."""
    if dim == 0:
        return np.eye(0, dtype=np.complex128)
    g = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(g)
    d = np.diagonal(r)
    return q * (d / np.abs(d))


def _random_complex(rng, shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)


def truncated_shift(length: int) -> np.ndarray:
    """Nilpotent shift with ones on the subdiagonal; length 1 is the 1x1 zero."""
    if length < 1:
        raise InputError("shift length must be at least 1")
    return np.eye(length, k=-1, dtype=np.complex128)


@dataclass(frozen=True)
class PlantedInstance:
    """Tuple with a known maximal projection, plus the unitary that hides it."""

    tuple: TupleInstance
    expected_projection: Projection
    conjugator: np.ndarray
    seed: int
    description: str


def _direct_sum(blocks):
    dims = [b.shape[0] for b in blocks]
    n = sum(dims)
    out = np.zeros((n, n), dtype=np.complex128)
    at = 0
    for b, d in zip(blocks, dims):
        out[at:at + d, at:at + d] = b
        at += d
    return out


def _audit_blocks(specs, blocks, tol):
    """Construction-time audit of per-spec flags on a flagged block list."""
    for s_idx, spec in enumerate(specs):
        for mats, flags in blocks:
            sub = TupleInstance(tuple(mats))
            if flags[s_idx]:
                values = evaluate(spec, sub, tol=tol)
                scales = functional_scales(spec, sub)
                worst = max(frob(v) / s for v, s in zip(values, scales))
                if worst > tol.res_rel:
                    raise FixtureError(
                        f"block flagged as having {spec.name!r} fails it "
                        f"(relative residual {worst:.3e})"
                    )
        # The whole without-part must be completely without the property,
        # which is exactly a zero engine fixed point on its direct sum.
        without = [mats for mats, flags in blocks if not flags[s_idx]]
        if without:
            joined = TupleInstance(
                tuple(_direct_sum([mats[k] for mats in without])
                      for k in range(spec.arity))
            )
            rank = max_property_projection(joined, spec, tol, audit=False).projection.rank
            if rank != 0:
                raise FixtureError(
                    f"blocks flagged as completely without {spec.name!r} are not "
                    f"(engine rank {rank})"
                )


def _flagged_planted(specs, blocks, rng, tol):
    """Direct-sum the flagged blocks, audit, conjugate; return tuple and cell patterns."""
    specs = list(specs)
    blocks = [(tuple(np.asarray(m, dtype=np.complex128) for m in mats), tuple(flags))
              for mats, flags in blocks]
    if not blocks:
        raise InputError("need at least one block")
    arity = specs[0].arity
    for mats, flags in blocks:
        if len(mats) != arity:
            raise InputError("block arity does not match the property arity")
        if len(flags) != len(specs):
            raise InputError("block flags must match the number of properties")
    _audit_blocks(specs, blocks, tol)

    dims = [mats[0].shape[0] for mats, _ in blocks]
    n = sum(dims)
    u = random_unitary(n, rng)
    entries = tuple(
        u @ _direct_sum([mats[k] for mats, _ in blocks]) @ u.conj().T
        for k in range(arity)
    )
    patterns = {}
    for s_idx in range(len(specs)):
        diag = np.concatenate([
            np.full(d, 1.0 if flags[s_idx] else 0.0)
            for d, (_, flags) in zip(dims, blocks)
        ]) if blocks else np.zeros(0)
        patterns[s_idx] = Projection.from_matrix(u @ np.diag(diag) @ u.conj().T, tol)
    return TupleInstance(entries), patterns, u


def gen_planted(spec: PropertySpec, blocks, seed: int,
                tol: ToleranceProfile = DEFAULT_TOL) -> PlantedInstance:
    """Planted instance for one property.

    ``blocks`` is a list of (matrices, has_property) pairs; the direct sum is
    audited and conjugated by a seeded Haar unitary, and the projection onto
    the has-property blocks is the known engine answer.
    """
    rng = np.random.default_rng(seed)
    flagged = [(mats, (bool(has),)) for mats, has in blocks]
    t, patterns, u = _flagged_planted([spec], flagged, rng, tol)
    return PlantedInstance(
        tuple=t,
        expected_projection=patterns[0],
        conjugator=u,
        seed=seed,
        description=f"planted {spec.name}, dim {t.dim}",
    )


# -- block atom library -----------------------------------------------------

def _off_one(rng):
    """Modulus bounded away from 0 and 1 on both sides."""
    lo = rng.uniform(0.2, 0.8)
    hi = rng.uniform(1.25, 2.5)
    return (lo if rng.uniform() < 0.5 else hi) * np.exp(2j * np.pi * rng.uniform())


def _random_normal(size, rng):
    v = random_unitary(size, rng)
    lam = _random_complex(rng, size)
    return v @ np.diag(lam) @ v.conj().T


def _oblique_idempotent(size, rng):
    """Balanced idempotent whose range and kernel are in generic position.

    Balance (rank = size/2) matters: an unbalanced idempotent always leaves a
    common corner of the kernels or ranges of E and E*, and on that corner E
    and 1 - E compress to 0 and 1, which are compatible.  Balanced generic E
    splits into two-dimensional pieces on each of which the range projections
    of E and 1 - E sit at a proper angle.
    """
    if size % 2:
        raise InputError("balanced oblique idempotent needs an even size")
    r = size // 2
    m = np.zeros((size, size), dtype=np.complex128)
    m[:r, :r] = np.eye(r)
    m[:r, r:] = _random_complex(rng, (r, r))
    w = random_unitary(size, rng)
    return w @ m @ w.conj().T


def block_with_property(name: str, size: int, rng: np.random.Generator):
    """A size-dimensional block (tuple of matrices) having the property."""
    if size < 1:
        raise InputError("block size must be at least 1")
    if name == "normal":
        return (_random_normal(size, rng),)
    if name == "partial_isometry":
        w = random_unitary(size, rng)
        p = np.diag(rng.integers(0, 2, size).astype(np.complex128))
        return (w @ p,)
    if name in ("unitary", "isometry", "coisometry"):
        return (random_unitary(size, rng),)
    if name == "commuting":
        if rng.uniform() < 0.5 or size == 1:
            v = random_unitary(size, rng)
            return (v @ np.diag(_random_complex(rng, size)) @ v.conj().T,
                    v @ np.diag(_random_complex(rng, size)) @ v.conj().T)
        j = truncated_shift(size)
        c = _random_complex(rng, 3)
        d = _random_complex(rng, 3)
        poly = lambda cs: cs[0] * np.eye(size) + cs[1] * j + cs[2] * (j @ j)  # noqa: E731
        return (poly(c), poly(d))
    if name == "doubly_commuting":
        if rng.uniform() < 0.5:
            v = random_unitary(size, rng)
            return (v @ np.diag(_random_complex(rng, size)) @ v.conj().T,
                    v @ np.diag(_random_complex(rng, size)) @ v.conj().T)
        lam = _random_complex(rng, 1)[0]
        return (lam * np.eye(size), _random_complex(rng, (size, size)))
    if name == "compatible":
        pick = rng.uniform()
        if pick < 0.4:
            # Invertible entries have full power ranges, which commute with anything.
            g = _random_complex(rng, (size, size)) + 2.0 * np.eye(size)
            return (g, _random_complex(rng, (size, size)))
        if pick < 0.7 and size >= 2:
            j = truncated_shift(size)
            return (j.copy(), _random_complex(rng, 1)[0] * j)
        v = random_unitary(size, rng)
        return (v @ np.diag(_random_complex(rng, size)) @ v.conj().T,
                v @ np.diag(_random_complex(rng, size)) @ v.conj().T)
    raise InputError(f"no with-block atom for property {name!r}")


def block_without_property(name: str, size: int, rng: np.random.Generator):
    """A size-dimensional block completely without the property (audited by callers)."""
    if size < _MIN_WITHOUT.get(name, 1):
        raise InputError(f"completely-without block for {name!r} needs size >= "
                         f"{_MIN_WITHOUT.get(name, 1)}")
    if name == "normal":
        c = _random_complex(rng, 1)[0]
        c = c / abs(c) * rng.uniform(0.5, 2.0)
        return (c * truncated_shift(size),)
    if name == "partial_isometry":
        if size == 1 or rng.uniform() < 0.5:
            return (np.diag([_off_one(rng) for _ in range(size)]),)
        return (_off_one(rng) * truncated_shift(size),)
    if name in ("unitary", "isometry"):
        if size == 1 or rng.uniform() < 0.5:
            return (np.diag([_off_one(rng) for _ in range(size)]),)
        return (_off_one(rng) * truncated_shift(size),)
    if name == "commuting":
        return (_random_complex(rng, (size, size)), _random_complex(rng, (size, size)))
    if name == "doubly_commuting":
        if rng.uniform() < 0.5:
            j = truncated_shift(size)
            return (j.copy(), j.copy())
        return (_random_complex(rng, (size, size)), _random_complex(rng, (size, size)))
    if name == "compatible":
        if size % 2 == 0 and rng.uniform() < 0.5:
            e = _oblique_idempotent(size, rng)
            return (e, np.eye(size) - e)
        j = truncated_shift(size)
        w = random_unitary(size, rng)
        return (j.copy(), w @ j @ w.conj().T)
    raise InputError(f"no without-block atom for property {name!r}")


def random_planted(name: str, dim: int, seed: int,
                   tol: ToleranceProfile = DEFAULT_TOL) -> PlantedInstance:
    """Seeded planted instance: random with/without split of ``dim``, audited.

    The audit can reject an unlucky random draw (measure zero, but floating
    point exists); a few fresh draws from the same stream keep the result a
    pure function of the seed.
    """
    rng = np.random.default_rng(seed)
    min_b = _MIN_WITHOUT.get(name, 1)
    valid = [a for a in range(dim + 1) if (dim - a) == 0 or (dim - a) >= min_b]
    spec = builtin_property(name, dim)
    last_err = None
    for _ in range(5):
        a = int(valid[rng.integers(0, len(valid))])
        b = dim - a
        blocks = []
        if a:
            blocks.append((block_with_property(name, a, rng), True))
        if b:
            blocks.append((block_without_property(name, b, rng), False))
        try:
            flagged = [(mats, (has,)) for mats, has in blocks]
            t, patterns, u = _flagged_planted([spec], flagged, rng, tol)
        except FixtureError as exc:
            last_err = exc
            continue
        return PlantedInstance(
            tuple=t,
            expected_projection=patterns[0],
            conjugator=u,
            seed=seed,
            description=f"planted {name}, dim {dim}, with-part {a}",
        )
    raise FixtureError(f"could not plant {name!r} at dim {dim}, seed {seed}: {last_err}")


# -- two-property cell instances (for product-law and quaternary suites) -----

def _simultaneous_normal_pair(size, rng):
    v = random_unitary(size, rng)
    return (v @ np.diag(_random_complex(rng, size)) @ v.conj().T,
            v @ np.diag(_random_complex(rng, size)) @ v.conj().T)


def _unitary_block(size, rng):
    return (random_unitary(size, rng),)


def _normal_nonunitary_block(size, rng):
    return (np.diag([_off_one(rng) for _ in range(size)]),)


def _completely_nonnormal_block(size, rng):
    return block_without_property("normal", size, rng)


def _idempotent_complement_pair(size, rng):
    # Commutes exactly, but range and kernel projections do not.
    e = _oblique_idempotent(size, rng)
    return (e, np.eye(size) - e)


def _invertible_generic_pair(size, rng):
    # Full power ranges make the first entry compatible with anything.
    return (_random_complex(rng, (size, size)) + 2.0 * np.eye(size),
            _random_complex(rng, (size, size)))


def _twisted_shift_pair(size, rng):
    j = truncated_shift(size)
    w = random_unitary(size, rng)
    return (j, w @ j @ w.conj().T)


# bits -> (minimum block size, size step, atom). Unitaries are normal, so
# the (0, 1) cell of the first pair has no instances; commuting completely
# non-compatible blocks are built from two-dimensional angle pieces, hence
# the even-size step.
_CELL_ATOMS = {
    ("normal", "unitary"): {
        (1, 1): (1, 1, _unitary_block),
        (1, 0): (1, 1, _normal_nonunitary_block),
        (0, 0): (2, 1, _completely_nonnormal_block),
    },
    ("commuting", "compatible"): {
        (1, 1): (1, 1, _simultaneous_normal_pair),
        (1, 0): (2, 2, _idempotent_complement_pair),
        (0, 1): (2, 1, _invertible_generic_pair),
        (0, 0): (2, 1, _twisted_shift_pair),
    },
}


@dataclass(frozen=True)
class CellPlantedInstance:
    """Pair instance with known quaternary cells for two properties."""

    tuple: TupleInstance
    expected_cells: dict  # bits -> Projection
    conjugator: np.ndarray
    seed: int
    properties: tuple


def gen_cell_planted(properties, dim: int, seed: int,
                     tol: ToleranceProfile = DEFAULT_TOL) -> CellPlantedInstance:
    """Seeded instance with known cells for a supported property pair."""
    properties = tuple(properties)
    if properties not in _CELL_ATOMS:
        raise InputError(f"no cell atoms for property pair {properties}")
    atoms = _CELL_ATOMS[properties]
    specs = [builtin_property(p, dim) for p in properties]
    rng = np.random.default_rng(seed)
    last_err = None
    for _ in range(8):
        bits_order = list(atoms)
        rng.shuffle(bits_order)
        count = int(rng.integers(1, len(bits_order) + 1))
        chosen = bits_order[:count]
        sizes = _partition(dim, [atoms[b][:2] for b in chosen], rng)
        if sizes is None:
            flexible = [b for b in bits_order if atoms[b][1] == 1]
            chosen = flexible[:1]
            sizes = _partition(dim, [atoms[chosen[0]][:2]], rng)
            if sizes is None:
                raise InputError(f"dimension {dim} too small for any cell of {properties}")
        blocks = [(atoms[b][2](s, rng), b) for b, s in zip(chosen, sizes)]
        try:
            t, _, u = _flagged_planted(specs, blocks, rng, tol)
        except FixtureError as exc:
            last_err = exc
            continue
        n = t.dim
        expected = {}
        for bits in ((1, 1), (1, 0), (0, 1), (0, 0)):
            diag = np.concatenate([
                np.full(s, 1.0 if b == bits else 0.0)
                for (_, b), s in zip(blocks, sizes)
            ])
            expected[bits] = Projection.from_matrix(u @ np.diag(diag) @ u.conj().T, tol)
        return CellPlantedInstance(
            tuple=t, expected_cells=expected, conjugator=u, seed=seed,
            properties=properties,
        )
    raise FixtureError(
        f"could not plant cells for {properties} at dim {dim}, seed {seed}: {last_err}"
    )


def _partition(total, constraints, rng):
    """Random composition of ``total`` respecting (minimum, step) per part.

    Parts with step 2 only grow by pairs of dimensions; a leftover unit goes
    to some step-1 part, and None is returned when that is impossible.
    """
    sizes = [m for m, _ in constraints]
    extra = total - sum(sizes)
    if extra < 0:
        return None
    flexible = [i for i, (_, step) in enumerate(constraints) if step == 1]
    while extra > 0:
        i = int(rng.integers(0, len(sizes)))
        step = constraints[i][1]
        if step <= extra:
            sizes[i] += step
            extra -= step
        elif flexible:
            sizes[flexible[int(rng.integers(0, len(flexible)))]] += 1
            extra -= 1
        else:
            return None
    return sizes


# -- the worked nine-dimensional example ------------------------------------

def gen_paper_example(variant: str = "y", phase: complex = 1j,
                      seed: int | None = None) -> TupleInstance:
    """Pair of sums of matrix units on a 3 x 3 grid of basis vectors.

    x shifts the first grid index, y the second; both cube to zero, their
    power ranges are sums of grid projections (hence the pair is compatible)
    and they do not commute.  The ``y_prime`` variant multiplies the summand
    mapping cell (2,1) to cell (2,2) by a unimodular phase != 1, which leaves
    every power range of y unchanged.  A seed applies one Haar conjugation to
    both entries.
    """
    if variant not in ("y", "y_prime"):
        raise InputError(f"variant must be 'y' or 'y_prime', got {variant!r}")
    phase = complex(phase)
    idx = lambda i, j: 3 * (i - 1) + (j - 1)  # noqa: E731
    x = np.zeros((9, 9), dtype=np.complex128)
    y = np.zeros((9, 9), dtype=np.complex128)
    for i in (1, 2):
        for j in (1, 2):
            x[idx(i + 1, j), idx(i, j)] = 1.0
            y[idx(i, j + 1), idx(i, j)] = 1.0
    if variant == "y_prime":
        if abs(abs(phase) - 1.0) > 1e-12:
            raise InputError("phase must have modulus 1")
        if abs(phase - 1.0) <= 1e-12:
            raise InputError("phase 1 would make the y_prime variant equal to y")
        y[idx(2, 2), idx(2, 1)] = phase
    if seed is not None:
        u = random_unitary(9, np.random.default_rng(seed))
        x = u @ x @ u.conj().T
        y = u @ y @ u.conj().T
    return TupleInstance((x, y), labels=("x", "y"))


# -- power partial isometries ------------------------------------------------

def gen_power_partial_isometry(multiplicities: dict, unitary_dim: int, seed: int,
                               tol: ToleranceProfile = DEFAULT_TOL):
    """Direct sum of truncated shifts and a Haar unitary, Haar-conjugated.

    Returns the matrix together with its ground-truth ShiftProfile.
    """
    mult = {int(k): int(m) for k, m in multiplicities.items() if int(m) != 0}
    for k, m in mult.items():
        if k < 1 or m < 0:
            raise InputError(f"bad multiplicity entry {k}:{m}")
    if unitary_dim < 0:
        raise InputError("unitary_dim must be nonnegative")
    shift_dim = sum(k * m for k, m in mult.items())
    total = shift_dim + unitary_dim
    if total == 0:
        raise InputError("empty profile: no shift blocks and no unitary part")
    rng = np.random.default_rng(seed)
    blocks = []
    for k in sorted(mult):
        blocks.extend(truncated_shift(k) for _ in range(mult[k]))
    v = random_unitary(unitary_dim, rng)
    if unitary_dim:
        blocks.append(v)
    u = random_unitary(total, rng)
    x = u @ _direct_sum(blocks) @ u.conj().T
    pattern = np.concatenate([np.zeros(shift_dim), np.ones(unitary_dim)])
    p_u = Projection.from_matrix(u @ np.diag(pattern) @ u.conj().T, tol)
    profile = ShiftProfile(unitary_projection=p_u, multiplicities=mult)
    profile.check_dimension_bookkeeping()
    return x, profile
