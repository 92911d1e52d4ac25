"""End-to-end acceptance suites, runnable from the CLI and from the tests.

Each suite exercises one guarantee at its stated tolerance on seeded
instances and reports a single pass/fail line.  Seeds are fixed so every run
checks the same instances.
"""

from __future__ import annotations

import os
import tempfile
import time
from dataclasses import dataclass

import numpy as np

from .engine import combine_properties, max_property_projection
from .errors import InputError
from .fixtures import (
    block_with_property,
    gen_cell_planted,
    gen_paper_example,
    gen_power_partial_isometry,
    random_planted,
    random_unitary,
)
from .matfile import parse_matrix_file, save_matrix_file, serialize_matrix_file
from .numeric import DEFAULT_TOL, ToleranceProfile, frob
from .properties import builtin_property, concat_specs, functional_scales
from .ring import Projection, left_projection, power_range_projection
from .structure import defect_projection, halmos_wallen, wold

PLANTED_PROPERTIES = (
    "normal",
    "partial_isometry",
    "unitary",
    "doubly_commuting",
    "commuting",
    "compatible",
)

PLANTED_MATCH_TOL = 1e-6
PRODUCT_LAW_TOL = 1e-6
COMMUTATION_TOL = 1e-8
CELL_TOL = 1e-8
PAPER_EXAMPLE_TOL = 1e-10


@dataclass
class SuiteResult:
    name: str
    passed: bool
    detail: str
    seconds: float

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status}  {self.name}  [{self.seconds:.2f}s]  {self.detail}"


def _dims_cycle(i, lo=2, hi=12):
    return lo + (i % (hi - lo + 1))


def suite_planted_recovery(tol: ToleranceProfile, count: int = 200) -> SuiteResult:
    """Engine recovers the construction-time projection of planted instances."""
    t0 = time.perf_counter()
    checked = 0
    worst = 0.0
    for prop_idx, prop in enumerate(PLANTED_PROPERTIES):
        for i in range(count):
            dim = _dims_cycle(i)
            inst = random_planted(prop, dim, seed=100_000 + 10_000 * prop_idx + i, tol=tol)
            rep = max_property_projection(inst.tuple, builtin_property(prop, dim), tol)
            dist = frob(rep.projection.matrix - inst.expected_projection.matrix)
            worst = max(worst, dist)
            if rep.rank != inst.expected_projection.rank or dist > PLANTED_MATCH_TOL:
                return SuiteResult(
                    "1-planted-recovery", False,
                    f"{prop} dim {dim} seed index {i}: rank {rep.rank} vs "
                    f"{inst.expected_projection.rank}, distance {dist:.3e}",
                    time.perf_counter() - t0,
                )
            checked += 1
    return SuiteResult(
        "1-planted-recovery", True,
        f"{checked} instances over {len(PLANTED_PROPERTIES)} properties, "
        f"worst distance {worst:.2e}",
        time.perf_counter() - t0,
    )


def _random_tuple(prop, dim, rng):
    spec = builtin_property(prop, dim)
    mats = tuple(
        (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim)))
        / np.sqrt(2)
        for _ in range(spec.arity)
    )
    return spec, mats


def suite_postconditions(tol: ToleranceProfile, count: int = 200) -> SuiteResult:
    """Every report on unstructured inputs satisfies the full postcondition set."""
    t0 = time.perf_counter()
    for i in range(count):
        prop = PLANTED_PROPERTIES[i % len(PLANTED_PROPERTIES)]
        dim = _dims_cycle(i)
        rng = np.random.default_rng(200_000 + i)
        spec, mats = _random_tuple(prop, dim, rng)
        rep = max_property_projection(mats, spec, tol)
        p = rep.projection.matrix
        proj_drift = max(frob(p @ p - p), frob(p - p.conj().T))
        max_norm = max(frob(x) for x in mats)
        comm_scale = (1.0 + max_norm) * (1.0 + frob(p))
        scales = functional_scales(spec, mats)
        fails = []
        if proj_drift > 1e-10 * dim:
            fails.append(f"projection drift {proj_drift:.3e}")
        if any(r > 1e-8 * comm_scale for r in rep.commutation_residuals):
            fails.append("commutation residual")
        if any(r > 1e-8 * s for r, s in zip(rep.residuals, scales)):
            fails.append("functional residual")
        if rep.complement_audit.rank != 0:
            fails.append(f"audit rank {rep.complement_audit.rank}")
        if fails:
            return SuiteResult(
                "2-postconditions", False,
                f"{prop} dim {dim} index {i}: " + "; ".join(fails),
                time.perf_counter() - t0,
            )
    return SuiteResult(
        "2-postconditions", True, f"{count} random tuples",
        time.perf_counter() - t0,
    )


_PAIRINGS = (("normal", "unitary"), ("commuting", "compatible"))


def _pairing_instance(pairing, i, tol):
    """Alternate planted-cell instances with raw random ones."""
    dim = 4 + (i % 7)
    if i % 2 == 0:
        return gen_cell_planted(pairing, dim, seed=300_000 + i, tol=tol).tuple
    rng = np.random.default_rng(310_000 + i)
    arity = 1 if pairing == ("normal", "unitary") else 2
    mats = tuple(
        (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim)))
        / np.sqrt(2)
        for _ in range(arity)
    )
    return mats


def suite_product_law(tol: ToleranceProfile, count: int = 100) -> SuiteResult:
    """Maximal projections of two properties commute and multiply to the joint one."""
    t0 = time.perf_counter()
    worst_comm, worst_prod = 0.0, 0.0
    for pairing in _PAIRINGS:
        for i in range(count):
            t = _pairing_instance(pairing, i, tol)
            dim = t.dim if hasattr(t, "dim") else t[0].shape[0]
            s1 = builtin_property(pairing[0], dim)
            s2 = builtin_property(pairing[1], dim)
            p1 = max_property_projection(t, s1, tol).projection.matrix
            p2 = max_property_projection(t, s2, tol).projection.matrix
            p12 = max_property_projection(
                t, concat_specs("+".join(pairing), [s1, s2]), tol
            ).projection.matrix
            comm = frob(p1 @ p2 - p2 @ p1)
            prod = frob(p1 @ p2 - p12)
            worst_comm = max(worst_comm, comm)
            worst_prod = max(worst_prod, prod)
            if comm > COMMUTATION_TOL or prod > PRODUCT_LAW_TOL:
                return SuiteResult(
                    "3-product-law", False,
                    f"{pairing} index {i}: commutator {comm:.3e}, product {prod:.3e}",
                    time.perf_counter() - t0,
                )
    return SuiteResult(
        "3-product-law", True,
        f"{count} pairs per pairing, worst commutator {worst_comm:.2e}, "
        f"worst product deviation {worst_prod:.2e}",
        time.perf_counter() - t0,
    )


def suite_quaternary_partition(tol: ToleranceProfile, count: int = 100) -> SuiteResult:
    """Quaternary cells are pairwise orthogonal and sum to the identity."""
    t0 = time.perf_counter()
    for i in range(count):
        t = _pairing_instance(("commuting", "compatible"), i, tol)
        dim = t.dim if hasattr(t, "dim") else t[0].shape[0]
        specs = [builtin_property("commuting", dim), builtin_property("compatible", dim)]
        cells = combine_properties(t, specs, tol)
        mats = [p.matrix for _, p in cells.cells]
        total = sum(mats)
        if frob(total - np.eye(dim)) > CELL_TOL * dim:
            return SuiteResult(
                "4-quaternary-partition", False,
                f"index {i}: cells sum off identity", time.perf_counter() - t0,
            )
        for a in range(len(mats)):
            for b in range(a + 1, len(mats)):
                if frob(mats[a] @ mats[b]) > CELL_TOL:
                    return SuiteResult(
                        "4-quaternary-partition", False,
                        f"index {i}: cells {a},{b} not orthogonal",
                        time.perf_counter() - t0,
                    )
    return SuiteResult(
        "4-quaternary-partition", True, f"{count} pairs",
        time.perf_counter() - t0,
    )


def _planted_doubly_commuting_with_projection(dim, seed, tol):
    """Block doubly commuting pair plus a block projection commuting with both."""
    rng = np.random.default_rng(seed)
    sizes = []
    left = dim
    while left > 0:
        s = int(rng.integers(1, left + 1))
        sizes.append(s)
        left -= s
    xs, ys, bits = [], [], []
    for s in sizes:
        bx, by = block_with_property("doubly_commuting", s, rng)
        xs.append(bx)
        ys.append(by)
        bits.append(int(rng.integers(0, 2)))
    if all(b == 0 for b in bits):
        bits[0] = 1
    u = random_unitary(dim, rng)
    blk = lambda blocks: u @ _block_diag(blocks) @ u.conj().T  # noqa: E731
    x, y = blk(xs), blk(ys)
    pat = np.concatenate([np.full(s, float(b)) for s, b in zip(sizes, bits)])
    p = Projection.from_matrix(u @ np.diag(pat) @ u.conj().T, tol)
    return x, y, p


def _block_diag(blocks):
    n = sum(b.shape[0] for b in blocks)
    out = np.zeros((n, n), dtype=np.complex128)
    at = 0
    for b in blocks:
        d = b.shape[0]
        out[at:at + d, at:at + d] = b
        at += d
    return out


def suite_range_projection_commutants(tol: ToleranceProfile, count: int = 100) -> SuiteResult:
    """Range projections inherit double commutation; compression moves through them.

    On planted doubly commuting pairs with a commuting projection p, the
    residuals of [x]y - y[x], [x]y* - y*[x], [x][y] - [y][x] and
    [p x] - p [x] all stay below 1e-8 times their scale.
    """
    t0 = time.perf_counter()
    worst = 0.0
    for i in range(count):
        dim = 2 + (i % 9)
        x, y, p = _planted_doubly_commuting_with_projection(dim, 500_000 + i, tol)
        lx = left_projection(x, tol).matrix
        ly = left_projection(y, tol).matrix
        lpx = left_projection(p.matrix @ x, tol).matrix
        sxy = 1e-8 * (1.0 + frob(x)) * (1.0 + frob(y))
        sx = 1e-8 * (1.0 + frob(x))
        checks = [
            (frob(lx @ y - y @ lx), sxy),
            (frob(lx @ y.conj().T - y.conj().T @ lx), sxy),
            (frob(lx @ ly - ly @ lx), sxy),
            (frob(lpx - p.matrix @ lx), sx),
        ]
        worst = max(worst, max(r / s for r, s in checks))
        if any(r > s for r, s in checks):
            return SuiteResult(
                "5-range-projection-commutants", False,
                f"index {i}, dim {dim}: residuals "
                + ", ".join(f"{r:.3e}" for r, _ in checks),
                time.perf_counter() - t0,
            )
    return SuiteResult(
        "5-range-projection-commutants", True,
        f"{count} planted pairs, worst relative residual {worst:.2e}",
        time.perf_counter() - t0,
    )


def suite_paper_example(tol: ToleranceProfile) -> SuiteResult:
    """The nine-dimensional pair: power ranges, nilpotency, compatibility, commutator."""
    t0 = time.perf_counter()
    t = gen_paper_example("y")
    x, y = t.elements
    fails = []

    rep = max_property_projection(t, builtin_property("compatible", 9), tol)
    if rep.rank != 9:
        fails.append(f"compatibility projection rank {rep.rank} != 9")

    expected_x2 = np.zeros((9, 9), dtype=np.complex128)
    expected_x2[6, 6] = expected_x2[7, 7] = 1.0  # grid cells (3,1) and (3,2)
    d = frob(power_range_projection(x, 2, tol).matrix - expected_x2)
    if d > PAPER_EXAMPLE_TOL:
        fails.append(f"[x^2] off by {d:.3e}")

    if not np.all(np.linalg.matrix_power(x, 3) == 0):
        fails.append("x^3 not exactly zero")
    if not np.all(np.linalg.matrix_power(y, 3) == 0):
        fails.append("y^3 not exactly zero")

    tp = gen_paper_example("y_prime", phase=1j)
    yp = tp.elements[1]
    for n in range(1, 10):
        d = frob(
            power_range_projection(y, n, tol).matrix
            - power_range_projection(yp, n, tol).matrix
        )
        if d > PAPER_EXAMPLE_TOL:
            fails.append(f"[y^{n}] != [y'^{n}] by {d:.3e}")
            break
    rep = max_property_projection(tp, builtin_property("compatible", 9), tol)
    if rep.rank != 9:
        fails.append(f"y_prime compatibility projection rank {rep.rank} != 9")

    comm = frob(x @ y - y @ x)
    if abs(comm - np.sqrt(2)) > PAPER_EXAMPLE_TOL:
        fails.append(f"commutator norm {comm!r} != sqrt(2)")

    return SuiteResult(
        "6-paper-example", not fails, "; ".join(fails) or "all identities hold",
        time.perf_counter() - t0,
    )


def _random_profile(rng, max_dim=16):
    unitary_dim = int(rng.integers(0, 5))
    mult = {}
    left = max_dim - unitary_dim - int(rng.integers(0, 4))
    while left >= 1:
        k = int(rng.integers(1, min(4, left) + 1))
        mult[k] = mult.get(k, 0) + 1
        left -= k
    if unitary_dim + sum(k * m for k, m in mult.items()) == 0:
        mult[2] = 1
    return mult, unitary_dim


def suite_halmos_wallen(tol: ToleranceProfile, count: int = 100) -> SuiteResult:
    """Shift multiplicities and the unitary rank are recovered exactly."""
    t0 = time.perf_counter()
    for i in range(count):
        rng = np.random.default_rng(700_000 + i)
        mult, udim = _random_profile(rng)
        x, truth = gen_power_partial_isometry(mult, udim, seed=710_000 + i, tol=tol)
        rep = halmos_wallen(x, tol)
        if not rep.is_power_partial_isometry:
            return SuiteResult(
                "7-halmos-wallen", False,
                f"index {i}: generated instance rejected at power "
                f"{rep.first_failing_power}",
                time.perf_counter() - t0,
            )
        prof = rep.profile
        if (prof.multiplicities != truth.multiplicities
                or prof.unitary_projection.rank != truth.unitary_projection.rank):
            return SuiteResult(
                "7-halmos-wallen", False,
                f"index {i}: recovered {prof.multiplicities} / rank "
                f"{prof.unitary_projection.rank}, expected {truth.multiplicities} "
                f"/ rank {truth.unitary_projection.rank}",
                time.perf_counter() - t0,
            )
        dim = x.shape[0]
        defects = [defect_projection(x, m, tol).matrix for m in range(dim + 1)]
        for a in range(len(defects)):
            for b in range(a + 1, len(defects)):
                if frob(defects[a] @ defects[b]) > CELL_TOL:
                    return SuiteResult(
                        "7-halmos-wallen", False,
                        f"index {i}: defect projections {a},{b} not orthogonal",
                        time.perf_counter() - t0,
                    )
    return SuiteResult(
        "7-halmos-wallen", True, f"{count} instances, dims <= 16",
        time.perf_counter() - t0,
    )


def suite_wold(tol: ToleranceProfile, count: int = 50) -> SuiteResult:
    """Random unitaries have full unitary part; non-isometries are rejected."""
    t0 = time.perf_counter()
    for i in range(count):
        dim = 2 + (i % 11)
        u = random_unitary(dim, np.random.default_rng(800_000 + i))
        rep = wold(u, tol)
        if rep.shift_rank != 0 or frob(rep.unitary_projection.matrix - np.eye(dim)) > 1e-8:
            return SuiteResult(
                "8-wold", False, f"index {i}: unitary not recognized",
                time.perf_counter() - t0,
            )
    try:
        wold(np.diag([1.0, 0.5]), tol)
        return SuiteResult(
            "8-wold", False, "non-isometry was not rejected", time.perf_counter() - t0
        )
    except InputError:
        pass
    return SuiteResult(
        "8-wold", True, f"{count} unitaries plus rejection check",
        time.perf_counter() - t0,
    )


def _canonical_instances():
    j = np.array([[0, 0], [1, 0]], dtype=np.complex128)
    x4 = _block_diag([np.diag([1.0 + 0j, 2.0]), j])
    y4 = _block_diag([j, np.diag([3.0 + 0j, 4.0])])
    x3 = _block_diag([np.array([[5.0 + 0j]]), j])
    y3 = np.zeros((3, 3), dtype=np.complex128)
    y3[0, 1] = y3[1, 0] = y3[2, 2] = 1.0
    return (x4, y4), (x3, y3)


def suite_canonical_cli(tol: ToleranceProfile) -> SuiteResult:
    """EXISTS and NO canonical verdicts carry the documented cells and exit codes."""
    from .cli import run_command

    t0 = time.perf_counter()
    (x4, y4), (x3, y3) = _canonical_instances()
    expected_cells = {
        (1, 1): np.zeros(4),
        (1, 0): np.array([1.0, 1.0, 0.0, 0.0]),
        (0, 1): np.array([0.0, 0.0, 1.0, 1.0]),
        (0, 0): np.zeros(4),
    }
    from .engine import canonical_decompose
    from .ring import leq_residual

    rep = canonical_decompose(x4, y4, builtin_property("normal", 4), tol)
    fails = []
    if not rep.exists:
        fails.append("block example: verdict NO")
    else:
        for bits, p in rep.cells:
            if frob(p.matrix - np.diag(expected_cells[bits])) > PLANTED_MATCH_TOL:
                fails.append(f"block example: cell {bits} off")
    rep = canonical_decompose(x3, y3, builtin_property("normal", 3), tol)
    if rep.exists:
        fails.append("swap example: verdict EXISTS")
    if leq_residual(rep.q_x, rep.p_x) > 1e-8:
        fails.append("swap example: q_x not below p_x")

    with tempfile.TemporaryDirectory() as tmp:
        f_ok = os.path.join(tmp, "exists.mat")
        f_no = os.path.join(tmp, "swap.mat")
        save_matrix_file(f_ok, {"x": x4, "y": y4})
        save_matrix_file(f_no, {"x": x3, "y": y3})
        code_ok = run_command(
            ["canonical", "--property", "normal", "--in", f_ok, "--names", "x,y", "--json"]
        )
        code_no = run_command(
            ["canonical", "--property", "normal", "--in", f_no, "--names", "x,y", "--json"]
        )
    if code_ok != 0:
        fails.append(f"CLI exit code {code_ok} for the EXISTS example")
    if code_no != 1:
        fails.append(f"CLI exit code {code_no} for the NO example")
    return SuiteResult(
        "9-canonical-cli", not fails, "; ".join(fails) or "verdicts and exit codes match",
        time.perf_counter() - t0,
    )


def suite_roundtrip(tol: ToleranceProfile, count: int = 1000) -> SuiteResult:
    """serialize-then-parse is the identity on random matrices."""
    t0 = time.perf_counter()
    for i in range(count):
        rng = np.random.default_rng(900_000 + i)
        dim = int(rng.integers(1, 9))
        scale = 10.0 ** rng.integers(-30, 31)
        m = scale * (rng.standard_normal((dim, dim))
                     + 1j * rng.standard_normal((dim, dim)))
        text = serialize_matrix_file({"m": m})
        back = parse_matrix_file(text)["m"]
        if not np.array_equal(m.astype(np.complex128), back):
            return SuiteResult(
                "10-cli-roundtrip", False, f"index {i}: round trip not exact",
                time.perf_counter() - t0,
            )
    return SuiteResult(
        "10-cli-roundtrip", True, f"{count} matrices round-trip exactly",
        time.perf_counter() - t0,
    )


def run_selfcheck(tol: ToleranceProfile = DEFAULT_TOL, quick: bool = False,
                  print_lines: bool = True) -> list:
    """Run all suites; quick mode shrinks instance counts for a smoke test."""
    q = 10 if quick else 1
    suites = [
        lambda: suite_planted_recovery(tol, count=200 // q),
        lambda: suite_postconditions(tol, count=200 // q),
        lambda: suite_product_law(tol, count=100 // q),
        lambda: suite_quaternary_partition(tol, count=100 // q),
        lambda: suite_range_projection_commutants(tol, count=100 // q),
        lambda: suite_paper_example(tol),
        lambda: suite_halmos_wallen(tol, count=100 // q),
        lambda: suite_wold(tol, count=50 // q),
        lambda: suite_canonical_cli(tol),
        lambda: suite_roundtrip(tol, count=1000 // q),
    ]
    results = []
    for run in suites:
        result = run()
        results.append(result)
        if print_lines:
            print(result.line())
    if print_lines:
        total = sum(r.seconds for r in results)
        status = "PASS" if all(r.passed for r in results) else "FAIL"
        print(f"{status}  selfcheck total  [{total:.2f}s]")
    return results
