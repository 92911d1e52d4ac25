import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from baerdec.errors import InputError, InternalConsistencyError
from baerdec.fixtures import block_with_property, random_unitary, truncated_shift
from baerdec.numeric import ToleranceProfile, frob
from baerdec.ring import (
    Projection,
    TupleInstance,
    commutation_residual,
    corner_compress,
    corner_embed,
    left_projection,
    leq_residual,
    power_range_projection,
    proj_inf,
    proj_sup,
    projections_equal,
    right_projection,
)

TOL = ToleranceProfile()

E21 = np.array([[0.0, 0.0], [1.0, 0.0]])  # e2 e1*


def diag_proj(bits):
    return Projection.from_matrix(np.diag(np.asarray(bits, dtype=complex)), TOL)


def random_matrix(seed, dim):
    rng = np.random.default_rng(seed)
    return (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2)


class TestProjection:
    def test_from_matrix_canonicalizes(self):
        p = Projection.from_matrix(np.diag([1.0, 0.0, 1.0]), TOL)
        assert p.rank == 2
        assert frob(p.matrix @ p.matrix - p.matrix) < 1e-14

    def test_from_matrix_rejects_non_projection(self):
        with pytest.raises(InternalConsistencyError):
            Projection.from_matrix(np.array([[0.5, 0.0], [0.0, 0.0]]), TOL)

    def test_invariants(self):
        p = Projection.from_matrix(0.5 * np.ones((2, 2)), TOL)
        assert frob(p.matrix - p.matrix.conj().T) <= 1e-10 * p.dim
        assert frob(p.matrix @ p.matrix - p.matrix) <= 1e-10 * p.dim
        f = p.frame.cols
        assert frob(p.matrix @ f - f) < 1e-12

    def test_complement(self):
        p = diag_proj([1, 0])
        assert projections_equal(p.complement(), diag_proj([0, 1]))


class TestLeftRightProjection:
    def test_matrix_unit(self):
        # [e2 e1*] is the projection onto span e2, which equals x x*.
        p = left_projection(E21, TOL)
        assert np.allclose(p.matrix, np.diag([0.0, 1.0]), atol=1e-12)
        assert np.allclose(p.matrix, E21 @ E21.conj().T, atol=1e-12)
        q = right_projection(E21, TOL)
        assert np.allclose(q.matrix, np.diag([1.0, 0.0]), atol=1e-12)

    def test_projection_is_its_own_left_projection(self):
        p = Projection.from_matrix(0.5 * np.ones((2, 2)), TOL)
        assert projections_equal(left_projection(p.matrix, TOL), p)

    def test_ones_matrix(self):
        p = left_projection(np.ones((2, 2)), TOL)
        assert np.allclose(p.matrix, 0.5 * np.ones((2, 2)), atol=1e-12)

    def test_invertible_has_full_projections(self):
        x = random_matrix(5, 4) + 3 * np.eye(4)
        assert left_projection(x, TOL).rank == 4
        assert right_projection(x, TOL).rank == 4

    def test_zero(self):
        assert left_projection(np.zeros((3, 3)), TOL).rank == 0
        assert right_projection(np.zeros((3, 3)), TOL).rank == 0

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 10**6), st.integers(1, 7))
    def test_rickart_identities(self, seed, dim):
        x = random_matrix(seed, dim)
        bound = TOL.res_rel * (1 + frob(x))
        assert frob(left_projection(x, TOL).matrix @ x - x) <= bound
        assert frob(x @ right_projection(x, TOL).matrix - x) <= bound


class TestLattice:
    def test_sup_of_orthogonal_is_sum(self):
        p, q = diag_proj([1, 0]), diag_proj([0, 1])
        s = proj_sup([p, q], TOL)
        assert projections_equal(s, diag_proj([1, 1]))
        assert np.allclose(s.matrix, p.matrix + q.matrix, atol=1e-12)

    def test_sup_idempotent(self):
        p = Projection.from_matrix(0.5 * np.ones((2, 2)), TOL)
        assert projections_equal(proj_sup([p], TOL), p)

    def test_sup_of_tilted_lines(self):
        p = diag_proj([1, 0, 0])
        line = np.zeros((3, 1), dtype=complex)
        line[0, 0] = line[1, 0] = 1 / np.sqrt(2)
        q = Projection.from_matrix(line @ line.conj().T, TOL)
        s = proj_sup([p, q], TOL)
        assert projections_equal(s, diag_proj([1, 1, 0]))

    def test_sup_majorizes(self):
        ps = [diag_proj([1, 0, 0]), diag_proj([0, 1, 0])]
        s = proj_sup(ps, TOL)
        for p in ps:
            assert leq_residual(p, s) < 1e-10

    def test_inf_examples(self):
        p = diag_proj([1, 0])
        assert proj_inf([p, p.complement()], TOL).rank == 0
        assert projections_equal(proj_inf([Projection.identity(2), p], TOL), p)
        got = proj_inf([diag_proj([1, 1, 0]), diag_proj([0, 1, 1])], TOL)
        assert projections_equal(got, diag_proj([0, 1, 0]))

    def test_empty_conventions(self):
        assert proj_sup([], TOL, dim=3).rank == 0
        assert proj_inf([], TOL, dim=3).rank == 3
        with pytest.raises(InputError):
            proj_sup([], TOL)

    def test_de_morgan(self):
        p = diag_proj([1, 1, 0, 0])
        rng = np.random.default_rng(0)
        u = random_unitary(4, rng)
        q = Projection.from_matrix(u @ np.diag([1.0, 0, 0, 1]) @ u.conj().T, TOL)
        lhs = proj_sup([p, q], TOL).complement()
        rhs = proj_inf([p.complement(), q.complement()], TOL)
        assert projections_equal(lhs, rhs)

    def test_monotone(self):
        p, q = diag_proj([1, 0, 0]), diag_proj([1, 1, 0])
        r = diag_proj([0, 0, 1])
        assert leq_residual(proj_sup([p, r], TOL), proj_sup([q, r], TOL)) < 1e-10
        assert leq_residual(proj_inf([p, r], TOL), proj_inf([q, r], TOL)) < 1e-10

    def test_sup_stays_in_commutant(self):
        # sups of projections commuting with x still commute with x.
        rng = np.random.default_rng(1)
        u = random_unitary(4, rng)
        x = u @ np.diag([1.0, 2.0, 3.0, 4.0]) @ u.conj().T
        ps = [
            Projection.from_matrix(u @ np.diag(b) @ u.conj().T, TOL)
            for b in ([1.0, 0, 0, 0], [0, 1.0, 0, 0], [0, 1.0, 1.0, 0])
        ]
        s = proj_sup(ps, TOL)
        i = proj_inf(ps[1:], TOL)
        assert commutation_residual(s.matrix, x) < 1e-10
        assert commutation_residual(i.matrix, x) < 1e-10


class TestCommutationResidual:
    def test_self_commutes(self):
        x = random_matrix(2, 3)
        assert commutation_residual(x, x) == 0.0

    def test_diagonals_commute(self):
        assert commutation_residual(np.diag([1.0, 2.0]), np.diag([3.0, 4.0])) == 0.0

    def test_tilted_projections(self):
        # || [diag(1,0), ones/2] ||_F = 1/sqrt(2) by direct multiplication.
        a = np.diag([1.0, 0.0])
        b = 0.5 * np.ones((2, 2))
        assert commutation_residual(a, b) == pytest.approx(1 / np.sqrt(2))


class TestCorner:
    def test_identity_corner_is_whole_matrix(self):
        x = random_matrix(4, 3)
        c = corner_compress(x, Projection.identity(3))
        # corner coordinates may differ by the frame's basis; identity frame is eye
        assert np.allclose(c, x)

    def test_coordinate_corner(self):
        x = np.diag([1.0, 2.0, 3.0])
        p = diag_proj([1, 0, 1])
        c = corner_compress(x, p)
        assert sorted(np.diag(c).real.tolist()) == [1.0, 3.0]
        assert c.shape == (2, 2)

    def test_zero_corner(self):
        x = random_matrix(5, 3)
        c = corner_compress(x, Projection.zero(3))
        assert c.shape == (0, 0)

    def test_embed_round_trip(self):
        x = random_matrix(6, 4)
        p = diag_proj([1, 1, 0, 0])
        c = corner_compress(x, p)
        back = corner_embed(c, p)
        assert np.allclose(back, p.matrix @ x @ p.matrix, atol=1e-12)


class TestPowerRangeProjection:
    def test_unitary_powers_full(self):
        u = random_unitary(4, np.random.default_rng(3))
        for m in (1, 3, 9):
            assert power_range_projection(u, m, TOL).rank == 4

    def test_nilpotent_shift(self):
        j = truncated_shift(3)
        p = power_range_projection(j, 2, TOL)
        assert np.allclose(p.matrix, np.diag([0.0, 0.0, 1.0]), atol=1e-12)
        assert power_range_projection(j, 3, TOL).rank == 0

    def test_cap_at_dimension(self):
        j = truncated_shift(3)
        assert power_range_projection(j, 100, TOL).rank == 0

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 10**6), st.integers(2, 6), st.integers(1, 5))
    def test_antitone_in_power(self, seed, dim, m):
        x = random_matrix(seed, dim)
        x[:, 0] = 0.0  # make it singular so the chain actually decreases
        pm = power_range_projection(x, m, TOL)
        pm1 = power_range_projection(x, m + 1, TOL)
        assert leq_residual(pm1, pm) < 1e-8


class TestDoubleCommutationInheritance:
    """Range projections of one element of a doubly commuting pair commute
    with the other element, its adjoint and its range projection."""

    @pytest.mark.parametrize("seed", range(8))
    def test_planted_pairs(self, seed):
        rng = np.random.default_rng(seed)
        dim = int(rng.integers(2, 8))
        x, y = block_with_property("doubly_commuting", dim, rng)
        u = random_unitary(dim, rng)
        x, y = u @ x @ u.conj().T, u @ y @ u.conj().T
        lx = left_projection(x, TOL).matrix
        ly = left_projection(y, TOL).matrix
        scale = 1e-8 * (1 + frob(x)) * (1 + frob(y))
        assert commutation_residual(lx, y) <= scale
        assert commutation_residual(lx, y.conj().T) <= scale
        assert commutation_residual(lx, ly) <= scale

    @pytest.mark.parametrize("seed", range(8))
    def test_compression_moves_through_range_projection(self, seed):
        # [p x] = p [x] for a projection p commuting with x.
        rng = np.random.default_rng(100 + seed)
        dim = int(rng.integers(2, 8))
        u = random_unitary(dim, rng)
        x = u @ np.diag(rng.standard_normal(dim) + 1j * rng.standard_normal(dim)) @ u.conj().T
        bits = rng.integers(0, 2, dim).astype(float)
        p = Projection.from_matrix(u @ np.diag(bits) @ u.conj().T, TOL)
        lhs = left_projection(p.matrix @ x, TOL).matrix
        rhs = p.matrix @ left_projection(x, TOL).matrix
        assert frob(lhs - rhs) <= 1e-8 * (1 + frob(x))


class TestTupleInstance:
    def test_uniform_dim_enforced(self):
        with pytest.raises(InputError):
            TupleInstance((np.eye(2), np.eye(3)))

    def test_nonempty_enforced(self):
        with pytest.raises(InputError):
            TupleInstance(())

    def test_labels_length_checked(self):
        with pytest.raises(InputError):
            TupleInstance((np.eye(2),), labels=("a", "b"))
