import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from baerdec.errors import InputError
from baerdec.numeric import (
    Frame,
    ToleranceProfile,
    frob,
    kernel_frame,
    preimage_subspace,
    rank_revealing_frame,
    subspace_equal,
    subspace_intersection,
)

TOL = ToleranceProfile()


def basis_frame(dim, cols):
    m = np.zeros((dim, len(cols)), dtype=complex)
    for j, i in enumerate(cols):
        m[i, j] = 1.0
    return Frame(m)


def random_matrix(seed, dim):
    rng = np.random.default_rng(seed)
    return (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2)


class TestToleranceProfile:
    def test_defaults(self):
        assert TOL.rank_rel == 1e-10
        assert TOL.res_rel == 1e-8
        assert TOL.max_iter_slack == 1

    @pytest.mark.parametrize("bad", [0.0, 1.0, -0.5, 2.0])
    def test_rejects_out_of_range(self, bad):
        with pytest.raises(InputError):
            ToleranceProfile(rank_rel=bad)
        with pytest.raises(InputError):
            ToleranceProfile(res_rel=bad)

    def test_tightened(self):
        t = TOL.tightened()
        assert t.rank_rel == pytest.approx(1e-12)
        assert t.res_rel == TOL.res_rel


class TestFrame:
    def test_rejects_non_orthonormal(self):
        with pytest.raises(InputError):
            Frame(np.array([[1.0], [1.0]]))

    def test_empty_frame_is_legal(self):
        f = Frame.zero(3)
        assert f.size == 0
        assert frob(f.projection_matrix()) == 0.0

    def test_complement_of_zero_is_full(self):
        assert Frame.zero(3).complement().size == 3
        assert Frame.full(3).complement().size == 0


class TestRankRevealingFrame:
    def test_zero_matrix_empty_frame(self):
        f = rank_revealing_frame(np.zeros((2, 2)), TOL)
        assert f.size == 0

    def test_identity_full_frame(self):
        f = rank_revealing_frame(np.eye(3), TOL)
        assert f.size == 3
        assert subspace_equal(f, Frame.full(3))

    def test_rank_one_ones_matrix(self):
        # Orthonormalizing the columns of [[1,1],[1,1]] by hand leaves the
        # single unit vector (1,1)/sqrt(2), up to phase.
        f = rank_revealing_frame(np.ones((2, 2)), TOL)
        assert f.size == 1
        v = f.cols[:, 0]
        assert abs(abs(v[0]) - 1 / np.sqrt(2)) < 1e-12
        assert abs(v[0] - v[1]) < 1e-12

    def test_nonfinite_rejected(self):
        with pytest.raises(InputError):
            rank_revealing_frame(np.array([[np.nan, 0], [0, 1]]), TOL)

    def test_floor_suppresses_noise(self):
        noise = 1e-15 * np.ones((3, 3))
        assert rank_revealing_frame(noise, TOL).size == 1
        assert rank_revealing_frame(noise, TOL, floor=1.0).size == 0

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 10**6), st.integers(1, 7))
    def test_projection_reproduces_matrix(self, seed, dim):
        # P m = m for the projection built on the column space of m.
        m = random_matrix(seed, dim)
        p = rank_revealing_frame(m, TOL).projection_matrix()
        assert frob(p @ m - m) <= TOL.res_rel * (1 + frob(m))


class TestKernelFrame:
    def test_kernel_of_wide_matrix(self):
        # 1 x 3 row [1, 0, 0]: kernel is span{e2, e3}.
        f = kernel_frame(np.array([[1.0, 0.0, 0.0]]), TOL)
        assert f.size == 2
        assert subspace_equal(f, basis_frame(3, [1, 2]))

    def test_kernel_orthogonal_to_row_space(self):
        m = random_matrix(3, 4)
        m[3] = m[0]  # force a nontrivial kernel via a rank drop
        m[:, 3] = m[:, 0]
        f = kernel_frame(m, TOL)
        assert frob(m @ f.cols) < 1e-10


class TestSubspaceIntersection:
    def test_coordinate_planes(self):
        f1 = basis_frame(3, [0, 1])
        f2 = basis_frame(3, [1, 2])
        got = subspace_intersection([f1, f2], TOL)
        assert subspace_equal(got, basis_frame(3, [1]))

    def test_with_full_space_returns_other(self):
        f = basis_frame(3, [0, 2])
        got = subspace_intersection([Frame.full(3), f], TOL)
        assert subspace_equal(got, f)

    def test_distinct_lines_meet_in_zero(self):
        f1 = basis_frame(2, [0])
        f2 = Frame(np.array([[1.0], [1.0]]) / np.sqrt(2))
        assert subspace_intersection([f1, f2], TOL).size == 0

    def test_dim_mismatch_rejected(self):
        with pytest.raises(InputError):
            subspace_intersection([Frame.full(2), Frame.full(3)], TOL)

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 10**6), st.integers(2, 6))
    def test_commutative(self, seed, dim):
        f1 = rank_revealing_frame(random_matrix(seed, dim)[:, : dim // 2 + 1], TOL)
        f2 = rank_revealing_frame(random_matrix(seed + 1, dim)[:, : dim // 2 + 1], TOL)
        a = subspace_intersection([f1, f2], TOL)
        b = subspace_intersection([f2, f1], TOL)
        assert subspace_equal(a, b)

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 10**6), st.integers(2, 6))
    def test_associative(self, seed, dim):
        frames = [
            rank_revealing_frame(random_matrix(seed + k, dim)[:, : dim - 1], TOL)
            for k in range(3)
        ]
        a = subspace_intersection(
            [subspace_intersection(frames[:2], TOL), frames[2]], TOL
        )
        b = subspace_intersection(
            [frames[0], subspace_intersection(frames[1:], TOL)], TOL
        )
        assert subspace_equal(a, b)


class TestPreimageSubspace:
    def test_identity_map(self):
        f = basis_frame(2, [0])
        got = preimage_subspace(np.eye(2), f, TOL)
        assert subspace_equal(got, f)

    def test_zero_map_full_preimage(self):
        f = basis_frame(2, [0])
        assert preimage_subspace(np.zeros((2, 2)), f, TOL).size == 2

    def test_nilpotent_preimage_of_its_range_complement(self):
        # a maps e2 -> e1 and e1 -> 0, so everything lands in span{e1}.
        a = np.array([[0.0, 1.0], [0.0, 0.0]])
        f = basis_frame(2, [0])
        assert preimage_subspace(a, f, TOL).size == 2

    def test_full_space_preimage_is_full(self):
        a = random_matrix(11, 4)
        assert preimage_subspace(a, Frame.full(4), TOL).size == 4

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 10**6), st.integers(2, 6))
    def test_contains_kernel(self, seed, dim):
        a = random_matrix(seed, dim)
        a[:, 0] = 0.0  # guarantee a kernel direction
        f = rank_revealing_frame(random_matrix(seed + 7, dim)[:, :1], TOL)
        pre = preimage_subspace(a, f, TOL)
        ker = kernel_frame(a, TOL, floor=frob(a))
        assert ker.size >= 1
        # every kernel vector lies in the preimage
        p = pre.projection_matrix()
        assert frob(p @ ker.cols - ker.cols) < 1e-9
