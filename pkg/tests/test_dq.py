import math

import numpy as np
import pytest
from hypothesis import given, settings
from scipy.spatial.transform import Rotation

from branchdyn import dq
from branchdyn.dq import DualQuaternion, E, I, J, K, ONE, ZERO
from branchdyn.errors import EmptyVectorError, NotPureError, NotUnitError, ZeroPrimaryError

from conftest import poses, pure_dqs, random_pose


def close(a, b, tol=1e-12):
    return dq.max_abs_diff(a, b) <= tol


def naive_mul(a, b):
    # eps**2 = 0 expansion with the Quaternion class
    ap, ad, bp, bd = a.primary, a.dual, b.primary, b.dual
    return DualQuaternion.from_parts(ap * bp, ap * bd + ad * bp)


class TestMultiplication:
    def test_basis(self):
        assert dq.mul(I, J) == K
        assert dq.mul(J, K) == I
        assert dq.mul(K, I) == J
        for u in (I, J, K):
            assert dq.mul(u, u) == -ONE
        assert dq.mul(dq.mul(I, J), K) == -ONE

    def test_identity(self, rng):
        h = DualQuaternion(rng.normal(size=8))
        assert dq.mul(ONE, h) == h
        assert dq.mul(h, ONE) == h

    def test_eps_squared_vanishes(self):
        a = ONE + dq.mul(E, I)
        b = ONE + dq.mul(E, J)
        assert dq.mul(a, b) == ONE + dq.mul(E, I + J)
        assert dq.mul(E, E) == ZERO

    @given(poses(), poses())
    def test_matches_part_expansion(self, a, b):
        assert close(dq.mul(a, b), naive_mul(a, b), 1e-12)

    def test_associative(self, rng):
        a, b, c = (DualQuaternion(rng.normal(size=8)) for _ in range(3))
        assert close(dq.mul(dq.mul(a, b), c), dq.mul(a, dq.mul(b, c)), 1e-12)

    @given(poses(), poses())
    def test_quaternion_norm_multiplicative(self, a, b):
        p, q = a.primary * 1.7, b.primary * 0.3
        assert abs((p * q).norm() - p.norm() * q.norm()) <= 1e-12


class TestConjNorm:
    def test_conj_examples(self):
        assert dq.conj(ONE) == ONE
        assert dq.conj(I + dq.mul(E, J)) == -I - dq.mul(E, J)

    @given(poses())
    def test_unit_times_conj(self, x):
        assert close(dq.mul(x, dq.conj(x)), ONE, 1e-10)

    @given(poses())
    def test_norm_of_pose(self, x):
        a, b = dq.norm(x)
        assert abs(a - 1.0) < 1e-12 and abs(b) < 1e-12

    def test_norm_scalar(self):
        assert dq.norm(DualQuaternion(2.0)) == (2.0, 0.0)

    def test_norm_translation(self):
        a, b = dq.norm(dq.translation((3.0, 0.0, 0.0)))
        assert a == 1.0 and b == 0.0

    def test_norm_dual_part(self):
        # (h_P, h_D) with <h_P, h_D> = 2 * 0.5
        assert dq.norm(DualQuaternion(2, 0, 0, 0, 0.5, 1, 0, 0)) == (2.0, 0.5)

    def test_zero_primary(self):
        with pytest.raises(ZeroPrimaryError):
            dq.norm(E)


class TestSwapParts:
    def test_swap(self):
        assert dq.swap(I + dq.mul(E, J)) == J + dq.mul(E, I)
        assert dq.swap(ZERO) == ZERO

    @given(pure_dqs())
    def test_involution(self, h):
        assert dq.swap(dq.swap(h)) == h

    def test_parts(self):
        h = I + dq.mul(E, J)
        assert dq.get_primary(h).coeffs == (0.0, 1.0, 0.0, 0.0)
        assert dq.get_dual(h).coeffs == (0.0, 0.0, 1.0, 0.0)
        assert dq.get_primary(ZERO).coeffs == (0.0,) * 4

    def test_vec6(self):
        np.testing.assert_array_equal(dq.vec6(I + dq.mul(E, K)), [1, 0, 0, 0, 0, 1])
        np.testing.assert_array_equal(dq.vec6(ZERO), np.zeros(6))
        np.testing.assert_array_equal(dq.vec6(2 * J), [0, 2, 0, 0, 0, 0])
        with pytest.raises(NotPureError):
            dq.vec6(ONE)


class TestLog:
    def test_identity(self):
        assert dq.log(ONE) == ZERO

    def test_pure_translation(self):
        assert close(dq.log(dq.translation((0.0, 0.0, 2.0))), dq.mul(E, K))

    def test_quarter_turn(self):
        x = DualQuaternion(math.cos(math.pi / 4), 0, 0, math.sin(math.pi / 4))
        # rotation-vector oracle: log = rotvec / 2
        rv = Rotation.from_euler("z", 90, degrees=True).as_rotvec()
        assert close(dq.log(x), dq.pure(rv / 2), 1e-15)
        assert close(dq.log(x), (math.pi / 4) * K, 1e-15)

    def test_not_unit(self):
        with pytest.raises(NotUnitError):
            dq.log(DualQuaternion(1.1))

    @settings(max_examples=200)
    @given(poses())
    def test_recovers_parameters(self, x):
        g = dq.log(x)
        c = g.c
        phi = 2.0 * math.sqrt(c[1] ** 2 + c[2] ** 2 + c[3] ** 2)
        n = np.array(c[1:4]) * 2 / phi if phi > 1e-12 else np.zeros(3)
        p = 2.0 * np.array(c[5:8])
        rebuilt = dq.pose(dq.rotation(n, phi) if phi > 1e-12 else ONE, p)
        assert close(rebuilt, x, 1e-9)
        assert 0.0 <= phi < 2 * math.pi

    @given(pure_dqs())
    def test_exp_inverts_log(self, g):
        g = 0.3 * g
        assert close(dq.log(dq.exp_pose(g)), g, 1e-12)


class TestAdjoint:
    def test_identity(self, rng):
        a = dq.pure(rng.normal(size=3), rng.normal(size=3))
        assert dq.adjoint(ONE, a) == a

    def test_quarter_turn_maps_i_to_j(self):
        x = DualQuaternion(math.cos(math.pi / 4), 0, 0, math.sin(math.pi / 4))
        R = Rotation.from_euler("z", 90, degrees=True).as_matrix()
        assert close(dq.adjoint(x, I), dq.pure(R @ [1, 0, 0]), 1e-15)
        assert close(dq.adjoint(x, I), J, 1e-15)

    @given(poses(), pure_dqs())
    def test_matches_sandwich_product(self, x, a):
        assert close(dq.adjoint(x, a), dq.mul(dq.mul(x, a), dq.conj(x)), 1e-11)

    @given(poses(), poses(), pure_dqs())
    def test_group_action(self, x1, x2, a):
        lhs = dq.adjoint(dq.mul(x1, x2), a)
        rhs = dq.adjoint(x1, dq.adjoint(x2, a))
        assert close(lhs, rhs, 1e-10)

    @given(poses(), pure_dqs())
    def test_preserves_purity_and_primary_norm(self, x, a):
        b = dq.adjoint(x, a)
        assert dq.is_pure(b, 1e-10)
        assert abs(dq.get_primary(b).norm() - dq.get_primary(a).norm()) < 1e-12

    def test_matches_screw_transform(self, rng):
        # 6x6 screw transform oracle: w' = R w, v' = R v + p x (R w)
        for _ in range(20):
            R = Rotation.random(random_state=rng)
            p = rng.normal(size=3)
            w, v = rng.normal(size=3), rng.normal(size=3)
            x = dq.pose(dq.Quaternion(*np.roll(R.as_quat(), 1)), p)
            expected = dq.pure(R.apply(w), R.apply(v) + np.cross(p, R.apply(w)))
            assert close(dq.adjoint(x, dq.pure(w, v)), expected, 1e-12)


class TestAdjointN:
    def test_identities(self, rng):
        a = dq.pure(rng.normal(size=3), rng.normal(size=3))
        assert dq.adjoint_n([ONE, ONE, ONE], a) == [a, a, a]

    def test_single(self, rng):
        x, a = random_pose(rng), dq.pure((1, 2, 3), (4, 5, 6))
        assert dq.adjoint_n([x], a) == [dq.adjoint(x, a)]

    def test_zero(self, rng):
        X = [random_pose(rng) for _ in range(4)]
        assert all(y == ZERO for y in dq.adjoint_n(X, ZERO))

    def test_empty(self):
        with pytest.raises(EmptyVectorError):
            dq.adjoint_n([], I)


class TestCross:
    def test_basis(self):
        assert dq.cross(I, J) == K

    @given(pure_dqs())
    def test_self(self, a):
        assert dq.cross(a, a) == ZERO

    @given(pure_dqs(), pure_dqs())
    def test_antisymmetric(self, a, b):
        assert close(dq.cross(a, b), -dq.cross(b, a), 0.0)

    @given(pure_dqs(), pure_dqs())
    def test_is_half_commutator(self, a, b):
        comm = 0.5 * (dq.mul(a, b) - dq.mul(b, a))
        assert close(dq.cross(a, b), comm, 1e-12)

    @given(pure_dqs(), pure_dqs())
    def test_vector_cross_on_primary(self, a, b):
        a, b = dq.pure(a.c[1:4]), dq.pure(b.c[1:4])
        expected = np.cross(a.c[1:4], b.c[1:4])
        np.testing.assert_allclose(dq.vec6(dq.cross(a, b))[:3], expected, atol=1e-12)


def test_normalize_restores_unit(rng):
    x = random_pose(rng)
    for _ in range(500):
        x = dq.mul(x, random_pose(rng))
    y = dq.normalize(x)
    assert dq.is_unit(y, 1e-14)
    assert close(y, x, 1e-9)


def test_constructor_pads_and_rejects():
    assert DualQuaternion(1, 2).c == (1.0, 2.0) + (0.0,) * 6
    with pytest.raises(ValueError):
        DualQuaternion(*range(9))
