"""Tuple kernels: power sums, cancellation, symmetry, singular limits."""

import itertools

import numpy as np
import pytest

from kawalab import DispersionParams, EnergyMultipliers, IMultiplier, h_v_eval
from kawalab.multipliers import power_sum_identity_check

D = DispersionParams(1.0)
M = IMultiplier(4.0, -1.75)
KERN = EnergyMultipliers(M, D)


def scalar(value):
    return complex(np.asarray(value).reshape(-1)[0])


def zero_sum_tuples(rng, count, k, span=1000.0):
    x = rng.uniform(-span, span, (count, k - 1))
    return np.column_stack([x, -x.sum(axis=1)])


class TestPowerSums:
    def test_worked_triple(self):
        h, v = h_v_eval(np.array([1.0, 2.0, -3.0]), D)
        assert h == pytest.approx(-18j)
        assert v == pytest.approx(-210j)
        # factored forms
        assert 3 * 1 * 2 * (-3) == -18
        assert 2.5 * (1 * 2 * -3) * (1 + 4 + 9) == -210

    def test_worked_quadruple(self):
        h, v = h_v_eval(np.array([1.0, 1.0, 1.0, -3.0]), D)
        assert v == pytest.approx(-240j)
        assert -2.5 * 2 * 2 * 2 * (1 + 1 + 1 + 9) == -240

    def test_random_tuples(self):
        rng = np.random.default_rng(0)
        assert power_sum_identity_check(zero_sum_tuples(rng, 10000, 3)) < 1e-11
        assert power_sum_identity_check(zero_sum_tuples(rng, 10000, 4)) < 1e-11

    def test_rejects_other_lengths(self):
        with pytest.raises(ValueError):
            power_sum_identity_check(np.zeros((4, 5)))


class TestCubicKernel:
    def test_m3_equals_its_defining_symmetrization(self):
        x = np.array([1.7, -0.4, -1.3])
        vals = []
        for p in itertools.permutations(range(3)):
            xp = x[list(p)]
            vals.append(M.m(xp[0]) * M.m(xp[1] + xp[2]) * (xp[1] + xp[2]))
        direct = -1j * np.mean(vals)
        assert abs(direct - scalar(KERN.m3(x[0], x[1], x[2]))) <= 1e-14

    def test_sigma3_zero_below_threshold(self):
        # all frequencies at or below N: the numerator vanishes identically
        vals = KERN.sigma3(np.array([1.0]), np.array([2.5]), np.array([-3.5]))
        assert vals[0] == 0.0

    def test_cubic_cancellation(self):
        rng = np.random.default_rng(1)
        x = zero_sum_tuples(rng, 5000, 3, span=100.0)
        ok = np.all(x != 0.0, axis=1)
        x = x[ok]
        m3 = KERN.m3(x[:, 0], x[:, 1], x[:, 2])
        s3 = KERN.sigma3(x[:, 0], x[:, 1], x[:, 2])
        hv = KERN.hv3(x[:, 0], x[:, 1], x[:, 2])
        resid = np.abs(m3 + s3 * hv)
        nz = np.abs(m3) > 0
        assert np.max(resid[nz] / np.abs(m3[nz])) <= 1e-12

    def test_sigma3_permutation_invariance(self):
        x = (5.25, -12.5, 7.25)
        vals = [scalar(KERN.sigma3(*[x[i] for i in p]))
                for p in itertools.permutations(range(3))]
        assert max(abs(v - vals[0]) for v in vals) <= 1e-15 * abs(vals[0])

    def test_sigma3_conjugation_symmetry(self):
        x = np.array([5.25, -12.5, 7.25])
        a = scalar(KERN.sigma3(*x))
        b = scalar(KERN.sigma3(*(-x)))
        assert abs(b - np.conj(a)) <= 1e-15 * abs(a)

    def test_sigma3_removable_point_matches_limit(self):
        # zero first argument: compare the policy value against a direct
        # shrinking-perturbation limit along the hyperplane
        xi = 9.0
        policy = scalar(KERN.sigma3(np.array([0.0]), np.array([xi]), np.array([-xi])))
        eps = np.array([1e-4, 5e-5, 2.5e-5])
        probe = [scalar(KERN.sigma3(np.array([e]), np.array([xi]),
                                     np.array([-xi - e]))) for e in eps]
        extrap = probe[2] + (probe[2] - probe[1])  # crude Richardson tail
        assert abs(policy - extrap) <= 1e-6 * abs(policy)
        assert policy != 0.0


class TestQuarticKernel:
    def test_m4_two_evaluators_agree(self):
        rng = np.random.default_rng(2)
        x = zero_sum_tuples(rng, 4000, 4, span=200.0)
        p = np.stack([x[:, 0] + x[:, 1], x[:, 0] + x[:, 2], x[:, 1] + x[:, 2]])
        x = x[np.all(np.abs(p) > 1e-9, axis=0)]
        a = KERN.m4(x[:, 0], x[:, 1], x[:, 2], x[:, 3])
        b = KERN.m4_grouped(x[:, 0], x[:, 1], x[:, 2], x[:, 3])
        rel = np.abs(a - b) / np.maximum(np.abs(a) + np.abs(b), 1e-300)
        nz = (np.abs(a) + np.abs(b)) > 0
        assert np.max(rel[nz]) <= 1e-12

    def test_m4_vanishes_in_low_region(self):
        # frequencies below N/8 with pair sums below N
        x = np.array([[0.3, 0.2, -0.1, -0.4]])
        val = KERN.m4(x[:, 0], x[:, 1], x[:, 2], x[:, 3])
        assert np.max(np.abs(val)) == 0.0

    def test_quartic_cancellation(self):
        rng = np.random.default_rng(3)
        x = zero_sum_tuples(rng, 5000, 4, span=100.0)
        p = np.stack([x[:, 0] + x[:, 1], x[:, 0] + x[:, 2], x[:, 1] + x[:, 2]])
        x = x[np.all(np.abs(p) > 1e-9, axis=0)]
        m4 = KERN.m4(x[:, 0], x[:, 1], x[:, 2], x[:, 3])
        s4 = KERN.sigma4(x[:, 0], x[:, 1], x[:, 2], x[:, 3])
        hv = KERN.hv4(x[:, 0], x[:, 1], x[:, 2], x[:, 3])
        resid = np.abs(m4 + s4 * hv)
        nz = np.abs(m4) > 0
        assert np.max(resid[nz] / np.abs(m4[nz])) <= 1e-12

    def test_sigma4_permutation_invariance(self):
        x = (6.0, -13.0, 4.5, 2.5)
        vals = [scalar(KERN.sigma4(*[x[i] for i in p]))
                for p in itertools.permutations(range(4))]
        assert max(abs(v - vals[0]) for v in vals) <= 1e-12 * abs(vals[0])

    def test_sigma4_singular_limit_consistency(self):
        # lattice tuple with an exactly vanishing pair sum: the policy
        # value continues the nearby regular values
        x0 = np.array([5.0, -5.0, 9.0, -9.0])
        policy = scalar(KERN.sigma4(*[np.array([v]) for v in x0]))
        for eps in (1e-5, 1e-6):
            nearby = scalar(KERN.sigma4(
                np.array([5.0 + eps]), np.array([-5.0 + eps]),
                np.array([9.0 - eps]), np.array([-9.0 - eps])))
            assert abs(policy - nearby) <= 1e-3 * abs(policy)

    def test_sigma4_double_singular_limit(self):
        x0 = np.array([5.0, 5.0, -5.0, -5.0])  # two vanishing pair factors
        policy = scalar(KERN.sigma4(*[np.array([v]) for v in x0]))
        eps = 1e-6
        nearby = scalar(KERN.sigma4(
            np.array([5.0 + eps]), np.array([5.0 - eps]),
            np.array([-5.0 + eps]), np.array([-5.0 - eps])))
        assert abs(policy - nearby) <= 1e-3 * max(abs(policy), 1e-300)


class TestQuinticKernel:
    def test_m5_permutation_invariance(self):
        x = (6.0, -13.0, 4.5, 2.5, 0.25)
        base = scalar(KERN.m5(*x))
        rng = np.random.default_rng(4)
        for _ in range(8):
            p = rng.permutation(5)
            val = scalar(KERN.m5(*[x[i] for i in p]))
            assert abs(val - base) <= 1e-12 * abs(base)

    def test_m5_conjugation_symmetry(self):
        x = np.array([6.0, -13.0, 4.5, 2.5, 0.25])
        a = scalar(KERN.m5(*x))
        b = scalar(KERN.m5(*(-x)))
        assert abs(b - np.conj(a)) <= 1e-12 * abs(a)
