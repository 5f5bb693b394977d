import math

import numpy as np
import pytest

from pronydh.hankelize import (
    build_hankel_system,
    closed_form_jacobian,
    elementary_symmetric,
    prony_coefficient_expansion,
    prony_polynomial,
    single_node_polynomial,
)
from pronydh.model import (
    MeasurementSequence,
    MultiplicityVector,
    PronyParameters,
    choose_decimation,
    decimate,
    forward_map,
    scale_map,
)

from conftest import random_parameters


class TestElementarySymmetric:
    def test_empty_product(self):
        assert np.array_equal(elementary_symmetric([]), [1.0])

    def test_single_value(self):
        assert np.array_equal(elementary_symmetric([2.0]), [1.0, 2.0])

    def test_plus_minus_pairs(self):
        # (x+1)^2 (x-1)^2 = x^4 - 2x^2 + 1, read off as e_0..e_4.
        sigma = elementary_symmetric([1.0, 1.0, -1.0, -1.0])
        assert np.allclose(sigma, [1.0, 0.0, -2.0, 0.0, 1.0])

    def test_matches_polynomial_expansion(self, rng):
        values = rng.standard_normal(5) + 1j * rng.standard_normal(5)
        sigma = elementary_symmetric(values)
        # prod (x + v) has ascending coefficients e_m, ..., e_0.
        poly = np.array([1.0 + 0j])
        for v in values:
            poly = np.convolve(poly, np.array([v, 1.0]))
        assert np.allclose(poly, sigma[::-1])


class TestPronyPolynomial:
    def test_single_simple_node(self):
        c = prony_polynomial([0.5j], MultiplicityVector((1,)))
        assert np.allclose(c, [-0.5j, 1.0])

    def test_double_pair(self):
        c = prony_polynomial([1.0, -1.0], MultiplicityVector((2, 2)))
        assert np.allclose(c, [1.0, 0.0, -2.0, 0.0, 1.0])

    def test_monic(self, rng):
        x = random_parameters(rng, (2, 1, 3))
        c = prony_polynomial(x.nodes, x.multiplicities)
        assert c[-1] == pytest.approx(1.0)

    def test_mixed_multiplicities(self):
        nodes = np.array([1.0, 1j])
        c = prony_polynomial(nodes, MultiplicityVector((2, 1)))
        # Convolving (x-1)(x-1)(x-i) gives the ascending coefficients.
        expected = np.convolve(np.convolve([-1, 1], [-1, 1]), [-1j, 1])
        assert np.allclose(c, expected)


class TestCoefficientExpansion:
    def test_single_node(self):
        exp = prony_coefficient_expansion(MultiplicityVector((1,)))
        assert exp.terms[0] == {(1,): -1}
        assert exp.terms[1] == {(0,): 1}

    def test_double_double_pattern(self):
        exp = prony_coefficient_expansion(MultiplicityVector((2, 2)))
        assert exp.terms[2] == {(2, 0): 1, (1, 1): 4, (0, 2): 1}
        assert exp.terms[3] == {(1, 0): -2, (0, 1): -2}
        assert exp.terms[4] == {(0, 0): 1}

    def test_top_and_bottom_structure(self, rng):
        D = MultiplicityVector((3, 1, 2))
        exp = prony_coefficient_expansion(D)
        assert exp.terms[D.total_degree] == {(0, 0, 0): 1}
        sign = (-1) ** D.total_degree
        assert exp.terms[0] == {(3, 1, 2): sign}

    def test_substitution_matches_prony_polynomial(self):
        exp = prony_coefficient_expansion(MultiplicityVector((2, 2)))
        values = exp.evaluate(np.array([1.0, -1.0]))
        assert np.allclose(values, [1.0, 0.0, -2.0, 0.0, 1.0])

    def test_substitution_random_points(self, rng):
        for parts in [(1,), (2,), (2, 2), (1, 2, 3), (3, 3)]:
            D = MultiplicityVector(parts)
            exp = prony_coefficient_expansion(D)
            for _ in range(20):
                point = rng.standard_normal(D.num_nodes) + 1j * rng.standard_normal(D.num_nodes)
                ref = prony_polynomial(point, D)
                got = exp.evaluate(point)
                assert np.max(np.abs(got - ref)) <= 1e-12 * (1 + np.max(np.abs(ref)))


class TestBuildHankelSystem:
    def test_symbolic_double_double(self):
        # Coefficient pattern of the first equation for D=(2,2) with
        # measurement values n_0..n_5.
        n = np.arange(1.0, 7.0) + 0j
        dec = MeasurementSequence(n, stride=3)
        system = build_hankel_system(dec, MultiplicityVector((2, 2)))
        f0 = system.equations[0].terms
        assert f0[(2, 2)] == n[0]
        assert f0[(2, 1)] == -2 * n[1]
        assert f0[(1, 2)] == -2 * n[1]
        assert f0[(2, 0)] == n[2]
        assert f0[(1, 1)] == 4 * n[2]
        assert f0[(0, 2)] == n[2]
        assert f0[(1, 0)] == -2 * n[3]
        assert f0[(0, 1)] == -2 * n[3]
        assert f0[(0, 0)] == n[4]
        f1 = system.equations[1].terms
        assert f1[(2, 2)] == n[1]
        assert f1[(0, 0)] == n[5]

    def test_single_node_direct(self):
        dec = MeasurementSequence(np.array([3.0, 5.0]) + 0j, stride=2)
        system = build_hankel_system(dec, MultiplicityVector((1,)))
        assert system.equations[0].terms == {(1,): -3.0, (0,): 5.0}

    def test_needs_enough_values(self):
        dec = MeasurementSequence(np.ones(5, dtype=complex), stride=2)
        with pytest.raises(ValueError, match="d\\+s"):
            build_hankel_system(dec, MultiplicityVector((2, 2)))

    def test_true_scaled_nodes_are_roots(self, rng):
        for _ in range(10):
            x = random_parameters(rng, (2, 2))
            p = int(rng.integers(1, 8))
            R = x.multiplicities.num_parameters
            dec = decimate(forward_map(x, p * R), p, R)
            system = build_hankel_system(dec, x.multiplicities)
            w = scale_map(x, p).nodes
            scale = np.max(np.abs(dec.values))
            for eq in system.equations:
                assert abs(eq.evaluate(w)) <= 1e-10 * scale

    def test_linear_in_measurements(self, rng):
        D = MultiplicityVector((2, 1))
        R = D.num_parameters
        a = rng.standard_normal(R) + 1j * rng.standard_normal(R)
        b = rng.standard_normal(R) + 1j * rng.standard_normal(R)
        alpha, beta = 1.7 - 0.3j, -0.8 + 2.1j
        sys_a = build_hankel_system(MeasurementSequence(a, stride=2), D)
        sys_b = build_hankel_system(MeasurementSequence(b, stride=2), D)
        sys_ab = build_hankel_system(MeasurementSequence(alpha * a + beta * b, stride=2), D)
        for ea, eb, eab in zip(sys_a.equations, sys_b.equations, sys_ab.equations):
            for expo in eab.terms:
                combo = alpha * ea.terms.get(expo, 0) + beta * eb.terms.get(expo, 0)
                assert eab.terms[expo] == pytest.approx(combo)


class TestSingleNodePolynomial:
    def test_degree_one(self):
        dec = MeasurementSequence(np.array([9.0, 2.0, 6.0]) + 0j, stride=4)
        q = single_node_polynomial(dec, 1)
        # q(u) = n_1 u - n_2, root n_2 / n_1.
        assert np.allclose(q, [2.0, -6.0])
        assert np.roots(q)[0] == pytest.approx(3.0)

    def test_degree_two_pattern(self):
        dec = MeasurementSequence(np.arange(1.0, 5.0) + 0j, stride=5)
        q = single_node_polynomial(dec, 2)
        # q(u) = n_1 u^2 - 2 n_2 u + n_3.
        assert np.allclose(q, [2.0, -6.0, 4.0])

    def test_true_power_is_root(self, rng):
        x = random_parameters(rng, (3,))
        p = 11
        d = 3
        dec = decimate(forward_map(x, p * (d + 1) + 1), p, d + 2)
        q = single_node_polynomial(dec, d)
        rho = x.nodes[0] ** p
        assert abs(np.polyval(q, rho)) <= 1e-12 * np.max(np.abs(q)) * 10

    def test_limit_root_ratio(self):
        # Double-amplitude single node: for large stride the two roots of
        # the elimination polynomial approach ratio 3.
        D = MultiplicityVector((2,))
        x = PronyParameters(
            np.array([np.exp(0.3j)]), (np.array([1.0, 1.0], dtype=complex),), D
        )
        p = 1000
        dec = decimate(forward_map(x, p * 3 + 1), p, 4)
        q = single_node_polynomial(dec, 2)
        roots = sorted(np.roots(q), key=abs)
        assert abs(roots[1] / roots[0] - 3.0) <= 0.01


class TestClosedFormJacobian:
    def test_three_double_nodes_entry(self, rng):
        # Entry (0, 0) should be -2 b_{1,1} w_1 (w_1-w_2)^2 (w_1-w_3)^2.
        y = random_parameters(rng, (2, 2, 2))
        fact = closed_form_jacobian(y)
        w = y.nodes
        b11 = y.coefficients[0][1]
        expected = -2.0 * b11 * w[0] * (w[0] - w[1]) ** 2 * (w[0] - w[2]) ** 2
        assert fact.product[0, 0] == pytest.approx(expected)

    def test_single_simple_node(self):
        y = PronyParameters(
            np.array([1.0 + 0j]), (np.array([1.0 + 0j]),), MultiplicityVector((1,))
        )
        fact = closed_form_jacobian(y)
        assert fact.product[0, 0] == pytest.approx(-1.0)

    def test_matches_finite_differences(self, rng):
        for _ in range(10):
            parts = tuple(int(rng.integers(1, 4)) for _ in range(int(rng.integers(1, 4))))
            x = random_parameters(rng, parts)
            p = int(rng.integers(1, 4))
            R = x.multiplicities.num_parameters
            dec = decimate(forward_map(x, p * R), p, R)
            system = build_hankel_system(dec, x.multiplicities)
            y = scale_map(x, p)
            analytic = closed_form_jacobian(y).product
            fd = _finite_difference_jacobian(system.equations, y.nodes)
            err = np.linalg.norm(analytic - fd) / np.linalg.norm(analytic)
            assert err <= 1e-6

    def test_factorization_consistency(self, rng):
        y = random_parameters(rng, (2, 3, 1))
        fact = closed_form_jacobian(y)
        reconstructed = fact.vandermonde @ fact.diagonal
        err = np.linalg.norm(fact.product - reconstructed)
        assert err <= 1e-12 * np.linalg.norm(fact.product)

    def test_determinant_identity(self, rng):
        # det(product) = det(V) * prod(diagonal) with det(V) the Vandermonde
        # product of node differences.
        y = random_parameters(rng, (2, 2))
        fact = closed_form_jacobian(y)
        w = y.nodes
        det_v = np.prod([w[j] - w[i] for i in range(len(w)) for j in range(i + 1, len(w))])
        lhs = np.linalg.det(fact.product)
        rhs = det_v * np.prod(np.diag(fact.diagonal))
        assert abs(lhs - rhs) <= 1e-10 * abs(rhs)


def _finite_difference_jacobian(equations, point, h=1e-6):
    s = len(point)
    J = np.empty((s, s), dtype=complex)
    for j in range(s):
        e = np.zeros(s, dtype=complex)
        e[j] = h
        for k, eq in enumerate(equations):
            J[k, j] = (eq.evaluate(point + e) - eq.evaluate(point - e)) / (2 * h)
    return J
