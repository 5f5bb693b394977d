import itertools

import numpy as np
import pytest

from pronydh.errors import SolveFailure
from pronydh.hankelize import build_hankel_system
from pronydh.model import MultiplicityVector, choose_decimation, decimate, forward_map
from pronydh.polysolve import (
    MultiPoly,
    SquareSystem,
    TrackOptions,
    newton_refine,
    solve_system,
    total_degree_start,
    track_path,
)

from conftest import random_parameters


def poly1(terms):
    return MultiPoly(1, terms)


class TestMultiPoly:
    def test_constant_evaluation(self):
        p = poly1({(0,): 5.0})
        assert p.evaluate([3.7 + 2j]) == 5.0

    def test_product_monomial(self):
        p = MultiPoly(2, {(1, 1): 1.0})
        assert p.evaluate([2.0, 3j]) == pytest.approx(6j)

    def test_zero_coefficients_dropped(self):
        p = MultiPoly(2, {(1, 0): 0.0, (0, 1): 2.0})
        assert (1, 0) not in p.terms
        assert p.total_degree() == 1

    def test_differentiate_power(self):
        p = poly1({(3,): 1.0})
        assert p.differentiate(0).terms == {(2,): 3.0}

    def test_differentiate_unrelated_variable(self):
        p = MultiPoly(2, {(0, 2): 1.0})
        assert p.differentiate(0).terms == {}

    def test_derivative_matches_finite_difference(self, rng):
        p = MultiPoly(
            2,
            {
                (e1, e2): complex(rng.standard_normal(), rng.standard_normal())
                for e1 in range(3)
                for e2 in range(3)
            },
        )
        point = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        h = 1e-6
        for var in range(2):
            e = np.zeros(2, dtype=complex)
            e[var] = h
            fd = (p.evaluate(point + e) - p.evaluate(point - e)) / (2 * h)
            exact = p.differentiate(var).evaluate(point)
            assert abs(fd - exact) <= 1e-7 * (1 + abs(exact))

    def test_hankel_equation_vanishes_at_solution(self, rng):
        x = random_parameters(rng, (2, 2))
        R = x.multiplicities.num_parameters
        p = 3
        dec = decimate(forward_map(x, p * R), p, R)
        system = build_hankel_system(dec, x.multiplicities)
        w = x.nodes ** p
        scale = max(eq.coefficient_norm() for eq in system.equations)
        assert abs(system.equations[0].evaluate(w)) <= 1e-10 * scale


class TestTotalDegreeStart:
    def test_two_quadrics(self):
        f1 = MultiPoly(2, {(2, 0): 1.0, (0, 0): 1.0})
        f2 = MultiPoly(2, {(0, 2): 1.0, (1, 0): 1.0})
        start, points = total_degree_start(SquareSystem((f1, f2)))
        assert len(points) == 4
        signs = {tuple(np.round(p.real).astype(int)) for p in points}
        assert signs == {(1, 1), (1, -1), (-1, 1), (-1, -1)}

    def test_count_is_degree_product(self):
        f1 = MultiPoly(2, {(4, 0): 1.0, (0, 0): -2.0})
        f2 = MultiPoly(2, {(0, 4): 1.0, (0, 0): -2.0})
        _, points = total_degree_start(SquareSystem((f1, f2)))
        assert len(points) == 16

    def test_start_points_solve_start_system(self):
        f1 = MultiPoly(2, {(3, 1): 1.0, (0, 0): 1.0})
        f2 = MultiPoly(2, {(1, 1): 1.0, (1, 0): 1.0})
        start, points = total_degree_start(SquareSystem((f1, f2)))
        for p in points:
            for eq in start.equations:
                assert abs(eq.evaluate(p)) <= 1e-14

    def test_zero_degree_rejected(self):
        f1 = MultiPoly(1, {(0,): 1.0})
        with pytest.raises(SolveFailure, match="square-solvable"):
            total_degree_start(SquareSystem((f1,)))


class TestTrackPath:
    def test_stationary_path(self):
        g = SquareSystem((poly1({(2,): 1.0, (0,): -1.0}),))
        res = track_path(g, g, np.array([1.0 + 0j]))
        assert res.status == "converged"
        assert abs(res.endpoint[0] - 1.0) <= 1e-10

    def test_quadratic_target(self):
        target = SquareSystem((poly1({(2,): 1.0, (0,): -4.0}),))
        start, points = total_degree_start(target)
        ends = sorted(
            track_path(target, start, p, TrackOptions(seed=5)).endpoint[0].real
            for p in points
        )
        assert ends == pytest.approx([-2.0, 2.0], abs=1e-10)

    def test_linear_target(self):
        target = SquareSystem((poly1({(1,): 1.0}),))
        start, points = total_degree_start(target)
        res = track_path(target, start, points[0])
        assert res.status == "converged"
        assert abs(res.endpoint[0]) <= 1e-10


class TestSolveSystem:
    def test_univariate_square_roots(self):
        sols = solve_system(SquareSystem((poly1({(2,): 1.0, (0,): -1.0}),)))
        assert len(sols) == 2
        values = sorted(s[0].real for s in sols.solutions)
        assert values == pytest.approx([-1.0, 1.0], abs=1e-10)

    def test_symmetric_pair(self):
        f1 = MultiPoly(2, {(1, 0): 1.0, (0, 1): 1.0, (0, 0): -3.0})
        f2 = MultiPoly(2, {(1, 1): 1.0, (0, 0): -2.0})
        sols = solve_system(SquareSystem((f1, f2)))
        got = sorted(tuple(np.round(s.real, 8)) for s in sols.solutions)
        assert got == [(1.0, 2.0), (2.0, 1.0)]

    def test_no_solutions(self):
        # Inconsistent pair: u1*u2 = 1 and u1*u2 = 2.
        f1 = MultiPoly(2, {(1, 1): 1.0, (0, 0): -1.0})
        f2 = MultiPoly(2, {(1, 1): 1.0, (0, 0): -2.0})
        with pytest.raises(SolveFailure, match="no solutions"):
            solve_system(SquareSystem((f1, f2)))

    def test_hankel_solution_count(self, rng):
        # Two double nodes: 16 paths, 8 finite solutions.
        x = random_parameters(rng, (2, 2), min_separation=0.05)
        R = x.multiplicities.num_parameters
        N = 1000
        p = choose_decimation(N, R)
        dec = decimate(forward_map(x, N), p, R)
        system = build_hankel_system(dec, x.multiplicities)
        sols = solve_system(system.square_system, TrackOptions(seed=11))
        assert sols.n_paths == 16
        assert len(sols) == 8

    def test_path_conservation(self, rng):
        for seed in range(5):
            f1 = _random_quadratic(np.random.default_rng(seed), 2)
            f2 = _random_quadratic(np.random.default_rng(seed + 100), 2)
            sols = solve_system(SquareSystem((f1, f2)), TrackOptions(seed=seed))
            assert sols.n_converged + sols.n_diverged + sols.n_failed == sols.n_paths

    def test_determinism(self):
        f1 = MultiPoly(2, {(2, 0): 1.0, (1, 1): 0.5j, (0, 0): -1.0})
        f2 = MultiPoly(2, {(0, 2): 1.0, (1, 0): -0.25, (0, 0): -2.0})
        opts = TrackOptions(seed=42)
        a = solve_system(SquareSystem((f1, f2)), opts)
        b = solve_system(SquareSystem((f1, f2)), opts)
        assert len(a) == len(b)
        for sa, sb in zip(a.solutions, b.solutions):
            assert np.array_equal(sa, sb)

    def test_gamma_robustness(self, rng):
        for seed in [3, 17]:
            f1 = _random_quadratic(np.random.default_rng(seed), 2)
            f2 = _random_quadratic(np.random.default_rng(seed + 50), 2)
            system = SquareSystem((f1, f2))
            a = solve_system(system, TrackOptions(gamma=np.exp(0.7j)))
            b = solve_system(system, TrackOptions(gamma=np.exp(2.3j)))
            assert len(a) == len(b)
            for sa, sb in zip(a.solutions, b.solutions):
                assert np.max(np.abs(sa - sb)) <= 1e-8

    def test_residual_bound(self, rng):
        f1 = _random_quadratic(rng, 2)
        f2 = _random_quadratic(rng, 2)
        system = SquareSystem((f1, f2))
        opts = TrackOptions(seed=1)
        sols = solve_system(system, opts)
        bound = opts.endpoint_tol * (1 + system.coefficient_norm())
        assert all(r <= bound for r in sols.residuals)

    def test_oracle_equivalence_50_random_quadratics(self):
        matched = 0
        for seed in range(50):
            rng = np.random.default_rng(1000 + seed)
            f1 = _random_quadratic(rng, 2)
            f2 = _random_quadratic(rng, 2)
            system = SquareSystem((f1, f2))
            sols = solve_system(system, TrackOptions(seed=seed))
            expected = _quadratic_oracle(f1, f2)
            assert len(sols) == len(expected), f"seed {seed}: count mismatch"
            used = set()
            for root in expected:
                dists = [
                    np.max(np.abs(root - s)) if i not in used else np.inf
                    for i, s in enumerate(sols.solutions)
                ]
                i = int(np.argmin(dists))
                assert dists[i] <= 1e-8, f"seed {seed}: endpoint off by {dists[i]:.2e}"
                used.add(i)
            matched += 1
        assert matched == 50


class TestNewtonRefine:
    def test_exact_root_unchanged(self):
        system = SquareSystem((poly1({(2,): 1.0, (0,): -1.0}),))
        point, res = newton_refine(system, np.array([1.0 + 0j]), 1e-12)
        assert abs(point[0] - 1.0) <= 1e-15
        assert res <= 1e-12

    def test_sqrt_two(self):
        system = SquareSystem((poly1({(2,): 1.0, (0,): -2.0}),))
        point, res = newton_refine(system, np.array([1.4 + 0j]), 1e-12)
        assert abs(point[0] - np.sqrt(2)) <= 1e-12

    def test_singular_jacobian(self):
        system = SquareSystem((poly1({(2,): 1.0}),))
        with pytest.raises(SolveFailure, match="singular"):
            newton_refine(system, np.array([0.0 + 0j]), 1e-12)


def _random_quadratic(rng, nvars):
    terms = {}
    for expo in itertools.product(range(3), repeat=nvars):
        if sum(expo) <= 2:
            terms[expo] = complex(rng.standard_normal(), rng.standard_normal())
    return MultiPoly(nvars, terms)


def _quadratic_oracle(f, g):
    """All finite common roots of two dense quadratics in two variables.

    Eliminates u2 via the Sylvester resultant, sampled and interpolated as a
    quartic in u1 (companion-matrix roots), then back-substitutes and
    polishes with a few Newton steps.
    """

    def coeffs_in_u2(poly, x):
        c = np.zeros(3, dtype=complex)
        for (e1, e2), coef in poly.terms.items():
            c[e2] += coef * x ** e1
        return c  # ascending in u2

    def sylvester_det(x):
        a = coeffs_in_u2(f, x)[::-1]  # descending: a2, a1, a0
        b = coeffs_in_u2(g, x)[::-1]
        S = np.array(
            [
                [a[0], a[1], a[2], 0],
                [0, a[0], a[1], a[2]],
                [b[0], b[1], b[2], 0],
                [0, b[0], b[1], b[2]],
            ],
            dtype=complex,
        )
        return np.linalg.det(S)

    # The resultant has degree at most 4 in u1; sample and least-squares fit.
    xs = 1.3 * np.exp(2j * np.pi * np.arange(9) / 9)
    vals = np.array([sylvester_det(x) for x in xs])
    V = np.vander(xs, N=5, increasing=True)
    coeffs, *_ = np.linalg.lstsq(V, vals, rcond=None)
    u1_roots = np.roots(coeffs[::-1])

    solutions = []
    for x in u1_roots:
        c = coeffs_in_u2(f, x)
        u2_candidates = np.roots(c[::-1]) if abs(c[2]) > 1e-12 else np.array(
            [-c[0] / c[1]]
        )
        for y in u2_candidates:
            root = np.array([x, y], dtype=complex)
            root = _polish(f, g, root)
            if max(abs(f.evaluate(root)), abs(g.evaluate(root))) < 1e-9:
                if all(np.max(np.abs(root - s)) > 1e-6 for s in solutions):
                    solutions.append(root)
    solutions.sort(key=lambda r: (r[0].real, r[0].imag, r[1].real, r[1].imag))
    return solutions


def _polish(f, g, root, iters=5):
    for _ in range(iters):
        J = np.array(
            [
                [f.differentiate(0).evaluate(root), f.differentiate(1).evaluate(root)],
                [g.differentiate(0).evaluate(root), g.differentiate(1).evaluate(root)],
            ],
            dtype=complex,
        )
        r = np.array([f.evaluate(root), g.evaluate(root)], dtype=complex)
        try:
            root = root - np.linalg.solve(J, r)
        except np.linalg.LinAlgError:
            break
    return root
