"""Smoothed superquantile: conjugates, dual solver, equivalence toolkit."""

import math

import numpy as np
import pytest

from sqopt import (
    DensitySpec,
    SmoothingSpec,
    bisect_dual,
    conv_smoothed_positive_part,
    density_from_smoothing,
    divergence,
    divergence_from_density,
    divergence_max,
    dual_breakpoints,
    scalar_conjugate,
    scalar_conjugate_grad,
    smoothed_positive_part,
    smoothed_superquantile,
    solve_dual_1d,
    superquantile_integral,
    tail_cap,
)
from sqopt.smoothing import (
    conv_smoothed_positive_part_quadrature,
    dual_derivative,
    dual_objective,
)

from reference import grid_max, project_simplex, relative_gap


def random_instance(rng, max_n=60):
    n = int(rng.integers(1, max_n))
    u = rng.normal(0.0, 2.0, n)
    p = float(rng.uniform(0.0, 0.98))
    return u, p


class TestSmoothingSpec:
    def test_validation(self):
        with pytest.raises(ValueError, match="kind"):
            SmoothingSpec("huber", 1.0)
        with pytest.raises(ValueError, match="nu"):
            SmoothingSpec("euclidean", 0.0)
        with pytest.raises(ValueError, match="nu"):
            SmoothingSpec("kl", -1.0)


class TestScalarConjugate:
    def test_euclidean_flat_below_threshold(self):
        # below s = -nu/n the maximizer is t = 0 and the value freezes at -nu d(0)
        n, p, nu = 4, 0.5, 2.0
        spec = SmoothingSpec("euclidean", nu)
        floor = -nu * 0.5 / n**2
        for s in (-nu / n, -nu / n - 0.1, -50.0):
            assert scalar_conjugate(s, spec, n, p) == pytest.approx(floor, abs=1e-15)
            assert scalar_conjugate_grad(s, spec, n, p) == 0.0

    def test_euclidean_midpoint(self):
        spec = SmoothingSpec("euclidean", 1.0)
        assert scalar_conjugate(0.0, spec, 2, 0.5) == pytest.approx(0.0, abs=1e-15)
        assert scalar_conjugate_grad(0.0, spec, 2, 0.5) == pytest.approx(0.5, abs=1e-15)

    def test_euclidean_saturation(self):
        n, p, nu = 5, 0.6, 0.7
        spec = SmoothingSpec("euclidean", nu)
        threshold = nu * p / (n * (1.0 - p))
        cap = tail_cap(n, p)
        for s in (threshold, threshold + 1.0, 40.0):
            assert scalar_conjugate_grad(s, spec, n, p) == cap

    def test_kl_value_at_zero(self):
        # interior maximizer exp(-1)/n, value nu * t
        spec = SmoothingSpec("kl", 1.0)
        t_star = math.exp(-1.0) / 2.0
        assert scalar_conjugate_grad(0.0, spec, 2, 0.5) == pytest.approx(t_star, rel=1e-14)
        assert scalar_conjugate(0.0, spec, 2, 0.5) == pytest.approx(t_star, rel=1e-14)

    def test_kl_never_exactly_zero_but_vanishes(self):
        spec = SmoothingSpec("kl", 0.5)
        g = scalar_conjugate_grad(-5.0, spec, 3, 0.5)
        assert 0.0 < g < 1e-4
        assert scalar_conjugate_grad(-200.0, spec, 3, 0.5) < 1e-150

    @pytest.mark.parametrize("kind", ["euclidean", "kl"])
    def test_matches_grid_maximization(self, kind):
        rng = np.random.default_rng(11)
        for _ in range(12):
            n = int(rng.integers(1, 9))
            p = float(rng.uniform(0.0, 0.9))
            nu = float(10 ** rng.uniform(-1, 0.7))
            s = float(rng.normal(0, 2))
            spec = SmoothingSpec(kind, nu)
            cap = tail_cap(n, p)
            if kind == "euclidean":
                objective = lambda t: s * t - nu * 0.5 * (t - 1.0 / n) ** 2
            else:
                from scipy.special import xlogy
                objective = lambda t: s * t - nu * xlogy(t, t * n)
            reference = grid_max(objective, 0.0, cap)
            assert scalar_conjugate(s, spec, n, p) == pytest.approx(reference, abs=1e-7)

    def test_grad_is_nondecreasing_and_bounded(self):
        rng = np.random.default_rng(12)
        s = np.linspace(-40, 40, 5001)
        for kind in ("euclidean", "kl"):
            n = int(rng.integers(1, 30))
            p = float(rng.uniform(0, 0.95))
            spec = SmoothingSpec(kind, float(10 ** rng.uniform(-2, 1)))
            g = scalar_conjugate_grad(s, spec, n, p)
            assert np.all(np.diff(g) >= -1e-15)
            assert g.min() >= 0.0 and g.max() <= tail_cap(n, p) + 1e-15


class TestBreakpoints:
    def test_euclidean_formula(self):
        u = np.array([0.0, 1.0, -2.0])
        nu, p, n = 0.8, 0.25, 3
        pts = dual_breakpoints(u, SmoothingSpec("euclidean", nu), p)
        expected = np.unique(np.concatenate([u + nu / n, u - (nu / n) * p / (1 - p)]))
        np.testing.assert_allclose(pts, expected, atol=0)
        assert pts.size <= 2 * n

    def test_single_point_euclidean(self):
        pts = dual_breakpoints([0.0], SmoothingSpec("euclidean", 1.0), 0.5)
        np.testing.assert_allclose(pts, [-1.0, 1.0], atol=0)

    def test_kl_single_threshold_per_point(self):
        # the lower threshold sits at -inf, so one breakpoint per value:
        # u_i - nu * (1 - log(1-p)) under the divergence-to-uniform scaling
        u = np.array([0.0, 2.0, 5.0])
        nu, p = 0.5, 0.2
        pts = dual_breakpoints(u, SmoothingSpec("kl", nu), p)
        expected = np.sort(u + nu * (math.log1p(-p) - 1.0))
        np.testing.assert_allclose(pts, expected, atol=0)
        assert pts.size == u.size


class TestDualSolver:
    def test_euclidean_projection_examples(self):
        # argmax q = projection of (uniform + u/nu) onto the simplex when the
        # cap is inactive (n=2, p=0.5 gives cap=1)
        u = np.array([0.0, 1.0])
        for nu, expect_w, expect_v in [(4.0, [0.375, 0.625], 0.5625), (1.0, [0.0, 1.0], 0.75)]:
            value, weights = smoothed_superquantile(u, SmoothingSpec("euclidean", nu), 0.5)
            np.testing.assert_allclose(weights, expect_w, atol=1e-12)
            assert value == pytest.approx(expect_v, abs=1e-12)
            reference = project_simplex(0.5 + u / nu)
            np.testing.assert_allclose(weights, reference, atol=1e-12)

    def test_kl_softmax_when_cap_inactive(self):
        rng = np.random.default_rng(13)
        for _ in range(20):
            u = rng.normal(0, 1, 2)
            nu = float(10 ** rng.uniform(-1, 1))
            sol = solve_dual_1d(u, SmoothingSpec("kl", nu), 0.5)
            soft = np.exp(u / nu - u.max() / nu)
            soft = soft / soft.sum()
            np.testing.assert_allclose(sol.weights, soft, atol=1e-12)
            # closed-form root shifted by nu*log(n) relative to the
            # unnormalized-entropy convention
            explicit = nu * (np.log(np.sum(np.exp(u / nu - 1.0))) - math.log(2.0))
            assert sol.threshold == pytest.approx(explicit, abs=1e-10 * max(1, abs(explicit)))

    def test_zero_sample_kl_is_zero(self):
        for nu in (0.1, 1.0, 10.0):
            value, weights = smoothed_superquantile([0.0, 0.0], SmoothingSpec("kl", nu), 0.5)
            assert value == pytest.approx(0.0, abs=1e-14)
            np.testing.assert_allclose(weights, [0.5, 0.5], atol=1e-12)

    @pytest.mark.parametrize("kind", ["euclidean", "kl"])
    def test_weights_feasible_and_stationary(self, kind):
        rng = np.random.default_rng(14)
        for _ in range(150):
            u, p = random_instance(rng)
            nu = float(10 ** rng.uniform(-2.5, 2.0))
            spec = SmoothingSpec(kind, nu)
            sol = solve_dual_1d(u, spec, p)
            cap = tail_cap(u.size, p)
            assert sol.weights.min() >= 0.0
            assert sol.weights.max() <= cap * (1 + 1e-13)
            assert abs(sol.weights.sum() - 1.0) <= 1e-12
            grad_again = scalar_conjugate_grad(u - sol.threshold, spec, u.size, p)
            np.testing.assert_allclose(sol.weights, grad_again, atol=1e-9)
            assert abs(dual_derivative(sol.threshold, u, spec, p)) <= 1e-10

    @pytest.mark.parametrize("kind", ["euclidean", "kl"])
    def test_no_duality_gap(self, kind):
        rng = np.random.default_rng(15)
        for _ in range(100):
            u, p = random_instance(rng)
            nu = float(10 ** rng.uniform(-2, 1.5))
            spec = SmoothingSpec(kind, nu)
            sol = solve_dual_1d(u, spec, p)
            primal = float(sol.weights @ u) - nu * divergence(sol.weights, spec, u.size)
            assert abs(primal - sol.value) <= 1e-10 * max(1.0, abs(sol.value))

    @pytest.mark.parametrize("kind", ["euclidean", "kl"])
    def test_closed_form_matches_bisection(self, kind):
        rng = np.random.default_rng(16)
        for _ in range(120):
            n = int(rng.integers(2, 80))
            u = rng.normal(0.0, 1.0, n) * float(10 ** rng.uniform(-1, 1))
            p = float(rng.uniform(0.05, 0.95))
            nu = float(10 ** rng.uniform(-2, 1))
            spec = SmoothingSpec(kind, nu)
            a = solve_dual_1d(u, spec, p)
            b = bisect_dual(u, spec, p)
            assert abs(a.threshold - b.threshold) <= 1e-8

    def test_dual_derivative_limits(self):
        rng = np.random.default_rng(17)
        for kind in ("euclidean", "kl"):
            u = rng.normal(0, 3, 25)
            span = float(u.max() - u.min())
            for p in (0.1, 0.5, 0.9):
                spec = SmoothingSpec(kind, 0.3)
                hi = dual_derivative(u.max() + 1e6 * span, u, spec, p)
                lo = dual_derivative(u.min() - 1e6 * span, u, spec, p)
                assert hi == pytest.approx(1.0, abs=1e-9)
                assert lo == pytest.approx(-p / (1 - p), abs=1e-9)

    def test_dual_derivative_monotone(self):
        rng = np.random.default_rng(18)
        u = rng.normal(0, 2, 17)
        for kind in ("euclidean", "kl"):
            spec = SmoothingSpec(kind, 0.4)
            etas = np.linspace(u.min() - 2, u.max() + 2, 200)
            slopes = [dual_derivative(float(e), u, spec, 0.7) for e in etas]
            assert all(a <= b + 1e-12 for a, b in zip(slopes, slopes[1:]))

    def test_flat_derivative_picks_breakpoint(self):
        # a data gap with integer n(1-p) makes the derivative exactly zero on
        # a whole interval; the solver must return a point with zero slope
        u = np.array([0.0, 0.0, 10.0, 10.0])
        spec = SmoothingSpec("euclidean", 0.1)
        sol = solve_dual_1d(u, spec, 0.5)
        assert abs(dual_derivative(sol.threshold, u, spec, 0.5)) <= 1e-12
        np.testing.assert_allclose(sol.weights, [0.0, 0.0, 0.5, 0.5], atol=1e-14)
        # exact tail average 10 minus nu times the divergence of the weights
        assert sol.value == pytest.approx(10.0 - 0.1 * 0.125, abs=1e-12)

    def test_errors(self):
        with pytest.raises(ValueError, match="finite"):
            solve_dual_1d([1.0, float("inf")], SmoothingSpec("euclidean", 1.0), 0.5)


class TestApproximationQuality:
    @pytest.mark.parametrize("kind", ["euclidean", "kl"])
    def test_sandwich_bound(self, kind):
        rng = np.random.default_rng(19)
        for _ in range(150):
            u, p = random_instance(rng)
            nu = float(10 ** rng.uniform(-3, 2))
            spec = SmoothingSpec(kind, nu)
            exact = superquantile_integral(u, p)
            value, _ = smoothed_superquantile(u, spec, p)
            slack = 1e-10 * max(1.0, abs(exact))
            assert value <= exact + slack
            assert exact <= value + nu * divergence_max(spec, u.size, p) + slack

    def test_divergence_max_dominates_polytope(self):
        rng = np.random.default_rng(20)
        for kind in ("euclidean", "kl"):
            for _ in range(40):
                n = int(rng.integers(1, 8))
                p = float(rng.uniform(0, 0.9))
                spec = SmoothingSpec(kind, 1.0)
                cap = tail_cap(n, p)
                dmax = divergence_max(spec, n, p)
                raw = np.abs(rng.normal(0, 1, n)) + 1e-3
                q = np.minimum(raw / raw.sum(), cap)
                q += (1.0 - q.sum()) / n  # nudge back onto the simplex
                if q.max() <= cap and q.min() >= 0:
                    assert divergence(q, spec, n) <= dmax + 1e-12

    def test_uniform_weights_have_zero_divergence(self):
        for kind in ("euclidean", "kl"):
            assert divergence(np.full(5, 0.2), SmoothingSpec(kind, 1.0), 5) == pytest.approx(0.0, abs=1e-15)

    @pytest.mark.parametrize("kind", ["euclidean", "kl"])
    def test_small_nu_recovers_exact_value(self, kind):
        rng = np.random.default_rng(21)
        for _ in range(40):
            u, p = random_instance(rng)
            nu = 1e-9 * max(1.0, float(u.max() - u.min()))
            spec = SmoothingSpec(kind, nu)
            value, _ = smoothed_superquantile(u, spec, p)
            exact = superquantile_integral(u, p)
            assert abs(value - exact) <= nu * divergence_max(spec, u.size, p) + 1e-12 * max(1, abs(exact))

    def test_large_nu_euclidean_tends_to_mean_and_uniform(self):
        rng = np.random.default_rng(22)
        for _ in range(30):
            u, p = random_instance(rng, max_n=40)
            span = max(1.0, float(u.max() - u.min()))
            value, weights = smoothed_superquantile(u, SmoothingSpec("euclidean", 1e9 * span), p)
            assert relative_gap(value, float(u.mean())) < 1e-6
            assert np.abs(weights - 1.0 / u.size).max() < 1e-6

    def test_p_zero_equals_mean_for_any_nu(self):
        rng = np.random.default_rng(23)
        u = rng.normal(3, 2, 33)
        for kind in ("euclidean", "kl"):
            for nu in (1e-3, 1.0, 1e3):
                value, weights = smoothed_superquantile(u, SmoothingSpec(kind, nu), 0.0)
                assert value == pytest.approx(u.mean(), rel=1e-10)
                np.testing.assert_allclose(weights, np.full(u.size, 1 / u.size), atol=1e-10)


class TestCvxpyCrossCheck:
    @pytest.mark.parametrize("kind", ["euclidean", "kl"])
    def test_primal_maximization_agrees(self, kind):
        cvxpy = pytest.importorskip("cvxpy")
        rng = np.random.default_rng(24)
        for _ in range(4):
            n = int(rng.integers(3, 10))
            u = rng.normal(0, 1, n)
            p = float(rng.uniform(0.1, 0.8))
            nu = float(10 ** rng.uniform(-0.7, 0.3))
            cap = tail_cap(n, p)
            q = cvxpy.Variable(n)
            if kind == "euclidean":
                penalty = 0.5 * cvxpy.sum_squares(q - 1.0 / n)
            else:
                penalty = -cvxpy.sum(cvxpy.entr(q)) + cvxpy.sum(cvxpy.multiply(q, np.log(n) * np.ones(n)))
            problem = cvxpy.Problem(cvxpy.Maximize(u @ q - nu * penalty),
                                    [q >= 0, q <= cap, cvxpy.sum(q) == 1])
            problem.solve(solver="CLARABEL")
            value, weights = smoothed_superquantile(u, SmoothingSpec(kind, nu), p)
            assert problem.value == pytest.approx(value, abs=2e-6)
            np.testing.assert_allclose(np.asarray(q.value).ravel(), weights, atol=2e-5)


class TestPositivePartSmoothing:
    @pytest.mark.parametrize("kind", ["euclidean", "kl"])
    def test_scaling_identity_with_conjugate(self, kind):
        # rescaling the divergence from [0, cap] to [0, 1] multiplies the
        # conjugate by n(1-p); the two routes use different arithmetic
        for (n, p, nu) in [(7, 0.3, 0.5), (20, 0.9, 0.05), (3, 0.0, 2.0), (50, 0.77, 1e-2)]:
            spec = SmoothingSpec(kind, nu)
            s = np.linspace(-6.0, 6.0, 2001) * max(1.0, nu)
            lhs = n * (1.0 - p) * scalar_conjugate(s, spec, n, p)
            rhs = smoothed_positive_part(s, spec, n, p)
            np.testing.assert_allclose(lhs, rhs, rtol=1e-12, atol=1e-12)

    def test_euclidean_negative_limit(self):
        n, p, nu = 6, 0.4, 1.3
        spec = SmoothingSpec("euclidean", nu)
        floor = -nu * (1.0 - p) / (2.0 * n)
        assert smoothed_positive_part(-50.0, spec, n, p) == pytest.approx(floor, abs=1e-15)
        # grid-search confirmation of the constrained maximum
        c = n * (1 - p)
        reference = grid_max(lambda t: -50.0 * t - nu * (t - (1 - p)) ** 2 / (2 * c), 0.0, 1.0)
        assert smoothed_positive_part(-50.0, spec, n, p) == pytest.approx(reference, abs=1e-9)

    def test_slope_one_regime(self):
        n, p, nu = 5, 0.6, 0.8
        spec = SmoothingSpec("euclidean", nu)
        big = np.array([5.0, 9.0, 40.0])
        vals = smoothed_positive_part(big, spec, n, p)
        diffs = vals - big
        np.testing.assert_allclose(diffs, diffs[0], atol=1e-12)

    @pytest.mark.parametrize("kind", ["euclidean", "kl"])
    def test_min_form_reproduces_smoothed_superquantile(self, kind):
        from scipy.optimize import minimize_scalar
        rng = np.random.default_rng(25)
        for _ in range(25):
            n = int(rng.integers(2, 30))
            u = rng.normal(0, 3, n)
            p = float(rng.uniform(0.05, 0.95))
            nu = float(10 ** rng.uniform(-2, 0.5))
            spec = SmoothingSpec(kind, nu)
            value, _ = smoothed_superquantile(u, spec, p)
            c = n * (1.0 - p)
            result = minimize_scalar(
                lambda eta: eta + smoothed_positive_part(u - eta, spec, n, p).sum() / c,
                bounds=(float(u.min()) - 3 * nu - 1, float(u.max()) + 3 * nu + 1),
                method="bounded", options={"xatol": 1e-12})
            assert relative_gap(result.fun, value) < 1e-9


class TestConvolutionSmoothing:
    def test_logistic_is_softplus(self):
        dens = DensitySpec("logistic")
        etas = np.linspace(-30, 30, 301)
        np.testing.assert_allclose(conv_smoothed_positive_part(etas, dens, 1.0),
                                   np.logaddexp(0.0, etas), rtol=1e-14)

    def test_symmetric_density_at_zero(self):
        # value at zero is half the mean absolute deviation of the mollifier
        assert conv_smoothed_positive_part(0.0, DensitySpec("logistic"), 1.0) == pytest.approx(math.log(2.0))
        assert conv_smoothed_positive_part(0.0, DensitySpec("gaussian"), 1.0) == \
            pytest.approx(1.0 / math.sqrt(2 * math.pi), rel=1e-12)
        assert conv_smoothed_positive_part(0.0, DensitySpec("uniform", -1, 1), 1.0) == pytest.approx(0.25)

    @pytest.mark.parametrize("kind,a,b", [("logistic", 0, 0), ("gaussian", 0, 0),
                                          ("uniform", -1.0, 1.0), ("uniform", -0.3, 2.0)])
    def test_matches_quadrature(self, kind, a, b):
        dens = DensitySpec(kind, a, b) if kind == "uniform" else DensitySpec(kind)
        for nu in (0.2, 1.0, 2.5):
            for x in np.linspace(-5, 5, 21):
                closed = conv_smoothed_positive_part(float(x), dens, nu)
                quadrature = conv_smoothed_positive_part_quadrature(float(x), dens, nu)
                assert closed == pytest.approx(quadrature, abs=1e-9)

    def test_pointwise_limit_to_positive_part(self):
        for kind in ("logistic", "gaussian"):
            dens = DensitySpec(kind)
            for x in (-3.0, -0.5, 0.7, 4.0):
                assert conv_smoothed_positive_part(x, dens, 1e-8) == pytest.approx(max(x, 0.0), abs=1e-7)

    def test_convex_and_above_positive_part(self):
        xs = np.linspace(-4, 4, 401)
        for kind in ("logistic", "gaussian"):
            vals = conv_smoothed_positive_part(xs, DensitySpec(kind), 0.7)
            assert np.all(np.diff(vals, 2) >= -1e-12)
            assert np.all(vals >= np.maximum(xs, 0.0) - 1e-12)

    def test_unknown_density_rejected(self):
        with pytest.raises(ValueError, match="unknown density"):
            DensitySpec("laplace")


class TestDensityDivergenceConversions:
    def test_logistic_divergence_is_binary_entropy(self):
        dbar = divergence_from_density(DensitySpec("logistic"))
        t = np.linspace(1e-9, 1 - 1e-9, 501)
        expected = t * np.log(t) + (1 - t) * np.log1p(-t)
        np.testing.assert_allclose(dbar(t), expected, atol=1e-12)
        assert dbar(0.5) == pytest.approx(-math.log(2.0))
        assert dbar(0.0) == 0.0
        assert dbar(1.0) == 0.0

    @pytest.mark.parametrize("kind,a,b", [("logistic", 0, 0), ("gaussian", 0, 0),
                                          ("uniform", -1.0, 1.0)])
    def test_conjugacy_recovers_convolution(self, kind, a, b):
        dens = DensitySpec(kind, a, b) if kind == "uniform" else DensitySpec(kind)
        dbar = divergence_from_density(dens)
        grid = np.linspace(0.0, 1.0, 4001)
        penalties = dbar(grid)
        for x in np.linspace(-8, 8, 33):
            candidates = x * grid - penalties
            stationary = float(dens.cdf(x))
            best = max(float(candidates.max()), x * stationary - float(dbar(stationary)))
            assert best == pytest.approx(conv_smoothed_positive_part(float(x), dens, 1.0), abs=1e-7)

    def test_softplus_entropy_conjugacy_from_sigmoid(self):
        dbar = divergence_from_density(DensitySpec("logistic"))
        etas = np.linspace(-30, 30, 601)
        t_star = 1.0 / (1.0 + np.exp(-etas))
        inner = etas * t_star - dbar(t_star)
        np.testing.assert_allclose(inner, np.logaddexp(0.0, etas), atol=1e-8)

    def test_domain_check(self):
        dbar = divergence_from_density(DensitySpec("logistic"))
        with pytest.raises(ValueError, match=r"\[0, 1\]"):
            dbar(1.5)


class TestDensityFromSmoothing:
    def test_euclidean_reconstruction(self):
        for (n, p, nu) in [(5, 0.4, 1.0), (30, 0.9, 0.3), (4, 0.0, 1.0), (12, 0.75, 2.0)]:
            spec = SmoothingSpec("euclidean", nu)
            dens = density_from_smoothing(spec, n, p)
            lo, hi = dens.support
            assert lo == pytest.approx(-nu / n, rel=1e-15)
            assert hi == pytest.approx(nu * p / (n * (1 - p)), rel=1e-15, abs=1e-15)
            mass = dens.height * (hi - lo)
            assert mass == pytest.approx(1.0, rel=1e-12)
            assert dens.max_reconstruction_error <= 1e-4
            assert dens.tail_value == pytest.approx(-nu * (1 - p) / (2 * n), rel=1e-15)

    def test_pdf_support(self):
        dens = density_from_smoothing(SmoothingSpec("euclidean", 1.0), 5, 0.4)
        lo, hi = dens.support
        assert dens.pdf(0.5 * (lo + hi)) == dens.height
        assert dens.pdf(lo - 1.0) == 0.0
        assert dens.pdf(hi + 1.0) == 0.0

    def test_kl_rejected(self):
        with pytest.raises(ValueError, match="euclidean"):
            density_from_smoothing(SmoothingSpec("kl", 1.0), 5, 0.4)


class TestDualObjectiveHelpers:
    def test_objective_value_at_solution_matches(self):
        rng = np.random.default_rng(26)
        u = rng.normal(0, 1, 21)
        spec = SmoothingSpec("euclidean", 0.3)
        sol = solve_dual_1d(u, spec, 0.6)
        assert dual_objective(sol.threshold, u, spec, 0.6) == pytest.approx(sol.value, rel=1e-14)
