import numpy as np
import pytest

from fpxlap import (GridFunction, PoissonProblem, Tolerances, assemble_weights,
                    energy, energy_gradient, gagliardo_modular, lr_estimate_check,
                    luxemburg_norm, minimizer_equivalence_check, solve_poisson, weak_form)
from fpxlap.exponents import conjugate_exponent
from fpxlap.poisson import initial_guess

from util import bump_pair, const_pair, const_scalar, grid, random_w0


def make_problem(mesh, p, r_value, h_vals, g_vals, **tol):
    W = assemble_weights(mesh, p)
    return PoissonProblem(
        mesh=mesh, weights=W, p=p, r=const_scalar(r_value),
        h=grid(mesh, h_vals), g=grid(mesh, g_vals),
        tolerances=Tolerances(**tol) if tol else Tolerances(),
    )


@pytest.fixture
def linear_problem(mesh64):
    return make_problem(mesh64, const_pair(2.0, 0.4), 3.0,
                        np.ones(64), np.zeros(64))


class TestEnergy:
    def test_zero_data_zero_energy(self, linear_problem, mesh64):
        zero = GridFunction.zeros(mesh64)
        prob = linear_problem.with_h(zero)
        assert energy(zero, prob) == 0.0

    def test_nonnegative_without_source(self, linear_problem, mesh64, rng):
        prob = linear_problem.with_h(GridFunction.zeros(mesh64))
        for _ in range(20):
            u = grid(mesh64, rng.standard_normal(64))
            assert energy(u, prob) >= 0.0
        const = grid(mesh64, np.full(64, 2.0))
        assert energy(const, prob) > 0.0  # tails see constants

    def test_lower_bound_by_modular(self, mesh64, rng):
        p = bump_pair(2.0, 0.5, s=0.25)
        prob = make_problem(mesh64, p, 3.2, rng.standard_normal(64), np.zeros(64))
        dx = mesh64.cell_width
        for _ in range(20):
            u = grid(mesh64, rng.standard_normal(64))
            source = dx * float(np.sum(prob.h.values[mesh64.interior_mask]
                                       * u.values[mesh64.interior_mask]))
            lower = gagliardo_modular(u, prob.weights) / prob.weights.p_plus - source
            assert energy(u, prob) >= lower - 1e-12


class TestGradient:
    def test_zero_field_zero_source(self, mesh64):
        prob = make_problem(mesh64, const_pair(2.0, 0.4), 3.0, np.zeros(64), np.zeros(64))
        g = energy_gradient(GridFunction.zeros(mesh64), prob)
        assert np.all(g.values == 0.0)

    def test_matches_central_differences(self, mesh64, rng):
        p = bump_pair(2.0, 0.5, s=0.25)
        prob = make_problem(mesh64, p, 3.2, rng.standard_normal(64),
                            0.3 * rng.standard_normal(64))
        base = prob.g.values.copy()
        base[mesh64.interior_mask] = rng.standard_normal(int(mesh64.interior_mask.sum()))
        u0 = grid(mesh64, base)
        gvals = energy_gradient(u0, prob).values
        step = 1e-6
        for _ in range(20):
            d = random_w0(rng, mesh64).values
            d /= np.linalg.norm(d)
            ep = energy(grid(mesh64, u0.values + step * d), prob)
            em = energy(grid(mesh64, u0.values - step * d), prob)
            fd = (ep - em) / (2 * step)
            an = float(gvals @ d)
            assert fd == pytest.approx(an, rel=1e-5)

    def test_linearity_for_p_two(self, mesh64, rng):
        prob = make_problem(mesh64, const_pair(2.0, 0.4), 3.0,
                            rng.standard_normal(64), np.zeros(64))
        u = random_w0(rng, mesh64)
        v = random_w0(rng, mesh64)
        zero = GridFunction.zeros(mesh64)
        gu = energy_gradient(u, prob).values
        gv = energy_gradient(v, prob).values
        g0 = energy_gradient(zero, prob).values
        gsum = energy_gradient(grid(mesh64, u.values + v.values), prob).values
        # the source offset enters every gradient once
        assert np.allclose(gsum, gu + gv - g0, rtol=1e-10, atol=1e-12)


class TestSolve:
    def test_zero_data_gives_zero(self, mesh64):
        prob = make_problem(mesh64, const_pair(2.0, 0.4), 3.0, np.zeros(64), np.zeros(64))
        sol = solve_poisson(prob)
        assert sol.converged
        assert np.allclose(sol.u.u.values, 0.0, atol=1e-12)
        assert sol.energy == pytest.approx(0.0, abs=1e-15)

    def test_weak_form_residual_certificate(self, mesh64, rng):
        p = bump_pair(2.0, 0.5, s=0.25)
        prob = make_problem(mesh64, p, 3.2, rng.standard_normal(64),
                            0.2 * rng.standard_normal(64))
        sol = solve_poisson(prob)
        assert sol.converged
        dx = mesh64.cell_width
        interior = np.where(mesh64.interior_mask)[0]
        for k in interior[::7]:
            phi = grid(mesh64, np.eye(64)[k])
            res = weak_form(sol.u.u, phi, prob.weights) - dx * prob.h.values[k]
            assert abs(res) <= prob.tolerances.el_residual * 1.001

    def test_uniqueness_two_initializations(self, mesh64, rng):
        for pval, s in ((1.5, 0.5), (2.0, 0.4), (3.0, 0.28)):
            prob = make_problem(mesh64, const_pair(pval, s), pval + 0.9,
                                rng.standard_normal(64), 0.2 * rng.standard_normal(64))
            inits = []
            for _ in range(2):
                vals = prob.g.values.copy()
                vals[mesh64.interior_mask] = rng.standard_normal(int(mesh64.interior_mask.sum()))
                inits.append(grid(mesh64, vals))
            s1 = solve_poisson(prob, initial=inits[0])
            s2 = solve_poisson(prob, initial=inits[1])
            assert s1.converged and s2.converged
            assert np.max(np.abs(s1.u.u.values - s2.u.u.values)) < 1e-6

    def test_energy_monotone_along_iterates(self, mesh64, rng):
        p = bump_pair(2.0, 0.5, s=0.25)
        prob = make_problem(mesh64, p, 3.2, rng.standard_normal(64), np.zeros(64))
        sol = solve_poisson(prob, record_history=True)
        hist = np.asarray(sol.energy_history)
        assert sol.converged
        drops = np.diff(hist)
        assert np.all(drops <= 1e-12 * (1.0 + np.abs(hist[:-1])))

    def test_g_shift_translation_no_tails(self, mesh64, rng):
        # with tails suppressed and constant p, shifting g by c shifts u by c
        p = const_pair(2.0, 0.4)
        W = assemble_weights(mesh64, p).suppress_tails()
        h = grid(mesh64, rng.standard_normal(64))
        g0 = grid(mesh64, 0.3 * rng.standard_normal(64))
        base = PoissonProblem(mesh=mesh64, weights=W, p=p, r=const_scalar(3.0), h=h, g=g0)
        shifted = base.with_g(grid(mesh64, g0.values + 2.5))
        s0 = solve_poisson(base)
        s1 = solve_poisson(shifted)
        assert s0.converged and s1.converged
        assert np.allclose(s1.u.u.values, s0.u.u.values + 2.5, atol=1e-7)

    def test_coercivity_along_rays(self, mesh64, rng):
        p = bump_pair(2.0, 0.5, s=0.25)
        prob = make_problem(mesh64, p, 3.2, rng.standard_normal(64), np.zeros(64))
        for _ in range(20):
            v = random_w0(rng, mesh64)
            energies = [energy(grid(mesh64, t * v.values), prob) for t in (10.0, 100.0, 1000.0)]
            assert energies[0] < energies[1] < energies[2]

    def test_nonconvergence_is_reported(self, mesh64):
        prob = make_problem(mesh64, const_pair(2.0, 0.4), 3.0,
                            np.ones(64), np.zeros(64), el_residual=1e-8, step=1e-20,
                            max_iter=1)
        sol = solve_poisson(prob)
        assert not sol.converged
        assert sol.iterations == 1


class TestEquivalence:
    def test_minimizer_passes(self, mesh64, rng):
        p = bump_pair(2.0, 0.5, s=0.25)
        prob = make_problem(mesh64, p, 3.2, rng.standard_normal(64),
                            0.2 * rng.standard_normal(64))
        sol = solve_poisson(prob)
        check = minimizer_equivalence_check(sol, prob, trials=100, rng=rng)
        assert check.passed

    def test_perturbed_field_fails(self, mesh64, rng):
        prob = make_problem(mesh64, const_pair(2.0, 0.4), 3.0,
                            np.ones(64), np.zeros(64))
        sol = solve_poisson(prob)
        bad = sol.u.u.values.copy()
        bad[mesh64.interior_mask] += 0.05
        sol.u.u.values[:] = bad
        check = minimizer_equivalence_check(sol, prob, trials=200, rng=rng)
        assert not check.passed


class TestEstimate:
    def test_zero_family_feasible_at_origin(self, mesh64):
        prob = make_problem(mesh64, const_pair(2.0, 0.4), 3.0, np.zeros(64), np.zeros(64))
        family = [GridFunction.zeros(mesh64) for _ in range(8)]
        report = lr_estimate_check(family, prob, prob.g)
        assert report.feasible and report.holdout_passed
        assert report.k1 == pytest.approx(0.0, abs=1e-12)
        assert report.k2 == pytest.approx(0.0, abs=1e-12)

    def test_scaled_family_linear_case(self, mesh64):
        # p constant: (p+-1)/(p--1) = 1, u scales linearly with h, so the
        # bound is affine and the holdout must pass
        base = np.cos(2.0 * mesh64.cell_centers)
        family = [grid(mesh64, k * base) for k in np.linspace(0.25, 4.0, 16)]
        prob = make_problem(mesh64, const_pair(2.0, 0.4), 3.0, np.zeros(64), np.zeros(64))
        report = lr_estimate_check(family, prob, prob.g)
        assert report.feasible
        assert report.holdout_passed
        # linearity: a_k proportional to b_k, intercept negligible
        a, b = np.array(report.train_pairs).T
        ratio = a / b
        assert np.allclose(ratio, ratio[0], rtol=1e-6)

    def test_norm_scaling_sanity(self, mesh64):
        prob = make_problem(mesh64, const_pair(2.0, 0.4), 3.0,
                            np.ones(64), np.zeros(64))
        sol = solve_poisson(prob)
        r = prob.r
        rc = conjugate_exponent(r)
        un = luxemburg_norm(sol.u.u, r, mesh64.interior_mask)
        hn = luxemburg_norm(prob.h, rc, mesh64.interior_mask)
        assert un > 0 and hn > 0


class TestContinuity:
    def test_solution_map_continuity(self, mesh64, rng):
        p = const_pair(2.0, 0.4)
        prob = make_problem(mesh64, p, 3.0, np.zeros(64), 0.1 * rng.standard_normal(64))
        h0 = grid(mesh64, rng.standard_normal(64))
        u0 = solve_poisson(prob.with_h(h0)).u.u
        r = prob.r
        for _ in range(5):
            direction = rng.standard_normal(64)
            dists = []
            for delta in (0.4, 0.2, 0.1, 0.05):
                hn = grid(mesh64, h0.values + delta * direction)
                un = solve_poisson(prob.with_h(hn)).u.u
                diff = grid(mesh64, un.values - u0.values)
                dists.append(luxemburg_norm(diff, r, mesh64.interior_mask))
            assert all(a > b for a, b in zip(dists, dists[1:]))
            # linear problem: distance is proportional to the perturbation size
            assert dists[-1] == pytest.approx(0.125 * dists[0], rel=1e-3)


class TestInitialGuess:
    def test_mean_fill(self, mesh64, rng):
        g = grid(mesh64, rng.standard_normal(64))
        prob = make_problem(mesh64, const_pair(2.0, 0.4), 3.0, np.zeros(64), g.values)
        start = initial_guess(prob)
        ext = mesh64.exterior_mask
        assert np.array_equal(start.values[ext], g.values[ext])
        assert np.allclose(start.values[mesh64.interior_mask], g.values[ext].mean())
