"""Semilinear layer: Nemytsky operator, Picard fixed point, shell solver.

The fixed-point map composes the Poisson solution map with the Nemytsky
operator; damped Picard iteration drives h_{k+1} = (1-theta) h_k
+ theta N_f(T(h_k)) until the conjugate-norm increment is negligible.
The shell solver splits the interior into contiguous equal-measure blocks
and performs sequential block solves, sweeping until the global semilinear
residual meets its target.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .checks import CheckResult
from .exponents import (ExponentError, ExponentField, ScalarExponent, conjugate_exponent,
                        trace_exponent)
from .lebesgue import GridFunction, luxemburg_norm
from .mesh_kernel import KernelWeights, Mesh, restrict_interior
from .poisson import (PoissonProblem, PoissonSolution, energy as poisson_energy,
                      energy_gradient, initial_guess, solve_poisson)
from .sobolev import DirichletPair


class GrowthError(ValueError):
    """Nonlinearity rejected by the sampled growth screen."""


class NemytskyError(RuntimeError):
    """Nemytsky evaluation produced a non-finite value."""


class DecompositionError(RuntimeError):
    def __init__(self, shell: int, sweep: int, message: str):
        super().__init__(f"shell {shell} (sweep {sweep}): {message}")
        self.shell = shell
        self.sweep = sweep


@dataclass(frozen=True)
class Nonlinearity:
    """Carathéodory-type right-hand side f(x, t) with declared growth data."""

    evaluator: object
    a: GridFunction
    c_growth: float

    def __post_init__(self):
        if self.c_growth < 0:
            raise GrowthError("growth constant must be nonnegative")
        if np.any(self.a.values < 0):
            raise GrowthError("growth offset a(x) must be nonnegative")

    def __call__(self, x, t):
        return self.evaluator(x, t)


def _default_t_lattice() -> np.ndarray:
    mags = np.logspace(-3, 3, 25)
    return np.concatenate([-mags[::-1], [0.0], mags])


def growth_screen(f: Nonlinearity, mesh: Mesh, p: ExponentField,
                  t_lattice: np.ndarray | None = None,
                  tol: float = 1e-12) -> CheckResult:
    """Sampled check of |f(x,t)| <= a(x) + C |t|^{pbar(x)-1} on interior cells."""
    centers = mesh.cell_centers[mesh.interior_mask]
    pbar = p.trace_values(centers)
    avals = f.a.values[mesh.interior_mask]
    ts = _default_t_lattice() if t_lattice is None else np.asarray(t_lattice, dtype=float)
    fv = np.asarray(f.evaluator(centers[:, None], ts[None, :]), dtype=float)
    fv = fv * np.ones((centers.size, ts.size))
    if not np.all(np.isfinite(fv)):
        raise NemytskyError("nonlinearity produced non-finite values on the screen lattice")
    bound = avals[:, None] + f.c_growth * np.abs(ts[None, :]) ** (pbar[:, None] - 1.0)
    defect = float(np.max(np.abs(fv) - bound))
    return CheckResult(
        name="growth_screen",
        passed=defect <= tol,
        value=defect,
        bound=0.0,
        slack=-defect,
    )


def require_growth(f: Nonlinearity, mesh: Mesh, p: ExponentField) -> None:
    check = growth_screen(f, mesh, p)
    if not check.passed:
        raise GrowthError(
            f"nonlinearity violates the growth bound by {check.value:.3e} on the sample lattice"
        )


def nemytsky(f: Nonlinearity, u: GridFunction) -> GridFunction:
    """(N_f u)_i = f(x_i, u_i) on interior cells, zero elsewhere."""
    mesh = u.mesh
    mask = mesh.interior_mask
    out = np.zeros(mesh.n_cells)
    vals = np.asarray(f.evaluator(mesh.cell_centers[mask], u.values[mask]), dtype=float)
    vals = vals * np.ones(int(mask.sum()))
    bad = ~np.isfinite(vals)
    if bad.any():
        cell = int(np.where(mask)[0][np.argmax(bad)])
        raise NemytskyError(f"non-finite Nemytsky output at cell {cell}")
    out[mask] = vals
    return GridFunction(mesh, out)


def gamma_exponent(r: ScalarExponent, p: ExponentField) -> ScalarExponent:
    """gamma(x) = pbar(x) r(x) / (r(x) - pbar(x)); needs r > pbar pointwise.

    Since gamma = 1/(1/pbar - 1/r), its declared range follows from the
    extreme combinations of the constituent bounds.
    """
    pbar = trace_exponent(p)
    gap_min = 1.0 / p.p_plus - 1.0 / r.lower
    gap_max = 1.0 / p.p_minus - 1.0 / r.upper
    if gap_min <= 0.0:
        raise ExponentError(
            f"gamma exponent needs r- > pbar+ on declared bounds (r- = {r.lower}, "
            f"pbar+ <= {p.p_plus})"
        )

    def ev(x):
        pv = pbar.evaluator(x)
        rv = r.evaluator(x)
        return pv * rv / (rv - pv)

    return ScalarExponent(evaluator=ev, lower=1.0 / gap_max, upper=1.0 / gap_min)


def measure_constant(mesh: Mesh, gamma: ScalarExponent, region=None) -> float:
    """C_Omega = 2 max(|O|^(1/gamma+), |O|^(1/gamma-)) on the region."""
    mask = mesh.interior_mask if region is None else np.asarray(region, dtype=bool)
    measure = float(mask.sum()) * mesh.cell_width
    gvals = gamma.values(mesh.cell_centers[mask])
    g_lo, g_hi = float(gvals.min()), float(gvals.max())
    return 2.0 * max(measure ** (1.0 / g_hi), measure ** (1.0 / g_lo))


def _bound_bracket(f: Nonlinearity, u: GridFunction, r: ScalarExponent,
                   p: ExponentField, mesh: Mesh) -> tuple[float, float]:
    """Returns (||N_f u||_{r'}, bracket) with the constant factored out."""
    mask = mesh.interior_mask
    rc = conjugate_exponent(r)
    lhs = luxemburg_norm(nemytsky(f, u), rc, mask)
    pbar = trace_exponent(p)
    pbar_c = conjugate_exponent(pbar)
    a_norm = luxemburg_norm(f.a, pbar_c, mask)
    c_om = measure_constant(mesh, gamma_exponent(r, p))
    u_norm = luxemburg_norm(u, r, mask)
    pm = p.pair_matrix(mesh.cell_centers)
    p_minus, p_plus = float(pm.min()), float(pm.max())
    bracket = a_norm + (c_om * u_norm) ** (p_plus - 1.0) + (c_om * u_norm) ** (p_minus - 1.0)
    return lhs, bracket


def calibrate_nemytsky_constant(f: Nonlinearity, r: ScalarExponent, p: ExponentField,
                                mesh: Mesh, rng: np.random.Generator,
                                n_samples: int = 64, headroom: float = 1.05) -> float:
    """Freeze the bound constant as the worst calibration ratio plus headroom.

    The calibration family spans amplitudes 1e-3..1e3 so both power regimes
    of the bracket are exercised before the constant is frozen.
    """
    worst = 0.0
    scales = np.logspace(-3, 3, n_samples)
    for scale in scales:
        raw = np.zeros(mesh.n_cells)
        raw[mesh.interior_mask] = scale * rng.standard_normal(int(mesh.interior_mask.sum()))
        lhs, bracket = _bound_bracket(f, GridFunction(mesh, raw), r, p, mesh)
        if bracket > 0:
            worst = max(worst, lhs / bracket)
    return worst * headroom if worst > 0 else headroom


def nemytsky_bound_check(f: Nonlinearity, u: GridFunction, r: ScalarExponent,
                         p: ExponentField, c_frozen: float,
                         tol: float = 1e-12) -> CheckResult:
    """||N_f u||_{r'} <= C (||a||_{pbar'} + (C_Om ||u||_r)^{p+-1} + (C_Om ||u||_r)^{p--1})."""
    lhs, bracket = _bound_bracket(f, u, r, p, u.mesh)
    bound = c_frozen * bracket
    return CheckResult(
        name="nemytsky_bound",
        passed=lhs <= bound + tol,
        value=lhs,
        bound=bound,
        slack=bound - lhs,
    )


@dataclass
class FixedPointTrace:
    iterates: list[tuple[float, float, float]] = field(default_factory=list)
    theta: float = 0.5
    converged: bool = False
    residual: float = np.inf
    h_star: GridFunction | None = None

    @property
    def final_increment(self) -> float:
        return self.iterates[-1][1] if self.iterates else np.inf


@dataclass(frozen=True)
class BallRadius:
    value: float
    feasible: bool
    denominator: float


def invariant_ball_radius(c_bound: float, a_norm: float, k1: float, k2: float,
                          c_omega: float, p_minus: float, p_plus: float) -> BallRadius:
    """Radius of the invariant ball for the fixed-point map.

    M = (C (||a|| + K1 c^{p+-1} + K1 c^{p--1}) /
         (1 - K2 (c^{p+-1} + c^{p--1})))^{(p--1)/(p+-1)},
    infeasible when the denominator is not positive (domain not small
    enough for these constants).
    """
    powers = c_omega ** (p_plus - 1.0) + c_omega ** (p_minus - 1.0)
    denom = 1.0 - k2 * powers
    if denom <= 0.0:
        return BallRadius(value=np.inf, feasible=False, denominator=denom)
    numer = c_bound * (a_norm + k1 * c_omega ** (p_plus - 1.0) + k1 * c_omega ** (p_minus - 1.0))
    value = (numer / denom) ** ((p_minus - 1.0) / (p_plus - 1.0))
    return BallRadius(value=float(value), feasible=True, denominator=float(denom))


def fixed_point_solve(f: Nonlinearity, prob_template: PoissonProblem,
                      g: GridFunction | None = None, theta: float = 0.5,
                      max_iter: int = 200, tol: float = 1e-8,
                      residual_tol: float = 1e-6,
                      theta_min: float = 1e-3) -> tuple[PoissonSolution, FixedPointTrace]:
    """Damped Picard iteration for h = N_f(T(h)).

    Starts from h0 = N_f applied to the datum-filled grid; halves the
    damping when the increment norm grows twice in a row.  Non-convergence
    is returned in the trace, never raised: the caller may retry with a
    smaller damping factor.
    """
    if not (0.0 < theta <= 1.0):
        raise ValueError("damping theta must lie in (0, 1]")
    prob = prob_template if g is None else prob_template.with_g(g)
    require_growth(f, prob.mesh, prob.p)
    mask = prob.mesh.interior_mask
    rc = conjugate_exponent(prob.r)

    def inc_norm(values):
        return luxemburg_norm(GridFunction(prob.mesh, values), rc, mask)

    h = nemytsky(f, initial_guess(prob))
    trace = FixedPointTrace(theta=theta)
    warm = None
    sol = None
    grew = 0
    prev_inc = np.inf
    cap = None
    for _ in range(max_iter):
        sol = solve_poisson(prob.with_h(h), initial=warm)
        if not sol.converged:
            trace.h_star = h
            return sol, trace
        warm = sol.u.u
        target = nemytsky(f, sol.u.u)
        new_vals = (1.0 - theta) * h.values + theta * target.values
        delta = np.zeros_like(new_vals)
        delta[mask] = new_vals[mask] - h.values[mask]
        inc = inc_norm(delta)
        trace.iterates.append((inc_norm(h.values), inc, sol.el_residual))
        h = GridFunction(prob.mesh, new_vals)
        if cap is None:
            cap = max(1.0, inc) * 1e12
        if not np.isfinite(inc) or inc > cap:
            trace.h_star = h
            trace.converged = False
            return sol, trace
        if inc <= tol:
            trace.converged = True
            break
        if inc > prev_inc:
            grew += 1
            if grew >= 2 and theta > theta_min:
                theta = max(theta / 2.0, theta_min)
                trace.theta = theta
                grew = 0
        else:
            grew = 0
        prev_inc = inc
    trace.h_star = h
    if not trace.converged:
        return sol, trace
    final = solve_poisson(prob.with_h(h), initial=warm)
    residual_grid = energy_gradient(final.u, prob.with_h(nemytsky(f, final.u.u)))
    residual = float(np.max(np.abs(residual_grid.values[mask])))
    trace.residual = residual
    trace.converged = final.converged and residual <= residual_tol
    return final, trace


def shell_partition(mesh: Mesh, shells: int) -> list[np.ndarray]:
    """Split interior cells into contiguous left-to-right equal-count blocks."""
    if shells < 1:
        raise ValueError("need at least one shell")
    idx = mesh.interior_indices
    if shells > idx.size:
        raise ValueError(f"cannot split {idx.size} interior cells into {shells} shells")
    masks = []
    for block in np.array_split(idx, shells):
        m = np.zeros(mesh.n_cells, dtype=bool)
        m[block] = True
        masks.append(m)
    return masks


@dataclass
class DecompositionReport:
    shell_measures: list[float]
    sweeps: int
    residual: float
    converged: bool
    shell_traces: list[list[FixedPointTrace]] = field(default_factory=list)


def solve_by_decomposition(f: Nonlinearity, g: GridFunction, shells: int,
                           prob_template: PoissonProblem, theta: float = 0.5,
                           max_iter: int = 200, tol: float = 1e-8,
                           residual_target: float = 1e-6,
                           max_sweeps: int = 200) -> tuple[PoissonSolution, DecompositionReport]:
    """Sequential shell solves with the freshest global field as exterior data.

    Each sweep solves the semilinear problem on every shell in turn, the
    previous iterate supplying the exterior values; sweeps repeat until the
    global residual meets the target (one sweep suffices in the degenerate
    single-shell case).  Per-shell non-convergence aborts with the shell
    index.
    """
    prob = prob_template.with_g(g)
    require_growth(f, prob.mesh, prob.p)
    masks = shell_partition(prob.mesh, shells)
    dx = prob.mesh.cell_width
    report = DecompositionReport(
        shell_measures=[float(m.sum()) * dx for m in masks],
        sweeps=0,
        residual=np.inf,
        converged=False,
    )
    current = initial_guess(prob).values.copy()
    mask_all = prob.mesh.interior_mask

    def global_residual(values):
        u = GridFunction(prob.mesh, values)
        grad = energy_gradient(u, prob.with_h(nemytsky(f, u)))
        return float(np.max(np.abs(grad.values[mask_all])))

    sub_meshes = [restrict_interior(prob.mesh, m) for m in masks]
    sub_weights = [
        KernelWeights(mesh=sm, w=prob.weights.w, p_pair=prob.weights.p_pair,
                      tail=prob.weights.tail)
        for sm in sub_meshes
    ]
    for sweep in range(1, max_sweeps + 1):
        sweep_traces = []
        for j, (sm, sw) in enumerate(zip(sub_meshes, sub_weights)):
            sub_g = GridFunction(sm, current)
            sub_prob = PoissonProblem(
                mesh=sm, weights=sw, p=prob.p, r=prob.r,
                h=GridFunction(sm, np.zeros(sm.n_cells)), g=sub_g,
                tolerances=prob.tolerances,
            )
            sol_j, trace_j = fixed_point_solve(
                f, sub_prob, theta=theta, max_iter=max_iter, tol=tol,
            )
            if not trace_j.converged:
                raise DecompositionError(j, sweep, "fixed-point iteration did not converge")
            current = sol_j.u.u.values.copy()
            sweep_traces.append(trace_j)
        report.shell_traces.append(sweep_traces)
        report.sweeps = sweep
        report.residual = global_residual(current)
        if report.residual <= residual_target:
            report.converged = True
            break

    u = DirichletPair(u=GridFunction(prob.mesh, current), g=prob.g)
    h_final = nemytsky(f, u.u)
    solution = PoissonSolution(
        u=u,
        energy=poisson_energy(u, prob.with_h(h_final)),
        el_residual=report.residual,
        iterations=report.sweeps,
        converged=report.converged,
    )
    return solution, report
