"""Poisson solution map: convex energy minimization over the Dirichlet class.

The energy of a field u equal to g on exterior cells is

    E(u) = sum_{i<j} 2 w_ij |u_i-u_j|^{p_ij} / p_ij
           + 2 dx sum_i tail_i |u_i|^{pbar_i} / pbar_i
           - dx sum_{i interior} h_i u_i,

strictly convex in the interior unknowns, minimized by damped lagged-weight
linearization with Armijo backtracking.  The gradient component at an
interior cell equals the weak-form residual against that cell's indicator,
so the stopping rule certifies the discrete Euler-Lagrange equations
directly.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .checks import CheckResult, EstimateReport
from .exponents import ExponentField, ScalarExponent, conjugate_exponent, trace_exponent, validate_growth_pair
from .lebesgue import GridFunction, luxemburg_norm
from .mesh_kernel import KernelWeights, Mesh
from .sobolev import DirichletPair, _abs_pow, _signed_pow, full_norm, weak_form


@dataclass(frozen=True)
class Tolerances:
    el_residual: float = 1e-8
    step: float = 1e-20
    max_iter: int = 50_000

    def __post_init__(self):
        if self.el_residual <= 0 or self.step <= 0 or self.max_iter <= 0:
            raise ValueError("tolerances must be positive")


@dataclass(frozen=True)
class PoissonProblem:
    mesh: Mesh
    weights: KernelWeights
    p: ExponentField
    r: ScalarExponent
    h: GridFunction
    g: GridFunction
    tolerances: Tolerances = Tolerances()

    def __post_init__(self):
        if not validate_growth_pair(self.r, self.p, self.mesh):
            raise ValueError("growth pair (r, p) fails pbar+ < r- or r < critical exponent")

    def with_h(self, h: GridFunction) -> "PoissonProblem":
        return replace(self, h=h)

    def with_g(self, g: GridFunction) -> "PoissonProblem":
        return replace(self, g=g)


@dataclass
class PoissonSolution:
    u: DirichletPair
    energy: float
    el_residual: float
    iterations: int
    converged: bool
    energy_history: list[float] = field(default_factory=list)


def _field_values(u) -> np.ndarray:
    return u.u.values if isinstance(u, DirichletPair) else u.values


def energy(u, prob: PoissonProblem) -> float:
    vals = _field_values(u)
    W = prob.weights
    diff = vals[:, None] - vals[None, :]
    pair = float((W.w * _abs_pow(diff, W.p_pair) / W.p_pair).sum())
    dx = prob.mesh.cell_width
    tail = 2.0 * dx * float(np.sum(W.tail * np.abs(vals) ** W.p_bar / W.p_bar))
    mask = prob.mesh.interior_mask
    source = dx * float(np.sum(prob.h.values[mask] * vals[mask]))
    return pair + tail - source


def energy_gradient(u, prob: PoissonProblem) -> GridFunction:
    """First variation with respect to the interior unknowns.

    Component i (interior): 2 sum_j w_ij |u_i-u_j|^{p_ij-2}(u_i-u_j)
    + 2 dx tail_i |u_i|^{pbar_i-2} u_i - dx h_i.  Exterior components are
    constrained and reported as zero.
    """
    vals = _field_values(u)
    W = prob.weights
    diff = vals[:, None] - vals[None, :]
    flux = 2.0 * (W.w * _signed_pow(diff, W.p_pair)).sum(axis=1)
    dx = prob.mesh.cell_width
    grad = flux + 2.0 * dx * W.tail * _signed_pow(vals, W.p_bar) - dx * prob.h.values
    grad[~prob.mesh.interior_mask] = 0.0
    return GridFunction(prob.mesh, grad)


def initial_guess(prob: PoissonProblem) -> GridFunction:
    """Exterior datum with the interior filled by its in-box exterior mean."""
    vals = prob.g.values.copy()
    vals[prob.mesh.interior_mask] = prob.g.values[prob.mesh.exterior_mask].mean()
    return GridFunction(prob.mesh, vals)


def solve_poisson(prob: PoissonProblem, initial: GridFunction | None = None,
                  record_history: bool = False) -> PoissonSolution:
    """Minimize the energy over the interior unknowns.

    Each iteration builds the weighted-graph-Laplacian model of the energy
    with lagged pair weights max(p-1,1) w |u_i-u_j|^{p-2} (floored where
    differences degenerate), solves it by conjugate gradients, and takes the
    resulting direction under Armijo backtracking (sufficient decrease 1e-4,
    halving), so the energy decreases monotonically.  When the energy change
    falls below floating-point resolution, a step is accepted only if it
    still reduces the gradient sup-norm.  Stops when that sup-norm reaches
    tolerances.el_residual; non-convergence is reported through
    ``converged=False``, never silently.
    """
    mesh, W, tol = prob.mesh, prob.weights, prob.tolerances
    interior = mesh.interior_mask
    m = int(interior.sum())
    vals = (initial_guess(prob) if initial is None else initial).values.copy()
    vals[~interior] = prob.g.values[~interior]
    if not np.all(np.isfinite(vals)):
        raise ValueError("non-finite initial field")

    h_int = prob.h.values[interior]
    dx = mesh.cell_width
    w_full, p_full = W.w, W.p_pair
    tail_full, pbar_full = W.tail, W.p_bar
    const_two = bool((p_full == 2.0).all())
    fac_pair = np.maximum(p_full - 1.0, 1.0)
    fac_tail = np.maximum(pbar_full - 1.0, 1.0)

    def energy_of(v):
        diff = v[:, None] - v[None, :]
        e = float((w_full * _abs_pow(diff, p_full) / p_full).sum())
        e += 2.0 * dx * float(np.sum(tail_full * np.abs(v) ** pbar_full / pbar_full))
        e -= dx * float(np.sum(h_int * v[interior]))
        return e

    def gradient_of(v):
        diff = v[interior, None] - v[None, :]
        flux = 2.0 * (w_full[interior] * _signed_pow(diff, p_full[interior])).sum(axis=1)
        return flux + 2.0 * dx * tail_full[interior] * _signed_pow(v[interior], pbar_full[interior]) - dx * h_int

    def model_direction(v, grad, floor_rel):
        diff = np.abs(v[:, None] - v[None, :])
        dmax = float(diff.max())
        scale = max(float(np.abs(v).max()), dmax)
        if const_two or scale == 0.0 or dmax == 0.0:
            # constant field: every pair weight degenerates, use the quadratic model
            om, tau = w_full, tail_full
        else:
            floor_pair = max(1e-13 * scale, floor_rel * dmax)
            floor_tail = max(1e-13 * scale, floor_rel * scale)
            om = fac_pair * w_full * np.maximum(diff, floor_pair) ** (p_full - 2.0)
            tau = fac_tail * tail_full * np.maximum(np.abs(v), floor_tail) ** (pbar_full - 2.0)
        om_rows = om[interior]
        om_core = om_rows[:, interior]
        row_sum = om_rows.sum(axis=1)
        tau_core = tau[interior]

        def matvec(x):
            return 2.0 * (row_sum * x - om_core @ x) + 2.0 * dx * tau_core * x

        d = np.zeros(m)
        resid = -grad.copy()
        direction = resid.copy()
        rs = float(resid @ resid)
        rs0 = max(rs, 1e-300)
        it_cg = 0
        while rs > 1e-24 * rs0 and it_cg < 8 * m:
            ad = matvec(direction)
            dad = float(direction @ ad)
            if dad <= 0.0:
                break
            step = rs / dad
            d += step * direction
            resid -= step * ad
            rs_new = float(resid @ resid)
            direction = resid + (rs_new / rs) * direction
            rs = rs_new
            it_cg += 1
        return d

    e_now = energy_of(vals)
    if not np.isfinite(e_now):
        raise ValueError("non-finite energy at the initial field")
    history = [e_now] if record_history else []
    converged = False
    it = 0
    residual = np.inf
    floor_rel = 0.3
    guard = 4.0 * np.finfo(float).eps
    while it < tol.max_iter:
        grad = gradient_of(vals)
        residual = float(np.max(np.abs(grad))) if grad.size else 0.0
        if residual <= tol.el_residual:
            converged = True
            break
        d = model_direction(vals, grad, floor_rel)
        cap = 10.0 * (1.0 + float(np.abs(vals).max()))
        dn = float(np.abs(d).max())
        if dn > cap:
            d *= cap / dn
        slope = float(grad @ d)
        if slope >= 0.0:
            d = -grad
            slope = float(grad @ d)
        alpha = 1.0
        accepted = False
        while alpha >= tol.step:
            trial = vals.copy()
            trial[interior] += alpha * d
            e_trial = energy_of(trial)
            if np.isfinite(e_trial) and e_trial <= e_now + 1e-4 * alpha * slope + guard * (1.0 + abs(e_now)):
                if e_trial >= e_now - guard * (1.0 + abs(e_now)):
                    # energy change below fp resolution: demand residual progress
                    g_trial = gradient_of(trial)
                    if float(np.max(np.abs(g_trial))) < residual * (1.0 - 1e-3):
                        vals = trial
                        e_now = min(e_trial, e_now)
                        accepted = True
                        break
                else:
                    vals = trial
                    e_now = e_trial
                    accepted = True
                    break
            alpha *= 0.5
        it += 1
        if record_history:
            history.append(e_now)
        if not accepted:
            # no certified progress left at machine precision
            grad = gradient_of(vals)
            residual = float(np.max(np.abs(grad)))
            converged = residual <= tol.el_residual
            break
        floor_rel = max(floor_rel * 0.5, 1e-14)

    u = DirichletPair(u=GridFunction(mesh, vals), g=prob.g)
    return PoissonSolution(
        u=u,
        energy=e_now,
        el_residual=residual,
        iterations=it,
        converged=converged,
        energy_history=history,
    )


def minimizer_equivalence_check(sol: PoissonSolution, prob: PoissonProblem,
                                trials: int, rng: np.random.Generator,
                                energy_tol: float = 1e-8) -> CheckResult:
    """Convexity certificate for the minimizer/weak-solution equivalence.

    For random zero-exterior perturbations phi with full norm at most 1:
    energy(u+phi) >= energy(u) - energy_tol, and the weak-form residual
    |<L(u),phi> - int h phi| stays below el_residual * sum|phi_i|.
    """
    mesh = prob.mesh
    interior = mesh.interior_mask
    base = sol.u.u
    e0 = energy(base, prob)
    qbar = trace_exponent(prob.p)
    worst_energy = np.inf
    worst_residual = -np.inf
    dx = mesh.cell_width
    for _ in range(trials):
        raw = np.zeros(mesh.n_cells)
        raw[interior] = rng.standard_normal(int(interior.sum()))
        phi = GridFunction(mesh, raw)
        nrm = full_norm(phi, prob.weights, qbar)
        if nrm == 0.0:
            continue
        scale = rng.uniform(0.05, 1.0) / nrm
        phi = phi.replace_values(raw * scale)
        shifted = base.replace_values(base.values + phi.values)
        worst_energy = min(worst_energy, energy(shifted, prob) - e0)
        res = abs(weak_form(base, phi, prob.weights)
                  - dx * float(np.sum(prob.h.values[interior] * phi.values[interior])))
        allowance = prob.tolerances.el_residual * float(np.sum(np.abs(phi.values))) + 1e-14
        worst_residual = max(worst_residual, res - allowance)
    passed = worst_energy >= -energy_tol and worst_residual <= 0.0
    return CheckResult(
        name="minimizer_equivalence",
        passed=bool(passed),
        value=float(worst_energy),
        bound=-energy_tol,
        slack=float(worst_energy + energy_tol),
        detail=f"worst_residual_margin={worst_residual:.3e}",
    )


def _affine_envelope_fit(a: np.ndarray, b: np.ndarray) -> tuple[float, float, bool]:
    """Tightest affine majorant a_k <= K1 + K2 b_k with K1, K2 >= 0.

    Minimizes the total slack among feasible vertex candidates; the
    (K2=0, K1=max a) candidate keeps the problem always feasible.
    """
    scale = max(float(np.max(a)), 1.0)
    feas_tol = 1e-12 * scale
    candidates = [(float(np.max(a, initial=0.0)), 0.0)]
    pos = b > 0
    if pos.any():
        candidates.append((0.0, float(np.max(a[pos] / b[pos]))))
    m = len(a)
    for i in range(m):
        for j in range(i + 1, m):
            if b[i] == b[j]:
                continue
            k2 = (a[i] - a[j]) / (b[i] - b[j])
            if not np.isfinite(k2) or k2 < 0:
                continue
            k1 = a[i] - k2 * b[i]
            if k1 < 0:
                continue
            candidates.append((float(k1), float(k2)))
    best = None
    best_obj = np.inf
    for k1, k2 in candidates:
        bound = k1 + k2 * b
        if np.all(a <= bound + feas_tol):
            obj = float(np.sum(bound - a))
            if obj < best_obj:
                best_obj = obj
                best = (k1, k2)
    if best is None:
        return 0.0, 0.0, False
    return best[0], best[1], True


def lr_estimate_check(family, prob_template: PoissonProblem, g: GridFunction,
                      slack: float = 0.10) -> EstimateReport:
    """Fit/holdout protocol for the r-norm a-priori estimate.

    Solves each right-hand side with the shared exterior datum, forms
    a_k = max(||u_k||_r^{p+-1}, ||u_k||_r^{p--1}) and
    b_k = ||h_k||_{r'}^{(p+-1)/(p--1)}, fits the least nonnegative affine
    majorant on a training half and verifies it with the given slack on the
    held-out half.  The halves interleave the family so both cover the same
    scale range (the a(b) relation is concave when p varies, so a majorant
    fitted on a gappy range would be unfair to the middle).
    """
    if len(family) < 8:
        raise ValueError("estimate protocol needs at least 8 right-hand sides")
    prob0 = prob_template.with_g(g)
    W = prob0.weights
    p_plus, p_minus = W.p_plus, W.p_minus
    r = prob0.r
    rc = conjugate_exponent(r)
    mask = prob0.mesh.interior_mask
    a_vals, b_vals = [], []
    for h in family:
        prob = prob0.with_h(h)
        sol = solve_poisson(prob)
        if not sol.converged:
            return EstimateReport(0.0, 0.0, feasible=False,
                                  detail="solver non-convergence inside estimate family")
        un = luxemburg_norm(sol.u.u, r, mask)
        hn = luxemburg_norm(h, rc, mask)
        a_vals.append(max(un ** (p_plus - 1.0), un ** (p_minus - 1.0)) if un > 0 else 0.0)
        b_vals.append(hn ** ((p_plus - 1.0) / (p_minus - 1.0)) if hn > 0 else 0.0)
    a = np.asarray(a_vals)
    b = np.asarray(b_vals)
    order = np.argsort(b)
    train_idx, hold_idx = order[0::2], order[1::2]
    k1, k2, feasible = _affine_envelope_fit(a[train_idx], b[train_idx])
    report = EstimateReport(
        k1=k1, k2=k2, feasible=feasible,
        train_pairs=list(zip(a[train_idx].tolist(), b[train_idx].tolist())),
        holdout_pairs=list(zip(a[hold_idx].tolist(), b[hold_idx].tolist())),
    )
    if not feasible:
        report.detail = "training fit infeasible"
        return report
    ratios = []
    for ak, bk in zip(a[hold_idx], b[hold_idx]):
        bound = k1 + k2 * bk
        if bound <= 0.0:
            ratios.append(0.0 if ak <= 1e-12 else np.inf)
        else:
            ratios.append(ak / bound)
    report.worst_ratio = float(max(ratios)) if ratios else 0.0
    report.holdout_passed = report.worst_ratio <= 1.0 + slack
    return report
