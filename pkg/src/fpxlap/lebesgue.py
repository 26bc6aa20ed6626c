"""Variable-exponent Lebesgue machinery on cellwise-constant grid functions.

Integrals are midpoint sums, which are exact for piecewise constants, so the
modular identities and inequalities below hold sharply at the discrete level.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .checks import CheckResult
from .exponents import ScalarExponent, conjugate_exponent
from .mesh_kernel import Mesh


class BisectionError(RuntimeError):
    """Bisection failed to certify the Luxemburg infimum."""


@dataclass(frozen=True)
class GridFunction:
    mesh: Mesh
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.shape != (self.mesh.n_cells,):
            raise ValueError(
                f"grid function has {vals.shape} values for {self.mesh.n_cells} cells"
            )
        if not np.all(np.isfinite(vals)):
            raise ValueError("grid function values must be finite")
        object.__setattr__(self, "values", vals)

    @classmethod
    def from_callable(cls, mesh: Mesh, fn) -> "GridFunction":
        return cls(mesh, np.asarray(fn(mesh.cell_centers), dtype=float) * np.ones(mesh.n_cells))

    @classmethod
    def zeros(cls, mesh: Mesh) -> "GridFunction":
        return cls(mesh, np.zeros(mesh.n_cells))

    def replace_values(self, values: np.ndarray) -> "GridFunction":
        return GridFunction(self.mesh, values)


def _region_mask(mesh: Mesh, region) -> np.ndarray:
    if region is None:
        return mesh.interior_mask
    mask = np.asarray(region, dtype=bool)
    if mask.shape != (mesh.n_cells,):
        raise ValueError("region mask shape mismatch")
    return mask


def region_measure(mesh: Mesh, region=None) -> float:
    return float(_region_mask(mesh, region).sum()) * mesh.cell_width


def modular(u: GridFunction, q: ScalarExponent, region=None) -> float:
    """rho_q(u) = sum_{i in region} |u_i|^{q(x_i)} * cell_width."""
    mask = _region_mask(u.mesh, region)
    if not mask.any():
        return 0.0
    qv = q.values(u.mesh.cell_centers[mask])
    return float(np.sum(np.abs(u.values[mask]) ** qv) * u.mesh.cell_width)


def _modular_arrays(vals, qv, width, lam):
    return float(np.sum((vals / lam) ** qv) * width)


def luxemburg_norm(u: GridFunction, q: ScalarExponent, region=None,
                   rtol: float = 1e-10, max_iter: int = 200) -> float:
    """inf{lam > 0 : rho_q(u/lam) <= 1} by bisection.

    The map lam -> rho(u/lam) is continuous and strictly decreasing for
    u != 0, and the root lies between rho^(1/q+) and rho^(1/q-), where
    rho = rho_q(u).  Returns 0 for the zero function.
    """
    mask = _region_mask(u.mesh, region)
    vals = np.abs(u.values[mask])
    if vals.size == 0 or not vals.any():
        return 0.0
    # factor out the sup so extreme scales cannot under- or overflow the modular
    vmax = float(vals.max())
    vals = vals / vmax
    centers = u.mesh.cell_centers[mask]
    qv = q.values(centers)
    width = u.mesh.cell_width
    rho = float(np.sum(vals ** qv) * width)
    q_lo, q_hi = float(qv.min()), float(qv.max())
    ends = (rho ** (1.0 / q_lo), rho ** (1.0 / q_hi))
    lo, hi = min(ends) * (1.0 - 1e-12), max(ends) * (1.0 + 1e-12)
    # theoretical bracket; widen geometrically if fp rounding edged it out
    for _ in range(200):
        if _modular_arrays(vals, qv, width, lo) >= 1.0:
            break
        lo *= 0.5
    for _ in range(200):
        if _modular_arrays(vals, qv, width, hi) <= 1.0:
            break
        hi *= 2.0
    it = 0
    while (hi - lo) > rtol * hi and it < max_iter:
        mid = 0.5 * (lo + hi)
        if _modular_arrays(vals, qv, width, mid) > 1.0:
            lo = mid
        else:
            hi = mid
        it += 1
    if (hi - lo) > rtol * hi:
        raise BisectionError(
            f"Luxemburg bisection exhausted {max_iter} iterations "
            f"(bracket [{lo}, {hi}])"
        )
    return vmax * 0.5 * (lo + hi)


def pairing(u: GridFunction, v: GridFunction, region=None) -> float:
    """Discrete duality pairing: sum u_i v_i * cell_width over region."""
    mask = _region_mask(u.mesh, region)
    return float(np.sum(u.values[mask] * v.values[mask]) * u.mesh.cell_width)


def holder_pairing_check(u: GridFunction, v: GridFunction, q: ScalarExponent,
                         region=None, tol: float = 1e-10) -> CheckResult:
    """|sum u v dx| <= 2 ||u||_q ||v||_{q'}."""
    qc = conjugate_exponent(q)
    lhs = abs(pairing(u, v, region))
    bound = 2.0 * luxemburg_norm(u, q, region) * luxemburg_norm(v, qc, region)
    return CheckResult(
        name="holder_pairing",
        passed=lhs <= bound + tol,
        value=lhs,
        bound=bound,
        slack=bound - lhs,
    )


def norm_of_one_bounds(gamma: ScalarExponent, mesh: Mesh, region=None,
                       tol: float = 1e-9) -> CheckResult:
    """min(|O|^(1/g+), |O|^(1/g-)) <= ||1||_gamma <= max(...) on the region."""
    mask = _region_mask(mesh, region)
    measure = float(mask.sum()) * mesh.cell_width
    g_lo, g_hi = gamma.range_on(mesh.cell_centers[mask])
    ends = (measure ** (1.0 / g_hi), measure ** (1.0 / g_lo))
    lo_bound, hi_bound = min(ends), max(ends)
    one = GridFunction(mesh, np.ones(mesh.n_cells))
    norm1 = luxemburg_norm(one, gamma, mask)
    ok = (lo_bound - tol) <= norm1 <= (hi_bound + tol)
    return CheckResult(
        name="norm_of_one",
        passed=ok,
        value=norm1,
        bound=hi_bound,
        slack=min(norm1 - lo_bound, hi_bound - norm1),
        detail=f"measure={measure:.6g} lower={lo_bound:.12g}",
    )


def power_norm_bounds_check(u: GridFunction, alpha: ScalarExponent,
                            beta: ScalarExponent, region=None,
                            tol: float = 1e-9) -> CheckResult:
    """Sandwich for || |u|^beta ||_alpha between powers of ||u||_{alpha*beta}.

    With m = ||u||_{alpha*beta}: if m <= 1 then m^(beta+) <= |||u|^beta||_alpha
    <= m^(beta-), and with the exponents swapped when m >= 1.  beta may touch 1.
    """
    mask = _region_mask(u.mesh, region)
    centers = u.mesh.cell_centers[mask]

    def ab(x):
        return alpha.evaluator(x) * beta.evaluator(x)

    prod = ScalarExponent(evaluator=ab, lower=alpha.lower * beta.lower,
                          upper=alpha.upper * beta.upper)
    m = luxemburg_norm(u, prod, mask)
    bvals = beta.values(centers)
    b_lo, b_hi = float(bvals.min()), float(bvals.max())
    pw = np.zeros(u.mesh.n_cells)
    pw[mask] = np.abs(u.values[mask]) ** bvals
    powered = u.replace_values(pw)
    mid = luxemburg_norm(powered, alpha, mask)
    if m == 0.0:
        ok = mid <= tol
        return CheckResult("power_norm_bounds", ok, mid, 0.0, -mid)
    if m <= 1.0:
        lo_b, hi_b = m ** b_hi, m ** b_lo
    else:
        lo_b, hi_b = m ** b_lo, m ** b_hi
    ok = (lo_b - tol) <= mid <= (hi_b + tol)
    return CheckResult(
        name="power_norm_bounds",
        passed=ok,
        value=mid,
        bound=hi_b,
        slack=min(mid - lo_b, hi_b - mid),
        detail=f"base_norm={m:.12g}",
    )


def norm_modular_relation_check(u: GridFunction, q: ScalarExponent, region=None,
                                tol: float = 1e-9) -> CheckResult:
    """Items (1)-(3) of the norm/modular comparison.

    (1) ||u|| < 1 iff rho(u) < 1 (and similarly at 1 and above 1);
    (2) ||u|| > 1 implies ||u||^q- <= rho(u) <= ||u||^q+;
    (3) ||u|| < 1 implies ||u||^q+ <= rho(u) <= ||u||^q-.
    """
    mask = _region_mask(u.mesh, region)
    rho = modular(u, q, mask)
    nrm = luxemburg_norm(u, q, mask)
    q_lo, q_hi = q.range_on(u.mesh.cell_centers[mask]) if mask.any() else (1.0, 1.0)
    worst = np.inf

    # item (1): the two sides must straddle 1 the same way
    if nrm < 1.0 - tol and not rho < 1.0 + tol:
        worst = min(worst, -(rho - 1.0))
    if rho < 1.0 - tol and not nrm < 1.0 + tol:
        worst = min(worst, -(nrm - 1.0))
    if nrm > 1.0 + tol and not rho > 1.0 - tol:
        worst = min(worst, -(1.0 - rho))
    if rho > 1.0 + tol and not nrm > 1.0 - tol:
        worst = min(worst, -(1.0 - nrm))

    if nrm > 1.0 + tol:
        worst = min(worst, rho - nrm ** q_lo, nrm ** q_hi - rho)
    if 0.0 < nrm < 1.0 - tol:
        worst = min(worst, rho - nrm ** q_hi, nrm ** q_lo - rho)
    if worst is np.inf:
        worst = 0.0
    return CheckResult(
        name="norm_modular_relation",
        passed=worst >= -tol,
        value=rho,
        bound=nrm,
        slack=float(worst),
        detail=f"norm={nrm:.12g} modular={rho:.12g}",
    )
