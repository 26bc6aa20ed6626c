"""Gagliardo modular/seminorm, the discrete nonlocal operator, and weak forms.

Discrete convention for a field u on the box cells, extended by zero beyond
the box: the full-space double integral splits into the in-box pair sum plus
exterior-of-box tail terms.  Each unordered pair {i,j} appears twice in the
double integral, and so does each (cell, exterior) ordering, hence

    rho(u)      = sum_{i<j} 2 w_ij |u_i-u_j|^{p_ij}
                  + 2 dx sum_i tail_i |u_i|^{pbar_i},
    <L(u),phi>  = sum_{i<j} 2 w_ij |u_i-u_j|^{p_ij-2}(u_i-u_j)(phi_i-phi_j)
                  + 2 dx sum_i tail_i |u_i|^{pbar_i-2} u_i phi_i,

where the tail integral carries the cell measure dx once because ``tail_i``
stores the one-dimensional exterior integral frozen at the cell center.  The
cell-averaged operator value then satisfies the exact identity
<L(u),phi> = 2 sum_i phi_i (operator u)_i dx for phi supported in the box.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exponents import ScalarExponent
from .lebesgue import BisectionError, GridFunction, luxemburg_norm
from .mesh_kernel import KernelWeights, Mesh


@dataclass(frozen=True)
class DirichletPair:
    """Field u agreeing with the exterior datum g outside the interior set."""

    u: GridFunction
    g: GridFunction

    def __post_init__(self):
        ext = self.u.mesh.exterior_mask
        if not np.array_equal(self.u.values[ext], self.g.values[ext]):
            raise ValueError("u must equal g on every exterior cell")

    @classmethod
    def from_interior(cls, mesh: Mesh, interior_values: np.ndarray,
                      g: GridFunction) -> "DirichletPair":
        vals = g.values.copy()
        vals[mesh.interior_mask] = interior_values
        return cls(u=GridFunction(mesh, vals), g=g)


def _signed_pow(diff: np.ndarray, p: np.ndarray) -> np.ndarray:
    """|t|^(p-2) t extended by 0 at t=0 (continuous since p > 1)."""
    if np.all(p == 2.0):
        return diff
    return np.sign(diff) * np.abs(diff) ** (p - 1.0)


def _abs_pow(diff: np.ndarray, p: np.ndarray) -> np.ndarray:
    if np.all(p == 2.0):
        return diff * diff
    return np.abs(diff) ** p


def _pair_mask(W: KernelWeights, variant: str) -> np.ndarray | None:
    if variant == "rn":
        return None
    if variant == "omega":
        ext = W.mesh.exterior_mask
        return ~(ext[:, None] & ext[None, :])
    raise ValueError(f"unknown modular variant {variant!r}")


def gagliardo_modular(u: GridFunction, W: KernelWeights, variant: str = "rn") -> float:
    """Double-integral modular of u; 'rn' includes tails, 'omega' drops tails
    and the exterior-exterior pairs."""
    diff = u.values[:, None] - u.values[None, :]
    terms = W.w * _abs_pow(diff, W.p_pair)
    mask = _pair_mask(W, variant)
    if mask is not None:
        terms = np.where(mask, terms, 0.0)
    total = float(terms.sum())
    if variant == "rn":
        total += 2.0 * W.mesh.cell_width * float(
            np.sum(W.tail * np.abs(u.values) ** W.p_bar)
        )
    return total


def _luxemburg_scaling(modular_of, rho: float, e_lo: float, e_hi: float,
                       rtol: float = 1e-10, max_iter: int = 200) -> float:
    """Generic Luxemburg bisection given the scaled-modular evaluator."""
    ends = (rho ** (1.0 / e_lo), rho ** (1.0 / e_hi))
    lo, hi = min(ends) * (1.0 - 1e-12), max(ends) * (1.0 + 1e-12)
    for _ in range(200):
        if modular_of(lo) >= 1.0:
            break
        lo *= 0.5
    for _ in range(200):
        if modular_of(hi) <= 1.0:
            break
        hi *= 2.0
    it = 0
    while (hi - lo) > rtol * hi and it < max_iter:
        mid = 0.5 * (lo + hi)
        if modular_of(mid) > 1.0:
            lo = mid
        else:
            hi = mid
        it += 1
    if (hi - lo) > rtol * hi:
        raise BisectionError(f"seminorm bisection exhausted {max_iter} iterations")
    return 0.5 * (lo + hi)


def gagliardo_seminorm(u: GridFunction, W: KernelWeights, variant: str = "rn",
                       rtol: float = 1e-10, max_iter: int = 200) -> float:
    """inf{lam > 0 : rho((u)/lam) <= 1}, bracketed through p-, p+."""
    vmax = float(np.abs(u.values).max())
    if vmax == 0.0:
        return 0.0
    base = u.replace_values(u.values / vmax)
    rho = gagliardo_modular(base, W, variant)
    if rho == 0.0:
        return 0.0

    def scaled(lam):
        return gagliardo_modular(base.replace_values(base.values / lam), W, variant)

    return vmax * _luxemburg_scaling(scaled, rho, W.p_minus, W.p_plus, rtol, max_iter)


def full_norm(u: GridFunction, W: KernelWeights, q: ScalarExponent,
              variant: str = "omega") -> float:
    """Seminorm plus Luxemburg norm over the interior region."""
    return gagliardo_seminorm(u, W, variant) + luxemburg_norm(u, q, u.mesh.interior_mask)


def apply_operator(u: GridFunction, W: KernelWeights, i: int | None = None):
    """Cell-averaged principal-value operator.

    (operator u)_i = (1/dx) sum_{j != i} w_ij |u_i-u_j|^{p_ij-2}(u_i-u_j)
                     + tail_i |u_i|^{pbar_i-2} u_i.

    The self-cell term vanishes identically for piecewise constants, which
    is the discrete counterpart of the principal-value cancellation.
    """
    diff = u.values[:, None] - u.values[None, :]
    flux = (W.w * _signed_pow(diff, W.p_pair)).sum(axis=1) / W.mesh.cell_width
    out = flux + W.tail * _signed_pow(u.values, W.p_bar)
    if i is None:
        return out
    return float(out[i])


def weak_form(u: GridFunction, phi: GridFunction, W: KernelWeights) -> float:
    """<L(u), phi> including the exterior tail pairing."""
    du = u.values[:, None] - u.values[None, :]
    dphi = phi.values[:, None] - phi.values[None, :]
    pair = float((W.w * _signed_pow(du, W.p_pair) * dphi).sum())
    tail = 2.0 * W.mesh.cell_width * float(
        np.sum(W.tail * _signed_pow(u.values, W.p_bar) * phi.values)
    )
    return pair + tail
