"""Shared construction helpers for the test suite."""

import numpy as np

from fpxlap import ExponentField, GridFunction, ScalarExponent


def const_pair(value, s):
    return ExponentField(
        evaluator=lambda x, y, v=value: v + 0.0 * (np.asarray(x) + np.asarray(y)),
        p_minus=value, p_plus=value, s=s,
    )


def bump_pair(base, amp, s, width=1.0):
    return ExponentField(
        evaluator=lambda x, y: base + amp * np.exp(-(((np.asarray(x) - np.asarray(y)) / width) ** 2)),
        p_minus=base, p_plus=base + amp, s=s,
    )


def const_scalar(value):
    return ScalarExponent(
        evaluator=lambda x, v=value: v + 0.0 * np.asarray(x), lower=value, upper=value
    )


def affine_scalar(base, slope, R):
    return ScalarExponent(
        evaluator=lambda x: base + slope * np.asarray(x),
        lower=base - abs(slope) * R, upper=base + abs(slope) * R,
    )


def grid(mesh, values):
    return GridFunction(mesh, np.asarray(values, dtype=float))


def unit_grid(mesh):
    return GridFunction(mesh, np.ones(mesh.n_cells))


def random_w0(rng, mesh, scale=1.0):
    """Random zero-exterior grid function."""
    vals = np.where(mesh.interior_mask, scale * rng.standard_normal(mesh.n_cells), 0.0)
    return GridFunction(mesh, vals)
