"""Divergences between nonnegative vectors: KL, total variation, and norm bridges."""

from __future__ import annotations

import math

import numpy as np

from .errors import (
    DimensionMismatch,
    InfiniteDivergence,
    NegativeInput,
    NonFiniteValue,
    NotOnSimplex,
)

__all__ = ["SIMPLEX_TOL", "kl_divergence", "l2_bridge", "pinsker_check", "total_variation"]

SIMPLEX_TOL = 1e-9


def _pair(u, v):
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.shape != v.shape or u.ndim != 1:
        raise DimensionMismatch(f"incompatible shapes {u.shape} and {v.shape}")
    if not (np.all(np.isfinite(u)) and np.all(np.isfinite(v))):
        raise NonFiniteValue("divergence inputs must be finite")
    return u, v


def kl_divergence(u, v) -> float:
    """Kullback-Leibler divergence sum_i u_i log(u_i / v_i).

    Terms with u_i = 0 contribute 0; the result is math.inf when u_i > 0
    meets v_i = 0.  Inputs must be nonnegative.
    """
    u, v = _pair(u, v)
    if np.any(u < 0) or np.any(v < 0):
        raise NegativeInput("kl_divergence requires nonnegative inputs")
    mask = u > 0
    if not np.any(mask):
        return 0.0
    um = u[mask]
    vm = v[mask]
    if np.any(vm == 0.0):
        return math.inf
    return float(np.sum(um * np.log(um / vm)))


def total_variation(u, v) -> float:
    """Unhalved l1 distance sum_i |u_i - v_i|."""
    u, v = _pair(u, v)
    return float(np.sum(np.abs(u - v)))


def _require_simplex(w, name):
    if np.any(w < 0) or abs(float(np.sum(w)) - 1.0) > SIMPLEX_TOL:
        raise NotOnSimplex(f"{name} is not a probability vector (tolerance {SIMPLEX_TOL})")


def pinsker_check(u, v) -> bool:
    """Whether D(u, v) >= V(u, v)^2 / 2 holds at the computed values.

    Both inputs must lie on the probability simplex.  Used as a
    self-consistency probe in tests and diagnostics.
    """
    u, v = _pair(u, v)
    _require_simplex(u, "u")
    _require_simplex(v, "v")
    d = kl_divergence(u, v)
    t = total_variation(u, v)
    return d >= 0.5 * t * t


def l2_bridge(x_star, kl: float) -> float:
    """Upper bound 2 * ||x*||_1^2 * kl converting a KL trace into a squared l2 error bound."""
    if math.isinf(kl):
        raise InfiniteDivergence("l2_bridge requires a finite divergence")
    x = np.asarray(x_star, dtype=np.float64)
    if np.any(x < 0):
        raise NegativeInput("l2_bridge requires a nonnegative reference vector")
    l1 = float(np.sum(x))
    return 2.0 * l1 * l1 * kl
