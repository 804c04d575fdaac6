# wavemaps/soliton_geometry.py
"""
Soliton family Q_λ(r) = 2 arctan(λr), the gauge derivative, the operators
L, L*, H = L*L and H̃ = LL*, energy, and λ extraction.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.integrate import solve_ivp
from scipy.interpolate import CubicSpline, PchipInterpolator
from scipy.optimize import brentq

from .exceptions import GaugeRecoveryError, GridError, IntegrationFailure, NoCrossingError
from .grids import RadialField, RadialGrid

logger = logging.getLogger(__name__)

SOLITON_ENERGY = 4 * np.pi
OPERATORS = ("L", "Lstar", "H", "Htilde")


@dataclass(frozen=True)
class SolitonProfile:
    lam: float = 1.0

    def __post_init__(self):
        if not self.lam > 0:
            raise GridError("soliton scale must be positive", lam=self.lam)

    def Q(self, r):
        return 2.0 * np.arctan(self.lam * np.asarray(r, dtype=float))

    def h1(self, r):
        return h1(self.lam * np.asarray(r, dtype=float))

    def h3(self, r):
        return h3(self.lam * np.asarray(r, dtype=float))


def h1(r):
    """sin Q = 2r/(1+r²); also the zero resonance φ_0."""
    r = np.asarray(r, dtype=float)
    return 2.0 * r / (1.0 + r * r)


def h3(r):
    """−cos Q = (r²−1)/(r²+1)."""
    r = np.asarray(r, dtype=float)
    return (r * r - 1.0) / (r * r + 1.0)


phi0 = h1


def psi0(r):
    """Zero mode of H̃: ½((1+r²)log(1+r²)/r² − 1)."""
    r = np.asarray(r, dtype=float)
    x = r * r
    small = x < 1e-4
    xs = np.where(small, x, 1.0)
    series = xs / 4 - xs ** 2 / 12 + xs ** 3 / 24
    xl = np.where(small, 1.0, x)
    closed = 0.5 * ((1.0 + xl) * np.log1p(xl) / xl - 1.0)
    return np.where(small, series, closed)


def lstar_kernel(r):
    """(1+r²)/r², the kernel of L*."""
    r = np.asarray(r, dtype=float)
    return (1.0 + r * r) / (r * r)


def soliton(lam, grid: RadialGrid, topological=False):
    profile = SolitonProfile(lam)
    return RadialField(grid, profile.Q(grid.nodes), "map", topological)


def _require_map(u):
    if u.space_tag != "map":
        raise GridError("expected a map-tagged field", tag=u.space_tag)


def gauge_derivative(u: RadialField) -> RadialField:
    """w = ∂_r u − sin(u)/r."""
    _require_map(u)
    r = u.grid.nodes
    w = u.grid.derivative(u.values) - np.sin(u.values) / r
    return RadialField(u.grid, w, "gauge")


def operator_values(kind, grid: RadialGrid, f):
    """Apply L, L*, H or H̃ to raw samples (any leading batch shape)."""
    r = grid.nodes
    f = np.asarray(f, dtype=float)
    if kind == "L":
        return _apply_rows(grid.D1, f) + h3(r) / r * f
    if kind == "Lstar":
        return -_apply_rows(grid.D1, f) + (h3(r) - 1.0) / r * f
    lap = _apply_rows(grid.D2, f) + _apply_rows(grid.D1, f) / r
    if kind == "H":
        # cos 2Q = h3² − h1²
        return -lap + (h3(r) ** 2 - h1(r) ** 2) / r ** 2 * f
    if kind == "Htilde":
        return -lap + 4.0 / (r ** 2 * (1.0 + r ** 2)) * f
    raise GridError(f"unknown operator {kind!r}", allowed=OPERATORS)


def _apply_rows(D, f):
    if f.ndim == 1:
        return D @ f
    return (D @ f.reshape(-1, f.shape[-1]).T).T.reshape(f.shape)


def apply_operator(kind, f: RadialField) -> RadialField:
    tag = "gauge" if kind in ("L", "Htilde") else "map"
    if kind == "H":
        tag = f.space_tag
    return RadialField(f.grid, operator_values(kind, f.grid, f.values), tag)


# ---- explicit inverses ----
def _inverse_L_raw(grid, g, sign, tail=0.0):
    r = grid.nodes
    return sign * h1(r) * grid.cumulative_to_edge(np.asarray(g) / h1(r), tail=tail)


@lru_cache(maxsize=32)
def inverse_L_sign(grid: RadialGrid):
    """Sign s with L(s·h1∫_r^∞ g/h1) = g, measured on a smooth bump."""
    r = grid.nodes
    g = r ** 2 * np.exp(-((r - 2.0) ** 2))
    v = _inverse_L_raw(grid, g, 1.0)
    Lv = operator_values("L", grid, v)
    band = (r > 0.5) & (r < 6.0)
    ratio = float(np.dot(Lv[band], g[band]) / np.dot(g[band], g[band]))
    sign = 1.0 if ratio > 0 else -1.0
    logger.debug(f"inverse L sign fixed at {sign:+.0f} (measured ratio {ratio:.6f})")
    return sign


def inverse_L(grid: RadialGrid, g, tail_power=None):
    """L^{-1}g decaying at infinity; ``tail_power`` p models g ~ r^{-p} beyond R_max."""
    r = grid.nodes
    g = np.asarray(g, dtype=float)
    tail = 0.0
    if tail_power is not None and tail_power > 2:
        tail = (g[..., -1] / h1(r[-1])) * r[-1] / (tail_power - 2.0)
    return _inverse_L_raw(grid, g, inverse_L_sign(grid), tail)


def inverse_L_from_zero(grid: RadialGrid, g):
    """h1∫_0^r g/h1: the inverse of L regular at the origin."""
    r = grid.nodes
    return h1(r) * grid.cumulative_from_zero(np.asarray(g) / h1(r))


def inverse_Lstar_from_zero(grid: RadialGrid, g):
    """−((1+r²)/r²)∫_0^r g s²/(1+s²) ds: the inverse of L* vanishing at the origin."""
    r = grid.nodes
    return -lstar_kernel(r) * grid.cumulative_from_zero(np.asarray(g) / lstar_kernel(r))


# ---- energy ----
def _check_pair(u, u_t):
    if not u.same_grid(u_t):
        raise GridError("energy needs u and u_t on the same grid")


def energy(u: RadialField, u_t: RadialField, far_tail=True) -> float:
    """π∫(u_t² + u_r² + sin²u/r²) r dr; beyond R_max the density is continued as r^{-4}."""
    _check_pair(u, u_t)
    r = u.grid.nodes
    density = u_t.values ** 2 + u.grid.derivative(u.values) ** 2 + (np.sin(u.values) / r) ** 2
    total = u.grid.integrate_rdr(density)
    if far_tail:
        total += density[-1] * r[-1] ** 2 / 2
    return float(np.pi * total)


def energy_excess(u: RadialField, u_t: RadialField) -> float:
    """π∫(u_t² + w²) r dr, equal to ℰ(u) − 4π for maps running from 0 to π."""
    _check_pair(u, u_t)
    w = gauge_derivative(u).values
    return float(np.pi * u.grid.integrate_rdr(u_t.values ** 2 + w ** 2))


# ---- λ extraction ----
@dataclass(frozen=True)
class LambdaEstimate:
    value: float
    r_star: float
    ambiguous: bool = False
    crossings: int = 1

    def __float__(self):
        return self.value


def crossing_radius(r, u, level=np.pi / 2):
    v = np.asarray(u, dtype=float) - level
    sign_change = np.nonzero((v[:-1] == 0) | (v[:-1] * v[1:] < 0))[0]
    if len(sign_change) == 0:
        if v[-1] == 0:
            return float(r[-1]), 1
        raise NoCrossingError("map never crosses π/2")
    i = int(sign_change[0])
    if v[i] == 0:
        return float(r[i]), len(sign_change)
    lo, hi = max(i - 1, 0), min(i + 3, len(r))
    interp = PchipInterpolator(r[lo:hi], v[lo:hi])
    root = brentq(interp, r[i], r[i + 1], xtol=1e-14, rtol=1e-14)
    return float(root), len(sign_change)


def extract_lambda(u: RadialField) -> LambdaEstimate:
    _require_map(u)
    r_star, count = crossing_radius(u.grid.nodes, u.values)
    if count > 1:
        logger.warning(f"u crosses π/2 {count} times; using the innermost crossing r*={r_star:.6g}")
    return LambdaEstimate(1.0 / r_star, r_star, count > 1, count)


# ---- gauge → map ----
def recover_map_from_gauge(w: RadialField, far_value=None, rtol=1e-10, residual_tol=1e-3) -> RadialField:
    """
    Solve ∂_r u − sin(u)/r = w inward from R_max.

    The far-field value defaults to Q(R_max), which selects λ = 1 when w ≡ 0.
    """
    if w.space_tag != "gauge":
        raise GridError("expected a gauge-tagged field", tag=w.space_tag)
    grid = w.grid
    r = grid.nodes
    R = r[-1]
    u_far = SolitonProfile(1.0).Q(R) if far_value is None else float(far_value)
    w_of = CubicSpline(r, w.values)

    def rhs(s, y):
        return np.sin(y) / s + w_of(s)

    sol = solve_ivp(
        rhs, (R, r[0]), [u_far], method="DOP853",
        t_eval=r[::-1], rtol=rtol, atol=rtol * 1e-2,
    )
    if not sol.success:
        logger.warning(f"gauge recovery integration failed: {sol.message}")
        raise IntegrationFailure("gauge recovery integration failed", reason=sol.message)
    u = sol.y[0][::-1]
    if np.any(u <= -np.pi / 2) or np.any(u >= 1.5 * np.pi):
        raise GaugeRecoveryError("recovered map left the near-soliton band (−π/2, 3π/2)")
    residual = grid.derivative(u) - np.sin(u) / r - w.values
    scale = max(1.0, float(np.max(np.abs(grid.derivative(u)))))
    rel = float(np.max(np.abs(residual[2:-2]))) / scale
    logger.debug(f"gauge recovery residual {rel:.3e}")
    if rel > residual_tol:
        raise GaugeRecoveryError("gauge recovery residual above tolerance", residual=rel)
    return RadialField(grid, u, "map")
