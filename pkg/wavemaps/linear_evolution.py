# wavemaps/linear_evolution.py
"""
Free H̃-waves, the Duhamel-from-infinity operator K and its variants, and
the decay audits built on them.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from math import factorial

import numpy as np
from scipy.special import sici

from .distorted_fourier import (
    forward_values, inverse_values, japanese, lx_norm_values, nonres_pairing, physical_norms,
)
from .exceptions import NonresonanceError, TailBoundError
from .fitting import fit_power_law, stable_under_doubling, sup_ratio
from .grids import RadialField, SpectralDensity
from .soliton_geometry import operator_values, psi0
from .spectral_core import EigenbasisTable

logger = logging.getLogger(__name__)

VARIANTS = ("K", "dtK", "LstarK")


def check_nonresonance(fields, tol=1e-8):
    for f in fields:
        pairing = nonres_pairing(f).value
        scale = f.grid.integrate_rdr(np.abs(f.values * psi0(f.grid.nodes)))
        if scale > 0 and abs(pairing) > tol * scale:
            raise NonresonanceError("data violate ⟨w, ψ_0⟩ = 0", pairing=pairing)


# ---- free waves ----
@dataclass(frozen=True, eq=False)
class WaveState:
    """H̃-calculus coefficients of (w, ∂_t w) at time t."""
    table: EigenbasisTable
    t: float
    c: np.ndarray
    c_t: np.ndarray

    @classmethod
    def from_data(cls, w0: RadialField, w1: RadialField, table: EigenbasisTable, t0=0.0, check=True):
        if check:
            check_nonresonance([w0, w1])
        return cls(
            table, float(t0),
            forward_values(table, "Htilde", w0.values),
            forward_values(table, "Htilde", w1.values),
        )

    @property
    def xi(self):
        return self.table.xi

    def evolve(self, t):
        """Exact in the representation; vectorized over an array of times."""
        dt = np.asarray(t, dtype=float)[..., None] - self.t
        phase = dt * self.xi
        cos, sin = np.cos(phase), np.sin(phase)
        c = self.c * cos + self.c_t * sin / self.xi
        c_t = -self.xi * self.c * sin + self.c_t * cos
        if np.ndim(t) == 0:
            return WaveState(self.table, float(t), c, c_t)
        return c, c_t

    def spectral_energy(self):
        w = self.table.freq_grid.weights
        return float(w @ (self.xi ** 2 * self.c ** 2 + self.c_t ** 2))

    def fields(self):
        grid = self.table.radial_grid
        return (
            RadialField(grid, inverse_values(self.table, "Htilde", self.c), "gauge"),
            RadialField(grid, inverse_values(self.table, "Htilde", self.c_t), "gauge"),
        )

    def density(self):
        return SpectralDensity(self.table.freq_grid, self.c, "Htilde")


def free_evolve(w0: RadialField, w1: RadialField, t, table: EigenbasisTable, check=True):
    """(bw(t), ∂_t bw(t)) for data (w0, w1) at t = 0."""
    return WaveState.from_data(w0, w1, table, check=check).evolve(t).fields()


def free_snapshots(state: WaveState, times):
    c, c_t = state.evolve(np.asarray(times, dtype=float))
    return inverse_values(state.table, "Htilde", c), inverse_values(state.table, "Htilde", c_t)


def bw_profile(r, t):
    """(log(1+r²)/log⟨r+t⟩)·⟨t+r⟩^{-1/2}⟨t−r⟩^{-5/2}/log⟨r−t⟩."""
    r = np.asarray(r, dtype=float)
    t = np.asarray(t, dtype=float)
    return (
        np.log1p(r ** 2) / np.log(japanese(r + t))
        * japanese(t + r) ** -0.5 * japanese(t - r) ** -2.5 / np.log(japanese(r - t))
    )


def pointwise_decay_audit(times, snapshots, grid, interior_radius=1.0, cone_width=1.0):
    """
    sup |bw|/profile over (r, t), with the interior and on-cone decay exponents.
    ``snapshots`` is (n_t, n_r).
    """
    times = np.asarray(times, dtype=float)
    snapshots = np.asarray(snapshots)
    r = grid.nodes
    ratios = np.array([sup_ratio(snap, bw_profile(r, t)) for t, snap in zip(times, snapshots)])
    interior = np.array([np.max(np.abs(snap[r <= interior_radius])) for snap in snapshots])
    cone = np.array([
        np.max(np.abs(snap[np.abs(r - t) <= cone_width])) if np.any(np.abs(r - t) <= cone_width) else np.nan
        for t, snap in zip(times, snapshots)
    ])
    exterior = np.array([
        np.max(np.abs(snap[r >= t + 4 * cone_width])) if np.any(r >= t + 4 * cone_width) else np.nan
        for t, snap in zip(times, snapshots)
    ])
    ok = np.isfinite(cone)
    return {
        "profile_constant": float(np.max(ratios)),
        "doubling": stable_under_doubling(times, ratios),
        "interior": fit_power_law(times, interior).to_dict(),
        "interior_log_corrected": fit_power_law(times, interior, log_power=-1.0).to_dict(),
        "cone": fit_power_law(times[ok], cone[ok]).to_dict(),
        "interior_sup": interior.tolist(),
        "cone_sup": cone.tolist(),
        # reported, not enforced
        "exterior_sup": exterior.tolist(),
    }


# ---- Duhamel from infinity ----
@dataclass
class SpaceTimeSource:
    """f(s, ·) for s in [t, S_max]; the sampler returns a RadialField, a SpectralDensity or raw H̃ coefficients."""
    sampler: object
    alpha: float = 1.0
    _cache: dict = field(default_factory=dict, repr=False)

    def spectral(self, s, table: EigenbasisTable):
        key = float(s)
        if key not in self._cache:
            value = self.sampler(key)
            if isinstance(value, RadialField):
                coeff = forward_values(table, "Htilde", value.values)
            elif isinstance(value, SpectralDensity):
                coeff = np.asarray(value.require("Htilde").values, dtype=float)
            else:
                coeff = np.asarray(value, dtype=float)
            self._cache[key] = coeff
        return self._cache[key]


def duhamel_nodes(t_start, s_max, ratio=1.01, ds_max=0.25, extra=()):
    nodes = [float(t_start)]
    while nodes[-1] < s_max:
        step = min(ds_max, (ratio - 1.0) * nodes[-1])
        nodes.append(min(nodes[-1] + step, s_max))
    out = np.union1d(np.asarray(nodes), np.asarray([e for e in extra if t_start <= e <= s_max], dtype=float))
    # merge near-duplicates created by the extra nodes
    keep = np.concatenate([[True], np.diff(out) > 1e-9 * out[1:]])
    return out[keep]


def oscillatory_moments(xi, h, order=3, series_terms=24):
    """M_m = ∫_0^h x^m e^{-iξx} dx for m = 0..order, vectorized over ξ."""
    xi = np.asarray(xi, dtype=float)
    small = xi * h < 1.0
    out = np.zeros((order + 1, len(xi)), dtype=complex)
    if small.any():
        z = -1j * xi[small]
        for m in range(order + 1):
            acc = np.zeros(small.sum(), dtype=complex)
            for k in range(series_terms):
                acc += z ** k * h ** (m + k + 1) / (factorial(k) * (m + k + 1))
            out[m, small] = acc
    big = ~small
    if big.any():
        x = xi[big]
        e = np.exp(-1j * x * h)
        prev = (1.0 - e) / (1j * x)
        out[0, big] = prev
        for m in range(1, order + 1):
            prev = h ** m * e / (-1j * x) + m / (1j * x) * prev
            out[m, big] = prev
    return out


def _lagrange_power_coefficients(xs):
    """Row j holds the power-basis coefficients (ascending) of the j-th Lagrange polynomial."""
    n = len(xs)
    out = np.zeros((n, n))
    for j in range(n):
        others = np.delete(xs, j)
        poly = np.poly(others)[::-1]
        out[j] = poly / np.prod(xs[j] - others)
    return out


def filon_interval_weights(xi, nodes, i, order=3):
    """
    Weights w_j(ξ) with ∫_{s_i}^{s_{i+1}} e^{-iξs} F(s) ds ≈ e^{-iξs_i} Σ_j w_j F(s_j),
    F interpolated by a local polynomial through order+1 consecutive nodes.
    """
    n = len(nodes)
    width = min(order + 1, n)
    start = min(max(i - 1, 0), n - width)
    idx = np.arange(start, start + width)
    xs = nodes[idx] - nodes[i]
    h = nodes[i + 1] - nodes[i]
    moments = oscillatory_moments(xi, h, width - 1)
    coef = _lagrange_power_coefficients(xs)
    return idx, coef @ moments


@dataclass
class DuhamelResult:
    table: EigenbasisTable
    times: np.ndarray
    K: np.ndarray          # H̃ coefficients of Kf, (n_t, n_ξ)
    dtK: np.ndarray        # H̃ coefficients of ∂_t Kf
    source_sup: float      # sup_s s^{α+2}‖f(s)‖_LX on the sampled nodes
    alpha: float
    s_max: float
    tail_K: float
    tail_dtK: float

    @property
    def LstarK(self):
        """H-calculus coefficients of L*Kf."""
        return self.K * self.table.xi

    def coefficients(self, variant):
        if variant == "K":
            return self.K
        if variant == "dtK":
            return self.dtK
        if variant == "LstarK":
            return self.LstarK
        raise ValueError(f"unknown variant {variant!r}")

    def field(self, variant, j):
        calculus = "H" if variant == "LstarK" else "Htilde"
        values = inverse_values(self.table, calculus, self.coefficients(variant)[j])
        return RadialField(self.table.radial_grid, values, "map" if variant == "LstarK" else "gauge")

    def index(self, t):
        j = int(np.argmin(np.abs(self.times - t)))
        if not np.isclose(self.times[j], t, rtol=1e-12, atol=1e-12):
            raise ValueError(f"time {t} was not requested from the Duhamel integrator")
        return j


def duhamel_integrate(source: SpaceTimeSource, times, table: EigenbasisTable, s_max=512.0,
                      ratio=1.01, ds_max=0.25, order=3, tail_tol=None, nodes=None):
    """
    Kf = −F_H̃^{-1}∫_t^{S_max} ξ^{-1} sin((t−s)ξ) F_H̃ f(s) ds at every requested time,
    with J(t) = ∫_t^{S_max} e^{-iξs} F_H̃ f(s) ds accumulated from S_max down.
    """
    times = np.atleast_1d(np.asarray(times, dtype=float))
    if np.any(times > s_max):
        raise ValueError("requested times beyond S_max")
    if nodes is None:
        nodes = duhamel_nodes(times.min(), s_max, ratio, ds_max, extra=times)
    xi = table.xi
    F = np.stack([source.spectral(s, table) for s in nodes])
    n = len(nodes)
    J = np.zeros((n, len(xi)), dtype=complex)
    for i in range(n - 2, -1, -1):
        idx, w = filon_interval_weights(xi, nodes, i, order)
        piece = np.exp(-1j * xi * nodes[i]) * np.einsum("jk,jk->k", w, F[idx])
        J[i] = J[i + 1] + piece
    where = np.searchsorted(nodes, times)
    phase = np.exp(1j * times[:, None] * xi)
    EJ = phase * J[where]
    K = -np.imag(EJ) / xi
    dtK = -np.real(EJ)
    lx = lx_norm_values(table, F)
    source_sup = float(np.max(nodes ** (source.alpha + 2) * lx))
    alpha = source.alpha
    tail_K = source_sup * s_max ** (-alpha) / alpha
    tail_dtK = source_sup * s_max ** (-alpha - 1) / (alpha + 1)
    result = DuhamelResult(table, times, K, dtK, source_sup, alpha, s_max, tail_K, tail_dtK)
    if tail_tol is not None:
        scale = float(np.max(lx_norm_values(table, K))) if np.any(K) else 0.0
        if tail_K > tail_tol * max(scale, 1e-300) and source_sup > 0:
            raise TailBoundError("Duhamel tail beyond S_max exceeds the budget", tail=tail_K, scale=scale)
    logger.debug(f"Duhamel integral over {n} nodes to S_max={s_max}: tail bounds {tail_K:.2e}/{tail_dtK:.2e}")
    return result


def duhamel_K(source: SpaceTimeSource, t, table: EigenbasisTable, variant="K", s_max=512.0, **kwargs):
    result = duhamel_integrate(source, [t], table, s_max=s_max, **kwargs)
    return result.field(variant, 0)


# ---- closed form oracle ----
def _power_trig_antiderivatives(n, xi, s):
    """(∫^s x^{-n} cos ξx dx, ∫^s x^{-n} sin ξx dx) for integer n ≥ 1."""
    si, ci = sici(xi * s)
    c, sn = ci, si
    for m in range(2, n + 1):
        p = s ** (1 - m) / (1 - m)
        c, sn = np.cos(xi * s) * p + xi / (1 - m) * sn, np.sin(xi * s) * p - xi / (1 - m) * c
    return c, sn


def closed_form_power_source(g_hat, xi, t, s_max, power=3):
    """K̂ and ∂_tK̂ for f(s) = s^{-power} g, exactly per ξ."""
    c1, s1 = _power_trig_antiderivatives(power, xi, s_max)
    c0, s0 = _power_trig_antiderivatives(power, xi, t)
    ic, is_ = c1 - c0, s1 - s0
    # sin((t−s)ξ) = sin tξ cos sξ − cos tξ sin sξ
    k_hat = -(np.sin(t * xi) * ic - np.cos(t * xi) * is_) / xi * g_hat
    dt_hat = -(np.cos(t * xi) * ic + np.sin(t * xi) * is_) * g_hat
    return k_hat, dt_hat


# ---- audits ----
def duhamel_residual(source: SpaceTimeSource, t, table: EigenbasisTable, s_max, delta=0.05, **kwargs):
    """‖(∂_t² + H̃)Kf − f‖/‖f‖ at t, by time differences and finite-difference H̃."""
    times = np.array([t - delta, t, t + delta])
    res = duhamel_integrate(source, times, table, s_max=s_max, **kwargs)
    grid = table.radial_grid
    vals = inverse_values(table, "Htilde", res.K)
    dtt = (vals[2] - 2 * vals[1] + vals[0]) / delta ** 2
    lhs = dtt + operator_values("Htilde", grid, vals[1])
    f = inverse_values(table, "Htilde", source.spectral(t, table))
    inner = (grid.nodes > 4 * grid.nodes[0]) & (grid.nodes < 0.9 * grid.r_max)
    num = np.sqrt(grid.rdr_weights[inner] @ (lhs - f)[inner] ** 2)
    den = np.sqrt(grid.rdr_weights[inner] @ f[inner] ** 2)
    return float(num / den) if den > 0 else float(num)


def kest_audit(source: SpaceTimeSource, times, table: EigenbasisTable, s_max=512.0, **kwargs):
    """
    Ratios t^α‖ψ‖_LX / B, t^{α+1}‖∂_tψ‖_LX / B and t^{α+1}‖ψ‖_{Ḣ¹_e} / B with
    B = sup_s s^{α+2}‖f(s)‖_LX, across the requested times.
    """
    res = duhamel_integrate(source, times, table, s_max=s_max, **kwargs)
    alpha = res.alpha
    B = res.source_sup
    t = res.times
    lx = lx_norm_values(table, res.K)
    lx_t = lx_norm_values(table, res.dtK)
    grid = table.radial_grid
    hdot = np.array([physical_norms(grid, inverse_values(table, "Htilde", c))["hdot1_e"] for c in res.K])
    if B == 0:
        ratios = {name: np.zeros_like(t) for name in ("lx", "dt_lx", "hdot1")}
    else:
        ratios = {
            "lx": t ** alpha * lx / B,
            "dt_lx": t ** (alpha + 1) * lx_t / B,
            "hdot1": t ** (alpha + 1) * hdot / B,
        }
    lstar_phys = np.array([
        np.sqrt(grid.integrate_rdr(operator_values("Lstar", grid, inverse_values(table, "Htilde", c)) ** 2))
        for c in res.K
    ])
    lstar_spec = np.sqrt((res.LstarK ** 2) @ table.freq_grid.weights)
    return {
        "times": t.tolist(),
        "source_sup": B,
        "alpha": alpha,
        "ratios": {k: v.tolist() for k, v in ratios.items()},
        "sup": {k: float(np.max(v)) for k, v in ratios.items()},
        "doubling": {k: stable_under_doubling(t, v) for k, v in ratios.items()},
        "lx": lx.tolist(),
        "dt_lx": lx_t.tolist(),
        "hdot1": hdot.tolist(),
        "lstar_l2_physical": lstar_phys.tolist(),
        "lstar_l2_spectral": lstar_spec.tolist(),
        "tail_K": res.tail_K,
        "tail_dtK": res.tail_dtK,
    }
