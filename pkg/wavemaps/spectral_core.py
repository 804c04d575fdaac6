# wavemaps/spectral_core.py
"""
Generalized eigenfunctions of H = L*L and H̃ = LL*.

φ_ξ solves Hφ = ξ²φ and is regular at the origin; ψ_ξ = ξ^{-1}Lφ_ξ solves
H̃ψ = ξ²ψ. Both are produced together by integrating the first order system

    φ' = ξψ − (h3/r)φ,     ψ' = ((h3 − 1)/r)ψ − ξφ

outward from a Frobenius seed, then matched to the far-field form
φ = 2 Re(a r^{-1/2} e^{irξ} σ). The scale is fixed so that the transform
f ↦ ∫φ_ξ f r dr is an isometry onto L²(dξ); near the origin
φ_ξ = q(ξ)(φ_0 + O(ξ²r²)).
"""
from __future__ import annotations

import hashlib
import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path

import numpy as np
from numpy.polynomial import Chebyshev
from scipy.integrate import solve_ivp

from .exceptions import CertificateFailure, GridError, IntegrationFailure
from .fitting import fit_power_law
from .grids import FrequencyGrid, RadialGrid, dyadic_cutoff
from .soliton_geometry import (
    h1, h3, inverse_L_from_zero, inverse_Lstar_from_zero, operator_values, phi0,
)

logger = logging.getLogger(__name__)

ISOMETRY_AMPLITUDE = np.sqrt(2.0 / np.pi)
MATCH_QR = 40.0
SIGMA_ORDER = 6
FIT_POINTS = 64
FIT_WAVELENGTHS = 4
CHUNK = 128

DEFAULT_TOLERANCES = {
    "ode_rtol": 1e-10,
    "eigen_residual": 1e-6,
    "fit_residual": 1e-6,
    "dual_identity": 1e-6,
}


# ---- far-field symbol ----
def _transport_weight(z):
    return 0.75 - 8.0 * z ** 2 / (1.0 + z ** 2) ** 2


@dataclass(frozen=True, eq=False)
class OscSymbol:
    """
    σ(rξ, r) = Σ_j (i/ξ)^j β_j(1/r), β_0 = 1,
    β_{j+1}(z) = ½(∫_0^z W β_j − z² β_j'),  W(z) = 3/4 − 8z²/(1+z²)².

    Each β_j is a Chebyshev series on z ∈ [0, 1], i.e. r ≥ 1.
    """
    order: int
    betas: tuple
    dbetas: tuple

    @classmethod
    def build(cls, order=SIGMA_ORDER, degree=40, cap=64):
        domain = [0.0, 1.0]
        W = Chebyshev.interpolate(_transport_weight, degree, domain=domain)
        zsq = Chebyshev.interpolate(lambda z: z ** 2, 2, domain=domain)
        betas = [Chebyshev([1.0], domain=domain)]
        for _ in range(order):
            b = betas[-1]
            nxt = 0.5 * ((W * b).integ(lbnd=0.0) - zsq * b.deriv())
            betas.append(nxt.truncate(min(cap, len(nxt.coef))))
        return cls(order, tuple(betas), tuple(b.deriv() for b in betas))

    def _parts(self, xi, r):
        xi = np.asarray(xi, dtype=float)
        r = np.asarray(r, dtype=float)
        if np.any(r < 1.0):
            raise GridError("far-field symbol is only evaluated for r ≥ 1")
        z = 1.0 / r
        b = [beta(z) for beta in self.betas]
        db = [d(z) for d in self.dbetas]
        powers = [(1j / xi) ** j for j in range(self.order + 1)]
        return z, b, db, powers

    def sigma(self, xi, r):
        _, b, _, p = self._parts(xi, r)
        return sum(pj * bj for pj, bj in zip(p, b))

    def remainder(self, xi, r):
        """Size of the last retained term."""
        _, b, _, p = self._parts(xi, r)
        return np.abs(p[-1] * b[-1])

    def sigma_tilde(self, xi, r, include_potential=True):
        """σ̃ = iσ − σ/(2q) + ∂_qσ + ξ^{-1}(∂_rσ + h3σ/r), so that ξ^{-1}Lφ⁺ = r^{-1/2}e^{irξ}σ̃."""
        xi = np.asarray(xi, dtype=float)
        r = np.asarray(r, dtype=float)
        z, b, db, p = self._parts(xi, r)
        q = r * xi
        sigma = sum(pj * bj for pj, bj in zip(p, b))
        d_q = -sum(j * p[j] * b[j] for j in range(1, self.order + 1)) / q
        d_r = sum(p[j] * (j * b[j] / r - z ** 2 * db[j]) for j in range(self.order + 1))
        extra = d_r + (h3(r) * sigma / r if include_potential else 0.0)
        return 1j * sigma - sigma / (2 * q) + d_q + extra / xi

    def phi_plus_coefficient(self, j, r):
        """φ⁺_j(r) = i^j r^j β_j(1/r), the coefficient of q^{-j}."""
        r = np.asarray(r, dtype=float)
        return (1j ** j) * r ** j * self.betas[j](1.0 / r)


@lru_cache(maxsize=8)
def osc_symbol(order=SIGMA_ORDER):
    return OscSymbol.build(order)


def sigma_tilde_eval(q, r, order=SIGMA_ORDER, include_potential=True):
    if np.any(np.asarray(q) < 1.0):
        raise GridError("σ̃ is only defined for q = rξ ≥ 1", q=float(np.min(q)))
    xi = np.asarray(q, dtype=float) / np.asarray(r, dtype=float)
    return osc_symbol(order).sigma_tilde(xi, r, include_potential)


def sigma_tilde_coefficient(xi=1.0, r_start=64.0, include_potential=True, order=SIGMA_ORDER):
    """Limit of (σ̃ − i)·rξ at fixed ξ, by two rounds of Richardson extrapolation in r."""
    rs = r_start * 2.0 ** np.arange(3)
    c = np.real((sigma_tilde_eval(rs * xi, rs, order, include_potential) - 1j) * rs * xi)
    r1 = 2 * c[1:] - c[:-1]
    return float((4 * r1[1] - r1[0]) / 3)


# ---- interior seed ----
def frobenius_coefficients(xi, terms=8):
    """
    Odd coefficients c_n of φ = Σ c_n r^n with c_1 = 1, split as c_n = c_n^0 + e_n
    where Σ c_n^0 r^n = r/(1+r²) is the ξ = 0 solution.
    """
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    n_max = 2 * terms - 1
    c0 = {n: (-1.0) ** ((n - 1) // 2) for n in range(1, n_max + 1, 2)}
    e = {1: np.zeros_like(xi)}
    for n in range(3, n_max + 1, 2):
        acc = xi ** 2 * (c0[n - 2] + e[n - 2])
        m = 0
        while n - 2 - 2 * m >= 1:
            acc = acc + 8.0 * (-1.0) ** m * (m + 1) * e[n - 2 - 2 * m]
            m += 1
        e[n] = -acc / (n * n - 1.0)
    return c0, e


def frobenius_seed(xi, r0, terms=8):
    """(φ, ψ) at r0 for the regular solution with φ ≈ r."""
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    c0, e = frobenius_coefficients(xi, terms)
    phi = sum((c0[n] + e[n]) * r0 ** n for n in c0)
    # Lφ = r/(1+r²) Σ (n−1)(c_n + c_{n−2}) r^{n−2}; the c^0 parts cancel pairwise
    lphi = sum((n - 1) * (e[n] + e[n - 2]) * r0 ** (n - 2) for n in c0 if n >= 3)
    lphi = lphi * r0 / (1.0 + r0 ** 2)
    return phi, lphi / xi


def _rhs(r, y, xi):
    m = len(xi)
    phi, psi = y[:m], y[m:]
    a = h3(r) / r
    return np.concatenate([xi * psi - a * phi, (a - 1.0 / r) * psi - xi * phi])


# ---- single-ξ and block integration ----
@dataclass
class RegularSolution:
    """Unnormalized regular solution of the (φ, ψ) system for a block of ξ."""
    xi: np.ndarray
    r0: float
    r_match: float
    ode_nodes: np.ndarray      # grid indices sampled from the ODE
    phi: np.ndarray            # (m, n_ode) at ode_nodes
    psi: np.ndarray
    fit_r: np.ndarray
    fit_phi: np.ndarray        # (m, n_fit)
    fit_psi: np.ndarray
    error_estimate: np.ndarray  # per-ξ, from the tighter re-solve


def _block_geometry(xi, grid, fit_points=FIT_POINTS):
    xi_lo, xi_hi = float(np.min(xi)), float(np.max(xi))
    r0 = min(0.5 * grid.nodes[0], 0.05 / max(1.0, xi_hi))
    r_match = max(MATCH_QR / xi_lo, MATCH_QR)
    span = FIT_WAVELENGTHS * 2 * np.pi / xi_lo
    fit_r = np.linspace(r_match, r_match + span, fit_points)
    ode_nodes = np.nonzero(grid.nodes < r_match)[0]
    return r0, r_match, fit_r, ode_nodes


def _integrate(xi, r0, points, rtol):
    y0 = np.concatenate(frobenius_seed(xi, r0))
    sol = solve_ivp(
        _rhs, (r0, points[-1]), y0, method="DOP853", t_eval=points,
        rtol=rtol, atol=rtol * 1e-12, args=(xi,),
    )
    if not sol.success:
        logger.warning(f"eigenfunction integration failed: {sol.message}")
        raise IntegrationFailure("eigenfunction integration failed", xi=float(xi[0]), reason=sol.message)
    if not np.all(np.isfinite(sol.y)):
        raise IntegrationFailure("eigenfunction overflow before the matching radius", xi=float(xi[0]))
    m = len(xi)
    return sol.y[:m], sol.y[m:]


def regular_solution(xi, grid: RadialGrid, rtol=1e-10) -> RegularSolution:
    """Integrate outward from the Frobenius seed (φ ≈ r) through the far-field fit window."""
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    if np.any(xi <= 0):
        raise GridError("ξ must be positive")
    r0, r_match, fit_r, ode_nodes = _block_geometry(xi, grid)
    points = np.concatenate([grid.nodes[ode_nodes], fit_r])
    phi, psi = _integrate(xi, r0, points, rtol)
    phi_f, psi_f = _integrate(xi, r0, points, rtol * 1e-2)
    scale = np.max(np.abs(phi_f), axis=1)
    err = np.max(np.abs(phi - phi_f), axis=1) / scale
    err = np.maximum(err, np.max(np.abs(psi - psi_f), axis=1) / np.max(np.abs(psi_f), axis=1))
    n = len(ode_nodes)
    return RegularSolution(
        xi=xi, r0=r0, r_match=r_match, ode_nodes=ode_nodes,
        phi=phi_f[:, :n], psi=psi_f[:, :n],
        fit_r=fit_r, fit_phi=phi_f[:, n:], fit_psi=psi_f[:, n:],
        error_estimate=err,
    )


@dataclass
class FarfieldMatch:
    xi: np.ndarray
    a: np.ndarray               # complex, after normalization
    q: np.ndarray
    scale: np.ndarray           # multiplier applied to the raw solution
    fit_residual: np.ndarray
    psi_match_residual: np.ndarray


def farfield_match(solution: RegularSolution, symbol=None) -> FarfieldMatch:
    """
    Least-squares fit of the raw tail to 2 Re(A r^{-1/2} e^{irξ} σ), then
    normalization to the isometric amplitude 2|a| = √(2/π). The seed has
    φ ≈ r, so q = scale/2.
    """
    symbol = symbol or osc_symbol()
    xi = solution.xi
    r = solution.fit_r
    m = len(xi)
    a = np.empty(m, dtype=complex)
    fit_res = np.empty(m)
    psi_res = np.empty(m)
    for i in range(m):
        g = r ** -0.5 * np.exp(1j * r * xi[i]) * symbol.sigma(xi[i], r)
        basis = np.stack([2 * g.real, -2 * g.imag], axis=1)
        coef, *_ = np.linalg.lstsq(basis, solution.fit_phi[i], rcond=None)
        model = basis @ coef
        fit_res[i] = np.linalg.norm(model - solution.fit_phi[i]) / np.linalg.norm(solution.fit_phi[i])
        a[i] = coef[0] + 1j * coef[1]
        gt = r ** -0.5 * np.exp(1j * r * xi[i]) * symbol.sigma_tilde(xi[i], r)
        psi_model = 2 * np.real(a[i] * gt)
        psi_res[i] = np.linalg.norm(psi_model - solution.fit_psi[i]) / np.linalg.norm(solution.fit_psi[i])
    scale = ISOMETRY_AMPLITUDE / (2 * np.abs(a))
    q = scale / 2.0
    if np.any(q <= 0):
        raise CertificateFailure("non-positive interior weight q", xi=float(xi[np.argmin(q)]))
    return FarfieldMatch(xi, a * scale, q, scale, fit_res, psi_res)


def psi_from_phi(phi, xi, grid: RadialGrid, tol=1e-6, band=None):
    """
    ψ_ξ = ξ^{-1}Lφ_ξ by finite differences, with the dual identity L*ψ = ξφ
    checked where the grid resolves the oscillation.
    """
    phi = np.asarray(phi, dtype=float)
    psi = operator_values("L", grid, phi) / xi
    mask = resolved_band(grid, xi) if band is None else band
    if mask.sum() >= 10:
        dual = operator_values("Lstar", grid, psi) - xi * phi
        rel = np.max(np.abs(dual[mask])) / np.max(np.abs(xi * phi[mask]))
        if rel > tol:
            raise CertificateFailure("dual identity L*ψ = ξφ violated", xi=float(xi), residual=float(rel))
    return psi


def resolved_band(grid: RadialGrid, xi, per_radian=0.05, r_limit=None):
    """Interior nodes where the local spacing times max(ξ, 1/r) is small enough for finite differences."""
    r = grid.nodes
    h = np.gradient(r)
    mask = h * np.maximum(xi, 1.0 / r) <= per_radian
    mask[:3] = False
    mask[-3:] = False
    if r_limit is not None:
        mask &= r <= r_limit
    return mask


def fd_residual(values, xi, grid: RadialGrid, kind="H", mask=None):
    """max|(K − ξ²)f| / max|ξ² f| over resolved nodes (nan when nothing is resolved)."""
    mask = resolved_band(grid, xi) if mask is None else mask
    if mask.sum() < 10:
        return float("nan")
    res = operator_values(kind, grid, values) - xi ** 2 * values
    return float(np.max(np.abs(res[mask])) / max(np.max(np.abs(xi ** 2 * values[mask])), 1e-300))


# ---- interior series ----
def interior_series(xi, q, grid: RadialGrid, terms=8):
    """
    q Σ_j ξ^{2j} Φ_j with Φ_0 = φ_0 and Φ_{j+1} = L_0^{-1}(L*)_0^{-1}Φ_j,
    the inverses taken from the origin.
    """
    phis = [phi0(grid.nodes)]
    for _ in range(terms - 1):
        phis.append(inverse_L_from_zero(grid, inverse_Lstar_from_zero(grid, phis[-1])))
    total = sum(xi ** (2 * j) * p for j, p in enumerate(phis))
    return q * total


# ---- tables ----
@dataclass(eq=False)
class EigenbasisTable:
    freq_grid: FrequencyGrid
    radial_grid: RadialGrid
    phi: np.ndarray             # (n_ξ, n_r)
    psi: np.ndarray
    q: np.ndarray
    a_modulus: np.ndarray
    a_phase: np.ndarray
    residual: np.ndarray        # integrator error estimate
    fit_residual: np.ndarray
    dual_residual: np.ndarray   # finite-difference L*ψ − ξφ on resolved nodes
    fd_residual: np.ndarray     # finite-difference (H − ξ²)φ on resolved nodes
    psi_fd_residual: np.ndarray  # finite-difference (H̃ − ξ²)ψ on resolved nodes
    tolerances: dict = field(default_factory=dict)

    @property
    def xi(self):
        return self.freq_grid.xi

    @property
    def amplitude(self):
        """2|a|, the oscillation amplitude of r^{1/2}φ_ξ; equals √(2/π)."""
        return 2 * self.a_modulus

    @property
    def a(self):
        return self.a_modulus * np.exp(1j * self.a_phase)

    def block(self, k):
        return np.nonzero(self.freq_grid.dyadic_index == k)[0]

    def digest(self):
        return table_key(self.freq_grid, self.radial_grid, self.tolerances)

    def manifest(self):
        return {
            "radial_grid": self.radial_grid.describe(),
            "freq_grid": self.freq_grid.describe(),
            "tolerances": self.tolerances,
            "max_residual": float(np.max(self.residual)),
            "max_fit_residual": float(np.max(self.fit_residual)),
            "max_dual_residual": _nanmax(self.dual_residual),
            "amplitude_range": [float(self.amplitude.min()), float(self.amplitude.max())],
            "printed_modulus_ratio": float(ISOMETRY_AMPLITUDE / np.mean(self.a_modulus)),
        }


def _nanmax(x):
    x = np.asarray(x)
    return None if np.all(np.isnan(x)) else float(np.nanmax(x))


def table_key(freq_grid, radial_grid, tolerances):
    h = hashlib.sha256()
    h.update(freq_grid.digest.encode())
    h.update(radial_grid.digest.encode())
    h.update(json.dumps(tolerances, sort_keys=True).encode())
    return h.hexdigest()[:24]


def _chunks(freq_grid, size=CHUNK):
    out = []
    for k in np.unique(freq_grid.dyadic_index):
        idx = np.nonzero(freq_grid.dyadic_index == k)[0]
        for start in range(0, len(idx), size):
            out.append(idx[start:start + size])
    return out


def _build_chunk(args):
    idx, xi, grid, tol = args
    sol = regular_solution(xi, grid, tol["ode_rtol"])
    match = farfield_match(sol)
    symbol = osc_symbol()
    n_r = grid.size
    m = len(xi)
    phi = np.empty((m, n_r))
    psi = np.empty((m, n_r))
    n = len(sol.ode_nodes)
    phi[:, :n] = sol.phi * match.scale[:, None]
    psi[:, :n] = sol.psi * match.scale[:, None]
    if n < n_r:
        r_far = grid.nodes[n:]
        for i in range(m):
            e = r_far ** -0.5 * np.exp(1j * r_far * xi[i])
            phi[i, n:] = 2 * np.real(match.a[i] * e * symbol.sigma(xi[i], r_far))
            psi[i, n:] = 2 * np.real(match.a[i] * e * symbol.sigma_tilde(xi[i], r_far))
    dual = np.empty(m)
    fd_h = np.empty(m)
    fd_ht = np.empty(m)
    for i in range(m):
        band = resolved_band(grid, xi[i], r_limit=sol.r_match)
        if band.sum() >= 10:
            d = operator_values("Lstar", grid, psi[i]) - xi[i] * phi[i]
            dual[i] = np.max(np.abs(d[band])) / np.max(np.abs(xi[i] * phi[i][band]))
        else:
            dual[i] = np.nan
        fd_h[i] = fd_residual(phi[i], xi[i], grid, "H", band)
        fd_ht[i] = fd_residual(psi[i], xi[i], grid, "Htilde", band)
    worst = int(np.argmax(np.maximum(sol.error_estimate, match.fit_residual)))
    if sol.error_estimate[worst] > tol["eigen_residual"] or match.fit_residual[worst] > tol["fit_residual"]:
        raise CertificateFailure(
            "eigenfunction certificate failed",
            xi=float(xi[worst]),
            residual=float(sol.error_estimate[worst]),
            fit_residual=float(match.fit_residual[worst]),
        )
    return idx, phi, psi, match, sol.error_estimate, dual, fd_h, fd_ht


def build_table(freq_grid: FrequencyGrid, radial_grid: RadialGrid, tolerances=None,
                workers=1, cache_dir=None, use_cache=True) -> EigenbasisTable:
    tol = {**DEFAULT_TOLERANCES, **(tolerances or {})}
    key = table_key(freq_grid, radial_grid, tol)
    cache = None
    if cache_dir is not None:
        cache = Path(cache_dir)
        path = cache / f"eigen-{key}.npz"
        if use_cache and path.exists():
            logger.info(f"loading eigenbasis table {key} from {path}")
            return load_table(path, freq_grid, radial_grid, tol)
    chunks = _chunks(freq_grid)
    logger.info(f"building eigenbasis table {key}: {freq_grid.size} frequencies in {len(chunks)} blocks, {radial_grid.size} radii")
    n = freq_grid.size
    phi = np.empty((n, radial_grid.size))
    psi = np.empty((n, radial_grid.size))
    q = np.empty(n)
    a = np.empty(n, dtype=complex)
    resid = np.empty(n)
    fit = np.empty(n)
    dual = np.empty(n)
    fd_h = np.empty(n)
    fd_ht = np.empty(n)
    tasks = [(idx, freq_grid.xi[idx], radial_grid, tol) for idx in chunks]
    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        for idx, p, s, match, err, d, fh, fht in pool.map(_build_chunk, tasks):
            phi[idx], psi[idx] = p, s
            q[idx], a[idx] = match.q, match.a
            resid[idx], fit[idx] = err, match.fit_residual
            dual[idx], fd_h[idx], fd_ht[idx] = d, fh, fht
    table = EigenbasisTable(
        freq_grid, radial_grid, phi, psi, q, np.abs(a), np.angle(a),
        resid, fit, dual, fd_h, fd_ht, tol,
    )
    ratio = ISOMETRY_AMPLITUDE / float(np.mean(table.a_modulus))
    logger.info(
        f"eigenbasis table {key} done: max residual {resid.max():.2e}, "
        f"isometric |a| = {table.a_modulus.mean():.6f} (printed √(2/π) differs by factor {ratio:.4f})"
    )
    if cache is not None:
        save_table(table, cache)
    return table


def save_table(table: EigenbasisTable, cache_dir):
    cache_dir = Path(cache_dir)
    cache_dir.mkdir(parents=True, exist_ok=True)
    key = table.digest()
    header = np.stack([
        table.xi, table.freq_grid.dyadic_index.astype(float), table.q,
        table.a_modulus, table.a_phase, table.residual,
    ], axis=1)
    np.savez(
        cache_dir / f"eigen-{key}.npz",
        header=header, phi=table.phi, psi=table.psi,
        fit_residual=table.fit_residual, dual_residual=table.dual_residual,
        fd_residual=table.fd_residual, psi_fd_residual=table.psi_fd_residual,
    )
    with open(cache_dir / f"eigen-{key}.json", "w") as fh:
        json.dump({"key": key, **table.manifest()}, fh, indent=2, sort_keys=True)
    return cache_dir / f"eigen-{key}.npz"


def load_table(path, freq_grid, radial_grid, tolerances):
    with np.load(path) as data:
        header = data["header"]
        if not np.array_equal(header[:, 0], freq_grid.xi):
            raise GridError("cached table does not match the frequency grid", path=str(path))
        return EigenbasisTable(
            freq_grid, radial_grid, data["phi"], data["psi"], header[:, 2],
            header[:, 3], header[:, 4], header[:, 5], data["fit_residual"],
            data["dual_residual"], data["fd_residual"], data["psi_fd_residual"],
            dict(tolerances),
        )


# ---- audits ----
def profile_weight(r, k):
    """m_k(r)."""
    r = np.asarray(r, dtype=float)
    if k < 0:
        return np.minimum(1.0, np.log1p(r ** 2) / np.sqrt(4.0 + k * k))
    return np.minimum(1.0, r ** 2 * 4.0 ** k)


def remainder_weight(r, k):
    """m_k^1(r)."""
    r = np.asarray(r, dtype=float)
    if k < 0:
        return np.minimum(1.0, r * 2.0 ** k * np.log1p(r ** 2) / np.sqrt(4.0 + k * k))
    return np.minimum(1.0, r ** 3 * 8.0 ** k)


def pointwise_profile_audit(table: EigenbasisTable, ks=None):
    """
    Per-block constants C_k of |ψ_ξ| ≤ C 2^{k/2} m_k and of
    |φ_ξ − qφ_0| ≤ C 2^{k/2} m_k^1 on rξ ≤ 1.
    """
    r = table.radial_grid.nodes
    ks = list(ks if ks is not None else table.freq_grid.block_range())
    psi_c, phi_c = {}, {}
    for k in ks:
        idx = table.block(k)
        if len(idx) == 0:
            continue
        best_psi = best_phi = 0.0
        for i in idx:
            xi = table.xi[i]
            inner = r * xi <= 1.0
            if not inner.any():
                continue
            scale = 2.0 ** (k / 2)
            best_psi = max(best_psi, float(np.max(np.abs(table.psi[i, inner]) / (scale * profile_weight(r[inner], k)))))
            nonres = table.phi[i, inner] - table.q[i] * phi0(r[inner])
            best_phi = max(best_phi, float(np.max(np.abs(nonres) / (scale * remainder_weight(r[inner], k)))))
        psi_c[k], phi_c[k] = best_psi, best_phi
    return {"psi_constants": psi_c, "phi_remainder_constants": phi_c}


def weight_smoothness(table: EigenbasisTable):
    """Divided-difference monitors of (ξ∂_ξ)^α log q and log |a| for α = 1, 2."""
    s = np.log(table.xi)
    out = {}
    for name, values in (("q", np.log(table.q)), ("a", np.log(table.a_modulus))):
        d1 = np.gradient(values, s)
        d2 = np.gradient(d1, s)
        out[name] = {"first": float(np.max(np.abs(d1))), "second": float(np.max(np.abs(d2)))}
    return out


def partition_check(freq_grid: FrequencyGrid):
    total = sum(dyadic_cutoff(freq_grid.xi, k, freq_grid.k_min, freq_grid.k_max) for k in freq_grid.block_range())
    return float(np.max(np.abs(total - 1.0)))


def weight_audit(table: EigenbasisTable):
    """
    Large-ξ exponent of q over [8, 64], the two-sided bound of
    q ξ^{1/2}|log ξ| over [2^-10, 2^-4], and the amplitude deviation from √(2/π).
    """
    xi, q = table.xi, table.q
    report = {
        "amplitude_deviation": float(np.max(np.abs(table.amplitude - ISOMETRY_AMPLITUDE))),
        "printed_modulus_ratio": float(ISOMETRY_AMPLITUDE / np.mean(table.a_modulus)),
    }
    high = (xi >= 8.0) & (xi <= 64.0)
    if high.sum() >= 4:
        report["q_large_exponent"] = fit_power_law(xi[high], q[high]).exponent
    low = (xi >= 2.0 ** -10) & (xi <= 2.0 ** -4)
    if low.any():
        scaled = q[low] * np.sqrt(xi[low]) * np.abs(np.log(xi[low]))
        report["q_small_bounds"] = [float(scaled.min()), float(scaled.max())]
    return report


def series_crosscheck(table: EigenbasisTable, xi=1.0, terms=8):
    """Relative sup difference between the tabulated φ_ξ and the interior series on rξ ≤ 1/2."""
    i = int(np.argmin(np.abs(table.xi - xi)))
    grid = table.radial_grid
    inner = grid.nodes * table.xi[i] <= 0.5
    series = interior_series(table.xi[i], table.q[i], grid, terms)
    scale = max(float(np.max(np.abs(table.phi[i, inner]))), 1e-300)
    return float(np.max(np.abs(table.phi[i, inner] - series[inner])) / scale)
