# wavemaps/distorted_fourier.py
"""
Distorted Fourier transforms in the H and H̃ calculi, dyadic projections,
the X / LX norm suite, and the nonresonance pairing against ψ_0.

    F_H f(ξ)  = ∫ φ_ξ(r) f(r) r dr        f = ∫ φ_ξ F_H f dξ
    F_H̃ f(ξ) = ∫ ψ_ξ(r) f(r) r dr        f = ∫ ψ_ξ F_H̃ f dξ
"""
from __future__ import annotations

import logging
from dataclasses import asdict, dataclass, field

import numpy as np

from .exceptions import CalculusMismatch, NonresonanceError, TailBoundError
from .fitting import fit_power_law
from .grids import RadialField, SpectralDensity, dyadic_cutoff, radial_cutoff
from .soliton_geometry import operator_values, psi0
from .spectral_core import EigenbasisTable

logger = logging.getLogger(__name__)

FORWARD, INVERSE = "forward", "inverse"


def japanese(x):
    """⟨x⟩ = √(4 + x²)."""
    return np.sqrt(4.0 + np.asarray(x, dtype=float) ** 2)


def _basis(table: EigenbasisTable, calculus):
    if calculus == "H":
        return table.phi
    if calculus == "Htilde":
        return table.psi
    raise CalculusMismatch(f"unknown calculus {calculus!r}")


def default_calculus(field_: RadialField):
    return "H" if field_.space_tag == "map" else "Htilde"


def tail_fraction(grid, values, band=0.9):
    """Share of the L²(rdr) mass of f in the outer band r > band·R_max."""
    values = np.asarray(values)
    outer = grid.nodes > band * grid.r_max
    total = grid.rdr_weights @ (values ** 2).T
    part = grid.rdr_weights[outer] @ (values[..., outer] ** 2).T
    with np.errstate(divide="ignore", invalid="ignore"):
        frac = np.sqrt(np.where(total > 0, part / total, 0.0))
    return float(np.max(frac))


def forward_values(table: EigenbasisTable, calculus, values, tail_tol=None):
    """Raw forward transform of samples (any leading batch shape)."""
    grid = table.radial_grid
    values = np.asarray(values, dtype=float)
    if tail_tol is not None:
        frac = tail_fraction(grid, values)
        if frac > tail_tol:
            raise TailBoundError("input has not decayed by R_max", tail_fraction=frac)
    return (values * grid.rdr_weights) @ _basis(table, calculus).T


def inverse_values(table: EigenbasisTable, calculus, coefficients):
    coefficients = np.asarray(coefficients)
    return (coefficients * table.freq_grid.weights) @ _basis(table, calculus)


def transform(direction, calculus, f, table: EigenbasisTable, tail_tol=1e-6, space_tag=None, taper=None):
    """
    forward: RadialField → SpectralDensity; inverse: SpectralDensity → RadialField.
    A forward ``taper`` radius M takes the improper limit through forward_tapered.
    """
    if direction == FORWARD:
        if not isinstance(f, RadialField):
            raise CalculusMismatch("forward transform expects a RadialField")
        if f.grid.digest != table.radial_grid.digest:
            raise CalculusMismatch("field is not sampled on the table's radial grid")
        if taper is not None:
            return forward_tapered(f, calculus, table, taper)[0]
        return SpectralDensity(table.freq_grid, forward_values(table, calculus, f.values, tail_tol), calculus)
    if direction == INVERSE:
        if not isinstance(f, SpectralDensity):
            raise CalculusMismatch("inverse transform expects a SpectralDensity")
        f.require(calculus)
        if f.freq_grid.digest != table.freq_grid.digest:
            raise CalculusMismatch("density does not live on the table's frequency grid")
        values = np.real(inverse_values(table, calculus, f.values))
        tag = space_tag or ("map" if calculus == "H" else "gauge")
        return RadialField(table.radial_grid, values, tag)
    raise CalculusMismatch(f"unknown direction {direction!r}")


def forward_tapered(f: RadialField, calculus, table: EigenbasisTable, M, tol=1e-6):
    """
    Forward transform in the improper sense: taper by χ_{≲M}, double M twice
    and Richardson-extrapolate; the two doublings must agree within tol.
    """
    r = table.radial_grid.nodes
    if 4 * M * 2 > table.radial_grid.r_max:
        raise TailBoundError("taper radius too large for the grid", M=M, r_max=table.radial_grid.r_max)
    est = [forward_values(table, calculus, f.values * radial_cutoff(r, m)) for m in (M, 2 * M, 4 * M)]
    d1, d2 = est[1] - est[0], est[2] - est[1]
    scale = max(float(np.max(np.abs(est[2]))), 1e-300)
    change = float(np.max(np.abs(d2))) / scale
    if change > tol and float(np.max(np.abs(d2))) > 0.5 * float(np.max(np.abs(d1))):
        raise TailBoundError("tapered transform does not settle under M doubling", change=change)
    extrapolated = 2 * est[2] - est[1]
    return SpectralDensity(table.freq_grid, extrapolated, calculus), change


# ---- dyadic projections ----
def project_dyadic(density: SpectralDensity, k):
    fg = density.freq_grid
    if not fg.k_min <= k <= fg.k_max:
        raise CalculusMismatch(f"dyadic index {k} outside [{fg.k_min}, {fg.k_max}]")
    return density.like(density.values * fg.cutoff(k))


def dyadic_pieces(density: SpectralDensity, weight=None):
    """L²(dξ) norms of χ_k·(weight·F) for every block k."""
    fg = density.freq_grid
    values = np.abs(density.values) if weight is None else np.abs(density.values * weight)
    return {
        k: float(np.sqrt(fg.weights @ (dyadic_cutoff(fg.xi, k, fg.k_min, fg.k_max) * values) ** 2))
        for k in fg.block_range()
    }


def _lx_sum(pieces):
    high = np.sqrt(sum(v ** 2 for k, v in pieces.items() if k >= 0))
    low = sum(2.0 ** (-k) / abs(k) * v for k, v in pieces.items() if k < 0)
    return float(high + low)


def _x_dyadic_sum(pieces):
    high = np.sqrt(sum(4.0 ** k * v ** 2 for k, v in pieces.items() if k >= 0))
    low = sum(v / abs(k) for k, v in pieces.items() if k < 0)
    return float(high + low)


@dataclass
class NormReport:
    calculus: str
    l2: float = 0.0
    l1: float = 0.0
    linf: float = 0.0
    hdot1_e: float = 0.0
    h1_e: float = 0.0
    x: float | None = None
    x_dyadic: float | None = None
    lx: float | None = None
    spectral_l2: float = 0.0
    pieces: dict = field(default_factory=dict)
    truncation: float = 0.0
    reassembly_error: float = 0.0

    def to_dict(self):
        out = asdict(self)
        out["pieces"] = {str(k): v for k, v in self.pieces.items()}
        return out


def physical_norms(grid, values):
    values = np.asarray(values, dtype=float)
    r = grid.nodes
    dv = grid.derivative(values)
    l2 = np.sqrt(grid.integrate_rdr(values ** 2))
    hdot = np.sqrt(grid.integrate_rdr(dv ** 2 + (values / r) ** 2))
    return {
        "l2": float(l2),
        "l1": float(grid.integrate_rdr(np.abs(values))),
        "linf": float(np.max(np.abs(values))),
        "hdot1_e": float(hdot),
        "h1_e": float(np.sqrt(l2 ** 2 + hdot ** 2)),
    }


def norm_suite(f, table: EigenbasisTable, calculus=None) -> NormReport:
    """
    Physical norms plus the dyadic X (H calculus) or LX (H̃ calculus) norm.

    ``x`` keeps the exact ξ weight inside each block so that ‖Lu‖_LX = ‖u‖_X
    is an identity of the representation; ``x_dyadic`` uses 2^k.
    """
    if isinstance(f, RadialField):
        calculus = calculus or default_calculus(f)
        density = transform(FORWARD, calculus, f, table, tail_tol=None)
        report = NormReport(calculus, **physical_norms(f.grid, f.values))
    else:
        calculus = calculus or f.calculus
        density = f.require(calculus)
        report = NormReport(calculus)
    fg = density.freq_grid
    report.spectral_l2 = density.l2_norm()
    plain = dyadic_pieces(density)
    report.pieces = plain
    if calculus == "H":
        weighted = dyadic_pieces(density, fg.xi)
        report.x = _lx_sum(weighted)
        report.x_dyadic = _x_dyadic_sum(plain)
        edge = {fg.k_min: weighted[fg.k_min] * 2.0 ** (-fg.k_min) / abs(fg.k_min), fg.k_max: weighted[fg.k_max]}
    else:
        report.lx = _lx_sum(plain)
        edge = {fg.k_min: plain[fg.k_min] * 2.0 ** (-fg.k_min) / abs(fg.k_min), fg.k_max: plain[fg.k_max]}
    report.truncation = float(sum(edge.values()))
    total = sum(project_dyadic(density, k).values for k in fg.block_range())
    denom = max(float(np.max(np.abs(density.values))), 1e-300)
    report.reassembly_error = float(np.max(np.abs(total - density.values)) / denom)
    return report


def lx_norm_values(table, coefficients):
    """LX norm straight from H̃ coefficients (batch over leading axes)."""
    fg = table.freq_grid
    coefficients = np.atleast_2d(np.abs(coefficients))
    out = np.zeros(coefficients.shape[0])
    high = np.zeros_like(out)
    for k in fg.block_range():
        piece = np.sqrt((dyadic_cutoff(fg.xi, k, fg.k_min, fg.k_max) * coefficients) ** 2 @ fg.weights)
        if k >= 0:
            high += piece ** 2
        else:
            out += 2.0 ** (-k) / abs(k) * piece
    return out + np.sqrt(high)


def x_norm_values(table, coefficients):
    """X norm from H coefficients, ξ weight inside the blocks."""
    return lx_norm_values(table, np.atleast_2d(coefficients) * table.xi)


# ---- embeddings ----
def embedding_audit(fields, table: EigenbasisTable):
    """Ratios of the X / LX embeddings over a suite; the suprema are the empirical constants."""
    rows = []
    for f in fields:
        r = f.grid.nodes
        rep_x = norm_suite(f.like(f.values, "map"), table, "H")
        rep_lx = norm_suite(f.like(f.values, "gauge"), table, "Htilde")
        sqrt_r = np.sqrt(japanese(r))
        l4 = f.grid.integrate_rdr((sqrt_r * f.values) ** 4) ** 0.25
        log_l2 = np.sqrt(f.grid.integrate_rdr((f.values / np.log1p(r)) ** 2))
        rows.append({
            "pointX": float(np.max(np.abs(sqrt_r * f.values)) / rep_x.x),
            "linX": float(log_l2 / rep_x.x),
            "linX4": float(l4 / rep_x.x),
            "Xembt_lower": float(rep_x.hdot1_e / rep_x.x),
            "Xembt_upper": float(rep_x.x / rep_x.h1_e),
            "LXemb_upper": float(rep_lx.lx / (rep_lx.l1 + rep_lx.l2)),
            "LXemb_lower": float(rep_lx.l2 / rep_lx.lx),
        })
    sup = {key: max(row[key] for row in rows) for key in rows[0]} if rows else {}
    return {"rows": rows, "sup": sup}


# ---- nonresonance ----
@dataclass(frozen=True)
class PairingResult:
    value: float
    tail_bound: float

    def __float__(self):
        return self.value


def nonres_pairing(f: RadialField, tol=1e-6) -> PairingResult:
    """∫ f ψ_0 r dr; the outer half-decade stands in for the tail beyond R_max."""
    grid = f.grid
    r = grid.nodes
    integrand = f.values * psi0(r)
    value = grid.integrate_rdr(integrand)
    scale = grid.integrate_rdr(np.abs(integrand))
    outer = r > 0.5 * grid.r_max
    tail = float(grid.rdr_weights[outer] @ np.abs(integrand[outer]))
    if scale > 0 and tail > tol * scale:
        raise TailBoundError("pairing against ψ_0 has not converged by R_max", tail=tail, scale=scale)
    return PairingResult(float(value), tail)


def default_projector(grid):
    """g₀ = r² e^{-r²}, positive so ⟨g₀, ψ_0⟩ > 0."""
    return RadialField(grid, grid.nodes ** 2 * np.exp(-grid.nodes ** 2), "gauge")


def enforce_nonresonance(f: RadialField, g0: RadialField | None = None) -> RadialField:
    g0 = g0 or default_projector(f.grid)
    c = nonres_pairing(f).value / nonres_pairing(g0).value
    return f.like(f.values - c * g0.values)


def spectral_decay_audit(f: RadialField, table: EigenbasisTable, N=6, control=False, pairing_tol=1e-8):
    """
    Small-ξ fit of |F_H̃ f| (raw and multiplied by ⟨log ξ⟩) and the large-ξ
    constant sup ⟨ξ⟩^N |F_H̃ f|.
    """
    pairing = nonres_pairing(f)
    scale = f.grid.integrate_rdr(np.abs(f.values * psi0(f.grid.nodes)))
    if not control and abs(pairing.value) > pairing_tol * max(scale, 1e-300):
        raise NonresonanceError("datum is resonant: ⟨f, ψ_0⟩ ≠ 0", pairing=pairing.value)
    coeff = np.abs(forward_values(table, "Htilde", f.values))
    xi = table.xi
    low = xi <= 2.0 ** -3
    high = xi >= 2.0 ** 3
    report = {"pairing": pairing.value, "control": control}
    if low.sum() >= 4:
        logw = japanese(np.log(xi[low]))
        raw = fit_power_law(xi[low], coeff[low])
        comp = fit_power_law(xi[low], coeff[low] * logw)
        report.update({
            "small_exponent_raw": raw.exponent,
            "small_exponent": comp.exponent,
            "small_constant": float(np.max(coeff[low] * logw / xi[low] ** 2.5)),
        })
    if high.any():
        report["large_constant"] = float(np.max(japanese(xi[high]) ** N * coeff[high]))
        report["large_N"] = N
    logger.debug(f"spectral decay audit: {report}")
    return report


# ---- transform suite ----
def schwartz_suite(grid, n=20):
    """r^p e^{-a r²} for p = 1, 2 and n/2 widths; all vanish at the origin."""
    r = grid.nodes
    widths = np.geomspace(0.125, 4.0, max(1, n // 2))
    return [
        RadialField(grid, r ** p * np.exp(-a * r ** 2), "map")
        for a in widths for p in (1, 2)
    ][:n]


def transform_audit(fields, table: EigenbasisTable):
    """
    Plancherel ratios in both calculi, round trips, the intertwining
    F_H̃(Lf) = ξ F_H f and the duality ‖Lf‖_LX / ‖f‖_X over a suite.
    """
    grid = table.radial_grid
    xi = table.xi
    rows = []
    for f in fields:
        norm = np.sqrt(grid.integrate_rdr(f.values ** 2))
        row = {}
        for calculus in ("H", "Htilde"):
            c = forward_values(table, calculus, f.values)
            back = np.real(inverse_values(table, calculus, c))
            row[f"plancherel_{calculus}"] = float(np.sqrt(table.freq_grid.weights @ np.abs(c) ** 2) / norm)
            row[f"round_trip_{calculus}"] = float(np.sqrt(grid.integrate_rdr((back - f.values) ** 2)) / norm)
        lf = operator_values("L", grid, f.values)
        c_h = forward_values(table, "H", f.values)
        c_l = forward_values(table, "Htilde", lf)
        row["intertwining"] = float(np.max(np.abs(c_l - xi * c_h)) / np.max(np.abs(xi * c_h)))
        row["duality"] = float(lx_norm_values(table, c_l)[0] / x_norm_values(table, c_h)[0])
        rows.append(row)
    worst = {
        "plancherel": max(abs(row[f"plancherel_{c}"] - 1.0) for row in rows for c in ("H", "Htilde")),
        "round_trip": max(row[f"round_trip_{c}"] for row in rows for c in ("H", "Htilde")),
        "intertwining": max(row["intertwining"] for row in rows),
        "duality": max(abs(row["duality"] - 1.0) for row in rows),
    }
    logger.info(f"transform suite over {len(rows)} functions: {worst}")
    return {"rows": rows, "worst": worst}
