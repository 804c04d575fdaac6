# wavemaps/gamma_solver.py
"""
The nonlinear construction u = bu + ε, w = bw + γ on [T, S_max].

γ solves (∂_t² + H̃)γ = N(bw + γ, bu + ε) with zero data at S_max, and ε is
recovered from γ at every time slice through the constraint
γ = ∂_r ε − (sin(ε + bu) − sin bu)/r.
"""
from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .distorted_fourier import (
    forward_values, inverse_values, lx_norm_values, physical_norms, x_norm_values,
)
from .exceptions import ConsistencyError, ContractionFailure, NoCrossingError
from .fitting import dyadic_times, fit_power_law
from .grids import RadialField, radial_cutoff
from .linear_evolution import SpaceTimeSource, WaveState, duhamel_integrate, duhamel_nodes
from .profile_builder import ProfileDecomposition, build_profiles, schwartz_seminorm, sin_minus_identity
from .soliton_geometry import extract_lambda, gauge_derivative, h1, h3, inverse_L, operator_values, soliton
from .spectral_core import EigenbasisTable, resolved_band

logger = logging.getLogger(__name__)

TARGET_EXPONENTS = {
    "gamma_lx": 1.5,
    "gamma_t_lx": 2.5,
    "gamma_hdot1": 2.5,
    "epsilon_x": 1.5,
    "epsilon_t_lx": 2.5,
}
EXPONENT_TOL = 0.2
SOURCE_ALPHA = 1.5


# ---- ε from γ ----
def _cos_shift(Q, a):
    """cos(Q + a) − cos Q."""
    return -2.0 * np.sin(Q + 0.5 * a) * np.sin(0.5 * a)


def constraint_remainder(r, Q, p, eps):
    """F = (sin(ε + bu) − sin bu − cos Q·ε)/r with bu = Q + p."""
    half = 0.5 * eps
    return (
        _cos_shift(Q, p + half) * 2.0 * np.sin(half)
        - h3(r) * 2.0 * sin_minus_identity(half)
    ) / r


@dataclass
class EpsilonResult:
    values: np.ndarray
    iterations: int
    ratios: list = field(default_factory=list)


def _slice_norm(r, f):
    return float(np.max(np.abs(f / h1(r))))


def _fixed_point(step, start, r, tol, max_iter, t, label, band):
    v = start
    last = None
    ratios = []
    for n in range(1, max_iter + 1):
        new = step(v)
        d = _slice_norm(r, new - v)
        size = _slice_norm(r, new)
        if last and d > 1e3 * tol * max(size, 1e-300):
            ratios.append(d / last)
            if ratios[-1] > 0.5:
                raise ContractionFailure(f"{label} iteration is not contracting", t=float(t), ratio=ratios[-1])
        last = d
        v = new
        if np.max(np.abs(v)) > band:
            raise ContractionFailure(f"{label} left the smallness band", t=float(t), sup=float(np.max(np.abs(v))))
        if d <= tol * max(size, 1e-300) or d == 0.0:
            return EpsilonResult(v, n, ratios)
    raise ContractionFailure(f"{label} iteration did not converge", t=float(t), iterations=max_iter)


def epsilon_values(grid, gamma, perturbation, t=0.0, tol=1e-10, max_iter=40, band=1.0):
    """ε = L^{-1}(γ + F(ε, bu − Q)) from ε = 0."""
    r = grid.nodes
    Q = soliton(1.0, grid).values
    gamma = np.asarray(gamma, dtype=float)
    if not np.any(gamma) and not np.any(perturbation):
        return EpsilonResult(np.zeros_like(gamma), 0)
    return _fixed_point(
        lambda e: inverse_L(grid, gamma + constraint_remainder(r, Q, perturbation, e)),
        np.zeros_like(gamma), r, tol, max_iter, t, "ε", band,
    )


def epsilon_from_gamma(gamma: RadialField, bu: RadialField, t, tol=1e-10, max_iter=40, band=1.0) -> RadialField:
    if gamma.space_tag != "gauge" or bu.space_tag != "map":
        raise ConsistencyError("ε solver expects a gauge-tagged γ and a map-tagged bu")
    Q = soliton(1.0, bu.grid).values
    result = epsilon_values(bu.grid, gamma.values, bu.values - Q, t, tol, max_iter, band)
    return RadialField(bu.grid, result.values, "map")


def dt_epsilon_values(grid, gamma_t, perturbation, perturbation_t, eps, t=0.0, tol=1e-10, max_iter=40, band=1.0):
    """
    ∂_t ε from the differentiated constraint
    L∂_tε = ∂_tγ + [(cos(ε+bu) − cos Q)∂_tε + (cos(ε+bu) − cos bu)∂_t bu]/r.
    """
    r = grid.nodes
    Q = soliton(1.0, grid).values
    a = _cos_shift(Q, perturbation + eps) / r
    b = _cos_shift(Q + perturbation, eps) / r * perturbation_t
    gamma_t = np.asarray(gamma_t, dtype=float)
    if not np.any(gamma_t) and not np.any(b):
        return EpsilonResult(np.zeros_like(gamma_t), 0)
    return _fixed_point(
        lambda v: inverse_L(grid, gamma_t + a * v + b),
        np.zeros_like(gamma_t), r, tol, max_iter, t, "∂_tε", np.inf,
    )


def constraint_residual(grid, gamma, eps, perturbation):
    """‖∂_rε − (sin(ε+bu) − sin bu)/r − γ‖ / ‖γ‖ in L²(rdr) over resolved nodes."""
    r = grid.nodes
    Q = soliton(1.0, grid).values
    bu = Q + perturbation
    res = grid.derivative(eps) - (np.sin(eps + bu) - np.sin(bu)) / r - gamma
    band = resolved_band(grid, 1.0) & (r < 0.9 * grid.r_max)
    num = np.sqrt(grid.rdr_weights[band] @ res[band] ** 2)
    den = np.sqrt(grid.rdr_weights[band] @ np.asarray(gamma)[band] ** 2)
    if den == 0:
        return float(num)
    return float(num / den)


def epsilon_gain(table: EigenbasisTable, gamma, eps):
    """‖ε‖_X / ‖γ‖_LX."""
    x = x_norm_values(table, forward_values(table, "H", eps))[0]
    lx = lx_norm_values(table, forward_values(table, "Htilde", gamma))[0]
    return float(x / lx) if lx > 0 else 0.0


def low_r_constant(grid, eps, r_cut=0.5):
    """sup_{r ≤ 1/2} |ε| / (r|log(r/2)|)."""
    r = grid.nodes
    inner = r <= r_cut
    return float(np.max(np.abs(eps[inner]) / (r[inner] * np.abs(np.log(r[inner] / 2)))))


# ---- the wave-map nonlinearity ----
def _A(r, Q, u):
    """2(cos Q − cos u)/r²."""
    return -2.0 * _cos_shift(Q, u - Q) / r ** 2


def wave_nonlinearity(r, Q, w, u, u_t):
    """N(w, u) = 2(cos Q − cos u)/r²·w + (1/r) sin u (u_t² − w²)."""
    return _A(r, Q, u) * w + np.sin(u) / r * (u_t ** 2 - w ** 2)


@dataclass
class NonlinearitySplit:
    source: np.ndarray
    linear: np.ndarray
    nonlinear: np.ndarray
    mismatch: float


def nonlinearity(r, Q, bw, bu, bu_t, gamma, eps, eps_t) -> NonlinearitySplit:
    """
    N(bw+γ, bu+ε) = N(bw, bu) + N^l + N^n with N^l linear in (γ, ε, ∂_tε); the
    mismatch against the direct evaluation is relative to the largest term.
    """
    A = _A(r, Q, bu)
    dA = 2.0 * np.sin(bu) / r ** 2
    B = np.sin(bu) / r
    dB = np.cos(bu) / r
    q0 = bu_t ** 2 - bw ** 2
    dq_lin = 2.0 * bu_t * eps_t - 2.0 * bw * gamma
    dq_non = eps_t ** 2 - gamma ** 2
    # second-order remainders of A and B in ε
    A2 = 2.0 * (2.0 * np.cos(bu) * np.sin(0.5 * eps) ** 2 + np.sin(bu) * sin_minus_identity(eps)) / r ** 2
    B2 = (-2.0 * np.sin(bu) * np.sin(0.5 * eps) ** 2 + np.cos(bu) * sin_minus_identity(eps)) / r

    source = A * bw + B * q0
    linear = A * gamma + dA * eps * bw + dB * eps * q0 + B * dq_lin
    nonlinear = dA * eps * gamma + A2 * (bw + gamma) + B * dq_non + dB * eps * (dq_lin + dq_non) + B2 * (q0 + dq_lin + dq_non)
    direct = wave_nonlinearity(r, Q, bw + gamma, bu + eps, bu_t + eps_t)
    terms = [source, linear, nonlinear, direct]
    scale = max(max(float(np.max(np.abs(x))) for x in terms), 1e-300)
    mismatch = float(np.max(np.abs(source + linear + nonlinear - direct))) / scale
    return NonlinearitySplit(source, linear, nonlinear, mismatch)


# ---- source reorganization ----
def _l1_l2(grid, f):
    return grid.integrate_rdr(np.abs(f)) + np.sqrt(grid.integrate_rdr(f ** 2))


def source_norm_audit(profile: ProfileDecomposition, times=None):
    """
    ‖N(bw, bu)‖_LX per time: directly through the H̃ transform, through the
    naive cutoff split, and through N_3 = Lg + remainder with
    g = χ_{r≈t}(bu^l)²/(2r³).
    """
    table = profile.state.table
    grid = profile.grid
    r = grid.nodes
    Q = soliton(1.0, grid).values
    times = profile.times if times is None else np.asarray(times, dtype=float)
    rows = []
    for t in times:
        j = profile.index(t)
        bu = Q + profile.perturbation[j]
        bu_t = profile.bu_t(j).values
        N = wave_nonlinearity(r, Q, profile.bw[j], bu, bu_t)
        inner = radial_cutoff(r, t / 4)
        outer = 1.0 - radial_cutoff(r, 2 * t)
        near = 1.0 - inner - outer
        N1, N2, N3 = inner * N, outer * N, near * N
        g = near * profile.bu_l[j] ** 2 / (2 * r ** 3)
        Lg = operator_values("L", grid, g)
        g_h1 = physical_norms(grid, g)["h1_e"]
        rows.append({
            "t": float(t),
            "lx": float(lx_norm_values(table, forward_values(table, "Htilde", N))[0]),
            "naive": _l1_l2(grid, N1) + _l1_l2(grid, N2) + _l1_l2(grid, N3),
            "naive_near": _l1_l2(grid, N3),
            "reorganized": _l1_l2(grid, N1) + _l1_l2(grid, N2) + g_h1 + _l1_l2(grid, N3 - Lg),
            "g_h1": g_h1,
        })
    report = {"rows": rows}
    for key in ("lx", "naive", "naive_near", "reorganized", "g_h1"):
        report[f"{key}_exponent"] = -fit_power_law(times, [row[key] for row in rows]).exponent
    return report


# ---- state ----
@dataclass(eq=False)
class PerturbationPair:
    """(γ, ∂_tγ, ε, ∂_tε) as (n_t, n_r) snapshots on the slice times."""
    times: np.ndarray
    gamma: np.ndarray
    gamma_t: np.ndarray
    epsilon: np.ndarray
    epsilon_t: np.ndarray
    gamma_hat: np.ndarray = None
    gamma_t_hat: np.ndarray = None

    @classmethod
    def zero(cls, times, n_r, n_xi):
        z = np.zeros((len(times), n_r))
        return cls(np.asarray(times), z, z.copy(), z.copy(), z.copy(), np.zeros((len(times), n_xi)), np.zeros((len(times), n_xi)))

    def fields(self, grid, j):
        return {
            "gamma": RadialField(grid, self.gamma[j], "gauge"),
            "gamma_t": RadialField(grid, self.gamma_t[j], "gauge"),
            "epsilon": RadialField(grid, self.epsilon[j], "map"),
            "epsilon_t": RadialField(grid, self.epsilon_t[j], "map"),
        }


@dataclass
class YNormState:
    y_norm: float
    components: dict
    history: list = field(default_factory=list)

    def to_dict(self):
        return {"y_norm": self.y_norm, "components": self.components, "history": self.history}


def y_components(table, times, gamma_hat, gamma_t_hat, window):
    """t^{3/2}‖γ‖_LX, t^{5/2}‖∂_tγ‖_LX and t^{5/2}‖γ‖_{Ḣ¹_e} on the window slices."""
    t = times[window]
    lx = lx_norm_values(table, gamma_hat[window])
    lx_t = lx_norm_values(table, gamma_t_hat[window])
    grid = table.radial_grid
    phys = inverse_values(table, "Htilde", gamma_hat[window])
    hdot = np.array([physical_norms(grid, row)["hdot1_e"] for row in phys])
    return {"gamma_lx": t ** 1.5 * lx, "gamma_t_lx": t ** 2.5 * lx_t, "gamma_hdot1": t ** 2.5 * hdot}


def y_norm(components):
    return float(sum(np.max(v) if len(v) else 0.0 for v in components.values()))


# ---- Picard ----
def solve_epsilon_slices(profile: ProfileDecomposition, gamma, gamma_t, tolerances, workers=1):
    grid = profile.grid
    tol = tolerances.get("fixed_point", 1e-10)
    pert = profile.perturbation
    pert_t = profile.dt_bu_l + profile.dt_bu_nl

    def solve(j):
        t = profile.times[j]
        eps = epsilon_values(grid, gamma[j], pert[j], t, tol).values
        eps_t = dt_epsilon_values(grid, gamma_t[j], pert[j], pert_t[j], eps, t, tol).values
        return eps, eps_t

    with ThreadPoolExecutor(max_workers=max(1, workers)) as executor:
        out = list(executor.map(solve, range(len(profile.times))))
    return np.stack([e for e, _ in out]), np.stack([e for _, e in out])


def full_source(profile: ProfileDecomposition, pair: PerturbationPair):
    grid = profile.grid
    r = grid.nodes
    Q = soliton(1.0, grid).values
    bu = Q + profile.perturbation
    bu_t = profile.dt_bu_l + profile.dt_bu_nl
    return wave_nonlinearity(r, Q, profile.bw + pair.gamma, bu + pair.epsilon, bu_t + pair.epsilon_t)


def picard_iterate(pair: PerturbationPair, profile: ProfileDecomposition, nodes, tolerances=None, workers=1):
    """γ_{n+1} = K N(bw + γ_n, bu + ε_n), then ε_{n+1} slice by slice."""
    tolerances = dict(tolerances or {})
    table = profile.state.table
    N = full_source(profile, pair)
    coefficients = forward_values(table, "Htilde", N)
    index = {float(s): j for j, s in enumerate(nodes)}
    source = SpaceTimeSource(lambda s: coefficients[index[s]], alpha=SOURCE_ALPHA)
    result = duhamel_integrate(source, nodes, table, s_max=float(nodes[-1]), nodes=nodes)
    gamma = inverse_values(table, "Htilde", result.K)
    gamma_t = inverse_values(table, "Htilde", result.dtK)
    eps, eps_t = solve_epsilon_slices(profile, gamma, gamma_t, tolerances, workers)
    return PerturbationPair(np.asarray(nodes), gamma, gamma_t, eps, eps_t, result.K, result.dtK)


def picard_loop(profile: ProfileDecomposition, nodes, window, tolerances=None, workers=1, max_iter=25):
    tolerances = dict(tolerances or {})
    tol = tolerances.get("picard", 1e-8)
    table = profile.state.table
    grid = profile.grid
    pair = PerturbationPair.zero(nodes, grid.size, table.freq_grid.size)
    history = []
    last = None
    for n in range(1, max_iter + 1):
        new = picard_iterate(pair, profile, nodes, tolerances, workers)
        comps = y_components(table, nodes, new.gamma_hat, new.gamma_t_hat, window)
        diff = y_norm(y_components(
            table, nodes, new.gamma_hat - pair.gamma_hat, new.gamma_t_hat - pair.gamma_t_hat, window,
        ))
        size = y_norm(comps)
        ratio = diff / last if last else None
        history.append({"iteration": n, "y_norm": size, "difference": diff, "ratio": ratio})
        logger.debug(f"Picard iteration {n}: Y={size:.4e} difference={diff:.3e}")
        pair = new
        if diff == 0.0 or diff <= tol * size:
            return pair, YNormState(size, {k: v.tolist() for k, v in comps.items()}, history)
        if ratio is not None and diff > 1e3 * tol * size and ratio > 0.5:
            raise ContractionFailure("Picard iteration is not contracting", iteration=n, ratio=ratio)
        last = diff
    raise ContractionFailure("Picard iteration did not converge", iterations=max_iter)


# ---- construction ----
@dataclass
class EvolutionRecord:
    T: float
    s_max: float
    times: np.ndarray
    norms: dict
    exponents: dict
    constants: dict
    passed: dict
    constraint_residual: float
    gauge_mismatch: float
    lambdas: list
    lambda_spread: float
    y_state: YNormState
    attempts: list
    profile_history: list
    audits: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            "T": self.T,
            "s_max": self.s_max,
            "times": self.times.tolist(),
            "norms": self.norms,
            "exponents": self.exponents,
            "constants": self.constants,
            "passed": self.passed,
            "constraint_residual": self.constraint_residual,
            "gauge_mismatch": self.gauge_mismatch,
            "lambdas": self.lambdas,
            "lambda_spread": self.lambda_spread,
            "y": self.y_state.to_dict(),
            "attempts": self.attempts,
            "profile_history": self.profile_history,
            "audits": self.audits,
        }


@dataclass(eq=False)
class Construction:
    profile: ProfileDecomposition
    pair: PerturbationPair
    nodes: np.ndarray
    audit_times: np.ndarray
    record: EvolutionRecord

    @property
    def grid(self):
        return self.profile.grid

    def u(self, t) -> RadialField:
        j = self.profile.index(t)
        return RadialField(self.grid, self.profile.bu(j).values + self.pair.epsilon[j], "map")

    def u_t(self, t) -> RadialField:
        j = self.profile.index(t)
        return RadialField(self.grid, self.profile.bu_t(j).values + self.pair.epsilon_t[j], "map")

    def w(self, t) -> RadialField:
        j = self.profile.index(t)
        return RadialField(self.grid, self.profile.bw[j] + self.pair.gamma[j], "gauge")


def decay_norms(table, times, pair: PerturbationPair, indices):
    grid = table.radial_grid
    t = times[indices]
    eps_hat = forward_values(table, "H", pair.epsilon[indices])
    eps_t_hat = forward_values(table, "Htilde", pair.epsilon_t[indices])
    return {
        "gamma_lx": lx_norm_values(table, pair.gamma_hat[indices]),
        "gamma_t_lx": lx_norm_values(table, pair.gamma_t_hat[indices]),
        "gamma_hdot1": np.array([physical_norms(grid, row)["hdot1_e"] for row in pair.gamma[indices]]),
        "epsilon_x": x_norm_values(table, eps_hat),
        "epsilon_t_lx": lx_norm_values(table, eps_t_hat),
    }, t


def certify(norms, t):
    """
    Fit each decay norm against its target rate. A norm passes when every
    sample is finite and either all samples are exactly zero or the fit has
    at least two usable points and lands within EXPONENT_TOL of the target.
    """
    exponents, constants, passed = {}, {}, {}
    for key, target in TARGET_EXPONENTS.items():
        values = np.asarray(norms[key], dtype=float)
        fit = fit_power_law(t, values)
        exponents[key] = -fit.exponent
        finite = bool(np.all(np.isfinite(values)))
        constants[key] = float(np.max(t ** target * np.abs(values))) if len(values) and finite else float("nan")
        if not finite:
            passed[key] = False
        elif not np.any(values):
            passed[key] = True
        else:
            passed[key] = fit.usable and abs(-fit.exponent - target) <= EXPONENT_TOL
    return exponents, constants, passed


def _construct_at(w0, w1, table, T, s_max, tolerances, workers, ratio, ds_max, check=True):
    state = WaveState.from_data(w0, w1, table, check=check)
    audit = dyadic_times(T, s_max / 2)
    nodes = duhamel_nodes(T, s_max, ratio, ds_max, extra=audit)
    profile = build_profiles(state, nodes, tolerances, workers)
    window = nodes <= s_max / 2
    pair, y_state = picard_loop(profile, nodes, window, tolerances, workers)
    return profile, pair, y_state, nodes, audit


def construct_solution(w0: RadialField, w1: RadialField, table: EigenbasisTable, T_init=16.0, s_max=128.0,
                       tolerances=None, workers=1, ratio=1.02, ds_max=0.5, max_doublings=6, check=True) -> Construction:
    """
    Free wave → profiles → Picard on [T, S_max], doubling T on contraction
    failure; certifies the γ/ε decay rates on dyadic audit times.
    """
    tolerances = dict(tolerances or {})
    attempts = []
    T = float(T_init)
    for attempt in range(max_doublings + 1):
        if T >= s_max / 4:
            break
        try:
            profile, pair, y_state, nodes, audit = _construct_at(
                w0, w1, table, T, s_max, tolerances, workers, ratio, ds_max, check,
            )
        except ContractionFailure as exc:
            attempts.append({"T": T, "error": str(exc)})
            logger.info(f"construction at T={T:g} failed ({exc}); doubling T")
            T *= 2
            continue
        attempts.append({"T": T, "error": None})
        logger.info(f"construction converged at T={T:g} after {len(y_state.history)} Picard iterations")
        record = _certify_construction(profile, pair, nodes, audit, T, s_max, tolerances, y_state, attempts)
        return Construction(profile, pair, nodes, audit, record)
    raise ContractionFailure("no admissible T found", attempts=attempts)


def _certify_construction(profile, pair, nodes, audit, T, s_max, tolerances, y_state, attempts):
    table = profile.state.table
    grid = profile.grid
    idx = np.array([int(np.argmin(np.abs(nodes - t))) for t in audit])
    norms, t = decay_norms(table, nodes, pair, idx)
    exponents, constants, passed = certify(norms, t)
    residual = max(
        constraint_residual(grid, pair.gamma[j], pair.epsilon[j], profile.perturbation[j]) for j in idx
    )
    tol = tolerances.get("constraint", 1e-6)
    passed["constraint"] = residual <= tol
    gauge, lambdas = [], []
    inner = resolved_band(grid, 1.0) & (grid.nodes < 0.9 * grid.r_max)
    for j in idx:
        u = RadialField(grid, profile.bu(j).values + pair.epsilon[j], "map")
        w = profile.bw[j] + pair.gamma[j]
        gauge.append(float(np.max(np.abs(gauge_derivative(u).values - w)[inner])))
        try:
            lambdas.append(extract_lambda(u).value)
        except NoCrossingError:
            lambdas.append(float("nan"))
    spread = float(np.nanmax(np.abs(np.asarray(lambdas) - 1.0))) if lambdas else 0.0
    audits = {
        "nonlinearity": nonlinearity_audit(profile, pair, idx),
        "epsilon_gain": [epsilon_gain(table, pair.gamma[j], pair.epsilon[j]) for j in idx],
        "epsilon_low_r": [low_r_constant(grid, pair.epsilon[j]) for j in idx],
    }
    if not all(passed.values()):
        logger.warning(f"construction certificates missed: {[k for k, v in passed.items() if not v]}")
    return EvolutionRecord(
        T, s_max, t, {k: v.tolist() for k, v in norms.items()}, exponents, constants, passed,
        residual, max(gauge), lambdas, spread, y_state, attempts, profile.history, audits,
    )


def nonlinearity_audit(profile: ProfileDecomposition, pair: PerturbationPair, indices):
    """‖N^l‖_LX t^{3.5}log²t and ‖N^n‖_LX t⁴/log t on the audit slices, plus the split identity."""
    table = profile.state.table
    grid = profile.grid
    r = grid.nodes
    Q = soliton(1.0, grid).values
    lin, non, mismatch = [], [], 0.0
    for j in indices:
        t = profile.times[j]
        split = nonlinearity(
            r, Q, profile.bw[j], profile.bu(j).values, profile.bu_t(j).values,
            pair.gamma[j], pair.epsilon[j], pair.epsilon_t[j],
        )
        mismatch = max(mismatch, split.mismatch)
        nl, nn = lx_norm_values(table, forward_values(table, "Htilde", np.stack([split.linear, split.nonlinear])))
        lin.append(float(nl * t ** 3.5 * np.log(t) ** 2))
        non.append(float(nn * t ** 4 / np.log(t)))
    return {"linear_weighted": lin, "nonlinear_weighted": non, "split_mismatch": mismatch}


# ---- Lipschitz ----
def difference_norms(a: Construction, b: Construction):
    """Y-components of γ_a − γ_b and the δε pieces on the common audit times."""
    table = a.profile.state.table
    grid = a.grid
    times = a.audit_times
    rows = []
    for t in times:
        ja, jb = a.profile.index(t), b.profile.index(t)
        dg = a.pair.gamma_hat[ja] - b.pair.gamma_hat[jb]
        dg_t = a.pair.gamma_t_hat[ja] - b.pair.gamma_t_hat[jb]
        de = a.pair.epsilon[ja] - b.pair.epsilon[jb]
        dgamma = inverse_values(table, "Htilde", dg)
        cross = de - inverse_L(grid, dgamma)
        rows.append({
            "t": float(t),
            "gamma_lx": float(t ** 1.5 * lx_norm_values(table, dg)[0]),
            "gamma_t_lx": float(t ** 2.5 * lx_norm_values(table, dg_t)[0]),
            "gamma_hdot1": float(t ** 2.5 * physical_norms(grid, dgamma)["hdot1_e"]),
            "epsilon_x": float(x_norm_values(table, forward_values(table, "H", de))[0]),
            "cross": float(x_norm_values(table, forward_values(table, "H", cross))[0]),
        })
    y = sum(max(row[k] for row in rows) for k in ("gamma_lx", "gamma_t_lx", "gamma_hdot1")) if rows else 0.0
    return y, rows


def difference_run(first, second, table, **kwargs):
    """Y-norm of the γ difference over the data seminorm for two data pairs (w0, w1)."""
    (w0a, w1a), (w0b, w1b) = first, second
    seminorm = schwartz_seminorm(w0a.like(w0a.values - w0b.values)) + schwartz_seminorm(w1a.like(w1a.values - w1b.values))
    a = construct_solution(w0a, w1a, table, **kwargs)
    if seminorm == 0.0:
        return {"y_difference": 0.0, "seminorm": 0.0, "ratio": 0.0, "rows": []}
    b = construct_solution(w0b, w1b, table, T_init=a.record.T, **{k: v for k, v in kwargs.items() if k != "T_init"})
    y, rows = difference_norms(a, b)
    for row in rows:
        t = row["t"]
        row["cross_weighted"] = row["cross"] * t * np.log(t) ** 2 / seminorm
    return {"y_difference": y, "seminorm": seminorm, "ratio": y / seminorm, "rows": rows}


def lipschitz_sweep(w0, w1, dw0, table, deltas=(1e-2, 5e-3, 2.5e-3), **kwargs):
    ratios = []
    for delta in deltas:
        report = difference_run((w0, w1), (w0.like(w0.values + delta * dw0.values), w1), table, **kwargs)
        ratios.append(report["ratio"])
    spread = max(ratios) / min(ratios) - 1.0 if min(ratios) > 0 else 0.0
    return {"deltas": list(deltas), "ratios": ratios, "spread": spread, "stable": spread <= 0.2}
