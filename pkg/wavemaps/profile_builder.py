# wavemaps/profile_builder.py
"""
First approximation (bu, bw): the linear profile bu^l = L^{-1}bw split into
its resonant and nonresonant parts, the nonlinear correction bu^nl and its
time derivative by fixed point, and the bound audits on them.
"""
from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .distorted_fourier import inverse_values, japanese
from .exceptions import ConsistencyError, ContractionFailure, TailBoundError
from .fitting import fit_power_law, stable_under_doubling, sup_ratio
from .grids import RadialField, radial_cutoff
from .linear_evolution import WaveState
from .soliton_geometry import h1, h3, inverse_L, operator_values, phi0, recover_map_from_gauge, soliton
from .spectral_core import resolved_band

logger = logging.getLogger(__name__)

PRINTED_CUBIC = 1.0 / 6.0
CUBIC = 1.0 / 12.0


# ---- linear profile ----
def linear_profile_values(state: WaveState, times, derivative=False):
    """bu^l = ∫ξ^{-1}φ_ξ F_H̃bw(t) dξ (or ∂_t bu^l), shape (n_t, n_r)."""
    c, c_t = state.evolve(np.atleast_1d(np.asarray(times, dtype=float)))
    coeff = c_t if derivative else c
    return inverse_values(state.table, "H", coeff / state.xi)


def consistency_band(grid, xi_eff=1.0):
    return resolved_band(grid, xi_eff) & (grid.nodes < 0.9 * grid.r_max)


def check_intertwining(state: WaveState, t, bu_l, bw, tol=1e-5):
    """L(bu^l) against bw(t) by finite differences; returns the relative mismatch."""
    grid = state.table.radial_grid
    band = consistency_band(grid)
    Lu = operator_values("L", grid, bu_l)
    scale = float(np.max(np.abs(bw[band]))) if band.any() else 0.0
    if scale == 0.0:
        return 0.0
    rel = float(np.max(np.abs(Lu[band] - bw[band]))) / scale
    if rel > tol:
        raise ConsistencyError("L(bu^l) does not reproduce bw", t=float(t), mismatch=rel)
    return rel


def linear_profile(state: WaveState, t, tol=1e-5, derivative=False) -> RadialField:
    values = linear_profile_values(state, [t], derivative)[0]
    if not derivative:
        bw = inverse_values(state.table, "Htilde", state.evolve(t).c)
        check_intertwining(state, t, values, bw, tol)
    return RadialField(state.table.radial_grid, values, "map")


# ---- resonant split ----
def resonant_coefficients(state: WaveState, times, derivative=False):
    """g_k(t) = ∫χ_k q ξ^{-1} F_H̃bw dξ for the low blocks k < 0, shape (n_t, n_k)."""
    fg = state.table.freq_grid
    c, c_t = state.evolve(np.atleast_1d(np.asarray(times, dtype=float)))
    coeff = c_t if derivative else c
    ks = [k for k in fg.block_range() if k < 0]
    rows = [(coeff * fg.cutoff(k) * state.table.q / state.xi) @ fg.weights for k in ks]
    return ks, np.stack(rows, axis=-1) if rows else np.zeros((len(coeff), 0))


def split_resonant(state: WaveState, times, bu_l, derivative=False):
    """
    bu^{l,r} = φ_0(r) Σ_{k<0} χ_{≲2^{-k}}(r) g_k(t); the remainder is bu^{l,nr}.
    """
    r = state.table.radial_grid.nodes
    ks, g = resonant_coefficients(state, times, derivative)
    cut = np.stack([radial_cutoff(r, 2.0 ** (-k)) for k in ks]) if ks else np.zeros((0, len(r)))
    res = phi0(r) * (g @ cut)
    return res, np.asarray(bu_l) - res


def resonant_profile(r, t):
    return h1(r) / (japanese(t) * np.log(japanese(t)) ** 2)


def nonresonant_profile(r, t):
    return (
        r / (r + japanese(t)) * japanese(t + r) ** -0.5
        * japanese(t - r) ** -1.5
    )


# ---- light-cone cancellation ----
def cone_band(grid, t, lo=0.5, hi=2.0):
    r = grid.nodes
    return (r >= lo * t) & (r <= min(hi * t, 0.9 * grid.r_max))


def null_cone_cancellation_audit(state: WaveState, times, coefficient=0.5):
    """
    Decay of sup_{r∼t}|(∂_r + ∂_t)bu^l + c·bu^l/r| with c = ½, against the
    raw ∂_t bu^l and the perturbed coefficient c = 1.
    """
    grid = state.table.radial_grid
    r = grid.nodes
    times = np.asarray(times, dtype=float)
    u = linear_profile_values(state, times)
    u_t = linear_profile_values(state, times, derivative=True)
    bw = inverse_values(state.table, "Htilde", state.evolve(times)[0])
    u_r = np.stack([grid.derivative(row) for row in u])
    rows = {"combination": [], "raw_dt": [], "perturbed": [], "b_equation": []}
    kept = []
    for j, t in enumerate(times):
        band = cone_band(grid, t)
        if band.sum() < 4:
            logger.warning(f"cone band at t={t:g} is not inside the grid; skipped")
            continue
        kept.append(t)
        rows["combination"].append(np.max(np.abs(u_r[j] + u_t[j] + coefficient * u[j] / r)[band]))
        rows["raw_dt"].append(np.max(np.abs(u_t[j])[band]))
        rows["perturbed"].append(np.max(np.abs(u_r[j] + u_t[j] + 2 * coefficient * u[j] / r)[band]))
        rows["b_equation"].append(np.max(np.abs(u_t[j] + bw[j])[band]))
    kept = np.asarray(kept)
    fits = {name: fit_power_law(kept, np.asarray(vals)) for name, vals in rows.items()}
    report = {
        "times": kept.tolist(),
        "coefficient": coefficient,
        "sup": {name: list(map(float, vals)) for name, vals in rows.items()},
        "exponents": {name: -fit.exponent for name, fit in fits.items()},
        "fits": {name: fit.to_dict() for name, fit in fits.items()},
    }
    report["gap_raw"] = report["exponents"]["combination"] - report["exponents"]["raw_dt"]
    report["gap_perturbed"] = report["exponents"]["combination"] - report["exponents"]["perturbed"]
    logger.info(f"light-cone combination decays like t^-{report['exponents']['combination']:.3f}")
    return report


# ---- the ODE nonlinearity ----
def sin_minus_identity(s):
    """sin s − s without cancellation for small s."""
    s = np.asarray(s, dtype=float)
    small = np.abs(s) < 1e-2
    s2 = s * s
    series = -s * s2 / 6 * (1 - s2 / 20 * (1 - s2 / 42))
    return np.where(small, series, np.sin(s) - s)


def nonlinearity_values(r, s):
    """N as a function of s = u + v: (1/r)[sinQ(cos s − 1) + cosQ(sin s − s)]."""
    r = np.asarray(r, dtype=float)
    return (-2.0 * h1(r) * np.sin(0.5 * s) ** 2 - h3(r) * sin_minus_identity(s)) / r


def nonlinearity_derivative_values(r, s):
    """∂_s N = (1/r)[−sinQ sin s + cosQ(cos s − 1)]."""
    r = np.asarray(r, dtype=float)
    return (-h1(r) * np.sin(s) + 2.0 * h3(r) * np.sin(0.5 * s) ** 2) / r


def ode_nonlinearity(u: RadialField, v: RadialField) -> RadialField:
    return RadialField(u.grid, nonlinearity_values(u.grid.nodes, u.values + v.values), "map")


def nonlinearity_bound_ratio(u: RadialField, v: RadialField):
    """sup |N(u,v)| / [(u²+v²)/(1+r²) + (|u|³+|v|³)/r]."""
    r = u.grid.nodes
    a, b = u.values, v.values
    bound = (a ** 2 + b ** 2) / (1 + r ** 2) + (np.abs(a) ** 3 + np.abs(b) ** 3) / r
    return sup_ratio(nonlinearity_values(r, a + b), bound)


# ---- nonlinear profile ----
def z_norm(grid, values, t, power=1.5):
    """‖h1^{-1} t^power f‖_{L^∞}."""
    return float(t ** power * np.max(np.abs(np.asarray(values) / h1(grid.nodes))))


@dataclass
class FixedPointResult:
    values: np.ndarray
    iterations: int
    differences: list
    ratios: list
    tail: float

    @property
    def contraction(self):
        return max(self.ratios) if self.ratios else 0.0


def _iterate(step, start, norm, tol, max_iter, t, label, ratio_cap=0.5):
    v = start
    diffs, ratios = [], []
    for n in range(1, max_iter + 1):
        new, tail = step(v)
        d = norm(new - v)
        if diffs and diffs[-1] > 0 and d > 1e3 * tol:
            ratios.append(d / diffs[-1])
        diffs.append(d)
        v = new
        logger.debug(f"{label} t={t:g} iteration {n}: difference {d:.3e}")
        if ratios and ratios[-1] > ratio_cap:
            raise ContractionFailure(f"{label} fixed point is not contracting", t=float(t), ratio=ratios[-1])
        if d <= tol * max(1.0, norm(v)):
            return FixedPointResult(v, n, diffs, ratios, tail)
    raise ContractionFailure(f"{label} fixed point did not converge", t=float(t), iterations=max_iter)


def _edge_tail(grid, g, power=3.0):
    """The analytic ∫_{R_max}^∞ piece added to L^{-1}g when g ~ r^{-power}."""
    R = grid.r_max
    return float(abs(g[-1] / h1(R)) * R / (power - 2.0))


def nonlinear_profile_slice(grid, t, bu_l, tol=1e-10, max_iter=40, tail_tol=None, ratio_cap=0.5):
    """bu^nl(t) = L^{-1}N(bu^l, bu^nl) from bu^nl = 0."""
    r = grid.nodes

    def step(v):
        g = nonlinearity_values(r, bu_l + v)
        return inverse_L(grid, g, tail_power=3.0), _edge_tail(grid, g)

    result = _iterate(step, np.zeros_like(bu_l), lambda f: z_norm(grid, f, t), tol, max_iter, t, "bu^nl", ratio_cap)
    if tail_tol is not None:
        scale = float(np.max(np.abs(result.values)))
        if scale > 0 and result.tail > tail_tol * scale:
            raise TailBoundError("∫_r^∞ tail of bu^nl beyond R_max exceeds the budget", t=float(t), tail=result.tail)
    return result


def dt_nonlinear_profile_slice(grid, t, bu_l, bu_l_t, bu_nl, tol=1e-10, max_iter=40, ratio_cap=0.5):
    """∂_t bu^nl from L(∂_t v) = N_s(bu^l + v)(∂_t bu^l + ∂_t v)."""
    r = grid.nodes
    Ns = nonlinearity_derivative_values(r, bu_l + bu_nl)

    def step(w):
        g = Ns * (bu_l_t + w)
        return inverse_L(grid, g, tail_power=3.0), _edge_tail(grid, g)

    norm = lambda f: z_norm(grid, f, t, power=2.0)  # noqa: E731
    return _iterate(step, np.zeros_like(bu_l), norm, tol, max_iter, t, "∂_t bu^nl", ratio_cap)


# ---- decomposition ----
@dataclass(frozen=True)
class ProfileNorms:
    z_l_res: float
    z_l_nonres: float
    z_nl: float
    z_nl_dt: float

    def __post_init__(self):
        for name in ("z_l_res", "z_l_nonres", "z_nl", "z_nl_dt"):
            value = getattr(self, name)
            if not (value >= 0 and np.isfinite(value)):
                raise ConsistencyError(f"profile norm {name} is not a finite nonnegative number", value=value)

    def to_dict(self):
        return {"z_l_res": self.z_l_res, "z_l_nonres": self.z_l_nonres, "z_nl": self.z_nl, "z_nl_dt": self.z_nl_dt}


@dataclass(eq=False)
class ProfileDecomposition:
    """Snapshots (n_t, n_r) of bu = Q + bu^{l,r} + bu^{l,nr} + bu^nl and bw at the sampled times."""
    state: WaveState
    times: np.ndarray
    bu_l_res: np.ndarray
    bu_l_nonres: np.ndarray
    bu_nl: np.ndarray
    dt_bu_l_res: np.ndarray
    dt_bu_l_nonres: np.ndarray
    dt_bu_nl: np.ndarray
    bw: np.ndarray
    dt_bw: np.ndarray
    history: list = field(default_factory=list)

    @property
    def grid(self):
        return self.state.table.radial_grid

    @property
    def bu_l(self):
        return self.bu_l_res + self.bu_l_nonres

    @property
    def dt_bu_l(self):
        return self.dt_bu_l_res + self.dt_bu_l_nonres

    @property
    def perturbation(self):
        """bu − Q."""
        return self.bu_l + self.bu_nl

    def bu(self, j) -> RadialField:
        Q = soliton(1.0, self.grid).values
        return RadialField(self.grid, Q + self.perturbation[j], "map")

    def bu_t(self, j) -> RadialField:
        return RadialField(self.grid, self.dt_bu_l[j] + self.dt_bu_nl[j], "map")

    def index(self, t):
        j = int(np.argmin(np.abs(self.times - t)))
        if not np.isclose(self.times[j], t, rtol=1e-12, atol=1e-12):
            raise ValueError(f"time {t} is not a profile slice")
        return j

    def measured_T(self, cap=0.5):
        """Smallest sampled time from which every slice converges and contracts with factor ≤ cap."""
        ok = np.array([
            h.get("converged", True) and h["contraction"] <= cap and h["dt_contraction"] <= cap
            for h in self.history
        ])
        for j in range(len(ok)):
            if ok[j:].all():
                return float(self.times[j])
        return None

    def window(self, t_start) -> ProfileDecomposition:
        """The slices at t ≥ t_start."""
        keep = self.times >= t_start
        return replace(
            self,
            times=self.times[keep],
            bu_l_res=self.bu_l_res[keep],
            bu_l_nonres=self.bu_l_nonres[keep],
            bu_nl=self.bu_nl[keep],
            dt_bu_l_res=self.dt_bu_l_res[keep],
            dt_bu_l_nonres=self.dt_bu_l_nonres[keep],
            dt_bu_nl=self.dt_bu_nl[keep],
            bw=self.bw[keep],
            dt_bw=self.dt_bw[keep],
            history=[h for h, k in zip(self.history, keep) if k],
        )

    def norms(self, kappa=CUBIC) -> ProfileNorms:
        r = self.grid.nodes
        res = max(sup_ratio(row, resonant_profile(r, t)) for t, row in zip(self.times, self.bu_l_res))
        nonres = max(sup_ratio(row, nonresonant_profile(r, t)) for t, row in zip(self.times, self.bu_l_nonres))
        nl = max(z_norm(self.grid, row, t) for t, row in zip(self.times, self.bu_nl))
        combo = self.dt_bu_nl + kappa * h1(r) * self.bu_l ** 3
        nl_dt = max(z_norm(self.grid, row, t, power=2.0) for t, row in zip(self.times, combo))
        return ProfileNorms(res, nonres, nl, nl_dt)


def _failed_ratio(exc: ContractionFailure):
    return float(exc.context.get("ratio", np.inf))


def _slice_history(t, v, dv, failed):
    return {
        "t": float(t),
        "converged": failed is None,
        "iterations": v.iterations if v is not None else 0,
        "contraction": v.contraction if v is not None else failed,
        "dt_iterations": dv.iterations if dv is not None else 0,
        "dt_contraction": dv.contraction if dv is not None else (failed if v is not None else float("nan")),
        "tail": v.tail if v is not None else float("nan"),
    }


def build_profiles(state: WaveState, times, tolerances=None, workers=1, ratio_cap=0.5,
                   consistency_tol=1e-5, strict=True) -> ProfileDecomposition:
    """
    All profile pieces at the requested times; slices are independent after
    bu^l sampling. With ``strict=False`` a slice whose fixed point fails is
    kept as nan rows and its failing ratio goes into the history, so that
    ``measured_T`` can locate the contracting tail of the window.
    """
    tol = dict(tolerances or {})
    fp_tol = tol.get("fixed_point", 1e-10)
    consistency_tol = tol.get("consistency", consistency_tol)
    grid = state.table.radial_grid
    times = np.asarray(times, dtype=float)
    bu_l = linear_profile_values(state, times)
    bu_l_t = linear_profile_values(state, times, derivative=True)
    c, c_t = state.evolve(times)
    bw = inverse_values(state.table, "Htilde", c)
    bw_t = inverse_values(state.table, "Htilde", c_t)
    for t, u, w in zip(times, bu_l, bw):
        check_intertwining(state, t, u, w, consistency_tol)
    res, nonres = split_resonant(state, times, bu_l)
    res_t, nonres_t = split_resonant(state, times, bu_l_t, derivative=True)

    def solve(j):
        t = times[j]
        v = dv = None
        try:
            v = nonlinear_profile_slice(grid, t, bu_l[j], fp_tol, ratio_cap=ratio_cap, tail_tol=tol.get("tail"))
            dv = dt_nonlinear_profile_slice(grid, t, bu_l[j], bu_l_t[j], v.values, fp_tol, ratio_cap=ratio_cap)
        except ContractionFailure as exc:
            if strict:
                raise
            logger.info(f"profile slice t={t:g} kept as failed: {exc}")
            return v, dv, _failed_ratio(exc)
        return v, dv, None

    with ThreadPoolExecutor(max_workers=max(1, workers)) as executor:
        solved = list(executor.map(solve, range(len(times))))
    history = [_slice_history(t, v, dv, failed) for t, (v, dv, failed) in zip(times, solved)]
    missing = np.full(grid.size, np.nan)
    bu_nl = np.stack([v.values if failed is None else missing for v, _, failed in solved])
    dt_bu_nl = np.stack([dv.values if dv is not None else missing for _, dv, _ in solved])
    failures = sum(not h["converged"] for h in history)
    if failures:
        logger.warning(f"{failures} of {len(times)} profile slices failed to contract")
    logger.info(f"profiles built at {len(times)} times in [{times.min():g}, {times.max():g}]")
    return ProfileDecomposition(state, times, res, nonres, bu_nl, res_t, nonres_t, dt_bu_nl, bw, bw_t, history)


def nonlinear_profile(state: WaveState, times, **kwargs):
    """bu^nl sampler at the requested times, with iteration history."""
    return build_profiles(state, times, **kwargs)


def dt_nonlinear_profile(profile: ProfileDecomposition, kappas=(CUBIC, PRINTED_CUBIC)):
    """
    Cancellation report for ∂_t bu^nl against −κ h1 (bu^l)³: the sup of
    |∂_t bu^nl + κ h1(bu^l)³|·t²/h1 for each κ, the fitted κ, and the raw
    control ‖∂_t bu^nl‖ weighted by t^{1.5}/h1 and t²/h1.
    """
    grid = profile.grid
    r = grid.nodes
    times = profile.times
    cubic = h1(r) * profile.bu_l ** 3
    weight = 1.0 / h1(r)
    num = np.sum(profile.dt_bu_nl * cubic * weight ** 2)
    den = np.sum(cubic * cubic * weight ** 2)
    fitted = float(-num / den) if den > 0 else float("nan")
    report = {"times": times.tolist(), "fitted_kappa": fitted, "kappa": {}}
    for kappa in kappas:
        sups = np.array([z_norm(grid, d + kappa * c, t, 2.0) for t, d, c in zip(times, profile.dt_bu_nl, cubic)])
        report["kappa"][f"{kappa:.6g}"] = {
            "sup": sups.tolist(),
            "constant": float(np.max(sups)),
            "doubling": stable_under_doubling(times, sups),
        }
    raw15 = np.array([z_norm(grid, d, t, 1.5) for t, d in zip(times, profile.dt_bu_nl)])
    raw2 = np.array([z_norm(grid, d, t, 2.0) for t, d in zip(times, profile.dt_bu_nl)])
    report["control"] = {
        "t15_sup": raw15.tolist(),
        "t2_sup": raw2.tolist(),
        "raw_exponent": -fit_power_law(times, raw2 / times ** 2).exponent,
    }
    return report


def dt_divided_difference(state: WaveState, t, delta=1e-3, tolerances=None):
    """(bu^nl(t+δ) − bu^nl(t−δ))/2δ against the differentiated fixed point at t."""
    prof = build_profiles(state, [t - delta, t, t + delta], tolerances)
    dd = (prof.bu_nl[2] - prof.bu_nl[0]) / (2 * delta)
    scale = max(float(np.max(np.abs(prof.dt_bu_nl[1]))), 1e-300)
    return float(np.max(np.abs(dd - prof.dt_bu_nl[1])) / scale)


# ---- audits ----
def contraction_integrals(profile: ProfileDecomposition):
    """
    The six integrals bounding the bu^nl map: ∫|u^r|²/r, ∫|u^nr|²/r, ∫|v|²/r,
    ∫(1+r²)/r²|u^r|³, ∫(1+r²)/r²|u^nr|³, ∫(1+r²)/r²|v|³, per time.
    """
    grid = profile.grid
    r = grid.nodes
    k2 = (1 + r ** 2) / r ** 2
    rows = []
    for j in range(len(profile.times)):
        ur, unr, v = profile.bu_l_res[j], profile.bu_l_nonres[j], profile.bu_nl[j]
        rows.append([
            grid.integrate(ur ** 2 / r), grid.integrate(unr ** 2 / r), grid.integrate(v ** 2 / r),
            grid.integrate(k2 * np.abs(ur) ** 3), grid.integrate(k2 * np.abs(unr) ** 3),
            grid.integrate(k2 * np.abs(v) ** 3),
        ])
    rows = np.asarray(rows)
    fits = [fit_power_law(profile.times, rows[:, i]) for i in range(6)]
    exponents = np.array([-f.exponent for f in fits])
    finite = np.isfinite(exponents)
    dominant = np.argmax(rows, axis=1) + 1
    return {
        "times": profile.times.tolist(),
        "integrals": rows.tolist(),
        "exponents": exponents.tolist(),
        "slowest": int(np.argmin(np.where(finite, exponents, np.inf))) + 1 if finite.any() else None,
        "dominant": dominant.tolist(),
    }


def cone_profile_audit(profile: ProfileDecomposition):
    r = profile.grid.nodes
    res = [sup_ratio(row, resonant_profile(r, t)) for t, row in zip(profile.times, profile.bu_l_res)]
    nonres = [sup_ratio(row, nonresonant_profile(r, t)) for t, row in zip(profile.times, profile.bu_l_nonres)]
    nl = [z_norm(profile.grid, row, t) for t, row in zip(profile.times, profile.bu_nl)]
    return {
        "times": profile.times.tolist(),
        "resonant": res,
        "nonresonant": nonres,
        "nonlinear": nl,
        "doubling": {
            "resonant": stable_under_doubling(profile.times, res),
            "nonresonant": stable_under_doubling(profile.times, nonres),
            "nonlinear": stable_under_doubling(profile.times, nl),
        },
    }


def reassembly_check(profile: ProfileDecomposition, tol=1e-6):
    """Q + bu^l + bu^nl against the inward ODE solution of ∂_r u − sin u/r = bw, per time."""
    errors = []
    grid = profile.grid
    inner = grid.nodes < 0.9 * grid.r_max
    for j in range(len(profile.times)):
        bu = profile.bu(j)
        bw = RadialField(grid, profile.bw[j], "gauge")
        u = recover_map_from_gauge(bw, far_value=bu.values[-1])
        errors.append(float(np.max(np.abs(u.values - bu.values)[inner])))
    worst = max(errors) if errors else 0.0
    if worst > tol:
        raise ConsistencyError("bu does not match the ODE reconstruction from bw", mismatch=worst)
    return errors


def schwartz_seminorm(f: RadialField, max_alpha=4, max_power=6):
    """max over α ≤ 4, N ≤ 6 of sup|⟨r⟩^N (r∂_r)^α f|."""
    r = f.grid.nodes
    best = 0.0
    g = np.asarray(f.values, dtype=float)
    for _ in range(max_alpha + 1):
        for n in range(max_power + 1):
            best = max(best, float(np.max(np.abs(japanese(r) ** n * g))))
        g = r * f.grid.derivative(g)
    return best


def profile_lipschitz_sweep(table, w0: RadialField, w1: RadialField, dw0: RadialField, times,
                            deltas=(1e-2, 5e-3, 2.5e-3), **kwargs):
    """sup h1^{-1}t^{1.5}|δbu^nl| / ‖δw0‖_S for shrinking perturbations of w0."""
    base = build_profiles(WaveState.from_data(w0, w1, table), times, **kwargs)
    seminorm = schwartz_seminorm(dw0)
    ratios = []
    for delta in deltas:
        pert = w0.like(w0.values + delta * dw0.values)
        other = build_profiles(WaveState.from_data(pert, w1, table), times, **kwargs)
        diff = max(z_norm(base.grid, a - b, t) for t, a, b in zip(times, other.bu_nl, base.bu_nl))
        ratios.append(diff / (delta * seminorm))
    spread = max(ratios) / min(ratios) - 1.0 if min(ratios) > 0 else 0.0
    return {"deltas": list(deltas), "ratios": ratios, "spread": spread}
