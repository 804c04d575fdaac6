# wavemaps/fd_oracle.py
"""
Independent finite-difference solver for −u_tt + u_rr + u_r/r = sin(2u)/(2r²),
λ(t) tracking and the Type 1–4 classifier, and the cross-check of the
spectral construction against it.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.interpolate import CubicSpline

from .exceptions import BlowupDetected, GridError, NoCrossingError, UnderResolvedError
from .fitting import fit_power_law
from .grids import RadialField, RadialGrid
from .soliton_geometry import SolitonProfile, crossing_radius, gauge_derivative

logger = logging.getLogger(__name__)

# fourth-order composition of leapfrog steps
_CBRT2 = 2.0 ** (1.0 / 3.0)
YOSHIDA = (1.0 / (2.0 - _CBRT2), -_CBRT2 / (2.0 - _CBRT2), 1.0 / (2.0 - _CBRT2))

TYPES = ("Type1", "Type2", "Type3", "Type4", "undecided")


@dataclass(frozen=True, eq=False)
class FDState:
    """(u, u_t) at r_i = i·h, i = 0..n; u_0 = 0 and u_n are pinned."""
    h: float
    u: np.ndarray
    u_t: np.ndarray
    t: float = 0.0
    cfl: float = 0.5
    far_value: float | None = None

    def __post_init__(self):
        u = np.asarray(self.u, dtype=float).copy()
        u_t = np.asarray(self.u_t, dtype=float).copy()
        if u.shape != u_t.shape or u.ndim != 1 or len(u) < 8:
            raise GridError("FD state needs matching 1-d arrays of at least 8 nodes")
        if not 0 < self.cfl <= 0.5:
            raise GridError("CFL ratio must lie in (0, 0.5]", cfl=self.cfl)
        u[0], u_t[0] = 0.0, 0.0
        far = u[-1] if self.far_value is None else float(self.far_value)
        u[-1], u_t[-1] = far, 0.0
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "u_t", u_t)
        object.__setattr__(self, "far_value", float(far))

    @classmethod
    def from_profile(cls, h, r_max, u_of, u_t_of=None, **kwargs):
        n = int(round(r_max / h))
        r = h * np.arange(n + 1)
        u = u_of(r)
        u_t = np.zeros_like(r) if u_t_of is None else u_t_of(r)
        return cls(h, u, u_t, **kwargs)

    @classmethod
    def soliton(cls, h, r_max, lam=1.0, **kwargs):
        return cls.from_profile(h, r_max, SolitonProfile(lam).Q, **kwargs)

    @property
    def r(self):
        return self.h * np.arange(len(self.u))

    @property
    def dt(self):
        return self.cfl * self.h

    def radial_field(self):
        """u on r_1..r_n as a map-tagged field."""
        grid = RadialGrid.uniform(self.h, self.r[-1])
        return RadialField(grid, self.u[1:], "map")


# ---- discrete operator ----
def _half_radii(r, h):
    return r[:-1] + 0.5 * h


def discrete_force(u, r, h):
    """
    D_h u on interior nodes: r_i D_h u = [r_{i+½}(u_{i+1}−u_i) − r_{i−½}(u_i−u_{i−1})]/h² − sin(2u_i)/(2r_i).
    """
    flux = _half_radii(r, h) * np.diff(u) / h
    out = np.zeros_like(u)
    ri = r[1:-1]
    out[1:-1] = (np.diff(flux) / h - np.sin(2 * u[1:-1]) / (2 * ri)) / ri
    return out


def discrete_potential(u, r, h):
    """V(u) = Σ r_{i+½}(u_{i+1}−u_i)²/(2h) + Σ h sin²(u_i)/(2r_i)."""
    grad = np.sum(_half_radii(r, h) * np.diff(u) ** 2) / (2 * h)
    pot = np.sum(h * np.sin(u[1:-1]) ** 2 / (2 * r[1:-1]))
    return grad + pot


def discrete_energy(state: FDState):
    """ℰ_h = 2π(Σ h r_i u_t²/2 + V(u)), the discretization of π∫(u_t² + u_r² + sin²u/r²) r dr."""
    r = state.r
    kinetic = np.sum(state.h * r[1:-1] * state.u_t[1:-1] ** 2) / 2
    return float(2 * np.pi * (kinetic + discrete_potential(state.u, r, state.h)))


class _Stepper:
    """Well-balanced dynamics v_tt = D_h(Q + v) − D_h(Q) about the pinned reference profile."""

    def __init__(self, state: FDState, lam=1.0, sponge_width=0.0, sponge_strength=0.0):
        self.h = state.h
        self.r = state.r
        self.base = SolitonProfile(lam).Q(self.r)
        self.base[-1] = state.far_value
        self.base_force = discrete_force(self.base, self.r, self.h)
        R = self.r[-1]
        if sponge_width > 0:
            x = np.clip((self.r - (R - sponge_width)) / sponge_width, 0.0, 1.0)
            self.damping = sponge_strength * x ** 2
            logger.info(f"absorbing layer of width {sponge_width:g} on [{R - sponge_width:g}, {R:g}]")
        else:
            self.damping = None

    def force(self, u):
        return discrete_force(u, self.r, self.h) - self.base_force

    def modified_energy(self, u, u_t):
        """Conserved by the undamped semi-discrete system."""
        v = u - self.base
        r, h = self.r, self.h
        kinetic = np.sum(h * r[1:-1] * u_t[1:-1] ** 2) / 2
        work = np.sum(h * r[1:-1] * self.base_force[1:-1] * v[1:-1])
        return float(2 * np.pi * (kinetic + discrete_potential(u, r, h) - discrete_potential(self.base, r, h) - work))

    def step(self, u, u_t, dt):
        for w in YOSHIDA:
            tau = w * dt
            u_t = self._kick(u, u_t, tau / 2)
            u = u + tau * u_t
            u_t = self._kick(u, u_t, tau / 2)
        return u, u_t

    def _kick(self, u, u_t, tau):
        u_t = u_t + tau * self.force(u)
        if self.damping is not None:
            u_t = u_t * np.exp(-self.damping * abs(tau))
        u_t[0] = u_t[-1] = 0.0
        return u_t


@dataclass
class FDTrajectory:
    times: np.ndarray
    snapshots: np.ndarray
    velocities: np.ndarray
    energies: np.ndarray
    modified_energies: np.ndarray
    sup_gradient: np.ndarray
    final: FDState
    blowup: bool = False

    @property
    def r(self):
        return self.final.r

    @property
    def energy_drift(self):
        e0 = self.modified_energies[0]
        scale = max(abs(e0), abs(self.energies[0]), 1e-300)
        return float(np.max(np.abs(self.modified_energies - e0)) / scale)

    def rows(self, lambdas=None):
        lambdas = lambdas if lambdas is not None else [None] * len(self.times)
        return [
            {"t": float(t), "lambda": lam, "energy": float(e), "sup_gradient": float(g)}
            for t, lam, e, g in zip(self.times, lambdas, self.energies, self.sup_gradient)
        ]


def fd_evolve(state: FDState, t_end, record_every=1.0, lam=1.0, sponge_width=0.0, sponge_strength=0.0,
              raise_on_blowup=False) -> FDTrajectory:
    """Yoshida-composed leapfrog from state.t to t_end, recording every ``record_every``."""
    if t_end < state.t:
        raise GridError("t_end precedes the state time", t=state.t, t_end=t_end)
    stepper = _Stepper(state, lam, sponge_width, sponge_strength)
    h = state.h
    threshold = 0.1 / h
    u, u_t = state.u.copy(), state.u_t.copy()
    n_steps = int(np.ceil((t_end - state.t) / state.dt - 1e-12))
    dt = (t_end - state.t) / n_steps if n_steps else 0.0
    per_record = max(1, int(round(record_every / dt))) if dt else 1
    times, snaps, vels, energies, modified, grads = [], [], [], [], [], []

    def record(t):
        times.append(t)
        snaps.append(u.copy())
        vels.append(u_t.copy())
        energies.append(discrete_energy(replace(state, u=u, u_t=u_t, t=t)))
        modified.append(stepper.modified_energy(u, u_t))
        grads.append(abs(u[1]) / h)

    record(state.t)
    blowup = False
    for n in range(1, n_steps + 1):
        u, u_t = stepper.step(u, u_t, dt)
        if not np.all(np.isfinite(u)):
            blowup = True
        elif abs(u[1]) / h > threshold:
            blowup = True
        if blowup:
            t = state.t + n * dt
            if np.all(np.isfinite(u)):
                record(t)
            logger.warning(f"blow-up detector tripped at t={t:g} (gradient at origin above {threshold:g})")
            if raise_on_blowup:
                raise BlowupDetected("gradient at the origin exceeded 0.1/h", t=t)
            break
        if n % per_record == 0 or n == n_steps:
            record(state.t + n * dt)
    final = replace(state, u=u, u_t=u_t, t=times[-1])
    return FDTrajectory(
        np.asarray(times), np.asarray(snaps), np.asarray(vels), np.asarray(energies),
        np.asarray(modified), np.asarray(grads), final, blowup,
    )


# ---- λ tracking ----
@dataclass
class LambdaTrace:
    times: np.ndarray
    lambdas: np.ndarray
    classification: str = "undecided"
    slopes: list = field(default_factory=list)
    rates: dict = field(default_factory=dict)

    def __post_init__(self):
        lam = np.asarray(self.lambdas, dtype=float)
        if np.any(lam[np.isfinite(lam)] <= 0):
            raise GridError("λ must be positive")
        if self.classification not in TYPES:
            raise GridError(f"unknown classification {self.classification!r}")

    def rescaled(self, lam0):
        """Trace of u(λ0 t, λ0 r): times divided by λ0, λ multiplied by λ0."""
        return classify(self.times / lam0, self.lambdas * lam0)

    def to_dict(self):
        return {
            "times": self.times.tolist(),
            "lambdas": self.lambdas.tolist(),
            "classification": self.classification,
            "slopes": self.slopes,
            "rates": self.rates,
        }


def _window_slope(times, lambdas, lo, hi):
    sel = (times >= lo) & (times <= hi) & np.isfinite(lambdas) & (times > 0)
    if sel.sum() < 3:
        return float("nan")
    return fit_power_law(times[sel], lambdas[sel]).exponent


def classify(times, lambdas, blowup=False, flat=0.05) -> LambdaTrace:
    """Slopes of log λ against log t over [t_end/4, t_end/2] and [t_end/2, t_end]."""
    times = np.asarray(times, dtype=float)
    lambdas = np.asarray(lambdas, dtype=float)
    t_end = times[-1]
    slopes = [_window_slope(times, lambdas, t_end / 4, t_end / 2), _window_slope(times, lambdas, t_end / 2, t_end)]
    rates = {}
    ok = np.isfinite(lambdas)
    if ok.sum() >= 3:
        d = np.gradient(lambdas[ok], times[ok])
        rates = {
            "over_lambda_sq": float(np.max(np.abs(d) / lambdas[ok] ** 2)),
            "times_lambda_sq": float(np.max(np.abs(d) * lambdas[ok] ** 2)),
        }
    if blowup:
        label = "Type1"
    elif any(np.isnan(s) for s in slopes) or not ok[-1]:
        label = "undecided"
    else:
        labels = []
        for s in slopes:
            if abs(s) < flat:
                labels.append("Type4")
            else:
                labels.append("Type2" if s > 0 else "Type3")
        label = labels[0] if labels[0] == labels[1] else "undecided"
    return LambdaTrace(times, lambdas, label, slopes, rates)


def lambda_series(r, snapshots):
    out = []
    for u in snapshots:
        try:
            r_star, _ = crossing_radius(r, u)
            out.append(1.0 / r_star)
        except NoCrossingError:
            out.append(float("nan"))
    return np.asarray(out)


def lambda_track(trajectory: FDTrajectory) -> LambdaTrace:
    lambdas = lambda_series(trajectory.r, trajectory.snapshots)
    trace = classify(trajectory.times, lambdas, trajectory.blowup)
    logger.info(f"λ trace over [{trajectory.times[0]:g}, {trajectory.times[-1]:g}] classified as {trace.classification}")
    return trace


def synthetic_trajectory(times, lam_of, h=0.05, r_max=40.0):
    """Snapshots of Q_{λ(t)} for a prescribed λ(t), on the FD grid."""
    n = int(round(r_max / h))
    r = h * np.arange(n + 1)
    times = np.asarray(times, dtype=float)
    snaps = np.stack([SolitonProfile(lam_of(t)).Q(r) for t in times])
    final = FDState(h, snaps[-1], np.zeros_like(r), float(times[-1]))
    energy = np.array([discrete_energy(replace(final, u=s)) for s in snaps])
    return FDTrajectory(times, snaps, np.zeros_like(snaps), energy, energy, np.abs(snaps[:, 1]) / h, final)


# ---- cross-check ----
def origin_spline(r, values):
    """Cubic interpolant of samples on r > 0, pinned to 0 at the origin."""
    return CubicSpline(np.concatenate([[0.0], r]), np.concatenate([[0.0], values]))


def _mismatch(r, fd, ref, base, mask):
    """
    Weighted L² gap between the FD and reference maps, absolute and relative
    to the reference's own departure from ``base``. A reference equal to the
    base on the mask is measured absolutely.
    """
    diff = fd[mask] - ref[mask]
    w = r[mask] * (r[1] - r[0])
    absolute = float(np.sqrt(np.sum(w * diff ** 2)))
    departure = float(np.sqrt(np.sum(w * (ref[mask] - base[mask]) ** 2)))
    relative = absolute / departure if departure > 0 else absolute
    return {"l2": relative, "abs_l2": absolute, "departure": departure, "linf": float(np.max(np.abs(diff)))}


def crosscheck(u0: RadialField, u0_t: RadialField, u1: RadialField, w1: RadialField, horizon, h=0.02,
               r_max=None, sponge_width=0.0, atol=1e-6, lam=1.0):
    """
    FD-evolve (u, u_t) over ``horizon`` at h and h/2 and compare with the
    spectral (u, w) at the end time; the comparison excludes the outer band
    reachable by boundary reflections. The reported mismatch is relative to
    the reference's departure from Q_lam.
    """
    grid = u0.grid
    r_max = r_max or min(grid.r_max, 64.0)
    u_of = origin_spline(grid.nodes, u0.values)
    ut_of = origin_spline(grid.nodes, u0_t.values)
    u_ref = CubicSpline(grid.nodes, u1.values)
    w_ref = CubicSpline(grid.nodes, w1.values)
    base = CubicSpline(grid.nodes, SolitonProfile(lam).Q(grid.nodes))
    reports = []
    for step in (h, h / 2):
        state = FDState.from_profile(step, r_max, u_of, ut_of, far_value=float(u_of(r_max)))
        traj = fd_evolve(state, horizon, record_every=horizon, sponge_width=sponge_width)
        if traj.blowup:
            raise UnderResolvedError("FD run tripped the blow-up detector during the cross-check", h=step)
        r = traj.r
        mask = (r > 0) & (r <= r_max - horizon - 1.0)
        gap = _mismatch(r, traj.final.u, u_ref(r), base(r), mask)
        field_ = traj.final.radial_field()
        w_fd = gauge_derivative(field_).values
        rr = field_.grid.nodes
        gmask = (rr >= 4 * step) & (rr <= r_max - horizon - 1.0)
        gw = w_ref(rr)
        gauge_l2 = float(np.sqrt(np.sum(rr[gmask] * (w_fd - gw)[gmask] ** 2) * step))
        reports.append({"h": step, **gap, "gauge_l2": gauge_l2, "energy_drift": traj.energy_drift})
    coarse, fine = reports
    report = {
        "runs": reports,
        "mismatch": fine["l2"],
        "abs_l2": fine["abs_l2"],
        "departure": fine["departure"],
        "linf": fine["linf"],
        "gauge_l2": fine["gauge_l2"],
    }
    if coarse["abs_l2"] > 2 * fine["abs_l2"] + atol:
        raise UnderResolvedError(
            "cross-check still changes by more than 2x under refinement",
            coarse=coarse["abs_l2"], fine=fine["abs_l2"],
        )
    logger.info(
        f"FD cross-check over ΔT={horizon:g}: L² mismatch {fine['abs_l2']:.3e}, "
        f"{fine['l2']:.3e} of the departure from Q"
    )
    return report
