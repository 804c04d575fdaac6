# wavemaps/pipelines.py
"""One function per cli subcommand, plus the run bookkeeping around them."""
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from django.conf import settings
from django.db import transaction
from scipy.interpolate import CubicSpline

from . import checks
from .artifacts import ArtifactWriter, canonical_json, config_hash
from .distorted_fourier import (
    embedding_audit, enforce_nonresonance, forward_tapered, forward_values, norm_suite, schwartz_suite,
    spectral_decay_audit, transform, transform_audit,
)
from .exceptions import ConfigError, ConsistencyError, ContractionFailure, WavemapError
from .fd_oracle import (
    FDState, crosscheck, fd_evolve, lambda_track, origin_spline, synthetic_trajectory,
)
from .fitting import dyadic_times
from .gamma_solver import construct_solution, lipschitz_sweep, source_norm_audit
from .grids import FrequencyGrid, RadialField, RadialGrid
from .linear_evolution import (
    SpaceTimeSource, WaveState, closed_form_power_source, duhamel_integrate, duhamel_residual, free_snapshots,
    kest_audit, pointwise_decay_audit,
)
from .models import CheckResult, RunRecord
from .profile_builder import (
    CUBIC, build_profiles, cone_profile_audit, contraction_integrals, dt_divided_difference, dt_nonlinear_profile,
    null_cone_cancellation_audit, profile_lipschitz_sweep, reassembly_check, schwartz_seminorm,
)
from .serializers import RunConfigSerializer, flatten_errors
from .soliton_geometry import SolitonProfile, inverse_L, recover_map_from_gauge
from .spectral_core import (
    DEFAULT_TOLERANCES, build_table, partition_check, pointwise_profile_audit, series_crosscheck,
    sigma_tilde_coefficient, weight_audit, weight_smoothness,
)

logger = logging.getLogger(__name__)

SUBCOMMANDS = ("eigen", "transform", "evolve", "profile", "construct", "classify", "crosscheck")


# ---- config ----
def validate_config(data):
    serializer = RunConfigSerializer(data=data)
    if not serializer.is_valid():
        raise ConfigError("invalid run config: " + "; ".join(flatten_errors(serializer.errors)))
    return json.loads(json.dumps(serializer.validated_data))


def load_config(path):
    """A RunConfig JSON file, or a manifest of an earlier run (its embedded config is reused)."""
    if path is None:
        return {}
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc.msg} at line {exc.lineno}") from exc
    if isinstance(data, dict) and "config_hash" in data and "config" in data:
        data = data["config"]
    return data


@dataclass
class RunContext:
    subcommand: str
    config: dict
    config_hash: str
    writer: ArtifactWriter
    workers: int = 1
    cache_dir: Path = None
    results: list = field(default_factory=list)
    summary: dict = field(default_factory=dict)
    _table: object = None

    @property
    def tolerances(self):
        return self.config["tolerances"]

    def check(self, name, passed, value=None):
        outcome = checks.result(name, passed, value)
        self.results.append(outcome)
        (logger.info if outcome["passed"] else logger.warning)(f"{name}: {'PASS' if passed else 'FAIL'} {value!r}")
        return outcome

    @property
    def radial_grid(self):
        return self.table.radial_grid

    @property
    def table(self):
        if self._table is None:
            grid = self.config["grid"]
            freq = self.config["frequency"]
            radial = RadialGrid.graded(grid["r_min"], grid["r_max"], grid["nodes_per_octave"], grid["h_max"])
            fgrid = FrequencyGrid.dyadic(freq["k_min"], freq["k_max"], freq["nodes_per_octave"], freq["max_spacing"])
            tol = {k: self.tolerances[k] for k in DEFAULT_TOLERANCES if k in self.tolerances}
            self._table = build_table(fgrid, radial, tol, self.workers, self.cache_dir)
        return self._table


# ---- data ----
def default_pair(grid: RadialGrid, amplitude, amplitude_t):
    r = grid.nodes
    w0 = RadialField(grid, amplitude * r ** 4 * np.exp(-r ** 2), "gauge")
    w1 = RadialField(grid, amplitude_t * r ** 2 * (1 - r ** 2 / 2) * np.exp(-r ** 2), "gauge")
    return w0, w1


def _read_datum_file(path, grid: RadialGrid):
    try:
        data = np.genfromtxt(path, delimiter=",", names=True, comments="#")
    except OSError as exc:
        raise ConfigError(f"cannot read datum file {path}") from exc
    missing = {"r", "w0", "w1"} - set(data.dtype.names or ())
    if missing:
        raise ConfigError(f"datum file {path} lacks columns {sorted(missing)}")
    r = grid.nodes
    inside = r <= data["r"][-1]
    out = []
    for name in ("w0", "w1"):
        values = np.zeros_like(r)
        values[inside] = CubicSpline(data["r"], data[name])(r[inside])
        out.append(RadialField(grid, values, "gauge"))
    return out


def build_datum(config, grid: RadialGrid):
    """(w0, w1) on the radial grid; every family except 'resonant' satisfies ⟨w, ψ_0⟩ = 0."""
    datum = config["datum"]
    family = datum["family"]
    if family == "zero":
        z = RadialField(grid, np.zeros(grid.size), "gauge")
        return z, z
    if family == "file":
        w0, w1 = _read_datum_file(datum["path"], grid)
    else:
        w0, w1 = default_pair(grid, datum["amplitude"], datum["amplitude_t"])
    if family != "resonant":
        w0, w1 = enforce_nonresonance(w0), enforce_nonresonance(w1)
    scale = datum["scale"]
    return w0.like(scale * w0.values), w1.like(scale * w1.values)


def _within(value, target, tol):
    return value is not None and np.isfinite(value) and abs(value - target) <= tol


# ---- eigen ----
def run_eigen(ctx: RunContext):
    table = ctx.table
    tol = ctx.tolerances
    ctx.writer.rows(
        "eigen_weights.csv",
        ["xi", "k", "q", "a_modulus", "a_phase", "residual", "fit_residual", "dual_residual", "fd_residual",
         "psi_fd_residual"],
        zip(table.xi, table.freq_grid.dyadic_index, table.q, table.a_modulus, table.a_phase, table.residual,
            table.fit_residual, table.dual_residual, table.fd_residual, table.psi_fd_residual),
    )
    weights = weight_audit(table)
    sigma = {
        "with_potential": sigma_tilde_coefficient(include_potential=True),
        "without_potential": sigma_tilde_coefficient(include_potential=False),
    }
    profile = pointwise_profile_audit(table)
    ctx.writer.json("eigen_table.json", {
        "table": table.manifest(), "weights": weights, "smoothness": weight_smoothness(table),
        "sigma_tilde": sigma, "pointwise_profile": profile,
    })
    ctx.check("eigen_residual", float(np.max(table.residual)) <= tol["eigen_residual"], {
        "integrator": float(np.max(table.residual)),
        "fd_H": _nanmax(table.fd_residual),
        "fd_Htilde": _nanmax(table.psi_fd_residual),
    })
    dual = _nanmax(table.dual_residual)
    ctx.check("dual_identity", dual is None or dual <= tol["dual_identity"], dual)
    ctx.check("isometry_amplitude", weights["amplitude_deviation"] <= 1e-6, weights["amplitude_deviation"])
    if "q_large_exponent" in weights:
        ctx.check("q_large_exponent", _within(weights["q_large_exponent"], 1.5, 0.05), weights["q_large_exponent"])
    if "q_small_bounds" in weights:
        lo, hi = weights["q_small_bounds"]
        ctx.check("q_small_profile", lo > 0 and np.isfinite(hi), weights["q_small_bounds"])
    ctx.check(
        "sigma_tilde_coefficient",
        _within(sigma["with_potential"], 0.125, 1e-3) and _within(sigma["without_potential"], -0.875, 1e-3),
        sigma,
    )
    series = series_crosscheck(table)
    ctx.check("interior_series", series <= 1e-6, series)
    partition = partition_check(table.freq_grid)
    ctx.check("partition_of_unity", partition <= 1e-12, partition)
    constants = list(profile["psi_constants"].values()) + list(profile["phi_remainder_constants"].values())
    ctx.check("pointwise_profile", all(np.isfinite(constants)), profile["psi_constants"])
    ctx.summary["table"] = table.digest()


def _nanmax(x):
    x = np.asarray(x, dtype=float)
    return None if np.all(np.isnan(x)) else float(np.nanmax(x))


# ---- transform ----
def run_transform(ctx: RunContext):
    table = ctx.table
    grid = table.radial_grid
    suite = schwartz_suite(grid)
    audit = transform_audit(suite, table)
    ctx.writer.rows(
        "transform_suite.csv", ["index", *audit["rows"][0].keys()],
        ([i, *row.values()] for i, row in enumerate(audit["rows"])),
    )
    embeddings = embedding_audit(suite, table)
    bump = RadialField(grid, grid.nodes ** 4 * np.exp(-grid.nodes ** 2), "gauge")
    projected = spectral_decay_audit(enforce_nonresonance(bump), table)
    control = spectral_decay_audit(bump, table, control=True)
    w0, _ = build_datum(ctx.config, grid)
    direct = transform("forward", "Htilde", w0, table, tail_tol=None)
    tapered, settle = forward_tapered(w0, "Htilde", table, grid.r_max / 8)
    scale = max(float(np.max(np.abs(direct.values))), 1e-300)
    taper_gap = float(np.max(np.abs(tapered.values - direct.values))) / scale
    ctx.writer.density("datum_spectrum.csv", direct)
    ctx.writer.json("transform_report.json", {
        "worst": audit["worst"], "embeddings": embeddings, "decay": projected, "decay_control": control,
        "datum_norms": norm_suite(w0, table).to_dict(), "taper": {"gap": taper_gap, "settle": settle},
    })
    worst = audit["worst"]
    ctx.check("plancherel", worst["plancherel"] <= 1e-4, worst["plancherel"])
    ctx.check("round_trip", worst["round_trip"] <= 1e-6, worst["round_trip"])
    ctx.check("intertwining", worst["intertwining"] <= 1e-5, worst["intertwining"])
    ctx.check("lx_duality", worst["duality"] <= 1e-5, worst["duality"])
    ctx.check("embeddings", all(np.isfinite(v) for v in embeddings["sup"].values()), embeddings["sup"])
    ctx.check("tapered_transform", taper_gap <= 1e-6, taper_gap)
    exponent = projected.get("small_exponent")
    raw = control.get("small_exponent")
    ctx.check(
        "nonresonant_decay",
        _within(exponent, 2.5, 0.1) and raw is not None and raw < exponent,
        {"projected": exponent, "unprojected": raw},
    )


# ---- evolve ----
def run_evolve(ctx: RunContext):
    table = ctx.table
    grid = table.radial_grid
    window = ctx.config["window"]
    s_max = window["S_max"]
    w0, w1 = build_datum(ctx.config, grid)
    state = WaveState.from_data(w0, w1, table, check=ctx.config["datum"]["family"] != "resonant")
    times = dyadic_times(window["audit_start"], s_max, per_octave=2)
    values, _ = free_snapshots(state, times)
    decay = pointwise_decay_audit(times, values, grid)
    energies = [state.evolve(t).spectral_energy() for t in times]
    drift = float(np.max(np.abs(np.asarray(energies) - state.spectral_energy())) / max(state.spectral_energy(), 1e-300))

    g_hat = forward_values(table, "Htilde", w0.values if np.any(w0.values) else w1.values)
    source = SpaceTimeSource(lambda s: s ** -3 * g_hat, alpha=1.0)
    k_times = dyadic_times(window["audit_start"], s_max / 2)
    quad = dict(ratio=window["ratio"], ds_max=window["ds_max"])
    kest = kest_audit(source, k_times, table, s_max=s_max, **quad)
    t0 = float(k_times[0])
    res = duhamel_integrate(source, [t0], table, s_max=s_max, **quad)
    exact, _ = closed_form_power_source(g_hat, table.xi, t0, s_max)
    scale = max(float(np.max(np.abs(exact))), 1e-300)
    oracle = float(np.max(np.abs(res.K[0] - exact)) / scale)
    equation = duhamel_residual(source, t0, table, s_max, **quad)

    ctx.writer.rows(
        "evolution.csv", ["t", "lx", "dt_lx", "hdot1", "ratio_lx", "ratio_dt_lx", "ratio_hdot1"],
        zip(kest["times"], kest["lx"], kest["dt_lx"], kest["hdot1"], *kest["ratios"].values()),
    )
    ctx.writer.fields("free_wave.csv", grid.nodes, {f"t={t:g}": row for t, row in zip(times, values)})
    ctx.writer.json(
        "evolve_report.json",
        {"decay": decay, "kest": kest, "energy_drift": drift, "oracle": oracle, "equation_residual": equation},
    )

    ctx.check("free_energy", drift <= 1e-12, drift)
    interior = -decay["interior"]["exponent"]
    cone = -decay["cone"]["exponent"]
    ctx.check("interior_decay", _within(interior, 3.0, 0.2), interior)
    ctx.check("cone_decay", _within(cone, 0.5, 0.15), cone)
    ctx.check("duhamel_bounds", all(d["stable"] for d in kest["doubling"].values()), kest["sup"])
    ctx.check("duhamel_oracle", oracle <= ctx.tolerances["tail"], oracle)
    ctx.check("duhamel_equation", equation <= 1e-2, equation)


# ---- profile ----
def run_profile(ctx: RunContext):
    table = ctx.table
    grid = table.radial_grid
    window = ctx.config["window"]
    w0, w1 = build_datum(ctx.config, grid)
    state = WaveState.from_data(w0, w1, table)
    times = dyadic_times(window["audit_start"], window["S_max"] / 2, per_octave=2)
    sampled = build_profiles(state, times, ctx.tolerances, ctx.workers, strict=False)
    measured = sampled.measured_T()
    if measured is None:
        raise ContractionFailure("no sampled time starts a contracting tail of the window", history=len(times))
    profile = sampled.window(measured)
    times = profile.times
    cone = null_cone_cancellation_audit(state, times)
    bounds = cone_profile_audit(profile)
    cubic = dt_nonlinear_profile(profile)
    integrals = contraction_integrals(profile)
    sources = source_norm_audit(profile)
    divided = dt_divided_difference(state, float(times[len(times) // 2]), tolerances=ctx.tolerances)
    try:
        reassembly = max(reassembly_check(profile, ctx.tolerances["constraint"]))
        reassembled = True
    except ConsistencyError as exc:
        reassembly, reassembled = exc.context.get("mismatch"), False

    for j, t in enumerate(times):
        ctx.writer.fields(f"profile_t{t:g}.csv", grid.nodes, {
            "bu_l_res": profile.bu_l_res[j], "bu_l_nonres": profile.bu_l_nonres[j], "bu_nl": profile.bu_nl[j],
        })
    ctx.writer.json("profile_report.json", {
        "measured_T": measured, "norms": profile.norms().to_dict(), "history": sampled.history,
        "light_cone": cone, "bounds": bounds, "cubic": cubic, "integrals": integrals, "sources": sources,
        "dt_divided_difference": divided,
    })
    ctx.summary["measured_T"] = measured

    ctx.check("profile_contraction", measured < window["S_max"] / 4, measured)
    ctx.check(
        "light_cone_cancellation",
        _within(cone["exponents"]["combination"], 2.5, 0.2) and cone["gap_raw"] > 0 and cone["gap_perturbed"] > 0,
        {"exponent": cone["exponents"]["combination"], "gap_raw": cone["gap_raw"], "gap_perturbed": cone["gap_perturbed"]},
    )
    ctx.check("nonlinear_profile_bound", bounds["doubling"]["nonlinear"]["stable"], max(bounds["nonlinear"]))
    fitted = cubic["kappa"][f"{CUBIC:.6g}"]
    ctx.check(
        "cubic_cancellation", fitted["doubling"]["stable"] and np.isfinite(fitted["constant"]),
        {"constant": fitted["constant"], "fitted_kappa": cubic["fitted_kappa"]},
    )
    ctx.check("nonlinear_profile_dt", divided <= 1e-4, divided)
    ctx.check("reassembly", reassembled, reassembly)
    ctx.check(
        "source_reorganization",
        _within(sources["lx_exponent"], 3.5, 0.2) and sources["reorganized_exponent"] - sources["naive_near_exponent"] >= 1.0,
        {k: v for k, v in sources.items() if k.endswith("_exponent")},
    )
    if window["lipschitz"] and _has_direction(w0):
        sweep = profile_lipschitz_sweep(table, w0, w1, w0, times, tolerances=ctx.tolerances)
        ctx.writer.json("profile_lipschitz.json", sweep)
        ctx.check("profile_lipschitz", sweep["spread"] <= 0.2, sweep)


def _has_direction(w0: RadialField):
    if schwartz_seminorm(w0) > 0:
        return True
    logger.warning("datum w0 vanishes; skipping the Lipschitz runs")
    return False


# ---- construct ----
def _construction_options(ctx: RunContext):
    window = ctx.config["window"]
    return {
        "T_init": window["T_init"], "s_max": window["S_max"], "tolerances": ctx.tolerances,
        "workers": ctx.workers, "ratio": window["ratio"], "ds_max": window["ds_max"],
        "max_doublings": window["max_doublings"], "check": ctx.config["datum"]["family"] != "resonant",
    }


def _construct(ctx: RunContext):
    w0, w1 = build_datum(ctx.config, ctx.table.radial_grid)
    return construct_solution(w0, w1, ctx.table, **_construction_options(ctx))


def run_construct(ctx: RunContext):
    construction = _construct(ctx)
    record = construction.record
    norms = record.norms
    ctx.writer.rows(
        "construct_norms.csv", ["t", *norms.keys(), "lambda"],
        zip(record.times, *norms.values(), record.lambdas),
    )
    ctx.writer.json("construct_record.json", record.to_dict())
    ctx.summary.update({"T": record.T, "exponents": record.exponents})
    for key, exponent in record.exponents.items():
        ctx.check(key, record.passed[key], {"exponent": exponent, "constant": record.constants[key]})
    ctx.check("constraint", record.passed["constraint"], record.constraint_residual)
    ctx.check("lambda_confined", np.isfinite(record.lambda_spread) and record.lambda_spread < 0.5,
              {"spread": record.lambda_spread, "lambdas": record.lambdas})
    w0, w1 = build_datum(ctx.config, ctx.table.radial_grid)
    if ctx.config["window"]["lipschitz"] and _has_direction(w0):
        sweep = lipschitz_sweep(w0, w1, w0, ctx.table, **_construction_options(ctx))
        ctx.writer.json("construct_lipschitz.json", sweep)
        ctx.check("construction_lipschitz", sweep["stable"], sweep)


# ---- classify ----
LAWS = {
    "linear": lambda lam: (lambda t: lam * (1.0 + t)),
    "inverse": lambda lam: (lambda t: lam / (1.0 + t)),
    "constant": lambda lam: (lambda t: lam),
}


def datum_map(config, grid: RadialGrid):
    """(u, u_t) at t = 0 near Q: u from its gauge derivative w0, u_t = L^{-1}w1."""
    w0, w1 = build_datum(config, grid)
    u = recover_map_from_gauge(w0)
    u_t = RadialField(grid, inverse_L(grid, w1.values), "map")
    return u, u_t


def run_classify(ctx: RunContext):
    fd = ctx.config["fd"]
    h, r_max = fd["h"], fd["r_max"]
    if fd["mode"] == "synthetic":
        times = np.arange(0.0, fd["t_end"] + fd["record_every"] / 2, fd["record_every"])
        trajectory = synthetic_trajectory(times, LAWS[fd["law"]](fd["lam"]), h, r_max)
    else:
        if fd["mode"] == "soliton":
            state = FDState.soliton(h, r_max, fd["lam"])
        else:
            u, u_t = datum_map(ctx.config, ctx.radial_grid)
            state = FDState.from_profile(
                h, r_max, origin_spline(u.r, u.values), origin_spline(u_t.r, u_t.values),
            )
        trajectory = fd_evolve(
            state, fd["t_end"], fd["record_every"], sponge_width=fd["sponge_width"],
            sponge_strength=fd["sponge_strength"],
        )
        drift = trajectory.energy_drift
        ctx.check("energy_drift", drift <= 1e-6, drift)
        if fd["mode"] == "soliton":
            Q = SolitonProfile(fd["lam"]).Q(trajectory.r)
            moved = float(np.max(np.abs(trajectory.snapshots - Q)))
            ctx.check("soliton_stationarity", moved <= 1e-6, moved)
    trace = lambda_track(trajectory)
    rescaled = trace.rescaled(2.0)
    ctx.writer.rows(
        "trajectory.csv", ["t", "lambda", "energy", "sup_gradient"],
        ([row["t"], row["lambda"], row["energy"], row["sup_gradient"]] for row in trajectory.rows(trace.lambdas)),
    )
    ctx.writer.json("classification.json", {**trace.to_dict(), "rescaled_classification": rescaled.classification})
    ctx.summary["classification"] = trace.classification
    ctx.check(
        "classification",
        trace.classification != "undecided" and rescaled.classification == trace.classification,
        {"classification": trace.classification, "slopes": trace.slopes, "rates": trace.rates},
    )


# ---- crosscheck ----
def run_crosscheck(ctx: RunContext):
    fd = ctx.config["fd"]
    construction = _construct(ctx)
    nodes = construction.nodes
    t0 = float(construction.audit_times[0])
    j1 = int(np.argmin(np.abs(nodes - (t0 + fd["horizon"]))))
    t1 = float(nodes[j1])
    report = crosscheck(
        construction.u(t0), construction.u_t(t0), construction.u(t1), construction.w(t1), t1 - t0,
        h=fd["h"], r_max=fd["r_max"], sponge_width=fd["sponge_width"],
    )
    ctx.writer.rows(
        "crosscheck.csv", ["h", "l2", "abs_l2", "departure", "linf", "gauge_l2", "energy_drift"],
        (
            [run["h"], run["l2"], run["abs_l2"], run["departure"], run["linf"], run["gauge_l2"], run["energy_drift"]]
            for run in report["runs"]
        ),
    )
    ctx.writer.json("crosscheck_report.json", {"t0": t0, "t1": t1, **report})
    ctx.summary.update({"t0": t0, "horizon": t1 - t0})
    ctx.check("fd_agreement", report["mismatch"] <= 1e-3, report["mismatch"])


PIPELINES = {
    "eigen": run_eigen,
    "transform": run_transform,
    "evolve": run_evolve,
    "profile": run_profile,
    "construct": run_construct,
    "classify": run_classify,
    "crosscheck": run_crosscheck,
}


# ---- run ----
def execute(subcommand, data, output_dir=None, workers=None, cache_dir=None):
    """
    Validate, run and record one subcommand. Returns the RunRecord; raises
    the pipeline's WavemapError after recording it as failed.
    """
    if subcommand not in PIPELINES:
        raise ConfigError(f"unknown subcommand {subcommand!r}", choices=", ".join(SUBCOMMANDS))
    config = validate_config(data)
    digest = config_hash(config)
    conf = settings.WAVEMAPS
    out = Path(output_dir or conf["OUTPUT_DIR"]) / f"{subcommand}-{digest[:12]}"
    writer = ArtifactWriter(out, digest, config["tolerances"])
    ctx = RunContext(
        subcommand, config, digest, writer,
        workers=workers or conf["WORKERS"], cache_dir=cache_dir or conf["CACHE_DIR"],
    )
    record = RunRecord.objects.create(subcommand=subcommand, config_hash=digest, config=config, output_dir=str(out))
    logger.info(f"{subcommand} run {record.pk} with config {digest[:12]} writing to {out}")
    try:
        PIPELINES[subcommand](ctx)
    except WavemapError as exc:
        _finish(ctx, record, "failed", exc.exit_code, str(exc))
        raise
    passed = all(r["passed"] for r in ctx.results)
    _finish(ctx, record, "passed" if passed else "failed", 0 if passed else 2, "")
    return record


def _finish(ctx: RunContext, record: RunRecord, status, exit_code, message):
    manifest = {
        "subcommand": ctx.subcommand,
        "config": ctx.config,
        "status": status,
        "exit_code": exit_code,
        "message": message,
        "summary": ctx.summary,
        "checks": ctx.results,
    }
    ctx.writer.manifest(manifest)
    with transaction.atomic():
        CheckResult.objects.bulk_create([
            CheckResult(run=record, name=r["name"], anchor=r["anchor"], passed=r["passed"], value=_json_safe(r["value"]))
            for r in ctx.results
        ])
        record.status = status
        record.exit_code = exit_code
        record.message = message
        record.manifest = _json_safe(manifest)
        record.save()


def _json_safe(value):
    return json.loads(canonical_json(value))
