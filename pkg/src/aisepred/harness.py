"""End-to-end experiment runner for the two benchmark scenarios.

Streams noisy per-axis measurements into the configured estimator banks
(three derivative channels per axis, plus the two baselines), emits a
prediction trace from every anchor step, and scores horizon-endpoint errors
against noiseless truth. Runs are deterministic for a fixed config and seed:
repeated runs produce byte-identical artifacts.
"""

import hashlib
import json
import os
import time
from dataclasses import dataclass, replace

import numpy as np

from . import __version__
from .aise import AiseConfig, AiseFilter, benchmark_config
from .baselines import AbgFilter, BdbDifferentiator
from .frenet import DegenerateGeometry, scalar_params
from .prediction import METHODS, DerivativeEstimate, predict
from .scenarios import SCENARIOS, add_noise, format_csv_row, read_positions_csv, truth_arrays

__all__ = [
    "ExperimentConfig",
    "RmseReport",
    "normalize_method",
    "rmse",
    "run_experiment",
    "config_to_dict",
    "config_from_dict",
    "load_config",
]

_DEFAULT_SIGMA = {"parabolic": 1.0, "helical": 0.1}

_METHOD_ALIASES = {
    "aise-va": "AISE/va",
    "aise-fs": "AISE/FS",
    "bdb-va": "BDB/va",
    "abg-va": "ABG/va",
}


def normalize_method(name):
    """Map a CLI-style method name (aise-fs) or canonical tag (AISE/FS) to the tag."""
    if name in METHODS:
        return name
    key = name.strip().lower()
    if key in _METHOD_ALIASES:
        return _METHOD_ALIASES[key]
    raise ValueError(f"unknown method {name!r}; expected one of {sorted(_METHOD_ALIASES)}")


@dataclass(frozen=True)
class ExperimentConfig:
    """Full description of one experiment run.

    Steps run k = 0..n_steps inclusive; predictions are anchored at every
    k in [k0, n_steps - horizon]. sigma = None selects the scenario default
    (1.0 m for the planar trajectory, 0.1 m for the helix, 0 for CSV input).
    """

    scenario: str = "helical"
    n_steps: int = 5000
    k0: int = 2000
    horizon: int = 100
    sigma: float | None = None
    seed: int = 0
    t_s: float = 0.01
    methods: tuple = ("BDB/va", "ABG/va", "AISE/va", "AISE/FS")
    rmse_form: str = "standard"
    truth_derivatives: bool = False
    anchor_on_estimate: bool = False
    aise_order1: AiseConfig | None = None
    aise_order2: AiseConfig | None = None
    aise_order3: AiseConfig | None = None
    butterworth_order: int = 10
    butterworth_cutoff: float = 0.8 * np.pi
    tracking_index: float = 0.6

    def __post_init__(self):
        object.__setattr__(self, "methods", tuple(normalize_method(m) for m in self.methods))
        if not self.methods:
            raise ValueError("at least one prediction method is required")
        if self.horizon < 1:
            raise ValueError("horizon must be >= 1")
        if self.k0 < 0:
            raise ValueError("k0 must be >= 0")
        if self.k0 + self.horizon >= self.n_steps:
            raise ValueError(
                f"need k0 + horizon < n_steps, got {self.k0} + {self.horizon} >= {self.n_steps}"
            )
        if self.rmse_form not in ("standard", "literal"):
            raise ValueError(f"rmse_form must be 'standard' or 'literal', got {self.rmse_form!r}")
        if not (self.scenario in SCENARIOS or self.scenario.startswith("csv:")):
            raise ValueError(
                f"scenario must be one of {SCENARIOS} or 'csv:<path>', got {self.scenario!r}"
            )
        if self.scenario.startswith("csv:") and self.truth_derivatives:
            raise ValueError("truth-derivative injection requires an analytic scenario")

    def resolved_sigma(self):
        if self.sigma is not None:
            return self.sigma
        return _DEFAULT_SIGMA.get(self.scenario, 0.0)

    def aise_config(self, order):
        override = getattr(self, f"aise_order{order}")
        if override is not None:
            return replace(override, order=order, t_s=self.t_s)
        return benchmark_config(order, t_s=self.t_s)


@dataclass
class RmseReport:
    """Per-method horizon-endpoint RMSE (x, y, z), in meters."""

    methods: dict
    n_tilde: int
    runtime_s: float
    config: dict


def rmse(truth_positions, traces, horizon, k0, form="standard"):
    """Per-axis RMSE of horizon-endpoint predictions against noiseless truth.

    truth_positions has one row per step 0..N; traces is the collection of
    prediction traces for one method, holding every anchor in [k0, N - horizon].
    The standard form is sqrt(mean(e^2)); the literal form divides the root of
    the summed squares by the anchor count instead.
    """
    truth_positions = np.asarray(truth_positions, dtype=float)
    n_last = len(truth_positions) - 1
    by_anchor = {tr.anchor_step: tr for tr in traces}
    errors = np.empty((n_last - horizon - k0 + 1, 3))
    for i, k in enumerate(range(k0, n_last - horizon + 1)):
        trace = by_anchor.get(k)
        if trace is None:
            raise ValueError(f"missing prediction trace for anchor step {k}")
        errors[i] = truth_positions[k + horizon] - trace.positions[horizon - 1]
    n_tilde = len(errors)
    root = np.sqrt((errors**2).sum(axis=0))
    if form == "standard":
        return root / np.sqrt(n_tilde)
    if form == "literal":
        return root / n_tilde
    raise ValueError(f"unknown RMSE form {form!r}")


def _load_scenario(config):
    """Resolve truth arrays and sample time for the configured scenario."""
    if config.scenario.startswith("csv:"):
        path = config.scenario[4:]
        t, P = read_positions_csv(path)
        n_steps = min(config.n_steps, len(P) - 1)
        if config.k0 + config.horizon >= n_steps:
            raise ValueError(
                f"CSV provides {len(P)} rows; need k0 + horizon < {n_steps}"
            )
        t_s = float(t[1] - t[0])
        return P, None, None, None, n_steps, t_s
    P, V, A, J = truth_arrays(config.scenario, config.n_steps, config.t_s)
    return P, V, A, J, config.n_steps, config.t_s


def run_experiment(config, out_dir=None):
    """Run one experiment; returns the RMSE report and optionally writes artifacts.

    With out_dir set, writes report.json, trace.csv, predictions.csv, and
    manifest.json into it.
    """
    start = time.perf_counter()
    P, V, A, J, n_steps, t_s = _load_scenario(config)
    sigma = config.resolved_sigma()
    measurements = add_noise(P[: n_steps + 1], sigma, config.seed)

    methods = config.methods
    use_aise = any(m.startswith("AISE/") for m in methods) and not config.truth_derivatives
    use_bdb = "BDB/va" in methods and not config.truth_derivatives
    use_abg = "ABG/va" in methods and not config.truth_derivatives
    want_frenet = "AISE/FS" in methods

    n_rows = n_steps + 1
    est = {}
    if use_aise or config.truth_derivatives:
        est["aise_v"] = np.zeros((n_rows, 3))
        est["aise_a"] = np.zeros((n_rows, 3))
        est["aise_j"] = np.zeros((n_rows, 3))
    if use_bdb:
        est["bdb_v"] = np.zeros((n_rows, 3))
        est["bdb_a"] = np.zeros((n_rows, 3))
        est["bdb_p"] = np.zeros((n_rows, 3))
    if use_abg:
        est["abg_v"] = np.zeros((n_rows, 3))
        est["abg_a"] = np.zeros((n_rows, 3))
        est["abg_p"] = np.zeros((n_rows, 3))
    if want_frenet:
        frenet_params = np.full((n_rows, 3), np.nan)  # columns: curvature, torsion, speed
        fs_degenerate = np.zeros(n_rows, dtype=bool)

    aise_bank = None
    if use_aise:
        aise_bank = {
            order: [AiseFilter(config.aise_config(order)) for _ in range(3)]
            for order in (1, 2, 3)
        }
        aise_pos = np.zeros((n_rows, 3))
    bdb_bank = (
        [BdbDifferentiator(t_s, config.butterworth_order, config.butterworth_cutoff)
         for _ in range(3)]
        if use_bdb else None
    )
    abg_bank = [AbgFilter(config.tracking_index, t_s) for _ in range(3)] if use_abg else None

    first_anchor, last_anchor = config.k0, n_steps - config.horizon
    traces = {m: [] for m in methods}

    for k in range(n_rows):
        m_k = measurements[k]
        if config.truth_derivatives:
            est["aise_v"][k], est["aise_a"][k], est["aise_j"][k] = V[k], A[k], J[k]
        if use_aise:
            for ax in range(3):
                est["aise_v"][k, ax] = aise_bank[1][ax].step(m_k[ax])
                est["aise_a"][k, ax] = aise_bank[2][ax].step(m_k[ax])
                est["aise_j"][k, ax] = aise_bank[3][ax].step(m_k[ax])
                aise_pos[k, ax] = aise_bank[1][ax].x_da[0]
        if use_bdb:
            for ax in range(3):
                v, a = bdb_bank[ax].step(m_k[ax])
                est["bdb_v"][k, ax] = v
                est["bdb_a"][k, ax] = a
                est["bdb_p"][k, ax] = bdb_bank[ax].filtered
        if use_abg:
            for ax in range(3):
                p, v, a = abg_bank[ax].step(m_k[ax])
                est["abg_p"][k, ax] = p
                est["abg_v"][k, ax] = v
                est["abg_a"][k, ax] = a

        if want_frenet:
            try:
                speed, curvature, torsion = scalar_params(
                    est["aise_v"][k], est["aise_a"][k], est["aise_j"][k]
                )
                frenet_params[k] = (curvature, torsion, speed)
            except DegenerateGeometry:
                fs_degenerate[k] = True

        if first_anchor <= k <= last_anchor:
            for method in methods:
                if config.truth_derivatives or method.startswith("AISE/"):
                    v_hat, a_hat = est["aise_v"][k], est["aise_a"][k]
                    j_hat = est["aise_j"][k]
                    pos_est = aise_pos[k] if use_aise else m_k
                elif method == "BDB/va":
                    v_hat, a_hat, j_hat = est["bdb_v"][k], est["bdb_a"][k], None
                    pos_est = est["bdb_p"][k]
                else:
                    v_hat, a_hat, j_hat = est["abg_v"][k], est["abg_a"][k], None
                    pos_est = est["abg_p"][k]
                anchor = pos_est if config.anchor_on_estimate else m_k
                estimates = DerivativeEstimate(
                    v=v_hat, a=a_hat, j=j_hat if method == "AISE/FS" else None
                )
                traces[method].append(
                    predict(method, anchor, estimates, config.horizon, t_s, anchor_step=k)
                )

    report_methods = {
        m: rmse(P[: n_rows], traces[m], config.horizon, config.k0, config.rmse_form)
        for m in methods
    }
    n_tilde = last_anchor - first_anchor + 1
    resolved = config_to_dict(config)
    resolved["sigma"] = sigma
    report = RmseReport(
        methods=report_methods,
        n_tilde=n_tilde,
        runtime_s=time.perf_counter() - start,
        config=resolved,
    )

    if out_dir is not None:
        _write_artifacts(out_dir, config, report, n_steps, t_s, P, measurements, est,
                         frenet_params if want_frenet else None,
                         fs_degenerate if want_frenet else None, traces)
    return report


# ---------------------------------------------------------------------------
# Config serialization
# ---------------------------------------------------------------------------


def _aise_dict(cfg):
    if cfg is None:
        return None
    return {
        "order": cfg.order, "t_s": cfg.t_s, "n_e": cfg.n_e, "n_f": cfg.n_f,
        "r_z": cfg.r_z, "r_d": cfg.r_d, "r_theta": cfg.r_theta, "r_inf": cfg.r_inf,
        "eta_init": cfg.eta_init, "eta_l": cfg.eta_l, "eta_u": cfg.eta_u, "beta": cfg.beta,
        "tau_n": cfg.tau_n, "tau_d": cfg.tau_d, "alpha_vrf": cfg.alpha_vrf,
        "eta_grid_points": cfg.eta_grid_points, "adapt_start": cfg.adapt_start,
        "eta_rule": cfg.eta_rule,
    }


def config_to_dict(config):
    """JSON-ready dict of every experiment parameter (schema version 1)."""
    return {
        "schema_version": 1,
        "scenario": config.scenario,
        "n_steps": config.n_steps,
        "k0": config.k0,
        "horizon": config.horizon,
        "sigma": config.sigma,
        "seed": config.seed,
        "t_s": config.t_s,
        "methods": list(config.methods),
        "rmse_form": config.rmse_form,
        "truth_derivatives": config.truth_derivatives,
        "anchor_on_estimate": config.anchor_on_estimate,
        "aise": {
            f"order{order}": _aise_dict(config.aise_config(order)) for order in (1, 2, 3)
        },
        "butterworth": {
            "order": config.butterworth_order,
            "cutoff": config.butterworth_cutoff,
        },
        "tracking_index": config.tracking_index,
    }


def config_from_dict(data):
    """Inverse of config_to_dict; unknown keys are rejected."""
    data = dict(data)
    version = data.pop("schema_version", 1)
    if version != 1:
        raise ValueError(f"unsupported config schema version {version!r}")
    aise = data.pop("aise", {}) or {}
    kwargs = {}
    for order in (1, 2, 3):
        block = aise.get(f"order{order}")
        if block is not None:
            kwargs[f"aise_order{order}"] = AiseConfig(**block)
    butter = data.pop("butterworth", None)
    if butter:
        kwargs["butterworth_order"] = butter.get("order", 10)
        kwargs["butterworth_cutoff"] = butter.get("cutoff", 0.8 * np.pi)
    if "methods" in data:
        data["methods"] = tuple(data["methods"])
    allowed = {
        "scenario", "n_steps", "k0", "horizon", "sigma", "seed", "t_s", "methods",
        "rmse_form", "truth_derivatives", "anchor_on_estimate", "tracking_index",
    }
    unknown = set(data) - allowed
    if unknown:
        raise ValueError(f"unknown config fields: {sorted(unknown)}")
    kwargs.update(data)
    return ExperimentConfig(**kwargs)


def load_config(path):
    with open(path) as fh:
        return config_from_dict(json.load(fh))


# ---------------------------------------------------------------------------
# Artifacts
# ---------------------------------------------------------------------------


def _write_artifacts(out_dir, config, report, n_steps, t_s, truth, measurements, est,
                     frenet_params, fs_degenerate, traces):
    os.makedirs(out_dir, exist_ok=True)
    resolved = report.config

    payload = {
        "schema_version": 1,
        "scenario": config.scenario,
        "n_steps": n_steps,
        "k0": config.k0,
        "horizon": config.horizon,
        "sigma": resolved["sigma"],
        "seed": config.seed,
        "rmse_form": config.rmse_form,
        "truth_derivatives": config.truth_derivatives,
        "n_tilde": report.n_tilde,
        "methods": {
            m: {"rmse_x": float(v[0]), "rmse_y": float(v[1]), "rmse_z": float(v[2])}
            for m, v in report.methods.items()
        },
    }
    with open(os.path.join(out_dir, "report.json"), "w") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")

    config_json = json.dumps(resolved, sort_keys=True)
    manifest = {
        "schema_version": 1,
        "package_version": __version__,
        "seed": config.seed,
        "config_sha256": hashlib.sha256(config_json.encode()).hexdigest(),
        "config": resolved,
    }
    with open(os.path.join(out_dir, "manifest.json"), "w") as fh:
        json.dump(manifest, fh, indent=2)
        fh.write("\n")

    columns = ["step", "t"]
    columns += ["px", "py", "pz", "mx", "my", "mz"]
    blocks = []
    if "aise_v" in est:
        blocks += [("aise_v", "aise_v"), ("aise_a", "aise_a"), ("aise_j", "aise_j")]
    if "bdb_v" in est:
        blocks += [("bdb_v", "bdb_v"), ("bdb_a", "bdb_a")]
    if "abg_v" in est:
        blocks += [("abg_v", "abg_v"), ("abg_a", "abg_a")]
    for _, prefix in blocks:
        columns += [f"{prefix}{ax}" for ax in ("x", "y", "z")]
    if frenet_params is not None:
        columns += ["kappa", "tau", "u", "fs_fallback"]
    with open(os.path.join(out_dir, "trace.csv"), "w") as fh:
        fh.write(",".join(columns) + "\n")
        for k in range(n_steps + 1):
            row = [k, k * t_s, *truth[k], *measurements[k]]
            for key, _ in blocks:
                row.extend(est[key][k])
            if frenet_params is not None:
                row.extend(frenet_params[k])
                row.append(bool(fs_degenerate[k]))
            fh.write(format_csv_row(row) + "\n")

    with open(os.path.join(out_dir, "predictions.csv"), "w") as fh:
        fh.write("anchor,method,l,x,y,z\n")
        for method in config.methods:
            for trace in traces[method]:
                for l in range(1, trace.horizon + 1):
                    pos = trace.positions[l - 1]
                    fh.write(f"{trace.anchor_step},{method},{l},"
                             + format_csv_row(pos) + "\n")
