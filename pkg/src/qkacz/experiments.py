"""Experiment orchestration and machine-readable reporting.

Every run writes four files into the output directory: ``manifest.json``
(full configuration, resolved seed, software version, CSV schema),
``trials.csv`` (per-trial, per-step traces), ``aggregate.csv`` (per-step
means, the expected-error bound, and ledger cost), and ``summary.json``
(spectral data, iteration-count bounds, complexity estimates, results).
The CSV bodies contain no timestamps and all floats carry 17 significant
digits, so identical configurations reproduce byte-identical files.
"""

from __future__ import annotations

import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, replace
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from ._kernels import KERNEL_BACKEND
from .instances import InstanceSpec, generate_instance
from .kaczmarz import (SelectionStrategy, convergence_bound, iteration_count,
                       run_kaczmarz, t_lower_bound, t_upper_bound)
from .pipeline import run_quantum_kaczmarz
from .prng import stream_seed
from .resources import ledger_closed_form, theorem1_estimate

BACKEND_CHOICES = ("classical", "encoded-operator", "full-unitary")

TRIALS_COLUMNS = ("trial", "k", "selected_row", "error_sq", "iterate_norm_sq")
AGGREGATE_COLUMNS = ("k", "mean_error_sq", "bound_error_sq",
                     "mean_success_prob", "ledger_cost")
EQUIV_EXTRA_COLUMN = "max_deviation"
RESOURCES_COLUMNS = ("k", "recursion_cost", "closed_form_cost")


class ConfigError(ValueError):
    """Invalid or unreadable experiment configuration."""


@dataclass
class ExperimentConfig:
    """Everything one experiment needs, resolved and validated."""

    instance: InstanceSpec
    strategy: str = "norm-weighted-random"
    lam: float = 1.0
    mode: str = "fixed-T"
    T: int | None = None
    eps: float | None = None
    trials: int = 1
    backend: str = "classical"
    seed: int = 0
    output_dir: str = "out"

    def __post_init__(self):
        if self.mode not in ("fixed-T", "target-eps"):
            raise ConfigError(f"unknown mode {self.mode!r}")
        if self.mode == "fixed-T" and (self.T is None or self.eps is not None):
            raise ConfigError("fixed-T mode needs T set and eps unset")
        if self.mode == "target-eps" and (self.eps is None
                                          or self.T is not None):
            raise ConfigError("target-eps mode needs eps set and T unset")
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if self.backend not in BACKEND_CHOICES:
            raise ConfigError(f"unknown backend {self.backend!r}; expected "
                              f"one of {BACKEND_CHOICES}")

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        data = dict(data)
        try:
            inst = InstanceSpec(**data.pop("instance"))
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"bad instance spec: {exc}") from exc
        if "lambda" in data:
            data["lam"] = data.pop("lambda")
        try:
            return cls(instance=inst, **data)
        except TypeError as exc:
            raise ConfigError(f"bad config field: {exc}") from exc

    @classmethod
    def from_json(cls, path) -> "ExperimentConfig":
        try:
            with open(path) as fh:
                data = json.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
        return cls.from_dict(data)


def _fmt(v) -> str:
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return "%.17g" % v


def _max_workers(trials: int) -> int:
    env = os.environ.get("QKACZ_THREADS", "").strip()
    cap = int(env) if env else (os.cpu_count() or 1)
    return max(1, min(cap, trials))


@dataclass
class _TrialResult:
    selected: np.ndarray
    errors_sq: np.ndarray
    norms_sq: np.ndarray
    deviations: np.ndarray | None = None
    ledger: object = None


def _run_trial(cfg, sys, x_sol, T, trial):
    strategy = SelectionStrategy(cfg.strategy, seed=stream_seed(cfg.seed,
                                                                trial))
    if cfg.backend == "classical":
        trace = run_kaczmarz(sys, strategy, cfg.lam, T, x_sol=x_sol)
        norms = np.einsum("ij,ij->i", trace.iterates, trace.iterates)
        return _TrialResult(trace.selected_rows, trace.errors_sq, norms)
    state, trace = run_quantum_kaczmarz(sys, strategy, cfg.lam, T,
                                        backend=cfg.backend)
    diff = trace.iterates - x_sol
    errors = np.einsum("ij,ij->i", diff, diff)
    cols = state.column_history
    norms = np.einsum("ij,ij->i", cols, cols)
    deviations = np.max(np.abs(cols - trace.iterates), axis=1)
    result = _TrialResult(trace.selected_rows, errors, norms, deviations)
    result.ledger = state.ledger
    return result


def run_experiment(cfg: ExperimentConfig, command: str = "solve") -> dict:
    """Execute one experiment and write its report files.

    Returns the summary dictionary (also written to ``summary.json``).
    """
    if command == "equiv" and cfg.backend == "classical":
        # the comparison needs a quantum trace next to the classical one
        cfg = replace(cfg, backend="encoded-operator")
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    try:
        sys = generate_instance(cfg.instance, cfg.seed)
    except (OSError, ValueError) as exc:
        raise ConfigError(f"cannot build instance: {exc}") from exc
    spectral = sys.spectral
    x_sol = sys.solution()
    T = cfg.T if cfg.mode == "fixed-T" else iteration_count(spectral, cfg.eps)

    _write_manifest(out, cfg, command, T)

    if command == "resources":
        return _run_resources(out, cfg, sys, T)

    results = _run_trials(cfg, sys, x_sol, T)
    _write_trials_csv(out / "trials.csv", results)
    aggregate = _aggregate(cfg, sys, x_sol, T, results, command)
    _write_aggregate_csv(out / "aggregate.csv", aggregate, command)
    summary = _summarize(cfg, sys, T, results, aggregate, command)
    with open(out / "summary.json", "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return summary


def _run_trials(cfg, sys, x_sol, T):
    workers = _max_workers(cfg.trials)
    if workers == 1:
        return [_run_trial(cfg, sys, x_sol, T, t) for t in range(cfg.trials)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(_run_trial, cfg, sys, x_sol, T, t)
                   for t in range(cfg.trials)]
        return [f.result() for f in futures]


def _write_manifest(out, cfg, command, T):
    manifest = {
        "schema_version": "1",
        "command": command,
        "config": _config_dict(cfg),
        "resolved": {
            "T": T,
            "seed": cfg.seed,
            "version": __version__,
            "kernel_backend": KERNEL_BACKEND,
            "trials_columns": list(TRIALS_COLUMNS),
            "aggregate_columns": list(AGGREGATE_COLUMNS) + (
                [EQUIV_EXTRA_COLUMN] if command == "equiv" else []),
            "resources_columns": list(RESOURCES_COLUMNS),
        },
        "timestamp": datetime.now(timezone.utc).isoformat(),
    }
    with open(out / "manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _config_dict(cfg):
    d = asdict(cfg)
    d["instance"] = asdict(cfg.instance)
    return d


def _write_trials_csv(path, results):
    with open(path, "w") as fh:
        fh.write(",".join(TRIALS_COLUMNS) + "\n")
        for t, res in enumerate(results):
            steps = res.errors_sq.size
            for k in range(steps):
                row = res.selected[k] if k < res.selected.size else -1
                fh.write(f"{t},{k},{row},{_fmt(res.errors_sq[k])},"
                         f"{_fmt(res.norms_sq[k])}\n")


def _aggregate(cfg, sys, x_sol, T, results, command):
    errors = np.stack([r.errors_sq for r in results])
    norms = np.stack([r.norms_sq for r in results])
    init_err = float(x_sol @ x_sol)
    bound = np.array([convergence_bound(sys.spectral, init_err, k)
                      for k in range(T + 1)])
    c_prep = _max_prep_cost(sys)
    cost = np.array([ledger_closed_form(1, c_prep, k) for k in range(T + 1)],
                    dtype=object)
    agg = {
        "k": np.arange(T + 1),
        "mean_error_sq": errors.mean(axis=0),
        "bound_error_sq": bound,
        "mean_success_prob": norms.mean(axis=0),
        "ledger_cost": cost,
    }
    if command == "equiv":
        devs = np.stack([r.deviations for r in results])
        agg[EQUIV_EXTRA_COLUMN] = devs.max(axis=0)
    return agg


def _max_prep_cost(sys):
    # structured-regime gate model: ceil(log2 of the padded column count)
    d = max(2, 1 << (sys.m - 1).bit_length())
    return (d - 1).bit_length()


def _write_aggregate_csv(path, agg, command):
    cols = list(AGGREGATE_COLUMNS) + ([EQUIV_EXTRA_COLUMN]
                                      if command == "equiv" else [])
    with open(path, "w") as fh:
        fh.write(",".join(cols) + "\n")
        for i in range(agg["k"].size):
            fh.write(",".join(_fmt(agg[c][i]) for c in cols) + "\n")


def _t_bounds_block(spectral, eps):
    block = {"eps": eps}
    try:
        block["iteration_count"] = iteration_count(spectral, eps)
        block["t_upper_bound"] = t_upper_bound(spectral, eps)
        block["t_lower_bound"] = t_lower_bound(spectral, eps)
    except ValueError as exc:
        block["error"] = str(exc)
    return block


def _theorem1_block(spectral, sys, x_T_norm, eps):
    block = {"x_T_norm": x_T_norm, "eps": eps}
    s = int(np.count_nonzero(sys.A, axis=1).max())
    for regime, kwargs in (("structured", {"m": sys.m}),
                           ("sparse-general", {"s": s})):
        try:
            est = theorem1_estimate(spectral, x_T_norm, eps, regime=regime,
                                    **kwargs)
            block[regime] = {
                "value": est.value,
                "value_theorem_literal": est.value_theorem_literal,
                "worst_case_value": est.worst_case_value,
            }
        except (ValueError, OverflowError) as exc:
            block[regime] = {"error": str(exc)}
    if 0.0 < x_T_norm <= 1.0:
        block["amplification_factor"] = 1.0 / x_T_norm
    block["kappa"] = spectral.kappa if spectral.kappa_defined else None
    return block


def _summarize(cfg, sys, T, results, agg, command):
    spectral = sys.spectral
    eps_ref = cfg.eps if cfg.eps is not None else 0.01
    final_err = float(agg["mean_error_sq"][-1])
    final_prob = float(agg["mean_success_prob"][-1])
    x_T_norm = float(np.sqrt(final_prob))
    summary = {
        "command": command,
        "T": T,
        "trials": cfg.trials,
        "backend": cfg.backend,
        "spectral": {
            "sigma_min": spectral.sigma_min,
            "sigma_max": spectral.sigma_max,
            "rank": spectral.rank,
            "frob_sq": spectral.frob_sq,
            "kappa": spectral.kappa if spectral.kappa_defined else None,
        },
        "results": {
            "final_mean_error_sq": final_err,
            "final_mean_success_prob": final_prob,
        },
        "t_bounds": _t_bounds_block(spectral, eps_ref),
        "theorem_estimates": _theorem1_block(spectral, sys, x_T_norm,
                                             eps_ref),
    }
    if command == "equiv":
        summary["results"]["max_deviation"] = float(
            agg[EQUIV_EXTRA_COLUMN].max())
    ledgers = [r.ledger for r in results if r.ledger is not None]
    if ledgers:
        led = ledgers[0]
        summary["ledger"] = {
            "c0": led.c0,
            "c_prep": led.c_prep,
            "final_cost": led.per_step[-1],
            "closed_form_matches": led.per_step[-1] == ledger_closed_form(
                led.c0, led.c_prep, len(led.per_step) - 1),
            "ancilla_total": led.ancilla_total,
            "depth_total": led.depth_total,
            "amplification_queries": led.amplification_queries,
            "ux_invocations_per_iteration": sorted(set(led.ux_invocations)),
            "uj_invocations_per_iteration": sorted(set(led.uj_invocations)),
        }
    return summary


def _run_resources(out, cfg, sys, T):
    c_prep = _max_prep_cost(sys)
    per_step = [1]
    for _ in range(T):
        per_step.append(2 * per_step[-1] + 2 * c_prep)
    with open(out / "resources.csv", "w") as fh:
        fh.write(",".join(RESOURCES_COLUMNS) + "\n")
        for k in range(T + 1):
            fh.write(f"{k},{per_step[k]},{ledger_closed_form(1, c_prep, k)}\n")

    eps_ref = cfg.eps if cfg.eps is not None else 0.01
    summary = {
        "command": "resources",
        "T": T,
        "c0": 1,
        "c_prep": c_prep,
        "final_cost": per_step[-1],
        "t_bounds": _t_bounds_block(sys.spectral, eps_ref),
        "theorem_estimates": _theorem1_block(
            sys.spectral, sys, min(1.0, float(np.linalg.norm(sys.solution()))),
            eps_ref),
    }
    if cfg.backend != "classical":
        strategy = SelectionStrategy(cfg.strategy,
                                     seed=stream_seed(cfg.seed, 0))
        state, _ = run_quantum_kaczmarz(sys, strategy, cfg.lam, T,
                                        backend=cfg.backend)
        led = state.ledger
        summary["executed_ledger"] = {
            "c0": led.c0,
            "c_prep": led.c_prep,
            "final_cost": led.per_step[-1],
            "ancilla_total": led.ancilla_total,
            "depth_total": led.depth_total,
            "amplification_queries": led.amplification_queries,
            "ux_invocations_per_iteration": sorted(set(led.ux_invocations)),
            "uj_invocations_per_iteration": sorted(set(led.uj_invocations)),
        }
    with open(out / "summary.json", "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return summary
