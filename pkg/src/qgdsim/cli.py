"""Batch experiment runner.

``qgdsim <task> --config run.json --out report.json --csv trace.csv``

Exit codes: 0 success, 1 error (bad config, failed run), 2 oracle mismatch.
A report is written whenever the config parsed as JSON.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable

import jsonschema
import numpy as np

from . import numerics, oracle
from .apps import (
    Dataset,
    IsingModel,
    LinearSystem,
    NetworkArch,
    QUADRATIC_RELU,
    QUARTIC_RELU,
    assign_cluster,
    encode_network_params,
    energy_readout,
    first_argmax,
    fit_clusters,
    fit_least_squares,
    ising_excited_state,
    ising_ground_state,
    ising_objective,
    nn_forward_quantum,
    pca_objective,
    pca_project,
    power_features,
    predict_fit,
    principal_direction,
    solve_linear,
    svm_classify,
    train_network,
    train_svm,
)
from .apps.spectral import DEFAULT_MARGIN, covariance
from .block_encoding import DEFAULT_DELTA, DEFAULT_EPS_AMP, QueryLedger
from .errors import Indeterminate, NeedExplicitBound, SimulationError
from .instances import random_consistent_lsq, random_spd_system, random_spec, rank_one_dataset, rng_from, toy_svm
from .objective import DescentSchedule, Family, ObjectiveSpec
from .qgd import DescentTrace, default_schedule, extract_state, run_descent
from .schema import CSV_HEADER, REPORT_SCHEMA, TASKS, config_schema

log = logging.getLogger("qgdsim")

TRAJECTORY_TOL = 1e-9


class ConfigError(Exception):
    pass


@dataclass
class Outcome:
    trace: DescentTrace | None
    result: dict
    checks: dict
    solution: dict
    ledger: QueryLedger = field(default_factory=QueryLedger)


# ------------------------------------------------------------------ helpers


def _check(value, tol: float, passed: bool, note: str | None = None) -> dict:
    out = {"value": None if value is None else float(value), "tol": float(tol), "passed": bool(passed)}
    if note:
        out["note"] = note
    return out


def _upper(value: float, tol: float, note: str | None = None) -> dict:
    return _check(value, tol, value <= tol, note)


def _floats(a) -> list:
    return [float(v) for v in np.asarray(a, dtype=float).ravel()]


def _load_data(src, base: Path) -> tuple[np.ndarray, np.ndarray | None]:
    """Inline matrix, or a CSV file with an optional label column."""
    if isinstance(src, list):
        return np.asarray(src, dtype=float), None
    path = Path(src["path"])
    if not path.is_absolute():
        path = base / path
    table = np.loadtxt(path, delimiter=src.get("delimiter", ","), skiprows=1 if src.get("skip_header") else 0, ndmin=2)
    col = src.get("label_column")
    if col is None:
        return table, None
    labels = table[:, col]
    return np.delete(table, col % table.shape[1], axis=1), labels


def _trajectory_check(trace: DescentTrace, tol: float) -> dict:
    ref = oracle.classical_descent(trace.spec, trace.schedule, trace.P)
    dev = max(float(np.max(np.abs(it.encoded - ref[it.t]))) for it in trace.iterates)
    return _upper(dev, tol, "max |encoded - classical| over all iterates")


INT64_MAX = 2**63 - 1


def _count(n: int) -> int | None:
    """Exact count when it fits in 64 bits; compounded ledgers can run to 10^40000."""
    return int(n) if n <= INT64_MAX else None


def _log10(n: int) -> float | None:
    return math.log10(n) if n > 0 else None


def _ledger_block(ledger: QueryLedger) -> dict:
    d = ledger.to_dict()
    total = d["primitive_total"]
    return {
        "primitive_queries": {k: _count(v) for k, v in d["primitive_queries"].items()},
        "primitive_queries_log10": {k: _log10(v) for k, v in d["primitive_queries"].items()},
        "primitive_total": _count(total),
        "primitive_total_log10": _log10(total),
        "two_qubit_gates": _count(d["two_qubit_gates"]),
        "two_qubit_gates_log10": _log10(d["two_qubit_gates"]),
        "classical_preprocessing": _count(d["classical_preprocessing"]),
        "classical_preprocessing_log10": _log10(d["classical_preprocessing"]),
    }


def _schedule_block(trace: DescentTrace, version: str = "v1") -> dict:
    s = trace.schedule
    return {
        "eta": s.eta,
        "T": s.T,
        "P": trace.P,
        "K": trace.spec.K,
        "delta": s.delta,
        "eps_amp": s.eps_amp,
        "amplification_constant": 1,
        "budget": s.budget,
        "x0": "scaled_identity" if s.scaled_identity else _floats(s.x0),
        "version": version,
    }


def _trace_rows(trace: DescentTrace) -> list[dict]:
    rows = []
    for it in trace.iterates:
        total = it.ledger.total()
        rows.append(
            {
                "t": it.t,
                "f": float(trace.spec.total(it.encoded)),
                "grad_inf_norm": float(np.max(np.abs(trace.spec.gradient(it.encoded)))),
                "shadow_dev": it.shadow_dev,
                "ledger_queries": _count(total),
                "ledger_log10": _log10(total),
            }
        )
    return rows


def _schedule_kwargs(cfg: dict) -> dict:
    s = cfg.get("schedule", {})
    return {"delta": s.get("delta", DEFAULT_DELTA), "eps_amp": s.get("eps_amp", DEFAULT_EPS_AMP)}


def _tol(cfg: dict, default: float) -> float:
    return float(cfg.get("oracle_tol", default))


# ------------------------------------------------------------------ runners


def _run_descend(cfg: dict, rng: np.random.Generator, base: Path) -> Outcome:
    prob = cfg["problem"]
    sched_cfg = cfg.get("schedule", {})
    if "random" in prob:
        r = prob["random"]
        spec = random_spec(rng, r["family"], r["n"], r["K"])
    else:
        spec = ObjectiveSpec(Family(prob["family"]), prob["coeff_rows"], prob.get("offsets"), prob.get("exponents"))
        if "P" in prob:
            spec = spec.with_P(prob["P"])
        else:
            try:
                spec = spec.with_P(oracle.grad_bound_P(spec))
            except NeedExplicitBound:
                spec = spec.with_P(oracle.coefficient_bound(spec))
    T = sched_cfg.get("T", 10)
    base_sched = default_schedule(spec, T, **_schedule_kwargs(cfg))
    sched = DescentSchedule(
        eta=sched_cfg.get("eta", base_sched.eta),
        T=T,
        x0=sched_cfg.get("x0", "scaled_identity"),
        budget=sched_cfg.get("budget", "worst_case"),
        early_stop_tol=sched_cfg.get("early_stop_tol"),
        **_schedule_kwargs(cfg),
    )
    version = sched_cfg.get("version", "v1")
    trace = run_descent(spec, sched, version)
    checks = {"trajectory": _trajectory_check(trace, _tol(cfg, TRAJECTORY_TOL))}
    if sched.scaled_identity and sched.budget == "worst_case":
        checks["norm_budget"] = _upper(trace.max_norm(), 0.5 + 1e-9, "max iterate norm")
    result: dict[str, Any] = {"spec": _spec_summary(spec), "version": version}
    solution = {"x": _floats(trace.solution)}
    if np.any(trace.solution):
        state, p0 = extract_state(trace.final.X, spec.n)
        solution.update(state=_floats(np.real(state)), success_prob=p0)
        if sched.scaled_identity:
            bound = (sched.eta * trace.P * sched.T) ** 2
            result["extraction_bound"] = bound
            result["extraction_bound_met"] = bool(p0 >= bound - 1e-12)
    return Outcome(trace, result, checks, solution, trace.ledger)


def _spec_summary(spec) -> dict:
    return {
        "family": spec.family.value,
        "n": spec.n,
        "K": spec.K,
        "coeff_rows": [_floats(r) for r in spec.coeff_rows],
        "offsets": _floats(spec.offsets),
        "exponents": list(spec.exponents),
    }


def _run_linear(cfg: dict, rng: np.random.Generator, base: Path) -> Outcome:
    prob = cfg["problem"]
    if "random" in prob:
        r = prob["random"]
        sys_ = random_spd_system(rng, r["n"], diagonal=r.get("diagonal", False))
    else:
        A, _ = _load_data(prob["A"], base)
        sys_ = LinearSystem(A, prob["b"])
    tol = prob.get("tol", 1e-4)
    rep = solve_linear(sys_, cfg.get("schedule", {}).get("T"), tol)
    checks = {
        "distance_regularized": _upper(rep.distance_regularized, tol, "||x_T - (I + 2A^T A)^-1 2A^T b||"),
        "trajectory": _trajectory_check(rep.trace, _tol(cfg, TRAJECTORY_TOL)),
    }
    result = {
        "A": [_floats(r) for r in sys_.A],
        "b": _floats(sys_.b),
        "regularized_minimizer": _floats(rep.regularized_minimizer),
        "distance_regularized": rep.distance_regularized,
        "distance_inverse": rep.distance_inverse,
        "rate": rep.rate,
    }
    solution = {"x": _floats(rep.solution), "state": _floats(rep.state), "success_prob": rep.success_prob}
    return Outcome(rep.trace, result, checks, solution, rep.trace.ledger)


def _run_fit(cfg: dict, rng: np.random.Generator, base: Path) -> Outcome:
    prob = cfg["problem"]
    if "data" in prob:
        table, _ = _load_data(prob["data"], base)
        xs, ys = table[:, 0], table[:, 1]
    else:
        xs, ys = np.asarray(prob["x"], dtype=float), np.asarray(prob["y"], dtype=float)
    degree = prob["degree"]
    F = power_features(xs, degree)
    fit = fit_least_squares(F, ys, cfg.get("schedule", {}).get("T"), prob.get("tol", 1e-6))
    lam_enc = fit.trace.final.X
    lam = fit.coefficients
    probes = prob.get("predict_at", _floats(rng.uniform(0.05, 1.0, 5)))
    preds, direct = [], []
    for x in probes:
        preds.append(predict_fit(lam_enc, x, lam_enc.dim))
        direct.append(float(sum(lam[i] * x ** (i + 1) for i in range(degree))))
    dev = max(abs(a - b) for a, b in zip(preds, direct))
    checks = {
        "prediction": _upper(dev, 1e-6, "predict_fit vs direct polynomial evaluation"),
        "trajectory": _trajectory_check(fit.trace, _tol(cfg, TRAJECTORY_TOL)),
    }
    try:
        ne = oracle.normal_equations(F, ys)
        ne_res = float(np.linalg.norm(F @ ne - ys))
    except np.linalg.LinAlgError:
        ne, ne_res = None, None
    result = {
        "residual": fit.residual,
        "normal_equation_residual": ne_res,
        "normal_equation_solution": None if ne is None else _floats(ne),
        "predict_at": _floats(probes),
        "predictions": preds,
        "direct": direct,
    }
    return Outcome(fit.trace, result, checks, {"x": _floats(lam)}, fit.trace.ledger)


def _run_svm(cfg: dict, rng: np.random.Generator, base: Path) -> Outcome:
    prob = cfg["problem"]
    if prob.get("toy"):
        data, C = toy_svm()
    else:
        pts, labs = _load_data(prob["points"], base)
        labs = prob.get("labels", labs)
        if labs is None:
            raise ConfigError("svm needs labels (inline or a CSV label column)")
        data, C = Dataset(pts, labs, task="classification"), 0.2
    C = prob.get("C", C)
    model = train_svm(data, C, cfg.get("schedule", {}).get("T"))
    margin_tol = prob.get("margin_tol", 1e-9)
    train_pred = np.sign(np.hstack([data.points, np.ones((data.M, 1))]) @ model.theta)
    accuracy = float(np.mean(train_pred == data.labels))
    agree = skipped = 0
    n_probes = prob.get("probes", 100)
    for x in rng.uniform(-1, 1, (n_probes, data.n)):
        classical = float(model.w @ x + model.b)
        if abs(classical) < margin_tol:
            skipped += 1
            continue
        try:
            agree += svm_classify(model.encoded, x, margin_tol) == (1 if classical > 0 else -1)
        except Indeterminate:
            skipped += 1
    counted = n_probes - skipped
    frac = agree / counted if counted else 1.0
    checks = {
        "probe_agreement": _check(frac, 1.0, frac == 1.0, "fraction of probes matching the classical sign"),
        "trajectory": _trajectory_check(model.traces[-1], _tol(cfg, TRAJECTORY_TOL)),
    }
    result = {
        "w": _floats(model.w),
        "b": model.b,
        "train_accuracy": accuracy,
        "active_set": list(model.active),
        "outer_rounds": model.rounds,
        "probes": n_probes,
        "probes_skipped": skipped,
    }
    return Outcome(model.traces[-1], result, checks, {"x": _floats(model.theta)}, model.traces[-1].ledger)


def _run_cluster(cfg: dict, rng: np.random.Generator, base: Path) -> Outcome:
    prob = cfg["problem"]
    pts, labs = _load_data(prob["points"], base)
    labs = prob.get("labels", labs)
    if labs is None:
        raise ConfigError("clustering needs labels (inline or a CSV label column)")
    data = Dataset(pts, labs)
    fits = fit_clusters(data, cfg.get("schedule", {}).get("T"))
    means = [data.points[data.labels == lab].mean(axis=0) for lab in np.unique(data.labels)]
    err = max(float(np.max(np.abs(f.centroid - m))) for f, m in zip(fits, means))
    n_probes = prob.get("probes", 100)
    lo, hi = data.points.min(axis=0), data.points.max(axis=0)
    agree = 0
    for x in rng.uniform(lo, hi, (n_probes, data.n)):
        q = assign_cluster(x, [f.encoded for f in fits])
        c = first_argmax([f.centroid @ (x / max(np.sum(np.abs(x)), 1e-300)) for f in fits])
        agree += q == c
    frac = agree / n_probes if n_probes else 1.0
    checks = {
        "centroids": _upper(err, prob.get("tol", 1e-6), "max |centroid - arithmetic mean|"),
        "assignment_agreement": _check(frac, 1.0, frac == 1.0),
    }
    for k, f in enumerate(fits):
        checks[f"trajectory_{k}"] = _trajectory_check(f.trace, _tol(cfg, TRAJECTORY_TOL))
    ledger = QueryLedger()
    for f in fits:
        ledger = ledger + f.trace.ledger
    result = {"centroids": [_floats(f.centroid) for f in fits], "means": [_floats(m) for m in means]}
    return Outcome(fits[0].trace, result, checks, {"x": _floats(np.concatenate([f.centroid for f in fits]))}, ledger)


def _activation(name: str | None):
    return QUARTIC_RELU if name == "quartic" else QUADRATIC_RELU


def _run_nn_train(cfg: dict, rng: np.random.Generator, base: Path) -> Outcome:
    prob = cfg["problem"]
    arch = NetworkArch(prob["n"], prob["p"], prob["m"], _activation(prob.get("activation")))
    pts, labs = _load_data(prob["points"], base)
    labs = prob.get("labels", labs)
    if labs is None:
        raise ConfigError("network training needs targets")
    data = Dataset(pts, labs)
    cap = cfg.get("caps", {}).get("terms")
    trace = train_network(arch, data, cfg.get("schedule", {}).get("T", 10), prob.get("theta0"), cap)
    theta = trace.solution
    mse = oracle.nn_mse(arch.unflatten(theta), data.points, data.labels, arch.activation)
    checks = {
        "expansion": _upper(abs(trace.spec.total(theta) - mse), 1e-9, "expanded loss vs forward-pass MSE"),
        "trajectory": _trajectory_check(trace, _tol(cfg, TRAJECTORY_TOL)),
    }
    result = {
        "loss_initial": float(trace.spec.total(trace.iterates[0].encoded)),
        "loss_final": mse,
        "expansion_terms": trace.spec.meta["expansion_terms"],
        "param_count": arch.param_count,
    }
    return Outcome(trace, result, checks, {"x": _floats(theta)}, trace.ledger)


def _run_nn_exec(cfg: dict, rng: np.random.Generator, base: Path) -> Outcome:
    prob = cfg["problem"]
    arch = NetworkArch(prob["n"], prob["p"], prob["m"], _activation(prob.get("activation")))
    theta = np.asarray(prob["theta"]) if "theta" in prob else rng.uniform(-0.2, 0.2, arch.param_count)
    inputs = np.asarray(prob["inputs"]) if "inputs" in prob else rng.uniform(-0.5, 0.5, (5, arch.n))
    enc = encode_network_params(arch, theta)
    quantum = [nn_forward_quantum(arch, enc, x) for x in inputs]
    classical = [oracle.nn_forward(arch.unflatten(theta), x, arch.activation) for x in inputs]
    dev = max(abs(a - b) for a, b in zip(quantum, classical))
    checks = {"forward": _upper(dev, 1e-9, "encoded vs classical forward pass")}
    result = {"theta": _floats(theta), "inputs": [_floats(x) for x in inputs], "quantum": quantum, "classical": classical}
    return Outcome(None, result, checks, {"x": quantum}, enc.ledger)


def _run_ising(cfg: dict, rng: np.random.Generator, base: Path) -> Outcome:
    prob = cfg["problem"]
    cap = cfg.get("caps", {}).get("sites", 2**10)
    model = IsingModel(tuple(prob["J"]), cap=cap)
    w, _ = oracle.dense_eig(oracle.ising_hamiltonian(model.J))
    mode = prob.get("mode", "raw")
    T = cfg.get("schedule", {}).get("T")
    margin = prob.get("margin", DEFAULT_MARGIN)
    checks: dict = {}
    result: dict[str, Any] = {"mode": mode, "spectrum": _floats(w)}
    if mode == "shifted":
        ground = ising_ground_state(model, T, margin)
        trace = ground.trace
        result["ground_energy"] = ground.energy
        checks["ground_energy"] = _upper(abs(ground.energy - w[0]), 1e-3, "Rayleigh quotient vs lowest eigenvalue")
        if prob.get("excited", False):
            exc = ising_excited_state(model, ground, T, margin)
            result["excited_energy"] = exc.energy
            checks["excited_energy"] = _upper(abs(exc.energy - w[1]), 1e-3, "deflated Rayleigh quotient vs second eigenvalue")
        state, p0 = ground.state, ground.success_prob
    else:
        spec = ising_objective(model)
        trace = run_descent(spec, default_schedule(spec, T or 60, **_schedule_kwargs(cfg)))
        state, p0 = extract_state(trace.final.X, model.dim)
        state = np.real(state)
        result["rayleigh"] = energy_readout(state, model)
    checks["trajectory"] = _trajectory_check(trace, _tol(cfg, TRAJECTORY_TOL))
    solution = {"x": _floats(trace.solution), "state": _floats(state), "success_prob": p0}
    return Outcome(trace, result, checks, solution, trace.ledger)


def _run_pca(cfg: dict, rng: np.random.Generator, base: Path) -> Outcome:
    prob = cfg["problem"]
    if "rank_one" in prob:
        data, _ = rank_one_dataset(rng, prob["rank_one"]["M"], prob["rank_one"]["n"])
    else:
        pts, _ = _load_data(prob["points"], base)
        data = Dataset(pts)
    mode = prob.get("mode", "raw")
    T = cfg.get("schedule", {}).get("T")
    Q, _ = covariance(data)
    spec_raw = pca_objective(data)
    worst = 0.0
    for x in rng.uniform(-0.5, 0.5, (20, data.n)):
        quad = float(x @ (np.eye(data.n) - Q) @ x) / (2 * data.M)
        worst = max(worst, abs(oracle.eval_objective(spec_raw, x) - quad))
        grad = (np.eye(data.n) - Q) @ x / data.M
        worst = max(worst, float(np.max(np.abs(oracle.analytic_gradient(spec_raw, x) - grad))))
    checks = {"quadratic_form": _upper(worst, 1e-9, "objective and gradient vs x^T (I - Q) x / (2M)")}
    result: dict[str, Any] = {"mode": mode, "Q": [_floats(r) for r in Q]}
    if mode == "shifted":
        est = principal_direction(data, T, prob.get("margin", 1e-3))
        w, V = oracle.dense_eig(Q)
        cos = abs(float(est.state @ V[:, -1]))
        checks["direction"] = _check(cos, 0.999, cos >= 0.999, "|cos| with the dominant covariance eigenvector")
        trace = est.trace
        result.update(direction=_floats(est.state), cosine=cos, projection=pca_project(trace.final.X, data.points[0]))
        state, p0 = est.state, est.success_prob
    else:
        trace = run_descent(spec_raw, default_schedule(spec_raw, T or 80, **_schedule_kwargs(cfg)))
        state, p0 = extract_state(trace.final.X, data.n)
        state = np.real(state)
    checks["trajectory"] = _trajectory_check(trace, _tol(cfg, TRAJECTORY_TOL))
    solution = {"x": _floats(trace.solution), "state": _floats(state), "success_prob": p0}
    return Outcome(trace, result, checks, solution, trace.ledger)


def _run_selftest(cfg: dict, rng: np.random.Generator, base: Path) -> Outcome:
    checks = {}
    first = None
    for fam in Family:
        spec = random_spec(rng, fam, 4, 3)
        trace = run_descent(spec, default_schedule(spec, 3))
        first = first or trace
        checks[f"trajectory_{fam.value}"] = _trajectory_check(trace, TRAJECTORY_TOL)
        x = rng.uniform(-0.4, 0.4, 4)
        fd = oracle.fd_gradient(spec, x)
        checks[f"gradient_{fam.value}"] = _upper(float(np.max(np.abs(oracle.analytic_gradient(spec, x) - fd))), 1e-6)
    A = rng.uniform(-1, 1, (4, 4))
    U = numerics.dilate(A, numerics.operator_norm(A))
    checks["dilation"] = _upper(numerics.unitarity_defect(U), 1e-10)
    F, y, _ = random_consistent_lsq(rng, 5, 2)
    fit = fit_least_squares(F, y)
    checks["least_squares"] = _upper(fit.residual, 1e-6)
    return Outcome(first, {"checks_run": len(checks)}, checks, {"x": _floats(first.solution)}, first.ledger)


RUNNERS: dict[str, Callable[[dict, np.random.Generator, Path], Outcome]] = {
    "descend": _run_descend,
    "linear": _run_linear,
    "fit": _run_fit,
    "svm": _run_svm,
    "cluster": _run_cluster,
    "nn-train": _run_nn_train,
    "nn-exec": _run_nn_exec,
    "ising": _run_ising,
    "pca": _run_pca,
    "selftest": _run_selftest,
}


# ------------------------------------------------------------------ reporting


def _json_default(obj):
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _clean(obj):
    """Replace non-finite floats by None so the report stays strict JSON."""
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else None
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    return obj


def dumps_report(report: dict) -> str:
    return json.dumps(_clean(report), sort_keys=True, indent=2, default=_json_default) + "\n"


def emit_csv(report: dict, path) -> None:
    """One row per iterate with the fixed header ``t,f,grad_inf_norm,shadow_dev,ledger_queries``.

    ``ledger_queries`` is left empty once the count overflows 64 bits.
    """
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_HEADER)
        for row in report.get("trace", []):
            writer.writerow(["" if row[k] is None else row[k] for k in CSV_HEADER])


def execute(task: str, cfg: dict, seed: int, base: Path = Path(".")) -> dict:
    """Run one validated config and return the report (status ok)."""
    rng = rng_from(seed)
    start = time.perf_counter()
    out = RUNNERS[task](cfg, rng, base)
    report = {
        "status": "ok",
        "task": task,
        "config": cfg,
        "seed": seed,
        "rng": "numpy.PCG64",
        "schedule": _schedule_block(out.trace) if out.trace is not None else None,
        "trace": _trace_rows(out.trace) if out.trace is not None else [],
        "solution": out.solution,
        "ledger": _ledger_block(out.ledger),
        "oracle": {"checks": out.checks, "passed": all(c["passed"] for c in out.checks.values())},
        "result": out.result,
    }
    report["wall_clock"] = time.perf_counter() - start
    return json.loads(dumps_report(report))


def _error_report(task: str, cfg: dict, seed: int, exc: BaseException) -> dict:
    return {
        "status": "error",
        "task": task,
        "config": cfg,
        "seed": seed,
        "rng": "numpy.PCG64",
        "wall_clock": 0.0,
        "error": {"type": type(exc).__name__, "message": str(exc)},
    }


def validate_config(task: str, cfg: dict) -> list[str]:
    validator = jsonschema.Draft202012Validator(config_schema(task))
    problems = []
    for err in sorted(validator.iter_errors(cfg), key=lambda e: list(map(str, e.absolute_path))):
        where = "/".join(str(p) for p in err.absolute_path) or "<root>"
        problems.append(f"{where}: {err.message}")
    return problems


def _write(text: str, path: str | None) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file")
    common.add_argument("--out", help="report path (default: stdout)")
    common.add_argument("--csv", help="per-iteration CSV path")
    common.add_argument("--seed", type=int, help="PRNG seed (overrides the config)")
    common.add_argument("--verbose", action="store_true", help="log progress to stderr")
    parser = argparse.ArgumentParser(prog="qgdsim", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="task", required=True, metavar="TASK")
    for task in TASKS:
        sub.add_parser(task, parents=[common], help=f"run the {task} experiment")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    cfg: dict = {}
    base = Path(".")
    if args.config:
        path = Path(args.config)
        base = path.parent
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as exc:
            print(f"config: cannot read {path}: {exc}", file=sys.stderr)
            return 1
        try:
            cfg = json.loads(text)
        except json.JSONDecodeError as exc:
            print(f"config: line {exc.lineno} column {exc.colno}: {exc.msg}", file=sys.stderr)
            return 1
    if args.task == "selftest" and "problem" not in cfg:
        cfg = {**cfg, "problem": {}}
    seed = args.seed if args.seed is not None else int(cfg.get("seed", 0)) if isinstance(cfg, dict) else 0
    out = args.out or (cfg.get("output", {}).get("report") if isinstance(cfg, dict) else None)
    csv_path = args.csv or (cfg.get("output", {}).get("csv") if isinstance(cfg, dict) else None)
    problems = validate_config(args.task, cfg) if isinstance(cfg, dict) else ["<root>: config must be an object"]
    if problems:
        for p in problems:
            print(f"config: {p}", file=sys.stderr)
        err = _error_report(args.task, cfg if isinstance(cfg, dict) else {}, seed, ConfigError("; ".join(problems)))
        _write(dumps_report(err), out)
        return 1
    log.info("running %s with seed %d", args.task, seed)
    try:
        report = execute(args.task, cfg, seed, base)
    except (SimulationError, ConfigError, OSError, ValueError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        _write(dumps_report(_error_report(args.task, cfg, seed, exc)), out)
        return 1
    jsonschema.validate(report, REPORT_SCHEMA)
    _write(dumps_report(report), out)
    if csv_path:
        emit_csv(report, csv_path)
    for name, check in report["oracle"]["checks"].items():
        log.info("check %s: value=%s tol=%s passed=%s", name, check["value"], check["tol"], check["passed"])
    if not report["oracle"]["passed"]:
        print("oracle mismatch: " + ", ".join(k for k, c in report["oracle"]["checks"].items() if not c["passed"]), file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
