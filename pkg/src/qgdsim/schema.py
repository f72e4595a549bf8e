"""JSON schemas for experiment configs and run reports."""

from __future__ import annotations

import copy

TASKS = ("descend", "linear", "fit", "svm", "cluster", "nn-train", "nn-exec", "ising", "pca", "selftest")

_NUM = {"type": "number"}
_POS = {"type": "number", "exclusiveMinimum": 0}
_INT1 = {"type": "integer", "minimum": 1}
_VEC = {"type": "array", "items": _NUM, "minItems": 1}
_MAT = {"type": "array", "items": _VEC, "minItems": 1}
_CSV = {
    "type": "object",
    "additionalProperties": False,
    "required": ["path"],
    "properties": {
        "path": {"type": "string", "minLength": 1},
        "delimiter": {"type": "string", "minLength": 1, "maxLength": 1},
        "skip_header": {"type": "boolean"},
        "label_column": {"type": "integer"},
    },
}
_DATA = {"oneOf": [_MAT, _CSV]}
_FAMILY = {"enum": ["sum_powers", "sum_affine_powers", "prod_affine_powers"]}
_ACT = {"enum": ["quadratic", "quartic"]}


def _obj(props: dict, required=(), **extra) -> dict:
    out = {"type": "object", "additionalProperties": False, "properties": props}
    if required:
        out["required"] = list(required)
    out.update(extra)
    return out


PROBLEM_SCHEMAS = {
    "descend": _obj(
        {
            "family": _FAMILY,
            "coeff_rows": _MAT,
            "offsets": _VEC,
            "exponents": {"type": "array", "items": _INT1},
            "P": _POS,
            "random": _obj({"family": _FAMILY, "n": _INT1, "K": _INT1}, ["family", "n", "K"]),
        },
        oneOf=[{"required": ["family", "coeff_rows"]}, {"required": ["random"]}],
    ),
    "linear": _obj(
        {
            "A": _DATA,
            "b": _VEC,
            "tol": _POS,
            "random": _obj({"n": _INT1, "diagonal": {"type": "boolean"}}, ["n"]),
        },
        oneOf=[{"required": ["A", "b"]}, {"required": ["random"]}],
    ),
    "fit": _obj(
        {
            "x": _VEC,
            "y": _VEC,
            "data": _CSV,
            "degree": _INT1,
            "predict_at": _VEC,
            "tol": _POS,
        },
        ["degree"],
        oneOf=[{"required": ["x", "y"]}, {"required": ["data"]}],
    ),
    "svm": _obj(
        {
            "points": _DATA,
            "labels": _VEC,
            "C": _POS,
            "probes": {"type": "integer", "minimum": 0},
            "margin_tol": _POS,
            "toy": {"type": "boolean"},
        },
        oneOf=[{"required": ["points"]}, {"required": ["toy"]}],
    ),
    "cluster": _obj(
        {"points": _DATA, "labels": _VEC, "probes": {"type": "integer", "minimum": 0}, "tol": _POS},
        ["points"],
    ),
    "nn-train": _obj(
        {
            "n": _INT1,
            "m": _INT1,
            "p": {"type": "integer", "minimum": 0},
            "points": _DATA,
            "labels": _VEC,
            "activation": _ACT,
            "theta0": _VEC,
        },
        ["n", "m", "p", "points"],
    ),
    "nn-exec": _obj(
        {
            "n": _INT1,
            "m": _INT1,
            "p": {"type": "integer", "minimum": 0},
            "theta": _VEC,
            "inputs": _MAT,
            "activation": _ACT,
            "random": {"type": "boolean"},
        },
        ["n", "m", "p"],
    ),
    "ising": _obj(
        {
            "J": _VEC,
            "mode": {"enum": ["raw", "shifted"]},
            "margin": _POS,
            "excited": {"type": "boolean"},
        },
        ["J"],
    ),
    "pca": _obj(
        {
            "points": _DATA,
            "mode": {"enum": ["raw", "shifted"]},
            "margin": _POS,
            "rank_one": _obj({"M": _INT1, "n": _INT1}, ["M", "n"]),
        },
        oneOf=[{"required": ["points"]}, {"required": ["rank_one"]}],
    ),
    "selftest": _obj({}),
}

SCHEDULE_SCHEMA = _obj(
    {
        "eta": _POS,
        "T": _INT1,
        "delta": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 0.5},
        "eps_amp": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 0.5},
        "budget": {"enum": ["worst_case", "trajectory"]},
        "x0": {"oneOf": [{"const": "scaled_identity"}, _VEC]},
        "early_stop_tol": _POS,
        "version": {"enum": ["v1", "v2"]},
    }
)


def config_schema(task: str) -> dict:
    """Full config schema for one task; unknown keys are rejected everywhere."""
    if task not in TASKS:
        raise KeyError(task)
    return _obj(
        {
            "task": {"const": task},
            "seed": {"type": "integer", "minimum": 0},
            "schedule": SCHEDULE_SCHEMA,
            "problem": copy.deepcopy(PROBLEM_SCHEMAS[task]),
            "caps": _obj({"terms": _INT1, "sites": _INT1}),
            "output": _obj({"report": {"type": "string"}, "csv": {"type": "string"}}),
            "oracle_tol": _POS,
        }
    )


_TRACE_ROW = _obj(
    {
        "t": {"type": "integer", "minimum": 0},
        "f": _NUM,
        "grad_inf_norm": {"type": "number", "minimum": 0},
        "shadow_dev": {"type": "number", "minimum": 0},
        "ledger_queries": {"type": ["integer", "null"], "minimum": 0},
        "ledger_log10": {"type": ["number", "null"]},
    },
    ["t", "f", "grad_inf_norm", "shadow_dev", "ledger_queries"],
)

_CHECK = _obj(
    {"value": {"type": ["number", "null"]}, "tol": _NUM, "passed": {"type": "boolean"}, "note": {"type": "string"}},
    ["value", "tol", "passed"],
)

REPORT_SCHEMA = {
    "type": "object",
    "required": ["status", "task", "config", "seed", "wall_clock"],
    "properties": {
        "status": {"enum": ["ok", "error"]},
        "task": {"enum": list(TASKS)},
        "config": {"type": "object"},
        "seed": {"type": "integer"},
        "rng": {"const": "numpy.PCG64"},
        "wall_clock": {"type": "number", "minimum": 0},
        "schedule": {
            "type": ["object", "null"],
            "required": ["eta", "T", "P", "K", "delta", "eps_amp", "amplification_constant", "budget"],
        },
        "trace": {"type": "array", "items": _TRACE_ROW},
        "solution": {"type": "object"},
        "ledger": {
            "type": "object",
            "required": ["primitive_queries", "primitive_total", "two_qubit_gates", "classical_preprocessing"],
        },
        "oracle": {
            "type": "object",
            "required": ["checks", "passed"],
            "properties": {"checks": {"type": "object", "additionalProperties": _CHECK}, "passed": {"type": "boolean"}},
        },
        "result": {"type": "object"},
        "error": _obj({"type": {"type": "string"}, "message": {"type": "string"}}, ["type", "message"]),
    },
    "allOf": [
        {
            "if": {"properties": {"status": {"const": "ok"}}},
            "then": {"required": ["schedule", "trace", "solution", "ledger", "oracle", "result"]},
            "else": {"required": ["error"]},
        }
    ],
}

CSV_HEADER = ("t", "f", "grad_inf_norm", "shadow_dev", "ledger_queries")
