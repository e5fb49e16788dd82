"""Published JSON schemas for the experiment config and task summaries."""

from __future__ import annotations

_MEASURE = {
    "type": "object",
    "additionalProperties": False,
    "required": ["points", "weights"],
    "properties": {
        "points": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "additionalProperties": False,
                "required": ["id"],
                "properties": {
                    "id": {"type": "integer"},
                    "coords": {"type": "array", "items": {"type": "number"}},
                },
            },
        },
        "weights": {"type": "array", "minItems": 1, "items": {"type": "number"}},
    },
}

_MEASURE_OR_PATH = {
    "oneOf": [
        _MEASURE,
        {
            "type": "object",
            "additionalProperties": False,
            "required": ["path"],
            "properties": {"path": {"type": "string"}},
        },
    ]
}

_COST = {
    "oneOf": [
        {
            "type": "object",
            "additionalProperties": False,
            "required": ["kind", "p"],
            "properties": {
                "kind": {"const": "power_distance"},
                "p": {"type": "number", "minimum": 0.5},
            },
        },
        {
            "type": "object",
            "additionalProperties": False,
            "required": ["kind", "p", "threshold"],
            "properties": {
                "kind": {"const": "thresholded_power"},
                "p": {"type": "number", "minimum": 0.5},
                "threshold": {"type": "number", "exclusiveMinimum": 0},
            },
        },
        {
            "type": "object",
            "additionalProperties": False,
            "required": ["kind"],
            "properties": {"kind": {"const": "radial_distance"}},
        },
        {
            "type": "object",
            "additionalProperties": False,
            "required": ["kind", "matrix"],
            "properties": {
                "kind": {"const": "explicit"},
                "matrix": {
                    "type": "array",
                    "minItems": 1,
                    "items": {"type": "array", "minItems": 1, "items": {"type": "number"}},
                },
            },
        },
        {
            "type": "object",
            "additionalProperties": False,
            "required": ["path"],
            "properties": {"path": {"type": "string"}},
        },
    ]
}

_DENSITY = {
    "type": "object",
    "additionalProperties": False,
    "required": ["interval", "kind"],
    "properties": {
        "interval": {
            "type": "array",
            "minItems": 2,
            "maxItems": 2,
            "items": {"type": "number"},
        },
        "kind": {"enum": ["uniform", "piecewise_constant"]},
        "breakpoints": {"type": "array", "items": {"type": "number"}},
        "values": {"type": "array", "items": {"type": "number", "minimum": 0}},
        "quadrature": {"type": "integer", "minimum": 2},
    },
}

_INSTANCE = {
    "oneOf": [
        {
            "type": "object",
            "additionalProperties": False,
            "required": ["fixture"],
            "properties": {"fixture": {"type": "string"}},
        },
        {
            "type": "object",
            "additionalProperties": False,
            "required": ["mu"],
            "properties": {
                "mu": _MEASURE_OR_PATH,
                "nu": _MEASURE_OR_PATH,
                "cost": _COST,
                "nu_density": _DENSITY,
            },
        },
    ]
}

CONFIG_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "additionalProperties": False,
    "required": ["task", "instance", "parameters"],
    "properties": {
        "task": {
            "enum": [
                "solve", "face", "degeneracy", "limit-sample",
                "clt", "bootstrap", "pivotal", "semidiscrete",
            ]
        },
        "instance": _INSTANCE,
        "parameters": {
            "type": "object",
            "additionalProperties": False,
            "required": ["seed"],
            "properties": {
                "seed": {"type": "integer"},
                "mode": {"enum": ["one_sample_mu", "one_sample_nu", "two_sample"]},
                "n": {"type": "integer", "minimum": 1},
                "m": {"type": "integer", "minimum": 1},
                "reps": {"type": "integer", "minimum": 1},
                "draws": {"type": "integer", "minimum": 1},
                "delta": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
                "k": {"type": "integer", "minimum": 1},
                "B": {"type": "integer", "minimum": 100},
                "alpha": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
                "jobs": {"type": "integer", "minimum": 1},
            },
        },
        "thresholds": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "ks": {"type": "number", "exclusiveMinimum": 0},
                "max_abs": {"type": "number", "exclusiveMinimum": 0},
            },
        },
        "output": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"dir": {"type": "string"}},
        },
    },
}

_QUANTILES = {
    "type": "object",
    "additionalProperties": False,
    "required": ["q05", "q25", "q50", "q75", "q95"],
    "properties": {k: {"type": "number"} for k in ("q05", "q25", "q50", "q75", "q95")},
}

SOLVE_SUMMARY_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["value", "plan", "dual_f", "dual_g"],
    "properties": {
        "value": {"type": "number"},
        "plan": {"type": "array", "items": {"type": "array", "items": {"type": "number"}}},
        "dual_f": {"type": "array", "items": {"type": "number"}},
        "dual_g": {"type": "array", "items": {"type": "number"}},
    },
}

FACE_SUMMARY_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["ot_value", "tight_set", "n_probe_vertices", "unique"],
    "properties": {
        "ot_value": {"type": "number"},
        "tight_set": {
            "type": "array",
            "items": {
                "type": "array",
                "minItems": 2,
                "maxItems": 2,
                "items": {"type": "integer"},
            },
        },
        "n_probe_vertices": {"type": "integer", "minimum": 0},
        "unique": {"type": "boolean"},
    },
}

_PROJECTION = {
    "type": "object",
    "additionalProperties": False,
    "required": ["projected_value", "ot_value", "is_projected", "gamma_set"],
    "properties": {
        "projected_value": {"type": "number"},
        "ot_value": {"type": "number"},
        "is_projected": {"type": "boolean"},
        "gamma_set": {"type": "array", "items": {"type": "integer"}},
    },
}

DEGENERACY_SUMMARY_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": [
        "ot_value", "projection_f", "projection_g", "exists_trivial_f",
        "exists_trivial_g", "all_trivial_f", "all_trivial_g", "bitrivial", "unique",
    ],
    "properties": {
        "ot_value": {"type": "number"},
        "projection_f": _PROJECTION,
        "projection_g": _PROJECTION,
        "exists_trivial_f": {"type": "boolean"},
        "exists_trivial_g": {"type": "boolean"},
        "all_trivial_f": {"type": "boolean"},
        "all_trivial_g": {"type": "boolean"},
        "bitrivial": {"type": "boolean"},
        "unique": {"type": "boolean"},
    },
}

LIMIT_SAMPLE_SUMMARY_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["mode", "M", "seed", "mean", "sd", "q05", "q25", "q50", "q75", "q95"],
    "properties": {
        "mode": {"type": "string"},
        "M": {"type": "integer"},
        "seed": {"type": "integer"},
        "delta": {"type": ["number", "null"]},
        "mean": {"type": "number"},
        "sd": {"type": "number"},
        **{k: {"type": "number"} for k in ("q05", "q25", "q50", "q75", "q95")},
    },
}

EXPERIMENT_SUMMARY_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["mode", "reps", "seed", "wall_time", "failures", "quantiles"],
    "properties": {
        "mode": {"type": "string"},
        "n": {"type": ["integer", "null"]},
        "m": {"type": ["integer", "null"]},
        "reps": {"type": "integer"},
        "seed": {"type": "integer"},
        "wall_time": {"type": "number"},
        "failures": {"type": "integer"},
        "quantiles": _QUANTILES,
        "ks_distance": {"type": "number"},
        "coverage": {"type": "number"},
        "thresholds": {"type": "object"},
    },
}

BOOTSTRAP_SUMMARY_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["estimate", "ci_low", "ci_high", "k", "n", "alpha", "quantiles", "seed"],
    "properties": {
        "estimate": {"type": "number"},
        "ci_low": {"type": "number"},
        "ci_high": {"type": "number"},
        "k": {"type": "integer"},
        "n": {"type": "integer"},
        "alpha": {"type": "number"},
        "quantiles": _QUANTILES,
        "seed": {"type": "integer"},
        "population_value": {"type": "number"},
        "ci_covers_population": {"type": "boolean"},
    },
}

SEMIDISCRETE_SUMMARY_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["value", "potential", "cell_masses", "residual", "iterations"],
    "properties": {
        "value": {"type": "number"},
        "potential": {"type": "array", "items": {"type": "number"}},
        "cell_masses": {"type": "array", "items": {"type": "number"}},
        "residual": {"type": "number"},
        "iterations": {"type": "integer"},
    },
}

TASK_SUMMARY_SCHEMAS = {
    "solve": SOLVE_SUMMARY_SCHEMA,
    "face": FACE_SUMMARY_SCHEMA,
    "degeneracy": DEGENERACY_SUMMARY_SCHEMA,
    "limit-sample": LIMIT_SAMPLE_SUMMARY_SCHEMA,
    "clt": EXPERIMENT_SUMMARY_SCHEMA,
    "bootstrap": BOOTSTRAP_SUMMARY_SCHEMA,
    "pivotal": EXPERIMENT_SUMMARY_SCHEMA,
    "semidiscrete": {
        "oneOf": [SEMIDISCRETE_SUMMARY_SCHEMA, EXPERIMENT_SUMMARY_SCHEMA]
    },
}
