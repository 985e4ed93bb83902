"""Experiment configuration: one JSON file describes distribution, weights,
expansion order, evaluation grid and oracle budget.

The schema is validated with jsonschema so violations report the offending
key's path.  Builders turn the validated document into package objects; the
command runners produce the CSV/JSON artifacts consumed by the CLI, written
atomically and formatted deterministically (shortest round-trip float repr),
so identical (config, seed) pairs give byte-identical outputs.
"""

from __future__ import annotations

import json
import os
import tempfile

import numpy as np
from jsonschema import Draft202012Validator

from . import expansion as xp
from . import oracle as orc
from .distributions import (TailDistribution, custom_hazard, log_power_mixture,
                            log_weibull, lognormal_type, weibull_type)
from .errors import ConfigError
from .hazard import validate_metadata
from .weights import GeometricTail, WeightSequence

__all__ = ["CONFIG_SCHEMA", "load_config", "build_distribution", "build_weights",
           "build_grid", "run_command", "COMMANDS"]

COMMANDS = ("classify", "expand", "evaluate", "oracle", "compare", "report")

CONFIG_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["distribution", "weights"],
    "properties": {
        "distribution": {
            "type": "object",
            "required": ["family", "params"],
            "properties": {
                "family": {"enum": ["weibull", "logweibull", "lognormal2",
                                    "custom", "log_power_mixture"]},
                "params": {"type": "object"},
                "two_sided": {"type": "boolean", "default": False},
                "symmetric": {"type": "boolean", "default": False},
                "t0": {"type": "number", "exclusiveMinimum": 1.0},
            },
        },
        "weights": {
            "type": "object",
            "required": ["weights", "delta"],
            "properties": {
                "weights": {"type": "array", "items": {"type": "number"}, "minItems": 1},
                "generator": {
                    "type": ["object", "null"],
                    "required": ["type", "ratio", "from_index"],
                    "properties": {
                        "type": {"const": "geometric"},
                        "ratio": {"type": "number"},
                        "from_index": {"type": "integer", "minimum": 2},
                    },
                },
                "delta": {"type": "number", "exclusiveMinimum": 0.0,
                          "exclusiveMaximum": 1.0},
            },
        },
        "expansion": {
            "type": "object",
            "properties": {
                "order": {"type": "integer", "minimum": 0},
                "regime_override": {
                    "type": ["string", "null"],
                    "enum": ["subcritical", "critical", "supercritical", None],
                },
            },
        },
        "grid": {
            "type": "object",
            "required": ["t_min", "t_max", "points"],
            "properties": {
                "t_min": {"type": "number", "exclusiveMinimum": 0.0},
                "t_max": {"type": "number", "exclusiveMinimum": 0.0},
                "points": {"type": "integer", "minimum": 1},
                "spacing": {"enum": ["geometric", "linear"], "default": "geometric"},
            },
        },
        "oracle": {
            "type": "object",
            "properties": {
                "method": {"enum": ["conditional_mc", "plain_mc", "quadrature"]},
                "n": {"type": "integer", "minimum": 1},
                "seed": {"type": "integer", "minimum": 0},
                "eps_trunc": {"type": "number", "exclusiveMinimum": 0.0},
                "slack": {"type": "number", "exclusiveMinimum": 0.0},
            },
        },
    },
}


def validate_config(doc: dict) -> None:
    validator = Draft202012Validator(CONFIG_SCHEMA)
    errors = sorted(validator.iter_errors(doc), key=lambda e: list(e.absolute_path))
    if errors:
        err = errors[0]
        path = "/".join(str(p) for p in err.absolute_path) or "<root>"
        raise ConfigError(err.message, path=path)


def load_config(path: str) -> dict:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: {exc}", path=path) from exc
    validate_config(doc)
    return doc


# ---------------------------------------------------------------------------
# builders
# ---------------------------------------------------------------------------


def build_distribution(doc: dict) -> TailDistribution:
    section = doc["distribution"]
    family = section["family"]
    params = section["params"]
    symmetric = section.get("symmetric", False)
    two_sided = section.get("two_sided", symmetric)
    if two_sided and not symmetric:
        raise ConfigError("two_sided currently requires symmetric=true",
                          path="distribution/two_sided")
    kwargs = {}
    if "t0" in section:
        kwargs["t0"] = section["t0"]
    try:
        if family == "weibull":
            return weibull_type(params["a"], symmetric=symmetric, **kwargs)
        if family == "logweibull":
            return log_weibull(params["a"], symmetric=symmetric, **kwargs)
        if family == "lognormal2":
            return lognormal_type(params["theta"], symmetric=symmetric, **kwargs)
        if family == "custom":
            if symmetric:
                raise ConfigError("custom hazards are one-sided",
                                  path="distribution/symmetric")
            return custom_hazard(
                terms=[tuple(t) for t in params["terms"]],
                t0=section.get("t0", 2.0),
                sbar_t0=params.get("sbar_t0", 0.5),
                rv_index=params["rv_index"],
                log_exponent=params.get("log_exponent", 0.0),
                lambda_coeff=params.get("lambda_coeff"),
                smooth_order=params.get("smooth_order", 8),
            )
        if family == "log_power_mixture":
            if symmetric:
                raise ConfigError("mixture tails are one-sided",
                                  path="distribution/symmetric")
            comps = [(c["coeff"], c["scale"], [tuple(t) for t in c["log_powers"]])
                     for c in params["components"]]
            return log_power_mixture(comps, t0=section.get("t0", 2.0))
    except KeyError as exc:
        raise ConfigError(f"missing parameter {exc}", path="distribution/params") from exc
    except ValueError as exc:
        raise ConfigError(str(exc), path="distribution") from exc
    raise ConfigError(f"unknown family {family!r}", path="distribution/family")


def build_weights(doc: dict, dist: TailDistribution) -> WeightSequence:
    section = doc["weights"]
    weights = section["weights"]
    gen_spec = section.get("generator")
    sign_mode = "balanced" if dist.lower is not None else "one_sided"
    generator = None
    if gen_spec:
        if gen_spec["from_index"] != len(weights) + 1:
            raise ConfigError("generator must start right after the explicit weights",
                              path="weights/generator/from_index")
        last = weights[-1]
        generator = GeometricTail(ratio=gen_spec["ratio"],
                                  start_index=gen_spec["from_index"],
                                  first_value=last * gen_spec["ratio"])
    try:
        return WeightSequence(weights, delta=section["delta"], sign_mode=sign_mode,
                              generator=generator)
    except ValueError as exc:
        raise ConfigError(str(exc), path="weights") from exc


def build_grid(doc: dict) -> np.ndarray:
    section = doc.get("grid")
    if section is None:
        raise ConfigError("this command needs a grid section", path="grid")
    lo, hi, n = section["t_min"], section["t_max"], section["points"]
    if hi < lo:
        raise ConfigError("t_max must be at least t_min", path="grid/t_max")
    if section.get("spacing", "geometric") == "geometric":
        return np.geomspace(lo, hi, n)
    return np.linspace(lo, hi, n)


def build_budget(doc: dict, seed_override: int | None = None,
                 threads: int = 1) -> orc.OracleBudget:
    section = doc.get("oracle", {})
    seed = section.get("seed", 0) if seed_override is None else seed_override
    return orc.OracleBudget(
        method=section.get("method", "conditional_mc"),
        n=section.get("n", 10**6),
        seed=seed,
        eps_trunc=section.get("eps_trunc", 1e-9),
        slack=section.get("slack", 10.0),
        threads=threads,
    )


def build_expansion(doc: dict, dist, seq, order_override: int | None = None):
    section = doc.get("expansion", {})
    order = order_override if order_override is not None else section.get("order", 1)
    override = section.get("regime_override")
    regime = None
    if override:
        kind = xp.RegimeKind(override)
        lam = dist.upper.lambda_coeff if kind is xp.RegimeKind.CRITICAL else None
        regime = xp.Regime(kind=kind, lam=lam, provenance="declared")
    return xp.expand(dist, seq, order, regime=regime)


# ---------------------------------------------------------------------------
# artifact writers
# ---------------------------------------------------------------------------


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def write_atomic(path: str, data: str) -> None:
    d = os.path.dirname(os.path.abspath(path))
    os.makedirs(d, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=d, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_json(path: str, obj) -> None:
    write_atomic(path, json.dumps(obj, indent=2, sort_keys=True) + "\n")


def write_csv(path: str, header: list[str], columns: list) -> None:
    rows = [",".join(header)]
    n = len(columns[0])
    for r in range(n):
        rows.append(",".join(_fmt(col[r]) for col in columns))
    write_atomic(path, "\n".join(rows) + "\n")


def expansion_to_json(exp: xp.TailExpansion) -> dict:
    return {
        "regime": exp.regime.kind.value,
        "lambda": exp.regime.lam,
        "provenance": exp.regime.provenance,
        "order_request": exp.order_request,
        "terms": [
            {
                "c": t.scale,
                "j": t.deriv_index,
                "coeff": t.coeff,
                "source_level": t.source_level,
                "operator_order": t.operator_order,
                "decay_power": t.decay_power,
                "decay_log": t.decay_log,
            }
            for t in exp.terms
        ],
        "remainder": {
            "hazard_power": exp.remainder.hazard_power,
            "scale": exp.remainder.scale,
            "describes": exp.remainder.describe(),
        },
        "characters": [
            {"scale": c, "order": m, "coeffs": list(coeffs)}
            for c, m, coeffs in exp.characters
        ],
        "flags": list(exp.flags),
    }


def _evaluation_columns(table, labels):
    header = ["t", "expansion_total"]
    cols = [table.t, table.totals]
    for k, lab in enumerate(labels):
        header.append(f"term_{k}_{lab}")
        cols.append(table.term_values[:, k])
    header += ["remainder_benchmark", "cancellation_flag"]
    cols += [table.benchmark, table.cancellation]
    return header, cols


def evaluation_to_json(table) -> dict:
    return {
        "t": [float(v) for v in table.t],
        "totals": [float(v) for v in table.totals],
        "term_labels": list(table.term_labels),
        "term_values": [[float(v) for v in row] for row in table.term_values],
        "benchmark": [float(v) for v in table.benchmark],
        "cancellation": [bool(v) for v in table.cancellation],
        "domain_ok": [bool(v) for v in table.domain_ok],
        "notes": list(table.notes),
    }


# ---------------------------------------------------------------------------
# command runners
# ---------------------------------------------------------------------------


def run_command(command: str, config_path: str, out_dir: str,
                seed_override: int | None = None,
                order_override: int | None = None,
                threads: int = 1) -> dict:
    """Execute one CLI command; returns a summary dict (also written to disk)."""
    if command not in COMMANDS:
        raise ConfigError(f"unknown command {command!r}", path="<command>")
    os.makedirs(out_dir, exist_ok=True)

    if command == "report":
        return _run_report(config_path, out_dir, threads)

    doc = load_config(config_path)
    dist = build_distribution(doc)
    seq = build_weights(doc, dist)

    if command == "classify":
        model = dist.upper
        regime = xp.classify(model)
        diag = validate_metadata(model, xp.default_diagnostic_grid(model))
        out = {
            "regime": regime.kind.value,
            "lambda": regime.lam,
            "provenance": regime.provenance,
            "declared": {
                "rv_index": model.rv_index,
                "log_exponent": model.log_exponent,
                "lambda_coeff": model.lambda_coeff,
                "smooth_order": model.smooth_order,
            },
            "diagnostics": {
                "rv_index_est": diag.rv_index_est,
                "log_exponent_est": diag.log_exponent_est,
                "lambda_est": diag.lambda_est,
                "subcritical_bounded": diag.subcritical_bounded,
                "flags": diag.flags,
                "inconclusive": diag.inconclusive,
            },
        }
        write_json(os.path.join(out_dir, "classify.json"), out)
        return out

    exp = build_expansion(doc, dist, seq, order_override)

    if command == "expand":
        out = expansion_to_json(exp)
        write_json(os.path.join(out_dir, "expansion.json"), out)
        return out

    grid = build_grid(doc)

    if command == "evaluate":
        table = xp.evaluate(exp, dist, grid)
        header, cols = _evaluation_columns(table, table.term_labels)
        write_csv(os.path.join(out_dir, "evaluation.csv"), header, cols)
        report = {
            "config": doc,
            "seed": doc.get("oracle", {}).get("seed", 0),
            "order_override": order_override,
            "expansion": expansion_to_json(exp),
            "evaluation": evaluation_to_json(table),
        }
        write_json(os.path.join(out_dir, "report.json"), report)
        return report

    budget = build_budget(doc, seed_override, threads)

    if command == "oracle":
        estimates = [orc._estimate(dist, seq, float(t), budget) for t in grid]
        header = ["t", "oracle_p", "oracle_stderr", "n_samples", "truncation_N",
                  "truncation_bias_bound", "seed", "method"]
        cols = [
            [e.t for e in estimates],
            [e.p_hat for e in estimates],
            [e.std_err for e in estimates],
            [e.n_samples for e in estimates],
            [e.truncation_n for e in estimates],
            [e.truncation_bias_bound for e in estimates],
            [e.seed for e in estimates],
        ]
        rows = [",".join(header)]
        for r in range(len(estimates)):
            vals = [_fmt(c[r]) for c in cols] + [estimates[r].method]
            rows.append(",".join(vals))
        write_atomic(os.path.join(out_dir, "oracle.csv"), "\n".join(rows) + "\n")
        out = {"estimates": [e.__dict__ for e in estimates]}
        write_json(os.path.join(out_dir, "oracle.json"), out)
        return out

    # compare
    table = orc.compare_with_oracle(exp, dist, seq, grid, budget)
    header = ["t", "expansion_total"]
    cols = [table.t, table.expansion_total]
    for k, lab in enumerate(table.term_labels):
        header.append(f"term_{k}_{lab}")
        cols.append(table.term_values[:, k])
    header += ["remainder_benchmark", "oracle_p", "oracle_stderr", "deviation",
               "deviation_over_benchmark", "cancellation_flag", "passed"]
    cols += [table.benchmark, table.oracle_p, table.oracle_stderr, table.deviation,
             table.deviation_over_benchmark, table.cancellation, table.passed]
    write_csv(os.path.join(out_dir, "compare.csv"), header, cols)
    out = {
        "config": doc,
        "budget": {k: getattr(table.estimates[0], k) for k in
                   ("n_samples", "seed", "method")} if table.estimates else {},
        "rows": [
            {
                "t": float(table.t[i]),
                "expansion_total": float(table.expansion_total[i]),
                "oracle_p": float(table.oracle_p[i]),
                "oracle_stderr": float(table.oracle_stderr[i]),
                "deviation": float(table.deviation[i]),
                "deviation_over_benchmark": float(table.deviation_over_benchmark[i]),
                "passed": bool(table.passed[i]),
            }
            for i in range(len(table.t))
        ],
    }
    write_json(os.path.join(out_dir, "compare.json"), out)
    return out


def _run_report(report_path: str, out_dir: str, threads: int) -> dict:
    """Re-ingest an evaluation report and verify its tables reproduce exactly."""
    try:
        with open(report_path) as fh:
            report = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid report JSON: {exc}", path=report_path) from exc
    if "config" not in report or "evaluation" not in report:
        raise ConfigError("report file must embed 'config' and 'evaluation'",
                          path=report_path)
    doc = report["config"]
    validate_config(doc)
    dist = build_distribution(doc)
    seq = build_weights(doc, dist)
    exp = build_expansion(doc, dist, seq, report.get("order_override"))
    table = xp.evaluate(exp, dist, build_grid(doc))
    regenerated = evaluation_to_json(table)
    stored = report["evaluation"]

    def same(a, b):
        if isinstance(a, list) and isinstance(b, list):
            return len(a) == len(b) and all(same(x, y) for x, y in zip(a, b))
        if isinstance(a, float) and isinstance(b, float):
            return a == b or (a != a and b != b)  # NaN marks domain gaps
        return a == b

    mismatches = []
    for key in ("t", "totals", "term_values", "benchmark", "cancellation"):
        if not same(regenerated[key], stored[key]):
            mismatches.append(key)
    out = {
        "roundtrip_ok": not mismatches,
        "mismatched_fields": mismatches,
        "source": os.path.abspath(report_path),
    }
    write_json(os.path.join(out_dir, "report_verified.json"), out)
    if mismatches:
        raise ConfigError(f"report tables failed to reproduce: {mismatches}",
                          path=report_path)
    return out
