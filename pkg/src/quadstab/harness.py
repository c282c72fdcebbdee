"""Experiment harness: JSON scenario configs, preset registry, CSV results, CLI.

Scenario kinds:
  stability       direct-method run with bound audit per probe
  oracle          compare two equations' solution spaces over (Z/q)^d
  dimension       nullspace dimension check for one equation
  inner_product   squared-norm identity probe (pass, or recorded witness)
  covariance      unitary covariance of the stabilized limit
  deadzone        sweep the constant-budget denominator across zero
  bound_equality  closed-form/series agreement between the K=1 and p=1 routes

Runs are deterministic given (config, seed); result CSVs are byte-identical
across repeat runs.  Exit codes: 0 all rows pass, 2 validation error,
3 bound violation or unexpected failure, 4 expected rejections only.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import tempfile
import warnings
from dataclasses import dataclass

import numpy as np
import jsonschema

from . import algebra, finite
from .equations import EquationSpec, parse_equation
from .mappings import Mapping, mapping_from_config
from .stability import (
    ControlFunction,
    DivergenceError,
    OpenProblemError,
    StabilityConfig,
    closed_form_bounds,
    codomain_norm,
    constant,
    fit_constant_level,
    fit_power_amplitude,
    power,
    series_bound_forward,
    series_bound_forward_p,
    series_bound_backward,
    series_bound_backward_p,
    stabilize,
    verify_unitary_covariance,
)

RESULT_HEADERS = ["scenario", "probe", "norm_x", "q_estimate", "deviation",
                  "bound", "margin", "iterations", "status"]
PLOTDATA_HEADER = "norm_x,deviation,bound"

STATUS_PASS = "pass"
STATUS_FAIL = "fail"
STATUS_REJECTED_DIVERGENT = "rejected-divergent"
STATUS_REJECTED_OPEN_PROBLEM = "rejected-open-problem"

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_BOUND_VIOLATION = 3
EXIT_EXPECTED_REJECTION = 4

OUTDIR_ENV = "QUADSTAB_OUTDIR"


class ScenarioValidationError(ValueError):
    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


_NORM_SCHEMA = {
    "type": "object",
    "required": ["kind", "dim"],
    "properties": {
        "kind": {"enum": ["euclidean", "l1", "lp_quasi", "weighted"]},
        "dim": {"type": "integer", "minimum": 1},
        "p": {"type": "number", "exclusiveMinimum": 0, "maximum": 1},
        "weights": {"type": "array", "items": {"type": "number"}, "minItems": 1},
    },
}

_EQUATION_SCHEMA = {
    "type": "object",
    "required": ["id"],
    "properties": {
        "id": {"enum": ["fe1", "fe2", "fe3", "fe3_0"]},
        "n": {"type": "integer", "minimum": 3},
        "a": {"type": "integer"},
    },
}

_GROUP_SCHEMA = {
    "type": "object",
    "required": ["q", "d"],
    "properties": {
        "q": {"type": "integer", "minimum": 5},
        "d": {"type": "integer", "minimum": 1},
    },
}

_PROBES_SCHEMA = {
    "oneOf": [
        {"type": "array", "minItems": 1},
        {
            "type": "object",
            "required": ["count"],
            "properties": {
                "count": {"type": "integer", "minimum": 1},
                "box": {"type": "number", "exclusiveMinimum": 0},
            },
        },
    ]
}

SCENARIO_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "quadstab scenario",
    "type": "object",
    "required": ["name", "kind"],
    "properties": {
        "name": {"type": "string", "minLength": 1},
        "kind": {"enum": ["stability", "oracle", "dimension", "inner_product",
                           "covariance", "deadzone", "bound_equality"]},
        "seed": {"type": "integer", "minimum": 0},
        "expected_status": {"enum": [STATUS_REJECTED_DIVERGENT, STATUS_REJECTED_OPEN_PROBLEM]},
        "output": {
            "type": "object",
            "properties": {"results_csv": {"type": "string", "minLength": 1}},
        },
        "equation": _EQUATION_SCHEMA,
        "equation_a": _EQUATION_SCHEMA,
        "equation_b": _EQUATION_SCHEMA,
        "group": _GROUP_SCHEMA,
        "expected_dim": {"type": "integer", "minimum": 0},
        "norm": _NORM_SCHEMA,
        "domain_norm": _NORM_SCHEMA,
        "mapping": {"type": "object", "required": ["family"]},
        "control": {
            "type": "object",
            "required": ["variant"],
            "properties": {
                "variant": {"enum": ["power", "constant"]},
                "epsilon": {"type": ["number", "null"], "minimum": 0},
                "r": {"type": "number", "exclusiveMinimum": 0},
                "theta": {"type": ["number", "null"], "minimum": 0},
                "fit_trials": {"type": "integer", "minimum": 1},
                "fit_box": {"type": "number", "exclusiveMinimum": 0},
            },
        },
        "stability": {
            "type": "object",
            "properties": {
                "direction": {"enum": ["forward", "backward"]},
                "m_max": {"type": "integer", "minimum": 1},
                "tol": {"type": "number", "exclusiveMinimum": 0},
                "series_tol": {"type": "number", "exclusiveMinimum": 0},
                "bound_mode": {"enum": ["quasi", "p"]},
                "probes": _PROBES_SCHEMA,
            },
        },
        "mode": {"enum": ["b", "c"]},
        "param": {"type": "integer"},
        "trials": {"type": "integer", "minimum": 1},
        "expect": {"enum": ["pass", "witness"]},
        "witness": {"type": "object"},
        "n": {"type": "integer", "minimum": 3},
        "unitaries": {"type": "integer", "minimum": 1},
        "tol": {"type": "number", "exclusiveMinimum": 0},
        "probes": _PROBES_SCHEMA,
        "theta": {"type": "number", "minimum": 0},
        "K_sweep": {"type": "array", "items": {"type": "number", "minimum": 1}, "minItems": 1},
        "grid": {"type": "object"},
    },
    "allOf": [
        {"if": {"properties": {"kind": {"const": "stability"}}, "required": ["kind"]},
         "then": {"required": ["equation", "norm", "mapping", "control", "stability"]}},
        {"if": {"properties": {"kind": {"const": "oracle"}}, "required": ["kind"]},
         "then": {"required": ["equation_a", "equation_b", "group"]}},
        {"if": {"properties": {"kind": {"const": "dimension"}}, "required": ["kind"]},
         "then": {"required": ["equation", "group", "expected_dim"]}},
        {"if": {"properties": {"kind": {"const": "inner_product"}}, "required": ["kind"]},
         "then": {"required": ["norm", "mode", "param"]}},
        {"if": {"properties": {"kind": {"const": "covariance"}}, "required": ["kind"]},
         "then": {"required": ["mapping", "n", "probes"]}},
        {"if": {"properties": {"kind": {"const": "deadzone"}}, "required": ["kind"]},
         "then": {"required": ["n", "theta", "K_sweep"]}},
        {"if": {"properties": {"kind": {"const": "bound_equality"}}, "required": ["kind"]},
         "then": {"required": ["grid"]}},
    ],
}


def config_schema() -> dict:
    """The published JSON schema for scenario configs."""
    return json.loads(json.dumps(SCENARIO_SCHEMA))


def validate_config(config: dict) -> None:
    validator = jsonschema.Draft202012Validator(SCENARIO_SCHEMA)
    errors = sorted(validator.iter_errors(config), key=lambda e: list(e.absolute_path))
    if errors:
        err = errors[0]
        path = ".".join(str(p) for p in err.absolute_path) or "<root>"
        raise ScenarioValidationError(path, err.message)


# ---------------------------------------------------------------------------
# config -> objects


def _norm_from_config(cfg: dict, path: str) -> algebra.QuasiNormSpec:
    try:
        kind = cfg["kind"]
        if kind == "euclidean":
            return algebra.euclidean(cfg["dim"])
        if kind == "l1":
            return algebra.l1(cfg["dim"])
        if kind == "lp_quasi":
            return algebra.lp_quasi(cfg["p"], cfg["dim"])
        return algebra.weighted(cfg["weights"])
    except (KeyError, ValueError) as e:
        raise ScenarioValidationError(path, str(e)) from e


def _equation_from_config(cfg: dict, path: str) -> EquationSpec:
    try:
        return EquationSpec(cfg["id"], n=cfg.get("n"), a=cfg.get("a"))
    except (KeyError, ValueError) as e:
        raise ScenarioValidationError(path, str(e)) from e


def _mapping_from_config(cfg: dict, path: str) -> Mapping:
    try:
        return mapping_from_config(cfg)
    except (KeyError, ValueError, TypeError) as e:
        raise ScenarioValidationError(path, str(e)) from e


def _probes_from_config(cfg, seed: int, domain, path: str) -> tuple:
    if isinstance(cfg, list):
        try:
            return tuple(np.asarray(p, dtype=float) for p in cfg)
        except (TypeError, ValueError) as e:
            raise ScenarioValidationError(path, str(e)) from e
    rng = np.random.default_rng([int(seed), 161803])
    count = int(cfg["count"])
    box = float(cfg.get("box", 10.0))
    return tuple(domain.random(rng, box=box) for _ in range(count))


def _group_from_config(cfg: dict, path: str) -> finite.GroupSpec:
    try:
        return finite.GroupSpec(int(cfg["q"]), int(cfg["d"]))
    except (KeyError, ValueError) as e:
        raise ScenarioValidationError(path, str(e)) from e


def _control_from_config(cfg: dict, f: Mapping, n: int, norm_spec, domain_norm_spec,
                         seed: int, path: str) -> ControlFunction:
    variant = cfg["variant"]
    dnorm = (lambda x: algebra.norm_eval(domain_norm_spec, x)) if domain_norm_spec else None
    cnorm = lambda v: codomain_norm(norm_spec, v)
    trials = int(cfg.get("fit_trials", 400))
    box = float(cfg.get("fit_box", 10.0))
    if variant == "power":
        r = float(cfg.get("r", 1.0))
        eps = cfg.get("epsilon")
        if eps is None:
            eps = fit_power_amplitude(f, n, r, trials=trials, seed=seed, box=box,
                                      domain_norm=dnorm, codomain=cnorm)
        return power(float(eps), r, norm=dnorm)
    theta = cfg.get("theta")
    if theta is None:
        theta = fit_constant_level(f, n, trials=trials, seed=seed, box=box, codomain=cnorm)
    return constant(float(theta))


# ---------------------------------------------------------------------------
# result rows


@dataclass
class ResultRow:
    scenario: str
    probe: str
    norm_x: float | None
    q_estimate: str
    deviation: float | None
    bound: float | None
    margin: float | None
    iterations: int
    status: str

    def csv_fields(self) -> list[str]:
        return [
            self.scenario,
            self.probe,
            _fmt(self.norm_x),
            self.q_estimate,
            _fmt(self.deviation),
            _fmt(self.bound),
            _fmt(self.margin),
            str(self.iterations),
            self.status,
        ]


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _fmt_value(v) -> str:
    arr = np.asarray(v)
    if arr.ndim == 0:
        x = arr.item()
        if isinstance(x, complex):
            return repr(x).strip("()")
        return repr(float(x))
    flat = arr.reshape(-1)
    return "|".join(
        repr(complex(t)).strip("()") if np.iscomplexobj(arr) else repr(float(t))
        for t in flat
    )


@dataclass
class RunResult:
    name: str
    rows: list[ResultRow]
    summary: dict
    exit_code: int
    csv_path: str | None = None


def _exit_code(rows: list[ResultRow], expected_status: str | None) -> int:
    failed = [r for r in rows if r.status == STATUS_FAIL]
    rejected = [r for r in rows if r.status.startswith("rejected-")]
    unexpected = [r for r in rejected if r.status != expected_status]
    if failed or unexpected:
        return EXIT_BOUND_VIOLATION
    if rejected:
        return EXIT_EXPECTED_REJECTION
    return EXIT_OK


# ---------------------------------------------------------------------------
# scenario runners


def _run_stability(config: dict) -> tuple[list[ResultRow], dict]:
    name = config["name"]
    seed = int(config.get("seed", 0))
    eq = _equation_from_config(config["equation"], "equation")
    if eq.id != "fe3":
        raise ScenarioValidationError("equation.id", "stability scenarios run on fe3")
    norm_spec = _norm_from_config(config["norm"], "norm")
    domain_norm_spec = (_norm_from_config(config["domain_norm"], "domain_norm")
                        if "domain_norm" in config else None)
    f = _mapping_from_config(config["mapping"], "mapping")
    st = config["stability"]
    probes = _probes_from_config(st.get("probes", {"count": 20}), seed, f.domain, "stability.probes")
    try:
        cfg = StabilityConfig(
            n=eq.n,
            norm_spec=norm_spec,
            direction=st.get("direction", "forward"),
            m_max=int(st.get("m_max", 40)),
            tol=float(st.get("tol", 1e-9)),
            probes=probes,
            series_tol=float(st.get("series_tol", 1e-12)),
            bound_mode=st.get("bound_mode", "quasi"),
            domain_norm=domain_norm_spec,
        )
    except ValueError as e:
        raise ScenarioValidationError("stability", str(e)) from e
    phi = _control_from_config(config["control"], f, eq.n, norm_spec, domain_norm_spec,
                               seed, "control")
    caught: list[str] = []
    try:
        with warnings.catch_warnings(record=True) as wlist:
            warnings.simplefilter("always")
            report = stabilize(f, phi, cfg)
        caught = [str(w.message) for w in wlist]
    except OpenProblemError as e:
        row = ResultRow(name, "-", None, "", None, None, None, 0, STATUS_REJECTED_OPEN_PROBLEM)
        return [row], {"text": f"rejected: {e}", "control": _control_summary(phi)}
    except DivergenceError as e:
        row = ResultRow(name, "-", None, "", None, None, None, 0, STATUS_REJECTED_DIVERGENT)
        return [row], {"text": f"rejected: {e}", "control": _control_summary(phi)}
    rows = [
        ResultRow(
            scenario=name,
            probe=_fmt_value(p.probe),
            norm_x=p.norm_x,
            q_estimate=_fmt_value(p.q_estimate),
            deviation=p.deviation,
            bound=p.bound,
            margin=p.margin,
            iterations=p.iterations,
            status=p.status,
        )
        for p in report.probes
    ]
    n_pass = sum(1 for r in rows if r.status == STATUS_PASS)
    summary = {
        "text": f"{n_pass}/{len(rows)} probes within bound",
        "control": _control_summary(phi),
        "worst_margin": report.worst_margin,
    }
    if caught:
        summary["warnings"] = caught
    return rows, summary


def _control_summary(phi: ControlFunction) -> dict:
    if phi.variant == "power":
        return {"variant": "power", "epsilon": phi.epsilon, "r": phi.r}
    if phi.variant == "constant":
        return {"variant": "constant", "theta": phi.theta}
    return {"variant": "custom"}


def _run_oracle(config: dict) -> tuple[list[ResultRow], dict]:
    name = config["name"]
    eq_a = _equation_from_config(config["equation_a"], "equation_a")
    eq_b = _equation_from_config(config["equation_b"], "equation_b")
    group = _group_from_config(config["group"], "group")
    try:
        cmp = finite.spaces_equal(eq_a, eq_b, group)
    except finite.InadmissibleGroupError as e:
        raise ScenarioValidationError("group", str(e)) from e
    status = STATUS_PASS if cmp.equal else STATUS_FAIL
    if cmp.equal:
        text = f"spaces equal, dim {cmp.dim_left}"
    else:
        text = (f"spaces differ: dims {cmp.dim_left} vs {cmp.dim_right}"
                + (f", certificate on side {cmp.side}" if cmp.side else ""))
    row = ResultRow(name, "-", None, f"dim={cmp.dim_left}", None, None, None, 0, status)
    return [row], {"text": text, "dim_left": cmp.dim_left, "dim_right": cmp.dim_right}


def _run_dimension(config: dict) -> tuple[list[ResultRow], dict]:
    name = config["name"]
    eq = _equation_from_config(config["equation"], "equation")
    group = _group_from_config(config["group"], "group")
    expected = int(config["expected_dim"])
    try:
        basis = finite.nullspace_basis(finite.enumerate_constraints(eq, group))
    except finite.InadmissibleGroupError as e:
        raise ScenarioValidationError("group", str(e)) from e
    dim = len(basis)
    status = STATUS_PASS if dim == expected else STATUS_FAIL
    row = ResultRow(name, "-", None, f"dim={dim}", None, None, None, 0, status)
    return [row], {"text": f"nullspace dim {dim}, expected {expected}", "dim": dim}


def _run_inner_product(config: dict) -> tuple[list[ResultRow], dict]:
    name = config["name"]
    seed = int(config.get("seed", 0))
    spec = _norm_from_config(config["norm"], "norm")
    mode = config["mode"]
    param = int(config["param"])
    trials = int(config.get("trials", 10000))
    expect = config.get("expect", "pass")
    try:
        result = finite.inner_product_characterization(spec, mode, param, trials=trials, seed=seed)
    except ValueError as e:
        raise ScenarioValidationError("mode", str(e)) from e
    if expect == "pass":
        ok = result.passed
        text = ("identity holds on all samples" if ok
                else f"identity violated, residual {result.witness_residual}")
    else:
        ok = not result.passed
        if ok and "witness" in config:
            want = config["witness"]
            wx, wy = result.witness[0], result.witness[1]
            ok = (np.allclose(wx, want["x"]) and np.allclose(wy, want["y"])
                  and abs(result.witness_residual - want["residual"]) <= 1e-9)
        text = (f"witness found, residual {result.witness_residual}" if not result.passed
                else "expected a witness but the identity held")
    probe = "-"
    deviation = result.sup_residual
    if result.witness is not None:
        probe = ";".join(_fmt_value(p) for p in result.witness[:2])
        deviation = abs(result.witness_residual)
    row = ResultRow(name, probe, None, "", deviation, None, None, 0,
                    STATUS_PASS if ok else STATUS_FAIL)
    return [row], {"text": text, "sup_residual": result.sup_residual}


def _run_covariance(config: dict) -> tuple[list[ResultRow], dict]:
    name = config["name"]
    seed = int(config.get("seed", 0))
    f = _mapping_from_config(config["mapping"], "mapping")
    n = int(config["n"])
    probes = _probes_from_config(config["probes"], seed, f.domain, "probes")
    st = config.get("stability", {})
    norm_spec = (_norm_from_config(config["norm"], "norm") if "norm" in config
                 else algebra.euclidean(1))
    cfg = StabilityConfig(
        n=n,
        norm_spec=norm_spec,
        direction=st.get("direction", "forward"),
        m_max=int(st.get("m_max", 25)),
        tol=float(st.get("tol", 1e-10)),
        probes=probes,
        series_tol=float(st.get("series_tol", 1e-12)),
    )
    tol = float(config.get("tol", 1e-6))
    rep = verify_unitary_covariance(f, n, cfg, unitary_count=int(config.get("unitaries", 100)),
                                    seed=seed, tol=tol)
    row = ResultRow(name, f"{len(probes)} probes", None, "", rep.max_relative_deviation,
                    tol, tol - rep.max_relative_deviation, rep.iterations_used,
                    STATUS_PASS if rep.passed else STATUS_FAIL)
    text = (f"max relative covariance deviation {rep.max_relative_deviation:.3e} over "
            f"{rep.unitary_count} unitaries (tol {tol:g})")
    return [row], {"text": text, "max_relative_deviation": rep.max_relative_deviation}


def _run_deadzone(config: dict) -> tuple[list[ResultRow], dict]:
    name = config["name"]
    n = int(config["n"])
    theta = float(config["theta"])
    rows = []
    sweep = []
    for K in config["K_sweep"]:
        K = float(K)
        denom = (n - 1) ** 2 - K
        entry = {"K": K, "denominator": denom, "bound": None}
        try:
            bound = closed_form_bounds(n, "constant", "forward", K=K, theta=theta)
            entry["bound"] = bound
            rows.append(ResultRow(name, _fmt(K), None, f"denominator={_fmt(denom)}",
                                  None, bound, None, 0, STATUS_PASS))
        except OpenProblemError:
            rows.append(ResultRow(name, _fmt(K), None, f"denominator={_fmt(denom)}",
                                  None, None, None, 0, STATUS_REJECTED_OPEN_PROBLEM))
        except DivergenceError:
            rows.append(ResultRow(name, _fmt(K), None, f"denominator={_fmt(denom)}",
                                  None, None, None, 0, STATUS_REJECTED_DIVERGENT))
        sweep.append(entry)
    denoms = [e["denominator"] for e in sweep]
    crossing = (min(denoms) <= 0.0) and (max(denoms) > 0.0)
    text = ("denominator (n-1)^2 - K crosses zero across the sweep" if crossing
            else "denominator does not cross zero in this sweep")
    return rows, {"text": text, "sweep": sweep, "crosses_zero": crossing}


def _run_bound_equality(config: dict) -> tuple[list[ResultRow], dict]:
    name = config["name"]
    grid = config["grid"]
    tol = float(config.get("tol", 1e-12))
    epsilon = float(grid.get("epsilon", 1.0))
    series_tol = float(grid.get("series_tol", 1e-15))
    rows = []
    worst = 0.0
    for n in grid.get("n", [3, 4, 5]):
        for r in grid.get("r", [0.5, 1.0, 1.5, 2.5, 3.0, 4.0]):
            direction = "forward" if r < 2.0 else "backward"
            for norm_x in grid.get("norm_x", [0.5, 1.0, 2.0]):
                b_quasi = closed_form_bounds(n, "power", direction, norm_x=norm_x,
                                             K=1.0, epsilon=epsilon, r=r)
                b_p = closed_form_bounds(n, "power", direction, norm_x=norm_x,
                                         p=1.0, epsilon=epsilon, r=r)
                phi = power(epsilon, r)
                x = np.array([norm_x])
                if direction == "forward":
                    s_quasi = series_bound_forward(phi, n, 1.0, x, series_tol)
                    s_p = series_bound_forward_p(phi, n, 1.0, x, series_tol)
                else:
                    s_quasi = series_bound_backward(phi, n, 1.0, x, series_tol)
                    s_p = series_bound_backward_p(phi, n, 1.0, x, series_tol)
                scale = max(abs(b_quasi), abs(b_p), 1e-300)
                rel = max(abs(b_quasi - b_p), abs(s_quasi - s_p)) / scale
                worst = max(worst, rel)
                rows.append(ResultRow(
                    name, f"n={n}|r={_fmt(float(r))}|x={_fmt(float(norm_x))}", float(norm_x),
                    _fmt(b_quasi), rel, tol, tol - rel, 0,
                    STATUS_PASS if rel <= tol else STATUS_FAIL,
                ))
    return rows, {"text": f"worst relative disagreement {worst:.3e}", "worst": worst}


_RUNNERS = {
    "stability": _run_stability,
    "oracle": _run_oracle,
    "dimension": _run_dimension,
    "inner_product": _run_inner_product,
    "covariance": _run_covariance,
    "deadzone": _run_deadzone,
    "bound_equality": _run_bound_equality,
}


def _resolve_outdir(outdir: str | None) -> str:
    if outdir:
        return outdir
    return os.environ.get(OUTDIR_ENV, ".")


def _write_csv(path: str, rows: list[ResultRow]) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(RESULT_HEADERS)
    for row in rows:
        writer.writerow(row.csv_fields())
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=os.path.dirname(path) or ".", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(buf.getvalue())
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def run_scenario(config: dict, outdir: str | None = None, write_csv: bool = True) -> RunResult:
    """Validate and execute one scenario; deterministic given (config, seed)."""
    validate_config(config)
    runner = _RUNNERS[config["kind"]]
    rows, summary = runner(config)
    exit_code = _exit_code(rows, config.get("expected_status"))
    csv_path = None
    if write_csv:
        filename = config.get("output", {}).get("results_csv", f"{config['name']}.csv")
        csv_path = os.path.join(_resolve_outdir(outdir), filename)
        _write_csv(csv_path, rows)
    return RunResult(config["name"], rows, summary, exit_code, csv_path)


def emit_plotdata(rows: list[ResultRow], path: str | None = None) -> str:
    """CSV of (norm_x, deviation, bound) triples, sorted by norm_x."""
    usable = [r for r in rows
              if r.norm_x is not None and r.deviation is not None and r.bound is not None]
    if not usable:
        raise ValueError("no plottable rows")
    usable.sort(key=lambda r: r.norm_x)
    lines = [PLOTDATA_HEADER]
    lines += [f"{_fmt(r.norm_x)},{_fmt(r.deviation)},{_fmt(r.bound)}" for r in usable]
    text = "\n".join(lines) + "\n"
    if path is not None:
        os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=os.path.dirname(path) or ".", suffix=".tmp")
        try:
            with os.fdopen(fd, "w") as fh:
                fh.write(text)
            os.replace(tmp, path)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise
    return text


# ---------------------------------------------------------------------------
# preset registry


def _preset_oracle_fe2():
    return {
        "name": "oracle-fe2-fe1", "kind": "oracle", "seed": 1,
        "equation_a": {"id": "fe2"}, "equation_b": {"id": "fe1"},
        "group": {"q": 7, "d": 1},
    }


def _preset_oracle_fe3():
    return {
        "name": "oracle-fe3-fe1", "kind": "oracle", "seed": 1,
        "equation_a": {"id": "fe3", "n": 3}, "equation_b": {"id": "fe1"},
        "group": {"q": 5, "d": 1},
    }


def _preset_oracle_fe3_0():
    return {
        "name": "oracle-fe3_0-fe1", "kind": "oracle", "seed": 1,
        "equation_a": {"id": "fe3_0", "a": 2}, "equation_b": {"id": "fe1"},
        "group": {"q": 7, "d": 1},
    }


def _preset_fe1_dimension():
    return {
        "name": "fe1-dimension", "kind": "dimension", "seed": 1,
        "equation": {"id": "fe1"}, "group": {"q": 7, "d": 2}, "expected_dim": 3,
    }


def _preset_inner_product_pass():
    return {
        "name": "inner-product-pass", "kind": "inner_product", "seed": 3,
        "norm": {"kind": "euclidean", "dim": 2}, "mode": "b", "param": 2,
        "trials": 4000, "expect": "pass",
    }


def _preset_inner_product_centroid():
    return {
        "name": "inner-product-centroid", "kind": "inner_product", "seed": 3,
        "norm": {"kind": "euclidean", "dim": 3}, "mode": "c", "param": 3,
        "trials": 4000, "expect": "pass",
    }


def _preset_inner_product_fail():
    return {
        "name": "inner-product-fail", "kind": "inner_product", "seed": 3,
        "norm": {"kind": "l1", "dim": 2}, "mode": "b", "param": 2,
        "trials": 4000, "expect": "witness",
        "witness": {"x": [1.0, 0.0], "y": [0.0, 1.0], "residual": 4.0},
    }


def _preset_power_forward():
    return {
        "name": "power-forward", "kind": "stability", "seed": 11,
        "equation": {"id": "fe3", "n": 3},
        "norm": {"kind": "euclidean", "dim": 1},
        "domain_norm": {"kind": "euclidean", "dim": 1},
        "mapping": {"family": "perturbed",
                    "base": {"family": "quadratic_form", "coefficients": [[1.0]]},
                    "bump": {"family": "odd_growth"}, "amplitude": 0.05},
        "control": {"variant": "power", "epsilon": None, "r": 1.0, "fit_trials": 400},
        "stability": {"direction": "forward", "m_max": 40, "tol": 1e-9,
                      "series_tol": 1e-13, "bound_mode": "quasi",
                      "probes": {"count": 100, "box": 10.0}},
    }


def _preset_power_backward():
    return {
        "name": "power-backward", "kind": "stability", "seed": 12,
        "equation": {"id": "fe3", "n": 3},
        "norm": {"kind": "euclidean", "dim": 1},
        "domain_norm": {"kind": "euclidean", "dim": 1},
        "mapping": {"family": "perturbed",
                    "base": {"family": "quadratic_form", "coefficients": [[1.0]]},
                    "bump": {"family": "monomial", "degree": 3}, "amplitude": 0.01},
        "control": {"variant": "power", "epsilon": None, "r": 3.0, "fit_trials": 400},
        "stability": {"direction": "backward", "m_max": 40, "tol": 1e-9,
                      "series_tol": 1e-13, "bound_mode": "quasi",
                      "probes": {"count": 100, "box": 10.0}},
    }


def _preset_constant_quasinorm():
    alpha, beta = 0.05, 0.08
    theta = 12.0 * (np.sqrt(alpha) + np.sqrt(beta)) ** 2
    return {
        "name": "constant-quasinorm", "kind": "stability", "seed": 13,
        "equation": {"id": "fe3", "n": 3},
        "norm": {"kind": "lp_quasi", "p": 0.5, "dim": 2},
        "domain_norm": {"kind": "euclidean", "dim": 1},
        "mapping": {"family": "perturbed",
                    "base": {"family": "stack", "parts": [
                        {"family": "quadratic_form", "coefficients": [[1.0]]},
                        {"family": "quadratic_form", "coefficients": [[2.0]]}]},
                    "bump": {"family": "stack", "parts": [
                        {"family": "scaled", "factor": alpha, "inner": {"family": "sine"}},
                        {"family": "scaled", "factor": beta, "inner": {"family": "cosine"}}]},
                    "amplitude": 1.0},
        "control": {"variant": "constant", "theta": float(theta)},
        "stability": {"direction": "forward", "m_max": 40, "tol": 1e-9,
                      "series_tol": 1e-13, "bound_mode": "quasi",
                      "probes": {"count": 60, "box": 10.0}},
    }


def _preset_pnorm_p1():
    cfg = _preset_power_forward()
    cfg["name"] = "pnorm-p1"
    cfg["seed"] = 14
    cfg["stability"]["bound_mode"] = "p"
    return cfg


def _preset_pnorm_phalf():
    return {
        "name": "pnorm-phalf", "kind": "stability", "seed": 15,
        "equation": {"id": "fe3", "n": 3},
        "norm": {"kind": "lp_quasi", "p": 0.5, "dim": 2},
        "domain_norm": {"kind": "euclidean", "dim": 1},
        "mapping": {"family": "perturbed",
                    "base": {"family": "stack", "parts": [
                        {"family": "quadratic_form", "coefficients": [[1.0]]},
                        {"family": "quadratic_form", "coefficients": [[2.0]]}]},
                    "bump": {"family": "stack", "parts": [
                        {"family": "scaled", "factor": 1.0, "inner": {"family": "odd_growth"}},
                        {"family": "scaled", "factor": -0.5, "inner": {"family": "odd_growth"}}]},
                    "amplitude": 0.04},
        "control": {"variant": "power", "epsilon": None, "r": 1.0, "fit_trials": 400},
        "stability": {"direction": "forward", "m_max": 40, "tol": 1e-9,
                      "series_tol": 1e-13, "bound_mode": "p",
                      "probes": {"count": 60, "box": 10.0}},
    }


def _preset_bound_equality():
    return {
        "name": "k1-equals-p1", "kind": "bound_equality", "seed": 0,
        "grid": {"n": [3, 4, 5], "r": [0.5, 1.0, 1.5, 2.5, 3.0, 4.0],
                 "norm_x": [0.5, 1.0, 2.0], "epsilon": 1.0, "series_tol": 1e-15},
        "tol": 1e-12,
    }


def _preset_unitary_covariance():
    return {
        "name": "unitary-covariance", "kind": "covariance", "seed": 5,
        "n": 3,
        "mapping": {"family": "perturbed",
                    "base": {"family": "matrix_square", "k": 2},
                    "bump": {"family": "matrix_sine_bump",
                             "h_real": [[1.0, 0.3], [0.3, -0.5]]},
                    "amplitude": 0.1},
        "unitaries": 100, "tol": 1e-6,
        "probes": {"count": 3, "box": 3.0},
        "stability": {"m_max": 25, "tol": 1e-10},
    }


def _preset_deadzone():
    return {
        "name": "open-problem-deadzone", "kind": "deadzone", "seed": 0,
        "n": 3, "theta": 1.0, "K_sweep": [3.0, 3.5, 3.9, 4.0, 4.5, 5.0],
        "expected_status": STATUS_REJECTED_OPEN_PROBLEM,
    }


PRESETS: dict[str, tuple[str, object]] = {
    "oracle-fe2-fe1": (
        "three-point centroid identity and the quadratic equation cut the same space over F_7",
        _preset_oracle_fe2),
    "oracle-fe3-fe1": (
        "n-point centroid equation (n=3) matches the quadratic equation over F_5, dim 1",
        _preset_oracle_fe3),
    "oracle-fe3_0-fe1": (
        "shifted two-variable equation (a=2) matches the quadratic equation over F_7",
        _preset_oracle_fe3_0),
    "fe1-dimension": (
        "quadratic solution space over F_7^2 has dimension d(d+1)/2 = 3",
        _preset_fe1_dimension),
    "inner-product-pass": (
        "Euclidean plane satisfies the shifted squared-norm identity (a=2)",
        _preset_inner_product_pass),
    "inner-product-centroid": (
        "Euclidean 3-space satisfies the centroid squared-norm identity (n=3)",
        _preset_inner_product_centroid),
    "inner-product-fail": (
        "l1 plane violates the shifted identity with witness e1, e2 and residual 4",
        _preset_inner_product_fail),
    "power-forward": (
        "forward scheme with power budget r=1: deviation under (n+2)K eps |x|^r / (n[(n-1)^2-K(n-1)^r])",
        _preset_power_forward),
    "power-backward": (
        "backward scheme with power budget r=3: deviation under the mirrored closed form",
        _preset_power_backward),
    "constant-quasinorm": (
        "constant budget in the l^{1/2} quasi-norm plane (K=2): deviation under 5 theta / 3",
        _preset_constant_quasinorm),
    "pnorm-p1": (
        "p-norm route at p=1 reproduces the K=1 run",
        _preset_pnorm_p1),
    "pnorm-phalf": (
        "p-norm route at p=1/2 in the l^{1/2} plane with power budget r=1",
        _preset_pnorm_phalf),
    "k1-equals-p1": (
        "closed forms and series agree between K=1 and p=1 on a parameter grid",
        _preset_bound_equality),
    "unitary-covariance": (
        "stabilized limit of a perturbed matrix square is unitarily covariant on M_2(C)",
        _preset_unitary_covariance),
    "open-problem-deadzone": (
        "constant-budget denominator (n-1)^2 - K crosses zero; K >= (n-1)^2 is rejected",
        _preset_deadzone),
}


def list_presets() -> list[tuple[str, str]]:
    """Registered preset names with one-line descriptions."""
    return [(name, desc) for name, (desc, _) in PRESETS.items()]


def preset_config(name: str) -> dict:
    if name not in PRESETS:
        raise KeyError(f"unknown preset {name!r}; try `quadstab list`")
    return PRESETS[name][1]()


def run_preset(name: str, outdir: str | None = None, seed: int | None = None,
               write_csv: bool = True) -> RunResult:
    config = preset_config(name)
    if seed is not None:
        config["seed"] = int(seed)
    return run_scenario(config, outdir=outdir, write_csv=write_csv)


# ---------------------------------------------------------------------------
# CLI


def _print_result(res: RunResult) -> None:
    print(f"[{res.name}] {res.summary.get('text', '')}")
    counts: dict[str, int] = {}
    for row in res.rows:
        counts[row.status] = counts.get(row.status, 0) + 1
    print("rows: " + ", ".join(f"{k}={v}" for k, v in sorted(counts.items())))
    if res.csv_path:
        print(f"results: {res.csv_path}")


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="quadstab",
        description="quadratic functional equation laboratory: stability bounds and finite-field oracles",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a scenario config (JSON)")
    p_run.add_argument("config")
    p_run.add_argument("--outdir", default=None)

    p_preset = sub.add_parser("preset", help="run a named preset experiment")
    p_preset.add_argument("name")
    p_preset.add_argument("--outdir", default=None)
    p_preset.add_argument("--seed", type=int, default=None)

    sub.add_parser("list", help="list preset experiments")

    p_oracle = sub.add_parser("oracle", help="compare two equations' solution spaces over F_q^d")
    p_oracle.add_argument("eq1", help="fe1 | fe2 | fe3[:n] | fe3_0[:a]")
    p_oracle.add_argument("eq2", help="fe1 | fe2 | fe3[:n] | fe3_0[:a]")
    p_oracle.add_argument("--q", type=int, required=True)
    p_oracle.add_argument("--d", type=int, default=1)

    p_plot = sub.add_parser("plotdata", help="extract (norm_x, deviation, bound) from a results CSV")
    p_plot.add_argument("results_csv")
    p_plot.add_argument("-o", "--output", default=None)

    args = parser.parse_args(argv)

    if args.command == "run":
        try:
            with open(args.config) as fh:
                config = json.load(fh)
        except (OSError, json.JSONDecodeError) as e:
            print(f"error: cannot read config: {e}", file=sys.stderr)
            return EXIT_VALIDATION
        try:
            res = run_scenario(config, outdir=args.outdir)
        except ScenarioValidationError as e:
            print(f"error: {e}", file=sys.stderr)
            return EXIT_VALIDATION
        _print_result(res)
        return res.exit_code

    if args.command == "preset":
        try:
            res = run_preset(args.name, outdir=args.outdir, seed=args.seed)
        except KeyError as e:
            print(f"error: {e.args[0]}", file=sys.stderr)
            return EXIT_VALIDATION
        except ScenarioValidationError as e:
            print(f"error: {e}", file=sys.stderr)
            return EXIT_VALIDATION
        _print_result(res)
        return res.exit_code

    if args.command == "list":
        for name, desc in list_presets():
            print(f"{name:24s} {desc}")
        return EXIT_OK

    if args.command == "oracle":
        try:
            eq1 = parse_equation(args.eq1)
            eq2 = parse_equation(args.eq2)
            group = finite.GroupSpec(args.q, args.d)
            cmp = finite.spaces_equal(eq1, eq2, group)
        except (ValueError, finite.InadmissibleGroupError) as e:
            print(f"error: {e}", file=sys.stderr)
            return EXIT_VALIDATION
        if cmp.equal:
            print(f"spaces equal, dim {cmp.dim_left}")
            return EXIT_OK
        print(f"spaces differ: dims {cmp.dim_left} vs {cmp.dim_right} ({cmp.side})")
        return EXIT_BOUND_VIOLATION

    if args.command == "plotdata":
        try:
            with open(args.results_csv, newline="") as fh:
                reader = csv.DictReader(fh)
                rows = []
                for rec in reader:
                    if not (rec.get("norm_x") and rec.get("deviation") and rec.get("bound")):
                        continue
                    rows.append(ResultRow(
                        rec.get("scenario", ""), rec.get("probe", ""),
                        float(rec["norm_x"]), rec.get("q_estimate", ""),
                        float(rec["deviation"]), float(rec["bound"]),
                        None, 0, rec.get("status", ""),
                    ))
            text = emit_plotdata(rows, path=args.output)
        except (OSError, ValueError, KeyError) as e:
            print(f"error: {e}", file=sys.stderr)
            return EXIT_VALIDATION
        if args.output is None:
            sys.stdout.write(text)
        else:
            print(f"plot data: {args.output}")
        return EXIT_OK

    parser.error(f"unknown command {args.command!r}")  # pragma: no cover
    return EXIT_VALIDATION  # pragma: no cover


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
