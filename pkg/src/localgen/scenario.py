"""Declarative scenarios: config validation, model assembly and task execution.

A scenario config is a single JSON document::

    {
      "model": {"name": "two_rate", "parameters": {...}},
      "grid": {"t0": 0, "t_end": 3, "n_samples": 31},
      "tasks": ["compare", "certify"],
      "tolerances": {"rtol": 1e-10},
      "output": {"format": "csv", "path": "two_rate"}
    }

Model names: ``lindblad``, ``z_family``, ``pure_decoherence``, ``two_rate``,
``sigma_z_limit``.
"""

import json
import math
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional

import numpy as np

from .errors import ValidationError
from .generator import GeneratorFamily, LinearZ, is_commutative, local_generator
from .lindblad import build_generator, is_cpt_map, is_lindblad_generator
from .models import (
    PureDecoherenceModel,
    TwoRateModel,
    pure_decoherence_family,
    pure_decoherence_map,
    qubit_dephasing_rates,
    random_piecewise_schedules,
    scan_B_negativity,
    sigma_z_family,
    sigma_z_limit_study,
    two_rate_B,
    two_rate_generator,
)
from .propagate import TimeGrid, exp_map, markovianity_probe, solve_ordered
from .records import Table, _require_keys, scalar_from_dict, spec_from_dict, superop_cells, superop_columns
from .scalar import ScalarFn
from .superop import max_abs
from .tolerances import DEFAULT, Tolerances

TASKS = ("propagate", "generator", "certify", "markov_probe", "compare", "scan")
MODELS = ("lindblad", "z_family", "pure_decoherence", "two_rate", "sigma_z_limit")


@dataclass
class ScenarioConfig:
    model_name: str
    parameters: Dict[str, Any]
    grid: TimeGrid
    tasks: List[str]
    tolerances: Tolerances
    output_format: str
    output_path: str


def load_config(path, tol_overrides: Optional[Dict[str, str]] = None) -> ScenarioConfig:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"config is not valid JSON: {exc}") from None
    return parse_config(doc, tol_overrides)


def parse_config(doc, tol_overrides=None) -> ScenarioConfig:
    _require_keys(doc, "config", ("model", "grid", "tasks", "output"), ("tolerances",))
    model = doc["model"]
    _require_keys(model, "model", ("name",), ("parameters",))
    if model["name"] not in MODELS:
        raise ValidationError(f"model.name: unknown model {model['name']!r}; expected one of {MODELS}")

    g = doc["grid"]
    _require_keys(g, "grid", ("t0", "t_end", "n_samples"))
    if not isinstance(g["n_samples"], int) or g["n_samples"] < 2:
        raise ValidationError("grid.n_samples: must be an integer >= 2")
    try:
        grid = TimeGrid.linspace(g["t0"], g["t_end"], g["n_samples"])
    except (ValidationError, TypeError) as exc:
        raise ValidationError(f"grid: {exc}") from None

    tasks = doc["tasks"]
    if not isinstance(tasks, list) or not tasks:
        raise ValidationError("tasks: expected a non-empty list")
    for k, t in enumerate(tasks):
        if t not in TASKS:
            raise ValidationError(f"tasks[{k}]: unknown task {t!r}; expected one of {TASKS}")
    if len(set(tasks)) != len(tasks):
        raise ValidationError("tasks: duplicate entries")

    tol = DEFAULT
    try:
        tol = tol.override(**doc.get("tolerances", {}))
        if tol_overrides:
            tol = tol.override(**tol_overrides)
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError(f"tolerances: {exc}") from None

    out = doc["output"]
    _require_keys(out, "output", ("format", "path"))
    if out["format"] not in ("csv", "json"):
        raise ValidationError(f"output.format: expected 'csv' or 'json', got {out['format']!r}")
    return ScenarioConfig(model["name"], model.get("parameters", {}), grid, list(tasks), tol,
                          out["format"], out["path"])


# -- model assembly -----------------------------------------------------------------


@dataclass
class Scenario:
    """Everything the tasks need, assembled from a validated config.

    ``zf`` is the exponent family when the model has one; ``closed_map``
    gives the dynamical map without time ordering.
    """

    name: str
    dim: int
    gf: GeneratorFamily
    closed_map: Callable[[float], np.ndarray]
    zf: Any = None
    model: Any = None
    extra: Dict[str, Any] = field(default_factory=dict)


def build_scenario(cfg: ScenarioConfig) -> Scenario:
    p = cfg.parameters
    t0 = cfg.grid.t0
    name = cfg.model_name
    n_nodes = cfg.tolerances.n_nodes
    if name == "lindblad":
        _require_keys(p, "model.parameters", ("spec",))
        spec = spec_from_dict(p["spec"], "model.parameters.spec")
        zf = LinearZ((build_generator(spec),), (ScalarFn.constant(1.0),), t0)
        gf = GeneratorFamily.constant(build_generator(spec), t0, "user_supplied")
        return Scenario(name, spec.dim, gf, lambda t: exp_map(zf, t), zf)
    if name == "z_family":
        _require_keys(p, "model.parameters", ("terms",), ("homogeneous",))
        gens, coefs = [], []
        if not isinstance(p["terms"], list) or not p["terms"]:
            raise ValidationError("model.parameters.terms: expected a non-empty list")
        for k, term in enumerate(p["terms"]):
            where = f"model.parameters.terms[{k}]"
            _require_keys(term, where, ("generator", "coefficient"))
            gens.append(build_generator(spec_from_dict(term["generator"], f"{where}.generator")))
            coefs.append(scalar_from_dict(term["coefficient"], f"{where}.coefficient"))
        homogeneous = bool(p.get("homogeneous", True))
        if not homogeneous and t0 < 0:
            raise ValidationError("grid.t0: absolute-clock families need t0 >= 0")
        zf = LinearZ(tuple(gens), tuple(coefs), t0, homogeneous)
        gf = GeneratorFamily.from_z_family(zf, "frechet", n_nodes)
        return Scenario(name, zf.dim, gf, lambda t: exp_map(zf, t), zf)
    if name == "pure_decoherence":
        _require_keys(p, "model.parameters", (), ("gamma", "coefficients"))
        if ("gamma" in p) == ("coefficients" in p):
            raise ValidationError("model.parameters: give exactly one of 'gamma' or 'coefficients'")
        if "gamma" in p:
            m = PureDecoherenceModel.qubit(scalar_from_dict(p["gamma"], "model.parameters.gamma"), t0)
        else:
            rows = p["coefficients"]
            table = tuple(
                tuple(scalar_from_dict(c, f"model.parameters.coefficients[{i}][{j}]") for j, c in enumerate(row))
                for i, row in enumerate(rows)
            )
            m = PureDecoherenceModel(table, t0)
        return Scenario(name, m.dim, pure_decoherence_family(m), lambda t: pure_decoherence_map(m, t), None, m)
    if name == "two_rate":
        _require_keys(p, "model.parameters", ("a1", "a2"), ("scan",))
        if t0 != 0:
            raise ValidationError("grid.t0: the two_rate model starts at t0 = 0")
        m = TwoRateModel(scalar_from_dict(p["a1"], "model.parameters.a1"),
                         scalar_from_dict(p["a2"], "model.parameters.a2"), cfg.tolerances.quad_atol)
        zf = m.z_family()
        scan = p.get("scan")
        if scan is not None:
            _require_keys(scan, "model.parameters.scan", (), ("n_models", "n_pieces", "low", "high", "seed"))
        return Scenario(name, 2, m.generator_family(), lambda t: exp_map(zf, t), zf, m, {"scan": scan})
    # sigma_z_limit
    _require_keys(p, "model.parameters", ())
    if t0 != 0 or cfg.grid.t_end >= math.pi / 2:
        raise ValidationError("grid: sigma_z_limit needs t0 = 0 and t_end < pi/2")
    zf = sigma_z_family()
    gf = GeneratorFamily.from_z_family(zf, "frechet", n_nodes)
    return Scenario(name, 2, gf, lambda t: exp_map(zf, t), zf)


# -- tasks -----------------------------------------------------------------------------


@dataclass
class TaskResult:
    table: Table
    summary: List[str]
    certified: bool = True


def _need_zf(sc, task):
    if sc.zf is None:
        raise ValidationError(f"tasks: {task!r} needs an exponent family; model {sc.name!r} has none")


def task_propagate(sc: Scenario, cfg: ScenarioConfig) -> TaskResult:
    tol = cfg.tolerances
    pr = solve_ordered(sc.gf, cfg.grid, tol.rtol, tol.atol, tol.cpt)
    table = Table("propagate", ["t"] + superop_columns(sc.dim) + ["min_choi_eig", "trace_defect"])
    for t, lam, v in zip(cfg.grid.samples, pr.maps, pr.cpt_report):
        table.rows.append([t] + superop_cells(lam) + [v.details["min_choi_eig"], v.details["trace_defect"]])
    st = pr.integrator_stats
    table.meta = {"steps": st.steps, "rejected_steps": st.rejected_steps, "est_error": st.est_error,
                  "rtol": tol.rtol, "atol": tol.atol}
    failed = [t for t, v in zip(cfg.grid.samples, pr.cpt_report) if not v]
    summary = [
        f"propagate: {st.steps} steps ({st.rejected_steps} rejected), est. error {st.est_error:.3e}",
        f"  min Choi eigenvalue {min(v.details['min_choi_eig'] for v in pr.cpt_report):.3e}, "
        f"max trace defect {max(v.details['trace_defect'] for v in pr.cpt_report):.3e}, "
        f"CPT failures {len(failed)}/{len(pr.maps)}",
    ]
    return TaskResult(table, summary, not failed)


def task_generator(sc: Scenario, cfg: ScenarioConfig) -> TaskResult:
    tol = cfg.tolerances
    cols = ["t"]
    if sc.name == "two_rate":
        cols += ["a1", "a2", "f", "b1", "b2", "b1_main", "b2_main", "B1", "B2"]
    elif sc.name == "pure_decoherence" and sc.dim == 2:
        cols += ["b1", "b2"]
    cols += superop_columns(sc.dim) + ["lindblad_at_t"]
    table = Table("generator", cols)
    worst = 0.0
    for t in cfg.grid.samples:
        if sc.zf is not None and sc.name != "lindblad":
            gen = local_generator(sc.zf, t, method="both", n_nodes=tol.n_nodes, tol=tol.consistency)
        else:
            gen = sc.gf(t)
        row = [t]
        if sc.name == "two_rate":
            q = sc.model.quantities(t)
            b1, b2, op = two_rate_generator(sc.model, t)
            # coefficients of the main-formula generator on (L1, L2): entries (0,3) and (3,0)
            b1_main, b2_main = float(gen[0, 3].real), float(gen[3, 0].real)
            worst = max(worst, max_abs(gen - op))
            B1, B2, _ = two_rate_B(sc.model, t, tol.lindblad)
            row += [q.a1, q.a2, q.f, b1, b2, b1_main, b2_main, B1, B2]
        elif sc.name == "pure_decoherence" and sc.dim == 2:
            row += list(qubit_dephasing_rates(sc.model, t))
        row += superop_cells(gen) + [is_lindblad_generator(gen, tol.lindblad).passed]
        table.rows.append(row)
    summary = [f"generator: {len(table.rows)} samples"]
    if sc.name == "two_rate":
        table.meta["max_main_vs_analytic"] = worst
        summary.append(f"  max |main formula - analytic| = {worst:.3e}")
        last = table.rows[-1]
        summary.append(f"  at t={last[0]:.6g}: b1={last[4]:.10g} b2={last[5]:.10g} B1={last[8]:.6g} B2={last[9]:.6g}")
    if sc.zf is not None and len(cfg.grid.samples) >= 3:
        v = is_commutative(sc.zf, cfg.grid.samples, tol.commute)
        table.meta["commutative"] = v.passed
        summary.append(f"  commutative on samples: {v.passed}")
    return TaskResult(table, summary, True)


def task_certify(sc: Scenario, cfg: ScenarioConfig) -> TaskResult:
    tol = cfg.tolerances
    table = Table("certify", ["t", "min_choi_eig", "trace_defect", "cpt_passed", "z_lindblad_passed", "witness"])
    n_fail = 0
    for t in cfg.grid.samples:
        lam = sc.closed_map(t)
        v = is_cpt_map(lam, tol.cpt)
        zl = is_lindblad_generator(sc.zf.z(t), tol.lindblad).passed if sc.zf is not None else None
        n_fail += not v.passed
        table.rows.append([t, v.details["min_choi_eig"], v.details["trace_defect"], v.passed, zl,
                           v.witness.description if v.witness else ""])
    summary = [
        f"certify: {len(table.rows) - n_fail}/{len(table.rows)} maps CPT, "
        f"min Choi eigenvalue {min(r[1] for r in table.rows):.3e}"
    ]
    return TaskResult(table, summary, n_fail == 0)


def task_markov_probe(sc: Scenario, cfg: ScenarioConfig) -> TaskResult:
    _need_zf(sc, "markov_probe")
    ts = cfg.grid.samples
    pairs = [(t, s) for i, s in enumerate(ts[1:-1], 1) for t in ts[i + 1:]]
    if not pairs:
        raise ValidationError("grid.n_samples: markov_probe needs at least 3 samples")
    rep = markovianity_probe(sc.zf, pairs, cfg.tolerances.markov)
    table = Table(
        "markov_probe",
        ["classification", "max_generator_shift", "max_composition_defect", "threshold", "n_pairs"],
        [[rep.classification, rep.max_generator_shift, rep.max_composition_defect, rep.threshold, len(pairs)]],
        {"worst_generator_pair": rep.worst_generator_pair, "worst_composition_pair": rep.worst_composition_pair},
    )
    summary = [
        f"markov_probe: {rep.classification} (max generator shift {rep.max_generator_shift:.3e}, "
        f"max composition defect {rep.max_composition_defect:.3e}, threshold {rep.threshold:.1e})"
    ]
    return TaskResult(table, summary, True)


def task_compare(sc: Scenario, cfg: ScenarioConfig) -> TaskResult:
    tol = cfg.tolerances
    pr = solve_ordered(sc.gf, cfg.grid, tol.rtol, tol.atol, tol.cpt)
    table = Table("compare", ["t", "deviation", "min_choi_eig_ordered", "trace_defect_ordered"])
    for t, lam, v in zip(cfg.grid.samples, pr.maps, pr.cpt_report):
        table.rows.append([t, max_abs(lam - sc.closed_map(t)), v.details["min_choi_eig"], v.details["trace_defect"]])
    worst = max(r[1] for r in table.rows)
    table.meta = {"max_deviation": worst, "tolerance": tol.compare, "rtol": tol.rtol}
    summary = [f"compare: max |ordered - closed form| = {worst:.3e} (tolerance {tol.compare:.1e})"]
    return TaskResult(table, summary, worst <= tol.compare)


def task_scan(sc: Scenario, cfg: ScenarioConfig) -> TaskResult:
    tol = cfg.tolerances
    if sc.name == "sigma_z_limit":
        study = sigma_z_limit_study(cfg.grid.samples, tol.cpt)
        table = Table("scan", list(study.rows[0]._fields), [list(r) for r in study.rows],
                      {"all_cpt": study.all_cpt,
                       "projection_distance_monotone": study.projection_distance_monotone,
                       "limit_matches_sigma_z_map": study.limit_matches_sigma_z_map,
                       "note": study.note})
        factors = [r.offdiag_factor for r in study.rows]
        decay = all(b <= a for a, b in zip(factors, factors[1:]))
        summary = [
            f"scan (sigma_z limit): all CPT {study.all_cpt}, off-diagonal decay monotone {decay}, "
            f"final factor {factors[-1]:.3e}",
            f"  {study.note}",
        ]
        if not study.limit_matches_sigma_z_map:
            summary.append("  FLAG: limit differs from the map rho -> sz rho sz")
        return TaskResult(table, summary, study.all_cpt)
    if sc.name != "two_rate":
        raise ValidationError(f"tasks: 'scan' is only defined for two_rate and sigma_z_limit, not {sc.name!r}")
    models = [sc.model]
    labels = ["configured"]
    scan = sc.extra.get("scan")
    if scan:
        rnd = random_piecewise_schedules(
            scan.get("n_models", 20), scan.get("n_pieces", 4), cfg.grid.t_end,
            scan.get("low", -1.0), scan.get("high", 2.0), scan.get("seed", 0),
        )
        models += rnd
        labels += [f"random_{k}" for k in range(len(rnd))]
    rows = scan_B_negativity(models, cfg.grid.samples, tol.lindblad)
    table = Table("scan", ["index", "label", "min_B", "t_at_min", "min_A", "lindblad_everywhere"],
                  [[r.index, lab, r.min_B, float(r.t_at_min), r.min_A, r.lindblad_everywhere]
                   for r, lab in zip(rows, labels)])
    worst = min(rows, key=lambda r: r.min_B)
    summary = [
        f"scan (B negativity): {len(rows)} schedules, min over t of min(B1,B2) = {worst.min_B:.6g} "
        f"({labels[worst.index]} at t={float(worst.t_at_min):.6g})",
        f"  schedules whose integrated generator leaves the Lindblad cone: "
        f"{sum(not r.lindblad_everywhere for r in rows)}",
    ]
    return TaskResult(table, summary, True)


TASK_RUNNERS = {
    "propagate": task_propagate,
    "generator": task_generator,
    "certify": task_certify,
    "markov_probe": task_markov_probe,
    "compare": task_compare,
    "scan": task_scan,
}


def run_tasks(cfg: ScenarioConfig):
    sc = build_scenario(cfg)
    return {name: TASK_RUNNERS[name](sc, cfg) for name in cfg.tasks}
