"""Experiment configs and the end-to-end runner behind the CLI.

A run writes plain CSV/JSON artifacts into ``out_dir``. Everything except
``manifest.json`` (which records wall times) is byte-reproducible for a
fixed config.
"""

from __future__ import annotations

import copy
import hashlib
import itertools
import json
import logging
import math
import subprocess
import time
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from .. import __version__
from ..gp import Matern52, fit, gp_to_dict
from ..kernelsearch import search
from ..model import from_dimensionless
from ..multifid import FidelityDataset, fit_stack
from ..solver import BasisSpec, BracketError, find_lambda_c, ring_momenta
from .data import config_hash, evaluate_points, write_csv
from .design import SampleBox, lhs_sample
from .transitions import as_energy_fn, bandwidth_check, surrogate_dispersion, surrogate_transition_curve

__all__ = ["ExperimentConfig", "ExperimentError", "PRESETS", "apply_overrides", "code_version",
           "generate_dataset", "run_experiment", "model_inputs", "design_k_grid"]

log = logging.getLogger(__name__)

KINDS = ("extrapolate", "multifid", "scan")


class ExperimentError(RuntimeError):
    """A pipeline stage failed; ``stage`` names it."""

    def __init__(self, stage: str, cause: BaseException):
        super().__init__(f"stage {stage!r} failed: {type(cause).__name__}: {cause}")
        self.stage = stage
        self.cause = cause


@dataclass
class ExperimentConfig:
    """Everything a run depends on. ``seed`` drives every random choice.

    Boxes with ``lo == hi`` along a dimension hold that variable fixed, and it
    is then dropped from the GP inputs.
    """

    kind: str = "extrapolate"
    model: dict = field(default_factory=lambda: {"t": 1.0, "lambda_h": 0.0, "ring_size": 32})
    box: dict = field(default_factory=lambda: {"omega": [1.0, 1.3], "lambda_ssh": [0.25, 1.75],
                                               "k": [0.0, math.pi]})
    n_samples: int = 415
    solver: dict = field(default_factory=lambda: {"M": 3, "N": 9})
    fidelities: list = field(default_factory=list)
    seed: int = 0
    search_depth: int = 2
    restarts: int = 4
    predict: dict = field(default_factory=lambda: {"omega": [0.5, 0.7, 0.9], "lambda_lo": 0.25,
                                                   "lambda_hi": 1.75, "lambda_count": 31, "tol": 0.005})
    reference: dict | None = None
    bandwidth: dict | None = None
    robustness: int = 0
    scan: dict = field(default_factory=dict)
    workers: int = 1
    out_dir: str = "results"

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}, got {self.kind!r}")
        if self.kind == "multifid" and len(self.fidelities) < 2:
            raise ValueError("multifid runs need at least two entries in 'fidelities'")
        if self.kind != "scan":
            SampleBox.from_dict({"ranges": self.box})

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        extra = set(d) - known
        if extra:
            raise ValueError(f"unknown config keys: {sorted(extra)}")
        return cls(**copy.deepcopy(d))

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))

    def to_dict(self) -> dict:
        return asdict(self)

    @property
    def sample_box(self) -> SampleBox:
        return SampleBox.from_dict({"ranges": self.box, "lambda_h": self.model.get("lambda_h", 0.0)})


def _parse_value(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def apply_overrides(d: dict, assignments) -> dict:
    """Apply ``key.sub=value`` strings to a config dict; values parse as JSON when possible."""
    out = copy.deepcopy(d)
    for item in assignments or ():
        if "=" not in item:
            raise ValueError(f"override {item!r} is not of the form key=value")
        key, text = item.split("=", 1)
        parts = key.strip().split(".")
        node = out
        for p in parts[:-1]:
            if node.get(p) is None:
                node[p] = {}
            node = node[p]
            if not isinstance(node, dict):
                raise ValueError(f"cannot set {key}: {p} is not a mapping")
        node[parts[-1]] = _parse_value(text)
    return out


PRESETS = {
    "fig2": {"kind": "extrapolate", "n_samples": 600,
             "box": {"omega": [4.0, 6.0], "lambda_ssh": [1.0, 2.0], "k": [0.0, math.pi]},
             "predict": {"omega": [0.5, 1.0, 2.0, 3.0, 4.0], "lambda_lo": 0.25, "lambda_hi": 2.0,
                         "lambda_count": 36, "tol": 0.005}},
    "fig3": {"kind": "extrapolate", "n_samples": 415,
             "box": {"omega": [1.0, 1.3], "lambda_ssh": [0.25, 1.75], "k": [0.0, math.pi]},
             "predict": {"omega": [0.5, 0.7, 0.9, 1.1], "lambda_lo": 0.25, "lambda_hi": 1.75,
                         "lambda_count": 31, "tol": 0.005}},
    "fig6": {"kind": "extrapolate", "n_samples": 415,
             "box": {"omega": [0.4, 0.7], "lambda_ssh": [0.25, 1.75], "k": [0.0, math.pi]},
             "predict": {"omega": [0.4, 0.3], "lambda_lo": 0.25, "lambda_hi": 1.75,
                         "lambda_count": 31, "tol": 0.005},
             "bandwidth": {"omega": [0.4, 0.3, 0.1, 0.01], "lambda_ssh": [0.5, 1.0, 1.5], "tol": 0.05}},
    "fig8": {"kind": "multifid",
             "box": {"omega": [0.5, 0.5], "lambda_ssh": [0.25, 1.75], "k": [0.0, 0.8 * math.pi]},
             "fidelities": [{"M": 2, "N": 4, "n_samples": 100}, {"M": 3, "N": 9, "n_samples": 15}],
             "predict": {"omega": [0.5], "lambda_lo": 0.25, "lambda_hi": 1.75, "lambda_count": 31,
                         "tol": 0.005},
             "reference": {"M": 3, "N": 9, "lambda_lo": 0.25, "lambda_hi": 1.75, "tol": 0.005,
                           "lambda_count": 13}},
    "fig1": {"kind": "scan",
             "scan": {"omega": [4.0], "lambda_lo": 0.3, "lambda_hi": 1.2, "tol": 0.005,
                      "ladder": [[2, 4], [3, 6], [4, 8]], "threshold": 0.01}},
}


def code_version() -> str:
    """``<version>+g<commit>`` when the package sits in a git checkout."""
    here = Path(__file__).resolve().parent
    try:
        sha = subprocess.run(["git", "rev-parse", "--short", "HEAD"], cwd=here, capture_output=True,
                             text=True, timeout=5, check=True).stdout.strip()
    except (OSError, subprocess.SubprocessError):
        return __version__
    return f"{__version__}+g{sha}" if sha else __version__


def model_inputs(box: SampleBox):
    """Varying box labels (GP inputs) and the fixed ones with their values."""
    names = tuple(n for n in box.labels if box.ranges[n][0] < box.ranges[n][1])
    fixed = {n: float(box.ranges[n][0]) for n in box.labels if n not in names}
    return names, fixed


def design_k_grid(box: SampleBox, ring_size: int) -> np.ndarray:
    grid = ring_momenta(ring_size)
    lo, hi = box.ranges.get("k", (0.0, math.pi))
    return grid[(grid >= lo - 1e-12) & (grid <= hi + 1e-12)]


def generate_dataset(config: ExperimentConfig, n_samples: int | None = None, solver: dict | None = None,
                     seed: int | None = None):
    """LHS design plus solver energies; returns ``(design, DataTable)``."""
    box = config.sample_box
    solver = solver or config.solver
    n = config.n_samples if n_samples is None else n_samples
    seed = config.seed if seed is None else seed
    design = lhs_sample(n, box, seed=seed)
    spec = BasisSpec(int(solver["M"]), int(solver["N"]))
    table = evaluate_points(design, spec, lambda_h=box.lambda_h, t=float(config.model.get("t", 1.0)),
                            ring_size=int(config.model.get("ring_size", 32)), workers=config.workers,
                            columns=box.labels, k_bounds=box.ranges.get("k"))
    table.provenance = {"config_hash": config_hash(config.to_dict()), "code_version": code_version(),
                        "seed": seed, "M": spec.M, "N": spec.N}
    return design, table


def _lambda_grid(pred: dict) -> np.ndarray:
    return np.linspace(float(pred["lambda_lo"]), float(pred["lambda_hi"]), int(pred["lambda_count"]))


def _std_record(gp, names) -> dict:
    return {"inputs": list(names), "x_offset": gp.x_offset.tolist(), "x_scale": gp.x_scale.tolist(),
            "y_offset": gp.y_offset, "y_scale": gp.y_scale}


def _sha(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


class _Run:
    """Stage bookkeeping shared by all experiment kinds."""

    def __init__(self, config: ExperimentConfig):
        self.config = config
        self.out = Path(config.out_dir)
        self.out.mkdir(parents=True, exist_ok=True)
        self.timings = {}
        self.warnings = []
        self.files = []
        self.manifest = {"config": config.to_dict(), "code_version": code_version(), "seed": config.seed,
                         "kind": config.kind}

    def stage(self, name, fn, *args, **kwargs):
        t0 = time.perf_counter()
        try:
            return fn(*args, **kwargs)
        except Exception as err:
            self.timings[name] = time.perf_counter() - t0
            self.finish(status="failed", failed_stage=name, error=f"{type(err).__name__}: {err}")
            raise ExperimentError(name, err) from err
        finally:
            self.timings.setdefault(name, time.perf_counter() - t0)

    def path(self, name) -> Path:
        self.files.append(name)
        return self.out / name

    def csv(self, name, header, rows):
        write_csv(self.path(name), header, rows)

    def json(self, name, obj):
        with open(self.path(name), "w") as fh:
            json.dump(obj, fh, indent=1, sort_keys=True)
            fh.write("\n")

    def warn(self, msg):
        log.warning(msg)
        self.warnings.append(msg)

    def finish(self, status="ok", **extra):
        self.manifest.update(extra)
        self.manifest["status"] = status
        self.manifest["partial"] = status != "ok"
        self.manifest["timings"] = {k: round(v, 6) for k, v in self.timings.items()}
        self.manifest["warnings"] = list(self.warnings)
        self.manifest["outputs"] = {f: _sha(self.out / f) for f in sorted(set(self.files))
                                    if (self.out / f).exists()}
        with open(self.out / "manifest.json", "w") as fh:
            json.dump(self.manifest, fh, indent=1, sort_keys=True, default=float)
            fh.write("\n")
        return self.manifest


def _transition_rows(results):
    return [[r.omega, "" if r.lambda_c is None else r.lambda_c, r.tol] for r in results]


def _kgs_rows(results):
    return [[r.omega, lam, kgs, im] for r in results for lam, kgs, im in r.table]


def _prediction_rows(model, names, fixed, omegas, lams, ks):
    rows = []
    for om, lam in itertools.product(omegas, lams):
        vals = {"omega": om, "lambda_ssh": lam}
        vals.update({n: v for n, v in fixed.items() if n not in ("omega",)})
        X = np.column_stack([np.full(len(ks), vals[n]) if n != "k" else ks for n in names])
        mean, var = model.predict(X)
        rows.extend([om, lam, k, m, v] for k, m, v in zip(ks, mean, var))
    return rows


def _solver_transitions(run: _Run, ref: dict, omegas) -> list:
    cfg = run.config
    spec = BasisSpec(int(ref["M"]), int(ref["N"]))
    tol = float(ref.get("tol", 0.005))
    out = []
    for om in ref.get("omega", omegas):
        p = from_dimensionless({"lambda_ssh": 0.0, "lambda_h": cfg.model.get("lambda_h", 0.0)},
                               t=float(cfg.model.get("t", 1.0)), omega=float(om),
                               ring_size=int(cfg.model.get("ring_size", 32)))
        try:
            lam_c = find_lambda_c(p, spec, float(ref["lambda_lo"]), float(ref["lambda_hi"]), tol=tol)
        except BracketError as err:
            run.warn(f"reference omega={om}: {err}")
            lam_c = None
        out.append([float(om), "" if lam_c is None else lam_c, tol])
    return out


def _bandwidth_rows(run: _Run, model, names, fixed, ks):
    bw = run.config.bandwidth
    energy = as_energy_fn(model, names, {n: v for n, v in fixed.items() if n != "omega"})
    rows = []
    for om in bw["omega"]:
        for lam in bw.get("lambda_ssh", [0.5, 1.0, 1.5]):
            curve = surrogate_dispersion(energy, float(om), float(lam), ks)
            ok, margin = bandwidth_check(curve, float(om), tol=float(bw.get("tol", 0.05)))
            rows.append([float(om), float(lam), curve.bandwidth(), margin, int(ok)])
    return rows


def _extrapolate(run: _Run):
    cfg = run.config
    box = cfg.sample_box
    names, fixed = model_inputs(box)
    L = int(cfg.model.get("ring_size", 32))
    design, table = run.stage("generate", generate_dataset, cfg)
    run.csv("design.csv", box.labels, design.tolist())
    table.to_csv(run.path("dataset.csv"))
    for om in table.omitted:
        run.warn(f"omitted design point {om['point']}: {om['reason']}")

    res = run.stage("search", search, table.inputs(names), table.targets, max_depth=cfg.search_depth,
                    restarts=cfg.restarts, seed=cfg.seed)
    gp = res.fitted
    run.json("model.json", gp_to_dict(gp))
    run.json("search_trace.json", res.trace)
    run.manifest["kernel_structure"] = res.structure
    run.manifest["search_trace"] = res.trace
    run.manifest["standardization"] = _std_record(gp, names)

    pred = cfg.predict
    lams = _lambda_grid(pred)
    ks = ring_momenta(L)
    rows = run.stage("predict", _prediction_rows, gp, names, fixed, pred["omega"], lams, ks)
    run.csv("predictions.csv", ("omega", "lambda_ssh", "k", "mean", "variance"), rows)

    other = {n: v for n, v in fixed.items() if n != "omega"}
    trans = run.stage("transitions", surrogate_transition_curve, gp, pred["omega"], lams, ks,
                      tol=float(pred.get("tol", 0.005)), inputs=names, fixed=other)
    run.csv("transitions.csv", ("omega", "lambda_c", "tol"), _transition_rows(trans))
    run.csv("kgs_table.csv", ("omega", "lambda_ssh", "K_GS", "inv_mass"), _kgs_rows(trans))
    summary = {"kernel_structure": res.structure,
               "lambda_c": {f"{r.omega:g}": r.lambda_c for r in trans}}

    if cfg.reference:
        ref_rows = run.stage("reference", _solver_transitions, run, cfg.reference, pred["omega"])
        run.csv("transitions_reference.csv", ("omega", "lambda_c", "tol"), ref_rows)
        summary["lambda_c_reference"] = {f"{r[0]:g}": (r[1] if r[1] != "" else None) for r in ref_rows}

    if cfg.bandwidth:
        bw = run.stage("bandwidth", _bandwidth_rows, run, gp, names, fixed, ks)
        run.csv("bandwidth.csv", ("omega", "lambda_ssh", "bandwidth", "margin", "passed"), bw)
        summary["bandwidth_pass"] = {f"{om:g}": all(r[4] for r in bw if r[0] == om)
                                     for om in dict.fromkeys(r[0] for r in bw)}

    if cfg.robustness:
        rob = run.stage("robustness", _robustness, run, names, other, lams, ks, trans)
        summary["robustness"] = rob
    run.json("summary.json", summary)
    return summary


def _robustness(run: _Run, names, other, lams, ks, base):
    """Re-draw the design with fresh seeds and compare lambda_c across draws."""
    cfg = run.config
    pred = cfg.predict
    per_draw = {r.omega: [r.lambda_c] for r in base}
    rows = [[r.omega, 0, cfg.seed, "" if r.lambda_c is None else r.lambda_c] for r in base]
    for draw in range(1, cfg.robustness + 1):
        seed = cfg.seed + 1000 * draw
        _, table = generate_dataset(cfg, seed=seed)
        res = search(table.inputs(names), table.targets, max_depth=cfg.search_depth, restarts=cfg.restarts,
                     seed=seed)
        trans = surrogate_transition_curve(res.fitted, pred["omega"], lams, ks,
                                           tol=float(pred.get("tol", 0.005)), inputs=names, fixed=other)
        for r in trans:
            per_draw[r.omega].append(r.lambda_c)
            rows.append([r.omega, draw, seed, "" if r.lambda_c is None else r.lambda_c])
    run.csv("robustness.csv", ("omega", "draw", "seed", "lambda_c"), rows)
    spread = {}
    for om, vals in per_draw.items():
        found = [v for v in vals if v is not None]
        spread[f"{om:g}"] = (max(abs(a - b) for a, b in itertools.combinations(found, 2))
                             if len(found) == len(vals) and len(found) > 1 else None)
    return {"draws": cfg.robustness + 1, "max_pairwise_diff": spread}


def _dense_reference(run: _Run, ref: dict, names, fixed, ks):
    cfg = run.config
    lams = np.linspace(float(ref["lambda_lo"]), float(ref["lambda_hi"]), int(ref.get("lambda_count", 13)))
    pts = [[lam, k] for lam in lams for k in ks]
    table = evaluate_points(pts, BasisSpec(int(ref["M"]), int(ref["N"])),
                            lambda_h=float(cfg.model.get("lambda_h", 0.0)), t=float(cfg.model.get("t", 1.0)),
                            ring_size=int(cfg.model.get("ring_size", 32)), workers=cfg.workers, snap=False,
                            columns=("lambda_ssh", "k"), fixed=fixed)
    return table


def _multifid(run: _Run):
    cfg = run.config
    box = cfg.sample_box
    names, fixed = model_inputs(box)
    L = int(cfg.model.get("ring_size", 32))
    datasets = []
    for level, fid in enumerate(cfg.fidelities):
        design, table = run.stage(f"generate_level{level}", generate_dataset, cfg, n_samples=int(fid["n_samples"]),
                                  solver=fid, seed=cfg.seed + level)
        run.csv(f"design_level{level}.csv", box.labels, design.tolist())
        table.to_csv(run.path(f"dataset_level{level}.csv"))
        for om in table.omitted:
            run.warn(f"level {level}: omitted design point {om['point']}: {om['reason']}")
        datasets.append(FidelityDataset(level, table.inputs(names), table.targets, (fid["M"], fid["N"])))

    stack = run.stage("fit_stack", fit_stack, datasets, restarts=cfg.restarts, seed=cfg.seed)
    direct = run.stage("fit_direct", fit, Matern52(len(names)), datasets[-1].inputs, datasets[-1].targets,
                       restarts=cfg.restarts, seed=cfg.seed)
    for level, gp in enumerate(stack.levels):
        run.json(f"model_level{level}.json", gp_to_dict(gp))
    run.json("model_direct.json", gp_to_dict(direct))
    run.manifest["kernel_structure"] = [gp.kernel.structure() for gp in stack.levels]
    run.manifest["standardization"] = [
        _std_record(gp, names if i == 0 else list(names) + ["u"]) for i, gp in enumerate(stack.levels)]

    pred = cfg.predict
    lams = _lambda_grid(pred)
    ks = design_k_grid(box, L)
    omegas = [fixed["omega"]] if "omega" in fixed else list(pred["omega"])
    rows = run.stage("predict", _prediction_rows, stack, names, fixed, omegas, lams, ks)
    run.csv("predictions.csv", ("omega", "lambda_ssh", "k", "mean", "variance"), rows)

    tol = float(pred.get("tol", 0.005))
    low = stack.levels[0]
    models = {"stack": stack, "direct": direct, "low": low}
    summary = {"kernel_structure": run.manifest["kernel_structure"], "lambda_c": {}}
    for label, model in models.items():
        trans = run.stage(f"transitions_{label}", surrogate_transition_curve, model, omegas, lams, ks,
                          tol=tol, inputs=names, fixed={})
        name = "transitions.csv" if label == "stack" else f"transitions_{label}.csv"
        run.csv(name, ("omega", "lambda_c", "tol"), _transition_rows(trans))
        if label == "stack":
            run.csv("kgs_table.csv", ("omega", "lambda_ssh", "K_GS", "inv_mass"), _kgs_rows(trans))
        summary["lambda_c"][label] = {f"{r.omega:g}": r.lambda_c for r in trans}

    if cfg.reference:
        ref = cfg.reference
        ref_rows = run.stage("reference", _solver_transitions, run, ref, omegas)
        run.csv("transitions_reference.csv", ("omega", "lambda_c", "tol"), ref_rows)
        summary["lambda_c"]["reference"] = {f"{r[0]:g}": (r[1] if r[1] != "" else None) for r in ref_rows}
        dense = run.stage("dense_reference", _dense_reference, run, ref, names, fixed, ks)
        dense.to_csv(run.path("dense_reference.csv"))
        X, y = dense.inputs(names), dense.targets
        rmse = {label: float(np.sqrt(np.mean((m.predict(X)[0] - y) ** 2))) for label, m in models.items()}
        run.csv("rmse.csv", ("model", "rmse"), sorted(rmse.items()))
        summary["rmse"] = rmse
    run.json("summary.json", summary)
    return summary


def _scan(run: _Run):
    cfg = run.config
    sc = dict(cfg.scan)
    ladder = [tuple(s) for s in sc.get("ladder", [[cfg.solver["M"], cfg.solver["N"]]])]
    threshold = float(sc.get("threshold", 0.01))
    tol = float(sc.get("tol", 0.005))
    scan_rows, trans_rows, summary = [], [], {"tol": tol, "lambda_c": {}, "ladder": {}}
    for om in sc.get("omega", [4.0]):
        p = from_dimensionless({"lambda_ssh": 0.0, "lambda_h": cfg.model.get("lambda_h", 0.0)},
                               t=float(cfg.model.get("t", 1.0)), omega=float(om),
                               ring_size=int(cfg.model.get("ring_size", 32)))
        history, prev, lam_c, converged = [], None, None, False
        for M, N in ladder:
            trace = []
            lam_c = run.stage(f"scan_omega{om:g}_M{M}N{N}", find_lambda_c, p, BasisSpec(M, N),
                              float(sc["lambda_lo"]), float(sc["lambda_hi"]), tol=tol,
                              k_count=sc.get("k_count"), trace=trace)
            scan_rows.extend([float(om), M, N, lam, kgs, im] for lam, kgs, im in sorted(trace))
            history.append({"M": M, "N": N, "lambda_c": lam_c})
            if prev is not None and abs(lam_c - prev) < threshold:
                converged = True
                break
            prev = lam_c
        if len(ladder) > 1 and not converged:
            run.warn(f"omega={om:g}: lambda_c still moving by >= {threshold} at the top of the ladder")
        trans_rows.append([float(om), lam_c, tol])
        summary["lambda_c"][f"{om:g}"] = lam_c
        summary["ladder"][f"{om:g}"] = {"history": history, "converged": converged}
    run.csv("scan.csv", ("omega", "M", "N", "lambda_ssh", "K_GS", "inv_mass"), scan_rows)
    run.csv("transitions.csv", ("omega", "lambda_c", "tol"), trans_rows)
    run.json("summary.json", summary)
    return summary


def run_experiment(config: ExperimentConfig | dict) -> dict:
    """Run one configured experiment and return its summary (also written to disk)."""
    if isinstance(config, dict):
        config = ExperimentConfig.from_dict(config)
    run = _Run(config)
    summary = {"extrapolate": _extrapolate, "multifid": _multifid, "scan": _scan}[config.kind](run)
    run.finish(summary=summary)
    return summary
