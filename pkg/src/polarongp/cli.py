"""Command-line entry point: ``polarongp <subcommand> --config cfg.json [--set key=value ...]``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .gp import gp_to_dict
from .harness import DataTable, ExperimentConfig, ExperimentError, PRESETS, apply_overrides, generate_dataset
from .harness.data import write_csv
from .harness.experiments import code_version, run_experiment
from .kernelsearch import search
from .model import params_from_dict
from .solver import BasisSpec, BracketError, dispersion, find_lambda_c

log = logging.getLogger("polarongp")


def _load(args) -> dict:
    cfg = {}
    if getattr(args, "preset", None):
        cfg = json.loads(json.dumps(PRESETS[args.preset]))
    if args.config:
        with open(args.config) as fh:
            cfg.update(json.load(fh))
    cfg = apply_overrides(cfg, args.set)
    if args.seed is not None:
        cfg["seed"] = args.seed
    if args.workers is not None:
        cfg["workers"] = args.workers
    if args.out_dir is not None:
        cfg["out_dir"] = args.out_dir
    return cfg


def _out_dir(cfg) -> Path:
    out = Path(cfg.get("out_dir", "."))
    out.mkdir(parents=True, exist_ok=True)
    return out


def _dump(path: Path, obj) -> None:
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=1, sort_keys=True)
        fh.write("\n")


def cmd_solve(cfg) -> int:
    p = params_from_dict(cfg)
    curve = dispersion(p, BasisSpec(int(cfg.get("M", 2)), int(cfg.get("N", 4))), k_count=cfg.get("k_count"))
    path = _out_dir(cfg) / "dispersion.csv"
    write_csv(path, ("k", "E_P"), zip(curve.k_grid, curve.energies))
    print(path)
    return 0


def cmd_scan(cfg) -> int:
    p = params_from_dict({**cfg, "lambda_ssh": 0.0})
    trace = []
    tol = float(cfg.get("tol", 0.005))
    try:
        lam_c = find_lambda_c(p, BasisSpec(int(cfg.get("M", 2)), int(cfg.get("N", 4))),
                              float(cfg["lambda_lo"]), float(cfg["lambda_hi"]), tol=tol,
                              k_count=cfg.get("k_count"), trace=trace)
    except BracketError as err:
        log.warning("%s", err)
        lam_c = None
    out = _out_dir(cfg)
    write_csv(out / "scan.csv", ("lambda_ssh", "K_GS", "inv_mass"), sorted(trace))
    _dump(out / "scan.json", {"lambda_c": lam_c, "tol": tol})
    print(json.dumps({"lambda_c": lam_c, "tol": tol}))
    return 0 if lam_c is not None else 3


def cmd_sample(cfg) -> int:
    config = ExperimentConfig.from_dict(cfg)
    design, table = generate_dataset(config)
    out = _out_dir(cfg)
    write_csv(out / "design.csv", config.sample_box.labels, design.tolist())
    table.to_csv(out / "dataset.csv")
    _dump(out / "sample_manifest.json", {"config": config.to_dict(), "code_version": code_version(),
                                         "seed": config.seed, "provenance": table.provenance,
                                         "omitted": table.omitted})
    print(out / "dataset.csv")
    return 0


def cmd_train(cfg) -> int:
    if "dataset" not in cfg:
        raise ValueError("train needs a 'dataset' CSV path in the config")
    table = DataTable.from_csv(cfg["dataset"])
    names = tuple(cfg.get("inputs", ("omega", "lambda_ssh", "k")))
    res = search(table.inputs(names), table.targets, max_depth=int(cfg.get("search_depth", 2)),
                 restarts=int(cfg.get("restarts", 4)), seed=int(cfg.get("seed", 0)))
    out = _out_dir(cfg)
    _dump(out / "model.json", {**gp_to_dict(res.fitted), "input_names": list(names)})
    _dump(out / "search_trace.json", res.trace)
    print(res.structure)
    return 0


def _experiment(kind):
    def run(cfg) -> int:
        cfg.setdefault("kind", kind)
        if cfg["kind"] != kind:
            raise ValueError(f"config kind {cfg['kind']!r} does not match subcommand {kind!r}")
        summary = run_experiment(ExperimentConfig.from_dict(cfg))
        print(json.dumps(summary, sort_keys=True, default=str))
        return 0
    return run


COMMANDS = {
    "solve": (cmd_solve, "dispersion E_P(k) for one parameter set"),
    "scan": (cmd_scan, "lambda sweep and bisection for the K_GS transition"),
    "sample": (cmd_sample, "LHS design plus solver energies"),
    "train": (cmd_train, "kernel search on a dataset CSV"),
    "extrapolate": (_experiment("extrapolate"), "full single-fidelity extrapolation run"),
    "multifid": (_experiment("multifid"), "full multi-fidelity run"),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="polarongp", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, help_text) in COMMANDS.items():
        sp = sub.add_parser(name, help=help_text)
        sp.add_argument("--config", help="JSON config file")
        sp.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                        help="override a config field; dotted keys, JSON values")
        sp.add_argument("--seed", type=int)
        sp.add_argument("--workers", type=int)
        sp.add_argument("--out-dir")
        if name in ("extrapolate", "multifid", "sample"):
            sp.add_argument("--preset", choices=sorted(PRESETS), help="start from a named configuration")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = _load(args)
        return COMMANDS[args.command][0](cfg)
    except (ValueError, KeyError, FileNotFoundError, json.JSONDecodeError) as err:
        print(f"polarongp {args.command}: {err}", file=sys.stderr)
        return 2
    except ExperimentError as err:
        print(f"polarongp {args.command}: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
