"""Command-line entry point: parse / slack / check / run.

``run`` executes a JSON-configured experiment: an N sweep over a set of
truncation methods for one task (stationary, transient, mfpt, survival,
or compare), writing one CSV per (method, N, task) plus summary.json and
a manifest.json index.  Identical configs and seeds produce byte-identical
outputs.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .alttrunc import Rectangle, build_finite_buffer, build_fsp, build_sfsp
from .certify import (
    Inconclusive,
    NewtonNonConvergence,
    find_complex_balance,
    lyapunov_certificate,
)
from .dsl import DslError, parse_network
from .exports import (
    write_curve_csv,
    write_distribution_csv,
    write_generator_mtx,
    write_heatmap_csv,
    write_json,
)
from .network import NetworkError, build_matrices, deficiency, weak_reversibility
from .slack import (
    SlackMode,
    build_optimized_slack,
    build_regular_slack,
    suggest_conservation_vector,
)
from .solver import NonAccessibleTarget, SolverError, mfpt, stationary, survival, transient
from .ssa import estimate_mfpt
from .statespace import build_generator, communication_classes, enumerate_states

METHODS = ("slack-regular", "slack-optimized", "fsp", "sfsp", "buffer")


def _fail(message: str):
    print(f"error: {message}", file=sys.stderr)
    raise SystemExit(2)


def _load_network(path):
    try:
        return parse_network(Path(path).read_text())
    except FileNotFoundError:
        _fail(f"network file not found: {path}")
    except DslError as exc:
        _fail(f"{path}: {exc}")


def _parse_vector(text):
    return [int(v) for v in str(text).replace(",", " ").split()]


def make_target(spec, net):
    """Target-set description -> predicate over states.

    Forms: {"states": [[..], ..]}, {"any_zero": ["A", ..]},
    {"all_greater": {"X": 30, ..}} (strict), {"all_leq": {...}}.
    """
    if "states" in spec:
        keys = {tuple(int(v) for v in s) for s in spec["states"]}
        return lambda x: tuple(int(v) for v in x) in keys
    if "any_zero" in spec:
        idx = [net.species_index(n) for n in spec["any_zero"]]
        return lambda x: any(x[i] == 0 for i in idx)
    if "all_greater" in spec:
        pairs = [(net.species_index(n), v) for n, v in sorted(spec["all_greater"].items())]
        return lambda x: all(x[i] > v for i, v in pairs)
    if "all_leq" in spec:
        pairs = [(net.species_index(n), v) for n, v in sorted(spec["all_leq"].items())]
        return lambda x: all(x[i] <= v for i, v in pairs)
    raise NetworkError(f"unrecognized target spec: {spec}")


def _build_method(method, net, W, N, x0, cfg):
    """Generator for one truncation method at bound N."""
    if method == "slack-regular":
        snet = build_regular_slack(net, W, [N] * len(W), u=cfg.get("u"))
        space = enumerate_states(snet, x0=x0)
        return build_generator(space, snet), snet
    if method == "slack-optimized":
        snet = build_optimized_slack(net, W, [N] * len(W))
        space = enumerate_states(snet, x0=x0)
        return build_generator(space, snet), snet
    if method == "buffer":
        return build_finite_buffer(net, W, [N] * len(W), x0=x0), None
    if method == "fsp":
        region = Rectangle(bounds=tuple([N] * net.n_species))
        return build_fsp(net, region, x0=x0), None
    if method == "sfsp":
        region = Rectangle(bounds=tuple([N] * net.n_species))
        x_star = tuple(cfg.get("sfsp_return_state", [0] * net.n_species))
        return build_sfsp(net, region, x_star, x0=x0), None
    raise NetworkError(f"unknown method: {method}")


def cmd_parse(args):
    net = _load_network(args.network)
    mats = build_matrices(net)
    print(f"species ({net.n_species}): {', '.join(net.species_names())}")
    print(f"complexes ({net.n_complexes}): "
          + ", ".join(net.format_complex(c) for c in range(net.n_complexes)))
    print(f"reactions ({net.n_reactions}):")
    for r in net.reactions:
        print(f"  {net.format_complex(r.reactant)} -> {net.format_complex(r.product)}"
              f" @ {r.rate_constant!r}")
    if args.matrices:
        write_json(args.matrices, mats.to_json_dict())
        print(f"wrote {args.matrices}")
    return 0


def cmd_slack(args):
    net = _load_network(args.network)
    W = [_parse_vector(args.w)]
    N = [args.n]
    if args.mode == "optimized":
        snet = build_optimized_slack(net, W, N)
    else:
        snet = build_regular_slack(net, W, N, u=[args.u] if args.u is not None else None)
    print(f"mode: {snet.mode.value}")
    print(f"u: {snet.spec.u.tolist()}")
    print(f"D (slack coefficients per complex): {snet.D.tolist()}")
    mat = snet.to_network()
    print("slack network:")
    for r in mat.reactions:
        print(f"  {mat.format_complex(r.reactant)} -> {mat.format_complex(r.product)}"
              f" @ {r.rate_constant!r}")
    if args.out:
        payload = {
            "mode": snet.mode.value,
            "W": snet.spec.W.tolist(),
            "N": snet.spec.N.tolist(),
            "u": snet.spec.u.tolist(),
            "D": snet.D.tolist(),
            "reactant_slack": snet.reactant_slack.tolist(),
            "product_slack": snet.product_slack.tolist(),
        }
        write_json(args.out, payload)
        print(f"wrote {args.out}")
    return 0


def cmd_check(args):
    net = _load_network(args.network)
    report = {
        "species": net.species_names(),
        "weakly_reversible": None,
        "deficiency": None,
        "linkage_classes": None,
        "complex_balance": None,
        "lyapunov": None,
    }
    wr = weak_reversibility(net)
    report["weakly_reversible"] = wr.is_weakly_reversible
    report["linkage_classes"] = [list(c) for c in wr.linkage_classes]
    report["deficiency"] = deficiency(net)
    try:
        cert = find_complex_balance(net)
        report["complex_balance"] = cert.to_json_dict() if cert else None
    except NewtonNonConvergence as exc:
        report["complex_balance"] = {"error": str(exc)}
    w = _parse_vector(args.w) if args.w else None
    if w is None:
        try:
            w = suggest_conservation_vector(net).tolist()
        except NetworkError:
            w = None
    if w is not None:
        x0 = _parse_vector(args.x0) if args.x0 else None
        cert = lyapunov_certificate(net, w, x0=x0)
        if isinstance(cert, Inconclusive):
            report["lyapunov"] = {"w": list(w), "inconclusive": cert.reason}
        else:
            report["lyapunov"] = cert.to_json_dict()
    text = json.dumps(report, indent=2, sort_keys=True)
    print(text)
    if args.out:
        Path(args.out).write_text(text + "\n")
    return 0


def _config_hash(cfg) -> str:
    return hashlib.sha256(json.dumps(cfg, sort_keys=True).encode()).hexdigest()


def _run_task(task, gen, net, snet, cfg, target, x0):
    kind = task["kind"]
    names = net.species_names()
    if kind == "stationary":
        dist = stationary(gen)
        return {"residual": dist.residual}, ("distribution", dist, names)
    if kind == "transient":
        t = float(task["t"])
        p0 = np.zeros(gen.dim)
        p0[gen.state_index(x0)] = 1.0
        p = transient(gen, p0, t)
        return {"t": t, "mass": float(p.sum())}, ("vector", p, names)
    if kind == "mfpt":
        res = mfpt(gen, target, x0)
        return {"mean_fpt": res.mean, "residual": res.residual}, None
    if kind == "survival":
        grid = np.asarray(task["grid"], dtype=np.float64)
        res = survival(gen, target, x0, grid)
        return {"mean_fpt": res.mean}, ("curve", res.survival, None)
    if kind == "compare":
        res = mfpt(gen, target, x0)
        return {"mean_fpt": res.mean, "residual": res.residual}, None
    raise NetworkError(f"unknown task kind: {kind}")


def cmd_run(args):
    cfg = json.loads(Path(args.config).read_text()) if args.config else {}
    # Flag overrides.
    if args.network:
        cfg["network"] = args.network
    if args.task:
        cfg.setdefault("task", {})["kind"] = args.task
    if args.N:
        cfg["N_sweep"] = [int(v) for v in args.N.split(",")]
    if args.method:
        cfg["methods"] = args.method.split(",")
    if args.seed is not None:
        cfg.setdefault("ssa", {})["seed"] = args.seed
    if args.out:
        cfg["out"] = args.out

    for key in ("network", "conservation", "N_sweep", "task", "out"):
        if key not in cfg:
            _fail(f"config field missing: {key}")
    sweep = cfg["N_sweep"]
    if any(b <= a for a, b in zip(sweep, sweep[1:])):
        _fail("N_sweep must be strictly increasing")

    net = _load_network(cfg["network"])
    conservation = cfg["conservation"]
    W = [list(map(int, row)) for row in conservation["W"]]
    if len(W) != 1:
        _fail("the experiment runner sweeps a single conservation row")
    methods = cfg.get("methods", ["slack-regular"])
    for m in methods:
        if m not in METHODS:
            _fail(f"unknown method {m!r}; choose from {METHODS}")
    task = cfg["task"]
    x0 = tuple(cfg.get("x0", [0] * net.n_species))
    if any(np.asarray(W) @ np.asarray(x0) > sweep[0]):
        _fail("x0 violates the bound at the smallest N")
    target = make_target(task["target"], net) if "target" in task else None

    outdir = Path(cfg["out"])
    outdir.mkdir(parents=True, exist_ok=True)
    method_cfg = {
        "u": conservation.get("u"),
        "sfsp_return_state": cfg.get("sfsp_return_state"),
    }
    if method_cfg["sfsp_return_state"] is None:
        method_cfg.pop("sfsp_return_state")

    rows = []
    files = []
    failures = 0
    for method in methods:
        for N in sweep:
            label = f"{task['kind']}_{method}_N{N}"
            entry = {"method": method, "N": N, "task": task["kind"]}
            try:
                gen, snet = _build_method(method, net, W, N, x0, method_cfg)
                classes = communication_classes(gen, root=x0)
                absorbing = [
                    gen.space.states[c.members[0]].tolist()
                    for c in classes
                    if c.absorbing and gen.sink != c.members[0]
                ]
                if absorbing:
                    entry["finding"] = f"absorbing state {absorbing[0]}"
                scalars, payload = _run_task(task, gen, net, snet, cfg, target, x0)
                entry.update(scalars)
                if payload is not None:
                    kind = payload[0]
                    path = outdir / f"{label}.csv"
                    if kind == "distribution":
                        write_distribution_csv(path, payload[1], payload[2])
                    elif kind == "vector":
                        vec = payload[1]
                        space = gen.space
                        lines = [",".join(list(payload[2]) + ["probability"])]
                        for state, p in zip(space.states, vec[: len(space)]):
                            lines.append(",".join([str(int(v)) for v in state] + [repr(float(p))]))
                        if gen.sink is not None:
                            pad = [""] * (len(payload[2]) - 1)
                            lines.append(",".join(["sink"] + pad + [repr(float(vec[gen.sink]))]))
                        path.write_text("\n".join(lines) + "\n")
                    elif kind == "curve":
                        write_curve_csv(path, payload[1][0], payload[1][1])
                    files.append(path.name)
                if task["kind"] in ("mfpt", "compare"):
                    path = outdir / f"{label}.json"
                    write_json(path, {k: entry[k] for k in ("mean_fpt", "residual") if k in entry})
                    files.append(path.name)
                if cfg.get("export_generator"):
                    path = outdir / f"generator_{method}_N{N}.mtx"
                    write_generator_mtx(path, gen)
                    files.append(path.name)
                entry["status"] = "ok"
            except NonAccessibleTarget as exc:
                entry["status"] = "finding"
                prior = entry.get("finding")
                entry["finding"] = f"{prior}; {exc}" if prior else str(exc)
            except (SolverError, NetworkError) as exc:
                entry["status"] = "error"
                entry["error"] = str(exc)
                failures += 1
            rows.append(entry)

    ssa_cfg = cfg.get("ssa")
    if ssa_cfg and task["kind"] in ("mfpt", "compare") and target is not None:
        est = estimate_mfpt(
            net, x0, target,
            n=int(ssa_cfg.get("samples", 10000)),
            seed=int(ssa_cfg.get("seed", 0)),
            t_cap=ssa_cfg.get("cap"),
        )
        rows.append({
            "method": "ssa-reference", "N": None, "task": task["kind"],
            "mean_fpt": est.mean, "stderr": est.stderr,
            "n_hit": est.n_hit, "n_censored": est.n_censored, "status": "ok",
        })

    # Sweep CSV: one row per (method, N).
    sweep_path = outdir / f"{task['kind']}_sweep.csv"
    keys = ["method", "N", "task", "mean_fpt", "stderr", "residual", "status", "finding", "error"]

    def cell(v):
        if v is None:
            return ""
        text = repr(v) if isinstance(v, float) else str(v)
        return f'"{text}"' if "," in text else text

    lines = [",".join(keys)]
    for entry in rows:
        lines.append(",".join(cell(entry.get(k)) for k in keys))
    sweep_path.write_text("\n".join(lines) + "\n")
    files.append(sweep_path.name)

    summary = {
        "version": __version__,
        "config_hash": _config_hash(cfg),
        "results": rows,
    }
    write_json(outdir / "summary.json", summary)
    write_json(outdir / "manifest.json", {"files": sorted(set(files + ["summary.json"]))})
    print(f"wrote {len(set(files)) + 2} files to {outdir}")
    return 1 if failures else 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="slackcme",
        description="Slack-reactant truncation toolkit for stochastic reaction networks",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("parse", help="parse a network file and print its structure")
    p.add_argument("--network", required=True)
    p.add_argument("--matrices", help="write S, C, Gamma as JSON to this path")
    p.set_defaults(func=cmd_parse)

    p = sub.add_parser("slack", help="construct a slack network from conservation bounds")
    p.add_argument("--network", required=True)
    p.add_argument("--w", required=True, help="conservation vector, e.g. '1,2'")
    p.add_argument("--n", required=True, type=int, help="conservation bound")
    p.add_argument("--u", type=int, help="complex offset (default: least intrusive)")
    p.add_argument("--mode", choices=["regular", "optimized"], default="regular")
    p.add_argument("--out", help="write the construction as JSON")
    p.set_defaults(func=cmd_slack)

    p = sub.add_parser("check", help="structural report: reversibility, deficiency, certificates")
    p.add_argument("--network", required=True)
    p.add_argument("--w", help="weight vector for the drift certificate")
    p.add_argument("--x0", help="initial state pinning conservation levels")
    p.add_argument("--out", help="also write the JSON report here")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("run", help="run a configured experiment sweep")
    p.add_argument("--config", help="experiment config JSON")
    p.add_argument("--network")
    p.add_argument("--task")
    p.add_argument("--N", help="comma-separated N sweep override")
    p.add_argument("--method", help="comma-separated method list override")
    p.add_argument("--seed", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_run)

    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (NetworkError, DslError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
