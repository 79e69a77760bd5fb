"""Command line front end: ``python -m setrisk <command> --config run.json``.

Config layout (all numbers may be ints or "p/q" strings)::

    {
      "tree":   {"m": 1, "K": 2, "dt": ["1/4", "1/4"], "probs": [{"-1": "1/2", "1": "1/2"}, ...]},
      "market": {"S0": ["1"], "up": ["2"], "lam": ["1/10"]},
      "payoff": {"kind": "exchange", "receive": 1, "deliver": 0, "ratio": "1", "position": "short"},
      "verify": {"bsdi": true, "svbsde": true, "samples": 200, "seed": 0},
      "out": "out",
      "r": ["1", "1"],
      "directions": [["1", "1"], ["1", "0"]]
    }

Payoff kinds: ``table`` (``values``: the position X itself, one row per
leaf), ``basket_put`` (``strike``, optional ``weights``) and ``exchange``.
For the generated claims ``position`` chooses between the seller's
position ``-claim`` ("short", default) and the holder's ("long").

Exit codes: 0 success, 1 verification failure, 2 usage or config error.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

from setrisk import bsdi, dd, payoffs, svbsde
from setrisk._rational import q, to_str
from setrisk.errors import ConfigError, UnsupportedDimension
from setrisk.market import Market, MarketSpec
from setrisk.polytope import UpperPoly, set_eq
from setrisk.predictable import AdaptedVector
from setrisk.riskmeasure import RiskEngine
from setrisk.tree import Tree, TreeSpec, build_tree, increment_indices


@dataclass
class RunConfig:
    raw: dict
    tree: Tree
    market: Market
    engine: RiskEngine
    X: AdaptedVector
    payoff_id: str
    verify: dict
    out: str
    r: tuple
    directions: list


def _tree_spec(section: dict) -> TreeSpec:
    if not isinstance(section, dict):
        raise ConfigError("missing 'tree' section")
    probs = section.get("probs") or ()
    tables = []
    for table in probs:
        tables.append({tuple(int(s) for s in str(key).split(",")): p for key, p in table.items()})
    try:
        return TreeSpec(m=section["m"], K=section["K"], dt=tuple(section.get("dt", ())), probs=tuple(tables))
    except KeyError as exc:
        raise ConfigError(f"tree section lacks {exc}") from None


def _payoff(section: dict, tree, market) -> tuple[AdaptedVector, str]:
    if not isinstance(section, dict) or "kind" not in section:
        raise ConfigError("missing 'payoff' section with a 'kind'")
    kind = section["kind"]
    if kind == "table":
        return payoffs.table(tree, section.get("values", []), market.d), "table"
    if kind == "basket_put":
        if "strike" not in section:
            raise ConfigError("basket_put needs a strike")
        claim = payoffs.basket_put(tree, market, section["strike"], section.get("weights"))
    elif kind == "exchange":
        claim = payoffs.exchange(tree, market, section.get("receive", 1), section.get("deliver", 0),
                                 section.get("ratio", 1))
    else:
        raise ConfigError(f"unknown payoff kind {kind!r}")
    position = section.get("position", "short")
    if position not in ("short", "long"):
        raise ConfigError("payoff position must be 'short' or 'long'")
    return (-claim if position == "short" else claim), f"{kind}_{position}"


def load_config(data: dict, out: str | None = None) -> RunConfig:
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    tree = build_tree(_tree_spec(data.get("tree")))
    msec = data.get("market")
    if not isinstance(msec, dict):
        raise ConfigError("missing 'market' section")
    try:
        mspec = MarketSpec(S0=tuple(msec["S0"]), up=tuple(msec["up"]), lam=tuple(msec["lam"]))
    except KeyError as exc:
        raise ConfigError(f"market section lacks {exc}") from None
    market = Market(tree, mspec)
    X, pid = _payoff(data.get("payoff"), tree, market)
    verify = {"bsdi": True, "svbsde": True, "samples": 200, "seed": 0}
    verify.update(data.get("verify") or {})
    r = tuple(q(v) for v in data.get("r") or [1] * market.d)
    if len(r) != market.d or any(v <= 0 for v in r):
        raise ConfigError("r must have d strictly positive entries")
    dirs = data.get("directions")
    if dirs is None:
        dirs = [[1] * market.d] + [[1 if i == j else 0 for i in range(market.d)] for j in range(market.d)]
    directions = [tuple(q(v) for v in w) for w in dirs]
    if any(len(w) != market.d or any(v < 0 for v in w) or not any(w) for w in directions):
        raise ConfigError("directions must be nonzero nonnegative d-vectors")
    return RunConfig(data, tree, market, RiskEngine.superhedging(tree, market), X, pid, verify,
                     out or data.get("out") or "out", r, directions)


def _write_json(path: str, obj) -> None:
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=1, sort_keys=True)
        fh.write("\n")


def _num(v) -> str:
    if v == float("inf"):
        return "inf"
    if v == float("-inf"):
        return "-inf"
    return to_str(v)


def _path_json(node) -> list:
    return [list(b) for b in node.path]


# -- risk ----------------------------------------------------------------------


def cmd_risk(cfg: RunConfig) -> int:
    os.makedirs(cfg.out, exist_ok=True)
    t0 = time.perf_counter()
    risk = cfg.engine.full_risk(cfg.X, cfg.payoff_id)
    elapsed = time.perf_counter() - t0
    tree = cfg.tree
    summary = {"payoff": cfg.payoff_id, "d": cfg.market.d, "m": tree.m, "K": tree.K, "levels": []}
    for k in range(tree.K + 1):
        nodes = tree.nodes(k)
        sets = [risk.at(n) for n in nodes]
        _write_json(os.path.join(cfg.out, f"risk_level_{k}.json"), {
            "level": k,
            "dim": cfg.market.d,
            "nodes": [{"node": n.id, "path": _path_json(n), "set": s.to_json()} for n, s in zip(nodes, sets)],
        })
        summary["levels"].append({
            "level": k,
            "nodes": len(nodes),
            "empty_nodes": sum(s.empty for s in sets),
            "vertices": sum(len(s.vertices) for s in sets if not s.empty),
            "facets": sum(len(s.hrep) for s in sets),
        })
    with open(os.path.join(cfg.out, "scalarizations.csv"), "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["level", "node", "w", "value"])
        for k in range(tree.K + 1):
            for w in cfg.directions:
                values = cfg.engine.scalarize(risk.levels[k], w)
                for n, v in zip(tree.nodes(k), values):
                    writer.writerow([k, n.id, " ".join(to_str(x) for x in w), _num(v)])
    _write_json(os.path.join(cfg.out, "summary.json"), summary)
    # timings vary between runs, so they live apart from the reproducible files
    _write_json(os.path.join(cfg.out, "timings.json"), {"full_risk_seconds": round(elapsed, 6)})
    return 0


# -- driver ----------------------------------------------------------------------


def parse_z(text: str | None, tree: Tree, d: int) -> dict:
    """``{"1": [...], "2": [...], "12": [...]}``; missing indices default to 0."""
    raw = json.loads(text) if text else {}
    if not isinstance(raw, dict):
        raise ConfigError("z must be a JSON object keyed by increment index")
    z = {}
    valid = {"".join(map(str, I)): I for I in increment_indices(tree.m)}
    for key in raw:
        if key not in valid:
            raise ConfigError(f"unknown increment index {key!r}; expected one of {sorted(valid)}")
    for key, I in valid.items():
        vec = raw.get(key, [0] * d)
        if not isinstance(vec, list) or len(vec) != d:
            raise ConfigError(f"z[{key}] must be a list of {d} numbers")
        try:
            z[I] = tuple(q(v) for v in vec)
        except (TypeError, ValueError, ZeroDivisionError) as exc:
            raise ConfigError(f"z[{key}]: {exc}") from None
    return z


def cmd_driver(cfg: RunConfig, t: int, z: dict) -> int:
    tree = cfg.tree
    if not 0 <= t < tree.K:
        raise ConfigError(f"driver time must satisfy 0 <= t < K = {tree.K}")
    os.makedirs(cfg.out, exist_ok=True)
    nodes = tree.nodes(t)
    out = {
        "t": t,
        "z": {"".join(map(str, I)): [to_str(v) for v in vec] for I, vec in z.items()},
        "nodes": [{"node": n.id, "path": _path_json(n), "driver": bsdi.driver_local(cfg.engine, n, z).to_json()}
                  for n in nodes],
        "closed_form": None,
    }
    status = 0
    if tree.K == 2:
        verdict = bsdi.closed_form_verdict(cfg.engine, t, z)
        out["closed_form"] = verdict
        if not all(v["member"] for v in verdict):
            status = 1
    _write_json(os.path.join(cfg.out, f"driver_t{t}.json"), out)
    return status


# -- verify ----------------------------------------------------------------------


def _bsdi_level(raw: dict, k: int, samples: int, seed: int) -> dict:
    cfg = load_config(raw)
    engine = cfg.engine
    paths = bsdi.sample_paths(engine, cfg.X, 1, seed=seed + k)
    if not paths:
        return {"step": k, "ok": False, "error": "empty risk set, no selector paths"}
    return bsdi.reachable_equivalence(engine, paths[0].Y[k], samples=samples, seed=seed + k)


def verify_bsdi(cfg: RunConfig, samples: int, seed: int, workers: int = 1) -> dict:
    tree = cfg.tree
    levels = list(range(tree.K, 0, -1))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            reports = list(pool.map(_bsdi_level, [cfg.raw] * len(levels), levels,
                                    [samples] * len(levels), [seed] * len(levels)))
    else:
        reports = [_bsdi_level(cfg.raw, k, samples, seed) for k in levels]
    n_paths = max(1, min(samples // 20, 10))
    paths = bsdi.sample_paths(cfg.engine, cfg.X, n_paths, seed=seed)
    vertex_path = bsdi.sample_paths(cfg.engine, cfg.X, 1, seed=seed, vertex_minimal=True)
    path_reports = []
    for i, path in enumerate(vertex_path + paths):
        fails = bsdi.multistep_inclusion(cfg.engine, path)
        first = next((c.first_failure for c in path.certificates if not c.ok), None)
        path_reports.append({"path": i, "vertex_minimal": i == 0, "certified": path.certified,
                             "multistep_failures": fails, "first_failure": first})
    multi = bsdi.multistep_equivalence(cfg.engine, cfg.X, samples=n_paths, seed=seed)
    ok = (all(r.get("ok") for r in reports) and bool(path_reports)
          and all(p["certified"] and not p["multistep_failures"] for p in path_reports) and multi["ok"])
    return {"ok": ok, "seed": seed, "samples": samples, "reachable": reports, "paths": path_reports,
            "multistep": multi}


def verify_svbsde(cfg: RunConfig) -> dict:
    risk = cfg.engine.full_risk(cfg.X)
    ident, back = [], []
    for k in range(cfg.tree.K, 0, -1):
        ident.append(svbsde.intersection_identity(cfg.engine, cfg.X, k, risk=risk))
        back.append(svbsde.svbsde_backstep(cfg.engine, cfg.X, k, cfg.r, risk=risk)[1])
    ok = all(r["ok"] for r in ident) and all(r["ok"] for r in back)
    return {"ok": ok, "r": [to_str(v) for v in cfg.r], "intersection_identity": ident, "backstep": back}


def verify_replay(cfg: RunConfig, directory: str) -> dict:
    """Compare stored ``risk_level_{k}.json`` files with a fresh computation."""
    risk = cfg.engine.full_risk(cfg.X)
    report = {"ok": True, "mismatches": []}
    for k in range(cfg.tree.K + 1):
        path = os.path.join(directory, f"risk_level_{k}.json")
        try:
            with open(path) as fh:
                data = json.load(fh)
        except FileNotFoundError:
            raise ConfigError(f"replay file {path} is missing") from None
        for entry, n in zip(data["nodes"], cfg.tree.nodes(k)):
            stored = UpperPoly.from_json(entry["set"], data["dim"])
            if not set_eq(stored, risk.at(n)):
                report["ok"] = False
                report["mismatches"].append({"level": k, "node": n.id, "stored": entry["set"],
                                             "engine": risk.at(n).to_json()})
    return report


def cmd_verify(cfg: RunConfig, target: str, samples: int, seed: int, workers: int = 1,
               replay: str | None = None) -> int:
    os.makedirs(cfg.out, exist_ok=True)
    ok = True
    run_bsdi = target == "bsdi" or (target == "all" and cfg.verify.get("bsdi", True))
    run_sv = target == "svbsde" or (target == "all" and cfg.verify.get("svbsde", True))
    if replay:
        rep = verify_replay(cfg, replay)
        _write_json(os.path.join(cfg.out, "verify_replay.json"), rep)
        ok = ok and rep["ok"]
    if run_bsdi:
        rep = verify_bsdi(cfg, samples, seed, workers)
        _write_json(os.path.join(cfg.out, "verify_bsdi.json"), rep)
        ok = ok and rep["ok"]
    if run_sv:
        rep = verify_svbsde(cfg)
        _write_json(os.path.join(cfg.out, "verify_svbsde.json"), rep)
        ok = ok and rep["ok"]
    return 0 if ok else 1


# -- plot data --------------------------------------------------------------------


def cmd_plotdata(cfg: RunConfig, level: int) -> int:
    d = cfg.market.d
    if d not in (2, 3):
        raise UnsupportedDimension(f"plot data is emitted for d in {{2, 3}}, got d = {d}")
    if not 0 <= level <= cfg.tree.K:
        raise ConfigError(f"level must lie in 0..{cfg.tree.K}")
    os.makedirs(cfg.out, exist_ok=True)
    risk = cfg.engine.full_risk(cfg.X)
    with open(os.path.join(cfg.out, f"plot_level_{level}.csv"), "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["level", "node", "kind"] + [f"x{i}" for i in range(d)])
        for n in cfg.tree.nodes(level):
            s = risk.at(n)
            if s.empty:
                writer.writerow([level, n.id, "empty"] + [""] * d)
                continue
            for v in s.vertices:
                writer.writerow([level, n.id, "vertex"] + [to_str(x) for x in v])
            for r in s.rays:
                writer.writerow([level, n.id, "ray"] + [to_str(x) for x in r])
    return 0


# -- entry point ------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, help="JSON run configuration")
    common.add_argument("--out", help="output directory (overrides the config)")
    common.add_argument("--seed", type=int, help="seed for sampled verification")
    common.add_argument("--samples", type=int, help="number of converse-direction samples")
    common.add_argument("--workers", type=int, default=1, help="worker processes for per-level checks")
    common.add_argument("--max-dim", type=int, help="largest dimension the polyhedral kernel accepts")
    parser = argparse.ArgumentParser(prog="setrisk", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("risk", parents=[common], help="compute the risk sets of every level")
    p = sub.add_parser("driver", parents=[common], help="evaluate the local driver at one time")
    p.add_argument("--t", type=int, required=True)
    p.add_argument("--z", help='JSON object, e.g. {"1": ["1", "0"]}')
    p = sub.add_parser("verify", parents=[common], help="certify the backward representations")
    p.add_argument("target", nargs="?", choices=["bsdi", "svbsde", "all"], default="all")
    p.add_argument("--replay", help="directory of risk_level_k.json files to check against the engine")
    p = sub.add_parser("plotdata", parents=[common], help="vertex and ray CSV for plotting")
    p.add_argument("--level", type=int, required=True)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.max_dim is not None:
            dd.set_max_dim(args.max_dim)
        if args.workers < 1:
            raise ConfigError("--workers must be at least 1")
        try:
            with open(args.config) as fh:
                raw = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config: {exc}") from None
        cfg = load_config(raw, args.out)
        if args.command == "risk":
            return cmd_risk(cfg)
        if args.command == "driver":
            return cmd_driver(cfg, args.t, parse_z(args.z, cfg.tree, cfg.market.d))
        if args.command == "verify":
            samples = args.samples if args.samples is not None else int(cfg.verify.get("samples", 200))
            seed = args.seed if args.seed is not None else int(cfg.verify.get("seed", 0))
            return cmd_verify(cfg, args.target, samples, seed, args.workers, args.replay)
        return cmd_plotdata(cfg, args.level)
    except (ValueError, TypeError) as exc:
        # ConfigError, DomainError and UnsupportedDimension are ValueErrors
        print(f"setrisk: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
