"""Command-line front end.

Instance files are JSON documents ``{"network": {...}, "p1": [points], "k": int}``.
Results go to stdout as canonical JSON (or TSV for ``verify``); with
``--out DIR`` they are also written to files next to a run manifest.

Exit codes: 0 ok, 1 a verification check failed, 2 unreadable input,
3 search cap exceeded, 4 nothing to plot.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import List, Optional, Sequence

from .approx import approx_best_response
from .hardness import (
    SimpleGraph,
    brute_force_dominating_set,
    extract_dominating_set,
    parse_edge_list,
    reduce_dominating_set,
)
from .network import (
    Vertex,
    WeightedNetwork,
    distance,
    format_fraction,
    network_from_json,
    point_from_json,
    point_to_json,
    total_weight,
)
from .oracle import DEFAULT_CAP, SearchTooLarge, best_response_exact, continuous_probe
from .p1_partition import p1_safe_placement
from .plotting import PlotError, interval_table, render_zones
from .tree_solver import solve_tree
from .zones import P2, Placement, candidate_set, compute_zones, zone_report_to_json

EXIT_OK, EXIT_CHECK, EXIT_PARSE, EXIT_CAP, EXIT_PLOT = 0, 1, 2, 3, 4


class InputError(ValueError):
    pass


@dataclass
class Instance:
    net: WeightedNetwork
    F: List
    k: int
    S: List = field(default_factory=list)
    general: bool = False
    raw: dict = field(default_factory=dict)


@dataclass
class RunManifest:
    command: str
    input_sha256: str
    options: dict
    outputs: List[str]


def _dumps(doc) -> str:
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def _read_bytes(path: str) -> bytes:
    try:
        return Path(path).read_bytes()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc


def load_instance(data: bytes, placement: Optional[bytes] = None) -> Instance:
    try:
        doc = json.loads(data)
        net_doc = doc.get("network", doc.get("net"))
        if net_doc is None:
            raise InputError("instance has no 'network'")
        net = network_from_json(net_doc)
        F = [point_from_json(net, p) for p in doc.get("p1", [])]
        S = [point_from_json(net, p) for p in doc.get("p2", [])]
        if placement is not None:
            pdoc = json.loads(placement)
            if "p1" in pdoc:
                F = [point_from_json(net, p) for p in pdoc["p1"]]
            S = [point_from_json(net, p) for p in pdoc.get("p2", [])]
        k = int(doc.get("k", len(S)))
    except (AttributeError, TypeError, ValueError) as exc:
        if isinstance(exc, InputError):
            raise
        raise InputError(str(exc)) from exc
    return Instance(net, F, k, S, bool(doc.get("general", False)), doc)


def _check_lengths(inst: Instance) -> None:
    if inst.general:
        return
    bad = [e.id for e in inst.net.edges.values() if e.length != e.weight]
    if bad:
        raise InputError(f"edge length and weight differ on edges {bad}; set \"general\": true to allow")


def _placement_result(net, F, S, solver: str) -> dict:
    rep = compute_zones(net, Placement(tuple(F), tuple(S)))
    return {
        "solver": solver,
        "S": [point_to_json(p) for p in S],
        "Q1": format_fraction(rep.q1),
        "Q2": format_fraction(rep.q2),
        "W": format_fraction(total_weight(net)),
    }


# --------------------------------------------------------------------------
# commands; each returns (exit code, {filename: text})


def cmd_solve(inst: Instance, mode: str, cap: int):
    _check_lengths(inst)
    net, F, k = inst.net, inst.F, inst.k
    if mode == "auto":
        mode = "tree" if net.is_tree() else "approx"
    if mode == "tree":
        S = solve_tree(net, F, k).S
    elif mode == "approx":
        S = approx_best_response(net, F, k)[0]
    else:
        S = best_response_exact(net, F, k, cap).best_S
    out = _placement_result(net, F, S, mode)
    out["k"] = k
    return EXIT_OK, {"result.json": _dumps(out)}


def cmd_oracle(inst: Instance, cap: int, grid: Optional[int]):
    res = best_response_exact(inst.net, inst.F, inst.k, cap)
    out = _placement_result(inst.net, inst.F, res.best_S, "oracle")
    out["evaluated"] = res.evaluated_count
    if grid is not None:
        out["probe"] = format_fraction(continuous_probe(inst.net, inst.F, inst.k, grid, cap))
        out["grid_denominator"] = grid
    return EXIT_OK, {"oracle.json": _dumps(out)}


def cmd_candidates(inst: Instance):
    cs = candidate_set(inst.net, inst.F)
    rows = [
        {"point": point_to_json(c.point), "kind": c.kind, "source": c.source, "edge": c.edge}
        for c in cs
    ]
    return EXIT_OK, {"candidates.json": _dumps(rows)}


def cmd_zones(inst: Instance):
    rep = compute_zones(inst.net, Placement(tuple(inst.F), tuple(inst.S)))
    return EXIT_OK, {"zones.json": _dumps(zone_report_to_json(inst.net, rep)), "zones.tsv": interval_table(inst.net, rep)}


def cmd_reduce_ds(graph: SimpleGraph, k: int):
    inst = reduce_dominating_set(graph, k)
    return EXIT_OK, {"instance.json": _dumps(inst.to_json())}


def cmd_p1_place(inst: Instance, m: int, k: int):
    F, bound = p1_safe_placement(inst.net, m, k)
    doc = {"network": inst.raw.get("network", inst.raw.get("net")), "p1": [point_to_json(f) for f in F],
           "k": k, "bound": format_fraction(bound), "W": format_fraction(total_weight(inst.net))}
    return EXIT_OK, {"placement.json": _dumps(doc)}


def _tie_check(net, F, S) -> bool:
    """Every vertex equidistant from both players belongs to P2."""
    if not S or not F:
        return True
    rep = compute_zones(net, Placement(tuple(F), tuple(S)))
    for v in net.vertex_ids:
        d1 = min(distance(net, Vertex(v), f) for f in F)
        d2 = min(distance(net, Vertex(v), s) for s in S)
        if d1 == d2 and rep.vertex_owner[v][0] != P2:
            return False
    return True


def cmd_verify(inst: Instance, cap: int):
    net, F, k = inst.net, inst.F, inst.k
    W = total_weight(net)
    rows = []

    def check(name, ok, detail=""):
        rows.append((name, "PASS" if ok else "FAIL", detail))

    if net.is_tree() and F:
        S = solve_tree(net, F, k).S
        solver = "tree"
    elif F:
        S = approx_best_response(net, F, k)[0]
        solver = "approx"
    else:
        S, solver = [], "none"
    for label, placement in (("given", inst.S), (solver, S)):
        rep = compute_zones(net, Placement(tuple(F), tuple(placement)))
        check(f"conservation[{label}]", rep.q1 + rep.q2 == W, f"{format_fraction(rep.q1)}+{format_fraction(rep.q2)}")
        check(f"ties[{label}]", _tie_check(net, F, placement))
    try:
        oracle = best_response_exact(net, F, k, cap) if F else None
    except SearchTooLarge:
        oracle = None
        rows.append(("oracle", "SKIP", "cap exceeded"))
    if oracle is not None:
        q = compute_zones(net, Placement(tuple(F), tuple(S))).q2
        if solver == "tree":
            check("tree=oracle", q == oracle.best_Q2, f"{format_fraction(q)} vs {format_fraction(oracle.best_Q2)}")
        else:
            check("approx>=0.63212*oracle", q * 100000 >= 63212 * oracle.best_Q2,
                  f"{format_fraction(q)} vs {format_fraction(oracle.best_Q2)}")
    g = inst.raw.get("graph")
    if g is not None and oracle is not None:
        graph = SimpleGraph.of(int(g["n"]), [tuple(e) for e in g["edges"]])
        hit = oracle.best_Q2 >= graph.n
        check("dominating-set round trip", hit == brute_force_dominating_set(graph, k))
        if hit:
            red = reduce_dominating_set(graph, k)
            D = extract_dominating_set(red, oracle.best_S)
            check("extraction", len(D) <= k, " ".join(map(str, D)))
    text = "check\tstatus\tdetail\n" + "".join(f"{a}\t{b}\t{c}\n" for a, b, c in rows)
    code = EXIT_OK if all(r[1] != "FAIL" for r in rows) else EXIT_CHECK
    return code, {"verify.tsv": text}


def cmd_plot(inst: Instance, out_dir: Path):
    rep = compute_zones(inst.net, Placement(tuple(inst.F), tuple(inst.S)))
    out_dir.mkdir(parents=True, exist_ok=True)
    svg = out_dir / "zones.svg"
    bounds = render_zones(inst.net, inst.F, inst.S, rep, svg)
    summary = {"svg": svg.name, "boundaries": [point_to_json(b) for b in bounds],
               "Q1": format_fraction(rep.q1), "Q2": format_fraction(rep.q2)}
    return EXIT_OK, {"zones.tsv": interval_table(inst.net, rep), "plot.json": _dumps(summary)}


# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="voronoi-game", description="One-round Voronoi game on weighted networks.")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, k=True):
        p.add_argument("--out", type=Path, help="directory for result files and the run manifest")
        p.add_argument("--cap", type=int, default=DEFAULT_CAP, help="maximum subsets the oracle may evaluate")
        if k:
            p.add_argument("--k", type=int, help="P2 budget (overrides the instance)")

    p = sub.add_parser("solve", help="best response for P2")
    p.add_argument("instance")
    p.add_argument("--mode", choices=["auto", "tree", "approx", "oracle"], default="auto")
    common(p)
    p = sub.add_parser("oracle", help="exhaustive best response, optionally with a grid probe")
    p.add_argument("instance")
    p.add_argument("--grid-denominator", type=int)
    common(p)
    p = sub.add_parser("candidates", help="list the candidate positions")
    p.add_argument("instance")
    common(p, k=False)
    p = sub.add_parser("zones", help="zone report for the placement in the instance")
    p.add_argument("instance")
    p.add_argument("placement", nargs="?")
    common(p, k=False)
    p = sub.add_parser("reduce-ds", help="dominating-set instance from an edge list")
    p.add_argument("edgelist")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--out", type=Path)
    p = sub.add_parser("p1-place", help="balanced P1 placement on a tree")
    p.add_argument("instance")
    p.add_argument("--m", type=int, required=True)
    common(p)
    p = sub.add_parser("verify", help="consistency checks on an instance")
    p.add_argument("instance")
    common(p)
    p = sub.add_parser("plot", help="SVG zone diagram and interval table")
    p.add_argument("instance")
    p.add_argument("placement", nargs="?")
    p.add_argument("--out", type=Path, default=Path("."))
    return ap


def _run(args) -> tuple:
    data = _read_bytes(args.instance if args.command != "reduce-ds" else args.edgelist)
    if args.command == "reduce-ds":
        try:
            graph = parse_edge_list(data.decode())
        except (UnicodeDecodeError, ValueError) as exc:
            raise InputError(str(exc)) from exc
        return data, cmd_reduce_ds(graph, args.k)
    placement = _read_bytes(args.placement) if getattr(args, "placement", None) else None
    inst = load_instance(data, placement)
    if getattr(args, "k", None) is not None:
        inst.k = args.k
    if args.command == "solve":
        return data, cmd_solve(inst, args.mode, args.cap)
    if args.command == "oracle":
        return data, cmd_oracle(inst, args.cap, args.grid_denominator)
    if args.command == "candidates":
        return data, cmd_candidates(inst)
    if args.command == "zones":
        return data, cmd_zones(inst)
    if args.command == "p1-place":
        return data, cmd_p1_place(inst, args.m, inst.k)
    if args.command == "verify":
        return data, cmd_verify(inst, args.cap)
    return data, cmd_plot(inst, args.out)


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        data, (code, files) = _run(args)
    except SearchTooLarge as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAP
    except PlotError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PLOT
    except ValueError as exc:  # bad input files and out-of-range arguments
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE

    for text in files.values():
        sys.stdout.write(text)
    out_dir = getattr(args, "out", None)
    if out_dir is not None:
        out_dir.mkdir(parents=True, exist_ok=True)
        names = sorted(files)
        if args.command == "plot":
            names = sorted(names + ["zones.svg"])
        for name, text in files.items():
            (out_dir / name).write_text(text)
        options = {k: (str(v) if isinstance(v, Path) else v) for k, v in sorted(vars(args).items())
                   if k not in ("command", "out", "instance", "placement", "edgelist")}
        manifest = RunManifest(args.command, hashlib.sha256(data).hexdigest(), options, names)
        (out_dir / "manifest.json").write_text(_dumps(asdict(manifest)))
    return code


if __name__ == "__main__":
    sys.exit(main())
