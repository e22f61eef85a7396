"""SVG zone diagrams and the matching tab-separated interval table."""

from __future__ import annotations

import csv
import io
from fractions import Fraction
from typing import List, Sequence, Tuple

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .network import EdgePoint, ExtendedLength, NetworkPoint, Vertex, WeightedNetwork, format_fraction  # noqa: E402
from .zones import P1, P2, ZoneReport  # noqa: E402

COLORS = {P1: "#1f77b4", P2: "#ff7f0e"}
SVG_SALT = "voronoi-game"


class PlotError(ValueError):
    """The network cannot be drawn (vertex coordinates missing)."""


def decimal6(x: Fraction) -> str:
    return f"{float(x):.6f}"


def _merged(rep: ZoneReport, eid: int):
    """Positive-length ownership runs of one edge, by player."""
    runs: List[Tuple[Fraction, Fraction, str]] = []
    for lo, hi, (player, _) in rep.edge_intervals[eid]:
        if hi.real <= lo.real:
            continue
        if runs and runs[-1][2] == player:
            runs[-1] = (runs[-1][0], hi.real, player)
        else:
            runs.append((lo.real, hi.real, player))
    return runs


def zone_boundaries(net: WeightedNetwork, rep: ZoneReport) -> List[NetworkPoint]:
    """Points where ownership switches between the players."""
    out: List[NetworkPoint] = []
    flipped = set()
    for eid in net.edge_ids:
        e = net.edges[eid]
        runs = _merged(rep, eid)
        for (_, hi, a), (_, _, b) in zip(runs, runs[1:]):
            if a != b:
                out.append(EdgePoint(eid, ExtendedLength(hi, Fraction(0))))
        if runs:
            if rep.vertex_owner[e.u][0] != runs[0][2]:
                flipped.add(e.u)
            if rep.vertex_owner[e.v][0] != runs[-1][2]:
                flipped.add(e.v)
    out.extend(Vertex(v) for v in sorted(flipped))
    return sorted(out, key=lambda p: (0, p.id) if isinstance(p, Vertex) else (1, p.edge, p.offset))


def _xy(net: WeightedNetwork, eid: int, off: Fraction):
    e = net.edges[eid]
    (x0, y0), (x1, y1) = net.coords[e.u], net.coords[e.v]
    t = float(off / e.length)
    return x0 + t * (x1 - x0), y0 + t * (y1 - y0)


def _point_xy(net: WeightedNetwork, p: NetworkPoint):
    if isinstance(p, Vertex):
        return net.coords[p.id]
    return _xy(net, p.edge, p.offset.real)


def interval_table(net: WeightedNetwork, rep: ZoneReport) -> str:
    """One row per ownership interval: edge, start, end, player, facility, weight."""
    buf = io.StringIO()
    w = csv.writer(buf, delimiter="\t", lineterminator="\n")
    w.writerow(["edge", "start", "end", "player", "facility", "weight"])
    for eid in net.edge_ids:
        e = net.edges[eid]
        for lo, hi, (player, idx) in rep.edge_intervals[eid]:
            if hi.real <= lo.real:
                continue
            share = e.weight * (hi.real - lo.real) / e.length
            w.writerow([eid, format_fraction(lo.real), format_fraction(hi.real), player, idx, format_fraction(share)])
    return buf.getvalue()


def render_zones(
    net: WeightedNetwork,
    F: Sequence[NetworkPoint],
    S: Sequence[NetworkPoint],
    rep: ZoneReport,
    path,
) -> List[NetworkPoint]:
    """Draw zones by player with boundary markers; returns the boundaries drawn."""
    missing = [v for v in net.vertex_ids if v not in net.coords]
    if missing:
        raise PlotError(f"vertices without coordinates: {missing}")

    plt.rcParams["svg.hashsalt"] = SVG_SALT
    plt.rcParams["svg.fonttype"] = "none"
    fig, ax = plt.subplots(figsize=(6, 4.5))
    for eid in net.edge_ids:
        for lo, hi, player in _merged(rep, eid):
            (xa, ya), (xb, yb) = _xy(net, eid, lo), _xy(net, eid, hi)
            ax.plot([xa, xb], [ya, yb], color=COLORS[player], lw=3, solid_capstyle="butt", zorder=1)
    for v in net.vertex_ids:
        x, y = net.coords[v]
        ax.scatter([x], [y], s=40, color=COLORS[rep.vertex_owner[v][0]], edgecolor="k", zorder=2)
        ax.annotate(f"{v} ({decimal6(net.weights[v])})", (x, y), xytext=(4, 4), textcoords="offset points", fontsize=7)

    for pts, player, marker in ((F, P1, "s"), (S, P2, "^")):
        for i, p in enumerate(pts):
            x, y = _point_xy(net, p)
            ax.plot([x], [y], marker=marker, ms=10, color=COLORS[player], mec="k", ls="none", zorder=3,
                    gid=f"{player.lower()}-facility-{i}")

    bounds = zone_boundaries(net, rep)
    for i, b in enumerate(bounds):
        x, y = _point_xy(net, b)
        ax.plot([x], [y], marker="x", ms=9, mew=2, color="k", ls="none", zorder=4, gid=f"bisector-{i}")

    ax.set_title(f"Q1 = {decimal6(rep.q1)}   Q2 = {decimal6(rep.q2)}", fontsize=9)
    ax.set_aspect("equal", adjustable="datalim")
    ax.margins(0.15)
    ax.set_axis_off()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
    return bounds
