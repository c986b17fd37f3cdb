"""Tower interference graph and minimum-channel reassignment under a channel
separation constraint."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .geo import haversine_km
from .propagation import UHF_BAND_IV, BandPlan
from .regulatory import RegulatoryParams, Transmitter, fcc_grade_b_radius, protection_radius

BASES = ("protection", "fcc")
MAX_BRUTEFORCE_NODES = 12


class BandExhausted(ValueError):
    """No channel in the band satisfies the separation constraint for a node."""


@dataclass(frozen=True)
class InterferenceGraph:
    nodes: tuple[str, ...]
    edges: frozenset[frozenset[str]] = field(default_factory=frozenset)

    def __post_init__(self) -> None:
        if len(set(self.nodes)) != len(self.nodes):
            raise ValueError("duplicate node ids")
        known = set(self.nodes)
        for e in self.edges:
            if len(e) != 2:
                raise ValueError(f"bad edge {set(e)}: self-loops are not allowed")
            if not e <= known:
                raise ValueError(f"edge {sorted(e)} references unknown node")

    @classmethod
    def from_pairs(cls, nodes: Iterable[str], pairs: Iterable[tuple[str, str]]) -> InterferenceGraph:
        return cls(tuple(nodes), frozenset(frozenset(p) for p in pairs))

    def neighbors(self) -> dict[str, set[str]]:
        adj: dict[str, set[str]] = {n: set() for n in self.nodes}
        for e in self.edges:
            a, b = sorted(e)
            adj[a].add(b)
            adj[b].add(a)
        return adj

    def edge_list(self) -> list[tuple[str, str]]:
        return sorted(tuple(sorted(e)) for e in self.edges)  # type: ignore[misc]


@dataclass(frozen=True)
class ChannelAssignment:
    channels: Mapping[str, int]
    distinct_channels_used: int
    violations: tuple[tuple[str, str], ...] = ()

    @property
    def valid(self) -> bool:
        return not self.violations


def coverage_radius(tx: Transmitter, p: RegulatoryParams, basis: str = "fcc") -> float:
    if basis == "fcc":
        return fcc_grade_b_radius(tx, p).km
    if basis == "protection":
        return protection_radius(tx, p).km
    raise ValueError(f"unknown basis {basis!r}; choose from {', '.join(BASES)}")


def build_interference_graph(towers: Sequence[Transmitter], p: RegulatoryParams,
                             basis: str = "fcc") -> InterferenceGraph:
    """Edge between two towers iff their coverage disks overlap (strictly)."""
    ids = [t.id for t in towers]
    if len(set(ids)) != len(ids):
        dup = sorted({i for i in ids if ids.count(i) > 1})
        raise ValueError(f"duplicate tower ids: {', '.join(dup)}")
    radii = np.array([coverage_radius(t, p, basis) for t in towers])
    lat = np.array([t.location.lat_deg for t in towers])
    lon = np.array([t.location.lon_deg for t in towers])
    d = haversine_km(lat[:, None], lon[:, None], lat[None, :], lon[None, :])
    ii, jj = np.nonzero(np.triu(d < radii[:, None] + radii[None, :], k=1))
    pairs = [(ids[i], ids[j]) for i, j in zip(ii.tolist(), jj.tolist())]
    return InterferenceGraph.from_pairs(ids, pairs)


def _conflicts(c: int, others: Iterable[int], min_separation: int) -> bool:
    return any(abs(c - o) < min_separation for o in others)


def validate_assignment(g: InterferenceGraph, a: ChannelAssignment | Mapping[str, int],
                        min_separation: int = 2) -> list[tuple[str, str]]:
    """Edges whose endpoint channels are closer than ``min_separation``."""
    ch = a.channels if isinstance(a, ChannelAssignment) else a
    missing = [n for n in g.nodes if n not in ch]
    if missing:
        raise ValueError(f"unassigned nodes: {', '.join(missing)}")
    return [(u, v) for u, v in g.edge_list() if abs(ch[u] - ch[v]) < min_separation]


def _result(g: InterferenceGraph, ch: dict[str, int], min_separation: int) -> ChannelAssignment:
    ordered = {n: ch[n] for n in g.nodes}
    return ChannelAssignment(ordered, len(set(ordered.values())),
                             tuple(validate_assignment(g, ordered, min_separation)))


def greedy_reassign(g: InterferenceGraph, band: BandPlan = UHF_BAND_IV,
                    min_separation: int = 2) -> ChannelAssignment:
    """Descending-degree first-fit: each node takes the lowest channel that keeps
    ``min_separation`` from its already-assigned neighbours."""
    if min_separation < 1:
        raise ValueError("min_separation must be >= 1")
    adj = g.neighbors()
    order = sorted(g.nodes, key=lambda n: (-len(adj[n]), n))
    ch: dict[str, int] = {}
    for n in order:
        taken = [ch[m] for m in adj[n] if m in ch]
        for c in band.channels:
            if not _conflicts(c, taken, min_separation):
                ch[n] = c
                break
        else:
            raise BandExhausted(f"no feasible channel for node {n!r} "
                                f"({len(taken)} assigned neighbours, separation {min_separation})")
    return _result(g, ch, min_separation)


def _map_classes(n_classes: int, class_adj: list[set[int]], channels: list[int],
                 min_separation: int) -> list[int] | None:
    """Lowest (lexicographic) injective class -> channel map honouring separation."""
    out = [0] * n_classes

    def place(i: int, taken: set[int]) -> bool:
        if i == n_classes:
            return True
        for c in channels:
            if c in taken or _conflicts(c, (out[j] for j in class_adj[i] if j < i), min_separation):
                continue
            out[i] = c
            taken.add(c)
            if place(i + 1, taken):
                return True
            taken.discard(c)
        return False

    return out if place(0, set()) else None


def _max_clique(nodes: list[str], adj: dict[str, set[str]]) -> int:
    best = 0

    def grow(size: int, cand: list[str]) -> None:
        nonlocal best
        best = max(best, size)
        for i, v in enumerate(cand):
            if size + len(cand) - i <= best:
                return
            grow(size + 1, [u for u in cand[i + 1:] if u in adj[v]])

    grow(0, nodes)
    return best


def optimal_reassign_bruteforce(g: InterferenceGraph, band: BandPlan = UHF_BAND_IV,
                                min_separation: int = 2) -> ChannelAssignment:
    """Exact minimum number of distinct channels.

    Iterative deepening on the channel count k: enumerate every partition of the
    nodes (in input order, canonical labels) into at most k independent sets,
    then search for an injective mapping of the sets onto channels in which
    sets joined by an edge are ``min_separation`` apart. The first success is
    optimal; enumeration order makes it deterministic. The search starts at
    the clique number, and a clique that cannot be spread ``min_separation``
    apart within the band fails immediately.
    """
    n = len(g.nodes)
    if n > MAX_BRUTEFORCE_NODES:
        raise ValueError(f"brute force limited to {MAX_BRUTEFORCE_NODES} nodes, got {n}")
    if n == 0:
        return ChannelAssignment({}, 0)
    adj = g.neighbors()
    nodes = list(g.nodes)
    pos = {v: i for i, v in enumerate(nodes)}
    earlier = [[pos[m] for m in adj[v] if pos[m] < i] for i, v in enumerate(nodes)]
    channels = list(band.channels)
    label = [0] * n

    def leaf(n_classes: int) -> list[int] | None:
        class_adj: list[set[int]] = [set() for _ in range(n_classes)]
        for i in range(n):
            for j in earlier[i]:
                class_adj[label[i]].add(label[j])
                class_adj[label[j]].add(label[i])
        mapping = _map_classes(n_classes, class_adj, channels, min_separation)
        return None if mapping is None else [mapping[label[i]] for i in range(n)]

    def dfs(i: int, n_classes: int, k: int) -> list[int] | None:
        if i == n:
            return leaf(n_classes)
        for c in range(min(n_classes + 1, k)):
            if any(label[j] == c for j in earlier[i]):
                continue
            label[i] = c
            found = dfs(i + 1, max(n_classes, c + 1), k)
            if found is not None:
                return found
        return None

    omega = _max_clique(nodes, adj)
    if (omega - 1) * min_separation + 1 > len(channels):
        raise BandExhausted(f"a {omega}-clique cannot be separated by {min_separation} "
                            f"within {len(channels)} channels")
    for k in range(omega, len(channels) + 1):
        found = dfs(0, 0, k)
        if found is not None:
            return _result(g, dict(zip(nodes, found)), min_separation)
    raise BandExhausted("no assignment satisfies the separation constraint within the band")


def reassign_towers(towers: Sequence[Transmitter], p: RegulatoryParams, basis: str = "fcc",
                    min_separation: int = 2, band: BandPlan = UHF_BAND_IV
                    ) -> tuple[InterferenceGraph, ChannelAssignment]:
    """Greedy reassignment that falls back to the current channels when those
    are already valid and use fewer distinct channels."""
    g = build_interference_graph(towers, p, basis)
    a = greedy_reassign(g, band, min_separation)
    current = {t.id: t.channel for t in towers}
    if not validate_assignment(g, current, min_separation):
        if len(set(current.values())) < a.distinct_channels_used:
            a = _result(g, current, min_separation)
    return g, a


def assignment_csv(towers: Sequence[Transmitter], a: ChannelAssignment, header: Sequence[str] = ()) -> str:
    buf = io.StringIO()
    for line in header:
        buf.write(line + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["tower_id", "zone", "old_channel", "new_channel"])
    for t in towers:
        w.writerow([t.id, t.zone, t.channel, a.channels[t.id]])
    return buf.getvalue()


def summary(towers: Sequence[Transmitter], a: ChannelAssignment, **provenance) -> dict:
    zones = sorted({t.zone for t in towers})
    per_zone = {}
    for z in zones:
        members = [t for t in towers if t.zone == z]
        per_zone[z] = {
            "towers": len(members),
            "distinct_before": len({t.channel for t in members}),
            "distinct_after": len({a.channels[t.id] for t in members}),
        }
    return {
        **provenance,
        "towers": len(towers),
        "distinct_before": len({t.channel for t in towers}),
        "distinct_after": a.distinct_channels_used,
        "violations": len(a.violations),
        "zones": per_zone,
    }


def summary_json(d: dict) -> str:
    return json.dumps(d, indent=2, sort_keys=True) + "\n"
