"""Causal DAGs, d-separation, the backdoor criterion and the structural oracle."""

from __future__ import annotations

import enum
import graphlib
from collections import deque
from collections.abc import Iterable
from dataclasses import dataclass

from .errors import (
    AssumptionViolated,
    BadParameter,
    CycleDetected,
    EmptyCandidateSet,
    GraphParseError,
    LatentInAdjustmentSet,
    OverlappingSets,
    SelfLoop,
    TooLarge,
    UnknownNode,
)

BRUTEFORCE_MAX_NODES = 12


class Dag:
    """Immutable DAG with optional latent nodes and a selection node.

    When a selection node is declared it is conditioned on in every
    d-separation query, mirroring selection into the analytic sample.
    """

    __slots__ = ("nodes", "edges", "latent", "selection", "_pa", "_ch", "_order")

    def __init__(self, nodes, edges, latent=frozenset(), selection=None):
        nodes = tuple(dict.fromkeys(nodes))
        node_set = set(nodes)
        pa = {v: set() for v in nodes}
        ch = {v: set() for v in nodes}
        for u, v in edges:
            for w in (u, v):
                if w not in node_set:
                    raise UnknownNode(f"edge {u} -> {v} references unknown node {w!r}")
            if u == v:
                raise SelfLoop(f"self-loop on {u!r}")
            pa[v].add(u)
            ch[u].add(v)
        for w in latent:
            if w not in node_set:
                raise UnknownNode(f"latent node {w!r} is not in the graph")
        if selection is not None and selection not in node_set:
            raise UnknownNode(f"selection node {selection!r} is not in the graph")
        sorter = graphlib.TopologicalSorter({v: pa[v] for v in nodes})
        try:
            order = tuple(sorter.static_order())
        except graphlib.CycleError as exc:
            cycle = " -> ".join(exc.args[1])
            raise CycleDetected(f"directed cycle: {cycle}") from None
        self.nodes = nodes
        self.edges = frozenset((u, v) for u in nodes for v in ch[u])
        self.latent = frozenset(latent)
        self.selection = selection
        self._pa = {v: frozenset(s) for v, s in pa.items()}
        self._ch = {v: frozenset(s) for v, s in ch.items()}
        self._order = order

    def __repr__(self):
        return (
            f"Dag(nodes={list(self.nodes)}, edges={sorted(self.edges)}, "
            f"latent={sorted(self.latent)}, selection={self.selection!r})"
        )

    def __eq__(self, other):
        return (
            isinstance(other, Dag)
            and set(self.nodes) == set(other.nodes)
            and self.edges == other.edges
            and self.latent == other.latent
            and self.selection == other.selection
        )

    def __hash__(self):
        return hash((frozenset(self.nodes), self.edges, self.latent, self.selection))

    def __contains__(self, node):
        return node in self._pa

    def __len__(self):
        return len(self.nodes)

    def check(self, *nodes):
        for node in nodes:
            if node not in self._pa:
                raise UnknownNode(f"unknown node {node!r}")

    def parents(self, node) -> frozenset:
        self.check(node)
        return self._pa[node]

    def children(self, node) -> frozenset:
        self.check(node)
        return self._ch[node]

    def has_edge(self, u, v) -> bool:
        return u in self._pa and v in self._ch[u]

    def neighbours(self, node):
        return self._pa[node] | self._ch[node]

    @property
    def topological_order(self) -> tuple:
        return self._order

    @property
    def observed(self) -> tuple:
        return tuple(v for v in self.nodes if v not in self.latent)

    def without_edges_out_of(self, node) -> Dag:
        self.check(node)
        edges = [(u, v) for u, v in self.edges if u != node]
        return Dag(self.nodes, edges, self.latent, self.selection)

    def with_latent(self, latent) -> Dag:
        return Dag(self.nodes, self.edges, latent, self.selection)

    def without_nodes(self, drop) -> Dag:
        drop = set(drop)
        self.check(*drop)
        nodes = [v for v in self.nodes if v not in drop]
        edges = [(u, v) for u, v in self.edges if u not in drop and v not in drop]
        selection = None if self.selection in drop else self.selection
        return Dag(nodes, edges, self.latent - drop, selection)


def build_dag(edges: Iterable, latent: Iterable = (), selection=None, nodes: Iterable | None = None) -> Dag:
    """Validate and build a :class:`Dag`.

    Without ``nodes`` the node set is inferred from the edge endpoints; latent
    and selection names must then appear among them.
    """
    edges = [tuple(e) for e in edges]
    for e in edges:
        if len(e) != 2:
            raise ValueError(f"edge {e!r} is not a pair")
    if nodes is None:
        nodes = []
        for u, v in edges:
            nodes.extend((u, v))
    return Dag(nodes, edges, frozenset(latent), selection)


def parse_graph(text: str) -> Dag:
    """Parse the line-oriented graph format.

    ``A -> B`` (chains like ``A -> B -> C`` allowed) adds edges, ``latent U``
    marks a latent node, ``select S`` marks the selection node, a bare name
    declares an isolated node and ``#`` starts a comment.
    """
    nodes, edges, latent = [], [], []
    selection = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "->" in line:
            parts = [p.strip() for p in line.split("->")]
            if any(not p or len(p.split()) != 1 for p in parts):
                raise GraphParseError(f"malformed edge declaration {raw.strip()!r}", lineno)
            for u, v in zip(parts, parts[1:]):
                if u == v:
                    raise GraphParseError(f"self-loop on {u!r}", lineno)
                edges.append((u, v))
            nodes.extend(parts)
            continue
        words = line.split()
        if words[0] == "latent":
            if len(words) < 2:
                raise GraphParseError("'latent' needs at least one node name", lineno)
            latent.extend(words[1:])
            nodes.extend(words[1:])
        elif words[0] == "select":
            if len(words) != 2:
                raise GraphParseError("'select' takes exactly one node name", lineno)
            if selection is not None and selection != words[1]:
                raise GraphParseError("selection node declared twice", lineno)
            selection = words[1]
            nodes.append(words[1])
        elif len(words) == 1:
            nodes.append(words[0])
        else:
            raise GraphParseError(f"unrecognised declaration {raw.strip()!r}", lineno)
    return Dag(nodes, edges, frozenset(latent), selection)


def read_graph(path) -> Dag:
    with open(path, encoding="utf-8") as fh:
        return parse_graph(fh.read())


def format_graph(dag: Dag) -> str:
    lines = [f"{u} -> {v}" for u, v in sorted(dag.edges)]
    connected = {w for e in dag.edges for w in e}
    lines += [v for v in dag.nodes if v not in connected and v not in dag.latent and v != dag.selection]
    if dag.latent:
        lines.append("latent " + " ".join(sorted(dag.latent)))
    if dag.selection is not None:
        lines.append(f"select {dag.selection}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Reachability


def descendants(dag: Dag, node) -> frozenset:
    """Nodes reachable from ``node`` by a directed path (``node`` excluded)."""
    dag.check(node)
    seen = set()
    stack = [node]
    while stack:
        for c in dag._ch[stack.pop()]:
            if c not in seen:
                seen.add(c)
                stack.append(c)
    return frozenset(seen)


def ancestors(dag: Dag, nodes) -> frozenset:
    """Nodes with a directed path into ``nodes``, including ``nodes`` themselves."""
    nodes = set(nodes)
    dag.check(*nodes)
    seen = set(nodes)
    stack = list(nodes)
    while stack:
        for p in dag._pa[stack.pop()]:
            if p not in seen:
                seen.add(p)
                stack.append(p)
    return frozenset(seen)


def directed_path(dag: Dag, source, target):
    """One directed path ``source -> ... -> target`` as a tuple, or ``None``."""
    dag.check(source, target)
    prev = {source: None}
    queue = deque([source])
    while queue:
        u = queue.popleft()
        if u == target and u != source:
            break
        for c in sorted(dag._ch[u]):
            if c not in prev:
                prev[c] = u
                queue.append(c)
    if target not in prev or target == source:
        return None
    path = [target]
    while path[-1] != source:
        path.append(prev[path[-1]])
    return tuple(reversed(path))


def _query_sets(dag, a, b, z):
    a, b, z = set(a), set(b), set(z)
    dag.check(*a, *b, *z)
    if a & b or a & z or b & z:
        raise OverlappingSets("query sets must be pairwise disjoint")
    if dag.selection is not None:
        if dag.selection in a or dag.selection in b:
            raise OverlappingSets("the selection node is always conditioned on")
        z = z | {dag.selection}
    return a, b, z


def d_separated(dag: Dag, a, b, z=()) -> bool:
    """True iff every path between ``a`` and ``b`` is blocked given ``z``.

    Linear-time reachability over (node, direction) states (Bayes-ball style).
    The selection node, if any, is added to ``z``.
    """
    a, b, z = _query_sets(dag, a, b, z)
    if not a or not b:
        return True
    anc_z = ancestors(dag, z) if z else frozenset()
    # direction "up": arrived from a child (or start); "down": arrived from a parent
    visited = set()
    queue = deque((v, "up") for v in a)
    while queue:
        v, direction = queue.popleft()
        if (v, direction) in visited:
            continue
        visited.add((v, direction))
        if v not in z and v in b:
            return False
        if direction == "up":
            if v not in z:
                for p in dag._pa[v]:
                    queue.append((p, "up"))
                for c in dag._ch[v]:
                    queue.append((c, "down"))
        else:
            if v not in z:
                for c in dag._ch[v]:
                    queue.append((c, "down"))
            if v in anc_z:
                for p in dag._pa[v]:
                    queue.append((p, "up"))
    return True


def _edge_into(dag, u, v) -> bool:
    """True iff the skeleton edge between u and v points into v."""
    return v in dag._ch[u]


def collider_flags(dag: Dag, path) -> tuple:
    flags = [False]
    for i in range(1, len(path) - 1):
        flags.append(_edge_into(dag, path[i - 1], path[i]) and _edge_into(dag, path[i + 1], path[i]))
    if len(path) > 1:
        flags.append(False)
    return tuple(flags)


def path_is_open(dag: Dag, path, z) -> bool:
    """Per-path blocking check; ``z`` should already include any selection node."""
    z = set(z)
    for i in range(1, len(path) - 1):
        v = path[i]
        if _edge_into(dag, path[i - 1], v) and _edge_into(dag, path[i + 1], v):
            if v not in z and not (descendants(dag, v) & z):
                return False
        elif v in z:
            return False
    return True


def simple_paths(dag: Dag, source, target, avoid=()):
    """Yield every simple path between two nodes in the skeleton."""
    avoid = set(avoid)
    path = [source]
    on_path = {source}

    def extend(u):
        if u == target:
            yield tuple(path)
            return
        for w in sorted(dag._pa[u] | dag._ch[u]):
            if w in on_path or w in avoid:
                continue
            path.append(w)
            on_path.add(w)
            yield from extend(w)
            path.pop()
            on_path.discard(w)

    yield from extend(source)


def open_paths(dag: Dag, source, target, z=(), avoid=()):
    """Yield simple paths open given ``z`` (plus the selection node)."""
    z = set(z)
    if dag.selection is not None:
        z.add(dag.selection)
    for path in simple_paths(dag, source, target, avoid):
        if path_is_open(dag, path, z):
            yield path


def d_separated_bruteforce(dag: Dag, a, b, z=()) -> bool:
    """Exhaustive path-enumeration counterpart of :func:`d_separated`."""
    if len(dag) > BRUTEFORCE_MAX_NODES:
        raise TooLarge(f"{len(dag)} nodes exceeds the enumeration limit of {BRUTEFORCE_MAX_NODES}")
    a, b, z = _query_sets(dag, a, b, z)
    for s in a:
        for t in b:
            for path in simple_paths(dag, s, t):
                if path_is_open(dag, path, z):
                    return False
    return True


# ---------------------------------------------------------------------------
# Backdoor criterion and assumptions


def is_valid_backdoor_set(dag: Dag, x, y, adjust) -> bool:
    """Backdoor criterion: no member of ``adjust`` descends from ``x`` and
    ``adjust`` d-separates ``x`` and ``y`` once edges out of ``x`` are removed."""
    adjust = set(adjust)
    dag.check(x, y, *adjust)
    if x in adjust or y in adjust:
        raise OverlappingSets("exposure and outcome cannot be in the adjustment set")
    latent = adjust & dag.latent
    if latent:
        raise LatentInAdjustmentSet(f"latent node(s) in adjustment set: {sorted(latent)}")
    if adjust & descendants(dag, x):
        return False
    return d_separated(dag.without_edges_out_of(x), {x}, {y}, adjust)


@dataclass(frozen=True)
class Violation:
    assumption: str
    message: str
    nodes: tuple = ()

    def to_dict(self):
        return {"assumption": self.assumption, "message": self.message, "nodes": list(self.nodes)}


# Assumptions 2 (exposure measured without error) and 5 (faithfulness) are
# properties of the data-generating process, not of the graph.
NOT_CHECKABLE = ("A2", "A5")


def check_assumptions(dag: Dag, x, y, adjust) -> list[Violation]:
    adjust = list(adjust)
    dag.check(x, y, *adjust)
    out = []
    path = directed_path(dag, y, x)
    if path is not None:
        out.append(Violation("A1", "outcome causes exposure: " + " -> ".join(path), path))
    desc_x = descendants(dag, x)
    for a in adjust:
        if a in desc_x:
            out.append(
                Violation("A3", f"covariate {a} is caused by the exposure", directed_path(dag, x, a))
            )
    if dag.selection is not None and dag.selection in desc_x:
        s = dag.selection
        out.append(Violation("A4", f"selection node {s} is caused by the exposure", directed_path(dag, x, s)))
    return out


# ---------------------------------------------------------------------------
# Structural oracle


class OracleVerdict(str, enum.Enum):
    VALID_CONFIRMED = "ValidConfirmed"
    INVALID_OR_MINIMAL = "InvalidOrMinimal"
    NO_ELIGIBLE_COVARIATE = "NoEligibleCovariate"


@dataclass(frozen=True)
class OracleReport:
    eligible: tuple  # (covariate, reduced set) pairs
    witnesses: tuple
    verdict: OracleVerdict

    @property
    def reduced_sets(self) -> dict:
        reduced = dict(self.eligible)
        return {w: reduced[w] for w in self.witnesses}

    def to_dict(self):
        return {
            "eligible": [z for z, _ in self.eligible],
            "witnesses": list(self.witnesses),
            "reduced_sets": {w: sorted(s) for w, s in self.reduced_sets.items()},
            "verdict": self.verdict.value,
        }


def theorem1_oracle(dag: Dag, x, y, adjust) -> OracleReport:
    """Decide the adjustment-set test from the graph alone.

    A covariate is eligible when it is d-connected to ``x`` given the rest of
    ``adjust``; an eligible covariate is a witness when it is d-separated from
    ``y`` given the rest of ``adjust`` plus ``x``. Any witness certifies both
    ``adjust`` and the witness-free reduced set as valid.
    """
    adjust = list(dict.fromkeys(adjust))
    if not adjust:
        raise EmptyCandidateSet("the candidate adjustment set is empty")
    dag.check(x, y, *adjust)
    if x in adjust or y in adjust:
        raise OverlappingSets("exposure and outcome cannot be in the adjustment set")
    latent = set(adjust) & dag.latent
    if latent:
        raise LatentInAdjustmentSet(f"latent node(s) in adjustment set: {sorted(latent)}")
    violations = check_assumptions(dag, x, y, adjust)
    if violations:
        raise AssumptionViolated(violations)
    eligible, witnesses = [], []
    for z in adjust:
        rest = frozenset(a for a in adjust if a != z)
        if d_separated(dag, {z}, {x}, rest):
            continue
        eligible.append((z, rest))
        if d_separated(dag, {z}, {y}, rest | {x}):
            witnesses.append(z)
    if not eligible:
        verdict = OracleVerdict.NO_ELIGIBLE_COVARIATE
    elif witnesses:
        verdict = OracleVerdict.VALID_CONFIRMED
    else:
        verdict = OracleVerdict.INVALID_OR_MINIMAL
    return OracleReport(tuple(eligible), tuple(witnesses), verdict)


# ---------------------------------------------------------------------------
# Random generator


def random_assumption_dag(rng, n_covariates: int, n_latent: int = 0, edge_prob: float = 0.3,
                          with_selection: bool = False):
    """Random DAG satisfying the graph-checkable assumptions by construction.

    Covariates ``C1..Cn``, latents ``U1..Um`` (and optionally a selection node
    ``S``) are placed in a random order before ``X``, and ``Y`` comes last;
    every forward pair gets an edge independently with ``edge_prob``. Returns
    ``(dag, "X", "Y", covariates)``.
    """
    if n_covariates < 1 or n_latent < 0:
        raise BadParameter("need n_covariates >= 1 and n_latent >= 0")
    if not 0.0 <= edge_prob < 1.0:
        raise BadParameter("edge_prob must lie in [0, 1)")
    covs = [f"C{i + 1}" for i in range(n_covariates)]
    lats = [f"U{i + 1}" for i in range(n_latent)]
    pre = covs + lats + (["S"] if with_selection else [])
    order = [pre[i] for i in rng.permutation(len(pre))] + ["X", "Y"]
    n = len(order)
    draws = rng.random(n * (n - 1) // 2)
    edges = []
    k = 0
    for i in range(n):
        for j in range(i + 1, n):
            if draws[k] < edge_prob:
                edges.append((order[i], order[j]))
            k += 1
    dag = Dag(order, edges, frozenset(lats), "S" if with_selection else None)
    return dag, "X", "Y", covs
