"""Enumerate the open paths behind a covariate's dependence and label their forms.

Forms 1-12 cover paths between a covariate ``z`` and the outcome that stay
open once the exposure is conditioned on; forms 13-20 cover paths between
``z`` and the exposure that pass through the outcome. Labels are fixed by
edge orientations at the path ends:

* ``a1``/``a2``: the ``z``-to-exposure segment leaves ``z`` (``z ->``) or
  enters it (``z <-``), and always ends pointing into the exposure;
* ``b1``/``b2``: the exposure-to-outcome segment ends into the outcome
  (``-> y``) or leaves it (``<- y``);
* ``c1``..``c4``: the ``z``-to-outcome segment, by whether it leaves ``z`` and
  whether it ends into the outcome.
"""

from __future__ import annotations

from dataclasses import dataclass

from .graph import BRUTEFORCE_MAX_NODES, Dag, collider_flags, open_paths
from .errors import OverlappingSets, TooLarge

# (leaves z, into y) -> c index
_C_INDEX = {(True, True): 0, (False, True): 1, (False, False): 2, (True, False): 3}


@dataclass(frozen=True)
class PathRecord:
    nodes: tuple
    colliders: tuple
    form: int | None  # None marks an unclassified path
    kind: str  # "z-y" or "z-x"
    context: tuple | None = None  # full exposure-outcome route for forms 5-12

    @property
    def classified(self) -> bool:
        return self.form is not None

    def arrows(self, dag: Dag) -> str:
        return render_path(dag, self.nodes)

    def to_dict(self, dag: Dag | None = None):
        out = {
            "nodes": list(self.nodes),
            "colliders": [v for v, c in zip(self.nodes, self.colliders) if c],
            "form": self.form if self.form is not None else "Unclassified",
            "kind": self.kind,
        }
        if self.context is not None:
            out["context"] = list(self.context)
        if dag is not None:
            out["path"] = render_path(dag, self.nodes)
            if self.context is not None:
                out["context_path"] = render_path(dag, self.context)
        return out


def render_path(dag: Dag, nodes) -> str:
    parts = [str(nodes[0])]
    for u, v in zip(nodes, nodes[1:]):
        parts.append("->" if dag.has_edge(u, v) else "<-")
        parts.append(str(v))
    return " ".join(parts)


def _leaves(dag, path):
    """First edge points away from path[0]."""
    return dag.has_edge(path[0], path[1])


def _enters_end(dag, path):
    """Last edge points into path[-1]."""
    return dag.has_edge(path[-2], path[-1])


def classify_biasing_paths(dag: Dag, x, y, z, adjust_star) -> list[PathRecord]:
    """Open paths explaining ``z``'s dependence on ``y`` (given ``adjust_star``
    and ``x``) and on ``x`` via ``y`` (given ``adjust_star``), each labelled
    with its form number."""
    adjust_star = frozenset(adjust_star)
    dag.check(x, y, z, *adjust_star)
    if len(dag) > BRUTEFORCE_MAX_NODES:
        raise TooLarge(f"{len(dag)} nodes exceeds the enumeration limit of {BRUTEFORCE_MAX_NODES}")
    if z in adjust_star or z in (x, y) or x in adjust_star or y in adjust_star:
        raise OverlappingSets("z, x and y must be distinct and outside the conditioning set")

    # z -> x segments open given adjust_star that avoid y: (path, a index)
    a_segments = []
    for seg in open_paths(dag, z, x, adjust_star, avoid={y}):
        if _enters_end(dag, seg):
            a_segments.append((seg, 0 if _leaves(dag, seg) else 1))

    # z -> x paths through y, keyed by their z..y prefix
    through_y = []
    for path in open_paths(dag, z, x, adjust_star):
        if y in path:
            through_y.append((path, _through_y_form(dag, path, y)))

    records = []
    for path in open_paths(dag, z, y, adjust_star | {x}):
        flags = collider_flags(dag, path)
        if x in path:
            i = path.index(x)
            a_idx = 0 if _leaves(dag, path[: i + 1]) else 1
            b_idx = 0 if _enters_end(dag, path[i:]) else 1
            form = 1 + 2 * a_idx + b_idx
            records.append(PathRecord(path, flags, form, "z-y", None))
            continue
        c_idx = _C_INDEX[(_leaves(dag, path), _enters_end(dag, path))]
        by_form = {}
        for seg, a_idx in a_segments:
            form = 5 + 2 * c_idx + a_idx
            disjoint = not (set(seg[1:]) & set(path[1:]))
            best = by_form.get(form)
            if best is None or (disjoint and not best[1]):
                by_form[form] = (seg, disjoint)
        if by_form:
            for form in sorted(by_form):
                seg = by_form[form][0]
                context = tuple(reversed(seg)) + path[1:]
                records.append(PathRecord(path, flags, form, "z-y", context))
            continue
        # no route to x avoiding y: z reaches x only through y. Prefer routes
        # that begin with this path.
        usable = [(f, q) for q, f in through_y if f is not None]
        matches = sorted({m for m in usable if m[1][: len(path)] == path}) or sorted(set(usable))
        if not matches:
            records.append(PathRecord(path, flags, None, "z-y", None))
        for form, q in matches:
            records.append(PathRecord(path, flags, form, "z-y", q))

    for path, form in through_y:
        records.append(PathRecord(path, collider_flags(dag, path), form, "z-x", None))
    return records


def _through_y_form(dag, path, y):
    if not _enters_end(dag, path):
        return None
    i = path.index(y)
    c_idx = _C_INDEX[(_leaves(dag, path[: i + 1]), _enters_end(dag, path[: i + 1]))]
    b_idx = 0 if _enters_end(dag, tuple(reversed(path[i:]))) else 1
    return 13 + 2 * c_idx + b_idx
