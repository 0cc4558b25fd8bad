"""Causal-model definition, validation, levels, and serialization.

A model is a bipartite acyclic graph over two kinds of events. Process
events carry two tables: an occurrence table (``effectual``) giving the
probability the process runs for each exact subset of its trigger events,
and an emission table (``causal``) giving the distribution over which
subset of its direct effects it produces when it runs. A distinguished
root process (``omega``) runs with probability one and its emission table
encodes the priors, and any correlations, of the otherwise-uncaused simple
events.
"""
from __future__ import annotations

import dataclasses
import enum
import json
from functools import cached_property
from typing import Mapping, Union

from .algebra import SynergySpec, validate_synergy
from .errors import (
    BipartiteViolation,
    CycleError,
    InvalidSpec,
    ModelFormatError,
    NormalizationError,
    RangeError,
    StructureError,
    TableDomainError,
    Violation,
)

CAUSAL_SUM_TOL = 1e-9
DUMMY_PREFIX = "__dummy_"

Subset = frozenset[str]
ExplicitTable = dict[Subset, float]
EffectualTable = Union[ExplicitTable, SynergySpec]


class NodeKind(str, enum.Enum):
    PROCESS = "process"
    SIMPLE = "simple"


# build_model raises the exception matching the first violation's rule
_RULE_ERRORS = {
    "cycle": CycleError,
    "bipartite": BipartiteViolation,
    "table-domain": TableDomainError,
    "normalization": NormalizationError,
    "range": RangeError,
    "structure": StructureError,
    "synergy": InvalidSpec,
}


@dataclasses.dataclass(frozen=True)
class LevelAssignment:
    """Longest-path distance from the root for every event."""

    levels: dict[str, int]
    depth: int


@dataclasses.dataclass(frozen=True)
class CausalModel:
    """Immutable validated causal model.

    ``causes`` edges run process -> simple; ``triggers`` edges run
    simple -> process. ``effectual`` maps each process to its occurrence
    table (explicit subset map or a compressed :class:`SynergySpec`);
    ``causal`` maps each process to its emission distribution over
    effect subsets.
    """

    kinds: dict[str, NodeKind]
    omega: str
    causes: frozenset[tuple[str, str]]
    triggers: frozenset[tuple[str, str]]
    effectual: dict[str, EffectualTable]
    causal: dict[str, ExplicitTable]

    @cached_property
    def events(self) -> tuple[str, ...]:
        return tuple(sorted(self.kinds))

    @cached_property
    def processes(self) -> tuple[str, ...]:
        return tuple(e for e in self.events if self.kinds[e] is NodeKind.PROCESS)

    @cached_property
    def simples(self) -> tuple[str, ...]:
        return tuple(e for e in self.events if self.kinds[e] is NodeKind.SIMPLE)

    @cached_property
    def effects_of(self) -> dict[str, Subset]:
        """Direct effects of each process (its emission-table domain)."""
        out: dict[str, set[str]] = {p: set() for p in self.processes}
        for p, s in self.causes:
            out.setdefault(p, set()).add(s)
        return {p: frozenset(v) for p, v in out.items()}

    @cached_property
    def trigger_set(self) -> dict[str, Subset]:
        """Direct trigger events of each process (occurrence-table domain)."""
        out: dict[str, set[str]] = {p: set() for p in self.processes}
        for s, p in self.triggers:
            out.setdefault(p, set()).add(s)
        return {p: frozenset(v) for p, v in out.items()}

    @cached_property
    def causes_of(self) -> dict[str, Subset]:
        """Direct causing processes of each simple event."""
        out: dict[str, set[str]] = {s: set() for s in self.simples}
        for p, s in self.causes:
            out.setdefault(s, set()).add(p)
        return {s: frozenset(v) for s, v in out.items()}

    @cached_property
    def triggered_from(self) -> dict[str, Subset]:
        """Processes reading each simple event as a trigger."""
        out: dict[str, set[str]] = {s: set() for s in self.simples}
        for s, p in self.triggers:
            out.setdefault(s, set()).add(p)
        return {s: frozenset(v) for s, v in out.items()}

    def effectual_value(self, process: str, occurred: Subset) -> float:
        """Occurrence probability of ``process`` given exactly ``occurred``
        among its triggers occurred."""
        table = self.effectual[process]
        if isinstance(table, SynergySpec):
            return table.evaluate(occurred)
        try:
            return table[frozenset(occurred)]
        except KeyError:
            raise TableDomainError(
                f"effectual table of {process!r} has no entry for "
                f"{sorted(occurred)}"
            ) from None

    def parents_of(self, event: str) -> Subset:
        if self.kinds[event] is NodeKind.PROCESS:
            return self.trigger_set[event]
        return self.causes_of[event]

    def is_process(self, event: str) -> bool:
        return self.kinds[event] is NodeKind.PROCESS


def _parse_subset(raw, where: str) -> Subset:
    if not isinstance(raw, (list, tuple)):
        raise ModelFormatError(f"{where}: subset must be a list of ids")
    ids = [str(x) for x in raw]
    if len(set(ids)) != len(ids):
        raise ModelFormatError(f"{where}: duplicate id in subset {ids}")
    return frozenset(ids)


def _parse_table(raw, where: str) -> ExplicitTable:
    if not isinstance(raw, list):
        raise ModelFormatError(f"{where}: table must be a list of entries")
    table: ExplicitTable = {}
    for entry in raw:
        if not isinstance(entry, dict) or "subset" not in entry or "p" not in entry:
            raise ModelFormatError(f"{where}: entry needs 'subset' and 'p'")
        key = _parse_subset(entry["subset"], where)
        if key in table:
            raise ModelFormatError(f"{where}: duplicate subset {sorted(key)}")
        try:
            table[key] = float(entry["p"])
        except (TypeError, ValueError):
            raise ModelFormatError(
                f"{where}: probability {entry['p']!r} is not a number"
            ) from None
    return table


def parse_model(doc: Mapping) -> CausalModel:
    """Parse a model document (the JSON wire shape) without checking the
    model invariants; pair with :func:`validate_model`."""
    if not isinstance(doc, Mapping):
        raise ModelFormatError("model document must be a mapping")
    for key in ("events", "omega", "causes", "triggers"):
        if key not in doc:
            raise ModelFormatError(f"model document missing {key!r}")

    kinds: dict[str, NodeKind] = {}
    for entry in doc["events"]:
        if not isinstance(entry, dict) or "id" not in entry or "kind" not in entry:
            raise ModelFormatError("each event needs 'id' and 'kind'")
        eid = str(entry["id"])
        if not eid:
            raise ModelFormatError("event id must be a nonempty string")
        if eid in kinds:
            raise ModelFormatError(f"duplicate event id {eid!r}")
        try:
            kinds[eid] = NodeKind(entry["kind"])
        except ValueError:
            raise ModelFormatError(
                f"event {eid!r}: kind must be 'process' or 'simple'"
            ) from None

    def edge_list(key: str) -> frozenset[tuple[str, str]]:
        edges = set()
        for raw in doc[key]:
            if not isinstance(raw, (list, tuple)) or len(raw) != 2:
                raise ModelFormatError(f"{key}: each edge is a [tail, head] pair")
            edges.add((str(raw[0]), str(raw[1])))
        return frozenset(edges)

    causes = edge_list("causes")
    triggers = edge_list("triggers")

    effectual: dict[str, EffectualTable] = {}
    for pid, raw in (doc.get("effectual") or {}).items():
        effectual[str(pid)] = _parse_table(raw, f"effectual[{pid}]")
    for pid, raw in (doc.get("synergy") or {}).items():
        pid = str(pid)
        if pid in effectual:
            raise ModelFormatError(
                f"process {pid!r} has both explicit and compressed effectual tables"
            )
        effectual[pid] = SynergySpec.from_doc(raw)

    causal: dict[str, ExplicitTable] = {}
    for pid, raw in (doc.get("causal") or {}).items():
        causal[str(pid)] = _parse_table(raw, f"causal[{pid}]")

    # implicit trivial tables: the root has no triggers, leaf processes no effects
    omega = str(doc["omega"])
    trigger_parents: dict[str, set[str]] = {}
    effect_children: dict[str, set[str]] = {}
    for s, p in triggers:
        trigger_parents.setdefault(p, set()).add(s)
    for p, s in causes:
        effect_children.setdefault(p, set()).add(s)
    for eid, kind in kinds.items():
        if kind is not NodeKind.PROCESS:
            continue
        if eid not in effectual and not trigger_parents.get(eid):
            effectual[eid] = {frozenset(): 1.0}
        if eid not in causal and not effect_children.get(eid):
            causal[eid] = {frozenset(): 1.0}

    return CausalModel(
        kinds=kinds,
        omega=omega,
        causes=causes,
        triggers=triggers,
        effectual=effectual,
        causal=causal,
    )


def build_model(doc: Mapping) -> CausalModel:
    """Parse and validate a model document.

    Raises the typed error for the first violation found; use
    :func:`parse_model` plus :func:`validate_model` to collect all of
    them without raising.
    """
    model = parse_model(doc)
    violations = validate_model(model)
    if violations:
        first = violations[0]
        exc = _RULE_ERRORS.get(first.rule, StructureError)
        if exc is CycleError:
            raise CycleError(first.location.split("->"))
        if exc is BipartiteViolation:
            raise BipartiteViolation(tuple(first.location.split("->")), first.message)
        if exc is InvalidSpec:
            raise InvalidSpec([x for x in violations if x.rule == "synergy"])
        raise exc(first.message)
    return model


def _find_cycle(nodes, out_edges) -> list[str]:
    """Return one closed node sequence lying on a cycle."""
    WHITE, GREY, BLACK = 0, 1, 2
    color = {n: WHITE for n in nodes}
    stack: list[str] = []

    def visit(n: str) -> list[str] | None:
        color[n] = GREY
        stack.append(n)
        for m in sorted(out_edges.get(n, ())):
            if color.get(m, BLACK) == GREY:
                i = stack.index(m)
                return stack[i:] + [m]
            if color.get(m, BLACK) == WHITE:
                found = visit(m)
                if found:
                    return found
        stack.pop()
        color[n] = BLACK
        return None

    for n in sorted(nodes):
        if color[n] == WHITE:
            found = visit(n)
            if found:
                return found
    raise AssertionError("no cycle found")


def validate_model(model: CausalModel) -> list[Violation]:
    """Check every model invariant; returns records instead of raising."""
    v: list[Violation] = []
    kinds = model.kinds

    def unknown(edge, which):
        for end in edge:
            if end not in kinds:
                v.append(
                    Violation(
                        "structure",
                        "->".join(edge),
                        f"{which} edge {edge} references unknown event {end!r}",
                    )
                )
                return True
        return False

    for edge in sorted(model.causes):
        if unknown(edge, "causes"):
            continue
        p, s = edge
        if kinds[p] is not NodeKind.PROCESS or kinds[s] is not NodeKind.SIMPLE:
            v.append(
                Violation(
                    "bipartite",
                    "->".join(edge),
                    f"causes edge {edge} must run process -> simple",
                )
            )
    for edge in sorted(model.triggers):
        if unknown(edge, "triggers"):
            continue
        s, p = edge
        if kinds[s] is not NodeKind.SIMPLE or kinds[p] is not NodeKind.PROCESS:
            v.append(
                Violation(
                    "bipartite",
                    "->".join(edge),
                    f"triggers edge {edge} must run simple -> process",
                )
            )
    if v:
        return v

    out_edges: dict[str, set[str]] = {}
    for p, s in model.causes:
        out_edges.setdefault(p, set()).add(s)
    for s, p in model.triggers:
        out_edges.setdefault(s, set()).add(p)

    # acyclicity via Kahn; report one concrete cycle if it fails
    indeg = {n: 0 for n in kinds}
    for tail, heads in out_edges.items():
        for h in heads:
            indeg[h] += 1
    queue = sorted(n for n, d in indeg.items() if d == 0)
    seen = 0
    frontier = list(queue)
    while frontier:
        n = frontier.pop()
        seen += 1
        for m in out_edges.get(n, ()):
            indeg[m] -= 1
            if indeg[m] == 0:
                frontier.append(m)
    if seen != len(kinds):
        cyclic = {n for n, d in indeg.items() if d > 0}
        cycle = _find_cycle(cyclic, out_edges)
        v.append(Violation("cycle", "->".join(cycle), "model contains a cycle"))
        return v

    omega = model.omega
    if omega not in kinds:
        v.append(Violation("structure", omega, f"omega {omega!r} is not an event"))
        return v
    if kinds[omega] is not NodeKind.PROCESS:
        v.append(Violation("structure", omega, "omega must be a process event"))
    if model.trigger_set.get(omega):
        v.append(Violation("structure", omega, "omega may not have trigger parents"))
    root_table = model.effectual.get(omega)
    if root_table is not None and (
        isinstance(root_table, SynergySpec)
        or root_table != {frozenset(): 1.0}
    ):
        v.append(
            Violation(
                "structure", omega, "omega must occur with probability one"
            )
        )

    for field in ("effectual", "causal"):
        for pid in sorted(getattr(model, field)):
            if kinds.get(pid) is not NodeKind.PROCESS:
                v.append(
                    Violation(
                        "structure",
                        pid,
                        f"{field} table for {pid!r}, which is not a process",
                    )
                )

    for p in model.processes:
        if p != omega and not model.trigger_set[p]:
            v.append(
                Violation(
                    "structure",
                    p,
                    f"process {p!r} has no triggers; only omega may be uncaused",
                )
            )
    for s in model.simples:
        if not model.causes_of[s]:
            v.append(
                Violation(
                    "structure",
                    s,
                    f"simple event {s!r} has no cause; attach it under omega",
                )
            )

    for p in model.processes:
        table = model.effectual.get(p)
        if table is None:
            v.append(Violation("table-domain", p, f"process {p!r} has no effectual table"))
            continue
        if isinstance(table, SynergySpec):
            if table.target != p:
                v.append(
                    Violation(
                        "synergy",
                        p,
                        f"compressed table stored under {p!r} targets "
                        f"{table.target!r}",
                    )
                )
            if frozenset(table.parents) != model.trigger_set[p]:
                v.append(
                    Violation(
                        "synergy",
                        p,
                        f"compressed table of {p!r} covers {sorted(table.parents)}, "
                        f"triggers are {sorted(model.trigger_set[p])}",
                    )
                )
            for sv in validate_synergy(table):
                v.append(Violation("synergy", f"{p}:{sv.location}", sv.message))
            continue
        v.extend(
            _check_table_domain(
                table, model.trigger_set[p], f"effectual table of {p!r}"
            )
        )

    for p in model.processes:
        table = model.causal.get(p)
        if table is None:
            v.append(Violation("table-domain", p, f"process {p!r} has no causal table"))
            continue
        v.extend(
            _check_table_domain(table, model.effects_of[p], f"causal table of {p!r}")
        )
        total = sum(table.values())
        if abs(total - 1.0) > CAUSAL_SUM_TOL:
            v.append(
                Violation(
                    "normalization",
                    p,
                    f"causal table of {p!r} sums to {total!r}, must be 1",
                )
            )
    return v


def _check_table_domain(table: ExplicitTable, domain: Subset, where: str):
    v = []
    expected = 1 << len(domain)
    for key in table:
        if not key <= domain:
            v.append(
                Violation(
                    "table-domain",
                    where,
                    f"{where}: subset {sorted(key)} not within {sorted(domain)}",
                )
            )
    if len(table) != expected or any(not k <= domain for k in table):
        missing = _missing_subsets(table, domain)
        if missing:
            v.append(
                Violation(
                    "table-domain",
                    where,
                    f"{where}: missing entry for {sorted(missing[0])}",
                )
            )
    for key, value in table.items():
        if not 0.0 <= value <= 1.0:
            v.append(
                Violation(
                    "range",
                    where,
                    f"{where}: value {value!r} at {sorted(key)} outside [0, 1]",
                )
            )
    return v


def _missing_subsets(table: ExplicitTable, domain: Subset) -> list[Subset]:
    ids = sorted(domain)
    missing = []
    for mask in range(1 << len(ids)):
        sub = frozenset(ids[i] for i in range(len(ids)) if mask >> i & 1)
        if sub not in table:
            missing.append(sub)
    return missing


def topological_order(model: CausalModel) -> list[str]:
    """Deterministic topological order over all events (parents first)."""
    out_edges: dict[str, list[str]] = {n: [] for n in model.kinds}
    indeg = {n: 0 for n in model.kinds}
    for p, s in model.causes:
        out_edges[p].append(s)
        indeg[s] += 1
    for s, p in model.triggers:
        out_edges[s].append(p)
        indeg[p] += 1
    ready = sorted(n for n, d in indeg.items() if d == 0)
    order = []
    while ready:
        n = ready.pop(0)
        order.append(n)
        for m in sorted(out_edges[n]):
            indeg[m] -= 1
            if indeg[m] == 0:
                ready.append(m)
        ready.sort()
    if len(order) != len(model.kinds):
        raise CycleError([n for n, d in indeg.items() if d > 0])
    return order


def assign_levels(model: CausalModel) -> LevelAssignment:
    """Longest-path level of every event; the root sits at level 0.

    Processes land on even levels and simple events on odd ones because
    every path alternates kinds.
    """
    levels = {model.omega: 0}
    for n in topological_order(model):
        base = levels.get(n)
        if base is None:
            continue
        for m in _children(model, n):
            levels[m] = max(levels.get(m, 0), base + 1)
    depth = max(levels.values()) if levels else 0
    return LevelAssignment(levels=levels, depth=depth)


def _children(model: CausalModel, n: str):
    if model.kinds[n] is NodeKind.PROCESS:
        return sorted(model.effects_of[n])
    return sorted(model.triggered_from[n])


def normalize_structure(model: CausalModel) -> CausalModel:
    """Insert pass-through dummy chains so every edge spans adjacent levels.

    A dummy process occurs iff its single trigger occurred and then emits
    its single effect with probability one, so the joint distribution over
    the original events is unchanged. Returns ``model`` itself when no
    edge needs padding.
    """
    la = assign_levels(model)
    long_causes = sorted(
        (p, s) for p, s in model.causes if la.levels[s] - la.levels[p] > 1
    )
    long_triggers = sorted(
        (s, p) for s, p in model.triggers if la.levels[p] - la.levels[s] > 1
    )
    if not long_causes and not long_triggers:
        return model

    kinds = dict(model.kinds)
    causes = set(model.causes)
    triggers = set(model.triggers)
    effectual: dict[str, EffectualTable] = dict(model.effectual)
    causal: dict[str, ExplicitTable] = dict(model.causal)
    counter = 0

    def fresh(kind: NodeKind) -> str:
        nonlocal counter
        while True:
            eid = f"{DUMMY_PREFIX}{counter}"
            counter += 1
            if eid not in kinds:
                kinds[eid] = kind
                return eid

    def chain(tail: str, head: str, gap: int, first_kind: NodeKind) -> None:
        """Replace tail->head with a pass-through chain of gap-1 dummies."""
        nodes = [tail]
        kind = first_kind
        for _ in range(gap - 1):
            nodes.append(fresh(kind))
            kind = (
                NodeKind.SIMPLE if kind is NodeKind.PROCESS else NodeKind.PROCESS
            )
        nodes.append(head)
        for a, b in zip(nodes, nodes[1:]):
            if kinds[a] is NodeKind.PROCESS:
                causes.add((a, b))
            else:
                triggers.add((a, b))
        for n in nodes[1:-1]:
            if kinds[n] is not NodeKind.PROCESS:
                continue
            i = nodes.index(n)
            effectual[n] = {frozenset(): 0.0, frozenset({nodes[i - 1]}): 1.0}
            causal[n] = {frozenset(): 0.0, frozenset({nodes[i + 1]}): 1.0}

    def rekey(table: ExplicitTable, old: str, new: str) -> ExplicitTable:
        return {
            frozenset(new if x == old else x for x in key): val
            for key, val in table.items()
        }

    for s, p in long_triggers:
        gap = la.levels[p] - la.levels[s]
        triggers.discard((s, p))
        before = set(triggers) | set(causes)
        chain(s, p, gap, NodeKind.PROCESS)
        # the dummy simple now feeding p replaces s in p's occurrence table
        new_edges = (set(triggers) | set(causes)) - before
        feeder = next(t for t, h in new_edges if h == p)
        tab = effectual[p]
        if isinstance(tab, SynergySpec):
            effectual[p] = tab.rename({s: feeder})
        else:
            effectual[p] = rekey(tab, s, feeder)

    for p, s in long_causes:
        gap = la.levels[s] - la.levels[p]
        causes.discard((p, s))
        before = set(triggers) | set(causes)
        chain(p, s, gap, NodeKind.SIMPLE)
        new_edges = (set(triggers) | set(causes)) - before
        first = next(h for t, h in new_edges if t == p)
        causal[p] = rekey(causal[p], s, first)

    return CausalModel(
        kinds=kinds,
        omega=model.omega,
        causes=frozenset(causes),
        triggers=frozenset(triggers),
        effectual=effectual,
        causal=causal,
    )


def _table_to_doc(table: ExplicitTable) -> list[dict]:
    entries = sorted(table.items(), key=lambda kv: (len(kv[0]), sorted(kv[0])))
    return [{"subset": sorted(key), "p": val} for key, val in entries]


def model_to_doc(model: CausalModel) -> dict:
    """Serialize to the JSON document shape accepted by :func:`build_model`."""
    doc: dict = {
        "events": [
            {"id": e, "kind": model.kinds[e].value} for e in model.events
        ],
        "omega": model.omega,
        "causes": [list(e) for e in sorted(model.causes)],
        "triggers": [list(e) for e in sorted(model.triggers)],
        "effectual": {},
        "causal": {},
    }
    synergy = {}
    for p in model.processes:
        table = model.effectual[p]
        if isinstance(table, SynergySpec):
            synergy[p] = table.to_doc()
        else:
            doc["effectual"][p] = _table_to_doc(table)
        doc["causal"][p] = _table_to_doc(model.causal[p])
    if synergy:
        doc["synergy"] = synergy
    return doc


def dumps(model: CausalModel) -> str:
    return json.dumps(model_to_doc(model), indent=2, ensure_ascii=False)


def loads(text: str) -> CausalModel:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelFormatError(f"not valid JSON: {exc}") from exc
    return build_model(doc)


def load_model(path) -> CausalModel:
    with open(path, encoding="utf-8") as fh:
        return loads(fh.read())


def save_model(model: CausalModel, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps(model))
        fh.write("\n")
