"""Conversion of binary dependency-graph models (Bayes nets) into causal
models.

Each net variable becomes a process. Each net edge gets its own simple
event sitting between parent and child, emitted deterministically by the
parent; the child's occurrence table is the CPT re-keyed by which of
those edge events occurred. Root priors move into the root process's
emission table as a product distribution over per-root trigger events,
so the converted model has the same joint over the original variables.
"""
from __future__ import annotations

import dataclasses
from itertools import combinations
from typing import Mapping

from .errors import NetImportError
from .model import CausalModel, NodeKind, validate_model

Subset = frozenset[str]


@dataclasses.dataclass(frozen=True)
class DiscreteBayesNet:
    """Binary-variable net: per-variable parent lists and CPT rows keyed
    by the exact set of parents that are true."""

    variables: tuple[str, ...]
    parents: dict[str, tuple[str, ...]]
    cpt: dict[str, dict[Subset, float]]

    def roots(self) -> list[str]:
        return [v for v in self.variables if not self.parents[v]]

    def edges(self) -> list[tuple[str, str]]:
        out = []
        for child in self.variables:
            for parent in self.parents[child]:
                out.append((parent, child))
        return out


def net_from_doc(doc: Mapping) -> DiscreteBayesNet:
    """Parse and fully check the net JSON shape (variables, parents, cpt)."""
    if not isinstance(doc, Mapping) or "variables" not in doc:
        raise NetImportError("net document needs a 'variables' list")
    variables = tuple(str(v) for v in doc["variables"])
    if len(set(variables)) != len(variables):
        raise NetImportError("duplicate variable names")
    states = doc.get("states") or {}
    for v, vals in states.items():
        if len(vals) != 2:
            raise NetImportError(
                f"variable {v!r} has {len(vals)} states; only binary "
                f"variables can be converted"
            )
    raw_parents = doc.get("parents") or {}
    parents: dict[str, tuple[str, ...]] = {}
    for v in variables:
        plist = tuple(str(p) for p in raw_parents.get(v, ()))
        bad = [p for p in plist if p not in variables]
        if bad:
            raise NetImportError(f"{v!r} lists unknown parents {bad}")
        if len(set(plist)) != len(plist):
            raise NetImportError(f"{v!r} lists a parent twice")
        parents[v] = plist

    # Kahn check: conversion needs an acyclic net
    remaining = {v: set(parents[v]) for v in variables}
    ordered: list[str] = []
    while remaining:
        ready = sorted(v for v, ps in remaining.items() if not ps)
        if not ready:
            raise NetImportError(
                f"net has a cycle among {sorted(remaining)}"
            )
        for v in ready:
            del remaining[v]
            for ps in remaining.values():
                ps.discard(v)
        ordered.extend(ready)

    raw_cpt = doc.get("cpt") or {}
    cpt: dict[str, dict[Subset, float]] = {}
    for v in variables:
        rows = raw_cpt.get(v)
        if rows is None:
            raise NetImportError(f"variable {v!r} has no CPT")
        table: dict[Subset, float] = {}
        for row in rows:
            if not isinstance(row, Mapping) or "true_parents" not in row or "p" not in row:
                raise NetImportError(
                    f"{v!r}: CPT rows need 'true_parents' and 'p'"
                )
            key = frozenset(str(p) for p in row["true_parents"])
            if not key <= frozenset(parents[v]):
                raise NetImportError(
                    f"{v!r}: row keyed by non-parents {sorted(key)}"
                )
            if key in table:
                raise NetImportError(
                    f"{v!r}: duplicate row for {sorted(key)}"
                )
            try:
                p = float(row["p"])
            except (TypeError, ValueError):
                raise NetImportError(
                    f"{v!r}: probability {row['p']!r} is not a number"
                ) from None
            if not 0.0 <= p <= 1.0:
                raise NetImportError(f"{v!r}: probability {p!r} outside [0, 1]")
            table[key] = p
        if len(table) != 1 << len(parents[v]):
            raise NetImportError(
                f"{v!r}: CPT has {len(table)} rows, needs "
                f"{1 << len(parents[v])}"
            )
        cpt[v] = table
    return DiscreteBayesNet(variables=variables, parents=parents, cpt=cpt)


def _fresh_id(base: str, taken: set[str]) -> str:
    eid = base
    i = 0
    while eid in taken:
        eid = f"{base}_{i}"
        i += 1
    taken.add(eid)
    return eid


def import_dgraph(net: DiscreteBayesNet) -> CausalModel:
    """Embed the net as a causal model with identical joint behavior
    over the variable processes."""
    taken = set(net.variables)
    kinds: dict[str, NodeKind] = {v: NodeKind.PROCESS for v in net.variables}
    omega = _fresh_id("omega", taken)
    kinds[omega] = NodeKind.PROCESS

    causes: set[tuple[str, str]] = set()
    triggers: set[tuple[str, str]] = set()
    edge_event: dict[tuple[str, str], str] = {}
    for parent, child in net.edges():
        s = _fresh_id("s_{" + parent + "," + child + "}", taken)
        kinds[s] = NodeKind.SIMPLE
        edge_event[(parent, child)] = s
        causes.add((parent, s))
        triggers.add((s, child))

    root_event: dict[str, str] = {}
    for r in net.roots():
        s = _fresh_id("s_{" + omega + "," + r + "}", taken)
        kinds[s] = NodeKind.SIMPLE
        root_event[r] = s
        causes.add((omega, s))
        triggers.add((s, r))

    effectual: dict[str, dict[Subset, float]] = {}
    causal: dict[str, dict[Subset, float]] = {}

    for v in net.variables:
        if v in root_event:
            trigger = root_event[v]
            effectual[v] = {
                frozenset(): 0.0,
                frozenset({trigger}): 1.0,
            }
        else:
            table: dict[Subset, float] = {}
            for true_parents, p in net.cpt[v].items():
                key = frozenset(edge_event[(i, v)] for i in true_parents)
                table[key] = p
            effectual[v] = table

        # an occurring variable raises every outgoing edge event, always
        out = frozenset(edge_event[(v, child)] for (i, child) in net.edges() if i == v)
        causal[v] = {
            frozenset(sub): (1.0 if len(sub) == len(out) else 0.0)
            for size in range(len(out) + 1)
            for sub in combinations(sorted(out), size)
        }

    roots = net.roots()
    root_simples = sorted(root_event[r] for r in roots)
    omega_table: dict[Subset, float] = {}
    for size in range(len(root_simples) + 1):
        for sub in combinations(root_simples, size):
            key = frozenset(sub)
            mass = 1.0
            for r in roots:
                prior = net.cpt[r][frozenset()]
                mass *= prior if root_event[r] in key else 1.0 - prior
            omega_table[key] = mass
    effectual[omega] = {frozenset(): 1.0}
    causal[omega] = omega_table

    model = CausalModel(
        kinds=kinds,
        omega=omega,
        causes=frozenset(causes),
        triggers=frozenset(triggers),
        effectual=effectual,
        causal=causal,
    )
    problems = validate_model(model)
    if problems:
        raise NetImportError(
            "conversion produced an invalid model: "
            + "; ".join(p.message for p in problems)
        )
    return model


def import_dgraph_doc(doc: Mapping) -> CausalModel:
    return import_dgraph(net_from_doc(doc))


def enumerate_net(net: DiscreteBayesNet) -> dict[Subset, float]:
    """Direct joint enumeration of the net itself (test oracle): maps the
    set of true variables to its probability."""
    joint: dict[Subset, float] = {}
    n = len(net.variables)
    for mask in range(1 << n):
        true_set = frozenset(
            v for i, v in enumerate(net.variables) if mask >> i & 1
        )
        mass = 1.0
        for v in net.variables:
            p = net.cpt[v][frozenset(net.parents[v]) & true_set]
            mass *= p if v in true_set else 1.0 - p
        if mass:
            joint[true_set] = joint.get(true_set, 0.0) + mass
    return joint
