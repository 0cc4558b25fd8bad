"""Exact and approximate inference over causal models.

The exact engine sweeps processes level by level, first splitting every
partial world on whether the process runs given the triggers realized so
far, then redistributing the running worlds over the process's emitted
effect subsets. Unioning emissions from co-occurring processes is what
makes distinct causes of one event act independently.

A separate brute-force enumerator recomputes the same distribution by
walking every combination of per-process choices; it exists so the sweep
can be checked against code that shares none of its mechanics.
"""
from __future__ import annotations

import dataclasses
import math
import random
from collections import defaultdict
from typing import Iterable, Mapping

from .errors import (
    ModelTooLarge,
    NoAcceptedSamples,
    StructureError,
    ZeroEvidence,
)
from .model import CausalModel, assign_levels, topological_order

Subset = frozenset[str]

DEFAULT_EVENT_CAP = 20
DEFAULT_BRANCH_CAP = 1 << 22
# masses below this magnitude are treated as float cancellation noise
CLAMP_TOL = 1e-12


@dataclasses.dataclass
class SweepStats:
    """Instrumentation from one sweep: peak working-set sizes and how
    many negative masses were clamped to zero."""

    max_atoms: int = 0
    max_live_events: int = 0
    clamp_count: int = 0


@dataclasses.dataclass(frozen=True)
class JointDistribution:
    """Sparse joint distribution: each atom maps the set of events that
    occurred (all others in ``domain`` did not) to its probability."""

    domain: tuple[str, ...]
    atoms: dict[Subset, float]
    stats: SweepStats | None = None

    def total(self) -> float:
        return sum(self.atoms.values())

    def prob(self, true: Iterable[str] = (), false: Iterable[str] = ()) -> float:
        """Mass of all atoms containing every ``true`` event and none of
        the ``false`` ones."""
        need = frozenset(true)
        ban = frozenset(false)
        return sum(
            m for j, m in self.atoms.items() if need <= j and not ban & j
        )

    def marginal(self, keep: Iterable[str]) -> "JointDistribution":
        kept = frozenset(keep)
        folded: dict[Subset, float] = defaultdict(float)
        for j, m in self.atoms.items():
            folded[j & kept] += m
        return JointDistribution(domain=tuple(sorted(kept)), atoms=dict(folded))


@dataclasses.dataclass(frozen=True)
class Query:
    """Conjunctive query: probability all ``targets`` occur, given the
    ``true`` events occurred and the ``false`` events did not."""

    targets: Subset
    true: Subset = frozenset()
    false: Subset = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "targets", frozenset(self.targets))
        object.__setattr__(self, "true", frozenset(self.true))
        object.__setattr__(self, "false", frozenset(self.false))
        clash = (self.targets | self.true) & self.false
        if clash:
            raise StructureError(
                f"events {sorted(clash)} required both true and false"
            )

    def mentioned(self) -> Subset:
        return self.targets | self.true | self.false


@dataclasses.dataclass(frozen=True)
class SampleOutcome:
    """One sampled world: the set of events that occurred."""

    occurred: Subset


def _levels_by_process(model: CausalModel) -> list[list[str]]:
    la = assign_levels(model)
    grouped: dict[int, list[str]] = defaultdict(list)
    for p in model.processes:
        grouped[la.levels[p]].append(p)
    return [sorted(grouped[lv]) for lv in sorted(grouped)]


def _sweep(
    model: CausalModel, keep: Subset | None, cap: int
) -> JointDistribution:
    """Level sweep with optional early marginalization onto ``keep``."""
    stats = SweepStats()
    la = assign_levels(model)

    if keep is None and len(model.kinds) > cap:
        raise ModelTooLarge(
            f"{len(model.kinds)} events exceed the exact-computation cap "
            f"of {cap}; prune, eliminate, or sample instead"
        )

    # level after which an event can be summed out: every table reading
    # it has by then been applied
    drop_after: dict[str, int] = {}
    if keep is not None:
        for p in model.processes:
            if p not in keep:
                drop_after[p] = la.levels[p]
        for s in model.simples:
            if s in keep:
                continue
            readers = [la.levels[q] for q in model.triggered_from[s]]
            writers = [la.levels[a] for a in model.causes_of[s]]
            drop_after[s] = max(readers + writers)

    atoms: dict[Subset, float] = {frozenset(): 1.0}
    live: set[str] = set()

    def note():
        stats.max_atoms = max(stats.max_atoms, len(atoms))
        stats.max_live_events = max(stats.max_live_events, len(live))

    for level_procs in _levels_by_process(model):
        level = la.levels[level_procs[0]]

        # occurrence split on the exact realized trigger subset
        for p in level_procs:
            trig_domain = model.trigger_set[p]
            split: dict[Subset, float] = defaultdict(float)
            for j, mass in atoms.items():
                pr_occ = model.effectual_value(p, j & trig_domain)
                if pr_occ > 0.0:
                    split[j | {p}] += mass * pr_occ
                if pr_occ < 1.0:
                    split[j] += mass * (1.0 - pr_occ)
            atoms = dict(split)
            live.add(p)
            note()

        # emission: running worlds fan out over effect subsets; the union
        # accumulates emissions of co-occurring causes into shared events
        for p in level_procs:
            rows = sorted(
                (k, w) for k, w in model.causal[p].items() if w > 0.0
            )
            fanned: dict[Subset, float] = defaultdict(float)
            for j, mass in atoms.items():
                if p in j:
                    for k, w in rows:
                        fanned[j | k] += mass * w
                else:
                    fanned[j] += mass
            atoms = dict(fanned)
            live.update(model.effects_of[p])
            note()

        if keep is not None:
            gone = {e for e in live if drop_after.get(e, -1) == level}
            if gone:
                folded: dict[Subset, float] = defaultdict(float)
                for j, mass in atoms.items():
                    folded[j - gone] += mass
                atoms = dict(folded)
                live -= gone
            if len(live) > cap:
                raise ModelTooLarge(
                    f"{len(live)} live events exceed the cap of {cap} even "
                    f"after elimination"
                )
            note()

    cleaned: dict[Subset, float] = {}
    for j, mass in atoms.items():
        if mass < 0.0:
            if mass < -CLAMP_TOL:
                raise AssertionError(f"negative mass {mass!r} beyond noise")
            stats.clamp_count += 1
            continue
        if mass > 0.0:
            cleaned[j] = mass
    domain = tuple(sorted(keep)) if keep is not None else model.events
    return JointDistribution(domain=domain, atoms=cleaned, stats=stats)


def joint_distribution(
    model: CausalModel, cap: int = DEFAULT_EVENT_CAP
) -> JointDistribution:
    """Exact joint distribution over every event in the model."""
    return _sweep(model, keep=None, cap=cap)


def joint_with_elimination(
    model: CausalModel, keep: Iterable[str], cap: int = DEFAULT_EVENT_CAP
) -> JointDistribution:
    """Exact marginal over ``keep``, summing other events out of the
    working set as soon as nothing downstream reads them."""
    kept = frozenset(keep)
    unknown = kept - set(model.kinds)
    if unknown:
        raise StructureError(f"unknown events {sorted(unknown)}")
    return _sweep(model, keep=kept, cap=cap)


def brute_force_oracle(
    model: CausalModel, branch_cap: int = DEFAULT_BRANCH_CAP
) -> JointDistribution:
    """Reference distribution by exhaustive enumeration of every
    per-process occurrence and emission choice."""
    order = [e for e in topological_order(model) if model.is_process(e)]
    branches = 1
    for p in order:
        rows = sum(1 for w in model.causal[p].values() if w > 0.0)
        branches *= 1 + rows
        if branches > branch_cap:
            raise ModelTooLarge(
                f"enumeration needs more than {branch_cap} branches"
            )

    atoms: dict[Subset, float] = defaultdict(float)

    def walk(i: int, realized: Subset, mass: float) -> None:
        if mass == 0.0:
            return
        if i == len(order):
            atoms[realized] += mass
            return
        p = order[i]
        pr_occ = model.effectual_value(p, realized & model.trigger_set[p])
        if pr_occ < 1.0:
            walk(i + 1, realized, mass * (1.0 - pr_occ))
        if pr_occ > 0.0:
            ran = realized | {p}
            for k, w in sorted(model.causal[p].items()):
                if w > 0.0:
                    walk(i + 1, ran | k, mass * pr_occ * w)

    walk(0, frozenset(), 1.0)
    return JointDistribution(domain=model.events, atoms=dict(atoms))


def relevant_subgraph(model: CausalModel, q: Query) -> CausalModel:
    """Induced submodel sufficient to answer ``q`` exactly.

    Takes the ancestor closure of the mentioned events plus the root,
    then pads in the full emission domain of every retained process so
    its table still type-checks; those padded events hang off the side
    and cannot influence the retained ones.
    """
    mentioned = q.mentioned()
    unknown = mentioned - set(model.kinds)
    if unknown:
        raise StructureError(f"unknown events {sorted(unknown)}")

    retained: set[str] = set()
    frontier = list(mentioned | {model.omega})
    while frontier:
        e = frontier.pop()
        if e in retained:
            continue
        retained.add(e)
        frontier.extend(model.parents_of(e))
    for p in [e for e in retained if model.is_process(e)]:
        retained.update(model.effects_of[p])

    return CausalModel(
        kinds={e: model.kinds[e] for e in retained},
        omega=model.omega,
        causes=frozenset(
            (p, s) for p, s in model.causes if p in retained and s in retained
        ),
        triggers=frozenset(
            (s, p) for s, p in model.triggers if s in retained and p in retained
        ),
        effectual={p: model.effectual[p] for p in retained if model.is_process(p)},
        causal={p: model.causal[p] for p in retained if model.is_process(p)},
    )


def query(
    model: CausalModel, q: Query, cap: int = DEFAULT_EVENT_CAP
) -> float:
    """pr(all targets occur | evidence), via pruning plus elimination."""
    sub = relevant_subgraph(model, q)
    jd = joint_with_elimination(sub, q.mentioned(), cap=cap)
    evidence_mass = jd.prob(true=q.true, false=q.false)
    if evidence_mass <= 0.0:
        raise ZeroEvidence(
            f"evidence (true={sorted(q.true)}, false={sorted(q.false)}) "
            f"has probability zero"
        )
    joint_mass = jd.prob(true=q.targets | q.true, false=q.false)
    return joint_mass / evidence_mass


def _draw_subset(rows: list[tuple[Subset, float]], rng: random.Random) -> Subset:
    u = rng.random()
    acc = 0.0
    for k, w in rows:
        acc += w
        if u < acc:
            return k
    return rows[-1][0]


def _sample_once(
    model: CausalModel, levels: list[list[str]], rng: random.Random
) -> Subset:
    realized: set[str] = set()
    for level_procs in levels:
        for p in level_procs:
            trig = realized & model.trigger_set[p]
            if rng.random() >= model.effectual_value(p, frozenset(trig)):
                continue
            realized.add(p)
            rows = sorted(
                (k, w) for k, w in model.causal[p].items() if w > 0.0
            )
            realized |= _draw_subset(rows, rng)
    return frozenset(realized)


def forward_sample(model: CausalModel, seed: int) -> SampleOutcome:
    """One world drawn by simulating processes in level order;
    deterministic for a fixed seed."""
    rng = random.Random(seed)
    return SampleOutcome(occurred=_sample_once(model, _levels_by_process(model), rng))


def estimate_query(
    model: CausalModel, q: Query, n: int, seed: int
) -> tuple[float, float]:
    """Rejection-sampling estimate of ``query`` with its standard error."""
    unknown = q.mentioned() - set(model.kinds)
    if unknown:
        raise StructureError(f"unknown events {sorted(unknown)}")
    levels = _levels_by_process(model)
    rng = random.Random(seed)
    kept = 0
    hits = 0
    for _ in range(n):
        world = _sample_once(model, levels, rng)
        if not q.true <= world or q.false & world:
            continue
        kept += 1
        if q.targets <= world:
            hits += 1
    if kept == 0:
        raise NoAcceptedSamples(
            f"no samples out of {n} matched the evidence"
        )
    est = hits / kept
    se = math.sqrt(est * (1.0 - est) / kept)
    return est, se


def dump_lines(jd: JointDistribution) -> list[str]:
    """Stable text form: one `ids<TAB>mass` line per atom, ids comma
    joined ('-' for the empty set), sorted by id tuple."""
    lines = []
    for key in sorted(jd.atoms, key=lambda k: tuple(sorted(k))):
        ids = ",".join(sorted(key)) or "-"
        lines.append(f"{ids}\t{jd.atoms[key]!r}")
    return lines
