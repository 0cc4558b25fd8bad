"""Guided acquisition of emission tables, one marginal at a time.

The expert walks a sequence of event subsets and gives each subset's
marginal probability. Legal sequences visit every nonempty subset of the
effect set exactly once, never before its proper subsets, so at each
step the feasible interval for the next value is pinned down by what is
already committed. Any non-singleton entry may be defaulted instead;
completion then fills the joint by maximum entropy, which reproduces a
Markov chain when the committed set is chain-shaped.

Ranges are exact linear-program optima over the atom masses, not the
closed-form recursion from the original range-computation report, which
is not available.
"""
from __future__ import annotations

import dataclasses
import math
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy.optimize import linprog

from .algebra import SynergySpec, validate_synergy
from .errors import (
    Incoherent,
    IllegalOrder,
    InvalidSpec,
    ModelFormatError,
    NonConvergence,
    OutOfRange,
    SessionStateError,
    SingletonDefault,
    UndefinedConditional,
)

Subset = frozenset[str]

COMMIT_TOL = 1e-9
IPF_RESIDUAL = 1e-9
# near-degenerate committed marginals slow the scaling loop to a crawl
# but it still converges; the cap only bounds genuinely stuck cases
IPF_MAX_ITER = 200_000
MAX_EFFECTS = 12


@dataclasses.dataclass(frozen=True)
class LegalRange:
    lo: float
    hi: float


@dataclasses.dataclass(frozen=True)
class MarginalSequence:
    """An elicitation order over the nonempty subsets of ``events``."""

    events: tuple[str, ...]
    subsets: tuple[Subset, ...]


def counting_order(events: Sequence[str]) -> MarginalSequence:
    """Canonical legal order: subsets in binary-counting order, so each
    new event's block revisits everything seen so far combined with it."""
    events = tuple(events)
    subsets = []
    for mask in range(1, 1 << len(events)):
        subsets.append(
            frozenset(e for i, e in enumerate(events) if mask >> i & 1)
        )
    return MarginalSequence(events=events, subsets=tuple(subsets))


def is_legal_order(seq: MarginalSequence) -> bool:
    """Every nonempty subset exactly once, each after all its proper
    nonempty subsets."""
    universe = frozenset(seq.events)
    if len(seq.events) != len(universe):
        return False
    expected = (1 << len(universe)) - 1
    seen: set[Subset] = set()
    for sub in seq.subsets:
        if not sub or not sub <= universe or sub in seen:
            return False
        for e in sub:
            smaller = sub - {e}
            if smaller and smaller not in seen:
                return False
        seen.add(sub)
    return len(seen) == expected


@dataclasses.dataclass(frozen=True)
class ElicitationSession:
    """One expert's walk through a marginal sequence for one process."""

    process: str
    sequence: MarginalSequence
    position: int = 0
    commitments: dict[Subset, float] = dataclasses.field(default_factory=dict)
    defaulted: frozenset[Subset] = frozenset()

    @property
    def done(self) -> bool:
        return self.position >= len(self.sequence.subsets)

    @property
    def current(self) -> Subset:
        if self.done:
            raise SessionStateError("session already visited every subset")
        return self.sequence.subsets[self.position]


def start_session(
    process: str,
    effects: Sequence[str],
    seq: MarginalSequence | None = None,
) -> ElicitationSession:
    effects = tuple(effects)
    if len(effects) > MAX_EFFECTS:
        raise SessionStateError(
            f"{len(effects)} effects exceed the elicitation cap of "
            f"{MAX_EFFECTS}"
        )
    if not effects:
        raise SessionStateError("nothing to elicit for an effect-free process")
    if seq is None:
        seq = counting_order(effects)
    if frozenset(seq.events) != frozenset(effects) or not is_legal_order(seq):
        raise IllegalOrder(
            f"sequence is not a legal order over {sorted(effects)}"
        )
    return ElicitationSession(process=process, sequence=seq)


def _masks(events: tuple[str, ...]) -> dict[str, int]:
    return {e: 1 << i for i, e in enumerate(events)}


def _subset_mask(subset: Subset, bit: Mapping[str, int]) -> int:
    m = 0
    for e in subset:
        m |= bit[e]
    return m


def _indicator(n_atoms: int, mask: int) -> np.ndarray:
    idx = np.arange(n_atoms)
    return ((idx & mask) == mask).astype(float)


def _constraint_system(session: ElicitationSession):
    events = session.sequence.events
    bit = _masks(events)
    n_atoms = 1 << len(events)
    rows = [np.ones(n_atoms)]
    rhs = [1.0]
    for sub in session.sequence.subsets:
        if sub in session.commitments:
            rows.append(_indicator(n_atoms, _subset_mask(sub, bit)))
            rhs.append(session.commitments[sub])
    return np.vstack(rows), np.array(rhs), bit, n_atoms


def next_range(session: ElicitationSession) -> LegalRange:
    """Exact feasible interval for the marginal at the current position."""
    target = session.current
    a_eq, b_eq, bit, n_atoms = _constraint_system(session)
    objective = _indicator(n_atoms, _subset_mask(target, bit))

    lo_res = linprog(objective, A_eq=a_eq, b_eq=b_eq, bounds=(0, None), method="highs")
    hi_res = linprog(-objective, A_eq=a_eq, b_eq=b_eq, bounds=(0, None), method="highs")
    if not lo_res.success or not hi_res.success:
        raise Incoherent(
            "committed marginals admit no distribution; ranges were bypassed"
        )
    lo = max(0.0, float(lo_res.fun))
    hi = min(1.0, float(-hi_res.fun))
    if lo > hi:
        lo = hi = (lo + hi) / 2.0
    return LegalRange(lo=lo, hi=hi)


def _advance(session: ElicitationSession, **changes) -> ElicitationSession:
    return dataclasses.replace(session, position=session.position + 1, **changes)


def commit(session: ElicitationSession, value: float) -> ElicitationSession:
    """Record the current subset's marginal and move on."""
    rng = next_range(session)
    if value < rng.lo - COMMIT_TOL or value > rng.hi + COMMIT_TOL:
        raise OutOfRange(value, rng.lo, rng.hi)
    committed = dict(session.commitments)
    committed[session.current] = float(value)
    return _advance(session, commitments=committed)


def commit_conditional(
    session: ElicitationSession, given: Iterable[str], value: float
) -> ElicitationSession:
    """Accept pr(rest / given) for the current subset and commit the
    implied joint value."""
    given = frozenset(given)
    target = session.current
    if not given or not given < target:
        raise UndefinedConditional(
            f"conditioning set {sorted(given)} must be a proper nonempty "
            f"part of {sorted(target)}"
        )
    if given not in session.commitments:
        raise UndefinedConditional(
            f"pr({','.join(sorted(given))}) has not been committed yet"
        )
    base = session.commitments[given]
    if base <= 0.0:
        raise UndefinedConditional(
            f"pr({','.join(sorted(given))}) is zero; the conditional is undefined"
        )
    return commit(session, value * base)


def default_current(session: ElicitationSession) -> ElicitationSession:
    """Skip the current subset, leaving it to max-entropy completion."""
    target = session.current
    if len(target) == 1:
        raise SingletonDefault(
            f"pr({next(iter(target))}) must be given, not defaulted"
        )
    return _advance(session, defaulted=session.defaulted | {target})


def session_to_constraints(
    session: ElicitationSession,
) -> list[tuple[Subset, float | None]]:
    """Visited entries in order; None marks a defaulted subset."""
    out: list[tuple[Subset, float | None]] = []
    for sub in session.sequence.subsets[: session.position]:
        if sub in session.defaulted:
            out.append((sub, None))
        else:
            out.append((sub, session.commitments[sub]))
    return out


def complete(session: ElicitationSession) -> dict[Subset, float]:
    """Maximum-entropy joint over effect subsets matching every committed
    marginal, fitted by iterative proportional scaling.

    Returns an explicit emission table: one entry per subset of the
    effect set (the atom where exactly that subset is produced).
    """
    if not session.done:
        raise SessionStateError(
            f"{len(session.sequence.subsets) - session.position} entries "
            f"still pending"
        )
    # sessions restored from documents can carry commitments that never
    # passed a range check, so test feasibility before scaling
    a_eq, b_eq, _, _ = _constraint_system(session)
    feas = linprog(
        np.zeros(a_eq.shape[1]), A_eq=a_eq, b_eq=b_eq, bounds=(0, None),
        method="highs",
    )
    if not feas.success:
        raise Incoherent("committed marginals admit no distribution")
    events = session.sequence.events
    bit = _masks(events)
    n_atoms = 1 << len(events)
    idx = np.arange(n_atoms)
    constraints = []
    for sub in session.sequence.subsets:
        if sub in session.commitments:
            mask = _subset_mask(sub, bit)
            constraints.append(((idx & mask) == mask, session.commitments[sub]))

    x = np.full(n_atoms, 1.0 / n_atoms)
    residual = 0.0
    for iteration in range(1, IPF_MAX_ITER + 1):
        for sel, v in constraints:
            cur = float(x[sel].sum())
            comp = 1.0 - cur
            if v > 0.0:
                if cur <= 0.0:
                    raise Incoherent(
                        "no remaining mass can satisfy a committed marginal"
                    )
                x[sel] *= v / cur
            else:
                x[sel] = 0.0
            if v >= 1.0:
                x[~sel] = 0.0
            elif comp > 0.0:
                x[~sel] *= (1.0 - v) / comp
            elif comp < 1e-12 and cur >= 1.0 - 1e-12 and v >= 1.0 - 1e-12:
                x[~sel] = 0.0
            else:
                raise Incoherent(
                    "no remaining mass outside a committed marginal"
                )
        residual = max(
            (abs(float(x[sel].sum()) - v) for sel, v in constraints),
            default=0.0,
        )
        if residual <= IPF_RESIDUAL:
            break
    else:
        raise NonConvergence(residual, IPF_MAX_ITER)

    table: dict[Subset, float] = {}
    for atom in range(n_atoms):
        sub = frozenset(e for e in events if atom & bit[e])
        table[sub] = float(x[atom])
    return table


def session_to_doc(session: ElicitationSession) -> dict:
    return {
        "process": session.process,
        "events": list(session.sequence.events),
        "subsets": [sorted(s) for s in session.sequence.subsets],
        "position": session.position,
        "commitments": [
            {"subset": sorted(s), "value": v}
            for s, v in sorted(
                session.commitments.items(), key=lambda kv: (len(kv[0]), sorted(kv[0]))
            )
        ],
        "defaulted": sorted(
            (sorted(s) for s in session.defaulted), key=lambda ids: (len(ids), ids)
        ),
    }


def session_from_doc(doc: Mapping) -> ElicitationSession:
    try:
        seq = MarginalSequence(
            events=tuple(str(e) for e in doc["events"]),
            subsets=tuple(frozenset(map(str, s)) for s in doc["subsets"]),
        )
        session = ElicitationSession(
            process=str(doc["process"]),
            sequence=seq,
            position=int(doc["position"]),
            commitments={
                frozenset(map(str, entry["subset"])): float(entry["value"])
                for entry in doc["commitments"]
            },
            defaulted=frozenset(
                frozenset(map(str, s)) for s in doc["defaulted"]
            ),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ModelFormatError(f"bad session document: {exc}") from exc
    if not is_legal_order(seq):
        raise IllegalOrder("stored sequence is not a legal order")
    return session


def synergy_param_range(
    spec: SynergySpec,
    kind: str,
    key: str | Subset,
    tol: float = 1e-9,
    probe: float = 1e9,
) -> LegalRange:
    """Feasible interval for one compressed-table weight, holding the
    others fixed, found by bisecting the validity checks.

    Synergy weights can be unbounded below; ``lo`` is ``-inf`` when even
    ``-probe`` validates.
    """
    if kind not in ("base", "synergy", "necessity"):
        raise ValueError(f"unknown weight kind {kind!r}")
    if kind == "synergy":
        key = frozenset(key)  # type: ignore[arg-type]

    def with_value(t: float) -> SynergySpec:
        store = dict(getattr(spec, kind))
        store[key] = t
        return dataclasses.replace(spec, **{kind: store})

    def ok(t: float) -> bool:
        return not validate_synergy(with_value(t))

    current = getattr(spec, kind).get(key, 0.0)
    anchor = None
    for candidate in (current, 0.0):
        if ok(candidate):
            anchor = candidate
            break
    if anchor is None:
        raise InvalidSpec(validate_synergy(with_value(current)))

    def bisect(good: float, bad: float) -> float:
        while abs(bad - good) > tol:
            mid = (good + bad) / 2.0
            if ok(mid):
                good = mid
            else:
                bad = mid
        return good

    hi = 1.0 if ok(1.0) else bisect(anchor, 1.0)
    if kind == "synergy":
        lo = -math.inf if ok(-probe) else bisect(anchor, -probe)
    else:
        lo = 0.0 if ok(0.0) else bisect(anchor, 0.0)
    return LegalRange(lo=lo, hi=hi)
