"""Noisy-OR and its compressed generalizations for occurrence tables.

An explicit occurrence table needs one probability per subset of a
process's triggers. The compressed form here needs only a base
probability per single cause, optional ``synergy`` weights letting small
cause subsets reinforce or inhibit each other, and optional ``necessity``
weights suppressing the effect when a required cause is absent. With all
weights zero the form collapses to plain noisy-OR.
"""
from __future__ import annotations

import dataclasses
from functools import cached_property
from typing import TYPE_CHECKING, Iterable, Mapping

from .errors import (
    InvalidSpec,
    ModelFormatError,
    NotParent,
    NotSimple,
    ShapeError,
    UnknownCause,
    Violation,
)

if TYPE_CHECKING:
    from .model import CausalModel

Subset = frozenset[str]

DEFAULT_SYNERGY_ARITY = 3
# slack for float noise in the product-range checks, never for real slack
_PRODUCT_TOL = 1e-12


def _label(subset: Iterable[str]) -> str:
    ids = sorted(subset)
    return "{" + ",".join(ids) + "}" if ids else "{}"


def noisy_or(base: Mapping[str, float], occurred: Iterable[str]) -> float:
    """Probability of the effect when each occurred cause fails to
    produce it independently with probability 1 - base[cause]."""
    miss = 1.0
    for cause in sorted(set(occurred)):
        if cause not in base:
            raise UnknownCause(cause)
        miss *= 1.0 - base[cause]
    return 1.0 - miss


@dataclasses.dataclass(frozen=True)
class SynergySpec:
    """Compressed occurrence table for ``target`` over ``parents``.

    ``base`` maps a single cause to the probability it alone produces the
    target. ``synergy`` maps a cause subset (two or more members, at most
    ``max_synergy_arity``) to an interaction weight in (-inf, 1]; positive
    weights raise the probability beyond noisy-OR, negative ones lower
    it. ``necessity`` maps a single cause to the probability its absence
    suppresses the target outright. Omitted weights are zero.
    """

    target: str
    parents: tuple[str, ...]
    base: dict[str, float]
    synergy: dict[Subset, float] = dataclasses.field(default_factory=dict)
    necessity: dict[str, float] = dataclasses.field(default_factory=dict)
    max_synergy_arity: int = DEFAULT_SYNERGY_ARITY

    @cached_property
    def violations(self) -> tuple[Violation, ...]:
        return tuple(validate_synergy(self))

    def miss_product(self, occurred: Subset) -> float:
        """Product of failure factors over the occurred causes and every
        wholly occurred synergy subset."""
        miss = 1.0
        for c in sorted(occurred):
            miss *= 1.0 - self.base.get(c, 0.0)
        for sub, sy in sorted(
            self.synergy.items(), key=lambda kv: (len(kv[0]), sorted(kv[0]))
        ):
            if sy != 0.0 and sub <= occurred:
                miss *= 1.0 - sy
        return miss

    def absence_product(self, absent: Subset) -> float:
        damp = 1.0
        for c in sorted(absent):
            damp *= 1.0 - self.necessity.get(c, 0.0)
        return damp

    def raw_value(self, occurred: Subset) -> float:
        """The occurrence probability formula with no validity checks."""
        absent = frozenset(self.parents) - occurred
        return (1.0 - self.miss_product(occurred)) * self.absence_product(absent)

    def evaluate(self, occurred: Iterable[str]) -> float:
        occ = frozenset(occurred)
        extra = occ - frozenset(self.parents)
        if extra:
            raise UnknownCause(sorted(extra)[0])
        if self.violations:
            raise InvalidSpec(self.violations)
        return self.raw_value(occ)

    def rename(self, mapping: Mapping[str, str]) -> "SynergySpec":
        def sub(c: str) -> str:
            return mapping.get(c, c)

        return dataclasses.replace(
            self,
            target=sub(self.target),
            parents=tuple(sub(c) for c in self.parents),
            base={sub(c): p for c, p in self.base.items()},
            synergy={frozenset(map(sub, k)): w for k, w in self.synergy.items()},
            necessity={sub(c): w for c, w in self.necessity.items()},
        )

    @classmethod
    def from_doc(cls, raw: Mapping) -> "SynergySpec":
        if not isinstance(raw, Mapping):
            raise ModelFormatError("compressed table must be a mapping")
        for key in ("target", "parents", "base"):
            if key not in raw:
                raise ModelFormatError(f"compressed table missing {key!r}")
        parents = tuple(str(p) for p in raw["parents"])
        if len(set(parents)) != len(parents):
            raise ModelFormatError("compressed table has duplicate parents")

        def num(v, label):
            try:
                return float(v)
            except (TypeError, ValueError):
                raise ModelFormatError(f"{label} {v!r} is not a number") from None

        base = {str(c): num(p, "base weight") for c, p in (raw["base"] or {}).items()}
        synergy: dict[Subset, float] = {}
        for entry in raw.get("synergy") or []:
            if not isinstance(entry, Mapping) or "subset" not in entry or "sy" not in entry:
                raise ModelFormatError("synergy entry needs 'subset' and 'sy'")
            key = frozenset(str(c) for c in entry["subset"])
            if key in synergy:
                raise ModelFormatError(f"duplicate synergy subset {_label(key)}")
            synergy[key] = num(entry["sy"], "synergy weight")
        necessity = {
            str(c): num(w, "necessity weight")
            for c, w in (raw.get("necessity") or {}).items()
        }
        return cls(
            target=str(raw["target"]),
            parents=parents,
            base=base,
            synergy=synergy,
            necessity=necessity,
            max_synergy_arity=int(
                raw.get("max_synergy_arity", DEFAULT_SYNERGY_ARITY)
            ),
        )

    def to_doc(self) -> dict:
        doc: dict = {
            "target": self.target,
            "parents": list(self.parents),
            "base": {c: self.base[c] for c in sorted(self.base)},
        }
        if self.synergy:
            entries = sorted(
                self.synergy.items(), key=lambda kv: (len(kv[0]), sorted(kv[0]))
            )
            doc["synergy"] = [
                {"subset": sorted(k), "sy": w} for k, w in entries
            ]
        if self.necessity:
            doc["necessity"] = {
                c: self.necessity[c] for c in sorted(self.necessity)
            }
        if self.max_synergy_arity != DEFAULT_SYNERGY_ARITY:
            doc["max_synergy_arity"] = self.max_synergy_arity
        return doc


def eval_synergy(spec: SynergySpec, occurred: Iterable[str]) -> float:
    """Occurrence probability for an exact occurred-cause subset."""
    return spec.evaluate(occurred)


def validate_synergy(spec: SynergySpec) -> list[Violation]:
    """Collect every validity violation; empty list means the spec is
    sound for all cause contexts.

    Beyond the per-weight bounds, three families of product constraints
    are enforced. The product constraint admits a per-subset and an
    all-subsets reading, so both are checked and every final output must
    itself be a probability; together these subsume either reading.
    """
    v: list[Violation] = []
    parents = frozenset(spec.parents)
    target = spec.target

    if len(parents) != len(spec.parents):
        v.append(Violation("domain", target, "duplicate parent ids"))
    for c in sorted(spec.base):
        p = spec.base[c]
        if c not in parents:
            v.append(
                Violation(
                    "domain", c, f"base cause {c!r} is not a parent of {target!r}"
                )
            )
        if not 0.0 <= p <= 1.0:
            v.append(
                Violation(
                    "range", c, f"base probability {p!r} for {c!r} outside [0, 1]"
                )
            )
    for sub in sorted(spec.synergy, key=lambda k: (len(k), sorted(k))):
        sy = spec.synergy[sub]
        label = _label(sub)
        if not sub <= parents:
            v.append(
                Violation(
                    "domain", label, f"synergy subset {label} not within parents"
                )
            )
        if len(sub) < 2:
            v.append(
                Violation(
                    "domain", label, "synergy subsets need at least two causes"
                )
            )
        if len(sub) > spec.max_synergy_arity:
            v.append(
                Violation(
                    "domain",
                    label,
                    f"synergy subset {label} larger than the arity cap "
                    f"{spec.max_synergy_arity}",
                )
            )
        if sy > 1.0:
            v.append(Violation("range", label, f"synergy weight {sy!r} above 1"))
    for c in sorted(spec.necessity):
        ne = spec.necessity[c]
        if c not in parents:
            v.append(
                Violation(
                    "domain",
                    c,
                    f"necessity cause {c!r} is not a parent of {target!r}",
                )
            )
        if ne > 1.0:
            v.append(Violation("range", c, f"necessity weight {ne!r} above 1"))
    if v:
        # product checks are meaningless over a broken domain
        return v

    ids = sorted(parents)
    n = len(ids)
    for mask in range(1 << n):
        occ = frozenset(ids[i] for i in range(n) if mask >> i & 1)
        absent = parents - occ

        miss = spec.miss_product(occ)
        if not -_PRODUCT_TOL <= miss <= 1.0 + _PRODUCT_TOL:
            v.append(
                Violation(
                    "subset-product",
                    _label(occ),
                    f"failure-factor product {miss!r} over occurred set "
                    f"{_label(occ)} outside [0, 1]",
                )
            )
        damp = spec.absence_product(absent)
        if not -_PRODUCT_TOL <= damp <= 1.0 + _PRODUCT_TOL:
            v.append(
                Violation(
                    "absence-product",
                    _label(absent),
                    f"necessity product {damp!r} over absent set "
                    f"{_label(absent)} outside [0, 1]",
                )
            )
        value = (1.0 - miss) * damp
        if not -_PRODUCT_TOL <= value <= 1.0 + _PRODUCT_TOL:
            v.append(
                Violation(
                    "output-range",
                    _label(occ),
                    f"occurrence probability {value!r} for occurred set "
                    f"{_label(occ)} outside [0, 1]",
                )
            )

    # second reading of the product bound: fold together every factor
    # touching one cause
    for c in ids:
        prod = 1.0 - spec.base.get(c, 0.0)
        for sub, sy in spec.synergy.items():
            if c in sub:
                prod *= 1.0 - sy
        if not -_PRODUCT_TOL <= prod <= 1.0 + _PRODUCT_TOL:
            v.append(
                Violation(
                    "cause-product",
                    c,
                    f"failure-factor product {prod!r} across subsets "
                    f"containing {c!r} outside [0, 1]",
                )
            )
    return v


def expand_synergy(spec: SynergySpec) -> dict[Subset, float]:
    """Explicit occurrence table: one entry per occurred-cause subset."""
    if spec.violations:
        raise InvalidSpec(spec.violations)
    ids = sorted(spec.parents)
    n = len(ids)
    table = {}
    for mask in range(1 << n):
        occ = frozenset(ids[i] for i in range(n) if mask >> i & 1)
        table[occ] = spec.raw_value(occ)
    return table


def caused_marginal(model: "CausalModel", process: str, effect: str) -> float:
    """Marginal probability that ``process``, having run, produces
    ``effect`` (sum of its emission rows containing the effect)."""
    return sum(p for k, p in model.causal[process].items() if effect in k)


def single_effect_prob(
    model: "CausalModel", s: str, occurred_causes: Iterable[str]
) -> float:
    """Probability of simple event ``s`` when exactly ``occurred_causes``
    of its direct causes ran, treating their emissions as independent."""
    if model.kinds.get(s) != "simple":
        raise NotSimple(f"{s!r} is not a simple event")
    occ = frozenset(occurred_causes)
    parents = model.causes_of[s]
    extra = occ - parents
    if extra:
        raise NotParent(
            f"{sorted(extra)} are not direct causes of {s!r}"
        )
    marginals = {a: caused_marginal(model, a, s) for a in occ}
    return noisy_or(marginals, occ)


def pair_composition_prob(
    table_a: Mapping[Subset, float],
    table_b: Mapping[Subset, float],
    x: str,
    y: str,
    pr_ab: float,
    pr_a_notb: float,
) -> float:
    """Two-route composition for the shared-effect pair shape: process a
    emits over {x, y}, process b over {y}; returns the joint probability
    of a running with both x and y present.

    The two ways to end with {x, y} when both processes run, a emitting
    both versus a emitting x alone while b supplies y, are combined as
    independently failing routes. That double-counts, because a's
    emission rows are mutually exclusive, so this intentionally differs
    from the engine's union semantics. Kept as a comparison baseline.
    """
    want_a = {frozenset(), frozenset({x}), frozenset({y}), frozenset({x, y})}
    if set(table_a) != want_a:
        raise ShapeError(
            f"first table must range over subsets of {{{x},{y}}}"
        )
    if set(table_b) != {frozenset(), frozenset({y})}:
        raise ShapeError(f"second table must range over subsets of {{{y}}}")
    both = table_a[frozenset({x, y})]
    x_only = table_a[frozenset({x})]
    y_from_b = table_b[frozenset({y})]
    either_route = 1.0 - (1.0 - both) * (1.0 - x_only * y_from_b)
    return either_route * pr_ab + both * pr_a_notb
