"""Shared fixtures: canonical small models and random generators.

The random generators return plain model documents so tests can tweak
them before building.  All randomness flows through an explicit
``random.Random`` so every test run is reproducible.
"""

import itertools
import random

import pytest

from causalproc import build_model


def subsets_of(ids):
    ids = sorted(ids)
    out = []
    for r in range(len(ids) + 1):
        out.extend(frozenset(c) for c in itertools.combinations(ids, r))
    return out


def rows(table):
    """Convert {frozenset: p} to the document row list."""
    return [
        {"subset": sorted(s), "p": p}
        for s, p in sorted(table.items(), key=lambda kv: (len(kv[0]), sorted(kv[0])))
    ]


def random_distribution(rng, ids, *, allow_zero_rows=True):
    """Random causal table: a distribution over all subsets of `ids`."""
    subs = subsets_of(ids)
    weights = [rng.random() for _ in subs]
    if allow_zero_rows and rng.random() < 0.3:
        weights = [0.0 if rng.random() < 0.4 else w for w in weights]
        if not any(weights):
            weights[rng.randrange(len(weights))] = 1.0
    total = sum(weights)
    return {s: w / total for s, w in zip(subs, weights)}


def product_distribution(rng, ids):
    """Causal table whose effects are emitted independently."""
    marg = {e: rng.random() for e in ids}
    table = {}
    for s in subsets_of(ids):
        v = 1.0
        for e in ids:
            v *= marg[e] if e in s else 1.0 - marg[e]
        table[s] = v
    return table


def random_effectual(rng, trig, *, allow_extremes=True):
    """Occurrence probability for every exact trigger subset."""
    table = {}
    for s in subsets_of(trig):
        v = rng.random()
        if allow_extremes:
            r = rng.random()
            if r < 0.08:
                v = 0.0
            elif r < 0.16:
                v = 1.0
        table[s] = v
    return table


def random_model_doc(rng, max_events=10, product_causal=False):
    """Random valid model document with at most `max_events` events.

    Layout: a root process emitting 1-3 simples, then one or two stages
    of processes.  Each process is triggered by up to three simples from
    any earlier stage (so edges may skip levels) and emits fresh simples,
    sometimes sharing an effect with another process in the same stage.
    """
    sc = itertools.count()
    pc = itertools.count()
    events = [("omega", "process")]
    causes, triggers = [], []
    effectual, causal = {}, {}

    roots = []
    for _ in range(rng.randint(1, 3)):
        sid = f"s{next(sc)}"
        roots.append(sid)
        events.append((sid, "simple"))
        causes.append(("omega", sid))
    causal["omega"] = random_distribution(rng, roots)

    simples = list(roots)
    budget = max_events - len(events)

    for _ in range(rng.randint(1, 2)):
        stage_new = []
        for _ in range(rng.randint(1, 2)):
            if budget <= 0:
                break
            pid = f"p{next(pc)}"
            events.append((pid, "process"))
            budget -= 1
            trig = rng.sample(sorted(simples), rng.randint(1, min(3, len(simples))))
            for t in sorted(trig):
                triggers.append((t, pid))
            effectual[pid] = random_effectual(rng, trig)

            effects = []
            for _ in range(rng.randint(0, min(2, budget))):
                sid = f"s{next(sc)}"
                events.append((sid, "simple"))
                budget -= 1
                stage_new.append(sid)
                effects.append(sid)
            reusable = [s for s in stage_new if s not in effects]
            if reusable and rng.random() < 0.5:
                effects.append(rng.choice(reusable))
            for e in effects:
                causes.append((pid, e))
            if product_causal:
                causal[pid] = product_distribution(rng, effects)
            else:
                causal[pid] = random_distribution(rng, effects)
        simples.extend(stage_new)

    return {
        "events": [{"id": e, "kind": k} for e, k in events],
        "omega": "omega",
        "causes": [list(c) for c in causes],
        "triggers": [list(t) for t in triggers],
        "effectual": {p: rows(t) for p, t in effectual.items()},
        "causal": {p: rows(t) for p, t in causal.items()},
    }


def random_net_doc(rng, n=5, max_parents=3):
    """Random binary Bayes net document over `n` variables."""
    names = [f"v{i}" for i in range(n)]
    parents = {}
    cpt = {}
    for i, v in enumerate(names):
        pool = names[:i]
        k = rng.randint(0, min(max_parents, len(pool)))
        ps = sorted(rng.sample(pool, k))
        parents[v] = ps
        cpt[v] = [
            {"true_parents": sorted(g), "p": rng.random()}
            for g in subsets_of(ps)
        ]
    return {
        "variables": names,
        "parents": parents,
        "cpt": cpt,
    }


def random_chain(rng, names):
    """Random Markov chain over `names`: (params, joint over true-sets).

    params = (initial, [(p_given_prev, p_given_not_prev), ...]).
    Probabilities stay inside [0.05, 0.95] so every assignment keeps
    positive mass.
    """
    def u():
        return rng.uniform(0.05, 0.95)

    initial = u()
    trans = [(u(), u()) for _ in names[1:]]
    joint = {}
    for assign in itertools.product([False, True], repeat=len(names)):
        p = initial if assign[0] else 1.0 - initial
        for i, (hi, lo) in enumerate(trans):
            cond = hi if assign[i] else lo
            p *= cond if assign[i + 1] else 1.0 - cond
        joint[frozenset(n for n, on in zip(names, assign) if on)] = p
    return (initial, trans), joint


def shared_effect_base_doc():
    """Two correlated processes sharing an effect.

    A dispatcher process emits trigger events ta, tb with a correlated
    table; processes a and b fire deterministically on their trigger.
    Process a emits over {x, y}, process b over {y}, so y has two causes.
    """
    return {
        "events": [
            {"id": "omega", "kind": "process"},
            {"id": "ta", "kind": "simple"},
            {"id": "tb", "kind": "simple"},
            {"id": "a", "kind": "process"},
            {"id": "b", "kind": "process"},
            {"id": "x", "kind": "simple"},
            {"id": "y", "kind": "simple"},
        ],
        "omega": "omega",
        "causes": [["omega", "ta"], ["omega", "tb"], ["a", "x"], ["a", "y"], ["b", "y"]],
        "triggers": [["ta", "a"], ["tb", "b"]],
        "effectual": {
            "a": [{"subset": [], "p": 0.0}, {"subset": ["ta"], "p": 1.0}],
            "b": [{"subset": [], "p": 0.0}, {"subset": ["tb"], "p": 1.0}],
        },
        "causal": {
            "omega": [
                {"subset": [], "p": 0.1},
                {"subset": ["ta"], "p": 0.2},
                {"subset": ["tb"], "p": 0.2},
                {"subset": ["ta", "tb"], "p": 0.5},
            ],
            "a": [
                {"subset": [], "p": 0.4},
                {"subset": ["x"], "p": 0.2},
                {"subset": ["y"], "p": 0.1},
                {"subset": ["x", "y"], "p": 0.3},
            ],
            "b": [
                {"subset": [], "p": 0.5},
                {"subset": ["y"], "p": 0.5},
            ],
        },
    }


def shared_effect_doc(rng=None, dispatch=None, table_a=None, table_b=None):
    """Variant of :func:`shared_effect_base_doc` with custom tables."""
    doc = shared_effect_base_doc()
    if rng is not None:
        dispatch = dispatch or random_distribution(rng, ["ta", "tb"], allow_zero_rows=False)
        table_a = table_a or random_distribution(rng, ["x", "y"], allow_zero_rows=False)
        table_b = table_b or random_distribution(rng, ["y"], allow_zero_rows=False)
    doc["causal"]["omega"] = rows(dispatch)
    doc["causal"]["a"] = rows(table_a)
    doc["causal"]["b"] = rows(table_b)
    return doc


def two_stage_doc(rng):
    """Two upstream processes feeding two downstream ones.

    Process a emits over {x, y}, process b over {z}.  Process c is
    triggered by x alone and never fires unaided; process d is triggered
    by {y, z} and never fires unaided.  Emission tables are random.
    """
    table_omega = random_distribution(rng, ["ta", "tb"], allow_zero_rows=False)
    table_a = random_distribution(rng, ["x", "y"], allow_zero_rows=False)
    table_b = random_distribution(rng, ["z"], allow_zero_rows=False)
    ef_a = {frozenset(): 0.0, frozenset({"ta"}): rng.uniform(0.3, 1.0)}
    ef_b = {frozenset(): 0.0, frozenset({"tb"}): rng.uniform(0.3, 1.0)}
    ef_c = {frozenset(): 0.0, frozenset({"x"}): rng.random()}
    ef_d = {
        frozenset(): 0.0,
        frozenset({"y"}): rng.random(),
        frozenset({"z"}): rng.random(),
        frozenset({"y", "z"}): rng.random(),
    }
    return {
        "events": [
            {"id": "omega", "kind": "process"},
            {"id": "ta", "kind": "simple"},
            {"id": "tb", "kind": "simple"},
            {"id": "a", "kind": "process"},
            {"id": "b", "kind": "process"},
            {"id": "x", "kind": "simple"},
            {"id": "y", "kind": "simple"},
            {"id": "z", "kind": "simple"},
            {"id": "c", "kind": "process"},
            {"id": "d", "kind": "process"},
        ],
        "omega": "omega",
        "causes": [
            ["omega", "ta"], ["omega", "tb"],
            ["a", "x"], ["a", "y"], ["b", "z"],
        ],
        "triggers": [
            ["ta", "a"], ["tb", "b"],
            ["x", "c"], ["y", "d"], ["z", "d"],
        ],
        "effectual": {
            "a": rows(ef_a),
            "b": rows(ef_b),
            "c": rows(ef_c),
            "d": rows(ef_d),
        },
        "causal": {
            "omega": rows(table_omega),
            "a": rows(table_a),
            "b": rows(table_b),
        },
    }


def table_from_rows(rowlist):
    return {frozenset(r["subset"]): r["p"] for r in rowlist}


def two_stage_reference(doc):
    """Hand-computed pr(a,b,c,d all occur) and pr(a,b,c occur) for
    :func:`two_stage_doc`, summing over the upstream emission rows."""
    omega_t = table_from_rows(doc["causal"]["omega"])
    table_a = table_from_rows(doc["causal"]["a"])
    table_b = table_from_rows(doc["causal"]["b"])
    ef = {p: table_from_rows(doc["effectual"][p]) for p in ("a", "b", "c", "d")}

    pr_ab = sum(
        w * ef["a"][t & frozenset({"ta"})] * ef["b"][t & frozenset({"tb"})]
        for t, w in omega_t.items()
    )

    inner_cd = 0.0
    inner_c = 0.0
    for ka, wa in table_a.items():
        ec = ef["c"][ka & frozenset({"x"})]
        inner_c += wa * ec
        for kb, wb in table_b.items():
            ed = ef["d"][(ka | kb) & frozenset({"y", "z"})]
            inner_cd += wa * wb * ec * ed
    return pr_ab * inner_cd, pr_ab * inner_c


@pytest.fixture
def m1_doc():
    """Chain: omega emits u with p 0.6; u triggers p; p emits s."""
    return {
        "events": [
            {"id": "omega", "kind": "process"},
            {"id": "u", "kind": "simple"},
            {"id": "p", "kind": "process"},
            {"id": "s", "kind": "simple"},
        ],
        "omega": "omega",
        "causes": [["omega", "u"], ["p", "s"]],
        "triggers": [["u", "p"]],
        "effectual": {
            "p": [{"subset": [], "p": 0.1}, {"subset": ["u"], "p": 0.9}],
        },
        "causal": {
            "omega": [{"subset": [], "p": 0.4}, {"subset": ["u"], "p": 0.6}],
            "p": [{"subset": [], "p": 0.3}, {"subset": ["s"], "p": 0.7}],
        },
    }


@pytest.fixture
def m1(m1_doc):
    return build_model(m1_doc)


@pytest.fixture
def shared_effect():
    return build_model(shared_effect_base_doc())


@pytest.fixture
def rng():
    return random.Random(20260815)
