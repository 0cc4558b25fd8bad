import math
import random

import pytest

from causalproc import (
    NetImportError,
    build_model,
    import_dgraph,
    import_dgraph_doc,
    joint_with_elimination,
    model_to_doc,
    net_from_doc,
    validate_model,
)
from causalproc.dgraph import enumerate_net

from conftest import random_net_doc


def chain_doc():
    return {
        "variables": ["a", "b"],
        "parents": {"a": [], "b": ["a"]},
        "cpt": {
            "a": [{"true_parents": [], "p": 0.5}],
            "b": [
                {"true_parents": [], "p": 0.2},
                {"true_parents": ["a"], "p": 0.8},
            ],
        },
    }


def linf(a, b):
    keys = set(a) | set(b)
    return max(abs(a.get(k, 0.0) - b.get(k, 0.0)) for k in keys)


def test_net_from_doc():
    net = net_from_doc(chain_doc())
    assert net.variables == ("a", "b")
    assert net.parents["b"] == ("a",)
    assert net.cpt["b"][frozenset({"a"})] == 0.8


def test_chain_import_structure():
    m = import_dgraph(net_from_doc(chain_doc()))
    assert m.events == ("a", "b", "omega", "s_{a,b}", "s_{omega,a}")
    assert m.omega == "omega"
    assert m.kinds["a"].value == "process"
    assert m.kinds["s_{a,b}"].value == "simple"
    assert validate_model(m) == []
    # the importer emits a plain model document round-trippable as usual
    assert validate_model(build_model(model_to_doc(m))) == []


def test_chain_import_distribution():
    m = import_dgraph(net_from_doc(chain_doc()))
    jd = joint_with_elimination(m, ["a", "b"])
    assert math.isclose(jd.prob(true=["b"]), 0.5, abs_tol=1e-12)
    assert math.isclose(jd.prob(true=["b"], false=["a"]), 0.1, abs_tol=1e-12)
    ref = enumerate_net(net_from_doc(chain_doc()))
    assert linf(jd.atoms, ref) <= 1e-12


def test_collider_import():
    doc = {
        "variables": ["u", "v", "w"],
        "parents": {"u": [], "v": [], "w": ["u", "v"]},
        "cpt": {
            "u": [{"true_parents": [], "p": 0.3}],
            "v": [{"true_parents": [], "p": 0.6}],
            "w": [
                {"true_parents": [], "p": 0.05},
                {"true_parents": ["u"], "p": 0.5},
                {"true_parents": ["v"], "p": 0.4},
                {"true_parents": ["u", "v"], "p": 0.99},
            ],
        },
    }
    net = net_from_doc(doc)
    m = import_dgraph(net)
    jd = joint_with_elimination(m, ["u", "v", "w"])
    assert linf(jd.atoms, enumerate_net(net)) <= 1e-12


def test_import_name_collisions():
    doc = {
        "variables": ["omega", "s_{omega,omega_2}"],
        "parents": {"omega": [], "s_{omega,omega_2}": ["omega"]},
        "cpt": {
            "omega": [{"true_parents": [], "p": 0.5}],
            "s_{omega,omega_2}": [
                {"true_parents": [], "p": 0.3},
                {"true_parents": ["omega"], "p": 0.9},
            ],
        },
    }
    m = import_dgraph_doc(doc)
    assert m.omega == "omega_0"
    assert set(doc["variables"]) <= set(m.events)
    assert validate_model(m) == []
    jd = joint_with_elimination(m, doc["variables"])
    assert linf(jd.atoms, enumerate_net(net_from_doc(doc))) <= 1e-12


def test_random_nets_match_enumeration():
    rng = random.Random(9)
    for _ in range(15):
        doc = random_net_doc(rng, n=4)
        net = net_from_doc(doc)
        m = import_dgraph(net)
        assert validate_model(m) == []
        jd = joint_with_elimination(m, net.variables)
        assert linf(jd.atoms, enumerate_net(net)) <= 1e-9


@pytest.mark.parametrize(
    "mutate",
    [
        lambda d: d.pop("variables"),
        lambda d: d["variables"].append("a"),
        lambda d: d["parents"].update(b=["ghost"]),
        lambda d: d["parents"].update(b=["a", "a"]),
        lambda d: d["parents"].update(a=["b"]),
        lambda d: d["cpt"].pop("b"),
        lambda d: d["cpt"]["b"].pop(),
        lambda d: d["cpt"]["b"].append({"true_parents": ["a"], "p": 0.7}),
        lambda d: d["cpt"]["b"].__setitem__(
            0, {"true_parents": [], "p": 1.5}
        ),
        lambda d: d["cpt"]["b"].__setitem__(
            0, {"true_parents": [], "p": "x"}
        ),
        lambda d: d["cpt"]["b"].__setitem__(0, {"p": 0.5}),
        lambda d: d.update(states={"a": ["low", "mid", "high"]}),
    ],
)
def test_net_from_doc_rejects(mutate):
    doc = chain_doc()
    mutate(doc)
    with pytest.raises(NetImportError):
        net_from_doc(doc)


def test_enumerate_net_is_distribution():
    rng = random.Random(2)
    net = net_from_doc(random_net_doc(rng, n=4))
    ref = enumerate_net(net)
    assert math.isclose(sum(ref.values()), 1.0, abs_tol=1e-12)
    assert len(ref) == 16
