import numpy as np
import pytest

from src.engine.groups import (
    agl_point_stabilizer,
    agl_translations,
    build_group,
    center,
    closure_of,
    element_order,
    element_order_statistics,
    make_dihedral,
    parse_element_label,
)
from src.errors import CapacityError, DomainError, SpecSyntaxError
from src.schemas.groups import Family, GroupSpec, parse_group_spec

SPECS = ["C:12", "D:9", "SD:4", "M:4", "Q:3", "AGL:2:2", "AGL:3:1", "AGL:2:3"]


@pytest.mark.parametrize(
    "text, family, order",
    [
        ("SD:4", Family.SEMIDIHEDRAL, 16),
        ("AGL:2:3", Family.AGL1, 56),
        ("C:27", Family.CYCLIC, 27),
        ("D:9", Family.DIHEDRAL, 18),
        ("M:5", Family.MODMAXCYC, 32),
        ("Q:3", Family.GENQUAT, 8),
    ],
)
def test_parse_group_spec(text, family, order):
    spec = parse_group_spec(text)
    assert spec.family is family
    assert spec.order == order
    assert str(spec) == text
    assert parse_group_spec(str(spec)) == spec


@pytest.mark.parametrize(
    "text, position",
    [
        ("X:4", 0),
        (":4", 0),
        ("SD4", 2),
        ("SD:x", 3),
        ("SD:3", 3),
        ("AGL:2", 5),
        ("AGL:4:1", 4),
        ("AGL:2:0", 6),
        ("Q:2", 2),
    ],
)
def test_parse_group_spec_errors(text, position):
    with pytest.raises(SpecSyntaxError) as info:
        parse_group_spec(text)
    assert info.value.position == position
    assert info.value.exit_code == 2


def test_group_spec_model_validates():
    with pytest.raises(ValueError):
        GroupSpec(family=Family.SEMIDIHEDRAL, params=(3,))


@pytest.mark.parametrize("text", SPECS)
def test_group_axioms(text):
    G = build_group(parse_group_spec(text))
    mul = G.mul.astype(np.int64)
    assert G.order == parse_group_spec(text).order
    assert np.array_equal(mul[0], np.arange(G.order))
    assert np.array_equal(mul[:, 0], np.arange(G.order))
    for row in mul:
        assert sorted(row) == list(range(G.order))
    assert np.array_equal(mul[np.arange(G.order), G.inv], np.zeros(G.order))
    left = mul[mul[:, :, None], np.arange(G.order)[None, None, :]]
    right = mul[np.arange(G.order)[:, None, None], mul[None, :, :]]
    assert np.array_equal(left, right)
    assert closure_of(G, G.generators) == list(range(G.order))


@pytest.mark.parametrize("text", SPECS)
def test_labels_round_trip(text):
    G = build_group(parse_group_spec(text))
    assert len(set(G.labels)) == G.order
    for i, label in enumerate(G.labels):
        assert parse_element_label(G, label) == i
        assert parse_element_label(G, f"  {label}  ") == i


def test_unknown_label():
    G = make_dihedral(3)
    with pytest.raises(DomainError):
        parse_element_label(G, "a^2")


@pytest.mark.parametrize(
    "text, stats",
    [
        ("SD:4", {1: 1, 2: 5, 4: 6, 8: 4}),
        ("Q:3", {1: 1, 2: 1, 4: 6}),
        ("D:4", {1: 1, 2: 5, 4: 2}),
        ("AGL:2:2", {1: 1, 2: 3, 3: 8}),
        ("C:12", {1: 1, 2: 1, 3: 2, 4: 2, 6: 2, 12: 4}),
    ],
)
def test_element_order_statistics(text, stats):
    assert element_order_statistics(build_group(parse_group_spec(text))) == stats


def test_affine_line_over_f3_looks_like_s3():
    assert element_order_statistics(build_group(parse_group_spec("AGL:3:1"))) == element_order_statistics(
        build_group(parse_group_spec("D:3"))
    )


@pytest.mark.parametrize("text, size", [("SD:4", 2), ("M:4", 4), ("Q:3", 2), ("D:9", 1), ("C:6", 6)])
def test_center(text, size):
    G = build_group(parse_group_spec(text))
    Z = center(G)
    assert len(Z) == size
    for z in Z:
        assert all(G.product(z, g) == G.product(g, z) for g in range(G.order))


def test_semidihedral_relations():
    G = build_group(parse_group_spec("SD:4"))
    a, b = G.names["a"], G.names["b"]
    assert element_order(G, a) == 8
    assert element_order(G, b) == 2
    assert G.conjugate(b, a) == G.power(a, 3)
    assert G.names["z"] == G.power(a, 4)
    assert G.labels[G.product(a, a, a, b)] == "a^3 b"


def test_quaternion_relations():
    G = build_group(parse_group_spec("Q:4"))
    a, b = G.names["a"], G.names["b"]
    assert G.power(b, 2) == G.power(a, 4)
    assert G.conjugate(b, a) == G.power(a, -1)


def test_affine_group_layout():
    G = build_group(parse_group_spec("AGL:2:3"))
    V = agl_translations(G)
    H = agl_point_stabilizer(G)
    assert len(V) == 8 and len(H) == 7
    assert closure_of(G, V) == V
    assert sorted(closure_of(G, H)) == sorted(H)
    assert G.labels[0] == "x"
    assert G.labels[8] == "w*x"
    for g in range(G.order):
        for t in V:
            assert G.conjugate(g, t) in V
    with pytest.raises(DomainError):
        agl_translations(build_group(parse_group_spec("D:3")))


def test_order_cap():
    with pytest.raises(CapacityError) as info:
        build_group(parse_group_spec("SD:10"), max_order=512)
    assert info.value.cap_name == "max_order"
    assert info.value.requested == 1024
    assert "--max-order" in info.value.detail
