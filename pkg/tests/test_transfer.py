import random
from itertools import combinations, islice

import pytest

from src.engine.groups import build_group
from src.engine.lattice import enumerate_subgroups, width
from src.engine.transfer import (
    ArrowUniverse,
    certify_all,
    closure,
    closure_law_violations,
    collect_transfer_systems,
    complete_system,
    complexity,
    complexity_closed_form,
    enumerate_transfer_systems,
    exhaustive_generating_size,
    indispensable_classes,
    is_transfer_system,
    iter_bits,
    minimal_generating_size,
    random_transfer_system,
    transfer_system_from_classes,
    verify_certificate,
)
from src.errors import BudgetExhausted, DomainError
from src.schemas.groups import parse_group_spec

# D:3 subgroup indices: 0 trivial, 1-3 reflections, 4 rotations, 5 whole group


def family_members(max_order):
    """Specs of every supported family member of order at most max_order."""
    specs = [f"C:{m}" for m in range(2, max_order + 1)]
    specs += [f"D:{m}" for m in range(2, max_order // 2 + 1)]
    for tag, low in (("SD", 4), ("M", 4), ("Q", 3)):
        specs += [f"{tag}:{n}" for n in range(low, max_order.bit_length())]
    for p in (2, 3, 5, 7):
        specs += [f"AGL:{p}:{n}" for n in range(1, 7) if p**n * (p**n - 1) <= max_order]
    return specs


def arrows_of(U, T):
    return [U.arrows[k] for k in iter_bits(T.rel)]


def test_arrow_universe_of_s3(universe):
    U = universe("D:3")
    assert len(U.arrows) == 9
    assert [c.size for c in U.classes] == [3, 1, 1, 3, 1]
    assert [tuple(c.representative) for c in U.classes] == [(0, 1), (0, 4), (0, 5), (1, 5), (4, 5)]
    assert U.arrow_class((2, 5)) == 3


def test_arrow_class_rejects_bad_arrows(universe):
    U = universe("D:3")
    with pytest.raises(DomainError):
        U.arrow_class((1, 2))
    with pytest.raises(DomainError):
        U.arrow_class((1, 1))


def test_closure_examples(universe):
    U = universe("D:3")
    assert closure(U, [(0, 1)]).classes() == [0]
    assert closure(U, [(0, 1)]).size == 3
    assert closure(U, [(1, 5)]).classes() == [0, 1, 2, 3]
    assert closure(U, [(4, 5)]).classes() == [0, 4]
    assert closure(U, [(1, 1)]).class_vector == 0
    assert closure(U, []).class_vector == 0
    with pytest.raises(DomainError):
        closure(U, [(4, 1)])


@pytest.mark.parametrize("text", ["D:3", "D:9", "SD:4", "AGL:2:2"])
def test_closure_laws(universe, text):
    assert closure_law_violations(universe(text), random.Random(7), 200) == []


@pytest.mark.parametrize("text", ["D:3", "C:8", "Q:3", "C:12"])
def test_enumeration_matches_brute_force(universe, text):
    U = universe(text)
    closed = {U.close_classes(seed) for seed in range(1 << len(U.classes))}
    found = [T.class_vector for T in enumerate_transfer_systems(U)]
    assert len(found) == len(set(found))
    assert set(found) == closed
    assert found[0] == 0
    assert found[-1] == U.full


@pytest.mark.parametrize(
    "text, count",
    [("C:2", 2), ("C:4", 5), ("C:8", 14), ("C:16", 42), ("C:32", 132), ("C:27", 14), ("C:81", 42)],
)
def test_catalan_counts(universe, text, count):
    assert len(collect_transfer_systems(universe(text))) == count


def test_s3_has_nine_transfer_systems(universe):
    assert len(collect_transfer_systems(universe("D:3"))) == 9


@pytest.mark.parametrize("text", ["D:3", "D:9", "SD:4"])
def test_enumerated_systems_satisfy_axioms(universe, text):
    U = universe(text)
    for T in islice(enumerate_transfer_systems(U), 400):
        assert is_transfer_system(U, arrows_of(U, T)).ok
    rng = random.Random(11)
    for _ in range(50):
        T = random_transfer_system(U, rng, rng.randint(1, 4))
        assert is_transfer_system(U, arrows_of(U, T)).ok


def test_axiom_failures(universe):
    U = universe("D:3")
    assert is_transfer_system(U, [(1, 2)]).axiom == "i"
    assert is_transfer_system(U, [(0, 1), (1, 5)]).axiom == "iii"
    assert is_transfer_system(U, [(1, 5)]).axiom == "iv"
    check = is_transfer_system(U, [(0, 1)])
    assert check.axiom == "v"
    assert check.witness[0] == (0, 1)
    assert is_transfer_system(U, [(0, 1), (0, 2), (0, 3), (4, 4)]).ok


def test_transfer_system_from_classes(universe):
    U = universe("D:3")
    assert transfer_system_from_classes(U, 0b1111).classes() == [0, 1, 2, 3]
    with pytest.raises(DomainError):
        transfer_system_from_classes(U, 0b1000)
    with pytest.raises(DomainError):
        transfer_system_from_classes(U, 1 << 5)


def test_generating_sets_on_s3(universe):
    U = universe("D:3")
    T = closure(U, [(1, 5)])
    assert indispensable_classes(U, T) == 1 << 3
    cert = minimal_generating_size(U, T)
    assert cert.size == 1
    assert cert.method == "indispensable"
    assert [tuple(a) for a in cert.arrows] == [(1, 5)]
    assert minimal_generating_size(U, complete_system(U)).size == 2


@pytest.mark.parametrize("text", family_members(18))
def test_fast_path_matches_exhaustive_oracle(universe, text):
    U = universe(text)
    for T in enumerate_transfer_systems(U):
        cert = minimal_generating_size(U, T)
        assert cert.size == exhaustive_generating_size(U, T).size
        assert verify_certificate(U, cert)


def test_family_members_up_to_order_18():
    members = family_members(18)
    assert {"Q:4", "D:8", "M:4", "SD:4", "D:2", "D:5", "D:7", "AGL:2:2", "AGL:3:1"} <= set(members)
    assert all(parse_group_spec(text).order <= 18 for text in members)
    assert "AGL:5:1" not in members


@pytest.mark.parametrize("text", ["D:3", "D:4", "C:12", "Q:3"])
def test_certificates_are_lexicographically_least(universe, text):
    U = universe(text)
    for T in enumerate_transfer_systems(U):
        cert = minimal_generating_size(U, T)
        assert list(cert.arrows) == sorted(cert.arrows)
        generating = [
            combo
            for combo in combinations(T.classes(), cert.size)
            if U.close_classes(sum(1 << c for c in combo)) == T.class_vector
        ]
        assert cert.classes == min(generating)


def test_fast_path_on_random_semidihedral_systems(universe):
    U = universe("SD:4")
    rng = random.Random(2024)
    for _ in range(500):
        T = random_transfer_system(U, rng, rng.randint(1, 8))
        cert = minimal_generating_size(U, T)
        assert cert.size == exhaustive_generating_size(U, T).size
        assert verify_certificate(U, cert)


def test_reduction_route_is_minimal(universe):
    U = universe("SD:4")
    rng = random.Random(5)
    for _ in range(100):
        T = random_transfer_system(U, rng, rng.randint(2, 8))
        reduced = minimal_generating_size(U, T, exhaustive_limit=1)
        assert reduced.size == exhaustive_generating_size(U, T).size
        assert verify_certificate(U, reduced)


@pytest.mark.parametrize("text", family_members(64))
def test_width_equals_m_of_complete_system(universe, text):
    U = universe(text)
    assert minimal_generating_size(U, complete_system(U)).size == width(U.lattice)


@pytest.mark.parametrize("text, value", [("D:3", 2), ("D:9", 4), ("C:6", 2), ("C:12", 4)])
def test_complexity(universe, text, value):
    result = complexity(universe(text))
    assert result.complete
    assert result.value == value
    assert result.certificate.size == value
    assert verify_certificate(universe(text), result.certificate)


def test_complexity_streams_every_certified_system(universe):
    U = universe("D:3")
    seen = []
    result = complexity(U, on_certified=lambda T, cert: seen.append((T.class_vector, cert.size)))
    assert [vector for vector, _ in seen] == [T.class_vector for T in enumerate_transfer_systems(U)]
    assert max(size for _, size in seen) == result.value == 2
    replay = complexity(U, certified=list(certify_all(U, enumerate_transfer_systems(U))))
    assert (replay.value, replay.witness, replay.systems_visited) == (result.value, result.witness, 9)


def test_complexity_needs_a_system(universe):
    with pytest.raises(DomainError):
        complexity(universe("D:3"), certified=[])


@pytest.mark.slow
def test_complexity_d27(universe):
    assert complexity(universe("D:27")).value == 5


@pytest.mark.slow
def test_complexity_sd16(universe):
    assert complexity(universe("SD:4"), workers=4).value == 7


def test_budget_exhaustion(universe):
    U = universe("C:32")
    with pytest.raises(BudgetExhausted) as info:
        collect_transfer_systems(U, budget=10)
    assert len(info.value.systems) == 10
    assert info.value.exit_code == 3
    partial = complexity(U, budget=10)
    assert not partial.complete
    assert partial.systems_visited == 10


def test_parallel_certificates_keep_order(universe):
    U = universe("C:81")
    serial = complexity(U, workers=1)
    parallel = complexity(U, workers=2)
    assert serial.value == parallel.value >= 4
    assert serial.witness == parallel.witness


def test_digest_is_stable(universe):
    fresh = ArrowUniverse(enumerate_subgroups(build_group(parse_group_spec("SD:4"))))
    assert fresh.digest == universe("SD:4").digest
    assert fresh.digest != universe("M:4").digest


@pytest.mark.parametrize(
    "text, value",
    [("D:3", 2), ("D:9", 4), ("D:27", 5), ("D:125", 5), ("C:12", 4), ("C:24", 5), ("C:6", 2), ("SD:4", None), ("D:8", None), ("C:36", None)],
)
def test_complexity_closed_form(text, value):
    assert complexity_closed_form(parse_group_spec(text)) == value
