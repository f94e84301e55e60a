import itertools

import numpy as np
import pytest

from spinhardy.errors import PreconditionError
from spinhardy.scenario import (
    ANCHOR,
    JOINT_ZERO,
    TARGET,
    Event,
    Scenario,
    anchor_event,
    cabello_constraints,
    expand_events,
    expected_dims,
    legacy_constraints,
    random_scenario,
    relaxed_constraints,
    relaxed_events,
    scenario_from_dict,
    scenario_to_dict,
    symmetric_scenario,
    target_vector,
)
from spinhardy.spin import Z_AXIS, joint_vector


@pytest.mark.parametrize("n,two_s,count", [(2, 2, 5), (3, 2, 7), (2, 1, 3)])
def test_relaxed_counts(n, two_s, count):
    assert len(relaxed_constraints(random_scenario(n, two_s, 0))) == count


@pytest.mark.parametrize("two_s,count", [(2, 7), (1, 3), (3, 13)])
def test_legacy_counts(two_s, count):
    assert len(legacy_constraints(random_scenario(2, two_s, 0))) == count


@pytest.mark.parametrize("two_s", range(1, 7))
@pytest.mark.parametrize("n", [2, 3, 4])
def test_closed_form_counts(n, two_s):
    sc = random_scenario(n, two_s, 1)
    assert len(relaxed_events(sc)) == n * two_s + 1
    if sc.dim > 2000:
        return
    cs = relaxed_constraints(sc)
    assert len(cs) == n * two_s + 1
    for v in cs.vectors:
        assert v.shape == (sc.dim,)
        assert abs(np.linalg.norm(v) - 1) < 1e-12
    if n == 2:
        assert len(legacy_constraints(sc)) == 1 + two_s * (two_s + 1)
        assert len(cabello_constraints(sc)[0]) == 2 * two_s


def test_legacy_spin_one_matches_explicit_list():
    sc = random_scenario(2, 2, 4)
    cs = legacy_constraints(sc)
    # (settings of party 1, party 2; outcomes) in the listed order
    listed = [
        ((False, False), (2, 2)),
        ((False, True), (-2, -2)),
        ((False, True), (-2, 0)),
        ((False, True), (0, -2)),
        ((True, False), (-2, -2)),
        ((True, False), (-2, 0)),
        ((True, False), (0, -2)),
    ]
    assert [(e.settings, next(iter(e.outcomes))) for e in cs.events] == listed


def test_cabello_anchor_is_joint_zero_vector():
    sc = random_scenario(2, 2, 3)
    relaxed = relaxed_constraints(sc)
    zeros, anchor, target = cabello_constraints(sc)
    assert len(zeros) == 4
    np.testing.assert_allclose(anchor, relaxed.vectors[0])
    np.testing.assert_allclose(target, target_vector(sc))
    assert relaxed.tags[0] == JOINT_ZERO


def test_cabello_two_qubits():
    assert len(cabello_constraints(random_scenario(2, 1, 0))[0]) == 2


def test_cabello_needs_two_parties():
    with pytest.raises(PreconditionError):
        cabello_constraints(random_scenario(3, 1, 0))
    with pytest.raises(PreconditionError):
        legacy_constraints(random_scenario(3, 1, 0))


def test_target_vector_ordering():
    sc = Scenario(2, 2, ((Z_AXIS, Z_AXIS), (Z_AXIS, Z_AXIS)), ((2, -2), (2, -2)))
    e0 = np.zeros(9)
    e0[0] = 1
    np.testing.assert_allclose(target_vector(sc), e0)
    sc3 = random_scenario(3, 1, 5)
    t = target_vector(sc3)
    assert t.shape == (8,) and abs(np.linalg.norm(t) - 1) < 1e-12
    np.testing.assert_allclose(t, joint_vector(sc3.bases((True,) * 3), (-1, -1, -1)))


def test_same_setting_vectors_orthogonal():
    sc = random_scenario(2, 3, 2)
    for cs in (relaxed_constraints(sc), legacy_constraints(sc)):
        for (v1, e1), (v2, e2) in itertools.combinations(zip(cs.vectors, cs.events), 2):
            if e1.settings == e2.settings:
                assert abs(np.vdot(v1, v2)) < 1e-12


def test_expand_events():
    sc = random_scenario(2, 2, 0)
    relaxed = expand_events(sc, "relaxed")
    assert [p for _, p in relaxed] == [0.0] * 5 + ["p"]
    assert relaxed[-1][0].tag == TARGET
    cab = expand_events(sc, "cabello")
    assert [p for _, p in cab] == [0.0] * 4 + ["q", "p"]
    assert cab[-2][0] == anchor_event(sc) and cab[-2][0].tag == ANCHOR
    assert [p for _, p in expand_events(sc, "legacy")] == [0.0] * 7 + ["p"]
    # one event per constraint vector
    assert [e for e, _ in relaxed[:-1]] == list(relaxed_constraints(sc).events)


def test_expected_dims():
    assert expected_dims(2, 2, "relaxed") == {"M": 5, "M_bar": 4, "M_bar_prime": 3}
    assert expected_dims(3, 2, "relaxed")["M_bar"] == 20
    assert expected_dims(2, 3, "legacy")["M_bar"] == 3
    assert expected_dims(2, 2, "cabello")["M_bar"] == 5


def test_event_rejects_empty_and_describes():
    with pytest.raises(PreconditionError):
        Event((False, True), frozenset())
    e = Event.single((False, True), (1, -1))
    assert e.describe() == "P(a1=+1/2, a2'=-1/2)"


def test_invalid_selector():
    with pytest.raises(PreconditionError):
        Scenario(2, 2, ((Z_AXIS, Z_AXIS),) * 2, ((1, -2), (2, -2)))


def test_json_round_trip():
    sc = random_scenario(3, 2, 9, selectors=[(0, 2), (2, -2), (-2, 0)])
    again = scenario_from_dict(scenario_to_dict(sc))
    assert again.selectors == sc.selectors
    for p, q in zip(again.directions, sc.directions):
        for d1, d2 in zip(p, q):
            assert np.allclose(d1.as_tuple(), d2.as_tuple(), atol=1e-15)


def test_json_angles_and_defaults():
    sc = scenario_from_dict({"n": 2, "two_s": 1, "parties": [
        {"a": [0, 0, 1], "a_prime": {"theta": np.pi / 2, "phi": 0.0}},
        {"a": {"theta": 0.0}, "a_prime": [1, 0, 0], "s_i": -1},
    ]})
    assert sc.selectors == ((1, -1), (-1, -1))
    assert abs(sc.directions[0][1].x - 1) < 1e-15


def test_json_generated_directions_follow_seed():
    a = scenario_from_dict({"n": 2, "two_s": 2}, seed=5)
    assert a == random_scenario(2, 2, 5)
    assert a != scenario_from_dict({"n": 2, "two_s": 2}, seed=6)


@pytest.mark.parametrize("bad", [{"two_s": 1}, {"n": 2, "two_s": 0}, {"n": 2, "two_s": 1, "parties": [{}]},
                                 {"n": 2, "two_s": 1, "parties": [{"a": [0, 0, 0], "a_prime": [0, 0, 1]}] * 2}])
def test_json_errors(bad):
    with pytest.raises(PreconditionError):
        scenario_from_dict(bad)


def test_symmetric_scenario():
    sc = symmetric_scenario(2, 1, 0.5)
    assert sc.directions[0] == sc.directions[1]
    assert abs(sc.directions[0][1].angles()[0] - 0.5) < 1e-15
