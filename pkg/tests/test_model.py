import pytest
from hypothesis import given
from hypothesis import strategies as st

from relaxplace.model import CostVector, RequirementExpr, compare_costs


def test_single_level_comparison():
    assert compare_costs(CostVector({1: 2}), CostVector({1: 10})) == -1


def test_higher_level_dominates():
    a = CostVector({2: 1, 1: 0})
    b = CostVector({2: 0, 1: 100})
    assert compare_costs(a, b) == 1


def test_absent_level_counts_as_zero():
    assert compare_costs(CostVector(), CostVector({1: 0})) == 0
    assert CostVector() == CostVector({1: 0})


def test_add_and_zero():
    c = CostVector.zero().add(3, 2).add(1, 2)
    assert c.as_dict() == {2: 4}
    assert not c.is_zero
    assert CostVector.zero().is_zero


def test_negative_cost_rejected():
    with pytest.raises(ValueError):
        CostVector({1: -1})


costs = st.dictionaries(st.integers(0, 5), st.integers(0, 20), max_size=4).map(CostVector)


@given(costs, costs)
def test_antisymmetry(a, b):
    assert compare_costs(a, b) == -compare_costs(b, a)


@given(costs, costs, costs)
def test_transitivity(a, b, c):
    if compare_costs(a, b) <= 0 and compare_costs(b, c) <= 0:
        assert compare_costs(a, c) <= 0


@given(costs, costs)
def test_equality_is_identity_of_totals(a, b):
    assert (compare_costs(a, b) == 0) == (a.as_dict() == b.as_dict())


def test_requirement_expr_validation():
    with pytest.raises(ValueError):
        RequirementExpr("between", "x", 1)
    with pytest.raises(ValueError):
        RequirementExpr("reserve", "ram", -1)
    with pytest.raises(ValueError):
        RequirementExpr("reserve", "ram", True)
    with pytest.raises(ValueError):
        RequirementExpr("lte", "pue", True)
    RequirementExpr("eq", "gpu", True)
    RequirementExpr("gte", "avail", 99)
