import dataclasses
import random

import pytest

from lops import build_ens_system
from lops.system import (EquationBlock, LeraySystem, UnknownBlock,
                         leray_condition, total_order, validate_structure)


@pytest.fixture(scope="module")
def ens_system():
    return build_ens_system("specialized", "on_data")


def test_ens_structure_passes(ens_system):
    report = validate_structure(ens_system)
    assert report.ok, report.render()


def test_ens_total_order(ens_system):
    # 10*3 + 1*2 + 4*2 + 6*1 + 4*2 = 54 minus 10*1 = 44
    assert total_order(ens_system) == 44


def test_single_wave_total_order():
    from lops.dsl import parse_system
    s = parse_system(
        "unknown w multiplicity 1 index 2\n"
        "equation e multiplicity 1 index 0\n"
        "param a\n"
        "entry e[0] w[0] := a*xi0^2 - xi1^2\n")
    assert total_order(s) == 2


def _with_perturbed_index(s: LeraySystem, which: str, pos: int, delta: int) -> LeraySystem:
    unknowns = list(s.unknowns)
    equations = list(s.equations)
    if which == "m":
        b = unknowns[pos]
        unknowns[pos] = UnknownBlock(b.name, b.multiplicity, b.m + delta)
    else:
        b = equations[pos]
        equations[pos] = EquationBlock(b.name, b.multiplicity, b.n + delta)
    return dataclasses.replace(s, unknowns=unknowns, equations=equations)


@pytest.mark.parametrize("which,pos", [("m", i) for i in range(5)] + [("n", j) for j in range(5)])
@pytest.mark.parametrize("delta", [-1, 1])
def test_every_index_perturbation_fails(ens_system, which, pos, delta):
    perturbed = _with_perturbed_index(ens_system, which, pos, delta)
    assert not validate_structure(perturbed).ok


def test_total_order_invariant_under_block_permutation(ens_system):
    rng = random.Random(3)
    unknowns = list(ens_system.unknowns)
    equations = list(ens_system.equations)
    for _ in range(10):
        rng.shuffle(unknowns)
        rng.shuffle(equations)
        shuffled = dataclasses.replace(ens_system, unknowns=unknowns, equations=equations)
        assert total_order(shuffled) == 44


def test_entry_with_wrong_homogeneity_flagged():
    from lops.dsl import parse_system
    s = parse_system(
        "unknown w multiplicity 1 index 2\n"
        "equation e multiplicity 1 index 0\n"
        "entry e[0] w[0] := xi0\n")  # needs degree 2, has 1
    report = validate_structure(s)
    assert not report.ok
    kinds = {i.kind for i in report.failures()}
    assert "entry-degree" in kinds
    subjects = {i.subject for i in report.failures()}
    assert "e[0] w[0]" in subjects


def test_assignment_constraints_checked():
    from lops.dsl import parse_system
    s = parse_system(
        "unknown w multiplicity 1 index 2\n"
        "equation e multiplicity 1 index 0\n"
        "param a constraint: positive\n"
        "assign a := -1\n"
        "entry e[0] w[0] := a*xi0^2\n")
    report = validate_structure(s)
    assert any(i.kind == "assignment-constraint" and not i.ok for i in report.items)


def test_dependency_order_bound():
    from lops.dsl import parse_system
    s = parse_system(
        "unknown w multiplicity 1 index 2\n"
        "equation e multiplicity 1 index 0\n"
        "entry e[0] w[0] := xi0^2\n"
        "depends e on w order 2\n")  # bound is m - n - 1 = 1
    report = validate_structure(s)
    assert not report.ok
    assert any(i.kind == "dependency-order" for i in report.failures())


def test_ens_dependency_allows_second_metric_derivatives(ens_system):
    report = validate_structure(ens_system)
    items = [i for i in report.items
             if i.kind == "dependency-order" and i.subject == "eq_s on g"]
    assert items and items[0].ok


class TestLerayCondition:
    def test_ens_condition(self, ens_system):
        rep = leray_condition(ens_system, [2] * 14 + [1] * 6 + [3] * 2 + [2] * 2)
        assert rep.ok and rep.max_factor_degree == 3 and rep.max_m - rep.min_n == 3

    def test_wave_condition(self):
        from lops.dsl import parse_system
        s = parse_system(
            "unknown w multiplicity 1 index 2\n"
            "equation e multiplicity 1 index 0\n"
            "param a\n"
            "entry e[0] w[0] := a*xi0^2\n")
        assert leray_condition(s, [2]).ok

    def test_all_linear_factors_fail_for_ens(self, ens_system):
        rep = leray_condition(ens_system, [1] * 44)
        assert not rep.ok
