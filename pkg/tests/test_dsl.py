from fractions import Fraction as Fr

import pytest
from hypothesis import given, settings
import hypothesis.strategies as st

from lops import build_ens_system, ens_spec_path, wave_spec_path
from lops.dsl import (DuplicateEntryError, ParseError, UnknownAtomError,
                      parse_system, print_system)
from lops.poly import Poly, param, xi
from lops.system import (DependencyDecl, EquationBlock, LeraySystem, ParamDecl,
                         SymbolEntry, UnknownBlock, validate_structure)

WAVE = """
# one second-order wave operator
unknown w multiplicity 1 index 2
equation weq multiplicity 1 index 0
param a constraint: positive
entry weq[0] w[0] := a*xi0^2 - xi1^2 - xi2^2 - xi3^2
depends weq on w order 1
assign a := 1
"""


def test_wave_roundtrip():
    s = parse_system(WAVE)
    assert s.total_unknowns == 1
    assert validate_structure(s).ok
    again = parse_system(print_system(s))
    assert again == s


def test_shipped_specs_parse_and_match_builders():
    ens_sys = parse_system(open(ens_spec_path()).read())
    assert ens_sys == build_ens_system("specialized", "on_data")
    assert ens_sys.total_unknowns == 25
    wave_sys = parse_system(open(wave_spec_path()).read())
    assert wave_sys.total_unknowns == 1


def test_ens_indices_as_declared():
    s = parse_system(open(ens_spec_path()).read())
    assert [b.m for b in s.unknowns] == [3, 2, 2, 1, 2]
    assert [b.n for b in s.equations] == [1, 0, 0, 0, 0]
    assert [b.multiplicity for b in s.unknowns] == [10, 1, 4, 6, 4]


def test_roundtrip_preserves_factor_claim():
    s = parse_system(open(ens_spec_path()).read())
    again = parse_system(print_system(s))
    assert again.factor_claim == s.factor_claim
    assert again.assigns == s.assigns


@st.composite
def small_systems(draw):
    n_unk = draw(st.integers(1, 3))
    unknowns = [UnknownBlock(f"v{i}", draw(st.integers(1, 3)), draw(st.integers(0, 3)))
                for i in range(n_unk)]
    equations = [EquationBlock(f"e{i}", b.multiplicity, draw(st.integers(0, 2)))
                 for i, b in enumerate(unknowns)]
    param_names = draw(st.lists(st.sampled_from(["a", "b", "cc"]),
                                unique=True, max_size=3))
    params = [ParamDecl(n, draw(st.sampled_from([None, "positive", "nonzero"])))
              for n in param_names]
    atoms = [xi(i) for i in range(4)] + [param(n) for n in param_names]
    entries = []
    for eq in equations:
        for unk in unknowns:
            if not draw(st.booleans()):
                continue
            p = Poly.zero()
            for _ in range(draw(st.integers(1, 2))):
                term = Poly.constant(Fr(draw(st.integers(-5, 5)) or 1,
                                        draw(st.integers(1, 4))))
                for _ in range(draw(st.integers(0, 2))):
                    term = term * Poly.atom(draw(st.sampled_from(atoms)))
                p = p + term
            if p.is_zero():
                continue
            entries.append(SymbolEntry(eq.name, draw(st.integers(0, eq.multiplicity - 1)),
                                       unk.name, draw(st.integers(0, unk.multiplicity - 1)),
                                       p))
    seen = set()
    unique_entries = []
    for e in entries:
        key = (e.eq_block, e.eq_index, e.unk_block, e.unk_index)
        if key not in seen:
            seen.add(key)
            unique_entries.append(e)
    deps = [DependencyDecl(equations[0].name, unknowns[0].name, draw(st.integers(0, 2)))]
    assigns = {n: Fr(draw(st.integers(1, 9)), draw(st.integers(1, 4)))
               for n in param_names}
    return LeraySystem(unknowns, equations, unique_entries, deps, params, assigns)


@given(small_systems())
@settings(max_examples=60, deadline=None)
def test_roundtrip_random_systems(system):
    assert parse_system(print_system(system)) == system


class TestErrors:
    def test_malformed_index_line_names_the_line(self):
        bad = "unknown w multiplicity 1 index 2\nequation weq multiplicity oops index 0\n"
        with pytest.raises(ParseError) as err:
            parse_system(bad)
        assert err.value.line == 2

    def test_trailing_garbage_rejected(self):
        with pytest.raises(ParseError) as err:
            parse_system("unknown w multiplicity 1 index 2 extra\n")
        assert "trailing" in str(err.value)

    def test_duplicate_entry(self):
        text = (WAVE + "\nentry weq[0] w[0] := xi0^2\n")
        with pytest.raises(DuplicateEntryError):
            parse_system(text)

    def test_undeclared_atom(self):
        text = ("unknown w multiplicity 1 index 2\n"
                "equation weq multiplicity 1 index 0\n"
                "entry weq[0] w[0] := mystery*xi0^2\n")
        with pytest.raises(UnknownAtomError) as err:
            parse_system(text)
        assert err.value.line == 3

    def test_bad_constraint(self):
        with pytest.raises(ParseError):
            parse_system("param a constraint: sometimes\n")

    def test_unknown_statement(self):
        with pytest.raises(ParseError):
            parse_system("frobnicate everything\n")

    def test_comments_and_blanks_ignored(self):
        s = parse_system("# hello\n\n   # indented comment\n" + WAVE)
        assert s.total_unknowns == 1

    def test_assign_requires_declared_param(self):
        with pytest.raises(UnknownAtomError):
            parse_system("assign nope := 3\n")

    def test_rational_coefficients_exact(self):
        s = parse_system(
            "unknown w multiplicity 1 index 1\n"
            "equation e multiplicity 1 index 0\n"
            "entry e[0] w[0] := 2/3*xi0 - 5*xi1\n")
        p = s.entries[0].symbol
        from lops.poly import xi
        assert p.eval({xi(0): Fr(3), xi(1): Fr(0)}) == 2
