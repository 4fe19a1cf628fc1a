import random
from fractions import Fraction as Fr

import pytest
from hypothesis import given, settings
import hypothesis.strategies as st

from lops.poly import (MissingAtomError, NotDivisibleError,
                       NotPerfectSquareError, Poly, XI, param, xi)
from lops.dsl import parse_poly

X0, X1, X2, X3 = (Poly.atom(a) for a in XI)
F = Poly.atom(param("F"))
Q = Poly.atom(param("q"))

ATOM_POOL = list(XI) + [param("F"), param("q"), param("u0"), param("gm1")]


@st.composite
def polys(draw, max_terms=5, max_exp=3):
    n = draw(st.integers(0, max_terms))
    p = Poly.zero()
    for _ in range(n):
        coeff = Fr(draw(st.integers(-6, 6)), draw(st.integers(1, 4)))
        term = Poly.constant(coeff)
        for a in draw(st.lists(st.sampled_from(ATOM_POOL), max_size=3)):
            term = term * Poly.atom(a) ** draw(st.integers(1, max_exp))
        p = p + term
    return p


def assignments(rng, atoms):
    return {a: Fr(rng.randint(-9, 9), rng.randint(1, 5)) for a in atoms}


class TestRingBasics:
    def test_difference_of_squares(self):
        assert (X0 + X1) * (X0 - X1) == X0 ** 2 - X1 ** 2

    def test_additive_identity(self):
        p = 3 * X0 * X1 - Poly.constant(Fr(1, 2))
        assert p + Poly.zero() == p

    def test_parameter_cube(self):
        # expand (F+q)*(F+q)^2 and compare term maps against the cube
        lhs = (F + Q) * (F + Q) ** 2
        expected = (F ** 3 + 3 * F ** 2 * Q + 3 * F * Q ** 2 + Q ** 3)
        assert lhs == expected
        assert dict(lhs.terms()) == dict(expected.terms())

    @given(polys(), polys(), polys())
    @settings(max_examples=150, deadline=None)
    def test_ring_axioms(self, a, b, c):
        assert (a + b) + c == a + (b + c)
        assert a + b == b + a
        assert (a * b) * c == a * (b * c)
        assert a * b == b * a
        assert a * (b + c) == a * b + a * c

    @given(polys(), polys())
    @settings(max_examples=150, deadline=None)
    def test_exact_div_roundtrip(self, a, b):
        if b.is_zero():
            return
        assert (a * b).exact_div(b) == a

    @given(polys())
    @settings(max_examples=50, deadline=None)
    def test_square_root_roundtrip(self, a):
        sq = a * a
        root = sq.sqrt()
        assert root * root == sq


class TestEval:
    def test_simple_point(self):
        p = X0 ** 2 - X1 ** 2
        assert p.eval({xi(0): Fr(3), xi(1): Fr(2)}) == 5

    def test_constant_ignores_assignment(self):
        assert Poly.constant(Fr(7, 3)).eval({}) == Fr(7, 3)

    def test_missing_atom(self):
        with pytest.raises(MissingAtomError):
            (X0 + F).eval({xi(0): Fr(1)})

    def test_eval_is_ring_homomorphism(self):
        rng = random.Random(42)
        a = X0 * F - 2 * X1 ** 2 + Poly.constant(Fr(1, 3))
        b = Q * X2 + X0 * X1 - F ** 2
        atoms = a.atoms() | b.atoms()
        for _ in range(1000):
            sigma = assignments(rng, atoms)
            assert (a * b).eval(sigma) == a.eval(sigma) * b.eval(sigma)
            assert (a + b).eval(sigma) == a.eval(sigma) + b.eval(sigma)


class TestDivision:
    def test_exact_quotient(self):
        assert (X0 ** 2 - X1 ** 2).exact_div(X0 - X1) == X0 + X1

    def test_not_divisible_with_witness(self):
        with pytest.raises(NotDivisibleError) as err:
            (X0 ** 2).exact_div(X1)
        assert not err.value.remainder.is_zero()

    def test_constant_divisor(self):
        assert (2 * X0).exact_div(Poly.constant(2)) == X0

    def test_zero_divisor(self):
        with pytest.raises(ZeroDivisionError):
            X0.exact_div(Poly.zero())


class TestSqrt:
    def test_zero(self):
        assert Poly.zero().sqrt() == Poly.zero()

    def test_perfect_square(self):
        p = (2 * X0 * F - 3 * X1 + Q) ** 2
        root = p.sqrt()
        assert root * root == p

    def test_negative_constant(self):
        with pytest.raises(NotPerfectSquareError):
            Poly.constant(-4).sqrt()

    def test_obstruction_reported(self):
        with pytest.raises(NotPerfectSquareError) as err:
            (X0 ** 2 + X1).sqrt()
        assert not err.value.remainder.is_zero()


class TestDegrees:
    def test_homogeneous_quadratic(self):
        p = X0 * X1 + X2 ** 2
        assert p.homogeneous_degree_in(XI) == 2

    def test_quartic_with_parameters(self):
        p = F * X0 ** 4 + (F + Q) * X0 ** 2 * X1 ** 2 + Q * X1 ** 4
        assert p.homogeneous_degree_in(XI) == 4

    def test_inhomogeneous_verdict(self):
        assert (X0 + X1 ** 2).homogeneous_degree_in(XI) is None

    @given(polys(), polys())
    @settings(max_examples=100, deadline=None)
    def test_homogeneity_adds_under_product(self, a, b):
        da, db = a.homogeneous_degree_in(XI), b.homogeneous_degree_in(XI)
        if da is None or db is None or a.is_zero() or b.is_zero():
            return
        assert (a * b).homogeneous_degree_in(XI) == da + db

    def test_substitute_composes(self):
        p = X0 ** 2 + F * X1
        q = p.substitute({xi(0): X1 + X2, param("F"): Poly.constant(2)})
        assert q == (X1 + X2) ** 2 + 2 * X1


class TestRenderParse:
    @given(polys())
    @settings(max_examples=150, deadline=None)
    def test_roundtrip(self, p):
        names = {a.name: a for a in p.atoms()}
        assert parse_poly(p.render(), names) == p

    def test_canonical_text_is_deterministic(self):
        a = X0 * X1 + 2 * X2 - Poly.constant(Fr(1, 2))
        b = -Poly.constant(Fr(1, 2)) + X0 * X1 + 2 * X2
        assert a.render() == b.render()
