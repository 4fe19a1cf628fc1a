import random
from fractions import Fraction as Fr

import pytest

from lops.matrix import (Factorization, SymbolMatrix, block_order,
                         build_symbol_matrix, cofactor_determinant,
                         cofactor_determinant_rational, determinant,
                         determinant_factors, factored_xi_degree,
                         verify_factorization, verify_factorization_product)
from lops.poly import Poly, XI, param, xi
from lops.matrix import _bareiss, _sparse_expansion

X = [Poly.atom(a) for a in XI]
ATOMS = list(XI) + [param("F"), param("q")]


def random_poly(rng, max_terms=2, max_exp=1):
    # small entries keep the dense-matrix oracle comparison fast while still
    # exercising multi-atom cancellation paths
    p = Poly.zero()
    for _ in range(rng.randint(0, max_terms)):
        term = Poly.constant(Fr(rng.randint(-4, 4), rng.randint(1, 3)))
        for _ in range(rng.randint(0, 1)):
            term = term * Poly.atom(rng.choice(ATOMS)) ** rng.randint(1, max_exp)
        p = p + term
    return p


def random_matrix(rng, n, density=1.0):
    grid = [[random_poly(rng) if rng.random() < density else Poly.zero()
             for _ in range(n)] for _ in range(n)]
    return SymbolMatrix(n, grid)


class TestDeterminant:
    def test_diagonal_product(self):
        m = SymbolMatrix(3, [[X[0], Poly.zero(), Poly.zero()],
                             [Poly.zero(), X[1], Poly.zero()],
                             [Poly.zero(), Poly.zero(), X[2] + X[3]]])
        assert determinant(m) == X[0] * X[1] * (X[2] + X[3])

    def test_two_by_two(self):
        m = SymbolMatrix(2, [[X[0], X[1]], [X[2], X[3]]])
        assert determinant(m) == X[0] * X[3] - X[1] * X[2]

    def test_agrees_with_cofactor_oracle_on_random_matrices(self):
        rng = random.Random(11)
        for trial in range(200):
            n = rng.randint(1, 6)
            m = random_matrix(rng, n, density=rng.choice([0.4, 0.7, 1.0]))
            assert determinant(m) == cofactor_determinant(m), f"trial {trial}"

    def test_bareiss_and_sparse_expansion_agree(self):
        rng = random.Random(5)
        for _ in range(40):
            n = rng.randint(3, 6)
            m = random_matrix(rng, n, density=0.5)
            assert _bareiss(m.entries) == _sparse_expansion(m.entries)

    def test_singular_matrix(self):
        m = SymbolMatrix(2, [[X[0], X[0]], [X[0], X[0]]])
        assert determinant(m).is_zero()

    def test_rational_cofactor_oracle(self):
        rng = random.Random(7)
        rows = [[Fr(rng.randint(-5, 5), rng.randint(1, 3)) for _ in range(5)]
                for _ in range(5)]
        wrapped = SymbolMatrix(5, [[Poly.constant(v) for v in row] for row in rows])
        assert cofactor_determinant_rational(rows) == determinant(wrapped).as_constant()


class TestBlockOrder:
    def test_block_triangular_split(self):
        z = Poly.zero()
        # coupled pair (0,1) feeding 2; 2 isolated diagonal
        m = SymbolMatrix(3, [[X[0], X[1], X[2]],
                             [X[3], X[0], z],
                             [z, z, X[1]]])
        blocks = block_order(m)
        assert sorted(map(sorted, blocks)) == [[0, 1], [2]]
        assert determinant(m) == (X[0] * X[0] - X[1] * X[3]) * X[1]

    def test_full_coupling_single_block(self):
        rng = random.Random(2)
        m = random_matrix(rng, 4, density=1.0)
        assert len(block_order(m)) == 1

    def test_permutation_only_matrix(self):
        z = Poly.zero()
        m = SymbolMatrix(3, [[z, X[0], z], [z, z, X[1]], [X[2], z, z]])
        # single cycle: one block; determinant is the signed product
        assert determinant(m) == X[0] * X[1] * X[2]


class TestFactorization:
    def test_exact_match(self):
        det = (X[0] + X[1]) ** 3 * (X[2] - X[3])
        f = Factorization(Poly.one(), [(X[0] + X[1], 3), (X[2] - X[3], 1)])
        assert verify_factorization(det, f).ok

    def test_wrong_exponent_reports_witness(self):
        det = (X[0] + X[1]) ** 3
        f = Factorization(Poly.one(), [(X[0] + X[1], 2)])
        rep = verify_factorization(det, f)
        assert not rep.ok and rep.witness_monomial

    def test_prefactor_must_be_parameter_only(self):
        f = Factorization(X[0], [(X[1], 1)])
        assert not verify_factorization(X[0] * X[1], f).ok

    def test_product_form_verifier(self):
        factors = [X[0] + X[1], (X[0] - X[1]) ** 2, Poly.constant(3) * X[2]]
        claim = Factorization(Poly.constant(3),
                              [(X[0] + X[1], 1), (X[0] - X[1], 2), (X[2], 1)])
        assert verify_factorization_product(factors, claim).ok

    def test_product_form_detects_wrong_multiplicity(self):
        factors = [(X[0] + X[1]) ** 2]
        claim = Factorization(Poly.one(), [(X[0] + X[1], 3)])
        assert not verify_factorization_product(factors, claim).ok

    def test_product_form_accepts_straddling_grouping(self):
        # a correct claim whose factor spans two block determinants: the
        # cancellation gets stuck and the reduced-expansion fallback decides
        factors = [X[0] + X[1], X[2], (X[0] - X[1])]
        claim = Factorization(Poly.one(),
                              [((X[0] + X[1]) * (X[0] - X[1]), 1), (X[2], 1)])
        assert verify_factorization_product(factors, claim).ok

    def test_product_form_rejects_straddling_wrong_claim(self):
        factors = [X[0] + X[1], X[2]]
        claim = Factorization(Poly.one(), [((X[0] + X[1]) * (X[0] - X[1]), 1)])
        assert not verify_factorization_product(factors, claim).ok


class TestEnsMatrixShape:
    def test_scalar_expansion_dimensions(self):
        from lops import build_ens_system
        m = build_symbol_matrix(build_ens_system())
        assert m.dimension == 25
        assert m.row_labels[0] == "eq_g[0]" and m.col_labels[-1] == "c[3]"

    def test_factored_degree(self):
        from lops import build_ens_system
        m = build_symbol_matrix(build_ens_system())
        dets = determinant_factors(m)
        assert factored_xi_degree(dets) == 44
