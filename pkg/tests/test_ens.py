import random
from fractions import Fraction as Fr

import pytest

from lops import ens
from lops.matrix import build_symbol_matrix, determinant
from lops.poly import Poly, XI, xi
from lops.system import validate_structure, total_order

X = [Poly.atom(a) for a in XI]


@pytest.fixture(scope="module")
def printed_block_system():
    return ens.build_ens_system("specialized", "independent")


class TestSymbolEntries:
    def test_metric_block_diagonal_is_wave_operator(self):
        s = ens.build_ens_system()
        light = s.entry("eq_g", 0, "g", 0)
        assert light.homogeneous_degree_in(XI) == 2
        for i in range(10):
            assert s.entry("eq_g", i, "g", i) == light
            for j in range(10):
                if i != j:
                    assert s.entry("eq_g", i, "g", j).is_zero()

    def test_entropy_entry_is_squared_flow(self, printed_block_system):
        uxi = sum((Poly.atom(ens.U[i]) * X[i] for i in range(4)), Poly.zero())
        assert printed_block_system.entry("eq_s", 0, "s", 0) == uxi * uxi

    def test_vorticity_row_couplings_match_printed_block(self, printed_block_system):
        # row Omega_{01}: -q u.xi xi_1 against C_0 and +q u.xi xi_0 against C_1
        uxi = sum((Poly.atom(ens.U[i]) * X[i] for i in range(4)), Poly.zero())
        qxi = Poly.atom(ens.Q_ATOM) * uxi
        s = printed_block_system
        assert s.entry("eq_omega", 0, "c", 0) == -qxi * X[1]
        assert s.entry("eq_omega", 0, "c", 1) == qxi * X[0]
        # row Omega_{12}: columns C_1, C_2
        assert s.entry("eq_omega", 3, "c", 1) == -qxi * X[2]
        assert s.entry("eq_omega", 3, "c", 2) == qxi * X[1]
        # transport diagonal uses the dynamic-velocity contraction
        cxi = sum((Poly.atom(ens.CV[i]) * X[i] for i in range(4)), Poly.zero())
        for k in range(6):
            assert s.entry("eq_omega", k, "omega", k) == cxi

    def test_velocity_equation_rows_match_printed_block(self, printed_block_system):
        s = printed_block_system
        xiup = [X[0]] + [Poly.atom(ens.GM[i]) * X[i + 1] for i in range(3)]
        # C_0 row: +xi^1, +xi^2, +xi^3 against Omega_{01}, Omega_{02}, Omega_{03}
        for k, expected in ((0, xiup[1]), (1, xiup[2]), (2, xiup[3])):
            assert s.entry("eq_c", 0, "omega", k) == expected
        # C_1 row: -xi^0 against Omega_{01}, +xi^2, +xi^3 against Omega_{12}, Omega_{13}
        assert s.entry("eq_c", 1, "omega", 0) == -xiup[0]
        assert s.entry("eq_c", 1, "omega", 3) == xiup[2]
        assert s.entry("eq_c", 1, "omega", 4) == xiup[3]
        # C_3 row: -xi^0, -xi^1, -xi^2 against Omega_{03}, Omega_{13}, Omega_{23}
        assert s.entry("eq_c", 3, "omega", 2) == -xiup[0]
        assert s.entry("eq_c", 3, "omega", 4) == -xiup[1]
        assert s.entry("eq_c", 3, "omega", 5) == -xiup[2]

    def test_structure_and_order(self):
        s = ens.build_ens_system()
        assert validate_structure(s).ok
        assert total_order(s) == 44

    def test_viscosity_scaling_of_metric_row_coupling(self):
        # principal entries scale linearly in the viscosity parameter
        s = ens.build_ens_system()
        entry = s.entry("eq_g", 0, "u", 1)
        assert not entry.is_zero()
        doubled = entry.substitute({ens.VTHETA: Poly.constant(2) * Poly.atom(ens.VTHETA)})
        assert doubled == Poly.constant(2) * entry


class TestQuartic:
    def test_derived_quartic_closed_form(self):
        A, B, C = ens.quartic_coefficients()
        assert ens.derive_quartic_from_block() == A * X[0] ** 4 + B * X[0] ** 2 + C
        assert (B * B - 4 * A * C).is_zero()

    def test_comparison_report_flags(self):
        rep = ens.quartic_comparison_report()
        assert rep["derived"]["discriminant_is_zero"]
        assert not rep["claimed_verbatim"]["matches_derived"]
        assert not rep["claimed_verbatim"]["discriminant_is_perfect_square"]
        assert rep["claimed_repaired"]["discriminant_matches_claimed_value"]
        assert rep["claimed_B_minus_derived_B_is_claimed_root"]

    def test_quartic_homogeneous_of_degree_four(self):
        A, B, C = ens.quartic_coefficients()
        p = A * X[0] ** 4 + B * X[0] ** 2 + C
        assert p.homogeneous_degree_in(XI) == 4


class TestStates:
    def test_minkowski_state_valid(self):
        report = ens.validate_state(ens.FluidState.minkowski())
        assert report.ok

    def test_broken_normalization_detected(self):
        state = ens.FluidState.minkowski()
        state.u_up = [Fr(1), Fr(1), Fr(0), Fr(0)]
        report = ens.validate_state(state)
        assert not report.ok
        names = {c.name for c in report.checks if not c.ok}
        assert "unit-normalization" in names

    def test_random_states_exactly_unit(self):
        rng = random.Random(4)
        for _ in range(50):
            state = ens.random_state(rng)
            norm = sum(state.gl[a][b] * state.u_up[a] * state.u_up[b]
                       for a in range(4) for b in range(4))
            assert norm == 1

    def test_stiff_toy_eos_boundary_case(self):
        eos = ens.EquationOfState.stiff_toy()
        # dr/dF equals r/F exactly for the stiff closure
        h = Fr(1, 32)
        for Fv, sv in ((Fr(1), Fr(1)), (Fr(3), Fr(2))):
            dr = (eos.r_of_F_s(Fv + h, sv) - eos.r_of_F_s(Fv - h, sv)) / (2 * h)
            assert dr == eos.r_of_F_s(Fv, sv) / Fv

    def test_eos_consistency_identity(self):
        eos = ens.EquationOfState.stiff_toy()
        for Fv, sv in ((Fr(2), Fr(1)), (Fr(5, 2), Fr(3))):
            r = eos.r_of_F_s(Fv, sv)
            assert r * Fv == eos.energy_density(Fv, sv) + eos.pressure(Fv, sv)

    def test_eos_inverse_view(self):
        eos = ens.EquationOfState.stiff_toy()
        F = eos.F_of_r_s(Fr(6), Fr(1))
        assert abs(eos.r_of_F_s(F, Fr(1)) - 6) < Fr(1, 10 ** 9)


class TestReferenceProduct:
    def test_expanded_degree_is_44(self):
        state = ens.FluidState.minkowski()
        p = ens.reference_product(state)
        assert p.homogeneous_degree_in(XI) == 44

    def test_time_axis_value(self):
        # only the time component survives; every cone factor evaluates to 1
        # and the quartic contributes its leading coefficient
        state = ens.FluidState.minkowski(F=Fr(1), q=Fr(1, 2))
        tau = [Fr(1), Fr(0), Fr(0), Fr(0)]
        value = ens.reference_product_value(state, tau)
        F, q = state.F, state.q
        assert value == F ** 3 * (F + q) ** 2 * (F + q)  # prefactor * P(tau)

    def test_exact_match_with_determinant_at_a_point(self):
        state = ens.FluidState.minkowski(F=Fr(1), q=Fr(1, 2))
        pt = [Fr(2), Fr(1), Fr(1), Fr(1)]
        mat = build_symbol_matrix(ens.build_ens_system("general", "on_data"))
        assign = dict(state.assignment())
        for i in range(4):
            assign[XI[i]] = pt[i]
        num = ens._numeric_det(ens._evaluate_matrix(mat, assign))
        assert num == ens.reference_product_value(state, pt)

    def test_q_zero_limit_contains_sixteenth_cone_power(self):
        state = ens.FluidState.minkowski(F=Fr(2), q=Fr(0, 1))
        # construction bypasses the q > 0 validity gate on purpose
        p = ens.reference_product(state)
        mink = X[0] ** 2 - X[1] ** 2 - X[2] ** 2 - X[3] ** 2
        quotient = p.exact_div(mink ** 16)
        assert quotient.homogeneous_degree_in(XI) == 12


class TestVerification:
    def test_full_report_passes(self):
        rep = ens.verify_ens_determinant(state_samples=25, seed=1)
        assert rep.ok, "\n".join(i.line() for i in rep.items)

    def test_threaded_run_matches(self):
        a = ens.verify_ens_determinant(state_samples=6, seed=2, threads=1)
        b = ens.verify_ens_determinant(state_samples=6, seed=2, threads=4)
        assert a.to_json() == b.to_json()

    def test_degeneration(self):
        rep = ens.degeneration_report()
        assert rep.ok, "\n".join(i.line() for i in rep.items)

    def test_minkowski_inequality_identities(self):
        rep = ens.minkowski_inequality_identities()
        assert rep.ok, "\n".join(i.line() for i in rep.items)

    def test_sampled_root_nonnegativity_small(self):
        item = ens.sampled_root_nonnegativity(Fr(2), Fr(3), n_dirs=500, seed=0)
        assert item.ok


class TestFactorizationOps:
    def test_expanded_block_factorization_via_poly_verifier(self):
        # the Poly-level verifier on the expanded 10x10 block determinant
        from lops.matrix import Factorization, verify_factorization
        det = determinant(ens.vorticity_velocity_block("on_data"))
        F, q = Poly.atom(ens.F_ATOM), Poly.atom(ens.Q_ATOM)
        light = ens._light_cone("specialized")
        flow = ens._flow(ens.U)
        P = ens.derive_quartic_from_block()
        good = Factorization(F ** 3 * (F + q) ** 2,
                             [(flow, 6), (light, 2), (P, 1)])
        assert verify_factorization(det, good).ok

    def test_wrong_cone_exponent_rejected_with_witness(self):
        from lops.matrix import (Factorization, determinant_factors,
                                 verify_factorization_product)
        system = ens.build_ens_system()
        dets = determinant_factors(build_symbol_matrix(system))
        claim = Factorization.from_claim(system.factor_claim)
        wrong = Factorization(claim.scalar_prefactor, list(claim.factors))
        wrong.factors[0] = (wrong.factors[0][0], 13)  # 13 cones instead of 14
        rep = verify_factorization_product(dets, wrong)
        assert not rep.ok and rep.detail

    def test_all_cone_sheets_inside_the_wave_cone(self):
        from lops.hyperbolic import cone_sample
        state = ens.FluidState.minkowski()
        assign = state.assignment()
        claim = ens.reference_factor_claim("specialized")
        light = claim.factors[0][0]
        tau = [Fr(1), Fr(0), Fr(0), Fr(0)]
        for name, (p, _) in zip(ens.FACTOR_NAMES, claim.factors):
            samples = cone_sample(p, tau, assign, n=200, seed=0,
                                  factor_id=name, reference=light)
            assert samples.all_within_reference, name

    def test_repaired_discriminant_divides_as_square(self):
        # disc / (q*xi3)^2 is itself a perfect square in the remaining atoms
        Ar, Br, Cr = ens.CLAIMED_QUARTIC_REPAIRED
        disc = Br * Br - 4 * Ar * Cr
        q, x3 = Poly.atom(ens.Q_ATOM), X[3]
        quotient = disc.exact_div((q * x3) ** 2)
        root = quotient.sqrt()
        assert root * root == quotient
        gm2, gm3 = (Poly.atom(a) for a in (ens.GM[1], ens.GM[2]))
        assert quotient == (gm2 * X[2] - gm3 * X[3]) ** 2


class TestHyperbolicityOfAllFactors:
    def test_every_reference_factor_hyperbolic_at_random_states(self):
        from lops.hyperbolic import hyperbolicity_auto
        rng = random.Random(8)
        claim = ens.reference_factor_claim("general")
        for _ in range(10):
            state = ens.random_state(rng, max_entry=5)
            assign = state.assignment()
            tau = state.u_lo
            for idx, (p, _) in enumerate(claim.factors):
                v = hyperbolicity_auto(p, tau, assign, n_samples=60, seed=0,
                                       factor_id=f"f{idx}")
                assert v.hyperbolic, (idx, v.witness)
