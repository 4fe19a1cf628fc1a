import numpy as np
import pytest

from lops import lab


@pytest.fixture(scope="module")
def patch():
    return lab.FieldPatch.standard(h=0.1, n=9)


@pytest.fixture(scope="module")
def table():
    return lab.refinement_table(h=0.1, refine=1, n=9)


@pytest.fixture(scope="module")
def flat():
    return lab.FieldPatch(0.1, 5, lab.constant_minkowski, lab.constant_velocity)


class TestFlatCases:
    def test_christoffels_vanish(self, flat):
        assert np.max(np.abs(flat.christoffel)) == 0.0

    def test_identities_trivially_zero(self, flat):
        assert lab.check_first_shear_identity(flat).residual == 0.0
        assert lab.check_second_shear_identity(flat).residual == 0.0
        assert lab.check_acceleration_identity(flat).residual == 0.0
        assert lab.check_shear_contraction(flat).residual == 0.0

    def test_entropy_production_exactly_zero(self, flat):
        rep = lab.check_entropy_sign(flat, vtheta=-1.0)
        assert rep.min_value == 0.0 and rep.max_value == 0.0


class TestPointwiseAlgebra:
    def test_projector_and_normalizations(self, patch):
        vals = lab.check_projector_algebra(patch)
        for name, v in vals.items():
            assert v < 1e-12, name

    def test_metric_compatibility_is_discretely_exact(self, patch):
        assert lab.check_metric_compatibility(patch).residual < 1e-13

    def test_shear_square_nonnegative_pointwise(self, patch):
        lo, hi = lab.shear_square_range(patch)
        assert lo >= -1e-12
        assert hi > 0  # the standard family genuinely shears


class TestConvergence:
    def test_identities_converge_at_second_order(self, table):
        for row in table:
            if row.ratio is None or row.name.endswith("-mutated"):
                continue
            assert 3.5 <= row.ratio <= 4.5, (row.name, row.ratio)

    def test_negative_controls_stall(self, table):
        stalled = [r for r in table if r.name.endswith("-mutated") and r.ratio is not None]
        assert stalled
        for row in stalled:
            assert not 3.5 <= row.ratio <= 4.5, (row.name, row.ratio)
            assert row.ratio < 2.0

    def test_residuals_have_h_squared_scale(self, table):
        for row in table:
            if row.name.endswith("-mutated"):
                continue
            assert row.residual < 1e-3


class TestEntropySign:
    def test_default_convention_within_bound(self, patch):
        rep = lab.check_entropy_sign(patch, vtheta=-1.0)
        assert rep.ok and rep.min_value >= -10 * patch.h ** 2

    def test_linearity_in_viscosity(self, patch):
        a = lab.check_entropy_sign(patch, vtheta=-1.0)
        b = lab.check_entropy_sign(patch, vtheta=1.0)
        assert a.min_value == -b.max_value and a.max_value == -b.min_value

    def test_reported_nonneg_convention(self, patch):
        rep = lab.check_entropy_sign(patch, vtheta=-1.0)
        assert rep.nonneg_convention == "vtheta >= 0"


class TestPatchMechanics:
    def test_too_small_rejected(self):
        with pytest.raises(lab.PatchTooSmallError):
            lab.FieldPatch(0.1, 4, lab.constant_minkowski, lab.constant_velocity)

    def test_refinement_keeps_extent(self, patch):
        fine = patch.refined(1)
        assert fine.n == 17 and fine.h == pytest.approx(0.05)
        assert np.allclose(fine.coords[0, 0, 0, 0], patch.coords[0, 0, 0, 0])
        assert np.allclose(fine.coords[-1, -1, -1, -1], patch.coords[-1, -1, -1, -1])

    def test_velocity_requires_timelike_dynamic_velocity(self):
        def null_velocity(x):
            c = np.zeros(x.shape[:-1] + (4,))
            c[..., 1] = 1.0  # spacelike covector
            return c
        bad = lab.FieldPatch(0.1, 5, lab.constant_minkowski, null_velocity)
        with pytest.raises(ValueError):
            _ = bad.F

    def test_vorticity_antisymmetric(self, patch):
        om = patch.omega
        assert np.max(np.abs(om + np.swapaxes(om, -1, -2))) < 1e-15
        assert np.max(np.abs(om)) > 1e-4  # the family genuinely rotates
