"""Finite-difference checks of definition-level tensor identities.

Analytic metric and dynamic-velocity closures are sampled on a small 4-D
patch; all derived fields (index of the fluid, normalized velocity,
vorticity, shears, projectors) are built pointwise so the only error source
is the second-order central differencing.  Identities that hold in the
continuum must then show O(h^2) residuals, and deliberately mutated
variants must not converge.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

ETA = np.diag([1.0, -1.0, -1.0, -1.0])
EPS = 0.05  # amplitude of the analytic perturbations in the standard family


class PatchTooSmallError(Exception):
    pass


# -- the standard analytic test family ------------------------------------------
# Curved metric plus a dynamic velocity with nonzero vorticity; coefficients
# are fixed so residual tables are reproducible.


def standard_metric(x: np.ndarray) -> np.ndarray:
    """g_{ab}(x) for coordinates x with shape (..., 4); returns (..., 4, 4)."""
    x0, x1, x2, x3 = (x[..., i] for i in range(4))
    g = np.zeros(x.shape[:-1] + (4, 4))
    g[..., 0, 0] = 1.0 + EPS * np.sin(x1) * np.cos(x2)
    g[..., 1, 1] = -1.0 + EPS * np.cos(x0 + x3)
    g[..., 2, 2] = -1.0 + EPS * np.sin(x0 - x1)
    g[..., 3, 3] = -1.0 + EPS * np.cos(2.0 * x2)
    g[..., 0, 1] = g[..., 1, 0] = 0.5 * EPS * np.sin(x2 + x3)
    g[..., 0, 2] = g[..., 2, 0] = 0.5 * EPS * np.cos(x1) * np.sin(x3)
    g[..., 1, 2] = g[..., 2, 1] = 0.5 * EPS * np.sin(x0) * np.sin(x3)
    g[..., 1, 3] = g[..., 3, 1] = 0.5 * EPS * np.cos(x0 + x2)
    g[..., 2, 3] = g[..., 3, 2] = 0.5 * EPS * np.sin(x0 + x1)
    return g


def standard_dynamic_velocity(x: np.ndarray) -> np.ndarray:
    """Covector C_a(x) with nonzero curl, |C| close to 1 on the patch."""
    x0, x1, x2, x3 = (x[..., i] for i in range(4))
    c = np.zeros(x.shape[:-1] + (4,))
    c[..., 0] = 1.0 + EPS * np.cos(x1 + 2.0 * x3)
    c[..., 1] = EPS * np.sin(x0 + x2)
    c[..., 2] = EPS * np.cos(x0 - x3)
    c[..., 3] = EPS * np.sin(x1 - x2) * np.cos(x0)
    return c


def standard_one_form(x: np.ndarray) -> np.ndarray:
    """An unrelated analytic one-form for the conformal-derivative check."""
    x0, x1, x2, x3 = (x[..., i] for i in range(4))
    v = np.zeros(x.shape[:-1] + (4,))
    v[..., 0] = np.sin(x1) + 0.3 * np.cos(x2 + x3)
    v[..., 1] = np.cos(x0) * np.sin(x3)
    v[..., 2] = 0.5 * np.sin(x0 + x1 + x3)
    v[..., 3] = np.cos(2.0 * x2) - 0.2 * np.sin(x0)
    return v


def constant_minkowski(x: np.ndarray) -> np.ndarray:
    return np.broadcast_to(ETA, x.shape[:-1] + (4, 4)).copy()


def constant_velocity(x: np.ndarray) -> np.ndarray:
    c = np.zeros(x.shape[:-1] + (4,))
    c[..., 0] = 1.0
    return c


# -- patch ------------------------------------------------------------------------


@dataclass(frozen=True)
class FieldPatch:
    """Sampled fields on a uniform 4-D lattice of n^4 nodes, spacing h."""

    h: float
    n: int
    metric_fn: Callable[[np.ndarray], np.ndarray]
    velocity_fn: Callable[[np.ndarray], np.ndarray]

    def __post_init__(self):
        if self.n < 5:
            raise PatchTooSmallError("need at least 5 nodes per axis for interior stencils")

    @staticmethod
    def standard(h: float = 0.1, n: int = 9) -> "FieldPatch":
        return FieldPatch(h, n, standard_metric, standard_dynamic_velocity)

    def refined(self, k: int = 1) -> "FieldPatch":
        """Same extent, spacing halved k times (node count adjusted)."""
        return FieldPatch(self.h / 2 ** k, (self.n - 1) * 2 ** k + 1,
                          self.metric_fn, self.velocity_fn)

    @cached_property
    def coords(self) -> np.ndarray:
        half = (self.n - 1) / 2.0
        axis = (np.arange(self.n) - half) * self.h
        grids = np.meshgrid(axis, axis, axis, axis, indexing="ij")
        return np.stack(grids, axis=-1)

    @cached_property
    def gl(self) -> np.ndarray:
        g = self.metric_fn(self.coords)
        # Lorentzian sanity: eigenvalues of eta-congruent form stay away from 0
        if not np.isfinite(g).all():
            raise ValueError("metric closure produced non-finite values")
        return g

    @cached_property
    def gi(self) -> np.ndarray:
        return np.linalg.inv(self.gl)

    @cached_property
    def C_lo(self) -> np.ndarray:
        return self.velocity_fn(self.coords)

    @cached_property
    def C_up(self) -> np.ndarray:
        return np.einsum("...ab,...b->...a", self.gi, self.C_lo)

    @cached_property
    def F(self) -> np.ndarray:
        norm2 = np.einsum("...a,...a->...", self.C_up, self.C_lo)
        if not (norm2 > 0).all():
            raise ValueError("dynamic velocity is not everywhere timelike on the patch")
        return np.sqrt(norm2)

    @cached_property
    def u_lo(self) -> np.ndarray:
        return self.C_lo / self.F[..., None]

    @cached_property
    def u_up(self) -> np.ndarray:
        return self.C_up / self.F[..., None]

    @cached_property
    def pi_lo(self) -> np.ndarray:
        return self.gl - np.einsum("...a,...b->...ab", self.u_lo, self.u_lo)

    @cached_property
    def pi_mixed(self) -> np.ndarray:
        """pi^a_b = delta^a_b - u^a u_b."""
        delta = np.broadcast_to(np.eye(4), self.gl.shape)
        return delta - np.einsum("...a,...b->...ab", self.u_up, self.u_lo)

    @cached_property
    def pi_up(self) -> np.ndarray:
        return self.gi - np.einsum("...a,...b->...ab", self.u_up, self.u_up)

    # -- derivatives -----------------------------------------------------------

    def grad(self, f: np.ndarray) -> np.ndarray:
        """Central-difference gradient; new derivative axis at position -1-rank
        convention: returned shape (..., 4, *tensor_axes_of_f_beyond_grid)."""
        parts = [np.gradient(f, self.h, axis=a, edge_order=2) for a in range(4)]
        return np.stack(parts, axis=4)

    @cached_property
    def christoffel(self) -> np.ndarray:
        """Gamma^l_{mn} from second-order central differences of the metric."""
        return christoffel_from(self.gl, self.gi, self.h)

    @cached_property
    def christoffel_conformal(self) -> np.ndarray:
        gbar = self.F[..., None, None] ** 2 * self.gl
        gbar_inv = self.gi / self.F[..., None, None] ** 2
        return christoffel_from(gbar, gbar_inv, self.h)

    def cov_deriv_covector(self, v: np.ndarray, conformal: bool = False) -> np.ndarray:
        """(nabla_a v_b) with shape (..., 4a, 4b)."""
        gamma = self.christoffel_conformal if conformal else self.christoffel
        dv = self.grad(v)  # (..., 4a, 4b)
        return dv - np.einsum("...lab,...l->...ab", gamma, v)

    def cov_deriv_vector(self, v: np.ndarray, conformal: bool = False) -> np.ndarray:
        """(nabla_a v^b) with shape (..., 4a, 4b)."""
        gamma = self.christoffel_conformal if conformal else self.christoffel
        dv = self.grad(v)
        return dv + np.einsum("...bal,...l->...ab", gamma, v)

    @cached_property
    def omega(self) -> np.ndarray:
        """Vorticity Omega_{ab} = d_a C_b - d_b C_a (connection-free)."""
        dC = self.grad(self.C_lo)
        return dC - np.swapaxes(dC, -1, -2)

    @cached_property
    def K(self) -> np.ndarray:
        """K_a = d_a F / F."""
        return self.grad(self.F) / self.F[..., None]

    @cached_property
    def sigma(self) -> np.ndarray:
        """Shear Sigma_{ab}: doubly projected symmetrized gradient of C."""
        dC = self.cov_deriv_covector(self.C_lo)
        sym = dC + np.swapaxes(dC, -1, -2)
        return np.einsum("...am,...bn,...mn->...ab", self.pi_mixed_T, self.pi_mixed_T, sym)

    @cached_property
    def pi_mixed_T(self) -> np.ndarray:
        """pi_a^m = pi^m_a, arranged as (..., a, m) for projection einsums."""
        return np.swapaxes(self.pi_mixed, -1, -2)

    @cached_property
    def sigma_bar(self) -> np.ndarray:
        """Conformal shear built from its definition (conformal derivatives)."""
        dbarC = self.cov_deriv_covector(self.C_lo, conformal=True)  # (...,a,b)
        sym = dbarC + np.swapaxes(dbarC, -1, -2)
        cbar_up = self.u_up / self.F[..., None]
        drift = np.einsum("...l,...la->...a", cbar_up, dbarC)  # Cbar^l nablabar_l C_a
        correction = (np.einsum("...a,...b->...ab", drift, self.C_lo)
                      + np.einsum("...b,...a->...ab", drift, self.C_lo))
        return sym - correction

    @cached_property
    def theta_tensor(self) -> np.ndarray:
        """Theta_{ab} = Omega_{ab} - u^l (Omega_{la} u_b + Omega_{lb} u_a)."""
        contr = np.einsum("...l,...la->...a", self.u_up, self.omega)
        return (self.omega
                - np.einsum("...a,...b->...ab", contr, self.u_lo)
                - np.einsum("...b,...a->...ab", contr, self.u_lo))

    def interior_max(self, arr: np.ndarray) -> float:
        sl = (slice(1, -1),) * 4
        return float(np.max(np.abs(arr[sl])))


def christoffel_from(gl: np.ndarray, gi: np.ndarray, h: float) -> np.ndarray:
    dg = np.stack([np.gradient(gl, h, axis=a, edge_order=2) for a in range(4)], axis=4)
    # dg[..., m, r, n] = d_m g_{rn}
    return 0.5 * np.einsum("...lr,...mrn->...lmn",
                           gi, dg + np.swapaxes(dg, 4, 6) - np.moveaxis(dg, 4, 5))


# -- identity checks -------------------------------------------------------------


@dataclass
class IdentityResidual:
    name: str
    residual: float
    h: float
    ratio: Optional[float] = None

    def to_json(self) -> dict:
        out = {"identity": self.name, "residual": self.residual, "h": self.h}
        if self.ratio is not None:
            out["ratio"] = self.ratio
        return out


def _field_metric_compatibility(patch: FieldPatch) -> np.ndarray:
    dg = patch.grad(patch.gl)  # (..., a, r, n) = d_a g_{rn}
    gamma = patch.christoffel
    # nabla_a g_{bc} = d_a g_{bc} - Gamma^l_{ab} g_{lc} - Gamma^l_{ac} g_{bl}
    return (dg
            - np.einsum("...lab,...lc->...abc", gamma, patch.gl)
            - np.einsum("...lac,...bl->...abc", gamma, patch.gl))


def check_metric_compatibility(patch: FieldPatch) -> IdentityResidual:
    """Pointwise exact (the discrete connection is built from the same
    central differences), so the residual is machine precision, not O(h^2)."""
    return IdentityResidual("metric-compatibility",
                            patch.interior_max(_field_metric_compatibility(patch)),
                            patch.h)


def _field_conformal_derivative(patch: FieldPatch,
                                one_form: Callable[[np.ndarray], np.ndarray] = standard_one_form,
                                drop_trace_term: bool = False) -> np.ndarray:
    v = one_form(patch.coords)
    lhs = patch.cov_deriv_covector(v, conformal=True)
    K = patch.K
    rhs = (patch.cov_deriv_covector(v)
           - np.einsum("...a,...b->...ab", K, v)
           - np.einsum("...b,...a->...ab", K, v))
    if not drop_trace_term:
        k_up = np.einsum("...ab,...b->...a", patch.gi, K)
        rhs = rhs + np.einsum("...r,...r,...ab->...ab", k_up, v, patch.gl)
    return lhs - rhs


def check_conformal_derivative(patch: FieldPatch,
                               one_form: Callable[[np.ndarray], np.ndarray] = standard_one_form,
                               drop_trace_term: bool = False) -> IdentityResidual:
    """Conformal covariant derivative against its expansion in K-terms."""
    name = "conformal-derivative" + ("-mutated" if drop_trace_term else "")
    field = _field_conformal_derivative(patch, one_form, drop_trace_term)
    return IdentityResidual(name, patch.interior_max(field), patch.h)


def _field_first_shear_identity(patch: FieldPatch,
                                drop_projection_term: bool = False) -> np.ndarray:
    dF = patch.grad(patch.F)
    u_dF = np.einsum("...r,...r->...", patch.u_up, dF)
    rhs = patch.sigma
    if not drop_projection_term:
        rhs = rhs + 2.0 * patch.pi_lo * u_dF[..., None, None]
    return patch.sigma_bar - rhs


def check_first_shear_identity(patch: FieldPatch,
                                     drop_projection_term: bool = False) -> IdentityResidual:
    """Conformal shear equals the plain shear plus the flow-derivative trace
    term 2 pi_{ab} u^r d_r F."""
    name = "shear-conformal-split" + ("-mutated" if drop_projection_term else "")
    field = _field_first_shear_identity(patch, drop_projection_term)
    return IdentityResidual(name, patch.interior_max(field), patch.h)


def _field_second_shear_identity(patch: FieldPatch) -> np.ndarray:
    dbarC = patch.cov_deriv_covector(patch.C_lo, conformal=True)
    rhs = 2.0 * np.swapaxes(dbarC, -1, -2) + patch.theta_tensor
    return patch.sigma_bar - rhs


def check_second_shear_identity(patch: FieldPatch) -> IdentityResidual:
    """Conformal shear equals twice the transposed conformal derivative of C
    plus the vorticity projection Theta."""
    return IdentityResidual("shear-vorticity-split",
                            patch.interior_max(_field_second_shear_identity(patch)),
                            patch.h)


def _field_acceleration_identity(patch: FieldPatch,
                                 drop_vorticity_term: bool = False) -> np.ndarray:
    du = patch.cov_deriv_covector(patch.u_lo)  # (..., a, b)
    lhs = np.einsum("...a,...ab->...b", patch.u_up, du)
    dF = patch.grad(patch.F)
    rhs = np.einsum("...ab,...a->...b", patch.pi_mixed, dF) / patch.F[..., None]
    if not drop_vorticity_term:
        rhs = rhs + np.einsum("...a,...ab->...b", patch.u_up, patch.omega) / patch.F[..., None]
    return lhs - rhs


def check_acceleration_identity(patch: FieldPatch,
                                drop_vorticity_term: bool = False) -> IdentityResidual:
    """u^a nabla_a u_b = pi^a_b d_a F / F + u^a Omega_{ab} / F."""
    name = "flow-acceleration" + ("-mutated" if drop_vorticity_term else "")
    field = _field_acceleration_identity(patch, drop_vorticity_term)
    return IdentityResidual(name, patch.interior_max(field), patch.h)


def _field_shear_contraction(patch: FieldPatch,
                             drop_acceleration_term: bool = False) -> np.ndarray:
    sigma_up = np.einsum("...am,...bn,...mn->...ab", patch.gi, patch.gi, patch.sigma)
    lhs = np.einsum("...ab,...ab->...", sigma_up, patch.sigma)
    du = patch.cov_deriv_covector(patch.u_lo)          # nabla_a u_b
    du_up = np.einsum("...am,...bn,...mn->...ab", patch.gi, patch.gi, du)
    acc = np.einsum("...a,...ab->...b", patch.u_up, du)
    acc_sq = np.einsum("...ab,...a,...b->...", patch.gi, acc, acc)
    rhs = (np.einsum("...ab,...ab->...", du_up, du)
           + np.einsum("...ab,...ba->...", du_up, du))
    if not drop_acceleration_term:
        rhs = rhs - acc_sq
    rhs = 2.0 * patch.F ** 2 * rhs
    return lhs - rhs


def check_conformal_shear_identities(patch: FieldPatch):
    """Both conformal-shear identities as a pair of residuals."""
    return (check_first_shear_identity(patch),
            check_second_shear_identity(patch))


def check_shear_contraction(patch: FieldPatch,
                            drop_acceleration_term: bool = False) -> IdentityResidual:
    """Sigma^{ab} Sigma_{ab} = 2 F^2 (grad-square + grad-transpose-square
    - acceleration-square)."""
    name = "shear-contraction" + ("-mutated" if drop_acceleration_term else "")
    field = _field_shear_contraction(patch, drop_acceleration_term)
    return IdentityResidual(name, patch.interior_max(field), patch.h)


@dataclass
class EntropySignReport:
    min_value: float
    max_value: float
    bound: float
    ok: bool
    vtheta: float
    nonneg_convention: str

    def to_json(self) -> dict:
        return {"min_value": self.min_value, "max_value": self.max_value,
                "bound": self.bound, "ok": self.ok, "vtheta": self.vtheta,
                "pointwise_nonnegative_for": self.nonneg_convention}


def check_entropy_sign(patch: FieldPatch, vtheta: float = -1.0,
                       bound_factor: float = 10.0) -> EntropySignReport:
    """Entropy production density (vtheta/2F) Sigma^{ab}Sigma_{ab}: min over
    interior nodes against the FD tolerance bound_factor * h^2.

    The contraction Sigma^{ab}Sigma_{ab} is pointwise non-negative (see
    shear_square_range), so the production is pointwise non-negative exactly
    when vtheta >= 0; the report records that alongside the verdict for the
    requested vtheta.
    """
    sigma_up = np.einsum("...am,...bn,...mn->...ab", patch.gi, patch.gi, patch.sigma)
    sq = np.einsum("...ab,...ab->...", sigma_up, patch.sigma)
    produced = vtheta / (2.0 * patch.F) * sq
    sl = (slice(1, -1),) * 4
    mn = float(np.min(produced[sl]))
    mx = float(np.max(produced[sl]))
    bound = bound_factor * patch.h ** 2
    return EntropySignReport(mn, mx, bound, mn >= -bound, vtheta,
                             "vtheta >= 0")


def check_projector_algebra(patch: FieldPatch) -> Dict[str, float]:
    """Pointwise (FD-free) identities: projector idempotence and
    annihilation of the flow, exact unit normalizations."""
    pi2 = np.einsum("...am,...mb->...ab", patch.pi_mixed, patch.pi_mixed)
    idem = np.max(np.abs(pi2 - patch.pi_mixed))
    annih = np.max(np.abs(np.einsum("...ab,...b->...a", patch.pi_lo, patch.u_up)))
    cbar_up = patch.u_up / patch.F[..., None]
    unit_cbar = np.max(np.abs(np.einsum("...a,...a->...", cbar_up, patch.C_lo) - 1.0))
    unit_u = np.max(np.abs(np.einsum("...a,...a->...", patch.u_up, patch.u_lo) - 1.0))
    return {"projector-idempotent": float(idem),
            "projector-annihilates-flow": float(annih),
            "inverse-velocity-unit": float(unit_cbar),
            "velocity-unit": float(unit_u)}


def _field_velocity_gradient_orthogonality(patch: FieldPatch) -> np.ndarray:
    du = patch.cov_deriv_covector(patch.u_lo)  # (..., b, a)
    return np.einsum("...a,...ba->...b", patch.u_up, du)


def check_velocity_gradient_orthogonality(patch: FieldPatch) -> IdentityResidual:
    """u^a nabla_b u_a = 0 (derivative of the exact unit normalization)."""
    return IdentityResidual("unit-norm-derivative",
                            patch.interior_max(_field_velocity_gradient_orthogonality(patch)),
                            patch.h)


#: Convergent identity checks: name -> residual-field function.
FIELD_CHECKS: Tuple[Tuple[str, Callable[[FieldPatch], np.ndarray]], ...] = (
    ("conformal-derivative", _field_conformal_derivative),
    ("shear-conformal-split", _field_first_shear_identity),
    ("shear-vorticity-split", _field_second_shear_identity),
    ("flow-acceleration", _field_acceleration_identity),
    ("shear-contraction", _field_shear_contraction),
    ("unit-norm-derivative", _field_velocity_gradient_orthogonality),
)

#: Mutated variants that must NOT converge (a dropped term dominates).
NEGATIVE_CONTROLS: Tuple[Tuple[str, Callable[[FieldPatch], np.ndarray]], ...] = (
    ("conformal-derivative-mutated",
     lambda p: _field_conformal_derivative(p, drop_trace_term=True)),
    ("shear-conformal-split-mutated",
     lambda p: _field_first_shear_identity(p, drop_projection_term=True)),
    ("flow-acceleration-mutated",
     lambda p: _field_acceleration_identity(p, drop_vorticity_term=True)),
    ("shear-contraction-mutated",
     lambda p: _field_shear_contraction(p, drop_acceleration_term=True)),
)


def _nested_max(field: np.ndarray, level: int, base_n: int) -> float:
    """Max |residual| over the base grid's interior nodes, which are shared
    by every refinement (spacing halves, extent fixed); comparing the same
    physical points gives clean pointwise convergence ratios."""
    stride = 2 ** level
    sl = (slice(stride, (base_n - 1) * stride, stride),) * 4
    return float(np.max(np.abs(field[sl])))


def refinement_table(h: float = 0.1, refine: int = 1, n: int = 9,
                     include_controls: bool = True) -> List[IdentityResidual]:
    """Residuals across k halvings of the spacing, with convergence ratios
    measured over the shared base-grid interior nodes."""
    patches = [FieldPatch.standard(h, n)]
    for k in range(1, refine + 1):
        patches.append(patches[0].refined(k))
    rows: List[IdentityResidual] = []
    checks = list(FIELD_CHECKS) + (list(NEGATIVE_CONTROLS) if include_controls else [])
    for name, fn in checks:
        prev: Optional[float] = None
        for level, patch in enumerate(patches):
            field = fn(patch)
            shared = _nested_max(field, level, n)
            res = IdentityResidual(name, patch.interior_max(field), patch.h)
            if prev is not None and shared > 0:
                res.ratio = prev / shared
            rows.append(res)
            prev = shared
    return rows


def shear_square_range(patch: FieldPatch) -> Tuple[float, float]:
    """(min, max) over interior nodes of Sigma^{ab}Sigma_{ab}.

    Raising both indices of a spatial symmetric tensor squares the metric
    signs, so the contraction is pointwise non-negative in any signature;
    the range makes the measured sign structure part of the report.
    """
    sigma_up = np.einsum("...am,...bn,...mn->...ab", patch.gi, patch.gi, patch.sigma)
    sq = np.einsum("...ab,...ab->...", sigma_up, patch.sigma)
    sl = (slice(1, -1),) * 4
    return float(np.min(sq[sl])), float(np.max(sq[sl]))
