"""Hyperbolicity tests, biquadratic splitting, and the Gevrey exponent.

Degree-1 and degree-2 factors get exact verdicts (nonvanishing at tau,
rational signature of the coefficient form).  Higher degrees fall back to a
sampled falsification screen: companion-matrix roots of the restriction to
lines eta + s*tau over a deterministic sphere of directions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from .poly import Atom, Poly, XI, param, xi

Fr = Fraction


class DegreeMismatchError(Exception):
    pass


class DegeneracyDetectedError(Exception):
    """The quadratic form is singular on its support."""


class LeadingCoefficientZeroError(Exception):
    pass


class LeadingCoefficientVanishesError(Exception):
    """p(tau) = 0: the line restriction drops degree at this direction."""


class NotAllHyperbolicError(Exception):
    pass


@dataclass
class HyperbolicityVerdict:
    factor_id: str
    method: str                  # linear-exact | quadratic-signature | biquadratic-closed-form | sampled
    verdict: str                 # hyperbolic | not-hyperbolic | inconclusive
    witness: Optional[str] = None
    sample_count: int = 0
    tolerance: float = 0.0
    worst_imag_ratio: float = 0.0

    @property
    def hyperbolic(self) -> bool:
        return self.verdict == "hyperbolic"

    def to_json(self) -> dict:
        out = {"factor": self.factor_id, "method": self.method, "verdict": self.verdict}
        if self.witness is not None:
            out["witness"] = self.witness
        if self.method == "sampled":
            out["samples"] = self.sample_count
            out["tolerance"] = self.tolerance
            out["worst_imag_ratio"] = self.worst_imag_ratio
        return out


def _bind(params: Optional[Mapping[Atom, Fraction]]) -> Dict[Atom, Poly]:
    if not params:
        return {}
    return {a: Poly.constant(v) for a, v in params.items()}


def _specialize(p: Poly, params) -> Poly:
    q = p.substitute(_bind(params))
    extra = [a for a in q.atoms() if a not in XI]
    if extra:
        names = ", ".join(sorted(a.name for a in extra))
        raise ValueError(f"parameter assignment leaves atoms unbound: {names}")
    return q


def _eval_at_cov(p: Poly, tau: Sequence[Fraction]) -> Fraction:
    return p.eval({xi(i): Fr(tau[i]) for i in range(4)})


def hyperbolicity_linear(p: Poly, tau: Sequence[Fraction],
                         params: Optional[Mapping[Atom, Fraction]] = None,
                         factor_id: str = "") -> HyperbolicityVerdict:
    """A homogeneous linear form is hyperbolic iff it does not vanish at tau."""
    q = _specialize(p, params)
    if q.homogeneous_degree_in(XI) != 1:
        raise DegreeMismatchError(f"expected xi-degree 1, got {q.homogeneous_degree_in(XI)}")
    value = _eval_at_cov(q, tau)
    if value != 0:
        return HyperbolicityVerdict(factor_id, "linear-exact", "hyperbolic")
    return HyperbolicityVerdict(factor_id, "linear-exact", "not-hyperbolic",
                                witness=f"vanishes at tau={_fmt_cov(tau)}")


def quadratic_form_matrix(p: Poly) -> List[List[Fraction]]:
    """Symmetric 4x4 coefficient matrix of a xi-quadratic with no parameters."""
    m = [[Fr(0)] * 4 for _ in range(4)]
    for mono, c in p.terms():
        idx = []
        for a, e in mono:
            if a not in XI:
                raise ValueError("quadratic form extraction needs a parameter-free polynomial")
            idx.extend([a.index] * e)
        if len(idx) != 2:
            raise DegreeMismatchError("polynomial is not xi-quadratic")
        i, j = idx
        if i == j:
            m[i][i] += c
        else:
            m[i][j] += c / 2
            m[j][i] += c / 2
    return m


def rational_signature(sym: List[List[Fraction]]) -> Tuple[int, int, int]:
    """(positive, negative, zero) inertia by exact symmetric congruence."""
    a = [row[:] for row in sym]
    n = len(a)
    pos = neg = 0
    k = 0
    while k < n:
        piv = next((i for i in range(k, n) if a[i][i] != 0), None)
        if piv is None:
            off = next(((i, j) for i in range(k, n) for j in range(i + 1, n)
                        if a[i][j] != 0), None)
            if off is None:
                break  # remaining block is zero
            i, j = off
            # congruence e_i <- e_i + e_j makes the diagonal nonzero
            for col in range(n):
                a[i][col] += a[j][col]
            for row in range(n):
                a[row][i] += a[row][j]
            piv = i
        if piv != k:
            a[k], a[piv] = a[piv], a[k]
            for row in a:
                row[k], row[piv] = row[piv], row[k]
        d = a[k][k]
        if d > 0:
            pos += 1
        else:
            neg += 1
        for i in range(k + 1, n):
            f = a[i][k] / d
            if f:
                for j in range(k, n):
                    a[i][j] -= f * a[k][j]
                for j in range(k, n):
                    a[j][i] = a[i][j]
        k += 1
    zero = n - pos - neg
    return pos, neg, zero


def hyperbolicity_quadratic(p: Poly, tau: Sequence[Fraction],
                            params: Optional[Mapping[Atom, Fraction]] = None,
                            factor_id: str = "") -> HyperbolicityVerdict:
    """Exact signature test: hyperbolic iff the form restricted to its
    support has inertia (1, dim-1) and is positive at tau."""
    q = _specialize(p, params)
    if q.homogeneous_degree_in(XI) != 2:
        raise DegreeMismatchError(f"expected xi-degree 2, got {q.homogeneous_degree_in(XI)}")
    m = quadratic_form_matrix(q)
    support = [i for i in range(4) if any(m[i][j] != 0 for j in range(4))]
    sub = [[m[i][j] for j in support] for i in support]
    pos, neg, zero = rational_signature(sub)
    if zero > 0:
        raise DegeneracyDetectedError(
            f"form is singular on its support (inertia {pos},{neg},{zero})")
    value = _eval_at_cov(q, tau)
    if pos == 1 and neg == len(support) - 1 and value > 0:
        return HyperbolicityVerdict(factor_id, "quadratic-signature", "hyperbolic")
    reason = (f"inertia ({pos},{neg})" if (pos, neg) != (1, len(support) - 1)
              else f"value at tau is {value}")
    return HyperbolicityVerdict(factor_id, "quadratic-signature", "not-hyperbolic",
                                witness=reason)


# -- sampled screen -------------------------------------------------------------


def sphere_directions(n: int, seed: int = 0) -> List[Tuple[float, float, float]]:
    """Deterministic low-discrepancy points on the unit 2-sphere (spiral
    lattice); the seed rotates the azimuth so reruns are reproducible and
    distinct seeds decorrelate."""
    golden = math.pi * (3.0 - math.sqrt(5.0))
    offset = (seed * 0.61803398874989) % (2.0 * math.pi)
    out = []
    for k in range(n):
        z = 1.0 - 2.0 * (k + 0.5) / n
        r = math.sqrt(max(0.0, 1.0 - z * z))
        phi = k * golden + offset
        out.append((r * math.cos(phi), r * math.sin(phi), z))
    return out


def rational_directions(n: int, seed: int = 0, max_den: int = 4096) -> List[Tuple[Fraction, ...]]:
    return [tuple(Fr(x).limit_denominator(max_den) for x in d)
            for d in sphere_directions(n, seed)]


def _orthogonal_frame(tau: Sequence[Fraction]) -> List[List[Fraction]]:
    """Three exact vectors spanning the Euclidean complement of tau."""
    t = [Fr(x) for x in tau]
    basis: List[List[Fraction]] = []
    for k in range(4):
        v = [Fr(1) if i == k else Fr(0) for i in range(4)]
        for b in [t] + basis:
            nn = sum(x * x for x in b)
            if nn == 0:
                continue
            proj = sum(x * y for x, y in zip(v, b)) / nn
            v = [x - proj * y for x, y in zip(v, b)]
        if any(x != 0 for x in v):
            basis.append(v)
        if len(basis) == 3:
            break
    return basis


def _line_polynomial(q: Poly, eta: Sequence[Fraction], tau: Sequence[Fraction],
                     s_atom: Atom) -> List[Fraction]:
    """Exact coefficients (descending) of s -> q(eta + s*tau)."""
    s = Poly.atom(s_atom)
    bind = {xi(i): Poly.constant(Fr(eta[i])) + Poly.constant(Fr(tau[i])) * s
            for i in range(4)}
    uni = q.substitute(bind)
    deg = uni.degree_in([s_atom])
    coeffs = []
    for k in range(deg, -1, -1):
        coeffs.append(uni.coefficient_of(s_atom, k).as_constant())
    return coeffs


def hyperbolicity_sampled(p: Poly, tau: Sequence[Fraction],
                          params: Optional[Mapping[Atom, Fraction]] = None,
                          n_samples: int = 1000, tol: float = 1e-9,
                          seed: int = 0, factor_id: str = "") -> HyperbolicityVerdict:
    """Companion-matrix roots along eta + s*tau for sampled directions eta;
    hyperbolic when every root is real within tol*(1+|Re|).  A falsification
    screen, not a certificate."""
    q = _specialize(p, params)
    d = q.homogeneous_degree_in(XI)
    if d is None or d < 1:
        raise DegreeMismatchError("sampled test needs a homogeneous xi-polynomial")
    lead = _eval_at_cov(q, tau)
    if lead == 0:
        raise LeadingCoefficientVanishesError(f"polynomial vanishes at tau={_fmt_cov(tau)}")
    frame = _orthogonal_frame(tau)
    s_atom = param("_line_s")
    worst = 0.0
    witness = None
    for k, (x, y, z) in enumerate(rational_directions(n_samples, seed)):
        eta = [x * frame[0][i] + y * frame[1][i] + z * frame[2][i] for i in range(4)]
        coeffs = _line_polynomial(q, eta, tau, s_atom)
        roots = np.roots([float(c) for c in coeffs])
        for r in roots:
            ratio = abs(r.imag) / (1.0 + abs(r.real))
            if ratio > worst:
                worst = ratio
                if ratio > tol:
                    witness = (f"direction #{k} eta=({float(eta[0]):.6g},{float(eta[1]):.6g},"
                               f"{float(eta[2]):.6g},{float(eta[3]):.6g}) root {r:.6g}")
    verdict = "hyperbolic" if worst <= tol else "not-hyperbolic"
    return HyperbolicityVerdict(factor_id, "sampled", verdict, witness=witness,
                                sample_count=n_samples, tolerance=tol,
                                worst_imag_ratio=worst)


def hyperbolicity_auto(p: Poly, tau, params=None, n_samples: int = 1000,
                       tol: float = 1e-9, seed: int = 0,
                       factor_id: str = "") -> HyperbolicityVerdict:
    """Dispatch on degree: exact methods for degree 1 and 2, sampling above."""
    q = _specialize(p, params)
    d = q.homogeneous_degree_in(XI)
    if d == 1:
        return hyperbolicity_linear(q, tau, None, factor_id)
    if d == 2:
        try:
            return hyperbolicity_quadratic(q, tau, None, factor_id)
        except DegeneracyDetectedError as err:
            return HyperbolicityVerdict(factor_id, "quadratic-signature", "inconclusive",
                                        witness=str(err))
    return hyperbolicity_sampled(q, tau, None, n_samples, tol, seed, factor_id)


# -- biquadratic split ----------------------------------------------------------


def biquadratic_split(A: Poly, B: Poly, C: Poly,
                      params: Optional[Mapping[Atom, Fraction]] = None
                      ) -> Tuple[Poly, Poly]:
    """Split P = A*xi0^4 + B*xi0^2 + C into two quadratics.

    Requires B^2 - 4AC to be a perfect square D^2 in the ring; then
    4A*P = (2A*xi0^2 + B - D)(2A*xi0^2 + B + D) and the two factors are
    returned.  Callers verify P1*P2 = 4A*P by exact division.  Raises
    NotPerfectSquareError (with the obstruction) or
    LeadingCoefficientZeroError.
    """
    if A.is_zero():
        raise LeadingCoefficientZeroError("leading coefficient A is the zero polynomial")
    if params:
        if A.eval({a: Fr(v) for a, v in params.items()}) == 0:
            raise LeadingCoefficientZeroError("leading coefficient A vanishes at the assignment")
    disc = B * B - 4 * A * C
    d = disc.sqrt()  # NotPerfectSquareError carries the obstruction
    x0sq = Poly.atom(xi(0)) ** 2
    two_a = Poly.constant(2) * A
    p1 = two_a * x0sq + B - d
    p2 = two_a * x0sq + B + d
    return p1, p2


def quartic_from_coefficients(A: Poly, B: Poly, C: Poly) -> Poly:
    x0 = Poly.atom(xi(0))
    return A * x0 ** 4 + B * x0 ** 2 + C


# -- Gevrey exponent ------------------------------------------------------------


def gevrey_sigma(factorization, verdicts: Optional[Sequence[HyperbolicityVerdict]] = None
                 ) -> Optional[Fraction]:
    """sigma0 = q/(q-1) for q hyperbolic factors counted with multiplicity;
    None encodes the infinite (Sobolev) case q = 1."""
    if verdicts is not None:
        bad = [v for v in verdicts if not v.hyperbolic]
        if bad:
            names = ", ".join(v.factor_id or v.method for v in bad)
            raise NotAllHyperbolicError(f"factors without a hyperbolic verdict: {names}")
    count = factorization.factor_count()
    if count < 1:
        raise ValueError("factorization has no factors")
    if count == 1:
        return None
    return Fr(count, count - 1)


def sigma_json(sigma: Optional[Fraction]) -> str:
    if sigma is None:
        return "sobolev"
    return f"{sigma.numerator}/{sigma.denominator}"


# -- cone sampling ---------------------------------------------------------------


@dataclass
class ConeSamples:
    factor_id: str
    tau: Tuple[float, ...]
    directions: List[Tuple[float, float, float]]
    roots: List[List[float]]                       # sorted real parts per direction
    reference_roots: Optional[List[List[float]]] = None
    within_reference: Optional[List[bool]] = None

    @property
    def all_within_reference(self) -> Optional[bool]:
        if self.within_reference is None:
            return None
        return all(self.within_reference)

    def csv_lines(self) -> List[str]:
        header = "dir_x,dir_y,dir_z,roots"
        lines = [header]
        for d, rs in zip(self.directions, self.roots):
            roots = ";".join(f"{r:.12g}" for r in rs)
            lines.append(f"{d[0]:.12g},{d[1]:.12g},{d[2]:.12g},{roots}")
        return lines


def cone_sample(p: Poly, tau: Sequence[Fraction],
                params: Optional[Mapping[Atom, Fraction]] = None,
                n: int = 100, seed: int = 0, tol: float = 1e-9,
                factor_id: str = "",
                reference: Optional[Poly] = None) -> ConeSamples:
    """Real root sheets of p(eta + s*tau) per sphere direction.

    When a reference polynomial is given (the wave cone), each direction is
    flagged by whether the factor's outermost sheet stays inside the
    reference's outermost sheet (propagation no faster than the reference).
    """
    q = _specialize(p, params)
    ref = _specialize(reference, params) if reference is not None else None
    frame = _orthogonal_frame(tau)
    s_atom = param("_line_s")
    dirs = rational_directions(n, seed)
    all_roots: List[List[float]] = []
    ref_roots: List[List[float]] = []
    within: List[bool] = []
    for (x, y, z) in dirs:
        eta = [x * frame[0][i] + y * frame[1][i] + z * frame[2][i] for i in range(4)]
        roots = _real_roots(q, eta, tau, s_atom, tol)
        all_roots.append(roots)
        if ref is not None:
            rr = _real_roots(ref, eta, tau, s_atom, tol)
            ref_roots.append(rr)
            speed = max((abs(r) for r in roots), default=0.0)
            ref_speed = max((abs(r) for r in rr), default=0.0)
            within.append(speed <= ref_speed + 1e-7)
    dirs_f = [(float(a), float(b), float(c)) for a, b, c in dirs]
    return ConeSamples(factor_id, tuple(float(t) for t in tau), dirs_f, all_roots,
                       ref_roots if ref is not None else None,
                       within if ref is not None else None)


def _real_roots(q: Poly, eta, tau, s_atom, tol: float) -> List[float]:
    coeffs = _line_polynomial(q, eta, tau, s_atom)
    if len(coeffs) <= 1:
        return []
    roots = np.roots([float(c) for c in coeffs])
    return sorted(float(r.real) for r in roots if abs(r.imag) <= tol * (1.0 + abs(r.real)))


def _fmt_cov(tau) -> str:
    return "(" + ",".join(str(t) for t in tau) + ")"
