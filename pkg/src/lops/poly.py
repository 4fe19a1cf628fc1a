"""Exact multivariate polynomial arithmetic over the rationals.

Polynomials live in Q[xi0..xi3, p1, p2, ...]: four distinguished covector
atoms plus an open-ended set of named parameter atoms.  Every coefficient is
a `fractions.Fraction`; no floating point enters any operation here.
Values are immutable after construction, so they are safe to share freely.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Optional, Union

KIND_COVECTOR = "covector"
KIND_PARAMETER = "parameter"

Scalar = Union[int, Fraction]


class PolyError(Exception):
    pass


class MissingAtomError(PolyError):
    """An evaluation assignment does not cover every atom of the polynomial."""


class NotDivisibleError(PolyError):
    """Exact division failed; `remainder` holds the nonzero reduction residue."""

    def __init__(self, remainder: "Poly"):
        self.remainder = remainder
        super().__init__(f"not exactly divisible, remainder {remainder}")


class NotPerfectSquareError(PolyError):
    """Square-root extraction failed; `remainder` witnesses the obstruction."""

    def __init__(self, remainder: "Poly"):
        self.remainder = remainder
        super().__init__(f"not a perfect square, obstruction {remainder}")


@dataclass(frozen=True)
class Atom:
    """A single indeterminate.  Identity is (name, index); kind is metadata."""

    name: str
    kind: str = KIND_PARAMETER
    index: Optional[int] = None

    def __post_init__(self):
        # covector atoms first (by index), then parameters alphabetically;
        # precomputed because monomial merges read it in their inner loop
        if self.kind == KIND_COVECTOR:
            key = (0, self.index or 0, self.name)
        else:
            key = (1, 0, self.name)
        object.__setattr__(self, "sort_key", key)
        object.__setattr__(self, "_hash", hash((self.name, self.index)))

    def __eq__(self, other):
        if not isinstance(other, Atom):
            return NotImplemented
        return self.name == other.name and self.index == other.index

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return self.name


def xi(i: int) -> Atom:
    if not 0 <= i <= 3:
        raise ValueError("covector components are xi0..xi3")
    return Atom(f"xi{i}", KIND_COVECTOR, i)


XI = (xi(0), xi(1), xi(2), xi(3))
XI_SET = frozenset(XI)


def param(name: str, index: Optional[int] = None) -> Atom:
    return Atom(name, KIND_PARAMETER, index)


# A monomial is a tuple of (Atom, exponent) pairs with exponent > 0, sorted by
# the atom sort key.  The empty tuple is the constant monomial.
Monomial = tuple

_ONE_MONO: Monomial = ()


def _mono_mul(a: Monomial, b: Monomial) -> Monomial:
    if not a:
        return b
    if not b:
        return a
    out = []
    i = j = 0
    while i < len(a) and j < len(b):
        (va, ea), (vb, eb) = a[i], b[j]
        ka, kb = va.sort_key, vb.sort_key
        if ka == kb:
            out.append((va, ea + eb))
            i += 1
            j += 1
        elif ka < kb:
            out.append(a[i])
            i += 1
        else:
            out.append(b[j])
            j += 1
    out.extend(a[i:])
    out.extend(b[j:])
    return tuple(out)


def _mono_degree(m: Monomial) -> int:
    return sum(e for _, e in m)


def _mono_min_key(m: Monomial):
    """Sort key under which the graded-lex LARGEST monomial has the SMALLEST
    key (atom sort keys contain strings, so descending order is encoded by
    negating degrees and exponents instead)."""
    return (-_mono_degree(m), tuple((a.sort_key, -e) for a, e in m))


def _leading_mono(monos) -> Monomial:
    best = None
    best_key = None
    for m in monos:
        k = _mono_min_key(m)
        if best_key is None or k < best_key:
            best, best_key = m, k
    return best


def _mono_try_div(num: Monomial, den: Monomial) -> Optional[Monomial]:
    """num / den as a monomial, or None when an exponent would go negative."""
    dd = dict(den)
    out = []
    for a, e in num:
        e2 = e - dd.pop(a, 0)
        if e2 < 0:
            return None
        if e2:
            out.append((a, e2))
    if dd:
        return None
    return tuple(out)


class Poly:
    """Immutable sparse polynomial: map from monomial to nonzero Fraction."""

    __slots__ = ("_terms", "_hash")

    def __init__(self, terms: Optional[Mapping[Monomial, Fraction]] = None):
        # trusts the caller to pass canonical monomials; public constructors below
        self._terms = dict(terms) if terms else {}
        self._hash = None

    # -- constructors ------------------------------------------------------

    @staticmethod
    def zero() -> "Poly":
        return _ZERO

    @staticmethod
    def one() -> "Poly":
        return _ONE

    @staticmethod
    def constant(c: Scalar) -> "Poly":
        c = Fraction(c)
        return Poly({_ONE_MONO: c}) if c else _ZERO

    @staticmethod
    def atom(a: Atom) -> "Poly":
        return Poly({((a, 1),): Fraction(1)})

    @staticmethod
    def linear(coeffs: Mapping[Atom, Scalar]) -> "Poly":
        terms = {}
        for a, c in coeffs.items():
            c = Fraction(c)
            if c:
                terms[((a, 1),)] = c
        return Poly(terms)

    # -- inspection --------------------------------------------------------

    def terms(self):
        return self._terms.items()

    def is_zero(self) -> bool:
        return not self._terms

    def __bool__(self):
        return bool(self._terms)

    def __len__(self):
        return len(self._terms)

    def atoms(self) -> set:
        out = set()
        for m in self._terms:
            for a, _ in m:
                out.add(a)
        return out

    def as_constant(self) -> Fraction:
        """The value of a constant polynomial (zero or a single empty monomial)."""
        if not self._terms:
            return Fraction(0)
        if len(self._terms) == 1 and _ONE_MONO in self._terms:
            return self._terms[_ONE_MONO]
        raise PolyError(f"not a constant polynomial: {self}")

    def is_constant(self) -> bool:
        return not self._terms or (len(self._terms) == 1 and _ONE_MONO in self._terms)

    def degree(self) -> int:
        """Total degree; -1 for the zero polynomial."""
        if not self._terms:
            return -1
        return max(_mono_degree(m) for m in self._terms)

    def degree_in(self, atoms: Iterable[Atom]) -> int:
        """Largest combined exponent of the given atoms; -1 for zero."""
        aset = set(atoms)
        if not self._terms:
            return -1
        return max(sum(e for a, e in m if a in aset) for m in self._terms)

    def homogeneous_degree_in(self, atoms: Iterable[Atom]) -> Optional[int]:
        """Common degree in `atoms` of every term, or None when inhomogeneous.

        The zero polynomial is homogeneous of every degree; it reports 0.
        """
        aset = set(atoms)
        if not self._terms:
            return 0
        degs = {sum(e for a, e in m if a in aset) for m in self._terms}
        if len(degs) == 1:
            return degs.pop()
        return None

    def xi_degree(self) -> Optional[int]:
        return self.homogeneous_degree_in(XI)

    def leading(self) -> tuple:
        """(monomial, coefficient) of the graded-lex leading term."""
        if not self._terms:
            raise PolyError("zero polynomial has no leading term")
        m = _leading_mono(self._terms)
        return m, self._terms[m]

    def coefficient_of(self, atom: Atom, power: int) -> "Poly":
        """Collect the coefficient of atom**power (a polynomial in the rest)."""
        out = {}
        for m, c in self._terms.items():
            e = dict(m).get(atom, 0)
            if e == power:
                rest = tuple((a, k) for a, k in m if a != atom)
                _acc(out, rest, c)
        return Poly(out)

    # -- ring operations ---------------------------------------------------

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = Poly.constant(other)
        if not isinstance(other, Poly):
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self._terms.items()))
        return self._hash

    def __add__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        out = dict(self._terms)
        for m, c in other._terms.items():
            _acc(out, m, c)
        return Poly(out)

    __radd__ = __add__

    def __neg__(self):
        return Poly({m: -c for m, c in self._terms.items()})

    def __sub__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        out = dict(self._terms)
        for m, c in other._terms.items():
            _acc(out, m, -c)
        return Poly(out)

    def __rsub__(self, other):
        return _coerce(other) - self

    def __mul__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        a, b = self._terms, other._terms
        if not a or not b:
            return _ZERO
        if len(a) > len(b):
            a, b = b, a
        out = {}
        for ma, ca in a.items():
            for mb, cb in b.items():
                _acc(out, _mono_mul(ma, mb), ca * cb)
        return Poly(out)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if not isinstance(n, int) or n < 0:
            raise ValueError("polynomial powers are non-negative integers")
        result = _ONE
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    # -- evaluation and substitution ----------------------------------------

    def eval(self, assignment: Mapping[Atom, Scalar]) -> Fraction:
        """Exact value under a total assignment of the polynomial's atoms."""
        total = Fraction(0)
        cache = {}
        for m, c in self._terms.items():
            v = c
            for a, e in m:
                key = (a, e)
                p = cache.get(key)
                if p is None:
                    if a not in assignment:
                        raise MissingAtomError(f"no value for atom {a.name}")
                    p = Fraction(assignment[a]) ** e
                    cache[key] = p
                v *= p
            total += v
        return total

    def eval_float(self, assignment: Mapping[Atom, float]) -> float:
        total = 0.0
        for m, c in self._terms.items():
            v = float(c)
            for a, e in m:
                if a not in assignment:
                    raise MissingAtomError(f"no value for atom {a.name}")
                v *= float(assignment[a]) ** e
            total += v
        return total

    def substitute(self, bindings: Mapping[Atom, "Poly"]) -> "Poly":
        """Exact composition; atoms without a binding are left in place."""
        if not self._terms:
            return _ZERO
        out = _ZERO
        cache = {}
        for m, c in self._terms.items():
            term = Poly.constant(c)
            for a, e in m:
                if a in bindings:
                    key = (a, e)
                    p = cache.get(key)
                    if p is None:
                        b = bindings[a]
                        if not isinstance(b, Poly):
                            b = Poly.constant(b)
                        p = b ** e
                        cache[key] = p
                    term = term * p
                else:
                    term = term * Poly({((a, e),): Fraction(1)})
            out = out + term
        return out

    # -- division and roots --------------------------------------------------

    def exact_div(self, den: "Poly") -> "Poly":
        """Quotient when `den` divides exactly; NotDivisibleError otherwise.

        Greedy leading-term reduction in graded-lex order.  For an exact
        quotient every intermediate remainder is a multiple of `den`, so the
        first leading term that `den`'s leading term fails to divide proves
        non-divisibility; the remainder at that point is returned as the
        diagnostic witness.
        """
        den = _coerce(den)
        if den.is_zero():
            raise ZeroDivisionError("division by zero polynomial")
        if den.is_constant():
            inv = 1 / den.as_constant()
            return Poly({m: c * inv for m, c in self._terms.items()})
        import heapq

        dm, dc = den.leading()
        q = {}
        r = dict(self._terms)
        heap = [(_mono_min_key(m), i, m) for i, m in enumerate(r)]
        heapq.heapify(heap)
        counter = len(heap)
        while heap:
            _, _, rm = heapq.heappop(heap)
            rc = r.get(rm)
            if not rc:
                continue  # stale entry, already cancelled
            qm = _mono_try_div(rm, dm)
            if qm is None:
                raise NotDivisibleError(Poly(r))
            qc = rc / dc
            _acc(q, qm, qc)
            for m, c in den._terms.items():
                mm = _mono_mul(qm, m)
                fresh = mm not in r
                _acc(r, mm, -qc * c)
                if fresh and mm in r:
                    counter += 1
                    heapq.heappush(heap, (_mono_min_key(mm), counter, mm))
        return Poly(q)

    def divides(self, other: "Poly") -> bool:
        try:
            other.exact_div(self)
            return True
        except NotDivisibleError:
            return False

    def sqrt(self) -> "Poly":
        """Exact square root with positive leading coefficient.

        Matches the leading monomial and solves term by term; raises
        NotPerfectSquareError with the residual when no root exists.
        """
        if not self._terms:
            return _ZERO
        lm, lc = self.leading()
        if lc < 0:
            raise NotPerfectSquareError(self)
        if any(e % 2 for _, e in lm):
            raise NotPerfectSquareError(self)
        num, den = lc.numerator, lc.denominator
        rn, rd = _isqrt_exact(num), _isqrt_exact(den)
        if rn is None or rd is None:
            raise NotPerfectSquareError(self)
        lead_m = tuple((a, e // 2) for a, e in lm)
        lead_c = Fraction(rn, rd)
        root = Poly({lead_m: lead_c})
        diff = self - root * root
        guard = 0
        limit = 4 * (len(self._terms) + 2) ** 2
        while diff:
            dm, dc = diff.leading()
            qm = _mono_try_div(dm, lead_m)
            if qm is None:
                raise NotPerfectSquareError(diff)
            root = root + Poly({qm: dc / (2 * lead_c)})
            diff = self - root * root
            guard += 1
            if guard > limit:
                raise NotPerfectSquareError(diff)
        return root

    # -- rendering -----------------------------------------------------------

    def render(self) -> str:
        """Deterministic text form; parseable back by the system-spec reader."""
        if not self._terms:
            return "0"
        parts = []
        for m in sorted(self._terms, key=_mono_min_key):
            c = self._terms[m]
            factors = []
            for a, e in m:
                factors.append(a.name if e == 1 else f"{a.name}^{e}")
            body = "*".join(factors)
            mag = abs(c)
            if not body:
                chunk = _frac_str(mag)
            elif mag == 1:
                chunk = body
            else:
                chunk = f"{_frac_str(mag)}*{body}"
            parts.append(("- " if c < 0 else "+ ") + chunk)
        out = " ".join(parts)
        return out[2:] if out.startswith("+ ") else ("-" + out[2:])

    def __str__(self):
        return self.render()

    def __repr__(self):
        return f"Poly({self.render()})"


def _coerce(x):
    if isinstance(x, Poly):
        return x
    if isinstance(x, (int, Fraction)):
        return Poly.constant(x)
    return NotImplemented


def _acc(store: dict, m: Monomial, c: Fraction):
    acc = store.get(m)
    if acc is None:
        if c:
            store[m] = c
    else:
        acc += c
        if acc:
            store[m] = acc
        else:
            del store[m]


def _frac_str(c: Fraction) -> str:
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


def _isqrt_exact(n: int) -> Optional[int]:
    if n < 0:
        return None
    r = int(n ** 0.5)
    for cand in (r - 1, r, r + 1, r + 2):
        if cand >= 0 and cand * cand == n:
            return cand
    # fall back for large ints where float sqrt is off
    import math

    r = math.isqrt(n)
    return r if r * r == n else None


_ZERO = Poly()
_ONE = Poly({_ONE_MONO: Fraction(1)})
