"""Principal symbol matrices and exact determinants.

The determinant pipeline permutes a matrix to block upper-triangular form
(strongly connected components of its sparsity digraph) and then runs
fraction-free Bareiss elimination on each diagonal block, switching to a
memoized sparse Laplace expansion when a block is sparse enough that
elimination fill-in would dominate.  A plain memoized cofactor expansion is
kept separately as the small-case test oracle.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

from .poly import NotDivisibleError, Poly, XI
from .system import FactorClaim, LeraySystem

# sparse-expansion threshold: fraction of nonzero entries below which a
# block is expanded instead of eliminated
_SPARSE_FILL = 0.45
_SPARSE_MIN_DIM = 5


@dataclass
class SymbolMatrix:
    dimension: int
    entries: List[List[Poly]]
    row_labels: List[str] = field(default_factory=list)
    col_labels: List[str] = field(default_factory=list)

    def __post_init__(self):
        if len(self.entries) != self.dimension or any(len(r) != self.dimension for r in self.entries):
            raise ValueError("entries must form a square dimension x dimension grid")
        if not self.row_labels:
            self.row_labels = [f"row{i}" for i in range(self.dimension)]
        if not self.col_labels:
            self.col_labels = [f"col{j}" for j in range(self.dimension)]

    def submatrix(self, rows: Sequence[int], cols: Sequence[int]) -> "SymbolMatrix":
        return SymbolMatrix(
            len(rows),
            [[self.entries[i][j] for j in cols] for i in rows],
            [self.row_labels[i] for i in rows],
            [self.col_labels[j] for j in cols],
        )

    def nnz(self) -> int:
        return sum(1 for row in self.entries for e in row if not e.is_zero())


def build_symbol_matrix(s: LeraySystem) -> SymbolMatrix:
    """Expand block entries of a validated system to the scalar N x N symbol."""
    row_labels, col_labels = [], []
    row_of = {}
    col_of = {}
    for b in s.equations:
        for i in range(b.multiplicity):
            row_of[(b.name, i)] = len(row_labels)
            row_labels.append(f"{b.name}[{i}]")
    for b in s.unknowns:
        for j in range(b.multiplicity):
            col_of[(b.name, j)] = len(col_labels)
            col_labels.append(f"{b.name}[{j}]")
    n = len(row_labels)
    if n != len(col_labels):
        raise ValueError("system is not square")
    grid = [[Poly.zero()] * n for _ in range(n)]
    for e in s.entries:
        grid[row_of[(e.eq_block, e.eq_index)]][col_of[(e.unk_block, e.unk_index)]] = e.symbol
    return SymbolMatrix(n, grid, row_labels, col_labels)


# -- block decomposition -----------------------------------------------------


def block_order(m: SymbolMatrix) -> List[List[int]]:
    """Diagonal blocks (index groups) of the block upper-triangular form.

    Strongly connected components of the digraph i -> j for nonzero (i, j),
    in topological order of the condensation; the determinant is the product
    of the block determinants.
    """
    n = m.dimension
    adj = [[j for j in range(n) if j != i and not m.entries[i][j].is_zero()] for i in range(n)]

    # Tarjan, iterative
    index = [0] * n
    low = [0] * n
    on_stack = [False] * n
    visited = [False] * n
    stack: List[int] = []
    comp_of = [-1] * n
    comps: List[List[int]] = []
    counter = [1]

    for root in range(n):
        if visited[root]:
            continue
        work = [(root, 0)]
        while work:
            v, pi = work[-1]
            if pi == 0:
                visited[v] = True
                index[v] = low[v] = counter[0]
                counter[0] += 1
                stack.append(v)
                on_stack[v] = True
            advanced = False
            while pi < len(adj[v]):
                w = adj[v][pi]
                pi += 1
                if not visited[w]:
                    work[-1] = (v, pi)
                    work.append((w, 0))
                    advanced = True
                    break
                if on_stack[w]:
                    low[v] = min(low[v], index[w])
            if advanced:
                continue
            work.pop()
            if low[v] == index[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack[w] = False
                    comp_of[w] = len(comps)
                    comp.append(w)
                    if w == v:
                        break
                comps.append(sorted(comp))
            if work:
                u, _ = work[-1]
                low[u] = min(low[u], low[v])

    # topological order of the condensation: edge a -> b when some i in a
    # points to j in b; components must be ordered sources first
    k = len(comps)
    succ = [set() for _ in range(k)]
    indeg = [0] * k
    for i in range(n):
        for j in adj[i]:
            a, b = comp_of[i], comp_of[j]
            if a != b and b not in succ[a]:
                succ[a].add(b)
                indeg[b] += 1
    ready = sorted(c for c in range(k) if indeg[c] == 0)
    order = []
    while ready:
        c = ready.pop(0)
        order.append(c)
        for b in sorted(succ[c]):
            indeg[b] -= 1
            if indeg[b] == 0:
                ready.append(b)
        ready.sort()
    return [comps[c] for c in order]


# -- determinant algorithms ---------------------------------------------------


def _bareiss(entries: List[List[Poly]]) -> Poly:
    n = len(entries)
    a = [row[:] for row in entries]
    sign = 1
    prev = Poly.one()
    for k in range(n - 1):
        if a[k][k].is_zero():
            pivot_row = None
            best = None
            for i in range(k + 1, n):
                if not a[i][k].is_zero():
                    if best is None or len(a[i][k]) < best:
                        best = len(a[i][k])
                        pivot_row = i
            if pivot_row is None:
                return Poly.zero()
            a[k], a[pivot_row] = a[pivot_row], a[k]
            sign = -sign
        pivot = a[k][k]
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                num = pivot * a[i][j] - a[i][k] * a[k][j]
                a[i][j] = num.exact_div(prev)
            a[i][k] = Poly.zero()
        prev = pivot
    det = a[n - 1][n - 1]
    return -det if sign < 0 else det


def _sparse_expansion(entries: List[List[Poly]]) -> Poly:
    """Laplace expansion along sparsity-ordered rows, memoized on column sets."""
    n = len(entries)
    row_order = sorted(range(n), key=lambda i: sum(1 for e in entries[i] if not e.is_zero()))
    full_mask = (1 << n) - 1
    memo = {}

    def rec(depth: int, mask: int) -> Poly:
        if depth == n:
            return Poly.one()
        cached = memo.get(mask)
        if cached is not None:
            return cached
        i = row_order[depth]
        total = Poly.zero()
        pos = 0
        rem = mask
        while rem:
            j = (rem & -rem).bit_length() - 1
            rem &= rem - 1
            e = entries[i][j]
            if not e.is_zero():
                minor = rec(depth + 1, mask & ~(1 << j))
                if not minor.is_zero():
                    term = e * minor
                    total = total + term if pos % 2 == 0 else total - term
            pos += 1
        memo[mask] = total
        return total

    det = rec(0, full_mask)
    # row reordering permutation sign
    perm = row_order[:]
    sign = 1
    seen = [False] * n
    for i in range(n):
        if seen[i]:
            continue
        j = i
        clen = 0
        while not seen[j]:
            seen[j] = True
            j = perm[j]
            clen += 1
        if clen % 2 == 0:
            sign = -sign
    return -det if sign < 0 else det


def determinant_factors(m: SymbolMatrix) -> List[Poly]:
    """Exact determinant as an unexpanded list of diagonal-block determinants.

    The product of the returned polynomials is det(m); keeping the factored
    form avoids materializing determinants whose expansion is enormous while
    every factor stays exact.
    """
    out: List[Poly] = []
    for blk in block_order(m):
        sub = m.submatrix(blk, blk)
        if sub.dimension == 1:
            d = sub.entries[0][0]
        elif sub.dimension == 2:
            d = sub.entries[0][0] * sub.entries[1][1] - sub.entries[0][1] * sub.entries[1][0]
        elif (sub.dimension >= _SPARSE_MIN_DIM
              and sub.nnz() <= _SPARSE_FILL * sub.dimension ** 2):
            d = _sparse_expansion(sub.entries)
        else:
            d = _bareiss(sub.entries)
        if d.is_zero():
            return [Poly.zero()]
        out.append(d)
    return out


def determinant(m: SymbolMatrix) -> Poly:
    """Exact expanded determinant: block-triangular preprocessing, then
    per-block Bareiss elimination (sparse blocks switch to memoized
    expansion)."""
    det = Poly.one()
    for d in determinant_factors(m):
        det = det * d
    return det


def cofactor_determinant_rational(rows: Sequence[Sequence[Fraction]]) -> Fraction:
    """The cofactor oracle specialized to exact rational entries."""
    n = len(rows)
    memo: dict = {}

    def rec(depth: int, mask: int) -> Fraction:
        if depth == n:
            return Fraction(1)
        cached = memo.get(mask)
        if cached is not None:
            return cached
        total = Fraction(0)
        pos = 0
        rem = mask
        while rem:
            j = (rem & -rem).bit_length() - 1
            rem &= rem - 1
            e = rows[depth][j]
            if e:
                term = e * rec(depth + 1, mask & ~(1 << j))
                total = total + term if pos % 2 == 0 else total - term
            pos += 1
        memo[mask] = total
        return total

    return rec(0, (1 << n) - 1)


def cofactor_determinant(m: SymbolMatrix) -> Poly:
    """Independent oracle: memoized first-row Laplace expansion, no
    preprocessing, no pivoting.  Exponential; intended for small or numeric
    matrices."""
    n = m.dimension
    entries = m.entries
    memo = {}

    def rec(depth: int, mask: int) -> Poly:
        if depth == n:
            return Poly.one()
        cached = memo.get(mask)
        if cached is not None:
            return cached
        total = Poly.zero()
        pos = 0
        rem = mask
        while rem:
            j = (rem & -rem).bit_length() - 1
            rem &= rem - 1
            e = entries[depth][j]
            if not e.is_zero():
                term = e * rec(depth + 1, mask & ~(1 << j))
                total = total + term if pos % 2 == 0 else total - term
            pos += 1
        memo[mask] = total
        return total

    return rec(0, (1 << n) - 1)


# -- factorization verification ------------------------------------------------


@dataclass
class Factorization:
    """A scalar prefactor in parameter atoms times powers of polynomial factors."""

    scalar_prefactor: Poly
    factors: List[Tuple[Poly, int]]

    @staticmethod
    def from_claim(claim: FactorClaim) -> "Factorization":
        return Factorization(claim.prefactor, list(claim.factors))

    def expand(self) -> Poly:
        out = self.scalar_prefactor
        for p, mult in self.factors:
            out = out * p ** mult
        return out

    def factor_count(self) -> int:
        return sum(mult for _, mult in self.factors)

    def degrees(self) -> List[int]:
        return [p.degree_in(XI) for p, _ in self.factors]


@dataclass
class VerifyReport:
    ok: bool
    detail: str
    witness_monomial: Optional[str] = None
    lhs_coefficient: Optional[Fraction] = None
    rhs_coefficient: Optional[Fraction] = None

    def to_json(self) -> dict:
        out = {"ok": self.ok, "detail": self.detail}
        if self.witness_monomial is not None:
            out["witness_monomial"] = self.witness_monomial
            out["determinant_coefficient"] = _frac(self.lhs_coefficient)
            out["claimed_coefficient"] = _frac(self.rhs_coefficient)
        return out


def factored_xi_degree(factors: Sequence[Poly]) -> Optional[int]:
    """xi-degree of a product of xi-homogeneous factors, without expanding.

    A product of homogeneous polynomials is homogeneous of the summed
    degree; returns None when any factor is inhomogeneous.
    """
    total = 0
    for p in factors:
        d = p.homogeneous_degree_in(XI)
        if d is None:
            return None
        total += d
    return total


def verify_factorization_product(det_factors: Sequence[Poly],
                                 f: Factorization) -> VerifyReport:
    """Check product(det_factors) == claim without a full expansion.

    Claimed factors are cancelled against the block determinants by exact
    division (a completed cancellation is an exact proof of equality).  If
    the greedy cancellation gets stuck the comparison falls back to full
    expansion when small enough, otherwise to an exact rational evaluation
    witness: a single differing point proves the products unequal.
    """
    if f.scalar_prefactor.degree_in(XI) > 0:
        return VerifyReport(False, "scalar prefactor contains covector atoms")
    num = [p for p in det_factors if not (p.is_constant() and p.as_constant() == 1)]
    claim_units: List[Poly] = []
    for p, mult in f.factors:
        claim_units.extend([p] * mult)
    claim_units.sort(key=lambda p: (-p.degree(), -len(p)))
    leftover_constant = Poly.one() * f.scalar_prefactor

    remaining_units: List[Poly] = []
    for k, unit in enumerate(claim_units):
        if unit.is_constant():
            leftover_constant = leftover_constant * unit
            continue
        hit = None
        for i, d in enumerate(num):
            try:
                num[i] = d.exact_div(unit)
                hit = i
                break
            except NotDivisibleError:
                continue
        if hit is None:
            remaining_units = [u for u in claim_units[k:] if not u.is_constant()]
            for u in claim_units[k:]:
                if u.is_constant():
                    leftover_constant = leftover_constant * u
            break

    if not remaining_units:
        # determinant / claimed-factors must now equal the claimed prefactor
        lhs = Poly.one()
        for d in num:
            lhs = lhs * d
        diff = lhs - leftover_constant
        if diff.is_zero():
            return VerifyReport(True, "claimed factorization matches the determinant exactly")
        return _diff_report(lhs, leftover_constant)

    # cancellation stuck (a claimed factor straddles block determinants, or
    # the claim is wrong): compare the partially reduced sides, which are
    # much smaller than the original product
    if _size_estimate(num) <= 200_000 and _size_estimate(remaining_units) <= 200_000:
        lhs = Poly.one()
        for d in num:
            lhs = lhs * d
        rhs = leftover_constant
        for u in remaining_units:
            rhs = rhs * u
        if (lhs - rhs).is_zero():
            return VerifyReport(True, "claimed factorization matches the determinant exactly")
        return _diff_report(lhs, rhs)
    return _evaluation_witness(num, Factorization(
        leftover_constant, [(u, 1) for u in remaining_units]))


def _size_estimate(polys: Sequence[Poly]) -> int:
    est = 1
    for p in polys:
        est *= max(len(p), 1)
        if est > 200_000:
            break
    return est


def _diff_report(lhs: Poly, rhs: Poly) -> VerifyReport:
    diff = lhs - rhs
    mono, _ = diff.leading()
    lc = dict(lhs.terms()).get(mono, Fraction(0))
    rc = dict(rhs.terms()).get(mono, Fraction(0))
    mono_str = "*".join(f"{a.name}^{e}" if e > 1 else a.name for a, e in mono) or "1"
    return VerifyReport(False, "difference is nonzero", mono_str, lc, rc)


def _evaluation_witness(det_factors: Sequence[Poly], f: Factorization) -> VerifyReport:
    """Exact point evaluations; one differing value certifies inequality."""
    atoms = set()
    for p in det_factors:
        atoms |= p.atoms()
    atoms |= f.scalar_prefactor.atoms()
    for p, _ in f.factors:
        atoms |= p.atoms()
    ordered = sorted(atoms, key=lambda a: a.sort_key)
    for trial in range(64):
        assign = {a: Fraction(((trial + 3) * (i + 2) * 7919) % 97 + 1, (i % 5) + 2)
                  for i, a in enumerate(ordered)}
        lhs = Fraction(1)
        for p in det_factors:
            lhs *= p.eval(assign)
        rhs = f.scalar_prefactor.eval(assign)
        for p, mult in f.factors:
            rhs *= p.eval(assign) ** mult
        if lhs != rhs:
            point = ", ".join(f"{a.name}={v}" for a, v in list(assign.items())[:8])
            return VerifyReport(
                False,
                f"products differ at exact rational point ({point}, ...): "
                f"determinant={lhs}, claim={rhs}")
    return VerifyReport(False, "unverified: cancellation stuck with no "
                               "counterexample point; split the claimed factors "
                               "so each divides a single block determinant")


def verify_factorization(det: Poly, f: Factorization) -> VerifyReport:
    """Multiply the claim out and subtract; report the first bad monomial."""
    if f.scalar_prefactor.degree_in(XI) > 0:
        return VerifyReport(False, "scalar prefactor contains covector atoms")
    product = f.expand()
    diff = det - product
    if diff.is_zero():
        return VerifyReport(True, "claimed factorization matches the determinant exactly")
    mono, _ = diff.leading()
    lhs = dict(det.terms()).get(mono, Fraction(0))
    rhs = dict(product.terms()).get(mono, Fraction(0))
    mono_str = "*".join(f"{a.name}^{e}" if e > 1 else a.name for a, e in mono) or "1"
    return VerifyReport(False, "difference is nonzero", mono_str, lhs, rhs)


def _frac(c: Optional[Fraction]) -> Optional[str]:
    if c is None:
        return None
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"
