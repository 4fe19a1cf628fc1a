"""Reader and writer for the `.lops` system-spec text format.

One declaration per line; `#` starts a comment.  Statements:

    unknown <name> multiplicity <k> index <m>
    equation <name> multiplicity <k> index <n>
    param <name> [constraint: positive | nonzero]
    assign <name> := <rational>
    entry <eq>[i] <unk>[j] := <polynomial>
    depends <eq> on <unk> order <d>
    prefactor := <polynomial in parameters>
    factor <multiplicity> := <polynomial>

Polynomial expressions use `+ - * ^` with parentheses; coefficients are
exact rationals written `a` or `a/b`.  The covector atoms are spelled
`xi0..xi3`; every other atom must have been declared with `param`.  Any
trailing text after a complete statement is an error.
"""

from __future__ import annotations

import re
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

from .poly import Atom, Poly, param, xi
from .system import (DependencyDecl, EquationBlock, FactorClaim, LeraySystem,
                     ParamDecl, SymbolEntry, UnknownBlock)

XI_NAMES = {f"xi{i}": xi(i) for i in range(4)}

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<num>\d+)|(?P<name>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<op>:=|[-+*^()\[\]:/]))"
)


class ParseError(Exception):
    def __init__(self, message: str, line: int, col: int):
        self.line = line
        self.col = col
        super().__init__(f"line {line}, column {col}: {message}")


class DuplicateEntryError(ParseError):
    pass


class UnknownAtomError(ParseError):
    pass


class _Tokens:
    def __init__(self, text: str, line_no: int):
        self.text = text
        self.line_no = line_no
        self.toks: List[Tuple[str, str, int]] = []
        pos = 0
        while pos < len(text):
            mo = _TOKEN_RE.match(text, pos)
            if mo is None or mo.end() == pos:
                rest = text[pos:].strip()
                if not rest:
                    break
                raise ParseError(f"unexpected character {rest[0]!r}", line_no, pos + 1)
            if mo.lastgroup is not None and mo.group(mo.lastgroup):
                kind = mo.lastgroup
                self.toks.append((kind, mo.group(kind), mo.start(kind) + 1))
            pos = mo.end()
        self.i = 0

    def peek(self) -> Optional[Tuple[str, str, int]]:
        return self.toks[self.i] if self.i < len(self.toks) else None

    def next(self) -> Tuple[str, str, int]:
        t = self.peek()
        if t is None:
            raise ParseError("unexpected end of line", self.line_no, len(self.text) + 1)
        self.i += 1
        return t

    def expect(self, kind: str, value: Optional[str] = None) -> Tuple[str, str, int]:
        t = self.next()
        if t[0] != kind or (value is not None and t[1] != value):
            want = value if value is not None else kind
            raise ParseError(f"expected {want!r}, found {t[1]!r}", self.line_no, t[2])
        return t

    def done(self):
        t = self.peek()
        if t is not None:
            raise ParseError(f"trailing input {t[1]!r}", self.line_no, t[2])


class _PolyParser:
    """Recursive-descent parser for polynomial expressions."""

    def __init__(self, toks: _Tokens, atoms: Dict[str, Atom]):
        self.toks = toks
        self.atoms = atoms

    def parse(self) -> Poly:
        p = self.expr()
        return p

    def expr(self) -> Poly:
        t = self.toks.peek()
        if t and t[0] == "op" and t[1] == "-":
            self.toks.next()
            acc = -self.term()
        else:
            acc = self.term()
        while True:
            t = self.toks.peek()
            if t and t[0] == "op" and t[1] in "+-":
                self.toks.next()
                rhs = self.term()
                acc = acc + rhs if t[1] == "+" else acc - rhs
            else:
                return acc

    def term(self) -> Poly:
        acc = self.power()
        while True:
            t = self.toks.peek()
            if t and t[0] == "op" and t[1] == "*":
                self.toks.next()
                acc = acc * self.power()
            else:
                return acc

    def power(self) -> Poly:
        base = self.base()
        t = self.toks.peek()
        if t and t[0] == "op" and t[1] == "^":
            self.toks.next()
            n = self.toks.expect("num")
            return base ** int(n[1])
        return base

    def base(self) -> Poly:
        t = self.toks.next()
        if t[0] == "num":
            return Poly.constant(self.rational_tail(int(t[1])))
        if t[0] == "name":
            a = self.atoms.get(t[1])
            if a is None:
                raise UnknownAtomError(f"undeclared atom {t[1]!r}", self.toks.line_no, t[2])
            return Poly.atom(a)
        if t[0] == "op" and t[1] == "(":
            p = self.expr()
            self.toks.expect("op", ")")
            return p
        if t[0] == "op" and t[1] == "-":
            return -self.base()
        raise ParseError(f"expected a term, found {t[1]!r}", self.toks.line_no, t[2])

    def rational_tail(self, numerator: int) -> Fraction:
        t = self.toks.peek()
        if t and t[0] == "op" and t[1] == "/":
            self.toks.next()
            den = self.toks.expect("num")
            if int(den[1]) == 0:
                raise ParseError("zero denominator", self.toks.line_no, den[2])
            return Fraction(numerator, int(den[1]))
        return Fraction(numerator)


def _parse_rational(toks: _Tokens) -> Fraction:
    neg = False
    t = toks.peek()
    if t and t[0] == "op" and t[1] == "-":
        toks.next()
        neg = True
    num = toks.expect("num")
    val = _PolyParser(toks, {}).rational_tail(int(num[1]))
    return -val if neg else val


def parse_system(text: str) -> LeraySystem:
    """Parse a complete system spec; raises ParseError with line/column."""
    unknowns: List[UnknownBlock] = []
    equations: List[EquationBlock] = []
    entries: List[SymbolEntry] = []
    deps: List[DependencyDecl] = []
    params: List[ParamDecl] = []
    assigns: Dict[str, Fraction] = {}
    factors: List[Tuple[Poly, int]] = []
    prefactor: Optional[Poly] = None

    atoms: Dict[str, Atom] = dict(XI_NAMES)
    entry_keys = set()

    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].rstrip()
        if not line.strip():
            continue
        toks = _Tokens(line, line_no)
        head = toks.expect("name")

        if head[1] == "unknown" or head[1] == "equation":
            name = toks.expect("name")[1]
            toks.expect("name", "multiplicity")
            mult = int(toks.expect("num")[1])
            toks.expect("name", "index")
            idx = int(toks.expect("num")[1])
            toks.done()
            if head[1] == "unknown":
                if any(b.name == name for b in unknowns):
                    raise ParseError(f"duplicate unknown block {name!r}", line_no, head[2])
                unknowns.append(UnknownBlock(name, mult, idx))
            else:
                if any(b.name == name for b in equations):
                    raise ParseError(f"duplicate equation block {name!r}", line_no, head[2])
                equations.append(EquationBlock(name, mult, idx))

        elif head[1] == "param":
            name = toks.expect("name")[1]
            if name in atoms:
                raise ParseError(f"atom {name!r} already declared", line_no, head[2])
            constraint = None
            t = toks.peek()
            if t is not None:
                toks.expect("name", "constraint")
                toks.expect("op", ":")
                c = toks.expect("name")
                if c[1] not in ("positive", "nonzero"):
                    raise ParseError("constraint must be positive or nonzero", line_no, c[2])
                constraint = c[1]
            toks.done()
            atoms[name] = param(name)
            params.append(ParamDecl(name, constraint))

        elif head[1] == "assign":
            name = toks.expect("name")
            if name[1] not in atoms or name[1] in XI_NAMES:
                raise UnknownAtomError(f"undeclared parameter {name[1]!r}", line_no, name[2])
            toks.expect("op", ":=")
            assigns[name[1]] = _parse_rational(toks)
            toks.done()

        elif head[1] == "entry":
            eq_name = toks.expect("name")[1]
            toks.expect("op", "[")
            eq_idx = int(toks.expect("num")[1])
            toks.expect("op", "]")
            unk_name = toks.expect("name")[1]
            toks.expect("op", "[")
            unk_idx = int(toks.expect("num")[1])
            toks.expect("op", "]")
            toks.expect("op", ":=")
            symbol = _PolyParser(toks, atoms).parse()
            toks.done()
            key = (eq_name, eq_idx, unk_name, unk_idx)
            if key in entry_keys:
                raise DuplicateEntryError(
                    f"duplicate entry {eq_name}[{eq_idx}] {unk_name}[{unk_idx}]",
                    line_no, head[2])
            entry_keys.add(key)
            if not symbol.is_zero():
                entries.append(SymbolEntry(eq_name, eq_idx, unk_name, unk_idx, symbol))

        elif head[1] == "depends":
            eq_name = toks.expect("name")[1]
            toks.expect("name", "on")
            unk_name = toks.expect("name")[1]
            toks.expect("name", "order")
            order = int(toks.expect("num")[1])
            toks.done()
            deps.append(DependencyDecl(eq_name, unk_name, order))

        elif head[1] == "factor":
            mult = int(toks.expect("num")[1])
            toks.expect("op", ":=")
            p = _PolyParser(toks, atoms).parse()
            toks.done()
            factors.append((p, mult))

        elif head[1] == "prefactor":
            toks.expect("op", ":=")
            prefactor = _PolyParser(toks, atoms).parse()
            toks.done()

        else:
            raise ParseError(f"unknown statement {head[1]!r}", line_no, head[2])

    eq_names = {b.name for b in equations}
    unk_names = {b.name for b in unknowns}
    for e in entries:
        if e.eq_block not in eq_names:
            raise ParseError(f"entry references undeclared equation {e.eq_block!r}", 0, 0)
        if e.unk_block not in unk_names:
            raise ParseError(f"entry references undeclared unknown {e.unk_block!r}", 0, 0)
    for d in deps:
        if d.eq_block not in eq_names or d.unk_block not in unk_names:
            raise ParseError(
                f"dependency references undeclared block {d.eq_block!r}/{d.unk_block!r}", 0, 0)

    claim = None
    if factors or prefactor is not None:
        claim = FactorClaim(prefactor if prefactor is not None else Poly.one(),
                            tuple(factors))

    return LeraySystem(unknowns, equations, entries, deps, params, assigns, claim)


def print_system(s: LeraySystem) -> str:
    """Serialize a system; parse_system(print_system(s)) is structurally equal."""
    out: List[str] = []
    for b in s.unknowns:
        out.append(f"unknown {b.name} multiplicity {b.multiplicity} index {b.m}")
    for b in s.equations:
        out.append(f"equation {b.name} multiplicity {b.multiplicity} index {b.n}")
    for p in s.params:
        suffix = f" constraint: {p.constraint}" if p.constraint else ""
        out.append(f"param {p.name}{suffix}")
    for name, val in s.assigns.items():
        out.append(f"assign {name} := {_frac(val)}")
    for e in s.entries:
        out.append(f"entry {e.eq_block}[{e.eq_index}] {e.unk_block}[{e.unk_index}] := {e.symbol.render()}")
    for d in s.deps:
        out.append(f"depends {d.eq_block} on {d.unk_block} order {d.order}")
    if s.factor_claim is not None:
        out.append(f"prefactor := {s.factor_claim.prefactor.render()}")
        for p, mult in s.factor_claim.factors:
            out.append(f"factor {mult} := {p.render()}")
    return "\n".join(out) + "\n"


def parse_poly(text: str, atom_names: Dict[str, Atom]) -> Poly:
    """Parse a standalone polynomial expression using the given atom table."""
    merged = dict(XI_NAMES)
    merged.update(atom_names)
    toks = _Tokens(text, 1)
    p = _PolyParser(toks, merged).parse()
    toks.done()
    return p


def _frac(c: Fraction) -> str:
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"
