"""Property functionals and their registry.

A property of a matrix tuple is encoded as a finite family of functionals
whose common kernel defines it: normality is "x x* - x* x = 0", unitarity is
"1 - x* x = 0 and 1 - x x* = 0", compatibility is the vanishing of all
commutators of range projections of powers, and so on.  Every functional is
compression-equivariant: compressing the tuple by a commuting projection and
evaluating equals evaluating and then compressing.  That is what makes the
corresponding property hereditary and the engine's split unique.

Two descriptor forms are admitted, exactly the two for which equivariance is
provable: *-polynomials (complex-linear combinations of words in the entries,
their adjoints and a formal unit symbol, equivariant by linearity) and words
containing range-projection tokens ``[x^m]`` (equivariant because a commuting
projection moves through a range projection).  The unit symbol is a formal
token bound at evaluation time, because the unit of a corner is the corner's
own projection, not the ambient identity.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np

from .errors import InputError
from .numeric import DEFAULT_TOL, ToleranceProfile, frob
from .ring import (
    Projection,
    TupleInstance,
    as_tuple_instance,
    commutation_residual,
    power_range_chain,
)


@dataclass(frozen=True)
class SlotAtom:
    """One tuple entry, possibly adjointed."""

    slot: int
    adjoint: bool = False


@dataclass(frozen=True)
class UnitAtom:
    """The formal unit symbol, bound to the corner unit at evaluation time."""


@dataclass(frozen=True)
class RangeAtom:
    """Range projection of one entry's power: the token [x^m]."""

    slot: int
    power: int


@dataclass(frozen=True)
class Term:
    coeff: complex
    word: tuple


@dataclass(frozen=True)
class Functional:
    """One functional: a complex-linear combination of words of atoms."""

    label: str
    terms: tuple

    def __post_init__(self):
        if not self.terms:
            raise InputError(f"functional {self.label!r} has no terms")
        # A bare scalar means scalar times the unit of the ring.
        norm = tuple(
            t if t.word else Term(t.coeff, (UnitAtom(),)) for t in self.terms
        )
        for t in norm:
            for atom in t.word:
                if isinstance(atom, RangeAtom) and atom.power < 1:
                    raise InputError("range-projection powers must be positive")
        object.__setattr__(self, "terms", norm)

    @property
    def word_length(self) -> int:
        return max(len(t.word) for t in self.terms)

    @property
    def uses_unit(self) -> bool:
        return any(isinstance(a, UnitAtom) for t in self.terms for a in t.word)

    @property
    def max_slot(self) -> int:
        slots = [
            a.slot for t in self.terms for a in t.word if not isinstance(a, UnitAtom)
        ]
        return max(slots) if slots else -1

    def scale(self, max_norm: float) -> float:
        """Residual acceptance scale: (1 + max entry norm) ** word length."""
        return (1.0 + max_norm) ** self.word_length


@dataclass(frozen=True)
class PropertySpec:
    """Named family of functionals defining one property of an arity-sized tuple."""

    name: str
    arity: int
    functionals: tuple

    def __post_init__(self):
        if self.arity < 1:
            raise InputError("arity must be at least 1")
        if not self.functionals:
            raise InputError(f"property {self.name!r} needs at least one functional")
        for f in self.functionals:
            if f.max_slot >= self.arity:
                raise InputError(
                    f"functional {f.label!r} references slot {f.max_slot} "
                    f"but arity is {self.arity}"
                )

    @property
    def uses_unit(self) -> bool:
        return any(f.uses_unit for f in self.functionals)


def _x(slot=0):
    return SlotAtom(slot)


def _xs(slot=0):
    return SlotAtom(slot, adjoint=True)


def _poly(label, *terms):
    return Functional(label, tuple(Term(c, tuple(w)) for c, w in terms))


def _normal(dim):
    f = _poly("xx*-x*x", (1, [_x(), _xs()]), (-1, [_xs(), _x()]))
    return PropertySpec("normal", 1, (f,))


def _partial_isometry(dim):
    f = _poly("x-xx*x", (1, [_x()]), (-1, [_x(), _xs(), _x()]))
    return PropertySpec("partial_isometry", 1, (f,))


def _isometry(dim):
    f = _poly("1-x*x", (1, [UnitAtom()]), (-1, [_xs(), _x()]))
    return PropertySpec("isometry", 1, (f,))


def _coisometry(dim):
    # The isometry functional applied to the adjoint slot.
    f = _poly("1-xx*", (1, [UnitAtom()]), (-1, [_x(), _xs()]))
    return PropertySpec("coisometry", 1, (f,))


def _unitary(dim):
    f1 = _poly("1-x*x", (1, [UnitAtom()]), (-1, [_xs(), _x()]))
    f2 = _poly("1-xx*", (1, [UnitAtom()]), (-1, [_x(), _xs()]))
    return PropertySpec("unitary", 1, (f1, f2))


def _commuting(dim):
    f = _poly("xy-yx", (1, [_x(0), _x(1)]), (-1, [_x(1), _x(0)]))
    return PropertySpec("commuting", 2, (f,))


def _doubly_commuting(dim):
    f1 = _poly("xy-yx", (1, [_x(0), _x(1)]), (-1, [_x(1), _x(0)]))
    f2 = _poly("xy*-y*x", (1, [_x(0), _xs(1)]), (-1, [_xs(1), _x(0)]))
    return PropertySpec("doubly_commuting", 2, (f1, f2))


def _compatible(dim):
    # Ranges of powers of an n x n matrix stabilize within n steps, so the
    # a-priori infinite family of power pairs is exact at this cutoff.
    fs = []
    for m in range(1, dim + 1):
        for n in range(1, dim + 1):
            fs.append(
                Functional(
                    f"[x^{m}][y^{n}]-[y^{n}][x^{m}]",
                    (
                        Term(1, (RangeAtom(0, m), RangeAtom(1, n))),
                        Term(-1, (RangeAtom(1, n), RangeAtom(0, m))),
                    ),
                )
            )
    return PropertySpec("compatible", 2, tuple(fs))


_BUILTINS = {
    "normal": _normal,
    "partial_isometry": _partial_isometry,
    "isometry": _isometry,
    "coisometry": _coisometry,
    "unitary": _unitary,
    "commuting": _commuting,
    "doubly_commuting": _doubly_commuting,
    "compatible": _compatible,
}

BUILTIN_NAMES = tuple(sorted(_BUILTINS))


def builtin_property(name: str, dim: int) -> PropertySpec:
    """Instantiate a built-in property for ambient dimension ``dim``."""
    if name not in _BUILTINS:
        raise InputError(f"unknown property {name!r}; known: {', '.join(BUILTIN_NAMES)}")
    if dim < 1:
        raise InputError("dimension must be at least 1")
    return _BUILTINS[name](dim)


def concat_specs(name: str, specs) -> PropertySpec:
    """Property defined by the union of the functional families."""
    specs = list(specs)
    arity = specs[0].arity
    for s in specs:
        if s.arity != arity:
            raise InputError("cannot concatenate specs of different arities")
    fs = tuple(f for s in specs for f in s.functionals)
    return PropertySpec(name, arity, fs)


def lift_spec(spec: PropertySpec, arity: int, slot: int) -> PropertySpec:
    """Reinterpret an arity-1 property as a property of one slot of a larger tuple."""
    if spec.arity != 1:
        raise InputError("only arity-1 properties can be lifted")
    if not 0 <= slot < arity:
        raise InputError(f"slot {slot} out of range for arity {arity}")

    def remap(atom):
        if isinstance(atom, SlotAtom):
            return SlotAtom(slot, atom.adjoint)
        if isinstance(atom, RangeAtom):
            return RangeAtom(slot, atom.power)
        return atom

    fs = tuple(
        Functional(
            f"{f.label}@{slot}",
            tuple(Term(t.coeff, tuple(remap(a) for a in t.word)) for t in f.terms),
        )
        for f in spec.functionals
    )
    return PropertySpec(f"{spec.name}@{slot}", arity, fs)


class _RangeCache:
    """Per-slot chains of power-range projections, computed once on first use.

    Power ranges stabilize by the ambient dimension, so requests beyond it
    reuse the last chain element.
    """

    def __init__(self, mats, tol):
        self.mats = mats
        self.tol = tol
        self.chains = {}

    def get(self, slot, power):
        dim = self.mats[slot].shape[0]
        if dim == 0:
            return np.zeros((0, 0), dtype=np.complex128)
        chain = self.chains.get(slot)
        if chain is None:
            chain = [f.projection_matrix() for f in
                     power_range_chain(self.mats[slot], dim, self.tol)]
            self.chains[slot] = chain
        return chain[min(power, dim) - 1]


def _evaluate_functional(func, mats, unit, cache):
    dim = unit.shape[0]
    value = np.zeros((dim, dim), dtype=np.complex128)
    for term in func.terms:
        acc = None
        for atom in term.word:
            if isinstance(atom, UnitAtom):
                m = unit
            elif isinstance(atom, SlotAtom):
                m = mats[atom.slot]
                if atom.adjoint:
                    m = m.conj().T
            else:
                m = cache.get(atom.slot, atom.power)
            acc = m if acc is None else acc @ m
        value = value + term.coeff * acc
    return value


def evaluate(spec: PropertySpec, t, unit: Projection | None = None,
             tol: ToleranceProfile = DEFAULT_TOL) -> list:
    """Evaluate every functional of ``spec`` on the tuple.

    With ``unit`` given, the tuple is compressed to the unit's corner, the
    functionals are evaluated there (unit symbol bound to the corner
    identity, range projections taken inside the corner) and the values are
    embedded back into the ambient space.  ``unit=None`` means the ambient
    identity.
    """
    t = as_tuple_instance(t)
    if len(t) != spec.arity:
        raise InputError(f"property {spec.name!r} has arity {spec.arity}, tuple has {len(t)}")
    if unit is None or unit.rank == t.dim:
        mats = list(t.elements)
        eye = np.eye(t.dim, dtype=np.complex128)
        cache = _RangeCache(mats, tol)
        return [_evaluate_functional(f, mats, eye, cache) for f in spec.functionals]
    if unit.dim != t.dim:
        raise InputError(f"unit dimension {unit.dim} != tuple dimension {t.dim}")
    f = unit.frame.cols
    mats = [f.conj().T @ x @ f for x in t.elements]
    eye = np.eye(unit.rank, dtype=np.complex128)
    cache = _RangeCache(mats, tol)
    return [
        f @ _evaluate_functional(fn, mats, eye, cache) @ f.conj().T
        for fn in spec.functionals
    ]


def functional_scales(spec: PropertySpec, t) -> list:
    """Per-functional residual acceptance scales for this tuple."""
    t = as_tuple_instance(t)
    m = t.norm_scale()
    return [f.scale(m) for f in spec.functionals]


def equivariance_check(spec: PropertySpec, t, p: Projection,
                       tol: ToleranceProfile = DEFAULT_TOL) -> float:
    """Largest deviation between corner evaluation and compressed ambient evaluation.

    This is the defining contract of every registered property: for any
    projection commuting with the tuple, evaluating on the compressed tuple
    (in the corner) must equal compressing the ambient value.
    """
    t = as_tuple_instance(t)
    for x in t:
        bound = tol.res_rel * (1.0 + frob(x)) * (1.0 + frob(p.matrix))
        if commutation_residual(p.matrix, x) > bound:
            raise InputError("projection does not commute with the tuple within tolerance")
    corner_values = evaluate(spec, t, unit=p, tol=tol)
    ambient_values = evaluate(spec, t, unit=None, tol=tol)
    return max(
        frob(c - p.matrix @ a) for c, a in zip(corner_values, ambient_values)
    )


# ---------------------------------------------------------------------------
# Textual functional syntax (used by the CLI):
#
#   expr   := ['-'] term (('+'|'-') term)*
#   term   := factor ('*' factor)*
#   factor := NUMBER | NAME postfix* | '[' NAME '^' INT ']' postfix*
#
# NAME is a tuple symbol, postfix ' is the adjoint, NUMBER factors multiply
# into the coefficient, and a term with no matrix factor denotes that
# multiple of the unit symbol.  Example: "x*y - y*x", "1 - x'*x",
# "[x^1]*[y^2] - [y^2]*[x^1]".
# ---------------------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"\s*(?:"
    r"(?P<num>(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?j?)"
    r"|(?P<name>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<op>[-+*'\[\]^])"
    r")"
)


def _tokenize(text):
    pos = 0
    out = []
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None or m.end() == pos:
            rest = text[pos:].strip()
            if not rest:
                break
            raise InputError(f"cannot tokenize functional near {rest[:12]!r}")
        if m.lastgroup == "num":
            out.append(("num", m.group("num")))
        elif m.lastgroup == "name":
            out.append(("name", m.group("name")))
        else:
            out.append(("op", m.group("op")))
        pos = m.end()
    return out


class _Parser:
    def __init__(self, tokens, slots):
        self.tokens = tokens
        self.slots = slots
        self.i = 0

    def peek(self):
        return self.tokens[self.i] if self.i < len(self.tokens) else (None, None)

    def take(self):
        tok = self.peek()
        self.i += 1
        return tok

    def expect(self, kind, value=None):
        k, v = self.take()
        if k != kind or (value is not None and v != value):
            raise InputError(f"expected {value or kind!r} in functional, got {v!r}")
        return v

    def slot_of(self, name):
        if name not in self.slots:
            raise InputError(
                f"unknown symbol {name!r} in functional; tuple symbols: "
                + ", ".join(self.slots)
            )
        return self.slots.index(name)

    def parse_factor(self, coeff, word):
        kind, value = self.take()
        if kind == "num":
            if value.endswith("j"):
                return coeff * complex(0.0, float(value[:-1])), word
            return coeff * float(value), word
        if kind == "name":
            atom = SlotAtom(self.slot_of(value))
            while self.peek() == ("op", "'"):
                self.take()
                atom = SlotAtom(atom.slot, not atom.adjoint)
            return coeff, word + [atom]
        if (kind, value) == ("op", "["):
            name = self.expect("name")
            self.expect("op", "^")
            power_txt = self.expect("num")
            try:
                power = int(power_txt)
            except ValueError:
                raise InputError(f"range-projection power must be an integer, got {power_txt!r}")
            self.expect("op", "]")
            while self.peek() == ("op", "'"):
                self.take()  # range projections are self-adjoint
            return coeff, word + [RangeAtom(self.slot_of(name), power)]
        raise InputError(f"unexpected token {value!r} in functional")

    def parse_term(self, sign):
        coeff, word = complex(sign), []
        coeff, word = self.parse_factor(coeff, word)
        while self.peek() == ("op", "*"):
            self.take()
            coeff, word = self.parse_factor(coeff, word)
        return Term(coeff, tuple(word))

    def parse_expr(self):
        terms = []
        sign = 1.0
        if self.peek() == ("op", "-"):
            self.take()
            sign = -1.0
        elif self.peek() == ("op", "+"):
            self.take()
        terms.append(self.parse_term(sign))
        while self.peek()[0] is not None:
            kind, value = self.take()
            if (kind, value) == ("op", "+"):
                terms.append(self.parse_term(1.0))
            elif (kind, value) == ("op", "-"):
                terms.append(self.parse_term(-1.0))
            else:
                raise InputError(f"unexpected token {value!r} in functional")
        return terms


def parse_functional(text: str, symbols) -> Functional:
    """Parse one functional expression over the given tuple symbols."""
    symbols = list(symbols)
    tokens = _tokenize(text)
    if not tokens:
        raise InputError("empty functional expression")
    terms = _Parser(tokens, symbols).parse_expr()
    return Functional(text.strip(), tuple(terms))


def user_property(exprs, symbols, name: str = "user") -> PropertySpec:
    """Build a property from textual functional expressions."""
    symbols = list(symbols)
    fs = tuple(parse_functional(e, symbols) for e in exprs)
    return PropertySpec(name, len(symbols), fs)
