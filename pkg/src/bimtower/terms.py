"""Tangle terms: the generator language for planar box diagrams.

A term is a tree built from named input slots and six generator families:

==========  =======================  ==========================
generator   s-expression             arity (inputs -> output)
==========  =======================  ==========================
``1_n``     ``(id n)``               none -> n
``t_n``     ``(t n CHILD)``          n -> n-1   (one right cap)
``t_n^op``  ``(t-op n CHILD)``       n -> n-1   (one left cap)
``(x)_m,n`` ``(tensor m n A B)``     m, n -> m+n
``tau_n``   ``(tau n A B)``          n, n -> 0  (closed)
``tau_n^op````(tau-op n A B)``       n, n -> 0  (closed)
``slot``    ``(slot NAME n)``        leaf of arity n
==========  =======================  ==========================

Arity counts strand pairs (a box with arity n has n strands on top and n on
bottom).  Slot names may repeat, meaning the same input is plugged into
several disks, but repeated names must agree on arity.  Slots of arity 0 are
rejected: a 0-arity disk would be a bare scalar, which the generator set does
not produce.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union


@dataclass(frozen=True)
class Id:
    n: int


@dataclass(frozen=True)
class CapRight:
    n: int


@dataclass(frozen=True)
class CapLeft:
    n: int


@dataclass(frozen=True)
class Tensor:
    m: int
    n: int


@dataclass(frozen=True)
class TraceRight:
    n: int


@dataclass(frozen=True)
class TraceLeft:
    n: int


@dataclass(frozen=True)
class Slot:
    name: str
    arity: int


@dataclass(frozen=True)
class Node:
    tag: Union[Id, CapRight, CapLeft, Tensor, TraceRight, TraceLeft]
    children: tuple

    def __post_init__(self):
        object.__setattr__(self, "children", tuple(self.children))


TangleTerm = Union[Slot, Node]


def id_(n):
    return Node(Id(n), ())


def cap_right(n, child):
    return Node(CapRight(n), (child,))


def cap_left(n, child):
    return Node(CapLeft(n), (child,))


def tensor(a, b, m=None, n=None):
    if m is None:
        m = out_arity(a)
    if n is None:
        n = out_arity(b)
    return Node(Tensor(m, n), (a, b))


def trace_right(n, a, b):
    return Node(TraceRight(n), (a, b))


def trace_left(n, a, b):
    return Node(TraceLeft(n), (a, b))


def slot(name, arity):
    return Slot(name, arity)


def out_arity(term):
    if isinstance(term, Slot):
        return term.arity
    tag = term.tag
    if isinstance(tag, Id):
        return tag.n
    if isinstance(tag, (CapRight, CapLeft)):
        return tag.n - 1
    if isinstance(tag, Tensor):
        return tag.m + tag.n
    return 0


class TermError(ValueError):
    pass


def validate(term):
    """Return a list of error strings; empty for a well-formed term."""
    errors = []
    slot_arity = {}

    def walk(t):
        if isinstance(t, Slot):
            if t.arity < 1:
                errors.append(f"slot {t.name!r} has arity {t.arity}; must be >= 1")
            seen = slot_arity.setdefault(t.name, t.arity)
            if seen != t.arity:
                errors.append(
                    f"slot {t.name!r} used with arities {seen} and {t.arity}"
                )
            return
        tag = t.tag
        kids = t.children
        if isinstance(tag, Id):
            want = ()
            if tag.n < 0:
                errors.append(f"id arity {tag.n} negative")
        elif isinstance(tag, (CapRight, CapLeft)):
            want = (tag.n,)
            if tag.n < 1:
                errors.append(f"cap index {tag.n}; must be >= 1")
        elif isinstance(tag, Tensor):
            want = (tag.m, tag.n)
            if tag.m < 0 or tag.n < 0:
                errors.append(f"tensor indices ({tag.m}, {tag.n}) negative")
        elif isinstance(tag, (TraceRight, TraceLeft)):
            want = (tag.n, tag.n)
            if tag.n < 1:
                errors.append(f"trace index {tag.n}; must be >= 1")
        else:
            errors.append(f"unknown tag {tag!r}")
            return
        if len(kids) != len(want):
            errors.append(f"{tag} expects {len(want)} children, got {len(kids)}")
            return
        for k, a in zip(kids, want):
            got = out_arity(k)
            if got != a:
                errors.append(f"{tag} child has arity {got}, expected {a}")
            walk(k)

    walk(term)
    return errors


def slots_of(term):
    """Mapping name -> arity over all slots in the term."""
    out = {}

    def walk(t):
        if isinstance(t, Slot):
            out[t.name] = t.arity
        else:
            for k in t.children:
                walk(k)

    walk(term)
    return out


def compose(outer, name, inner):
    """Substitute ``inner`` for every slot called ``name`` (operadic gluing).

    Substitution is literal: slot names inside ``inner`` are kept, so reuse of
    a name across outer and inner identifies those inputs.  Use
    :func:`rename_slots` first when that is not intended.
    """
    want = slots_of(outer).get(name)
    if want is None:
        raise TermError(f"no slot named {name!r}")
    have = out_arity(inner)
    if have != want:
        raise TermError(f"slot {name!r} has arity {want}, inner term {have}")

    def walk(t):
        if isinstance(t, Slot):
            return inner if t.name == name else t
        return Node(t.tag, tuple(walk(k) for k in t.children))

    return walk(outer)


def rename_slots(term, mapping):
    def walk(t):
        if isinstance(t, Slot):
            return Slot(mapping.get(t.name, t.name), t.arity)
        return Node(t.tag, tuple(walk(k) for k in t.children))

    return walk(term)


# ---------------------------------------------------------------------------
# s-expression parsing / printing


class SexprError(ValueError):
    def __init__(self, message, line, col):
        super().__init__(f"{line}:{col}: {message}")
        self.line = line
        self.col = col


def _tokenize(text):
    line, col = 1, 0
    tokens = []
    i = 0
    while i < len(text):
        ch = text[i]
        if ch == "\n":
            line += 1
            col = 0
        elif ch in "()":
            tokens.append((ch, line, col + 1))
            col += 1
        elif ch.isspace():
            col += 1
        elif ch == ";":
            while i < len(text) and text[i] != "\n":
                i += 1
            continue
        else:
            start = i
            startcol = col + 1
            while i < len(text) and not text[i].isspace() and text[i] not in "();":
                i += 1
                col += 1
            tokens.append((text[start:i], line, startcol))
            continue
        i += 1
    return tokens


def _int(tok):
    word, line, col = tok
    try:
        return int(word)
    except ValueError:
        raise SexprError(f"expected an integer, got {word!r}", line, col) from None


def parse_sexpr(text):
    """Parse a term; raises :class:`SexprError` with line:column positions."""
    tokens = _tokenize(text)
    pos = 0

    def need(kind=None):
        nonlocal pos
        if pos >= len(tokens):
            last = tokens[-1] if tokens else ("", 1, 1)
            raise SexprError("unexpected end of input", last[1], last[2])
        tok = tokens[pos]
        pos += 1
        if kind is not None and tok[0] != kind:
            raise SexprError(f"expected {kind!r}, got {tok[0]!r}", tok[1], tok[2])
        return tok

    def parse_term():
        nonlocal pos
        opening = need("(")
        head = need()
        word, line, col = head
        if word == "id":
            n = _int(need())
            term = id_(n)
        elif word in ("t", "t-op"):
            n = _int(need())
            child = parse_term()
            term = Node(CapRight(n) if word == "t" else CapLeft(n), (child,))
        elif word == "tensor":
            m = _int(need())
            n = _int(need())
            a = parse_term()
            b = parse_term()
            term = Node(Tensor(m, n), (a, b))
        elif word in ("tau", "tau-op"):
            n = _int(need())
            a = parse_term()
            b = parse_term()
            term = Node(TraceRight(n) if word == "tau" else TraceLeft(n), (a, b))
        elif word == "slot":
            name = need()
            if name[0] in "()":
                raise SexprError("expected a slot name", name[1], name[2])
            n = _int(need())
            term = Slot(name[0], n)
        else:
            raise SexprError(f"unknown generator {word!r}", line, col)
        need(")")
        return term

    term = parse_term()
    if pos != len(tokens):
        tok = tokens[pos]
        raise SexprError(f"trailing input {tok[0]!r}", tok[1], tok[2])
    errors = validate(term)
    if errors:
        first = errors[0]
        raise SexprError(first, 1, 1)
    return term


def to_sexpr(term):
    if isinstance(term, Slot):
        return f"(slot {term.name} {term.arity})"
    tag = term.tag
    kids = [to_sexpr(k) for k in term.children]
    if isinstance(tag, Id):
        return f"(id {tag.n})"
    if isinstance(tag, CapRight):
        return f"(t {tag.n} {kids[0]})"
    if isinstance(tag, CapLeft):
        return f"(t-op {tag.n} {kids[0]})"
    if isinstance(tag, Tensor):
        return f"(tensor {tag.m} {tag.n} {kids[0]} {kids[1]})"
    if isinstance(tag, TraceRight):
        return f"(tau {tag.n} {kids[0]} {kids[1]})"
    if isinstance(tag, TraceLeft):
        return f"(tau-op {tag.n} {kids[0]} {kids[1]})"
    raise TermError(f"unknown tag {tag!r}")
