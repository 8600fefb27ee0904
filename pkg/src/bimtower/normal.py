"""Standard form for tangle terms, and the rewrite that reaches it.

Every term is isotopic to a horizontal row of *columns*, each column either a
group of parallel through-strands or a single input disk with nested local
caps (left caps hug the disk's left edge, right caps its right edge, free
strands in the middle), together with detached closed components pinned to
the gap between open strands where they float.  Gap ``g`` means ``g`` open
strands lie to the component's left; gap 0 is left of the whole row, gap
``arity`` right of it.  Closed values are central, so components sharing a
gap commute and are sorted by a serialization key, but the gap itself is an
isotopy invariant: away from a factor the two algebra actions differ, and a
loop left of a strand evaluates differently from the same loop right of it.

A disk column records the cap word by three counts ``(m, v, w)``: the disk
arity is ``m + v + w``, its first ``v`` strands carry nested left caps, its
last ``w`` nested right caps, and ``m`` strands stay free.  Left caps are
written outside right caps; the two kinds commute, so this order is a choice,
not a constraint.

Trace pairs reduce by three moves, applied to fixpoint:

* a position that is a through-strand on both sides closes into a free loop
  (a right loop under ``tau``, a left loop under ``tau-op``) and drops out;
* the innermost closure arc (last position for ``tau``, first for ``tau-op``)
  over a through-strand on one side and a disk edge on the other contracts to
  a local cap on that disk, while at least two strands remain;
* a disk whose free strands are exhausted detaches as a fully closed single
  disk, canonicalized by peeling its outermost cap back into a closure.

The outermost arc over a through-strand does not contract: the freed cap
would enclose the rest of the component, which is not a local move.  Two-row
pairs are cyclic (the top row slides around the closure), so the rows of a
surviving pair are ordered by serialization.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import terms as T


@dataclass(frozen=True)
class IdGroup:
    k: int


@dataclass(frozen=True)
class DiskEntry:
    slot: str
    arity: int
    m: int
    v: int
    w: int


@dataclass(frozen=True)
class LoopRight:
    pass


@dataclass(frozen=True)
class LoopLeft:
    pass


@dataclass(frozen=True)
class ClosedPair:
    kind: str  # "tau" or "tau-op"
    n: int
    top: tuple
    bottom: tuple


@dataclass(frozen=True)
class Placed:
    """A closed component floating at strand gap ``gap`` of the open row."""

    gap: int
    part: object


@dataclass(frozen=True)
class NormalTangle:
    columns: tuple
    closed: tuple

    @property
    def arity(self):
        return row_arity(self.columns)


def row_arity(columns):
    return sum(c.k if isinstance(c, IdGroup) else c.m for c in columns)


def _ser_column(col):
    if isinstance(col, IdGroup):
        return f"i{col.k}"
    return f"d{col.slot}:{col.arity}:{col.m}:{col.v}:{col.w}"


def _ser_row(columns):
    return ",".join(_ser_column(c) for c in columns)


def ser_closed(comp):
    if isinstance(comp, LoopRight):
        return "loop-r"
    if isinstance(comp, LoopLeft):
        return "loop-l"
    return f"{comp.kind}:{comp.n}:{_ser_row(comp.top)}|{_ser_row(comp.bottom)}"


def _merge_ids(columns):
    out = []
    for col in columns:
        if isinstance(col, IdGroup):
            if col.k == 0:
                continue
            if out and isinstance(out[-1], IdGroup):
                out[-1] = IdGroup(out[-1].k + col.k)
                continue
        out.append(col)
    return out


def _single_disk_closure(entry, kind):
    """Canonical form of a fully closed single disk.

    ``entry`` has one free strand; ``kind`` says which side its closure arc
    passes around.  Fold the arc into the total cap counts, then peel the
    outermost cap of the closed picture back off: the outermost left cap when
    any left cap exists, else the outermost right cap.
    """
    v = entry.v + (1 if kind == "tau-op" else 0)
    w = entry.w + (1 if kind == "tau" else 0)
    if v >= 1:
        disk = DiskEntry(entry.slot, entry.arity, 1, v - 1, w)
        peeled = "tau-op"
    else:
        disk = DiskEntry(entry.slot, entry.arity, 1, 0, w - 1)
        peeled = "tau"
    top, bottom = (disk,), (IdGroup(1),)
    if _ser_row(top) > _ser_row(bottom):
        top, bottom = bottom, top
    return ClosedPair(peeled, 1, top, bottom)


def _position_kinds(columns):
    """Per-strand flags: True where the strand belongs to an id group."""
    flags = []
    for col in columns:
        if isinstance(col, IdGroup):
            flags.extend([True] * col.k)
        else:
            flags.extend([False] * col.m)
    return flags


def _drop_position(columns, pos):
    """Remove one id strand at strand index ``pos`` (must lie in an IdGroup)."""
    out = list(columns)
    at = 0
    for i, col in enumerate(out):
        span = col.k if isinstance(col, IdGroup) else col.m
        if at <= pos < at + span:
            assert isinstance(col, IdGroup)
            out[i] = IdGroup(col.k - 1)
            return _merge_ids(out)
        at += span
    raise AssertionError("position out of range")


def _blocks(top, bottom):
    """Split strand positions into maximal disk-linked spans.

    Two positions are linked when some disk on either row spans both;
    identity strands link nothing.  Every position is assumed to touch at
    least one disk, so the spans partition the full range and each is the
    footprint of one internally connected piece of the closure.
    """
    n = row_arity(top)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for row in (top, bottom):
        at = 0
        for col in row:
            if isinstance(col, IdGroup):
                at += col.k
            else:
                for p in range(at + 1, at + col.m):
                    parent[find(p - 1)] = find(p)
                at += col.m
    spans = []
    for p in range(n):
        if p and find(p) == find(p - 1):
            spans[-1] = (spans[-1][0], p + 1)
        else:
            spans.append((p, p + 1))
    return spans


def _slice_row(columns, start, end):
    """Columns covering strand positions [start, end); ids split as needed."""
    out = []
    at = 0
    for col in columns:
        span = col.k if isinstance(col, IdGroup) else col.m
        lo, hi = max(at, start), min(at + span, end)
        if lo < hi:
            if isinstance(col, IdGroup):
                out.append(IdGroup(hi - lo))
            else:
                assert lo == at and hi == at + span, "disk straddles a block"
                out.append(col)
        at += span
    return tuple(_merge_ids(out))


def _reduce_pair(kind, top, bottom):
    """Reduce a trace pair to fixpoint; returns (closed components)."""
    produced = []
    loop = LoopRight() if kind == "tau" else LoopLeft()
    top, bottom = list(top), list(bottom)
    # positions where both rows run identity strands are bare loops
    while True:
        n = row_arity(top)
        assert n == row_arity(bottom)
        if n == 0:
            return produced
        ft, fb = _position_kinds(top), _position_kinds(bottom)
        pos = next((i for i in range(n) if ft[i] and fb[i]), None)
        if pos is None:
            break
        produced.append(loop)
        top = _drop_position(top, pos)
        bottom = _drop_position(bottom, pos)
    # a closure whose positions fall into several disk-linked spans is that
    # many side-by-side closed pieces; reduce each on its own
    spans = _blocks(top, bottom)
    if len(spans) > 1:
        for s, e in spans:
            produced.extend(_reduce_pair(
                kind, _slice_row(top, s, e), _slice_row(bottom, s, e)))
        return produced
    while True:
        n = row_arity(top)
        assert n == row_arity(bottom)
        if n == 0:
            return produced
        ft, fb = _position_kinds(top), _position_kinds(bottom)
        if n >= 2:
            edge = n - 1 if kind == "tau" else 0
            if ft[edge] != fb[edge]:
                idrow, diskrow = (top, bottom) if ft[edge] else (bottom, top)
                j = -1 if kind == "tau" else 0
                d = diskrow[j]
                if kind == "tau":
                    d = DiskEntry(d.slot, d.arity, d.m - 1, d.v, d.w + 1)
                else:
                    d = DiskEntry(d.slot, d.arity, d.m - 1, d.v + 1, d.w)
                if d.m == 0:
                    produced.append(_single_disk_closure(
                        DiskEntry(d.slot, d.arity, 1, d.v, d.w - 1)
                        if kind == "tau"
                        else DiskEntry(d.slot, d.arity, 1, d.v - 1, d.w),
                        kind))
                    del diskrow[j]
                    diskrow[:] = _merge_ids(diskrow)
                else:
                    diskrow[j] = d
                idrow[:] = _drop_position(idrow, edge)
                continue
        break
    n = row_arity(top)
    if (n == 1 and len(top) == 1 and len(bottom) == 1):
        a, b = top[0], bottom[0]
        if isinstance(a, IdGroup) != isinstance(b, IdGroup):
            entry = b if isinstance(a, IdGroup) else a
            produced.append(_single_disk_closure(entry, kind))
            return produced
    top, bottom = tuple(top), tuple(bottom)
    if _ser_row(top) > _ser_row(bottom):
        top, bottom = bottom, top
    produced.append(ClosedPair(kind, n, top, bottom))
    return produced


def _cap(nf, side):
    """Apply one right ("tau") or left ("tau-op") cap to the edge strand.

    The fold removes one strand, so floating components shift: under a left
    cap every gap right of the lost first strand moves down one, under a
    right cap gaps clamp to the new row width.  A component freed here (a
    loop, or a disk whose strands ran out) floats at the capped edge.
    """
    columns = list(nf.columns)
    edge = nf.arity - 1
    if side == "tau":
        closed = [Placed(min(p.gap, edge), p.part) for p in nf.closed]
        born = edge
    else:
        closed = [Placed(max(0, p.gap - 1), p.part) for p in nf.closed]
        born = 0
    j = -1 if side == "tau" else 0
    col = columns[j]
    if isinstance(col, IdGroup):
        closed.append(Placed(born, LoopRight() if side == "tau" else LoopLeft()))
        columns[j] = IdGroup(col.k - 1)
        columns = _merge_ids(columns)
    else:
        if side == "tau":
            col = DiskEntry(col.slot, col.arity, col.m - 1, col.v, col.w + 1)
        else:
            col = DiskEntry(col.slot, col.arity, col.m - 1, col.v + 1, col.w)
        if col.m == 0:
            closed.append(Placed(born, _single_disk_closure(
                DiskEntry(col.slot, col.arity, 1, col.v, col.w - 1)
                if side == "tau"
                else DiskEntry(col.slot, col.arity, 1, col.v - 1, col.w),
                side)))
            del columns[j]
            columns = _merge_ids(columns)
        else:
            columns[j] = col
    return _pack(columns, closed)


def _pack(columns, closed):
    key = lambda p: (p.gap, ser_closed(p.part))
    return NormalTangle(tuple(columns), tuple(sorted(closed, key=key)))


def normalize(term):
    """Rewrite a term to its standard form (bottom-up fold)."""
    if isinstance(term, T.Slot):
        return _pack([DiskEntry(term.name, term.arity, term.arity, 0, 0)], [])
    tag = term.tag
    kids = [normalize(k) for k in term.children]
    if isinstance(tag, T.Id):
        return _pack([IdGroup(tag.n)] if tag.n else [], [])
    if isinstance(tag, T.CapRight):
        return _cap(kids[0], "tau")
    if isinstance(tag, T.CapLeft):
        return _cap(kids[0], "tau-op")
    if isinstance(tag, T.Tensor):
        a, b = kids
        shift = a.arity
        placed = list(a.closed)
        placed += [Placed(p.gap + shift, p.part) for p in b.closed]
        return _pack(_merge_ids(list(a.columns) + list(b.columns)), placed)
    if isinstance(tag, (T.TraceRight, T.TraceLeft)):
        a, b = kids
        kind = "tau" if isinstance(tag, T.TraceRight) else "tau-op"
        parts = [p.part for p in a.closed] + [p.part for p in b.closed]
        parts.extend(_reduce_pair(kind, a.columns, b.columns))
        return _pack([], [Placed(0, part) for part in parts])
    raise T.TermError(f"unknown tag {tag!r}")


def isotopy_equal(t1, t2):
    return normalize(t1) == normalize(t2)


# ---------------------------------------------------------------------------
# standard form back to a term (a canonical representative of the class)


def _column_term(col):
    if isinstance(col, IdGroup):
        return T.id_(col.k)
    t = T.slot(col.slot, col.arity)
    for k in range(col.arity, col.m + col.v, -1):
        t = T.cap_right(k, t)
    for k in range(col.m + col.v, col.m, -1):
        t = T.cap_left(k, t)
    return t


def _row_term(columns):
    if not columns:
        return T.id_(0)
    out = _column_term(columns[0])
    for col in columns[1:]:
        out = T.tensor(out, _column_term(col))
    return out


def _closed_term(comp):
    if isinstance(comp, LoopRight):
        return T.cap_right(1, T.id_(1))
    if isinstance(comp, LoopLeft):
        return T.cap_left(1, T.id_(1))
    a, b = _row_term(comp.top), _row_term(comp.bottom)
    if comp.kind == "tau":
        return T.trace_right(comp.n, a, b)
    return T.trace_left(comp.n, a, b)


def to_term(nf):
    """Canonical representative term, closed pieces at their recorded gaps.

    A gap can fall between strands of a merged id group, in which case the
    group splits around the component; it never falls between strands of a
    single disk, since no rewrite move threads a component through a disk's
    own strand fan.
    """
    placed = list(nf.closed)
    pieces = []
    pi = 0
    at = 0

    def flush(limit):
        nonlocal pi
        while pi < len(placed) and placed[pi].gap <= limit:
            pieces.append(_closed_term(placed[pi].part))
            pi += 1

    for col in nf.columns:
        flush(at)
        if isinstance(col, IdGroup):
            left = at
            while pi < len(placed) and placed[pi].gap < at + col.k:
                cut = placed[pi].gap
                if cut > left:
                    pieces.append(T.id_(cut - left))
                flush(cut)
                left = cut
            if at + col.k > left:
                pieces.append(T.id_(at + col.k - left))
            at += col.k
        else:
            pieces.append(_column_term(col))
            at += col.m
    flush(at)
    if not pieces:
        return T.id_(0)
    out = pieces[0]
    for piece in pieces[1:]:
        out = T.tensor(out, piece)
    return out
