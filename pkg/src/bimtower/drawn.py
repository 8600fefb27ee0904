"""Diagram form of a tangle: disks, boundary points, strings, cap depths.

Terms stay the primary representation; the drawn form exists to exercise the
string-connectivity classification and for printing.  Conventions: internal
disk points are numbered clockwise from the star, 1..k outgoing on top, then
k+1..2k incoming on the bottom, so a cap joins m with 2k - m + 1.  The
external disk reverses orientation: its top points receive, its bottom
points emit.  Strings are stored (tail, head) along the flow, where an end
is a (disk, point) pair and disk 0 is the external one.

A cap is a string with both ends on one disk, or one of the arcs tying two
internal disks inside a closed component.  Caps carry a side flag and a
nesting depth.  Same-disk caps hugging their own disk are ranked inside
that disk's per-side family; the closure arcs of a closed component form
one concentric family with depths counted outermost-first across the whole
component.  A same-disk cap can also ride a closure ring, when the strand
it closes faces an identity strand strictly inside the component; such a
cap is flagged ``ring`` and numbered with the arcs, not with the hugging
caps.  Validation reports rule violations as strings rather than raising;
a drawn diagram is well formed when the list is empty.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .normal import (ClosedPair, DiskEntry, IdGroup, LoopLeft, LoopRight,
                     NormalTangle, normalize)


@dataclass(frozen=True)
class Disk:
    ident: int           # 0 is the external disk
    points: int          # 2k
    star: int = 0


@dataclass(frozen=True)
class String:
    tail: tuple          # (disk, point), the emitting end
    head: tuple          # (disk, point), the receiving end


@dataclass(frozen=True)
class CapMark:
    side: str            # "left" | "right"
    depth: int           # 0 = outermost in its family
    ring: bool = False   # same-disk cap riding a closure ring, not hugging


@dataclass
class DrawnTangle:
    disks: list = field(default_factory=list)
    strings: list = field(default_factory=list)
    caps: dict = field(default_factory=dict)      # string index -> CapMark
    loops_right: int = 0
    loops_left: int = 0
    slots: dict = field(default_factory=dict)     # disk id -> slot name

    @property
    def external(self):
        return self.disks[0]


def _half(disk):
    return disk.points // 2


def _is_outgoing(disk, point, external):
    k = _half(disk)
    return point > k if external else point <= k


def validate_drawn(d):
    """Connectivity rules for a drawn tangle; violations come back as text."""
    bad = []
    by_id = {disk.ident: disk for disk in d.disks}
    seen = {}
    for idx, s in enumerate(d.strings):
        for end in (s.tail, s.head):
            disk, point = end
            if disk not in by_id:
                bad.append(f"string {idx} touches unknown disk {disk}")
                continue
            if not 1 <= point <= by_id[disk].points:
                bad.append(f"string {idx} uses point {point} outside disk {disk}")
            if end in seen:
                bad.append(f"point {end} met by strings {seen[end]} and {idx}")
            seen[end] = idx
    for disk in d.disks:
        for p in range(1, disk.points + 1):
            if (disk.ident, p) not in seen:
                bad.append(f"point ({disk.ident}, {p}) meets no string")
    # orientation: tails emit, heads receive
    for idx, s in enumerate(d.strings):
        td, tp = s.tail
        hd, hp = s.head
        if td in by_id and not _is_outgoing(by_id[td], tp, td == 0):
            bad.append(f"string {idx} starts at a receiving point {s.tail}")
        if hd in by_id and _is_outgoing(by_id[hd], hp, hd == 0):
            bad.append(f"string {idx} ends at an emitting point {s.head}")
    # a disk talking to the outside talks to nothing else
    partners = {}
    for s in d.strings:
        a, b = s.tail[0], s.head[0]
        partners.setdefault(a, set()).add(b)
        partners.setdefault(b, set()).add(a)
    for i, ps in partners.items():
        if i == 0:
            continue
        inner = {j for j in ps if j not in (0, i)}
        if 0 in ps and inner:
            bad.append(
                f"disk {i} touches the external disk and disks {sorted(inner)}")
    # same-disk strings pair m with 2k - m + 1
    for idx, s in enumerate(d.strings):
        if s.tail[0] == s.head[0] and s.tail[0] in by_id:
            k2 = by_id[s.tail[0]].points
            if s.tail[1] + s.head[1] != k2 + 1:
                bad.append(
                    f"string {idx} caps points {s.tail[1]}, {s.head[1]} on a "
                    f"{k2}-point disk")
            elif idx not in d.caps and s.tail[0] != 0:
                bad.append(f"cap string {idx} carries no side annotation")
    # strings between two internal disks come with their partner
    pair_set = set()
    for s in d.strings:
        if s.tail[0] != s.head[0] and s.tail[0] != 0 and s.head[0] != 0:
            pair_set.add((s.tail, s.head))
    for (i, p), (j, q) in pair_set:
        partner = ((j, by_id[j].points - q + 1), (i, by_id[i].points - p + 1))
        if partner not in pair_set:
            bad.append(
                f"inter-disk string ({i},{p})-({j},{q}) lacks its partner")
    # of the two strings forming an arc pair, exactly the wrapping half is
    # annotated; the straight half stays bare
    ends_of = {}
    for idx, s in enumerate(d.strings):
        if s.tail[0] != s.head[0] and s.tail[0] != 0 and s.head[0] != 0:
            ends_of[(s.tail, s.head)] = idx
    for (i, p), (j, q) in pair_set:
        partner = ((j, by_id[j].points - q + 1), (i, by_id[i].points - p + 1))
        if partner not in ends_of:
            continue
        a_idx = ends_of[((i, p), (j, q))]
        b_idx = ends_of[partner]
        if a_idx < b_idx and (a_idx in d.caps) == (b_idx in d.caps):
            bad.append(
                f"strings {a_idx} and {b_idx} form an arc pair but carry "
                f"{'two annotations' if a_idx in d.caps else 'none'}")
    # the closure rings of one closed component form concentric circles: one
    # shared side, depths consecutive from 0 counted from the outside.  Both
    # inter-disk arcs and ring-flagged self-caps belong to the family.
    groups = _closed_components(d, partners)
    closed_disks = set().union(*groups) if groups else set()
    for idx, mark in d.caps.items():
        s = d.strings[idx]
        if mark.ring and (s.tail[0] != s.head[0]
                          or s.tail[0] not in closed_disks):
            bad.append(f"string {idx} carries a ring flag but is not a "
                       f"closed component's own cap")
    for group in groups:
        depths, sides = [], set()
        for idx, mark in d.caps.items():
            s = d.strings[idx]
            if s.tail[0] in group and (s.tail[0] != s.head[0] or mark.ring):
                depths.append(mark.depth)
                sides.add(mark.side)
        if len(sides) > 1:
            bad.append(
                f"component {sorted(group)} mixes left and right arc caps")
        if sorted(depths) != list(range(len(depths))):
            bad.append(
                f"component {sorted(group)} has arc depths {sorted(depths)}, "
                f"not consecutive from 0")
    return bad


def _closed_components(d, partners):
    """Connected groups of internal disks not touching the external one."""
    seen = set()
    out = []
    for disk in d.disks:
        i = disk.ident
        if i == 0 or i in seen:
            continue
        group = set()
        stack = [i]
        while stack:
            a = stack.pop()
            if a in group:
                continue
            group.add(a)
            stack.extend(b for b in partners.get(a, ()) if b != 0)
        seen |= group
        if not any(0 in partners.get(a, ()) for a in group):
            out.append(group)
    return out


class _Builder:
    def __init__(self, arity):
        self.arity = arity
        self.disks = [Disk(0, 2 * arity)]
        self.strings = []
        self.caps = {}
        self.slots = {}
        self.loops_right = 0
        self.loops_left = 0

    def new_disk(self, points, slot=None):
        ident = len(self.disks)
        self.disks.append(Disk(ident, points))
        if slot is not None:
            self.slots[ident] = slot
        return ident

    def add(self, tail, head, mark=None):
        self.strings.append(String(tail, head))
        if mark is not None:
            self.caps[len(self.strings) - 1] = mark

    def done(self):
        return DrawnTangle(self.disks, self.strings, self.caps,
                           self.loops_right, self.loops_left, self.slots)


def _local_caps(b, d, entry):
    k = entry.arity
    for p in range(1, entry.v + 1):
        b.add((d, p), (d, 2 * k - p + 1), CapMark("left", p - 1))
    for p in range(k - entry.w + 1, k + 1):
        b.add((d, p), (d, 2 * k - p + 1),
              CapMark("right", p - (k - entry.w + 1)))


def term_to_drawn(term_or_form):
    """Draw a term (through its normal form)."""
    nf = (term_or_form if isinstance(term_or_form, NormalTangle)
          else normalize(term_or_form))
    K = nf.arity
    b = _Builder(K)
    pos = 1
    for col in nf.columns:
        if isinstance(col, IdGroup):
            for i in range(col.k):
                q = pos + i
                b.add((0, 2 * K - q + 1), (0, q))
            pos += col.k
        else:
            d = b.new_disk(2 * col.arity, col.slot)
            for i in range(col.m):
                p = col.v + 1 + i
                q = pos + i
                b.add((d, p), (0, q))
                b.add((0, 2 * K - q + 1), (d, 2 * col.arity - p + 1))
            _local_caps(b, d, col)
            pos += col.m
    for placed in nf.closed:
        comp = placed.part
        if isinstance(comp, LoopRight):
            b.loops_right += 1
        elif isinstance(comp, LoopLeft):
            b.loops_left += 1
        else:
            _place_closed_pair(b, comp)
    return b.done()


def _collect_row(b, columns):
    """Place one closed row's disks and local caps; per strand position
    return the emitting and receiving disk ends, or None for an identity
    strand that routes straight through."""
    ends = {}
    pos = 1
    for col in columns:
        if isinstance(col, IdGroup):
            for i in range(col.k):
                ends[pos + i] = None
            pos += col.k
        else:
            k = col.arity
            d = b.new_disk(2 * k, col.slot)
            for i in range(col.m):
                p = col.v + 1 + i
                ends[pos + i] = ((d, p), (d, 2 * k - p + 1))
            _local_caps(b, d, col)
            pos += col.m
    return ends


def _place_closed_pair(b, comp):
    """Two rows tied into n loops.  At each position the rows are joined
    straight through the middle, and an arc wraps around the right (kind
    tau) or the left.  Ring depths count outermost-first across the whole
    component, one concentric family no matter how many disks it touches.
    An identity strand facing a disk collapses its ring onto that disk as a
    same-disk cap, but the ring still encircles everything at deeper
    depths, so it keeps its place in the family and is flagged; two
    identity strands facing each other are a bare loop."""
    n = comp.n
    side = "right" if comp.kind == "tau" else "left"
    top = _collect_row(b, comp.top)
    bottom = _collect_row(b, comp.bottom)
    order = range(1, n + 1) if comp.kind == "tau" else range(n, 0, -1)
    arc = 0
    for p in order:
        t, u = top[p], bottom[p]
        if t is None and u is None:
            if side == "right":
                b.loops_right += 1
            else:
                b.loops_left += 1
        elif t is not None and u is not None:
            b.add(u[0], t[1])
            b.add(t[0], u[1], CapMark(side, arc))
            arc += 1
        else:
            e = t if t is not None else u
            b.add(e[0], e[1], CapMark(side, arc, ring=True))
            arc += 1


def decompose_closed(d):
    """Split a closed internally connected drawing at its outermost arc.

    Returns (kind, n, t1, t2): kind is "tau" when the outermost arc is a
    right cap and "tau-op" when it is left, n the number of arc pairs, and
    t1, t2 terms for the upper and lower open rows.  Closing t1 against t2
    with the matching n-strand closure rebuilds a tangle with the same
    normal form as the input drawing.

    The ring annotations carry the whole split: each inter-disk arc emits
    from an upper-row disk and lands on a lower-row disk, the straight
    partners run the other way, and the depth order is the strand order
    (outermost ring leftmost for a right closure, rightmost for a left
    one).  A ring-flagged self-cap is a closure strand one of whose rows
    runs an identity, so it contributes a strand position with the disk on
    the side its arcs pin it to and an identity strand across from it.
    Unflagged same-disk caps are the disk's own hugging caps and count
    toward its cap tally, not toward n.
    """
    from .normal import _row_term

    bad = validate_drawn(d)
    if bad:
        raise ValueError("drawing is not well formed: " + "; ".join(bad))
    if d.external.points:
        raise ValueError("tangle is not closed")
    if d.loops_right or d.loops_left:
        raise ValueError("not internally connected: bare loops present")
    partners = {}
    for s in d.strings:
        partners.setdefault(s.tail[0], set()).add(s.head[0])
        partners.setdefault(s.head[0], set()).add(s.tail[0])
    internal = {disk.ident for disk in d.disks if disk.ident != 0}
    groups = _closed_components(d, partners)
    if len(groups) != 1 or groups[0] != internal:
        raise ValueError("not internally connected")
    if len(internal) < 2:
        raise ValueError("fewer than two internal disks")

    marked = sorted(
        (mark.depth, idx) for idx, mark in d.caps.items()
        if d.strings[idx].tail[0] != d.strings[idx].head[0] or mark.ring)
    arcs = [(dep, idx) for dep, idx in marked
            if d.strings[idx].tail[0] != d.strings[idx].head[0]]
    if not arcs:
        raise ValueError("no arc between two disks present")
    kind = "tau" if d.caps[marked[0][1]].side == "right" else "tau-op"
    n = len(marked)

    up_disks, low_disks = set(), set()
    for _, idx in arcs:
        up_disks.add(d.strings[idx].tail[0])
        low_disks.add(d.strings[idx].head[0])
    clash = up_disks & low_disks
    if clash:
        raise ValueError(
            f"disks {sorted(clash)} sit on both sides of the split")

    seq = marked if kind == "tau" else list(reversed(marked))
    upper, lower = {}, {}
    id_upper, id_lower = set(), set()
    for pos, (_, idx) in enumerate(seq):
        s = d.strings[idx]
        if s.tail[0] != s.head[0]:
            upper.setdefault(s.tail[0], []).append((pos, s.tail[1]))
            lower.setdefault(s.head[0], []).append((pos, s.head[1]))
        elif s.tail[0] in up_disks:
            upper.setdefault(s.tail[0], []).append((pos, s.tail[1]))
            id_lower.add(pos)
        elif s.tail[0] in low_disks:
            lower.setdefault(s.tail[0], []).append((pos, s.head[1]))
            id_upper.add(pos)
        else:
            raise ValueError(
                f"ring cap on disk {s.tail[0]}, which no arc places")
    for idx, s in enumerate(d.strings):
        if (s.tail[0] == s.head[0] or 0 in (s.tail[0], s.head[0])
                or idx in d.caps):
            continue
        if s.tail[0] in upper or s.head[0] in lower:
            raise ValueError(f"string {idx} runs downward across the split")

    def self_caps(disk):
        v = w = 0
        for idx, mark in d.caps.items():
            s = d.strings[idx]
            if s.tail[0] == s.head[0] == disk and not mark.ring:
                if mark.side == "left":
                    v += 1
                else:
                    w += 1
        return v, w

    by_id = {disk.ident: disk for disk in d.disks}

    def build_row(side_map, ids, ascending):
        owner = {}
        for disk, hits in side_map.items():
            for pos, _pt in hits:
                owner[pos] = disk
        row = []
        pos = 0
        while pos < n:
            if pos in ids:
                run = 0
                while pos < n and pos in ids:
                    run += 1
                    pos += 1
                row.append(IdGroup(run))
                continue
            disk = owner.get(pos)
            if disk is None:
                raise ValueError(f"strand {pos} is covered by no ring")
            hits = sorted(side_map[disk])
            if [h[0] for h in hits] != list(range(pos, pos + len(hits))):
                raise ValueError(
                    f"disk {disk} strands are interleaved with another disk")
            points = [h[1] for h in hits]
            if points != sorted(points, reverse=not ascending):
                raise ValueError(f"disk {disk} strands are twisted")
            k = by_id[disk].points // 2
            v, w = self_caps(disk)
            if len(hits) + v + w != k:
                raise ValueError(
                    f"disk {disk} has {len(hits)} strands and {v}+{w} caps "
                    f"for {k} string pairs")
            row.append(DiskEntry(d.slots.get(disk, f"d{disk}"),
                                 k, len(hits), v, w))
            pos += len(hits)
        return tuple(row)

    t1 = _row_term(build_row(upper, id_upper, ascending=True))
    t2 = _row_term(build_row(lower, id_lower, ascending=False))
    return kind, n, t1, t2
