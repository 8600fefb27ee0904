"""Straight-line evaluation plans compiled from standard form.

A plan is a list of register assignments, one per line, ending in a return:

    %0 = load_slot x 2
    %1 = apply_t 2 %0
    %2 = load_id 1
    %3 = tensor_q 1 1 %1 %2
    return %3

Registers hold operators at some level (``load_id n`` and ``tensor_q``
results at level m+n) or closed central values (traces and loops, level 0).
``apply_t k`` and ``apply_t_op k`` take a level-k operator down to level k-1
by capping on the right resp. left.  ``multiply_scalars`` needs at least two
closed registers; a single closed value is used as is.  A closed value joins
the open row at its gap: ``tensor_q 0 m`` puts it left of an operator,
``tensor_q m 0`` right of one, and a value floating between strands enters
the tensor fold mid-row.  The side matters on backends where the two algebra
actions differ, so the compiler never moves a value across a strand.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .normal import IdGroup, LoopLeft, LoopRight, row_arity


@dataclass(frozen=True)
class Reg:
    i: int

    def __str__(self):
        return f"%{self.i}"


@dataclass(frozen=True)
class Instr:
    dest: int | None  # None marks the final return
    op: str
    args: tuple

    def render(self):
        parts = " ".join(str(a) for a in self.args)
        if self.dest is None:
            return f"return {parts}"
        body = f"{self.op} {parts}" if parts else self.op
        return f"%{self.dest} = {body}"


@dataclass(frozen=True)
class EvaluationPlan:
    instrs: tuple

    def render(self):
        return "\n".join(i.render() for i in self.instrs) + "\n"


class PlanError(ValueError):
    pass


# op name -> (argument pattern, ...) where "i" is an int literal, "s" a slot
# name, "r" a register; "r+" greedily takes the rest.
_OPS = {
    "load_slot": ("s", "i"),
    "load_id": ("i",),
    "apply_t": ("i", "r"),
    "apply_t_op": ("i", "r"),
    "tensor_q": ("i", "i", "r", "r"),
    "trace_right": ("i", "r", "r"),
    "trace_left": ("i", "r", "r"),
    "loop_right": (),
    "loop_left": (),
    "multiply_scalars": ("r+",),
}


def emit_plan(nf):
    """Compile a standard form into an evaluation plan."""
    instrs = []
    counter = itertools.count()

    def emit(op, *args):
        r = next(counter)
        instrs.append(Instr(r, op, tuple(args)))
        return r

    def column_reg(col):
        if isinstance(col, IdGroup):
            return emit("load_id", col.k)
        r = emit("load_slot", col.slot, col.arity)
        for k in range(col.arity, col.m + col.v, -1):
            r = emit("apply_t", k, Reg(r))
        for k in range(col.m + col.v, col.m, -1):
            r = emit("apply_t_op", k, Reg(r))
        return r

    def row_reg(columns):
        if not columns:
            return emit("load_id", 0)
        acc = column_reg(columns[0])
        acc_ar = row_arity(columns[:1])
        for col in columns[1:]:
            ar = col.k if isinstance(col, IdGroup) else col.m
            acc = emit("tensor_q", acc_ar, ar, Reg(acc), Reg(column_reg(col)))
            acc_ar += ar
        return acc

    def closed_reg(part):
        if isinstance(part, LoopRight):
            return emit("loop_right")
        if isinstance(part, LoopLeft):
            return emit("loop_left")
        a = row_reg(part.top)
        b = row_reg(part.bottom)
        op = "trace_right" if part.kind == "tau" else "trace_left"
        return emit(op, part.n, Reg(a), Reg(b))

    # one value register per occupied gap; values sharing a gap commute
    by_gap = {}
    for p in nf.closed:
        by_gap.setdefault(p.gap, []).append(closed_reg(p.part))
    gap_reg = {
        g: rs[0] if len(rs) == 1 else emit("multiply_scalars", *(Reg(r) for r in rs))
        for g, rs in by_gap.items()
    }

    acc = None
    acc_ar = 0

    def absorb(reg, ar):
        nonlocal acc, acc_ar
        if acc is None:
            acc, acc_ar = reg, ar
        else:
            acc = emit("tensor_q", acc_ar, ar, Reg(acc), Reg(reg))
            acc_ar += ar

    at = 0
    for col in nf.columns:
        if at in gap_reg:
            absorb(gap_reg.pop(at), 0)
        if isinstance(col, IdGroup):
            left = at
            for cut in sorted(g for g in gap_reg if at < g < at + col.k):
                absorb(emit("load_id", cut - left), cut - left)
                absorb(gap_reg.pop(cut), 0)
                left = cut
            if at + col.k > left:
                absorb(emit("load_id", at + col.k - left), at + col.k - left)
            at += col.k
        else:
            absorb(column_reg(col), col.m)
            at += col.m
    if at in gap_reg:
        absorb(gap_reg.pop(at), 0)
    assert not gap_reg, "component gap inside a disk strand fan"
    if acc is None:
        acc = emit("load_id", 0)
    instrs.append(Instr(None, "return", (Reg(acc),)))
    return EvaluationPlan(tuple(instrs))


def validate_plan(plan):
    """Return error strings: shape of each line, def-before-use, one return."""
    errors = []
    defined = set()
    for lineno, ins in enumerate(plan.instrs, 1):
        last = lineno == len(plan.instrs)
        if ins.dest is None:
            if not last:
                errors.append(f"line {lineno}: return before end")
            if len(ins.args) != 1 or not isinstance(ins.args[0], Reg):
                errors.append(f"line {lineno}: return takes one register")
            elif ins.args[0].i not in defined:
                errors.append(f"line {lineno}: {ins.args[0]} undefined")
            continue
        pattern = _OPS.get(ins.op)
        if pattern is None:
            errors.append(f"line {lineno}: unknown op {ins.op!r}")
            continue
        args = list(ins.args)
        if pattern and pattern[-1] == "r+":
            fixed = pattern[:-1]
            if len(args) < len(fixed) + 2:
                errors.append(f"line {lineno}: {ins.op} needs >= 2 registers")
            shapes = list(fixed) + ["r"] * (len(args) - len(fixed))
        else:
            if len(args) != len(pattern):
                errors.append(
                    f"line {lineno}: {ins.op} takes {len(pattern)} args, got {len(args)}")
                continue
            shapes = list(pattern)
        for a, s in zip(args, shapes):
            if s == "i" and not isinstance(a, int):
                errors.append(f"line {lineno}: expected integer, got {a!r}")
            elif s == "r":
                if not isinstance(a, Reg):
                    errors.append(f"line {lineno}: expected register, got {a!r}")
                elif a.i not in defined:
                    errors.append(f"line {lineno}: {a} used before assignment")
            elif s == "s" and not isinstance(a, str):
                errors.append(f"line {lineno}: expected name, got {a!r}")
        if ins.dest in defined:
            errors.append(f"line {lineno}: %{ins.dest} reassigned")
        defined.add(ins.dest)
    if not plan.instrs or plan.instrs[-1].dest is not None:
        errors.append("plan does not end in a return")
    return errors


def parse_plan(text):
    instrs = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        words = line.split()
        if words[0] == "return":
            dest, op, rest = None, "return", words[1:]
        else:
            if len(words) < 3 or words[1] != "=" or not words[0].startswith("%"):
                raise PlanError(f"line {lineno}: expected '%k = op ...'")
            try:
                dest = int(words[0][1:])
            except ValueError:
                raise PlanError(f"line {lineno}: bad register {words[0]!r}") from None
            op, rest = words[2], words[3:]
        args = []
        for w in rest:
            if w.startswith("%"):
                try:
                    args.append(Reg(int(w[1:])))
                except ValueError:
                    raise PlanError(f"line {lineno}: bad register {w!r}") from None
            else:
                try:
                    args.append(int(w))
                except ValueError:
                    args.append(w)
        instrs.append(Instr(dest, op, tuple(args)))
    plan = EvaluationPlan(tuple(instrs))
    errors = validate_plan(plan)
    if errors:
        raise PlanError(errors[0])
    return plan
