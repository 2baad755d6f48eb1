"""Symbolic permission accounting for translated programs, without a solver.

The checker walks each method body over a set of symbolic states.  A
state tracks held field permissions (whole permissions only), a multiset
of folded predicate instances, the heap values of held locations, a list
of assumed boolean facts, the local store, and an equality substitution
used to propagate facts like `q.length == 0` into later queries.

A three-valued `decide` settles guards: literal after normalization,
assumed in the path, or unknown.  Producing a conditional assertion with
an unknown guard forks the state; consuming one reports an undecidable
branch instead, because exhaling must pick a side.  Predicate instances
never unroll on their own: only explicit fold/unfold statements move
between an instance and its body, which is the point of the exercise.

Normalization evaluates the sequence helpers (`drop_last`, `take_last`)
and all sequence/arithmetic/constructor operators on literal operands,
so programs over concrete sequences are fully decidable.

On a failed access the checker reports once and then repairs the state
(adds the missing permission or carries on past the missing instance) so
one mistake does not cascade into a wall of noise.
"""

from __future__ import annotations

import itertools
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum

from . import viper_ast as V
from .diagnostics import (Category, Diagnostic, Severity, error, obligation,
                          warning)

MAX_PATHS = 32

# -- symbolic values -----------------------------------------------------------


class SymVal:
    pass


@dataclass(frozen=True)
class Sym(SymVal):
    id: int
    hint: str = field(default="", compare=False, repr=False)


@dataclass(frozen=True)
class Lit(SymVal):
    value: object  # int or bool


@dataclass(frozen=True)
class Ctor(SymVal):
    name: str
    args: tuple = ()


@dataclass(frozen=True)
class SeqV(SymVal):
    elems: tuple = ()


@dataclass(frozen=True)
class App(SymVal):
    name: str
    args: tuple = ()


TRUE = Lit(True)
FALSE = Lit(False)

_COMMUTATIVE = ("==", "!=", "&&", "||")


def sym_str(v: SymVal) -> str:
    if isinstance(v, Sym):
        return v.hint if v.hint else f"_{v.id}"
    if isinstance(v, Lit):
        if isinstance(v.value, bool):
            return "true" if v.value else "false"
        return str(v.value)
    if isinstance(v, Ctor):
        return f"{v.name}(" + ", ".join(sym_str(a) for a in v.args) + ")"
    if isinstance(v, SeqV):
        if not v.elems:
            return "Seq[Int]()"
        return "Seq(" + ", ".join(sym_str(a) for a in v.elems) + ")"
    if isinstance(v, App):
        return f"{v.name}(" + ", ".join(sym_str(a) for a in v.args) + ")"
    raise TypeError(type(v).__name__)


# -- symbolic state --------------------------------------------------------------


@dataclass
class SymState:
    perms: set = field(default_factory=set)  # {(recv: SymVal, field: str)}
    preds: Counter = field(default_factory=Counter)  # {(name, args): n}
    heap: dict = field(default_factory=dict)  # {(recv, field): SymVal}
    path: list = field(default_factory=list)  # [normalized bool SymVal]
    store: dict = field(default_factory=dict)  # {var: SymVal}
    subst: dict = field(default_factory=dict)  # {sym id: SymVal}

    def clone(self) -> "SymState":
        return SymState(set(self.perms), Counter(self.preds),
                        dict(self.heap), list(self.path), dict(self.store),
                        dict(self.subst))


class _Mode(Enum):
    EXEC = "exec"  # reads require permission, writes go to the live heap
    CONSUME = "consume"  # reads hit a frozen snapshot, no permission needed
    PRODUCE = "produce"  # reads prefer live heap, unframed reads get a cache


@dataclass
class _ConsumeCtx:
    """What a failed consume should be reported as."""
    pred_category: Category
    what: str  # e.g. "fold CellSeg(...)" or "postcondition"


# -- checker ------------------------------------------------------------------------


class Checker:
    def __init__(self, program: V.ViperProgram, strict: bool = False):
        self.program = program
        self.strict = strict
        self.predicates = program.predicates()
        self.methods = program.methods()
        self.fields = set(program.fields())
        self.projections: dict[str, str] = {}  # proj name -> ctor name
        self.ctor_params: dict[str, list[str]] = {}
        self.siblings: dict[str, list[str]] = {}  # ctor -> all ctors of adt
        for adt in program.adts().values():
            names = [c.name for c in adt.ctors]
            for c in adt.ctors:
                self.ctor_params[c.name] = [p for p, _ in c.params]
                self.siblings[c.name] = names
                for p, _ in c.params:
                    self.projections[p] = c.name
        self._ids = itertools.count()
        self.diags: list[Diagnostic] = []

    def fresh(self, hint: str = "") -> Sym:
        return Sym(next(self._ids), hint)

    # -- normalization ------------------------------------------------------

    def norm(self, v: SymVal, st: SymState) -> SymVal:
        if isinstance(v, Sym):
            repl = st.subst.get(v.id)
            return v if repl is None else self.norm(repl, st)
        if isinstance(v, Lit):
            return v
        if isinstance(v, Ctor):
            return Ctor(v.name, tuple(self.norm(a, st) for a in v.args))
        if isinstance(v, SeqV):
            return SeqV(tuple(self.norm(a, st) for a in v.elems))
        if isinstance(v, App):
            args = tuple(self.norm(a, st) for a in v.args)
            return self._simplify(v.name, args)
        raise TypeError(type(v).__name__)

    def _simplify(self, name: str, args: tuple) -> SymVal:
        if name == "++":
            return self._concat(args)
        if name == "len" and isinstance(args[0], SeqV):
            return Lit(len(args[0].elems))
        if name == "index" and isinstance(args[0], SeqV):
            idx = args[1]
            if isinstance(idx, Lit) and isinstance(idx.value, int):
                if 0 <= idx.value < len(args[0].elems):
                    return args[0].elems[idx.value]
        if name == "drop" and isinstance(args[0], SeqV):
            k = args[1]
            if isinstance(k, Lit) and isinstance(k.value, int):
                return SeqV(args[0].elems[max(k.value, 0):])
        if name == "take" and isinstance(args[0], SeqV):
            k = args[1]
            if isinstance(k, Lit) and isinstance(k.value, int):
                return SeqV(args[0].elems[:max(k.value, 0)])
        if name in ("drop_last", "take_last") and isinstance(args[0], SeqV):
            elems = args[0].elems
            if elems:
                return SeqV(elems[:-1] if name == "drop_last" else elems[-1:])
        if name in ("+", "-", "*", "/") and all(
                isinstance(a, Lit) and isinstance(a.value, int)
                for a in args):
            a, b = args[0].value, args[1].value
            if name == "+":
                return Lit(a + b)
            if name == "-":
                return Lit(a - b)
            if name == "*":
                return Lit(a * b)
            if b != 0:
                q = abs(a) // abs(b)  # truncating division
                return Lit(q if (a < 0) == (b < 0) else -q)
        if name == "neg" and isinstance(args[0], Lit) \
                and isinstance(args[0].value, int):
            return Lit(-args[0].value)
        if name in ("<", "<=", ">", ">=") and all(
                isinstance(a, Lit) and isinstance(a.value, int)
                for a in args):
            a, b = args[0].value, args[1].value
            return Lit({"<": a < b, "<=": a <= b,
                        ">": a > b, ">=": a >= b}[name])
        if name == "==":
            return self._norm_eq(args[0], args[1])
        if name == "!=":
            return self._simplify("not", (self._norm_eq(args[0], args[1]),))
        if name == "not":
            (a,) = args
            if isinstance(a, Lit):
                return Lit(not a.value)
            if isinstance(a, App) and a.name == "not":
                return a.args[0]
            return App("not", args)
        if name == "&&":
            parts = []
            for a in _flat(args, "&&"):
                if a == FALSE:
                    return FALSE
                if a != TRUE and a not in parts:
                    parts.append(a)
            if not parts:
                return TRUE
            if len(parts) == 1:
                return parts[0]
            return App("&&", tuple(sorted(parts, key=repr)))
        if name == "||":
            parts = []
            for a in _flat(args, "||"):
                if a == TRUE:
                    return TRUE
                if a != FALSE and a not in parts:
                    parts.append(a)
            if not parts:
                return FALSE
            if len(parts) == 1:
                return parts[0]
            return App("||", tuple(sorted(parts, key=repr)))
        if name == "ite":
            cond, then, els = args
            if isinstance(cond, Lit):
                return then if cond.value else els
            if then == els:
                return then
        if name.startswith("is#"):
            ctor = name[3:]
            if isinstance(args[0], Ctor):
                return Lit(args[0].name == ctor)
        if name.startswith("proj#"):
            pname = name[5:]
            target = args[0]
            if isinstance(target, Ctor) and target.args:
                params = self.ctor_params.get(target.name, [])
                if pname in params:
                    return target.args[params.index(pname)]
        if name in _COMMUTATIVE:
            args = tuple(sorted(args, key=repr))
        return App(name, args)

    def _concat(self, args: tuple) -> SymVal:
        parts: list[SymVal] = []
        for a in _flat(args, "++"):
            if isinstance(a, SeqV):
                if not a.elems:
                    continue
                if parts and isinstance(parts[-1], SeqV):
                    parts[-1] = SeqV(parts[-1].elems + a.elems)
                    continue
            parts.append(a)
        if not parts:
            return SeqV()
        if len(parts) == 1:
            return parts[0]
        return App("++", tuple(parts))

    def _norm_eq(self, a: SymVal, b: SymVal) -> SymVal:
        if a == b:
            return TRUE
        if isinstance(a, Lit) and isinstance(b, Lit):
            return Lit(a.value == b.value)
        if isinstance(a, Ctor) and isinstance(b, Ctor):
            if a.name != b.name or len(a.args) != len(b.args):
                return FALSE
            eqs = tuple(self._norm_eq(x, y) for x, y in zip(a.args, b.args))
            return self._simplify("&&", eqs)
        if isinstance(a, SeqV) and isinstance(b, SeqV):
            if len(a.elems) != len(b.elems):
                return FALSE
            eqs = tuple(self._norm_eq(x, y)
                        for x, y in zip(a.elems, b.elems))
            return self._simplify("&&", eqs)
        if isinstance(a, SeqV) != isinstance(b, SeqV):
            # a literal sequence never equals a strictly longer concat
            other = b if isinstance(a, SeqV) else a
            lit = a if isinstance(a, SeqV) else b
            if isinstance(other, App) and other.name == "++":
                known = sum(len(p.elems) for p in other.args
                            if isinstance(p, SeqV))
                if known > len(lit.elems):
                    return FALSE
        return App("==", tuple(sorted((a, b), key=repr)))

    # -- deciding and assuming ------------------------------------------------

    def decide(self, st: SymState, v: SymVal) -> bool | None:
        n = self.norm(v, st)
        if isinstance(n, Lit):
            return bool(n.value)
        facts = [self.norm(f, st) for f in st.path]
        if n in facts:
            return True
        neg = self._simplify("not", (n,))
        if neg in facts:
            return False
        if isinstance(n, App) and n.name == "not" and n.args[0] in facts:
            return False
        return None

    def assume(self, st: SymState, v: SymVal) -> bool:
        """Add a fact; returns False when the state became infeasible."""
        n = self.norm(v, st)
        if isinstance(n, Lit):
            return bool(n.value)
        if isinstance(n, App) and n.name == "&&":
            return all(self.assume(st, part) for part in n.args)
        if self.decide(st, n) is False:
            return False
        st.path.append(n)
        self._refine(st, n)
        # a refinement can fold an earlier fact to a constant; a state
        # with a false fact is infeasible, not merely undecided
        return all(self.norm(f, st) != FALSE for f in st.path)

    def _refine(self, st: SymState, n: SymVal) -> None:
        if not isinstance(n, App):
            return
        if n.name == "==":
            a, b = n.args
            for lhs, rhs in ((a, b), (b, a)):
                if isinstance(lhs, Sym) and lhs.id not in st.subst:
                    rhs_n = self.norm(rhs, st)
                    if not _occurs(lhs, rhs_n):
                        st.subst[lhs.id] = rhs_n
                        return
        elif n.name.startswith("is#"):
            ctor = n.name[3:]
            target = n.args[0]
            if isinstance(target, Sym) and target.id not in st.subst:
                params = self.ctor_params.get(ctor)
                if params is not None:
                    payload = tuple(self.fresh(p) for p in params)
                    st.subst[target.id] = Ctor(ctor, payload)
        elif n.name == "not":
            inner = n.args[0]
            if isinstance(inner, App) and inner.name.startswith("is#"):
                ctor = inner.name[3:]
                target = inner.args[0]
                others = [c for c in self.siblings.get(ctor, [])
                          if c != ctor]
                if isinstance(target, Sym) and len(others) == 1 \
                        and target.id not in st.subst:
                    other = others[0]
                    payload = tuple(self.fresh(p)
                                    for p in self.ctor_params[other])
                    st.subst[target.id] = Ctor(other, payload)

    # -- permission and instance bookkeeping -----------------------------------

    def _find_perm(self, st: SymState, rec: SymVal, fld: str):
        rec_n = self.norm(rec, st)
        for entry in st.perms:
            if entry[1] == fld and self.norm(entry[0], st) == rec_n:
                return entry
        return None

    def _find_instance(self, st: SymState, name: str, args: tuple):
        args_n = tuple(self.norm(a, st) for a in args)
        for key, count in st.preds.items():
            if count <= 0 or key[0] != name:
                continue
            if tuple(self.norm(a, st) for a in key[1]) == args_n:
                return key
        return None

    def _heap_read(self, st: SymState, heap: dict, rec: SymVal, fld: str,
                   cache_live: bool) -> SymVal:
        rec_n = self.norm(rec, st)
        for (r, f), val in heap.items():
            if f == fld and self.norm(r, st) == rec_n:
                return val
        val = self.fresh(fld)
        if cache_live:
            heap[(rec_n, fld)] = val
        return val

    # -- expression evaluation ---------------------------------------------------

    def eval(self, st: SymState, e: V.VExpr, store: dict, mode: _Mode,
             heap: dict, span=None) -> SymVal:
        if isinstance(e, V.IntLit):
            return Lit(e.value)
        if isinstance(e, V.BoolLit):
            return Lit(e.value)
        if isinstance(e, V.Var):
            if e.name not in store:
                self._err(Category.TRANSLATION,
                          f"use of undeclared variable '{e.name}'", span)
                store[e.name] = self.fresh(e.name)
            return store[e.name]
        if isinstance(e, V.FieldAcc):
            base = self.eval(st, e.base, store, mode, heap, span)
            if e.fieldname in self.projections \
                    and e.fieldname not in self.fields:
                return self.norm(App(f"proj#{e.fieldname}", (base,)), st)
            return self._read_field(st, base, e.fieldname, e, mode, heap,
                                    span)
        if isinstance(e, V.IsTest):
            base = self.eval(st, e.base, store, mode, heap, span)
            return self.norm(App(f"is#{e.ctor}", (base,)), st)
        if isinstance(e, V.CtorCall):
            return Ctor(e.name, tuple(self.eval(st, a, store, mode, heap,
                                                span) for a in e.args))
        if isinstance(e, V.FunApp):
            args = tuple(self.eval(st, a, store, mode, heap, span)
                         for a in e.args)
            return self.norm(App(e.name, args), st)
        if isinstance(e, V.SeqLit):
            return SeqV(tuple(self.eval(st, a, store, mode, heap, span)
                              for a in e.items))
        if isinstance(e, V.SeqLen):
            return self.norm(App("len", (self.eval(st, e.seq, store, mode,
                                                   heap, span),)), st)
        if isinstance(e, V.BinOp):
            left = self.eval(st, e.left, store, mode, heap, span)
            right = self.eval(st, e.right, store, mode, heap, span)
            return self.norm(App(e.op, (left, right)), st)
        if isinstance(e, V.UnOp):
            inner = self.eval(st, e.operand, store, mode, heap, span)
            op = "not" if e.op == "!" else "neg"
            return self.norm(App(op, (inner,)), st)
        if isinstance(e, V.SeqIndex):
            return self.norm(App("index", (
                self.eval(st, e.seq, store, mode, heap, span),
                self.eval(st, e.index, store, mode, heap, span))), st)
        if isinstance(e, V.SeqDrop):
            return self.norm(App("drop", (
                self.eval(st, e.seq, store, mode, heap, span),
                self.eval(st, e.lo, store, mode, heap, span))), st)
        if isinstance(e, V.SeqTake):
            return self.norm(App("take", (
                self.eval(st, e.seq, store, mode, heap, span),
                self.eval(st, e.hi, store, mode, heap, span))), st)
        if isinstance(e, V.CondExpr):
            cond = self.eval(st, e.cond, store, mode, heap, span)
            return self.norm(App("ite", (
                cond,
                self.eval(st, e.then, store, mode, heap, span),
                self.eval(st, e.els, store, mode, heap, span))), st)
        if isinstance(e, V.LetExpr):
            inner = dict(store)
            inner[e.name] = self.eval(st, e.bound, store, mode, heap, span)
            return self.eval(st, e.body, inner, mode, heap, span)
        if isinstance(e, V.Unfolding):
            return self.eval(st, e.body, store, mode, heap, span)
        raise TypeError(f"cannot evaluate {type(e).__name__}")

    def _read_field(self, st: SymState, base: SymVal, fld: str,
                    src: V.FieldAcc, mode: _Mode, heap: dict,
                    span) -> SymVal:
        if mode is _Mode.EXEC:
            if self._find_perm(st, base, fld) is None:
                self._err(Category.PERMISSION,
                          f"no permission to read {V.expr_str(src)}", span)
                base_n = self.norm(base, st)
                st.perms.add((base_n, fld))  # repair, keep going
            return self._heap_read(st, st.heap, base, fld, cache_live=True)
        if mode is _Mode.CONSUME:
            return self._heap_read(st, heap, base, fld, cache_live=True)
        # produce: prefer live heap, never materialize unframed locations
        if self._find_perm(st, base, fld) is not None:
            return self._heap_read(st, st.heap, base, fld, cache_live=True)
        return self._heap_read(st, heap, base, fld, cache_live=True)

    # -- produce / consume -------------------------------------------------------

    def produce(self, st: SymState, a: V.VAssertion,
                store: dict) -> list[SymState]:
        scratch: dict = {}
        return self._produce(st, a, store, scratch)

    def _produce(self, st: SymState, a: V.VAssertion, store: dict,
                 scratch: dict) -> list[SymState]:
        if isinstance(a, V.Pure):
            val = self.eval(st, a.expr, store, _Mode.PRODUCE, scratch,
                            a.span)
            return [st] if self.assume(st, val) else []
        if isinstance(a, V.Acc):
            base = self.eval(st, a.loc.base, store, _Mode.PRODUCE, scratch,
                             a.span)
            fld = a.loc.fieldname
            if self._find_perm(st, base, fld) is not None:
                return []  # a second whole permission cannot exist
            base_n = self.norm(base, st)
            st.perms.add((base_n, fld))
            st.heap[(base_n, fld)] = self.fresh(fld)
            return [st]
        if isinstance(a, V.PredApp):
            args = tuple(self.norm(
                self.eval(st, x, store, _Mode.PRODUCE, scratch, a.span), st)
                for x in a.args)
            st.preds[(a.name, args)] += 1
            return [st]
        if isinstance(a, V.AndA):
            states = self._produce(st, a.left, store, scratch)
            out: list[SymState] = []
            for s in states:
                out.extend(self._produce(s, a.right, store, scratch))
            return out
        if isinstance(a, V.CondA):
            cond = self.eval(st, a.cond, store, _Mode.PRODUCE, scratch,
                             a.span)
            verdict = self.decide(st, cond)
            if verdict is True:
                return self._produce(st, a.then, store, scratch)
            if verdict is False:
                return self._produce(st, a.els, store, scratch)
            other = st.clone()
            out = []
            if self.assume(st, cond):
                out.extend(self._produce(st, a.then, store, scratch))
            if self.assume(other, App("not", (cond,))):
                out.extend(self._produce(other, a.els, store, scratch))
            return out
        if isinstance(a, V.LetA):
            inner = dict(store)
            inner[a.name] = self.eval(st, a.bound, store, _Mode.PRODUCE,
                                      scratch, a.span)
            return self._produce(st, a.body, inner, scratch)
        raise TypeError(f"cannot produce {type(a).__name__}")

    def consume(self, st: SymState, a: V.VAssertion, store: dict,
                ctx: _ConsumeCtx, span=None) -> bool:
        """Exhale `a` from `st`; heap reads see a snapshot taken now.
        Reports failures and repairs; returns False if anything failed."""
        snapshot = dict(st.heap)
        return self._consume(st, a, store, snapshot, ctx, span)

    def _consume(self, st: SymState, a: V.VAssertion, store: dict,
                 snapshot: dict, ctx: _ConsumeCtx, span) -> bool:
        at = a.span or span
        if isinstance(a, V.Pure):
            val = self.eval(st, a.expr, store, _Mode.CONSUME, snapshot, at)
            verdict = self.decide(st, val)
            if verdict is True:
                return True
            if verdict is False:
                self._err(ctx.pred_category,
                          f"{ctx.what}: condition {V.expr_str(a.expr)} "
                          f"is false", at)
                return False
            if self.strict:
                self._err(Category.PURE_OBLIGATION,
                          f"{ctx.what}: cannot establish "
                          f"{V.expr_str(a.expr)}", at)
                return False
            self.diags.append(obligation(
                f"{ctx.what}: {V.expr_str(a.expr)} is assumed, not proved",
                at))
            return True
        if isinstance(a, V.Acc):
            base = self.eval(st, a.loc.base, store, _Mode.CONSUME, snapshot,
                             at)
            entry = self._find_perm(st, base, a.loc.fieldname)
            if entry is None:
                self._err(Category.PERMISSION,
                          f"{ctx.what}: no permission to give up "
                          f"{V.expr_str(a.loc)}", at)
                return False
            st.perms.discard(entry)
            st.heap.pop(entry, None)
            return True
        if isinstance(a, V.PredApp):
            args = tuple(self.eval(st, x, store, _Mode.CONSUME, snapshot,
                                   at) for x in a.args)
            key = self._find_instance(st, a.name, args)
            if key is None:
                self._err(ctx.pred_category,
                          f"{ctx.what}: missing predicate instance "
                          f"{a.name}("
                          + ", ".join(sym_str(self.norm(x, st))
                                      for x in args) + ")", at)
                return False
            st.preds[key] -= 1
            if st.preds[key] == 0:
                del st.preds[key]
            return True
        if isinstance(a, V.AndA):
            ok = self._consume(st, a.left, store, snapshot, ctx, span)
            return self._consume(st, a.right, store, snapshot, ctx,
                                 span) and ok
        if isinstance(a, V.CondA):
            cond = self.eval(st, a.cond, store, _Mode.CONSUME, snapshot, at)
            verdict = self.decide(st, cond)
            if verdict is None:
                self._err(Category.UNDECIDABLE_BRANCH,
                          f"{ctx.what}: cannot decide "
                          f"{V.expr_str(a.cond)} to pick a branch", at)
                return False
            branch = a.then if verdict else a.els
            return self._consume(st, branch, store, snapshot, ctx, span)
        if isinstance(a, V.LetA):
            inner = dict(store)
            inner[a.name] = self.eval(st, a.bound, store, _Mode.CONSUME,
                                      snapshot, at)
            return self._consume(st, a.body, inner, snapshot, ctx, span)
        raise TypeError(f"cannot consume {type(a).__name__}")

    # -- statements ------------------------------------------------------------------

    def exec_stmt(self, st: SymState, s: V.VStmt) -> list[SymState]:
        if isinstance(s, V.CommentS):
            return [st]
        if isinstance(s, V.VarDeclS):
            if s.init is None:
                st.store[s.name] = self.fresh(s.name)
            else:
                st.store[s.name] = self.eval(st, s.init, st.store,
                                             _Mode.EXEC, st.heap, s.span)
            return [st]
        if isinstance(s, V.AssignS):
            value = self.eval(st, s.value, st.store, _Mode.EXEC, st.heap,
                              s.span)
            if isinstance(s.target, V.Var):
                st.store[s.target.name] = value
                return [st]
            assert isinstance(s.target, V.FieldAcc)
            base = self.eval(st, s.target.base, st.store, _Mode.EXEC,
                             st.heap, s.span)
            entry = self._find_perm(st, base, s.target.fieldname)
            if entry is None:
                self._err(Category.PERMISSION,
                          f"no permission to write {V.expr_str(s.target)}",
                          s.span)
                entry = (self.norm(base, st), s.target.fieldname)
                st.perms.add(entry)  # repair, keep going
            st.heap[entry] = value
            return [st]
        if isinstance(s, V.NewS):
            ref = self.fresh(s.target)
            st.store[s.target] = ref
            for fld in s.fields:
                st.perms.add((ref, fld))
                st.heap[(ref, fld)] = self.fresh(fld)
            return [st]
        if isinstance(s, V.IfS):
            cond = self.eval(st, s.cond, st.store, _Mode.EXEC, st.heap,
                             s.span)
            verdict = self.decide(st, cond)
            if verdict is True:
                return self._exec_block(st, s.then)
            if verdict is False:
                return self._exec_block(st, s.els)
            other = st.clone()
            out: list[SymState] = []
            if self.assume(st, cond):
                out.extend(self._exec_block(st, s.then))
            if self.assume(other, App("not", (cond,))):
                out.extend(self._exec_block(other, s.els))
            return out
        if isinstance(s, V.FoldS):
            return self._fold(st, s)
        if isinstance(s, V.UnfoldS):
            return self._unfold(st, s)
        if isinstance(s, V.CallS):
            return self._call(st, s)
        raise TypeError(f"cannot execute {type(s).__name__}")

    def _exec_block(self, st: SymState, stmts: list[V.VStmt]
                    ) -> list[SymState]:
        states = [st]
        for s in stmts:
            nxt: list[SymState] = []
            for cur in states:
                nxt.extend(self.exec_stmt(cur, s))
            states = self._capped(nxt, s)
        return states

    def _capped(self, states: list[SymState], at) -> list[SymState]:
        if len(states) <= MAX_PATHS:
            return states
        span = getattr(at, "span", None)
        msg = (f"more than {MAX_PATHS} symbolic paths; "
               f"dropping the excess, the verdict may be incomplete")
        if self.strict:
            self._err(Category.UNDECIDABLE_BRANCH, msg, span)
        else:
            self.diags.append(warning(Category.UNDECIDABLE_BRANCH, msg,
                                      span))
        return states[:MAX_PATHS]

    def _pred_binding(self, decl: V.PredicateDecl, st: SymState,
                      args: list[V.VExpr], span) -> dict:
        vals = [self.eval(st, a, st.store, _Mode.EXEC, st.heap, span)
                for a in args]
        return dict(zip((n for n, _ in decl.params), vals))

    def _fold(self, st: SymState, s: V.FoldS) -> list[SymState]:
        decl = self.predicates.get(s.pred.name)
        if decl is None:
            self._err(Category.FOLD_MISMATCH,
                      f"fold of unknown predicate '{s.pred.name}'", s.span)
            return [st]
        if len(s.pred.args) != len(decl.params):
            self._err(Category.FOLD_MISMATCH,
                      f"{s.pred.name} takes {len(decl.params)} arguments",
                      s.span)
            return [st]
        binding = self._pred_binding(decl, st, s.pred.args, s.span)
        ctx = _ConsumeCtx(Category.FOLD_MISMATCH,
                          f"fold {V.expr_str(V.FunApp(s.pred.name, s.pred.args))}")
        self.consume(st, decl.body, binding, ctx, s.span)
        args = tuple(self.norm(binding[n], st) for n, _ in decl.params)
        st.preds[(s.pred.name, args)] += 1
        return [st]

    def _unfold(self, st: SymState, s: V.UnfoldS) -> list[SymState]:
        decl = self.predicates.get(s.pred.name)
        if decl is None:
            self._err(Category.FOLD_MISMATCH,
                      f"unfold of unknown predicate '{s.pred.name}'",
                      s.span)
            return [st]
        if len(s.pred.args) != len(decl.params):
            self._err(Category.FOLD_MISMATCH,
                      f"{s.pred.name} takes {len(decl.params)} arguments",
                      s.span)
            return [st]
        binding = self._pred_binding(decl, st, s.pred.args, s.span)
        args = tuple(self.norm(v, st) for v in binding.values())
        key = self._find_instance(st, s.pred.name, args)
        if key is None:
            self._err(Category.FOLD_MISMATCH,
                      f"unfold: missing predicate instance "
                      f"{s.pred.name}("
                      + ", ".join(sym_str(a) for a in args) + ")", s.span)
        else:
            st.preds[key] -= 1
            if st.preds[key] == 0:
                del st.preds[key]
        return self.produce(st, decl.body, binding)

    def _call(self, st: SymState, s: V.CallS) -> list[SymState]:
        decl = self.methods.get(s.method)
        if decl is None:
            self._err(Category.CONTRACT_VIOLATION,
                      f"call to unknown method '{s.method}'", s.span)
            return [st]
        if len(s.args) != len(decl.params):
            self._err(Category.CONTRACT_VIOLATION,
                      f"{s.method} takes {len(decl.params)} arguments, "
                      f"got {len(s.args)}", s.span)
            return [st]
        if s.targets and len(s.targets) != len(decl.returns):
            self._err(Category.CONTRACT_VIOLATION,
                      f"{s.method} returns {len(decl.returns)} values, "
                      f"{len(s.targets)} targets given", s.span)
            return [st]
        vals = [self.eval(st, a, st.store, _Mode.EXEC, st.heap, s.span)
                for a in s.args]
        binding = dict(zip((n for n, _ in decl.params), vals))
        ctx = _ConsumeCtx(Category.CONTRACT_VIOLATION,
                          f"call to {s.method}: precondition")
        for pre in decl.pres:
            self.consume(st, pre, binding, ctx, s.span)
        ret_vals = [self.fresh(n) for n, _ in decl.returns]
        binding.update({n: v for (n, _), v
                        in zip(decl.returns, ret_vals)})
        for target, val in zip(s.targets, ret_vals):
            st.store[target] = val
        states = [st]
        for post in decl.posts:
            nxt: list[SymState] = []
            for cur in states:
                nxt.extend(self.produce(cur, post, binding))
            states = self._capped(nxt, s)
        return states

    # -- whole-method checking ----------------------------------------------------

    def _err(self, category: Category, message: str, span) -> None:
        self.diags.append(error(category, message, span))

    def check_method(self, m: V.MethodDecl) -> list[Diagnostic]:
        if m.body is None:
            return []
        self._ids = itertools.count()
        self.diags = []
        st = SymState()
        for name, _ in m.params:
            st.store[name] = self.fresh(name)
        for name, _ in m.returns:
            st.store[name] = self.fresh(name)
        states = [st]
        for pre in m.pres:
            nxt: list[SymState] = []
            for cur in states:
                nxt.extend(self.produce(cur, pre, cur.store))
            states = self._capped(nxt, m)
        for s in m.body:
            nxt = []
            for cur in states:
                nxt.extend(self.exec_stmt(cur, s))
            states = self._capped(nxt, s)
        leaks: list[Diagnostic] = []
        mspan = getattr(m, "span", None)
        ctx = _ConsumeCtx(Category.CONTRACT_VIOLATION,
                          f"postcondition of {m.name}")
        for cur in states:
            for post in m.posts:
                self.consume(cur, post, cur.store, ctx, mspan)
            for rec, fld in sorted(cur.perms,
                                   key=lambda p: (p[1], repr(p[0]))):
                leaks.append(warning(
                    Category.PERMISSION,
                    f"{m.name} leaks permission to "
                    f"{sym_str(self.norm(rec, cur))}.{fld}", mspan))
            for (name, args), count in sorted(cur.preds.items(),
                                              key=repr):
                if count > 0:
                    leaks.append(warning(
                        Category.PERMISSION,
                        f"{m.name} leaks {count} instance(s) of "
                        f"{name}(" + ", ".join(sym_str(a) for a in args)
                        + ")", mspan))
        had_errors = any(d.severity is Severity.ERROR for d in self.diags)
        if not had_errors:
            self.diags.extend(leaks)
        return _dedupe(self.diags)


def _flat(args: tuple, op: str):
    for a in args:
        if isinstance(a, App) and a.name == op:
            yield from _flat(a.args, op)
        else:
            yield a


def _occurs(s: Sym, v: SymVal) -> bool:
    if v == s:
        return True
    if isinstance(v, (Ctor, App)):
        return any(_occurs(s, a) for a in v.args)
    if isinstance(v, SeqV):
        return any(_occurs(s, a) for a in v.elems)
    return False


def _dedupe(diags: list[Diagnostic]) -> list[Diagnostic]:
    seen = set()
    out = []
    for d in diags:
        key = (d.severity, d.category, d.message,
               (d.span.start, d.span.end) if d.span else None)
        if key in seen:
            continue
        seen.add(key)
        out.append(d)
    return out


def check_program(program: V.ViperProgram,
                  strict: bool = False) -> list[Diagnostic]:
    checker = Checker(program, strict=strict)
    out: list[Diagnostic] = []
    for m in program.methods().values():
        out.extend(checker.check_method(m))
    return out
