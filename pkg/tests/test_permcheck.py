"""Unit tests for the symbolic checker: normalization, the three-valued
decision procedure, produce/consume, statement execution, and whole-method
verdicts.  States are built by hand so each behavior is pinned in isolation."""

from gospel2viper import viper_ast as V
from gospel2viper.diagnostics import Category, Severity
from gospel2viper.permcheck import (App, Checker, Ctor, Lit, SeqV, Sym,
                                    SymState, _ConsumeCtx, check_program,
                                    FALSE, TRUE, MAX_PATHS, sym_str)
from gospel2viper.viper_parser import reparse

import pytest

PROGRAM = reparse("""
adt Cell { Nil() Cons(cell: Ref) }

field val: Int
field nxt: Ref

predicate P(x: Ref) { acc(x.val) }

predicate Q(x: Ref, n: Int) { acc(x.val) && x.val == n }

method mov(x: Ref)
  requires acc(x.val)
  ensures acc(x.val)
{
}
""")


@pytest.fixture
def ck():
    return Checker(PROGRAM)


def errors(ck, category=None):
    out = [d for d in ck.diags if d.severity is Severity.ERROR]
    if category is not None:
        out = [d for d in out if d.category is category]
    return out


CTX = _ConsumeCtx(Category.CONTRACT_VIOLATION, "test")


# -- normalization ------------------------------------------------------------


def seq(*xs):
    return SeqV(tuple(Lit(x) for x in xs))


def test_concat_flattens_and_merges(ck):
    st = SymState()
    v = App("++", (seq(1), App("++", (seq(2), seq(3)))))
    assert ck.norm(v, st) == seq(1, 2, 3)


def test_concat_keeps_symbolic_parts_in_order(ck):
    st = SymState()
    s = ck.fresh("s")
    v = ck.norm(App("++", (seq(1), App("++", (s, seq(2, 3))))), st)
    assert v == App("++", (seq(1), s, seq(2, 3)))


def test_empty_segments_vanish(ck):
    s = ck.fresh("s")
    assert ck.norm(App("++", (SeqV(()), s)), SymState()) == s


def test_len_and_index(ck):
    st = SymState()
    assert ck.norm(App("len", (seq(7, 8),)), st) == Lit(2)
    assert ck.norm(App("index", (seq(7, 8), Lit(1))), st) == Lit(8)
    # out of range stays symbolic rather than inventing a value
    out = ck.norm(App("index", (seq(7, 8), Lit(5))), st)
    assert isinstance(out, App)


def test_division_truncates_toward_zero(ck):
    st = SymState()
    assert ck.norm(App("/", (Lit(7), Lit(2))), st) == Lit(3)
    assert ck.norm(App("/", (Lit(-7), Lit(2))), st) == Lit(-3)


def test_division_by_zero_stays_symbolic(ck):
    out = ck.norm(App("/", (Lit(1), Lit(0))), SymState())
    assert out == App("/", (Lit(1), Lit(0)))


def test_equality_distributes_over_ctors(ck):
    st = SymState()
    a, b = ck.fresh("a"), ck.fresh("b")
    v = ck.norm(App("==", (Ctor("Cons", (a,)), Ctor("Cons", (b,)))), st)
    assert v == App("==", tuple(sorted((a, b), key=repr)))
    v = ck.norm(App("==", (Ctor("Cons", (a,)), Ctor("Nil", ()))), st)
    assert v == FALSE


def test_sequence_equality_by_length(ck):
    st = SymState()
    assert ck.norm(App("==", (seq(1), seq(1, 2))), st) == FALSE
    s = ck.fresh("s")
    longer = App("++", (seq(1, 2), s))
    assert ck.norm(App("==", (seq(1), longer)), st) == FALSE


def test_double_negation_cancels(ck):
    x = ck.fresh("x")
    t = App("not", (App("not", (App("is#Nil", (x,)),)),))
    assert ck.norm(t, SymState()) == App("is#Nil", (x,))


def test_bool_connectives_fold(ck):
    st = SymState()
    p = App("is#Nil", (ck.fresh("x"),))
    assert ck.norm(App("&&", (p, TRUE)), st) == p
    assert ck.norm(App("&&", (p, FALSE)), st) == FALSE
    assert ck.norm(App("||", (p, TRUE)), st) == TRUE
    assert ck.norm(App("||", (p, FALSE)), st) == p
    assert ck.norm(App("&&", (p, p)), st) == p


def test_ite_folds_on_literal_or_equal_branches(ck):
    st = SymState()
    x = ck.fresh("x")
    assert ck.norm(App("ite", (TRUE, Lit(1), Lit(2))), st) == Lit(1)
    assert ck.norm(App("ite", (x, Lit(1), Lit(1))), st) == Lit(1)


def test_ctor_tests_and_projections_fold(ck):
    st = SymState()
    c = Ctor("Cons", (Lit(3),))
    assert ck.norm(App("is#Cons", (c,)), st) == TRUE
    assert ck.norm(App("is#Nil", (c,)), st) == FALSE
    assert ck.norm(App("proj#cell", (c,)), st) == Lit(3)


def test_commutative_args_are_sorted(ck):
    st = SymState()
    x, y = ck.fresh("x"), ck.fresh("y")
    assert ck.norm(App("==", (x, y)), st) == ck.norm(App("==", (y, x)), st)
    assert ck.norm(App("&&", (x, y)), st) == ck.norm(App("&&", (y, x)), st)
    # arithmetic is left alone: decide() only matches facts syntactically
    assert ck.norm(App("+", (x, y)), st) != ck.norm(App("+", (y, x)), st)


# -- decide and assume -----------------------------------------------------------


def test_decide_literals(ck):
    st = SymState()
    assert ck.decide(st, TRUE) is True
    assert ck.decide(st, FALSE) is False


def test_decide_from_path_facts(ck):
    st = SymState()
    x = ck.fresh("x")
    gt = App(">", (x, Lit(0)))
    assert ck.assume(st, gt)
    assert ck.decide(st, gt) is True
    assert ck.decide(st, App("not", (gt,))) is False
    assert ck.decide(st, App(">", (x, Lit(1)))) is None


def test_assume_equality_substitutes(ck):
    st = SymState()
    x = ck.fresh("x")
    assert ck.assume(st, App("==", (x, Lit(3))))
    assert ck.norm(x, st) == Lit(3)
    assert ck.decide(st, App(">", (x, Lit(2)))) is True


def test_assume_ctor_test_builds_witness(ck):
    st = SymState()
    c = ck.fresh("c")
    assert ck.assume(st, App("is#Cons", (c,)))
    w = ck.norm(c, st)
    assert isinstance(w, Ctor) and w.name == "Cons" and len(w.args) == 1
    assert ck.decide(st, App("is#Nil", (c,))) is False


def test_negative_ctor_test_refines_two_ctor_adt(ck):
    st = SymState()
    c = ck.fresh("c")
    assert ck.assume(st, App("not", (App("is#Nil", (c,)),)))
    w = ck.norm(c, st)
    assert isinstance(w, Ctor) and w.name == "Cons"


def test_assume_rejects_a_direct_contradiction(ck):
    st = SymState()
    x = ck.fresh("x")
    assert ck.assume(st, App("is#Nil", (x,)))
    assert not ck.assume(st, App("is#Cons", (x,)))


def test_assume_detects_retroactive_contradiction(ck):
    # the first fact only folds to a constant once the second binds x
    st = SymState()
    x = ck.fresh("x")
    assert ck.assume(st, App(">", (x, Lit(16))))
    assert not ck.assume(st, App("==", (x, Lit(14))))


def test_assume_splits_conjunctions(ck):
    st = SymState()
    x, y = ck.fresh("x"), ck.fresh("y")
    fact = App("&&", (App("==", (x, Lit(1))), App("==", (y, Lit(2)))))
    assert ck.assume(st, fact)
    assert ck.norm(x, st) == Lit(1)
    assert ck.norm(y, st) == Lit(2)


def test_occurs_check_blocks_cyclic_substitution(ck):
    st = SymState()
    x = ck.fresh("x")
    assert ck.assume(st, App("==", (x, App("+", (x, Lit(1))))))
    assert ck.norm(x, st) == x  # no substitution was recorded


# -- produce ------------------------------------------------------------------


def acc(var, fld):
    return V.Acc(V.FieldAcc(V.Var(var), fld))


def pred(name, *vars_):
    return V.PredApp(name, [V.Var(v) for v in vars_])


def test_produce_acc_grants_permission_and_value(ck):
    st = SymState()
    x = ck.fresh("x")
    out = ck.produce(st, acc("x", "val"), {"x": x})
    assert out == [st]
    assert (x, "val") in st.perms
    assert isinstance(st.heap[(x, "val")], Sym)


def test_produce_second_whole_permission_is_infeasible(ck):
    st = SymState()
    x = ck.fresh("x")
    store = {"x": x}
    ck.produce(st, acc("x", "val"), store)
    assert ck.produce(st, acc("x", "val"), store) == []


def test_produce_predicate_counts_instances(ck):
    st = SymState()
    x = ck.fresh("x")
    ck.produce(st, pred("P", "x"), {"x": x})
    ck.produce(st, pred("P", "x"), {"x": x})
    assert st.preds[("P", (x,))] == 2


def test_produce_false_pure_kills_the_state(ck):
    st = SymState()
    assert ck.produce(st, V.Pure(V.BoolLit(False)), {}) == []


def test_produce_undecidable_conditional_forks(ck):
    st = SymState()
    x = ck.fresh("x")
    a = V.CondA(V.BinOp(">", V.Var("x"), V.IntLit(0)),
                acc("x", "val"), acc("x", "nxt"))
    out = ck.produce(st, a, {"x": x})
    assert len(out) == 2
    granted = {fld for s in out for _, fld in s.perms}
    assert granted == {"val", "nxt"}


def test_produce_decided_conditional_takes_one_branch(ck):
    st = SymState()
    x = ck.fresh("x")
    assert ck.assume(st, App(">", (x, Lit(0))))
    a = V.CondA(V.BinOp(">", V.Var("x"), V.IntLit(0)),
                acc("x", "val"), acc("x", "nxt"))
    out = ck.produce(st, a, {"x": x})
    assert len(out) == 1
    assert {fld for _, fld in out[0].perms} == {"val"}


# -- consume ------------------------------------------------------------------


def test_consume_undoes_produce(ck):
    st = SymState()
    x = ck.fresh("x")
    store = {"x": x}
    a = V.AndA(acc("x", "val"), pred("P", "x"))
    ck.produce(st, a, store)
    assert ck.consume(st, a, store, CTX)
    assert not st.perms and not st.preds and not ck.diags


def test_consume_missing_permission_reports(ck):
    st = SymState()
    assert not ck.consume(st, acc("x", "val"), {"x": ck.fresh("x")}, CTX)
    msgs = [d.message for d in errors(ck, Category.PERMISSION)]
    assert msgs and "give up x.val" in msgs[0]


def test_consume_missing_instance_uses_context_category(ck):
    st = SymState()
    ctx = _ConsumeCtx(Category.FOLD_MISMATCH, "fold P(x)")
    assert not ck.consume(st, pred("P", "x"), {"x": ck.fresh("x")}, ctx)
    assert errors(ck, Category.FOLD_MISMATCH)


def test_consume_false_condition_reports(ck):
    st = SymState()
    a = V.Pure(V.BinOp("==", V.IntLit(1), V.IntLit(2)))
    assert not ck.consume(st, a, {}, CTX)
    assert errors(ck, Category.CONTRACT_VIOLATION)


def test_unknown_pure_is_an_obligation_when_lenient(ck):
    st = SymState()
    a = V.Pure(V.BinOp(">", V.Var("x"), V.IntLit(0)))
    assert ck.consume(st, a, {"x": ck.fresh("x")}, CTX)
    assert not errors(ck)
    assert [d for d in ck.diags if d.severity is Severity.OBLIGATION]


def test_unknown_pure_is_an_error_when_strict():
    ck = Checker(PROGRAM, strict=True)
    st = SymState()
    a = V.Pure(V.BinOp(">", V.Var("x"), V.IntLit(0)))
    assert not ck.consume(st, a, {"x": ck.fresh("x")}, CTX)
    assert errors(ck, Category.PURE_OBLIGATION)


def test_undecidable_conditional_cannot_be_consumed(ck):
    st = SymState()
    a = V.CondA(V.BinOp(">", V.Var("x"), V.IntLit(0)),
                acc("x", "val"), acc("x", "nxt"))
    assert not ck.consume(st, a, {"x": ck.fresh("x")}, CTX)
    assert errors(ck, Category.UNDECIDABLE_BRANCH)


def test_consume_reads_the_entry_snapshot(ck):
    # the pure conjunct still sees x.val although acc(x.val) was taken first
    st = SymState()
    x = ck.fresh("x")
    store = {"x": x}
    ck.produce(st, acc("x", "val"), store)
    st.heap[(x, "val")] = Lit(5)
    a = V.AndA(acc("x", "val"),
               V.Pure(V.BinOp("==", V.FieldAcc(V.Var("x"), "val"),
                              V.IntLit(5))))
    assert ck.consume(st, a, store, CTX)
    assert not ck.diags


# -- statements ---------------------------------------------------------------


def exec_seq(ck, st, stmts):
    states = [st]
    for s in stmts:
        states = [n for cur in states for n in ck.exec_stmt(cur, s)]
    return states


def test_write_needs_permission_then_repairs(ck):
    st = SymState()
    st.store["x"] = ck.fresh("x")
    w = V.AssignS(V.FieldAcc(V.Var("x"), "val"), V.IntLit(1))
    exec_seq(ck, st, [w, V.AssignS(V.FieldAcc(V.Var("x"), "val"),
                                   V.IntLit(2))])
    assert len(errors(ck, Category.PERMISSION)) == 1
    assert st.heap[(st.store["x"], "val")] == Lit(2)


def test_read_needs_permission(ck):
    st = SymState()
    st.store["x"] = ck.fresh("x")
    s = V.VarDeclS("y", V.VType("Int"), V.FieldAcc(V.Var("x"), "val"))
    ck.exec_stmt(st, s)
    assert errors(ck, Category.PERMISSION)


def test_new_grants_all_listed_fields(ck):
    st = SymState()
    ck.exec_stmt(st, V.NewS("r", ["val", "nxt"]))
    r = st.store["r"]
    assert st.perms == {(r, "val"), (r, "nxt")}


def test_if_forks_on_unknown_condition(ck):
    st = SymState()
    st.store["a"] = ck.fresh("a")
    s = V.IfS(V.BinOp(">", V.Var("a"), V.IntLit(0)), [], [])
    out = ck.exec_stmt(st, s)
    assert len(out) == 2
    verdicts = {ck.decide(s2, App(">", (s2.store["a"], Lit(0))))
                for s2 in out}
    assert verdicts == {True, False}


def test_fold_trades_body_for_instance(ck):
    st = SymState()
    x = ck.fresh("x")
    st.store["x"] = x
    ck.produce(st, acc("x", "val"), st.store)
    ck.exec_stmt(st, V.FoldS(pred("P", "x")))
    assert not ck.diags
    assert not st.perms
    assert st.preds[("P", (x,))] == 1


def test_fold_without_the_body_reports(ck):
    st = SymState()
    st.store["x"] = ck.fresh("x")
    ck.exec_stmt(st, V.FoldS(pred("P", "x")))
    # the missing conjunct is a permission, reported under the fold's name
    msgs = [d.message for d in errors(ck, Category.PERMISSION)]
    assert msgs and msgs[0].startswith("fold P(x)")


def test_fold_arity_and_unknown_predicate(ck):
    st = SymState()
    st.store["x"] = ck.fresh("x")
    ck.exec_stmt(st, V.FoldS(V.PredApp("P", [V.Var("x"), V.Var("x")])))
    ck.exec_stmt(st, V.FoldS(pred("Nope", "x")))
    msgs = [d.message for d in errors(ck, Category.FOLD_MISMATCH)]
    assert any("takes 1 arguments" in m for m in msgs)
    assert any("unknown predicate" in m for m in msgs)


def test_unfold_trades_instance_for_body(ck):
    st = SymState()
    x = ck.fresh("x")
    st.store["x"] = x
    st.preds[("P", (x,))] = 1
    ck.exec_stmt(st, V.UnfoldS(pred("P", "x")))
    assert not ck.diags
    assert not st.preds
    assert (x, "val") in st.perms


def test_unfold_missing_instance_reports_and_repairs(ck):
    st = SymState()
    x = ck.fresh("x")
    st.store["x"] = x
    ck.exec_stmt(st, V.UnfoldS(pred("P", "x")))
    assert errors(ck, Category.FOLD_MISMATCH)
    assert (x, "val") in st.perms  # body granted anyway to keep going


def test_unfold_matches_instances_up_to_substitution(ck):
    st = SymState()
    x, y = ck.fresh("x"), ck.fresh("y")
    st.store["x"] = x
    st.preds[("P", (y,))] = 1
    assert ck.assume(st, App("==", (x, y)))
    ck.exec_stmt(st, V.UnfoldS(pred("P", "x")))
    assert not ck.diags
    assert not st.preds


def test_call_consumes_pre_havocs_and_produces_post(ck):
    st = SymState()
    x = ck.fresh("x")
    st.store["x"] = x
    ck.produce(st, acc("x", "val"), st.store)
    before = st.heap[(x, "val")]
    out = ck.exec_stmt(st, V.CallS([], "mov", [V.Var("x")]))
    assert not ck.diags
    assert len(out) == 1
    after = out[0].heap[(x, "val")]
    assert (x, "val") in out[0].perms
    assert after != before  # the callee may have changed the field


def test_call_unknown_method_and_arity(ck):
    st = SymState()
    st.store["x"] = ck.fresh("x")
    ck.exec_stmt(st, V.CallS([], "gone", [V.Var("x")]))
    ck.exec_stmt(st, V.CallS([], "mov", []))
    msgs = [d.message for d in errors(ck, Category.CONTRACT_VIOLATION)]
    assert any("unknown method" in m for m in msgs)
    assert any("takes 1 arguments" in m for m in msgs)


# -- whole methods --------------------------------------------------------------


def method_over(header, body):
    text = """
adt Cell { Nil() Cons(cell: Ref) }
field val: Int
field nxt: Ref
predicate P(x: Ref) { acc(x.val) }
""" + header + "\n{\n" + body + "\n}\n"
    return reparse(text)


def test_clean_method_has_no_diagnostics():
    prog = method_over(
        "method ok(x: Ref) requires P(x) ensures P(x)",
        "unfold P(x)\nx.val := 1\nfold P(x)")
    assert check_program(prog) == []


def test_leaked_permission_is_a_warning():
    prog = method_over("method leaky(x: Ref) requires acc(x.val)", "")
    diags = check_program(prog)
    assert [d.severity for d in diags] == [Severity.WARNING]
    assert "leaks permission to x.val" in diags[0].message


def test_leaked_instance_is_a_warning():
    prog = method_over("method leaky(x: Ref) requires P(x)", "")
    diags = check_program(prog)
    assert any("leaks 1 instance(s) of P" in d.message for d in diags)


def test_leak_warnings_suppressed_after_errors():
    prog = method_over("method bad(x: Ref) requires acc(x.val)",
                       "x.nxt := x")
    diags = check_program(prog)
    assert all("leaks" not in d.message for d in diags)


def test_path_explosion_is_capped_and_reported():
    conds = "abcdef"
    params = ", ".join(f"{c}: Int" for c in conds)
    body = "\n".join(f"if ({c} > 0) {{\n}} else {{\n}}" for c in conds)
    prog = method_over(f"method wide({params})", body)
    diags = check_program(prog)
    assert any(f"more than {MAX_PATHS} symbolic paths" in d.message
               for d in diags)
    assert all(d.severity is Severity.WARNING for d in diags
               if "paths" in d.message)


def test_path_cap_is_an_error_when_strict():
    conds = "abcdef"
    params = ", ".join(f"{c}: Int" for c in conds)
    body = "\n".join(f"if ({c} > 0) {{\n}} else {{\n}}" for c in conds)
    prog = method_over(f"method wide({params})", body)
    diags = check_program(prog, strict=True)
    assert any(d.severity is Severity.ERROR and "paths" in d.message
               for d in diags)


def test_duplicate_diagnostics_are_merged():
    # both branches miss the same fold, one report survives
    prog = method_over(
        "method twice(x: Ref, a: Int) requires P(x) ensures P(x)",
        "if (a > 0) {\n} else {\n}")
    diags = check_program(prog)
    assert len(diags) == len({(d.severity, d.category, d.message)
                              for d in diags})


def test_sym_str_is_readable(ck):
    st = SymState()
    x = ck.fresh("x")
    assert sym_str(Lit(3)) == "3"
    assert sym_str(Ctor("Cons", (x,))).startswith("Cons(")
    assert sym_str(seq(1, 2)) == "Seq(1, 2)"
