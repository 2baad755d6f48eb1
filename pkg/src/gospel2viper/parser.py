"""Recursive-descent parser for OCaml-light modules and Gospel annotations.

Annotation payloads are re-lexed in spec mode and dispatched on their
leading keyword: predicate / function / lemma introduce top-level ghost
declarations, fold / unfold / apply are ghost commands legal only inside
a function body, and anything else is parsed as a contract attached to
the preceding function.

The explicit-typing rule is enforced here: a local `let` without a type
annotation is a parse diagnostic.  Sequence indexing and slicing only
exist in spec mode; in program mode a bracket group after a call denotes
ghost arguments.
"""

from __future__ import annotations

from .diagnostics import Category, Diagnostic, Span, error
from .lexer import T, Token, lex
from .surface import (AppE, Assertion, AssignE, BinE, BoolLit, BoolT,
                      ContractSpec, CtorDef, CtorE, FieldDef, FieldE, FunDecl,
                      GhostCommand, GhostDecl, GhostE, GhostKind,
                      GospelAnnotation, IfA, IfE, IndexE, IntLit, IntT,
                      LemmaDef, LetIn, LetPatA, LogicalFunctionDef, MatchArm,
                      MatchE, NamedT, OwnsA, PredA, PredicateDef, PureA,
                      RecordAlloc, SeqE, SeqT, SepA, SliceFromE, SurfaceDecl,
                      SurfaceExpr, SurfaceModule, SurfaceType, TypeDecl,
                      UnE, UnitLit, VarE)


class ParseError(Exception):
    def __init__(self, diag: Diagnostic):
        super().__init__(diag.message)
        self.diag = diag


_CMP_OPS = {T.EQ: "=", T.NEQ: "<>", T.LT: "<", T.LE: "<=", T.GT: ">", T.GE: ">="}
_ADD_OPS = {T.PLUS: "+", T.MINUS: "-"}
_MUL_OPS = {T.STAR: "*", T.SLASH: "/"}
_ATOM_START = (T.INT, T.TRUE, T.FALSE, T.IDENT, T.LPAREN, T.LBRACE)


class _P:
    """Token cursor with shared expression machinery.

    `spec` toggles the two grammar dialects: spec terms have sequence
    indexing/slicing, program terms have ghost-argument brackets.
    """

    def __init__(self, tokens: list[Token], spec: bool):
        self.toks = tokens
        self.pos = 0
        self.spec = spec

    # -- cursor helpers ----------------------------------------------------

    def peek(self, ahead: int = 0) -> Token:
        i = min(self.pos + ahead, len(self.toks) - 1)
        return self.toks[i]

    def at(self, *kinds: T) -> bool:
        return self.peek().kind in kinds

    def next(self) -> Token:
        t = self.toks[self.pos]
        if t.kind is not T.EOF:
            self.pos += 1
        return t

    def expect(self, kind: T, what: str) -> Token:
        t = self.peek()
        if t.kind is not kind:
            self.fail(f"expected {what}, found {t.text or 'end of input'!r}")
        return self.next()

    def fail(self, message: str) -> None:
        raise ParseError(error(Category.PARSE, message, self.peek().span))

    def ident(self, what: str = "identifier") -> Token:
        return self.expect(T.IDENT, what)

    # -- types -------------------------------------------------------------

    def parse_type(self) -> SurfaceType:
        t = self.ident("type name")
        base: SurfaceType
        if t.text == "int":
            base = IntT()
        elif t.text == "bool":
            base = BoolT()
        else:
            base = NamedT(t.text)
        if self.at(T.IDENT) and self.peek().text == "sequence":
            self.next()
            if not isinstance(base, IntT):
                self.fail("only int sequences are supported")
            return SeqT()
        return base

    # -- expressions -------------------------------------------------------

    def parse_expr(self) -> SurfaceExpr:
        e = self.parse_and()
        while self.at(T.BARBAR):
            self.next()
            e = BinE("||", e, self.parse_and(), span=_sp(e))
        return e

    def parse_and(self) -> SurfaceExpr:
        e = self.parse_cmp()
        while self.at(T.AMPAMP):
            self.next()
            e = BinE("&&", e, self.parse_cmp(), span=_sp(e))
        return e

    def parse_cmp(self) -> SurfaceExpr:
        e = self.parse_concat()
        if self.peek().kind in _CMP_OPS:
            op = _CMP_OPS[self.next().kind]
            e = BinE(op, e, self.parse_concat(), span=_sp(e))
        return e

    def parse_concat(self) -> SurfaceExpr:
        e = self.parse_additive()
        if self.at(T.PLUSPLUS):
            self.next()
            return BinE("++", e, self.parse_concat(), span=_sp(e))
        return e

    def parse_additive(self) -> SurfaceExpr:
        e = self.parse_mult()
        while self.peek().kind in _ADD_OPS:
            op = _ADD_OPS[self.next().kind]
            e = BinE(op, e, self.parse_mult(), span=_sp(e))
        return e

    def parse_mult(self) -> SurfaceExpr:
        e = self.parse_unary()
        while self.peek().kind in _MUL_OPS:
            op = _MUL_OPS[self.next().kind]
            e = BinE(op, e, self.parse_unary(), span=_sp(e))
        return e

    def parse_unary(self) -> SurfaceExpr:
        if self.at(T.MINUS):
            start = self.next().span
            return UnE("-", self.parse_unary(), span=start)
        return self.parse_app()

    def parse_app(self) -> SurfaceExpr:
        head = self.parse_postfix()
        if not isinstance(head, (VarE, CtorE)):
            return head
        name = head.name
        if not self._at_atom():
            return head
        args, done = self._paren_args_or_none()
        if args is None:
            args = []
            while self._at_atom():
                if self.at(T.LPAREN):
                    inner, closed = self._paren_args_or_none()
                    if inner is not None:  # comma form mid-stream: malformed
                        args.extend(inner)
                        done = closed
                        break
                    args.append(self._paren_expr())
                else:
                    args.append(self.parse_postfix())
        app = AppE(name, args, span=_sp(head))
        if not self.spec and not done:
            while self.at(T.LBRACKET):
                self.next()
                was = self.spec
                self.spec = True
                app.ghost_args.append(self.parse_expr())
                self.spec = was
                self.expect(T.RBRACKET, "']'")
        return app

    def _at_atom(self) -> bool:
        return self.peek().kind in _ATOM_START

    def _paren_args_or_none(self) -> tuple[list[SurfaceExpr] | None, bool]:
        """Distinguish `f(a, b)` and `f ()` from a curried `f (e)`.

        Returns (args, True) when a complete parenthesized argument list
        was consumed, else (None, False) having consumed nothing.
        """
        if not self.at(T.LPAREN):
            return None, False
        mark = self.pos
        self.next()
        if self.at(T.RPAREN):
            self.next()
            return [], True
        first = self.parse_expr()
        if self.at(T.COMMA):
            args = [first]
            while self.at(T.COMMA):
                self.next()
                args.append(self.parse_expr())
            self.expect(T.RPAREN, "')'")
            return args, True
        self.pos = mark
        return None, False

    def _paren_expr(self) -> SurfaceExpr:
        self.expect(T.LPAREN, "'('")
        e = self.parse_expr()
        self.expect(T.RPAREN, "')'")
        return e

    def parse_postfix(self) -> SurfaceExpr:
        e = self.parse_atom()
        while True:
            if self.at(T.DOT):
                self.next()
                f = self.ident("field name")
                e = FieldE(e, f.text, span=_sp(e))
            elif self.spec and self.at(T.LBRACKET):
                self.next()
                if self.at(T.DOTDOT):
                    self.fail("prefix slices are not part of the surface language")
                idx = self.parse_expr()
                if self.at(T.DOTDOT):
                    self.next()
                    self.expect(T.RBRACKET, "']'")
                    e = SliceFromE(e, idx, span=_sp(e))
                else:
                    self.expect(T.RBRACKET, "']'")
                    e = IndexE(e, idx, span=_sp(e))
            else:
                return e

    def parse_atom(self) -> SurfaceExpr:
        t = self.peek()
        if t.kind is T.INT:
            self.next()
            return IntLit(int(t.text), span=t.span)
        if t.kind is T.TRUE or t.kind is T.FALSE:
            self.next()
            return BoolLit(t.kind is T.TRUE, span=t.span)
        if t.kind is T.IDENT:
            self.next()
            if t.is_upper_ident():
                if self.at(T.LBRACE):
                    return self._record_body(t.text, t.span)
                return CtorE(t.text, span=t.span)
            return VarE(t.text, span=t.span)
        if t.kind is T.LBRACE:
            return self._record_body(None, t.span)
        if t.kind is T.LPAREN:
            self.next()
            if self.at(T.RPAREN):
                self.next()
                return UnitLit(span=t.span)
            e = self.parse_expr()
            self.expect(T.RPAREN, "')'")
            return e
        self.fail(f"expected an expression, found {t.text or 'end of input'!r}")
        raise AssertionError  # unreachable

    def _record_body(self, ctor: str | None, span: Span) -> RecordAlloc:
        self.expect(T.LBRACE, "'{'")
        inits: list[tuple[str, SurfaceExpr]] = []
        while not self.at(T.RBRACE):
            f = self.ident("field name")
            self.expect(T.EQ, "'='")
            inits.append((f.text, self.parse_expr()))
            if self.at(T.SEMI):
                self.next()
            elif not self.at(T.RBRACE):
                self.fail("expected ';' or '}' in record literal")
        self.next()
        return RecordAlloc(ctor, inits, span=span)


def _sp(e) -> Span | None:
    return getattr(e, "span", None)


# --------------------------------------------------------------------------
# annotation parsing

def parse_annotation(token: Token) -> tuple[GospelAnnotation | None, list[Diagnostic]]:
    """Parse one ANNOTATION token's payload into a GospelAnnotation."""
    assert token.payload is not None
    toks, diags = lex(token.payload, base=token.payload_offset, spec_mode=True)
    if diags:
        return None, diags
    p = _P(toks, spec=True)
    try:
        payload = _annotation_payload(p, token.span)
        if not p.at(T.EOF):
            p.fail(f"unexpected {p.peek().text!r} at end of annotation")
        return GospelAnnotation(payload, span=token.span), []
    except ParseError as e:
        return None, [e.diag]


def _annotation_payload(p: _P, span: Span):
    t = p.peek()
    if t.kind is T.PREDICATE:
        p.next()
        name = p.ident("predicate name").text
        params = _spec_params(p)
        p.expect(T.EQ, "'='")
        return PredicateDef(name, params, _assertion(p), span=span)
    if t.kind is T.FUNCTION:
        p.next()
        name = p.ident("function name").text
        params = _spec_params(p)
        p.expect(T.COLON, "':'")
        ret = p.parse_type()
        p.expect(T.EQ, "'='")
        return LogicalFunctionDef(name, params, ret, p.parse_expr(), span=span)
    if t.kind is T.LEMMA:
        p.next()
        name = p.ident("lemma name").text
        params = _spec_params(p)
        req, ens = _clauses(p)
        return LemmaDef(name, params, req, ens, span=span)
    if t.kind in (T.FOLD, T.UNFOLD, T.APPLY):
        kind = {T.FOLD: GhostKind.FOLD, T.UNFOLD: GhostKind.UNFOLD,
                T.APPLY: GhostKind.APPLY}[p.next().kind]
        target = p.ident("fold/unfold/apply target").text
        args = _command_args(p)
        return GhostCommand(kind, target, args, span=span)
    return _contract(p, span)


def _spec_params(p: _P) -> list[tuple[str, SurfaceType]]:
    params = []
    while p.at(T.LPAREN):
        p.next()
        name = p.ident("parameter name").text
        p.expect(T.COLON, "':'")
        params.append((name, p.parse_type()))
        p.expect(T.RPAREN, "')'")
    return params


def _command_args(p: _P) -> list[SurfaceExpr]:
    args, done = p._paren_args_or_none()
    if args is not None:
        return args
    args = []
    while p._at_atom():
        if p.at(T.LPAREN):
            args.append(p._paren_expr())
        else:
            args.append(p.parse_postfix())
    return args


def _contract(p: _P, span: Span) -> ContractSpec:
    first = p.ident("contract header").text
    results: list[str] = []
    if p.at(T.COMMA) or p.at(T.EQ):
        results = [first]
        while p.at(T.COMMA):
            p.next()
            results.append(p.ident("result name").text)
        p.expect(T.EQ, "'='")
        fn = p.ident("function name").text
    else:
        fn = first
    param_names: list[str] = []
    while True:
        if p.at(T.LPAREN) and p.peek(1).kind is T.RPAREN:
            p.next(); p.next()  # `()`: explicitly no parameters
        elif p.at(T.IDENT):
            param_names.append(p.next().text)
        else:
            break
    ghost_params: list[tuple[str, SurfaceType]] = []
    while p.at(T.LBRACKET):
        p.next()
        name = p.ident("ghost parameter name").text
        p.expect(T.COLON, "':'")
        ghost_params.append((name, p.parse_type()))
        p.expect(T.RBRACKET, "']'")
    req, ens = _clauses(p)
    return ContractSpec(results, fn, param_names, ghost_params, req, ens,
                        span=span)


def _clauses(p: _P) -> tuple[list[Assertion], list[Assertion]]:
    req: list[Assertion] = []
    ens: list[Assertion] = []
    while p.at(T.REQUIRES, T.ENSURES):
        into = req if p.next().kind is T.REQUIRES else ens
        into.append(_assertion(p))
    return req, ens


# -- assertions -------------------------------------------------------------

_EXPR_CONT = (T.DOT, T.LBRACKET, T.PLUSPLUS, T.PLUS, T.MINUS, T.STAR,
              T.SLASH, T.EQ, T.NEQ, T.LT, T.LE, T.GT, T.GE, T.OWNS)


def _assertion(p: _P) -> Assertion:
    a = _assertion_atom(p)
    if p.at(T.AMPAMP):
        p.next()
        return SepA(a, _assertion(p), span=_sp(a))
    return a


def _assertion_atom(p: _P) -> Assertion:
    t = p.peek()
    if t.kind is T.IF:
        p.next()
        cond = p.parse_cmp()
        p.expect(T.THEN, "'then'")
        then = _assertion(p)
        p.expect(T.ELSE, "'else'")
        return IfA(cond, then, _assertion(p), span=t.span)
    if t.kind is T.LET:
        p.next()
        ctor = p.ident("constructor pattern")
        if not ctor.is_upper_ident():
            p.fail("assertion let expects a constructor pattern")
        binder = p.ident("binder name").text
        p.expect(T.EQ, "'='")
        scrut = p.parse_cmp()
        p.expect(T.IN, "'in'")
        return LetPatA(ctor.text, binder, scrut, _assertion(p), span=t.span)
    if t.kind is T.LPAREN:
        mark = p.pos
        p.next()
        try:
            inner = _assertion(p)
            p.expect(T.RPAREN, "')'")
            if not isinstance(inner, PureA) and not p.at(*_EXPR_CONT):
                return inner
        except ParseError:
            pass
        p.pos = mark
    e = p.parse_cmp()
    if p.at(T.OWNS):
        p.next()
        p.expect(T.LBRACE, "'{'")
        fields = [p.ident("field name").text]
        while p.at(T.SEMI):
            p.next()
            fields.append(p.ident("field name").text)
        p.expect(T.RBRACE, "'}'")
        return OwnsA(e, fields, span=_sp(e))
    return PureA(e, span=_sp(e))


# --------------------------------------------------------------------------
# module parsing

_GHOST_LEADS = ("fold", "unfold", "apply")


def _annotation_is_ghost(tok: Token) -> bool:
    head = (tok.payload or "").split(None, 1)
    return bool(head) and head[0] in _GHOST_LEADS


class _ModuleParser(_P):
    def __init__(self, tokens: list[Token]):
        super().__init__(tokens, spec=False)
        self.diags: list[Diagnostic] = []

    # statement sequences ---------------------------------------------------

    def parse_body(self) -> SurfaceExpr:
        items = self._stmt_seq()
        if not items:
            self.fail("expected a function body")
        return items[0] if len(items) == 1 else SeqE(items, span=_sp(items[0]))

    def _stmt_seq(self) -> list[SurfaceExpr]:
        items: list[SurfaceExpr] = []
        while True:
            t = self.peek()
            if t.kind is T.ANNOTATION:
                if not _annotation_is_ghost(t):
                    break  # a contract or the next top-level declaration
                self.next()
                ann, diags = parse_annotation(t)
                self.diags.extend(diags)
                if ann is not None:
                    assert isinstance(ann.payload, GhostCommand)
                    items.append(GhostE(ann.payload, span=ann.span))
                continue
            if t.kind in (T.EOF, T.RPAREN, T.PIPE, T.TYPE, T.ELSE):
                break
            item = self._stmt_item()
            if item is None:
                break
            items.append(item)
            while self.at(T.SEMI):
                self.next()
        return items

    def _stmt_item(self) -> SurfaceExpr | None:
        t = self.peek()
        if t.kind is T.LET:
            mark = self.pos
            self.next()
            name = self.ident("binder name")
            if name.is_upper_ident():
                self.fail("constructor patterns are only allowed in assertions")
            typ = None
            if self.at(T.COLON):
                self.next()
                typ = self.parse_type()
            self.expect(T.EQ, "'='")
            rhs = self.parse_expr()
            if not self.at(T.IN):
                self.pos = mark  # a new top-level declaration begins here
                return None
            if typ is None:
                self.diags.append(error(
                    Category.PARSE,
                    f"local '{name.text}' needs an explicit type annotation",
                    name.span))
            self.next()
            body_items = self._stmt_seq()
            body = (body_items[0] if len(body_items) == 1
                    else SeqE(body_items, span=_sp(body_items[0]) if body_items else t.span))
            if not body_items:
                self.fail("expected an expression after 'in'")
            return LetIn(name.text, typ, rhs, body, span=t.span)
        if t.kind is T.MATCH:
            return self._match()
        if t.kind is T.IF:
            self.next()
            cond = self.parse_expr()
            self.expect(T.THEN, "'then'")
            then = self._branch_item()
            els = None
            if self.at(T.ELSE):
                self.next()
                els = self._branch_item()
            return IfE(cond, then, els, span=t.span)
        if t.kind is T.LPAREN and not self._unit_ahead():
            self.next()
            items = self._stmt_seq()
            self.expect(T.RPAREN, "')'")
            if not items:
                self.fail("empty parenthesized statement")
            inner = items[0] if len(items) == 1 else SeqE(items, span=t.span)
            return self._maybe_assign(self._postfix_tail(inner))
        e = self.parse_expr()
        return self._maybe_assign(e)

    def _branch_item(self) -> SurfaceExpr:
        item = self._stmt_item()
        if item is None:
            self.fail("expected a branch body")
        return item

    def _unit_ahead(self) -> bool:
        return self.at(T.LPAREN) and self.peek(1).kind is T.RPAREN

    def _postfix_tail(self, e: SurfaceExpr) -> SurfaceExpr:
        while self.at(T.DOT):
            self.next()
            e = FieldE(e, self.ident("field name").text, span=_sp(e))
        return e

    def _maybe_assign(self, e: SurfaceExpr) -> SurfaceExpr:
        if self.at(T.LARROW):
            arrow = self.next()
            if not isinstance(e, FieldE):
                raise ParseError(error(Category.PARSE,
                                       "only fields can be assigned", arrow.span))
            return AssignE(e, self.parse_expr(), span=_sp(e))
        return e

    def _match(self) -> MatchE:
        start = self.expect(T.MATCH, "'match'")
        scrut = self.parse_expr()
        self.expect(T.WITH, "'with'")
        arms: list[MatchArm] = []
        if self.at(T.PIPE):
            self.next()
        while True:
            ctor = self.ident("constructor name")
            if not ctor.is_upper_ident():
                self.fail("match arms must start with a constructor")
            binder = None
            if self.at(T.IDENT) and not self.peek().is_upper_ident():
                binder = self.next().text
            self.expect(T.ARROW, "'->'")
            items = self._stmt_seq()
            if not items:
                self.fail("empty match arm")
            body = items[0] if len(items) == 1 else SeqE(items, span=_sp(items[0]))
            arms.append(MatchArm(ctor.text, binder, body, span=ctor.span))
            if self.at(T.PIPE):
                self.next()
            else:
                break
        return MatchE(scrut, arms, span=start.span)

    # declarations ----------------------------------------------------------

    def parse_module(self) -> SurfaceModule:
        decls: list[SurfaceDecl] = []
        while not self.at(T.EOF):
            t = self.peek()
            if t.kind is T.TYPE:
                decls.append(self._type_decl())
            elif t.kind is T.LET:
                decls.append(self._fun_decl())
            elif t.kind is T.ANNOTATION:
                self.next()
                ann, diags = parse_annotation(t)
                self.diags.extend(diags)
                if ann is not None:
                    self._place_annotation(ann, decls)
            else:
                self.fail(f"expected a declaration, found {t.text!r}")
        return SurfaceModule(decls)

    def _place_annotation(self, ann: GospelAnnotation,
                          decls: list[SurfaceDecl]) -> None:
        payload = ann.payload
        if isinstance(payload, (PredicateDef, LogicalFunctionDef, LemmaDef)):
            decls.append(GhostDecl(payload, span=ann.span))
        elif isinstance(payload, ContractSpec):
            host = decls[-1] if decls else None
            if not isinstance(host, FunDecl):
                self.diags.append(error(
                    Category.PARSE,
                    "contract annotation has no preceding function", ann.span))
            elif host.spec is not None:
                self.diags.append(error(
                    Category.PARSE,
                    f"function '{host.name}' already has a contract", ann.span))
            else:
                host.spec = payload
        else:
            self.diags.append(error(
                Category.PARSE,
                "ghost command outside a function body", ann.span))

    def _type_decl(self) -> TypeDecl:
        start = self.expect(T.TYPE, "'type'")
        name = self.ident("type name")
        if name.is_upper_ident():
            self.fail("type names are lowercase")
        self.expect(T.EQ, "'='")
        if self.at(T.LBRACE):
            kind = RecordKindParser.parse(self)
        else:
            kind = self._variant()
        return TypeDecl(name.text, kind, span=start.span)

    def _variant(self):
        from .surface import VariantKind
        if self.at(T.PIPE):
            self.next()
        ctors = [self._ctor()]
        while self.at(T.PIPE):
            self.next()
            ctors.append(self._ctor())
        return VariantKind(ctors)

    def _ctor(self) -> CtorDef:
        name = self.ident("constructor name")
        if not name.is_upper_ident():
            self.fail("constructor names are capitalized")
        payload: list[FieldDef] = []
        if self.at(T.OF):
            self.next()
            payload = RecordKindParser.parse(self).fields
        return CtorDef(name.text, payload, span=name.span)

    def _fun_decl(self) -> FunDecl:
        start = self.expect(T.LET, "'let'")
        name = self.ident("function name")
        params: list[tuple[str, SurfaceType]] = []
        while self.at(T.LPAREN):
            self.next()
            if self.at(T.RPAREN):
                self.next()
                continue  # unit parameter: contributes nothing
            pname = self.ident("parameter name")
            self.expect(T.COLON,
                        f"a type annotation on parameter '{pname.text}'")
            ptype = self.parse_type()
            self.expect(T.RPAREN, "')'")
            params.append((pname.text, ptype))
        ret = None
        if self.at(T.COLON):
            self.next()
            ret = self.parse_type()
        self.expect(T.EQ, "'='")
        body = self.parse_body()
        return FunDecl(name.text, params, ret, body, span=start.span)


class RecordKindParser:
    @staticmethod
    def parse(p: _P):
        from .surface import RecordKind
        p.expect(T.LBRACE, "'{'")
        fields: list[FieldDef] = []
        while not p.at(T.RBRACE):
            mutable = False
            if p.at(T.MUTABLE):
                p.next()
                mutable = True
            name = p.ident("field name")
            p.expect(T.COLON, "':'")
            fields.append(FieldDef(name.text, p.parse_type(), mutable,
                                   span=name.span))
            if p.at(T.SEMI):
                p.next()
            elif not p.at(T.RBRACE):
                p.fail("expected ';' or '}' in record declaration")
        p.next()
        if not fields:
            p.fail("record declarations need at least one field")
        return RecordKind(fields)


# --------------------------------------------------------------------------
# post-parse resolution and validation

def _resolve_assertion(a: Assertion, preds: dict) -> Assertion:
    if isinstance(a, PureA) and isinstance(a.expr, AppE):
        e = a.expr
        if e.fn in preds and not e.ghost_args:
            return PredA(e.fn, e.args, span=a.span)
    if isinstance(a, SepA):
        a.left = _resolve_assertion(a.left, preds)
        a.right = _resolve_assertion(a.right, preds)
    elif isinstance(a, IfA):
        a.then = _resolve_assertion(a.then, preds)
        a.els = _resolve_assertion(a.els, preds)
    elif isinstance(a, LetPatA):
        a.body = _resolve_assertion(a.body, preds)
    return a


def _walk_ghosts(e: SurfaceExpr):
    if isinstance(e, GhostE):
        yield e.cmd
    elif isinstance(e, SeqE):
        for item in e.items:
            yield from _walk_ghosts(item)
    elif isinstance(e, LetIn):
        yield from _walk_ghosts(e.body)
    elif isinstance(e, IfE):
        yield from _walk_ghosts(e.then)
        if e.els is not None:
            yield from _walk_ghosts(e.els)
    elif isinstance(e, MatchE):
        for arm in e.arms:
            yield from _walk_ghosts(arm.body)


def _decap(name: str) -> str:
    return name[:1].lower() + name[1:]


def resolve_spec_name(name: str, table: dict) -> str | None:
    """Spec listings mix `cellSeg_trans` and `CellSeg_trans`; accept both."""
    if name in table:
        return name
    if _decap(name) in table:
        return _decap(name)
    return None


def _validate(m: SurfaceModule, diags: list[Diagnostic]) -> None:
    preds = m.predicates()
    lemmas = m.lemmas()
    logical = m.logical_functions()

    seen: dict[tuple[str, str], Span | None] = {}

    def unique(namespace: str, name: str, span: Span | None) -> None:
        key = (namespace, name)
        if key in seen:
            diags.append(error(Category.PARSE,
                               f"duplicate {namespace} name '{name}'", span))
        seen[key] = span

    ctor_owner: dict[str, str] = {}
    for d in m.decls:
        if isinstance(d, TypeDecl):
            unique("type", d.name, d.span)
            from .surface import VariantKind
            if isinstance(d.kind, VariantKind):
                for c in d.kind.ctors:
                    if c.name in ctor_owner:
                        diags.append(error(
                            Category.PARSE,
                            f"constructor '{c.name}' already declared by "
                            f"type '{ctor_owner[c.name]}'", c.span))
                    ctor_owner[c.name] = d.name
        elif isinstance(d, FunDecl):
            unique("function", d.name, d.span)
        elif isinstance(d, GhostDecl):
            kind = {PredicateDef: "predicate", LemmaDef: "lemma",
                    LogicalFunctionDef: "logical function"}[type(d.payload)]
            unique(kind, d.payload.name, d.span)

    for d in m.decls:
        if not isinstance(d, FunDecl):
            continue
        spec = d.spec
        if spec is not None:
            declared = {n for n, _ in d.params}
            if set(spec.param_names) != declared:
                diags.append(error(
                    Category.PARSE,
                    f"contract for '{d.name}' names parameters "
                    f"{sorted(spec.param_names)} but the function declares "
                    f"{sorted(declared)}", spec.span))
            if spec.fn_name != d.name:
                diags.append(error(
                    Category.PARSE,
                    f"contract names '{spec.fn_name}' but follows "
                    f"'{d.name}'", spec.span))
            if len(spec.results) > 1:
                diags.append(error(Category.PARSE,
                                   "multiple results are unsupported",
                                   spec.span))
            for g, _ in spec.ghost_params:
                if g in declared:
                    diags.append(error(
                        Category.PARSE,
                        f"ghost parameter '{g}' shadows a parameter",
                        spec.span))
        for cmd in _walk_ghosts(d.body):
            if cmd.kind in (GhostKind.FOLD, GhostKind.UNFOLD):
                resolved = resolve_spec_name(cmd.target, preds)
                if resolved is None:
                    diags.append(error(
                        Category.PARSE,
                        f"{cmd.kind.value} target '{cmd.target}' is not a "
                        f"declared predicate", cmd.span))
                    continue
                arity = len(preds[resolved].params)
            else:
                resolved = resolve_spec_name(cmd.target, lemmas)
                if resolved is None:
                    diags.append(error(
                        Category.PARSE,
                        f"apply target '{cmd.target}' is not a declared "
                        f"lemma", cmd.span))
                    continue
                arity = len(lemmas[resolved].params)
            cmd.target = resolved
            if len(cmd.args) != arity:
                diags.append(error(
                    Category.PARSE,
                    f"'{cmd.target}' takes {arity} arguments, "
                    f"got {len(cmd.args)}", cmd.span))

    # classify whole-conjunct applications of declared predicates
    known = dict(preds)
    for d in m.decls:
        if isinstance(d, GhostDecl) and isinstance(d.payload, PredicateDef):
            d.payload.body = _resolve_assertion(d.payload.body, known)
        elif isinstance(d, GhostDecl) and isinstance(d.payload, LemmaDef):
            d.payload.requires = [_resolve_assertion(a, known)
                                  for a in d.payload.requires]
            d.payload.ensures = [_resolve_assertion(a, known)
                                 for a in d.payload.ensures]
        elif isinstance(d, FunDecl) and d.spec is not None:
            d.spec.requires = [_resolve_assertion(a, known)
                               for a in d.spec.requires]
            d.spec.ensures = [_resolve_assertion(a, known)
                              for a in d.spec.ensures]
    _ = logical


def parse_module(tokens: list[Token]) -> tuple[SurfaceModule | None, list[Diagnostic]]:
    p = _ModuleParser(tokens)
    try:
        module = p.parse_module()
    except ParseError as e:
        return None, p.diags + [e.diag]
    _validate(module, p.diags)
    from .diagnostics import has_errors
    if has_errors(p.diags):
        return None, p.diags
    return module, p.diags


def parse_source(source: str) -> tuple[SurfaceModule | None, list[Diagnostic]]:
    tokens, diags = lex(source)
    if diags:
        return None, diags
    return parse_module(tokens)
