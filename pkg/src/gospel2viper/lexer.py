"""Lexer for the OCaml-light surface language.

Ordinary ``(* ... *)`` comments nest and are discarded.  Annotation
comments ``(*@ ... *)`` become a single ANNOTATION token that keeps the
raw payload text and its offset, so the payload can be re-lexed in
annotation mode later.  In annotation mode the contract keywords
(requires, ensures, predicate, function, lemma, fold, unfold, apply)
are hard keywords; in program mode they are plain identifiers.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum, auto

from .diagnostics import Category, Diagnostic, Span, error

# Both the unicode wiggle arrows and the ASCII digraph denote ownership.
OWNS_ARROWS = ("⇝", "↝", "⤳")


class T(Enum):
    IDENT = auto()
    INT = auto()
    ANNOTATION = auto()
    # punctuation
    LPAREN = auto(); RPAREN = auto()
    LBRACE = auto(); RBRACE = auto()
    LBRACKET = auto(); RBRACKET = auto()
    SEMI = auto(); COLON = auto(); COMMA = auto()
    DOT = auto(); DOTDOT = auto()
    PIPE = auto(); ARROW = auto(); LARROW = auto(); OWNS = auto()
    EQ = auto(); NEQ = auto(); LT = auto(); LE = auto(); GT = auto(); GE = auto()
    PLUS = auto(); MINUS = auto(); STAR = auto(); SLASH = auto()
    PLUSPLUS = auto(); AMPAMP = auto(); BARBAR = auto()
    # program keywords
    TYPE = auto(); OF = auto(); MUTABLE = auto()
    LET = auto(); IN = auto()
    IF = auto(); THEN = auto(); ELSE = auto()
    MATCH = auto(); WITH = auto()
    TRUE = auto(); FALSE = auto()
    # annotation-mode keywords
    REQUIRES = auto(); ENSURES = auto()
    PREDICATE = auto(); FUNCTION = auto(); LEMMA = auto()
    FOLD = auto(); UNFOLD = auto(); APPLY = auto()
    EOF = auto()


KEYWORDS = {
    "type": T.TYPE, "of": T.OF, "mutable": T.MUTABLE,
    "let": T.LET, "in": T.IN,
    "if": T.IF, "then": T.THEN, "else": T.ELSE,
    "match": T.MATCH, "with": T.WITH,
    "true": T.TRUE, "false": T.FALSE,
}

SPEC_KEYWORDS = {
    "requires": T.REQUIRES, "ensures": T.ENSURES,
    "predicate": T.PREDICATE, "function": T.FUNCTION, "lemma": T.LEMMA,
    "fold": T.FOLD, "unfold": T.UNFOLD, "apply": T.APPLY,
}

PUNCT = [
    ("~>", T.OWNS), ("<-", T.LARROW), ("->", T.ARROW),
    ("++", T.PLUSPLUS), ("&&", T.AMPAMP), ("||", T.BARBAR),
    ("..", T.DOTDOT), ("<>", T.NEQ), ("<=", T.LE), (">=", T.GE),
    ("(", T.LPAREN), (")", T.RPAREN), ("{", T.LBRACE), ("}", T.RBRACE),
    ("[", T.LBRACKET), ("]", T.RBRACKET),
    (";", T.SEMI), (":", T.COLON), (",", T.COMMA), (".", T.DOT),
    ("|", T.PIPE), ("=", T.EQ), ("<", T.LT), (">", T.GT),
    ("+", T.PLUS), ("-", T.MINUS), ("*", T.STAR), ("/", T.SLASH),
]


@dataclass
class Token:
    kind: T
    text: str
    span: Span
    # only set on ANNOTATION tokens
    payload: str | None = field(default=None, repr=False)
    payload_offset: int = field(default=0, repr=False)

    def is_upper_ident(self) -> bool:
        return self.kind is T.IDENT and self.text[:1].isupper()


def _ident_start(ch: str) -> bool:
    return ch.isalpha() or ch == "_"


def _ident_cont(ch: str) -> bool:
    return ch.isalnum() or ch in "_'"


def lex(source: str, base: int = 0, spec_mode: bool = False
        ) -> tuple[list[Token], list[Diagnostic]]:
    """Tokenize `source`.  Returns ([], [diagnostic]) on a lexical error.

    `base` shifts all spans, so annotation payloads keep file positions.
    """
    toks: list[Token] = []
    i, n = 0, len(source)

    def tok(kind: T, start: int, end: int, **kw) -> None:
        toks.append(Token(kind, source[start:end],
                          Span(base + start, base + end), **kw))

    while i < n:
        ch = source[i]
        if ch in " \t\r\n":
            i += 1
            continue

        if source.startswith("(*", i):
            start = i
            is_annot = source.startswith("(*@", i)
            depth, j = 1, i + (3 if is_annot else 2)
            while j < n and depth:
                if source.startswith("(*", j):
                    depth += 1; j += 2
                elif source.startswith("*)", j):
                    depth -= 1; j += 2
                else:
                    j += 1
            if depth:
                return [], [error(Category.PARSE, "unterminated comment",
                                  Span(base + start, base + n))]
            if is_annot:
                payload_start = start + 3
                tok(T.ANNOTATION, start, j,
                    payload=source[payload_start:j - 2],
                    payload_offset=base + payload_start)
            i = j
            continue

        if ch in OWNS_ARROWS:
            tok(T.OWNS, i, i + 1)
            i += 1
            continue

        if ch.isdigit():
            j = i
            while j < n and source[j].isdigit():
                j += 1
            tok(T.INT, i, j)
            i = j
            continue

        if _ident_start(ch):
            j = i
            while j < n and _ident_cont(source[j]):
                j += 1
            word = source[i:j]
            kind = KEYWORDS.get(word)
            if kind is None and spec_mode:
                kind = SPEC_KEYWORDS.get(word)
            tok(kind or T.IDENT, i, j)
            i = j
            continue

        for text, kind in PUNCT:
            if source.startswith(text, i):
                tok(kind, i, i + len(text))
                i += len(text)
                break
        else:
            return [], [error(Category.PARSE, f"unexpected character {ch!r}",
                              Span(base + i, base + i + 1))]

    toks.append(Token(T.EOF, "", Span(base + n, base + n)))
    return toks, []
