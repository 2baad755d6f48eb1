"""OCaml-with-annotations to Viper translation and permission checking."""

from .diagnostics import (Category, Diagnostic, LineIndex, Severity, Span,
                          has_errors, sort_key)
from .lexer import lex
from .parser import parse_module, parse_source
from .permcheck import Checker, SymState, check_program
from .translate import prelude_decls, translate, translate_source
from .viper_ast import ViperProgram, golden_equal, pretty, token_texts
from .viper_parser import ViperParseError, reparse

__all__ = [
    "Category",
    "Checker",
    "Diagnostic",
    "LineIndex",
    "Severity",
    "Span",
    "SymState",
    "ViperParseError",
    "ViperProgram",
    "check_program",
    "golden_equal",
    "has_errors",
    "lex",
    "parse_module",
    "parse_source",
    "prelude_decls",
    "pretty",
    "reparse",
    "sort_key",
    "token_texts",
    "translate",
    "translate_source",
]
