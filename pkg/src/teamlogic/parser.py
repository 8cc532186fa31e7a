"""Recursive-descent parser for the ASCII formula grammar.

Precedence from loosest to tightest: ``->`` (right associative), ``|``,
``&``, prefix ``!``. A quantifier's scope extends as far right as possible.
Negations are pushed to the literals while parsing, so the result is always
in negation normal form.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .errors import ArityError, FormulaSyntaxError, FragmentError, UnknownSymbolError
from .syntax import (
    And,
    Atom,
    Const,
    CountExists,
    Dep,
    Equals,
    Exists,
    Forall,
    Formula,
    Or,
    SOSentence,
    Var,
    Vocabulary,
    check_vocabulary,
    implies,
    is_first_order,
    negate,
    relation_symbols,
)

_UNICODE = {"∧": "&", "∨": "|", "¬": "!", "→": "->", "∀": "forall ", "∃": "exists ", "≠": "!="}

_TOKEN = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<existsrel>exists-rel\b)
  | (?P<count>exists\s*(?:>=|<=)\s*\d+)
  | (?P<num>\d+)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_']*)
  | (?P<op>->|!=|[()\{\},./&|!=])
    """,
    re.VERBOSE,
)


@dataclass
class _Tok:
    kind: str
    text: str
    pos: int


def _tokenize(text: str) -> list[_Tok]:
    toks = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise FormulaSyntaxError(f"unexpected character {text[pos]!r}", pos, text)
        kind = m.lastgroup
        if kind != "ws":
            value = m.group()
            if kind == "op":
                kind = value
            elif kind == "ident" and value in ("forall", "exists", "dep"):
                kind = value
            toks.append(_Tok(kind, value, pos))
        pos = m.end()
    toks.append(_Tok("eof", "", len(text)))
    return toks


def _normalize_unicode(text: str) -> str:
    for k, v in _UNICODE.items():
        text = text.replace(k, v)
    return text


class _Parser:
    def __init__(self, text: str, vocab: Vocabulary | None):
        self.text = text
        self.toks = _tokenize(text)
        self.i = 0
        self.vocab = vocab
        self.constants = set(vocab.constants) if vocab else set()

    # -- token helpers

    @property
    def tok(self) -> _Tok:
        return self.toks[self.i]

    def error(self, message: str, tok: _Tok | None = None):
        tok = tok or self.tok
        return FormulaSyntaxError(message, tok.pos, self.text)

    def accept(self, kind: str) -> _Tok | None:
        if self.tok.kind == kind:
            t = self.tok
            self.i += 1
            return t
        return None

    def expect(self, kind: str, what: str | None = None) -> _Tok:
        t = self.accept(kind)
        if t is None:
            found = self.tok.text or "end of input"
            raise self.error(f"expected {what or repr(kind)}, found {found!r}")
        return t

    # -- grammar

    def parse_top(self) -> Formula:
        f = self.implication()
        if self.tok.kind != "eof":
            raise self.error(f"unexpected {self.tok.text!r}")
        return f

    def implication(self) -> Formula:
        start = self.tok
        left = self.disjunction()
        if self.accept("->"):
            right = self.implication()
            if not is_first_order(left):
                raise FragmentError(
                    f"antecedent of '->' at position {start.pos} must not contain dependence atoms or slashes"
                )
            return implies(left, right)
        return left

    def disjunction(self) -> Formula:
        f = self.conjunction()
        while self.accept("|"):
            f = Or(f, self.conjunction())
        return f

    def conjunction(self) -> Formula:
        f = self.unary()
        while self.accept("&"):
            f = And(f, self.unary())
        return f

    def unary(self) -> Formula:
        if self.accept("!"):
            return negate(self.unary())
        kind = self.tok.kind
        if kind in ("forall", "exists", "count"):
            return self.quantifier()
        if self.accept("("):
            f = self.implication()
            self.expect(")")
            return f
        return self.atomic()

    def bound_var(self) -> str:
        t = self.expect("ident", "a variable")
        if t.text in self.constants:
            raise self.error(f"constant {t.text} cannot be quantified", t)
        return t.text

    def quantifier(self) -> Formula:
        t = self.tok
        self.i += 1
        if t.kind == "count":
            m = re.match(r"exists\s*(>=|<=)\s*(\d+)", t.text)
            mode, bound = m.group(1), int(m.group(2))
            var = self.bound_var()
            self.accept(".")
            return CountExists(mode, bound, var, self.implication())
        var = self.bound_var()
        slash: frozenset[str] = frozenset()
        if t.kind == "exists" and self.accept("/"):
            self.expect("{")
            names = []
            if self.tok.kind != "}":
                names.append(self.bound_var())
                while self.accept(","):
                    names.append(self.bound_var())
            self.expect("}")
            slash = frozenset(names)
        elif self.tok.kind == "/":
            raise self.error("slash sets are only allowed on existential quantifiers")
        # the dot is optional so that "∀x ∃y (...)" parses
        self.accept(".")
        body = self.implication()
        if t.kind == "forall":
            return Forall(var, body)
        return Exists(var, body, slash)

    def term(self):
        t = self.tok
        if t.kind != "ident":
            raise self.error(f"expected a term, found {t.text or 'end of input'!r}")
        self.i += 1
        return Const(t.text) if t.text in self.constants else Var(t.text)

    def term_list(self) -> tuple:
        self.expect("(")
        args = []
        if self.tok.kind != ")":
            args.append(self.term())
            while self.accept(","):
                args.append(self.term())
        self.expect(")")
        return tuple(args)

    def atomic(self) -> Formula:
        t = self.tok
        if self.accept("dep"):
            args = self.term_list()
            if not args:
                raise self.error("dependence atom needs at least one term", t)
            return Dep(args)
        if t.kind == "ident" and self.toks[self.i + 1].kind == "(":
            self.i += 1
            args = self.term_list()
            self.check_relation(t, len(args))
            return Atom(t.text, args)
        left = self.term()
        if self.accept("="):
            return Equals(left, self.term())
        if self.accept("!="):
            return negate(Equals(left, self.term()))
        raise self.error(f"expected '=' or '!=' after term {t.text!r}")

    def check_relation(self, t: _Tok, arity: int) -> None:
        if self.vocab is None:
            return
        if not self.vocab.has_relation(t.text):
            raise UnknownSymbolError(f"unknown relation symbol {t.text} at position {t.pos}")
        if self.vocab.arity(t.text) != arity:
            raise ArityError(
                f"relation {t.text} has arity {self.vocab.arity(t.text)} but is applied to {arity} terms"
                f" at position {t.pos}"
            )


def parse_formula(text: str, vocab: Vocabulary | None = None, constants=()) -> Formula:
    """Parse ``text`` into an NNF formula.

    With a vocabulary, relation symbols and arities are checked and the
    vocabulary's constants are recognised as constant terms. Without one,
    identifiers listed in ``constants`` are constants and everything else in
    term position is a variable; arities only need to be used consistently.
    """
    text = _normalize_unicode(text)
    p = _Parser(text, vocab)
    if vocab is None:
        p.constants = set(constants)
    f = p.parse_top()
    relation_symbols(f)  # arity consistency
    if vocab is not None:
        check_vocabulary(f, vocab)
    return f


def parse_so_sentence(text: str, vocab: Vocabulary | None = None, constants=()) -> SOSentence:
    """Parse ``exists-rel R1/2 . exists-rel R2/0 . <matrix>``."""
    text = _normalize_unicode(text)
    p = _Parser(text, None)
    prefix = []
    while p.accept("existsrel"):
        name = p.expect("ident", "a relation variable")
        p.expect("/")
        arity = p.expect("num", "an arity")
        p.expect(".")
        prefix.append((name.text, int(arity.text)))
    if vocab is not None:
        clash = {n for n, _ in prefix} & vocab.symbols()
        if clash:
            raise UnknownSymbolError(f"relation variables {sorted(clash)} clash with the vocabulary")
        matrix_vocab = vocab.union(Vocabulary(tuple(prefix)))
    else:
        matrix_vocab = None
    rest = _Parser("", matrix_vocab)
    rest.text, rest.toks, rest.i = text, p.toks, p.i
    rest.constants = set(matrix_vocab.constants) if matrix_vocab else set(constants)
    matrix = rest.parse_top()
    rels = relation_symbols(matrix)
    for name, arity in prefix:
        if name in rels and rels[name] != arity:
            raise ArityError(f"relation variable {name} declared with arity {arity}, used with {rels[name]}")
    return SOSentence(tuple(prefix), matrix)
