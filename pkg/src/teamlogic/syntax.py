"""Abstract syntax for FO, FO(C), dependence and independence-friendly formulas.

Formulas are immutable and always in negation normal form: negation only
occurs in the literal node types ``NotEquals``, ``NegAtom`` and ``NegDep``.
One AST covers every fragment; variables are arbitrary identifiers and the
two- and three-variable restrictions are checked by :func:`classify_fragment`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Iterator, Union

from .errors import ArityError, FragmentError, UnknownSymbolError


# ---------------------------------------------------------------- vocabulary


@dataclass(frozen=True)
class Vocabulary:
    relations: tuple[tuple[str, int], ...] = ()
    constants: tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "relations", tuple((str(n), int(a)) for n, a in self.relations))
        object.__setattr__(self, "constants", tuple(self.constants))
        seen = set()
        for name, arity in self.relations:
            if arity < 0:
                raise ArityError(f"relation {name} has negative arity {arity}")
            if name in seen:
                raise UnknownSymbolError(f"duplicate symbol {name}")
            seen.add(name)
        for name in self.constants:
            if name in seen:
                raise UnknownSymbolError(f"duplicate symbol {name}")
            seen.add(name)

    @property
    def relation_names(self) -> tuple[str, ...]:
        return tuple(n for n, _ in self.relations)

    def arity(self, name: str) -> int:
        for n, a in self.relations:
            if n == name:
                return a
        raise UnknownSymbolError(f"unknown relation symbol {name}")

    def has_relation(self, name: str) -> bool:
        return any(n == name for n, _ in self.relations)

    def symbols(self) -> set[str]:
        return set(self.relation_names) | set(self.constants)

    def union(self, other: "Vocabulary") -> "Vocabulary":
        rels = list(self.relations)
        for name, arity in other.relations:
            if self.has_relation(name):
                if self.arity(name) != arity:
                    raise ArityError(f"relation {name} used with arities {self.arity(name)} and {arity}")
            else:
                rels.append((name, arity))
        consts = list(self.constants) + [c for c in other.constants if c not in self.constants]
        return Vocabulary(tuple(rels), tuple(consts))

    def __str__(self) -> str:
        parts = [f"{n}/{a}" for n, a in self.relations] + list(self.constants)
        return "{" + ", ".join(parts) + "}"


# --------------------------------------------------------------------- terms


@dataclass(frozen=True)
class Var:
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Const:
    name: str

    def __str__(self) -> str:
        return self.name


Term = Union[Var, Const]


def term_vars(terms: Iterable[Term]) -> frozenset[str]:
    return frozenset(t.name for t in terms if isinstance(t, Var))


# ------------------------------------------------------------------ formulas


class Formula:
    """Marker base class; concrete nodes are the frozen dataclasses below."""

    __slots__ = ()

    def __str__(self) -> str:
        return print_formula(self)

    def __and__(self, other: "Formula") -> "Formula":
        return And(self, other)

    def __or__(self, other: "Formula") -> "Formula":
        return Or(self, other)


@dataclass(frozen=True, eq=True, repr=True)
class Equals(Formula):
    left: Term
    right: Term


@dataclass(frozen=True)
class NotEquals(Formula):
    left: Term
    right: Term


@dataclass(frozen=True)
class Atom(Formula):
    name: str
    args: tuple[Term, ...] = ()


@dataclass(frozen=True)
class NegAtom(Formula):
    name: str
    args: tuple[Term, ...] = ()


@dataclass(frozen=True)
class Dep(Formula):
    args: tuple[Term, ...]

    def __post_init__(self):
        if not self.args:
            raise ArityError("dependence atom needs at least one term")


@dataclass(frozen=True)
class NegDep(Formula):
    args: tuple[Term, ...]

    def __post_init__(self):
        if not self.args:
            raise ArityError("dependence atom needs at least one term")


@dataclass(frozen=True)
class And(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Or(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Exists(Formula):
    """``exists var/slash. body``; a plain existential has an empty slash set."""

    var: str
    body: Formula
    slash: frozenset[str] = field(default_factory=frozenset)

    def __post_init__(self):
        object.__setattr__(self, "slash", frozenset(self.slash))


@dataclass(frozen=True)
class Forall(Formula):
    var: str
    body: Formula


@dataclass(frozen=True)
class CountExists(Formula):
    """``exists>=bound var. body`` (mode ``>=``) or ``exists<=bound var. body``."""

    mode: str
    bound: int
    var: str
    body: Formula

    def __post_init__(self):
        if self.mode not in (">=", "<="):
            raise ValueError(f"bad counting mode {self.mode!r}")
        if self.bound < 0:
            raise ValueError("counting bound must be non-negative")


LITERALS = (Equals, NotEquals, Atom, NegAtom)
QUANTIFIERS = (Exists, Forall, CountExists)


@dataclass(frozen=True)
class SOSentence:
    """Existential second-order sentence ``exists-rel R1/a1 . ... matrix``.

    ``team_relation`` names the free relation standing for ``rel(X)`` in
    translations of open formulas; it is part of the vocabulary, not the prefix.
    """

    prefix: tuple[tuple[str, int], ...]
    matrix: Formula
    team_relation: tuple[str, int] | None = None

    def __post_init__(self):
        object.__setattr__(self, "prefix", tuple((str(n), int(a)) for n, a in self.prefix))
        names = [n for n, _ in self.prefix]
        if len(set(names)) != len(names):
            raise UnknownSymbolError("duplicate relation variable in prefix")
        for node in walk(self.matrix):
            if isinstance(node, (Dep, NegDep)) or (isinstance(node, Exists) and node.slash):
                raise FragmentError("second-order matrix must be first-order")

    def __str__(self) -> str:
        return print_so_sentence(self)


# ------------------------------------------------------------- constructors


def conj(*formulas: Formula) -> Formula:
    items = _flatten_args(formulas)
    if not items:
        raise ValueError("empty conjunction")
    out = items[0]
    for f in items[1:]:
        out = And(out, f)
    return out


def disj(*formulas: Formula) -> Formula:
    items = _flatten_args(formulas)
    if not items:
        raise ValueError("empty disjunction")
    out = items[0]
    for f in items[1:]:
        out = Or(out, f)
    return out


def _flatten_args(formulas) -> list[Formula]:
    out = []
    for f in formulas:
        if isinstance(f, Formula):
            out.append(f)
        else:
            out.extend(f)
    return out


def forall(variables: str, body: Formula) -> Formula:
    """``forall("x y", f)`` is ``forall x. forall y. f``."""
    for v in reversed(variables.split()):
        body = Forall(v, body)
    return body


def exists(variables: str, body: Formula) -> Formula:
    for v in reversed(variables.split()):
        body = Exists(v, body)
    return body


def atom(name: str, *args: str) -> Atom:
    return Atom(name, tuple(Var(a) for a in args))


def neg_atom(name: str, *args: str) -> NegAtom:
    return NegAtom(name, tuple(Var(a) for a in args))


def eq(a: str, b: str) -> Equals:
    return Equals(Var(a), Var(b))


def dep(*args: str) -> Dep:
    return Dep(tuple(Var(a) for a in args))


def conjuncts(f: Formula) -> list[Formula]:
    if isinstance(f, And):
        return conjuncts(f.left) + conjuncts(f.right)
    return [f]


def disjuncts(f: Formula) -> list[Formula]:
    if isinstance(f, Or):
        return disjuncts(f.left) + disjuncts(f.right)
    return [f]


# ----------------------------------------------------------------- traversal


def children(f: Formula) -> tuple[Formula, ...]:
    if isinstance(f, (And, Or)):
        return (f.left, f.right)
    if isinstance(f, QUANTIFIERS):
        return (f.body,)
    return ()


def walk(f: Formula) -> Iterator[Formula]:
    stack = [f]
    while stack:
        node = stack.pop()
        yield node
        stack.extend(reversed(children(node)))


def is_literal(f: Formula) -> bool:
    return isinstance(f, LITERALS)


def is_first_order(f: Formula) -> bool:
    """True when ``f`` has no dependence atoms and no nonempty slash sets."""
    for node in walk(f):
        if isinstance(node, (Dep, NegDep)):
            return False
        if isinstance(node, Exists) and node.slash:
            return False
    return True


def has_counting(f: Formula) -> bool:
    return any(isinstance(node, CountExists) for node in walk(f))


def is_quantifier_free(f: Formula) -> bool:
    return not any(isinstance(node, QUANTIFIERS) for node in walk(f))


# ------------------------------------------------------------ free variables


_VAR_RANK = {"x": 0, "y": 1, "z": 2}


def var_key(name: str):
    return (_VAR_RANK.get(name, 3), name)


def order_vars(names: Iterable[str]) -> tuple[str, ...]:
    """Canonical variable order: x, y, z first, then alphabetical."""
    return tuple(sorted(set(names), key=var_key))


def free_vars(f: Formula) -> frozenset[str]:
    if isinstance(f, (Equals, NotEquals)):
        return term_vars((f.left, f.right))
    if isinstance(f, (Atom, NegAtom, Dep, NegDep)):
        return term_vars(f.args)
    if isinstance(f, (And, Or)):
        return free_vars(f.left) | free_vars(f.right)
    if isinstance(f, Exists):
        return f.slash | (free_vars(f.body) - {f.var})
    if isinstance(f, (Forall, CountExists)):
        return free_vars(f.body) - {f.var}
    raise TypeError(f"not a formula: {f!r}")


def is_sentence(f: Formula) -> bool:
    return not free_vars(f)


def variables(f: Formula) -> frozenset[str]:
    """Every variable occurring in ``f``: free, bound or in a slash set."""
    out: set[str] = set()
    for node in walk(f):
        if isinstance(node, (Equals, NotEquals)):
            out |= term_vars((node.left, node.right))
        elif isinstance(node, (Atom, NegAtom, Dep, NegDep)):
            out |= term_vars(node.args)
        elif isinstance(node, QUANTIFIERS):
            out.add(node.var)
            if isinstance(node, Exists):
                out |= node.slash
    return frozenset(out)


def relation_symbols(f: Formula) -> dict[str, int]:
    out: dict[str, int] = {}
    for node in walk(f):
        if isinstance(node, (Atom, NegAtom)):
            arity = len(node.args)
            if out.setdefault(node.name, arity) != arity:
                raise ArityError(f"relation {node.name} used with arities {out[node.name]} and {arity}")
    return out


def constant_symbols(f: Formula) -> set[str]:
    out = set()
    for node in walk(f):
        terms: tuple = ()
        if isinstance(node, (Equals, NotEquals)):
            terms = (node.left, node.right)
        elif isinstance(node, (Atom, NegAtom, Dep, NegDep)):
            terms = node.args
        out |= {t.name for t in terms if isinstance(t, Const)}
    return out


def vocabulary_of(f: Formula) -> Vocabulary:
    """The symbols ``f`` uses, relations and constants sorted by name."""
    rels = relation_symbols(f)
    return Vocabulary(tuple(sorted(rels.items())), tuple(sorted(constant_symbols(f))))


def check_vocabulary(f: Formula, vocab: Vocabulary) -> None:
    for name, arity in relation_symbols(f).items():
        if not vocab.has_relation(name):
            raise UnknownSymbolError(f"relation {name} not in vocabulary {vocab}")
        if vocab.arity(name) != arity:
            raise ArityError(f"relation {name} has arity {vocab.arity(name)}, used with {arity}")
    for c in constant_symbols(f):
        if c not in vocab.constants:
            raise UnknownSymbolError(f"constant {c} not in vocabulary {vocab}")


# ----------------------------------------------------------------- fragments


class Fragment(str, Enum):
    FO2 = "FO2"
    FOC2 = "FOC2"
    D2 = "D2"
    D3 = "D3"
    IF2 = "IF2"
    FO = "FO"
    D = "D"
    IF = "IF"

    def __str__(self) -> str:
        return self.value


_TWO = frozenset({"x", "y"})
_THREE = frozenset({"x", "y", "z"})


def classify_fragment(f: Formula) -> set[Fragment]:
    has_dep = has_slash = counting = False
    dep_arity_ok = True
    for node in walk(f):
        if isinstance(node, (Dep, NegDep)):
            has_dep = True
            dep_arity_ok &= len(node.args) <= 2
        elif isinstance(node, Exists) and node.slash:
            has_slash = True
        elif isinstance(node, CountExists):
            counting = True
    vs = variables(f)
    two = vs <= _TWO
    tags: set[Fragment] = set()
    if not has_dep and not has_slash:
        if two:
            tags.add(Fragment.FOC2)
        if not counting:
            tags.add(Fragment.FO)
            if two:
                tags.add(Fragment.FO2)
    if not has_slash and not counting:
        tags.add(Fragment.D)
        if vs <= _THREE:
            tags.add(Fragment.D3)
        if two and dep_arity_ok:
            tags.add(Fragment.D2)
    if not has_dep and not counting:
        tags.add(Fragment.IF)
        if two:
            tags.add(Fragment.IF2)
    return tags


def require_fragment(f: Formula, fragment: Fragment, what: str = "formula") -> None:
    if fragment not in classify_fragment(f):
        raise FragmentError(f"{what} is not in {fragment}: {print_formula(f)}")


# ------------------------------------------------------------------ negation


def negate(f: Formula) -> Formula:
    """Negation normal form of ``!f``, pushing negation to the literals.

    The dual of a slashed existential is the slashed universal, whose
    semantics coincides with the plain universal, so ``!exists x/W. f``
    becomes ``forall x. !f``.
    """
    if isinstance(f, Equals):
        return NotEquals(f.left, f.right)
    if isinstance(f, NotEquals):
        return Equals(f.left, f.right)
    if isinstance(f, Atom):
        return NegAtom(f.name, f.args)
    if isinstance(f, NegAtom):
        return Atom(f.name, f.args)
    if isinstance(f, Dep):
        return NegDep(f.args)
    if isinstance(f, NegDep):
        return Dep(f.args)
    if isinstance(f, And):
        return Or(negate(f.left), negate(f.right))
    if isinstance(f, Or):
        return And(negate(f.left), negate(f.right))
    if isinstance(f, Exists):
        return Forall(f.var, negate(f.body))
    if isinstance(f, Forall):
        return Exists(f.var, negate(f.body))
    if isinstance(f, CountExists):
        if f.mode == "<=":
            return CountExists(">=", f.bound + 1, f.var, f.body)
        if f.bound == 0:
            # not(at least 0) is false on every nonempty domain
            return Forall(f.var, NotEquals(Var(f.var), Var(f.var)))
        return CountExists("<=", f.bound - 1, f.var, f.body)
    raise TypeError(f"not a formula: {f!r}")


def implies(antecedent: Formula, consequent: Formula) -> Formula:
    """``a -> b`` as ``nnf(!a) | b``; the antecedent must be first-order."""
    if not is_first_order(antecedent):
        raise FragmentError("implication antecedent must be free of dependence atoms and slashes")
    return Or(negate(antecedent), consequent)


# ------------------------------------------------------------ substitutions


def map_terms(f: Formula, fn) -> Formula:
    """Apply ``fn`` to every term, and to bound/slashed variable names via Var."""
    if isinstance(f, (Equals, NotEquals)):
        return type(f)(fn(f.left), fn(f.right))
    if isinstance(f, (Atom, NegAtom)):
        return type(f)(f.name, tuple(fn(t) for t in f.args))
    if isinstance(f, (Dep, NegDep)):
        return type(f)(tuple(fn(t) for t in f.args))
    if isinstance(f, (And, Or)):
        return type(f)(map_terms(f.left, fn), map_terms(f.right, fn))
    if isinstance(f, Exists):
        return Exists(fn(Var(f.var)).name, map_terms(f.body, fn), frozenset(fn(Var(v)).name for v in f.slash))
    if isinstance(f, Forall):
        return Forall(fn(Var(f.var)).name, map_terms(f.body, fn))
    if isinstance(f, CountExists):
        return CountExists(f.mode, f.bound, fn(Var(f.var)).name, map_terms(f.body, fn))
    raise TypeError(f"not a formula: {f!r}")


def rename_vars(f: Formula, mapping: dict[str, str]) -> Formula:
    """Rename every occurrence (free and bound) of variables simultaneously."""

    def fn(t: Term) -> Term:
        if isinstance(t, Var) and t.name in mapping:
            return Var(mapping[t.name])
        return t

    return map_terms(f, fn)


def swap_xy(f: Formula) -> Formula:
    return rename_vars(f, {"x": "y", "y": "x"})


def rename_relations(f: Formula, mapping: dict[str, str]) -> Formula:
    if isinstance(f, (Atom, NegAtom)):
        return type(f)(mapping.get(f.name, f.name), f.args)
    if isinstance(f, (And, Or)):
        return type(f)(rename_relations(f.left, mapping), rename_relations(f.right, mapping))
    if isinstance(f, Exists):
        return Exists(f.var, rename_relations(f.body, mapping), f.slash)
    if isinstance(f, Forall):
        return Forall(f.var, rename_relations(f.body, mapping))
    if isinstance(f, CountExists):
        return CountExists(f.mode, f.bound, f.var, rename_relations(f.body, mapping))
    return f


# ------------------------------------------------------------------ printing


def print_term(t: Term) -> str:
    return t.name


def _print_args(args) -> str:
    return "(" + ",".join(print_term(t) for t in args) + ")"


def print_formula(f: Formula) -> str:
    """Concrete syntax; ``parse_formula(print_formula(f)) == f``."""
    if isinstance(f, Equals):
        return f"{print_term(f.left)}={print_term(f.right)}"
    if isinstance(f, NotEquals):
        return f"!({print_term(f.left)}={print_term(f.right)})"
    if isinstance(f, Atom):
        return f.name + _print_args(f.args)
    if isinstance(f, NegAtom):
        return "!" + f.name + _print_args(f.args)
    if isinstance(f, Dep):
        return "dep" + _print_args(f.args)
    if isinstance(f, NegDep):
        return "!dep" + _print_args(f.args)
    if isinstance(f, (And, Or)):
        op = " & " if isinstance(f, And) else " | "
        return _print_left(f.left, type(f)) + op + _print_right(f.right)
    if isinstance(f, QUANTIFIERS):
        if isinstance(f, Forall):
            head = f"forall {f.var}"
        elif isinstance(f, CountExists):
            head = f"exists{f.mode}{f.bound} {f.var}"
        elif f.slash:
            head = f"exists {f.var}/{{{','.join(order_vars(f.slash))}}}"
        else:
            head = f"exists {f.var}"
        body = print_formula(f.body)
        if isinstance(f.body, (And, Or)):
            body = f"({body})"
        return f"{head}. {body}"
    raise TypeError(f"not a formula: {f!r}")


def _open_right(f: Formula) -> bool:
    # a quantifier scope extends maximally right, so text after it would be captured
    if isinstance(f, QUANTIFIERS):
        return True
    if isinstance(f, (And, Or)):
        return isinstance(f.right, QUANTIFIERS)
    return False


def _print_left(child: Formula, op_type) -> str:
    text = print_formula(child)
    if isinstance(child, QUANTIFIERS):
        return f"({text})"
    if isinstance(child, (And, Or)) and (type(child) is not op_type or _open_right(child)):
        return f"({text})"
    return text


def _print_right(child: Formula) -> str:
    text = print_formula(child)
    if isinstance(child, (And, Or)):
        return f"({text})"
    return text


def print_so_sentence(s: SOSentence) -> str:
    head = "".join(f"exists-rel {name}/{arity} . " for name, arity in s.prefix)
    return head + print_formula(s.matrix)


def formula_size(f: Formula) -> int:
    return sum(1 for _ in walk(f))
