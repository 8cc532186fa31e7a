"""Syntax-directed translations between D², IF², D³ and ESO over FOC².

* ``d2_to_if2`` replaces dependence atoms by slashed existentials;
* ``if2_to_d3`` replaces slashed existentials by dependence atoms, using a
  third variable ``z`` for the ``{y}``-slashed case;
* ``d2_to_eso`` builds an existential second-order sentence whose free
  relation stands for the team;
* ``to_scott_shape`` and ``eliminate_zeroary`` normalize its output.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from .errors import FragmentError
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
    Fragment,
    NegAtom,
    NegDep,
    NotEquals,
    Or,
    SOSentence,
    Var,
    Vocabulary,
    classify_fragment,
    conj,
    conjuncts,
    disj,
    constant_symbols,
    free_vars,
    is_quantifier_free,
    negate,
    order_vars,
    print_formula,
    relation_symbols,
    rename_vars,
    require_fragment,
    vocabulary_of,
    walk,
)

X, Y, Z = Var("x"), Var("y"), Var("z")
LITERALS = (Equals, NotEquals, Atom, NegAtom)

TRUE = Forall("x", Equals(X, X))
FALSE = Forall("x", NotEquals(X, X))


# ------------------------------------------------------------- dependence atoms


def _dep_shape(d: Dep | NegDep) -> tuple[tuple[str, ...], str | None]:
    """Variables that matter in a dependence atom: (determining vars, determined var).

    Constants among the determining terms are irrelevant; the determined
    var is None when the atom is trivially true (constant or repeated tail).
    """
    *heads, tail = d.args
    head_vars = tuple(dict.fromkeys(t.name for t in heads if isinstance(t, Var)))
    if isinstance(tail, Const) or tail.name in head_vars:
        return head_vars, None
    return head_vars, tail.name


# ---------------------------------------------------------------- D2 -> IF2


def d2_to_if2(f: Formula) -> Formula:
    """Translate a D² formula into an IF² formula equivalent on teams over {x,y}."""
    require_fragment(f, Fragment.D2, "d2_to_if2 input")
    return _d2_to_if2(f)


def _d2_to_if2(f: Formula) -> Formula:
    if isinstance(f, LITERALS):
        return f
    if isinstance(f, NegDep):
        return NotEquals(X, X)
    if isinstance(f, Dep):
        heads, tail = _dep_shape(f)
        if tail is None:
            return Equals(X, X)
        other = "y" if tail == "x" else "x"
        if not heads:
            # dep(x) |-> exists y/{x,y}. x=y, and symmetrically for y
            return Exists(other, Equals(X, Y), frozenset({"x", "y"}))
        # dep(x,y) |-> exists x/{y}. x=y ; dep(y,x) |-> exists y/{x}. x=y
        return Exists(other, Equals(X, Y), frozenset({tail}))
    if isinstance(f, And):
        return And(_d2_to_if2(f.left), _d2_to_if2(f.right))
    if isinstance(f, Or):
        return Or(_d2_to_if2(f.left), _d2_to_if2(f.right))
    if isinstance(f, Exists):
        return Exists(f.var, _d2_to_if2(f.body))
    if isinstance(f, Forall):
        return Forall(f.var, _d2_to_if2(f.body))
    raise FragmentError(f"unexpected node in D2 formula: {print_formula(f)}")


# ---------------------------------------------------------------- IF2 -> D3


def if2_to_d3(f: Formula) -> Formula:
    """Translate an IF² formula into a D³ formula equivalent on teams over {x,y}."""
    require_fragment(f, Fragment.IF2, "if2_to_d3 input")
    if "z" in constant_symbols(f):
        raise FragmentError("the constant name z is reserved for the third variable")
    return _if2_to_d3(f)


def _if2_to_d3(f: Formula) -> Formula:
    if isinstance(f, LITERALS):
        return f
    if isinstance(f, And):
        return And(_if2_to_d3(f.left), _if2_to_d3(f.right))
    if isinstance(f, Or):
        return Or(_if2_to_d3(f.left), _if2_to_d3(f.right))
    if isinstance(f, Forall):
        return Forall(f.var, _if2_to_d3(f.body))
    if isinstance(f, Exists):
        body = _if2_to_d3(f.body)
        if not f.slash:
            return Exists(f.var, body)
        if not f.slash <= {"x", "y"}:
            raise FragmentError(f"slash set {sorted(f.slash)} is not contained in {{x,y}}")
        v = Var(f.var)
        u = Y if f.var == "x" else X
        if f.slash == {"x", "y"}:
            return Exists(f.var, And(Dep((v,)), body))
        if f.slash == {f.var}:
            return Exists(f.var, And(Dep((u, v)), body))
        # slash is the other variable: remember the old value in z
        return Exists("z", And(Equals(v, Z), Exists(f.var, And(Dep((Z, v)), body))))
    raise FragmentError(f"unexpected node in IF2 formula: {print_formula(f)}")


def wrap_sentence(f: Formula, target: str | None = None) -> Formula:
    """``forall x. forall y.`` applied to the translation of a D² or IF² sentence.

    ``target`` is ``"if2"`` (from D²) or ``"d3"`` (from IF²); by default D²
    sentences go to IF² and other IF² sentences to D³.
    """
    if free_vars(f):
        raise FragmentError(f"wrap_sentence needs a sentence, free variables {sorted(free_vars(f))}")
    tags = classify_fragment(f)
    if target is None:
        target = "if2" if Fragment.D2 in tags else "d3"
    if target == "if2":
        body = d2_to_if2(f)
    elif target == "d3":
        body = if2_to_d3(f)
    else:
        raise ValueError(f"unknown target {target!r}")
    return Forall("x", Forall("y", body))


# ---------------------------------------------------------------- D2 -> ESO


class _Names:
    def __init__(self, taken: Iterable[str]):
        self.taken = set(taken)
        self.counter = 0

    def fresh(self) -> str:
        while True:
            self.counter += 1
            name = f"R{self.counter}"
            if name not in self.taken:
                self.taken.add(name)
                return name


def _fv(f: Formula) -> tuple[str, ...]:
    return order_vars(free_vars(f))


def _rel(name: str, variables: tuple[str, ...]) -> Atom:
    return Atom(name, tuple(Var(v) for v in variables))


def _neg_rel(name: str, variables: tuple[str, ...]) -> NegAtom:
    return NegAtom(name, tuple(Var(v) for v in variables))


def _close(variables: Iterable[str], body: Formula) -> Formula:
    for v in reversed(tuple(variables)):
        body = Forall(v, body)
    return body


def d2_to_eso(f: Formula, vocab: Vocabulary | None = None) -> SOSentence:
    """ESO sentence equivalent to ``f`` on teams whose domain is its free variables.

    The free relation (``team_relation``) has arity ``|fr(f)|`` with
    coordinates in the order x, y. Second-order quantifiers of every clause
    are collected into one prefix, named R1, R2, ... in pre-order.
    """
    require_fragment(f, Fragment.D2, "d2_to_eso input")
    vocab = vocab if vocab is not None else vocabulary_of(f)
    taken = vocab.symbols() | set(relation_symbols(f))
    names = _Names(taken)
    team = "R" if "R" not in taken else names.fresh()
    names.taken.add(team)
    prefix: list[tuple[str, int]] = []
    clauses: list[Formula] = []
    _tau(f, team, names, prefix, clauses)
    return SOSentence(tuple(prefix), conj(clauses), (team, len(_fv(f))))


def _tau(f: Formula, rel: str, names: _Names, prefix: list, clauses: list) -> None:
    fv = _fv(f)
    if isinstance(f, LITERALS):
        clauses.append(_close(fv, Or(_neg_rel(rel, fv), f)))
        return
    if isinstance(f, NegDep):
        clauses.append(_close(fv, _neg_rel(rel, fv)))
        return
    if isinstance(f, Dep):
        heads, tail = _dep_shape(f)
        if tail is None:
            witness = Equals(Var(fv[0]), Var(fv[0])) if fv else None
            clauses.append(_close(fv, Or(_neg_rel(rel, fv), witness)) if fv else TRUE)
        elif not heads:
            clauses.append(CountExists("<=", 1, tail, _rel(rel, fv)))
        else:
            (head,) = heads
            clauses.append(Forall(head, CountExists("<=", 1, tail, _rel(rel, fv))))
        return
    if isinstance(f, (And, Or)):
        s, t = names.fresh(), names.fresh()
        fl, fr = _fv(f.left), _fv(f.right)
        prefix.extend([(s, len(fl)), (t, len(fr))])
        combine = Or if isinstance(f, Or) else And
        clauses.append(_close(fv, Or(_neg_rel(rel, fv), combine(_rel(s, fl), _rel(t, fr)))))
        _tau(f.left, s, names, prefix, clauses)
        _tau(f.right, t, names, prefix, clauses)
        return
    if isinstance(f, (Exists, Forall)):
        body_fv = _fv(f.body)
        if f.var not in body_fv:
            _tau(f.body, rel, names, prefix, clauses)
            return
        s = names.fresh()
        prefix.append((s, len(body_fv)))
        inner = Or(_neg_rel(rel, fv), _rel(s, body_fv))
        quant = Exists(f.var, inner) if isinstance(f, Exists) else Forall(f.var, inner)
        clauses.append(_close(fv, quant))
        _tau(f.body, s, names, prefix, clauses)
        return
    raise FragmentError(f"unexpected node in D2 formula: {print_formula(f)}")


# ------------------------------------------------------- constant folding


def _is_true(f) -> bool:
    return f is True or f == TRUE


def _is_false(f) -> bool:
    return f is False or f == FALSE


def _fold(f: Formula, name: str | None = None, value: bool | None = None):
    """Substitute the 0-ary ``name`` by ``value`` and fold truth constants.

    Returns a Formula, True or False.
    """
    if f == TRUE:
        return True
    if f == FALSE:
        return False
    if isinstance(f, Atom) and f.name == name and not f.args:
        return value
    if isinstance(f, NegAtom) and f.name == name and not f.args:
        return not value
    if isinstance(f, LITERALS + (Dep, NegDep)):
        return f
    if isinstance(f, (And, Or)):
        a, b = _fold(f.left, name, value), _fold(f.right, name, value)
        absorbing = isinstance(f, Or)  # True absorbs Or, False absorbs And
        if a is absorbing or b is absorbing:
            return absorbing
        if a is (not absorbing):
            return b
        if b is (not absorbing):
            return a
        return type(f)(a, b)
    if isinstance(f, (Exists, Forall)):
        body = _fold(f.body, name, value)
        if isinstance(body, bool):
            return body  # domains are nonempty
        if isinstance(f, Exists):
            return Exists(f.var, body, f.slash)
        return Forall(f.var, body)
    if isinstance(f, CountExists):
        body = _fold(f.body, name, value)
        if body is False:
            return f.mode == "<="
        if body is True:
            if f.mode == ">=" and f.bound <= 1:
                return True
            body = Equals(Var(f.var), Var(f.var))
        if f.mode == ">=" and f.bound == 0:
            return True
        return CountExists(f.mode, f.bound, f.var, body)
    raise TypeError(f"not a formula: {f!r}")


def _as_formula(f) -> Formula:
    if f is True:
        return TRUE
    if f is False:
        return FALSE
    return f


def fold_constants(f: Formula) -> Formula:
    return _as_formula(_fold(f))


def substitute_zeroary(sentence: SOSentence, name: str, value: bool) -> SOSentence:
    """Replace the 0-ary relation ``name`` by a truth value and fold constants.

    ``name`` may be a prefix variable or the team relation of a translated
    sentence; it disappears from the result either way.
    """
    matrix = _as_formula(_fold(sentence.matrix, name, value))
    prefix = tuple((n, a) for n, a in sentence.prefix if n != name)
    team = sentence.team_relation if sentence.team_relation and sentence.team_relation[0] != name else None
    return SOSentence(prefix, matrix, team)


def d2_to_eso_sentence(f: Formula, vocab: Vocabulary | None = None) -> SOSentence:
    """ESO sentence equivalent to a D² sentence: the team relation is set to true."""
    if free_vars(f):
        raise FragmentError(f"expected a sentence, free variables {sorted(free_vars(f))}")
    sigma = d2_to_eso(f, vocab)
    return substitute_zeroary(sigma, sigma.team_relation[0], True)


def _mentions(f: Formula, name: str) -> bool:
    return any(isinstance(n, (Atom, NegAtom)) and n.name == name for n in walk(f))


def eliminate_zeroary(sentence: SOSentence) -> SOSentence:
    """Remove every 0-ary prefix variable by a case split on its truth value.

    Conjuncts not mentioning the variable stay outside the split.
    """
    matrix = sentence.matrix
    prefix = list(sentence.prefix)
    for name, arity in sentence.prefix:
        if arity != 0:
            continue
        prefix.remove((name, arity))
        parts = conjuncts(matrix)
        outside = [c for c in parts if not _mentions(c, name)]
        inside = [c for c in parts if _mentions(c, name)]
        if inside:
            block = conj(inside)
            split = _fold(Or(_as_formula(_fold(block, name, True)), _as_formula(_fold(block, name, False))))
            if split is False:
                matrix = FALSE
                continue
            if split is not True:
                outside.append(split)
        matrix = _as_formula(_fold(conj(outside))) if outside else TRUE
    return SOSentence(tuple(prefix), matrix, sentence.team_relation)


# -------------------------------------------------------------- Scott shape


@dataclass(frozen=True)
class ScottShape:
    """``exists prefix. forall x y. universal & AND forall x exists y. w & AND forall x exists<=1 y. F(x,y)``.

    ``universal`` and every witness are quantifier-free over {x, y}.
    """

    prefix: tuple[tuple[str, int], ...]
    universal: Formula
    witnesses: tuple[Formula, ...]
    functional: tuple[str, ...]
    team_relation: tuple[str, int] | None = None

    def to_sentence(self) -> SOSentence:
        parts = [Forall("x", Forall("y", self.universal))]
        parts += [Forall("x", Exists("y", w)) for w in self.witnesses]
        parts += [Forall("x", CountExists("<=", 1, "y", _rel(r, ("x", "y")))) for r in self.functional]
        return SOSentence(self.prefix, conj(parts), self.team_relation)

    def describe(self) -> str:
        lines = ["prefix: " + (", ".join(f"{n}/{a}" for n, a in self.prefix) or "(none)")]
        lines.append("forall x. forall y. " + _paren(self.universal))
        for w in self.witnesses:
            lines.append("forall x. exists y. " + _paren(w))
        for r in self.functional:
            lines.append(f"forall x. exists<=1 y. {r}(x,y)")
        return "\n".join(lines)


def _paren(f: Formula) -> str:
    text = print_formula(f)
    return f"({text})" if isinstance(f, (And, Or)) else text


def validate_scott_shape(shape: ScottShape, vocab: Vocabulary | None = None) -> list[str]:
    """Problems with ``shape``; an empty list means it is well formed."""
    problems = []
    known = {n: a for n, a in shape.prefix}
    if shape.team_relation:
        known[shape.team_relation[0]] = shape.team_relation[1]
    if vocab is not None:
        known.update(dict(vocab.relations))
    for label, part in [("universal part", shape.universal)] + [
        (f"witness {i}", w) for i, w in enumerate(shape.witnesses)
    ]:
        if not is_quantifier_free(part):
            problems.append(f"{label} is not quantifier-free")
        if not free_vars(part) <= {"x", "y"}:
            problems.append(f"{label} uses variables outside x, y")
        if any(isinstance(n, (Dep, NegDep)) for n in walk(part)):
            problems.append(f"{label} contains a dependence atom")
        if vocab is not None:
            for name, arity in relation_symbols(part).items():
                if known.get(name) != arity:
                    problems.append(f"{label} uses unknown relation {name}/{arity}")
    for r in shape.functional:
        if vocab is not None and known.get(r) != 2:
            problems.append(f"functional relation {r} is not a known binary relation")
        elif vocab is None and r in dict(shape.prefix) and dict(shape.prefix)[r] != 2:
            problems.append(f"functional relation {r} is not binary")
    return problems


def to_scott_shape(sentence: SOSentence) -> ScottShape:
    """Bring a translated ESO sentence into the three-block shape.

    Inverted functional atoms ``forall y. exists<=1 x. Q(x,y)`` get a fresh
    inverse relation, and unary ``exists<=1 v. Q(v)`` a fresh binary one,
    each tied to the original by a biconditional in the universal part.
    A disjunction of sentences (left behind by 0-ary elimination) is
    resolved by a fresh unary relation that is constant on the domain and
    selects the true disjunct; clauses under such a selector are guarded.
    """
    taken = set(relation_symbols(sentence.matrix)) | {n for n, _ in sentence.prefix}
    if sentence.team_relation:
        taken.add(sentence.team_relation[0])
    names = _Names(taken)
    prefix = list(sentence.prefix)
    universal: list[Formula] = []
    witnesses: list[Formula] = []
    functional: list[str] = []

    def iff(a: Formula, b: Formula) -> Formula:
        return And(Or(negate(a), b), Or(a, negate(b)))

    def guarded(body: Formula, guards: tuple) -> Formula:
        return disj([negate(g) for g in guards] + [body]) if guards else body

    def add_functional(name: str, guards: tuple) -> None:
        if not guards:
            functional.append(name)
            return
        # F'(x,y) <-> guards & F(x,y): F' is F where the guards hold and empty elsewhere
        restricted = names.fresh()
        prefix.append((restricted, 2))
        universal.append(iff(_rel(restricted, ("x", "y")), conj(list(guards) + [_rel(name, ("x", "y"))])))
        functional.append(restricted)

    def add(clause: Formula, guards: tuple) -> None:
        if isinstance(clause, Or) and not free_vars(clause.left) and not free_vars(clause.right):
            selector = names.fresh()
            prefix.append((selector, 1))
            on = _rel(selector, ("x",))
            universal.append(iff(on, _rel(selector, ("y",))))
            for part in conjuncts(clause.left):
                add(part, guards + (on,))
            for part in conjuncts(clause.right):
                add(part, guards + (negate(on),))
            return
        bound: list[str] = []
        body = clause
        while isinstance(body, Forall):
            bound.append(body.var)
            body = body.body
        if is_quantifier_free(body):
            if not free_vars(body) <= {"x", "y"}:
                raise FragmentError(f"clause leaves the two-variable fragment: {print_formula(clause)}")
            universal.append(guarded(body, guards))
            return
        if isinstance(body, Exists) and not body.slash and is_quantifier_free(body.body) and len(bound) <= 1:
            v = body.var
            u = bound[0] if bound else ("x" if v == "y" else "y")
            if u == v:
                raise FragmentError(f"unsupported clause: {print_formula(clause)}")
            witnesses.append(guarded(_to_xy(body.body, u, v), guards))
            return
        if (
            isinstance(body, CountExists)
            and body.mode == "<="
            and body.bound == 1
            and isinstance(body.body, Atom)
            and len(bound) <= 1
        ):
            v, atom = body.var, body.body
            args = tuple(t.name if isinstance(t, Var) else None for t in atom.args)
            if bound and args == (bound[0], v):
                # alpha-renaming u, v to x, y makes this forall x. exists<=1 y. Q(x,y)
                add_functional(atom.name, guards)
                return
            if bound and args == (v, bound[0]):
                # forall u. exists<=1 v. Q(v,u): Q read backwards is functional
                inv = names.fresh()
                prefix.append((inv, 2))
                universal.append(iff(_rel(inv, ("x", "y")), _rel(atom.name, ("y", "x"))))
                add_functional(inv, guards)
                return
            if not bound and args == (v,):
                unary = names.fresh()
                prefix.append((unary, 2))
                universal.append(iff(_rel(unary, ("x", "y")), _rel(atom.name, ("y",))))
                add_functional(unary, guards)
                return
        raise FragmentError(f"clause is not of a translatable form: {print_formula(clause)}")

    for clause in conjuncts(sentence.matrix):
        add(clause, ())
    return ScottShape(
        tuple(prefix),
        conj(universal) if universal else Equals(X, X),
        tuple(witnesses),
        tuple(functional),
        sentence.team_relation,
    )


def _to_xy(f: Formula, u: str, v: str) -> Formula:
    """Rename the universally bound ``u`` to x and the witness ``v`` to y."""
    if (u, v) == ("x", "y"):
        return f
    if (u, v) == ("y", "x"):
        return rename_vars(f, {"x": "y", "y": "x"})
    return rename_vars(f, {u: "x", v: "y"})
