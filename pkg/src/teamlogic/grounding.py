"""Propositional grounding of FO(C) and team semantics over a fixed domain size.

Relation symbols are either interpreted (fixed tuples) or open, in which case
each tuple gets a propositional variable. First-order subformulas are
Tseitin-encoded with full equivalences; counting quantifiers use a reified
sequential counter. Team semantics is encoded with one "row reaches this
occurrence" variable per (occurrence, assignment) and Skolem variables for
existential choices; since all encoded formulas are downward closed, an
over-approximating cover of each team is sound.
"""

from __future__ import annotations

import itertools
from typing import Iterable, Iterator, Mapping

from pysat.formula import IDPool
from pysat.solvers import Solver

from .errors import EvaluationError
from .structures import Structure
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
    NegAtom,
    NegDep,
    NotEquals,
    Or,
    SOSentence,
    Vocabulary,
    free_vars,
    has_counting,
    is_first_order,
    order_vars,
)

SOLVER = "cadical153"

Lit = int | bool


class Grounder:
    """Accumulates clauses for one domain size."""

    def __init__(
        self,
        size: int,
        fixed: Mapping[str, Iterable[tuple]] | None = None,
        open_relations: Iterable[tuple[str, int]] = (),
        constants: Mapping[str, int] | None = None,
    ):
        self.size = size
        self.fixed = {n: frozenset(ts) for n, ts in (fixed or {}).items()}
        self.constants = dict(constants or {})
        self.pool = IDPool()
        self.clauses: list[list[int]] = []
        self.open = list(open_relations)
        self.rel_vars: dict[str, dict[tuple, int]] = {}
        for name, arity in self.open:
            self.rel_vars[name] = {
                t: self.pool.id(("rel", name, t)) for t in itertools.product(range(size), repeat=arity)
            }
        self._fo_memo: dict = {}
        self._keep: list = []

    # -- basic gates

    def new(self) -> int:
        return self.pool.id(("aux", len(self.pool.obj2id)))

    def add(self, clause: Iterable[Lit]) -> None:
        out = []
        for lit in clause:
            if lit is True:
                return
            if lit is False:
                continue
            out.append(lit)
        self.clauses.append(out)

    def AND(self, lits: Iterable[Lit]) -> Lit:
        items = []
        for lit in lits:
            if lit is False:
                return False
            if lit is not True:
                items.append(lit)
        items = list(dict.fromkeys(items))
        if not items:
            return True
        if len(items) == 1:
            return items[0]
        g = self.new()
        for lit in items:
            self.clauses.append([-g, lit])
        self.clauses.append([g] + [-lit for lit in items])
        return g

    def OR(self, lits: Iterable[Lit]) -> Lit:
        return neg(self.AND(neg(lit) for lit in lits))

    def at_least(self, lits: list[Lit], k: int) -> Lit:
        """Literal equivalent to 'at least k of lits are true'."""
        if k <= 0:
            return True
        fixed_true = sum(1 for lit in lits if lit is True)
        rest = [lit for lit in lits if lit is not True and lit is not False]
        k -= fixed_true
        if k <= 0:
            return True
        if k > len(rest):
            return False
        if k == 1:
            return self.OR(rest)
        if k == len(rest):
            return self.AND(rest)
        # prev[j] <-> at least j of the lits seen so far
        prev: list[Lit] = [True] + [False] * k
        for lit in rest:
            cur: list[Lit] = [True]
            for j in range(1, k + 1):
                cur.append(self.OR([prev[j], self.AND([prev[j - 1], lit])]))
            prev = cur
        return prev[k]

    # -- first-order formulas

    def term(self, t, env: Mapping[str, int]) -> int:
        if isinstance(t, Const):
            try:
                return self.constants[t.name]
            except KeyError:
                raise EvaluationError(f"constant {t.name} is not interpreted") from None
        try:
            return env[t.name]
        except KeyError:
            raise EvaluationError(f"variable {t.name} is not assigned") from None

    def rel(self, name: str, args: tuple) -> Lit:
        if name in self.fixed:
            return args in self.fixed[name]
        try:
            return self.rel_vars[name][args]
        except KeyError:
            raise EvaluationError(f"relation {name} is not known to the grounder") from None

    def fo(self, f: Formula, env: Mapping[str, int]) -> Lit:
        key = (id(f), tuple(sorted((v, env[v]) for v in free_vars_cached(self, f))))
        lit = self._fo_memo.get(key)
        if lit is None:
            lit = self._fo(f, env)
            self._fo_memo[key] = lit
        return lit

    def _fo(self, f: Formula, env: Mapping[str, int]) -> Lit:
        if isinstance(f, Equals):
            return self.term(f.left, env) == self.term(f.right, env)
        if isinstance(f, NotEquals):
            return self.term(f.left, env) != self.term(f.right, env)
        if isinstance(f, Atom):
            return self.rel(f.name, tuple(self.term(t, env) for t in f.args))
        if isinstance(f, NegAtom):
            return neg(self.rel(f.name, tuple(self.term(t, env) for t in f.args)))
        if isinstance(f, And):
            a = self.fo(f.left, env)
            return False if a is False else self.AND([a, self.fo(f.right, env)])
        if isinstance(f, Or):
            a = self.fo(f.left, env)
            return True if a is True else self.OR([a, self.fo(f.right, env)])
        if isinstance(f, (Exists, Forall, CountExists)):
            if isinstance(f, Exists) and f.slash:
                raise EvaluationError("slashed quantifier in first-order grounding")
            lits = [self.fo(f.body, {**env, f.var: a}) for a in range(self.size)]
            if isinstance(f, Exists):
                return self.OR(lits)
            if isinstance(f, Forall):
                return self.AND(lits)
            if f.mode == ">=":
                return self.at_least(lits, f.bound)
            return neg(self.at_least(lits, f.bound + 1))
        if isinstance(f, (Dep, NegDep)):
            raise EvaluationError("dependence atom in first-order grounding")
        raise TypeError(f"not a formula: {f!r}")

    def assert_fo(self, f: Formula, env: Mapping[str, int] | None = None) -> None:
        self.add([self.fo(f, dict(env or {}))])

    # -- team semantics

    def assert_team_sentence(self, f: Formula) -> None:
        """Constrain the open relations so that the sentence holds on ``{∅}``."""
        if has_counting(f):
            raise EvaluationError("counting quantifiers have no team semantics")
        if free_vars(f):
            raise EvaluationError("team grounding expects a sentence")
        self._team(f, (), [((), True)], ("occ",))

    def _team(self, f: Formula, domain: tuple, rows: list[tuple[tuple, Lit]], path: tuple) -> None:
        """``rows`` pairs each assignment with the literal saying it reaches this occurrence."""
        rows = [(r, lit) for r, lit in rows if lit is not False]
        if not rows:
            return
        if is_first_order(f):
            for r, lit in rows:
                self.add([neg(lit), self.fo(f, dict(zip(domain, r)))])
            return
        if isinstance(f, And):
            self._team(f.left, domain, rows, path + (0,))
            self._team(f.right, domain, rows, path + (1,))
            return
        if isinstance(f, Or):
            left, right = [], []
            for r, lit in rows:
                a, b = self.reach(path + (0,), r), self.reach(path + (1,), r)
                self.add([neg(lit), a, b])
                left.append((r, a))
                right.append((r, b))
            self._team(f.left, domain, left, path + (0,))
            self._team(f.right, domain, right, path + (1,))
            return
        if isinstance(f, Forall):
            new_domain, ext = _extension(domain, f.var)
            merged: dict[tuple, list] = {}
            for r, lit in rows:
                for a in range(self.size):
                    merged.setdefault(ext(r, a), []).append(lit)
            self._team(f.body, new_domain, self._merge(merged, path), path + (0,))
            return
        if isinstance(f, Exists):
            missing = f.slash - set(domain)
            if missing:
                raise EvaluationError(f"slashed variables {sorted(missing)} are not bound")
            new_domain, ext = _extension(domain, f.var)
            hidden = f.slash if f.slash else {f.var}
            keep = [i for i, v in enumerate(domain) if v not in hidden]
            merged = {}
            choices: dict[tuple, list[int]] = {}
            for r, lit in rows:
                key = tuple(r[i] for i in keep)
                if key not in choices:
                    choices[key] = [self.pool.id(("skolem", path, key, a)) for a in range(self.size)]
                    self.clauses.append(list(choices[key]))
                for a in range(self.size):
                    merged.setdefault(ext(r, a), []).append(self.AND([lit, choices[key][a]]))
            self._team(f.body, new_domain, self._merge(merged, path), path + (0,))
            return
        if isinstance(f, Dep):
            heads, tail = f.args[:-1], f.args[-1]
            table: dict[tuple, list[int]] = {}
            for r, lit in rows:
                env = dict(zip(domain, r))
                h = tuple(self.term(t, env) for t in heads)
                if h not in table:
                    table[h] = [self.pool.id(("dep", path, h, a)) for a in range(self.size)]
                    for a, b in itertools.combinations(table[h], 2):
                        self.clauses.append([-a, -b])
                self.add([neg(lit), table[h][self.term(tail, env)]])
            return
        if isinstance(f, NegDep):
            for _, lit in rows:
                self.add([neg(lit)])
            return
        raise TypeError(f"not a formula: {f!r}")

    def reach(self, path: tuple, row: tuple) -> int:
        return self.pool.id(("reach", path, row))

    def _merge(self, merged: dict[tuple, list], path: tuple) -> list[tuple[tuple, Lit]]:
        out = []
        for r, lits in merged.items():
            if any(lit is True for lit in lits):
                out.append((r, True))
                continue
            lits = [lit for lit in lits if lit is not False]
            if len(lits) == 1:
                out.append((r, lits[0]))
            elif lits:
                g = self.reach(path + ("in",), r)
                for lit in lits:
                    self.clauses.append([-lit, g])
                out.append((r, g))
        return out

    # -- solving

    def solver(self) -> Solver:
        s = Solver(name=SOLVER, bootstrap_with=self.clauses)
        return s

    def relation_bits(self) -> list[tuple[str, tuple, int]]:
        """Open relation bits from most to least significant in enumeration order."""
        bits = []
        for name, arity in self.open:
            tuples = sorted(self.rel_vars[name])
            for t in reversed(tuples):
                bits.append((name, t, self.rel_vars[name][t]))
        return bits

    def decode(self, model: Iterable[int], names: Iterable[str] | None = None) -> dict[str, list[tuple]]:
        true = {lit for lit in model if lit > 0}
        names = set(names) if names is not None else set(self.rel_vars)
        return {
            name: sorted(t for t, v in self.rel_vars[name].items() if v in true)
            for name, _ in self.open
            if name in names
        }


def free_vars_cached(g: Grounder, f: Formula) -> tuple[str, ...]:
    cache = g.__dict__.setdefault("_fv", {})
    fv = cache.get(id(f))
    if fv is None:
        g._keep.append(f)
        fv = cache[id(f)] = order_vars(free_vars(f))
    return fv


def neg(lit: Lit) -> Lit:
    if lit is True:
        return False
    if lit is False:
        return True
    return -lit


def _extension(domain: tuple, var: str):
    if var in domain:
        i = domain.index(var)
        return domain, lambda r, a: r[:i] + (a,) + r[i + 1 :]
    return domain + (var,), lambda r, a: r + (a,)


def lexmin_model(solver: Solver, bits: list[int], assumptions: Iterable[int] = ()) -> list[int] | None:
    """Model minimizing ``bits`` lexicographically (earlier bits more significant)."""
    fixed = list(assumptions)
    if not solver.solve(assumptions=fixed):
        return None
    model = solver.get_model()
    values = {abs(lit): lit > 0 for lit in model}
    for v in bits:
        if not values.get(v, False):
            fixed.append(-v)
            continue
        if solver.solve(assumptions=fixed + [-v]):
            fixed.append(-v)
            values = {abs(lit): lit > 0 for lit in solver.get_model()}
        else:
            fixed.append(v)
    solver.solve(assumptions=fixed)
    return solver.get_model()


# ------------------------------------------------------------------ queries


def _structure_from(vocab: Vocabulary, size: int, rels: Mapping[str, list], consts: Mapping[str, int]) -> Structure:
    return Structure(vocab, size, {n: rels.get(n, ()) for n in vocab.relation_names}, consts)


def find_model(
    vocab: Vocabulary,
    size: int,
    *,
    team_sentence: Formula | None = None,
    fo_sentence: Formula | None = None,
    extra: Iterable[tuple[str, int]] = (),
) -> Structure | None:
    """Enumeration-first structure of ``size`` over ``vocab`` satisfying the sentences.

    ``extra`` relations are existentially quantified and not minimized;
    the returned structure is the ``vocab``-reduct.
    """
    extra = list(extra)
    for values in itertools.product(range(size), repeat=len(vocab.constants)):
        consts = dict(zip(vocab.constants, values))
        g = Grounder(size, open_relations=list(vocab.relations) + extra, constants=consts)
        if team_sentence is not None:
            g.assert_team_sentence(team_sentence)
        if fo_sentence is not None:
            g.assert_fo(fo_sentence)
        bits = [v for name, _, v in g.relation_bits() if vocab.has_relation(name)]
        with g.solver() as s:
            model = lexmin_model(s, bits)
        if model is not None:
            return _structure_from(vocab, size, g.decode(model, vocab.relation_names), consts)
    return None


def iter_models(
    vocab: Vocabulary,
    size: int,
    *,
    team_sentence: Formula | None = None,
    fo_sentence: Formula | None = None,
    limit: int | None = None,
) -> Iterator[Structure]:
    """Distinct structures of ``size`` satisfying the sentences, via blocking clauses."""
    count = 0
    for values in itertools.product(range(size), repeat=len(vocab.constants)):
        consts = dict(zip(vocab.constants, values))
        g = Grounder(size, open_relations=list(vocab.relations), constants=consts)
        if team_sentence is not None:
            g.assert_team_sentence(team_sentence)
        if fo_sentence is not None:
            g.assert_fo(fo_sentence)
        bits = [v for _, _, v in g.relation_bits()]
        with g.solver() as s:
            while s.solve():
                model = s.get_model()
                yield _structure_from(vocab, size, g.decode(model), consts)
                count += 1
                if limit is not None and count >= limit:
                    return
                true = {lit for lit in model if lit > 0}
                s.add_clause([-v if v in true else v for v in bits])


def find_expansion(structure: Structure, sentence: Formula, extra: Iterable[tuple[str, int]]) -> Structure | None:
    """An expansion of ``structure`` by ``extra`` satisfying a first-order sentence."""
    extra = list(extra)
    g = Grounder(structure.size, fixed=structure.relations, open_relations=extra, constants=structure.constants)
    g.assert_fo(sentence)
    with g.solver() as s:
        if not s.solve():
            return None
        rels = g.decode(s.get_model())
    return structure.expand(rels, arities=dict(extra))


def eso_holds(structure: Structure, sentence: SOSentence) -> bool:
    return find_expansion(structure, sentence.matrix, sentence.prefix) is not None


class EsoChecker:
    """Evaluates one ESO sentence on many structures of a fixed size and vocabulary.

    The matrix is grounded once with the vocabulary's relations left open;
    each structure is then a set of solver assumptions.
    """

    def __init__(self, sentence: SOSentence, vocab: Vocabulary, size: int, constants: Mapping[str, int] | None = None):
        if vocab.constants and constants is None:
            raise EvaluationError("EsoChecker needs a fixed interpretation of the constants")
        self.vocab = vocab
        self.size = size
        self.constants = dict(constants or {})
        self.g = Grounder(size, open_relations=list(vocab.relations) + list(sentence.prefix), constants=self.constants)
        self.g.assert_fo(sentence.matrix)
        self.solver = self.g.solver()

    def __call__(self, structure: Structure) -> bool:
        if structure.size != self.size or structure.constants != self.constants:
            raise EvaluationError("structure does not match the grounded size or constants")
        assumptions = []
        for name, _ in self.vocab.relations:
            rel = structure.relations[name]
            for t, v in self.g.rel_vars[name].items():
                assumptions.append(v if t in rel else -v)
        return self.solver.solve(assumptions=assumptions)

    def close(self) -> None:
        self.solver.delete()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()
