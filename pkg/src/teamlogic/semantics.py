"""Team semantics for dependence and IF formulas, Tarski semantics for FO(C).

The team evaluator searches for disjunction splits and choice functions
directly. Every formula it handles is downward closed, which justifies the
pruning it does:

* a flat (dependence-free, slash-free) subformula is checked row by row;
* a disjunction with a flat side sends every row satisfying that side to it;
* disjunction splits are built row by row and abandoned as soon as a partial
  side fails;
* an existential picks one value per class of rows that the choice function
  cannot tell apart, and candidate values are filtered by the flat conjuncts
  of the body before any backtracking.
"""

from __future__ import annotations

import os
from collections import defaultdict
from typing import Callable, Mapping

from .errors import EvaluationError, TeamTooLarge
from .structures import Structure, Team
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
    conjuncts,
    free_vars,
    has_counting,
    is_first_order,
    order_vars,
    print_formula,
)

DEFAULT_MAX_TEAM = 10**6


def max_team_size() -> int:
    value = os.environ.get("TLC_MAX_TEAM")
    return int(value) if value else DEFAULT_MAX_TEAM


# ------------------------------------------------------------ FO evaluation


def _term_getter(structure: Structure, t) -> Callable[[dict], int]:
    if isinstance(t, Const):
        value = structure.constants[t.name]
        return lambda env: value
    name = t.name

    def get(env):
        try:
            return env[name]
        except KeyError:
            raise EvaluationError(f"variable {name} is not assigned") from None

    return get


def compile_fo(structure: Structure, f: Formula) -> Callable[[dict], bool]:
    """Compile a dependence-free, slash-free formula into a predicate on assignments.

    The returned function may temporarily rebind quantified variables in the
    dict it receives but restores them before returning.
    """
    if isinstance(f, (Equals, NotEquals)):
        left, right = _term_getter(structure, f.left), _term_getter(structure, f.right)
        if isinstance(f, Equals):
            return lambda env: left(env) == right(env)
        return lambda env: left(env) != right(env)
    if isinstance(f, (Atom, NegAtom)):
        if f.name not in structure.relations:
            raise EvaluationError(f"relation {f.name} is not interpreted in the structure")
        rel = structure.relations[f.name]
        getters = [_term_getter(structure, t) for t in f.args]
        positive = isinstance(f, Atom)
        if len(getters) == 0:
            truth = () in rel
            value = truth if positive else not truth
            return lambda env: value
        if len(getters) == 1:
            (g,) = getters
            if positive:
                return lambda env: (g(env),) in rel
            return lambda env: (g(env),) not in rel
        if len(getters) == 2:
            g1, g2 = getters
            if positive:
                return lambda env: (g1(env), g2(env)) in rel
            return lambda env: (g1(env), g2(env)) not in rel
        if positive:
            return lambda env: tuple(g(env) for g in getters) in rel
        return lambda env: tuple(g(env) for g in getters) not in rel
    if isinstance(f, And):
        a, b = compile_fo(structure, f.left), compile_fo(structure, f.right)
        return lambda env: a(env) and b(env)
    if isinstance(f, Or):
        a, b = compile_fo(structure, f.left), compile_fo(structure, f.right)
        return lambda env: a(env) or b(env)
    if isinstance(f, QUANT_FO):
        body = compile_fo(structure, f.body)
        var = f.var
        domain = range(structure.size)
        if isinstance(f, Exists):
            if f.slash:
                raise EvaluationError("slashed quantifier in first-order evaluation")
            return lambda env: _any(body, env, var, domain)
        if isinstance(f, Forall):
            return lambda env: _all(body, env, var, domain)
        mode, bound = f.mode, f.bound

        def counting(env):
            old = env.get(var, _MISSING)
            n = 0
            try:
                for a in domain:
                    env[var] = a
                    if body(env):
                        n += 1
            finally:
                _restore(env, var, old)
            return n >= bound if mode == ">=" else n <= bound

        return counting
    if isinstance(f, (Dep, NegDep)):
        raise EvaluationError("dependence atom in first-order evaluation")
    raise TypeError(f"not a formula: {f!r}")


QUANT_FO = (Exists, Forall, CountExists)
_MISSING = object()


def _restore(env, var, old):
    if old is _MISSING:
        env.pop(var, None)
    else:
        env[var] = old


def _any(body, env, var, domain) -> bool:
    old = env.get(var, _MISSING)
    try:
        for a in domain:
            env[var] = a
            if body(env):
                return True
        return False
    finally:
        _restore(env, var, old)


def _all(body, env, var, domain) -> bool:
    old = env.get(var, _MISSING)
    try:
        for a in domain:
            env[var] = a
            if not body(env):
                return False
        return True
    finally:
        _restore(env, var, old)


def _check_fo(f: Formula) -> None:
    if not is_first_order(f):
        raise EvaluationError("formula contains dependence atoms or slashed quantifiers")


def eval_fo(structure: Structure, assignment: Mapping[str, int], f: Formula) -> bool:
    """Tarski truth of ``f`` under ``assignment``; counting quantifiers allowed."""
    _check_fo(f)
    missing = free_vars(f) - set(assignment)
    if missing:
        raise EvaluationError(f"free variables {sorted(missing)} are not assigned")
    return compile_fo(structure, f)(dict(assignment))


def eval_flatness_check(structure: Structure, team: Team, f: Formula) -> bool:
    """Pointwise first-order verdict: ``f`` holds under every assignment of the team."""
    _check_fo(f)
    missing = free_vars(f) - set(team.domain)
    if missing:
        raise EvaluationError(f"free variables {sorted(missing)} are not in the team domain")
    pred = compile_fo(structure, f)
    return all(pred(s) for s in team)


# ---------------------------------------------------------- team evaluation


class _Info:
    """Per-node data cached by the evaluator."""

    __slots__ = ("flat", "free", "pred", "conj_flat", "conj_rest")

    def __init__(self, flat, free):
        self.flat = flat
        self.free = free
        self.pred = None
        self.conj_flat = None
        self.conj_rest = None


class TeamEvaluator:
    """Evaluates formulas on teams of one structure, sharing memo tables."""

    def __init__(self, structure: Structure, optimize: bool = True, max_team: int | None = None):
        self.structure = structure
        self.optimize = optimize
        self.max_team = max_team if max_team is not None else max_team_size()
        self.info: dict[int, _Info] = {}
        self.memo: dict = {}
        self.point_memo: dict = {}
        self._keep: list = []

    # -- node data

    def node(self, f: Formula) -> _Info:
        info = self.info.get(id(f))
        if info is None:
            self._keep.append(f)
            info = _Info(is_first_order(f) and not has_counting(f), order_vars(free_vars(f)))
            self.info[id(f)] = info
        return info

    def point(self, f: Formula, domain: tuple, row: tuple) -> bool:
        info = self.node(f)
        if info.pred is None:
            info.pred = compile_fo(self.structure, f)
        env = dict(zip(domain, row))
        key = (id(f), tuple(env[v] for v in info.free))
        value = self.point_memo.get(key)
        if value is None:
            value = self.point_memo[key] = info.pred(env)
        return value

    def body_parts(self, f: Formula):
        info = self.node(f)
        if info.conj_flat is None:
            flat, rest = [], []
            for c in conjuncts(f):
                (flat if self.optimize and self.node(c).flat else rest).append(c)
            info.conj_flat, info.conj_rest = flat, rest
        return info.conj_flat, info.conj_rest

    # -- entry

    def sat(self, f: Formula, domain: tuple, rows: frozenset) -> bool:
        if not rows:
            return True
        key = (id(f), domain, rows)
        cached = self.memo.get(key)
        if cached is not None:
            return cached
        self.node(f)
        value = self._sat(f, domain, rows)
        self.memo[key] = value
        return value

    def _sat(self, f: Formula, domain: tuple, rows: frozenset) -> bool:
        if self.optimize and self.node(f).flat:
            return all(self.point(f, domain, r) for r in rows)
        if isinstance(f, (Equals, NotEquals, Atom, NegAtom)):
            return all(self.point(f, domain, r) for r in rows)
        if isinstance(f, Dep):
            return dep_holds(self.structure, f, domain, rows)
        if isinstance(f, NegDep):
            return not rows
        if isinstance(f, And):
            return self.sat(f.left, domain, rows) and self.sat(f.right, domain, rows)
        if isinstance(f, Or):
            return self.split(f, domain, rows) is not None
        if isinstance(f, Forall):
            new_domain, ext = extension(domain, f.var)
            new_rows = frozenset(ext(r, a) for r in rows for a in range(self.structure.size))
            self.check_size(new_rows)
            return self.sat(f.body, new_domain, new_rows)
        if isinstance(f, Exists):
            return self.choose(f, domain, rows) is not None
        if isinstance(f, CountExists):
            raise EvaluationError("counting quantifiers have no team semantics here")
        raise TypeError(f"not a formula: {f!r}")

    def check_size(self, rows) -> None:
        if len(rows) > self.max_team:
            raise TeamTooLarge(f"team of {len(rows)} rows exceeds the limit {self.max_team} (TLC_MAX_TEAM)")

    # -- disjunction

    def split(self, f: Or, domain: tuple, rows: frozenset):
        """A pair (left rows, right rows) covering ``rows`` that witnesses ``f``, or None."""
        left, right = f.left, f.right
        if self.optimize:
            if self.node(left).flat:
                ys = frozenset(r for r in rows if self.point(left, domain, r))
                rest = rows - ys
                return (ys, rest) if self.sat(right, domain, rest) else None
            if self.node(right).flat:
                zs = frozenset(r for r in rows if self.point(right, domain, r))
                rest = rows - zs
                return (rest, zs) if self.sat(left, domain, rest) else None
        ordered = sorted(rows)
        sides: tuple[list, list] = ([], [])

        def place(i: int) -> bool:
            if i == len(ordered):
                return True
            r = ordered[i]
            for side, g in ((0, left), (1, right)):
                sides[side].append(r)
                if self.sat(g, domain, frozenset(sides[side])) and place(i + 1):
                    return True
                sides[side].pop()
            return False

        if place(0):
            return frozenset(sides[0]), frozenset(sides[1])
        return None

    # -- existential

    def choose(self, f: Exists, domain: tuple, rows: frozenset):
        """A witnessing choice function as a dict row -> value, or None."""
        missing = f.slash - set(domain)
        if missing:
            raise EvaluationError(f"slashed variables {sorted(missing)} are not in the team domain")
        new_domain, ext = extension(domain, f.var)
        hidden = f.slash if f.slash else {f.var}
        keep = [i for i, v in enumerate(domain) if v not in hidden]
        classes: dict[tuple, list] = defaultdict(list)
        for r in sorted(rows):
            classes[tuple(r[i] for i in keep)].append(r)
        size = self.structure.size
        flat, rest = self.body_parts(f.body)

        cands: list[tuple[list, list[int]]] = []
        for members in classes.values():
            values = [
                a
                for a in range(size)
                if all(self.point(c, new_domain, ext(r, a)) for c in flat for r in members)
            ]
            if not values:
                return None
            cands.append((members, values))
        if not rest:
            return {r: values[0] for members, values in cands for r in members}

        self.check_size(rows)
        cands.sort(key=lambda mv: len(mv[1]))
        deps = [c for c in rest if isinstance(c, Dep)]
        others = [c for c in rest if not isinstance(c, Dep)]
        dep_getters = [_dep_getters(self.structure, d, new_domain) for d in deps]
        dep_tables: list[dict] = [{} for _ in deps]
        chosen: list[tuple] = []
        choice: dict = {}

        def add_deps(new_rows) -> list | None:
            added = []
            for table, (heads, tail) in zip(dep_tables, dep_getters):
                for r in new_rows:
                    k = tuple(g(r) for g in heads)
                    v = tail(r)
                    old = table.get(k)
                    if old is None:
                        table[k] = v
                        added.append((table, k))
                    elif old != v:
                        for t, kk in added:
                            del t[kk]
                        return None
            return added

        def search(i: int) -> bool:
            if i == len(cands):
                return True
            members, values = cands[i]
            for a in values:
                new_rows = [ext(r, a) for r in members]
                added = add_deps(new_rows)
                if added is None:
                    continue
                chosen.extend(new_rows)
                team = frozenset(chosen)
                if all(self.sat(c, new_domain, team) for c in others) and search(i + 1):
                    for r in members:
                        choice[r] = a
                    return True
                del chosen[len(chosen) - len(new_rows) :]
                for t, k in added:
                    del t[k]
            return False

        return choice if search(0) else None


def extension(domain: tuple, var: str):
    """Domain after binding ``var`` and a function (row, value) -> extended row."""
    if var in domain:
        i = domain.index(var)
        return domain, lambda r, a: r[:i] + (a,) + r[i + 1 :]
    return domain + (var,), lambda r, a: r + (a,)


def _dep_getters(structure: Structure, d: Dep, domain: tuple):
    getters = []
    for t in d.args:
        if isinstance(t, Const):
            value = structure.constants[t.name]
            getters.append(lambda r, value=value: value)
        else:
            i = domain.index(t.name)
            getters.append(lambda r, i=i: r[i])
    return getters[:-1], getters[-1]


def dep_holds(structure: Structure, d: Dep, domain: tuple, rows) -> bool:
    heads, tail = _dep_getters(structure, d, domain)
    table: dict = {}
    for r in rows:
        k = tuple(g(r) for g in heads)
        if table.setdefault(k, tail(r)) != tail(r):
            return False
    return True


def _prepare(structure: Structure, team: Team, f: Formula) -> None:
    if has_counting(f):
        raise EvaluationError("counting quantifiers have no team semantics here")
    missing = free_vars(f) - set(team.domain)
    if missing:
        raise EvaluationError(f"free variables {sorted(missing)} are not in the team domain {team.domain}")
    for r in team.rows:
        if any(not 0 <= e < structure.size for e in r):
            raise EvaluationError(f"team row {r} leaves the domain of the structure")


def eval_team(
    structure: Structure,
    team: Team,
    f: Formula,
    *,
    optimize: bool = True,
    evaluator: TeamEvaluator | None = None,
) -> bool:
    """Decide ``structure |=_team f``.

    ``optimize=False`` disables every flatness-based shortcut so that the
    evaluator does not itself rely on the flatness property.
    """
    _prepare(structure, team, f)
    ev = evaluator or TeamEvaluator(structure, optimize=optimize)
    ev.check_size(team.rows)
    return ev.sat(f, team.domain, team.rows)


def eval_sentence(structure: Structure, f: Formula, **kwargs) -> bool:
    """Truth of a sentence: satisfaction by the team ``{∅}``."""
    return eval_team(structure, Team.unit(), f, **kwargs)


# ------------------------------------------------------------------- traces


def explain(structure: Structure, team: Team, f: Formula, max_rows: int = 12) -> tuple[bool, list[str]]:
    """Verdict plus an indented witness skeleton keyed by subformula path.

    Paths are dotted child indices from the root ``0``; disjunctions list
    their split, existentials their choice function, and a failing node
    names the first failing child.
    """
    _prepare(structure, team, f)
    ev = TeamEvaluator(structure)
    verdict = ev.sat(f, team.domain, team.rows)
    lines: list[str] = []

    def fmt_rows(domain, rows) -> str:
        rows = sorted(rows)
        shown = ", ".join("(" + ",".join(f"{v}={a}" for v, a in zip(domain, r)) + ")" for r in rows[:max_rows])
        more = f", ... {len(rows) - max_rows} more" if len(rows) > max_rows else ""
        return "{" + shown + more + "}"

    def label(g: Formula) -> str:
        text = print_formula(g)
        return text if len(text) <= 60 else text[:57] + "..."

    def walk(g: Formula, domain, rows, path: str, depth: int) -> None:
        ok = ev.sat(g, domain, rows)
        pad = "  " * depth
        lines.append(f"{pad}[{path}] {'true' if ok else 'false'} on {len(rows)} rows: {label(g)}")
        if not rows:
            return
        if isinstance(g, And):
            walk(g.left, domain, rows, path + ".0", depth + 1)
            if ok or ev.sat(g.left, domain, rows):
                walk(g.right, domain, rows, path + ".1", depth + 1)
        elif isinstance(g, Or):
            if ok:
                ys, zs = ev.split(g, domain, rows)
                lines.append(f"{pad}  split left={fmt_rows(domain, ys)} right={fmt_rows(domain, zs)}")
                walk(g.left, domain, ys, path + ".0", depth + 1)
                walk(g.right, domain, zs, path + ".1", depth + 1)
            else:
                lines.append(f"{pad}  no split of the team satisfies both disjuncts")
        elif isinstance(g, Forall):
            new_domain, ext = extension(domain, g.var)
            new_rows = frozenset(ext(r, a) for r in rows for a in range(structure.size))
            walk(g.body, new_domain, new_rows, path + ".0", depth + 1)
        elif isinstance(g, Exists):
            if ok:
                choice = ev.choose(g, domain, rows)
                new_domain, ext = extension(domain, g.var)
                shown = sorted(choice.items())
                text = ", ".join(
                    "(" + ",".join(f"{v}={a}" for v, a in zip(domain, r)) + f")->{a}" for r, a in shown[:max_rows]
                )
                if len(shown) > max_rows:
                    text += f", ... {len(shown) - max_rows} more"
                lines.append(f"{pad}  choose {g.var}: {text}")
                walk(g.body, new_domain, frozenset(ext(r, a) for r, a in choice.items()), path + ".0", depth + 1)
            else:
                lines.append(f"{pad}  no admissible choice function for {g.var}")
        elif not ok and isinstance(g, (Equals, NotEquals, Atom, NegAtom)):
            bad = [r for r in rows if not ev.point(g, domain, r)]
            lines.append(f"{pad}  fails on {fmt_rows(domain, bad)}")

    walk(f, team.domain, team.rows, "0", 0)
    return verdict, lines


# ------------------------------------------------------------ ESO sentences


def eval_eso(structure: Structure, sentence: SOSentence, method: str = "auto") -> bool:
    """Truth of an existential second-order sentence.

    ``enumerate`` tries every interpretation of the prefix relations;
    ``sat`` grounds the matrix to propositional logic; ``auto`` picks
    enumeration when the search space has at most 2^14 points.
    """
    if free_vars(sentence.matrix):
        raise EvaluationError(f"matrix has free variables {sorted(free_vars(sentence.matrix))}")
    clash = {n for n, _ in sentence.prefix} & structure.vocab.symbols()
    if clash:
        raise EvaluationError(f"prefix relations {sorted(clash)} are already interpreted")
    bits = sum(structure.size**a for _, a in sentence.prefix)
    if method == "auto":
        method = "enumerate" if bits <= 14 else "sat"
    if method == "enumerate":
        from .structures import enumerate_expansions

        for expansion in enumerate_expansions(structure, sentence.prefix):
            if compile_fo(expansion, sentence.matrix)({}):
                return True
        return False
    if method == "sat":
        from .grounding import eso_holds

        return eso_holds(structure, sentence)
    raise ValueError(f"unknown method {method!r}")
