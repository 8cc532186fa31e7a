"""Finite relational structures, teams and the team-building operations."""

from __future__ import annotations

import itertools
import re
from collections import deque
from dataclasses import dataclass
from typing import Callable, Iterable, Iterator, Mapping

from .errors import StructureFormatError, TeamError, UnknownSymbolError
from .syntax import Vocabulary, order_vars

Tuple = tuple[int, ...]


class Structure:
    """A relational structure with domain ``{0, ..., size-1}``.

    Relations are stored as frozensets of int tuples; a 0-ary relation is
    either empty or ``{()}``.
    """

    __slots__ = ("vocab", "size", "relations", "constants", "_key")

    def __init__(
        self,
        vocab: Vocabulary,
        size: int,
        relations: Mapping[str, Iterable[Tuple]] | None = None,
        constants: Mapping[str, int] | None = None,
    ):
        if size < 1:
            raise StructureFormatError("domain size must be at least 1")
        relations = dict(relations or {})
        constants = dict(constants or {})
        rels: dict[str, frozenset[Tuple]] = {}
        for name, arity in vocab.relations:
            tuples = frozenset(tuple(int(e) for e in t) for t in relations.pop(name, ()))
            for t in tuples:
                if len(t) != arity:
                    raise StructureFormatError(f"tuple {t} of relation {name} does not have arity {arity}")
                if any(not 0 <= e < size for e in t):
                    raise StructureFormatError(f"tuple {t} of relation {name} leaves the domain 0..{size - 1}")
            rels[name] = tuples
        if relations:
            raise UnknownSymbolError(f"relations {sorted(relations)} are not in the vocabulary")
        consts = {}
        for name in vocab.constants:
            if name not in constants:
                raise StructureFormatError(f"constant {name} is not interpreted")
            value = int(constants.pop(name))
            if not 0 <= value < size:
                raise StructureFormatError(f"constant {name} = {value} leaves the domain")
            consts[name] = value
        if constants:
            raise UnknownSymbolError(f"constants {sorted(constants)} are not in the vocabulary")
        self.vocab = vocab
        self.size = size
        self.relations = rels
        self.constants = consts
        self._key = None

    @property
    def domain(self) -> range:
        return range(self.size)

    def holds(self, name: str, args: Tuple) -> bool:
        return args in self.relations[name]

    def key(self):
        if self._key is None:
            self._key = (
                self.vocab,
                self.size,
                tuple(sorted((n, tuple(sorted(ts))) for n, ts in self.relations.items())),
                tuple(sorted(self.constants.items())),
            )
        return self._key

    def __eq__(self, other):
        return isinstance(other, Structure) and self.key() == other.key()

    def __hash__(self):
        return hash(self.key())

    def __repr__(self):
        return f"Structure(size={self.size}, vocab={self.vocab})"

    def __str__(self):
        return format_structure(self)

    def expand(self, relations: Mapping[str, Iterable[Tuple]] = (), arities=None, constants=None) -> "Structure":
        """Add new relation symbols (and optionally constants)."""
        relations = dict(relations)
        arities = dict(arities or {})
        extra = []
        for name, tuples in relations.items():
            if name in arities:
                arity = arities[name]
            else:
                tuples = list(tuples)
                relations[name] = tuples
                if not tuples:
                    raise StructureFormatError(f"cannot infer the arity of empty relation {name}")
                arity = len(tuples[0])
            extra.append((name, arity))
        constants = dict(constants or {})
        vocab = self.vocab.union(Vocabulary(tuple(extra), tuple(constants)))
        return Structure(vocab, self.size, {**self.relations, **relations}, {**self.constants, **constants})

    def reduct(self, names: Iterable[str]) -> "Structure":
        names = set(names)
        vocab = Vocabulary(
            tuple((n, a) for n, a in self.vocab.relations if n in names),
            tuple(c for c in self.vocab.constants if c in names),
        )
        return Structure(
            vocab,
            self.size,
            {n: ts for n, ts in self.relations.items() if n in names},
            {c: v for c, v in self.constants.items() if c in names},
        )

    def with_relations(self, relations: Mapping[str, Iterable[Tuple]]) -> "Structure":
        """Replace interpretations of existing symbols."""
        return Structure(self.vocab, self.size, {**self.relations, **relations}, self.constants)


# --------------------------------------------------------------------- teams


@dataclass(frozen=True)
class Team:
    """A set of assignments over the variables ``domain``.

    Each row is a tuple aligned with ``domain``.
    """

    domain: tuple[str, ...]
    rows: frozenset[Tuple]

    def __post_init__(self):
        object.__setattr__(self, "domain", tuple(self.domain))
        object.__setattr__(self, "rows", frozenset(tuple(r) for r in self.rows))
        if len(set(self.domain)) != len(self.domain):
            raise TeamError(f"repeated variable in team domain {self.domain}")
        for r in self.rows:
            if len(r) != len(self.domain):
                raise TeamError(f"row {r} does not match team domain {self.domain}")

    @classmethod
    def empty(cls, domain: Iterable[str] = ()) -> "Team":
        return cls(tuple(domain), frozenset())

    @classmethod
    def unit(cls) -> "Team":
        """The team ``{∅}`` containing only the empty assignment."""
        return cls((), frozenset({()}))

    @classmethod
    def from_assignments(cls, assignments: Iterable[Mapping[str, int]], domain: Iterable[str] | None = None) -> "Team":
        assignments = list(assignments)
        if domain is None:
            if not assignments:
                raise TeamError("cannot infer the domain of an empty team")
            domain = order_vars(assignments[0])
        domain = tuple(domain)
        rows = set()
        for s in assignments:
            if set(s) != set(domain):
                raise TeamError(f"assignment {dict(s)} does not have domain {domain}")
            rows.add(tuple(s[v] for v in domain))
        return cls(domain, frozenset(rows))

    @classmethod
    def full(cls, domain: Iterable[str], size: int) -> "Team":
        domain = tuple(domain)
        return cls(domain, frozenset(itertools.product(range(size), repeat=len(domain))))

    def __len__(self) -> int:
        return len(self.rows)

    def __iter__(self) -> Iterator[dict[str, int]]:
        for r in sorted(self.rows):
            yield dict(zip(self.domain, r))

    def __bool__(self) -> bool:
        return bool(self.rows)

    def sorted_rows(self) -> list[Tuple]:
        return sorted(self.rows)

    def index(self, var: str) -> int:
        return self.domain.index(var)

    def subteam(self, rows: Iterable[Tuple]) -> "Team":
        return Team(self.domain, frozenset(rows))

    def reorder(self, domain: Iterable[str]) -> "Team":
        domain = tuple(domain)
        if set(domain) != set(self.domain):
            raise TeamError(f"{domain} is not a reordering of {self.domain}")
        idx = [self.domain.index(v) for v in domain]
        return Team(domain, frozenset(tuple(r[i] for i in idx) for r in self.rows))

    def subteams(self) -> Iterator["Team"]:
        rows = self.sorted_rows()
        for k in range(len(rows) + 1):
            for combo in itertools.combinations(rows, k):
                yield Team(self.domain, frozenset(combo))

    def __str__(self) -> str:
        return format_team(self)


def rel_of_team(team: Team) -> frozenset[Tuple]:
    """The relation ``{(s(x1), ..., s(xk)) : s in X}`` in declared variable order."""
    return team.rows


def restrict(team: Team, variables: Iterable[str]) -> Team:
    variables = set(variables)
    if not variables <= set(team.domain):
        raise TeamError(f"cannot restrict team over {team.domain} to {sorted(variables)}")
    keep = [i for i, v in enumerate(team.domain) if v in variables]
    return Team(tuple(team.domain[i] for i in keep), frozenset(tuple(r[i] for i in keep) for r in team.rows))


def _extend_rows(team: Team, var: str):
    """New domain plus a function mapping (row, value) to the extended row."""
    if var in team.domain:
        i = team.domain.index(var)
        return team.domain, lambda r, a: r[:i] + (a,) + r[i + 1 :]
    return team.domain + (var,), lambda r, a: r + (a,)


def extend_all(team: Team, var: str, size: int) -> Team:
    """``X(A/v)``: every row paired with every value of ``var``."""
    domain, ext = _extend_rows(team, var)
    return Team(domain, frozenset(ext(r, a) for r in team.rows for a in range(size)))


ChoiceFunction = Mapping[Tuple, int] | Callable[[dict[str, int]], int]


def _choose(team: Team, F: ChoiceFunction, row: Tuple) -> int:
    if callable(F):
        return F(dict(zip(team.domain, row)))
    try:
        return F[row]
    except KeyError:
        raise TeamError(f"choice function is not defined on row {row}") from None


def extend_fun(team: Team, var: str, F: ChoiceFunction) -> Team:
    """``X(F/v)``; ``F`` maps rows (tuples or, if callable, assignment dicts) to elements."""
    domain, ext = _extend_rows(team, var)
    return Team(domain, frozenset(ext(r, _choose(team, F, r)) for r in team.rows))


def is_w_independent(team: Team, F: ChoiceFunction, W: Iterable[str]) -> bool:
    W = set(W)
    if not W <= set(team.domain):
        raise TeamError(f"slash set {sorted(W)} is not contained in {team.domain}")
    keep = [i for i, v in enumerate(team.domain) if v not in W]
    seen: dict[Tuple, int] = {}
    for r in team.rows:
        k = tuple(r[i] for i in keep)
        value = _choose(team, F, r)
        if seen.setdefault(k, value) != value:
            return False
    return True


def all_teams(domain: Iterable[str], size: int) -> Iterator[Team]:
    """Every team over ``domain`` on a domain of ``size`` elements."""
    domain = tuple(domain)
    rows = list(itertools.product(range(size), repeat=len(domain)))
    for mask in range(1 << len(rows)):
        yield Team(domain, frozenset(r for i, r in enumerate(rows) if mask >> i & 1))


# ---------------------------------------------------------------- expansions


def _tuples(size: int, arity: int) -> list[Tuple]:
    return list(itertools.product(range(size), repeat=arity))


def enumerate_expansions(structure: Structure, extra: Iterable[tuple[str, int]]) -> Iterator[Structure]:
    """Every expansion of ``structure`` by the relation symbols ``extra``.

    Symbols vary in the given order with the last one fastest; within a
    symbol, tuples are ordered lexicographically and subsets by bitmask.
    """
    extra = list(extra)
    vocab = structure.vocab.union(Vocabulary(tuple(extra)))
    spaces = [_tuples(structure.size, arity) for _, arity in extra]
    masks = [range(1 << len(s)) for s in spaces]
    for choice in itertools.product(*masks):
        rels = dict(structure.relations)
        for (name, _), space, mask in zip(extra, spaces, choice):
            rels[name] = [t for i, t in enumerate(space) if mask >> i & 1]
        yield Structure(vocab, structure.size, rels, structure.constants)


def enumerate_structures(vocab: Vocabulary, size: int) -> Iterator[Structure]:
    """All structures of ``size`` over ``vocab``: constants first, then relation bitmaps."""
    for values in itertools.product(range(size), repeat=len(vocab.constants)):
        consts = dict(zip(vocab.constants, values))
        base = Structure(Vocabulary((), vocab.constants), size, {}, consts)
        for s in enumerate_expansions(base, vocab.relations):
            yield s


# ---------------------------------------------------------------- components


def _binary(structure: Structure, names: Iterable[str]) -> list[str]:
    names = list(names)
    for n in names:
        if structure.vocab.arity(n) != 2:
            raise UnknownSymbolError(f"relation {n} is not binary")
    return names


def _adjacency(structure: Structure, names: Iterable[str]) -> list[set[int]]:
    adj = [set() for _ in structure.domain]
    for n in names:
        for a, b in structure.relations[n]:
            adj[a].add(b)
            adj[b].add(a)
    return adj


def components(structure: Structure, names: Iterable[str]) -> list[frozenset[int]]:
    """Weakly connected components under the named binary relations."""
    adj = _adjacency(structure, _binary(structure, names))
    seen: set[int] = set()
    out = []
    for start in structure.domain:
        if start in seen:
            continue
        block = {start}
        queue = deque([start])
        while queue:
            a = queue.popleft()
            for b in adj[a]:
                if b not in block:
                    block.add(b)
                    queue.append(b)
        seen |= block
        out.append(frozenset(block))
    return out


def find_isomorphic_sub(
    structure: Structure,
    pattern: Structure,
    mode: str = "substructure",
    pins: Mapping[int, int] | None = None,
) -> dict[int, int] | None:
    """Find an injective map from ``pattern`` into ``structure``.

    Only the pattern's relation symbols are compared. Modes:

    * ``substructure``: the map is an isomorphism onto the induced substructure on its image;
    * ``component``: additionally the image is a whole weak component of ``structure``
      (under the pattern's binary relations);
    * ``monomorphism``: pattern tuples map to structure tuples; the image may carry extra tuples.

    ``pins`` fixes the images of some pattern elements.
    """
    if mode not in ("substructure", "component", "monomorphism"):
        raise ValueError(f"unknown matching mode {mode!r}")
    names = [n for n, _ in pattern.vocab.relations]
    for n in names:
        if structure.vocab.arity(n) != pattern.vocab.arity(n):
            raise UnknownSymbolError(f"relation {n} has different arities in pattern and structure")
    if pattern.size > structure.size:
        return None
    induced = mode != "monomorphism"
    for n in names:
        if pattern.vocab.arity(n) == 0 and (
            pattern.relations[n] != structure.relations[n] if induced else pattern.relations[n] - structure.relations[n]
        ):
            return None
    binary = [n for n in names if pattern.vocab.arity(n) == 2]
    p_adj = _adjacency(pattern, binary)
    s_adj = _adjacency(structure, binary)
    comp_of = {}
    if mode == "component":
        for block in components(structure, binary):
            for a in block:
                comp_of[a] = block

    order = _bfs_order(pattern.size, p_adj)
    pins = dict(pins or {})
    mapping: dict[int, int] = {}
    used: set[int] = set()

    def consistent(p: int, a: int) -> bool:
        if mode == "component" and len(comp_of[a]) != pattern.size:
            return False
        if mode == "component" and len(s_adj[a]) != len(p_adj[p]):
            return False
        for n in names:
            arity = pattern.vocab.arity(n)
            if arity == 0:
                continue
            p_rel, s_rel = pattern.relations[n], structure.relations[n]
            domain = list(mapping) + [p]
            for combo in itertools.product(domain, repeat=arity):
                if p not in combo:
                    continue
                image = tuple(a if q == p else mapping[q] for q in combo)
                in_p = combo in p_rel
                in_s = image in s_rel
                if in_p and not in_s:
                    return False
                if induced and in_s and not in_p:
                    return False
        return True

    def candidates(p: int) -> Iterable[int]:
        if p in pins:
            return [pins[p]]
        for q in p_adj[p]:
            if q in mapping:
                return sorted(s_adj[mapping[q]])
        return structure.domain

    def search(k: int) -> bool:
        if k == len(order):
            return True
        p = order[k]
        for a in candidates(p):
            if a in used or not consistent(p, a):
                continue
            mapping[p] = a
            used.add(a)
            if search(k + 1):
                return True
            del mapping[p]
            used.discard(a)
        return False

    if search(0):
        if mode == "component" and pattern.size and set(mapping.values()) != comp_of[mapping[0]]:
            return None
        return dict(sorted(mapping.items()))
    return None


def _bfs_order(size: int, adj: list[set[int]]) -> list[int]:
    order: list[int] = []
    seen: set[int] = set()
    for start in range(size):
        if start in seen:
            continue
        seen.add(start)
        queue = deque([start])
        while queue:
            a = queue.popleft()
            order.append(a)
            for b in sorted(adj[a]):
                if b not in seen:
                    seen.add(b)
                    queue.append(b)
    return order


# --------------------------------------------------------------- file format


def _format_tuple(t: Tuple) -> str:
    if len(t) == 1:
        return str(t[0])
    return "(" + ",".join(map(str, t)) + ")"


def format_team(team: Team) -> str:
    rows = " ".join("(" + ",".join(map(str, r)) + ")" for r in team.sorted_rows())
    head = "team over" + "".join(" " + v for v in team.domain)
    return f"{head} = {{ {rows} }}" if rows else f"{head} = {{ }}"


def format_structure(structure: Structure, team: Team | None = None) -> str:
    lines = [f"domain {structure.size}"]
    for name in structure.vocab.constants:
        lines.append(f"const {name} = {structure.constants[name]}")
    for name, arity in structure.vocab.relations:
        tuples = " ".join(_format_tuple(t) for t in sorted(structure.relations[name]))
        lines.append(f"rel {name}/{arity} = {{ {tuples} }}" if tuples else f"rel {name}/{arity} = {{ }}")
    if team is not None:
        lines.append(format_team(team))
    return "\n".join(lines) + "\n"


_IDENT = r"[A-Za-z_][A-Za-z0-9_']*"
_DOMAIN = re.compile(r"domain\s+(\d+)$")
_CONST = re.compile(rf"const\s+({_IDENT})\s*=\s*(\d+)$")
_REL = re.compile(rf"rel\s+({_IDENT})\s*/\s*(\d+)\s*=\s*\{{(.*)\}}$")
_TEAM = re.compile(rf"team\s+over((?:\s+{_IDENT})*)\s*=\s*\{{(.*)\}}$")
_ITEM = re.compile(r"\(([^()]*)\)|(\d+)")


def _parse_tuples(body: str, arity: int, line: int) -> list[Tuple]:
    out = []
    pos = 0
    body = body.strip()
    while pos < len(body):
        if body[pos].isspace() or body[pos] == ",":
            pos += 1
            continue
        m = _ITEM.match(body, pos)
        if not m:
            raise StructureFormatError(f"cannot read tuple at {body[pos:]!r}", line)
        if m.group(2) is not None:
            t = (int(m.group(2)),)
        else:
            inner = m.group(1).strip()
            try:
                t = tuple(int(e) for e in inner.split(",")) if inner else ()
            except ValueError:
                raise StructureFormatError(f"bad tuple ({inner})", line) from None
        if len(t) != arity:
            raise StructureFormatError(f"tuple {t} does not have arity {arity}", line)
        out.append(t)
        pos = m.end()
    return out


def parse_team(text: str, size: int | None = None, line: int | None = None) -> Team:
    """Parse a ``team over v1 ... vk = { (...) ... }`` stanza."""
    m = _TEAM.match(text.strip())
    if not m:
        raise StructureFormatError(f"malformed team stanza {text.strip()!r}", line)
    domain = tuple(m.group(1).split())
    if len(set(domain)) != len(domain):
        raise StructureFormatError("repeated variable in team domain", line)
    rows = _parse_tuples(m.group(2), len(domain), line)
    if size is not None:
        for r in rows:
            if any(not 0 <= e < size for e in r):
                raise StructureFormatError(f"team row {r} leaves the domain 0..{size - 1}", line)
    return Team(domain, frozenset(rows))


def parse_structure(text: str) -> tuple[Structure, Team | None]:
    size = None
    rels: list[tuple[str, int]] = []
    interp: dict[str, list[Tuple]] = {}
    consts: dict[str, int] = {}
    team = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if m := _DOMAIN.match(line):
            if size is not None:
                raise StructureFormatError("domain declared twice", lineno)
            size = int(m.group(1))
            if size < 1:
                raise StructureFormatError("domain size must be at least 1", lineno)
            continue
        if size is None:
            raise StructureFormatError("the first declaration must be 'domain N'", lineno)
        if m := _CONST.match(line):
            name, value = m.group(1), int(m.group(2))
            if name in consts or name in interp:
                raise StructureFormatError(f"duplicate symbol {name}", lineno)
            if value >= size:
                raise StructureFormatError(f"constant {name} = {value} leaves the domain", lineno)
            consts[name] = value
        elif m := _REL.match(line):
            name, arity = m.group(1), int(m.group(2))
            if name in consts or name in interp:
                raise StructureFormatError(f"duplicate symbol {name}", lineno)
            tuples = _parse_tuples(m.group(3), arity, lineno)
            for t in tuples:
                if any(e >= size for e in t):
                    raise StructureFormatError(f"tuple {t} of {name} leaves the domain 0..{size - 1}", lineno)
            rels.append((name, arity))
            interp[name] = tuples
        elif line.startswith("team"):
            if team is not None:
                raise StructureFormatError("team declared twice", lineno)
            team = parse_team(line, size, lineno)
        else:
            raise StructureFormatError(f"cannot parse {line!r}", lineno)
    if size is None:
        raise StructureFormatError("missing 'domain N' declaration")
    vocab = Vocabulary(tuple(rels), tuple(consts))
    return Structure(vocab, size, interp, consts), team
