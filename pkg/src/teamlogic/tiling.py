"""Wang tiles, grids and tori, the grid-forcing formulas and the tiling reductions.

Grid cells (i, j) with 0 <= i < width, 0 <= j < height are encoded as the
element ``i + width * j``; ``H`` steps i and ``V`` steps j. Sizes are given
in elements, so the torus over {0..n} x {0..m} is ``build_torus(n+1, m+1)``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable

from .errors import TilingError, UnknownSymbolError
from .structures import Structure, components, find_isomorphic_sub
from .syntax import (
    And,
    Atom,
    Equals,
    Exists,
    Forall,
    Formula,
    NegAtom,
    Or,
    Var,
    Vocabulary,
    conj,
    disj,
    implies,
    negate,
    swap_xy,
)

X, Y = Var("x"), Var("y")
V, H, V2, H2 = "V", "H", "V'", "H'"


@dataclass(frozen=True)
class Tile:
    top: int
    right: int
    bottom: int
    left: int

    def __str__(self) -> str:
        return f"tile: {self.top} {self.right} {self.bottom} {self.left}"


@dataclass(frozen=True)
class TileSet:
    tiles: tuple[Tile, ...]

    def __post_init__(self):
        tiles = tuple(t if isinstance(t, Tile) else Tile(*t) for t in self.tiles)
        if not tiles:
            raise TilingError("a tile set needs at least one tile")
        object.__setattr__(self, "tiles", tiles)

    def __len__(self) -> int:
        return len(self.tiles)

    @property
    def colors(self) -> frozenset[int]:
        return frozenset(c for t in self.tiles for c in (t.top, t.right, t.bottom, t.left))

    def names(self) -> list[str]:
        return [f"P{i}" for i in range(len(self.tiles))]

    def __str__(self) -> str:
        return "\n".join(str(t) for t in self.tiles) + "\n"


_TILE_LINE = re.compile(r"tile\s*:\s*(\d+)\s+(\d+)\s+(\d+)\s+(\d+)$")


def parse_tiles(text: str) -> TileSet:
    tiles = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        m = _TILE_LINE.match(line)
        if not m:
            raise TilingError(f"line {lineno}: expected 'tile: TOP RIGHT BOTTOM LEFT', got {line!r}")
        tiles.append(Tile(*(int(g) for g in m.groups())))
    return TileSet(tuple(tiles))


def _check_index(tiles: TileSet, i: int) -> None:
    if not 0 <= i < len(tiles):
        raise TilingError(f"tile index {i} out of range")


def right_set(tiles: TileSet, i: int) -> frozenset[int]:
    """Tiles that may sit to the right of tile i."""
    _check_index(tiles, i)
    return frozenset(j for j, t in enumerate(tiles.tiles) if tiles.tiles[i].right == t.left)


def top_set(tiles: TileSet, i: int) -> frozenset[int]:
    """Tiles that may sit on top of tile i."""
    _check_index(tiles, i)
    return frozenset(j for j, t in enumerate(tiles.tiles) if tiles.tiles[i].top == t.bottom)


# ------------------------------------------------------------ tiling formulas


def _p(i: int, var: Var = X) -> Atom:
    return Atom(f"P{i}", (var,))


def _r(name: str, a: Var, b: Var) -> Atom:
    return Atom(name, (a, b))


def _nr(name: str, a: Var, b: Var) -> NegAtom:
    return NegAtom(name, (a, b))


def _matching(tiles: TileSet, rel: str, allowed) -> Formula:
    """``rel(x,y) -> AND_i (P_i(x) -> OR_{j in allowed(i)} P_j(y))``."""
    groups = []
    for i in range(len(tiles)):
        options = sorted(allowed(tiles, i))
        consequent = disj([_p(j, Y) for j in options]) if options else None
        groups.append(Or(NegAtom(f"P{i}", (X,)), consequent) if consequent else NegAtom(f"P{i}", (X,)))
    return Or(_nr(rel, X, Y), conj(groups))


def gen_psi_T(tiles: TileSet, vertical: str = V, horizontal: str = H) -> Formula:
    """Matching constraints along one pair of successor relations."""
    return Forall("x", Forall("y", And(_matching(tiles, horizontal, right_set), _matching(tiles, vertical, top_set))))


def gen_theta_T(tiles: TileSet) -> Formula:
    """Every element carries exactly one tile."""
    k = len(tiles)
    if k == 1:
        return Forall("x", _p(0))
    options = []
    for i in range(k):
        others = [NegAtom(f"P{j}", (X,)) for j in range(k) if j != i]
        options.append(And(_p(i), conj(others)))
    return Forall("x", disj(options))


def gen_phi_T(tiles: TileSet) -> Formula:
    return And(gen_psi_T(tiles), gen_theta_T(tiles))


def gen_gamma_T(tiles: TileSet) -> Formula:
    """Tiling of a torus: matching along V and H and along the wrap edges V' and H'."""
    return conj(gen_psi_T(tiles, V, H), gen_psi_T(tiles, V2, H2), gen_theta_T(tiles))


# ----------------------------------------------------- grid-forcing formulas


def _functional(rel: str) -> Formula:
    return Forall("x", Forall("y", implies(_r(rel, Y, X), Exists("y", Equals(X, Y), frozenset({"x"})))))


def _injective(rel: str) -> Formula:
    return Forall("x", Forall("y", implies(_r(rel, X, Y), Exists("y", Equals(X, Y), frozenset({"x"})))))


def _distinct(r: str, s: str) -> Formula:
    return Forall("x", Forall("y", negate(And(_r(r, X, Y), _r(s, X, Y)))))


def _no_pred(rel: str) -> Formula:
    return Forall("y", _nr(rel, Y, X))


def gen_phi_grid() -> Formula:
    """Axioms forcing a copy of the infinite grid, as an IF² sentence over {V, H}."""
    root = Exists("x", Forall("y", And(_nr(V, Y, X), _nr(H, Y, X))))

    def edge(r: str, r2: str) -> Formula:
        return Forall("x", implies(_no_pred(r), Forall("y", implies(_r(r2, X, Y), Forall("x", _nr(r, X, Y))))))

    join = Forall(
        "x",
        Forall(
            "y",
            implies(Or(_r(V, X, Y), _r(H, X, Y)), Exists("x", Or(_r(V, Y, X), _r(H, Y, X)), frozenset({"y"}))),
        ),
    )

    def infinite(r: str) -> Formula:
        return Forall("x", Exists("y", _r(r, X, Y)))

    return conj(
        _functional(V),
        _functional(H),
        _injective(V),
        _injective(H),
        root,
        _distinct(V, H),
        edge(V, H),
        edge(H, V),
        join,
        infinite(V),
        infinite(H),
    )


def gen_phi_fingrid(r: str = V, s: str = H) -> Formula:
    """Axioms forcing a proper finite grid component, for the relation pair (r, s)."""
    sw_root = Exists(
        "x",
        Forall("y", conj(_nr(r, Y, X), _nr(s, Y, X), Exists("y", _r(r, X, Y)), Exists("y", _r(s, X, Y)))),
    )

    def either(rel: str) -> Formula:
        return Or(_r(rel, X, Y), _r(rel, Y, X))

    def sw_edge(a: str, b: str) -> Formula:
        return Forall("x", implies(_no_pred(a), Forall("y", implies(either(b), Forall("x", _nr(a, X, Y))))))

    def ne_edge(a: str, b: str) -> Formula:
        no_succ = Forall("y", _nr(a, X, Y))
        return Forall("x", implies(no_succ, Forall("y", implies(either(b), Forall("x", _nr(a, Y, X))))))

    finjoin = Forall(
        "x",
        disj(
            Forall("y", _nr(r, X, Y)),
            Forall("y", _nr(s, X, Y)),
            Forall(
                "y",
                implies(Or(_r(r, X, Y), _r(s, X, Y)), Exists("x", Or(_r(r, Y, X), _r(s, Y, X)), frozenset({"y"}))),
            ),
        ),
    )
    return conj(
        sw_root,
        _functional(r),
        _functional(s),
        _injective(r),
        _injective(s),
        _distinct(r, s),
        sw_edge(r, s),
        sw_edge(s, r),
        ne_edge(r, s),
        ne_edge(s, r),
        finjoin,
    )


CORNERS = ("SW", "NW", "NE", "SE")
PAIRS = ((V, H), (V2, H), (V, H2))


def corner(kind: str, r: str, s: str) -> Formula:
    """Corner predicate with free variable x for the relation pair (r, s)."""
    if kind == "SW":
        parts = [Forall("y", And(_nr(r, Y, X), _nr(s, Y, X))), Exists("y", _r(r, X, Y)), Exists("y", _r(s, X, Y))]
    elif kind == "NW":
        parts = [Forall("y", And(_nr(r, X, Y), _nr(s, Y, X))), Exists("y", _r(r, Y, X)), Exists("y", _r(s, X, Y))]
    elif kind == "NE":
        parts = [Forall("y", And(_nr(r, X, Y), _nr(s, X, Y))), Exists("y", _r(r, Y, X)), Exists("y", _r(s, Y, X))]
    elif kind == "SE":
        parts = [Forall("y", And(_nr(r, Y, X), _nr(s, X, Y))), Exists("y", _r(r, X, Y)), Exists("y", _r(s, Y, X))]
    else:
        raise ValueError(f"unknown corner {kind!r}")
    return conj(parts)


def _both(a: Formula, b: Formula) -> Formula:
    return Exists("x", And(a, b))


def gen_ns_tape() -> Formula:
    c = corner
    return conj(
        _both(c("SW", V, H), c("NW", V2, H)),
        _both(c("SE", V, H), c("NE", V2, H)),
        _both(c("NW", V, H), c("SW", V2, H)),
        _both(c("NE", V, H), c("SE", V2, H)),
        Exists("x", Exists("y", conj(c("NW", V, H), swap_xy(c("SW", V, H)), _r(V2, X, Y)))),
    )


def gen_ew_tape() -> Formula:
    c = corner
    return conj(
        _both(c("SW", V, H), c("SE", V, H2)),
        _both(c("SE", V, H), c("SW", V, H2)),
        _both(c("NW", V, H), c("NE", V, H2)),
        _both(c("NE", V, H), c("NW", V, H2)),
        Exists("x", Exists("y", conj(c("SE", V, H), swap_xy(c("SW", V, H)), _r(H2, X, Y)))),
    )


def gen_unique_corners() -> Formula:
    parts = []
    for r, s in PAIRS:
        for kind in CORNERS:
            p = corner(kind, r, s)
            parts.append(Forall("x", Forall("y", implies(And(p, swap_xy(p)), Equals(X, Y)))))
    return conj(parts)


def gen_phi_torus() -> Formula:
    return conj(
        gen_phi_fingrid(V, H),
        gen_phi_fingrid(V2, H),
        gen_phi_fingrid(V, H2),
        gen_ns_tape(),
        gen_ew_tape(),
        gen_unique_corners(),
    )


def reduction_sat(tiles: TileSet) -> Formula:
    """IF² sentence satisfiable iff the infinite grid is tilable."""
    return And(gen_phi_grid(), gen_phi_T(tiles))


def reduction_finsat(tiles: TileSet) -> Formula:
    """IF² sentence finitely satisfiable iff some torus is tilable."""
    return And(gen_phi_torus(), gen_gamma_T(tiles))


def reduction_vocab(tiles: TileSet, torus: bool = True) -> Vocabulary:
    rels = [(V, 2), (H, 2)] + ([(V2, 2), (H2, 2)] if torus else [])
    return Vocabulary(tuple(rels + [(p, 1) for p in tiles.names()]))


# ------------------------------------------------------------- structures


def grid_edges(width: int, height: int) -> tuple[list, list]:
    if width < 1 or height < 1:
        raise TilingError("grid dimensions must be positive")
    vert = [(i + width * j, i + width * (j + 1)) for j in range(height - 1) for i in range(width)]
    horiz = [(i + width * j, i + 1 + width * j) for j in range(height) for i in range(width - 1)]
    return vert, horiz


def build_grid(width: int, height: int, vertical: str = V, horizontal: str = H) -> Structure:
    vert, horiz = grid_edges(width, height)
    vocab = Vocabulary(((vertical, 2), (horizontal, 2)))
    return Structure(vocab, width * height, {vertical: vert, horizontal: horiz})


def build_torus(width: int, height: int) -> Structure:
    """Grid plus wrap edges V' (top row to bottom row) and H' (right column to left column)."""
    if width < 2 or height < 2:
        raise TilingError("a torus needs width and height of at least 2 elements")
    vert, horiz = grid_edges(width, height)
    wrap_v = [(i + width * (height - 1), i) for i in range(width)]
    wrap_h = [(width - 1 + width * j, width * j) for j in range(height)]
    vocab = Vocabulary(((V, 2), (H, 2), (V2, 2), (H2, 2)))
    return Structure(vocab, width * height, {V: vert, H: horiz, V2: wrap_v, H2: wrap_h})


def _require(structure: Structure, names: Iterable[str]) -> None:
    for n in names:
        if not structure.vocab.has_relation(n) or structure.vocab.arity(n) != 2:
            raise UnknownSymbolError(f"structure needs a binary relation {n}")


def solve_tiling(structure: Structure, tiles: TileSet, mode: str = "plain") -> dict[int, int] | None:
    """A tiling as a map element -> tile index, or None if there is none.

    ``mode="torus"`` also enforces matching along V' and H'.
    """
    if mode not in ("plain", "torus"):
        raise ValueError(f"unknown mode {mode!r}")
    names = [V, H] + ([V2, H2] if mode == "torus" else [])
    _require(structure, names)
    vert = set(structure.relations[V]) | (set(structure.relations[V2]) if mode == "torus" else set())
    horiz = set(structure.relations[H]) | (set(structure.relations[H2]) if mode == "torus" else set())
    # constraints[a] lists (b, ok(ta, tb)) pairs to check once both are placed
    tl = tiles.tiles
    constraints: list[list] = [[] for _ in structure.domain]
    for a, b in vert:
        constraints[a].append((b, lambda s, t: tl[s].top == tl[t].bottom))
        constraints[b].append((a, lambda t, s: tl[s].top == tl[t].bottom))
    for a, b in horiz:
        constraints[a].append((b, lambda s, t: tl[s].right == tl[t].left))
        constraints[b].append((a, lambda t, s: tl[s].right == tl[t].left))
    order = []
    seen = set()
    for block in components(structure.reduct(names), names):
        for a in sorted(block):
            if a not in seen:
                stack = [a]
                while stack:
                    e = stack.pop()
                    if e in seen:
                        continue
                    seen.add(e)
                    order.append(e)
                    stack.extend(sorted((b for b, _ in constraints[e] if b not in seen), reverse=True))
    assignment: dict[int, int] = {}

    def fits(a: int, t: int) -> bool:
        for b, ok in constraints[a]:
            if b == a:
                if not ok(t, t):
                    return False
            elif b in assignment and not ok(t, assignment[b]):
                return False
        return True

    def search(k: int) -> bool:
        if k == len(order):
            return True
        a = order[k]
        for t in range(len(tl)):
            if fits(a, t):
                assignment[a] = t
                if search(k + 1):
                    return True
                del assignment[a]
        return False

    return dict(sorted(assignment.items())) if search(0) else None


def tiling_expansion(structure: Structure, tiles: TileSet, tiling: dict[int, int]) -> Structure:
    """Expansion of ``structure`` by the tile predicates P_i read off a tiling."""
    rels = {name: [(a,) for a, t in tiling.items() if t == i] for i, name in enumerate(tiles.names())}
    return structure.expand(rels, arities={n: 1 for n in tiles.names()})


# ------------------------------------------------------ structural checkers


def _succ(structure: Structure, rel: str) -> dict[int, set[int]]:
    out: dict[int, set[int]] = {a: set() for a in structure.domain}
    for a, b in structure.relations[rel]:
        out[a].add(b)
    return out


def _pred(structure: Structure, rel: str) -> dict[int, set[int]]:
    out: dict[int, set[int]] = {a: set() for a in structure.domain}
    for a, b in structure.relations[rel]:
        out[b].add(a)
    return out


def _compose(structure: Structure, first: str, second: str) -> set[tuple[int, int]]:
    succ2 = _succ(structure, second)
    return {(a, c) for a, b in structure.relations[first] for c in succ2[b]}


def _joins(structure: Structure, r: str, s: str) -> set[tuple[int, int]]:
    return (_compose(structure, r, s) & _compose(structure, s, r)) | (
        _compose(structure, r, r) & _compose(structure, s, s)
    )


def _edge_conditions(structure: Structure, r: str, s: str, both_directions: bool) -> bool:
    """Border propagation: points without an a-predecessor pass that on along b (and dually)."""
    for a, b in ((r, s), (s, r)):
        a_pred, a_succ = _pred(structure, a), _succ(structure, a)
        b_succ, b_pred = _succ(structure, b), _pred(structure, b)
        for x in structure.domain:
            neighbours = b_succ[x] | (b_pred[x] if both_directions else set())
            if not a_pred[x] and any(a_pred[y] for y in neighbours):
                return False
            if both_directions and not a_succ[x] and any(a_succ[y] for y in neighbours):
                return False
    return True


def is_gridlike_structural(structure: Structure, r: str = V, s: str = H) -> bool:
    """Total injective successor functions with a root, distinct successors, borders and joins."""
    _require(structure, (r, s))
    for rel in (r, s):
        succ, pred = _succ(structure, rel), _pred(structure, rel)
        if any(len(succ[a]) != 1 or len(pred[a]) > 1 for a in structure.domain):
            return False
    rp, sp = _pred(structure, r), _pred(structure, s)
    if not any(not rp[a] and not sp[a] for a in structure.domain):
        return False
    if structure.relations[r] & structure.relations[s]:
        return False
    if not _edge_conditions(structure, r, s, both_directions=False):
        return False
    joined = {a for a, _ in _joins(structure, r, s)}
    return all(a in joined for a in structure.domain)


def is_fingridlike_structural(structure: Structure, r: str = V, s: str = H) -> bool:
    """Partial injective successor functions with a south-west root, borders and joins."""
    _require(structure, (r, s))
    for rel in (r, s):
        succ, pred = _succ(structure, rel), _pred(structure, rel)
        if any(len(succ[a]) > 1 or len(pred[a]) > 1 for a in structure.domain):
            return False
    rs, ss, rp, sp = _succ(structure, r), _succ(structure, s), _pred(structure, r), _pred(structure, s)
    if not any(rs[a] and ss[a] and not rp[a] and not sp[a] for a in structure.domain):
        return False
    if structure.relations[r] & structure.relations[s]:
        return False
    if not _edge_conditions(structure, r, s, both_directions=True):
        return False
    joined = {a for a, _ in _joins(structure, r, s)}
    return all(a in joined for a in structure.domain if rs[a] and ss[a])


def corner_points(structure: Structure, r: str = V, s: str = H) -> dict[str, list[int]]:
    """Elements matching each corner description for the pair (r, s)."""
    rs, ss, rp, sp = _succ(structure, r), _succ(structure, s), _pred(structure, r), _pred(structure, s)
    dom = structure.domain
    return {
        "SW": [a for a in dom if not rp[a] and not sp[a]],
        "NW": [a for a in dom if not sp[a] and not rs[a]],
        "NE": [a for a in dom if not rs[a] and not ss[a]],
        "SE": [a for a in dom if not ss[a] and not rp[a]],
    }


def _path_length(start: int, succ: dict[int, set[int]]) -> int:
    n, a, seen = 1, start, {start}
    while len(succ[a]) == 1:
        (a,) = succ[a]
        if a in seen:
            break
        seen.add(a)
        n += 1
    return n


def is_toruslike_structural(structure: Structure) -> bool:
    """Unique distinct corners, a grid component for (V,H) and tape components for (V',H) and (V,H')."""
    _require(structure, (V, H, V2, H2))
    points = corner_points(structure, V, H)
    if any(len(points[k]) != 1 for k in CORNERS):
        return False
    sw, nw, ne, se = (points[k][0] for k in CORNERS)
    if len({sw, nw, ne, se}) != 4:
        return False
    width = _path_length(sw, _succ(structure, H))
    height = _path_length(sw, _succ(structure, V))
    if width < 2 or height < 2:
        return False
    last_col, last_row = width - 1, width * (height - 1)
    top = width * height - 1
    base = structure.reduct((V, H))
    if find_isomorphic_sub(base, build_grid(width, height), "component", {0: sw, last_row: nw, top: ne, last_col: se}) is None:
        return False
    ns = structure.reduct((V2, H))
    pattern = build_grid(width, 2, V2, H)
    if find_isomorphic_sub(ns, pattern, "component", {0: nw, width: sw, 2 * width - 1: se, width - 1: ne}) is None:
        return False
    if (nw, sw) not in structure.relations[V2] or (ne, se) not in structure.relations[V2]:
        return False
    ew = structure.reduct((V, H2))
    pattern = build_grid(2, height, V, H2)
    pins = {0: se, 2 * (height - 1): ne, 2 * height - 1: nw, 1: sw}
    if find_isomorphic_sub(ew, pattern, "component", pins) is None:
        return False
    return (se, sw) in structure.relations[H2] and (ne, nw) in structure.relations[H2]


def is_topping(structure: Structure, base: Structure) -> bool:
    """Same domain and every relation of ``base`` contained in the one of ``structure``."""
    if dict(structure.vocab.relations) != dict(base.vocab.relations):
        raise UnknownSymbolError("topping check needs the same relation symbols")
    if structure.size != base.size:
        return False
    return all(base.relations[n] <= structure.relations[n] for n in base.relations)


def find_grid_component(structure: Structure, r: str = V, s: str = H) -> tuple[int, int, dict] | None:
    """A proper grid (both sides at least 2) that is a whole (r, s)-component."""
    reduct = structure.reduct((r, s))
    for width in range(2, structure.size + 1):
        for height in range(2, structure.size // width + 1):
            m = find_isomorphic_sub(reduct, build_grid(width, height, r, s), "component")
            if m is not None:
                return width, height, m
    return None


def find_torus_topping(structure: Structure) -> tuple[int, int, dict] | None:
    """A torus whose copy lies inside ``structure`` with possibly extra edges on its image."""
    reduct = structure.reduct((V, H, V2, H2))
    for width in range(2, structure.size + 1):
        for height in range(2, structure.size // width + 1):
            m = find_isomorphic_sub(reduct, build_torus(width, height), "monomorphism")
            if m is not None:
                return width, height, m
    return None
