"""Command-line entry point ``tlc``.

Exit status: 0 for a positive answer (true, model found, tiling found),
1 for a negative one, 2 for usage, parse or input errors.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .errors import TeamLogicError
from .parser import parse_formula
from .satisfiability import finsat_direct, finsat_via_eso
from .semantics import eval_team, explain
from .structures import Structure, Team, format_structure, parse_structure, parse_team
from .syntax import Formula, SOSentence, classify_fragment, free_vars, print_formula, print_so_sentence
from .tiling import (
    TileSet,
    build_grid,
    build_torus,
    gen_gamma_T,
    gen_phi_fingrid,
    gen_phi_grid,
    gen_phi_T,
    gen_phi_torus,
    parse_tiles,
    reduction_finsat,
    reduction_sat,
    solve_tiling,
)
from .translate import (
    d2_to_eso,
    d2_to_eso_sentence,
    d2_to_if2,
    eliminate_zeroary,
    if2_to_d3,
    to_scott_shape,
    wrap_sentence,
)


class UsageError(TeamLogicError):
    pass


def _read(path: str) -> str:
    return Path(path).read_text()


def _formula_text(args) -> str:
    if args.formula is not None:
        return args.formula
    if args.formula_file is not None:
        return _read(args.formula_file)
    raise UsageError("one of --formula or --formula-file is required")


def _structure_json(s: Structure) -> dict:
    return {
        "size": s.size,
        "relations": {n: sorted(list(t) for t in s.relations[n]) for n, _ in s.vocab.relations},
        "arities": dict(s.vocab.relations),
        "constants": dict(s.constants),
    }


def _formula_json(f: Formula) -> dict:
    return {"formula": print_formula(f), "fragments": sorted(t.value for t in classify_fragment(f))}


def _emit(args, text: str, payload: dict) -> None:
    print(json.dumps(payload, indent=2, sort_keys=True) if args.json else text.rstrip("\n"))


# ------------------------------------------------------------------- check


def _load_team(spec: str, size: int) -> Team:
    text = _read(spec) if os.path.exists(spec) else spec
    lines = [ln.split("#", 1)[0].strip() for ln in text.splitlines()]
    stanza = " ".join(ln for ln in lines if ln)
    return parse_team(stanza, size)


def cmd_check(args) -> int:
    structure, file_team = parse_structure(_read(args.structure))
    f = parse_formula(_formula_text(args), structure.vocab)
    if args.team is not None:
        team = _load_team(args.team, structure.size)
    elif not free_vars(f):
        team = Team.unit()
    elif file_team is not None:
        team = file_team
    else:
        raise UsageError(f"free variables {sorted(free_vars(f))} need a team (--team or a team line in the structure file)")
    if args.trace:
        verdict, lines = explain(structure, team, f)
    else:
        verdict, lines = eval_team(structure, team, f), []
    text = "true" if verdict else "false"
    if lines:
        text += "\n" + "\n".join(lines)
    _emit(args, text, {"verdict": verdict, "trace": lines})
    return 0 if verdict else 1


# --------------------------------------------------------------- translate


def cmd_translate(args) -> int:
    f = parse_formula(_formula_text(args), constants=args.constant)
    src, dst = args.source, args.target
    if args.wrap_sentence:
        if dst not in ("if2", "d3"):
            raise UsageError("--wrap-sentence applies to --to if2 and --to d3")
        if src == "d2" and dst == "d3":
            raise UsageError("--wrap-sentence translates one step: use d2->if2 or if2->d3")
        result: Formula | SOSentence = wrap_sentence(f, dst)
    elif (src, dst) == ("d2", "if2"):
        result = d2_to_if2(f)
    elif (src, dst) == ("if2", "d3"):
        result = if2_to_d3(f)
    elif (src, dst) == ("d2", "d3"):
        result = if2_to_d3(d2_to_if2(f))
    elif src == "d2" and dst in ("eso", "scott"):
        result = d2_to_eso_sentence(f) if not free_vars(f) else d2_to_eso(f)
    else:
        raise UsageError(f"no translation from {src} to {dst}")
    if isinstance(result, Formula):
        _emit(args, print_formula(result), _formula_json(result))
        return 0
    payload = {"sentence": print_so_sentence(result), "team_relation": result.team_relation}
    text = print_so_sentence(result)
    if dst == "scott":
        shape = to_scott_shape(eliminate_zeroary(result))
        scott = shape.to_sentence()
        text = print_so_sentence(scott) + "\n" + shape.describe()
        payload = {
            "sentence": print_so_sentence(scott),
            "team_relation": shape.team_relation,
            "prefix": [list(p) for p in shape.prefix],
            "universal": print_formula(shape.universal),
            "witnesses": [print_formula(w) for w in shape.witnesses],
            "functional": list(shape.functional),
        }
    _emit(args, text, payload)
    return 0


# ------------------------------------------------------------------ finsat


def cmd_finsat(args) -> int:
    f = parse_formula(_formula_text(args), constants=args.constant)
    if free_vars(f):
        raise UsageError(f"finsat needs a sentence, free variables {sorted(free_vars(f))}")
    if args.max_size < 1:
        raise UsageError("--max-size must be at least 1")
    engine = "enumerate" if args.prune_iso else args.engine
    if args.via == "eso":
        if args.prune_iso:
            raise UsageError("--prune-iso applies to --via direct")
        model = finsat_via_eso(f, args.max_size, engine=engine)
    else:
        model = finsat_direct(f, args.max_size, engine=engine, prune_iso=args.prune_iso)
    if model is None:
        _emit(args, f"none within bound {args.max_size}", {"found": False, "max_size": args.max_size})
        return 1
    _emit(args, format_structure(model), {"found": True, "structure": _structure_json(model)})
    return 0


# ------------------------------------------------------------------ tiling


def _tiles(args) -> TileSet:
    if args.tiles is None:
        raise UsageError("--tiles FILE is required")
    return parse_tiles(_read(args.tiles))


def cmd_tiling_gen(args) -> int:
    what = args.what
    if what == "phiT":
        f = gen_phi_T(_tiles(args))
    elif what == "gammaT":
        f = gen_gamma_T(_tiles(args))
    elif what == "phigrid":
        f = gen_phi_grid()
    elif what == "phifingrid":
        f = gen_phi_fingrid(*args.relations)
    else:
        f = gen_phi_torus()
    _emit(args, print_formula(f), _formula_json(f))
    return 0


def cmd_tiling_build(args) -> int:
    s = build_grid(args.width, args.height) if args.kind == "grid" else build_torus(args.width, args.height)
    _emit(args, format_structure(s), _structure_json(s))
    return 0


def cmd_tiling_solve(args) -> int:
    tiles = _tiles(args)
    structure, _ = parse_structure(_read(args.structure))
    tiling = solve_tiling(structure, tiles, "torus" if args.torus else "plain")
    if tiling is None:
        _emit(args, "untilable", {"tilable": False})
        return 1
    text = "\n".join(f"cell {a} -> tile {t}" for a, t in tiling.items())
    _emit(args, text, {"tilable": True, "tiling": {str(a): t for a, t in tiling.items()}})
    return 0


def cmd_tiling_reduce(args) -> int:
    tiles = _tiles(args)
    f = reduction_sat(tiles) if args.kind == "sat" else reduction_finsat(tiles)
    _emit(args, print_formula(f), _formula_json(f))
    return 0


# ------------------------------------------------------------------ parser


def _add_formula(p: argparse.ArgumentParser) -> None:
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--formula", help="formula text")
    g.add_argument("--formula-file", help="file containing the formula text")


def _add_json(p: argparse.ArgumentParser) -> None:
    p.add_argument("--json", action="store_true", help="machine-readable output")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tlc", description="Team semantics workbench.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="evaluate a formula on a structure and team")
    p.add_argument("--structure", required=True, help="structure file")
    _add_formula(p)
    p.add_argument("--team", help="inline 'team over x y = {...}' stanza or a file containing one")
    p.add_argument("--trace", action="store_true", help="print the witnessing splits and choice functions")
    _add_json(p)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("translate", help="translate between D2, IF2, D3 and ESO")
    p.add_argument("--from", dest="source", required=True, choices=["d2", "if2"])
    p.add_argument("--to", dest="target", required=True, choices=["if2", "d3", "eso", "scott"])
    _add_formula(p)
    p.add_argument("--constant", action="append", default=[], help="treat NAME as a constant (repeatable)")
    p.add_argument("--wrap-sentence", action="store_true", help="translate a sentence and close it by forall x y")
    _add_json(p)
    p.set_defaults(func=cmd_translate)

    p = sub.add_parser("finsat", help="search for a finite model")
    _add_formula(p)
    p.add_argument("--max-size", type=int, required=True)
    p.add_argument("--via", choices=["direct", "eso"], default="direct")
    p.add_argument("--engine", choices=["sat", "enumerate"], default="sat")
    p.add_argument("--prune-iso", action="store_true", help="enumerate and skip non-canonical structures")
    p.add_argument("--constant", action="append", default=[], help="treat NAME as a constant (repeatable)")
    _add_json(p)
    p.set_defaults(func=cmd_finsat)

    p = sub.add_parser("tiling", help="tiles, grids and reductions")
    tsub = p.add_subparsers(dest="tiling_command", required=True)

    q = tsub.add_parser("gen", help="print a generated formula")
    q.add_argument("what", choices=["phiT", "gammaT", "phigrid", "phifingrid", "phitorus"])
    q.add_argument("--tiles", help="tile file (phiT, gammaT)")
    q.add_argument("--relations", nargs=2, default=["V", "H"], metavar=("R", "S"), help="relation pair for phifingrid")
    _add_json(q)
    q.set_defaults(func=cmd_tiling_gen)

    q = tsub.add_parser("build", help="print a grid or torus structure")
    q.add_argument("kind", choices=["grid", "torus"])
    q.add_argument("--width", type=int, required=True, help="width in elements")
    q.add_argument("--height", type=int, required=True, help="height in elements")
    _add_json(q)
    q.set_defaults(func=cmd_tiling_build)

    q = tsub.add_parser("solve", help="search for a tiling of a structure")
    q.add_argument("--tiles", required=True)
    q.add_argument("--structure", required=True)
    q.add_argument("--torus", action="store_true", help="also match along V' and H'")
    _add_json(q)
    q.set_defaults(func=cmd_tiling_solve)

    q = tsub.add_parser("reduce", help="print the IF2 sentence reducing a tiling problem")
    q.add_argument("kind", choices=["sat", "finsat"])
    q.add_argument("--tiles", required=True)
    _add_json(q)
    q.set_defaults(func=cmd_tiling_reduce)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (TeamLogicError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
