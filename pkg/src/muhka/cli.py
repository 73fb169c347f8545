"""Command-line front end.

Exit codes: 0 definite success, 1 definite failure (countermodel, rejected
proof, non-member), 2 unknown, 3 usage or input error.
"""

from __future__ import annotations

import argparse
import random
import sys
from typing import Sequence

from .errors import MuhkaError
from .expr import (Mu, Nu, classify, fl_closure, parse_expr, require_guarded, sort_by_dependency,
                   to_text)
from .grammar import (LassoBounds as MullerBounds, LassoWord, Verdict, accepts_lasso, dumps,
                      enumerate_words, member_finite, to_canonical_cfg, to_muller_cfg)
from .preproof import Preproof, check_progress_mu, check_progress_munu, check_wellformed, is_leftmost_proof
from .puzzle import LassoBounds as PuzzleBounds, evaluate_lasso, finite_play
from .search import Countermodel, Proof, SearchBounds, search
from .sequent import parse_sequent
from .transforms import omega_translate, project

DEFAULT_SEED = 20240101

OK, FAIL, UNKNOWN, USAGE = 0, 1, 2, 3


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise _UsageError(message)


def _emit(doc) -> None:
    sys.stdout.write(dumps(doc) + "\n")


def _load_proof(path: str) -> Preproof:
    with open(path, encoding="utf-8") as fh:
        return Preproof.loads(fh.read())


def _cedent(texts: Sequence[str]):
    return tuple(parse_expr(t) for t in texts)


def cmd_classify(a) -> int:
    e = parse_expr(a.expr)
    c = classify(e)
    _emit({"expr": to_text(e), "productive": c.productive, "left_productive": c.left_productive,
           "guarded": c.guarded, "left_guarded": c.left_guarded})
    return OK


def cmd_closure(a) -> int:
    e = parse_expr(a.expr)
    fl = sort_by_dependency(fl_closure(e))
    kind = lambda f: "mu" if isinstance(f, Mu) else "nu" if isinstance(f, Nu) else "other"
    _emit({"expr": to_text(e), "closure": [{"formula": to_text(f), "kind": kind(f)} for f in fl]})
    return OK


def cmd_grammar(a) -> int:
    _emit(to_canonical_cfg(parse_expr(a.expr)).to_json())
    return OK


def cmd_mcfg(a) -> int:
    e = parse_expr(a.expr)
    require_guarded(e, left=True)
    _emit(to_muller_cfg(e).to_json())
    return OK


def cmd_member(a) -> int:
    cedent = _cedent(a.exprs)
    if ":" in a.word:
        w = LassoWord.parse(a.word)
        res = evaluate_lasso(w, cedent, PuzzleBounds(a.max_nodes))
        verdict = res.verdict
        doc = {"word": str(w), "verdict": verdict.value}
        if len(cedent) == 1:
            cross = accepts_lasso(to_muller_cfg(cedent[0]), w, MullerBounds(a.max_nodes)).verdict
            if Verdict.UNKNOWN not in (verdict, cross) and cross != verdict:
                raise AssertionError(f"oracles disagree on {w}: puzzle {verdict.value}, grammar {cross.value}")
            doc["grammar_verdict"] = cross.value
        _emit(doc)
        return {Verdict.YES: OK, Verdict.NO: FAIL}.get(verdict, UNKNOWN)
    word = "" if a.word in ("", "ε", "eps") else a.word
    ok = member_finite(word, cedent)
    _emit({"word": word, "member": ok})
    return OK if ok else FAIL


def cmd_enum(a) -> int:
    words = sorted(enumerate_words(parse_expr(a.expr), a.maxlen), key=lambda w: (len(w), w))
    _emit({"max_len": a.maxlen, "words": words})
    return OK


def cmd_prove(a) -> int:
    s = parse_sequent(a.sequent)
    bounds = SearchBounds(depth=a.depth, word_len=a.word_len, lasso=a.lasso)
    res = search(s, bounds, a.mode)
    doc = res.to_json()
    if isinstance(res, Proof):
        if a.output:
            with open(a.output, "w", encoding="utf-8") as fh:
                fh.write(res.proof.dumps() + "\n")
        if a.pretty:
            sys.stderr.write(res.proof.pretty() + "\n")
        _emit(doc)
        return OK
    _emit(doc)
    return FAIL if isinstance(res, Countermodel) else UNKNOWN


def cmd_check(a) -> int:
    p = _load_proof(a.proof)
    rep = check_wellformed(p)
    doc: dict = {"wellformed": rep.ok, "defects": list(rep.defects)}
    ok = rep.ok
    if ok:
        mode = a.mode or ("mu" if p.is_mu_only() else "munu")
        doc["mode"] = mode
        if mode == "mu":
            doc["progress"] = check_progress_mu(p)
        else:
            doc["progress"] = check_progress_munu(p)
        ok = doc["progress"]
        if a.leftmost:
            doc["leftmost"] = is_leftmost_proof(p)
            ok = ok and doc["leftmost"]
        doc["open_leaves"] = p.open_leaves()
        ok = ok and not p.open_leaves()
    if a.pretty:
        sys.stderr.write(p.pretty() + "\n")
    _emit(doc)
    return OK if ok else FAIL


def _default_targets(p: Preproof, count: int) -> list[int]:
    mus = [i for i, f in enumerate(p.root_sequent.lhs) if isinstance(f, Mu)]
    if count > len(mus):
        raise _UsageError(f"{count} values given but the root has {len(mus)} left-hand mu-formulas")
    return mus[:count]


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise _UsageError(f"expected comma-separated naturals, got {text!r}") from None


def cmd_project(a) -> int:
    p = _load_proof(a.proof)
    values = _int_list(a.assign)
    targets = _int_list(a.targets) if a.targets else _default_targets(p, len(values))
    q = project(p, targets, values, a.depth)
    if a.output:
        with open(a.output, "w", encoding="utf-8") as fh:
            fh.write(q.dumps() + "\n")
    _emit(q.to_json())
    return UNKNOWN if q.open_leaves() else OK


def cmd_omega(a) -> int:
    t = omega_translate(_load_proof(a.proof), a.budget)
    _emit(t.to_json())
    return OK


def cmd_puzzle(a) -> int:
    cedent = _cedent(a.exprs)
    if ":" in a.word:
        w = LassoWord.parse(a.word)
        res = evaluate_lasso(w, cedent, PuzzleBounds(a.max_nodes))
        doc = {"word": str(w), "verdict": res.verdict.value}
        if res.play is not None:
            doc.update(res.play.to_json())
        _emit(doc)
        return {Verdict.YES: OK, Verdict.NO: FAIL}.get(res.verdict, UNKNOWN)
    word = "" if a.word in ("ε", "eps") else a.word
    play = finite_play(word, cedent)
    doc = {"word": word, "verdict": "yes" if play else "no"}
    if play is not None:
        doc.update(play.to_json())
    _emit(doc)
    return OK if play else FAIL


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="muhka", description="Fixed-point expressions, grammars and cyclic hypersequent proofs.")
    ap.add_argument("--seed", type=int, default=DEFAULT_SEED, help="seed for randomised components")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("classify", help="productivity and guardedness of an expression")
    p.add_argument("expr")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("closure", help="Fischer-Ladner closure in dependency order")
    p.add_argument("expr")
    p.set_defaults(func=cmd_closure)

    p = sub.add_parser("grammar", help="canonical context-free grammar")
    p.add_argument("expr")
    p.set_defaults(func=cmd_grammar)

    p = sub.add_parser("mcfg", help="Muller grammar for omega-words")
    p.add_argument("expr")
    p.set_defaults(func=cmd_mcfg)

    p = sub.add_parser("member", help="membership of a finite word or a lasso PREFIX:LOOP")
    p.add_argument("word")
    p.add_argument("exprs", nargs="+", help="cedent items (their product)")
    p.add_argument("--max-nodes", type=int, default=200_000)
    p.set_defaults(func=cmd_member)

    p = sub.add_parser("enum", help="all words of a mu-only expression up to a length")
    p.add_argument("maxlen", type=int)
    p.add_argument("expr")
    p.set_defaults(func=cmd_enum)

    p = sub.add_parser("prove", help="search for a cyclic proof or a countermodel")
    p.add_argument("sequent")
    p.add_argument("--mode", choices=("mu", "munu"))
    p.add_argument("--depth", type=int, default=SearchBounds.depth)
    p.add_argument("--word-len", type=int, default=SearchBounds.word_len)
    p.add_argument("--lasso", type=int, default=SearchBounds.lasso)
    p.add_argument("-o", "--output", help="write the proof JSON here")
    p.add_argument("--pretty", action="store_true", help="print the proof tree to stderr")
    p.set_defaults(func=cmd_prove)

    p = sub.add_parser("check", help="check a proof file")
    p.add_argument("proof")
    p.add_argument("--mode", choices=("mu", "munu"))
    p.add_argument("--leftmost", action="store_true")
    p.add_argument("--pretty", action="store_true")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("project", help="projection at the given approximation values")
    p.add_argument("proof")
    p.add_argument("--assign", required=True, help="comma-separated values")
    p.add_argument("--targets", help="comma-separated root LHS positions (default: the mu-formulas in order)")
    p.add_argument("--depth", type=int, default=500)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_project)

    p = sub.add_parser("omega", help="omega-translation with materialised premisses")
    p.add_argument("proof")
    p.add_argument("--budget", type=int, required=True)
    p.set_defaults(func=cmd_omega)

    p = sub.add_parser("puzzle", help="winning play of the evaluation puzzle")
    p.add_argument("word")
    p.add_argument("exprs", nargs="+")
    p.add_argument("--max-nodes", type=int, default=200_000)
    p.set_defaults(func=cmd_puzzle)
    return ap


def main(argv: Sequence[str] | None = None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
        random.seed(args.seed)
        return args.func(args)
    except _UsageError as exc:
        sys.stderr.write(f"muhka: usage error: {exc}\n")
        return USAGE
    except (MuhkaError, ValueError, OSError) as exc:
        sys.stderr.write(f"muhka: {type(exc).__name__}: {exc}\n")
        return USAGE


if __name__ == "__main__":
    sys.exit(main())
