"""Acceptance suite: one test and one PASS/FAIL line per criterion.

Run directly (``python3 tests/test_acceptance.py``) or through pytest; in
the latter case the lines are repeated in the terminal summary.
"""

from __future__ import annotations

import itertools
import os
import random
import subprocess
import sys
import time
from pathlib import Path

sys.path.insert(0, os.path.dirname(__file__))

from acceptance_log import record
from exprgen import random_expr
from rulecheck import invertibility_violation, random_sequent, rule_instances, soundness_violation

from muhka.corpus import ABW, ANBN, ASBS, DYCK, DYCK_OMEGA, AB_OMEGA_RHS, NU_A, anbn_proof, empty_nu_preproof
from muhka.expr import approximant, parse_expr
from muhka.grammar import (LassoWord, Verdict, accepts_lasso, member_chart, member_finite, member_topdown,
                           to_muller_cfg)
from muhka.preproof import (Preproof, check_progress_mu, check_progress_munu, check_wellformed,
                            is_leftmost_proof)
from muhka.puzzle import evaluate_finite, evaluate_lasso, replay
from muhka.search import Countermodel, Proof, search
from muhka.sequent import Hypersequent, parse_sequent, seq_valid_upto
from muhka.transforms import omega_translate, project

ROOT = Path(__file__).resolve().parent.parent
CORPUS = ROOT / "corpus"


def test_anbn_proof_search():
    t = time.perf_counter()
    res = search(parse_sequent(f"{ANBN} |- [{ASBS}]"))
    dt = time.perf_counter() - t
    ok = (isinstance(res, Proof) and check_wellformed(res.proof).ok and not res.proof.open_leaves()
          and check_progress_mu(res.proof) and dt < 5)
    nodes = len(res.proof.nodes) if isinstance(res, Proof) else 0
    record(1, ok, f"{type(res).__name__} with {nodes} nodes, progress checked, {dt:.2f}s (< 5s)")
    assert ok


def test_ab_omega_proof_file_and_rederivation():
    t = time.perf_counter()
    p = Preproof.loads((CORPUS / "ab_omega_leftmost.json").read_text(encoding="utf-8"))
    file_ok = check_wellformed(p).ok and check_progress_munu(p) and is_leftmost_proof(p)
    res = search(p.root_sequent, mode="munu")
    dt = time.perf_counter() - t
    found = isinstance(res, Proof) and res.proof.root_sequent == p.root_sequent
    found = found and check_wellformed(res.proof).ok and check_progress_munu(res.proof) and is_leftmost_proof(res.proof)
    ok = file_ok and found and dt < 10
    record(2, ok, f"file checks {file_ok}, search re-derived leftmost proof {found}, {dt:.2f}s (< 10s)")
    assert ok


def test_empty_nu_negative_control():
    p = empty_nu_preproof()
    progressing = check_progress_munu(p)
    leftmost = is_leftmost_proof(p)
    nu_a = parse_expr(NU_A)
    # a^omega is in the language but the empty word is not, so |- [nu X.(a X)] is invalid
    eps_rejected = not evaluate_finite("", (nu_a,))
    aw = evaluate_lasso(LassoWord.parse(":a"), (nu_a,)).verdict == Verdict.YES
    res = search(p.root_sequent, mode="munu")
    no_proof = not isinstance(res, Proof)
    ok = progressing and not leftmost and eps_rejected and aw and no_proof
    record(3, ok, f"progress {progressing}, leftmost {leftmost}, empty word rejected {eps_rejected}, "
                  f"a^w accepted {aw}, search gives {type(res).__name__}")
    assert ok


def test_membership_oracles_agree():
    t = time.perf_counter()
    rng = random.Random(4)
    words = ["".join(w) for n in range(9) for w in itertools.product("ab", repeat=n)]
    disagreements = []
    members = 0
    for _ in range(500):
        e = random_expr(rng, 25)
        for w in words:
            x, y, z = member_topdown(w, e), member_chart(w, e), evaluate_finite(w, (e,))
            members += x
            if not x == y == z:
                disagreements.append((str(e), w, x, y, z))
    dt = time.perf_counter() - t
    ok = not disagreements and dt < 120
    record(4, ok, f"500 expressions x {len(words)} words, {members} memberships, "
                  f"{len(disagreements)} disagreements, {dt:.1f}s (< 120s)")
    assert ok, disagreements[:5]


def test_local_soundness_and_invertibility():
    rng = random.Random(11)
    count = 0
    violations = []
    while count < 1000:
        for step in rule_instances(random_sequent(rng)):
            count += 1
            for v in (soundness_violation(step, 8), invertibility_violation(step, 8)):
                if v:
                    violations.append(v)
    ok = not violations
    record(5, ok, f"{count} rule instances at bound 8, {len(violations)} violations")
    assert ok, violations[:5]


def _json_contains(tree: dict, sub: dict) -> bool:
    if tree == sub:
        return True
    kids = list(tree.get("children", ())) + list(tree.get("materialized", {}).values())
    return any(_json_contains(k, sub) for k in kids)


def test_projection_suite():
    R = anbn_proof()
    anbn, asbs = parse_expr(ANBN), parse_expr(ASBS)
    problems = []
    for n in range(6):
        q = project(R, [0], [n])
        want = Hypersequent.make((approximant(anbn, n),), [[asbs]])
        if q.root_sequent != want:
            problems.append(f"R({n}) endsequent {q.root_sequent}")
        if q.open_leaves() or q.has_backedges():
            problems.append(f"R({n}) is not a finite proof")
        if not check_wellformed(q).ok or not check_progress_mu(q):
            problems.append(f"R({n}) fails the checks")
        bv = seq_valid_upto(q.root_sequent, 2 * n + 2)
        if not bv.valid:
            problems.append(f"R({n}) endsequent invalid: {bv}")
    r0 = project(R, [0], [0])
    if len(r0.nodes) != 1 or r0.nodes[r0.root].rule != "0-l":
        problems.append("R(0) is not a single 0-l step")
    t = omega_translate(R, 5)
    if t.rule != "omega" or sorted(t.materialized) != list(range(5)):
        problems.append("root is not an omega-node with premisses 0..4")
    for n, sub in t.materialized.items():
        if not sub.is_finite_proof():
            problems.append(f"premiss {n} is not wellfounded")
        if sub.sequent != Hypersequent.make((approximant(anbn, n),), [[asbs]]):
            problems.append(f"premiss {n} has endsequent {sub.sequent}")
        # R(n+1) contains R(n) above its modal steps
        if n and not _json_contains(sub.to_json(), t.materialized[n - 1].to_json()):
            problems.append(f"premiss {n} does not contain premiss {n - 1}")
    if t.materialized[0].rule != "0-l" or t.materialized[0].children:
        problems.append("premiss 0 is not 0-l")
    ok = not problems
    record(6, ok, "R(0..5) finite, progressing, valid to 2n+2; omega(R,5) has 5 wellfounded nested premisses"
           if ok else "; ".join(problems))
    assert ok, problems


def _lassos(alphabet: str, count: int) -> list[LassoWord]:
    seen: dict[str, LassoWord] = {}
    for total in range(1, 6):
        for ulen in range(total):
            for u in itertools.product(alphabet, repeat=ulen):
                for v in itertools.product(alphabet, repeat=total - ulen):
                    w = LassoWord("".join(u), "".join(v))
                    seen.setdefault(str(w), w)
    return list(seen.values())[:count]


def _omega_corpus() -> list[tuple[str, str]]:
    fixed = [ABW, DYCK_OMEGA, AB_OMEGA_RHS, NU_A,
             "nu X.(a X + b X)", "nu X.(a b X + b X)", "mu X.(a X + b nu Y.(b Y))",
             "nu X.(mu Y.(a Y + b X))", "mu X.(nu Y.(a Y + b X))", "nu X.(a (mu Y.(b + a Y b)) X)",
             "nu X.(a X a + b)", "(mu X.(1 + a X b)) nu Y.(b Y)"]
    out = [(e, "<>" if "<" in e else "ab") for e in fixed]
    rng = random.Random(23)
    while len(out) < 24:
        e = random_expr(rng, 14, nu=True, left=True)
        out.append((str(e), "ab"))
    return out


def test_muller_and_puzzle_agree():
    corpus = _omega_corpus()
    disagreements, definite, yes = [], 0, 0
    bad_plays = []
    for text, alphabet in corpus:
        e = parse_expr(text)
        g = to_muller_cfg(e)
        for w in _lassos(alphabet, 12):
            a = accepts_lasso(g, w).verdict
            b = evaluate_lasso(w, (e,))
            if Verdict.UNKNOWN in (a, b.verdict):
                continue
            definite += 1
            if a != b.verdict:
                disagreements.append((text, str(w), a.value, b.verdict.value))
            if b.verdict == Verdict.YES:
                yes += 1
                if not replay(b.play, w, (e,)):
                    bad_plays.append((text, str(w)))
    dyck = parse_expr(DYCK_OMEGA)
    dyck_yes = evaluate_lasso(LassoWord.parse(":<>"), (dyck,)).verdict == Verdict.YES
    dyck_no = evaluate_lasso(LassoWord.parse(":<"), (dyck,)).verdict == Verdict.NO
    dyck_g = to_muller_cfg(dyck)
    dyck_grammar = (accepts_lasso(dyck_g, LassoWord.parse(":<>")).verdict == Verdict.YES
                    and accepts_lasso(dyck_g, LassoWord.parse(":<")).verdict == Verdict.NO)
    ok = not disagreements and not bad_plays and dyck_yes and dyck_no and dyck_grammar and len(corpus) >= 20
    record(7, ok, f"{len(corpus)} expressions x 12 lassos, {definite} definite verdicts ({yes} yes), "
                  f"{len(disagreements)} disagreements, Dyck examples {dyck_yes and dyck_no and dyck_grammar}")
    assert ok, (disagreements[:5], bad_plays[:5])


def test_countermodel_certified():
    t = time.perf_counter()
    s = parse_sequent(f"{ASBS} |- [{ANBN}]")
    res = search(s)
    dt = time.perf_counter() - t
    ok = isinstance(res, Countermodel) and res.witness == "a"
    if ok:
        w = res.witness
        certified = member_finite(w, s.lhs) and not any(member_finite(w, c) for c in s.rhs)
        shortest = seq_valid_upto(s, len(w) - 1).valid if w else True
        ok = certified and shortest and dt < 5
    record(8, ok, f"{type(res).__name__} {getattr(res, 'witness', None)!r}, certified by both parsers, "
                  f"{dt:.2f}s (< 5s)")
    assert ok


def _cli_outputs(hash_seed: str) -> list[bytes]:
    env = dict(os.environ, PYTHONHASHSEED=hash_seed)
    ab_omega = Preproof.loads((CORPUS / "ab_omega_leftmost.json").read_text(encoding="utf-8")).root_sequent.text()
    commands = [
        ["prove", f"{ANBN} |- [{ASBS}]"],
        ["prove", f"{ASBS} |- [{ANBN}]"],
        ["prove", ab_omega, "--mode", "munu"],
        ["prove", f"|- [{NU_A}]", "--mode", "munu"],
        ["omega", str(CORPUS / "anbn_in_astar_bstar.json"), "--budget", "4"],
        ["project", str(CORPUS / "anbn_in_astar_bstar.json"), "--assign", "3"],
        ["puzzle", ":<>", DYCK_OMEGA],
        ["member", "ab:ab", ABW],
        ["mcfg", AB_OMEGA_RHS],
        ["grammar", DYCK],
        ["closure", AB_OMEGA_RHS],
        ["enum", "6", ASBS],
    ] + [["check", str(f), "--leftmost"] for f in sorted(CORPUS.glob("*.json"))]
    outs = []
    for cmd in commands:
        r = subprocess.run([sys.executable, "-m", "muhka.cli", "--seed", "7", *cmd],
                           capture_output=True, env=env, timeout=120)
        outs.append(r.stdout + b"|" + str(r.returncode).encode())
    return outs


def test_determinism():
    first, second = _cli_outputs("1"), _cli_outputs("2")
    same = sum(a == b for a, b in zip(first, second))
    ok = same == len(first)
    record(9, ok, f"{same}/{len(first)} corpus commands byte-identical across two runs with different hash seeds")
    assert ok


if __name__ == "__main__":
    failures = 0
    for name, fn in list(globals().items()):
        if name.startswith("test_") and callable(fn):
            try:
                fn()
            except AssertionError:
                failures += 1
    sys.exit(1 if failures else 0)
