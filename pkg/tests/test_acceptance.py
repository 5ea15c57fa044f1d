"""Acceptance gate: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v``; the terminal summary lists
every criterion with its verdict.
"""

import contextlib
import random
import statistics
import time

import pytest

from conftest import ACCEPTANCE, DATA, corpus, cube, load, load_target, raw_value
from lpac.checker import Checker, Status, run_check
from lpac.format import (
    Deletion,
    Ext,
    LinComb,
    PatternApply,
    PatternNew,
    parse_axioms,
    parse_proof,
    parse_target,
    serialize,
)
from lpac.genbench import ChainSpec, build_chain, generate_chain
from lpac.miner import compress_with_report
from lpac.polyalg import Polynomial, equal_mod_boolean, evaluate, substitute
from lpac.stats import StatsReport


@contextlib.contextmanager
def criterion(key: str, desc: str):
    ACCEPTANCE[key] = (False, desc)
    try:
        yield
    except BaseException as exc:
        detail = str(exc).splitlines()[0] if str(exc) else type(exc).__name__
        ACCEPTANCE[key] = (False, f"{desc} -- {detail}")
        print(f"criterion {key}: FAIL  {desc}")
        raise
    ACCEPTANCE[key] = (True, desc)
    print(f"criterion {key}: PASS  {desc}")


def timed_check(text: str, target, axioms=None, mode="strict", repeats=5):
    """Median wall time in ms of parse + check, and the last verdict."""
    times, verdict = [], None
    for _ in range(repeats):
        t0 = time.perf_counter()
        verdict = run_check(axioms, parse_proof(text), target, mode)
        times.append((time.perf_counter() - t0) * 1000.0)
    return statistics.median(times), verdict


# -- 1 -----------------------------------------------------------------------------


def test_criterion_1_example1():
    with criterion("1", "example1.proof accepted, target 1 hit at the final LinComb, < 50 ms"):
        text = (DATA / "example1.proof").read_text()
        doc = parse_proof(text)
        assert len(doc.steps) == 9
        ms, v = timed_check(text, load_target("example1.target"))
        assert v.status is Status.ACCEPTED
        assert v.target_hit == doc.steps[-1].index == "l8"
        assert isinstance(doc.steps[-1], LinComb)
        assert ms < 50, f"{ms:.1f} ms"


# -- 2 -----------------------------------------------------------------------------


def test_criterion_2_example2():
    with criterion("2", "example2.proof accepted, one fresh variable at the apply, V_ext={w3}, < 50 ms"):
        text = (DATA / "example2.proof").read_text()
        target = load_target("example2.target")
        assert target == parse_target("x*zbar ;")
        ms, v = timed_check(text, target)
        assert v.status is Status.ACCEPTED and v.target_hit == "l4"
        assert ms < 50, f"{ms:.1f} ms"

        c = Checker(target)
        for step in parse_proof(text).steps:
            before = set(c.state.variables)
            c.apply(step)
            gained = c.state.variables - before
            if isinstance(step, PatternApply):
                assert gained == {"zbar"}
            if isinstance(step, PatternNew):
                assert gained == set()
                assert c.state.patterns[step.pid].ext_vars == {"w3"}


# -- 3 -----------------------------------------------------------------------------

# (fixture, original token(s), replacement, expected failing line, expected code)
MUTATIONS = [
    # wrong coefficients
    ("example1.proof", "(-1)*l7", "(1)*l7", 9, "ConclusionMismatch"),
    ("example1.proof", "(2)*p2", "(3)*p2", 6, "PatternBodyError"),
    ("example2.proof", "(w3)*p1", "(v3)*p1", 3, "PatternBodyError"),
    ("example1.proof", "A l1, x+2*y-2", "A l1, x+3*y-2", 7, "InputMismatch"),
    # wrong conclusions
    ("example1.proof", "L l8, 1,", "L l8, 2,", 9, "ConclusionMismatch"),
    ("example1.proof", "L p3, v1-2*v3", "L p3, v1-3*v3", 6, "PatternBodyError"),
    # stale or unknown indices
    ("example1.proof", "(-1)*l7", "(-1)*l9", 9, "MissingOperand"),
    ("example2.proof", "in [ l1, l2 ]", "in [ l1, l3 ]", 4, "MissingOperand"),
    ("example1.proof", "in [ l3, l4 ]", "in [ l3, l3 ]", 8, "InputMismatch"),
    ("example1.proof", "out [ l7 : a-2*z ]", "out [ l6 : a-2*z ]", 8, "OutputIndexInUse"),
    # fresh variables and the ext part of the map
    ("example2.proof", "fresh [ zbar ]", "fresh [ z ]", 4, "FreshVarNotFresh"),
    ("example2.proof", "w3 -> zbar", "w3 -> y", 4, "PhiExtImageNotFresh"),
    ("example2_twoext.proof", "w4 -> xbar", "w4 -> zbar", 4, "PhiNotInjectiveOnExt"),
    # boolean compliance of images
    ("example2.proof", "v2 -> y", "v2 -> x+y", 4, "PhiNotBooleanValued"),
    ("example1.proof", "v2 -> 1-y", "v2 -> 1+y", 7, "PhiNotBooleanValued"),
    # output mismatch
    ("example1.proof", "out [ l6 : x-2*z ]", "out [ l6 : x-2*y ]", 7, "OutputMismatch"),
    ("example2.proof", "l4 : x*zbar", "l4 : x*z", 4, "OutputMismatch"),
]


@pytest.mark.parametrize("mode", ["strict", "debug"])
def test_criterion_3_mutations(mode):
    key = "3" if mode == "strict" else "3 (debug)"
    with criterion(key, f"{len(MUTATIONS)} single-token mutations rejected at the exact line ({mode})"):
        assert len(MUTATIONS) >= 12
        wrong = []
        for name, old, new, line, code in MUTATIONS:
            text = (DATA / name).read_text()
            assert text.count(old) == 1, (name, old)
            v = run_check(None, parse_proof(text.replace(old, new)), None, mode)
            got = (v.status, v.failed_step and v.failed_step.line, v.failed_step and v.failed_step.code)
            if got != (Status.REJECTED, line, code):
                wrong.append((name, new, got))
            # the unmutated file is accepted, so the rejection is caused by the edit
            assert run_check(None, parse_proof(text), None, mode).accepted
        assert not wrong, wrong


# -- 4 -----------------------------------------------------------------------------

ORACLE_VARS = [f"x{i}" for i in range(1, 9)]


def _random_terms(rng, variables, max_terms=5):
    terms = []
    for _ in range(rng.randint(0, max_terms)):
        mono = [rng.choice(variables) for _ in range(rng.randint(0, 3))]
        terms.append((rng.randint(-5, 5), mono))
    return terms


def _boolean_twin(rng, terms):
    """Rewrite a raw term list without changing its values on the cube:
    repeat variables inside monomials and split coefficients."""
    out = []
    for c, mono in terms:
        mono = list(mono)
        if mono and rng.random() < 0.5:
            mono.append(rng.choice(mono))
        rng.shuffle(mono)
        if rng.random() < 0.5:
            a = rng.randint(-5, 5)
            out += [(a, mono), (c - a, mono[::-1])]
        else:
            out.append((c, mono))
    rng.shuffle(out)
    return out


def test_criterion_4_oracle_equivalence():
    with criterion("4", "500 polynomial pairs and 200 LinCombs agree with the Boolean-cube oracle"):
        rng = random.Random(20240501)
        disagreements, equal_pairs = 0, 0
        for k in range(500):
            variables = rng.sample(ORACLE_VARS, rng.randint(1, 8))
            t1 = _random_terms(rng, variables)
            t2 = _boolean_twin(rng, t1) if k % 2 == 0 else _random_terms(rng, variables)
            if k % 4 == 1:
                # near miss: a twin with one coefficient nudged
                t2 = _boolean_twin(rng, t1) + [(1, [rng.choice(variables)])]
            used = sorted({v for _, m in t1 + t2 for v in m})
            oracle = all(raw_value(t1, pt) == raw_value(t2, pt) for pt in cube(used))
            equal_pairs += oracle
            got = equal_mod_boolean(Polynomial.from_terms(t1), Polynomial.from_terms(t2))
            disagreements += got != oracle
        assert disagreements == 0
        assert 100 < equal_pairs < 400  # both outcomes are exercised

        accepted, checked_points = 0, 0
        while accepted < 200:
            variables = rng.sample(ORACLE_VARS, rng.randint(2, 6))
            c = Checker()
            ops = []
            for j in range(rng.randint(1, 3)):
                # products keep the operands' common zero set non-trivial
                base = Polynomial.from_terms(_random_terms(rng, variables, 3))
                p = Polynomial.var(rng.choice(variables)) * base
                c.step_axiom(f"a{j}", p)
                ops.append(f"a{j}")
            scope = sorted(c.state.variables)
            if not scope:
                continue
            coeffs = [Polynomial.from_terms(_random_terms(rng, scope, 3)) for _ in ops]
            concl = sum((q * c.state.polys[i] for q, i in zip(coeffs, ops)), Polynomial())
            c.step_lincomb("r", ops, coeffs, concl)
            accepted += 1
            stored = c.state.polys["r"]
            for pt in cube(scope):
                if all(evaluate(c.state.polys[i], pt) == 0 for i in ops):
                    checked_points += 1
                    assert evaluate(stored, pt) == 0
        assert checked_points > 0


# -- 5 -----------------------------------------------------------------------------


def _inline(pattern, apply_step: PatternApply, polys: dict):
    """Replay a retained body under the application's map on a scratch
    checker and return its output polynomials."""
    phi = apply_step.phi_map
    internal = {s.var for s in pattern.body if isinstance(s, Ext)} - set(pattern.ext_vars)
    phi.update({w: Polynomial.var(f"_inl_{w}") for w in internal})
    scratch = Checker()
    for local, idx in zip(pattern.input_indices, apply_step.inputs):
        scratch.step_axiom(local, polys[idx])
    # bring the images of non-ext variables into scope
    for v, img in apply_step.phi:
        if v not in pattern.ext_vars:
            scratch.step_axiom(f"_scope_{v}", img)
    for s in pattern.body:
        if isinstance(s, LinComb):
            scratch.step_lincomb(
                s.index,
                s.operands,
                [substitute(q, phi) for q in s.coeffs],
                substitute(s.conclusion, phi),
            )
        elif isinstance(s, Ext):
            scratch.step_ext(s.index, phi[s.var].as_variable(), substitute(s.poly, phi))
        elif isinstance(s, Deletion):
            scratch.step_deletion(s.index)
    return [scratch.state.polys[o] for o in pattern.output_indices]


def _inlining_corpus():
    yield "example1", None, load("example1.proof")
    yield "example2", None, load("example2.proof")
    for n in (2, 4, 8, 16):
        axioms, _, proof = build_chain(ChainSpec(n), "pattern")
        yield f"chain{n}", axioms, proof


def test_criterion_5_inlining_equivalence():
    with criterion("5", "debug replay reproduces every PatternApply output (examples, chains 2..16)"):
        applies = 0
        for name, axioms, proof in _inlining_corpus():
            assert run_check(axioms, proof, None, "debug").accepted, name
            c = Checker(debug=True)
            for step in [*(axioms.steps if axioms else ()), *proof.steps]:
                if isinstance(step, PatternApply):
                    pattern = c.state.patterns[step.pid]
                    assert pattern.body is not None
                    got = _inline(pattern, step, c.state.polys)
                    want = [p for _, p in step.outputs]
                    assert all(equal_mod_boolean(a, b) for a, b in zip(got, want)), name
                    applies += 1
                c.apply(step)
        assert applies == 2 + 1 + 2 + 4 + 8 + 16


# -- 6 -----------------------------------------------------------------------------

TREND_SIZES = (8, 16, 32, 64)


def _trend_rows():
    rows = []
    for n in TREND_SIZES:
        row = {"n": n}
        for flavor in ("flat", "pattern"):
            files = generate_chain(ChainSpec(n), flavor)
            axioms, target = parse_axioms(files.axioms), parse_target(files.target)
            ms, v = timed_check(files.proof, target, axioms, repeats=7)
            assert v.status is Status.ACCEPTED
            row[flavor] = {
                "bytes": len(files.proof.encode()),
                "ms": ms,
                "stats": StatsReport.of(parse_proof(files.proof).steps),
            }
        rows.append(row)
    return rows


@pytest.fixture(scope="module")
def trend():
    t0 = time.perf_counter()
    rows = _trend_rows()
    return rows, time.perf_counter() - t0


def test_criterion_6a_file_size(trend):
    rows, _ = trend
    sizes = ", ".join(f"n={r['n']}: {r['pattern']['bytes']} vs {r['flat']['bytes']} B" for r in rows)
    with criterion("6a", f"pattern proof file strictly smaller than flat ({sizes})"):
        for r in rows:
            assert r["pattern"]["bytes"] < r["flat"]["bytes"], (r["n"], r["pattern"]["bytes"], r["flat"]["bytes"])


def test_criterion_6b_step_counts(trend):
    rows, _ = trend
    with criterion("6b", "LinComb count n+1 -> 2 with n PatternApply steps"):
        for r in rows:
            n, flat, pat = r["n"], r["flat"]["stats"], r["pattern"]["stats"]
            assert flat.lincomb_count == n + 1
            assert pat.lincomb_count == 2
            assert pat.pattern_apply_count == n and pat.pattern_new_count == 1


def test_criterion_6c_check_time(trend):
    rows, elapsed = trend
    ratios = ", ".join(f"n={r['n']}: {r['pattern']['ms'] / r['flat']['ms']:.2f}" for r in rows)
    with criterion("6c", f"pattern check time <= 1.1 x flat, suite < 10 s (ratios {ratios}; {elapsed:.1f} s)"):
        assert elapsed < 10.0
        for r in rows:
            assert r["pattern"]["ms"] <= 1.1 * r["flat"]["ms"], (r["n"], r["pattern"]["ms"], r["flat"]["ms"])


# -- 7 -----------------------------------------------------------------------------


def test_criterion_7_miner_fidelity():
    with criterion("7", "compressing the flat 16-block chain matches the pattern flavor, hit rate >= 0.8"):
        axioms, target, flat = build_chain(ChainSpec(16), "flat")
        _, _, pattern = build_chain(ChainSpec(16), "pattern")
        out, report = compress_with_report(flat, axioms=axioms, target=target)
        assert StatsReport.of(out.steps).counts() == StatsReport.of(pattern.steps).counts()
        assert run_check(axioms, out, target, "strict").accepted
        assert run_check(axioms, out, target, "debug").accepted
        assert report.hit_rate >= 0.8, report.hit_rate


# -- 8 -----------------------------------------------------------------------------


def test_criterion_8_round_trip():
    files = corpus()
    for n in (8, 16):
        axioms, target, flat = build_chain(ChainSpec(n), "flat")
        out, _ = compress_with_report(flat, axioms=axioms, target=target)
        files.append((f"compressed{n}.proof", serialize(out)))
    files.append(("example2_twoext.proof", (DATA / "example2_twoext.proof").read_text()))
    with criterion("8", f"parse/serialize fixpoint on all {len(files)} corpus files"):
        for name, text in files:
            if name.endswith(".target"):
                p = parse_target(text)
                once = f"{p} ;\n"
                assert parse_target(once) == p
                continue
            doc = parse_proof(text, name)
            once = serialize(doc)
            twice = serialize(parse_proof(once))
            assert parse_proof(once) == doc, name
            assert twice == once, name


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-v"]))
