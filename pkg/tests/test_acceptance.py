"""End-to-end acceptance: one PASS/FAIL line per criterion.

The lines are printed past pytest's capture so they land in the run log.
"""

import pathlib
import time

import pytest

from extent.harness import Config, check_pi_instance, check_pushforward_instance, dumps_report, gen_instance
from extent.harness import check_stability, run_suite
from extent.kernel import RULES, check_source
from extent.syntax import EqualDecl

BASES = ("terminal", "arrow", "delta1")
SUITE_N, SUITE_SEED, BOUND = 500, 0, 3
CORPUS = pathlib.Path(__file__).parent / "corpus"


def announce(capsys, number, ok, detail):
    with capsys.disabled():
        print(f"\n[{'PASS' if ok else 'FAIL'}] criterion {number}: {detail}")


@pytest.fixture(scope="module")
def suite():
    configs = [Config(base=b, bound_k=BOUND) for b in BASES]
    start = time.perf_counter()
    body = run_suite(configs, SUITE_N, seed=SUITE_SEED)
    return body, time.perf_counter() - start, configs


def _count(body, check, verdict):
    return sum(1 for e in body["instances"] if e["checks"].get(check, "absent") is verdict)


def test_criterion_1_strict_stability(suite, capsys):
    body, elapsed, _ = suite
    shapes = {(e["base"], e["shape"]) for e in body["instances"]}
    equations = ("ext_stable", "lambda_stable", "app_stable")
    fails = {k: _count(body, k, False) for k in equations}
    exercised = {k: _count(body, k, True) for k in equations}
    ok = (body["summary"]["instances"] >= 500 and body["summary"]["violations"] == 0
          and not any(fails.values()) and elapsed <= 120)
    announce(capsys, 1, ok, f"{body['summary']['instances']} instances over {len(shapes)} (base, shape) pairs, "
                            f"equations held {exercised}, violations {body['summary']['violations']}, "
                            f"{elapsed:.1f}s")
    assert ok


def test_criterion_2_oracle(suite, capsys):
    body, _, _ = suite
    passed, failed = _count(body, "oracle", True), _count(body, "oracle", False)
    ok = failed == 0 and passed == body["summary"]["instances"]
    announce(capsys, 2, ok, f"pointwise former matches brute-force enumeration on {passed} instances, "
                            f"{failed} mismatches")
    assert ok


def test_criterion_3_pullback_law(suite, capsys):
    body, _, _ = suite
    passed, failed = _count(body, "pullback_law", True), _count(body, "pullback_law", False)
    ok = failed == 0 and passed == body["summary"]["instances"]
    announce(capsys, 3, ok, f"pullback law on {passed} instances, {failed} failures")
    assert ok


def test_criterion_4_kernel_corpus(capsys):
    accept = sorted((CORPUS / "accept").glob("*.stt"))
    reject = sorted((CORPUS / "reject").glob("*.stt"))
    traced, conv = set(), {"Ext-Beta": 0, "Ext-Comp": 0, "Ext-Eta": 0}
    accepted = 0
    for path in accept:
        report = check_source(path.read_text())
        accepted += report.verdict
        traced |= report.rules
        for d in report.decls:
            if isinstance(d.decl, EqualDecl) and d.verdict:
                for rule in conv:
                    conv[rule] += rule in d.report.conversion
    kinds = []
    for path in reject:
        report = check_source(path.read_text())
        if not report.verdict:
            kinds.append(report.first_failure.report.kind)
    ok = (accepted == len(accept) >= 20 and len(kinds) == len(reject) >= 20 and set(RULES) <= traced
          and min(conv.values()) >= 10 and "BoundaryMismatch" in kinds)
    announce(capsys, 4, ok, f"{accepted}/{len(accept)} accepted, {len(kinds)}/{len(reject)} rejected, "
                            f"rules traced {len(set(RULES) & traced)}/{len(RULES)}, equations by rule {conv}, "
                            f"BoundaryMismatch rejections {kinds.count('BoundaryMismatch')}")
    assert ok


def test_criterion_5_degenerate_laws(capsys):
    ident = empty = 0
    for i in range(50):
        base = BASES[i % 3]
        v = check_stability(gen_instance(1000 + i, Config(base=base), shape_name="id"))
        ident += v["degenerate_id"] is True
        v = check_stability(gen_instance(2000 + i, Config(base=base), shape_name="empty"))
        empty += v["degenerate_empty"] is True
    ok = ident == empty == 50
    announce(capsys, 5, ok, f"identity inclusion {ident}/50 singleton, empty boundary {empty}/50 "
                            f"equal to full sections")
    assert ok


def test_criterion_6_pi_stability(capsys):
    results = [check_pi_instance(i, Config(base=BASES[i % 3], bound_k=BOUND)) for i in range(100)]
    ok = all(results)
    announce(capsys, 6, ok, f"Π former stable on {sum(results)}/100 instances")
    assert ok


def test_criterion_7_pushforward(capsys):
    results = [check_pushforward_instance(i, BASES[i % 3]) for i in range(100)]
    bad = [r for r in results if r["got"] != r["expected"]]
    ok = not bad
    announce(capsys, 7, ok, f"pushforward cardinalities match enumeration on {100 - len(bad)}/100 instances")
    assert ok


def test_criterion_8_determinism(suite, capsys):
    body, _, configs = suite
    again = run_suite(configs, SUITE_N, seed=SUITE_SEED)
    ok = dumps_report(body) == dumps_report(again)
    announce(capsys, 8, ok, f"rerun of the {SUITE_N}-instance suite gives a byte-identical report "
                            f"({len(dumps_report(body))} bytes)")
    assert ok
