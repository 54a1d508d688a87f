"""Acceptance suite: one check per criterion, one PASS/FAIL line each.

Every check returns (ok, report) where the report is plain JSON data. The
reports are computed once per session; the determinism check recomputes
them all and compares the serialized bytes. Wall-clock limits are checked
alongside but kept out of the reports so those stay byte-stable.

Run standalone with ``python tests/test_acceptance.py`` or via pytest.
"""

import json
import random
import sys
import time
from fractions import Fraction

import pytest

from impartial_selection.gadgets import (
    ImpossibilityQuery,
    build_cycle_family,
    build_figure4_closure,
    build_k_family,
    check_assignment,
    verify_impossibility,
)
from impartial_selection.graph import GraphClass, enumerate_class, to_json_obj
from impartial_selection.mechanisms import MechanismId, Variant, apwru, apwru_deletion, apwru_pivotal
from impartial_selection.verify import (
    Aggregator,
    additive_gap,
    aggregate,
    find_deletion_tightness_witness,
    fraction_json,
    lemma1_select,
    verify_class,
    verify_sampled,
)

MIN, MEDIAN, MEAN = Aggregator.MIN, Aggregator.MEDIAN, Aggregator.MEAN
APWRU = MechanismId(Variant.APWRU)

# pinned limits
ORACLE_SECONDS = 10
PIVOTAL_N4_SECONDS = 300
GADGET_SECONDS = 60
SAMPLES = 10**5
SAMPLE_SEED = 20240601
MULTISETS = 1000
MULTISET_SEED = 7


def _frac(x):
    return None if x is None else fraction_json(x)


def criterion_1():
    start = time.perf_counter()
    mismatches, counts = [], {}
    for spec in (GraphClass(4), GraphClass(3, 1), GraphClass(4, 1)):
        counts[str(spec)] = 0
        for g in enumerate_class(spec):
            counts[str(spec)] += 1
            if lemma1_select(g) != apwru(g):
                mismatches.append(to_json_obj(g))
    elapsed = time.perf_counter() - start
    ok = not mismatches and counts == {"G_4": 4096, "G_3(1)": 27, "G_4(1)": 256} and elapsed < ORACLE_SECONDS
    return ok, {"counts": counts, "mismatches": mismatches}


def criterion_2():
    rows, ok = [], True
    for d in (1, 2, 3):
        spec = GraphClass(4, d)
        report = verify_class(APWRU, spec, MIN)
        rows.append(report.to_json())
        ok &= report.impartial and report.max_selection_size <= d + 1 and report.worst_gap <= 1
    full = verify_class(APWRU, GraphClass(4), MIN)
    ok &= full.worst_gap == 1
    return ok, {"classes": rows, "g4_worst_min_gap": _frac(full.worst_gap)}


def criterion_3():
    rows, ok = [], True
    for n in (2, 3, 4):
        start = time.perf_counter()
        spec = GraphClass(n)
        report = verify_class(MechanismId(Variant.APWRU_PIVOTAL), spec, MIN)
        structural = []
        for g in enumerate_class(spec):
            chosen = apwru_pivotal(g)
            if not chosen or not set(chosen) <= set(apwru(g)) or len(chosen) > n - 1:
                structural.append(to_json_obj(g))
        elapsed = time.perf_counter() - start
        rows.append({"report": report.to_json(), "structural_failures": structural})
        ok &= report.impartial and report.worst_gap <= 1 and not structural
        if n == 4:
            ok &= elapsed < PIVOTAL_N4_SECONDS
    return ok, {"classes": rows}


def criterion_4():
    ok = True
    mech2 = MechanismId(Variant.APWRU_DELETION, 2)
    exhaustive = verify_class(mech2, GraphClass(4), MIN)
    ok &= exhaustive.impartial and exhaustive.max_selection_size <= 2 and exhaustive.worst_gap <= 3
    sampled = []
    for k in (2, 3):
        report = verify_sampled(MechanismId(Variant.APWRU_DELETION, k), GraphClass(6), MIN, SAMPLES, SAMPLE_SEED)
        bound = 4 // (k - 1) + 1
        sampled.append({"k": k, "bound": bound, "report": report.to_json()})
        ok &= report.impartial and report.max_selection_size <= k and report.worst_gap <= bound
    witnesses = []
    for n, k in ((4, 2), (6, 2), (6, 3)):
        r = (n - 2) // (k - 1)
        g = find_deletion_tightness_witness(n, k)
        gap = None if g is None else additive_gap(g, apwru_deletion(g, k), MIN)
        witnesses.append(
            {"n": n, "k": k, "r": r, "graph": None if g is None else to_json_obj(g), "gap": _frac(gap)}
        )
        ok &= gap == r + 1
    return ok, {"exhaustive": exhaustive.to_json(), "sampled": sampled, "tightness": witnesses}


GADGET_CASES = [
    ("cycle", build_cycle_family, MIN, Fraction(0), Fraction(1)),
    ("cycle", build_cycle_family, MEDIAN, Fraction(49, 100), Fraction(1)),
    ("cycle", build_cycle_family, MEAN, Fraction(49, 100), Fraction(3, 4)),
    ("fig4", build_figure4_closure, MEDIAN, Fraction(99, 100), Fraction(1)),
    ("fig4", build_figure4_closure, MEAN, Fraction(66, 100), Fraction(3, 4)),
    ("kfam", lambda: build_k_family(4, 3), MEAN, Fraction(66, 100), Fraction(3, 4)),
]


def criterion_5():
    rows, ok = [], True
    for name, build, sigma, alpha, control in GADGET_CASES:
        family = build()
        start = time.perf_counter()
        unsat = verify_impossibility(ImpossibilityQuery(family, sigma, alpha, family.n))
        elapsed = time.perf_counter() - start
        query = ImpossibilityQuery(family, sigma, control, family.n)
        sat = verify_impossibility(query)
        valid = sat.satisfiable and check_assignment(query, sat.assignment) == []
        rows.append(
            {
                "family": name,
                "objective": sigma.value,
                "alpha": fraction_json(alpha),
                "status": unsat.status,
                "nodes": unsat.nodes,
                "control_alpha": fraction_json(control),
                "control_status": sat.status,
                "control_witness_valid": valid,
            }
        )
        ok &= not unsat.satisfiable and elapsed < GADGET_SECONDS and valid
    return ok, {"cases": rows}


def criterion_6():
    ok, rows = True, []
    spec = GraphClass(5, 1)
    for variant in (Variant.PWRU, Variant.APWRU):
        report = verify_class(MechanismId(variant), spec, MIN)
        rows.append(report.to_json())
        ok &= report.graphs_checked == 3125 and report.impartial and report.worst_gap <= 1
        if variant is Variant.APWRU:
            ok &= report.max_selection_size <= 2
    return ok, {"reports": rows}


def criterion_7():
    rng = random.Random(MULTISET_SEED)
    failures = []
    for _ in range(MULTISETS):
        xs = [rng.randint(0, 50) for _ in range(rng.randint(1, 15))]
        for sigma in Aggregator:
            value = aggregate(xs, sigma)
            if not min(xs) <= value <= max(xs):
                failures.append({"values": xs, "objective": sigma.value})
    empty_ok = all(aggregate([], s) == 0 for s in Aggregator)
    median = aggregate([2, 1], MEDIAN)
    ok = not failures and empty_ok and median == Fraction(3, 2)
    return ok, {"failures": failures, "empty_is_zero": empty_ok, "median_2_1": fraction_json(median)}


CRITERIA = {
    "C1 closed-form oracle equals apwru on G_4, G_3(1), G_4(1)": criterion_1,
    "C2 apwru impartial, size <= d+1, min gap <= 1 on G_4(d); gap = 1 on G_4": criterion_2,
    "C3 pivotal variant on G_2..G_4": criterion_3,
    "C4 edge-deletion bounds and tightness witness": criterion_4,
    "C5 gadget families UNSAT with SAT controls": criterion_5,
    "C6 pwru and apwru on G_5(1)": criterion_6,
    "C7 aggregator contract": criterion_7,
}


def _serialize(report) -> bytes:
    return json.dumps(report, sort_keys=True).encode()


def _line(ok, name):
    return f"{'PASS' if ok else 'FAIL'}  {name}"


_first_run = {}


def _result(name):
    if name not in _first_run:
        _first_run[name] = CRITERIA[name]()
    return _first_run[name]


@pytest.mark.parametrize("name", list(CRITERIA))
def test_criterion(name, capsys):
    ok, report = _result(name)
    with capsys.disabled():
        print("\n" + _line(ok, name))
    assert ok, json.dumps(report, sort_keys=True)[:2000]


def test_determinism(capsys):
    differing = [name for name, fn in CRITERIA.items() if _serialize(fn()[1]) != _serialize(_result(name)[1])]
    ok = not differing
    with capsys.disabled():
        print("\n" + _line(ok, "C8 determinism: second run of C1-C7 byte-identical"))
    assert ok, differing


if __name__ == "__main__":
    all_ok = True
    first = {}
    for name, fn in CRITERIA.items():
        ok, report = fn()
        first[name] = _serialize(report)
        print(_line(ok, name), flush=True)
        all_ok &= ok
    same = all(_serialize(fn()[1]) == first[name] for name, fn in CRITERIA.items())
    print(_line(same, "C8 determinism: second run of C1-C7 byte-identical"))
    sys.exit(0 if all_ok and same else 1)
