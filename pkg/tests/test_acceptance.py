"""The ten acceptance criteria, each at its stated size, tolerance and time limit.

Every test prints one ``PASS``/``FAIL`` line.  Run the file directly to get
just those lines:  ``python3 tests/test_acceptance.py``.
"""
import sys
import time
from fractions import Fraction

import pytest

from vfuzz.distance import DistQuery, distance
from vfuzz.parser import parse_term
from vfuzz.syntax import UNIT, Lolli, term_I
from vfuzz.verify import run_suite

SEED = 0
# collected lines; conftest prints them in the terminal summary
REPORT: list[str] = []


def _report(n, title, ok, detail, seconds, limit=None):
    timing = f"{seconds:.2f}s" + (f" (limit {limit}s)" if limit else "")
    line = f"{'PASS' if ok else 'FAIL'} criterion {n:>2}: {title}: {detail}; {timing}"
    REPORT.append(line)
    print(line, flush=True)
    return line


def _suite(name, **kw):
    t = time.perf_counter()
    rep = run_suite(name, SEED, **kw)
    return rep, time.perf_counter() - t


def _laws(rep, pred=lambda r: True):
    return [r for r in rep.results if pred(r)]


def _summary(results):
    return ", ".join(f"{r.law} {r.passed}/{r.total}" for r in results)


def criterion_1():
    t = time.perf_counter()
    lhs = term_I(UNIT)
    rhs = parse_term("op+[1/2](I[unit], Omega[unit -o unit])")
    r = distance(DistQuery(lhs, rhs, Lolli(UNIT, UNIT), mode="sim", quantale="unit",
                           monad="dist", budget=8, iters=4, probe_depth=2))
    dt = time.perf_counter() - t
    ok = r.value == Fraction(1, 2) and r.stabilized and dt < 5
    return ok, f"value {r.value}, stabilized {r.stabilized}", dt, 5


def criterion_2():
    rep, dt = _suite("adequacy", n=300, budget=10)
    res = rep.results
    ok = rep.ok and sum(r.passed for r in res) == 300 and dt < 60
    return ok, _summary(res), dt, 60


def criterion_3():
    rep, dt = _suite("transport", n=500)
    ok = rep.ok and all(r.passed == 500 for r in rep.results) and dt < 30
    return ok, _summary(rep.results), dt, 30


def criterion_4():
    rep, dt = _suite("relators", n=200)
    res = rep.results
    names = {r.law for r in res}
    needed = [f"{g}:V-rel{i}" for g in ("partial", "hausdorff", "wasserstein", "wasserstein_bot",
                                        "state") for i in (1, 2, 3, 4)]
    needed += [f"{g}:V-rel5" for g in ("conversive(hausdorff)", "conversive(partial)",
                                       "conversive(wasserstein_bot)", "conversive(state)")]
    missing = [x for x in needed if x not in names]
    ok = rep.ok and not missing and all(r.passed == 200 for r in res) and dt < 60
    detail = f"{len(res)} laws x 200 instances, {sum(r.failed for r in res)} failures"
    if missing:
        detail += f"; missing {missing}"
    return ok, detail, dt, 60


def criterion_5():
    rep, dt = _suite("strong", n=200)
    res = _laws(rep, lambda r: r.law.split(":")[0] in ("wasserstein_bot", "hausdorff")
                and r.law.split(":")[1] in ("lax-unit", "lax-bind"))
    ok = len(res) == 4 and all(r.ok and r.passed == 200 for r in res)
    return ok, _summary(res), dt, None


def criterion_6():
    rep, dt = _suite("kernel", n=200)
    res = rep.results
    ok = len(res) == 4 and all(r.ok and r.total == 200 for r in res)
    detail = ", ".join(f"{r.law} {r.passed}/{r.total} agree"
                       + (f" ({r.inconclusive} not stabilized)" if r.inconclusive else "")
                       for r in res)
    return ok, detail, dt, None


def criterion_7():
    rep, dt = _suite("eval", n=500, max_n=12)
    res = _laws(rep, lambda r: r.law == "monotone")
    ok = len(res) == 1 and res[0].ok and res[0].passed == 500
    return ok, _summary(res), dt, None


def criterion_8():
    rep, dt = _suite("compat", n=60, budget=10)
    res = rep.results
    total = sum(r.total for r in res)
    inconclusive = sum(r.inconclusive for r in res)
    rate = inconclusive / total
    worst = max(r.inconclusive / r.total for r in res)
    clauses = {r.law.split(":")[1] for r in res}
    decided = min(r.passed - r.vacuous for r in res)
    ok = rep.ok and len(clauses) == 12 and decided >= 50 and worst < 0.2
    detail = (f"{len(res)} monad/clause pairs, {total} fillings, "
              f"{sum(r.failed for r in res)} failures, inconclusive {rate:.1%} "
              f"(worst clause {worst:.1%}), at least {decided} non-vacuous passes per clause, "
              f"{sum(r.vacuous for r in res)} vacuous")
    return ok, detail, dt, None


def criterion_9():
    rep, dt = _suite("metric", n=100, budget=10)
    res = rep.results
    ok = rep.ok and sum(r.passed - r.vacuous for r in res) >= 100
    detail = ", ".join(f"{r.law} {r.passed}/{r.total}, {r.passed - r.vacuous} non-vacuous"
                       + (f" ({r.inconclusive} not stabilized)" if r.inconclusive else "")
                       for r in res)
    return ok, detail, dt, None


def criterion_10():
    rep, dt = _suite("distance", n_diag=500, n_sym=200)
    want = {"diagonal": 500, "bisim-symmetry": 200, "transitivity": 200}
    res = _laws(rep, lambda r: r.law in want)
    ok = len(res) == 3 and all(r.ok and r.total == want[r.law] for r in res)
    detail = ", ".join(f"{r.law} {r.passed}/{r.total}"
                       + (f" ({r.inconclusive} not stabilized)" if r.inconclusive else "")
                       for r in res)
    return ok, detail, dt, None


CRITERIA = [
    (1, "I vs I(+)Omega is exactly 1/2", criterion_1),
    (2, "adequacy on 300 nat programs", criterion_2),
    (3, "transport primal = dual = brute force", criterion_3),
    (4, "relator laws", criterion_4),
    (5, "lax unit and lax bind for W_bot and H", criterion_5),
    (6, "kernel agreement per monad", criterion_6),
    (7, "evaluation monotonicity", criterion_7),
    (8, "compatibility clauses", criterion_8),
    (9, "metric preservation", criterion_9),
    (10, "diagonal, bisim symmetry, transitivity", criterion_10),
]


@pytest.mark.parametrize("n,title,check", CRITERIA, ids=[f"criterion_{c[0]}" for c in CRITERIA])
def test_criterion(n, title, check):
    ok, detail, dt, limit = check()
    line = _report(n, title, ok, detail, dt, limit)
    assert ok, line


if __name__ == "__main__":
    failed = 0
    for n, title, check in CRITERIA:
        ok, detail, dt, limit = check()
        _report(n, title, ok, detail, dt, limit)
        failed += not ok
    sys.exit(1 if failed else 0)
