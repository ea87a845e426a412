import asyncio

import pytest

from nlaqkd.checks import CheckGraph, VerificationRunner, build_verification_suite
from nlaqkd.errors import TruncationError
from nlaqkd.record import RunRecord
from nlaqkd.types import Check, CheckOutcome, CheckStatus, EventType


def passing():
    return 0.0, "ok"


def failing():
    return 1.0, "off by one"


def test_ready_checks_simple():
    g = CheckGraph()
    a = Check(id="a", title="A", tolerance=1e-9)
    b = Check(id="b", title="B", tolerance=1e-9, dependencies=["a"])
    g.add_check(a)
    g.add_check(b)

    g.recompute_readiness()
    ready = g.ready_checks()
    assert a in ready and b not in ready

    g.mark_done("a", CheckOutcome(check_id="a", passed=True, deviation=0.0))
    g.recompute_readiness()
    assert [c.id for c in g.ready_checks()] == ["b"]


def test_failure_skips_dependents_transitively():
    g = CheckGraph()
    g.add_check(Check(id="a", title="A", tolerance=1e-9))
    g.add_check(Check(id="b", title="B", tolerance=1e-9, dependencies=["a"]))
    g.add_check(Check(id="c", title="C", tolerance=1e-9, dependencies=["b"]))
    g.mark_done("a", CheckOutcome(check_id="a", passed=False, deviation=1.0))

    skipped = g.recompute_readiness()
    assert [c.id for c in skipped] == ["b", "c"]
    assert g.get("b").detail == "blocked by a"
    assert g.get("c").detail == "blocked by b"
    assert g.recompute_readiness() == []


def test_unknown_dependency_rejected():
    g = CheckGraph()
    with pytest.raises(KeyError):
        g.add_check(Check(id="b", title="B", tolerance=1e-9, dependencies=["missing"]))


def test_cycle_rejected():
    g = CheckGraph()
    g.add_check(Check(id="a", title="A", tolerance=1e-9))
    g.add_check(Check(id="b", title="B", tolerance=1e-9, dependencies=["a"]))
    with pytest.raises(ValueError):
        g.add_dependency("a", "b")
    assert [c.id for c in g.checks()] == ["a", "b"]


def test_runner_propagates_failures():
    runner = VerificationRunner()
    runner.add_check(Check(id="root", title="root", tolerance=1e-9), passing)
    runner.add_check(Check(id="bad", title="bad", tolerance=1e-9, dependencies=["root"]), failing)
    runner.add_check(
        Check(id="after-bad", title="after", tolerance=1e-9, dependencies=["bad"]), passing
    )
    runner.add_check(
        Check(id="sibling", title="sibling", tolerance=1e-9, dependencies=["root"]), passing
    )

    checks = {c.id: c for c in asyncio.run(runner.run())}
    assert checks["root"].status is CheckStatus.PASSED
    assert checks["sibling"].status is CheckStatus.PASSED
    assert checks["bad"].status is CheckStatus.FAILED
    assert checks["bad"].deviation == 1.0
    assert checks["after-bad"].status is CheckStatus.SKIPPED

    types = [e.type for e in runner.events]
    assert types.count(EventType.CHECK_ADDED) == 4
    assert types.count(EventType.RESULT_EMITTED) == 3
    assert types.count(EventType.CHECK_SKIPPED) == 1
    assert runner.record.snapshot()["metrics"]["runs_completed"] == 1


def test_runner_records_probe_errors():
    def truncated():
        raise TruncationError("cutoff too small", tail_mass=1e-3, cutoff=4)

    runner = VerificationRunner()
    runner.add_check(Check(id="oracle", title="oracle", tolerance=1e-9), truncated)
    (check,) = asyncio.run(runner.run())
    assert check.status is CheckStatus.FAILED
    assert check.deviation is None
    assert "TruncationError" in check.detail


def test_runner_batches():
    runner = VerificationRunner(batch_size=1)
    for i in range(3):
        runner.add_check(Check(id=f"c{i}", title=str(i), tolerance=1e-9), passing)
    asyncio.run(runner.run())
    rounds = [e.type for e in runner.events if e.type is not EventType.CHECK_ADDED]
    assert rounds == [EventType.CHECK_DISPATCHED, EventType.RESULT_EMITTED] * 3


def test_default_suite_passes(tmp_path):
    record = RunRecord(report_path=tmp_path / "report.json")
    runner = build_verification_suite(VerificationRunner(record=record))
    checks = asyncio.run(runner.run())
    assert len(checks) == 10
    assert all(c.status is CheckStatus.PASSED for c in checks), [
        (c.id, c.detail) for c in checks if c.status is not CheckStatus.PASSED
    ]
    correlation = next(c for c in checks if c.id == "correlation")
    assert correlation.deviation < 1e-8
    assert (tmp_path / "report.json").exists()


def test_suite_with_small_cutoff_fails():
    runner = build_verification_suite(VerificationRunner(), alpha2=1.0, cutoff=4)
    checks = {c.id: c for c in asyncio.run(runner.run())}
    assert checks["lambda-normalization"].status is CheckStatus.PASSED
    assert checks["phi-orthonormality"].status is CheckStatus.FAILED
    for dependent in ("phi-decomposition", "mode-variance", "correlation"):
        assert checks[dependent].status is CheckStatus.SKIPPED
