from kappa3.oracle import oracle_enumerate
from kappa3.selftest import run_selftest


def test_selftest_passes():
    s = run_selftest(size=30)
    assert s.passed, s.to_json()


def test_selftest_catches_corrupted_oracle():
    def off_by_one(g, s, mode):
        v = oracle_enumerate(g, s, mode)
        return v + 1 if v >= 1 else v

    s = run_selftest(oracle=off_by_one, size=30)
    assert not s.passed
    assert not s.checks[0].passed and s.checks[0].failures


def test_selftest_is_repeatable():
    assert run_selftest(size=15).to_json() == run_selftest(size=15).to_json()
