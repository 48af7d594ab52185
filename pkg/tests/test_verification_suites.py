# test_verification_suites.py - 校验套件与调度
import pytest

from src.config import get_default_config
from src.errors import DomainError
from src.verification_suites import (
    SUITE_CLASSES,
    BaseSuite,
    ClosedFormSuite,
    CrossFormulaSuite,
    LimitsSuite,
    OracleSuite,
    SuiteType,
    VerificationManager,
)

CHEAP = ["genus", "elliptic-law", "hermitian-limits"]


class _BrokenSuite(BaseSuite):
    name = "broken"

    def get_suite_type(self):
        return SuiteType.EXACT

    def check(self, tally):
        tally.equal(1, 1, step="first")
        tally.equal(1, 2, step="second")
        raise DomainError("中途失败", {"step": "third"})


def test_suite_registry():
    assert len(SUITE_CLASSES) == 11
    assert set(get_default_config()["verify"]["suites"]) == set(SUITE_CLASSES)


def test_cheap_suites_pass(quiet_logger):
    manager = VerificationManager(get_default_config())
    results = manager.run(CHEAP)
    assert [r.name for r in results] == sorted(CHEAP)
    for result in results:
        assert result.passed, result.first_counterexample
        assert result.checked > 0
        assert result.to_dict()["suite"] == result.name


def test_threaded_run_gives_same_results(quiet_logger):
    manager = VerificationManager(get_default_config())
    serial = [(r.name, r.passed, r.checked) for r in manager.run(CHEAP)]
    threaded = [(r.name, r.passed, r.checked) for r in manager.run(CHEAP, threads=3)]
    assert serial == threaded


def test_unknown_and_disabled_suites(quiet_logger):
    config = get_default_config()
    manager = VerificationManager(config)
    assert manager.build_suites(["nope"]) == []
    config["verify"]["oracle"]["enabled"] = False
    assert [s.name for s in manager.build_suites(["oracle", "genus"])] == ["genus"]
    config["verify"]["suites"] = ["genus"]
    assert [s.name for s in manager.build_suites(["all"])] == ["genus"]


def test_oracle_suite_checks_every_n_by_default(quiet_logger):
    manager = VerificationManager(get_default_config())
    suite = manager.build_suites(["oracle"])[0]
    assert suite.n_values() == [1, 2, 3, 4, 5, 6]
    assert suite.config["oracle"]["tolerance"]["hermite"] == 1e-7
    assert OracleSuite({"N_max": 3}).n_values() == [1, 2, 3]
    assert OracleSuite({"N_max": 6, "N_values": [5, 2, 5]}).n_values() == [2, 5]


def test_failures_are_counted(quiet_logger):
    result = _BrokenSuite({}).run()
    assert not result.passed
    assert result.checked == 2
    assert result.failures == 2
    assert result.first_counterexample["step"] == "second"


def test_exception_becomes_counterexample(quiet_logger):
    class Exploding(_BrokenSuite):
        def check(self, tally):
            raise DomainError("直接失败", {"step": "only"})

    result = Exploding({}).run()
    assert result.failures == 1
    assert result.first_counterexample["error_type"] == "DomainError"


def test_exact_suites_with_small_grids(quiet_logger):
    assert ClosedFormSuite({"order_max": 4, "N_max": 4}).run().passed
    assert LimitsSuite({}).run().passed


@pytest.mark.slow
def test_cross_formula_suite(quiet_logger):
    config = {"complex_cross": {"order_max": 4, "N_max": 4},
              "symplectic_cross": {"order_max": 4, "N_max": 3}}
    result = CrossFormulaSuite(config).run()
    assert result.passed, result.first_counterexample


@pytest.mark.slow
def test_oracle_suite_for_hermite(quiet_logger):
    result = OracleSuite({"order_max": 2, "N_max": 2, "oracle": {}}, family_filter="hermite").run()
    assert result.passed, result.first_counterexample
