import pytest

from app.models import ExperimentConfig
from app.services.validation_service import run_validation_suite

CORE_CHECKS = {
    "lifted_identity",
    "optimal_gram",
    "training_optimality",
    "phase_grid_search",
    "b_matrix_orthogonality",
    "noiseless_recovery",
    "mse_law",
    "quadratic_cancellation",
    "trace_lower_bound",
}


@pytest.fixture(scope="module")
def quick_config():
    return ExperimentConfig(validation_trials=2)


class TestValidationSuite:
    def test_default_passes(self, quick_config):
        report = run_validation_suite(quick_config)
        failed = [(check.name, check.detail) for check in report.checks if not check.passed]
        assert failed == []
        assert report.passed
        assert CORE_CHECKS <= {check.name for check in report.checks}

    def test_scheme_checks(self, quick_config):
        report = run_validation_suite(quick_config)
        labels = {check.scheme for check in report.scheme_checks()}
        assert labels == {"perfect_csi", "proposed", "baseline1", "baseline2", "baseline3_omega=1", "baseline3_omega=n+1"}

    def test_sabotage_only_breaks_optimality(self):
        report = run_validation_suite(ExperimentConfig(schemes=[]), sabotage=True)
        assert not report.passed
        assert [check.name for check in report.checks if not check.passed] == ["training_optimality"]
        assert "rotation_phase" in report.check("training_optimality").detail

    def test_empty_scheme_list(self):
        report = run_validation_suite(ExperimentConfig(schemes=[]))
        assert report.scheme_checks() == []
        assert report.passed

    def test_exceptions_become_failures(self, monkeypatch):
        from app.services import validation_service

        def explode(*args, **kwargs):
            raise RuntimeError("boom")

        monkeypatch.setattr(validation_service, "_check_b_matrix", explode)
        report = run_validation_suite(ExperimentConfig(schemes=[]))
        check = report.check("b_matrix_orthogonality")
        assert not check.passed
        assert "boom" in check.detail
