import pytest

from fracfem.core.exact_solutions import FourierSeriesSolution, InitialData
from fracfem.infra.settings import SettingsLoader


def test_settings_are_a_singleton():
    assert SettingsLoader() is SettingsLoader()


@pytest.mark.parametrize("value,expected", [(32, 200_000), (63, 200_000), (64, 64), ("5000", 5000), ("many", 200_000)])
def test_mode_cap_respects_the_series_head(value, expected):
    assert SettingsLoader()._normalize({"MAX_MODES": value})["MAX_MODES"] == expected


def test_every_accepted_mode_cap_builds_a_series():
    cap = SettingsLoader()._normalize({"MAX_MODES": 64})["MAX_MODES"]
    assert FourierSeriesSolution(InitialData("one_c1"), 0.5, max_modes=cap).max_modes == 64


@pytest.mark.parametrize("value,expected", [("debug", "DEBUG"), (" error ", "ERROR"), ("loud", "WARNING"), (3, "WARNING")])
def test_solver_log_level(value, expected):
    assert SettingsLoader()._normalize({"SOLVER_LOG_LEVEL": value})["SOLVER_LOG_LEVEL"] == expected


def test_defaults():
    cfg = SettingsLoader()._normalize({})
    assert cfg["LOG_LEVEL"] == "INFO" and cfg["SOLVER_LOG_LEVEL"] == "WARNING"
    assert cfg["REFERENCE_CELLS"] == 512 and cfg["MAX_WORKERS"] == 1
