import numpy as np
import pytest

from fracfem.infra.settings import SettingsLoader


@pytest.fixture
def settings(tmp_path, monkeypatch):
    """Settings with every output directory redirected into tmp_path."""
    s = SettingsLoader()
    monkeypatch.setitem(s._config, "OUT_DIR", str(tmp_path / "out"))
    monkeypatch.setitem(s._config, "CACHE_DIR", str(tmp_path / "cache"))
    monkeypatch.setitem(s._config, "LOG_DIR", str(tmp_path / "logs"))
    monkeypatch.setitem(s._config, "MAX_WORKERS", 1)
    return s


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)
