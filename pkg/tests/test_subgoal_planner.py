import pytest

from subgoal_planner import __version__
from subgoal_planner.errors import ConfigError
from subgoal_planner.utils import get_env


def test_version():
    assert __version__ == '0.1.0'


def test_get_env(monkeypatch):
    monkeypatch.setenv('SUBGOAL_PORT', '9000')
    assert get_env('SUBGOAL_PORT') == '9000'
    assert get_env('SUBGOAL_PORT', cast=int) == 9000

    monkeypatch.delenv('SUBGOAL_PORT')
    assert get_env('SUBGOAL_PORT', 8000, cast=int) == 8000
    with pytest.raises(ConfigError, match='SUBGOAL_PORT'):
        get_env('SUBGOAL_PORT')

    monkeypatch.setenv('SUBGOAL_PORT', 'eighty')
    with pytest.raises(ConfigError, match='int'):
        get_env('SUBGOAL_PORT', cast=int)
