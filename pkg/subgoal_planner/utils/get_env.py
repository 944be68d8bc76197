import os
from typing import Any, Callable, Optional

from ..errors import ConfigError


def get_env(key: str, fallback: Optional[Any]=None, cast: Callable[[str], Any]=str) -> Any:
    """
    환경변수 읽기. 없으면 fallback, 둘 다 없으면 ConfigError
    cast 변환에 실패해도 ConfigError (PORT=abc 같은 경우)
    """
    val = os.environ.get(key) or fallback
    if val is None or val == '':
        raise ConfigError(f'environment variable {key} is not set')
    try:
        return cast(val)
    except (TypeError, ValueError) as e:
        raise ConfigError(f'environment variable {key}={val!r} is not a valid {cast.__name__}') from e
