"""
프롬프트 템플릿 로드/치환
"""
from pathlib import Path
from string import Formatter
from typing import Mapping, Optional

from ..errors import PromptError, UnknownPlaceholder
from .paths import ASSETS_DIR

PROMPTS_DIR = ASSETS_DIR / 'prompts'


def load_template(name: str, prompts_dir: Optional[Path]=None) -> str:
    path = Path(prompts_dir or PROMPTS_DIR) / f'{name}.txt'
    try:
        text = path.read_text(encoding='utf-8')
    except OSError as e:
        raise PromptError(f'cannot read template {path}') from e
    # 파일 끝 개행 하나는 템플릿 내용이 아님
    return text[:-1] if text.endswith('\n') else text


def fill_template(template: str, values: Mapping[str, str]) -> str:
    """
    {name} 치환. 값이 없는 placeholder는 그대로 두지 않고 UnknownPlaceholder.
    "{unachieved }"처럼 이름에 공백이 섞인 경우도 같은 키로 본다
    """
    out = []
    for literal, field_name, _, _ in Formatter().parse(template):
        out.append(literal)
        if field_name is None:
            continue
        key = field_name.strip()
        if key not in values:
            raise UnknownPlaceholder(key)
        out.append(str(values[key]))
    return ''.join(out)
