from pathlib import Path
from typing import Optional, Union

ASSETS_DIR = Path(__file__).resolve().parent.parent / 'assets'
ASSET_PREFIX = 'asset:'


def resolve_path(path: Union[str, Path], base: Optional[Path]=None) -> Path:
    # 'asset:fixtures/crafter_graph.yaml' -> 번들된 assets 디렉터리 기준
    path = str(path)
    if path.startswith(ASSET_PREFIX):
        return ASSETS_DIR / path[len(ASSET_PREFIX):]
    p = Path(path).expanduser()
    if not p.is_absolute() and base is not None:
        p = Path(base) / p
    return p
