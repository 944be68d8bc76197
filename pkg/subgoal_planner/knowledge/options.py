"""
knowledge 기본값
"""
from ..utils.paths import ASSETS_DIR

GRAPH_FIXTURE = ASSETS_DIR / 'fixtures' / 'crafter_graph.yaml'
KB_FIXTURE = ASSETS_DIR / 'fixtures' / 'crafter_kb.yaml'

ROOT_SEPARATOR = '; '
AND_SEPARATOR = ' & '
EDGE_ARROW = ' -> '
UNKNOWN_WEIGHT = '(-%)'

DEFAULT_HOPS = 0  # critic에는 0-hop이면 충분
