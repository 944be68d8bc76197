"""
그래프 <-> 계층 텍스트 변환

한 줄 = 깊이 한 단계. 첫 줄은 루트, 이후 줄은 "a & b -> x"(AND) / "a -> x"(OR).
"""
import re
from collections import defaultdict
from decimal import ROUND_HALF_UP, Decimal
from typing import Dict, List, Tuple

from ..errors import GrammarError, InvalidGraphError
from .graph import ID_PATTERN, Counter, SlotKey, SubgoalGraph, SubgoalNode, validate_graph
from .options import AND_SEPARATOR, EDGE_ARROW, ROOT_SEPARATOR, UNKNOWN_WEIGHT

WEIGHT_SUFFIX = re.compile(r'\s*\((?:\d{1,3}|-)%\)$')


def format_weight(counter: Counter) -> str:
    if counter.planned == 0:
        return UNKNOWN_WEIGHT
    percent = Decimal(counter.achieved * 100) / Decimal(counter.planned)
    return f'({percent.quantize(Decimal(1), rounding=ROUND_HALF_UP)}%)'


def _entries(graph: SubgoalGraph) -> Dict[int, List[Tuple[Tuple[str, ...], str, SlotKey]]]:
    depth = graph.depths()
    layers = defaultdict(list)
    for root in graph.roots():
        layers[0].append(((root,), root, SlotKey.root(root)))
    for kind, sources, target in graph.edges():
        layer = 1 + max(depth[s] for s in sources)
        if kind == 'and':
            text = AND_SEPARATOR.join(sources) + EDGE_ARROW + target
            key = SlotKey.and_group(target)
        else:
            text = sources[0] + EDGE_ARROW + target
            key = SlotKey.or_edge(sources[0], target)
        layers[layer].append(((target,) + sources, text, key))
    return layers


def verbalize(graph: SubgoalGraph, include_weights: bool=False) -> str:
    report = validate_graph(graph, structure_only=True)
    if not report.ok:
        raise InvalidGraphError(report.render())
    layers = _entries(graph)
    if not layers:
        return ''

    lines = []
    for layer in range(max(layers) + 1):
        parts = []
        for _, text, key in sorted(layers.get(layer, []), key=lambda e: e[0]):
            if include_weights:
                text = f'{text} {format_weight(graph.weight_slots.get(key, Counter()))}'
            parts.append(text)
        lines.append(ROOT_SEPARATOR.join(parts))
    return '\n'.join(lines)


def _check_id(token: str, lineno: int, what: str) -> str:
    if not ID_PATTERN.match(token):
        raise GrammarError(f'malformed {what} {token!r}', lineno)
    return token


def parse_verbalized(text: str) -> SubgoalGraph:
    """verbalize 출력 -> 구조만 있는 그래프 (설명/조건 없음, 가중치 접미사 무시)"""
    text = text.strip('\n')
    if not text.strip():
        raise GrammarError('empty structure')

    roots: List[str] = []
    and_groups: Dict[str, set] = {}
    or_edges: Dict[str, List[str]] = defaultdict(list)
    seen: Dict[str, None] = {}

    for lineno, line in enumerate(text.split('\n'), start=1):
        if not line.strip():
            raise GrammarError('empty layer', lineno)
        for raw in line.split(';'):
            entry = WEIGHT_SUFFIX.sub('', raw.strip())
            if not entry:
                raise GrammarError('empty entry', lineno)
            if lineno == 1:
                if '->' in entry or '&' in entry:
                    raise GrammarError(f'first layer must list roots only, got {entry!r}', lineno)
                roots.append(_check_id(entry, lineno, 'root'))
                seen.setdefault(entry)
                continue

            if entry.count('->') != 1:
                raise GrammarError(f'expected exactly one "->" in {entry!r}', lineno)
            lhs, rhs = entry.split('->')
            target = _check_id(rhs.strip(), lineno, 'target')
            sources = [s.strip() for s in lhs.split('&')]
            if any(not s for s in sources):
                raise GrammarError(f'malformed conjunct in {entry!r}', lineno)
            for s in sources:
                _check_id(s, lineno, 'source')
                seen.setdefault(s)
            seen.setdefault(target)
            if len(sources) > 1:
                if target in and_groups and and_groups[target] != set(sources):
                    raise GrammarError(f'conflicting AND groups for {target}', lineno)
                and_groups[target] = set(sources)
            elif sources[0] not in or_edges[target]:
                or_edges[target].append(sources[0])

    optional = {r for r in roots if r in or_edges}
    for r in roots:
        if r in and_groups:
            raise GrammarError(f'root {r} has an AND dependency')

    return SubgoalGraph(
        nodes={n: SubgoalNode(n) for n in seen},
        and_groups=and_groups,
        or_edges=dict(or_edges),
        optional=optional,
    )


def structure_of(graph: SubgoalGraph) -> Tuple[frozenset, frozenset, frozenset, frozenset]:
    """비교용 구조 요약 (노드, AND 그룹, OR 엣지, optional)"""
    return (
        frozenset(graph.nodes),
        frozenset((t, frozenset(s)) for t, s in graph.and_groups.items()),
        frozenset((s, t) for t, srcs in graph.or_edges.items() for s in srcs),
        frozenset(graph.optional),
    )
