"""
서브골 그래프

노드(서브골) + AND 그룹 / OR 엣지 의존성 + 슬롯별 성공률 카운터.
YAML 파일 로드와 구조 검증을 담당한다.
"""
import logging
import re
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Iterator, List, Optional, Set, Tuple, Union

import yaml

from ..errors import (GraphLoadError, GraphSchemaError, InvalidGraphError,
                      UnknownSubgoalError)

logger = logging.getLogger(__name__)

ID_PATTERN = re.compile(r'^[a-z0-9_]+$')

SUBGOAL_ACHIEVED = 'subgoal-achieved'
INVENTORY_AT_LEAST = 'inventory-at-least'
CONDITION_KINDS = (SUBGOAL_ACHIEVED, INVENTORY_AT_LEAST)

APPEAR = 'appear'
DISAPPEAR = 'disappear'
DELTA = 'delta'
_DELTA_PATTERN = re.compile(r'^[+-]\d+$')


@dataclass(frozen=True)
class Condition:
    kind: str
    subject: str
    amount: Optional[int] = None

    def __post_init__(self):
        if self.kind not in CONDITION_KINDS:
            raise ValueError(f'unknown condition kind {self.kind!r}')
        if (self.amount is not None) != (self.kind == INVENTORY_AT_LEAST):
            raise ValueError('amount is required for inventory-at-least and only there')
        if self.amount is not None and self.amount < 0:
            raise ValueError('amount must be non-negative')

    def render(self) -> str:
        if self.kind == SUBGOAL_ACHIEVED:
            return f'{self.subject} achieved'
        return f'{self.subject} >= {self.amount}'


@dataclass(frozen=True)
class StateChangeSpec:
    object: str
    change: str
    amount: int = 0  # delta일 때만 의미 있음 (부호 포함)

    @classmethod
    def parse(cls, obj: str, raw: Union[str, int]) -> 'StateChangeSpec':
        if isinstance(raw, bool):
            raise ValueError(f'invalid change {raw!r}')
        if isinstance(raw, int):
            raw = f'{raw:+d}'
        raw = str(raw).strip()
        if raw in (APPEAR, DISAPPEAR):
            return cls(obj, raw)
        if _DELTA_PATTERN.match(raw) and int(raw) != 0:
            return cls(obj, DELTA, int(raw))
        raise ValueError(f'invalid change {raw!r}')

    def render(self) -> str:
        if self.change == DELTA:
            return f'{self.object} {self.amount:+d}'
        return f'{self.object} {self.change}'


@dataclass
class SubgoalNode:
    id: str
    description: str = ''
    preconditions: List[Condition] = field(default_factory=list)
    postconditions: List[StateChangeSpec] = field(default_factory=list)

    def required_subgoals(self) -> List[str]:
        return [c.subject for c in self.preconditions if c.kind == SUBGOAL_ACHIEVED]


@dataclass(frozen=True, order=True)
class SlotKey:
    variant: str
    target: str
    source: str = ''

    @classmethod
    def root(cls, node_id: str) -> 'SlotKey':
        return cls('root', node_id)

    @classmethod
    def and_group(cls, target: str) -> 'SlotKey':
        return cls('and_group', target)

    @classmethod
    def or_edge(cls, source: str, target: str) -> 'SlotKey':
        return cls('or_edge', target, source)

    def label(self) -> str:
        if self.variant == 'or_edge':
            return f'or_edge:{self.source}->{self.target}'
        return f'{self.variant}:{self.target}'


@dataclass
class Counter:
    planned: int = 0
    achieved: int = 0

    @property
    def rate(self) -> Optional[float]:
        if self.planned == 0:
            return None
        return self.achieved / self.planned


@dataclass
class SubgoalGraph:
    nodes: Dict[str, SubgoalNode] = field(default_factory=dict)
    and_groups: Dict[str, Set[str]] = field(default_factory=dict)
    or_edges: Dict[str, List[str]] = field(default_factory=dict)
    optional: Set[str] = field(default_factory=set)  # optional OR 의존성을 가진 루트
    weight_slots: Dict[SlotKey, Counter] = field(default_factory=dict)

    def __post_init__(self):
        if not self.weight_slots:
            self.reset_weights()

    def __contains__(self, node_id: str) -> bool:
        return node_id in self.nodes

    def __len__(self) -> int:
        return len(self.nodes)

    def node(self, node_id: str) -> SubgoalNode:
        try:
            return self.nodes[node_id]
        except KeyError:
            raise UnknownSubgoalError(node_id) from None

    def is_root(self, node_id: str) -> bool:
        return node_id not in self.and_groups and (
            node_id not in self.or_edges or node_id in self.optional)

    def roots(self) -> List[str]:
        return sorted(n for n in self.nodes if self.is_root(n))

    def sources(self, node_id: str) -> Set[str]:
        """optional 여부와 무관한 모든 선행 서브골"""
        return set(self.and_groups.get(node_id, ())) | set(self.or_edges.get(node_id, ()))

    def required_sources(self, node_id: str) -> Set[str]:
        if node_id in self.and_groups:
            return set(self.and_groups[node_id])
        if node_id in self.or_edges and node_id not in self.optional:
            return set(self.or_edges[node_id])
        return set()

    def successors(self, node_id: str) -> Set[str]:
        return {t for t in self.nodes if node_id in self.sources(t)}

    def is_satisfied(self, node_id: str, achieved: Set[str]) -> bool:
        """의존성 충족 여부 (AND는 전부, 필수 OR은 하나)"""
        if node_id in self.and_groups:
            return self.and_groups[node_id] <= set(achieved)
        if node_id in self.or_edges and node_id not in self.optional:
            return any(s in achieved for s in self.or_edges[node_id])
        return True

    def edges(self) -> Iterator[Tuple[str, Tuple[str, ...], str]]:
        """('and', sources, target) / ('or', (source,), target)"""
        for target in sorted(self.and_groups):
            yield 'and', tuple(sorted(self.and_groups[target])), target
        for target in sorted(self.or_edges):
            for source in self.or_edges[target]:
                yield 'or', (source,), target

    def find_cycle(self) -> Optional[List[str]]:
        # 반복 DFS (white/gray/black)
        color = {n: 0 for n in self.nodes}
        parent: Dict[str, str] = {}
        adjacency = defaultdict(set)
        for _, srcs, target in self.edges():
            for s in srcs:
                adjacency[s].add(target)
        for start in sorted(self.nodes):
            if color[start]:
                continue
            stack = [(start, iter(sorted(adjacency[start])))]
            color[start] = 1
            while stack:
                current, children = stack[-1]
                child = next(children, None)
                if child is None:
                    color[current] = 2
                    stack.pop()
                    continue
                if child not in color:
                    continue
                if color[child] == 1:
                    cycle = [current]
                    while cycle[-1] != child:
                        cycle.append(parent[cycle[-1]])
                    return list(reversed(cycle))
                if color[child] == 0:
                    color[child] = 1
                    parent[child] = current
                    stack.append((child, iter(sorted(adjacency[child]))))
        return None

    def depths(self) -> Dict[str, int]:
        """필수 의존성 기준 최장 경로 깊이 (루트 = 0)"""
        if self.find_cycle() is not None:
            raise InvalidGraphError('graph has a cycle')
        memo: Dict[str, int] = {}

        def depth(n: str) -> int:
            if n not in memo:
                srcs = [s for s in self.required_sources(n) if s in self.nodes]
                memo[n] = 1 + max(depth(s) for s in srcs) if srcs else 0
            return memo[n]

        for n in self.nodes:
            depth(n)
        return memo

    def slot_keys(self) -> List[SlotKey]:
        keys = [SlotKey.root(r) for r in self.roots()]
        keys += [SlotKey.and_group(t) for t in sorted(self.and_groups)]
        keys += [SlotKey.or_edge(s, t) for t in sorted(self.or_edges) for s in self.or_edges[t]]
        return keys

    def reset_weights(self):
        self.weight_slots = {k: Counter() for k in self.slot_keys()}

    def counter(self, key: SlotKey) -> Counter:
        return self.weight_slots[key]


@dataclass(frozen=True)
class Finding:
    kind: str  # cycle | unresolved | consistency | schema
    message: str
    subjects: Tuple[str, ...] = ()

    def __str__(self):
        return f'[{self.kind}] {self.message}'


@dataclass
class ValidationReport:
    findings: List[Finding] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.findings

    def of_kind(self, kind: str) -> List[Finding]:
        return [f for f in self.findings if f.kind == kind]

    def render(self) -> str:
        if self.ok:
            return 'no findings'
        return '\n'.join(str(f) for f in self.findings)


def validate_graph(graph: SubgoalGraph, structure_only: bool=False) -> ValidationReport:
    """
    그래프 검증. 예외 대신 finding 목록을 돌려준다.
    structure_only=True면 노드 속성(조건/설명) 검사는 건너뛴다 (parse_verbalized 결과용).
    """
    findings: List[Finding] = []

    for kind, srcs, target in graph.edges():
        for endpoint in srcs + (target,):
            if endpoint not in graph.nodes:
                findings.append(Finding(
                    'unresolved', f'{kind} edge endpoint {endpoint} is not a declared subgoal',
                    (endpoint,)))
    for target, srcs in sorted(graph.and_groups.items()):
        if len(srcs) < 2:
            findings.append(Finding(
                'consistency', f'AND group for {target} has fewer than two sources', (target,)))
        if target in graph.or_edges:
            findings.append(Finding(
                'consistency', f'{target} has both AND and OR dependencies', (target,)))
    for target in sorted(graph.optional):
        if target not in graph.or_edges:
            findings.append(Finding(
                'consistency', f'{target} is marked optional without OR edges', (target,)))

    cycle = graph.find_cycle()
    if cycle is not None:
        findings.append(Finding('cycle', 'cycle through ' + ' -> '.join(cycle), tuple(cycle)))

    for node_id in sorted(graph.nodes):
        if not ID_PATTERN.match(node_id):
            findings.append(Finding('schema', f'invalid subgoal id {node_id!r}', (node_id,)))
    if structure_only:
        return ValidationReport(findings)

    for node_id in sorted(graph.nodes):
        node = graph.nodes[node_id]
        if not node.postconditions:
            findings.append(Finding('schema', f'{node_id} has no postconditions', (node_id,)))
        incoming = graph.sources(node_id)
        required = set(node.required_subgoals())
        for subject in sorted(required):
            if subject not in graph.nodes:
                findings.append(Finding(
                    'unresolved', f'{node_id} precondition names unknown subgoal {subject}',
                    (node_id, subject)))
            elif subject not in incoming:
                findings.append(Finding(
                    'consistency',
                    f'{node_id} precondition {subject} is absent from its incoming edges',
                    (node_id, subject)))
        for source in sorted(graph.and_groups.get(node_id, ())):
            if source not in required:
                findings.append(Finding(
                    'consistency', f'AND source {source} missing from {node_id} preconditions',
                    (node_id, source)))
    return ValidationReport(findings)


# ---- YAML 로드 ----

def _fail(message: str, location: str):
    raise GraphSchemaError(message, location)


def _expect(value: Any, kind: type, location: str, what: str):
    if not isinstance(value, kind) or isinstance(value, bool) and kind is not bool:
        _fail(f'{what} must be a {kind.__name__}', location)
    return value


def _parse_condition(raw: Any, location: str) -> Condition:
    _expect(raw, dict, location, 'condition')
    unknown = set(raw) - {'kind', 'subject', 'amount'}
    if unknown:
        _fail(f'unknown keys {sorted(unknown)}', location)
    kind = raw.get('kind')
    if kind not in CONDITION_KINDS:
        _fail(f'kind must be one of {list(CONDITION_KINDS)}', f'{location}.kind')
    subject = _expect(raw.get('subject'), str, f'{location}.subject', 'subject')
    amount = raw.get('amount')
    if kind == INVENTORY_AT_LEAST:
        amount = _expect(amount, int, f'{location}.amount', 'amount')
        if amount < 0:
            _fail('amount must be non-negative', f'{location}.amount')
    elif amount is not None:
        _fail('amount is only allowed for inventory-at-least', f'{location}.amount')
    return Condition(kind, subject, amount)


def _parse_postcondition(raw: Any, location: str) -> StateChangeSpec:
    _expect(raw, dict, location, 'postcondition')
    obj = raw.get('object')
    if not isinstance(obj, str) or not obj:
        _fail('object must be a non-empty string', f'{location}.object')
    try:
        return StateChangeSpec.parse(obj, raw.get('change'))
    except ValueError as e:
        _fail(str(e), f'{location}.change')


def graph_from_document(doc: Any, source: str='<document>') -> SubgoalGraph:
    """파싱된 YAML 문서 -> SubgoalGraph (스키마 검사만, 구조 검증은 validate_graph)"""
    if doc is None:
        _fail('empty document', source)
    _expect(doc, dict, source, 'document')
    entries = doc.get('subgoals')
    if entries is None:
        _fail('missing top-level "subgoals"', source)
    _expect(entries, list, f'{source}: subgoals', 'subgoals')

    graph = SubgoalGraph(weight_slots={})
    for i, entry in enumerate(entries):
        loc = f'{source}: subgoals[{i}]'
        _expect(entry, dict, loc, 'subgoal entry')
        unknown = set(entry) - {'id', 'description', 'preconditions', 'postconditions', 'dependency'}
        if unknown:
            _fail(f'unknown keys {sorted(unknown)}', loc)
        node_id = entry.get('id')
        if not isinstance(node_id, str) or not ID_PATTERN.match(node_id):
            _fail('id must match [a-z0-9_]+', f'{loc}.id')
        if node_id in graph.nodes:
            _fail(f'duplicate id {node_id}', f'{loc}.id')
        pre = [_parse_condition(c, f'{loc}.preconditions[{j}]')
               for j, c in enumerate(_expect(entry.get('preconditions', []), list,
                                             f'{loc}.preconditions', 'preconditions'))]
        post = [_parse_postcondition(c, f'{loc}.postconditions[{j}]')
                for j, c in enumerate(_expect(entry.get('postconditions', []), list,
                                              f'{loc}.postconditions', 'postconditions'))]
        graph.nodes[node_id] = SubgoalNode(node_id, str(entry.get('description') or ''), pre, post)

        dependency = entry.get('dependency')
        if dependency is None:
            continue
        dloc = f'{loc}.dependency'
        _expect(dependency, dict, dloc, 'dependency')
        dtype = dependency.get('type')
        sources = _expect(dependency.get('sources'), list, f'{dloc}.sources', 'sources')
        if not sources or not all(isinstance(s, str) for s in sources):
            _fail('sources must be a non-empty list of ids', f'{dloc}.sources')
        optional = dependency.get('optional', False)
        if dtype == 'and':
            if optional:
                _fail('AND dependencies cannot be optional', f'{dloc}.optional')
            graph.and_groups[node_id] = set(sources)
        elif dtype == 'or':
            graph.or_edges[node_id] = list(dict.fromkeys(sources))
            if optional:
                graph.optional.add(node_id)
        else:
            _fail('type must be "and" or "or"', f'{dloc}.type')

    for i, entry in enumerate(entries):
        for j, s in enumerate((entry.get('dependency') or {}).get('sources', [])):
            if s not in graph.nodes:
                _fail(f'edge to undeclared node {s}',
                      f'{source}: subgoals[{i}].dependency.sources[{j}]')
    graph.reset_weights()
    return graph


def read_yaml(path: Union[str, Path]) -> Any:
    path = Path(path)
    try:
        text = path.read_text(encoding='utf-8')
    except OSError as e:
        raise GraphLoadError(f'cannot read file: {e.strerror}', str(path)) from e
    try:
        return yaml.safe_load(text)
    except yaml.YAMLError as e:
        mark = getattr(e, 'problem_mark', None)
        location = f'{path}:{mark.line + 1}:{mark.column + 1}' if mark else str(path)
        problem = getattr(e, 'problem', None) or str(e)
        raise GraphLoadError(f'parse error: {problem}', location) from e


def load_graph(path: Union[str, Path]) -> SubgoalGraph:
    """YAML 그래프 파일 로드. 검증 finding이 있으면 GraphSchemaError"""
    graph = graph_from_document(read_yaml(path), source=str(path))
    report = validate_graph(graph)
    if not report.ok:
        raise GraphSchemaError('graph failed validation: ' + '; '.join(
            f.message for f in report.findings), str(path))
    logger.debug('loaded %d subgoals from %s', len(graph), path)
    return graph
