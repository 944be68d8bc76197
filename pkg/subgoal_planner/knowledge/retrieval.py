"""
서브골 상세 정보 검색 G(v)
"""
from collections import deque
from dataclasses import dataclass
from typing import Iterable, List, Tuple

from ..errors import UnknownSubgoalError
from .graph import SubgoalGraph
from .options import DEFAULT_HOPS


@dataclass(frozen=True)
class SubgoalDetail:
    id: str
    description: str
    preconditions: Tuple[str, ...]
    postconditions: Tuple[str, ...]
    distance: int = 0  # 요청 노드로부터의 hop 수

    def render(self) -> str:
        pre = '; '.join(self.preconditions) or 'none'
        post = '; '.join(self.postconditions) or 'none'
        return f'{self.id}: {self.description} Preconditions: {pre}. Postconditions: {post}.'


def _detail(graph: SubgoalGraph, node_id: str, distance: int) -> SubgoalDetail:
    node = graph.node(node_id)
    return SubgoalDetail(
        id=node.id,
        description=node.description,
        preconditions=tuple(c.render() for c in node.preconditions),
        postconditions=tuple(p.render() for p in node.postconditions),
        distance=distance,
    )


def subgoal_details(graph: SubgoalGraph, ids: Iterable[str], hops: int=DEFAULT_HOPS) -> List[SubgoalDetail]:
    """
    요청 id들의 상세 정보 + hops 이내 앞/뒤 이웃.
    결과 순서: 요청 id (정렬) 먼저, 그 다음 거리 / 이름 순
    """
    if hops < 0:
        raise ValueError('hops must be non-negative')
    requested = sorted(set(ids))
    for node_id in requested:
        if node_id not in graph:
            raise UnknownSubgoalError(f'unknown subgoal {node_id}')

    distance = {n: 0 for n in requested}
    queue = deque(requested)
    while queue:
        current = queue.popleft()
        if distance[current] >= hops:
            continue
        for neighbor in sorted(graph.sources(current) | graph.successors(current)):
            if neighbor in graph and neighbor not in distance:
                distance[neighbor] = distance[current] + 1
                queue.append(neighbor)

    ordered = sorted(distance, key=lambda n: (distance[n], n))
    return [_detail(graph, n, distance[n]) for n in ordered]


def render_details(details: Iterable[SubgoalDetail]) -> str:
    lines = [d.render() for d in details]
    return '\n'.join(lines) if lines else 'none'
