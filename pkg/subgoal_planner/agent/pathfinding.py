"""
BFS 경로 탐색 (4방향, 칸 비용 동일)
"""
from collections import deque
from typing import Callable, Dict, List, Optional, Tuple

from ..gridcraft.options import DIRECTIONS
from ..gridcraft.world import Pos, WorldState


def neighbors(p: Pos) -> List[Tuple[str, Pos]]:
    # 방향 순서(N, E, S, W)가 곧 동률 처리 순서
    return [(name, (p[0] + dx, p[1] + dy)) for name, (dx, dy) in DIRECTIONS.items()]


def _reconstruct(parent: Dict[Pos, Optional[Tuple[Pos, str]]], end: Pos) -> List[str]:
    moves = []
    node = end
    while parent[node] is not None:
        prev, move = parent[node]
        moves.append(move)
        node = prev
    moves.reverse()
    return moves


def find_path(state: WorldState, goal: Callable[[Pos], bool], limit: Optional[int]=None) -> Optional[List[str]]:
    """
    에이전트 위치에서 goal을 만족하는 칸까지의 최단 이동 방향 목록.
    이미 goal이면 [], 도달 불가(또는 limit 초과)면 None
    """
    start = state.pos
    if goal(start):
        return []
    queue = deque([start])
    parent: Dict[Pos, Optional[Tuple[Pos, str]]] = {start: None}
    depth = {start: 0}
    while queue:
        p = queue.popleft()
        if limit is not None and depth[p] >= limit:
            continue
        for move, n in neighbors(p):
            if n in parent or not state.is_free(n):
                continue
            parent[n] = (p, move)
            depth[n] = depth[p] + 1
            if goal(n):
                return _reconstruct(parent, n)
            queue.append(n)
    return None


def adjacent_to(predicate: Callable[[Pos], bool]) -> Callable[[Pos], bool]:
    """predicate를 만족하는 칸과 맞닿은 칸"""
    return lambda p: any(predicate(n) for _, n in neighbors(p))
