"""
그래프를 따라가는 스크립트 실행기

계획에서 아직 달성하지 못한 첫 서브골을 골라, 그래프 전제조건을 거슬러 올라가
지금 할 수 있는 가장 깊은 서브골의 매크로를 한 스텝씩 실행한다.
"""
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Dict, FrozenSet, List, Optional, Sequence, Set, Union

import yaml

from ..errors import ConfigError
from ..gridcraft.options import DIRECTIONS, MAX_VITAL, WALKABLE
from ..gridcraft.world import Action, Pos, WorldState
from ..knowledge import SubgoalGraph
from ..knowledge.graph import DELTA, INVENTORY_AT_LEAST, SUBGOAL_ACHIEVED
from ..tracker.observation import TextObservation
from . import options
from .base import PolicyInterface
from .pathfinding import adjacent_to, find_path, neighbors

logger = logging.getLogger(__name__)

_OPEN_TARGETS = ('free', 'grass')


def _move(direction: str) -> Action:
    return Action[f'MOVE_{direction.upper()}']


@dataclass(frozen=True)
class MacroAction:
    target: str
    act: str
    tile: Optional[str] = None
    near: Optional[str] = None
    wait_at: Optional[str] = None
    budget: int = options.MACRO_BUDGET

    @property
    def action(self) -> Action:
        return Action[self.act.upper()]

    def _open_cell(self, state: WorldState) -> Callable[[Pos], bool]:
        if self.tile == 'grass':
            return lambda p: state.material(p) == 'grass' and state.creature_at(p) is None
        return lambda p: state.material(p) in WALKABLE and state.creature_at(p) is None and p != state.pos

    def _compile_open(self, state: WorldState) -> Optional[List[Action]]:
        valid = self._open_cell(state)
        if valid(state.target()):
            return [self.action]
        for move, n in neighbors(state.pos):
            beyond = (2 * n[0] - state.pos[0], 2 * n[1] - state.pos[1])
            if state.is_free(n) and valid(beyond):
                return [_move(move), self.action]

        def standing(p: Pos) -> bool:
            return p != state.pos and any(
                state.is_free(n) and valid((2 * n[0] - p[0], 2 * n[1] - p[1])) for _, n in neighbors(p))

        path = find_path(state, standing, self.budget)
        return [_move(m) for m in path] if path else None

    def _compile_facing(self, state: WorldState, name: str) -> Optional[List[Action]]:
        def match(p: Pos) -> bool:
            return state.entity_at(p) == name

        if match(state.target()):
            return [self.action]
        for move, n in neighbors(state.pos):
            if match(n):
                return [_move(move), self.action]
        path = find_path(state, adjacent_to(match), self.budget)
        if path is None:
            return None
        end = state.pos
        for m in path:
            dx, dy = DIRECTIONS[m]
            end = (end[0] + dx, end[1] + dy)
        turn = next(move for move, n in neighbors(end) if match(n))
        return [_move(m) for m in path] + [_move(turn), self.action]

    def _compile_near(self, state: WorldState) -> Optional[List[Action]]:
        radius = state.config.nearby_radius

        def close(p: Pos) -> bool:
            return any(state.material((p[0] + dx, p[1] + dy)) == self.near
                       for dx in range(-radius, radius + 1) for dy in range(-radius, radius + 1))

        path = find_path(state, close, self.budget)
        return None if path is None else [_move(m) for m in path] + [self.action]

    def compile(self, state: WorldState) -> Optional[List[Action]]:
        """현재 상태에서 매크로를 끝내는 기본 행동열. 수행 불가면 None"""
        if self.near is not None:
            return self._compile_near(state)
        if self.tile is None:
            if self.act == 'sleep' and state.vitals['energy'] >= MAX_VITAL:
                return None
            return [self.action]
        if self.tile in _OPEN_TARGETS:
            return self._compile_open(state)
        plan = self._compile_facing(state, self.tile)
        if plan is None and self.wait_at is not None:
            # 아직 익지 않은 작물 옆에서 대기
            waiting = self._compile_facing(state, self.wait_at)
            if waiting is not None:
                return waiting[:-1] or [Action.NOOP]
        return plan


def load_macros(path: Union[str, Path]=options.MACROS) -> Dict[str, MacroAction]:
    try:
        doc = yaml.safe_load(Path(path).read_text(encoding='utf-8')) or {}
    except (OSError, yaml.YAMLError) as e:
        raise ConfigError(f'cannot load macro table {path}: {e}') from e
    budget = int(doc.get('budget', options.MACRO_BUDGET))
    macros = {}
    for target, spec in (doc.get('macros') or {}).items():
        try:
            macro = MacroAction(target=target, budget=budget, **spec)
            macro.action
        except (TypeError, KeyError) as e:
            raise ConfigError(f'{path}: bad macro {target}: {e}') from e
        macros[target] = macro
    return macros


def producers_of(graph: SubgoalGraph) -> Dict[str, str]:
    """아이템 -> 그 아이템을 늘리는 서브골 (이름순 첫 번째)"""
    producers: Dict[str, str] = {}
    for node_id in sorted(graph.nodes):
        for post in graph.node(node_id).postconditions:
            if post.change == DELTA and post.amount > 0:
                producers.setdefault(post.object, node_id)
    return producers


class ScriptedExecutor(PolicyInterface):
    name = 'scripted'

    def __init__(self, graph: SubgoalGraph, macros: Optional[Dict[str, MacroAction]]=None,
                 survival: bool=True):
        self.graph = graph
        self.macros = macros if macros is not None else load_macros()
        self.producers = producers_of(graph)
        self.survival = survival

    def resolve(self, subgoal: str, state: WorldState, seen: Optional[Set[str]]=None) -> str:
        """전제조건을 거슬러 올라간 가장 깊은 미충족 서브골"""
        seen = (seen or set()) | {subgoal}
        for cond in self.graph.node(subgoal).preconditions:
            if cond.kind == SUBGOAL_ACHIEVED:
                if not state.achievements.get(cond.subject, False) and cond.subject not in seen:
                    return self.resolve(cond.subject, state, seen)
            elif cond.kind == INVENTORY_AT_LEAST and state.inventory.get(cond.subject, 0) < cond.amount:
                producer = self.producers.get(cond.subject)
                if producer is not None and producer not in seen:
                    return self.resolve(producer, state, seen)
        return subgoal

    def macro_step(self, subgoal: str, state: WorldState) -> Optional[Action]:
        macro = self.macros.get(subgoal)
        if macro is None:
            return None
        compiled = macro.compile(state)
        return compiled[0] if compiled else None

    def reflex(self, state: WorldState) -> Optional[Action]:
        for move, n in neighbors(state.pos):
            creature = state.creature_at(n)
            if creature is not None and creature.kind in options.HOSTILE:
                return Action.INTERACT if n == state.target() else _move(move)
        needs = (('drink', 'collect_water'), ('food', 'eat_cow'), ('energy', 'sleep'))
        for vital, subgoal in needs:
            if state.vitals[vital] <= options.LOW_VITAL:
                action = self.macro_step(subgoal, state)
                if action is not None:
                    return action
        return None

    def act(self, obs: TextObservation, plan: Sequence[str], state: WorldState,
            completed: FrozenSet[str]=frozenset()) -> Action:
        if state.sleeping:
            return Action.NOOP
        if self.survival:
            action = self.reflex(state)
            if action is not None:
                return action
        for subgoal in plan:
            if subgoal in completed or subgoal not in self.graph:
                continue
            step_target = self.resolve(subgoal, state)
            action = self.macro_step(step_target, state)
            if action is not None:
                return action
            logger.debug('%s unreachable (via %s), trying next subgoal', subgoal, step_target)
        return Action.NOOP


def scripted_act(obs: TextObservation, plan: Sequence[str], graph: SubgoalGraph, state: WorldState,
                 completed: FrozenSet[str]=frozenset()) -> Action:
    return ScriptedExecutor(graph).act(obs, plan, state, completed)
