"""
서브골 트래커

관측 변화와 후조건을 비교해 계획 서브골 달성을 판정하고,
첫 달성마다 추가 보상을 주며 그래프 슬롯 카운터(Np, Na)를 갱신한다.
"""
import logging
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Set, Tuple

from ..errors import ConfigError, NoActivePlan
from ..knowledge.graph import APPEAR, DELTA, SlotKey, StateChangeSpec, SubgoalGraph
from . import options
from .observation import ObservationLike, StateDelta, diff, extract_objects

logger = logging.getLogger(__name__)


def plan_ids(plan) -> Tuple[str, ...]:
    """FinalPlan 또는 id 시퀀스"""
    return tuple(getattr(plan, 'subgoals', plan))


def postcondition_met(spec: StateChangeSpec, delta: StateDelta) -> bool:
    if spec.change == APPEAR:
        return spec.object in delta.appeared
    if spec.change != DELTA:
        return spec.object in delta.disappeared
    n = spec.amount
    if spec.object in delta.changed:
        changed = delta.changed[spec.object]
        return changed >= n if n > 0 else changed <= n
    # 인벤토리에서 0개는 표시되지 않으므로 등장/소멸도 수량 변화로 본다
    if n > 0:
        return delta.appeared.get(spec.object, 0) >= n
    return delta.disappeared.get(spec.object, 0) >= -n


def check_subgoals(delta: StateDelta, plan, graph: SubgoalGraph) -> Set[str]:
    """계획에 있는 서브골 중 후조건이 모두 충족된 것"""
    achieved = set()
    if not delta:
        return achieved
    for subgoal in plan_ids(plan):
        node = graph.nodes.get(subgoal)
        if node is None or not node.postconditions:
            continue
        if all(postcondition_met(p, delta) for p in node.postconditions):
            achieved.add(subgoal)
    return achieved


def attribution_slots(graph: SubgoalGraph, subgoal: str, episode_achieved: Iterable[str]) -> List[SlotKey]:
    """
    계획 서브골의 카운터 슬롯.
    AND: 공유 슬롯 하나, 루트: 루트 슬롯,
    OR: 이번 에피소드에 달성한 대안들 (없으면 전체 대안), optional OR 루트는 없으면 루트 슬롯
    """
    if subgoal not in graph:
        return []
    if subgoal in graph.and_groups:
        return [SlotKey.and_group(subgoal)]
    if subgoal in graph.or_edges:
        done = set(episode_achieved)
        alternatives = graph.or_edges[subgoal]
        reached = [SlotKey.or_edge(s, subgoal) for s in alternatives if s in done]
        if subgoal in graph.optional:
            return reached or [SlotKey.root(subgoal)]
        return reached or [SlotKey.or_edge(s, subgoal) for s in alternatives]
    return [SlotKey.root(subgoal)]


@dataclass
class TrackerConfig:
    alpha: float = options.ALPHA
    extra_reward: str = options.EXTRA_REWARD
    update_weights: bool = options.UPDATE_WEIGHTS
    achieved_scope: str = options.ACHIEVED_SCOPE

    def __post_init__(self):
        if self.alpha <= 0:
            raise ConfigError('tracker.alpha must be positive')
        if self.extra_reward not in options.EXTRA_REWARD_MODES:
            raise ConfigError(f'tracker.extra_reward must be one of {list(options.EXTRA_REWARD_MODES)}')
        if self.achieved_scope not in options.ACHIEVED_SCOPES:
            raise ConfigError(f'tracker.achieved_scope must be one of {list(options.ACHIEVED_SCOPES)}')


@dataclass
class TrackerState:
    active_plan: Optional[Tuple[str, ...]] = None
    first_achieved: Dict[str, bool] = field(default_factory=dict)
    credited: Dict[str, List[SlotKey]] = field(default_factory=dict)
    counted: Set[str] = field(default_factory=set)  # 이번 계획에서 Na를 올린 서브골
    cumulative_extra: float = 0.0  # 현재 계획 기준
    episode_achieved: Set[str] = field(default_factory=set)


@dataclass
class StepResult:
    extra_reward: float
    achieved: Set[str]
    first_time: Set[str]
    delta: StateDelta


class SubgoalTracker:
    def __init__(self, graph: SubgoalGraph, config: Optional[TrackerConfig]=None):
        self.graph = graph
        self.config = config or TrackerConfig()
        self.state = TrackerState()

    @property
    def plan(self) -> Optional[Tuple[str, ...]]:
        return self.state.active_plan

    def new_plan(self, plan) -> TrackerState:
        subgoals = plan_ids(plan)
        state = self.state
        state.active_plan = subgoals
        state.first_achieved = {s: False for s in subgoals}
        state.cumulative_extra = 0.0
        state.counted = set()
        state.credited = {
            s: attribution_slots(self.graph, s, state.episode_achieved) for s in subgoals}
        if self.config.update_weights:
            for slots in state.credited.values():
                for key in slots:
                    self.graph.counter(key).planned += 1
        logger.debug('new plan %s', ', '.join(subgoals))
        return state

    def note_achievements(self, names: Iterable[str]):
        """환경이 알려준 이번 에피소드 업적 (OR 슬롯 귀속용)"""
        self.state.episode_achieved.update(names)

    def step(self, obs_prev: ObservationLike, obs_curr: ObservationLike) -> StepResult:
        state = self.state
        if state.active_plan is None:
            raise NoActivePlan('tracker.step called before new_plan')
        delta = diff(extract_objects(obs_prev), extract_objects(obs_curr))
        achieved = check_subgoals(delta, state.active_plan, self.graph)
        first_time = {s for s in achieved if not state.first_achieved[s]}
        for s in first_time:
            state.first_achieved[s] = True

        mode = self.config.extra_reward
        rewarded = first_time if mode == 'first_time' else achieved if mode == 'every_time' else set()
        extra = self.config.alpha * len(rewarded)
        state.cumulative_extra += extra

        if self.config.update_weights:
            if self.config.achieved_scope == 'per_plan':
                counted = first_time - state.counted
                state.counted |= counted
            else:
                counted = achieved
            for s in sorted(counted):
                for key in state.credited.get(s, ()):
                    self.graph.counter(key).achieved += 1
        if achieved:
            logger.debug('achieved %s (first time: %s)', sorted(achieved), sorted(first_time))
        return StepResult(extra, achieved, first_time, delta)

    def all_achieved(self) -> bool:
        if self.state.active_plan is None:
            raise NoActivePlan('no active plan')
        return all(self.state.first_achieved.values())

    def reset_episode(self):
        """
        에피소드 경계: 계획도 함께 끝낸다 (계획 하나의 추가 보상은 최대 3α).
        호출자는 다음 스텝에서 new_plan으로 새 계획을 세운다.
        """
        if self.state.active_plan is not None:
            logger.debug('episode reset ends plan %s', ', '.join(self.state.active_plan))
        self.state = TrackerState()
