"""
계획 문맥 구성
"""
from dataclasses import dataclass, field
from typing import Iterable, List, Optional, Sequence, Set

from ..errors import ConfigError, PlanningError
from ..gridcraft.options import ACHIEVEMENTS
from ..knowledge import (EntityKB, SubgoalGraph, extract_entity_names, lookup_entities,
                         render_entities, verbalize)
from ..tracker.observation import ObservationLike, as_observation
from . import options


@dataclass
class PlannerConfig:
    mode: str = options.MODE
    stage_retries: int = options.STAGE_RETRIES
    use_graph: bool = True
    use_entity_info: bool = True
    available: str = options.AVAILABLE_SCOPE
    detail_hops: int = options.DETAIL_HOPS
    seed: int = 0  # random_plan 모드용

    def __post_init__(self):
        if self.mode not in options.MODES:
            raise ConfigError(f'planner.mode must be one of {list(options.MODES)}, got {self.mode!r}')
        if self.available not in options.AVAILABLE_SCOPES:
            raise ConfigError(f'planner.available must be one of {list(options.AVAILABLE_SCOPES)}')
        if self.stage_retries < 0 or self.detail_hops < 0:
            raise ConfigError('planner.stage_retries and planner.detail_hops must be non-negative')


@dataclass
class PlanningContext:
    text_obs: str
    entity_info: str
    unachieved: List[str]
    available_subgoals: List[str]
    graph_text: str
    achieved: Set[str] = field(default_factory=set)
    graph: Optional[SubgoalGraph] = field(default=None, repr=False, compare=False)
    subgoal_details_text: Optional[str] = None

    @property
    def unachieved_text(self) -> str:
        return ', '.join(self.unachieved) or options.EMPTY_FIELD

    @property
    def subgoal_set_text(self) -> str:
        return ', '.join(self.available_subgoals) or options.EMPTY_FIELD


def frontier_subgoals(graph: SubgoalGraph, achieved: Iterable[str]) -> List[str]:
    """의존성이 충족된 서브골. 미달성 먼저, (깊이, 이름) 순"""
    achieved = set(achieved)
    depth = graph.depths()
    ready = [n for n in graph.nodes if graph.is_satisfied(n, achieved)]
    return sorted(ready, key=lambda n: (n in achieved, depth[n], n))


def frontier_plan(graph: SubgoalGraph, achieved: Iterable[str], size: int=options.SUBGOALS_PER_PLAN,
                  allowed: Optional[Sequence[str]]=None) -> List[str]:
    """
    fallback용 휴리스틱 계획. frontier가 모자라면 나머지 노드를 (깊이, 이름) 순으로 채운다.
    후보 노드가 size개보다 적으면 PlanningError
    """
    depth = graph.depths()
    allowed_set = set(allowed) if allowed is not None else set(graph.nodes)
    ordered = [n for n in frontier_subgoals(graph, achieved) if n in allowed_set]
    rest = sorted((n for n in allowed_set - set(ordered) if n in graph.nodes),
                  key=lambda n: (depth[n], n))
    plan = (ordered + rest)[:size]
    if len(plan) < size:
        raise PlanningError(f'need {size} subgoals for a plan, the graph offers only {len(plan)}')
    return plan


def build_context(obs: ObservationLike, graph: SubgoalGraph, kb: Optional[EntityKB],
                  achieved_set: Iterable[str], config: Optional[PlannerConfig]=None,
                  achievements: Sequence[str]=ACHIEVEMENTS) -> PlanningContext:
    config = config or PlannerConfig()
    obs = as_observation(obs)
    achieved = set(achieved_set)

    if config.use_entity_info and kb is not None:
        lookup = lookup_entities(kb, extract_entity_names(obs, kb))
        entity_info = render_entities(lookup.records)
    else:
        entity_info = options.EMPTY_FIELD
    graph_text = verbalize(graph, include_weights=True) if config.use_graph else options.EMPTY_FIELD

    if config.available == 'frontier':
        available = sorted(n for n in frontier_subgoals(graph, achieved) if n not in achieved)
        if len(available) < options.SUBGOALS_PER_PLAN:
            available = sorted(graph.nodes)
    else:
        available = sorted(graph.nodes)

    return PlanningContext(
        text_obs=obs.render(),
        entity_info=entity_info,
        unachieved=[a for a in achievements if a not in achieved],
        available_subgoals=available,
        graph_text=graph_text,
        achieved=achieved,
        graph=graph,
    )
