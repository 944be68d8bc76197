"""
표 기반 매크로 학습기

(거친 상태 특징, 계획) x 매크로 목표 가치표를 ε-greedy로 고르고
매크로가 끝날 때마다 한 단계 TD로 갱신한다. 보상은 환경 보상 + 트래커 추가 보상.
"""
import logging
from collections import defaultdict
from pathlib import Path
from typing import Dict, FrozenSet, List, Optional, Sequence, Tuple, Union

import joblib
import numpy as np

from ..gridcraft.options import MAX_VITAL
from ..gridcraft.world import Action, WorldState
from ..knowledge import SubgoalGraph
from ..knowledge.graph import INVENTORY_AT_LEAST, SUBGOAL_ACHIEVED
from ..tracker.observation import TextObservation
from . import options
from .base import PolicyInterface, Transition
from .scripted import MacroAction, load_macros

logger = logging.getLogger(__name__)

Key = Tuple[tuple, Tuple[str, ...]]

_TOOLS = ('wood_pickaxe', 'stone_pickaxe', 'iron_pickaxe', 'wood_sword', 'stone_sword', 'iron_sword')


def features(obs: TextObservation) -> tuple:
    inventory = dict(obs.inventory)
    return (
        min(inventory.get('wood', 0), 2),
        min(inventory.get('stone', 0), 2),
        'table' in obs.visible,
        tuple(t for t in _TOOLS if inventory.get(t, 0) > 0),
    )


class TabularMacroLearner(PolicyInterface):
    name = 'tabular'

    def __init__(self, graph: SubgoalGraph, macros: Optional[Dict[str, MacroAction]]=None,
                 learning_rate: float=options.LEARNING_RATE, discount: float=options.DISCOUNT,
                 epsilon_start: float=options.EPSILON_START, epsilon_end: float=options.EPSILON_END,
                 epsilon_decay_steps: int=options.EPSILON_DECAY_STEPS, step_cost: float=options.STEP_COST,
                 option_limit: int=30, seed: int=0):
        self.graph = graph
        self.macros = macros if macros is not None else load_macros()
        self.targets = sorted(t for t in self.macros if t in graph)
        self.learning_rate = learning_rate
        self.discount = discount
        self.epsilon_start = epsilon_start
        self.epsilon_end = epsilon_end
        self.epsilon_decay_steps = epsilon_decay_steps
        self.step_cost = step_cost
        self.option_limit = option_limit
        self.rng = np.random.default_rng(seed)
        self.q: Dict[Tuple[Key, str], float] = defaultdict(float)
        self.decisions = 0
        self._clear()

    def _clear(self):
        self.current: Optional[str] = None
        self.start_key: Optional[Key] = None
        self.ret = 0.0
        self.k = 0
        self.finished = False

    @property
    def epsilon(self) -> float:
        if self.epsilon_decay_steps <= 0:
            return self.epsilon_end
        frac = min(1.0, self.decisions / self.epsilon_decay_steps)
        return self.epsilon_start + frac * (self.epsilon_end - self.epsilon_start)

    def value(self, key: Key, target: str) -> float:
        return self.q.get((key, target), 0.0)

    def available(self, state: WorldState) -> List[str]:
        """그래프 전제조건이 지금 충족되는 매크로 목표 (이름순)"""
        result = []
        for target in self.targets:
            if target == 'sleep' and state.vitals['energy'] >= MAX_VITAL:
                continue
            ok = True
            for cond in self.graph.node(target).preconditions:
                if cond.kind == SUBGOAL_ACHIEVED and not state.achievements.get(cond.subject, False):
                    ok = False
                elif cond.kind == INVENTORY_AT_LEAST and state.inventory.get(cond.subject, 0) < cond.amount:
                    ok = False
            if ok:
                result.append(target)
        return result

    def select(self, key: Key, available: Sequence[str], epsilon: Optional[float]=None) -> str:
        """ε-greedy. 동률이면 이름순 첫 번째"""
        epsilon = self.epsilon if epsilon is None else epsilon
        ordered = sorted(available)
        if self.rng.random() < epsilon:
            return ordered[int(self.rng.integers(len(ordered)))]
        return max(ordered, key=lambda t: self.value(key, t))

    def td_update(self, key: Key, target: str, ret: float, k: int=1, bootstrap: float=0.0) -> float:
        old = self.value(key, target)
        new = old + self.learning_rate * (ret + self.discount ** k * bootstrap - old)
        self.q[(key, target)] = new
        return new

    def _close(self, next_key: Optional[Key], next_available: Sequence[str]):
        bootstrap = 0.0
        if next_key is not None and next_available:
            bootstrap = max(self.value(next_key, t) for t in next_available)
        self.td_update(self.start_key, self.current, self.ret, max(self.k, 1), bootstrap)
        self._clear()

    def act(self, obs: TextObservation, plan: Sequence[str], state: WorldState,
            completed: FrozenSet[str]=frozenset()) -> Action:
        if state.sleeping:
            return Action.NOOP
        key = (features(obs), tuple(plan))
        if self.current is not None and self.finished:
            self._close(key, self.available(state))
        if self.current is None:
            choices = self.available(state)
            if not choices:
                return Action.NOOP
            self.current = self.select(key, choices)
            self.start_key = key
            self.decisions += 1
        compiled = self.macros[self.current].compile(state)
        if not compiled:
            self.finished = True
            return Action.NOOP
        return compiled[0]

    def observe(self, transition: Transition):
        if self.current is None:
            return
        self.ret += self.discount ** self.k * (transition.shaped_reward - self.step_cost)
        self.k += 1
        if transition.done:
            self._close(None, ())
        elif self.current in transition.info.get('events', ()) or self.k >= self.option_limit:
            self.finished = True

    def reset_episode(self):
        if self.current is not None:
            self._close(None, ())
        self._clear()

    def save(self, path: Union[str, Path]):
        joblib.dump({'q': dict(self.q), 'decisions': self.decisions}, path)

    def load(self, path: Union[str, Path]) -> 'TabularMacroLearner':
        data = joblib.load(path)
        self.q = defaultdict(float, data['q'])
        self.decisions = data['decisions']
        logger.info('loaded %d table entries from %s', len(self.q), path)
        return self
