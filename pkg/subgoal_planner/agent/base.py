"""
정책 인터페이스
"""
from dataclasses import dataclass, field
from typing import Any, Dict, FrozenSet, Optional, Sequence

import numpy as np

from ..gridcraft.world import Action, WorldState
from ..tracker.observation import TextObservation


@dataclass
class Transition:
    obs: TextObservation
    plan: Sequence[str]
    action: Action
    reward: float  # 환경 보상
    extra_reward: float
    next_obs: TextObservation
    done: bool
    info: Dict[str, Any] = field(default_factory=dict)
    state: Optional[WorldState] = field(default=None, repr=False)

    @property
    def shaped_reward(self) -> float:
        return self.reward + self.extra_reward


class PolicyInterface:
    """
    act(obs, plan, state, completed) -> Action
    completed: 현재 계획에서 이미 처음 달성된 서브골
    """
    name = 'policy'

    def act(self, obs: TextObservation, plan: Sequence[str], state: WorldState,
            completed: FrozenSet[str]=frozenset()) -> Action:
        raise NotImplementedError

    def observe(self, transition: Transition):
        pass

    def reset_episode(self):
        pass


class RandomPolicy(PolicyInterface):
    name = 'random'

    def __init__(self, seed: int=0):
        self.rng = np.random.default_rng(seed)

    def act(self, obs, plan, state, completed=frozenset()) -> Action:
        return Action(int(self.rng.integers(len(Action))))
