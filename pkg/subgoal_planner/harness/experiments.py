"""
추가 보상 on/off 비교 실험

같은 seed, 같은 ε 스케줄로 tabular 학습기를 두 번 돌려
마지막 에피소드에서 목표 업적(기본 place_table)까지 걸린 스텝 수를 비교한다.
"""
import logging
from dataclasses import dataclass, field, replace
from typing import Any, Dict, Iterable, List, Optional

import numpy as np

from .config import RunConfig
from .loop import Runner
from .runlog import RunLog

logger = logging.getLogger(__name__)

ARMS = {'shaped': 'first_time', 'unshaped': 'off'}


def steps_to(log: RunLog, achievement: str, episode: Optional[int]=None) -> int:
    """episode(기본: 마지막)에서 achievement가 처음 풀린 스텝 수. 못 풀었으면 그 에피소드 길이"""
    if not log.steps:
        return 0
    if episode is None:
        episode = log.steps[-1]['episode']
    records = [r for r in log.steps if r['episode'] == episode]
    for r in records:
        if achievement in r['unlocked']:
            return r['episode_step'] + 1
    return len(records)


@dataclass
class ShapingResult:
    achievement: str
    seeds: List[int] = field(default_factory=list)
    steps: Dict[str, List[int]] = field(default_factory=lambda: {arm: [] for arm in ARMS})
    extra_reward: Dict[str, float] = field(default_factory=lambda: {arm: 0.0 for arm in ARMS})

    def median(self, arm: str) -> float:
        return float(np.median(self.steps[arm]))

    def as_dict(self) -> Dict[str, Any]:
        return {
            'achievement': self.achievement,
            'seeds': list(self.seeds),
            'steps': {arm: list(v) for arm, v in self.steps.items()},
            'median': {arm: self.median(arm) for arm in ARMS},
            'extra_reward': dict(self.extra_reward),
        }


def arm_config(config: RunConfig, seed: int, extra_reward: str) -> RunConfig:
    return replace(
        config,
        run=replace(config.run, seed=seed),
        planner=replace(config.planner, seed=seed),
        tracker=replace(config.tracker, extra_reward=extra_reward),
        agent=replace(config.agent, policy='tabular', load=None, save=None),
    )


def shaping_experiment(config: RunConfig, seeds: Iterable[int]=range(50),
                       achievement: str='place_table') -> ShapingResult:
    result = ShapingResult(achievement)
    for seed in seeds:
        result.seeds.append(seed)
        for arm, mode in ARMS.items():
            log = Runner(arm_config(config, seed, mode), write_files=False).run()
            result.steps[arm].append(steps_to(log, achievement))
            result.extra_reward[arm] += sum(r['extra_reward'] for r in log.steps)
        logger.info('seed %d: shaped %d steps, unshaped %d steps', seed,
                    result.steps['shaped'][-1], result.steps['unshaped'][-1])
    return result
