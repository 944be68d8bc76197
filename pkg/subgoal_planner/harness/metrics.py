"""
성공률 / 점수 / 요약
"""
import math
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Any, Dict, Iterable, List, Sequence

import numpy as np

from ..errors import MetricsError
from ..gridcraft.options import ACHIEVEMENTS


def score(success_rates: Sequence[float]) -> float:
    """
    로그 공간 평균: exp(mean(ln(1 + s_i))) - 1, s_i는 백분율
    """
    rates = np.asarray(list(success_rates), dtype=float)
    if rates.shape != (len(ACHIEVEMENTS),):
        raise MetricsError(f'score needs exactly {len(ACHIEVEMENTS)} success rates, got {rates.size}')
    if np.isnan(rates).any() or (rates < 0).any() or (rates > 100).any():
        raise MetricsError('success rates must be within [0, 100]')
    if (rates == rates[0]).all():
        # 상수 벡터의 기하평균은 그 값 자체
        return float(rates[0])
    value = math.exp(math.fsum(np.log1p(rates)) / rates.size) - 1
    return min(100.0, max(0.0, value))


def success_rates(episodes: Sequence[Dict[str, Any]]) -> Dict[str, float]:
    """에피소드당 최대 한 번만 센다"""
    if not episodes:
        raise MetricsError('cannot summarize zero episodes')
    counts = defaultdict(int)
    for ep in episodes:
        for name in ACHIEVEMENTS:
            if ep['achievements'].get(name, False):
                counts[name] += 1
    return {name: 100.0 * counts[name] / len(episodes) for name in ACHIEVEMENTS}


def episodes_from_steps(steps: Iterable[Dict[str, Any]]) -> List[Dict[str, Any]]:
    """스텝 레코드만으로 에피소드 요약 재구성 (로그 정합성 확인용)"""
    episodes: Dict[int, Dict[str, Any]] = {}
    for record in steps:
        ep = episodes.setdefault(record['episode'], {
            'episode': record['episode'],
            'achievements': {name: False for name in ACHIEVEMENTS},
            'total_reward': 0.0,
            'steps': 0,
        })
        for name in record.get('unlocked', ()):
            ep['achievements'][name] = True
        ep['total_reward'] += record['reward']
        ep['steps'] += 1
    return [episodes[k] for k in sorted(episodes)]


@dataclass
class Report:
    episodes: int
    success_rates: Dict[str, float] = field(default_factory=dict)
    score: float = 0.0
    mean_reward: float = 0.0
    extra: Dict[str, Any] = field(default_factory=dict)

    def as_dict(self) -> Dict[str, Any]:
        return {
            'episodes': self.episodes,
            'success_rates': dict(self.success_rates),
            'score': self.score,
            'mean_reward': self.mean_reward,
            **self.extra,
        }

    def render(self) -> str:
        width = max(len(name) for name in self.success_rates)
        lines = [f'{"achievement":<{width}}  success (%)', '-' * (width + 14)]
        for name, rate in self.success_rates.items():
            lines.append(f'{name:<{width}}  {rate:10.1f}')
        lines.append('-' * (width + 14))
        lines.append(f'{"episodes":<{width}}  {self.episodes:10d}')
        lines.append(f'{"mean reward":<{width}}  {self.mean_reward:10.3f}')
        lines.append(f'{"score":<{width}}  {self.score:10.2f}')
        return '\n'.join(lines)


def summarize_episodes(episodes: Sequence[Dict[str, Any]]) -> Report:
    rates = success_rates(episodes)
    mean_reward = math.fsum(ep['total_reward'] for ep in episodes) / len(episodes)
    return Report(len(episodes), rates, score(list(rates.values())), mean_reward)


def summarize(logs: Sequence[Any]) -> Report:
    """RunLog(또는 episodes 속성이 있는 객체) 여러 개를 합쳐 요약"""
    episodes = [ep for log in logs for ep in log.episodes]
    report = summarize_episodes(episodes)
    report.extra = {
        'runs': len(logs),
        'planning_calls': sum(len(log.plans) for log in logs),
    }
    return report
