"""
업적별 성공률 시각화
"""
from pathlib import Path
from typing import Union

import matplotlib
matplotlib.use('Agg')
import matplotlib.pyplot as plt

from .metrics import Report


def plot_success_rates(report: Report, path: Union[str, Path]) -> Path:
    """로그 스케일 막대 그래프. 0%는 그릴 수 없으니 0.01로 바닥을 깐다"""
    names = list(report.success_rates)
    rates = [max(report.success_rates[n], 0.01) for n in names]

    fig, ax = plt.subplots(figsize=(10, 4))
    ax.bar(range(len(names)), rates, color='tab:green')
    ax.set_yscale('log')
    ax.set_ylim(0.01, 100)
    ax.set_xticks(range(len(names)))
    ax.set_xticklabels(names, rotation=60, ha='right', fontsize=8)
    ax.set_ylabel('success rate (%)')
    ax.set_title(f'score {report.score:.2f} ({report.episodes} episodes)')
    fig.tight_layout()

    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path)
    plt.close(fig)
    return path
