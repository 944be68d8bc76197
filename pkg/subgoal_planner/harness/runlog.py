"""
실행 기록 (JSONL)
"""
import json
import logging
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

from . import options

logger = logging.getLogger(__name__)


def _dumps(record: Dict[str, Any]) -> str:
    return json.dumps(record, ensure_ascii=False)


def read_jsonl(path: Union[str, Path]) -> List[Dict[str, Any]]:
    path = Path(path)
    if not path.exists():
        return []
    with path.open(encoding='utf-8') as f:
        return [json.loads(line) for line in f if line.strip()]


class RunLog:
    """
    steps / episodes / plans 레코드를 메모리에 모으고,
    out_dir가 있으면 레코드마다 바로 파일에 append (중단돼도 앞부분은 남는다)
    """

    def __init__(self, out_dir: Optional[Union[str, Path]]=None):
        self.out_dir = Path(out_dir) if out_dir else None
        self.steps: List[Dict[str, Any]] = []
        self.episodes: List[Dict[str, Any]] = []
        self.plans: List[Dict[str, Any]] = []
        self.metrics: Optional[Dict[str, Any]] = None
        self._files = {}
        if self.out_dir:
            self.out_dir.mkdir(parents=True, exist_ok=True)
            for name in (options.STEPS_FILE, options.EPISODES_FILE, options.PLANS_FILE):
                self._files[name] = (self.out_dir / name).open('w', encoding='utf-8')

    def _write(self, name: str, record: Dict[str, Any]):
        f = self._files.get(name)
        if f is not None:
            f.write(_dumps(record) + '\n')

    def log_step(self, record: Dict[str, Any]):
        self.steps.append(record)
        self._write(options.STEPS_FILE, record)

    def log_episode(self, record: Dict[str, Any]):
        self.episodes.append(record)
        self._write(options.EPISODES_FILE, record)
        self.flush()

    def log_plan(self, record: Dict[str, Any]):
        self.plans.append(record)
        self._write(options.PLANS_FILE, record)

    def write_metrics(self, metrics: Dict[str, Any]):
        self.metrics = metrics
        if self.out_dir:
            text = json.dumps(metrics, ensure_ascii=False, indent=2, sort_keys=True)
            (self.out_dir / options.METRICS_FILE).write_text(text + '\n', encoding='utf-8')

    def flush(self):
        for f in self._files.values():
            f.flush()

    def close(self):
        for f in self._files.values():
            f.close()
        self._files = {}

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

    @classmethod
    def load(cls, run_dir: Union[str, Path]) -> 'RunLog':
        run_dir = Path(run_dir)
        log = cls()
        log.out_dir = run_dir
        log.steps = read_jsonl(run_dir / options.STEPS_FILE)
        log.episodes = read_jsonl(run_dir / options.EPISODES_FILE)
        log.plans = read_jsonl(run_dir / options.PLANS_FILE)
        metrics_path = run_dir / options.METRICS_FILE
        if metrics_path.exists():
            log.metrics = json.loads(metrics_path.read_text(encoding='utf-8'))
        logger.debug('loaded %d steps / %d episodes from %s', len(log.steps), len(log.episodes), run_dir)
        return log
