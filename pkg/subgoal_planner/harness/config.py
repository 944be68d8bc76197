"""
실행 설정 (YAML 한 문서: run / llm / planner / tracker / agent / paths)

상대 경로는 설정 파일 위치 기준 (run.output_dir만 작업 디렉터리 기준), 'asset:' 접두어는 번들 assets 기준.
"""
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Any, Dict, Optional, Union

import yaml

from ..agent import options as agent_options
from ..errors import ConfigError
from ..knowledge import options as knowledge_options
from ..llm import BackendConfig
from ..llm.gateway import BACKEND_KINDS
from ..planner import PlannerConfig
from ..planner.options import SUBGOALS_PER_PLAN
from ..gridcraft import options as world_options
from ..tracker import TrackerConfig
from ..utils.paths import resolve_path
from . import options

SECTIONS = ('run', 'llm', 'planner', 'tracker', 'agent', 'paths')

# backend 종류별로만 의미 있는 llm 키
_KIND_FIELDS = {
    'http': ('endpoint', 'api_key_env'),
    'mock': ('mock_table',),
    'replay': ('transcript',),
}


@dataclass
class RunSection:
    seed: int = 0
    max_steps: int = options.MAX_STEPS
    planning_interval: int = options.PLANNING_INTERVAL
    subgoals_per_plan: int = SUBGOALS_PER_PLAN
    episode_steps: Optional[int] = None  # 월드 설정의 max_steps 덮어쓰기
    output_dir: Path = Path(options.OUTPUT_DIR)

    def validate(self):
        if self.planning_interval < 1:
            raise ConfigError('run.planning_interval must be at least 1')
        if self.max_steps < 1:
            raise ConfigError('run.max_steps must be at least 1')
        if self.subgoals_per_plan != SUBGOALS_PER_PLAN:
            raise ConfigError(f'run.subgoals_per_plan must be {SUBGOALS_PER_PLAN}')
        if self.episode_steps is not None and self.episode_steps < 1:
            raise ConfigError('run.episode_steps must be at least 1')


@dataclass
class AgentSection:
    policy: str = agent_options.POLICY
    survival: bool = True
    learning_rate: float = agent_options.LEARNING_RATE
    discount: float = agent_options.DISCOUNT
    epsilon_start: float = agent_options.EPSILON_START
    epsilon_end: float = agent_options.EPSILON_END
    epsilon_decay_steps: int = agent_options.EPSILON_DECAY_STEPS
    step_cost: float = agent_options.STEP_COST
    option_limit: int = 30
    load: Optional[Path] = None
    save: Optional[Path] = None

    def validate(self):
        if self.policy not in agent_options.POLICIES:
            raise ConfigError(f'agent.policy must be one of {list(agent_options.POLICIES)}, got {self.policy!r}')
        for name in ('epsilon_start', 'epsilon_end'):
            if not 0 <= getattr(self, name) <= 1:
                raise ConfigError(f'agent.{name} must be within [0, 1]')


@dataclass
class PathsSection:
    graph: Path = knowledge_options.GRAPH_FIXTURE
    kb: Path = knowledge_options.KB_FIXTURE
    world: Path = world_options.WORLD_CONFIG
    macros: Path = agent_options.MACROS
    prompts: Optional[Path] = None


@dataclass
class RunConfig:
    run: RunSection = field(default_factory=RunSection)
    llm: BackendConfig = field(default_factory=lambda: BackendConfig(
        mock_table=resolve_path('asset:mock/default.yaml')))
    planner: PlannerConfig = field(default_factory=PlannerConfig)
    tracker: TrackerConfig = field(default_factory=TrackerConfig)
    agent: AgentSection = field(default_factory=AgentSection)
    paths: PathsSection = field(default_factory=PathsSection)
    source: Optional[Path] = None

    def as_dict(self) -> Dict[str, Any]:
        def plain(obj):
            return {f.name: _plain(getattr(obj, f.name)) for f in fields(obj)}
        return {name: plain(getattr(self, name)) for name in SECTIONS}


def _plain(value):
    if isinstance(value, Path):
        return str(value)
    if isinstance(value, dict):
        return {k: _plain(v) for k, v in value.items()}
    if isinstance(value, tuple):
        return list(value)
    return value


def _section(cls, raw: Any, name: str):
    if raw is None:
        raw = {}
    if not isinstance(raw, dict):
        raise ConfigError(f'[{name}] must be a mapping')
    known = {f.name for f in fields(cls)}
    unknown = sorted(set(raw) - known)
    if unknown:
        raise ConfigError(f'unknown keys in [{name}]: {", ".join(unknown)}')
    try:
        return cls(**raw)
    except TypeError as e:
        raise ConfigError(f'[{name}]: {e}') from e


def _llm_section(raw: Any, base: Optional[Path], kind_override: Optional[str]) -> BackendConfig:
    raw = dict(raw or {})
    if 'backend' in raw:
        raw['kind'] = raw.pop('backend')
    if 'temperatures' in raw:
        unknown = sorted(set(raw['temperatures']) - {'actor', 'critic', 'refiner', 'extractor'})
        if unknown:
            raise ConfigError(f'unknown roles in [llm].temperatures: {", ".join(unknown)}')
        temperatures = BackendConfig().temperatures
        temperatures.update(raw['temperatures'])
        raw['temperatures'] = temperatures
    if kind_override is not None:
        raw['kind'] = kind_override
    kind = raw.get('kind', 'mock')
    if kind not in BACKEND_KINDS:
        raise ConfigError(f'llm.backend must be one of {list(BACKEND_KINDS)}, got {kind!r}')
    for other, names in _KIND_FIELDS.items():
        if other != kind:
            for name in names:
                raw.pop(name, None)
    for name in ('mock_table', 'transcript'):
        if raw.get(name) is not None:
            raw[name] = resolve_path(raw[name], base)
    if kind == 'mock' and raw.get('mock_table') is None:
        raw['mock_table'] = resolve_path('asset:mock/default.yaml')
    return _section(BackendConfig, raw, 'llm').validate()


def _paths_section(raw: Any, base: Optional[Path]) -> PathsSection:
    paths = _section(PathsSection, raw, 'paths')
    for f in fields(paths):
        value = getattr(paths, f.name)
        if value is not None:
            setattr(paths, f.name, resolve_path(value, base))
    return paths


def parse_run_config(doc: Any, base: Optional[Path]=None, seed: Optional[int]=None,
                     backend: Optional[str]=None, out: Optional[Union[str, Path]]=None,
                     source: Optional[Path]=None) -> RunConfig:
    if doc is None:
        doc = {}
    if not isinstance(doc, dict):
        raise ConfigError('run config must be a mapping of sections')
    unknown = sorted(set(doc) - set(SECTIONS))
    if unknown:
        raise ConfigError(f'unknown config sections: {", ".join(unknown)}')

    run = _section(RunSection, doc.get('run'), 'run')
    if seed is not None:
        run.seed = seed
    # 출력 디렉터리는 설정 파일이 아니라 현재 작업 디렉터리 기준
    run.output_dir = Path(out if out is not None else run.output_dir)
    run.validate()

    agent = _section(AgentSection, doc.get('agent'), 'agent')
    for name in ('load', 'save'):
        if getattr(agent, name) is not None:
            setattr(agent, name, resolve_path(getattr(agent, name), base))
    agent.validate()

    planner_raw = dict(doc.get('planner') or {})
    planner_raw.setdefault('seed', run.seed)
    return RunConfig(
        run=run,
        llm=_llm_section(doc.get('llm'), base, backend),
        planner=_section(PlannerConfig, planner_raw, 'planner'),
        tracker=_section(TrackerConfig, doc.get('tracker'), 'tracker'),
        agent=agent,
        paths=_paths_section(doc.get('paths'), base),
        source=source,
    )


def load_run_config(path: Optional[Union[str, Path]]=None, seed: Optional[int]=None,
                    backend: Optional[str]=None, out: Optional[Union[str, Path]]=None) -> RunConfig:
    path = resolve_path(path) if path is not None else options.RUN_CONFIG
    try:
        doc = yaml.safe_load(path.read_text(encoding='utf-8'))
    except OSError as e:
        raise ConfigError(f'cannot read run config {path}: {e}') from e
    except yaml.YAMLError as e:
        raise ConfigError(f'{path}: invalid YAML: {e}') from e
    return parse_run_config(doc, path.parent, seed, backend, out, source=path)
