"""
LLM 게이트웨이

요청/설정 타입, 요청 지문, 호출 기록(transcript).
"""
import hashlib
import json
import logging
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Union

from ..errors import ConfigError
from . import options

logger = logging.getLogger(__name__)

BACKEND_KINDS = ('http', 'mock', 'replay')


@dataclass(frozen=True)
class ChatRequest:
    system_prompt: str
    user_prompt: str
    role_tag: str
    temperature: float = options.ACTOR_TEMPERATURE
    max_tokens: int = options.MAX_TOKENS
    model: str = options.MODEL

    def __post_init__(self):
        if not self.system_prompt or not self.user_prompt:
            raise ValueError('prompts must be non-empty')
        if self.role_tag not in options.ROLES:
            raise ValueError(f'unknown role {self.role_tag!r}')
        if not 0 <= self.temperature <= 2:
            raise ValueError('temperature must be in [0, 2]')
        if self.max_tokens <= 0:
            raise ValueError('max_tokens must be positive')

    @property
    def fingerprint(self) -> str:
        return fingerprint(self.role_tag, self.user_prompt)

    def messages(self) -> List[Dict[str, str]]:
        return [
            {'role': 'system', 'content': self.system_prompt},
            {'role': 'user', 'content': self.user_prompt},
        ]


def fingerprint(role: str, user_prompt: str) -> str:
    """(role, user prompt) 해시. system prompt는 역할마다 고정이라 제외"""
    digest = hashlib.sha256(f'{role}\x00{user_prompt}'.encode('utf-8')).hexdigest()
    return digest[:options.FINGERPRINT_LENGTH]


def _default_temperatures() -> Dict[str, float]:
    return {
        'actor': options.ACTOR_TEMPERATURE,
        'critic': options.CRITIC_TEMPERATURE,
        'refiner': options.REFINER_TEMPERATURE,
        'extractor': options.EXTRACTOR_TEMPERATURE,
    }


@dataclass
class BackendConfig:
    kind: str = 'mock'
    endpoint: Optional[str] = None
    api_key_env: Optional[str] = None
    mock_table: Optional[Path] = None
    transcript: Optional[Path] = None  # replay 입력
    model: str = options.MODEL
    timeout: float = options.TIMEOUT
    max_retries: int = options.MAX_RETRIES
    backoff_base: float = options.BACKOFF_BASE
    max_tokens: int = options.MAX_TOKENS
    temperatures: Dict[str, float] = field(default_factory=_default_temperatures)

    def validate(self):
        if self.kind not in BACKEND_KINDS:
            raise ConfigError(f'llm.backend must be one of {list(BACKEND_KINDS)}, got {self.kind!r}')
        populated = {
            'http': self.endpoint is not None or self.api_key_env is not None,
            'mock': self.mock_table is not None,
            'replay': self.transcript is not None,
        }
        extra = [k for k, v in populated.items() if v and k != self.kind]
        if extra:
            raise ConfigError(f'llm.{self.kind} backend configured together with {", ".join(extra)} fields')
        if self.kind == 'http' and not (self.endpoint and self.api_key_env):
            raise ConfigError('http backend needs endpoint and api_key_env')
        if self.kind == 'mock' and self.mock_table is None:
            raise ConfigError('mock backend needs mock_table')
        if self.kind == 'replay' and self.transcript is None:
            raise ConfigError('replay backend needs transcript')
        if self.max_retries < 0 or self.timeout <= 0:
            raise ConfigError('timeout must be positive and max_retries non-negative')
        return self

    def request(self, role: str, system_prompt: str, user_prompt: str) -> ChatRequest:
        max_tokens = options.EXTRACTOR_MAX_TOKENS if role == 'extractor' else self.max_tokens
        return ChatRequest(
            system_prompt=system_prompt,
            user_prompt=user_prompt,
            role_tag=role,
            temperature=self.temperatures.get(role, options.ACTOR_TEMPERATURE),
            max_tokens=max_tokens,
            model=self.model,
        )


@dataclass
class TranscriptRecord:
    index: int
    role: str
    fingerprint: str
    model: str
    temperature: float
    system_prompt: str
    user_prompt: str
    response: Optional[str]
    error: Optional[str]
    latency: float


class Transcript:
    """LLM 호출 기록. path가 있으면 호출마다 JSONL로 append"""

    def __init__(self, path: Optional[Union[str, Path]]=None):
        self.path = Path(path) if path else None
        self.records: List[TranscriptRecord] = []
        if self.path:
            self.path.parent.mkdir(parents=True, exist_ok=True)
            self.path.write_text('', encoding='utf-8')

    def __len__(self):
        return len(self.records)

    def append(self, record: TranscriptRecord):
        self.records.append(record)
        if self.path:
            with self.path.open('a', encoding='utf-8') as f:
                f.write(json.dumps(asdict(record), ensure_ascii=False) + '\n')


class Gateway:
    """backend 하나 + transcript. 실패한 호출도 기록한다"""

    def __init__(self, backend, transcript: Optional[Transcript]=None, config: Optional[BackendConfig]=None):
        self.backend = backend
        self.transcript = transcript if transcript is not None else Transcript()
        self.config = config

    def complete(self, req: ChatRequest) -> str:
        started = time.perf_counter()
        response, error = None, None
        try:
            response = self.backend.generate(req)
            return response
        except Exception as e:
            error = f'{type(e).__name__}: {e}'
            raise
        finally:
            latency = time.perf_counter() - started if self.backend.measures_latency else 0.0
            self.transcript.append(TranscriptRecord(
                index=len(self.transcript),
                role=req.role_tag,
                fingerprint=req.fingerprint,
                model=req.model,
                temperature=req.temperature,
                system_prompt=req.system_prompt,
                user_prompt=req.user_prompt,
                response=response,
                error=error,
                latency=round(latency, 6),
            ))
            logger.debug('%s call %s (%s)', req.role_tag, req.fingerprint, 'error' if error else 'ok')

    def request(self, role: str, system_prompt: str, user_prompt: str) -> ChatRequest:
        config = self.config or BackendConfig()
        return config.request(role, system_prompt, user_prompt)


def complete(req: ChatRequest, cfg: BackendConfig, transcript: Optional[Transcript]=None) -> str:
    """단발 호출용. 반복 호출은 make_gateway로 만든 Gateway를 재사용할 것 (replay 큐 상태 유지)"""
    return make_gateway(cfg, transcript).complete(req)


def make_gateway(cfg: BackendConfig, transcript: Optional[Transcript]=None) -> Gateway:
    from .backends import make_backend
    return Gateway(make_backend(cfg.validate()), transcript, cfg)
