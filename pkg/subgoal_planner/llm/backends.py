"""
LLM 백엔드: http / mock / replay
"""
import json
import logging
import time
from collections import defaultdict, deque
from pathlib import Path
from typing import Any, Callable, Deque, Dict, List, Optional, Union

import requests
import yaml

from ..errors import (BackendError, ConfigError, LLMTimeout, MockMiss, ReplayExhausted,
                      RetriesExhausted)
from ..utils import get_env
from .gateway import BackendConfig, ChatRequest, fingerprint

logger = logging.getLogger(__name__)

# 이름 -> (ChatRequest -> str). planner.responders에서 등록
RESPONDERS: Dict[str, Callable[[ChatRequest], str]] = {}


def register_responder(name: str):
    def decorator(func):
        RESPONDERS[name] = func
        return func
    return decorator


def sanitize(text: str) -> str:
    """```로 감싼 응답 벗기기"""
    text = text.strip()
    if text.startswith('```'):
        lines = text.splitlines()
        if len(lines) >= 2:
            body = lines[1:-1] if lines[-1].strip().startswith('```') else lines[1:]
            text = '\n'.join(body).strip()
    return text


class HttpBackend:
    measures_latency = True

    def __init__(self, config: BackendConfig, sleep: Callable[[float], None]=time.sleep):
        self.config = config
        self.sleep = sleep

    def _body(self, req: ChatRequest) -> Dict[str, Any]:
        return {
            'model': req.model,
            'messages': req.messages(),
            'temperature': req.temperature,
            'max_tokens': req.max_tokens,
        }

    @staticmethod
    def _content(payload: Dict[str, Any]) -> str:
        try:
            content = payload['choices'][0]['message']['content']
        except (KeyError, IndexError, TypeError):
            raise BackendError('response has no choices[0].message.content') from None
        if not isinstance(content, str):
            raise BackendError('response content is not text')
        return content

    def generate(self, req: ChatRequest) -> str:
        api_key = get_env(self.config.api_key_env)
        headers = {'Authorization': f'Bearer {api_key}', 'Content-Type': 'application/json'}
        attempts = self.config.max_retries + 1
        last_err: Optional[Exception] = None
        timeouts = 0

        for attempt in range(attempts):
            try:
                resp = requests.post(self.config.endpoint, json=self._body(req),
                                     headers=headers, timeout=self.config.timeout)
            except requests.Timeout as e:
                last_err, timeouts = e, timeouts + 1
            except requests.ConnectionError as e:
                last_err = e
            else:
                if resp.status_code >= 500:
                    last_err = BackendError(f'HTTP {resp.status_code}')
                elif resp.status_code >= 400:
                    # 4xx는 재시도해도 소용없음
                    raise BackendError(f'HTTP {resp.status_code}: {resp.text[:200]}')
                else:
                    try:
                        payload = resp.json()
                    except ValueError as e:
                        raise BackendError(f'HTTP {resp.status_code} body is not JSON: {resp.text[:200]}') from e
                    return self._content(payload)

            logger.warning('%s request failed (attempt %d/%d): %r',
                           req.role_tag, attempt + 1, attempts, last_err)
            if attempt < attempts - 1:
                self.sleep(self.config.backoff_base * 2 ** attempt)

        if timeouts == attempts:
            raise LLMTimeout(f'{req.role_tag} request timed out {attempts} times') from last_err
        raise RetriesExhausted(
            f'{req.role_tag} request failed after {attempts} attempts: {last_err}', attempts
        ) from last_err


class MockBackend:
    """
    규칙 테이블 기반 결정적 백엔드.
    규칙: role, fingerprint(선택), contains(선택), response | response_file | responder
    첫 번째로 맞는 규칙 사용
    """
    measures_latency = False

    def __init__(self, rules: List[Dict[str, Any]], base_dir: Optional[Path]=None):
        self.rules = [self._check_rule(r, i, base_dir) for i, r in enumerate(rules)]

    @staticmethod
    def _check_rule(rule: Dict[str, Any], index: int, base_dir: Optional[Path]) -> Dict[str, Any]:
        if not isinstance(rule, dict) or 'role' not in rule:
            raise ConfigError(f'mock rule {index} needs a role')
        sources = [k for k in ('response', 'response_file', 'responder') if k in rule]
        if len(sources) != 1:
            raise ConfigError(f'mock rule {index} needs exactly one of response/response_file/responder')
        rule = dict(rule)
        if 'response_file' in rule:
            path = Path(rule.pop('response_file'))
            if not path.is_absolute() and base_dir is not None:
                path = base_dir / path
            try:
                rule['response'] = path.read_text(encoding='utf-8')
            except OSError as e:
                raise ConfigError(f'mock rule {index}: cannot read response_file {path}: {e.strerror}') from e
        return rule

    @classmethod
    def from_file(cls, path: Union[str, Path]) -> 'MockBackend':
        path = Path(path)
        try:
            doc = yaml.safe_load(path.read_text(encoding='utf-8')) or {}
        except (OSError, yaml.YAMLError) as e:
            raise ConfigError(f'cannot load mock table {path}: {e}') from e
        return cls(doc.get('rules', []), base_dir=path.parent)

    def match(self, req: ChatRequest) -> Optional[Dict[str, Any]]:
        for rule in self.rules:
            if rule['role'] != req.role_tag:
                continue
            if 'fingerprint' in rule and rule['fingerprint'] != req.fingerprint:
                continue
            if 'contains' in rule and rule['contains'] not in req.user_prompt:
                continue
            return rule
        return None

    def generate(self, req: ChatRequest) -> str:
        rule = self.match(req)
        if rule is None:
            raise MockMiss(f'no mock rule for {req.role_tag} request {req.fingerprint}')
        if 'responder' in rule:
            try:
                responder = RESPONDERS[rule['responder']]
            except KeyError:
                raise ConfigError(f'unknown mock responder {rule["responder"]!r}') from None
            return responder(req)
        return rule['response']


class ReplayBackend:
    """이전 실행의 transcript를 지문별 큐로 재생"""
    measures_latency = False

    def __init__(self, records: List[Dict[str, Any]]):
        self.queues: Dict[str, Deque[str]] = defaultdict(deque)
        for record in records:
            if record.get('error') is None and record.get('response') is not None:
                key = record.get('fingerprint') or fingerprint(record['role'], record['user_prompt'])
                self.queues[key].append(record['response'])

    @classmethod
    def from_file(cls, path: Union[str, Path]) -> 'ReplayBackend':
        records = []
        try:
            with Path(path).open(encoding='utf-8') as f:
                for line in f:
                    if line.strip():
                        records.append(json.loads(line))
        except (OSError, json.JSONDecodeError) as e:
            raise ConfigError(f'cannot load transcript {path}: {e}') from e
        return cls(records)

    def generate(self, req: ChatRequest) -> str:
        queue = self.queues.get(req.fingerprint)
        if not queue:
            raise ReplayExhausted(f'no recorded response left for {req.role_tag} request {req.fingerprint}')
        return queue.popleft()


def make_backend(config: BackendConfig):
    if config.kind == 'http':
        return HttpBackend(config)
    if config.kind == 'mock':
        return MockBackend.from_file(config.mock_table)
    return ReplayBackend.from_file(config.transcript)
