import hashlib
import json
import pytest
import requests

from subgoal_planner.errors import (BackendError, ConfigError, LLMTimeout, MockMiss, ReplayExhausted,
                                    RetriesExhausted)
from subgoal_planner.llm import (BackendConfig, ChatRequest, Gateway, HttpBackend, MockBackend,
                                 ReplayBackend, Transcript, TranscriptRecord, fingerprint, make_gateway,
                                 sanitize)


def _request(role='actor', user='Player state', system='system'):
    return BackendConfig().request(role, system, user)


class FakeResponse:
    def __init__(self, status_code=200, payload=None, text=''):
        self.status_code = status_code
        self._payload = payload
        self.text = text

    def json(self):
        return self._payload


def _ok(content):
    return FakeResponse(200, {'choices': [{'message': {'content': content}}]})


@pytest.fixture
def http_config(monkeypatch):
    monkeypatch.setenv('SUBGOAL_TEST_KEY', 'secret')
    return BackendConfig(kind='http', endpoint='http://llm.local/v1/chat/completions',
                         api_key_env='SUBGOAL_TEST_KEY', max_retries=2, backoff_base=0.5).validate()


def _patch_post(monkeypatch, outcomes):
    calls = []

    def fake_post(url, json=None, headers=None, timeout=None):
        calls.append({'url': url, 'json': json, 'headers': headers, 'timeout': timeout})
        outcome = outcomes[len(calls) - 1]
        if isinstance(outcome, Exception):
            raise outcome
        return outcome

    monkeypatch.setattr(requests, 'post', fake_post)
    return calls


def test_fingerprint_is_role_and_user_prompt_hash():
    expected = hashlib.sha256('critic\x00hello'.encode('utf-8')).hexdigest()[:16]
    assert fingerprint('critic', 'hello') == expected
    assert fingerprint('actor', 'hello') != expected
    a = ChatRequest('system one', 'hello', 'critic')
    b = ChatRequest('system two', 'hello', 'critic', temperature=0.9)
    assert a.fingerprint == b.fingerprint == expected


@pytest.mark.parametrize('kwargs', [
    {'system_prompt': '', 'user_prompt': 'u', 'role_tag': 'actor'},
    {'system_prompt': 's', 'user_prompt': 'u', 'role_tag': 'judge'},
    {'system_prompt': 's', 'user_prompt': 'u', 'role_tag': 'actor', 'temperature': 3.0},
    {'system_prompt': 's', 'user_prompt': 'u', 'role_tag': 'actor', 'max_tokens': 0},
])
def test_chat_request_validation(kwargs):
    with pytest.raises(ValueError):
        ChatRequest(**kwargs)


def test_role_temperatures_and_extractor_tokens():
    config = BackendConfig()
    assert config.request('critic', 's', 'u').temperature == 0.1
    assert config.request('actor', 's', 'u').temperature == 0.6
    assert config.request('extractor', 's', 'u').max_tokens == 4000


@pytest.mark.parametrize('config', [
    BackendConfig(kind='http', endpoint='http://x'),
    BackendConfig(kind='mock'),
    BackendConfig(kind='replay'),
    BackendConfig(kind='grpc'),
    BackendConfig(kind='mock', mock_table='table.yaml', endpoint='http://x'),
])
def test_backend_config_rejects_inconsistent_settings(config):
    with pytest.raises(ConfigError):
        config.validate()


def test_http_success_sends_chat_body(monkeypatch, http_config):
    calls = _patch_post(monkeypatch, [_ok('PlanA<a,b,c>')])
    assert HttpBackend(http_config).generate(_request()) == 'PlanA<a,b,c>'
    assert calls[0]['headers']['Authorization'] == 'Bearer secret'
    assert calls[0]['json']['messages'][1] == {'role': 'user', 'content': 'Player state'}
    assert calls[0]['timeout'] == http_config.timeout


def test_http_retries_server_errors_with_backoff(monkeypatch, http_config):
    calls = _patch_post(monkeypatch, [FakeResponse(503), requests.ConnectionError('reset'), _ok('done')])
    sleeps = []
    assert HttpBackend(http_config, sleep=sleeps.append).generate(_request()) == 'done'
    assert len(calls) == 3
    assert sleeps == [0.5, 1.0]


def test_http_client_error_is_not_retried(monkeypatch, http_config):
    calls = _patch_post(monkeypatch, [FakeResponse(401, text='bad key')])
    with pytest.raises(BackendError, match='401'):
        HttpBackend(http_config, sleep=lambda s: None).generate(_request())
    assert len(calls) == 1


def test_http_all_timeouts(monkeypatch, http_config):
    _patch_post(monkeypatch, [requests.Timeout('slow')] * 3)
    with pytest.raises(LLMTimeout):
        HttpBackend(http_config, sleep=lambda s: None).generate(_request())


def test_http_retries_exhausted(monkeypatch, http_config):
    _patch_post(monkeypatch, [requests.Timeout('slow'), FakeResponse(500), FakeResponse(502)])
    with pytest.raises(RetriesExhausted) as e:
        HttpBackend(http_config, sleep=lambda s: None).generate(_request())
    assert e.value.attempts == 3


def test_http_malformed_payload(monkeypatch, http_config):
    _patch_post(monkeypatch, [FakeResponse(200, {'choices': []})])
    with pytest.raises(BackendError, match='choices'):
        HttpBackend(http_config).generate(_request())


class HtmlResponse(FakeResponse):
    def json(self):
        raise json.JSONDecodeError('Expecting value', self.text, 0)


def test_http_non_json_body_is_a_backend_error(monkeypatch, http_config):
    calls = _patch_post(monkeypatch, [HtmlResponse(200, text='<html>gateway login</html>')])
    with pytest.raises(BackendError, match='not JSON') as e:
        HttpBackend(http_config, sleep=lambda s: None).generate(_request())
    assert 'gateway login' in str(e.value)
    assert isinstance(e.value.__cause__, ValueError)
    assert len(calls) == 1


def test_mock_missing_response_file(tmp_path):
    with pytest.raises(ConfigError, match='missing.txt') as e:
        MockBackend([{'role': 'actor', 'response_file': 'missing.txt'}], base_dir=tmp_path)
    assert str(tmp_path) in str(e.value)

    table = tmp_path / 'mock.yaml'
    table.write_text('rules:\n  - {role: actor, response_file: gone/actor.txt}\n', encoding='utf-8')
    with pytest.raises(ConfigError, match='gone'):
        MockBackend.from_file(table)


def test_mock_rules_first_match_wins():
    req = _request('actor', user='tree nearby')
    backend = MockBackend([
        {'role': 'critic', 'response': 'wrong role'},
        {'role': 'actor', 'fingerprint': 'ffffffffffffffff', 'response': 'wrong fingerprint'},
        {'role': 'actor', 'contains': 'tree', 'response': 'tree answer'},
        {'role': 'actor', 'response': 'default'},
    ])
    assert backend.generate(req) == 'tree answer'
    assert backend.generate(req) == 'tree answer'
    assert backend.generate(_request('actor', user='cave')) == 'default'
    with pytest.raises(MockMiss):
        backend.generate(_request('refiner'))


def test_mock_rule_needs_one_source():
    with pytest.raises(ConfigError):
        MockBackend([{'role': 'actor'}])
    with pytest.raises(ConfigError):
        MockBackend([{'role': 'actor', 'response': 'a', 'responder': 'frontier'}])


def test_mock_unknown_responder():
    backend = MockBackend([{'role': 'actor', 'responder': 'oracle'}])
    with pytest.raises(ConfigError, match='oracle'):
        backend.generate(_request())


def test_gateway_records_calls_and_failures(tmp_path):
    transcript = Transcript(tmp_path / 'transcript.jsonl')
    gateway = Gateway(MockBackend([{'role': 'actor', 'response': 'ok'}]), transcript)
    assert gateway.complete(_request()) == 'ok'
    with pytest.raises(MockMiss):
        gateway.complete(_request('critic'))

    lines = (tmp_path / 'transcript.jsonl').read_text(encoding='utf-8').splitlines()
    records = [json.loads(line) for line in lines]
    assert [r['role'] for r in records] == ['actor', 'critic']
    assert records[0]['response'] == 'ok' and records[0]['error'] is None
    assert records[1]['response'] is None and records[1]['error'].startswith('MockMiss')
    assert all(r['latency'] == 0.0 for r in records)


def test_replay_serves_recorded_responses_in_order(tmp_path):
    req = _request()
    path = tmp_path / 'recorded.jsonl'
    transcript = Transcript(path)
    for i, (response, error) in enumerate([('first', None), (None, 'MockMiss: no rule'), ('second', None)]):
        transcript.append(TranscriptRecord(i, 'actor', req.fingerprint, req.model, req.temperature,
                                           req.system_prompt, req.user_prompt, response, error, 0.0))

    replay = make_gateway(BackendConfig(kind='replay', transcript=path))
    assert replay.complete(_request()) == 'first'
    assert replay.complete(_request()) == 'second'
    with pytest.raises(ReplayExhausted):
        replay.complete(_request())
    with pytest.raises(ReplayExhausted):
        ReplayBackend([]).generate(_request('critic'))


def test_make_gateway_loads_mock_table(tmp_path):
    table = tmp_path / 'mock.yaml'
    (tmp_path / 'answer.txt').write_text('from file', encoding='utf-8')
    table.write_text('rules:\n  - role: actor\n    response_file: answer.txt\n', encoding='utf-8')
    gateway = make_gateway(BackendConfig(kind='mock', mock_table=table))
    assert gateway.complete(_request()) == 'from file'


def test_sanitize_strips_code_fences():
    assert sanitize('```\nPlanA<a,b,c>\n```') == 'PlanA<a,b,c>'
    assert sanitize('```yaml\nkey: 1\n') == 'key: 1'
    assert sanitize('  plain  ') == 'plain'
