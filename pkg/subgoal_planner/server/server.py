"""
계획을 돌려주는 Restful API 서버
"""
import logging
from typing import Any, Dict, Iterable, Optional

from sanic import Sanic
from sanic.response import json, text
from sanic_cors import CORS, cross_origin

from ..errors import SubgoalPlannerError, TrackerError
from ..harness.config import RunConfig, load_run_config
from ..knowledge import load_graph, load_kb, verbalize
from ..llm import make_gateway
from ..planner import PlanningPipeline, build_context
from ..tracker import TextObservation

logger = logging.getLogger(__name__)


class PlanningService:
    """build_context + 파이프라인을 감싼 얇은 층. 그래프 가중치는 요청 사이에 바뀌지 않는다"""

    def __init__(self, config: RunConfig):
        self.config = config
        self.graph = load_graph(config.paths.graph)
        self.kb = load_kb(config.paths.kb, self.graph)
        self.gateway = make_gateway(config.llm)
        self.pipeline = PlanningPipeline(self.gateway, config.planner, config.paths.prompts)

    def plan(self, observation: str, achieved: Iterable[str]=()) -> Dict[str, Any]:
        obs = TextObservation.parse(observation)
        ctx = build_context(obs, self.graph, self.kb, achieved, self.config.planner)
        final, trace = self.pipeline.generate(ctx)
        return {
            'plan': list(final.subgoals),
            'provenance': final.provenance,
            'trace': trace.as_dict(),
        }

    def graph_text(self) -> str:
        return verbalize(self.graph, include_weights=True)


_service: Optional[PlanningService] = None


def configure(config: Optional[RunConfig]=None) -> PlanningService:
    global _service
    _service = PlanningService(config or load_run_config())
    return _service


def get_service() -> PlanningService:
    return _service if _service is not None else configure()


def _achieved(value: Any) -> list:
    if isinstance(value, str):
        return [v.strip() for v in value.split(',') if v.strip()]
    return list(value or ())


# Sanic app
app = Sanic('subgoal_planner')
CORS(app)


@app.post('/plan')
@cross_origin(app)
async def plan(request):
    if request.content_type.startswith('application/json'):
        body = request.json or {}
        observation, achieved = body.get('observation'), body.get('achieved', ())
    else:
        # form 전송 (text=관찰, achieved=a,b,c)
        observation = request.form.get('text')
        achieved = request.form.get('achieved', '')
    if not observation:
        return json({'error': 'observation is required'}, status=400)
    try:
        result = get_service().plan(observation, _achieved(achieved))
    except TrackerError as e:
        return json({'error': str(e)}, status=400)
    except SubgoalPlannerError as e:
        logger.warning('planning failed: %s', e)
        return json({'error': str(e)}, status=502)
    return json(result)


@app.get('/graph')
@cross_origin(app)
async def graph(request):
    return text(get_service().graph_text())
