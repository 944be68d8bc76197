"""
actor -> critic -> (flag) -> refiner 계획 파이프라인
"""
import logging
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from ..errors import ParseError
from ..knowledge import render_details, subgoal_details
from .context import PlannerConfig, PlanningContext, frontier_plan
from .options import EMPTY_FIELD, SUBGOALS_PER_PLAN
from .parsers import (CandidatePlan, CriticFeedback, FinalPlan, clean_response, parse_actor_output,
                      parse_critic_output, parse_refiner_output)
from .prompts import render_prompt

logger = logging.getLogger(__name__)


@dataclass
class StageRecord:
    stage: str
    attempt: int
    raw: Optional[str]
    error: Optional[str] = None


@dataclass
class PipelineTrace:
    mode: str
    stages: List[StageRecord] = field(default_factory=list)
    candidates: List[CandidatePlan] = field(default_factory=list)
    feedback: Optional[CriticFeedback] = None
    decision: str = ''
    final: Optional[FinalPlan] = None

    @property
    def llm_calls(self) -> int:
        return len(self.stages)

    def calls_for(self, stage: str) -> int:
        return sum(1 for s in self.stages if s.stage == stage)

    def as_dict(self) -> Dict[str, Any]:
        return {
            'mode': self.mode,
            'llm_calls': self.llm_calls,
            'stages': [asdict(s) for s in self.stages],
            'candidates': [{'label': c.label, 'subgoals': list(c.subgoals), 'rationale': c.rationale}
                           for c in self.candidates],
            'ranking': self.feedback.ranking if self.feedback else None,
            'need_modify': self.feedback.need_modify if self.feedback else None,
            'decision': self.decision,
            'final': list(self.final.subgoals) if self.final else None,
            'provenance': self.final.provenance if self.final else None,
        }


def is_valid_plan(subgoals: Sequence[str], ctx: PlanningContext) -> bool:
    return (len(subgoals) == SUBGOALS_PER_PLAN
            and len(set(subgoals)) == len(subgoals)
            and set(subgoals) <= set(ctx.available_subgoals))


def render_candidates(candidates: Sequence[CandidatePlan]) -> str:
    lines = []
    for c in candidates:
        lines.append(f'{c.label}<{",".join(c.subgoals)}>')
        lines.append(f'Reason{c.label[-1]}<{c.rationale}>')
    return '\n'.join(lines)


class PlanningPipeline:
    def __init__(self, gateway, config: Optional[PlannerConfig]=None, prompts_dir: Optional[Path]=None):
        self.gateway = gateway
        self.config = config or PlannerConfig()
        self.prompts_dir = prompts_dir
        self.rng = np.random.default_rng(self.config.seed)

    def _ask(self, trace: PipelineTrace, role: str, system: str, user: str,
             parse: Callable[[str], Any]) -> Any:
        """파싱/검증 실패 시 같은 요청을 stage_retries번 더. 끝내 실패하면 None"""
        for attempt in range(self.config.stage_retries + 1):
            raw = self.gateway.complete(self.gateway.request(role, system, user))
            try:
                result = parse(raw)
            except ParseError as e:
                trace.stages.append(StageRecord(role, attempt, raw, str(e)))
                logger.info('%s output rejected (attempt %d): %s', role, attempt + 1, e)
                continue
            trace.stages.append(StageRecord(role, attempt, raw))
            return result
        return None

    def _fallback(self, trace: PipelineTrace, ctx: PlanningContext,
                  order: Sequence[str], reason: str) -> FinalPlan:
        by_label = {c.label: c for c in trace.candidates}
        for label in order:
            c = by_label.get(label)
            if c is not None and is_valid_plan(c.subgoals, ctx):
                trace.decision = f'{reason}; fallback to {label}'
                return FinalPlan(c.subgoals, 'fallback')
        subgoals = tuple(frontier_plan(ctx.graph, ctx.achieved, allowed=ctx.available_subgoals))
        trace.decision = f'{reason}; fallback to frontier heuristic'
        return FinalPlan(subgoals, 'fallback')

    def _adopt(self, trace: PipelineTrace, ctx: PlanningContext, order: Sequence[str],
               reason: str) -> FinalPlan:
        top = next(c for c in trace.candidates if c.label == order[0])
        if is_valid_plan(top.subgoals, ctx):
            trace.decision = f'{reason}; adopted {top.label}'
            return FinalPlan(top.subgoals, 'adopted-top-ranked')
        return self._fallback(trace, ctx, order[1:], f'{reason}; {top.label} invalid')

    def _critic(self, trace: PipelineTrace, ctx: PlanningContext, actor_raw: str) -> Optional[CriticFeedback]:
        ids = {s for c in trace.candidates for s in c.subgoals if s in ctx.graph}
        details = render_details(subgoal_details(ctx.graph, ids, self.config.detail_hops))
        system, user = render_prompt('critic', ctx, {
            'actor_output': clean_response(actor_raw),
            'subgoal_details_text': details,
        }, self.prompts_dir)
        labels = [c.label for c in trace.candidates]
        require_flag = self.config.mode == 'acr'
        return self._ask(trace, 'critic', system, user,
                         lambda raw: parse_critic_output(raw, labels, require_flag=require_flag))

    def _refiner(self, trace: PipelineTrace, ctx: PlanningContext) -> Optional[FinalPlan]:
        feedback = trace.feedback.render() if trace.feedback else EMPTY_FIELD
        system, user = render_prompt('refiner', ctx, {
            'candidate_plans': render_candidates(trace.candidates),
            'critic_feedback': feedback,
        }, self.prompts_dir)

        def parse(raw: str) -> FinalPlan:
            plan = parse_refiner_output(raw)
            if not is_valid_plan(plan.subgoals, ctx):
                raise ParseError('refiner', f'final plan {list(plan.subgoals)} is not a valid plan')
            return plan

        return self._ask(trace, 'refiner', system, user, parse)

    def generate(self, ctx: PlanningContext) -> Tuple[FinalPlan, PipelineTrace]:
        mode = self.config.mode
        trace = PipelineTrace(mode)

        system, user = render_prompt('actor', ctx, None, self.prompts_dir)
        actor_raw: List[str] = []

        def parse_actor(raw: str) -> List[CandidatePlan]:
            actor_raw.append(raw)
            return parse_actor_output(raw)

        candidates = self._ask(trace, 'actor', system, user, parse_actor)
        if candidates is None:
            trace.final = self._fallback(trace, ctx, (), 'actor output unusable')
            return self._done(trace)
        trace.candidates = candidates
        labels = [c.label for c in candidates]

        if mode == 'actor_only':
            trace.final = self._adopt(trace, ctx, labels, 'actor only')
        elif mode == 'random_plan':
            pick = labels[int(self.rng.integers(len(labels)))]
            order = [pick] + [label for label in labels if label != pick]
            trace.final = self._adopt(trace, ctx, order, f'random pick {pick}')
        elif mode == 'no_critic':
            refined = self._refiner(trace, ctx)
            trace.final = refined if refined else self._fallback(trace, ctx, labels, 'refiner output unusable')
            if refined:
                trace.decision = 'refined without critic'
        else:
            trace.feedback = self._critic(trace, ctx, actor_raw[-1])
            if trace.feedback is None:
                trace.final = self._fallback(trace, ctx, labels, 'critic output unusable')
                return self._done(trace)
            ranking = trace.feedback.ranking
            skip_refiner = mode == 'no_refiner' or (mode == 'acr' and trace.feedback.need_modify is False)
            if skip_refiner:
                trace.final = self._adopt(trace, ctx, ranking, 'critic: no modification needed'
                                          if mode == 'acr' else 'refiner disabled')
            else:
                refined = self._refiner(trace, ctx)
                if refined:
                    trace.final = refined
                    trace.decision = 'refined'
                else:
                    trace.final = self._fallback(trace, ctx, ranking, 'refiner output unusable')
        return self._done(trace)

    @staticmethod
    def _done(trace: PipelineTrace) -> Tuple[FinalPlan, PipelineTrace]:
        logger.info('plan %s (%s, %d calls)', ','.join(trace.final.subgoals),
                    trace.final.provenance, trace.llm_calls)
        return trace.final, trace


def generate_plan(ctx: PlanningContext, gateway, config: Optional[PlannerConfig]=None) -> Tuple[FinalPlan, PipelineTrace]:
    return PlanningPipeline(gateway, config).generate(ctx)
