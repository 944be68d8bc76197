"""
actor / critic / refiner 응답 파서 (STRICT RESPONSE FORMAT)

줄 단위로 정해진 형식만 허용. 허용 외 내용은 전부 ParseError.
"""
import re
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from ..errors import ParseError
from ..llm.backends import sanitize
from .options import PLAN_LABELS, SUBGOALS_PER_PLAN

_ACTOR_LINE = re.compile(r'^(Plan|Reason)([A-Z])<([^<>]*)>$')
_FEEDBACK_LINE = re.compile(r'^(Plan[A-Z])_feedback<([^<>]*)>$')
_RANKING_LINE = re.compile(r'^Ranking<([^<>]*)>$')
_FLAG_LINE = re.compile(r'^Need_Modify<([^<>]*)>$')
_ANALYSIS_LINE = re.compile(r'^Analysis<([^<>]*)>$')
_FINAL_LINE = re.compile(r'^Final_Plan<([^<>]*)>$')

PROVENANCES = ('adopted-top-ranked', 'refined', 'fallback')


@dataclass(frozen=True)
class CandidatePlan:
    label: str
    subgoals: Tuple[str, ...]
    rationale: str = ''

    def render(self) -> str:
        return f'{self.label}<{",".join(self.subgoals)}> {self.rationale}'.rstrip()


@dataclass
class CriticFeedback:
    per_plan: Dict[str, str] = field(default_factory=dict)
    ranking: List[str] = field(default_factory=list)
    need_modify: Optional[bool] = None  # no_flag 모드에선 없을 수 있음

    def render(self) -> str:
        lines = [f'{label}_feedback<{text}>' for label, text in self.per_plan.items()]
        lines.append(f'Ranking<{",".join(self.ranking)}>')
        if self.need_modify is not None:
            lines.append(f'Need_Modify<{"yes" if self.need_modify else "no"}>')
        return '\n'.join(lines)


@dataclass(frozen=True)
class FinalPlan:
    subgoals: Tuple[str, ...]
    provenance: str = 'refined'
    analysis: str = ''

    def __post_init__(self):
        if self.provenance not in PROVENANCES:
            raise ValueError(f'unknown provenance {self.provenance!r}')


def clean_response(text: str) -> str:
    """코드 펜스와 앞뒤 따옴표 제거"""
    text = sanitize(text or '')
    return text.strip('"\'`').strip()


def _lines(text: str) -> List[Tuple[int, str]]:
    return [(i, line.strip()) for i, line in enumerate(clean_response(text).split('\n'), start=1)
            if line.strip()]


def plan_items(body: str, kind: str, label: str) -> Tuple[str, ...]:
    items = [item.strip() for item in body.split(',')]
    if len(items) != SUBGOALS_PER_PLAN:
        raise ParseError(kind, f'{label} has {len(items)} subgoals, expected {SUBGOALS_PER_PLAN}')
    if any(not item for item in items):
        raise ParseError(kind, f'{label} has an empty subgoal')
    if len(set(items)) != len(items):
        raise ParseError(kind, f'{label} repeats a subgoal')
    return tuple(items)


def parse_actor_output(text: str, labels: Sequence[str]=PLAN_LABELS) -> List[CandidatePlan]:
    plans: Dict[str, str] = {}
    reasons: Dict[str, str] = {}
    for lineno, line in _lines(text):
        m = _ACTOR_LINE.match(line)
        if not m:
            raise ParseError('actor', f'unexpected content on line {lineno}: {line[:60]!r}')
        kind, letter, body = m.groups()
        label = f'Plan{letter}'
        if label not in labels:
            raise ParseError('actor', f'unexpected label {kind}{letter}')
        bucket = plans if kind == 'Plan' else reasons
        if label in bucket:
            raise ParseError('actor', f'{kind}{letter} given twice')
        bucket[label] = body.strip()

    candidates = []
    for label in labels:
        if label not in plans:
            raise ParseError('actor', f'missing {label}')
        if label not in reasons:
            raise ParseError('actor', f'missing Reason{label[-1]}')
        candidates.append(CandidatePlan(label, plan_items(plans[label], 'actor', label), reasons[label]))
    return candidates


def parse_critic_output(text: str, labels: Sequence[str]=PLAN_LABELS,
                        require_flag: bool=True) -> CriticFeedback:
    feedback = CriticFeedback()
    ranking: Optional[List[str]] = None
    for lineno, line in _lines(text):
        m = _FEEDBACK_LINE.match(line)
        if m:
            label, body = m.groups()
            if label not in labels:
                raise ParseError('critic', f'feedback for unknown plan {label}')
            if label in feedback.per_plan:
                raise ParseError('critic', f'{label}_feedback given twice')
            feedback.per_plan[label] = body.strip()
            continue
        m = _RANKING_LINE.match(line)
        if m:
            if ranking is not None:
                raise ParseError('critic', 'Ranking given twice')
            ranking = [item.strip() for item in m.group(1).split(',')]
            continue
        m = _FLAG_LINE.match(line)
        if m:
            if feedback.need_modify is not None:
                raise ParseError('critic', 'Need_Modify given twice')
            flag = m.group(1).strip().lower()
            if flag not in ('yes', 'no'):
                raise ParseError('critic', f'Need_Modify must be yes or no, got {m.group(1)!r}')
            feedback.need_modify = flag == 'yes'
            continue
        raise ParseError('critic', f'unexpected content on line {lineno}: {line[:60]!r}')

    missing = [label for label in labels if label not in feedback.per_plan]
    if missing:
        raise ParseError('critic', f'missing feedback for {", ".join(missing)}')
    if ranking is None:
        raise ParseError('critic', 'missing Ranking')
    if sorted(ranking) != sorted(labels):
        raise ParseError('critic', f'ranking {ranking} is not a permutation of {list(labels)}')
    if require_flag and feedback.need_modify is None:
        raise ParseError('critic', 'missing Need_Modify')
    feedback.ranking = ranking
    feedback.per_plan = {label: feedback.per_plan[label] for label in labels}
    return feedback


def parse_refiner_output(text: str) -> FinalPlan:
    analysis = None
    subgoals = None
    for lineno, line in _lines(text):
        m = _ANALYSIS_LINE.match(line)
        if m:
            if analysis is not None:
                raise ParseError('refiner', 'Analysis given twice')
            analysis = m.group(1).strip()
            continue
        m = _FINAL_LINE.match(line)
        if m:
            if subgoals is not None:
                raise ParseError('refiner', 'Final_Plan given twice')
            subgoals = plan_items(m.group(1), 'refiner', 'Final_Plan')
            continue
        raise ParseError('refiner', f'unexpected content on line {lineno}: {line[:60]!r}')
    if subgoals is None:
        raise ParseError('refiner', 'missing Final_Plan')
    return FinalPlan(subgoals, 'refined', analysis or '')
