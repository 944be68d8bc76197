"""
mock 백엔드용 결정적 응답기

프롬프트(미달성 업적 + 그래프 텍스트)만 보고 형식에 맞는 답을 만든다.
"""
import re
from typing import List, Optional

from ..errors import GrammarError
from ..knowledge import SubgoalGraph, parse_verbalized
from ..llm.backends import register_responder
from ..llm.gateway import ChatRequest
from .options import PLAN_LABELS, SUBGOALS_PER_PLAN

_FIELD = r'^{name}: <([^\n]*)>$'


def _field(prompt: str, name: str) -> Optional[str]:
    m = re.search(_FIELD.format(name=re.escape(name)), prompt, re.MULTILINE)
    return m.group(1) if m else None


def _graph_block(prompt: str) -> Optional[str]:
    marker = 'Subgoal Dependency Graph: <'
    start = prompt.find(marker)
    if start < 0:
        return None
    start += len(marker)
    end = prompt.find('>\n', start)
    if end < 0:
        end = prompt.rfind('>')
    return prompt[start:end] if end > start else None


def _split(text: Optional[str]) -> List[str]:
    if not text or text.strip() == 'none':
        return []
    return [t.strip() for t in text.split(',') if t.strip()]


def _descendants(graph: SubgoalGraph, node: str) -> int:
    seen, stack = set(), [node]
    while stack:
        for child in graph.successors(stack.pop()):
            if child not in seen:
                seen.add(child)
                stack.append(child)
    return len(seen)


def progression_order(graph: SubgoalGraph, achieved) -> List[str]:
    """
    미달성 서브골을 의존성 순으로 나열. 매 단계 실행 가능한 것 중
    하위 서브골이 많은 것 -> 얕은 것 -> 이름 순
    """
    done = set(achieved)
    depth = graph.depths()
    reach = {n: _descendants(graph, n) for n in graph.nodes}
    order = []
    remaining = set(graph.nodes) - done
    while remaining:
        ready = [n for n in remaining if graph.is_satisfied(n, done)]
        if not ready:
            break
        best = min(ready, key=lambda n: (-reach[n], depth[n], n))
        order.append(best)
        done.add(best)
        remaining.discard(best)
    return order


def frontier_actor(prompt: str) -> str:
    available = _split(_field(prompt, 'The Subgoals Available For Planning'))
    unachieved = set(_split(_field(prompt, 'The Achievements Need To Be Achieved')))
    order: List[str] = []
    block = _graph_block(prompt)
    if block and block.strip() != 'none':
        try:
            graph = parse_verbalized(block)
        except GrammarError:
            graph = None
        if graph is not None:
            order = progression_order(graph, set(graph.nodes) - unachieved)
    order = [s for s in order if not available or s in available]
    for s in available:
        if s not in order:
            order.append(s)

    need = SUBGOALS_PER_PLAN * len(PLAN_LABELS)
    while order and len(order) < need:
        order.extend(order[:need - len(order)])
    lines = []
    for i, label in enumerate(PLAN_LABELS):
        window = order[i * SUBGOALS_PER_PLAN:(i + 1) * SUBGOALS_PER_PLAN]
        lines.append(f'{label}<{",".join(window)}>')
        lines.append(f'Reason{label[-1]}<Follows the dependency graph from the current frontier.>')
    return '\n'.join(lines)


def frontier_critic(prompt: str) -> str:
    lines = [f'{label}_feedback<1. Valid; 2. Valid; 3. Valid; 4. Ordered by the dependency graph.>'
             for label in PLAN_LABELS]
    lines.append(f'Ranking<{",".join(PLAN_LABELS)}>')
    lines.append('Need_Modify<no>')
    return '\n'.join(lines)


def frontier_refiner(prompt: str) -> str:
    m = re.search(r'PlanA<([^<>]*)>', prompt)
    plan = m.group(1) if m else ''
    return f'Analysis<1. The top-ranked plan already follows the graph.>\nFinal_Plan<{plan}>'


@register_responder('frontier')
def frontier(req: ChatRequest) -> str:
    if req.role_tag == 'actor':
        return frontier_actor(req.user_prompt)
    if req.role_tag == 'critic':
        return frontier_critic(req.user_prompt)
    return frontier_refiner(req.user_prompt)
