"""
역할별 프롬프트 렌더링
"""
from pathlib import Path
from typing import Dict, Mapping, Optional, Tuple

from ..errors import MissingExtras, PromptError
from ..utils.templates import fill_template, load_template
from .context import PlanningContext

ROLE_EXTRAS = {
    'actor': (),
    'critic': ('actor_output', 'subgoal_details_text'),
    'refiner': ('candidate_plans', 'critic_feedback'),
}


def context_values(ctx: PlanningContext, prompts_dir: Optional[Path]=None) -> Dict[str, str]:
    return {
        'Graph description': load_template('graph_grammar', prompts_dir),
        'text_obs': ctx.text_obs,
        'entity_info': ctx.entity_info,
        'unachieved': ctx.unachieved_text,
        'subgoal_set': ctx.subgoal_set_text,
        'subgoal_text_set': ctx.subgoal_set_text,
        'graph_text': ctx.graph_text,
    }


def render_prompt(role: str, ctx: PlanningContext, extras: Optional[Mapping[str, str]]=None,
                  prompts_dir: Optional[Path]=None) -> Tuple[str, str]:
    """(system, user). 템플릿 placeholder가 전부 채워지지 않으면 예외"""
    if role not in ROLE_EXTRAS:
        raise PromptError(f'no prompt templates for role {role!r}')
    extras = dict(extras or {})
    if role == 'critic' and 'subgoal_details_text' not in extras and ctx.subgoal_details_text is not None:
        extras['subgoal_details_text'] = ctx.subgoal_details_text
    missing = [name for name in ROLE_EXTRAS[role] if name not in extras]
    if missing:
        raise MissingExtras(role, missing)

    values = context_values(ctx, prompts_dir)
    values.update(extras)
    system = fill_template(load_template(f'{role}_system', prompts_dir), values)
    user = fill_template(load_template(f'{role}_user', prompts_dir), values)
    return system, user
