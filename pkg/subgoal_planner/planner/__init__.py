from .context import PlannerConfig, PlanningContext, build_context, frontier_plan, frontier_subgoals
from .parsers import (CandidatePlan, CriticFeedback, FinalPlan, clean_response, parse_actor_output,
                      parse_critic_output, parse_refiner_output)
from .prompts import ROLE_EXTRAS, render_prompt
from .pipeline import PipelineTrace, PlanningPipeline, StageRecord, generate_plan, is_valid_plan
from . import responders  # 'frontier' responder 등록
