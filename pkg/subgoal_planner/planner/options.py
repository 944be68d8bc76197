"""
planner 기본값
"""

NUM_CANDIDATES = 3
SUBGOALS_PER_PLAN = 3
PLAN_LABELS = ('PlanA', 'PlanB', 'PlanC')

STAGE_RETRIES = 2  # 형식 오류 시 같은 단계 재질의 횟수

# acr: critic flag로 refiner 호출 여부 결정
MODES = ('acr', 'no_flag', 'no_refiner', 'no_critic', 'actor_only', 'random_plan')
MODE = 'acr'

AVAILABLE_SCOPES = ('all', 'frontier')
AVAILABLE_SCOPE = 'all'

DETAIL_HOPS = 0
EMPTY_FIELD = 'none'
