"""
agent 기본값
"""
from ..utils.paths import ASSETS_DIR

MACROS = ASSETS_DIR / 'macros.yaml'
MACRO_BUDGET = 200  # 매크로 한 번의 경로 길이 상한

POLICIES = ('scripted', 'tabular', 'random')
POLICY = 'scripted'

# 생존 반사: 이 값 이하로 떨어지면 계획보다 먼저 처리
LOW_VITAL = 2
HOSTILE = ('zombie', 'skeleton')

# tabular learner
LEARNING_RATE = 0.5
DISCOUNT = 0.9
EPSILON_START = 0.3
EPSILON_END = 0.05
EPSILON_DECAY_STEPS = 2000
STEP_COST = 0.01  # 매크로가 쓴 스텝당 비용 (학습기 내부)
