"""
tracker 기본값
"""

ALPHA = 0.2  # 첫 달성 보상

EXTRA_REWARD_MODES = ('first_time', 'every_time', 'off')
EXTRA_REWARD = 'first_time'

UPDATE_WEIGHTS = True

ACHIEVED_SCOPES = ('per_plan', 'every_detection')
ACHIEVED_SCOPE = 'per_plan'

VITALS = ('health', 'food', 'drink', 'energy')
NONE_TEXT = 'none'
