"""
LLM 질의 기본값
"""

ACTOR_TEMPERATURE = 0.6
CRITIC_TEMPERATURE = 0.1
REFINER_TEMPERATURE = 0.2
EXTRACTOR_TEMPERATURE = 0.0

MAX_TOKENS = 500
EXTRACTOR_MAX_TOKENS = 4000

ROLES = ('actor', 'critic', 'refiner', 'extractor')

ENDPOINT = 'https://api.openai.com/v1/chat/completions'
MODEL = 'gpt-4o-mini'
API_KEY_ENV = 'OPENAI_API_KEY'

TIMEOUT = 30  # seconds
MAX_RETRIES = 2
BACKOFF_BASE = 1.0  # 1s, 2s, 4s ...

FINGERPRINT_LENGTH = 16
