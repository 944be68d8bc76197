"""
harness 기본값
"""
from ..utils.paths import ASSETS_DIR

PLANNING_INTERVAL = 100  # H
MAX_STEPS = 20000  # N
RUN_CONFIG = ASSETS_DIR / 'run_default.yaml'
OUTPUT_DIR = 'runs/default'

STEPS_FILE = 'steps.jsonl'
EPISODES_FILE = 'episodes.jsonl'
PLANS_FILE = 'plans.jsonl'
TRANSCRIPT_FILE = 'transcript.jsonl'
METRICS_FILE = 'metrics.json'
