from .config import (AgentSection, PathsSection, RunConfig, RunSection, load_run_config,
                     parse_run_config)
from .runlog import RunLog, read_jsonl
from .metrics import Report, episodes_from_steps, score, success_rates, summarize, summarize_episodes
from .loop import EpisodeStats, Runner, make_policy, run
from .experiments import ShapingResult, shaping_experiment, steps_to
