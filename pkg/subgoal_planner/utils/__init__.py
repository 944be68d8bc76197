from .get_env import get_env
from .paths import ASSETS_DIR, resolve_path
from .templates import PROMPTS_DIR, fill_template, load_template
