from .base import PolicyInterface, RandomPolicy, Transition
from .pathfinding import adjacent_to, find_path
from .scripted import MacroAction, ScriptedExecutor, load_macros, producers_of, scripted_act
from .tabular import TabularMacroLearner, features
