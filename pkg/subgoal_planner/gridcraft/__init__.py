from .world import (Action, Creature, GridCraft, WorldConfig, WorldState, achievements, as_action,
                    render_text, reset, step)
