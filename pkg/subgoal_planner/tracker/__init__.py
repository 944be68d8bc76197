from .observation import (ObjectSnapshot, StateDelta, TextObservation, as_observation, diff,
                          extract_objects)
from .tracker import (StepResult, SubgoalTracker, TrackerConfig, TrackerState, attribution_slots,
                      check_subgoals, plan_ids, postcondition_met)
