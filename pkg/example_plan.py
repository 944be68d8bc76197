from subgoal_planner.gridcraft import GridCraft, WorldConfig
from subgoal_planner.harness import load_run_config
from subgoal_planner.knowledge import load_graph, load_kb
from subgoal_planner.llm import make_gateway
from subgoal_planner.planner import PlanningPipeline, build_context


config = load_run_config()
graph = load_graph(config.paths.graph)
kb = load_kb(config.paths.kb, graph)

# 새 에피소드 첫 관찰로 계획 한 번
env = GridCraft(WorldConfig.from_file())
obs = env.reset(seed=0)
print(obs.render())

pipeline = PlanningPipeline(make_gateway(config.llm), config.planner)
final, trace = pipeline.generate(build_context(obs, graph, kb, set(), config.planner))
print(final.subgoals, final.provenance)
for stage in trace.stages:
    print(stage.stage, stage.attempt, stage.error or 'ok')
print(trace.decision)
