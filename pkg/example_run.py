from subgoal_planner.harness import load_run_config, run, summarize
from subgoal_planner.harness.visualization import plot_success_rates


# mock 백엔드 + 스크립트 실행기로 10 에피소드
config = load_run_config(seed=0, out='runs/example')
config.run.max_steps = 5000
config.run.episode_steps = 500

log = run(config)
report = summarize([log])
print(report.render())
plot_success_rates(report, 'runs/example/rates.png')
