from subgoal_planner.harness import load_run_config, shaping_experiment


# 추가 보상 on/off로 place_table까지 걸린 스텝 수 비교 (tabular 학습기)
config = load_run_config()
config.run.max_steps = 3000
config.run.episode_steps = 300

result = shaping_experiment(config, seeds=range(10))
for arm in result.steps:
    print(arm, result.median(arm), result.steps[arm])
