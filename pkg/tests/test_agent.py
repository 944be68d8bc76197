import numpy as np
import pytest

from subgoal_planner.agent import (RandomPolicy, ScriptedExecutor, TabularMacroLearner, Transition,
                                   adjacent_to, features, find_path, load_macros, producers_of, scripted_act)
from subgoal_planner.errors import ConfigError
from subgoal_planner.gridcraft import Action, Creature, WorldConfig, WorldState, render_text, reset, step
from subgoal_planner.gridcraft.options import MATERIALS
from subgoal_planner.knowledge import load_graph
from subgoal_planner.knowledge.options import GRAPH_FIXTURE

PLAN = ('collect_wood', 'place_table', 'make_wood_pickaxe')


@pytest.fixture(scope='module')
def config():
    return WorldConfig.from_file()


@pytest.fixture
def graph():
    return load_graph(GRAPH_FIXTURE)


def field(config, size=5, trees=()):
    tiles = np.full((size, size), MATERIALS.index('grass'), dtype=np.int8)
    for p in trees:
        tiles[p] = MATERIALS.index('tree')
    return WorldState(tiles=tiles, pos=(2, 2), facing=(1, 0), config=config, rng=np.random.default_rng(0))


def completed_in(plan, state):
    return frozenset(s for s in plan if state.achievements.get(s))


def test_find_path_shortest_with_direction_tie_break(config):
    state = field(config)
    assert find_path(state, lambda p: p == (2, 2)) == []
    assert find_path(state, lambda p: p == (4, 2)) == ['east', 'east']
    assert find_path(state, lambda p: p == (3, 3)) == ['east', 'south']
    assert find_path(state, lambda p: p == (4, 4), limit=2) is None
    assert find_path(state, adjacent_to(lambda p: p == (0, 0))) == ['north', 'north', 'west']

    walled = field(config, trees=[(2, 1), (3, 2), (2, 3), (1, 2)])
    assert find_path(walled, lambda p: p == (0, 0)) is None


def test_scripted_executor_chains_prerequisites(config, graph):
    state = field(config, trees=[(4, 2)])
    policy = ScriptedExecutor(graph, load_macros())
    obs = render_text(state)
    # make_wood_pickaxe 먼저 요청해도 나무부터 모은다
    assert policy.resolve('make_wood_pickaxe', state) == 'collect_wood'
    assert policy.act(obs, ('make_wood_pickaxe',), state) == Action.MOVE_EAST

    for _ in range(40):
        if state.achievements['make_wood_pickaxe']:
            break
        action = policy.act(obs, PLAN, state, completed_in(PLAN, state))
        state, obs, *_ = step(state, action)
    assert all(state.achievements[s] for s in PLAN)
    assert policy.act(obs, PLAN, state, frozenset(PLAN)) == Action.NOOP


def test_scripted_executor_interacts_with_faced_tree(config, graph):
    state = field(config, trees=[(3, 2)])
    policy = ScriptedExecutor(graph)
    assert policy.act(render_text(state), PLAN, state) == Action.INTERACT
    assert scripted_act(render_text(state), PLAN, graph, state) == Action.INTERACT


def test_unreachable_subgoal_is_skipped(config, graph):
    state = field(config, trees=[(3, 2)])
    policy = ScriptedExecutor(graph)
    # 지도에 물이 없으니 collect_water는 건너뛰고 다음 서브골
    assert policy.act(render_text(state), ('collect_water', 'collect_wood', 'sleep'), state) == Action.INTERACT
    empty = field(config)
    assert policy.act(render_text(empty), ('collect_water', 'collect_diamond', 'defeat_zombie'), empty) == Action.NOOP


def test_survival_reflexes(config, graph):
    state = field(config)
    state.creatures.append(Creature('zombie', (3, 2), 5))
    policy = ScriptedExecutor(graph)
    assert policy.act(render_text(state), PLAN, state) == Action.INTERACT
    state.creatures[0].pos = (2, 1)
    assert policy.act(render_text(state), PLAN, state) == Action.MOVE_NORTH
    assert ScriptedExecutor(graph, survival=False).act(render_text(state), ('sleep',), state) == Action.NOOP

    state.creatures.clear()
    state.vitals['energy'] = 1
    assert policy.act(render_text(state), PLAN, state) == Action.SLEEP
    state.sleeping = True
    assert policy.act(render_text(state), PLAN, state) == Action.NOOP


def test_producers_and_macro_table(graph, tmp_path):
    producers = producers_of(graph)
    assert producers['wood'] == 'collect_wood'
    assert producers['table'] == 'place_table'
    macros = load_macros()
    assert set(macros) == set(graph.nodes)

    bad = tmp_path / 'macros.yaml'
    bad.write_text('macros:\n  collect_wood: {act: chop, tile: tree}\n', encoding='utf-8')
    with pytest.raises(ConfigError, match='collect_wood'):
        load_macros(bad)
    bad.write_text('macros:\n  collect_wood: {act: interact, colour: red}\n', encoding='utf-8')
    with pytest.raises(ConfigError):
        load_macros(bad)


def test_random_policy_is_seeded(config):
    state, obs = reset(config, seed=0)
    a, b = RandomPolicy(4), RandomPolicy(4)
    assert [a.act(obs, PLAN, state) for _ in range(20)] == [b.act(obs, PLAN, state) for _ in range(20)]
    assert all(isinstance(a.act(obs, PLAN, state), Action) for _ in range(5))


def test_tabular_greedy_tie_break_and_td(graph):
    learner = TabularMacroLearner(graph, seed=0)
    key = ((0, 0, False, ()), PLAN)
    assert learner.select(key, ['place_table', 'collect_wood', 'eat_cow'], epsilon=0.0) == 'collect_wood'

    assert learner.td_update(key, 'place_table', 1.0, k=1, bootstrap=2.0) == pytest.approx(0.5 * (1.0 + 0.9 * 2.0))
    for _ in range(10):
        learner.td_update(key, 'place_table', 0.2)
    assert learner.value(key, 'place_table') > max(learner.value(key, t) for t in ('collect_wood', 'eat_cow'))
    assert learner.select(key, ['place_table', 'collect_wood', 'eat_cow'], epsilon=0.0) == 'place_table'


def test_tabular_epsilon_one_is_uniform(graph):
    learner = TabularMacroLearner(graph, seed=1)
    key = ((0, 0, False, ()), PLAN)
    learner.td_update(key, 'collect_wood', 5.0)
    choices = ['collect_sapling', 'collect_water', 'collect_wood', 'defeat_skeleton', 'defeat_zombie', 'eat_cow']
    draws = [learner.select(key, choices, epsilon=1.0) for _ in range(10000)]
    counts = np.array([draws.count(c) for c in choices])
    expected = len(draws) / len(choices)
    chi2 = float(((counts - expected) ** 2 / expected).sum())
    assert chi2 < 20.52  # 자유도 5, p = 0.001


def test_tabular_epsilon_schedule(graph):
    learner = TabularMacroLearner(graph, epsilon_start=0.3, epsilon_end=0.05, epsilon_decay_steps=1000)
    assert learner.epsilon == pytest.approx(0.3)
    learner.decisions = 500
    assert learner.epsilon == pytest.approx(0.175)
    learner.decisions = 5000
    assert learner.epsilon == pytest.approx(0.05)


def test_tabular_macro_lifecycle(config, graph):
    state = field(config, trees=[(3, 2)])
    learner = TabularMacroLearner(graph, epsilon_start=0.0, epsilon_end=0.0, seed=0)
    assert learner.available(state) == ['collect_sapling', 'collect_water', 'collect_wood',
                                         'defeat_skeleton', 'defeat_zombie', 'eat_cow']
    learner.q[((features(render_text(state)), PLAN), 'collect_wood')] = 1.0

    obs = render_text(state)
    action = learner.act(obs, PLAN, state)
    assert learner.current == 'collect_wood'
    assert action == Action.INTERACT
    state, next_obs, reward, done, info = step(state, action)
    learner.observe(Transition(obs, PLAN, action, reward, 0.2, next_obs, done, info, state))
    assert learner.finished
    assert learner.k == 1
    assert learner.ret == pytest.approx(1.0 + 0.2 - learner.step_cost)

    learner.act(next_obs, PLAN, state)
    start_key = (features(obs), PLAN)
    assert learner.value(start_key, 'collect_wood') == pytest.approx(1.0 + 0.5 * (1.19 - 1.0))
    assert learner.decisions == 2


def test_tabular_save_and_load(graph, tmp_path):
    learner = TabularMacroLearner(graph)
    key = ((1, 0, True, ()), PLAN)
    learner.td_update(key, 'place_table', 1.0)
    learner.decisions = 12
    path = tmp_path / 'table.joblib'
    learner.save(path)

    restored = TabularMacroLearner(graph).load(path)
    assert restored.value(key, 'place_table') == pytest.approx(0.5)
    assert restored.decisions == 12


@pytest.mark.slow
def test_scripted_executor_finishes_the_opening_plan(graph):
    config = WorldConfig.from_file(max_steps=500)
    policy = ScriptedExecutor(graph, load_macros())
    finished = 0
    for seed in range(50):
        state, obs = reset(config, seed=seed)
        while not state.done and not all(state.achievements[s] for s in PLAN):
            state, obs, *_ = step(state, policy.act(obs, PLAN, state, completed_in(PLAN, state)))
        finished += all(state.achievements[s] for s in PLAN)
    assert finished >= 45
