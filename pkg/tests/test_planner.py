from pathlib import Path

import numpy as np
import pytest

from subgoal_planner.errors import MissingExtras, ParseError, PlanningError, PromptError
from subgoal_planner.knowledge import graph_from_document, load_graph, load_kb
from subgoal_planner.knowledge.options import GRAPH_FIXTURE, KB_FIXTURE
from subgoal_planner.llm import BackendConfig, Gateway, MockBackend, make_gateway
from subgoal_planner.planner import (PlannerConfig, PlanningPipeline, build_context, frontier_plan,
                                     parse_actor_output, parse_critic_output, parse_refiner_output,
                                     generate_plan, render_prompt)
from subgoal_planner.planner.options import MODES as PLANNER_MODES
from subgoal_planner.utils import resolve_path

FIXTURES = Path(__file__).parent / 'fixtures'
OBS = ('You see: grass, table, tree\n'
       'Inventory: wood x1\n'
       'Vitals: health 9, food 9, drink 9, energy 9\n'
       'Status: none')


def fixture(name):
    return (FIXTURES / f'{name}.txt').read_text(encoding='utf-8')


@pytest.fixture
def graph():
    return load_graph(GRAPH_FIXTURE)


@pytest.fixture
def ctx(graph):
    return build_context(OBS, graph, load_kb(KB_FIXTURE, graph), set())


def _scripted(**responses):
    return Gateway(MockBackend([{'role': role, 'response': text} for role, text in responses.items()]))


def test_actor_fixtures_parse():
    a = parse_actor_output(fixture('case_a_actor'))
    assert [c.label for c in a] == ['PlanA', 'PlanB', 'PlanC']
    assert a[0].subgoals == ('collect_wood', 'place_table', 'make_wood_sword')
    assert a[2].subgoals == ('collect_sapling', 'place_plant', 'eat_plant')
    assert a[0].rationale.startswith('Collecting wood')

    # 형식은 맞지만 내용이 틀린 계획도 파서는 통과시킨다
    b = parse_actor_output(fixture('case_b_actor'))
    assert b[0].subgoals == ('collect_wood make_wood_sword', 'collect_wood', 'defeat_zombie')

    c = parse_actor_output(fixture('case_c_actor'))
    assert c[0].subgoals == ('collect_iron', 'make_iron_pickaxe', 'make_iron_sword')


def test_critic_fixtures_parse():
    a = parse_critic_output(fixture('case_a_critic'))
    assert a.ranking == ['PlanA', 'PlanC', 'PlanB']
    assert a.need_modify is False
    assert list(a.per_plan) == ['PlanA', 'PlanB', 'PlanC']

    assert parse_critic_output(fixture('case_b_critic')).ranking == ['PlanB', 'PlanC', 'PlanA']

    c = parse_critic_output(fixture('case_c_critic'))
    assert c.ranking == ['PlanA', 'PlanC', 'PlanB']
    assert c.need_modify is True


def test_refiner_fixture_parses():
    final = parse_refiner_output(fixture('case_c_refiner'))
    assert final.subgoals == ('defeat_skeleton', 'place_furnace', 'collect_iron')
    assert final.provenance == 'refined'
    assert final.analysis.startswith('1. PlanA includes iron')


def test_refiner_analysis_is_optional():
    final = parse_refiner_output('Final_Plan<collect_wood, place_table, make_wood_pickaxe>')
    assert final.subgoals == ('collect_wood', 'place_table', 'make_wood_pickaxe')
    assert final.analysis == ''


def test_critic_without_flag_only_in_no_flag_mode():
    text = fixture('overrefine_a_critic')
    assert parse_critic_output(text, require_flag=False).need_modify is None
    with pytest.raises(ParseError, match='Need_Modify'):
        parse_critic_output(text)


PARSERS = {
    'actor': parse_actor_output,
    'critic': lambda text: parse_critic_output(text, require_flag=False),
    'refiner': parse_refiner_output,
}
FIXTURE_NAMES = ['case_a_actor', 'case_a_critic', 'case_b_actor', 'case_b_critic', 'case_c_actor',
                 'case_c_critic', 'case_c_refiner', 'overrefine_a_critic', 'overrefine_b_refiner']


def _mutations(text):
    lines = text.split('\n')
    for i, line in enumerate(lines):
        for delimiter, index in (('<', line.find('<')), ('>', line.rfind('>'))):
            if index < 0:
                continue
            mutated = lines[:i] + [line[:index] + line[index + 1:]] + lines[i + 1:]
            yield f'line {i + 1} without {delimiter}', '\n'.join(mutated)


@pytest.mark.parametrize('name', FIXTURE_NAMES)
def test_deleting_any_delimiter_is_rejected(name):
    parse = PARSERS[name.rsplit('_', 1)[1]]
    text = fixture(name)
    parse(text)
    mutations = list(_mutations(text))
    assert mutations
    for label, mutated in mutations:
        with pytest.raises(ParseError):
            parse(mutated)
            pytest.fail(f'{name}: {label} was accepted')


@pytest.mark.parametrize('text', [
    'PlanA<a,b>\nReasonA<r>\nPlanB<a,b,c>\nReasonB<r>\nPlanC<a,b,c>\nReasonC<r>',
    'PlanA<a,a,b>\nReasonA<r>\nPlanB<a,b,c>\nReasonB<r>\nPlanC<a,b,c>\nReasonC<r>',
    'PlanA<a,b,c>\nPlanB<a,b,c>\nReasonB<r>\nPlanC<a,b,c>\nReasonC<r>',
    'PlanA<a,b,c>\nReasonA<r>\nPlanB<a,b,c>\nReasonB<r>\nPlanC<a,b,c>\nReasonC<r>\nPlanD<a,b,c>',
    'Here are my plans:\nPlanA<a,b,c>\nReasonA<r>\nPlanB<a,b,c>\nReasonB<r>\nPlanC<a,b,c>\nReasonC<r>',
])
def test_actor_parser_is_strict(text):
    with pytest.raises(ParseError):
        parse_actor_output(text)


def test_critic_ranking_must_be_permutation():
    text = fixture('case_a_critic').replace('Ranking<PlanA,PlanC,PlanB>', 'Ranking<PlanA,PlanA,PlanB>')
    with pytest.raises(ParseError, match='permutation'):
        parse_critic_output(text)
    text = fixture('case_a_critic').replace('Need_Modify<no>', 'Need_Modify<maybe>')
    with pytest.raises(ParseError, match='yes or no'):
        parse_critic_output(text)


def test_case_a_short_circuits_after_critic(ctx):
    gateway = _scripted(actor=fixture('case_a_actor'), critic=fixture('case_a_critic'))
    final, trace = PlanningPipeline(gateway).generate(ctx)
    assert final.subgoals == ('collect_wood', 'place_table', 'make_wood_sword')
    assert final.provenance == 'adopted-top-ranked'
    assert trace.llm_calls == 2
    assert [s.stage for s in trace.stages] == ['actor', 'critic']
    assert len(gateway.transcript) == 2


def test_case_c_goes_through_refiner(ctx):
    gateway = _scripted(actor=fixture('case_c_actor'), critic=fixture('case_c_critic'),
                        refiner=fixture('case_c_refiner'))
    final, trace = PlanningPipeline(gateway).generate(ctx)
    assert final.subgoals == ('defeat_skeleton', 'place_furnace', 'collect_iron')
    assert final.provenance == 'refined'
    assert trace.llm_calls == 3
    assert trace.as_dict()['need_modify'] is True


def test_pipeline_is_deterministic(graph):
    traces = []
    for _ in range(2):
        ctx = build_context(OBS, graph, load_kb(KB_FIXTURE, graph), set())
        gateway = _scripted(actor=fixture('case_c_actor'), critic=fixture('case_c_critic'),
                            refiner=fixture('case_c_refiner'))
        final, trace = generate_plan(ctx, gateway)
        traces.append((final, trace.as_dict()))
    assert traces[0] == traces[1]


def test_case_b_adopts_critic_choice(ctx):
    gateway = _scripted(actor=fixture('case_b_actor'), critic=fixture('case_b_critic'))
    final, trace = PlanningPipeline(gateway).generate(ctx)
    assert final.subgoals == ('collect_stone', 'make_stone_pickaxe', 'make_stone_sword')
    assert final.provenance == 'adopted-top-ranked'


def test_invalid_top_plan_falls_back_to_next_ranked(ctx):
    critic = fixture('case_b_critic').replace('Ranking<PlanB,PlanC,PlanA>', 'Ranking<PlanA,PlanC,PlanB>')
    final, trace = PlanningPipeline(_scripted(actor=fixture('case_b_actor'), critic=critic)).generate(ctx)
    assert final.subgoals == ('eat_cow', 'make_wood_sword', 'defeat_zombie')
    assert final.provenance == 'fallback'
    assert 'PlanA invalid' in trace.decision


def test_garbage_actor_output_falls_back_to_frontier(ctx, graph):
    gateway = _scripted(actor='I think you should chop some trees.')
    final, trace = PlanningPipeline(gateway, PlannerConfig(stage_retries=2)).generate(ctx)
    assert trace.calls_for('actor') == 3
    assert all(s.error for s in trace.stages)
    assert final.provenance == 'fallback'
    assert list(final.subgoals) == frontier_plan(graph, set())
    assert final.subgoals == ('collect_sapling', 'collect_water', 'collect_wood')


def test_garbage_critic_output_keeps_actor_order(ctx):
    gateway = _scripted(actor=fixture('case_a_actor'), critic='Ranking: A then C then B')
    final, trace = PlanningPipeline(gateway).generate(ctx)
    assert trace.calls_for('critic') == 3
    assert final.subgoals == ('collect_wood', 'place_table', 'make_wood_sword')
    assert final.provenance == 'fallback'


def test_refiner_plan_outside_graph_is_retried_then_dropped(ctx):
    gateway = _scripted(actor=fixture('case_c_actor'), critic=fixture('case_c_critic'),
                        refiner='Analysis<x>\nFinal_Plan<fly,place_furnace,collect_iron>')
    final, trace = PlanningPipeline(gateway).generate(ctx)
    assert trace.calls_for('refiner') == 3
    assert trace.llm_calls == 5
    assert final.subgoals == ('collect_iron', 'make_iron_pickaxe', 'make_iron_sword')
    assert final.provenance == 'fallback'


def _overrefine_b():
    return _scripted(actor=fixture('overrefine_b_actor'), critic=fixture('overrefine_b_critic'),
                     refiner=fixture('overrefine_b_refiner'))


@pytest.mark.parametrize('mode, calls, subgoals, provenance', [
    ('no_flag', 3, ('collect_stone', 'place_furnace', 'make_stone_pickaxe'), 'refined'),
    ('no_refiner', 2, ('place_table', 'collect_stone', 'make_stone_pickaxe'), 'adopted-top-ranked'),
    ('no_critic', 2, ('collect_stone', 'place_furnace', 'make_stone_pickaxe'), 'refined'),
    ('actor_only', 1, ('place_table', 'collect_stone', 'make_stone_pickaxe'), 'adopted-top-ranked'),
])
def test_pipeline_modes(ctx, mode, calls, subgoals, provenance):
    final, trace = PlanningPipeline(_overrefine_b(), PlannerConfig(mode=mode)).generate(ctx)
    assert trace.llm_calls == calls
    assert final.subgoals == subgoals
    assert final.provenance == provenance


def test_acr_mode_rejects_critic_without_flag(ctx):
    final, trace = PlanningPipeline(_overrefine_b()).generate(ctx)
    assert trace.calls_for('critic') == 3
    assert final.provenance == 'fallback'


def test_random_plan_mode_picks_a_candidate(ctx):
    candidates = [c.subgoals for c in parse_actor_output(fixture('overrefine_b_actor'))]
    picks = set()
    for seed in range(8):
        final, trace = PlanningPipeline(_overrefine_b(), PlannerConfig(mode='random_plan', seed=seed)).generate(ctx)
        assert trace.llm_calls == 1
        assert final.subgoals in candidates
        picks.add(final.subgoals)
    assert len(picks) > 1


def test_frontier_responder_follows_the_graph(ctx):
    gateway = make_gateway(BackendConfig(kind='mock', mock_table=resolve_path('asset:mock/default.yaml')))
    final, trace = PlanningPipeline(gateway).generate(ctx)
    assert final.subgoals == ('collect_wood', 'place_table', 'make_wood_pickaxe')
    assert final.provenance == 'adopted-top-ranked'
    assert trace.llm_calls == 2


def test_build_context_fields(graph):
    kb = load_kb(KB_FIXTURE, graph)
    ctx = build_context(OBS, graph, kb, {'collect_wood'})
    assert 'collect_wood' not in ctx.unachieved
    assert len(ctx.unachieved) == 21
    assert ctx.available_subgoals == sorted(graph.nodes)
    assert 'tree' in ctx.entity_info
    assert 'collect_wood (-%)' in ctx.graph_text

    bare = build_context(OBS, graph, kb, set(), PlannerConfig(use_graph=False, use_entity_info=False))
    assert bare.graph_text == 'none'
    assert bare.entity_info == 'none'

    frontier = build_context(OBS, graph, kb, {'collect_wood'}, PlannerConfig(available='frontier'))
    assert 'place_table' in frontier.available_subgoals
    assert 'collect_wood' not in frontier.available_subgoals
    assert 'make_wood_pickaxe' not in frontier.available_subgoals


def test_render_prompt_needs_role_extras(ctx):
    system, user = render_prompt('actor', ctx)
    assert 'PlanA' in system
    assert 'You see: grass, table, tree' in user
    with pytest.raises(MissingExtras) as e:
        render_prompt('refiner', ctx, {'candidate_plans': 'x'})
    assert e.value.names == ['critic_feedback']
    with pytest.raises(PromptError):
        render_prompt('judge', ctx)


LABELS = ['PlanA', 'PlanB', 'PlanC']


def _random_plan(rng, ids):
    pool = list(ids) + ['fly', 'collect wood', 'make_diamond_sword']
    size = int(rng.choice([2, 3, 3, 3, 3, 4]))
    return [str(s) for s in rng.choice(pool, size=size, replace=bool(rng.random() < 0.2))]


def _corrupt(rng, text):
    lines = text.split('\n')
    kind = rng.choice(4, p=[0.55, 0.15, 0.15, 0.15])
    if kind == 1:
        i = int(rng.integers(len(lines)))
        marks = [j for j, ch in enumerate(lines[i]) if ch in '<>']
        j = marks[int(rng.integers(len(marks)))]
        lines[i] = lines[i][:j] + lines[i][j + 1:]
    elif kind == 2:
        del lines[int(rng.integers(len(lines)))]
    elif kind == 3:
        return str(rng.choice(['', 'I would chop some trees first.', 'PlanA<>', '```\nPlanA<collect_wood>\n```']))
    return '\n'.join(lines)


def _random_responses(rng, ids):
    actor = []
    for label in LABELS:
        actor.append(f'{label}<{",".join(_random_plan(rng, ids))}>')
        actor.append(f'Reason{label[-1]}<because {label}>')
    critic = [f'{label}_feedback<1. ok 2. ok 3. ok 4. ok>' for label in LABELS]
    if rng.random() < 0.8:
        ranking = [str(s) for s in rng.permutation(LABELS)]
    else:
        ranking = [str(s) for s in rng.choice(LABELS, size=3)]
    critic.append(f'Ranking<{",".join(ranking)}>')
    flag = str(rng.choice(['yes', 'no', 'yes', 'no', 'maybe', '']))
    if flag:
        critic.append(f'Need_Modify<{flag}>')
    refiner = f'Analysis<looks fine>\nFinal_Plan<{",".join(_random_plan(rng, ids))}>'
    return {
        'actor': _corrupt(rng, '\n'.join(actor)),
        'critic': _corrupt(rng, '\n'.join(critic)),
        'refiner': _corrupt(rng, refiner),
    }


@pytest.mark.parametrize('mode', PLANNER_MODES)
def test_every_plan_is_valid_whatever_the_model_says(graph, mode):
    kb = load_kb(KB_FIXTURE, graph)
    achieved = {'collect_wood', 'place_table', 'collect_sapling'}
    contexts = [
        build_context(OBS, graph, kb, achieved),
        build_context(OBS, graph, kb, achieved, PlannerConfig(available='frontier')),
    ]
    rng = np.random.default_rng(PLANNER_MODES.index(mode))
    provenances = set()
    for i in range(1000):
        ctx = contexts[i % 2]
        gateway = _scripted(**_random_responses(rng, sorted(graph.nodes)))
        final, trace = PlanningPipeline(gateway, PlannerConfig(mode=mode, seed=i)).generate(ctx)
        assert len(final.subgoals) == 3
        assert len(set(final.subgoals)) == 3
        assert set(final.subgoals) <= set(ctx.available_subgoals)
        if i % 2:
            assert not set(final.subgoals) & achieved
        provenances.add(final.provenance)
    assert 'fallback' in provenances
    assert len(provenances) >= 2


def test_frontier_plan_needs_enough_subgoals():
    tiny = graph_from_document({'subgoals': [
        {'id': 'a', 'description': 'a', 'postconditions': [{'object': 'x', 'change': '+1'}]},
        {'id': 'b', 'description': 'b', 'postconditions': [{'object': 'y', 'change': '+1'}]},
    ]})
    with pytest.raises(PlanningError, match='only 2'):
        frontier_plan(tiny, set())
    assert frontier_plan(tiny, set(), size=2) == ['a', 'b']

    ctx = build_context(OBS, tiny, None, set())
    with pytest.raises(PlanningError):
        PlanningPipeline(_scripted(actor='no plans today')).generate(ctx)
