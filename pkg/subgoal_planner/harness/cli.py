"""
명령행 인터페이스

    python -m subgoal_planner validate
    python -m subgoal_planner verbalize --weights
    python -m subgoal_planner plan observation.txt --achieved collect_wood
    python -m subgoal_planner run --config run.yaml --seed 1 --out runs/seed1
    python -m subgoal_planner summarize runs/seed0 runs/seed1 --plot rates.png
    python -m subgoal_planner extract notes.md --out drafts/
    python -m subgoal_planner shaping --seeds 50 --out runs/shaping
    python -m subgoal_planner serve

종료 코드: 0 정상, 1 검증 결과 있음, 2 실행 오류
"""
import argparse
import json
import logging
import sys
from pathlib import Path
from typing import List, Optional

from ..errors import SubgoalPlannerError
from ..knowledge import extract_knowledge, graph_from_document, load_graph, load_kb, validate_graph, verbalize
from ..knowledge.graph import read_yaml
from ..llm import Transcript, make_gateway
from ..planner import PlanningPipeline, build_context
from ..tracker import TextObservation
from ..utils import get_env
from .config import load_run_config
from .experiments import shaping_experiment
from .loop import run
from .metrics import episodes_from_steps, summarize, summarize_episodes
from .runlog import RunLog

logger = logging.getLogger(__name__)

EXIT_OK, EXIT_FINDINGS, EXIT_ERROR = 0, 1, 2
SUMMARY_FILE = 'summary.json'
SHAPING_FILE = 'shaping.json'


def _config(args):
    return load_run_config(args.config, seed=args.seed, backend=args.backend, out=args.out)


def cmd_validate(args) -> int:
    config = _config(args)
    path = args.graph or config.paths.graph
    # finding은 예외가 아니라 종료 코드 1
    graph = graph_from_document(read_yaml(path), source=str(path))
    report = validate_graph(graph)
    print(f'graph: {len(graph)} subgoals')
    if not report.ok:
        print(report.render())
        return EXIT_FINDINGS
    kb = load_kb(args.kb or config.paths.kb, graph)
    print(f'kb: {len(kb)} entities, backend: {config.llm.kind}')
    print('ok')
    return EXIT_OK


def cmd_verbalize(args) -> int:
    config = _config(args)
    print(verbalize(load_graph(args.graph or config.paths.graph), include_weights=args.weights))
    return EXIT_OK


def cmd_plan(args) -> int:
    config = _config(args)
    graph = load_graph(config.paths.graph)
    kb = load_kb(config.paths.kb, graph)
    obs = TextObservation.parse(Path(args.observation).read_text(encoding='utf-8'))
    achieved = [a.strip() for a in (args.achieved or '').split(',') if a.strip()]

    transcript = Transcript(Path(args.out) / 'transcript.jsonl' if args.out else None)
    pipeline = PlanningPipeline(make_gateway(config.llm, transcript), config.planner, config.paths.prompts)
    final, trace = pipeline.generate(build_context(obs, graph, kb, achieved, config.planner))
    print(json.dumps(trace.as_dict(), ensure_ascii=False, indent=2))
    print(f'final plan: {", ".join(final.subgoals)} ({final.provenance})')
    return EXIT_OK


def cmd_run(args) -> int:
    config = _config(args)
    if args.max_steps is not None:
        config.run.max_steps = args.max_steps
        config.run.validate()
    log = run(config)
    print(summarize([log]).render())
    print(f'logs written to {config.run.output_dir}')
    return EXIT_OK


def cmd_summarize(args) -> int:
    logs = [RunLog.load(d) for d in args.runs]
    report = summarize(logs)
    print(report.render())

    # 스텝 기록에서 다시 계산한 점수와 metrics 블록 비교
    findings = []
    for log in logs:
        if log.metrics is None or not log.steps:
            continue
        recomputed = summarize_episodes(episodes_from_steps(log.steps))
        if abs(recomputed.score - log.metrics['score']) > 1e-9:
            findings.append(f'{log.out_dir}: score {log.metrics["score"]} but steps give {recomputed.score}')
    for f in findings:
        print(f)

    out = Path(args.out) if args.out else Path(args.runs[0])
    out.mkdir(parents=True, exist_ok=True)
    summary_path = out / SUMMARY_FILE
    summary_path.write_text(json.dumps(report.as_dict(), ensure_ascii=False, indent=2, sort_keys=True) + '\n',
                            encoding='utf-8')
    print(f'summary written to {summary_path}')
    if args.plot:
        from .visualization import plot_success_rates
        print(f'plot written to {plot_success_rates(report, args.plot)}')
    return EXIT_FINDINGS if findings else EXIT_OK


def cmd_extract(args) -> int:
    config = _config(args)
    docs = [Path(p).read_text(encoding='utf-8') for p in args.docs]
    out = Path(args.out or 'drafts')
    gateway = make_gateway(config.llm, Transcript(out / 'transcript.jsonl'))
    result = extract_knowledge(docs, gateway, out)
    print(f'graph draft: {result.graph_path}')
    print(f'kb draft: {result.kb_path}')
    for finding in result.graph_findings + result.kb_findings:
        print(finding)
    return EXIT_OK if result.ok else EXIT_FINDINGS


def cmd_shaping(args) -> int:
    config = _config(args)
    config.run.episode_steps = args.episode_steps
    config.run.max_steps = args.max_steps
    config.run.validate()
    result = shaping_experiment(config, range(config.run.seed, config.run.seed + args.seeds), args.achievement)
    for arm in result.steps:
        print(f'{arm:<9} median steps to {result.achievement}: {result.median(arm):.1f}'
              f' (extra reward {result.extra_reward[arm]:.1f})')
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / SHAPING_FILE).write_text(json.dumps(result.as_dict(), indent=2, sort_keys=True) + '\n',
                                        encoding='utf-8')
    return EXIT_OK


def cmd_serve(args) -> int:
    from ..server import app, configure
    configure(_config(args))
    port = args.port or get_env('PORT', 8000, cast=int)
    app.run(host='0.0.0.0', port=port)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--config', help='run config YAML (default: bundled run_default.yaml)')
    common.add_argument('--seed', type=int)
    common.add_argument('--backend', choices=['http', 'mock', 'replay'])
    common.add_argument('--out', help='output directory')
    common.add_argument('--verbose', '-v', action='store_true')

    parser = argparse.ArgumentParser(prog='subgoal_planner', description='subgoal graph planning harness')
    sub = parser.add_subparsers(dest='command', required=True)

    p = sub.add_parser('validate', parents=[common], help='check graph / KB / config')
    p.add_argument('--graph')
    p.add_argument('--kb')
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser('verbalize', parents=[common], help='print the verbalized graph')
    p.add_argument('--graph')
    p.add_argument('--weights', action='store_true', help='append success-rate weights')
    p.set_defaults(func=cmd_verbalize)

    p = sub.add_parser('plan', parents=[common], help='one pipeline call on an observation file')
    p.add_argument('observation')
    p.add_argument('--achieved', help='comma separated achievements')
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser('run', parents=[common], help='full planning / acting loop')
    p.add_argument('--max-steps', type=int)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser('summarize', parents=[common], help='aggregate run logs')
    p.add_argument('runs', nargs='+')
    p.add_argument('--plot', help='write a success-rate bar chart')
    p.set_defaults(func=cmd_summarize)

    p = sub.add_parser('extract', parents=[common], help='draft a graph and KB from documents')
    p.add_argument('docs', nargs='+')
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser('shaping', parents=[common], help='tabular learner with extra reward on vs off')
    p.add_argument('--seeds', type=int, default=50)
    p.add_argument('--achievement', default='place_table')
    p.add_argument('--max-steps', type=int, default=3000)
    p.add_argument('--episode-steps', type=int, default=300)
    p.set_defaults(func=cmd_shaping)

    p = sub.add_parser('serve', parents=[common], help='start the planning REST server')
    p.add_argument('--port', type=int)
    p.set_defaults(func=cmd_serve)
    return parser


def main(argv: Optional[List[str]]=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format='%(asctime)s %(levelname)s %(name)s: %(message)s',
    )
    try:
        return args.func(args)
    except SubgoalPlannerError as e:
        print(f'error: {e}', file=sys.stderr)
        return EXIT_ERROR
