"""
계획 - 실행 루프

H 스텝마다 (또는 현재 계획의 서브골을 모두 달성하면 바로) 파이프라인으로 새 계획을 받고,
매 스텝 정책 행동 -> 환경 -> 트래커 -> 정책 observe 순으로 진행한다.
"""
import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

from ..agent import (PolicyInterface, RandomPolicy, ScriptedExecutor, TabularMacroLearner,
                     Transition, load_macros)
from ..errors import SubgoalPlannerError
from ..gridcraft import GridCraft, WorldConfig
from ..knowledge import EntityKB, SubgoalGraph, load_graph, load_kb
from ..llm import Transcript, make_gateway
from ..planner import PlanningPipeline, build_context
from ..tracker import SubgoalTracker
from . import options
from .config import RunConfig
from .metrics import summarize
from .runlog import RunLog

logger = logging.getLogger(__name__)


def make_policy(config: RunConfig, graph: SubgoalGraph, macros) -> PolicyInterface:
    agent = config.agent
    if agent.policy == 'scripted':
        return ScriptedExecutor(graph, macros, survival=agent.survival)
    if agent.policy == 'tabular':
        policy = TabularMacroLearner(
            graph, macros,
            learning_rate=agent.learning_rate,
            discount=agent.discount,
            epsilon_start=agent.epsilon_start,
            epsilon_end=agent.epsilon_end,
            epsilon_decay_steps=agent.epsilon_decay_steps,
            step_cost=agent.step_cost,
            option_limit=agent.option_limit,
            seed=config.run.seed,
        )
        if agent.load is not None:
            policy.load(agent.load)
        return policy
    return RandomPolicy(config.run.seed)


@dataclass
class EpisodeStats:
    index: int
    seed: int
    steps: int = 0
    total_reward: float = 0.0
    extra_reward_total: float = 0.0
    unlocked: List[str] = field(default_factory=list)

    def summary(self, achievements: Dict[str, bool], complete: bool) -> Dict[str, Any]:
        return {
            'episode': self.index,
            'seed': self.seed,
            'steps': self.steps,
            'achievements': dict(achievements),
            'unlocked': list(self.unlocked),
            'total_reward': self.total_reward,
            'extra_reward_total': self.extra_reward_total,
            'complete': complete,
        }


class Runner:
    """
    실행 한 번의 전체 상태. 각 실행(seed)은 서로 독립
    """

    def __init__(self, config: RunConfig, graph: Optional[SubgoalGraph]=None,
                 kb: Optional[EntityKB]=None, write_files: bool=True):
        self.config = config
        paths = config.paths
        self.graph = graph if graph is not None else load_graph(paths.graph)
        self.kb = kb if kb is not None else load_kb(paths.kb, self.graph)

        overrides = {}
        if config.run.episode_steps is not None:
            overrides['max_steps'] = config.run.episode_steps
        self.env = GridCraft(WorldConfig.from_file(paths.world, **overrides))
        self.macros = load_macros(paths.macros)

        out_dir = config.run.output_dir if write_files else None
        transcript = Transcript(out_dir / options.TRANSCRIPT_FILE if out_dir else None)
        self.gateway = make_gateway(config.llm, transcript)
        self.pipeline = PlanningPipeline(self.gateway, config.planner, paths.prompts)
        self.tracker = SubgoalTracker(self.graph, config.tracker)
        self.policy = make_policy(config, self.graph, self.macros)
        self.log = RunLog(out_dir)
        self.plan_id = -1
        self.plan: tuple = ()

    def episode_seed(self, index: int) -> int:
        return self.config.run.seed + index

    def replan(self, obs, t: int, episode: int, trigger: str):
        achieved = {a for a, done in self.env.achievements().items() if done}
        ctx = build_context(obs, self.graph, self.kb, achieved, self.config.planner)
        final, trace = self.pipeline.generate(ctx)
        self.tracker.new_plan(final.subgoals)
        self.plan_id += 1
        self.plan = tuple(final.subgoals)
        self.log.log_plan({
            'plan_id': self.plan_id,
            'step': t,
            'episode': episode,
            'trigger': trigger,
            'subgoals': list(final.subgoals),
            'provenance': final.provenance,
            'trace': trace.as_dict(),
        })

    def run(self) -> RunLog:
        run = self.config.run
        episode = 0
        stats = EpisodeStats(episode, self.episode_seed(episode))
        obs = self.env.reset(stats.seed)
        t = 0
        try:
            for t in range(run.max_steps):
                if t % run.planning_interval == 0:
                    self.replan(obs, t, episode, 'interval')
                elif self.tracker.plan is None:
                    self.replan(obs, t, episode, 'episode')
                elif self.tracker.all_achieved():
                    self.replan(obs, t, episode, 'completed')

                completed = frozenset(s for s, v in self.tracker.state.first_achieved.items() if v)
                action = self.policy.act(obs, self.plan, self.env.state, completed)
                next_obs, reward, done, info = self.env.step(action)
                self.tracker.note_achievements(info['unlocked'])
                result = self.tracker.step(obs, next_obs)
                # TODO: 신경망 정책이 붙으면 이 자리에서 (o, p, a, r + r', o') 버퍼에 적재
                self.policy.observe(Transition(
                    obs, self.plan, action, reward, result.extra_reward, next_obs, done, info, self.env.state))

                stats.steps += 1
                stats.total_reward += reward
                stats.extra_reward_total += result.extra_reward
                stats.unlocked.extend(info['unlocked'])
                self.log.log_step({
                    'step': t,
                    'episode': episode,
                    'episode_step': stats.steps - 1,
                    'plan_id': self.plan_id,
                    'action': action.name.lower(),
                    'reward': reward,
                    'extra_reward': result.extra_reward,
                    'achieved': sorted(result.achieved),
                    'unlocked': list(info['unlocked']),
                    'events': list(info['events']),
                    'done': done,
                })

                if done:
                    self.log.log_episode(stats.summary(self.env.achievements(), complete=True))
                    logger.info('episode %d done after %d steps, unlocked %s',
                                episode, stats.steps, ', '.join(stats.unlocked) or '-')
                    episode += 1
                    stats = EpisodeStats(episode, self.episode_seed(episode))
                    obs = self.env.reset(stats.seed)
                    self.tracker.reset_episode()
                    self.policy.reset_episode()
                else:
                    obs = next_obs

            if stats.steps:
                self.log.log_episode(stats.summary(self.env.achievements(), complete=False))
            self.finish()
        except SubgoalPlannerError as e:
            logger.error('run aborted at step %d (episode %d): %s', t, episode, e)
            raise
        finally:
            self.log.close()
        return self.log

    def finish(self):
        report = summarize([self.log])
        triggers = [p['trigger'] for p in self.log.plans]
        report.extra.update({
            'steps': len(self.log.steps),
            'interval_replans': triggers.count('interval'),
            'completion_replans': triggers.count('completed'),
            'episode_replans': triggers.count('episode'),
            'llm_calls': len(self.gateway.transcript),
        })
        self.log.write_metrics(report.as_dict())
        if self.config.agent.save is not None and isinstance(self.policy, TabularMacroLearner):
            self.policy.save(self.config.agent.save)
        logger.info('score %.2f over %d episodes', report.score, report.episodes)


def run(config: RunConfig, write_files: bool=True) -> RunLog:
    return Runner(config, write_files=write_files).run()
