"""
GridCraft 월드

Crafter를 축소한 결정적 격자 세계. 22개 업적의 의존 관계를 그대로 재현하고
트래커가 읽는 텍스트 관측을 낸다. 모든 난수는 WorldState.rng 하나에서 나온다.
"""
import logging
from dataclasses import dataclass, field, fields, replace
from enum import IntEnum
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

import numpy as np
import yaml

from ..errors import EpisodeDoneError, WorldConfigError
from ..tracker.observation import TextObservation
from ..tracker.options import VITALS
from . import options
from .options import ACHIEVEMENTS, CREATURES, ITEMS, MATERIALS, MAX_VITAL, WALKABLE

logger = logging.getLogger(__name__)

Action = IntEnum('Action', [(name.upper(), i) for i, name in enumerate(options.ACTIONS)])

Pos = Tuple[int, int]

_CODE = {name: i for i, name in enumerate(MATERIALS)}
_RESOURCE_ORDER = ('water', 'tree', 'rock', 'coal_ore', 'iron_ore', 'diamond_ore')


@dataclass
class WorldConfig:
    grid: Tuple[int, int] = options.GRID_SIZE
    view: Tuple[int, int] = options.VIEW_SIZE
    max_steps: int = options.MAX_STEPS
    seed: int = 0
    day_length: int = 300
    night_fraction: float = 0.3
    densities: Dict[str, float] = field(default_factory=dict)
    minimum: Dict[str, int] = field(default_factory=dict)
    creatures: Dict[str, int] = field(default_factory=dict)
    night_zombies: int = 3
    zombie_spawn_chance: float = 0.05
    creature_health: Dict[str, int] = field(default_factory=lambda: {'cow': 3, 'zombie': 5, 'skeleton': 3})
    creature_damage: Dict[str, int] = field(default_factory=lambda: {'zombie': 2, 'skeleton': 2})
    sleeping_damage: int = 5
    attack_cooldown: int = 5
    chase_radius: int = 4
    move_chance: float = 0.5
    skeleton_leash: int = 3
    sapling_chance: float = 0.1
    ripen_steps: int = 30
    decay: Dict[str, int] = field(default_factory=lambda: {'food': 25, 'drink': 20, 'energy': 30})
    recover_interval: int = 10
    sleep_restore: int = 5
    eat: Dict[str, int] = field(default_factory=lambda: {'cow': 6, 'ripe_plant': 4})
    drink: int = 1
    collect: Dict[str, Dict[str, Any]] = field(default_factory=dict)
    place: Dict[str, Dict[str, Any]] = field(default_factory=dict)
    make: Dict[str, Dict[str, Any]] = field(default_factory=dict)
    nearby_radius: int = 1

    def __post_init__(self):
        self.grid = tuple(self.grid)
        self.view = tuple(self.view)

    @classmethod
    def from_file(cls, path: Union[str, Path]=options.WORLD_CONFIG, **overrides) -> 'WorldConfig':
        try:
            doc = yaml.safe_load(Path(path).read_text(encoding='utf-8')) or {}
        except (OSError, yaml.YAMLError) as e:
            raise WorldConfigError(f'cannot load world config {path}: {e}') from e
        if not isinstance(doc, dict):
            raise WorldConfigError(f'{path}: world config must be a mapping')
        doc.update({k: v for k, v in overrides.items() if v is not None})
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(doc) - known)
        if unknown:
            raise WorldConfigError(f'{path}: unknown world config keys {unknown}')
        return cls(**doc).validate()

    def cells(self) -> int:
        return self.grid[0] * self.grid[1]

    def resource_counts(self) -> Dict[str, int]:
        return {m: max(int(self.minimum.get(m, 0)), int(round(self.densities.get(m, 0.0) * self.cells())))
                for m in _RESOURCE_ORDER}

    def validate(self) -> 'WorldConfig':
        w, h = self.grid
        if w < 3 or h < 3:
            raise WorldConfigError(f'grid {w}x{h} is too small')
        if self.max_steps < 1:
            raise WorldConfigError('max_steps must be at least 1')
        if any(v < 1 or v % 2 == 0 for v in self.view):
            raise WorldConfigError('view sizes must be odd and positive')
        if self.day_length < 1 or not 0 <= self.night_fraction <= 1:
            raise WorldConfigError('day_length must be positive and night_fraction within [0, 1]')
        counts = self.resource_counts()
        missing = [m for m in _RESOURCE_ORDER if counts[m] < 1]
        if missing:
            raise WorldConfigError(f'world would lack resource types {missing}')
        needed = sum(counts.values()) + sum(self.creatures.values()) + 9
        if needed > self.cells():
            raise WorldConfigError(
                f'grid {w}x{h} cannot place all resource types ({needed} cells needed)')
        for table, allowed in ((self.collect, MATERIALS), (self.place, MATERIALS), (self.make, ITEMS)):
            for name in table:
                if name not in allowed and name not in ITEMS:
                    raise WorldConfigError(f'unknown recipe target {name!r}')
        for name, recipe in self.collect.items():
            if recipe.get('receive') not in ITEMS:
                raise WorldConfigError(f'collect.{name}: unknown item {recipe.get("receive")!r}')
        for section in (self.place, self.make):
            for name, recipe in section.items():
                bad = [item for item in recipe.get('uses', {}) if item not in ITEMS]
                if bad:
                    raise WorldConfigError(f'recipe {name}: unknown inputs {bad}')
        return self


@dataclass
class Creature:
    kind: str
    pos: Pos
    health: int
    cooldown: int = 0
    home: Optional[Pos] = None


@dataclass
class WorldState:
    tiles: np.ndarray  # [x, y] -> MATERIALS 인덱스
    pos: Pos
    facing: Pos = (0, 1)
    inventory: Dict[str, int] = field(default_factory=lambda: {item: 0 for item in ITEMS})
    vitals: Dict[str, int] = field(default_factory=lambda: {v: MAX_VITAL for v in VITALS})
    creatures: List[Creature] = field(default_factory=list)
    plants: Dict[Pos, int] = field(default_factory=dict)
    step: int = 0
    achievements: Dict[str, bool] = field(default_factory=lambda: {a: False for a in ACHIEVEMENTS})
    sleeping: bool = False
    defeated: List[str] = field(default_factory=list)  # 직전 스텝에서 쓰러뜨린 생물
    done: bool = False
    counters: Dict[str, int] = field(default_factory=lambda: {'food': 0, 'drink': 0, 'energy': 0,
                                                              'rest': 0, 'recover': 0})
    config: WorldConfig = field(default_factory=WorldConfig, repr=False, compare=False)
    rng: np.random.Generator = field(default=None, repr=False, compare=False)

    @property
    def size(self) -> Tuple[int, int]:
        return self.tiles.shape

    def in_bounds(self, p: Pos) -> bool:
        return 0 <= p[0] < self.tiles.shape[0] and 0 <= p[1] < self.tiles.shape[1]

    def material(self, p: Pos) -> Optional[str]:
        return MATERIALS[self.tiles[p]] if self.in_bounds(p) else None

    def creature_at(self, p: Pos) -> Optional[Creature]:
        for c in self.creatures:
            if c.pos == p:
                return c
        return None

    def is_free(self, p: Pos) -> bool:
        return (self.in_bounds(p) and MATERIALS[self.tiles[p]] in WALKABLE
                and p != self.pos and self.creature_at(p) is None)

    def target(self) -> Pos:
        return (self.pos[0] + self.facing[0], self.pos[1] + self.facing[1])

    def entity_at(self, p: Pos) -> Optional[str]:
        """관측에 나오는 이름. 바닥(grass/sand/path)은 None"""
        creature = self.creature_at(p)
        if creature is not None:
            return creature.kind
        name = self.material(p)
        if name is None or name in WALKABLE:
            return None
        if name == 'plant' and self.plants.get(p, 0) >= self.config.ripen_steps:
            return 'ripe_plant'
        return name

    def is_night(self) -> bool:
        phase = self.step % self.config.day_length
        return phase >= self.config.day_length * (1 - self.config.night_fraction)


def _neighbors(p: Pos) -> List[Pos]:
    return [(p[0] + dx, p[1] + dy) for dx, dy in options.DIRECTIONS.values()]


def _reachable(tiles: np.ndarray, start: Pos) -> set:
    walkable = {_CODE[m] for m in WALKABLE}
    w, h = tiles.shape
    seen, stack = {start}, [start]
    while stack:
        for n in _neighbors(stack.pop()):
            if 0 <= n[0] < w and 0 <= n[1] < h and n not in seen and tiles[n] in walkable:
                seen.add(n)
                stack.append(n)
    return seen


def _exposed(tiles: np.ndarray, reach: set) -> set:
    """도달 가능한 칸에 인접한 자원 종류"""
    w, h = tiles.shape
    kinds = set()
    for p in reach:
        for n in _neighbors(p):
            if 0 <= n[0] < w and 0 <= n[1] < h:
                kinds.add(MATERIALS[tiles[n]])
    return kinds


def _generate(config: WorldConfig, rng: np.random.Generator) -> Tuple[np.ndarray, Pos, List[Creature]]:
    w, h = config.grid
    start = (w // 2, h // 2)
    reserved = {(start[0] + dx, start[1] + dy) for dx in (-1, 0, 1) for dy in (-1, 0, 1)}
    cells = [(x, y) for x in range(w) for y in range(h) if (x, y) not in reserved]
    counts = config.resource_counts()

    for attempt in range(options.GEN_ATTEMPTS):
        tiles = np.full((w, h), _CODE['grass'], dtype=np.int8)
        order = rng.permutation(len(cells))
        cursor = 0
        for material in _RESOURCE_ORDER:
            for i in order[cursor:cursor + counts[material]]:
                tiles[cells[i]] = _CODE[material]
            cursor += counts[material]
        for x in range(w):
            for y in range(h):
                if tiles[x, y] == _CODE['grass'] and any(
                        0 <= n[0] < w and 0 <= n[1] < h and tiles[n] == _CODE['water']
                        for n in _neighbors((x, y))) and (x, y) not in reserved:
                    tiles[x, y] = _CODE['sand']
        reach = _reachable(tiles, start)
        if set(_RESOURCE_ORDER) <= _exposed(tiles, reach):
            break
    else:
        raise WorldConfigError(f'no connected layout found for seed {config.seed} in {options.GEN_ATTEMPTS} attempts')

    open_cells = sorted(p for p in reach if p not in reserved and MATERIALS[tiles[p]] == 'grass')
    creatures: List[Creature] = []
    taken = set()
    for kind in CREATURES:
        for _ in range(config.creatures.get(kind, 0)):
            if kind == 'skeleton':
                pool = [p for p in open_cells if p not in taken
                        and any(0 <= n[0] < w and 0 <= n[1] < h and tiles[n] == _CODE['rock']
                                for n in _neighbors(p))]
            else:
                pool = [p for p in open_cells if p not in taken]
            if not pool:
                pool = [p for p in open_cells if p not in taken]
            if not pool:
                raise WorldConfigError('no free cell left for creatures')
            p = pool[int(rng.integers(len(pool)))]
            taken.add(p)
            home = p if kind == 'skeleton' else None
            creatures.append(Creature(kind, p, config.creature_health[kind], home=home))
    return tiles, start, creatures


def reset(config: Optional[WorldConfig]=None, seed: Optional[int]=None) -> Tuple[WorldState, TextObservation]:
    config = config or WorldConfig.from_file()
    if seed is not None:
        config = replace(config, seed=seed)
    rng = np.random.default_rng(config.seed)
    tiles, start, creatures = _generate(config, rng)
    state = WorldState(tiles=tiles, pos=start, creatures=creatures, config=config, rng=rng)
    logger.debug('world reset (seed %d)', config.seed)
    return state, render_text(state)


def render_text(state: WorldState) -> TextObservation:
    vw, vh = state.config.view
    px, py = state.pos
    visible = []
    for x in range(px - vw // 2, px + vw // 2 + 1):
        for y in range(py - vh // 2, py + vh // 2 + 1):
            if (x, y) == state.pos:
                continue
            name = state.entity_at((x, y))
            if name is not None:
                visible.append(name)
    inventory = [(item, state.inventory[item]) for item in ITEMS if state.inventory[item] > 0]
    vitals = [(v, state.vitals[v]) for v in VITALS]
    status = ['sleeping'] if state.sleeping else []
    status += [f'defeated_{kind}' for kind in sorted(set(state.defeated))]
    return TextObservation(sorted(visible), inventory, vitals, status)


def achievements(state: WorldState) -> Dict[str, bool]:
    return dict(state.achievements)


class _StepEvents:
    def __init__(self, state: WorldState):
        self.state = state
        self.events: List[str] = []
        self.unlocked: List[str] = []

    def fire(self, name: str):
        self.events.append(name)
        if not self.state.achievements[name]:
            self.state.achievements[name] = True
            self.unlocked.append(name)


def _add(state: WorldState, item: str, amount: int=1) -> bool:
    if state.inventory[item] + amount > MAX_VITAL:
        return False
    state.inventory[item] += amount
    return True


def _has(state: WorldState, uses: Dict[str, int]) -> bool:
    return all(state.inventory.get(item, 0) >= n for item, n in uses.items())


def _consume(state: WorldState, uses: Dict[str, int]):
    for item, n in uses.items():
        state.inventory[item] -= n


def _damage(state: WorldState) -> int:
    return max([1] + [d for sword, d in options.SWORD_DAMAGE.items() if state.inventory[sword] > 0])


def _hurt_player(state: WorldState, amount: int):
    state.vitals['health'] = max(0, state.vitals['health'] - amount)


def _attack(state: WorldState, creature: Creature, ev: _StepEvents):
    creature.health -= _damage(state)
    if creature.health > 0:
        return
    state.creatures.remove(creature)
    if creature.kind == 'cow':
        state.vitals['food'] = min(MAX_VITAL, state.vitals['food'] + state.config.eat['cow'])
        state.counters['food'] = 0
        ev.fire('eat_cow')
    else:
        state.defeated.append(creature.kind)
        ev.fire(f'defeat_{creature.kind}')


def _interact(state: WorldState, ev: _StepEvents):
    cfg = state.config
    target = state.target()
    if not state.in_bounds(target):
        return
    creature = state.creature_at(target)
    if creature is not None:
        _attack(state, creature, ev)
        return
    name = state.material(target)
    if name in cfg.collect:
        recipe = cfg.collect[name]
        if any(state.inventory[tool] < 1 for tool in recipe.get('require', ())):
            return
        item = recipe['receive']
        if _add(state, item):
            if recipe.get('leaves'):
                state.tiles[target] = _CODE[recipe['leaves']]
            ev.fire(f'collect_{item}')
    elif name == 'water':
        state.vitals['drink'] = min(MAX_VITAL, state.vitals['drink'] + cfg.drink)
        state.counters['drink'] = 0
        ev.fire('collect_water')
    elif name == 'grass':
        if state.rng.random() < cfg.sapling_chance and _add(state, 'sapling'):
            ev.fire('collect_sapling')
    elif name == 'plant' and state.plants.get(target, 0) >= cfg.ripen_steps:
        del state.plants[target]
        state.tiles[target] = _CODE['grass']
        state.vitals['food'] = min(MAX_VITAL, state.vitals['food'] + cfg.eat['ripe_plant'])
        state.counters['food'] = 0
        ev.fire('eat_plant')


def _place(state: WorldState, what: str, ev: _StepEvents):
    recipe = state.config.place.get(what)
    target = state.target()
    if recipe is None or not state.in_bounds(target):
        return
    if state.material(target) not in recipe.get('where', WALKABLE) or state.creature_at(target):
        return
    if not _has(state, recipe.get('uses', {})):
        return
    _consume(state, recipe.get('uses', {}))
    state.tiles[target] = _CODE[recipe.get('tile', what)]
    if what == 'plant':
        state.plants[target] = 0
    ev.fire(f'place_{what}')


def _nearby(state: WorldState, radius: int) -> set:
    px, py = state.pos
    found = set()
    for x in range(px - radius, px + radius + 1):
        for y in range(py - radius, py + radius + 1):
            if state.in_bounds((x, y)):
                found.add(MATERIALS[state.tiles[x, y]])
    return found


def _make(state: WorldState, item: str, ev: _StepEvents):
    recipe = state.config.make.get(item)
    if recipe is None:
        return
    if not set(recipe.get('nearby', ())) <= _nearby(state, state.config.nearby_radius):
        return
    if not _has(state, recipe.get('uses', {})) or state.inventory[item] >= MAX_VITAL:
        return
    _consume(state, recipe.get('uses', {}))
    state.inventory[item] += 1
    ev.fire(f'make_{item}')


def _apply(state: WorldState, action: Action, ev: _StepEvents):
    name = options.ACTIONS[action]
    if name.startswith('move_'):
        state.facing = options.DIRECTIONS[name[len('move_'):]]
        if state.is_free(state.target()):
            state.pos = state.target()
    elif name == 'interact':
        _interact(state, ev)
    elif name.startswith('place_'):
        _place(state, name[len('place_'):], ev)
    elif name.startswith('make_'):
        _make(state, name[len('make_'):], ev)
    elif name == 'sleep':
        if state.vitals['energy'] < MAX_VITAL:
            state.sleeping = True
            ev.fire('sleep')


def _tick(state: WorldState, key: str, interval: int) -> bool:
    state.counters[key] += 1
    if state.counters[key] >= interval:
        state.counters[key] = 0
        return True
    return False


def _update_life(state: WorldState):
    cfg = state.config
    v = state.vitals
    if _tick(state, 'food', cfg.decay['food']):
        v['food'] = max(0, v['food'] - 1)
    if _tick(state, 'drink', cfg.decay['drink']):
        v['drink'] = max(0, v['drink'] - 1)
    if state.sleeping:
        if _tick(state, 'rest', cfg.sleep_restore):
            v['energy'] = min(MAX_VITAL, v['energy'] + 1)
        if v['energy'] >= MAX_VITAL:
            state.sleeping = False
    elif _tick(state, 'energy', cfg.decay['energy']):
        v['energy'] = max(0, v['energy'] - 1)
    if _tick(state, 'recover', cfg.recover_interval):
        if all(v[k] > 0 for k in ('food', 'drink', 'energy')):
            v['health'] = min(MAX_VITAL, v['health'] + 1)
        else:
            _hurt_player(state, 1)


def _distance(a: Pos, b: Pos) -> int:
    return abs(a[0] - b[0]) + abs(a[1] - b[1])


def _random_move(state: WorldState, creature: Creature):
    if state.rng.random() >= state.config.move_chance:
        return
    dx, dy = list(options.DIRECTIONS.values())[int(state.rng.integers(4))]
    p = (creature.pos[0] + dx, creature.pos[1] + dy)
    if creature.home is not None and _distance(p, creature.home) > state.config.skeleton_leash:
        return
    if state.is_free(p):
        creature.pos = p


def _approach(state: WorldState, creature: Creature):
    cx, cy = creature.pos
    dx, dy = state.pos[0] - cx, state.pos[1] - cy
    steps = [(int(np.sign(dx)), 0), (0, int(np.sign(dy)))]
    if abs(dy) > abs(dx):
        steps.reverse()
    for sx, sy in steps:
        p = (cx + sx, cy + sy)
        if (sx or sy) and state.is_free(p):
            creature.pos = p
            return


def _update_creatures(state: WorldState):
    cfg = state.config
    for creature in list(state.creatures):
        if creature.kind == 'cow':
            _random_move(state, creature)
            continue
        creature.cooldown = max(0, creature.cooldown - 1)
        dist = _distance(creature.pos, state.pos)
        if dist <= 1:
            if creature.cooldown == 0:
                damage = cfg.sleeping_damage if state.sleeping else cfg.creature_damage[creature.kind]
                _hurt_player(state, damage)
                state.sleeping = False
                creature.cooldown = cfg.attack_cooldown
        elif creature.kind == 'zombie' and dist <= cfg.chase_radius and state.rng.random() < 0.8:
            _approach(state, creature)
        else:
            _random_move(state, creature)

    zombies = sum(1 for c in state.creatures if c.kind == 'zombie')
    if state.is_night() and zombies < cfg.night_zombies and state.rng.random() < cfg.zombie_spawn_chance:
        grass = _CODE['grass']
        cells = [tuple(int(i) for i in p) for p in np.argwhere(state.tiles == grass)]
        cells = [p for p in cells if _distance(p, state.pos) >= 4 and state.is_free(p)]
        if cells:
            p = cells[int(state.rng.integers(len(cells)))]
            state.creatures.append(Creature('zombie', p, cfg.creature_health['zombie']))


def step(state: WorldState, action: Union[Action, int, str]) -> Tuple[WorldState, TextObservation, float, bool, Dict[str, Any]]:
    """
    한 스텝 진행 (state를 제자리에서 갱신해 그대로 돌려준다)
    reward = 새 업적 수 + 0.1 * 체력 변화
    """
    if state.done:
        raise EpisodeDoneError('step called on a finished episode; call reset first')
    action = as_action(action)
    if state.sleeping:
        action = Action.NOOP
    health_before = state.vitals['health']
    state.defeated = []
    ev = _StepEvents(state)

    _apply(state, action, ev)
    _update_life(state)
    for p in state.plants:
        state.plants[p] += 1
    _update_creatures(state)

    state.step += 1
    state.done = state.vitals['health'] <= 0 or state.step >= state.config.max_steps
    health_delta = state.vitals['health'] - health_before
    reward = len(ev.unlocked) + 0.1 * health_delta
    info = {
        'unlocked': ev.unlocked,
        'events': ev.events,
        'health_delta': health_delta,
        'night': state.is_night(),
        'dead': state.vitals['health'] <= 0,
    }
    return state, render_text(state), reward, state.done, info


def as_action(action: Union[Action, int, str]) -> Action:
    if isinstance(action, str):
        try:
            return Action[action.upper()]
        except KeyError:
            raise ValueError(f'unknown action {action!r}') from None
    return Action(int(action))


class GridCraft:
    """reset/step을 묶은 환경 객체. 에피소드마다 seed를 바꿔 새 지도를 만든다"""

    def __init__(self, config: Optional[WorldConfig]=None):
        self.config = config or WorldConfig.from_file()
        self.state: Optional[WorldState] = None

    def reset(self, seed: Optional[int]=None) -> TextObservation:
        self.state, obs = reset(self.config, seed)
        return obs

    def step(self, action) -> Tuple[TextObservation, float, bool, Dict[str, Any]]:
        if self.state is None:
            raise EpisodeDoneError('reset must be called before step')
        _, obs, reward, done, info = step(self.state, action)
        return obs, reward, done, info

    def render_text(self) -> TextObservation:
        return render_text(self.state)

    def achievements(self) -> Dict[str, bool]:
        return achievements(self.state)
