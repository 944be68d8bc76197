"""
GridCraft 기본값
"""
from ..utils.paths import ASSETS_DIR

WORLD_CONFIG = ASSETS_DIR / 'world.yaml'

ACHIEVEMENTS = (
    'collect_coal', 'collect_diamond', 'collect_water', 'collect_iron', 'collect_sapling',
    'collect_stone', 'collect_wood', 'defeat_skeleton', 'defeat_zombie', 'eat_cow', 'eat_plant',
    'make_iron_pickaxe', 'make_iron_sword', 'make_stone_pickaxe', 'make_stone_sword',
    'make_wood_pickaxe', 'make_wood_sword', 'place_furnace', 'place_plant', 'place_stone',
    'place_table', 'sleep',
)

GRID_SIZE = (16, 16)
VIEW_SIZE = (7, 5)  # 가로 x 세로
MAX_STEPS = 1000  # 에피소드 스텝 상한
MAX_VITAL = 9

# 행동 순서가 곧 정수 인코딩
ACTIONS = (
    'noop', 'move_north', 'move_east', 'move_south', 'move_west', 'interact',
    'place_table', 'place_furnace', 'place_stone', 'place_plant',
    'make_wood_pickaxe', 'make_stone_pickaxe', 'make_iron_pickaxe',
    'make_wood_sword', 'make_stone_sword', 'make_iron_sword', 'sleep',
)
DIRECTIONS = {
    'north': (0, -1),
    'east': (1, 0),
    'south': (0, 1),
    'west': (-1, 0),
}

MATERIALS = (
    'grass', 'sand', 'path', 'water', 'tree', 'rock', 'coal_ore', 'iron_ore', 'diamond_ore',
    'table', 'furnace', 'plant',
)
WALKABLE = ('grass', 'sand', 'path')
ITEMS = (
    'sapling', 'wood', 'stone', 'coal', 'iron', 'diamond',
    'wood_pickaxe', 'stone_pickaxe', 'iron_pickaxe', 'wood_sword', 'stone_sword', 'iron_sword',
)
CREATURES = ('cow', 'zombie', 'skeleton')
SWORD_DAMAGE = {'wood_sword': 2, 'stone_sword': 3, 'iron_sword': 5}
GEN_ATTEMPTS = 50
