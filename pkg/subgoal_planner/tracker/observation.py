"""
텍스트 관측 / 객체 스냅샷 / 상태 변화
"""
import re
from collections import Counter as Multiset
from dataclasses import dataclass, field
from typing import Dict, List, Tuple, Union

from ..errors import TrackerError
from .options import NONE_TEXT

_INVENTORY_ITEM = re.compile(r'^([a-z0-9_]+) x(\d+)$')
_VITAL_ITEM = re.compile(r'^([a-z0-9_]+) (\d+)$')


def _section(items: List[str]) -> str:
    return ', '.join(items) if items else NONE_TEXT


def _items(body: str) -> List[str]:
    body = body.strip()
    if body == NONE_TEXT or not body:
        return []
    return [b.strip() for b in body.split(',')]


@dataclass
class TextObservation:
    visible: List[str] = field(default_factory=list)
    inventory: List[Tuple[str, int]] = field(default_factory=list)
    vitals: List[Tuple[str, int]] = field(default_factory=list)
    status: List[str] = field(default_factory=list)

    def render(self) -> str:
        return '\n'.join([
            'You see: ' + _section(sorted(self.visible)),
            'Inventory: ' + _section([f'{k} x{v}' for k, v in self.inventory if v > 0]),
            'Vitals: ' + _section([f'{k} {v}' for k, v in self.vitals]),
            'Status: ' + _section(list(self.status)),
        ])

    def __str__(self):
        return self.render()

    @classmethod
    def parse(cls, text: str) -> 'TextObservation':
        lines = text.strip('\n').split('\n')
        prefixes = ('You see:', 'Inventory:', 'Vitals:', 'Status:')
        if len(lines) != 4 or not all(l.startswith(p) for l, p in zip(lines, prefixes)):
            raise TrackerError('observation must have the four lines You see / Inventory / Vitals / Status')
        bodies = [l[len(p):] for l, p in zip(lines, prefixes)]

        inventory = []
        for item in _items(bodies[1]):
            m = _INVENTORY_ITEM.match(item)
            if not m:
                raise TrackerError(f'bad inventory item {item!r}')
            inventory.append((m.group(1), int(m.group(2))))
        vitals = []
        for item in _items(bodies[2]):
            m = _VITAL_ITEM.match(item)
            if not m:
                raise TrackerError(f'bad vital {item!r}')
            vitals.append((m.group(1), int(m.group(2))))
        return cls(sorted(_items(bodies[0])), inventory, vitals, _items(bodies[3]))

    @classmethod
    def empty(cls) -> 'TextObservation':
        return cls()


ObservationLike = Union[TextObservation, str]


def as_observation(obs: ObservationLike) -> TextObservation:
    return obs if isinstance(obs, TextObservation) else TextObservation.parse(obs)


@dataclass(frozen=True)
class ObjectSnapshot:
    entries: Dict[str, int] = field(default_factory=dict)

    def __len__(self):
        return len(self.entries)

    def get(self, name: str, default: int=0) -> int:
        return self.entries.get(name, default)


@dataclass(frozen=True)
class StateDelta:
    changed: Dict[str, int] = field(default_factory=dict)
    appeared: Dict[str, int] = field(default_factory=dict)  # 이름 -> 나타난 값
    disappeared: Dict[str, int] = field(default_factory=dict)  # 이름 -> 사라지기 전 값

    def __bool__(self):
        return bool(self.changed or self.appeared or self.disappeared)

    def as_dict(self) -> Dict[str, Dict[str, int]]:
        return {
            'changed': dict(sorted(self.changed.items())),
            'appeared': dict(sorted(self.appeared.items())),
            'disappeared': dict(sorted(self.disappeared.items())),
        }


def extract_objects(obs: ObservationLike) -> ObjectSnapshot:
    """보이는 엔티티(개체 수) + 인벤토리 + 활력치 + 상태 플래그(1)"""
    obs = as_observation(obs)
    entries: Dict[str, int] = dict(Multiset(obs.visible))
    for name, count in obs.inventory:
        if count > 0:
            entries[name] = count
    for name, value in obs.vitals:
        entries[name] = value
    for flag in obs.status:
        entries[flag] = 1
    return ObjectSnapshot(entries)


def diff(prev: ObjectSnapshot, curr: ObjectSnapshot) -> StateDelta:
    changed, appeared, disappeared = {}, {}, {}
    for name, value in curr.entries.items():
        if name not in prev.entries:
            appeared[name] = value
        elif value != prev.entries[name]:
            changed[name] = value - prev.entries[name]
    for name, value in prev.entries.items():
        if name not in curr.entries:
            disappeared[name] = value
    return StateDelta(changed, appeared, disappeared)
