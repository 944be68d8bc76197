"""
엔티티 지식베이스
"""
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Set, Tuple, Union

from ..errors import KnowledgeSchemaError
from .graph import SubgoalGraph, read_yaml


@dataclass(frozen=True)
class EntityRecord:
    name: str
    entity_type: str
    description: str
    related_subgoals: Tuple[str, ...] = ()

    def render(self) -> str:
        related = ', '.join(self.related_subgoals) or 'none'
        return f'{self.name} ({self.entity_type}): {self.description} Related subgoals: {related}.'


class EntityKB:
    def __init__(self, records: Iterable[EntityRecord]=()):
        self.records: Dict[str, EntityRecord] = {}
        for r in records:
            if r.name in self.records:
                raise ValueError(f'duplicate entity {r.name}')
            self.records[r.name] = r
        self._pattern: Optional[re.Pattern] = None

    def __contains__(self, name: str) -> bool:
        return name in self.records

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self):
        return iter(self.records.values())

    def get(self, name: str) -> Optional[EntityRecord]:
        return self.records.get(name)

    @property
    def pattern(self) -> Optional[re.Pattern]:
        # 긴 이름 우선 매칭 (stone_pickaxe가 stone보다 먼저)
        if self._pattern is None and self.records:
            names = sorted(self.records, key=lambda n: (-len(n), n))
            alternation = '|'.join(re.escape(n) for n in names)
            self._pattern = re.compile(
                rf'(?<![a-z0-9_])({alternation})(?![a-z0-9_])', re.IGNORECASE)
        return self._pattern


@dataclass
class EntityLookup:
    records: List[EntityRecord] = field(default_factory=list)
    unknown: List[str] = field(default_factory=list)


def kb_from_document(doc: Any, source: str='<document>',
                     graph: Optional[SubgoalGraph]=None) -> EntityKB:
    if not isinstance(doc, dict) or not isinstance(doc.get('entities'), list):
        raise KnowledgeSchemaError('missing top-level "entities" list', source)
    records = []
    names: Set[str] = set()
    for i, raw in enumerate(doc['entities']):
        loc = f'{source}: entities[{i}]'
        if not isinstance(raw, dict):
            raise KnowledgeSchemaError('entity must be a mapping', loc)
        name = raw.get('name')
        if not isinstance(name, str) or not name:
            raise KnowledgeSchemaError('name must be a non-empty string', f'{loc}.name')
        if name in names:
            raise KnowledgeSchemaError(f'duplicate entity {name}', f'{loc}.name')
        names.add(name)
        related = raw.get('related_subgoals') or []
        if not isinstance(related, list):
            raise KnowledgeSchemaError('related_subgoals must be a list', f'{loc}.related_subgoals')
        for j, s in enumerate(related):
            rloc = f'{loc}.related_subgoals[{j}]'
            if not isinstance(s, str):
                raise KnowledgeSchemaError(f'entity {name}: related subgoal must be an id, got {s!r}', rloc)
            if graph is not None and s not in graph:
                raise KnowledgeSchemaError(f'entity {name}: unknown subgoal {s}', rloc)
        records.append(EntityRecord(
            name=name,
            entity_type=str(raw.get('entity_type') or 'unknown'),
            description=str(raw.get('description') or ''),
            related_subgoals=tuple(related),
        ))
    return EntityKB(records)


def load_kb(path: Union[str, Path], graph: Optional[SubgoalGraph]=None) -> EntityKB:
    return kb_from_document(read_yaml(path), source=str(path), graph=graph)


def lookup_entities(kb: EntityKB, names: Iterable[str]) -> EntityLookup:
    """K(e) 조회. 없는 이름은 unknown으로 따로 보고"""
    result = EntityLookup()
    for name in sorted(set(names)):
        record = kb.get(name)
        if record is None:
            result.unknown.append(name)
        else:
            result.records.append(record)
    return result


def extract_entity_names(obs, kb: EntityKB) -> Set[str]:
    """관측 텍스트에서 KB 엔티티 이름 추출 (대소문자 무시, 최장 일치)"""
    text = obs if isinstance(obs, str) else obs.render()
    if not text or kb.pattern is None:
        return set()
    lowered = {n.lower(): n for n in kb.records}
    return {lowered[m.group(1).lower()] for m in kb.pattern.finditer(text)}


def render_entities(records: Iterable[EntityRecord]) -> str:
    lines = [r.render() for r in records]
    return '\n'.join(lines) if lines else 'none'
