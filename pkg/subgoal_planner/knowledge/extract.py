"""
배경 문서 -> 그래프/KB 초안 (오프라인, LLM 2단계 추출)

1단계: 서브골 + 속성, 2단계: 1단계 결과를 문맥으로 엔티티.
초안은 사람이 검토한 뒤에만 load_graph/load_kb로 쓴다.
"""
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Sequence, Tuple, Union

import yaml

from ..errors import ExtractionError, GraphLoadError
from ..llm.backends import sanitize
from ..utils.templates import fill_template, load_template
from .entity_kb import kb_from_document
from .graph import SubgoalGraph, graph_from_document, validate_graph

logger = logging.getLogger(__name__)

GRAPH_DRAFT = 'graph_draft.yaml'
KB_DRAFT = 'kb_draft.yaml'


@dataclass
class ExtractionResult:
    graph_path: Path
    kb_path: Path
    graph_findings: List[str] = field(default_factory=list)
    kb_findings: List[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.graph_findings and not self.kb_findings


def _write_draft(path: Path, text: str, findings: List[str]):
    path.write_text(text if text.endswith('\n') else text + '\n', encoding='utf-8')
    findings_path = path.with_name(path.name + '.findings.txt')
    if findings:
        findings_path.write_text('\n'.join(findings) + '\n', encoding='utf-8')
        logger.warning('%s: %d finding(s), see %s', path.name, len(findings), findings_path.name)
    elif findings_path.exists():
        findings_path.unlink()


def _check_graph(text: str) -> Tuple[Optional[SubgoalGraph], List[str]]:
    try:
        graph = graph_from_document(yaml.safe_load(text), source=GRAPH_DRAFT)
    except yaml.YAMLError as e:
        return None, [f'[schema] not a YAML document: {e}']
    except GraphLoadError as e:
        return None, [f'[schema] {e}']
    return graph, [str(f) for f in validate_graph(graph).findings]


def _check_kb(text: str, graph: Optional[SubgoalGraph]) -> List[str]:
    try:
        kb_from_document(yaml.safe_load(text), source=KB_DRAFT, graph=graph)
    except yaml.YAMLError as e:
        return [f'[schema] not a YAML document: {e}']
    except GraphLoadError as e:
        return [f'[schema] {e}']
    return []


def extract_knowledge(docs: Sequence[str], gateway, out_dir: Union[str, Path]) -> ExtractionResult:
    if not docs:
        raise ExtractionError('at least one background document is required')
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    documents = '\n\n'.join(d.strip() for d in docs)
    system = load_template('extract_system')

    logger.info('extracting subgoals from %d document(s)', len(docs))
    req = gateway.request('extractor', system, fill_template(
        load_template('extract_subgoals'), {'documents': documents}))
    subgoal_text = sanitize(gateway.complete(req))
    graph, graph_findings = _check_graph(subgoal_text)
    graph_path = out_dir / GRAPH_DRAFT
    _write_draft(graph_path, subgoal_text, graph_findings)

    logger.info('extracting entities')
    req = gateway.request('extractor', system, fill_template(
        load_template('extract_entities'), {'documents': documents, 'subgoals': subgoal_text}))
    entity_text = sanitize(gateway.complete(req))
    kb_findings = _check_kb(entity_text, graph)
    kb_path = out_dir / KB_DRAFT
    _write_draft(kb_path, entity_text, kb_findings)

    return ExtractionResult(graph_path, kb_path, graph_findings, kb_findings)
