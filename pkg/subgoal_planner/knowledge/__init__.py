from .graph import (Condition, Counter, Finding, SlotKey, StateChangeSpec, SubgoalGraph, SubgoalNode,
                    ValidationReport, graph_from_document, load_graph, validate_graph)
from .verbalize import format_weight, parse_verbalized, structure_of, verbalize
from .entity_kb import (EntityKB, EntityLookup, EntityRecord, extract_entity_names, load_kb,
                        lookup_entities, render_entities)
from .retrieval import SubgoalDetail, render_details, subgoal_details
from .extract import ExtractionResult, extract_knowledge
