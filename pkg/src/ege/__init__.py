"""Schema-guided event graph engine.

Instantiates curated hierarchical event schemas against extracted instance
event graphs, validates and lays out the merged result, traces every
element to multimedia provenance, and serves an editing API with undo/redo.
"""

from .editor import (
    EditSession,
    apply_batch,
    apply_edit,
    filter_by_confidence,
    filter_by_entity,
    redo,
    undo,
)
from .formats import (
    CorpusFile,
    InstanceFile,
    SchemaFile,
    parse_corpus,
    parse_graph,
    parse_instance,
    parse_schema,
    serialize_corpus,
    serialize_graph,
    serialize_instance,
    serialize_schema,
)
from .layout import ExpansionState, Layout, compute_layout, minimap_view, toggle_expansion
from .matcher import MatchConfig, MatchResult, match_graphs, score_match
from .model import (
    Argument,
    Diagnostic,
    EngineError,
    EntityNode,
    EventNode,
    EventType,
    GateSpec,
    GateStatus,
    ImageProvenance,
    InstantiatedGraph,
    TemporalEdge,
    TextProvenance,
    check_gates,
    detect_temporal_cycles,
    entity_occurrence_counts,
    validate_graph,
)
from .provenance import ProvenanceIndex, check_corpus, paragraph_bounds
from .service import SessionStore, create_app, graph_hash, replay_session_dir

__version__ = "0.1.0"
