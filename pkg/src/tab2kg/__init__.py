"""tab2kg: profile-based semantic table interpretation.

Interprets delimited data tables against a domain ontology without any
instance lookup: statistical column profiles are matched to data type
relation profiles by a one-shot Siamese similarity model, a minimal
connected data graph plan is constructed, and RML mappings are emitted and
materialized into an RDF data graph.
"""

__version__ = "0.1.0"

from .tabular import ColumnTyping, DataTable, Dialect, identify_types, parse_table
from .rdf import (
    DomainOntology,
    RdfGraph,
    Term,
    extract_ontology,
    literals_of_relation,
    parse_turtle,
    serialize_turtle,
)
from .profiler import (
    ColumnProfile,
    DomainProfile,
    FeatureVector,
    RelationProfile,
    compute_feature_vector,
    profile_domain,
    profile_table,
)
from .catalog import export_profile, import_profile
from .matcher import (
    SiameseModel,
    TrainConfig,
    TrainingPair,
    candidate_mappings,
    load_model,
    normalize_pair,
    save_model,
    score_pair,
    train,
)
from .graphgen import DataGraphPlan, build_plan, select_mappings
from .rml import emit_rml, materialize
from .datagen import (
    GenConfig,
    TrainingInstance,
    evaluate,
    extract_pairwise,
    extract_setbased,
    generate_tables,
    make_training_pairs,
    split_kg,
)

__all__ = [
    "ColumnTyping", "DataTable", "Dialect", "identify_types", "parse_table",
    "DomainOntology", "RdfGraph", "Term", "extract_ontology",
    "literals_of_relation", "parse_turtle", "serialize_turtle",
    "ColumnProfile", "DomainProfile", "FeatureVector", "RelationProfile",
    "compute_feature_vector", "profile_domain", "profile_table",
    "export_profile", "import_profile",
    "SiameseModel", "TrainConfig", "TrainingPair", "candidate_mappings",
    "load_model", "normalize_pair", "save_model", "score_pair", "train",
    "DataGraphPlan", "build_plan", "select_mappings",
    "emit_rml", "materialize",
    "GenConfig", "TrainingInstance", "evaluate", "extract_pairwise",
    "extract_setbased", "generate_tables", "make_training_pairs", "split_kg",
]
