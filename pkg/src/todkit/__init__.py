"""Non-neural machinery for task-oriented dialog systems.

Parsing and serialization of hierarchical belief/action states, action-tree
similarity via ordered tree edit distance, curriculum-scheduled negative
action sampling with loss gating, turn-level auxiliary supervision targets,
entity database matching, and Inform/Success/BLEU/Combined evaluation.
"""

from ._accel import NUMBA_ENABLED
from .codec import delexicalize, parse_action, parse_belief, serialize_action, serialize_belief
from .db import DbBucket, EntityDb, Entity, bucketize, load_db, query, save_db
from .errors import CorpusError, MatrixFormatError, ParseError, TodkitError
from .evaluate import (
    EvalReport,
    Prediction,
    combined_score,
    corpus_bleu,
    evaluate,
    gold_predictions,
    inform_dialog,
    success_dialog,
)
from .labels import (
    AuxLabelSet,
    act_classes,
    action_type_labels,
    bernoulli_multilabel_grad,
    bernoulli_multilabel_loss,
    categorical_change_grad,
    categorical_change_loss,
    extract_labels,
    keyword_labels,
    slot_change_labels,
    slot_classes,
    slot_type_labels,
    total_aux_loss,
)
from .matrix import (
    ActionVocab,
    SimilarityMatrix,
    build_matrix,
    collect_vocab,
    load_matrix,
    sampling_row,
    save_matrix,
)
from .model import (
    ActionSeq,
    BeliefState,
    Dialog,
    DomainGoal,
    END_OF_TURN,
    Goal,
    Ontology,
    Turn,
    build_context,
    load_ontology,
    read_corpus,
    save_ontology,
    turn_end_positions,
    write_corpus,
)
from .scheduler import (
    NegativeSampler,
    SampleDecision,
    Schedule,
    decide,
    decide_at_p,
    gate_losses,
    keep_probability,
    serve_stream,
)
from .synth import SamplerStats, SynthConfig, generate_corpus, validate_sampler
from .tree import (
    ActionTree,
    ROOT_LABEL,
    pack_trees,
    pairwise_distances,
    similarity,
    to_tree,
    tree_edit_distance,
    tree_size,
)

__version__ = "0.1.0"
