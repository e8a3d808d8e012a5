from .baseline import baseline_regions, naive_baseline_graph
from .conllu import DependencyTree, Edge, Token, ingest_dependencies, read_conllu
from .graph import SceneGraph, SemanticTuple, tuples
from .lexicon import SynonymLexicon, lemmatize, synonym_match
from .metric import SpipeScore, breakdown_frame, corpus_scores, match_tuples, spipe
from .rules import graph_from_dependencies, graph_from_parses

__all__ = [
    "DependencyTree", "Edge", "Token", "ingest_dependencies", "read_conllu",
    "SceneGraph", "SemanticTuple", "tuples",
    "SynonymLexicon", "lemmatize", "synonym_match",
    "SpipeScore", "breakdown_frame", "corpus_scores", "match_tuples", "spipe",
    "graph_from_dependencies", "graph_from_parses",
    "baseline_regions", "naive_baseline_graph",
]
