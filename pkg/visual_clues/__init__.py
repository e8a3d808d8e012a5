"""Visual-clue paragraph captioning toolkit.

This package provides:
- A model gateway over pluggable backends (HTTP services or seeded mocks)
- Visual clue extraction (tags, caption, region descriptions)
- Prompt serialization and candidate synthesis
- Candidate selection and sentence filtering
- Scene-graph extraction from dependency parses and the SPIPE metric
- A VQA harness (generative and discriminative protocols)
- An orchestrator for corpus runs (DescribePipeline)
"""

from .config import BackendConfig, RunConfig, SamplingParams
from .clues import BoundingBox, RegionDescription, VisualClues
from .embedding import UnitEmbedding
from .gateway import ModelGateway
from .images import ImageRef
from .vocabulary import Vocabulary
from .extraction import ClueExtractor, ExtractionParams, extract_clues
from .prompting import ClueAblation, TaskEnding, serialize, synthesis_plan
from .selection import CandidateJudge, CandidateParagraph, split_sentences
from .pipeline import DescribePipeline, RunRecord
from .vqa import AnswerIndex, VqaEvaluator, VqaItem
