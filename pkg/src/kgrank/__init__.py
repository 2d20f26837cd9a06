"""Knowledge-graph-augmented question answering with ranked triple retrieval."""

__version__ = "0.1.0"

from kgrank.datasets import DatasetStats, QAPair, load, match_short_answer, stats
from kgrank.metrics import PRF, JudgeVerdict, judge_pairwise, rouge_l, rouge_n
from kgrank.pipeline import AnswerRecord, answer, build_prompt, extract_entities, run_pipeline
from kgrank.ranking import (
    MmrParams,
    RankedTriple,
    cosine,
    rank_mmr,
    rank_similarity,
    rerank_top_p,
    textualize,
)

__all__ = [
    "AnswerRecord",
    "DatasetStats",
    "JudgeVerdict",
    "MmrParams",
    "PRF",
    "QAPair",
    "RankedTriple",
    "answer",
    "build_prompt",
    "cosine",
    "extract_entities",
    "judge_pairwise",
    "load",
    "match_short_answer",
    "rank_mmr",
    "rank_similarity",
    "rerank_top_p",
    "rouge_l",
    "rouge_n",
    "run_pipeline",
    "stats",
    "textualize",
]
