"""
Ranking a handful of knowledge-graph facts
==========================================

Builds a small candidate set by hand, embeds it with the deterministic
mock encoder, and prints how each ranking strategy orders the same facts.
Run from the repository root: python3 demos/01_ranking_strategies.py
"""

from kgrank.kg.types import ConceptRef, Triple
from kgrank.providers.mock import MockCrossScorer, MockEmbedder
from kgrank.ranking import MmrParams, rank_mmr, rank_similarity, rerank_top_p, textualize

# A question and six facts about hyperglycemia. The first two say nearly
# the same thing, which is exactly the case MMR is built for.
question = "Can high blood sugar cause nearsightedness?"

facts = [
    ("high blood sugar", "may_cause", "temporary nearsightedness"),
    ("high blood sugar", "causes", "nearsightedness"),
    ("hyperglycemia", "isa", "glucose metabolism disorder"),
    ("hyperglycemia", "may_be_treated_by", "insulin"),
    ("myopia", "isa", "refractive error"),
    ("insulin", "isa", "hormone"),
]


def concept(name):
    return ConceptRef(id=name, preferred_name=name, source="umls")


triples = [
    Triple(head=concept(h), relation=r, tail=concept(t), source="umls") for h, r, t in facts
]

# Embed the question and every textualized triple with the mock encoder.
# It is a toy model, but a deterministic one, so this script always
# prints the same orderings.
embedder = MockEmbedder(dim=32)
texts = [textualize(t) for t in triples]
vectors = embedder.embed([question] + texts)
q_vec, candidate_vecs = vectors[0], vectors[1:]
candidates = list(zip(triples, candidate_vecs))


def show(title, ranked):
    print(f"\n{title}")
    for rt in ranked:
        print(f"  {rt.rank}. [{rt.score:+.3f}] {textualize(rt.triple)}")


# Plain cosine similarity: the two near-duplicates share most of their
# words with the question, so they sit together at the top.
show("similarity", rank_similarity(q_vec, candidates))

# MMR with a growing redundancy penalty: once the first near-duplicate
# is picked, the second is discounted and more varied facts move up.
# The penalty is deliberately strong so the reorder shows at this scale.
params = MmrParams(w_base=0.75, delta=0.05, k=len(candidates))
show(f"mmr (w_base={params.w_base}, delta={params.delta})", rank_mmr(q_vec, candidates, params))

# Cross-encoder re-ranking: re-score the similarity ranking's top pool
# against the question with a pairwise scorer and keep the best three.
reranked = rerank_top_p(question, rank_similarity(q_vec, candidates), 3, MockCrossScorer())
show("similarity + cross-encoder rerank (p=3)", reranked)
