"""
Scoring answers: ROUGE, short-answer accuracy, and the pairwise judge
=====================================================================

Walks through the three evaluation layers on tiny hand-checkable inputs.
Run from the repository root: python3 demos/03_scoring_answers.py
"""

from kgrank.datasets import QAPair, match_short_answer
from kgrank.metrics import evaluate_run, judge_pairwise, render_report_csv, rouge_l, rouge_n
from kgrank.providers.mock import MockCompleter

# ROUGE on a classic miniature: candidate "the cat sat" against the
# reference "the cat". The LCS is "the cat", so precision is 2/3 and
# recall is 1, giving f1 = 0.8.
prf = rouge_l("the cat sat", "the cat")
print(f"rouge_l('the cat sat', 'the cat') -> p={prf.precision:.3f} r={prf.recall:.3f} f1={prf.f1}")
print(f"rouge_2 on the same pair          -> {rouge_n('the cat sat', 'the cat', 2)}")

# Short-answer accuracy ignores case, punctuation, and articles, and
# accepts the gold answer embedded as a whole token run.
for candidate in ("1", "The answer is 1.", "2"):
    print(f"match_short_answer({candidate!r}, '1') -> {match_short_answer(candidate, '1')}")

# Corpus evaluation: per-question best-over-references, then arithmetic
# means. The report renders to JSON and CSV.
pairs = [
    QAPair(id="q1", question="Q1?", references=("the cat", "a dog"), field="med", dataset="demo"),
    QAPair(id="q2", question="Q2?", references=("paris",), field="gen", dataset="demo"),
]
report = evaluate_run({"q1": "the cat sat", "q2": "paris"}, pairs, ("rouge_1", "rouge_l"))
print("\nreport.csv:")
print(render_report_csv(report))

# The pairwise judge asks an LLM twice with the answer order swapped and
# only keeps a winner when both orderings agree, so a position-biased
# judge collapses to a tie instead of silently favoring slot A. The mock
# completer always answers "Winner: Tie".
verdict = judge_pairwise(
    "Does aspirin reduce fever?",
    "Yes, aspirin is an antipyretic.",
    "Aspirin lowers fever by inhibiting prostaglandin synthesis.",
    MockCompleter(),
)
print(f"judge verdict: {verdict.winner} ({verdict.rationale})")
