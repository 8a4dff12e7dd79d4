"""Measure recommendation quality with a held-out replay.

Holds out a quarter of the corpus at notebook granularity, mines the rest,
and checks how often the actual next step of a held-out notebook appears
in the top-k recommendations. The random baseline is what uniform guessing
over each state's successors would score.
"""

import tempfile

from lodestar.demo_corpus import write_demo_corpus
from lodestar.harness import max_out_degree, replay, run_mine
from lodestar.mining import MiningConfig

corpus_dir = tempfile.mkdtemp(prefix="lodestar-demo-corpus-")
write_demo_corpus(corpus_dir, notebooks=20, seed=0)

outcome = run_mine(corpus_dir, MiningConfig(k=6, seed=42), holdout=0.25)
print(
    f"trained on {len(outcome.result.docs)} notebooks, "
    f"holding out {len(outcome.held_out)} for evaluation"
)

in_sample = replay(
    outcome.graph,
    outcome.result.sequences,
    k=max_out_degree(outcome.graph),
    in_sample=True,
)
print(
    f"\nsanity check, in-sample at k=max out-degree ({in_sample['k']}): "
    f"hit rate {in_sample['hit_rate']:.3f} (must be 1.0)"
)

print("\nheld-out replay:")
print(f"{'k':>3} {'hit rate':>9} {'baseline':>9}")
for k in range(1, 6):
    report = replay(outcome.graph, outcome.held_out, k=k)
    print(f"{k:>3} {report['hit_rate']:>9.3f} {report['random_baseline']:>9.3f}")
