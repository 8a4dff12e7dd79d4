"""Build a Markov-chain recommendation graph by hand and query it.

Shows the counting rule (adjacent pairs across sequences), the stochastic
rows, root bootstrapping, ranked top-k queries, and file round-tripping.
"""

from lodestar.graph import bootstrap, build_graph, deserialize, serialize, top_k
from lodestar.mining import BlockSequence

# three observed workflows over five analysis steps
sequences = [
    BlockSequence("workflow-a", ("load", "inspect", "clean", "model")),
    BlockSequence("workflow-b", ("load", "inspect", "visualize")),
    BlockSequence("workflow-c", ("load", "clean", "visualize", "model")),
]

graph = build_graph(sequences, advisor_id="demo")

print("transition probabilities (count / total outgoing):")
for (src, dst), probability in sorted(graph.transitions.items()):
    count = graph.counts[(src, dst)]
    print(f"  {src:>10} -> {dst:<10} count={count} p={probability:.3f}")

print("\nbootstrap (first steps across workflows):")
for state, weight in bootstrap(graph, 5):
    print(f"  {state}: {weight:.3f}")

print("\nafter choosing 'inspect', the ranked next steps are:")
for state, probability in top_k(graph, "inspect", 5):
    print(f"  {state}: {probability:.3f}")

print("\n'model' is absorbing:", top_k(graph, "model", 5))

raw = serialize(graph)
assert deserialize(raw) == graph
print(f"\ngraph serializes to {len(raw)} bytes and round-trips intact")
