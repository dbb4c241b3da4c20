"""Load the small fixture graph and print the five measures for a few pairs.

Run from the repository root:

    python demos/01_graph_and_features.py
"""
from pathlib import Path

from dtnet import FEATURE_NAMES, compute_features, load_graph

ROOT = Path(__file__).resolve().parents[1]

g = load_graph(str(ROOT / "fixtures" / "g0.tsv"))
print(f"{g.node_count} words, {g.edge_count} edges, ew_max={g.ew_max}")
for w in ("a", "b", "f"):
    print(w, "->", [(g.surface(v), wt) for v, wt in g.neighbors(g.resolve(w))])

print()
print("pair    " + "  ".join(f"{n:>6}" for n in FEATURE_NAMES))
for pair in [("a", "b"), ("a", "e"), ("a", "f"), ("c", "d"), ("a", "zebra")]:
    fv = compute_features(g, pair)
    note = "  (out of vocabulary, imputed)" if fv.oov else ""
    print(f"{pair[0]}-{pair[1]:<6}" + "  ".join(f"{x:6.3f}" for x in fv.as_tuple()) + note)

# A pair the graph cannot connect within the hop cap is imputed the same way
# as an unknown word: SP and SPW become max_hops + 1, the rest 0.
