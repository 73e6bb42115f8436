"""Hand application of BM25 (k1=1.2, b=0.75) to the flood corpora.

Writes flood_oracle.md and flood_oracle.json.
"""
import json, math

K1, B = 1.2, 0.75
CORPORA = {
    "as_written": {"d1": "flood prevention plan", "d2": "flood flood budget", "d3": "school budget"},
    "equal_lengths": {"d1": "flood prevention plan", "d2": "flood flood budget", "d3": "school budget report"},
}

out, lines = {}, ["# BM25 sheet for the query \"flood\"", "", f"k1 = {K1}, b = {B}, idf = ln(1 + (N - df + 0.5) / (df + 0.5))", ""]
for name, docs in CORPORA.items():
    toks = {d: t.split() for d, t in docs.items()}
    n = len(toks)
    avgdl = sum(len(t) for t in toks.values()) / n
    df = sum("flood" in t for t in toks.values())
    idf = math.log(1 + (n - df + 0.5) / (df + 0.5))
    lines += [f"## {name}", "", f"N = {n}, df(flood) = {df}, avgdl = {avgdl:.6f}, idf = {idf:.9f}", "",
              "| doc | text | tf | dl | norm = 1 - b + b*dl/avgdl | tf*(k1+1)/(tf + k1*norm) | score |",
              "|---|---|---|---|---|---|---|"]
    scores = {}
    for d, t in toks.items():
        tf, dl = t.count("flood"), len(t)
        norm = 1 - B + B * dl / avgdl
        w = tf * (K1 + 1) / (tf + K1 * norm) if tf else 0.0
        scores[d] = idf * w
        lines.append(f"| {d} | {docs[d]} | {tf} | {dl} | {norm:.6f} | {w:.9f} | {scores[d]:.9f} |")
    lines.append("")
    out[name] = scores
open("flood_oracle.md", "w").write("\n".join(lines))
json.dump(out, open("flood_oracle.json", "w"), indent=2)
print(json.dumps(out, indent=2))
