"""Independent oracle for the evaluation metrics.

Reads metric_cases.json and writes metric_oracle.json (frozen expected
values) plus bleu_count_sheet.md (n-gram count sheet for the BLEU cases).
Pure standard library; shares no code with the Rust implementation.
"""
import json
import math
import unicodedata
from collections import Counter
from datetime import date


def fold(text):
    out = []
    for ch in text:
        for d in unicodedata.normalize("NFD", ch.lower()):
            if not unicodedata.category(d).startswith("M"):
                out.append(d)
    return "".join(out)


def tokenize(text):
    tokens, cur = [], ""
    for ch in fold(text):
        if ch.isalnum():
            cur += ch
        elif cur:
            tokens.append(cur)
            cur = ""
    if cur:
        tokens.append(cur)
    return tokens


def normalize_name(text):
    return " ".join(fold(text).split())


def f1(p, r):
    return 2 * p * r / (p + r) if p + r > 0 else 0.0


def prf(tp, fp, fn):
    p = tp / (tp + fp) if tp + fp else 0.0
    r = tp / (tp + fn) if tp + fn else 0.0
    return {"precision": p, "recall": r, "f1": f1(p, r)}


def macro(counts):
    present = [prf(*c)["f1"] for c in counts if sum(c) > 0]
    return sum(present) / len(present) if present else 1.0


# ---- ROUGE-L -------------------------------------------------------------

def lcs(a, b):
    table = [[0] * (len(b) + 1) for _ in range(len(a) + 1)]
    for i in range(1, len(a) + 1):
        for j in range(1, len(b) + 1):
            table[i][j] = table[i - 1][j - 1] + 1 if a[i - 1] == b[j - 1] else max(table[i - 1][j], table[i][j - 1])
    return table[-1][-1]


def rouge_l(ref, hyp):
    r, h = tokenize(ref), tokenize(hyp)
    if not r or not h:
        return {"precision": 0.0, "recall": 0.0, "f1": 0.0}
    n = lcs(r, h)
    p, rec = n / len(h), n / len(r)
    return {"precision": p, "recall": rec, "f1": f1(p, rec)}


# ---- BLEU ------------------------------------------------------------------

def ngrams(tokens, n):
    return Counter(tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1))


def bleu(refs, hyps, sheet=None):
    if not refs:
        return 0.0
    matches, totals = [0] * 4, [0] * 4
    c = r = 0
    for ref, hyp in zip(refs, hyps):
        rt, ht = tokenize(ref), tokenize(hyp)
        c += len(ht)
        r += len(rt)
        for n in range(1, 5):
            hg, rg = ngrams(ht, n), ngrams(rt, n)
            totals[n - 1] += sum(hg.values())
            matches[n - 1] += sum(min(k, rg[g]) for g, k in hg.items())
    if c == 0:
        score = 0.0
        precisions = []
    else:
        precisions = [(m + 1) / (t + 1) if m == 0 else m / t for m, t in zip(matches, totals)]
        bp = 1.0 if c >= r else math.exp(1 - r / c)
        score = bp * math.exp(sum(math.log(p) for p in precisions) / 4)
    if sheet is not None:
        sheet.append(f"| {' / '.join(hyps)!r} | {c} | {r} | "
                     + " | ".join(f"{m}/{t}" for m, t in zip(matches, totals))
                     + f" | {score:.12f} |")
    return score


# ---- metadata macro F1 ------------------------------------------------------

FIELDS = ["meeting_date", "location", "meeting_type", "participants"]
TYPES = {
    "ordinary": "ordinary", "ordinaria": "ordinary", "reuniao ordinaria": "ordinary", "ordinary meeting": "ordinary",
    "extraordinary": "extraordinary", "extraordinaria": "extraordinary",
    "reuniao extraordinaria": "extraordinary", "extraordinary meeting": "extraordinary",
}


def iso(raw):
    raw = raw.strip()
    parts = raw.split("-")
    try:
        if len(parts) == 3 and all(p.isdigit() for p in parts):
            if len(parts[0]) == 4 and len(parts[1]) == 2 and len(parts[2]) == 2:
                return date(int(parts[0]), int(parts[1]), int(parts[2])).isoformat()
            if len(parts[0]) == 2 and len(parts[1]) == 2 and len(parts[2]) == 4:
                return date(int(parts[2]), int(parts[1]), int(parts[0])).isoformat()
    except ValueError:
        pass
    return raw


def values(meta, field):
    if meta is None:
        return []
    if field == "meeting_date":
        vals = [iso(meta["meeting_date"])]
    elif field == "location":
        vals = [normalize_name(meta["location"])]
    elif field == "meeting_type":
        n = normalize_name(meta["meeting_type"])
        vals = [TYPES.get(n, n)]
    else:
        vals = [normalize_name(p["name"]) for p in meta["participants"]]
    return [v for v in vals if v]


def metadata_f1(gold, pred):
    counts = {f: [0, 0, 0] for f in FIELDS}
    for doc in set(gold) | set(pred):
        for f in FIELDS:
            g, p = Counter(values(gold.get(doc), f)), Counter(values(pred.get(doc), f))
            tp = sum((g & p).values())
            counts[f][0] += tp
            counts[f][1] += sum(p.values()) - tp
            counts[f][2] += sum(g.values()) - tp
    return {"per_field": {f: prf(*counts[f]) for f in FIELDS}, "macro_f1": macro(counts.values())}


# ---- voting macro F1 ----------------------------------------------------------

CLASSES = ["favor", "against", "abstention"]


def voting_f1(gold, pred, pairs):
    counts = {c: [0, 0, 0] for c in CLASSES}
    votes = lambda s: s.get("votes") or []
    for g_idx, p_idx in pairs:
        pending = {}
        for v in votes(pred[p_idx]):
            pending.setdefault(normalize_name(v["participant_name"]), []).append(v["position"])
        for v in votes(gold[g_idx]):
            queue = pending.get(normalize_name(v["participant_name"]))
            if queue:
                p = queue.pop(0)
                if p == v["position"]:
                    counts[p][0] += 1
                else:
                    counts[p][1] += 1
                    counts[v["position"]][2] += 1
            else:
                counts[v["position"]][2] += 1
        for queue in pending.values():
            for p in queue:
                counts[p][1] += 1
    matched_g = {g for g, _ in pairs}
    matched_p = {p for _, p in pairs}
    for i, s in enumerate(gold):
        if i not in matched_g:
            for v in votes(s):
                counts[v["position"]][2] += 1
    for i, s in enumerate(pred):
        if i not in matched_p:
            for v in votes(s):
                counts[v["position"]][1] += 1
    return {"per_class": {c: prf(*counts[c]) for c in CLASSES}, "macro_f1": macro(counts.values())}


def main():
    cases = json.load(open("metric_cases.json", encoding="utf-8"))
    sheet = ["| hypotheses | c | r | 1-gram | 2-gram | 3-gram | 4-gram | BLEU |", "|---|---|---|---|---|---|---|---|"]
    out = {
        "rouge_l": [rouge_l(c["reference"], c["hypothesis"]) for c in cases["rouge_l"]],
        "bleu": [bleu(c["references"], c["hypotheses"], sheet) for c in cases["bleu"]],
        "metadata": [metadata_f1(c["gold"], c["pred"]) for c in cases["metadata"]],
        "voting": [voting_f1(c["gold"], c["pred"], c["pairs"]) for c in cases["voting"]],
    }
    json.dump(out, open("metric_oracle.json", "w"), indent=1)
    with open("bleu_count_sheet.md", "w", encoding="utf-8") as f:
        f.write("Clipped n-gram matches / hypothesis n-grams per order, corpus totals.\n")
        f.write("Orders with zero matches use (0+1)/(total+1); brevity penalty exp(1 - r/c) when c < r.\n\n")
        f.write("\n".join(sheet) + "\n")


if __name__ == "__main__":
    main()
