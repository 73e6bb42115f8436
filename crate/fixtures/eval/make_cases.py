"""Writes metric_cases.json, the inputs of the metric oracle fixtures."""
import json

P = lambda name, party=None, role=None: {"name": name, "party": party, "role": role}


def meta(date, loc, typ, names):
    return {"meeting_date": date, "location": loc, "meeting_type": typ,
            "participants": [P(n) for n in names]}


def subj(title, summary="", votes=None):
    s = {"title": title, "summary": summary, "topic_labels": []}
    if votes is not None:
        s["votes"] = [{"participant_name": n, "position": p} for n, p in votes]
    return s


rouge = [
    {"reference": "a b c d", "hypothesis": "a c d"},
    {"reference": "the flood plan was approved", "hypothesis": "the flood plan was approved"},
    {"reference": "budget revision approved", "hypothesis": ""},
    {"reference": "", "hypothesis": "anything"},
    {"reference": "Aprovação do orçamento municipal", "hypothesis": "aprovacao orcamento"},
    {"reference": "a b a b a", "hypothesis": "b a b"},
    {"reference": "school transport schedule adjusted", "hypothesis": "adjusted schedule for school transport"},
    {"reference": "x y z", "hypothesis": "p q r"},
    {"reference": "one two three four five six", "hypothesis": "six five four three two one"},
    {"reference": "mobile health unit for rural parishes", "hypothesis": "a mobile unit offering health care in rural parishes weekly"},
    {"reference": "Saúde, saúde; SAÚDE!", "hypothesis": "saude"},
    {"reference": "2025 budget: 1.5 million", "hypothesis": "budget 2025 of 1 5 million"},
]

bleu = [
    {"references": ["a b d e"], "hypotheses": ["a b c"]},
    {"references": ["the flood plan was approved", "school budget"],
     "hypotheses": ["the flood plan was approved", "school budget"]},
    {"references": ["the flood plan was approved", "school budget"], "hypotheses": ["", ""]},
    {"references": ["the council approved the flood prevention plan", "the school budget was revised"],
     "hypotheses": ["the council approved a flood plan", "school budget revised"]},
    {"references": ["a a a a"], "hypotheses": ["a a"]},
    {"references": ["one two three four five"], "hypotheses": ["one two three four five six seven"]},
    {"references": ["x y z"], "hypotheses": ["p q r s"]},
    {"references": ["mobile health unit for rural parishes", "water tariff update"],
     "hypotheses": ["a mobile health unit for the rural parishes", "update of water tariffs"]},
    {"references": ["the the the cat"], "hypotheses": ["the the the the"]},
    {"references": ["aprovação do plano de cheias", "orçamento revisto"],
     "hypotheses": ["aprovacao do plano de cheias", "orcamento revisto e aprovado"]},
    {"references": ["a b c d e f g h"], "hypotheses": ["a b c d x f g h"]},
    {"references": ["alpha beta", "gamma delta epsilon", "zeta"],
     "hypotheses": ["alpha beta", "gamma delta", "eta"]},
]

ana, rui, eva = "Ana Sousa", "Rui Matos", "Eva Lima"
metadata = [
    {"gold": {"d1": meta("2025-01-10", "Salão Nobre", "ordinária", [ana, rui])},
     "pred": {"d1": meta("2025-01-10", "Salão Nobre", "ordinária", [ana, rui])}},
    {"gold": {"d1": meta("2025-01-10", "Salão Nobre", "ordinária", [ana]),
              "d2": meta("2025-02-01", "Auditório", "ordinária", [rui])},
     "pred": {"d1": meta("10-01-2025", "salao nobre", "ordinary", [ana]),
              "d2": meta("2025-02-02", "Auditório", "ordinária", [rui])}},
    {"gold": {"d1": meta("2025-01-10", "Salão Nobre", "ordinária", [ana, rui])},
     "pred": {"d1": meta("2025-01-10", "Salão Nobre", "ordinária", [])}},
    {"gold": {"d1": meta("2025-01-10", "Salão Nobre", "ordinária", [ana, rui, eva])},
     "pred": {"d1": meta("2025-01-10", "Sala de Sessões", "extraordinária", [ana, "Rui M."])}},
    {"gold": {"d1": meta("2025-01-10", "Salão Nobre", "ordinária", [ana])},
     "pred": {"d1": meta("2025-01-10", "Salão Nobre", "ordinária", [ana]),
              "d9": meta("2025-03-03", "Salão Nobre", "ordinária", [ana, rui])}},
    {"gold": {"d1": meta("2025-01-10", "Salão Nobre", "ordinária", [ana]),
              "d2": meta("2025-05-19", "Sala de Sessões", "ordinária", [rui, eva])},
     "pred": {}},
    {"gold": {"d1": meta("2025-01-10", "", "ordinária", [])},
     "pred": {"d1": meta("2025-01-10", "", "ordinária", [])}},
    {"gold": {"d1": meta("2025-01-10", "Salão Nobre", "ordinária", [ana, ana, rui])},
     "pred": {"d1": meta("2025-01-10", "Salão Nobre", "ordinária", [ana, rui, rui])}},
    {"gold": {"d1": meta("2025-04-22", "Auditório Municipal", "extraordinária", [ana, rui]),
              "d2": meta("2025-04-23", "Auditório Municipal", "extraordinária", [eva])},
     "pred": {"d1": meta("22-04-2025", "AUDITÓRIO  municipal", "extraordinary", [rui, ana]),
              "d2": meta("2025-04-23", "Auditório", "ordinária", [eva, ana])}},
    {"gold": {"d1": meta("2025-01-10", "Salão Nobre", "ordinária", [ana])},
     "pred": {"d1": meta("2025-13-45", "Salão Nobre", "ordinária", [ana])}},
    {"gold": {"d1": meta("2025-01-10", "Salão Nobre", "ordinária", [ana, rui]),
              "d2": meta("2025-01-11", "Salão Nobre", "ordinária", [ana, rui]),
              "d3": meta("2025-01-12", "Salão Nobre", "ordinária", [ana, rui])},
     "pred": {"d1": meta("2025-01-10", "Salão Nobre", "ordinária", [ana, rui]),
              "d2": meta("2025-01-11", "Salão Nobre", "ordinária", [eva]),
              "d3": meta("2025-01-13", "Paços do Concelho", "ordinária", [ana, rui, eva])}},
]

F, A, X = "favor", "against", "abstention"
voting = [
    {"gold": [subj("s", votes=[("A", F), ("B", A)])], "pred": [subj("s", votes=[("A", F), ("B", X)])], "pairs": [[0, 0]]},
    {"gold": [subj("s", votes=[("A", F), ("B", F)])], "pred": [subj("s", votes=[("A", F), ("B", F)])], "pairs": [[0, 0]]},
    {"gold": [subj("s", votes=[("A", F), ("B", A)])], "pred": [subj("s", votes=[])], "pairs": [[0, 0]]},
    {"gold": [subj("s", votes=[("A", F), ("B", A), ("C", X)])],
     "pred": [subj("s", votes=[("a", F), ("b", A), ("D", X)])], "pairs": [[0, 0]]},
    {"gold": [subj("s1", votes=[("A", F)]), subj("s2", votes=[("A", A), ("B", A)])],
     "pred": [subj("s2", votes=[("A", A), ("B", F)]), subj("s1", votes=[("A", F)])], "pairs": [[0, 1], [1, 0]]},
    {"gold": [subj("s1", votes=[("A", F)]), subj("s2", votes=[("B", A)])],
     "pred": [subj("s1", votes=[("A", F)])], "pairs": [[0, 0]]},
    {"gold": [subj("s1", votes=[("A", F)])],
     "pred": [subj("s1", votes=[("A", F)]), subj("extra", votes=[("A", X), ("B", X)])], "pairs": [[0, 0]]},
    {"gold": [subj("s", votes=[("Ana Sousa", F), ("Rui Matos", X)])],
     "pred": [subj("s", votes=[("ANA SOUSA", F), ("Rui  Matos", X)])], "pairs": [[0, 0]]},
    {"gold": [subj("s", votes=[("A", F), ("A", A)])], "pred": [subj("s", votes=[("A", A), ("A", A)])], "pairs": [[0, 0]]},
    {"gold": [subj("s")], "pred": [subj("s")], "pairs": [[0, 0]]},
    {"gold": [subj("s", votes=[("A", X), ("B", X), ("C", F), ("D", A)])],
     "pred": [subj("s", votes=[("A", X), ("B", F), ("C", F), ("D", F)])], "pairs": [[0, 0]]},
    {"gold": [subj("s1", votes=[("A", F), ("B", F)]), subj("s2", votes=[("A", A)])],
     "pred": [subj("s1", votes=[("A", F), ("B", F)]), subj("s2", votes=[("A", A)])], "pairs": []},
]

json.dump({"rouge_l": rouge, "bleu": bleu, "metadata": metadata, "voting": voting},
          open("metric_cases.json", "w", encoding="utf-8"), ensure_ascii=False, indent=1)
