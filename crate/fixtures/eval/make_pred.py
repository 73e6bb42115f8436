"""Builds pred/ from gold/ with a fixed set of deliberate extraction mistakes."""
import copy, json, pathlib

here = pathlib.Path(__file__).parent
gold = {p.stem: json.loads(p.read_text()) for p in sorted((here / "gold").glob("*.json"))}
pred = {k: copy.deepcopy(v) for k, v in gold.items() if k != "covilha-2025-04-22"}

d = pred["covilha-2025-01-10"]
d["metadata_raw"]["meeting_type"] = "extraordinária"
d["subjects_raw"][0]["summary"] = "The council approved " + d["subjects_raw"][0]["summary"][0].lower() + d["subjects_raw"][0]["summary"][1:]

d = pred["covilha-2025-01-28"]
d["metadata_raw"]["participants"].pop()
for s in d["subjects_raw"]:
    if s.get("votes"):
        s["votes"][0]["position"] = "against"
        break

d = pred["covilha-2025-03-14"]
d["subjects_raw"].pop()

d = pred["fundao-2025-05-19"]
d["subjects_raw"].reverse()
d["subjects_raw"][0]["title"] = "Update of water tariffs"
for s in d["subjects_raw"]:
    for v in s.get("votes") or []:
        if v["position"] == "abstention":
            v["position"] = "favor"

for k, v in pred.items():
    v["extractor_id"] = "perturbed"
    (here / "pred" / f"{k}.json").write_text(json.dumps(v, indent=2, ensure_ascii=False) + "\n")
