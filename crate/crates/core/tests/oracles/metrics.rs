//! Compares the metric implementations with the frozen values that
//! fixtures/eval/oracle.py computed from fixtures/eval/metric_cases.json.

use std::collections::BTreeMap;
use std::path::Path;

use citilink_core::eval::{bleu, metadata_macro_f1, rouge_l, voting_macro_f1, SubjectPair};
use citilink_core::extraction::{RawMetadata, RawSubject};
use serde_json::Value;

pub const TOLERANCE: f64 = 1e-6;

pub struct Fixture {
    cases: Value,
    oracle: Value,
}

pub fn load(eval_dir: &Path) -> Fixture {
    let read = |name: &str| -> Value { serde_json::from_slice(&std::fs::read(eval_dir.join(name)).unwrap()).unwrap() };
    Fixture {
        cases: read("metric_cases.json"),
        oracle: read("metric_oracle.json"),
    }
}

fn check(label: &str, got: f64, want: &Value) -> Result<(), String> {
    let want = want.as_f64().ok_or_else(|| format!("{label}: oracle value missing"))?;
    if !(0.0..=1.0).contains(&got) {
        return Err(format!("{label}: {got} outside [0, 1]"));
    }
    if (got - want).abs() > TOLERANCE {
        return Err(format!("{label}: got {got}, oracle {want}"));
    }
    Ok(())
}

fn cases<'a>(f: &'a Fixture, key: &str) -> impl Iterator<Item = (usize, &'a Value, &'a Value)> {
    let c = f.cases[key].as_array().unwrap();
    let o = f.oracle[key].as_array().unwrap();
    assert_eq!(c.len(), o.len(), "{key}: cases and oracle differ in length");
    c.iter().zip(o).enumerate().map(|(i, (c, o))| (i, c, o))
}

pub fn check_rouge(f: &Fixture) -> Result<usize, String> {
    let mut n = 0;
    for (i, c, o) in cases(f, "rouge_l") {
        let got = rouge_l(c["reference"].as_str().unwrap(), c["hypothesis"].as_str().unwrap());
        check(&format!("rouge_l[{i}].precision"), got.precision, &o["precision"])?;
        check(&format!("rouge_l[{i}].recall"), got.recall, &o["recall"])?;
        check(&format!("rouge_l[{i}].f1"), got.f1, &o["f1"])?;
        n += 1;
    }
    Ok(n)
}

fn strings(v: &Value) -> Vec<String> {
    v.as_array()
        .unwrap()
        .iter()
        .map(|s| s.as_str().unwrap().to_string())
        .collect()
}

pub fn check_bleu(f: &Fixture) -> Result<usize, String> {
    let mut n = 0;
    for (i, c, o) in cases(f, "bleu") {
        let got = bleu(&strings(&c["references"]), &strings(&c["hypotheses"]));
        check(&format!("bleu[{i}]"), got, o)?;
        n += 1;
    }
    Ok(n)
}

pub fn check_metadata(f: &Fixture) -> Result<usize, String> {
    let mut n = 0;
    for (i, c, o) in cases(f, "metadata") {
        let docs = |v: &Value| -> BTreeMap<String, RawMetadata> { serde_json::from_value(v.clone()).unwrap() };
        let got = metadata_macro_f1(&docs(&c["gold"]), &docs(&c["pred"]));
        for (field, score) in &got.per_field {
            let w = &o["per_field"][field];
            check(
                &format!("metadata[{i}].{field}.precision"),
                score.prf.precision,
                &w["precision"],
            )?;
            check(&format!("metadata[{i}].{field}.recall"), score.prf.recall, &w["recall"])?;
            check(&format!("metadata[{i}].{field}.f1"), score.prf.f1, &w["f1"])?;
        }
        check(&format!("metadata[{i}].macro"), got.macro_f1, &o["macro_f1"])?;
        n += 1;
    }
    Ok(n)
}

pub fn check_voting(f: &Fixture) -> Result<usize, String> {
    let mut n = 0;
    for (i, c, o) in cases(f, "voting") {
        let subjects = |v: &Value| -> Vec<RawSubject> { serde_json::from_value(v.clone()).unwrap() };
        let pairs: Vec<SubjectPair> = c["pairs"]
            .as_array()
            .unwrap()
            .iter()
            .map(|p| SubjectPair {
                gold: p[0].as_u64().unwrap() as usize,
                pred: p[1].as_u64().unwrap() as usize,
                similarity: 1.0,
            })
            .collect();
        let got = voting_macro_f1(&subjects(&c["gold"]), &subjects(&c["pred"]), &pairs);
        for (class, score) in &got.per_class {
            let w = &o["per_class"][class];
            check(&format!("voting[{i}].{class}.f1"), score.prf.f1, &w["f1"])?;
            check(
                &format!("voting[{i}].{class}.precision"),
                score.prf.precision,
                &w["precision"],
            )?;
            check(&format!("voting[{i}].{class}.recall"), score.prf.recall, &w["recall"])?;
        }
        check(&format!("voting[{i}].macro"), got.macro_f1, &o["macro_f1"])?;
        n += 1;
    }
    Ok(n)
}

/// Identical gold and prediction must score exactly 1.0 everywhere.
pub fn check_perfect(f: &Fixture) -> Result<(), String> {
    for (i, c, _) in cases(f, "rouge_l") {
        let r = c["reference"].as_str().unwrap();
        if !citilink_core::text::tokenize(r).is_empty() && rouge_l(r, r).f1 != 1.0 {
            return Err(format!("rouge_l[{i}] self-score is not 1"));
        }
    }
    for (i, c, _) in cases(f, "bleu") {
        let refs = strings(&c["references"]);
        if refs.iter().any(|r| !r.trim().is_empty()) && bleu(&refs, &refs) != 1.0 {
            return Err(format!("bleu[{i}] self-score is {}", bleu(&refs, &refs)));
        }
    }
    for (i, c, _) in cases(f, "metadata") {
        let g: BTreeMap<String, RawMetadata> = serde_json::from_value(c["gold"].clone()).unwrap();
        if metadata_macro_f1(&g, &g).macro_f1 != 1.0 {
            return Err(format!("metadata[{i}] self-score is not 1"));
        }
    }
    for (i, c, _) in cases(f, "voting") {
        let g: Vec<RawSubject> = serde_json::from_value(c["gold"].clone()).unwrap();
        let pairs: Vec<SubjectPair> = (0..g.len())
            .map(|k| SubjectPair {
                gold: k,
                pred: k,
                similarity: 1.0,
            })
            .collect();
        if voting_macro_f1(&g, &g, &pairs).macro_f1 != 1.0 {
            return Err(format!("voting[{i}] self-score is not 1"));
        }
    }
    Ok(())
}
