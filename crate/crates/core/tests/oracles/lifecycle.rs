//! Random operation sequences against the service, checked step by step
//! against a four-state reference machine.

use std::collections::BTreeSet;
use std::sync::Arc;

use citilink_core::extraction::{
    extract_rule_based, ExtractionError, ExtractionResult, Extractor, ExtractorKind, RuleExtractor,
};
use citilink_core::search::{Query, MAX_PAGE_SIZE};
use citilink_core::service::{RegistryFile, Service, ServiceError};
use citilink_core::store::MemoryStore;
use citilink_core::MinuteStatus;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Failing;

impl Extractor for Failing {
    fn kind(&self) -> ExtractorKind {
        ExtractorKind::Llm
    }
    fn extract(&self, _: &str) -> Result<ExtractionResult, ExtractionError> {
        Err(ExtractionError::Config("simulated outage".into()))
    }
}

/// A minute text that can be uploaded, and whether it mentions someone the
/// registry does not know (so validation needs an acknowledgement).
pub struct Sample {
    pub municipality: String,
    pub text: String,
    pub needs_ack: bool,
}

struct Tracked {
    id: String,
    status: MinuteStatus,
    has_result: bool,
    needs_ack: bool,
    sample: usize,
}

#[derive(Debug)]
enum Op {
    Upload(usize),
    Extract(usize),
    ExtractFailing(usize),
    Edit(usize),
    Validate(usize, bool),
    Publish(usize),
}

fn conflict(r: &Result<impl std::fmt::Debug, ServiceError>) -> bool {
    matches!(r, Err(ServiceError::Conflict { .. }))
}

/// Called after every step with the service and each minute's reference
/// status.
pub type Observer<'a> = dyn FnMut(&Arc<Service>, &[(String, MinuteStatus)]) -> Result<(), String> + 'a;

fn run_one(
    rng: &mut ChaCha8Rng,
    registry: &RegistryFile,
    samples: &[Sample],
    steps: usize,
    observe: &mut Observer<'_>,
) -> Result<usize, String> {
    let svc = Arc::new(Service::open(Arc::new(MemoryStore::new())).map_err(|e| e.to_string())?);
    svc.import_registry(registry.clone()).map_err(|e| e.to_string())?;
    let mut tracked: Vec<Tracked> = Vec::new();
    let mut uploads = 0usize;

    for step in 0..steps {
        let op = if tracked.is_empty() || rng.gen_bool(0.15) {
            Op::Upload(rng.gen_range(0..samples.len()))
        } else {
            let i = rng.gen_range(0..tracked.len());
            match rng.gen_range(0..6) {
                0 => Op::Extract(i),
                1 => Op::ExtractFailing(i),
                2 => Op::Edit(i),
                3 => Op::Validate(i, false),
                4 => Op::Validate(i, true),
                _ => Op::Publish(i),
            }
        };
        let fail = |what: String| format!("step {step} {op:?}: {what}");
        let editable = |t: &Tracked| matches!(t.status, MinuteStatus::Uploaded | MinuteStatus::Extracted);

        match op {
            Op::Upload(s) => {
                uploads += 1;
                let m = svc
                    .ingest(
                        &samples[s].municipality,
                        &format!("upload-{uploads}.txt"),
                        &samples[s].text,
                    )
                    .map_err(|e| fail(e.to_string()))?;
                if m.status != MinuteStatus::Uploaded {
                    return Err(fail(format!("new minute has status {}", m.status)));
                }
                tracked.push(Tracked {
                    id: m.id,
                    status: MinuteStatus::Uploaded,
                    has_result: false,
                    needs_ack: samples[s].needs_ack,
                    sample: s,
                });
            }
            Op::Extract(i) => {
                let t = &mut tracked[i];
                let r = svc.run_extraction(&t.id, &RuleExtractor);
                if editable(t) {
                    r.map_err(|e| fail(e.to_string()))?;
                    t.status = MinuteStatus::Extracted;
                    t.has_result = true;
                } else if !conflict(&r) {
                    return Err(fail(format!("expected a conflict from {}, got {r:?}", t.status)));
                }
            }
            Op::ExtractFailing(i) => {
                let t = &tracked[i];
                let r = svc.run_extraction(&t.id, &Failing);
                let ok = if editable(t) {
                    matches!(r, Err(ServiceError::Extraction(_)))
                } else {
                    conflict(&r)
                };
                if !ok {
                    return Err(fail(format!("unexpected {r:?} from {}", t.status)));
                }
            }
            Op::Edit(i) => {
                let t = &mut tracked[i];
                let result = extract_rule_based(&samples[t.sample].text).map_err(|e| fail(e.to_string()))?;
                let r = svc.replace_extraction(&t.id, result);
                if editable(t) {
                    r.map_err(|e| fail(e.to_string()))?;
                    t.status = MinuteStatus::Extracted;
                    t.has_result = true;
                } else if !conflict(&r) {
                    return Err(fail(format!("expected a conflict from {}, got {r:?}", t.status)));
                }
            }
            Op::Validate(i, ack) => {
                let t = &mut tracked[i];
                let r = svc.validate(&t.id, ack);
                if t.status != MinuteStatus::Extracted {
                    if !conflict(&r) {
                        return Err(fail(format!("expected a conflict from {}, got {r:?}", t.status)));
                    }
                } else if !t.has_result {
                    return Err(fail("extracted without a result".into()));
                } else if t.needs_ack && !ack {
                    if !matches!(r, Err(ServiceError::Invalid(_))) {
                        return Err(fail(format!("unacknowledged unresolved names accepted: {r:?}")));
                    }
                } else {
                    r.map_err(|e| fail(e.to_string()))?;
                    t.status = MinuteStatus::Validated;
                }
            }
            Op::Publish(i) => {
                let t = &mut tracked[i];
                let r = svc.publish(&t.id);
                if t.status == MinuteStatus::Validated {
                    r.map_err(|e| fail(e.to_string()))?;
                    t.status = MinuteStatus::Published;
                } else if !conflict(&r) {
                    return Err(fail(format!("expected a conflict from {}, got {r:?}", t.status)));
                }
            }
        }

        let data = svc.data();
        for t in &tracked {
            let got = data.minutes.iter().find(|m| m.id == t.id).map(|m| m.status);
            if got != Some(t.status) {
                return Err(fail(format!("{} is {got:?}, reference says {}", t.id, t.status)));
            }
        }
        let published: BTreeSet<&str> = tracked
            .iter()
            .filter(|t| t.status == MinuteStatus::Published)
            .map(|t| t.id.as_str())
            .collect();
        let snapshot = svc.snapshot();
        let indexed: BTreeSet<&str> = snapshot.minutes().iter().map(|m| m.id.as_str()).collect();
        if indexed != published {
            return Err(fail(format!("index holds {indexed:?}, published {published:?}")));
        }
        let query = Query {
            page_size: MAX_PAGE_SIZE,
            ..Query::text("")
        };
        let hits = svc.search(&query).map_err(|e| fail(e.to_string()))?;
        if let Some(h) = hits.hits.iter().find(|h| !published.contains(h.minute_id.as_str())) {
            return Err(fail(format!("search exposed unpublished {}", h.minute_id)));
        }
        let reference: Vec<(String, MinuteStatus)> = tracked.iter().map(|t| (t.id.clone(), t.status)).collect();
        observe(&svc, &reference).map_err(fail)?;
    }
    Ok(tracked.len())
}

/// Runs `sequences` random sequences of 4 to 24 steps; returns the number of
/// minutes exercised.
pub fn check_sequences(
    sequences: usize,
    seed: u64,
    registry: &RegistryFile,
    samples: &[Sample],
) -> Result<usize, String> {
    check_sequences_observed(sequences, seed, registry, samples, &mut |_, _| Ok(()))
}

pub fn check_sequences_observed(
    sequences: usize,
    seed: u64,
    registry: &RegistryFile,
    samples: &[Sample],
    observe: &mut Observer<'_>,
) -> Result<usize, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut minutes = 0;
    for n in 0..sequences {
        let steps = rng.gen_range(4..=24);
        minutes += run_one(&mut rng, registry, samples, steps, observe).map_err(|e| format!("sequence {n}: {e}"))?;
    }
    Ok(minutes)
}
