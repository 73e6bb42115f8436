use serde::{Deserialize, Serialize};

/// BM25 tuning. The defaults are the usual k1 = 1.2, b = 0.75.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bm25Params {
    pub k1: f64,
    pub b: f64,
}

impl Default for Bm25Params {
    fn default() -> Self {
        Bm25Params { k1: 1.2, b: 0.75 }
    }
}

impl Bm25Params {
    /// `ln(1 + (N - df + 0.5) / (df + 0.5))`, never negative.
    pub fn idf(&self, unit_count: usize, doc_freq: usize) -> f64 {
        let n = unit_count as f64;
        let df = doc_freq as f64;
        (1.0 + (n - df + 0.5) / (df + 0.5)).ln()
    }

    /// Saturated, length-normalized term frequency.
    pub fn tf_weight(&self, tf: u32, doc_length: u32, avg_doc_length: f64) -> f64 {
        let tf = tf as f64;
        let norm = 1.0 - self.b + self.b * doc_length as f64 / avg_doc_length;
        tf * (self.k1 + 1.0) / (tf + self.k1 * norm)
    }
}
