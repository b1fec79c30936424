use serde::Serialize;

use seqst_core::qpt::ReIm;
use seqst_core::{ValidityReport, C64};

use crate::config::ExperimentConfig;

/// Field excluded from determinism comparisons.
pub const TIMING_FIELD: &str = "wall_clock_seconds";

/// Shot budget echoed into a report.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PlanEcho {
    pub epsilon: f64,
    pub delta: f64,
    pub m: u64,
    pub seed: u64,
}

/// One estimated coefficient with its oracle value.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Entry {
    pub a: usize,
    pub b: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub label_a: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub label_b: Option<String>,
    pub estimate: ReIm,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stderr: Option<ReIm>,
    pub exact: ReIm,
    pub abs_error: f64,
    pub shots: u64,
}

impl Entry {
    pub fn new(a: usize, b: usize, estimate: C64, exact: C64, shots: u64) -> Self {
        Self {
            a,
            b,
            label_a: None,
            label_b: None,
            estimate: estimate.into(),
            stderr: None,
            exact: exact.into(),
            abs_error: (estimate - exact).norm(),
            shots,
        }
    }

    pub fn labels(mut self, a: impl ToString, b: impl ToString) -> Self {
        self.label_a = Some(a.to_string());
        self.label_b = Some(b.to_string());
        self
    }

    pub fn stderr(mut self, se: ReIm) -> Self {
        self.stderr = Some(se);
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub version: String,
    pub config: ExperimentConfig,
    pub num_qubits: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub plan: Option<PlanEcho>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_states: Option<usize>,
    pub entries: Vec<Entry>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub validity: Option<ValidityReport>,
    pub total_shots: u64,
    pub wall_clock_seconds: f64,
}

impl Report {
    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("report serializes");
        text.push('\n');
        text
    }

    /// Entries as CSV, one row per coefficient.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record([
            "a", "b", "label_a", "label_b", "estimate_re", "estimate_im", "stderr_re", "stderr_im", "exact_re",
            "exact_im", "abs_error", "shots",
        ])
        .expect("in-memory write");
        for e in &self.entries {
            let se = e.stderr.unwrap_or_default();
            w.write_record([
                e.a.to_string(),
                e.b.to_string(),
                e.label_a.clone().unwrap_or_default(),
                e.label_b.clone().unwrap_or_default(),
                e.estimate.re.to_string(),
                e.estimate.im.to_string(),
                se.re.to_string(),
                se.im.to_string(),
                e.exact.re.to_string(),
                e.exact.im.to_string(),
                e.abs_error.to_string(),
                e.shots.to_string(),
            ])
            .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("flush")).expect("csv is utf-8")
    }
}

/// Drops the timing line from a pretty-printed report so two runs can be compared byte for byte.
pub fn strip_timing(report_json: &str) -> String {
    report_json
        .lines()
        .filter(|line| !line.trim_start().starts_with(&format!("\"{TIMING_FIELD}\"")))
        .collect::<Vec<_>>()
        .join("\n")
}
