use serde::Serialize;

use crate::config::{set_numeric, ExperimentConfig};
use crate::runner::run;
use crate::CliError;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub value: f64,
    pub estimate_re: f64,
    pub estimate_im: f64,
    pub exact_re: f64,
    pub exact_im: f64,
    pub abs_error: f64,
    pub m: u64,
    pub seconds: f64,
}

/// Runs `config` once per value of `axis`, in the order given.
pub fn sweep(config: &ExperimentConfig, axis: &str, values: &[f64]) -> Result<Vec<SweepRow>, CliError> {
    if values.is_empty() {
        return Err(CliError::Config("sweep needs at least one value".into()));
    }
    values
        .iter()
        .map(|&value| {
            let mut cfg = config.clone();
            set_numeric(&mut cfg, axis, value)?;
            let report = run(&cfg)?;
            let [entry] = report.entries.as_slice() else {
                return Err(CliError::Config(format!(
                    "sweep needs exactly one estimated coefficient per run, got {}",
                    report.entries.len()
                )));
            };
            Ok(SweepRow {
                value,
                estimate_re: entry.estimate.re,
                estimate_im: entry.estimate.im,
                exact_re: entry.exact.re,
                exact_im: entry.exact.im,
                abs_error: entry.abs_error,
                m: report.plan.map_or(0, |p| p.m),
                seconds: report.wall_clock_seconds,
            })
        })
        .collect()
}

pub fn rows_to_csv(rows: &[SweepRow]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("flush")).expect("csv is utf-8")
}
