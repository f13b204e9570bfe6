//! Corpus generation, benchmark runs and reports.

pub mod bench;
pub mod corpus;
pub mod report;

pub use bench::{run_instances, run_suite, BenchConfig, BenchError, BenchmarkReport, Bracket, RunRow, SettingSummary};
pub use corpus::{generate_corpus, generate_instance, write_corpus, Family};

/// `exp(mean(ln(v + shift))) - shift`; `None` for empty input.
pub fn shifted_geo_mean(values: &[f64], shift: f64) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mean = values.iter().map(|v| (v + shift).ln()).sum::<f64>() / values.len() as f64;
    Some(mean.exp() - shift)
}
