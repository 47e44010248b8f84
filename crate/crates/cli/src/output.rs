//! CSV emission. The contract: header
//! `delta,pcs,ci_low,ci_high,mean_total_samples,mean_stages,reps,seed`,
//! pcs and CI bounds fixed to 6 decimal places, sample/stage means to 3,
//! rows ordered by descending δ, trailing newline, and byte-identical
//! output for identical input.

use std::fs;
use std::path::Path;

use biz::McResult;

use crate::error::{AppError, AppResult};

pub const CSV_HEADER: &str = "delta,pcs,ci_low,ci_high,mean_total_samples,mean_stages,reps,seed";

/// One result row: a δ point, its Monte Carlo estimate, and the seed that
/// reproduces it. Continuous-oracle rows use δ = 0 (the limit object has no
/// finite δ).
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub delta: f64,
    pub result: McResult,
    pub seed: u64,
}

impl SweepRow {
    fn to_line(&self) -> String {
        let r = &self.result;
        format!(
            "{},{:.6},{:.6},{:.6},{:.3},{:.3},{},{}",
            self.delta,
            r.pcs,
            r.ci_low,
            r.ci_high,
            r.mean_total_samples,
            r.mean_stages,
            r.reps,
            self.seed
        )
    }
}

/// Render rows to the full CSV text, sorted by descending δ.
pub fn csv_string(rows: &[SweepRow]) -> AppResult<String> {
    if rows.is_empty() {
        return Err(AppError::Validation("no rows to emit".into()));
    }
    let mut sorted: Vec<&SweepRow> = rows.iter().collect();
    sorted.sort_by(|a, b| b.delta.total_cmp(&a.delta));
    let mut out = String::with_capacity(64 * (rows.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for row in sorted {
        out.push_str(&row.to_line());
        out.push('\n');
    }
    Ok(out)
}

/// Write the CSV to `path`; I/O failures carry the path.
pub fn emit_csv(rows: &[SweepRow], path: &Path) -> AppResult<()> {
    let text = csv_string(rows)?;
    fs::write(path, text)
        .map_err(|e| AppError::Runtime(format!("writing {}: {e}", path.display())))
}
