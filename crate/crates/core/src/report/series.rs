use std::fmt::Write;

use super::format_significant;
use crate::error::{Error, Result};
use crate::estimator::IdReport;

pub const SERIES_HEADER: &str = "step,id,ed,redundancy,n_used,n_excluded,lid_mean,lid_std";

/// An estimate taken at one training step.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesPoint {
    pub step: u64,
    pub report: IdReport,
}

/// Renders a training-dynamics series as CSV, one row per checkpoint.
///
/// Steps must be strictly increasing. Floats carry six significant digits.
pub fn series_report(points: &[SeriesPoint]) -> Result<String> {
    if points.is_empty() {
        return Err(Error::precondition("series has no points"));
    }
    if let Some(w) = points.windows(2).find(|w| w[0].step >= w[1].step) {
        return Err(Error::precondition(format!(
            "series steps must be strictly increasing, found {} then {}",
            w[0].step, w[1].step
        )));
    }
    let mut out = String::from(SERIES_HEADER);
    out.push('\n');
    for p in points {
        let r = &p.report;
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            p.step,
            format_significant(r.id, 6),
            r.ed,
            format_significant(r.redundancy, 6),
            r.n_used,
            r.n_excluded,
            format_significant(r.lid_stats.mean, 6),
            format_significant(r.lid_stats.std, 6),
        );
    }
    Ok(out)
}
