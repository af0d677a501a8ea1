//! Tables, curves and recommendations derived from estimates.
//!
//! Everything here produces data (CSV text or plain structs) rather than
//! rendered figures.

mod density;
mod rank;
mod series;
mod table;

pub use density::{lid_histogram, lid_kde, silverman_bandwidth, DensityCurve, DensityMethod};
pub use rank::{rank_suggestion, RankSuggestion};
pub use series::{series_report, SeriesPoint, SERIES_HEADER};
pub use table::{redundancy_table, table_csv, table_text, RedundancyEntry, RedundancyRow};

/// Formats `x` rounded to `digits` significant digits, shortest form.
pub fn format_significant(x: f64, digits: usize) -> String {
    if x == 0.0 || !x.is_finite() || digits == 0 {
        return format!("{x}");
    }
    let rounded: f64 = format!("{:.*e}", digits - 1, x)
        .parse()
        .expect("scientific formatting parses back");
    format!("{rounded}")
}
