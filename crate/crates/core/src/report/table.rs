use std::fmt::Write;

use crate::estimator::redundancy;

/// One model to compare: its extrinsic and intrinsic dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct RedundancyEntry {
    pub name: String,
    pub ed: usize,
    pub id: f64,
    /// Optional parameter count, for plotting redundancy against scale.
    pub params: Option<f64>,
}

impl RedundancyEntry {
    pub fn new(name: impl Into<String>, ed: usize, id: f64) -> Self {
        Self {
            name: name.into(),
            ed,
            id,
            params: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RedundancyRow {
    pub entry: RedundancyEntry,
    /// Redundancy in percent, or why it could not be computed.
    pub percent: Result<f64, String>,
}

impl RedundancyRow {
    /// Percentage rounded to two decimals.
    pub fn percent_text(&self) -> String {
        match &self.percent {
            Ok(p) => format!("{p:.2}"),
            Err(_) => String::new(),
        }
    }

    pub fn log10_params(&self) -> Option<f64> {
        self.entry.params.filter(|p| *p > 0.0).map(f64::log10)
    }
}

/// Redundancy for each entry, in input order. Invalid entries yield an
/// error row without affecting the others.
pub fn redundancy_table(entries: &[RedundancyEntry]) -> Vec<RedundancyRow> {
    entries
        .iter()
        .map(|e| RedundancyRow {
            entry: e.clone(),
            percent: redundancy(e.ed, e.id)
                .map(|r| 100.0 * r)
                .map_err(|err| err.to_string()),
        })
        .collect()
}

pub fn table_csv(rows: &[RedundancyRow]) -> String {
    let with_params = rows.iter().any(|r| r.entry.params.is_some());
    let mut out = String::from("model,redundancy_pct,id,ed");
    if with_params {
        out.push_str(",params,log10_params");
    }
    out.push_str(",error\n");
    for r in rows {
        let _ = write!(out, "{},{},{},{}", r.entry.name, r.percent_text(), r.entry.id, r.entry.ed);
        if with_params {
            let p = r.entry.params.map(|p| p.to_string()).unwrap_or_default();
            let lp = r.log10_params().map(|p| p.to_string()).unwrap_or_default();
            let _ = write!(out, ",{p},{lp}");
        }
        let err = r.percent.as_ref().err().map(|e| e.replace(',', ";")).unwrap_or_default();
        let _ = writeln!(out, ",{err}");
    }
    out
}

/// Aligned plain-text rendering: `Model  Redu.(%)  ID  ED`.
pub fn table_text(rows: &[RedundancyRow]) -> String {
    let width = rows.iter().map(|r| r.entry.name.len()).max().unwrap_or(0).max(5);
    let mut out = format!("{:<width$}  {:>9}  {:>9}  {:>6}\n", "Model", "Redu.(%)", "ID", "ED");
    for r in rows {
        match &r.percent {
            Ok(_) => {
                let _ = writeln!(
                    out,
                    "{:<width$}  {:>9}  {:>9.2}  {:>6}",
                    r.entry.name,
                    r.percent_text(),
                    r.entry.id,
                    r.entry.ed
                );
            }
            Err(e) => {
                let _ = writeln!(out, "{:<width$}  error: {e}", r.entry.name);
            }
        }
    }
    out
}
