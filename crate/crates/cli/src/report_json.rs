//! JSON report layout. `schema/report.schema.json` describes the same shape.

use idscope_core::report::{rank_suggestion, RankSuggestion};
use idscope_core::{IdReport, Result, SyntheticSpec};
use serde::Serialize;

#[derive(Debug, Serialize)]
pub struct ReportJson {
    pub n: usize,
    pub d: usize,
    pub k: usize,
    pub id: f64,
    pub redundancy: f64,
    pub n_used: usize,
    pub n_excluded: usize,
    pub lid_stats: LidStatsJson,
    pub normalization: &'static str,
    pub zero_eps: f64,
    pub sample: Option<usize>,
    pub rank_suggestion: RankJson,
    pub source: String,
    pub seed: u64,
    pub tool_version: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub synthetic: Option<SyntheticJson>,
}

#[derive(Debug, Serialize)]
pub struct LidStatsJson {
    pub mean: f64,
    pub median: f64,
    pub p5: f64,
    pub p95: f64,
    pub std: f64,
}

#[derive(Debug, Serialize)]
pub struct RankJson {
    pub recommended: usize,
    pub probes: Vec<usize>,
}

#[derive(Debug, Serialize)]
pub struct SyntheticJson {
    pub kind: String,
    pub n: usize,
    pub d: usize,
    pub intrinsic: usize,
    pub seed: u64,
}

impl From<&SyntheticSpec> for SyntheticJson {
    fn from(s: &SyntheticSpec) -> Self {
        Self {
            kind: s.kind.to_string(),
            n: s.n,
            d: s.dim,
            intrinsic: s.intrinsic,
            seed: s.seed,
        }
    }
}

pub struct RunInfo<'a> {
    pub source: &'a str,
    pub seed: u64,
    pub zero_eps: f64,
    pub sample: Option<usize>,
    pub synthetic: Option<&'a SyntheticSpec>,
}

impl ReportJson {
    pub fn new(r: &IdReport, info: RunInfo<'_>) -> Result<Self> {
        let RankSuggestion { recommended, probes } = rank_suggestion(r.id)?;
        Ok(Self {
            n: r.n(),
            d: r.ed,
            k: r.k,
            id: r.id,
            redundancy: r.redundancy,
            n_used: r.n_used,
            n_excluded: r.n_excluded,
            lid_stats: LidStatsJson {
                mean: r.lid_stats.mean,
                median: r.lid_stats.median,
                p5: r.lid_stats.p5,
                p95: r.lid_stats.p95,
                std: r.lid_stats.std,
            },
            normalization: r.normalization.as_str(),
            zero_eps: info.zero_eps,
            sample: info.sample,
            rank_suggestion: RankJson { recommended, probes },
            source: info.source.to_string(),
            seed: info.seed,
            tool_version: env!("CARGO_PKG_VERSION"),
            synthetic: info.synthetic.map(SyntheticJson::from),
        })
    }

    pub const CSV_HEADER: &'static str =
        "n,d,k,id,redundancy,n_used,n_excluded,lid_mean,lid_median,lid_p5,lid_p95,lid_std,seed,source";

    pub fn to_csv(&self) -> String {
        format!(
            "{}\n{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
            Self::CSV_HEADER,
            self.n,
            self.d,
            self.k,
            self.id,
            self.redundancy,
            self.n_used,
            self.n_excluded,
            self.lid_stats.mean,
            self.lid_stats.median,
            self.lid_stats.p5,
            self.lid_stats.p95,
            self.lid_stats.std,
            self.seed,
            self.source.replace(',', ";"),
        )
    }

    pub fn summary(&self) -> String {
        format!(
            "ID={:.4} ED={} redundancy={:.2}%",
            self.id,
            self.d,
            100.0 * self.redundancy
        )
    }
}
