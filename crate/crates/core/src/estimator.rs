//! Maximum-likelihood local intrinsic dimension and its global aggregate.
//!
//! For a point with ascending neighbour distances `d_1 <= .. <= d_k` the
//! local estimate is
//!
//! ```text
//! LID = [ 1/(k-1) * sum_{i=1}^{k-1} ln(d_k / d_i) ]^-1
//! ```
//!
//! and the global intrinsic dimension is the harmonic mean of the local
//! estimates. Points whose estimate is undefined (a zero inner distance, or
//! all distances equal) are excluded from the aggregate and counted.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::knn::{exact_knn, NeighborTable};
use crate::matrix::EmbeddingMatrix;
use crate::stats;

pub const DEFAULT_K: usize = 5;
pub const DEFAULT_ZERO_EPS: f64 = 1e-12;

/// Denominator used to average the `k - 1` log ratios.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LidNormalization {
    /// `1/(k-1)`, the plain maximum-likelihood form.
    #[default]
    KMinusOne,
    /// `1/(k-2)`, the bias-corrected variant. Needs `k >= 3`.
    KMinusTwo,
}

impl LidNormalization {
    fn numerator(self, k: usize) -> f64 {
        match self {
            LidNormalization::KMinusOne => (k - 1) as f64,
            LidNormalization::KMinusTwo => (k - 2) as f64,
        }
    }

    fn min_k(self) -> usize {
        match self {
            LidNormalization::KMinusOne => 2,
            LidNormalization::KMinusTwo => 3,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            LidNormalization::KMinusOne => "k-1",
            LidNormalization::KMinusTwo => "k-2",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimatorOptions {
    pub k: usize,
    /// Distances below this are treated as zero.
    pub zero_eps: f64,
    pub normalization: LidNormalization,
}

impl Default for EstimatorOptions {
    fn default() -> Self {
        Self {
            k: DEFAULT_K,
            zero_eps: DEFAULT_ZERO_EPS,
            normalization: LidNormalization::default(),
        }
    }
}

impl EstimatorOptions {
    pub fn with_k(k: usize) -> Self {
        Self {
            k,
            ..Self::default()
        }
    }

    fn validate(&self) -> Result<()> {
        let min = self.normalization.min_k();
        if self.k < min {
            return Err(Error::precondition(format!(
                "k={} is too small, the {} normalization needs k >= {min}",
                self.k,
                self.normalization.as_str()
            )));
        }
        if !(self.zero_eps >= 0.0 && self.zero_eps.is_finite()) {
            return Err(Error::precondition(format!(
                "zero_eps must be finite and non-negative, got {}",
                self.zero_eps
            )));
        }
        Ok(())
    }
}

/// Per-point estimates; `None` marks a degenerate, excluded point.
#[derive(Debug, Clone, PartialEq)]
pub struct LidVector {
    k: usize,
    values: Vec<Option<f64>>,
}

impl LidVector {
    pub fn new(k: usize, values: Vec<Option<f64>>) -> Result<Self> {
        if let Some(i) = values
            .iter()
            .position(|v| matches!(v, Some(x) if !(x.is_finite() && *x > 0.0)))
        {
            return Err(Error::precondition(format!(
                "LID at row {i} must be finite and positive"
            )));
        }
        Ok(Self { k, values })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[Option<f64>] {
        &self.values
    }

    /// Estimates of the non-excluded points, in row order.
    pub fn valid(&self) -> impl Iterator<Item = f64> + '_ {
        self.values.iter().flatten().copied()
    }

    pub fn excluded_mask(&self) -> Vec<bool> {
        self.values.iter().map(Option::is_none).collect()
    }

    pub fn n_used(&self) -> usize {
        self.values.iter().filter(|v| v.is_some()).count()
    }

    pub fn n_excluded(&self) -> usize {
        self.len() - self.n_used()
    }
}

/// Dispersion of the non-excluded local estimates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LidStats {
    pub mean: f64,
    pub median: f64,
    pub p5: f64,
    pub p95: f64,
    pub std: f64,
    pub min: f64,
    pub max: f64,
}

impl LidStats {
    pub fn from_lids(l: &LidVector) -> Result<Self> {
        let mut sorted: Vec<f64> = l.valid().collect();
        if sorted.is_empty() {
            return Err(all_excluded(l));
        }
        sorted.sort_by(f64::total_cmp);
        let mean = stats::compensated_sum(sorted.iter().copied()) / sorted.len() as f64;
        Ok(Self {
            mean,
            median: stats::percentile_sorted(&sorted, 0.5),
            p5: stats::percentile_sorted(&sorted, 0.05),
            p95: stats::percentile_sorted(&sorted, 0.95),
            std: stats::sample_std(&sorted, mean),
            min: sorted[0],
            max: sorted[sorted.len() - 1],
        })
    }
}

/// Global estimate for one matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct IdReport {
    pub id: f64,
    pub ed: usize,
    pub k: usize,
    pub redundancy: f64,
    pub n_used: usize,
    pub n_excluded: usize,
    pub lid_stats: LidStats,
    pub normalization: LidNormalization,
}

impl IdReport {
    pub fn from_lids(l: &LidVector, ed: usize, normalization: LidNormalization) -> Result<Self> {
        let id = global_id(l)?;
        let report = Self {
            id,
            ed,
            k: l.k(),
            redundancy: redundancy(ed, id)?,
            n_used: l.n_used(),
            n_excluded: l.n_excluded(),
            lid_stats: LidStats::from_lids(l)?,
            normalization,
        };
        report.check()?;
        Ok(report)
    }

    pub fn n(&self) -> usize {
        self.n_used + self.n_excluded
    }

    /// Verifies the relations that must hold between the stored fields.
    pub fn check(&self) -> Result<()> {
        let expected = (self.ed as f64 - self.id) / self.ed as f64;
        if (self.redundancy - expected).abs() > 1e-12 {
            return Err(Error::Invariant(format!(
                "redundancy {} does not match (ed - id)/ed = {expected}",
                self.redundancy
            )));
        }
        let slack = 1e-12 * self.id.abs();
        if self.id < self.lid_stats.min - slack || self.id > self.lid_stats.max + slack {
            return Err(Error::Invariant(format!(
                "global ID {} outside [{}, {}]",
                self.id, self.lid_stats.min, self.lid_stats.max
            )));
        }
        Ok(())
    }
}

/// Local intrinsic dimension from `k` ascending neighbour distances.
///
/// Returns `Ok(None)` for degenerate inputs: a zero distance before the last
/// one, or all distances equal.
pub fn lid_point(dists: &[f64]) -> Result<Option<f64>> {
    lid_point_with(dists, LidNormalization::KMinusOne)
}

pub fn lid_point_with(dists: &[f64], normalization: LidNormalization) -> Result<Option<f64>> {
    let k = dists.len();
    if k < normalization.min_k() {
        return Err(Error::precondition(format!(
            "need at least {} distances, got {k}",
            normalization.min_k()
        )));
    }
    if dists.iter().any(|d| !(d.is_finite() && *d >= 0.0)) {
        return Err(Error::precondition("distances must be finite and non-negative"));
    }
    if dists.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::precondition("distances must be sorted ascending"));
    }
    Ok(lid_sorted(dists, normalization))
}

fn lid_sorted(dists: &[f64], normalization: LidNormalization) -> Option<f64> {
    let (&farthest, inner) = dists.split_last()?;
    if inner.iter().any(|&d| d == 0.0) || farthest == 0.0 {
        return None;
    }
    let ln_far = farthest.ln();
    let sum: f64 = inner.iter().map(|d| ln_far - d.ln()).sum();
    if sum <= 0.0 {
        return None;
    }
    Some(normalization.numerator(dists.len()) / sum)
}

/// Applies [`lid_point`] to every row of a neighbour table.
pub fn lid_all(t: &NeighborTable, zero_eps: f64) -> Result<LidVector> {
    lid_all_with(t, zero_eps, LidNormalization::KMinusOne)
}

pub fn lid_all_with(t: &NeighborTable, zero_eps: f64, normalization: LidNormalization) -> Result<LidVector> {
    if t.k() < normalization.min_k() {
        return Err(Error::precondition(format!(
            "neighbour table has k={}, need k >= {}",
            t.k(),
            normalization.min_k()
        )));
    }
    let values = (0..t.rows())
        .into_par_iter()
        .map(|i| {
            let dists: Vec<f64> = t
                .distances(i)
                .iter()
                .map(|&d| if d < zero_eps { 0.0 } else { d })
                .collect();
            lid_sorted(&dists, normalization)
        })
        .collect();
    LidVector::new(t.k(), values)
}

/// Harmonic mean of the non-excluded local estimates.
///
/// Reciprocals are summed in sorted order, so the result is bit-identical
/// under any permutation of the points.
pub fn global_id(l: &LidVector) -> Result<f64> {
    let reciprocals: Vec<f64> = l.valid().map(f64::recip).collect();
    if reciprocals.is_empty() {
        return Err(all_excluded(l));
    }
    let n = reciprocals.len() as f64;
    Ok(n / stats::sorted_sum(&reciprocals))
}

/// Fraction of the extrinsic dimension beyond the intrinsic one,
/// `(ed - id) / ed`. Negative when `id > ed`.
pub fn redundancy(ed: usize, id: f64) -> Result<f64> {
    if ed == 0 {
        return Err(Error::precondition("extrinsic dimension must be positive"));
    }
    if !(id.is_finite() && id > 0.0) {
        return Err(Error::precondition(format!(
            "intrinsic dimension must be finite and positive, got {id}"
        )));
    }
    let ed = ed as f64;
    Ok((ed - id) / ed)
}

/// Neighbour search, local estimates, harmonic mean and redundancy.
pub fn estimate(m: &EmbeddingMatrix, opts: &EstimatorOptions) -> Result<IdReport> {
    estimate_with_lids(m, opts).map(|(report, _)| report)
}

/// Like [`estimate`], also returning the per-point estimates.
pub fn estimate_with_lids(m: &EmbeddingMatrix, opts: &EstimatorOptions) -> Result<(IdReport, LidVector)> {
    opts.validate()?;
    let table = exact_knn(m, opts.k)?;
    let lids = lid_all_with(&table, opts.zero_eps, opts.normalization)?;
    let report = IdReport::from_lids(&lids, m.dim(), opts.normalization)?;
    Ok((report, lids))
}

fn all_excluded(l: &LidVector) -> Error {
    Error::precondition(format!(
        "all {} points are degenerate (duplicate or equidistant neighbours); no estimate possible",
        l.len()
    ))
}
