use std::f64::consts::PI;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::estimator::LidVector;
use crate::stats;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DensityMethod {
    KdeGaussian,
    Histogram,
}

impl DensityMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            DensityMethod::KdeGaussian => "kde_gaussian",
            DensityMethod::Histogram => "histogram",
        }
    }
}

/// A probability density sampled on an ascending grid.
///
/// For [`DensityMethod::KdeGaussian`] `density[i]` is the value at `grid[i]`.
/// For [`DensityMethod::Histogram`] `grid` holds the `bins + 1` bin edges and
/// `density[i]` is the height of the bin `[grid[i], grid[i + 1])`.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityCurve {
    pub grid: Vec<f64>,
    pub density: Vec<f64>,
    /// Kernel width for KDE, bin width for histograms.
    pub bandwidth: f64,
    pub method: DensityMethod,
}

impl DensityCurve {
    /// Area under the curve: trapezoids between KDE samples, rectangles for
    /// histogram bins (the exact area of the step function).
    pub fn integral(&self) -> f64 {
        match self.method {
            DensityMethod::KdeGaussian => trapezoid(&self.grid, &self.density),
            DensityMethod::Histogram => stats::compensated_sum(
                self.grid
                    .windows(2)
                    .zip(&self.density)
                    .map(|(w, h)| (w[1] - w[0]) * h),
            ),
        }
    }

    /// Grid location of the highest density (bin centre for histograms).
    pub fn mode(&self) -> f64 {
        let (i, _) = self
            .density
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |best, (i, &v)| if v > best.1 { (i, v) } else { best });
        match self.method {
            DensityMethod::KdeGaussian => self.grid[i],
            DensityMethod::Histogram => 0.5 * (self.grid[i] + self.grid[i + 1]),
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        match self.method {
            DensityMethod::KdeGaussian => {
                out.push_str("x,density\n");
                for (x, y) in self.grid.iter().zip(&self.density) {
                    out.push_str(&format!("{x},{y}\n"));
                }
            }
            DensityMethod::Histogram => {
                out.push_str("bin_left,bin_right,density\n");
                for (w, y) in self.grid.windows(2).zip(&self.density) {
                    out.push_str(&format!("{},{},{y}\n", w[0], w[1]));
                }
            }
        }
        out
    }
}

/// Equal-width histogram over `[min, max]`, normalised to unit area.
pub fn lid_histogram(l: &LidVector, bins: usize) -> Result<DensityCurve> {
    if bins == 0 {
        return Err(Error::precondition("histogram needs at least one bin"));
    }
    let values: Vec<f64> = l.valid().collect();
    if values.is_empty() {
        return Err(Error::precondition("no non-excluded LID values to bin"));
    }
    let (mut lo, mut hi) = min_max(&values);
    if lo == hi {
        lo -= 0.5;
        hi += 0.5;
    }
    let width = (hi - lo) / bins as f64;
    let mut counts = vec![0usize; bins];
    for v in &values {
        let b = (((v - lo) / width) as usize).min(bins - 1);
        counts[b] += 1;
    }
    let n = values.len() as f64;
    let grid = (0..=bins).map(|i| lo + i as f64 * width).collect();
    let density = counts.iter().map(|&c| c as f64 / (n * width)).collect();
    Ok(DensityCurve {
        grid,
        density,
        bandwidth: width,
        method: DensityMethod::Histogram,
    })
}

/// Silverman's rule of thumb, `1.06 * sd * n^(-1/5)`.
pub fn silverman_bandwidth(values: &[f64]) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mean = stats::compensated_sum(sorted.iter().copied()) / sorted.len() as f64;
    1.06 * stats::sample_std(&sorted, mean) * (sorted.len() as f64).powf(-0.2)
}

/// Gaussian kernel density on `grid_points` uniform points spanning
/// `[min - 3h, max + 3h]`.
///
/// The sampled curve is rescaled to unit trapezoidal area, which absorbs the
/// kernel mass falling outside the window.
pub fn lid_kde(l: &LidVector, grid_points: usize, bandwidth: Option<f64>) -> Result<DensityCurve> {
    let values: Vec<f64> = l.valid().collect();
    kde(&values, grid_points, bandwidth)
}

pub(crate) fn kde(values: &[f64], grid_points: usize, bandwidth: Option<f64>) -> Result<DensityCurve> {
    if grid_points < 2 {
        return Err(Error::precondition("KDE grid needs at least two points"));
    }
    if values.is_empty() {
        return Err(Error::precondition("no non-excluded LID values for KDE"));
    }
    let (lo, hi) = min_max(values);
    if lo == hi {
        return Err(Error::precondition(
            "all LID values are identical, the KDE bandwidth is degenerate; use a histogram instead",
        ));
    }
    let h = match bandwidth {
        Some(h) if h.is_finite() && h > 0.0 => h,
        Some(h) => return Err(Error::precondition(format!("bandwidth must be positive, got {h}"))),
        None => silverman_bandwidth(values),
    };

    let start = lo - 3.0 * h;
    let step = (hi - lo + 6.0 * h) / (grid_points - 1) as f64;
    let grid: Vec<f64> = (0..grid_points).map(|i| start + i as f64 * step).collect();
    let norm = 1.0 / (values.len() as f64 * h * (2.0 * PI).sqrt());
    let mut density: Vec<f64> = grid
        .par_iter()
        .map(|&x| {
            let s: f64 = values
                .iter()
                .map(|&v| {
                    let z = (x - v) / h;
                    (-0.5 * z * z).exp()
                })
                .sum();
            s * norm
        })
        .collect();
    let area = trapezoid(&grid, &density);
    if !(area > 0.0) {
        return Err(Error::Invariant("KDE has zero area on its grid".into()));
    }
    density.iter_mut().for_each(|y| *y /= area);
    Ok(DensityCurve {
        grid,
        density,
        bandwidth: h,
        method: DensityMethod::KdeGaussian,
    })
}

fn trapezoid(x: &[f64], y: &[f64]) -> f64 {
    stats::compensated_sum(
        x.windows(2)
            .zip(y.windows(2))
            .map(|(xs, ys)| 0.5 * (xs[1] - xs[0]) * (ys[0] + ys[1])),
    )
}

fn min_max(values: &[f64]) -> (f64, f64) {
    values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn lids(values: &[f64]) -> LidVector {
        LidVector::new(5, values.iter().map(|&v| Some(v)).collect()).unwrap()
    }

    #[test]
    fn histogram_single_bin() {
        let c = lid_histogram(&lids(&[1.0, 1.0, 1.0, 1.0]), 1).unwrap();
        assert_eq!(c.density.len(), 1);
        assert!((c.integral() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn histogram_two_equal_bins() {
        let values: Vec<f64> = (1..=10).map(f64::from).collect();
        let c = lid_histogram(&lids(&values), 2).unwrap();
        assert_eq!(c.density[0], c.density[1]);
        assert!((c.integral() - 1.0).abs() < 1e-12);
        assert!(c.grid.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn histogram_errors() {
        assert!(lid_histogram(&lids(&[1.0]), 0).is_err());
        let empty = LidVector::new(5, vec![None]).unwrap();
        assert!(lid_histogram(&empty, 3).is_err());
    }

    #[test]
    fn kde_two_points_symmetric() {
        let c = lid_kde(&lids(&[0.0001, 10.0001]), 161, Some(1.0)).unwrap();
        // grid step is exactly 0.1 so both samples sit on grid points 30 and 130
        assert!((c.grid[30] - 0.0001).abs() < 1e-12);
        assert!((c.grid[130] - 10.0001).abs() < 1e-12);
        assert!((c.density[30] - c.density[130]).abs() < 1e-9);
        assert!((c.integral() - 1.0).abs() < 1e-3);
        assert_eq!(c.bandwidth, 1.0);
    }

    #[test]
    fn kde_degenerate_suggests_histogram() {
        let err = lid_kde(&lids(&[3.0, 3.0, 3.0]), 64, None).unwrap_err().to_string();
        assert!(err.contains("histogram"), "{err}");
        assert!(lid_kde(&lids(&[1.0, 2.0]), 64, Some(0.0)).is_err());
        assert!(lid_kde(&lids(&[1.0, 2.0]), 1, None).is_err());
    }

    #[test]
    fn kde_standard_normal_peak() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let sample: Vec<f64> = (0..10_000).map(|_| StandardNormal.sample(&mut rng)).collect();
        let c = kde(&sample, 512, None).unwrap();
        let peak = c.density.iter().copied().fold(0.0, f64::max);
        let target = 1.0 / (2.0 * PI).sqrt();
        assert!((peak - target).abs() <= 0.1 * target, "{peak}");
        assert!(c.mode().abs() < 0.3);
    }

    #[test]
    fn silverman_matches_formula() {
        let v = [1.0, 2.0, 3.0, 4.0, 5.0];
        let sd = 2.5f64.sqrt();
        assert!((silverman_bandwidth(&v) - 1.06 * sd * 5f64.powf(-0.2)).abs() < 1e-12);
    }

    #[test]
    fn csv_layouts() {
        let h = lid_histogram(&lids(&[1.0, 2.0]), 2).unwrap();
        assert!(h.to_csv().starts_with("bin_left,bin_right,density\n1,1.5,"));
        let k = lid_kde(&lids(&[1.0, 2.0]), 3, Some(1.0)).unwrap();
        assert_eq!(k.to_csv().lines().count(), 4);
    }

    proptest! {
        #[test]
        fn curves_have_unit_area(values in prop::collection::vec(0.5f64..300.0, 2..200), bins in 1usize..60) {
            let l = lids(&values);
            let h = lid_histogram(&l, bins).unwrap();
            prop_assert!((h.integral() - 1.0).abs() < 1e-3);
            prop_assert!(h.grid.windows(2).all(|w| w[0] < w[1]));
            if values.iter().any(|&v| v != values[0]) {
                let k = lid_kde(&l, 256, None).unwrap();
                prop_assert!((k.integral() - 1.0).abs() < 1e-3);
                prop_assert!(k.grid.windows(2).all(|w| w[0] < w[1]));
                prop_assert!(k.density.iter().all(|&y| y >= 0.0));
            }
        }
    }
}
