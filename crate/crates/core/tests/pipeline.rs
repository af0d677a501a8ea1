use std::io::Write;

use idscope_core::estimator::{estimate_with_lids, lid_all};
use idscope_core::ingest::{load_csv, load_word2vec_text};
use idscope_core::knn::exact_knn;
use idscope_core::report::lid_histogram;
use idscope_core::synthetic::{embedded_hypercube, gaussian_cloud};
use idscope_core::{estimate, EmbeddingMatrix, EstimatorOptions};

fn id_of(m: &EmbeddingMatrix) -> f64 {
    estimate(m, &EstimatorOptions::default()).unwrap().id
}

#[test]
fn scale_invariance() {
    let m = embedded_hypercube(2000, 4, 30, 1).unwrap();
    let base = id_of(&m);
    for c in [17.3, 1e-6, 1e6] {
        let scaled = id_of(&m.scaled(c).unwrap());
        assert!(((scaled - base) / base).abs() <= 1e-9, "c={c}: {scaled} vs {base}");
    }
}

#[test]
fn permutation_invariance() {
    let m = gaussian_cloud(1500, 20, 3).unwrap();
    let reversed: Vec<usize> = (0..m.rows()).rev().collect();
    let shuffled: Vec<usize> = (0..m.rows()).map(|i| (i * 7919) % m.rows()).collect();
    let base = id_of(&m);
    for order in [reversed, shuffled] {
        let other = id_of(&m.select_rows(&order));
        assert!(((other - base) / base).abs() <= 1e-12, "{other} vs {base}");
    }
}

#[test]
fn gaussian_cloud_has_no_degenerate_points() {
    let m = gaussian_cloud(10_000, 300, 42).unwrap();
    let t = exact_knn(&m, 5).unwrap();
    let l = lid_all(&t, 1e-12).unwrap();
    assert_eq!(l.n_excluded(), 0);
}

#[test]
fn gaussian_seed_stability() {
    let ids: Vec<f64> = [1u64, 2, 3]
        .iter()
        .map(|&s| id_of(&gaussian_cloud(10_000, 300, s).unwrap()))
        .collect();
    for a in &ids {
        for b in &ids {
            assert!(((a - b) / b).abs() <= 0.05, "{ids:?}");
        }
    }
}

#[test]
fn one_dimensional_manifold() {
    let id = id_of(&embedded_hypercube(5000, 1, 3, 11).unwrap());
    assert!((0.9..=1.15).contains(&id), "{id}");
}

#[test]
fn estimate_grows_with_intrinsic_dimension() {
    let ids: Vec<f64> = [1, 2, 5, 10, 20]
        .iter()
        .map(|&m| id_of(&embedded_hypercube(10_000, m, 300, 42).unwrap()))
        .collect();
    assert!(ids.windows(2).all(|w| w[0] < w[1]), "{ids:?}");
    assert!((4.2..=5.8).contains(&ids[2]), "{ids:?}");
    assert!((8.5..=11.5).contains(&ids[3]), "{ids:?}");
}

#[test]
fn ambient_dimension_does_not_matter() {
    let m = 5;
    let ids: Vec<f64> = [m, 50, 300]
        .iter()
        .map(|&dim| id_of(&embedded_hypercube(4000, m, dim, 8).unwrap()))
        .collect();
    for id in &ids {
        assert!(((id - ids[0]) / ids[0]).abs() <= 0.02, "{ids:?}");
    }
}

#[test]
fn gaussian_lid_histogram_mode_is_central() {
    let m = gaussian_cloud(10_000, 300, 42).unwrap();
    let (_, lids) = estimate_with_lids(&m, &EstimatorOptions::default()).unwrap();
    let h = lid_histogram(&lids, 50).unwrap();
    assert!((h.integral() - 1.0).abs() < 1e-3);
    let mut v: Vec<f64> = lids.valid().collect();
    v.sort_by(f64::total_cmp);
    let p25 = v[v.len() / 4];
    let p75 = v[3 * v.len() / 4];
    let mode = h.mode();
    assert!(mode >= p25 - h.bandwidth && mode <= p75 + h.bandwidth, "mode {mode} outside [{p25}, {p75}]");
}

#[test]
fn report_is_deterministic() {
    let m = gaussian_cloud(3000, 50, 9).unwrap();
    let opts = EstimatorOptions::default();
    assert_eq!(estimate(&m, &opts).unwrap(), estimate(&m, &opts).unwrap());
}

#[test]
fn text_and_csv_loaders_agree() {
    let mut w2v = tempfile::NamedTempFile::new().unwrap();
    write!(w2v, "3 2\nalpha 0.5 -1.25\nbeta 3 4e-3\ngamma 1e2 7\n").unwrap();
    let mut csv = tempfile::NamedTempFile::new().unwrap();
    write!(csv, "alpha,0.5,-1.25\nbeta,3,4e-3\ngamma,1e2,7\n").unwrap();
    let a = load_word2vec_text(w2v.path()).unwrap();
    let b = load_csv(csv.path()).unwrap();
    assert_eq!(a.view(), b.view());
    assert_eq!(a.labels(), b.labels());
}
