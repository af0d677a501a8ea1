//! Exact Euclidean k-nearest-neighbour search.
//!
//! The search is brute force over square row blocks. For each pair of blocks
//! `(I, J)` with `I <= J` the squared distances come from the expansion
//! `|a|^2 + |b|^2 - 2 a.b`, evaluated as one matrix product, and feed the
//! bounded candidate lists of both blocks. Entries dominated by cancellation
//! are recomputed by direct subtraction. The `k` survivors of every row are
//! finally re-evaluated as true Euclidean distances on the original rows.
//!
//! Candidates are ordered by `(distance, index)`, so the surviving set of a
//! row is the `k` smallest elements of a total order. That makes the result
//! independent of the order in which blocks are visited and therefore of the
//! number of worker threads.

use std::cmp::Ordering;
use std::sync::Mutex;

use ndarray::{s, Array2, ArrayView1, ArrayView2, Axis};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::matrix::EmbeddingMatrix;

const BLOCK: usize = 256;

// Squared distances below this fraction of |a|^2 + |b|^2 are recomputed
// directly; above it the expansion keeps ~1e-10 relative accuracy.
const REFINE_RATIO: f64 = 1e-6;

/// Sorted nearest-neighbour distances and indices for every row.
#[derive(Debug, Clone, PartialEq)]
pub struct NeighborTable {
    k: usize,
    indices: Array2<usize>,
    distances: Array2<f64>,
}

impl NeighborTable {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn rows(&self) -> usize {
        self.indices.nrows()
    }

    /// Neighbour indices of row `i`, nearest first.
    pub fn indices(&self, i: usize) -> ArrayView1<'_, usize> {
        self.indices.row(i)
    }

    /// Euclidean distances of row `i`, ascending.
    pub fn distances(&self, i: usize) -> ArrayView1<'_, f64> {
        self.distances.row(i)
    }

    pub fn all_indices(&self) -> ArrayView2<'_, usize> {
        self.indices.view()
    }

    pub fn all_distances(&self) -> ArrayView2<'_, f64> {
        self.distances.view()
    }
}

/// Finds the `k` nearest other rows of every row, exactly.
///
/// Ties in distance are broken towards the smaller row index.
pub fn exact_knn(m: &EmbeddingMatrix, k: usize) -> Result<NeighborTable> {
    exact_knn_blocked(m, k, BLOCK)
}

pub(crate) fn exact_knn_blocked(m: &EmbeddingMatrix, k: usize, block: usize) -> Result<NeighborTable> {
    let n = m.rows();
    if k == 0 {
        return Err(Error::precondition("k must be at least 1"));
    }
    if k >= n {
        return Err(Error::precondition(format!(
            "k={k} must be less than the number of rows n={n}"
        )));
    }
    if u32::try_from(n).is_err() {
        return Err(Error::precondition(format!("too many rows ({n})")));
    }

    let centered = centered(m.view());
    let norms: Vec<f64> = centered.rows().into_iter().map(|r| r.dot(&r)).collect();
    let blocks = n.div_ceil(block);
    let lists: Vec<Mutex<Vec<TopK>>> = (0..blocks)
        .map(|b| {
            let len = block.min(n - b * block);
            Mutex::new(vec![TopK::new(k); len])
        })
        .collect();
    let pairs: Vec<(usize, usize)> = (0..blocks)
        .flat_map(|bi| (bi..blocks).map(move |bj| (bi, bj)))
        .collect();

    let kernel = Kernel {
        data: centered.view(),
        norms: &norms,
        block,
    };
    pairs
        .par_iter()
        .for_each(|&(bi, bj)| kernel.process(bi, bj, &lists, k));

    let lists: Vec<TopK> = lists
        .into_iter()
        .flat_map(|l| l.into_inner().expect("candidate list lock poisoned"))
        .collect();

    let original = m.view();
    let rows: Vec<Vec<(f64, usize)>> = lists
        .par_iter()
        .enumerate()
        .map(|(i, list)| {
            let mut exact: Vec<(f64, usize)> = list
                .items
                .iter()
                .map(|&(_, j)| {
                    let j = j as usize;
                    (euclidean(original.row(i), original.row(j)), j)
                })
                .collect();
            exact.sort_by(cmp_candidate_usize);
            exact
        })
        .collect();

    let mut indices = Array2::zeros((n, k));
    let mut distances = Array2::zeros((n, k));
    for (i, row) in rows.iter().enumerate() {
        if row.len() != k {
            return Err(Error::Invariant(format!(
                "row {i} collected {} neighbours, expected {k}",
                row.len()
            )));
        }
        for (slot, &(d, j)) in row.iter().enumerate() {
            indices[[i, slot]] = j;
            distances[[i, slot]] = d;
        }
    }
    Ok(NeighborTable {
        k,
        indices,
        distances,
    })
}

/// Squared Euclidean distances between every row of `a` and every row of `b`.
///
/// Uses the norm expansion; results are clamped at zero and entries small
/// relative to the row norms are recomputed directly, so identical rows give
/// exactly zero.
pub fn pairwise_block_distances(a: ArrayView2<'_, f64>, b: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
    if a.ncols() != b.ncols() {
        return Err(Error::precondition(format!(
            "dimension mismatch: {} vs {}",
            a.ncols(),
            b.ncols()
        )));
    }
    let na: Vec<f64> = a.rows().into_iter().map(|r| r.dot(&r)).collect();
    let nb: Vec<f64> = b.rows().into_iter().map(|r| r.dot(&r)).collect();
    let mut g = a.dot(&b.t());
    for ((i, j), v) in g.indexed_iter_mut() {
        *v = refine(na[i] + nb[j] - 2.0 * *v, na[i] + nb[j], || {
            squared_euclidean(a.row(i), b.row(j))
        });
    }
    Ok(g)
}

struct Kernel<'a> {
    data: ArrayView2<'a, f64>,
    norms: &'a [f64],
    block: usize,
}

impl Kernel<'_> {
    fn range(&self, b: usize) -> (usize, usize) {
        let start = b * self.block;
        (start, (start + self.block).min(self.data.nrows()))
    }

    fn process(&self, bi: usize, bj: usize, lists: &[Mutex<Vec<TopK>>], k: usize) {
        let (i0, i1) = self.range(bi);
        let (j0, j1) = self.range(bj);
        let a = self.data.slice(s![i0..i1, ..]);
        let b = self.data.slice(s![j0..j1, ..]);
        let g = a.dot(&b.t());

        let mut left = snapshot(&lists[bi], k);
        let sq = |i: usize, j: usize, dot: f64| {
            let gi = i0 + i;
            let gj = j0 + j;
            let scale = self.norms[gi] + self.norms[gj];
            refine(scale - 2.0 * dot, scale, || {
                squared_euclidean(self.data.row(gi), self.data.row(gj))
            })
        };

        if bi == bj {
            for (i, grow) in g.axis_iter(Axis(0)).enumerate() {
                for j in i + 1..grow.len() {
                    let d = sq(i, j, grow[j]);
                    left[i].offer(d, (j0 + j) as u32);
                    left[j].offer(d, (i0 + i) as u32);
                }
            }
            merge(&lists[bi], left);
        } else {
            let mut right = snapshot(&lists[bj], k);
            for (i, grow) in g.axis_iter(Axis(0)).enumerate() {
                let list = &mut left[i];
                for (j, &dot) in grow.iter().enumerate() {
                    let d = sq(i, j, dot);
                    list.offer(d, (j0 + j) as u32);
                    right[j].offer(d, (i0 + i) as u32);
                }
            }
            merge(&lists[bi], left);
            merge(&lists[bj], right);
        }
    }
}

/// Fresh lists whose admission bound is the current global bound.
fn snapshot(shared: &Mutex<Vec<TopK>>, k: usize) -> Vec<TopK> {
    let guard = shared.lock().expect("candidate list lock poisoned");
    guard.iter().map(|l| TopK::with_ceiling(k, l.bound())).collect()
}

fn merge(shared: &Mutex<Vec<TopK>>, local: Vec<TopK>) {
    let mut guard = shared.lock().expect("candidate list lock poisoned");
    for (global, local) in guard.iter_mut().zip(local) {
        for (d, j) in local.items {
            global.offer(d, j);
        }
    }
}

/// The `k` smallest `(distance, index)` pairs seen so far, ascending.
#[derive(Debug, Clone)]
struct TopK {
    k: usize,
    items: Vec<(f64, u32)>,
    ceiling: (f64, u32),
}

impl TopK {
    fn new(k: usize) -> Self {
        Self::with_ceiling(k, (f64::INFINITY, u32::MAX))
    }

    fn with_ceiling(k: usize, ceiling: (f64, u32)) -> Self {
        Self {
            k,
            items: Vec::with_capacity(k + 1),
            ceiling,
        }
    }

    fn bound(&self) -> (f64, u32) {
        if self.items.len() == self.k {
            self.items[self.k - 1]
        } else {
            self.ceiling
        }
    }

    #[inline]
    fn offer(&mut self, d: f64, j: u32) {
        let (bd, bj) = self.bound();
        if d > bd || (d == bd && j >= bj) {
            return;
        }
        let pos = self
            .items
            .partition_point(|&(od, oj)| od < d || (od == d && oj < j));
        self.items.insert(pos, (d, j));
        self.items.truncate(self.k);
    }
}

#[inline]
fn refine(approx: f64, scale: f64, exact: impl FnOnce() -> f64) -> f64 {
    if approx <= REFINE_RATIO * scale {
        exact()
    } else {
        approx
    }
}

fn centered(data: ArrayView2<'_, f64>) -> Array2<f64> {
    let mean = data.mean_axis(Axis(0)).expect("matrix has rows");
    &data - &mean
}

fn squared_euclidean(a: ArrayView1<'_, f64>, b: ArrayView1<'_, f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn euclidean(a: ArrayView1<'_, f64>, b: ArrayView1<'_, f64>) -> f64 {
    squared_euclidean(a, b).sqrt()
}

fn cmp_candidate_usize(a: &(f64, usize), b: &(f64, usize)) -> Ordering {
    a.0.total_cmp(&b.0).then(a.1.cmp(&b.1))
}
