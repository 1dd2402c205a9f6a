//! Quantum integrated information, `Φ = min_U I(UρU†)`.
//!
//! The minimum is attained in a basis where `ρ` is diagonal, so the search
//! runs over ways of laying the eigenvalues out on the `l×m` grid, and the
//! mutual information of a diagonal state comes from its row and column sums.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{DensityMatrix, FactorShape};
use crate::info::entropy_bits;
use crate::random::{dirichlet_uniform, rng};
use crate::search::{Exhaustive, PermutationSearch, SearchOutcome};

/// Mutual information of the diagonal state whose eigenvalues fill the grid row-major.
pub fn grid_mutual_information(values: &[f64], shape: FactorShape) -> f64 {
    let (l, m) = (shape.l, shape.m);
    let rows: Vec<f64> = (0..l).map(|i| values[i * m..(i + 1) * m].iter().sum()).collect();
    let cols: Vec<f64> = (0..m).map(|j| (0..l).map(|i| values[i * m + j]).sum()).collect();
    (entropy_bits(&rows) + entropy_bits(&cols) - entropy_bits(values)).max(0.0)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuantumPhi {
    pub phi: f64,
    /// Descending eigenvalues of `ρ`.
    pub spectrum: Vec<f64>,
    /// Cell `c` of the optimal grid holds `spectrum[permutation[c]]`.
    pub permutation: Vec<usize>,
    pub certified: bool,
}

impl QuantumPhi {
    pub fn grid(&self, shape: FactorShape) -> DMatrix<f64> {
        let cells: Vec<f64> = self.permutation.iter().map(|&i| self.spectrum[i]).collect();
        DMatrix::from_row_slice(shape.l, shape.m, &cells)
    }
}

pub fn spectrum_phi(
    spectrum: &[f64],
    shape: FactorShape,
    search: &dyn PermutationSearch,
    seed: u64,
) -> Result<QuantumPhi> {
    if spectrum.len() != shape.dim() {
        return Err(Error::Shape(format!("{} eigenvalues for shape ({}, {})", spectrum.len(), shape.l, shape.m)));
    }
    let mut spectrum = spectrum.to_vec();
    spectrum.sort_by(|a, b| b.total_cmp(a));
    let objective = |cells: &[f64]| grid_mutual_information(cells, shape);
    let SearchOutcome { value, permutation, certified, .. } = search.minimize(&spectrum, &objective, seed)?;
    Ok(QuantumPhi { phi: value, spectrum, permutation, certified })
}

pub fn quantum_phi(
    rho: &DensityMatrix,
    shape: FactorShape,
    search: &dyn PermutationSearch,
    seed: u64,
) -> Result<QuantumPhi> {
    if rho.dim() != shape.dim() {
        return Err(Error::Shape(format!("state dim {} vs shape ({}, {})", rho.dim(), shape.l, shape.m)));
    }
    spectrum_phi(&rho.spectrum()?, shape, search, seed)
}

/// True iff the grid is the outer product of its row and column sums.
pub fn grid_separable(grid: &DMatrix<f64>) -> bool {
    let rows = grid.column_sum();
    let cols = grid.row_sum();
    let total = grid.sum();
    if total <= 0.0 {
        return false;
    }
    (&rows * &cols / total - grid).amax() <= 1e-10
}

/// Conjugate of a partition given in non-increasing order.
pub fn conjugate_partition(partition: &[usize]) -> Vec<usize> {
    let width = partition.first().copied().unwrap_or(0);
    (0..width).map(|j| partition.iter().filter(|&&k| k > j).count()).collect()
}

/// Mutual information of `k = Σ k_i` equal eigenvalues laid out as the Young
/// diagram of `partition`: `S(p) + S(p*) − log₂ k`.
pub fn young_phi(partition: &[usize], shape: FactorShape) -> Result<f64> {
    if partition.is_empty() || partition.contains(&0) || partition.windows(2).any(|w| w[0] < w[1]) {
        return Err(Error::OutOfRange(format!("{partition:?} is not a partition")));
    }
    if partition.len() > shape.l || partition[0] > shape.m {
        return Err(Error::Shape(format!("{partition:?} does not fit a {}x{} grid", shape.l, shape.m)));
    }
    let k: usize = partition.iter().sum();
    let kf = k as f64;
    let p: Vec<f64> = partition.iter().map(|&x| x as f64 / kf).collect();
    let q: Vec<f64> = conjugate_partition(partition).iter().map(|&x| x as f64 / kf).collect();
    Ok((entropy_bits(&p) + entropy_bits(&q) - kf.log2()).max(0.0))
}

/// Partitions of `k` with at most `rows` parts, each at most `width`.
pub fn partitions_in_box(k: usize, rows: usize, width: usize) -> Vec<Vec<usize>> {
    fn go(left: usize, rows: usize, cap: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if left == 0 {
            out.push(cur.clone());
            return;
        }
        if rows == 0 || cap * rows < left {
            return;
        }
        for part in (1..=cap.min(left)).rev() {
            cur.push(part);
            go(left - part, rows - 1, part, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(k, rows, width, &mut Vec::new(), &mut out);
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct YoungOptimum {
    pub k: usize,
    pub phi: f64,
    pub partition: Vec<usize>,
}

/// For each projection rank `k`, the least-integrated Young diagram.
pub fn young_minima(shape: FactorShape) -> Vec<YoungOptimum> {
    (1..=shape.dim())
        .map(|k| {
            let mut best: Option<YoungOptimum> = None;
            for part in partitions_in_box(k, shape.l, shape.m) {
                let phi = young_phi(&part, shape).expect("partition fits");
                if best.as_ref().is_none_or(|b| phi < b.phi - 1e-12) {
                    best = Some(YoungOptimum { k, phi, partition: part });
                }
            }
            best.expect("k fits in the grid")
        })
        .collect()
}

/// The most integrated projection state: maximum over `k` of the minimal
/// Young-diagram integration.
pub fn young_max(shape: FactorShape) -> YoungOptimum {
    young_minima(shape)
        .into_iter()
        .reduce(|best, cand| if cand.phi > best.phi + 1e-12 { cand } else { best })
        .expect("non-empty grid")
}

/// Spectrum of a rank-`k` projection state on `n` dimensions.
pub fn projection_spectrum(n: usize, k: usize) -> Vec<f64> {
    (0..n).map(|i| if i < k { 1.0 / k as f64 } else { 0.0 }).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MaxPhi {
    pub best_phi: f64,
    pub best_spectrum: Vec<f64>,
    pub best_is_projection: bool,
    /// Largest Φ seen among the random spectra alone.
    pub best_random_phi: f64,
    pub seed: u64,
}

/// Scores every projection spectrum and `trials` Dirichlet-uniform spectra.
pub fn max_phi_search(shape: FactorShape, trials: usize, seed: u64) -> Result<MaxPhi> {
    let n = shape.dim();
    let score = |s: &[f64]| spectrum_phi(s, shape, &Exhaustive, 0).map(|q| q.phi);
    let mut best = (f64::NEG_INFINITY, Vec::new(), true);
    for k in 1..=n {
        let s = projection_spectrum(n, k);
        let phi = score(&s)?;
        if phi > best.0 + 1e-12 {
            best = (phi, s, true);
        }
    }
    let mut g = rng(seed);
    let mut best_random = 0.0f64;
    for _ in 0..trials {
        let mut s = dirichlet_uniform(n, &mut g);
        s.sort_by(|a, b| b.total_cmp(a));
        let phi = score(&s)?;
        best_random = best_random.max(phi);
        if phi > best.0 + 1e-12 {
            best = (phi, s, false);
        }
    }
    Ok(MaxPhi { best_phi: best.0, best_spectrum: best.1, best_is_projection: best.2, best_random_phi: best_random, seed })
}
