//! Hamiltonian separability: integration energy, optimality residuals,
//! majorization and frozen-subspace effective Hamiltonians.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{
    c, commutator, diag_projectors, hs_projectors, kron, ptrace, ComplexMatrix, DensityMatrix, EigenSystem,
    FactorShape, HermitianOperator, Subsystem, UnitaryMatrix, C64, I,
};
use crate::info::spectral_density_with;
use crate::search::PermutationSearch;

const RESIDUAL_EPS: f64 = 1e-15;
/// `‖Π₃H‖/‖H‖` below which `H` counts as exactly separable.
const SEPARABLE_FLOOR: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeparabilityReport {
    /// Hilbert-Schmidt norms of `H₀..H₃` in the optimal basis.
    pub norms: [f64; 4],
    pub integration_energy: f64,
    /// Cell `c` of the optimal grid holds `eigenvalues[permutation[c]]`.
    pub permutation: Vec<usize>,
    #[serde(skip)]
    pub eigenvalues: Vec<f64>,
    #[serde(skip)]
    pub certified: bool,
}

impl SeparabilityReport {
    pub fn arranged(&self) -> Vec<f64> {
        self.permutation.iter().map(|&i| self.eigenvalues[i]).collect()
    }
}

/// `‖P_l G P_m‖` for the eigenvalue grid `G`, computed by double centering.
pub fn grid_h3_norm(values: &[f64], shape: FactorShape) -> f64 {
    let (l, m) = (shape.l, shape.m);
    let g = DMatrix::from_row_slice(l, m, values);
    let rows: Vec<f64> = (0..l).map(|i| g.row(i).mean()).collect();
    let cols: Vec<f64> = (0..m).map(|j| g.column(j).mean()).collect();
    let mean = g.mean();
    let mut s = 0.0;
    for i in 0..l {
        for j in 0..m {
            s += (g[(i, j)] - rows[i] - cols[j] + mean).powi(2);
        }
    }
    s.sqrt()
}

/// `E̊ = min_U ‖Π₃ UHU†‖`, searched over eigenvalue arrangements.
pub fn integration_energy(
    h: &HermitianOperator,
    shape: FactorShape,
    search: &dyn PermutationSearch,
    seed: u64,
) -> Result<SeparabilityReport> {
    if h.dim() != shape.dim() {
        return Err(Error::Shape(format!("operator dim {} vs shape ({}, {})", h.dim(), shape.l, shape.m)));
    }
    spectrum_integration_energy(&h.eigenvalues(), shape, search, seed)
}

pub fn spectrum_integration_energy(
    eigenvalues: &[f64],
    shape: FactorShape,
    search: &dyn PermutationSearch,
    seed: u64,
) -> Result<SeparabilityReport> {
    if eigenvalues.len() != shape.dim() {
        return Err(Error::Shape(format!("{} eigenvalues for shape ({}, {})", eigenvalues.len(), shape.l, shape.m)));
    }
    let objective = |cells: &[f64]| grid_h3_norm(cells, shape);
    let out = search.minimize(eigenvalues, &objective, seed)?;
    let arranged: Vec<f64> = out.permutation.iter().map(|&i| eigenvalues[i]).collect();
    let g = diag_projectors(&arranged, shape)?;
    let norms = [g.h0.norm(), g.h1.norm(), g.h2.norm(), g.h3.norm()];
    Ok(SeparabilityReport {
        norms,
        integration_energy: norms[3],
        permutation: out.permutation,
        eigenvalues: eigenvalues.to_vec(),
        certified: out.certified,
    })
}

/// Unitary whose column `c` is the eigenvector placed in grid cell `c`, so
/// that `U† H U` is the optimal diagonal Hamiltonian. `report` must come from
/// [`integration_energy`] on the operator `eig` was taken from.
pub fn optimal_frame(eig: &EigenSystem, report: &SeparabilityReport) -> Result<UnitaryMatrix> {
    let n = eig.values.len();
    if report.permutation.len() != n {
        return Err(Error::Shape(format!("{} cells for {n} eigenvectors", report.permutation.len())));
    }
    UnitaryMatrix::new(ComplexMatrix::from_fn(n, n, |r, cell| eig.vectors[(r, report.permutation[cell])]))
}

/// Largest normalized overlap `|(Π₃H, [A,H])| / (‖Π₃H‖‖H‖ + ε)` over a
/// complete basis of anti-Hermitian generators `A`. Zero when `Π₃H` is at
/// rounding level, where the ratio would only measure noise.
pub fn stationarity_residual(h: &HermitianOperator, shape: FactorShape) -> Result<f64> {
    let x = hs_projectors(h, shape)?.h3;
    if x.norm() <= SEPARABLE_FLOOR * h.norm() {
        return Ok(0.0);
    }
    // (X, [A,H]) = tr(A [H, X]) for Hermitian X.
    let cm = commutator(h.matrix(), x.matrix());
    let n = h.dim();
    let mut worst = 0.0f64;
    for j in 0..n {
        worst = worst.max((I * cm[(j, j)]).norm());
        for k in j + 1..n {
            worst = worst.max((cm[(k, j)] - cm[(j, k)]).norm());
            worst = worst.max((I * (cm[(k, j)] + cm[(j, k)])).norm());
        }
    }
    Ok(worst / (x.norm() * h.norm() + RESIDUAL_EPS))
}

fn prefix_dominates(big: &[f64], small: &[f64]) -> bool {
    let scale = big.iter().map(|x| x.abs()).sum::<f64>().max(1.0);
    let tol = 1e-10 * scale;
    let (mut a, mut b) = (0.0, 0.0);
    for (x, y) in big.iter().zip(small) {
        a += x;
        b += y;
        if a < b - tol {
            return false;
        }
    }
    (a - b).abs() <= tol
}

/// True iff `a` majorizes `b`.
pub fn majorizes(a: &[f64], b: &[f64]) -> bool {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(|x, y| y.total_cmp(x));
    b.sort_by(|x, y| y.total_cmp(x));
    a.len() == b.len() && prefix_dominates(&a, &b)
}

/// Eigenvalues majorize the diagonal, after shifting `h` to be
/// positive semidefinite.
pub fn majorization_check(h: &HermitianOperator) -> bool {
    let ev = h.eigenvalues();
    let shift = ev[0].min(0.0);
    let ev: Vec<f64> = ev.iter().map(|x| x - shift).collect();
    let diag: Vec<f64> = h.matrix().diagonal().iter().map(|z| z.re - shift).collect();
    majorizes(&ev, &diag)
}

#[derive(Clone, Debug)]
pub struct Lemma1Step {
    /// `(U₁⊗U₂) H (U₁⊗U₂)†` with both partial traces diagonal.
    pub rotated: HermitianOperator,
    /// The rotated operator with its off-diagonal part removed.
    pub diagonal: HermitianOperator,
}

/// Rotates by the local eigenbases of `tr₂H` and `tr₁H`, then drops every
/// off-diagonal element.
pub fn lemma1_step(h: &HermitianOperator, shape: FactorShape) -> Result<Lemma1Step> {
    let t2 = HermitianOperator::new(ptrace(h.matrix(), shape, Subsystem::Second)?)?;
    let t1 = HermitianOperator::new(ptrace(h.matrix(), shape, Subsystem::First)?)?;
    let v = kron(&t2.eigen().vectors, &t1.eigen().vectors);
    let rotated = HermitianOperator::new(v.adjoint() * h.matrix() * &v)?;
    let d: Vec<f64> = rotated.matrix().diagonal().iter().map(|z| z.re).collect();
    Ok(Lemma1Step { diagonal: HermitianOperator::from_real_diagonal(&d), rotated })
}

/// Effective theory on the energy eigenstates with spectral weight above
/// `threshold`.
#[derive(Clone, Debug)]
pub struct FrozenSubspace {
    /// Projector `Π` onto the retained eigenstates, in the original basis.
    pub projector: ComplexMatrix,
    /// Columns are the retained energy eigenvectors.
    pub basis: ComplexMatrix,
    /// Indices (ascending energy) of the retained eigenstates.
    pub support: Vec<usize>,
    pub h_eff: HermitianOperator,
    pub rho_eff: DensityMatrix,
    eig: EigenSystem,
}

pub fn freeze_subspace(rho: &DensityMatrix, h: &HermitianOperator, threshold: f64) -> Result<FrozenSubspace> {
    if !(0.0..1.0).contains(&threshold) {
        return Err(Error::OutOfRange(format!("threshold {threshold} outside [0, 1)")));
    }
    let eig = h.eigen();
    let p = spectral_density_with(rho, &eig)?;
    let support: Vec<usize> = p.probs().iter().enumerate().filter(|(_, &x)| x > threshold).map(|(i, _)| i).collect();
    if support.is_empty() {
        return Err(Error::EmptySupport);
    }
    let n = h.dim();
    let basis = ComplexMatrix::from_fn(n, support.len(), |r, k| eig.vectors[(r, support[k])]);
    let projector = &basis * basis.adjoint();
    let h_eff = HermitianOperator::new(basis.adjoint() * h.matrix() * &basis)?;
    let r = basis.adjoint() * rho.matrix() * &basis;
    let tr = r.trace().re;
    let rho_eff = DensityMatrix::new(r * c(1.0 / tr))?;
    Ok(FrozenSubspace { projector, basis, support, h_eff, rho_eff, eig })
}

impl FrozenSubspace {
    /// Full-space Hamiltonian that keeps the retained eigenpairs and assigns
    /// `replacement` energies to the frozen eigenvectors in order.
    pub fn with_complement(&self, replacement: &[f64]) -> Result<HermitianOperator> {
        let n = self.eig.values.len();
        let frozen: Vec<usize> = (0..n).filter(|i| !self.support.contains(i)).collect();
        if replacement.len() != frozen.len() {
            return Err(Error::Shape(format!("{} replacement energies for {} frozen states", replacement.len(), frozen.len())));
        }
        let mut d: Vec<f64> = self.eig.values.iter().copied().collect();
        for (&i, &e) in frozen.iter().zip(replacement) {
            d[i] = e;
        }
        let diag = ComplexMatrix::from_diagonal(&nalgebra::DVector::from_iterator(n, d.iter().map(|&x| C64::new(x, 0.0))));
        HermitianOperator::new(&self.eig.vectors * diag * self.eig.vectors.adjoint())
    }

    /// Lifts an operator on the retained subspace back to the full space.
    pub fn embed(&self, a: &ComplexMatrix) -> ComplexMatrix {
        &self.basis * a * self.basis.adjoint()
    }
}

/// The nine-level arrangement `E_row + E_col` built from `E₁..E₄` with `E₀ = 0`.
pub fn effective_separable_grid(e: [f64; 4]) -> [f64; 9] {
    let [e1, e2, e3, e4] = e;
    [0.0, e1, e2, e3, e1 + e3, e2 + e3, e4, e1 + e4, e2 + e4]
}
