//! Dense complex linear algebra on bipartite Hilbert spaces.
//!
//! Composite indices follow `α = m·i + i'`, where `i < l` indexes the first
//! factor and `i' < m` the second, so the first factor is the most significant
//! digit. `kron`, `ptrace`, `star` and `pr` all share this layout.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type ComplexMatrix = DMatrix<C64>;
pub type StateVector = DVector<C64>;

/// Relative tolerance for Hermiticity and trace checks.
pub const STRUCT_TOL: f64 = 1e-12;
/// Eigenvalues between this and zero are treated as rounding noise.
pub const EIGEN_FLOOR: f64 = -1e-10;
/// Per-entry tolerance on `U U† = I`.
pub const UNITARY_TOL: f64 = 1e-10;

pub const I: C64 = C64 { re: 0.0, im: 1.0 };

pub fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FactorShape {
    pub l: usize,
    pub m: usize,
}

impl FactorShape {
    pub fn new(l: usize, m: usize) -> Result<Self> {
        if l < 2 || m < 2 {
            return Err(Error::Shape(format!("factor dimensions must be >= 2, got ({l}, {m})")));
        }
        Ok(FactorShape { l, m })
    }

    pub fn dim(&self) -> usize {
        self.l * self.m
    }

    pub fn swapped(&self) -> FactorShape {
        FactorShape { l: self.m, m: self.l }
    }

    pub(crate) fn check_square(&self, a: &ComplexMatrix) -> Result<()> {
        if a.nrows() != self.dim() || a.ncols() != self.dim() {
            return Err(Error::Shape(format!(
                "expected {}x{} for shape ({}, {}), got {}x{}",
                self.dim(),
                self.dim(),
                self.l,
                self.m,
                a.nrows(),
                a.ncols()
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Subsystem {
    First,
    Second,
}

pub fn identity(n: usize) -> ComplexMatrix {
    ComplexMatrix::identity(n, n)
}

pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kronecker(b)
}

/// Partial trace over `which`. Tracing the first factor leaves an `m×m`
/// matrix, tracing the second leaves `l×l`.
pub fn ptrace(a: &ComplexMatrix, shape: FactorShape, which: Subsystem) -> Result<ComplexMatrix> {
    shape.check_square(a)?;
    let (l, m) = (shape.l, shape.m);
    Ok(match which {
        Subsystem::First => ComplexMatrix::from_fn(m, m, |i, j| (0..l).map(|k| a[(k * m + i, k * m + j)]).sum()),
        Subsystem::Second => ComplexMatrix::from_fn(l, l, |i, j| (0..m).map(|k| a[(i * m + k, j * m + k)]).sum()),
    })
}

fn same_dims(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<()> {
    if a.shape() != b.shape() {
        return Err(Error::Shape(format!("{:?} vs {:?}", a.shape(), b.shape())));
    }
    Ok(())
}

/// `(A, B) = tr A†B`.
pub fn hs_inner(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<C64> {
    same_dims(a, b)?;
    Ok(a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum())
}

pub fn hs_norm(a: &ComplexMatrix) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn commutator(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a * b - b * a
}

fn max_abs(a: &ComplexMatrix) -> f64 {
    a.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn hermitian_part(a: &ComplexMatrix) -> ComplexMatrix {
    (a + a.adjoint()) * c(0.5)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MatrixJson", into = "MatrixJson")]
pub struct HermitianOperator {
    matrix: ComplexMatrix,
}

impl HermitianOperator {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::Shape(format!("operator must be square, got {:?}", matrix.shape())));
        }
        if matrix.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        let dev = max_abs(&(&matrix - matrix.adjoint()));
        if dev > STRUCT_TOL * hs_norm(&matrix).max(1.0) {
            return Err(Error::NotHermitian(dev));
        }
        Ok(HermitianOperator { matrix: hermitian_part(&matrix) })
    }

    pub(crate) fn from_hermitian_part(matrix: ComplexMatrix) -> Self {
        HermitianOperator { matrix: hermitian_part(&matrix) }
    }

    pub fn from_real_diagonal(d: &[f64]) -> Self {
        HermitianOperator {
            matrix: ComplexMatrix::from_diagonal(&DVector::from_iterator(d.len(), d.iter().map(|&x| c(x)))),
        }
    }

    pub fn from_real(m: &DMatrix<f64>) -> Result<Self> {
        Self::new(m.map(c))
    }

    pub fn zeros(n: usize) -> Self {
        HermitianOperator { matrix: ComplexMatrix::zeros(n, n) }
    }

    pub fn identity(n: usize) -> Self {
        HermitianOperator { matrix: identity(n) }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    pub fn norm(&self) -> f64 {
        hs_norm(&self.matrix)
    }

    pub fn eigen(&self) -> EigenSystem {
        EigenSystem::of(&self.matrix)
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        self.eigen().values.iter().copied().collect()
    }

    pub fn scale(&self, s: f64) -> Self {
        HermitianOperator { matrix: &self.matrix * c(s) }
    }

    pub fn add(&self, other: &HermitianOperator) -> Result<Self> {
        same_dims(&self.matrix, &other.matrix)?;
        Ok(HermitianOperator { matrix: &self.matrix + &other.matrix })
    }

    pub fn kron(&self, other: &HermitianOperator) -> HermitianOperator {
        HermitianOperator { matrix: kron(&self.matrix, &other.matrix) }
    }
}

/// Eigenvalues sorted ascending with matching eigenvector columns.
#[derive(Clone, Debug)]
pub struct EigenSystem {
    pub values: DVector<f64>,
    pub vectors: ComplexMatrix,
}

impl EigenSystem {
    fn of(a: &ComplexMatrix) -> Self {
        let eig = a.clone().symmetric_eigen();
        let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
        order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
        let values = DVector::from_iterator(order.len(), order.iter().map(|&i| eig.eigenvalues[i]));
        let vectors = ComplexMatrix::from_fn(a.nrows(), order.len(), |r, k| eig.eigenvectors[(r, order[k])]);
        EigenSystem { values, vectors }
    }

    /// `e^{iHt}`.
    pub fn propagator(&self, t: f64) -> ComplexMatrix {
        let mut scaled = self.vectors.clone();
        for (k, mut col) in scaled.column_iter_mut().enumerate() {
            let (sin, cos) = libm::sincos(self.values[k] * t);
            col *= Complex64::new(cos, sin);
        }
        scaled * self.vectors.adjoint()
    }

    pub fn to_eigenbasis(&self, a: &ComplexMatrix) -> ComplexMatrix {
        self.vectors.adjoint() * a * &self.vectors
    }

    pub fn from_eigenbasis(&self, a: &ComplexMatrix) -> ComplexMatrix {
        &self.vectors * a * self.vectors.adjoint()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MatrixJson", into = "MatrixJson")]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
}

impl DensityMatrix {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        let h = HermitianOperator::new(matrix).map_err(|e| Error::InvalidState(e.to_string()))?;
        let tr = h.trace();
        if (tr - 1.0).abs() > STRUCT_TOL * (h.dim() as f64).max(1.0) {
            return Err(Error::InvalidState(format!("trace {tr}")));
        }
        let min = h.eigen().values[0];
        if min < EIGEN_FLOOR {
            return Err(Error::InvalidState(format!("negative eigenvalue {min:e}")));
        }
        Ok(DensityMatrix { matrix: h.matrix })
    }

    pub(crate) fn from_trusted(matrix: ComplexMatrix) -> Self {
        DensityMatrix { matrix: hermitian_part(&matrix) }
    }

    /// `|ψ⟩⟨ψ|` after normalizing `ψ`.
    pub fn pure(psi: &StateVector) -> Result<Self> {
        let norm = psi.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::InvalidState("zero or non-finite state vector".into()));
        }
        let v = psi / c(norm);
        Ok(DensityMatrix { matrix: &v * v.adjoint() })
    }

    pub fn maximally_mixed(n: usize) -> Self {
        DensityMatrix { matrix: identity(n) * c(1.0 / n as f64) }
    }

    pub fn from_probabilities(p: &[f64]) -> Result<Self> {
        let total: f64 = p.iter().sum();
        if p.iter().any(|&x| x < -1e-12) || (total - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidState(format!("not a probability vector (sum {total})")));
        }
        let d: Vec<f64> = p.iter().map(|&x| x.max(0.0)).collect();
        Ok(DensityMatrix { matrix: HermitianOperator::from_real_diagonal(&d).matrix })
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn tensor(&self, other: &DensityMatrix) -> DensityMatrix {
        DensityMatrix { matrix: kron(&self.matrix, &other.matrix) }
    }

    pub fn reduced(&self, shape: FactorShape, traced: Subsystem) -> Result<DensityMatrix> {
        Ok(DensityMatrix::from_trusted(ptrace(&self.matrix, shape, traced)?))
    }

    /// Eigenvalues in descending order, with rounding noise clamped to zero.
    pub fn spectrum(&self) -> Result<Vec<f64>> {
        let mut ev: Vec<f64> = EigenSystem::of(&self.matrix).values.iter().rev().copied().collect();
        for x in ev.iter_mut() {
            if *x < EIGEN_FLOOR {
                return Err(Error::InvalidState(format!("negative eigenvalue {x:e}")));
            }
            *x = x.max(0.0);
        }
        Ok(ev)
    }

    pub fn rotate(&self, u: &UnitaryMatrix) -> Result<DensityMatrix> {
        same_dims(&self.matrix, &u.matrix)?;
        Ok(DensityMatrix::from_trusted(&u.matrix * &self.matrix * u.matrix.adjoint()))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct UnitaryMatrix {
    matrix: ComplexMatrix,
}

impl UnitaryMatrix {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::Shape(format!("unitary must be square, got {:?}", matrix.shape())));
        }
        let n = matrix.nrows();
        let dev = max_abs(&(&matrix * matrix.adjoint() - identity(n)));
        if dev > UNITARY_TOL {
            return Err(Error::NotUnitary(dev));
        }
        Ok(UnitaryMatrix { matrix })
    }

    pub fn identity(n: usize) -> Self {
        UnitaryMatrix { matrix: identity(n) }
    }

    /// `e^{iA}` for Hermitian `A`.
    pub fn exp_i(a: &HermitianOperator) -> Self {
        UnitaryMatrix { matrix: a.eigen().propagator(1.0) }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn adjoint(&self) -> UnitaryMatrix {
        UnitaryMatrix { matrix: self.matrix.adjoint() }
    }

    /// `U A U†`.
    pub fn conjugate(&self, a: &ComplexMatrix) -> ComplexMatrix {
        &self.matrix * a * self.matrix.adjoint()
    }
}

/// Returns `A·B` and `A×B = i[A,B]`.
pub fn dot_cross(a: &HermitianOperator, b: &HermitianOperator) -> Result<(f64, HermitianOperator)> {
    let dot = hs_inner(&a.matrix, &b.matrix)?.re;
    let cross = commutator(&a.matrix, &b.matrix) * I;
    Ok((dot, HermitianOperator::from_hermitian_part(cross)))
}

/// The four Hilbert-Schmidt components of an operator on a bipartite space.
#[derive(Clone, Debug)]
pub struct HsComponents {
    pub h0: HermitianOperator,
    pub h1: HermitianOperator,
    pub h2: HermitianOperator,
    pub h3: HermitianOperator,
}

impl HsComponents {
    pub fn parts(&self) -> [&HermitianOperator; 4] {
        [&self.h0, &self.h1, &self.h2, &self.h3]
    }

    pub fn norms(&self) -> [f64; 4] {
        self.parts().map(|h| h.norm())
    }
}

pub fn hs_projectors(h: &HermitianOperator, shape: FactorShape) -> Result<HsComponents> {
    shape.check_square(&h.matrix)?;
    let (l, m, n) = (shape.l, shape.m, shape.dim());
    let h0 = identity(n) * c(h.trace() / n as f64);
    let t2 = ptrace(&h.matrix, shape, Subsystem::Second)? * c(1.0 / m as f64);
    let t1 = ptrace(&h.matrix, shape, Subsystem::First)? * c(1.0 / l as f64);
    let h1 = kron(&t2, &identity(m)) - &h0;
    let h2 = kron(&identity(l), &t1) - &h0;
    let h3 = &h.matrix - &h0 - &h1 - &h2;
    Ok(HsComponents {
        h0: HermitianOperator::from_hermitian_part(h0),
        h1: HermitianOperator::from_hermitian_part(h1),
        h2: HermitianOperator::from_hermitian_part(h2),
        h3: HermitianOperator::from_hermitian_part(h3),
    })
}

/// Lays `eigs` out row-major in an `l×m` grid; row = first factor.
pub fn eigen_grid(eigs: &[f64], shape: FactorShape) -> Result<DMatrix<f64>> {
    if eigs.len() != shape.dim() {
        return Err(Error::Shape(format!("{} values for a {}x{} grid", eigs.len(), shape.l, shape.m)));
    }
    Ok(DMatrix::from_row_slice(shape.l, shape.m, eigs))
}

/// Grid form of the four components of a diagonal operator.
#[derive(Clone, Debug, PartialEq)]
pub struct GridComponents {
    pub h0: DMatrix<f64>,
    pub h1: DMatrix<f64>,
    pub h2: DMatrix<f64>,
    pub h3: DMatrix<f64>,
}

fn averaging(k: usize) -> DMatrix<f64> {
    DMatrix::from_element(k, k, 1.0 / k as f64)
}

pub fn diag_projectors(eigs: &[f64], shape: FactorShape) -> Result<GridComponents> {
    let g = eigen_grid(eigs, shape)?;
    let (ql, qm) = (averaging(shape.l), averaging(shape.m));
    let pl = DMatrix::identity(shape.l, shape.l) - &ql;
    let pm = DMatrix::identity(shape.m, shape.m) - &qm;
    Ok(GridComponents {
        h0: &ql * &g * &qm,
        h1: &pl * &g * &qm,
        h2: &ql * &g * &pm,
        h3: &pl * &g * &pm,
    })
}

/// `ρ(t) = e^{iHt} ρ e^{-iHt}`.
pub fn evolve(rho: &DensityMatrix, h: &HermitianOperator, t: f64) -> Result<DensityMatrix> {
    evolve_with(rho, &h.eigen(), t)
}

pub fn evolve_with(rho: &DensityMatrix, eig: &EigenSystem, t: f64) -> Result<DensityMatrix> {
    if rho.dim() != eig.values.len() {
        return Err(Error::Shape(format!("state dim {} vs Hamiltonian dim {}", rho.dim(), eig.values.len())));
    }
    let u = eig.propagator(t);
    Ok(DensityMatrix::from_trusted(&u * &rho.matrix * u.adjoint()))
}

/// Exchanges the two factors. The result lives on `shape.swapped()`.
pub fn star(a: &ComplexMatrix, shape: FactorShape) -> Result<ComplexMatrix> {
    shape.check_square(a)?;
    let (l, m) = (shape.l, shape.m);
    let n = shape.dim();
    Ok(ComplexMatrix::from_fn(n, n, |r, s| {
        let (ip, i) = (r / l, r % l);
        let (jp, j) = (s / l, s % l);
        a[(i * m + ip, j * m + jp)]
    }))
}

/// The `k`-th `m×m` diagonal block.
pub fn pr(a: &ComplexMatrix, shape: FactorShape, k: usize) -> Result<ComplexMatrix> {
    shape.check_square(a)?;
    if k >= shape.l {
        return Err(Error::OutOfRange(format!("block {k} of {}", shape.l)));
    }
    let m = shape.m;
    Ok(a.view((k * m, k * m), (m, m)).into_owned())
}

/// Probability that the first factor is found in basis state `k`, and the
/// conditional state of the second factor.
pub fn branch_project(rho: &DensityMatrix, shape: FactorShape, k: usize) -> Result<(f64, DensityMatrix)> {
    let block = pr(&rho.matrix, shape, k)?;
    let p = block.trace().re;
    if p <= 1e-12 {
        return Err(Error::ZeroProbabilityBranch { k, p });
    }
    Ok((p, DensityMatrix::from_trusted(block * c(1.0 / p))))
}

/// Wire form of a square complex matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatrixJson {
    pub dim: usize,
    pub entries: Vec<[f64; 2]>,
}

impl MatrixJson {
    pub fn from_matrix(a: &ComplexMatrix) -> Self {
        let n = a.nrows();
        let mut entries = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                entries.push([a[(i, j)].re, a[(i, j)].im]);
            }
        }
        MatrixJson { dim: n, entries }
    }

    pub fn to_matrix(&self) -> Result<ComplexMatrix> {
        if self.entries.len() != self.dim * self.dim {
            return Err(Error::Shape(format!("{} entries for dim {}", self.entries.len(), self.dim)));
        }
        Ok(ComplexMatrix::from_fn(self.dim, self.dim, |i, j| {
            let [re, im] = self.entries[i * self.dim + j];
            C64::new(re, im)
        }))
    }
}

impl From<HermitianOperator> for MatrixJson {
    fn from(h: HermitianOperator) -> Self {
        MatrixJson::from_matrix(&h.matrix)
    }
}

impl TryFrom<MatrixJson> for HermitianOperator {
    type Error = Error;
    fn try_from(j: MatrixJson) -> Result<Self> {
        HermitianOperator::new(j.to_matrix()?)
    }
}

impl From<DensityMatrix> for MatrixJson {
    fn from(r: DensityMatrix) -> Self {
        MatrixJson::from_matrix(&r.matrix)
    }
}

impl TryFrom<MatrixJson> for DensityMatrix {
    type Error = Error;
    fn try_from(j: MatrixJson) -> Result<Self> {
        DensityMatrix::new(j.to_matrix()?)
    }
}

pub fn pauli_x() -> ComplexMatrix {
    ComplexMatrix::from_row_slice(2, 2, &[c(0.0), c(1.0), c(1.0), c(0.0)])
}

pub fn pauli_y() -> ComplexMatrix {
    ComplexMatrix::from_row_slice(2, 2, &[c(0.0), -I, I, c(0.0)])
}

pub fn pauli_z() -> ComplexMatrix {
    ComplexMatrix::from_row_slice(2, 2, &[c(1.0), c(0.0), c(0.0), c(-1.0)])
}

/// `(|00⟩ + |11⟩)/√2`.
pub fn bell_pair() -> DensityMatrix {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    DensityMatrix::pure(&StateVector::from_vec(vec![c(s), c(0.0), c(0.0), c(s)])).expect("normalized")
}
