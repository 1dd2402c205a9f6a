//! Structure that emerges from a bare Hamiltonian: the truncated oscillator
//! as independent qubits, and a lattice of coupled oscillators whose normal
//! modes obey a relativistic-looking dispersion relation.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};

use crate::dynamics::fourier_matrix;
use crate::error::{Error, Result};
use crate::hilbert::{c, kron, ComplexMatrix, HermitianOperator, StateVector, C64};

pub const MAX_OSCILLATOR_QUBITS: u32 = 12;
pub const MAX_LATTICE_SIDE: usize = 8;

fn check_qubits(b: u32) -> Result<()> {
    if !(1..=MAX_OSCILLATOR_QUBITS).contains(&b) {
        return Err(Error::OutOfRange(format!("b = {b} outside 1..={MAX_OSCILLATOR_QUBITS}")));
    }
    Ok(())
}

/// Diagonal of `Σ_j 2^{j−1}σᶻ_j`, qubit `b−1` leftmost in the tensor product.
pub fn qubit_oscillator_diagonal(b: u32) -> Result<Vec<f64>> {
    check_qubits(b)?;
    let mut diag = vec![0.0];
    for j in (0..b).rev() {
        let w = 2f64.powi(j as i32 - 1);
        diag = diag.iter().flat_map(|&d| [d + w, d - w]).collect();
    }
    Ok(diag)
}

/// The `2^b`-level equispaced oscillator written as `b` non-interacting qubits.
pub fn qubit_oscillator(b: u32) -> Result<HermitianOperator> {
    Ok(HermitianOperator::from_real_diagonal(&qubit_oscillator_diagonal(b)?))
}

/// Spin-down `(0, 1)` and the raising operator `σ† = |↑⟩⟨↓|`.
fn down() -> StateVector {
    StateVector::from_vec(vec![c(0.0), c(1.0)])
}

pub fn creation_operator() -> ComplexMatrix {
    ComplexMatrix::from_row_slice(2, 2, &[c(0.0), c(1.0), c(0.0), c(0.0)])
}

/// `|E_k⟩ = ⊗_j (σ†)^{k_j}|↓⟩` with the binary digits `k_j` of `k`.
pub fn energy_eigenvector(b: u32, k: u64) -> Result<StateVector> {
    check_qubits(b)?;
    if k >> b != 0 {
        return Err(Error::OutOfRange(format!("level {k} of a {b}-qubit oscillator")));
    }
    let raise = creation_operator();
    let mut psi = StateVector::from_vec(vec![c(1.0)]);
    for j in (0..b).rev() {
        let q = if (k >> j) & 1 == 1 { &raise * down() } else { down() };
        psi = psi.kronecker(&q);
    }
    Ok(psi)
}

/// `E_k = k − (2^b − 1)/2`.
pub fn oscillator_level(b: u32, k: u64) -> f64 {
    k as f64 - (2f64.powi(b as i32) - 1.0) / 2.0
}

pub type Offset = [i64; 3];

/// `a_{±x̂} = a_{±ŷ} = a_{±ẑ} = −γ²`, `a_0 = μ² + 6γ²`.
pub fn nearest_neighbor_couplings(mu: f64, gamma: f64) -> BTreeMap<Offset, f64> {
    let g2 = gamma * gamma;
    let mut a = BTreeMap::new();
    a.insert([0, 0, 0], mu * mu + 6.0 * g2);
    for axis in 0..3 {
        for s in [-1, 1] {
            let mut r = [0; 3];
            r[axis] = s;
            a.insert(r, -g2);
        }
    }
    a
}

/// `ω(κ)² = Σ_r a_r e^{−iκ·r}`.
pub fn lattice_dispersion(couplings: &BTreeMap<Offset, f64>, kappa: [f64; 3]) -> Result<f64> {
    let scale = couplings.values().map(|a| a.abs()).fold(0.0, f64::max).max(1.0);
    for (r, a) in couplings {
        let mirror = couplings.get(&[-r[0], -r[1], -r[2]]).copied().unwrap_or(0.0);
        if (a - mirror).abs() > 1e-12 * scale {
            return Err(Error::AsymmetricCouplings);
        }
    }
    let total: C64 = couplings
        .iter()
        .map(|(r, a)| C64::from_polar(*a, -(kappa[0] * r[0] as f64 + kappa[1] * r[1] as f64 + kappa[2] * r[2] as f64)))
        .sum();
    if total.im.abs() > 1e-12 * scale * couplings.len() as f64 {
        return Err(Error::AsymmetricCouplings);
    }
    Ok(total.re)
}

/// `μ² + 4γ²Σ sin²(κ_i/2)`.
pub fn nearest_neighbor_dispersion(mu: f64, gamma: f64, kappa: [f64; 3]) -> f64 {
    mu * mu + 4.0 * gamma * gamma * kappa.iter().map(|k| (k / 2.0).sin().powi(2)).sum::<f64>()
}

fn check_side(side: usize) -> Result<()> {
    if !(1..=MAX_LATTICE_SIDE).contains(&side) {
        return Err(Error::OutOfRange(format!("side {side} outside 1..={MAX_LATTICE_SIDE}")));
    }
    Ok(())
}

fn site(side: usize, x: usize, y: usize, z: usize) -> usize {
    (x * side + y) * side + z
}

/// Circulant coupling matrix `A_{rr'} = a_{r'−r}` on a periodic `side³` lattice.
/// Offsets that wrap onto the same site add up.
pub fn lattice_matrix(side: usize, couplings: &BTreeMap<Offset, f64>) -> Result<DMatrix<f64>> {
    check_side(side)?;
    let n = side.pow(3);
    let s = side as i64;
    let mut a = DMatrix::zeros(n, n);
    for x in 0..side {
        for y in 0..side {
            for z in 0..side {
                let from = site(side, x, y, z);
                for (r, v) in couplings {
                    let wrap = |p: usize, d: i64| (p as i64 + d).rem_euclid(s) as usize;
                    let to = site(side, wrap(x, r[0]), wrap(y, r[1]), wrap(z, r[2]));
                    a[(from, to)] += v;
                }
            }
        }
    }
    Ok(a)
}

/// Phases `2πn/side` of the periodic lattice, `x` slowest.
pub fn kappa_grid(side: usize) -> Vec<[f64; 3]> {
    let k = |i: usize| 2.0 * PI * i as f64 / side as f64;
    let mut out = Vec::with_capacity(side.pow(3));
    for x in 0..side {
        for y in 0..side {
            for z in 0..side {
                out.push([k(x), k(y), k(z)]);
            }
        }
    }
    out
}

/// Normal-mode frequencies of `H = ½|p|² + ½qᵀAq`, ascending.
pub fn lattice_normal_modes(side: usize, mu: f64, gamma: f64) -> Result<Vec<f64>> {
    lattice_normal_modes_with(side, &nearest_neighbor_couplings(mu, gamma))
}

/// Normal modes for arbitrary symmetric couplings. A negative `ω²` means an
/// unstable mode and is an error.
pub fn lattice_normal_modes_with(side: usize, couplings: &BTreeMap<Offset, f64>) -> Result<Vec<f64>> {
    if lattice_dispersion(couplings, [0.0; 3]).is_err() {
        return Err(Error::AsymmetricCouplings);
    }
    let a = lattice_matrix(side, couplings)?;
    let mut w2: Vec<f64> = a.symmetric_eigen().eigenvalues.iter().copied().collect();
    w2.sort_by(f64::total_cmp);
    let scale = couplings.values().map(|x| x.abs()).sum::<f64>().max(1.0);
    if w2[0] < -1e-12 * scale {
        return Err(Error::Tachyonic(w2[0]));
    }
    Ok(w2.into_iter().map(|x| x.max(0.0).sqrt()).collect())
}

/// Largest off-diagonal entry of `F†AF` with the three-dimensional DFT.
pub fn fourier_offdiagonal_residue(side: usize, mu: f64, gamma: f64) -> Result<f64> {
    let a = lattice_matrix(side, &nearest_neighbor_couplings(mu, gamma))?.map(c);
    let f = fourier_matrix(side);
    let f3 = kron(&kron(f.matrix(), f.matrix()), f.matrix());
    let d = f3.adjoint() * a * &f3;
    let n = d.nrows();
    Ok((0..n).flat_map(|i| (0..n).map(move |j| (i, j))).filter(|(i, j)| i != j).map(|(i, j)| d[(i, j)].norm()).fold(0.0, f64::max))
}

/// Dispersion over the whole periodic grid, one `(κ, ω²)` per mode.
pub fn dispersion_table(side: usize, mu: f64, gamma: f64) -> Result<Vec<([f64; 3], f64)>> {
    check_side(side)?;
    let a = nearest_neighbor_couplings(mu, gamma);
    kappa_grid(side).into_iter().map(|k| Ok((k, lattice_dispersion(&a, k)?))).collect()
}

/// Column vector of `ω` values, handy for multiset comparison.
pub fn sorted_frequencies(table: &[([f64; 3], f64)]) -> DVector<f64> {
    let mut w: Vec<f64> = table.iter().map(|(_, w2)| w2.max(0.0).sqrt()).collect();
    w.sort_by(f64::total_cmp);
    DVector::from_vec(w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{identity, pauli_z};
    use approx::assert_abs_diff_eq;

    #[test]
    fn three_qubits() {
        let d = qubit_oscillator_diagonal(3).unwrap();
        assert_eq!(d, vec![3.5, 2.5, 1.5, 0.5, -0.5, -1.5, -2.5, -3.5]);
        assert_eq!(qubit_oscillator_diagonal(1).unwrap(), vec![0.5, -0.5]);
        assert!(qubit_oscillator(0).is_err());
    }

    #[test]
    fn diagonal_matches_pauli_kron() {
        let b = 4;
        let n = 1 << b;
        let mut h = ComplexMatrix::zeros(n, n);
        for j in 0..b {
            let mut term = identity(1);
            for q in (0..b).rev() {
                term = kron(&term, &if q == j { pauli_z() * c(2f64.powi(j as i32 - 1)) } else { identity(2) });
            }
            h += term;
        }
        assert_eq!(&h, qubit_oscillator(b).unwrap().matrix());
    }

    #[test]
    fn e6_is_110() {
        let psi = energy_eigenvector(3, 6).unwrap();
        // |110⟩ with up = index 0 sits at binary 001.
        assert_eq!(psi[1], c(1.0));
        assert_eq!(psi.iter().filter(|z| z.norm() > 0.0).count(), 1);
    }

    #[test]
    fn eigenvectors_have_binary_energies() {
        for b in 1..=5 {
            let h = qubit_oscillator(b).unwrap();
            for k in 0..(1u64 << b) {
                let psi = energy_eigenvector(b, k).unwrap();
                let r = h.matrix() * &psi - &psi * c(oscillator_level(b, k));
                assert_eq!(r.norm(), 0.0);
            }
        }
    }

    #[test]
    fn dispersion_examples() {
        let a = nearest_neighbor_couplings(1.0, 1.0);
        assert_abs_diff_eq!(lattice_dispersion(&a, [0.0; 3]).unwrap(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(lattice_dispersion(&a, [PI, 0.0, 0.0]).unwrap(), 5.0, epsilon = 1e-12);
        let k = [0.01, -0.02, 0.015];
        let small = 1.0 + k.iter().map(|x| x * x).sum::<f64>();
        assert!((lattice_dispersion(&a, k).unwrap() - small).abs() < 1e-7);
        let mut bad = a.clone();
        bad.insert([2, 0, 0], 0.3);
        assert_eq!(lattice_dispersion(&bad, k), Err(Error::AsymmetricCouplings));
    }

    #[test]
    fn normal_modes() {
        assert!(lattice_normal_modes(2, 1.0, 0.0).unwrap().iter().all(|&w| (w - 1.0).abs() < 1e-12));
        let modes = lattice_normal_modes(4, 1.0, 1.0).unwrap();
        assert_eq!(modes.len(), 64);
        let formula = sorted_frequencies(&dispersion_table(4, 1.0, 1.0).unwrap());
        for (a, b) in modes.iter().zip(formula.iter()) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-9);
        }
        assert!(fourier_offdiagonal_residue(4, 1.0, 1.0).unwrap() < 1e-10);
        assert_abs_diff_eq!(lattice_normal_modes(4, 0.0, 1.0).unwrap()[0], 0.0, epsilon = 1e-7);
        let mut unstable = nearest_neighbor_couplings(1.0, 1.0);
        unstable.insert([0, 0, 0], 5.0);
        assert!(matches!(lattice_normal_modes_with(4, &unstable), Err(Error::Tachyonic(_))));
    }
}
