//! Entropies, mutual information and energy-coherence measures. All logs are base 2.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{
    c, commutator, hs_norm, DensityMatrix, EigenSystem, FactorShape, HermitianOperator, Subsystem, UnitaryMatrix, I,
};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbabilityVector(Vec<f64>);

impl ProbabilityVector {
    pub fn new(mut probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::OutOfRange("empty probability vector".into()));
        }
        for p in probs.iter_mut() {
            if !p.is_finite() || *p < -1e-12 {
                return Err(Error::OutOfRange(format!("probability {p}")));
            }
            *p = p.max(0.0);
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-10 {
            return Err(Error::OutOfRange(format!("probabilities sum to {total}")));
        }
        Ok(ProbabilityVector(probs))
    }

    pub fn uniform(n: usize) -> Self {
        ProbabilityVector(vec![1.0 / n as f64; n])
    }

    pub fn probs(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// `-Σ p log₂ p` over the positive entries of `p`.
pub fn entropy_bits(p: &[f64]) -> f64 {
    let s: f64 = p.iter().filter(|&&x| x > 0.0).map(|&x| -x * x.log2()).sum();
    s.max(0.0)
}

pub fn shannon_entropy(p: &ProbabilityVector) -> f64 {
    entropy_bits(&p.0)
}

pub fn von_neumann_entropy(rho: &DensityMatrix) -> Result<f64> {
    Ok(entropy_bits(&rho.spectrum()?))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InfoReport {
    pub s_total: f64,
    pub s_first: f64,
    pub s_second: f64,
    pub mutual_info: f64,
}

impl InfoReport {
    pub fn from_entropies(s_total: f64, s_first: f64, s_second: f64) -> Self {
        InfoReport { s_total, s_first, s_second, mutual_info: s_first + s_second - s_total }
    }
}

/// `I = S(ρ₁) + S(ρ₂) − S(ρ)`, where `ρ₁` is the state of the first factor.
pub fn mutual_information(rho: &DensityMatrix, shape: FactorShape) -> Result<InfoReport> {
    let first = rho.reduced(shape, Subsystem::Second)?;
    let second = rho.reduced(shape, Subsystem::First)?;
    Ok(InfoReport::from_entropies(
        von_neumann_entropy(rho)?,
        von_neumann_entropy(&first)?,
        von_neumann_entropy(&second)?,
    ))
}

/// `1 − tr ρ²`.
pub fn linear_entropy(rho: &DensityMatrix) -> f64 {
    1.0 - hs_norm(rho.matrix()).powi(2)
}

/// `p_n = ⟨E_n|ρ|E_n⟩`, ordered by ascending energy.
pub fn spectral_density(rho: &DensityMatrix, h: &HermitianOperator) -> Result<ProbabilityVector> {
    spectral_density_with(rho, &h.eigen())
}

pub fn spectral_density_with(rho: &DensityMatrix, eig: &EigenSystem) -> Result<ProbabilityVector> {
    if rho.dim() != eig.values.len() {
        return Err(Error::Shape(format!("state dim {} vs Hamiltonian dim {}", rho.dim(), eig.values.len())));
    }
    let r = eig.to_eigenbasis(rho.matrix());
    let mut p: Vec<f64> = r.diagonal().iter().map(|z| z.re).collect();
    let total: f64 = p.iter().map(|x| x.max(0.0)).sum();
    for x in p.iter_mut() {
        *x = x.max(0.0) / total;
    }
    ProbabilityVector::new(p)
}

/// `ρ̇ = i[H, ρ]`.
pub fn rho_dot(rho: &DensityMatrix, h: &HermitianOperator) -> Result<HermitianOperator> {
    if rho.dim() != h.dim() {
        return Err(Error::Shape(format!("state dim {} vs Hamiltonian dim {}", rho.dim(), h.dim())));
    }
    HermitianOperator::new(commutator(h.matrix(), rho.matrix()) * I)
}

/// `δH = ‖ρ̇‖/√2`, equal to `√tr[H²ρ² − HρHρ]`.
pub fn energy_coherence(rho: &DensityMatrix, h: &HermitianOperator) -> Result<f64> {
    Ok(rho_dot(rho, h)?.norm() / std::f64::consts::SQRT_2)
}

/// Energy standard deviation `ΔH` from the spectral density.
pub fn energy_uncertainty(rho: &DensityMatrix, h: &HermitianOperator) -> Result<f64> {
    let eig = h.eigen();
    let p = spectral_density_with(rho, &eig)?;
    let mean: f64 = p.probs().iter().zip(eig.values.iter()).map(|(p, e)| p * e).sum();
    let var: f64 = p.probs().iter().zip(eig.values.iter()).map(|(p, e)| p * (e - mean).powi(2)).sum();
    Ok(var.max(0.0).sqrt())
}

/// `v = (Σ_k ρ̇_kk²)^{1/2}` in the basis given by the columns of `basis`.
pub fn probability_velocity(rho: &DensityMatrix, h: &HermitianOperator, basis: &UnitaryMatrix) -> Result<f64> {
    let d = rho_dot(rho, h)?;
    if basis.dim() != d.dim() {
        return Err(Error::Shape(format!("basis dim {} vs state dim {}", basis.dim(), d.dim())));
    }
    let r = basis.adjoint().conjugate(d.matrix());
    Ok(r.diagonal().iter().map(|z| z.re * z.re).sum::<f64>().sqrt())
}

/// The eigenbasis of `ρ̇`, where the probability velocity peaks at `√2·δH`.
pub fn fastest_basis(rho: &DensityMatrix, h: &HermitianOperator) -> Result<UnitaryMatrix> {
    let vectors = rho_dot(rho, h)?.eigen().vectors;
    UnitaryMatrix::new(vectors * c(1.0))
}
