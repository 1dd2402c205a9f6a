//! The equispaced-spectrum clock system, reduced dynamics of a subsystem and
//! the environment-induced loss of its autonomy.
//!
//! Units have `ħ = 1`. Matrices of the clock system are written in the energy
//! basis, so `h` is diagonal and position states are its Fourier transforms.

use std::f64::consts::PI;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{
    c, commutator, hs_norm, hs_projectors, identity, kron, ptrace, ComplexMatrix, DensityMatrix, FactorShape,
    HermitianOperator, StateVector, Subsystem, UnitaryMatrix, C64, I,
};
use crate::info::entropy_bits;
use crate::random::{gue, random_pure, rng};

/// Unitary DFT, `F_jk = e^{2πijk/n}/√n`.
pub fn fourier_matrix(n: usize) -> UnitaryMatrix {
    let s = 1.0 / (n as f64).sqrt();
    let m = ComplexMatrix::from_fn(n, n, |j, k| C64::from_polar(s, 2.0 * PI * (j * k % n) as f64 / n as f64));
    UnitaryMatrix::new(m).expect("DFT is unitary")
}

#[derive(Clone, Debug)]
pub struct EquispacedSystem {
    pub n: usize,
    pub omega: f64,
    pub h: HermitianOperator,
    pub fourier: UnitaryMatrix,
    pub position_op: HermitianOperator,
}

pub fn equispaced_system(n: usize, omega: f64) -> Result<EquispacedSystem> {
    if n < 2 {
        return Err(Error::OutOfRange(format!("need n >= 2, got {n}")));
    }
    if !omega.is_finite() || omega <= 0.0 {
        return Err(Error::OutOfRange(format!("omega must be positive, got {omega}")));
    }
    let energies: Vec<f64> = (0..n).map(|k| (k as f64 - (n as f64 - 1.0) / 2.0) * omega).collect();
    let h = HermitianOperator::from_real_diagonal(&energies);
    let fourier = fourier_matrix(n);
    let position_op = HermitianOperator::from_hermitian_part(fourier.conjugate(h.matrix()));
    Ok(EquispacedSystem { n, omega, h, fourier, position_op })
}

impl EquispacedSystem {
    pub fn energies(&self) -> Vec<f64> {
        self.h.matrix().diagonal().iter().map(|z| z.re).collect()
    }

    /// Orbit period `2π/ω`.
    pub fn period(&self) -> f64 {
        2.0 * PI / self.omega
    }

    /// `|x_j⟩ = e^{iH·2πj/(nω)} F|0⟩`, so `|x_{j+n}⟩ = |x_j⟩` up to sign.
    pub fn position_state(&self, j: i64) -> StateVector {
        let n = self.n as f64;
        let phase = 2.0 * PI * j as f64 / (n * self.omega);
        StateVector::from_iterator(self.n, self.energies().into_iter().map(|e| C64::from_polar(1.0 / n.sqrt(), e * phase)))
    }

    /// Normalized `Σ c_k |x_k⟩`.
    pub fn position_superposition(&self, coeffs: &[(i64, f64)]) -> Result<StateVector> {
        let mut psi = StateVector::zeros(self.n);
        for &(k, ck) in coeffs {
            psi += self.position_state(k) * c(ck);
        }
        let norm = psi.norm();
        if norm < 1e-300 {
            return Err(Error::InvalidState("superposition vanishes".into()));
        }
        Ok(psi / c(norm))
    }

    /// A potential `V(x)`: diagonal in the position basis with `V|x_j⟩ = v(E_j)|x_j⟩`.
    pub fn potential(&self, v: impl Fn(f64) -> f64) -> HermitianOperator {
        let d = HermitianOperator::from_real_diagonal(&self.energies().into_iter().map(v).collect::<Vec<_>>());
        HermitianOperator::from_hermitian_part(self.fourier.conjugate(d.matrix()))
    }
}

/// `f_n(φ) = sin(nφ/2)/(n sin(φ/2))`, the real overlap `⟨x_0|e^{iHφ/ω}|x_0⟩`.
pub fn overlap_fn(n: usize, phi: f64) -> f64 {
    let nf = n as f64;
    let half = phi / 2.0;
    let s = half.sin();
    if s.abs() < 1e-8 {
        // Near φ = 2πm the ratio tends to (−1)^{(n−1)m}; expand to second order.
        let m = (phi / (2.0 * PI)).round();
        let d = phi - 2.0 * PI * m;
        let sign = if ((n as i64 - 1) * m as i64).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
        return sign * (1.0 - (nf * nf - 1.0) * d * d / 24.0);
    }
    (nf * half).sin() / (nf * s)
}

/// `(1/n) Σ_k e^{iE_kφ}` with `E_k = k − (n−1)/2`.
pub fn overlap_sum(n: usize, phi: f64) -> C64 {
    let nf = n as f64;
    (0..n).map(|k| C64::from_polar(1.0, (k as f64 - (nf - 1.0) / 2.0) * phi)).sum::<C64>() / c(nf)
}

pub const MAX_APODIZATION: u32 = 8;
const APODIZATION_CUTOFF: f64 = 1e-12;

fn closed_form_apodization(alpha: u32, k: i64) -> f64 {
    let kf = k as f64;
    let sign = if k.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
    match (alpha, k.abs()) {
        (0, 0) | (2, 0) | (4, 0) => 1.0,
        (2, 1) => 0.5,
        (4, 1) => 2.0 / 3.0,
        (4, 2) => 1.0 / 6.0,
        (0 | 2 | 4, _) => 0.0,
        (1, _) => sign / (1.0 - 4.0 * kf * kf),
        (3, _) => sign / ((1.0 - 4.0 * kf * kf) * (1.0 - 4.0 * kf * kf / 9.0)),
        _ => unreachable!(),
    }
}

/// Position-basis coefficients of `cos^α(φ/2)` apodization over offsets in
/// `(−n/2, n/2]`, center normalized to 1, tiny tails dropped.
pub fn apodization_coeffs(alpha: u32, n: usize) -> Result<Vec<(i64, f64)>> {
    if alpha > MAX_APODIZATION {
        return Err(Error::OutOfRange(format!("apodization order {alpha} above {MAX_APODIZATION}")));
    }
    if n < 2 {
        return Err(Error::OutOfRange(format!("need n >= 2, got {n}")));
    }
    let lo = -((n as i64 - 1) / 2);
    let hi = n as i64 / 2;
    let base = if alpha % 2 == 0 { alpha.min(4) } else { alpha.min(3) };
    let wide = hi.max(-lo) + 2 * MAX_APODIZATION as i64 + 2;
    let mut coeffs: Vec<f64> = (-wide..=wide).map(|k| closed_form_apodization(base, k)).collect();
    let mut order = base;
    while order < alpha {
        let w = coeffs.len();
        let next: Vec<f64> = (0..w)
            .map(|i| {
                let left = if i > 0 { coeffs[i - 1] } else { 0.0 };
                let right = if i + 1 < w { coeffs[i + 1] } else { 0.0 };
                coeffs[i] + 0.5 * (left + right)
            })
            .collect();
        let center = next[wide as usize];
        coeffs = next.into_iter().map(|x| x / center).collect();
        order += 2;
    }
    Ok((lo..=hi)
        .map(|k| (k, coeffs[(k + wide) as usize]))
        .filter(|&(_, x)| x.abs() >= APODIZATION_CUTOFF)
        .collect())
}

/// Normalized apodized wave packet centred on `|x_0⟩` of the `ω = 1` system.
pub fn apodized_state(alpha: u32, n: usize) -> Result<StateVector> {
    equispaced_system(n, 1.0)?.position_superposition(&apodization_coeffs(alpha, n)?)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ToeplitzOptimum {
    /// Energy-basis coefficients `ψ̂_k`, unit norm.
    pub coefficients: Vec<f64>,
    pub eigenvalue: f64,
    /// `∫|g_n|²w dθ` at the optimum, `2π` times the eigenvalue.
    pub objective: f64,
    /// The two smallest eigenvalues coincide, so the optimum is not unique.
    pub degenerate: bool,
    /// `w(θ) ≥ 0` on a fine grid.
    pub penalty_nonnegative: bool,
}

/// `w(θ) = a_0 + 2Σ_{m≥1} a_m cos mθ`.
pub fn penalty_value(coeffs: &[f64], theta: f64) -> f64 {
    coeffs.iter().enumerate().map(|(m, &a)| if m == 0 { a } else { 2.0 * a * (m as f64 * theta).cos() }).sum()
}

/// Minimizes `∫_{−π}^{π}|Σ_k ψ̂_k e^{ikθ}|² w(θ) dθ` over unit vectors.
pub fn toeplitz_optimal_state(n: usize, coeffs: &[f64]) -> Result<ToeplitzOptimum> {
    if n < 4 {
        return Err(Error::OutOfRange(format!("need n >= 4, got {n}")));
    }
    if coeffs.is_empty() || coeffs.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite);
    }
    let t = DMatrix::from_fn(n, n, |j, k| coeffs.get(j.abs_diff(k)).copied().unwrap_or(0.0));
    let eig = t.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let (l0, l1) = (eig.eigenvalues[order[0]], eig.eigenvalues[order[1]]);
    let mut v: Vec<f64> = eig.eigenvectors.column(order[0]).iter().copied().collect();
    let total: f64 = v.iter().sum();
    if total < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
    let grid = 4096;
    let penalty_nonnegative =
        (0..grid).all(|i| penalty_value(coeffs, -PI + 2.0 * PI * i as f64 / grid as f64) >= -1e-12);
    Ok(ToeplitzOptimum {
        coefficients: v,
        eigenvalue: l0,
        objective: 2.0 * PI * l0,
        degenerate: (l1 - l0).abs() <= 1e-10 * l0.abs().max(1.0),
        penalty_nonnegative,
    })
}

/// The penalty integral by the midpoint rule, exact once `points` exceeds
/// the combined bandwidth of `|g|²` and `w`.
pub fn penalty_objective(psi_hat: &[C64], coeffs: &[f64], points: usize) -> f64 {
    let dt = 2.0 * PI / points as f64;
    (0..points)
        .map(|i| {
            let theta = -PI + (i as f64 + 0.5) * dt;
            let g: C64 = psi_hat.iter().enumerate().map(|(k, &a)| a * C64::from_polar(1.0, k as f64 * theta)).sum();
            g.norm_sqr() * penalty_value(coeffs, theta) * dt
        })
        .sum()
}

/// `H = H₁⊗I + I⊗H₂ + H₃` with `tr₁H₃ = tr₂H₃ = 0` and `tr H₂ = 0`.
#[derive(Clone, Debug)]
pub struct HamiltonianSplit {
    pub h1: HermitianOperator,
    pub h2: HermitianOperator,
    pub h3: HermitianOperator,
}

pub fn split_hamiltonian(h: &HermitianOperator, shape: FactorShape) -> Result<HamiltonianSplit> {
    let parts = hs_projectors(h, shape)?;
    let (l, m) = (shape.l as f64, shape.m as f64);
    let h1 = ptrace(h.matrix(), shape, Subsystem::Second)? * c(1.0 / m);
    let h2 = ptrace(h.matrix(), shape, Subsystem::First)? * c(1.0 / l) - identity(shape.m) * c(h.trace() / (l * m));
    Ok(HamiltonianSplit {
        h1: HermitianOperator::from_hermitian_part(h1),
        h2: HermitianOperator::from_hermitian_part(h2),
        h3: parts.h3,
    })
}

fn check_factors(rho1: &DensityMatrix, rho2: &DensityMatrix, dim: usize, shape: FactorShape) -> Result<()> {
    if rho1.dim() != shape.l || rho2.dim() != shape.m || dim != shape.dim() {
        return Err(Error::Shape(format!(
            "factors {}x{} and operator {} vs shape ({}, {})",
            rho1.dim(),
            rho2.dim(),
            dim,
            shape.l,
            shape.m
        )));
    }
    Ok(())
}

fn second_factor_weighted(weight: &ComplexMatrix, h3: &ComplexMatrix, shape: FactorShape) -> Result<ComplexMatrix> {
    ptrace(&(kron(&identity(shape.l), weight) * h3), shape, Subsystem::Second)
}

/// `H* = tr₂[(I⊗ρ₂)H₃]`, the interaction as felt by the first factor.
pub fn effective_interaction(h3: &HermitianOperator, rho2: &DensityMatrix, shape: FactorShape) -> Result<HermitianOperator> {
    shape.check_square(h3.matrix())?;
    if rho2.dim() != shape.m {
        return Err(Error::Shape(format!("environment dim {} vs {}", rho2.dim(), shape.m)));
    }
    Ok(HermitianOperator::from_hermitian_part(second_factor_weighted(rho2.matrix(), h3.matrix(), shape)?))
}

/// `K = i tr₂[(I⊗[H₂, ρ₂])H₃]`.
pub fn k_matrix(
    h2: &HermitianOperator,
    h3: &HermitianOperator,
    rho2: &DensityMatrix,
    shape: FactorShape,
) -> Result<HermitianOperator> {
    shape.check_square(h3.matrix())?;
    if rho2.dim() != shape.m || h2.dim() != shape.m {
        return Err(Error::Shape(format!("environment dims {} and {} vs {}", h2.dim(), rho2.dim(), shape.m)));
    }
    let w = commutator(h2.matrix(), rho2.matrix());
    Ok(HermitianOperator::from_hermitian_part(second_factor_weighted(&w, h3.matrix(), shape)? * I))
}

/// `ρ̇₁ = i[H₁ + H*, ρ₁]` for the product state `ρ₁⊗ρ₂`.
pub fn rho1_first_derivative(
    rho1: &DensityMatrix,
    rho2: &DensityMatrix,
    h: &HermitianOperator,
    shape: FactorShape,
) -> Result<HermitianOperator> {
    check_factors(rho1, rho2, h.dim(), shape)?;
    let split = split_hamiltonian(h, shape)?;
    let hstar = effective_interaction(&split.h3, rho2, shape)?;
    let x = split.h1.matrix() + hstar.matrix();
    Ok(HermitianOperator::from_hermitian_part(commutator(&x, rho1.matrix()) * I))
}

/// `ρ̈₁` for the product state `ρ₁⊗ρ₂`, term by term:
/// `−ρ̈₁ = [H₁,[H₁,ρ₁]] − i[K,ρ₁] + [H₁,[H*,ρ₁]] + [H*,[H₁,ρ₁]] + tr₂[H₃,[H₃,ρ₁⊗ρ₂]]`.
pub fn rho1_second_derivative(
    rho1: &DensityMatrix,
    rho2: &DensityMatrix,
    h: &HermitianOperator,
    shape: FactorShape,
) -> Result<HermitianOperator> {
    check_factors(rho1, rho2, h.dim(), shape)?;
    let split = split_hamiltonian(h, shape)?;
    let hstar = effective_interaction(&split.h3, rho2, shape)?;
    let k = k_matrix(&split.h2, &split.h3, rho2, shape)?;
    let (h1, hs, r) = (split.h1.matrix(), hstar.matrix(), rho1.matrix());
    let rho = kron(r, rho2.matrix());
    let h3 = split.h3.matrix();
    let env = ptrace(&commutator(h3, &commutator(h3, &rho)), shape, Subsystem::Second)?;
    let minus = commutator(h1, &commutator(h1, r)) - commutator(k.matrix(), r) * I
        + commutator(h1, &commutator(hs, r))
        + commutator(hs, &commutator(h1, r))
        + env;
    Ok(HermitianOperator::from_hermitian_part(-minus))
}

/// `Ṡ¹ˡⁱⁿ₁ = −2 tr ρ₁ρ̇₁`, zero for every product state.
pub fn slin_first_derivative(
    rho1: &DensityMatrix,
    rho2: &DensityMatrix,
    h: &HermitianOperator,
    shape: FactorShape,
) -> Result<f64> {
    let d = rho1_first_derivative(rho1, rho2, h, shape)?;
    Ok(-2.0 * (rho1.matrix() * d.matrix()).trace().re)
}

/// `S̈¹ˡⁱⁿ₁ = 2tr{ρ₁ tr₂[H₃,[H₃,ρ]]} − 2‖[H*,ρ₁]‖²`. The subsystem Hamiltonians
/// drop out entirely.
pub fn slin_second_derivative(
    rho1: &DensityMatrix,
    rho2: &DensityMatrix,
    h: &HermitianOperator,
    shape: FactorShape,
) -> Result<f64> {
    check_factors(rho1, rho2, h.dim(), shape)?;
    let h3 = hs_projectors(h, shape)?.h3;
    let hstar = effective_interaction(&h3, rho2, shape)?;
    let rho = kron(rho1.matrix(), rho2.matrix());
    let h3 = h3.matrix();
    let env = ptrace(&commutator(h3, &commutator(h3, &rho)), shape, Subsystem::Second)?;
    let first = 2.0 * (rho1.matrix() * env).trace().re;
    let second = 2.0 * hs_norm(&commutator(hstar.matrix(), rho1.matrix())).powi(2);
    Ok(first - second)
}

/// `e^{−i⟨H⟩t}⟨ψ|e^{iHt}|ψ⟩`. Removing the mean-energy phase makes
/// `Ḟ(0) = 0` and `F̈(0) = −(ΔH)²`.
pub fn fidelity(psi: &StateVector, h: &HermitianOperator, t: f64) -> Result<C64> {
    if psi.len() != h.dim() {
        return Err(Error::Shape(format!("state dim {} vs Hamiltonian dim {}", psi.len(), h.dim())));
    }
    let psi = psi / c(psi.norm());
    let eig = h.eigen();
    let amps = eig.vectors.adjoint() * &psi;
    let mean: f64 = amps.iter().zip(eig.values.iter()).map(|(a, e)| a.norm_sqr() * e).sum();
    Ok(amps.iter().zip(eig.values.iter()).map(|(a, e)| a.norm_sqr() * C64::from_polar(1.0, (e - mean) * t)).sum())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Potential {
    Sinusoidal,
    Gaussian,
}

impl Potential {
    pub fn name(self) -> &'static str {
        match self {
            Potential::Sinusoidal => "sinusoidal",
            Potential::Gaussian => "gaussian",
        }
    }

    /// Unscaled profile as a function of position eigenvalue.
    fn profile(self, n: usize) -> impl Fn(f64) -> f64 {
        let nf = n as f64;
        let peak = 4.0f64.exp();
        move |x| match self {
            Potential::Sinusoidal => (2.0 * PI * x / nf).sin(),
            Potential::Gaussian => (4.0 * (2.0 * PI * x / nf).cos()).exp() / peak,
        }
    }
}

impl FromStr for Potential {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sinusoidal" | "sin" => Ok(Potential::Sinusoidal),
            "gaussian" | "gauss" => Ok(Potential::Gaussian),
            other => Err(Error::OutOfRange(format!("unknown potential '{other}'"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlidingConfig {
    pub b: u32,
    pub potential: Potential,
    pub alpha: u32,
    pub omega2: f64,
    /// Hilbert-Schmidt norm of the interaction term `V⊗σx`.
    pub coupling: f64,
    pub samples: usize,
}

impl Default for SlidingConfig {
    fn default() -> Self {
        SlidingConfig { b: 6, potential: Potential::Sinusoidal, alpha: 0, omega2: 0.0, coupling: 1.0, samples: 65 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AutonomyReport {
    pub b: u32,
    pub alpha: u32,
    pub potential: Potential,
    pub delta_h: f64,
    pub tau_dyn: f64,
    /// Time for `S¹ˡⁱⁿ₁` to reach order unity at the rate `S¹ˡⁱⁿ₁ ≈ (t/τ)²/2`
    /// averaged over the first orbit.
    pub tau_ind: f64,
    pub autonomy: f64,
    /// `S¹ˡⁱⁿ₁` after one full orbit.
    pub slin_t: f64,
    /// `S̈¹ˡⁱⁿ₁(0)` from the second-derivative formula.
    pub slin_ddot0: f64,
    /// `(t, S¹ˡⁱⁿ₁(t))` over the first orbit.
    pub slin_curve: Vec<[f64; 2]>,
}

pub const MAX_SLIDING_QUBITS: u32 = 10;

/// `2(|a|²|b|² − |⟨a|b⟩|²)` summed as `Σ_{i,j}|a_i b_j − a_j b_i|²`, which
/// stays accurate when the two branches are nearly parallel.
fn branch_linear_entropy(a: &StateVector, b: &StateVector) -> f64 {
    let n = a.len();
    let mut total = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            total += (a[i] * b[j] - a[j] * b[i]).norm_sqr();
        }
    }
    2.0 * total
}

/// A clock of `n = 2^b` levels coupled to one environment qubit through
/// `H = H₁⊗I + ω₂ I⊗σx + V⊗σx`, the qubit starting in `|↑⟩`.
///
/// Both environment terms are functions of `σx`, so the evolution splits
/// exactly into the two `σx` sectors, each an `n`-level problem with
/// Hamiltonian `H₁ ± V` and an extra phase `e^{±iω₂t}`.
pub fn sliding_simulation(cfg: &SlidingConfig) -> Result<AutonomyReport> {
    if !(2..=MAX_SLIDING_QUBITS).contains(&cfg.b) {
        return Err(Error::OutOfRange(format!("b = {} outside 2..={MAX_SLIDING_QUBITS}", cfg.b)));
    }
    if cfg.samples < 2 {
        return Err(Error::OutOfRange("need at least 2 samples".into()));
    }
    if !cfg.coupling.is_finite() || cfg.coupling <= 0.0 || !cfg.omega2.is_finite() {
        return Err(Error::OutOfRange(format!("coupling {} / omega2 {}", cfg.coupling, cfg.omega2)));
    }
    let n = 1usize << cfg.b;
    let sys = equispaced_system(n, 1.0)?;
    let raw = sys.potential(cfg.potential.profile(n));
    let v = raw.scale(cfg.coupling / (raw.norm() * std::f64::consts::SQRT_2));
    let psi = sys.position_superposition(&apodization_coeffs(cfg.alpha, n)?)?;

    let energies = sys.energies();
    let p: Vec<f64> = psi.iter().map(|z| z.norm_sqr()).collect();
    let mean: f64 = p.iter().zip(&energies).map(|(p, e)| p * e).sum();
    let delta_h = p.iter().zip(&energies).map(|(p, e)| p * (e - mean).powi(2)).sum::<f64>().sqrt();

    let vpsi = v.matrix() * &psi;
    let vmean = psi.dotc(&vpsi).re;
    let slin_ddot0 = 4.0 * (vpsi.norm_squared() - vmean * vmean).max(0.0);

    let plus = sys.h.add(&v)?.eigen();
    let minus = sys.h.add(&v.scale(-1.0))?.eigen();
    let cp = plus.vectors.adjoint() * &psi;
    let cm = minus.vectors.adjoint() * &psi;
    let period = sys.period();
    let times: Vec<f64> = (0..cfg.samples).map(|i| period * i as f64 / (cfg.samples - 1) as f64).collect();
    let slin_curve: Vec<[f64; 2]> = times
        .par_iter()
        .map(|&t| {
            let evolve = |vecs: &ComplexMatrix, vals: &DVector<f64>, coef: &StateVector, sign: f64| {
                let phased =
                    StateVector::from_fn(n, |k, _| coef[k] * C64::from_polar(1.0, (vals[k] + sign * cfg.omega2) * t));
                vecs * phased
            };
            let a = evolve(&plus.vectors, &plus.values, &cp, 1.0);
            let b = evolve(&minus.vectors, &minus.values, &cm, -1.0);
            let up = (&a + &b) * c(0.5);
            let down = (&a - &b) * c(0.5);
            [t, branch_linear_entropy(&up, &down)]
        })
        .collect();
    let slin_t = slin_curve.last().expect("at least two samples")[1];
    if !(slin_t > 0.0) {
        return Err(Error::OutOfRange(format!("no decoherence after one orbit (S = {slin_t:e})")));
    }
    let tau_ind = period / (2.0 * slin_t).sqrt();
    let tau_dyn = 1.0 / delta_h;
    Ok(AutonomyReport {
        b: cfg.b,
        alpha: cfg.alpha,
        potential: cfg.potential,
        delta_h,
        tau_dyn,
        tau_ind,
        autonomy: tau_ind / tau_dyn,
        slin_t,
        slin_ddot0,
        slin_curve,
    })
}

/// Times used for the factorization optimizer: `m` equispaced points on `[0, 1]`.
pub fn snip_times(m: usize) -> Vec<f64> {
    (0..m).map(|i| i as f64 / (m.max(2) - 1) as f64).collect()
}

/// Random Hamiltonian and pure state for the two-qubit optimizer instance.
pub fn snip_instance(seed: u64) -> (HermitianOperator, DensityMatrix) {
    let mut g = rng(seed);
    let h = gue(4, &mut g);
    let psi = random_pure(4, &mut g);
    (h, DensityMatrix::pure(&psi).expect("unit vector"))
}

#[derive(Clone, Debug)]
pub struct SnipOutcome {
    pub unitary: UnitaryMatrix,
    pub objective: f64,
    pub initial_objective: f64,
    /// Mean entropy in bits of the factor states over the sample times.
    pub mean_entropy: f64,
    pub initial_entropy: f64,
    pub converged: bool,
    /// Index of the winning restart; restart 0 starts from the identity.
    pub restart: usize,
    /// Objective after every accepted step of the winning restart.
    pub trace: Vec<f64>,
}

const SNIP_TIE: f64 = 1e-9;
pub const SNIP_RESTARTS: usize = 8;

struct SnipProblem {
    shape: FactorShape,
    states: Vec<StateVector>,
}

impl SnipProblem {
    fn generator(&self, x: &[f64]) -> HermitianOperator {
        let n = self.shape.dim();
        let mut a = ComplexMatrix::zeros(n, n);
        let mut idx = n;
        for i in 0..n {
            a[(i, i)] = c(x[i]);
            for j in i + 1..n {
                let z = C64::new(x[idx], x[idx + 1]);
                a[(i, j)] = z;
                a[(j, i)] = z.conj();
                idx += 2;
            }
        }
        HermitianOperator::from_hermitian_part(a)
    }

    fn unitary(&self, x: &[f64]) -> UnitaryMatrix {
        UnitaryMatrix::exp_i(&self.generator(x))
    }

    /// Gram matrix `MM†` of the reshaped state; it shares its nonzero
    /// spectrum with both factor states.
    fn factor_gram(&self, psi: &StateVector) -> ComplexMatrix {
        let (l, m) = (self.shape.l, self.shape.m);
        let mat = ComplexMatrix::from_fn(l, m, |i, j| psi[i * m + j]);
        &mat * mat.adjoint()
    }

    fn objective_for(&self, u: &UnitaryMatrix) -> f64 {
        let purity: f64 = self.states.iter().map(|s| hs_norm(&self.factor_gram(&(u.matrix() * s))).powi(2)).sum();
        1.0 - purity / self.states.len() as f64
    }

    fn objective(&self, x: &[f64]) -> f64 {
        self.objective_for(&self.unitary(x))
    }

    fn mean_entropy(&self, u: &UnitaryMatrix) -> f64 {
        let total: f64 = self
            .states
            .iter()
            .map(|s| {
                let g = HermitianOperator::from_hermitian_part(self.factor_gram(&(u.matrix() * s)));
                let p: Vec<f64> = g.eigenvalues().into_iter().map(|x| x.max(0.0)).collect();
                entropy_bits(&p)
            })
            .sum();
        total / self.states.len() as f64
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let step = 1e-6;
        let mut y = x.to_vec();
        (0..x.len())
            .map(|i| {
                y[i] = x[i] + step;
                let fp = self.objective(&y);
                y[i] = x[i] - step;
                let fm = self.objective(&y);
                y[i] = x[i];
                (fp - fm) / (2.0 * step)
            })
            .collect()
    }

    /// BFGS with backtracking line search. Returns the final point, whether
    /// a stopping criterion was met inside the budget, and the accepted-step trace.
    fn bfgs(&self, mut x: Vec<f64>, budget: usize) -> (Vec<f64>, bool, Vec<f64>) {
        let d = x.len();
        let mut hinv = DMatrix::<f64>::identity(d, d);
        let mut f = self.objective(&x);
        let mut g = DVector::from_vec(self.gradient(&x));
        let mut trace = vec![f];
        for _ in 0..budget {
            if g.norm() < 1e-10 || f < 1e-14 {
                return (x, true, trace);
            }
            let mut dir = -(&hinv * &g);
            let mut slope = g.dot(&dir);
            if slope >= 0.0 {
                hinv = DMatrix::identity(d, d);
                dir = -g.clone();
                slope = -g.norm_squared();
            }
            let mut alpha = 1.0;
            let mut accepted = None;
            for _ in 0..50 {
                let trial: Vec<f64> = x.iter().zip(dir.iter()).map(|(a, b)| a + alpha * b).collect();
                let ft = self.objective(&trial);
                if ft < f && ft <= f + 1e-4 * alpha * slope {
                    accepted = Some((trial, ft));
                    break;
                }
                alpha *= 0.5;
            }
            let Some((xn, fn_)) = accepted else {
                if hinv == DMatrix::identity(d, d) {
                    return (x, true, trace);
                }
                hinv = DMatrix::identity(d, d);
                continue;
            };
            let gn = DVector::from_vec(self.gradient(&xn));
            let s = DVector::from_iterator(d, xn.iter().zip(&x).map(|(a, b)| a - b));
            let y = &gn - &g;
            let sy = s.dot(&y);
            if sy > 1e-16 {
                let hy: Vec<f64> = (0..d).map(|i| (0..d).map(|k| hinv[(i, k)] * y[k]).sum()).collect();
                let yhy: f64 = (0..d).map(|k| y[k] * hy[k]).sum();
                let scale = (sy + yhy) / (sy * sy);
                for i in 0..d {
                    for j in 0..d {
                        hinv[(i, j)] += scale * s[i] * s[j] - (hy[i] * s[j] + s[i] * hy[j]) / sy;
                    }
                }
            }
            x = xn;
            f = fn_;
            g = gn;
            trace.push(f);
        }
        (x, false, trace)
    }
}

/// Finds the unitary change of factorization `U` that keeps the first
/// factor as pure as possible along the trajectory, minimizing
/// `f(U) = 1 − (1/m) Σ_i ‖tr₁ Uρ(tᵢ)U†‖²`.
///
/// `U = e^{iA}` with `A` Hermitian. Restart 0 starts at `A = 0`, the others
/// from Gaussian generators; each runs BFGS with central-difference
/// gradients for at most `budget` iterations. The lowest objective wins;
/// objectives within `1e-9` of it count as ties and go to the lower restart
/// index.
pub fn factorization_optimize(
    rho0: &DensityMatrix,
    h: &HermitianOperator,
    shape: FactorShape,
    times: &[f64],
    budget: usize,
    seed: u64,
) -> Result<SnipOutcome> {
    let n = shape.dim();
    if rho0.dim() != n || h.dim() != n {
        return Err(Error::Shape(format!("state {} / Hamiltonian {} vs shape dim {n}", rho0.dim(), h.dim())));
    }
    if times.is_empty() {
        return Err(Error::OutOfRange("no sample times".into()));
    }
    let spectrum = rho0.spectrum()?;
    if spectrum[0] < 1.0 - 1e-10 {
        return Err(Error::InvalidState(format!("initial state is not pure (largest eigenvalue {})", spectrum[0])));
    }
    let top = HermitianOperator::from_hermitian_part(rho0.matrix().clone()).eigen();
    let psi0: StateVector = top.vectors.column(n - 1).into_owned();
    let eig = h.eigen();
    let states = times.iter().map(|&t| eig.propagator(t) * &psi0).collect();
    let problem = SnipProblem { shape, states };

    use rand_distr::{Distribution, StandardNormal};
    let runs: Vec<(f64, Vec<f64>, bool, Vec<f64>)> = (0..SNIP_RESTARTS)
        .into_par_iter()
        .map(|r| {
            let x0: Vec<f64> = if r == 0 {
                vec![0.0; n * n]
            } else {
                let mut g = rng(seed.wrapping_add(r as u64));
                (0..n * n).map(|_| StandardNormal.sample(&mut g)).collect()
            };
            let (x, converged, trace) = problem.bfgs(x0, budget);
            (problem.objective(&x), x, converged, trace)
        })
        .collect();
    let lowest = runs.iter().map(|r| r.0).fold(f64::INFINITY, f64::min);
    let (restart, best) = runs
        .iter()
        .enumerate()
        .find(|(_, r)| r.0 <= lowest + SNIP_TIE)
        .expect("at least one restart");
    let unitary = problem.unitary(&best.1);
    let identity_u = UnitaryMatrix::identity(n);
    Ok(SnipOutcome {
        objective: best.0,
        initial_objective: problem.objective_for(&identity_u),
        mean_entropy: problem.mean_entropy(&unitary),
        initial_entropy: problem.mean_entropy(&identity_u),
        unitary,
        converged: best.2,
        restart,
        trace: best.3.clone(),
    })
}

/// The optimizer's objective for a given `U`.
pub fn snip_objective(
    u: &UnitaryMatrix,
    rho0: &DensityMatrix,
    h: &HermitianOperator,
    shape: FactorShape,
    times: &[f64],
) -> Result<f64> {
    let eig = h.eigen();
    let total: f64 = times
        .iter()
        .map(|&t| {
            let p = eig.propagator(t);
            let rho = u.conjugate(&(&p * rho0.matrix() * p.adjoint()));
            let r1 = ptrace(&rho, shape, Subsystem::First)?;
            Ok(hs_norm(&r1).powi(2))
        })
        .sum::<Result<f64>>()?;
    Ok(1.0 - total / times.len() as f64)
}
