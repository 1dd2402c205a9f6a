//! One line per acceptance criterion; exits nonzero if any fails.

mod common;

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use perceptronium::classical::{classical_phi, hamming84, ising_phi_sweep, parity_code};
use perceptronium::dynamics::{
    apodized_state, equispaced_system, factorization_optimize, overlap_fn, overlap_sum, slin_first_derivative,
    slin_second_derivative, sliding_simulation, snip_instance, snip_times, split_hamiltonian, Potential,
    SlidingConfig,
};
use perceptronium::emergent::{
    dispersion_table, lattice_normal_modes, oscillator_level, qubit_oscillator_diagonal, sorted_frequencies,
};
use perceptronium::hilbert::{evolve, hs_projectors, DensityMatrix, FactorShape, HermitianOperator, Subsystem};
use perceptronium::info::{energy_coherence, linear_entropy, mutual_information};
use perceptronium::quantum::{max_phi_search, young_max};
use perceptronium::random::{gue, haar_unitary, random_density, rng};
use perceptronium::search::Exhaustive;
use perceptronium::separability::{integration_energy, optimal_frame, stationarity_residual};

/// Seed of the two-qubit factorization instance.
const SNIP_SEED: u64 = 5;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn within(t: Instant, limit: Duration) -> bool {
    t.elapsed() < limit
}

fn hamming_curve() -> Outcome {
    let t = Instant::now();
    let state = hamming84().uniform_state();
    let phis: Vec<f64> = (1..=4).map(|k| classical_phi(&state, k).unwrap().phi).collect();
    let expect = [1.0, 2.0, 3.0, 2.0];
    let exact = phis.iter().zip(expect).all(|(a, b)| (a - b).abs() < 1e-12);
    outcome(exact && within(t, Duration::from_secs(5)), format!("phi(k=1..4) = {phis:?} in {:.2?}", t.elapsed()))
}

fn parity_curve() -> Outcome {
    let state = parity_code(8).unwrap().uniform_state();
    let phis: Vec<f64> = (1..=4).map(|k| classical_phi(&state, k).unwrap().phi).collect();
    outcome(phis.iter().all(|p| (p - 1.0).abs() < 1e-12), format!("phi(k=1..4) = {phis:?}"))
}

fn quantum_maximum() -> Outcome {
    let t = Instant::now();
    let shape = FactorShape::new(2, 2).unwrap();
    let best = max_phi_search(shape, 2000, 7).unwrap();
    let third = 1.0 / 3.0;
    let spectrum_ok = best.best_spectrum.iter().zip([third, third, third, 0.0]).all(|(a, b)| (a - b).abs() < 1e-12);
    let rho = DensityMatrix::from_probabilities(&best.best_spectrum).unwrap();
    let mut g = rng(31);
    let lowest = (0..200)
        .map(|_| mutual_information(&rho.rotate(&haar_unitary(4, &mut g)).unwrap(), shape).unwrap().mutual_info)
        .fold(f64::INFINITY, f64::min);
    let pass = (best.best_phi - 0.2516).abs() <= 5e-4
        && spectrum_ok
        && lowest >= best.best_phi - 1e-12
        && within(t, Duration::from_secs(30));
    outcome(
        pass,
        format!(
            "phi = {:.5} at {:?}, lowest of 200 random-basis I = {lowest:.5}, {:.2?}",
            best.best_phi,
            best.best_spectrum,
            t.elapsed()
        ),
    )
}

fn young_sequence() -> Outcome {
    let got: Vec<f64> = [2, 4, 6].iter().map(|&s| young_max(FactorShape::new(s, s).unwrap()).phi).collect();
    let pass = got.iter().zip([0.252, 0.171, 0.128]).all(|(a, b)| (a - b).abs() <= 0.002);
    outcome(pass, format!("square grids of side 2, 4, 6: {got:.4?}"))
}

fn hdt_witness() -> Outcome {
    let shape = FactorShape::new(2, 2).unwrap();
    let mut g = rng(5);
    let mut violations = 0;
    let mut worst_residual = 0.0f64;
    for _ in 0..50 {
        let h = gue(4, &mut g);
        let report = integration_energy(&h, shape, &Exhaustive, 0).unwrap();
        for _ in 0..2000 {
            let u = haar_unitary(4, &mut g);
            let rotated = HermitianOperator::new(u.conjugate(h.matrix())).unwrap();
            if hs_projectors(&rotated, shape).unwrap().h3.norm() < report.integration_energy - 1e-10 {
                violations += 1;
            }
        }
        let frame = optimal_frame(&h.eigen(), &report).unwrap();
        let framed = HermitianOperator::new(frame.adjoint().conjugate(h.matrix())).unwrap();
        worst_residual = worst_residual.max(stationarity_residual(&framed, shape).unwrap());
    }
    outcome(
        violations == 0 && worst_residual < 1e-8,
        format!("{violations} violations in 100000 draws, worst stationarity residual {worst_residual:.1e}"),
    )
}

fn identity_suite() -> Outcome {
    let checks = common::identities();
    let count = checks.len();
    let mut worst = 0.0f64;
    let mut failed = Vec::new();
    for (i, (name, check)) in checks.into_iter().enumerate() {
        let r = common::worst_residual(check, 1000, 1000 + i as u64);
        worst = worst.max(r);
        if !(r <= common::IDENTITY_TOL) {
            failed.push(name);
        }
    }
    outcome(failed.is_empty(), format!("{count} identities x 1000 draws, worst residual {worst:.1e}, failed {failed:?}"))
}

fn energy_coherence_check() -> Outcome {
    let mut worst_rel = 0.0f64;
    let mut worst_drift = 0.0f64;
    for n in [4usize, 8, 16, 64] {
        let sys = equispaced_system(n, 1.0).unwrap();
        let rho = DensityMatrix::pure(&apodized_state(0, n).unwrap()).unwrap();
        let dh = energy_coherence(&rho, &sys.h).unwrap();
        let expect = (((n * n - 1) as f64) / 12.0).sqrt();
        worst_rel = worst_rel.max((dh / expect - 1.0).abs());
        for step in 1..=16 {
            let later = evolve(&rho, &sys.h, sys.period() * step as f64 / 16.0).unwrap();
            worst_drift = worst_drift.max((energy_coherence(&later, &sys.h).unwrap() - dh).abs());
        }
    }
    outcome(
        worst_rel < 1e-10 && worst_drift < 1e-9,
        format!("worst relative error {worst_rel:.1e}, worst drift over an orbit {worst_drift:.1e}"),
    )
}

fn entropy_derivatives() -> Outcome {
    let shape = FactorShape::new(2, 2).unwrap();
    let mut g = rng(12);
    let (mut first, mut fd_rel, mut zeroed) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..20 {
        let h = gue(4, &mut g);
        let (r1, r2) = (random_density(2, &mut g), random_density(2, &mut g));
        first = first.max(slin_first_derivative(&r1, &r2, &h, shape).unwrap().abs());
        let formula = slin_second_derivative(&r1, &r2, &h, shape).unwrap();
        let rho = r1.tensor(&r2);
        let s = |t: f64| linear_entropy(&evolve(&rho, &h, t).unwrap().reduced(shape, Subsystem::Second).unwrap());
        let dt = 1e-4;
        let fd = (s(dt) - 2.0 * s(0.0) + s(-dt)) / (dt * dt);
        fd_rel = fd_rel.max((fd - formula).abs() / formula.abs());
        let h3 = split_hamiltonian(&h, shape).unwrap().h3;
        zeroed = zeroed.max((slin_second_derivative(&r1, &r2, &h3, shape).unwrap() - formula).abs() / formula.abs());
    }
    outcome(
        first < 1e-10 && fd_rel < 1e-5 && zeroed < 1e-10,
        format!("max |dS/dt(0)| {first:.1e}, formula vs finite difference {fd_rel:.1e}, H1=H2=0 change {zeroed:.1e}"),
    )
}

fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let num: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    num / xs.iter().map(|x| (x - mx).powi(2)).sum::<f64>()
}

fn autonomy_scaling() -> Outcome {
    let t = Instant::now();
    let run = |b: u32, alpha: u32| {
        let cfg = SlidingConfig { b, potential: Potential::Sinusoidal, alpha, omega2: 0.0, coupling: 1.0, samples: 2 };
        sliding_simulation(&cfg).unwrap()
    };
    let bs: Vec<u32> = (4..=8).collect();
    let plain: Vec<_> = bs.iter().map(|&b| run(b, 0)).collect();
    let apod: Vec<_> = bs.iter().map(|&b| run(b, 1)).collect();
    let x: Vec<f64> = bs.iter().map(|&b| b as f64).collect();
    let s_slope = slope(&x, &plain.iter().map(|r| r.slin_t.log2()).collect::<Vec<_>>());
    let a_slope = slope(&x, &plain.iter().map(|r| r.autonomy.log2()).collect::<Vec<_>>());
    let better = plain.iter().zip(&apod).filter(|(p, _)| p.b >= 5).all(|(p, a)| a.slin_t < p.slin_t);
    let pass = (-4.8..=-3.2).contains(&s_slope)
        && (2.2..=3.8).contains(&a_slope)
        && better
        && within(t, Duration::from_secs(600));
    outcome(
        pass,
        format!(
            "S(T) slope {s_slope:.2}, autonomy slope {a_slope:.2}, alpha=1 lower for b>=5: {better}, {:.2?}",
            t.elapsed()
        ),
    )
}

fn snip() -> Outcome {
    let t = Instant::now();
    let (h, rho) = snip_instance(SNIP_SEED);
    let out = factorization_optimize(&rho, &h, FactorShape::new(2, 2).unwrap(), &snip_times(9), 400, SNIP_SEED).unwrap();
    let pass = out.mean_entropy < 0.01 && out.initial_entropy > 0.5 && within(t, Duration::from_secs(300));
    outcome(
        pass,
        format!(
            "mean entropy {:.3} -> {:.1e} bits (seed {SNIP_SEED}, restart {}), {:.2?}",
            out.initial_entropy,
            out.mean_entropy,
            out.restart,
            t.elapsed()
        ),
    )
}

fn ising() -> Outcome {
    let temps: Vec<f64> = (0..20).map(|i| 10f64.powf(-3.0 + 9.0 * i as f64 / 19.0)).collect();
    let sweep = ising_phi_sweep(3, &temps, 1.0).unwrap();
    let phis: Vec<f64> = sweep.iter().map(|p| p.phi).collect();
    let (cold, hot) = (phis[0], phis[19]);
    let (peak_i, peak) = phis.iter().enumerate().fold((0, f64::NEG_INFINITY), |b, (i, &p)| if p > b.1 { (i, p) } else { b });
    let interior = peak_i > 0 && peak_i < 19 && peak > cold && peak > hot;
    outcome(
        (cold - 1.0).abs() <= 0.01 && hot < 0.01 && interior,
        format!("phi(T=1e-3) = {cold:.4}, phi(T=1e6) = {hot:.1e}, peak {peak:.4} at T = {:.3}", temps[peak_i]),
    )
}

fn emergent() -> Outcome {
    let exact = (1..=10u32).all(|b| {
        let mut d = qubit_oscillator_diagonal(b).unwrap();
        d.sort_by(f64::total_cmp);
        d.iter().enumerate().all(|(k, &e)| e == oscillator_level(b, k as u64))
    });
    let modes = lattice_normal_modes(4, 1.0, 1.0).unwrap();
    let formula = sorted_frequencies(&dispersion_table(4, 1.0, 1.0).unwrap());
    let worst = modes.iter().zip(formula.iter()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    outcome(
        exact && modes.len() == 64 && worst < 1e-9,
        format!("oscillator spectra exact for b<=10: {exact}, 64 lattice modes vs dispersion {worst:.1e}"),
    )
}

fn overlap() -> Outcome {
    let zeros = (1..20).map(|k| overlap_fn(20, 2.0 * PI * k as f64 / 20.0).abs()).fold(0.0, f64::max);
    use rand::Rng;
    let mut g = rng(13);
    let worst = (0..1000)
        .map(|_| {
            let phi = g.random_range(-4.0 * PI..4.0 * PI);
            let n = g.random_range(2..=64);
            let s = overlap_sum(n, phi);
            (overlap_fn(n, phi) - s.re).abs().max(s.im.abs())
        })
        .fold(0.0, f64::max);
    outcome(zeros < 1e-12 && worst < 1e-12, format!("max |f_20(2pi k/20)| {zeros:.1e}, closed form vs sum {worst:.1e}"))
}

fn main() {
    let criteria: Vec<(&str, fn() -> Outcome)> = vec![
        ("hamming(8,4) phi curve", hamming_curve),
        ("parity code phi", parity_curve),
        ("quantum phi maximum at n=4", quantum_maximum),
        ("young tableau sequence", young_sequence),
        ("hamiltonian diagonalization witness", hdt_witness),
        ("tensor identity suite", identity_suite),
        ("energy coherence", energy_coherence_check),
        ("entropy derivative formulas", entropy_derivatives),
        ("autonomy scaling", autonomy_scaling),
        ("factorization optimizer", snip),
        ("ising 3x3 phi", ising),
        ("emergent structure", emergent),
        ("overlap function", overlap),
    ];
    let mut failures = 0;
    for (i, (name, run)) in criteria.into_iter().enumerate() {
        let o = run();
        if !o.pass {
            failures += 1;
        }
        println!("criterion {:>2} {} {name}: {}", i + 1, if o.pass { "PASS" } else { "FAIL" }, o.detail);
    }
    println!("{} of 13 criteria pass", 13 - failures);
    if failures > 0 {
        std::process::exit(1);
    }
}
