#![allow(dead_code)]

use perceptronium::hilbert::{
    c, hs_inner, hs_norm, identity, kron, ptrace, ComplexMatrix, FactorShape, Subsystem,
};
use perceptronium::random::ginibre;
use rand_chacha::ChaCha8Rng;

pub const SHAPES: [(usize, usize); 3] = [(2, 2), (2, 3), (3, 4)];
pub const IDENTITY_TOL: f64 = 1e-12;

pub fn shape(i: usize) -> FactorShape {
    let (l, m) = SHAPES[i % SHAPES.len()];
    FactorShape::new(l, m).unwrap()
}

fn tr1(a: &ComplexMatrix, s: FactorShape) -> ComplexMatrix {
    ptrace(a, s, Subsystem::First).unwrap()
}

fn tr2(a: &ComplexMatrix, s: FactorShape) -> ComplexMatrix {
    ptrace(a, s, Subsystem::Second).unwrap()
}

fn max_abs(a: &ComplexMatrix) -> f64 {
    a.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// `max|lhs − rhs| / max(1, max|lhs|)`.
pub fn rel(lhs: &ComplexMatrix, rhs: &ComplexMatrix) -> f64 {
    assert_eq!(lhs.shape(), rhs.shape());
    max_abs(&(lhs - rhs)) / max_abs(lhs).max(1.0)
}

fn rel_scalar(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(1.0)
}

pub type IdentityCheck = fn(&mut ChaCha8Rng, FactorShape) -> f64;

/// The tensor-product and partial-trace identities, each returning its
/// relative residual on one random draw.
pub fn identities() -> Vec<(&'static str, IdentityCheck)> {
    fn g(n: usize, r: &mut ChaCha8Rng) -> ComplexMatrix {
        ginibre(n, r)
    }
    vec![
        ("kron_associative", |r, s| {
            let (a, b, cc) = (g(s.l, r), g(s.m, r), g(2, r));
            rel(&kron(&kron(&a, &b), &cc), &kron(&a, &kron(&b, &cc)))
        }),
        ("kron_distributes_right", |r, s| {
            let (a, b, cc) = (g(s.l, r), g(s.m, r), g(s.m, r));
            rel(&kron(&a, &(&b + &cc)), &(kron(&a, &b) + kron(&a, &cc)))
        }),
        ("kron_distributes_left", |r, s| {
            let (a, b, cc) = (g(s.m, r), g(s.l, r), g(s.l, r));
            rel(&kron(&(&b + &cc), &a), &(kron(&b, &a) + kron(&cc, &a)))
        }),
        ("kron_adjoint", |r, s| {
            let (a, b) = (g(s.l, r), g(s.m, r));
            rel(&kron(&a, &b).adjoint(), &kron(&a.adjoint(), &b.adjoint()))
        }),
        ("kron_inverse", |r, s| {
            let (a, b) = (g(s.l, r), g(s.m, r));
            let ab = kron(&a, &b);
            let sv = ab.singular_values();
            let cond = sv.max() / sv.min();
            // Both sides are computed inverses, accurate only to cond·ε.
            rel(&ab.try_inverse().unwrap(), &kron(&a.try_inverse().unwrap(), &b.try_inverse().unwrap())) / cond.max(1.0)
        }),
        ("trace_of_kron", |r, s| {
            let (a, b) = (g(s.l, r), g(s.m, r));
            let lhs = kron(&a, &b).trace();
            let rhs = a.trace() * b.trace();
            (lhs - rhs).norm() / lhs.norm().max(1.0)
        }),
        ("tr1_of_kron", |r, s| {
            let (a, b) = (g(s.l, r), g(s.m, r));
            rel(&tr1(&kron(&a, &b), s), &(&b * a.trace()))
        }),
        ("tr2_of_kron", |r, s| {
            let (a, b) = (g(s.l, r), g(s.m, r));
            rel(&tr2(&kron(&a, &b), s), &(&a * b.trace()))
        }),
        ("tr1_cycles_first_factor", |r, s| {
            let (a, b) = (g(s.dim(), r), kron(&g(s.l, r), &identity(s.m)));
            rel(&tr1(&(&a * &b), s), &tr1(&(&b * &a), s))
        }),
        ("tr2_cycles_second_factor", |r, s| {
            let (a, b) = (g(s.dim(), r), kron(&identity(s.l), &g(s.m, r)));
            rel(&tr2(&(&a * &b), s), &tr2(&(&b * &a), s))
        }),
        ("tr1_left_factor_out", |r, s| {
            let (a, b) = (g(s.m, r), g(s.dim(), r));
            rel(&tr1(&(kron(&identity(s.l), &a) * &b), s), &(&a * tr1(&b, s)))
        }),
        ("tr2_left_factor_out", |r, s| {
            let (a, b) = (g(s.l, r), g(s.dim(), r));
            rel(&tr2(&(kron(&a, &identity(s.m)) * &b), s), &(&a * tr2(&b, s)))
        }),
        ("tr1_right_factor_out", |r, s| {
            let (a, b) = (g(s.dim(), r), g(s.m, r));
            rel(&tr1(&(&a * kron(&identity(s.l), &b)), s), &(tr1(&a, s) * &b))
        }),
        ("tr2_right_factor_out", |r, s| {
            let (a, b) = (g(s.dim(), r), g(s.l, r));
            rel(&tr2(&(&a * kron(&b, &identity(s.m))), s), &(tr2(&a, s) * &b))
        }),
        ("tr1_right_product", |r, s| {
            let (a, b, cc) = (g(s.dim(), r), g(s.l, r), g(s.m, r));
            rel(&tr1(&(&a * kron(&b, &cc)), s), &(tr1(&(&a * kron(&b, &identity(s.m))), s) * &cc))
        }),
        ("tr2_right_product", |r, s| {
            let (a, b, cc) = (g(s.dim(), r), g(s.l, r), g(s.m, r));
            rel(&tr2(&(&a * kron(&b, &cc)), s), &(tr2(&(&a * kron(&identity(s.l), &cc)), s) * &b))
        }),
        ("tr1_left_product", |r, s| {
            let (a, b, cc) = (g(s.dim(), r), g(s.l, r), g(s.m, r));
            rel(&tr1(&(kron(&b, &cc) * &a), s), &(&cc * tr1(&(kron(&b, &identity(s.m)) * &a), s)))
        }),
        ("tr2_left_product", |r, s| {
            let (a, b, cc) = (g(s.dim(), r), g(s.l, r), g(s.m, r));
            rel(&tr2(&(kron(&b, &cc) * &a), s), &(&b * tr2(&(kron(&identity(s.l), &cc) * &a), s)))
        }),
        ("trace_against_tr2", |r, s| {
            let (a, b) = (g(s.dim(), r), g(s.dim(), r));
            let lhs = (kron(&tr2(&a, s), &identity(s.m)) * &b).trace();
            let rhs = (tr2(&a, s) * tr2(&b, s)).trace();
            (lhs - rhs).norm() / lhs.norm().max(1.0)
        }),
        ("trace_against_tr1", |r, s| {
            let (a, b) = (g(s.dim(), r), g(s.dim(), r));
            let lhs = (kron(&identity(s.l), &tr1(&a, s)) * &b).trace();
            let rhs = (tr1(&a, s) * tr1(&b, s)).trace();
            (lhs - rhs).norm() / lhs.norm().max(1.0)
        }),
        ("inner_product_factorizes", |r, s| {
            let (a, b, cc, d) = (g(s.l, r), g(s.m, r), g(s.l, r), g(s.m, r));
            let lhs = hs_inner(&kron(&a, &b), &kron(&cc, &d)).unwrap();
            let rhs = hs_inner(&a, &cc).unwrap() * hs_inner(&b, &d).unwrap();
            (lhs - rhs).norm() / lhs.norm().max(1.0)
        }),
        ("norm_factorizes", |r, s| {
            let (a, b) = (g(s.l, r), g(s.m, r));
            rel_scalar(hs_norm(&kron(&a, &b)), hs_norm(&a) * hs_norm(&b))
        }),
    ]
}

/// `T₁A = I⊗(tr₁A)/l`.
pub fn t1(a: &ComplexMatrix, s: FactorShape) -> ComplexMatrix {
    kron(&identity(s.l), &tr1(a, s)) * c(1.0 / s.l as f64)
}

/// `T₂A = (tr₂A)⊗I/m`.
pub fn t2(a: &ComplexMatrix, s: FactorShape) -> ComplexMatrix {
    kron(&tr2(a, s), &identity(s.m)) * c(1.0 / s.m as f64)
}

pub fn superoperator_checks() -> Vec<(&'static str, IdentityCheck)> {
    fn g(n: usize, r: &mut ChaCha8Rng) -> ComplexMatrix {
        ginibre(n, r)
    }
    vec![
        ("t1_self_adjoint", |r, s| {
            let (a, b) = (g(s.dim(), r), g(s.dim(), r));
            let lhs = hs_inner(&t1(&a, s), &b).unwrap();
            (lhs - hs_inner(&a, &t1(&b, s)).unwrap()).norm() / lhs.norm().max(1.0)
        }),
        ("t2_self_adjoint", |r, s| {
            let (a, b) = (g(s.dim(), r), g(s.dim(), r));
            let lhs = hs_inner(&t2(&a, s), &b).unwrap();
            (lhs - hs_inner(&a, &t2(&b, s)).unwrap()).norm() / lhs.norm().max(1.0)
        }),
        ("t1_idempotent", |r, s| {
            let a = g(s.dim(), r);
            let once = t1(&a, s);
            rel(&t1(&once, s), &once)
        }),
        ("t2_idempotent", |r, s| {
            let a = g(s.dim(), r);
            let once = t2(&a, s);
            rel(&t2(&once, s), &once)
        }),
    ]
}

/// Worst residual of `check` over `trials` draws cycling through [`SHAPES`].
pub fn worst_residual(check: IdentityCheck, trials: usize, seed: u64) -> f64 {
    let mut r = perceptronium::random::rng(seed);
    (0..trials).map(|i| check(&mut r, shape(i))).fold(0.0, f64::max)
}
