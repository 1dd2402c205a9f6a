//! Integrated information of classical bit-string distributions.
//!
//! Bit `i` of a word is position `i` of the string (row `i` of a code matrix).

use std::collections::HashMap;

use itertools::Itertools;
use rand::seq::index;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::info::entropy_bits;
use crate::random::rng;

/// Largest bit length searched exhaustively and the largest code length.
pub const MAX_EXACT_BITS: usize = 24;
const GREEDY_RESTARTS: usize = 32;
const DENSE_MARGINAL_BITS: usize = 16;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BitStringCode {
    n: usize,
    words: Vec<u64>,
}

impl BitStringCode {
    pub fn new(n: usize, words: Vec<u64>) -> Result<Self> {
        if n == 0 || n > MAX_EXACT_BITS {
            return Err(Error::OutOfRange(format!("code length {n} outside 1..={MAX_EXACT_BITS}")));
        }
        let mut words = words;
        if words.iter().any(|&w| w >> n != 0) {
            return Err(Error::OutOfRange(format!("word wider than {n} bits")));
        }
        words.sort_unstable();
        let before = words.len();
        words.dedup();
        if words.len() != before {
            return Err(Error::OutOfRange("duplicate code words".into()));
        }
        if words.is_empty() {
            return Err(Error::OutOfRange("empty code".into()));
        }
        Ok(BitStringCode { n, words })
    }

    /// One string of `0`/`1` per line; blank lines and `#` comments are skipped.
    pub fn parse(text: &str) -> Result<Self> {
        let mut n = None;
        let mut words = Vec::new();
        for line in text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')) {
            if *n.get_or_insert(line.len()) != line.len() {
                return Err(Error::Shape(format!("line '{line}' has the wrong length")));
            }
            let mut w = 0u64;
            for (i, ch) in line.chars().enumerate() {
                match ch {
                    '0' => {}
                    '1' => w |= 1 << i,
                    _ => return Err(Error::Shape(format!("unexpected character '{ch}'"))),
                }
            }
            words.push(w);
        }
        BitStringCode::new(n.unwrap_or(0), words)
    }

    pub fn to_text(&self) -> String {
        self.words.iter().map(|&w| word_string(w, self.n) + "\n").collect()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    pub fn min_distance(&self) -> Option<u32> {
        self.words.iter().tuple_combinations().map(|(a, b)| (a ^ b).count_ones()).min()
    }

    pub fn uniform_state(&self) -> ClassicalState {
        let p = 1.0 / self.words.len() as f64;
        ClassicalState { n: self.n, support: self.words.iter().map(|&w| (w, p)).collect() }
    }
}

pub fn word_string(w: u64, n: usize) -> String {
    (0..n).map(|i| if w >> i & 1 == 1 { '1' } else { '0' }).collect()
}

/// The 16 codewords of the extended Hamming(8,4) code, one per column.
pub fn hamming84() -> BitStringCode {
    const ROWS: [&str; 8] = [
        "0000111100001111",
        "0000000011111111",
        "0110100101101001",
        "0101010110101010",
        "0101101001011010",
        "0011001111001100",
        "0011110000111100",
        "0110011010011001",
    ];
    let words = (0..16)
        .map(|col| {
            ROWS.iter().enumerate().fold(0u64, |w, (row, bits)| w | (u64::from(bits.as_bytes()[col] == b'1') << row))
        })
        .collect();
    BitStringCode::new(8, words).expect("valid code")
}

/// All even-weight strings of length `n`.
pub fn parity_code(n: usize) -> Result<BitStringCode> {
    BitStringCode::new(n, (0..1u64 << n).filter(|w| w.count_ones() % 2 == 0).collect())
}

/// `m` distinct words drawn uniformly from all `2ⁿ` strings.
pub fn random_code(n: usize, m: usize, seed: u64) -> Result<BitStringCode> {
    if n == 0 || n > MAX_EXACT_BITS {
        return Err(Error::OutOfRange(format!("code length {n} outside 1..={MAX_EXACT_BITS}")));
    }
    let total = 1usize << n;
    if m == 0 || m > total {
        return Err(Error::OutOfRange(format!("cannot pick {m} of {total} words")));
    }
    let words = index::sample(&mut rng(seed), total, m).into_iter().map(|i| i as u64).collect();
    BitStringCode::new(n, words)
}

/// A probability distribution over `n`-bit strings, stored by support.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassicalState {
    n: usize,
    support: Vec<(u64, f64)>,
}

impl ClassicalState {
    /// Entry `w` of `probs` is the probability of word `w`.
    pub fn from_dense(n: usize, probs: &[f64]) -> Result<Self> {
        if n > 63 || probs.len() != 1usize << n {
            return Err(Error::Shape(format!("{} probabilities for {n} bits", probs.len())));
        }
        Self::from_support(n, probs.iter().enumerate().map(|(w, &p)| (w as u64, p)).collect())
    }

    pub fn from_support(n: usize, support: Vec<(u64, f64)>) -> Result<Self> {
        if n == 0 || n > 63 {
            return Err(Error::OutOfRange(format!("bit length {n}")));
        }
        let mut merged: HashMap<u64, f64> = HashMap::new();
        for (w, p) in support {
            if w >> n != 0 {
                return Err(Error::OutOfRange(format!("word wider than {n} bits")));
            }
            if !p.is_finite() || p < -1e-12 {
                return Err(Error::OutOfRange(format!("probability {p}")));
            }
            *merged.entry(w).or_default() += p.max(0.0);
        }
        let total: f64 = merged.values().sum();
        if (total - 1.0).abs() > 1e-10 {
            return Err(Error::OutOfRange(format!("probabilities sum to {total}")));
        }
        let mut support: Vec<(u64, f64)> = merged.into_iter().filter(|&(_, p)| p > 0.0).collect();
        support.sort_unstable_by_key(|&(w, _)| w);
        Ok(ClassicalState { n, support })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn support(&self) -> &[(u64, f64)] {
        &self.support
    }

    pub fn entropy(&self) -> f64 {
        entropy_bits(&self.support.iter().map(|&(_, p)| p).collect::<Vec<_>>())
    }

    /// Relabels bit `i` as bit `perm[i]`.
    pub fn permute_bits(&self, perm: &[usize]) -> Result<Self> {
        let mut seen = vec![false; self.n];
        if perm.len() != self.n || perm.iter().any(|&p| p >= self.n || std::mem::replace(&mut seen[p], true)) {
            return Err(Error::OutOfRange("not a permutation of the bit positions".into()));
        }
        let support = self
            .support
            .iter()
            .map(|&(w, p)| ((0..self.n).fold(0u64, |acc, i| acc | ((w >> i & 1) << perm[i])), p))
            .collect();
        Self::from_support(self.n, support)
    }

    fn marginal_entropy(&self, bits: &[usize]) -> f64 {
        let gather = |w: u64| bits.iter().enumerate().fold(0usize, |acc, (j, &b)| acc | ((w >> b & 1) as usize) << j);
        if bits.len() <= DENSE_MARGINAL_BITS {
            let mut table = vec![0.0; 1 << bits.len()];
            for &(w, p) in &self.support {
                table[gather(w)] += p;
            }
            entropy_bits(&table)
        } else {
            let mut table: HashMap<usize, f64> = HashMap::new();
            for &(w, p) in &self.support {
                *table.entry(gather(w)).or_default() += p;
            }
            let mut probs: Vec<(usize, f64)> = table.into_iter().collect();
            probs.sort_unstable_by_key(|&(k, _)| k);
            entropy_bits(&probs.into_iter().map(|(_, p)| p).collect::<Vec<_>>())
        }
    }

    /// Mutual information between the bits in `first` and the rest.
    pub fn cut_information(&self, first: &[usize]) -> f64 {
        let second = complement(first, self.n);
        self.marginal_entropy(first) + self.marginal_entropy(&second) - self.entropy()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cut {
    pub first: Vec<usize>,
    pub second: Vec<usize>,
}

impl Cut {
    pub fn new(first: Vec<usize>, n: usize) -> Result<Self> {
        let mut first = first;
        first.sort_unstable();
        first.dedup();
        if first.is_empty() || first.len() >= n || first.iter().any(|&b| b >= n) {
            return Err(Error::OutOfRange(format!("invalid cut {first:?} of {n} bits")));
        }
        let second = complement(&first, n);
        Ok(Cut { first, second })
    }

    pub fn label(&self) -> String {
        self.first.iter().map(|b| b.to_string()).join(" ")
    }
}

fn complement(first: &[usize], n: usize) -> Vec<usize> {
    (0..n).filter(|b| !first.contains(b)).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassicalPhi {
    pub phi: f64,
    pub cut: Cut,
    /// False when the minimum came from the greedy descent.
    pub certified: bool,
}

/// Relative tie window when comparing cut values.
const TIE: f64 = 1e-12;

/// Minimum over the supplied first-halves; ties go to the earliest entry.
pub fn phi_over_cuts(state: &ClassicalState, cuts: &[Vec<usize>]) -> Result<ClassicalPhi> {
    if cuts.is_empty() {
        return Err(Error::OutOfRange("no cuts to search".into()));
    }
    let cuts: Vec<Cut> = cuts.iter().map(|c| Cut::new(c.clone(), state.n)).collect::<Result<_>>()?;
    let values: Vec<f64> = cuts.par_iter().map(|c| state.cut_information(&c.first)).collect();
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v < values[best] - TIE {
            best = i;
        }
    }
    Ok(ClassicalPhi { phi: values[best].max(0.0), cut: cuts[best].clone(), certified: true })
}

/// Φ for cut size `k`: exhaustive over all `C(n, k)` subsets when
/// `n ≤ 24`, otherwise a greedy swap descent that only bounds Φ from above.
pub fn classical_phi(state: &ClassicalState, k: usize) -> Result<ClassicalPhi> {
    let n = state.n;
    if k == 0 || 2 * k > n {
        return Err(Error::OutOfRange(format!("cut size {k} outside 1..={}", n / 2)));
    }
    if n <= MAX_EXACT_BITS {
        let cuts: Vec<Vec<usize>> = (0..n).combinations(k).collect();
        return phi_over_cuts(state, &cuts);
    }
    greedy_phi(state, k)
}

fn greedy_phi(state: &ClassicalState, k: usize) -> Result<ClassicalPhi> {
    let n = state.n;
    let runs: Vec<(f64, Vec<usize>)> = (0..GREEDY_RESTARTS as u64)
        .into_par_iter()
        .map(|r| {
            let mut g = rng(r);
            let mut first: Vec<usize> = index::sample(&mut g, n, k).into_vec();
            first.sort_unstable();
            let mut value = state.cut_information(&first);
            loop {
                let mut improved = None;
                for i in 0..k {
                    for out in complement(&first, n) {
                        let mut cand = first.clone();
                        cand[i] = out;
                        cand.sort_unstable();
                        let v = state.cut_information(&cand);
                        if v < value - TIE && improved.as_ref().is_none_or(|(bv, _)| v < *bv - TIE) {
                            improved = Some((v, cand));
                        }
                    }
                }
                match improved {
                    Some((v, cand)) => {
                        value = v;
                        first = cand;
                    }
                    None => break,
                }
            }
            (value, first)
        })
        .collect();
    let mut best = 0;
    for (i, (v, _)) in runs.iter().enumerate() {
        if *v < runs[best].0 - TIE {
            best = i;
        }
    }
    let (phi, first) = runs[best].clone();
    Ok(ClassicalPhi { phi: phi.max(0.0), cut: Cut::new(first, n)?, certified: false })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CodeCapacity {
    /// `log₂ C(2ⁿ, k)`.
    pub exact: f64,
    /// `k(n − log₂ k)`.
    pub approx: f64,
}

pub fn code_capacity(n: u32, k: u64) -> Result<CodeCapacity> {
    if n > 63 || k == 0 || (k as f64) > 2f64.powi(n as i32) {
        return Err(Error::OutOfRange(format!("cannot choose {k} of 2^{n} strings")));
    }
    use statrs::function::gamma::ln_gamma;
    let total = 2f64.powi(n as i32);
    let kf = k as f64;
    let exact = (ln_gamma(total + 1.0) - ln_gamma(kf + 1.0) - ln_gamma(total - kf + 1.0)) / std::f64::consts::LN_2;
    Ok(CodeCapacity { exact, approx: kf * (n as f64 - kf.log2()) })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HopfieldCapacity {
    /// `log₂(0.14·n)`.
    pub attractor_bits: f64,
    /// `log₂ n`, the looser figure.
    pub log2_neurons: f64,
}

pub fn hopfield_capacity(neurons: u64) -> Result<HopfieldCapacity> {
    if neurons < 8 {
        return Err(Error::OutOfRange(format!("{neurons} neurons")));
    }
    let n = neurons as f64;
    Ok(HopfieldCapacity { attractor_bits: (0.14 * n).log2(), log2_neurons: n.log2() })
}

/// Boltzmann distribution of the periodic `side×side` nearest-neighbour
/// Ising model, `E = −J Σ s_i s_j`, with bit 1 meaning spin up. Site
/// `(r, c)` is bit `side·r + c`.
pub fn ising_state(side: usize, temperature: f64, coupling: f64) -> Result<ClassicalState> {
    if side < 2 || side * side > 16 {
        return Err(Error::TooLarge(format!("{side}x{side} lattice")));
    }
    if !(temperature > 0.0) {
        return Err(Error::OutOfRange(format!("temperature {temperature}")));
    }
    let n = side * side;
    let bonds: Vec<(usize, usize)> = (0..side)
        .flat_map(|r| (0..side).flat_map(move |c| [(r, c, r, (c + 1) % side), (r, c, (r + 1) % side, c)]))
        .map(|(r1, c1, r2, c2)| (side * r1 + c1, side * r2 + c2))
        .collect();
    let energy = |w: u64| -> f64 {
        let spin = |b: usize| if w >> b & 1 == 1 { 1.0 } else { -1.0 };
        -coupling * bonds.iter().map(|&(a, b)| spin(a) * spin(b)).sum::<f64>()
    };
    let energies: Vec<f64> = (0..1u64 << n).map(energy).collect();
    let e0 = energies.iter().copied().fold(f64::INFINITY, f64::min);
    let weights: Vec<f64> = energies.iter().map(|e| (-(e - e0) / temperature).exp()).collect();
    let z: f64 = weights.iter().sum();
    let probs: Vec<f64> = weights.iter().map(|w| w / z).collect();
    ClassicalState::from_dense(n, &probs)
}

/// Equal bipartitions made of whole contiguous rows or columns (cyclically),
/// for even `side`.
pub fn straight_line_cuts(side: usize) -> Vec<Vec<usize>> {
    if side % 2 != 0 {
        return Vec::new();
    }
    let mut cuts = Vec::new();
    for start in 0..side {
        let lines: Vec<usize> = (0..side / 2).map(|j| (start + j) % side).collect();
        let mut rows: Vec<usize> = lines.iter().flat_map(|&r| (0..side).map(move |c| side * r + c)).collect();
        let mut cols: Vec<usize> = lines.iter().flat_map(|&c| (0..side).map(move |r| side * r + c)).collect();
        rows.sort_unstable();
        cols.sort_unstable();
        cuts.push(rows);
        cuts.push(cols);
    }
    cuts.sort();
    cuts.dedup();
    cuts
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IsingPoint {
    pub temperature: f64,
    pub phi: f64,
    pub cut: Cut,
}

/// Φ across equal bipartitions at each temperature: every bipartition for
/// lattices of at most 9 sites, straight-line cuts otherwise.
pub fn ising_phi_sweep(side: usize, temps: &[f64], coupling: f64) -> Result<Vec<IsingPoint>> {
    let n = side * side;
    let cuts: Vec<Vec<usize>> = if n <= 9 { (0..n).combinations(n / 2).collect() } else { straight_line_cuts(side) };
    if cuts.is_empty() {
        return Err(Error::OutOfRange(format!("no equal straight-line cut for side {side}")));
    }
    temps
        .iter()
        .map(|&t| {
            let state = ising_state(side, t, coupling)?;
            let r = phi_over_cuts(&state, &cuts)?;
            Ok(IsingPoint { temperature: t, phi: r.phi, cut: r.cut })
        })
        .collect()
}
