//! Searches over arrangements of a value list into grid cells.
//!
//! An arrangement is a permutation `p` placing `values[p[c]]` in cell `c`.
//! Strategies live behind [`PermutationSearch`] and are looked up by name
//! in a [`SearchRegistry`].

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::random::rng;

/// Exhaustive search is allowed up to this many values.
pub const MAX_EXHAUSTIVE: usize = 10;
/// Values closer than this (relative) are treated as degenerate.
const DEGENERACY_TOL: f64 = 1e-12;
const TIE: f64 = 1e-12;

pub type Objective<'a> = dyn Fn(&[f64]) -> f64 + Sync + 'a;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchOutcome {
    pub value: f64,
    pub permutation: Vec<usize>,
    /// True when the optimum is proven by enumeration.
    pub certified: bool,
    pub evaluated: usize,
}

impl SearchOutcome {
    pub fn arrange(&self, values: &[f64]) -> Vec<f64> {
        self.permutation.iter().map(|&i| values[i]).collect()
    }
}

pub trait PermutationSearch: Send + Sync {
    fn name(&self) -> &'static str;
    fn minimize(&self, values: &[f64], objective: &Objective<'_>, seed: u64) -> Result<SearchOutcome>;
}

/// Value classes in descending order, each listing the indices it owns.
fn degeneracy_classes(values: &[f64]) -> Vec<Vec<usize>> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));
    let mut classes: Vec<Vec<usize>> = Vec::new();
    for i in order {
        match classes.last_mut() {
            Some(cls) if (values[cls[0]] - values[i]).abs() <= DEGENERACY_TOL * values[cls[0]].abs().max(1.0) => {
                cls.push(i)
            }
            _ => classes.push(vec![i]),
        }
    }
    classes
}

fn next_permutation(a: &mut [u8]) -> bool {
    let n = a.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && a[i - 1] >= a[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while a[j] <= a[i - 1] {
        j -= 1;
    }
    a.swap(i - 1, j);
    a[i..].reverse();
    true
}

fn labels_to_permutation(first: usize, labels: &[u8], classes: &[Vec<usize>]) -> Vec<usize> {
    let mut cursor = vec![0usize; classes.len()];
    cursor[0] = 1;
    let mut perm = Vec::with_capacity(labels.len() + 1);
    perm.push(first);
    for &l in labels {
        let l = l as usize;
        perm.push(classes[l][cursor[l]]);
        cursor[l] += 1;
    }
    perm
}

/// Every distinct arrangement with the largest value pinned to cell 0.
/// Row and column relabelings move any cell to the corner, so pinning loses
/// nothing for objectives invariant under those relabelings.
pub struct Exhaustive;

impl PermutationSearch for Exhaustive {
    fn name(&self) -> &'static str {
        "exhaustive"
    }

    fn minimize(&self, values: &[f64], objective: &Objective<'_>, _seed: u64) -> Result<SearchOutcome> {
        let n = values.len();
        if n == 0 {
            return Err(Error::OutOfRange("no values to arrange".into()));
        }
        if n > MAX_EXHAUSTIVE {
            return Err(Error::TooLarge(format!("{n} values exceed the exhaustive limit {MAX_EXHAUSTIVE}")));
        }
        let classes = degeneracy_classes(values);
        let first = classes[0][0];
        let mut labels: Vec<u8> = classes
            .iter()
            .enumerate()
            .flat_map(|(c, cls)| std::iter::repeat_n(c as u8, if c == 0 { cls.len() - 1 } else { cls.len() }))
            .collect();
        let mut all = vec![labels.clone()];
        while next_permutation(&mut labels) {
            all.push(labels.clone());
        }
        let scores: Vec<f64> = all
            .par_iter()
            .map(|lab| {
                let perm = labels_to_permutation(first, lab, &classes);
                let arranged: Vec<f64> = perm.iter().map(|&i| values[i]).collect();
                objective(&arranged)
            })
            .collect();
        let mut best = 0;
        for (i, &s) in scores.iter().enumerate() {
            if s < scores[best] - TIE {
                best = i;
            }
        }
        Ok(SearchOutcome {
            value: scores[best],
            permutation: labels_to_permutation(first, &all[best], &classes),
            certified: true,
            evaluated: scores.len(),
        })
    }
}

/// Simulated annealing over transpositions of cells `1..n`, largest value
/// pinned to cell 0. The temperature falls geometrically from `t_start`
/// to `t_end` (both relative to the spread of a random sample of scores)
/// over `steps_per_value · n` proposals, with `restarts` independent chains.
#[derive(Clone, Debug)]
pub struct Annealing {
    pub steps_per_value: usize,
    pub t_start: f64,
    pub t_end: f64,
    pub restarts: usize,
}

impl Default for Annealing {
    fn default() -> Self {
        Annealing { steps_per_value: 4000, t_start: 0.5, t_end: 1e-4, restarts: 4 }
    }
}

impl Annealing {
    fn chain(&self, values: &[f64], objective: &Objective<'_>, seed: u64) -> (f64, Vec<usize>, usize) {
        let n = values.len();
        let mut g = rng(seed);
        let first = degeneracy_classes(values)[0][0];
        let mut perm: Vec<usize> = std::iter::once(first).chain((0..n).filter(|&i| i != first)).collect();
        let score = |p: &[usize]| objective(&p.iter().map(|&i| values[i]).collect::<Vec<_>>());
        let mut current = score(&perm);
        let mut evaluated = 1;
        if n < 3 {
            return (current, perm, evaluated);
        }
        let mut sample = Vec::with_capacity(32);
        let mut probe = perm.clone();
        for _ in 0..32 {
            let (a, b) = (g.random_range(1..n), g.random_range(1..n));
            probe.swap(a, b);
            sample.push(score(&probe));
        }
        evaluated += sample.len();
        let mean = sample.iter().sum::<f64>() / sample.len() as f64;
        let spread = (sample.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / sample.len() as f64).sqrt();
        let scale = spread.max(mean.abs() * 1e-3).max(1e-12);
        let steps = self.steps_per_value * n;
        let ratio = (self.t_end / self.t_start).powf(1.0 / steps as f64);
        let mut temp = self.t_start * scale;
        let (mut best, mut best_perm) = (current, perm.clone());
        for _ in 0..steps {
            let a = g.random_range(1..n);
            let mut b = g.random_range(1..n - 1);
            if b >= a {
                b += 1;
            }
            perm.swap(a, b);
            let cand = score(&perm);
            evaluated += 1;
            if cand <= current || g.random::<f64>() < ((current - cand) / temp).exp() {
                current = cand;
                if cand < best - TIE {
                    best = cand;
                    best_perm = perm.clone();
                }
            } else {
                perm.swap(a, b);
            }
            temp *= ratio;
        }
        (best, best_perm, evaluated)
    }
}

impl PermutationSearch for Annealing {
    fn name(&self) -> &'static str {
        "annealing"
    }

    fn minimize(&self, values: &[f64], objective: &Objective<'_>, seed: u64) -> Result<SearchOutcome> {
        if values.is_empty() {
            return Err(Error::OutOfRange("no values to arrange".into()));
        }
        let runs: Vec<(f64, Vec<usize>, usize)> = (0..self.restarts.max(1) as u64)
            .into_par_iter()
            .map(|r| self.chain(values, objective, seed.wrapping_mul(0x9E37_79B9).wrapping_add(r)))
            .collect();
        let mut best = 0;
        for (i, run) in runs.iter().enumerate() {
            if run.0 < runs[best].0 - TIE {
                best = i;
            }
        }
        Ok(SearchOutcome {
            value: runs[best].0,
            permutation: runs[best].1.clone(),
            certified: false,
            evaluated: runs.iter().map(|r| r.2).sum(),
        })
    }
}

/// Picks exhaustive search when it is within limits and annealing otherwise.
pub struct Auto {
    pub heuristic: Annealing,
}

impl PermutationSearch for Auto {
    fn name(&self) -> &'static str {
        "auto"
    }

    fn minimize(&self, values: &[f64], objective: &Objective<'_>, seed: u64) -> Result<SearchOutcome> {
        if values.len() <= MAX_EXHAUSTIVE {
            Exhaustive.minimize(values, objective, seed)
        } else {
            self.heuristic.minimize(values, objective, seed)
        }
    }
}

pub struct SearchRegistry {
    entries: Vec<Box<dyn PermutationSearch>>,
}

impl Default for SearchRegistry {
    fn default() -> Self {
        let mut r = SearchRegistry { entries: Vec::new() };
        r.register(Box::new(Exhaustive));
        r.register(Box::new(Annealing::default()));
        r.register(Box::new(Auto { heuristic: Annealing::default() }));
        r
    }
}

impl SearchRegistry {
    /// Adds a strategy, replacing any existing one with the same name.
    pub fn register(&mut self, s: Box<dyn PermutationSearch>) {
        self.entries.retain(|e| e.name() != s.name());
        self.entries.push(s);
    }

    pub fn get(&self, name: &str) -> Result<&dyn PermutationSearch> {
        self.entries
            .iter()
            .find(|e| e.name() == name)
            .map(|b| b.as_ref())
            .ok_or_else(|| Error::UnknownStrategy(name.to_string()))
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.entries.iter().map(|e| e.name()).collect()
    }
}
