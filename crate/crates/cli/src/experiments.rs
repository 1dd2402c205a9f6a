//! The experiment registry. Each experiment owns a params type, a JSON schema
//! and a function from params to a table.

use std::f64::consts::PI;
use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use perceptronium::classical::{classical_phi, hamming84, ising_phi_sweep, parity_code, random_code, BitStringCode};
use perceptronium::dynamics::{
    apodized_state, equispaced_system, factorization_optimize, sliding_simulation, snip_instance, snip_times,
    toeplitz_optimal_state, Potential, SlidingConfig,
};
use perceptronium::emergent::dispersion_table;
use perceptronium::hilbert::{hs_projectors, FactorShape, HermitianOperator, MatrixJson, StateVector, C64};
use perceptronium::quantum::max_phi_search;
use perceptronium::random::{gue, haar_unitary, rng};
use perceptronium::search::SearchRegistry;
use perceptronium::separability::{integration_energy, optimal_frame, stationarity_residual};

use crate::error::{config_err, CliResult, InModule};
use crate::table::{col, int_list, num, num_list, Table, Tol};

pub struct Context<'a> {
    pub seed: Option<u64>,
    pub base_dir: &'a Path,
}

impl Context<'_> {
    fn resolve(&self, p: &str) -> std::path::PathBuf {
        let p = Path::new(p);
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }
}

pub struct Outcome {
    /// Params with every default filled in.
    pub params: Value,
    pub table: Table,
}

pub trait Experiment: Send + Sync {
    fn name(&self) -> &'static str;
    fn summary(&self) -> &'static str;
    /// Library module whose errors this experiment can surface.
    fn module(&self) -> &'static str;
    fn schema(&self) -> &'static str;
    /// Whether a run with these params draws random numbers.
    fn randomized(&self, params: &Map<String, Value>) -> CliResult<bool>;
    /// The params with every default filled in.
    fn normalize(&self, params: &Map<String, Value>) -> CliResult<Value>;
    fn run(&self, params: &Map<String, Value>, ctx: &Context) -> CliResult<Outcome>;
}

/// Shared plumbing for experiments with a typed params struct.
trait Typed: Send + Sync {
    type Params: Serialize + DeserializeOwned;
    const NAME: &'static str;
    const SUMMARY: &'static str;
    const MODULE: &'static str;
    const SCHEMA: &'static str;

    fn randomized(p: &Self::Params) -> bool;
    fn compute(&self, p: &Self::Params, seed: u64, ctx: &Context) -> CliResult<Table>;
}

fn parse<P: DeserializeOwned>(params: &Map<String, Value>) -> CliResult<P> {
    serde_json::from_value(Value::Object(params.clone())).map_err(|e| config_err(format!("params: {e}")))
}

impl<T: Typed> Experiment for T {
    fn name(&self) -> &'static str {
        T::NAME
    }

    fn summary(&self) -> &'static str {
        T::SUMMARY
    }

    fn module(&self) -> &'static str {
        T::MODULE
    }

    fn schema(&self) -> &'static str {
        T::SCHEMA
    }

    fn randomized(&self, params: &Map<String, Value>) -> CliResult<bool> {
        Ok(T::randomized(&parse::<T::Params>(params)?))
    }

    fn normalize(&self, params: &Map<String, Value>) -> CliResult<Value> {
        Ok(serde_json::to_value(parse::<T::Params>(params)?).expect("params serialize"))
    }

    fn run(&self, params: &Map<String, Value>, ctx: &Context) -> CliResult<Outcome> {
        let p: T::Params = parse(params)?;
        let seed = match (T::randomized(&p), ctx.seed) {
            (true, None) => return Err(config_err(format!("{} draws random numbers and needs a seed", T::NAME))),
            (_, s) => s.unwrap_or(0),
        };
        let table = self.compute(&p, seed, ctx)?;
        Ok(Outcome { params: serde_json::to_value(&p).expect("params serialize"), table })
    }
}

pub struct Registry {
    entries: Vec<Box<dyn Experiment>>,
}

impl Default for Registry {
    fn default() -> Self {
        let mut r = Registry { entries: Vec::new() };
        r.register(Box::new(IsingPhi));
        r.register(Box::new(CodePhi));
        r.register(Box::new(RandomCodeSweep));
        r.register(Box::new(CodewordCountSweep));
        r.register(Box::new(QuantumPhiMax));
        r.register(Box::new(IntegrationEnergyDemo));
        r.register(Box::new(SlidingAutonomy));
        r.register(Box::new(ApodizationCompare));
        r.register(Box::new(SnipOptimize));
        r.register(Box::new(Dispersion));
        r
    }
}

impl Registry {
    /// Adds an experiment, replacing any existing one with the same name.
    pub fn register(&mut self, e: Box<dyn Experiment>) {
        self.entries.retain(|x| x.name() != e.name());
        self.entries.push(e);
    }

    pub fn get(&self, name: &str) -> CliResult<&dyn Experiment> {
        self.entries.iter().find(|e| e.name() == name).map(|b| b.as_ref()).ok_or_else(|| {
            config_err(format!("unknown experiment '{name}' (known: {})", self.names().join(", ")))
        })
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.entries.iter().map(|e| e.name()).collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = &dyn Experiment> {
        self.entries.iter().map(|b| b.as_ref())
    }
}

const PHI_TOL: Tol = Tol::Abs(1e-9);

fn phi_table() -> Table {
    Table::new(vec![col("param", Tol::Exact), col("phi_bits", PHI_TOL), col("cut", Tol::Exact)])
}

fn cut_cell(r: &perceptronium::classical::ClassicalPhi) -> String {
    if r.certified {
        r.cut.label()
    } else {
        format!("heuristic: {}", r.cut.label())
    }
}

fn code_curve(code: &BitStringCode, module: &'static str) -> CliResult<Table> {
    let state = code.uniform_state();
    let mut t = phi_table();
    for k in 1..=code.n() / 2 {
        let r = classical_phi(&state, k).in_module(module)?;
        t.push(vec![k.to_string(), num(r.phi), cut_cell(&r)]);
    }
    Ok(t)
}

const CLASSICAL: &str = "classical-integration";

fn default_side() -> usize {
    3
}
fn one() -> f64 {
    1.0
}
fn default_temps() -> usize {
    20
}
fn default_t_min() -> f64 {
    1e-3
}
fn default_t_max() -> f64 {
    1e6
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IsingParams {
    #[serde(default = "default_side")]
    side: usize,
    #[serde(default = "one")]
    coupling: f64,
    #[serde(default = "default_temps")]
    temps: usize,
    #[serde(default = "default_t_min")]
    t_min: f64,
    #[serde(default = "default_t_max")]
    t_max: f64,
}

pub struct IsingPhi;

impl Typed for IsingPhi {
    type Params = IsingParams;
    const NAME: &'static str = "ising_phi";
    const SUMMARY: &'static str = "Phi of the exact Ising Gibbs state across a log-spaced temperature grid";
    const MODULE: &'static str = CLASSICAL;
    const SCHEMA: &'static str = include_str!("../schemas/ising_phi.json");

    fn randomized(_: &IsingParams) -> bool {
        false
    }

    fn compute(&self, p: &IsingParams, _: u64, _: &Context) -> CliResult<Table> {
        if p.t_max <= p.t_min {
            return Err(config_err("t_max must exceed t_min"));
        }
        let (a, b) = (p.t_min.log10(), p.t_max.log10());
        let temps: Vec<f64> =
            (0..p.temps).map(|i| 10f64.powf(a + (b - a) * i as f64 / (p.temps - 1) as f64)).collect();
        let sweep = ising_phi_sweep(p.side, &temps, p.coupling).in_module(CLASSICAL)?;
        let mut t = Table::new(vec![col("param", Tol::Rel(1e-12)), col("phi_bits", PHI_TOL), col("cut", Tol::Exact)]);
        for pt in sweep {
            t.push(vec![num(pt.temperature), num(pt.phi), pt.cut.label()]);
        }
        Ok(t)
    }
}

fn default_code() -> String {
    "hamming84".into()
}
fn eight() -> usize {
    8
}
fn sixteen() -> usize {
    16
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CodeParams {
    #[serde(default = "default_code")]
    code: String,
    #[serde(default = "eight")]
    n: usize,
    #[serde(default = "sixteen")]
    m: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    file: Option<String>,
}

pub struct CodePhi;

impl Typed for CodePhi {
    type Params = CodeParams;
    const NAME: &'static str = "code_phi";
    const SUMMARY: &'static str = "Phi versus cut size for a bit-string code weighted uniformly";
    const MODULE: &'static str = CLASSICAL;
    const SCHEMA: &'static str = include_str!("../schemas/code_phi.json");

    fn randomized(p: &CodeParams) -> bool {
        p.code == "random"
    }

    fn compute(&self, p: &CodeParams, seed: u64, ctx: &Context) -> CliResult<Table> {
        let code = match p.code.as_str() {
            "hamming84" => hamming84(),
            "parity" => parity_code(p.n).in_module(CLASSICAL)?,
            "random" => {
                check_code_size(p.n, p.m)?;
                random_code(p.n, p.m, seed).in_module(CLASSICAL)?
            }
            "file" => {
                let f = p.file.as_deref().ok_or_else(|| config_err("code 'file' needs a file param"))?;
                let path = ctx.resolve(f);
                let text = fs::read_to_string(&path)
                    .map_err(|e| config_err(format!("cannot read code file {}: {e}", path.display())))?;
                BitStringCode::parse(&text).map_err(|e| config_err(format!("{}: {e}", path.display())))?
            }
            other => return Err(config_err(format!("unknown code '{other}'"))),
        };
        if code.n() < 2 {
            return Err(config_err("code needs at least 2 bits"));
        }
        code_curve(&code, CLASSICAL)
    }
}

fn check_code_size(n: usize, m: usize) -> CliResult<()> {
    if m == 0 || (n < 63 && m as u64 > 1u64 << n) {
        return Err(config_err(format!("cannot draw {m} distinct words of {n} bits")));
    }
    Ok(())
}

fn ten() -> usize {
    10
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomCodeParams {
    #[serde(default = "ten")]
    n: usize,
    /// Defaults to `2^(n/2)` rounded to the nearest integer.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    m: Option<usize>,
}

pub struct RandomCodeSweep;

impl Typed for RandomCodeSweep {
    type Params = RandomCodeParams;
    const NAME: &'static str = "random_code_sweep";
    const SUMMARY: &'static str = "Phi versus cut size for a random code of about sqrt(2^n) words";
    const MODULE: &'static str = CLASSICAL;
    const SCHEMA: &'static str = include_str!("../schemas/random_code_sweep.json");

    fn randomized(_: &RandomCodeParams) -> bool {
        true
    }

    fn compute(&self, p: &RandomCodeParams, seed: u64, _: &Context) -> CliResult<Table> {
        let m = p.m.unwrap_or_else(|| 2f64.powf(p.n as f64 / 2.0).round() as usize);
        check_code_size(p.n, m)?;
        code_curve(&random_code(p.n, m, seed).in_module(CLASSICAL)?, CLASSICAL)
    }
}

fn fourteen() -> usize {
    14
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CodewordCountParams {
    #[serde(default = "fourteen")]
    n: usize,
    /// Code sizes `m = 2^e`; defaults to `e = 1..=n`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    exponents: Option<Vec<u32>>,
}

pub struct CodewordCountSweep;

impl Typed for CodewordCountSweep {
    type Params = CodewordCountParams;
    const NAME: &'static str = "codeword_count_sweep";
    const SUMMARY: &'static str = "Equal-bipartition Phi of random n-bit codes as the number of words grows";
    const MODULE: &'static str = CLASSICAL;
    const SCHEMA: &'static str = include_str!("../schemas/codeword_count_sweep.json");

    fn randomized(_: &CodewordCountParams) -> bool {
        true
    }

    fn compute(&self, p: &CodewordCountParams, seed: u64, _: &Context) -> CliResult<Table> {
        let exps: Vec<u32> = p.exponents.clone().unwrap_or_else(|| (1..=p.n as u32).collect());
        if let Some(e) = exps.iter().find(|&&e| e as usize > p.n) {
            return Err(config_err(format!("exponent {e} exceeds n = {}", p.n)));
        }
        let mut exps = exps;
        exps.sort_unstable();
        exps.dedup();
        let mut t = phi_table();
        for e in exps {
            let m = 1usize << e;
            let code = random_code(p.n, m, seed).in_module(CLASSICAL)?;
            let r = classical_phi(&code.uniform_state(), p.n / 2).in_module(CLASSICAL)?;
            t.push(vec![m.to_string(), num(r.phi), cut_cell(&r)]);
        }
        Ok(t)
    }
}

fn four() -> usize {
    4
}
fn ten_thousand() -> usize {
    10_000
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuantumMaxParams {
    #[serde(default = "four")]
    n: usize,
    #[serde(default = "ten_thousand")]
    trials: usize,
}

/// `(l, m)` with `l` the largest divisor of `n` not above `√n`.
fn balanced_shape(n: usize) -> CliResult<FactorShape> {
    let l = (1..=n).take_while(|l| l * l <= n).filter(|l| n % l == 0).last().unwrap_or(1);
    if l < 2 {
        return Err(config_err(format!("dimension {n} has no nontrivial factorization")));
    }
    FactorShape::new(l, n / l).map_err(|e| config_err(e.to_string()))
}

pub struct QuantumPhiMax;

impl Typed for QuantumPhiMax {
    type Params = QuantumMaxParams;
    const NAME: &'static str = "quantum_phi_max";
    const SUMMARY: &'static str = "Most integrated spectrum among projection and Dirichlet-random spectra";
    const MODULE: &'static str = "quantum-integration";
    const SCHEMA: &'static str = include_str!("../schemas/quantum_phi_max.json");

    fn randomized(p: &QuantumMaxParams) -> bool {
        p.trials > 0
    }

    fn compute(&self, p: &QuantumMaxParams, seed: u64, _: &Context) -> CliResult<Table> {
        let shape = balanced_shape(p.n)?;
        let r = max_phi_search(shape, p.trials, seed).in_module(Self::MODULE)?;
        let mut t = Table::new(vec![
            col("n", Tol::Exact),
            col("l", Tol::Exact),
            col("m", Tol::Exact),
            col("best_phi", PHI_TOL),
            col("best_spectrum", Tol::Abs(1e-9)),
            col("projection", Tol::Exact),
            col("best_random_phi", PHI_TOL),
        ]);
        t.push(vec![
            p.n.to_string(),
            shape.l.to_string(),
            shape.m.to_string(),
            num(r.best_phi),
            num_list(&r.best_spectrum),
            r.best_is_projection.to_string(),
            num(r.best_random_phi),
        ]);
        Ok(t)
    }
}

fn five() -> usize {
    5
}
fn two() -> usize {
    2
}
fn two_hundred() -> usize {
    200
}
fn default_search() -> String {
    "auto".into()
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnergyDemoParams {
    #[serde(default = "five")]
    count: usize,
    #[serde(default = "two")]
    l: usize,
    #[serde(default = "two")]
    m: usize,
    /// Haar-random bases per instance to compare against.
    #[serde(default = "two_hundred")]
    samples: usize,
    #[serde(default = "default_search")]
    search: String,
    /// A Hamiltonian in matrix JSON form, analysed instead of random ones.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    hamiltonian: Option<String>,
}

pub struct IntegrationEnergyDemo;

impl Typed for IntegrationEnergyDemo {
    type Params = EnergyDemoParams;
    const NAME: &'static str = "integration_energy_demo";
    const SUMMARY: &'static str = "Integration energy of Hamiltonians versus random bases";
    const MODULE: &'static str = "h-separability";
    const SCHEMA: &'static str = include_str!("../schemas/integration_energy_demo.json");

    fn randomized(p: &EnergyDemoParams) -> bool {
        p.hamiltonian.is_none() || p.samples > 0
    }

    fn compute(&self, p: &EnergyDemoParams, seed: u64, ctx: &Context) -> CliResult<Table> {
        let shape = FactorShape::new(p.l, p.m).map_err(|e| config_err(e.to_string()))?;
        let strategies = SearchRegistry::default();
        let search = strategies.get(&p.search).map_err(|e| config_err(e.to_string()))?;
        let mut g = rng(seed);
        let hs: Vec<HermitianOperator> = match &p.hamiltonian {
            Some(f) => {
                let path = ctx.resolve(f);
                let text = fs::read_to_string(&path)
                    .map_err(|e| config_err(format!("cannot read {}: {e}", path.display())))?;
                let j: MatrixJson = serde_json::from_str(&text)
                    .map_err(|e| config_err(format!("{}: {e}", path.display())))?;
                let h = HermitianOperator::try_from(j).in_module(Self::MODULE)?;
                if h.dim() != shape.dim() {
                    return Err(config_err(format!("Hamiltonian has dim {} but l*m = {}", h.dim(), shape.dim())));
                }
                vec![h]
            }
            None => (0..p.count).map(|_| gue(shape.dim(), &mut g)).collect(),
        };
        let mut t = Table::new(vec![
            col("instance", Tol::Exact),
            col("h0", Tol::Abs(1e-9)),
            col("h1", Tol::Abs(1e-9)),
            col("h2", Tol::Abs(1e-9)),
            col("h3", Tol::Abs(1e-9)),
            col("integration_energy", Tol::Abs(1e-9)),
            col("random_min_h3", Tol::Abs(1e-9)),
            col("stationarity", Tol::Abs(1e-8)),
            col("permutation", Tol::Exact),
        ]);
        for (i, h) in hs.iter().enumerate() {
            let report = integration_energy(h, shape, search, seed).in_module(Self::MODULE)?;
            let frame = optimal_frame(&h.eigen(), &report).in_module(Self::MODULE)?;
            let framed = HermitianOperator::new(frame.adjoint().conjugate(h.matrix())).in_module(Self::MODULE)?;
            let residual = stationarity_residual(&framed, shape).in_module(Self::MODULE)?;
            let mut random_min = f64::INFINITY;
            for _ in 0..p.samples {
                let u = haar_unitary(shape.dim(), &mut g);
                let rotated = HermitianOperator::new(u.conjugate(h.matrix())).in_module(Self::MODULE)?;
                random_min = random_min.min(hs_projectors(&rotated, shape).in_module(Self::MODULE)?.h3.norm());
            }
            let [h0, h1, h2, h3] = report.norms;
            t.push(vec![
                i.to_string(),
                num(h0),
                num(h1),
                num(h2),
                num(h3),
                num(report.integration_energy),
                if p.samples > 0 { num(random_min) } else { String::new() },
                num(residual),
                int_list(&report.permutation),
            ]);
        }
        Ok(t)
    }
}

fn default_bs() -> Vec<u32> {
    vec![4, 5, 6, 7, 8]
}
fn default_alphas() -> Vec<u32> {
    vec![0, 1]
}
fn sinusoidal() -> Potential {
    Potential::Sinusoidal
}
fn sixty_five() -> usize {
    65
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SlidingParams {
    #[serde(default = "default_bs")]
    b: Vec<u32>,
    #[serde(default = "default_alphas")]
    alpha: Vec<u32>,
    #[serde(default = "sinusoidal")]
    potential: Potential,
    #[serde(default)]
    omega2: f64,
    #[serde(default = "one")]
    coupling: f64,
    #[serde(default = "sixty_five")]
    samples: usize,
}

pub struct SlidingAutonomy;

impl Typed for SlidingAutonomy {
    type Params = SlidingParams;
    const NAME: &'static str = "sliding_autonomy";
    const SUMMARY: &'static str = "Linear entropy after one orbit and autonomy of a sliding clock subsystem";
    const MODULE: &'static str = "dynamics-autonomy";
    const SCHEMA: &'static str = include_str!("../schemas/sliding_autonomy.json");

    fn randomized(_: &SlidingParams) -> bool {
        false
    }

    fn compute(&self, p: &SlidingParams, seed: u64, _: &Context) -> CliResult<Table> {
        let mut grid: Vec<(u32, u32)> = p.b.iter().flat_map(|&b| p.alpha.iter().map(move |&a| (b, a))).collect();
        grid.sort_unstable();
        grid.dedup();
        let reports: Vec<_> = grid
            .par_iter()
            .map(|&(b, alpha)| {
                sliding_simulation(&SlidingConfig {
                    b,
                    potential: p.potential,
                    alpha,
                    omega2: p.omega2,
                    coupling: p.coupling,
                    samples: p.samples,
                })
            })
            .collect::<perceptronium::Result<_>>()
            .in_module(Self::MODULE)?;
        let mut t = Table::new(vec![
            col("b", Tol::Exact),
            col("alpha", Tol::Exact),
            col("potential", Tol::Exact),
            col("slin_T", Tol::Rel(1e-6)),
            col("delta_h", Tol::Rel(1e-9)),
            col("tau_dyn", Tol::Rel(1e-9)),
            col("tau_ind", Tol::Rel(1e-6)),
            col("autonomy", Tol::Rel(1e-6)),
            col("seed", Tol::Exact),
        ]);
        for r in reports {
            t.push(vec![
                r.b.to_string(),
                r.alpha.to_string(),
                r.potential.name().to_string(),
                num(r.slin_t),
                num(r.delta_h),
                num(r.tau_dyn),
                num(r.tau_ind),
                num(r.autonomy),
                seed.to_string(),
            ]);
        }
        Ok(t)
    }
}

fn twenty() -> usize {
    20
}
fn default_apodizations() -> Vec<u32> {
    vec![0, 1, 2, 3, 4]
}
fn hundred_one() -> usize {
    101
}
fn yes() -> bool {
    true
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ApodizationParams {
    #[serde(default = "twenty")]
    n: usize,
    #[serde(default = "default_apodizations")]
    alpha: Vec<u32>,
    #[serde(default = "hundred_one")]
    points: usize,
    /// Include the minimizer of the `1 − cos φ` penalty.
    #[serde(default = "yes")]
    optimal: bool,
}

pub struct ApodizationCompare;

impl Typed for ApodizationCompare {
    type Params = ApodizationParams;
    const NAME: &'static str = "apodization_compare";
    const SUMMARY: &'static str = "Overlap of a wave packet with its evolved self for several apodizations";
    const MODULE: &'static str = "dynamics-autonomy";
    const SCHEMA: &'static str = include_str!("../schemas/apodization_compare.json");

    fn randomized(_: &ApodizationParams) -> bool {
        false
    }

    fn compute(&self, p: &ApodizationParams, _: u64, _: &Context) -> CliResult<Table> {
        let sys = equispaced_system(p.n, 1.0).in_module(Self::MODULE)?;
        let mut states: Vec<(String, StateVector)> = Vec::new();
        for &a in &p.alpha {
            states.push((format!("alpha{a}"), apodized_state(a, p.n).in_module(Self::MODULE)?));
        }
        if p.optimal {
            let opt = toeplitz_optimal_state(p.n, &[1.0, -0.5]).in_module(Self::MODULE)?;
            states.push(("cosine_penalty".into(), StateVector::from_iterator(p.n, opt.coefficients.iter().map(|&x| C64::new(x, 0.0)))));
        }
        let x0 = sys.position_state(0);
        let energies = sys.energies();
        let mut t = Table::new(vec![
            col("state", Tol::Exact),
            col("phi", Tol::Abs(1e-12)),
            col("g_re", Tol::Abs(1e-9)),
            col("g_abs", Tol::Abs(1e-9)),
        ]);
        for (label, psi) in &states {
            for i in 0..p.points {
                let phi = -PI + 2.0 * PI * i as f64 / (p.points - 1) as f64;
                let g: C64 = (0..p.n).map(|k| x0[k].conj() * C64::from_polar(1.0, energies[k] * phi) * psi[k]).sum();
                t.push(vec![label.clone(), num(phi), num(g.re), num(g.norm())]);
            }
        }
        Ok(t)
    }
}

fn nine() -> usize {
    9
}
fn four_hundred() -> usize {
    400
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SnipParams {
    /// Number of equispaced sample times on `[0, 1]`.
    #[serde(default = "nine")]
    times: usize,
    #[serde(default = "four_hundred")]
    budget: usize,
}

pub struct SnipOptimize;

impl Typed for SnipOptimize {
    type Params = SnipParams;
    const NAME: &'static str = "snip_optimize";
    const SUMMARY: &'static str = "Two-qubit factorization that keeps a random pure state least entangled";
    const MODULE: &'static str = "dynamics-autonomy";
    const SCHEMA: &'static str = include_str!("../schemas/snip_optimize.json");

    fn randomized(_: &SnipParams) -> bool {
        true
    }

    fn compute(&self, p: &SnipParams, seed: u64, _: &Context) -> CliResult<Table> {
        let (h, rho) = snip_instance(seed);
        let shape = FactorShape::new(2, 2).expect("2x2 shape");
        let out = factorization_optimize(&rho, &h, shape, &snip_times(p.times), p.budget, seed)
            .in_module(Self::MODULE)?;
        let mut t = Table::new(vec![
            col("restart", Tol::Exact),
            col("converged", Tol::Exact),
            col("steps", Tol::Exact),
            col("initial_objective", Tol::Abs(1e-9)),
            col("objective", Tol::Abs(1e-9)),
            col("initial_entropy", Tol::Abs(1e-9)),
            col("mean_entropy", Tol::Abs(1e-9)),
        ]);
        t.push(vec![
            out.restart.to_string(),
            out.converged.to_string(),
            out.trace.len().to_string(),
            num(out.initial_objective),
            num(out.objective),
            num(out.initial_entropy),
            num(out.mean_entropy),
        ]);
        Ok(t)
    }
}

fn side_four() -> usize {
    4
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DispersionParams {
    #[serde(default = "side_four")]
    side: usize,
    #[serde(default = "one")]
    mu: f64,
    #[serde(default = "one")]
    gamma: f64,
}

pub struct Dispersion;

impl Typed for Dispersion {
    type Params = DispersionParams;
    const NAME: &'static str = "dispersion";
    const SUMMARY: &'static str = "Squared normal-mode frequencies of a periodic cubic lattice on its wave-vector grid";
    const MODULE: &'static str = "emergent-structure";
    const SCHEMA: &'static str = include_str!("../schemas/dispersion.json");

    fn randomized(_: &DispersionParams) -> bool {
        false
    }

    fn compute(&self, p: &DispersionParams, _: u64, _: &Context) -> CliResult<Table> {
        let rows = dispersion_table(p.side, p.mu, p.gamma).in_module(Self::MODULE)?;
        let mut t = Table::new(vec![
            col("kx", Tol::Abs(1e-12)),
            col("ky", Tol::Abs(1e-12)),
            col("kz", Tol::Abs(1e-12)),
            col("omega2", Tol::Abs(1e-12)),
        ]);
        for ([kx, ky, kz], w2) in rows {
            t.push(vec![num(kx), num(ky), num(kz), num(w2)]);
        }
        Ok(t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry_has_every_experiment_once() {
        let r = Registry::default();
        let names = r.names();
        assert_eq!(names.len(), 10);
        let mut sorted = names.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(sorted.len(), 10);
        assert!(r.get("nope").is_err());
    }

    #[test]
    fn schemas_are_valid_and_accept_defaults() {
        for e in Registry::default().iter() {
            crate::config::validate(e.schema(), &Map::new()).unwrap_or_else(|err| panic!("{}: {err}", e.name()));
            let defaults: Value = parse::<Value>(&Map::new()).unwrap();
            assert!(defaults.is_object());
        }
    }

    #[test]
    fn balanced_shapes() {
        assert_eq!(balanced_shape(4).unwrap(), FactorShape::new(2, 2).unwrap());
        assert_eq!(balanced_shape(8).unwrap(), FactorShape::new(2, 4).unwrap());
        assert!(balanced_shape(7).is_err());
    }

    #[test]
    fn randomized_flags() {
        let r = Registry::default();
        let empty = Map::new();
        assert!(!r.get("dispersion").unwrap().randomized(&empty).unwrap());
        assert!(!r.get("code_phi").unwrap().randomized(&empty).unwrap());
        let mut random = Map::new();
        random.insert("code".into(), Value::from("random"));
        assert!(r.get("code_phi").unwrap().randomized(&random).unwrap());
        assert!(r.get("snip_optimize").unwrap().randomized(&empty).unwrap());
    }
}
