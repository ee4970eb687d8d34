//! End-to-end checks of the private-capacity and environment-assisted
//! non-convexity constructions.

use std::collections::BTreeMap;
use std::time::Instant;

use serde::Serialize;

use crate::channels::helper::{controlled_weyl_isometry, helper_apply_ensemble, swap_isometry, HelperIsometry};
use crate::channels::{
    compose, dephasing, erasure, flagged_mixture, rocket_conditional, rocket_sampled, rocket_unitaries, tensor,
    FlaggedBranch, KrausChannel,
};
use crate::error::{QcapError, Result};
use crate::infomeasures::{coherent_information_with, holevo_chi, CQEnsemble, Evaluation};
use crate::par::{self, Exec};
use crate::qmat::{max_entangled, weyl, ComplexMatrix, DensityMatrix, PureState, Tolerance, C64};

/// Registers of the two-use private-capacity input fed to the channels:
/// `(C₁, D₁)` for the first use and `(C₂, D₂)` for the second.
pub const PRIVATE_CHANNEL_INPUTS: [usize; 4] = [2, 3, 4, 5];

#[derive(Debug, Clone, PartialEq)]
pub struct PrivateParams {
    pub d: usize,
    pub q: f64,
    pub p: f64,
    pub n_samples: usize,
    pub seed: u64,
}

impl PrivateParams {
    pub fn validate(&self) -> Result<()> {
        if self.d < 2 {
            return Err(QcapError::InvalidParameter(format!(
                "d must be at least 2, got {}",
                self.d
            )));
        }
        check_probability(self.q)?;
        check_probability(self.p)?;
        if self.n_samples == 0 {
            return Err(QcapError::InvalidParameter("n_samples must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnvParams {
    pub d: usize,
    pub p: f64,
}

impl EnvParams {
    pub fn validate(&self) -> Result<()> {
        if self.d < 2 {
            return Err(QcapError::InvalidParameter(format!(
                "d must be at least 2, got {}",
                self.d
            )));
        }
        check_probability(self.p)
    }
}

fn check_probability(p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(QcapError::InvalidProbability(p))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Param {
    Int(u64),
    Real(f64),
    Text(String),
}

/// Outcome of one experiment. Equality checks and inequality checks both
/// land in `abs_error`; an inequality `a ≥ b` is recorded as `max(0, b - a)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub experiment: String,
    pub params: BTreeMap<String, Param>,
    pub analytic: BTreeMap<String, f64>,
    pub numeric: BTreeMap<String, f64>,
    pub abs_error: BTreeMap<String, f64>,
    pub pass: bool,
    pub runtime_ms: f64,
}

impl ExperimentReport {
    fn new(name: &str) -> Self {
        Self {
            experiment: name.to_string(),
            params: BTreeMap::new(),
            analytic: BTreeMap::new(),
            numeric: BTreeMap::new(),
            abs_error: BTreeMap::new(),
            pass: false,
            runtime_ms: 0.0,
        }
    }

    fn param(&mut self, key: &str, value: Param) {
        self.params.insert(key.into(), value);
    }

    fn check_eq(&mut self, key: &str, analytic: f64, numeric: f64) {
        self.analytic.insert(key.into(), analytic);
        self.numeric.insert(key.into(), numeric);
        self.abs_error.insert(key.into(), (numeric - analytic).abs());
    }

    fn check_ge(&mut self, key: &str, value: f64, bound: f64) {
        self.abs_error.insert(key.into(), (bound - value).max(0.0));
    }

    /// Recomputes `pass` from the recorded errors.
    pub fn finish(&mut self, tol: Tolerance) {
        self.pass = self.abs_error.values().all(|e| e.is_finite() && *e <= tol.atol);
    }

    pub fn max_abs_error(&self) -> f64 {
        self.abs_error.values().copied().fold(0.0, f64::max)
    }
}

fn elapsed_ms(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1e3
}

/// `Φ^{A¹D₁} ⊗ Φ^{C₁C₂} ⊗ Φ^{A²D₂}` on registers `(A¹, A², C₁, D₁, C₂, D₂)`.
pub fn build_private_input(d: usize) -> Result<PureState> {
    if d < 2 {
        return Err(QcapError::InvalidParameter(format!("d must be at least 2, got {d}")));
    }
    let phi = max_entangled(d)?;
    // product order: (A¹, D₁, C₁, C₂, A², D₂)
    let product = phi.tensor(&phi).tensor(&phi);
    product.permute_systems(&[0, 4, 2, 1, 3, 5])
}

/// Erasure channel on `d²` levels with its input split as `(C, D)`.
pub fn erasure_branch(d: usize, p: f64) -> Result<KrausChannel> {
    erasure(d * d, p)?.with_in_dims(vec![d, d])
}

/// The flagged mixture `q·E_{d²,p} ⊕ (1-q)·R_d` with sampled rocket unitaries.
pub fn private_channel(params: &PrivateParams) -> Result<KrausChannel> {
    params.validate()?;
    let PrivateParams {
        d,
        q,
        p,
        n_samples,
        seed,
    } = *params;
    flagged_mixture(vec![
        FlaggedBranch::new(q, erasure_branch(d, p)?),
        FlaggedBranch::new(1.0 - q, rocket_sampled(d, n_samples, seed)?),
    ])
}

/// Achievable rate `q((1-q)(2-3p) + q(1-2p)) log d`, per channel use.
pub fn achievable_rate(d: usize, q: f64, p: f64) -> f64 {
    q * ((1.0 - q) * (2.0 - 3.0 * p) + q * (1.0 - 2.0 * p)) * (d as f64).log2()
}

/// Convex-combination upper bound `q max{0, 2(1-2p) log d} + 2(1-q)`.
pub fn converse_bound(d: usize, q: f64, p: f64) -> f64 {
    q * (2.0 * (1.0 - 2.0 * p) * (d as f64).log2()).max(0.0) + 2.0 * (1.0 - q)
}

/// Mean and population standard deviation.
fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Per-branch coherent informations of the two-use construction.
#[derive(Debug, Clone, PartialEq)]
pub struct BranchValues {
    pub ee: f64,
    pub er: Vec<f64>,
    pub re: Vec<f64>,
    /// Indexed `k * n + l` for rocket samples `(k, l)`.
    pub rr: Vec<f64>,
    pub rr_dephased: Vec<f64>,
}

/// Evaluates every two-use branch on the private input.
pub fn private_branches(params: &PrivateParams, exec: Exec) -> Result<BranchValues> {
    params.validate()?;
    let PrivateParams {
        d, p, n_samples, seed, ..
    } = *params;
    let input = build_private_input(d)?;
    let e = erasure_branch(d, p)?;
    let rockets = rocket_unitaries(d, n_samples, seed)
        .iter()
        .map(|(u, v)| rocket_conditional(d, u, v))
        .collect::<Result<Vec<_>>>()?;
    let dephased = rockets
        .iter()
        .map(|r| compose(&dephasing(d), r))
        .collect::<Result<Vec<_>>>()?;
    let q1 = |ch: &KrausChannel| -> Result<f64> {
        coherent_information_with(
            ch,
            &input,
            &PRIVATE_CHANNEL_INPUTS,
            Evaluation::Blockwise,
            Exec::Sequential,
        )
        .map(|v| v.value)
    };

    let ee = q1(&tensor(&e, &e))?;
    let er = par::map_slice(exec, &rockets, |r| q1(&tensor(&e, r)))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let re = par::map_slice(exec, &rockets, |r| q1(&tensor(r, &e)))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let n = rockets.len();
    let rr = par::map_range(exec, n * n, |i| q1(&tensor(&rockets[i / n], &rockets[i % n])))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let rr_dephased = par::map_range(exec, n * n, |i| q1(&tensor(&dephased[i / n], &dephased[i % n])))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    Ok(BranchValues {
        ee,
        er,
        re,
        rr,
        rr_dephased,
    })
}

/// Two-use coherent information of the flagged mixture, blockwise (and
/// densely when `dense` is set).
pub fn private_composite(params: &PrivateParams, dense: bool, exec: Exec) -> Result<(f64, Option<f64>)> {
    let n = private_channel(params)?;
    let two = tensor(&n, &n);
    let input = build_private_input(params.d)?;
    let bw = coherent_information_with(&two, &input, &PRIVATE_CHANNEL_INPUTS, Evaluation::Blockwise, exec)?.value;
    let dn = if dense {
        Some(coherent_information_with(&two, &input, &PRIVATE_CHANNEL_INPUTS, Evaluation::Dense, exec)?.value)
    } else {
        None
    };
    Ok((bw, dn))
}

/// Private-capacity construction: branch values, the two-use composite, the
/// achievable rate and the converse bound.
pub fn private_experiment(params: &PrivateParams) -> Result<ExperimentReport> {
    private_experiment_with(params, Tolerance::default(), Exec::default())
}

pub fn private_experiment_with(params: &PrivateParams, tol: Tolerance, exec: Exec) -> Result<ExperimentReport> {
    let start = Instant::now();
    params.validate()?;
    let PrivateParams {
        d,
        q,
        p,
        n_samples,
        seed,
    } = *params;
    let log_d = (d as f64).log2();
    let mut r = ExperimentReport::new("verify-private");
    r.param("d", Param::Int(d as u64));
    r.param("q", Param::Real(q));
    r.param("p", Param::Real(p));
    r.param("samples", Param::Int(n_samples as u64));
    r.param("seed", Param::Int(seed));

    let b = private_branches(params, exec)?;
    let (er_mean, er_std) = mean_std(&b.er);
    let (re_mean, re_std) = mean_std(&b.re);
    let (rr_mean, _) = mean_std(&b.rr);
    let rr_min = b.rr.iter().copied().fold(f64::INFINITY, f64::min);
    let rr_deph = b.rr_dephased.iter().fold(0.0f64, |m, x| m.max(x.abs()));

    r.check_eq("ee", (1.0 - 2.0 * p) * 2.0 * log_d, b.ee);
    r.check_eq("er", (2.0 - 3.0 * p) * log_d, er_mean);
    r.check_eq("re", (2.0 - 3.0 * p) * log_d, re_mean);
    r.abs_error.insert("er_re_symmetry".into(), (er_mean - re_mean).abs());
    r.numeric.insert("er_std".into(), er_std);
    r.numeric.insert("re_std".into(), re_std);
    r.abs_error.insert("er_std".into(), er_std);
    r.abs_error.insert("re_std".into(), re_std);
    r.analytic.insert("rr_lower".into(), 0.0);
    r.numeric.insert("rr_mean".into(), rr_mean);
    r.numeric.insert("rr_min".into(), rr_min);
    r.check_ge("rr_lower", rr_min, 0.0);
    r.check_eq("rr_dephased", 0.0, rr_deph);

    let (composite, dense) = private_composite(params, d == 2, exec)?;
    let achievable = achievable_rate(d, q, p);
    let converse = converse_bound(d, q, p);
    // With the rocket pair contributing exactly zero, Q(N⊗N) = 2 · achievable.
    let analytic_composite = 2.0 * achievable;
    r.analytic.insert("composite".into(), analytic_composite);
    r.numeric.insert("composite".into(), composite);
    r.numeric.insert("composite_half".into(), composite / 2.0);
    r.numeric.insert("rr_contribution".into(), (1.0 - q).powi(2) * rr_mean);
    r.abs_error.insert(
        "composite".into(),
        (composite - analytic_composite - (1.0 - q).powi(2) * rr_mean).abs(),
    );
    if let Some(dense) = dense {
        r.numeric.insert("composite_dense".into(), dense);
        r.abs_error.insert("composite_dense".into(), (dense - composite).abs());
    }

    r.analytic.insert("achievable".into(), achievable);
    r.analytic.insert("converse".into(), converse);
    r.numeric.insert("gap".into(), achievable - converse);
    let finite = achievable > converse;
    let asymptotic = region_delta(q, p, RegionMode::Asymptotic);
    r.numeric.insert("nonconvex".into(), f64::from(u8::from(finite)));
    r.numeric.insert("asymptotic_delta".into(), asymptotic);
    r.numeric.insert(
        "asymptotic_only".into(),
        f64::from(u8::from(!finite && asymptotic > 0.0)),
    );

    r.finish(tol);
    r.runtime_ms = elapsed_ms(start);
    Ok(r)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RegionMode {
    /// Both sides normalised by `log d` with `d → ∞`.
    Asymptotic,
    /// Normalised by `log d` at this dimension.
    Finite(usize),
}

/// Normalised achievable minus converse at `(q, p)`.
pub fn region_delta(q: f64, p: f64, mode: RegionMode) -> f64 {
    let achievable = q * ((1.0 - q) * (2.0 - 3.0 * p) + q * (1.0 - 2.0 * p));
    let converse = q * (2.0 * (1.0 - 2.0 * p)).max(0.0);
    match mode {
        RegionMode::Asymptotic => achievable - converse,
        RegionMode::Finite(d) => achievable - converse - 2.0 * (1.0 - q) / (d as f64).log2(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegionPoint {
    pub q: f64,
    pub p: f64,
    pub delta: f64,
}

/// `grid_n × grid_n` scan over `q, p ∈ [0, 1]`, row-major with `q` outer.
pub fn region_scan(grid_n: usize, mode: RegionMode, exec: Exec) -> Result<Vec<RegionPoint>> {
    if grid_n < 2 {
        return Err(QcapError::InvalidParameter(format!(
            "grid must be at least 2, got {grid_n}"
        )));
    }
    if let RegionMode::Finite(d) = mode {
        if d < 2 {
            return Err(QcapError::InvalidParameter(format!("d must be at least 2, got {d}")));
        }
    }
    let step = 1.0 / (grid_n - 1) as f64;
    Ok(par::map_range(exec, grid_n * grid_n, |k| {
        let q = (k / grid_n) as f64 * step;
        let p = (k % grid_n) as f64 * step;
        RegionPoint {
            q,
            p,
            delta: region_delta(q, p, mode),
        }
    }))
}

/// `(i, j)` input ensemble: `|ij⟩|ij⟩` on `A₁A₂` with probability `1/d²`.
pub fn env_input(d: usize) -> Result<CQEnsemble> {
    let dd = d * d;
    let states: Vec<PureState> = (0..dd)
        .map(|x| PureState::basis(vec![dd, dd], &[x, x]))
        .collect::<Result<_>>()?;
    CQEnsemble::uniform_pure(&states)
}

/// The four branch pairs in order `N₁N₁, N₁N₂, N₂N₁, N₂N₂`.
pub const ENV_BRANCHES: [&str; 4] = ["n1n1", "n1n2", "n2n1", "n2n2"];

fn env_isos(d: usize, flags: bool) -> Result<[HelperIsometry; 2]> {
    let (n1, n2) = (controlled_weyl_isometry(d)?, swap_isometry(d)?);
    if flags {
        Ok([n1.with_flag(0, 2)?, n2.with_flag(1, 2)?])
    } else {
        Ok([n1, n2])
    }
}

/// `I(X; B₁B₂)` for each branch pair, with `η = Φ^{E₁E₂}`.
pub fn env_branches(d: usize, exec: Exec) -> Result<[f64; 4]> {
    let input = env_input(d)?;
    let eta = max_entangled(d)?.to_density();
    let isos = env_isos(d, false)?;
    let values = par::map_range(exec, 4, |k| {
        let pair = [isos[k / 2].clone(), isos[k % 2].clone()];
        holevo_chi(&helper_apply_ensemble(&pair, &input, &eta)?)
    });
    let mut out = [0.0; 4];
    for (o, v) in out.iter_mut().zip(values) {
        *o = v?;
    }
    Ok(out)
}

/// `½ I(X; B₁ f₁ B₂ f₂)` for two uses of `p N₁ + (1-p) N₂`, evaluated on the
/// full flagged output.
pub fn env_mixture_rate(d: usize, p: f64) -> Result<f64> {
    let input = env_input(d)?;
    let eta = max_entangled(d)?.to_density();
    let isos = env_isos(d, true)?;
    let weights = [p, 1.0 - p];
    let mut states: Option<Vec<ComplexMatrix>> = None;
    let mut dims = Vec::new();
    for k in 0..4 {
        let w = weights[k / 2] * weights[k % 2];
        let pair = [isos[k / 2].clone(), isos[k % 2].clone()];
        let out = helper_apply_ensemble(&pair, &input, &eta)?;
        dims = out.states()[0].dims().to_vec();
        let acc = states.get_or_insert_with(|| {
            let n = out.states()[0].side();
            vec![ComplexMatrix::zeros(n, n); out.len()]
        });
        for (a, s) in acc.iter_mut().zip(out.states()) {
            a.add_scaled(s.matrix(), C64::new(w, 0.0));
        }
    }
    let states = states
        .expect("four branches")
        .into_iter()
        .map(|m| DensityMatrix::new(m, dims.clone()))
        .collect::<Result<Vec<_>>>()?;
    let mixed = CQEnsemble::new(input.probs().to_vec(), states)?;
    Ok(holevo_chi(&mixed)? / 2.0)
}

/// `I(X; B₁B₂)` of the `N₁N₁` branch: `log d` for odd `d`, `log(d/2)` for even.
pub fn env_n1n1_value(d: usize) -> f64 {
    if d % 2 == 1 {
        (d as f64).log2()
    } else {
        (d as f64 / 2.0).log2()
    }
}

/// `(2p - 1.5 p²) log d`, the two-use rate for odd `d`.
pub fn env_rate_odd(d: usize, p: f64) -> f64 {
    (2.0 * p - 1.5 * p * p) * (d as f64).log2()
}

/// Environment-assisted construction: branch mutual informations, the two-use
/// rate of the flagged mixture and the convex-combination bound `p log d`.
pub fn env_experiment(params: &EnvParams) -> Result<ExperimentReport> {
    env_experiment_with(params, Tolerance::default(), Exec::default())
}

pub fn env_experiment_with(params: &EnvParams, tol: Tolerance, exec: Exec) -> Result<ExperimentReport> {
    let start = Instant::now();
    params.validate()?;
    let EnvParams { d, p } = *params;
    let log_d = (d as f64).log2();
    let mut r = ExperimentReport::new("verify-env");
    r.param("d", Param::Int(d as u64));
    r.param("p", Param::Real(p));

    let values = env_branches(d, exec)?;
    let targets = [env_n1n1_value(d), 2.0 * log_d, 2.0 * log_d, 0.0];
    for ((name, v), t) in ENV_BRANCHES.iter().zip(values).zip(targets) {
        r.check_eq(name, t, v);
    }
    let weights = [p * p, p * (1.0 - p), (1.0 - p) * p, (1.0 - p) * (1.0 - p)];
    let rate: f64 = weights.iter().zip(values).map(|(w, v)| w * v).sum::<f64>() / 2.0;
    let dense = env_mixture_rate(d, p)?;
    r.numeric.insert("rate".into(), rate);
    r.numeric.insert("rate_dense".into(), dense);
    r.abs_error.insert("rate_dense".into(), (dense - rate).abs());
    if d % 2 == 1 {
        r.analytic.insert("rate".into(), env_rate_odd(d, p));
        r.abs_error.insert("rate".into(), (rate - env_rate_odd(d, p)).abs());
    }
    let converse = p * log_d;
    r.analytic.insert("converse".into(), converse);
    r.numeric.insert("gap".into(), rate - converse);
    r.numeric
        .insert("nonconvex".into(), f64::from(u8::from(rate - converse > tol.atol)));

    r.finish(tol);
    r.runtime_ms = elapsed_ms(start);
    Ok(r)
}

/// Overlaps of the states `Φ_j = (Z(j) ⊗ Z(j)) Φ_d`.
#[derive(Debug, Clone, PartialEq)]
pub struct BellGram {
    pub d: usize,
    /// `gram[a][b] = |⟨Φ_a|Φ_b⟩|`.
    pub gram: Vec<Vec<f64>>,
    pub distinct: usize,
}

impl BellGram {
    /// Largest deviation from `|⟨Φ_a|Φ_b⟩| = [d divides 2(b-a)]`.
    pub fn rule_deviation(&self) -> f64 {
        let d = self.d;
        let mut worst: f64 = 0.0;
        for a in 0..d {
            for b in 0..d {
                let expected = if (2 * (b + d - a)) % d == 0 { 1.0 } else { 0.0 };
                worst = worst.max((self.gram[a][b] - expected).abs());
            }
        }
        worst
    }
}

pub fn bell_gram(d: usize) -> Result<BellGram> {
    if d < 2 {
        return Err(QcapError::InvalidParameter(format!("d must be at least 2, got {d}")));
    }
    let phi = max_entangled(d)?;
    let states: Vec<PureState> = (0..d)
        .map(|j| phi.apply_local(&weyl(d, 0, j).kron(&weyl(d, 0, j)), &[0, 1]))
        .collect::<Result<_>>()?;
    let gram: Vec<Vec<f64>> = states
        .iter()
        .map(|a| states.iter().map(|b| a.inner(b).norm()).collect())
        .collect();
    let distinct = (0..d).filter(|&j| gram[..j].iter().all(|row| row[j] < 0.5)).count();
    Ok(BellGram { d, gram, distinct })
}

/// Report form of [`bell_gram`].
pub fn bell_gram_report(d: usize, tol: Tolerance) -> Result<ExperimentReport> {
    let start = Instant::now();
    let g = bell_gram(d)?;
    let mut r = ExperimentReport::new("bell-gram");
    r.param("d", Param::Int(d as u64));
    let expected = if d % 2 == 1 { d } else { d / 2 };
    r.check_eq("distinct", expected as f64, g.distinct as f64);
    r.abs_error.insert("gram_rule".into(), g.rule_deviation());
    for (a, row) in g.gram.iter().enumerate() {
        for (b, v) in row.iter().enumerate() {
            r.numeric.insert(format!("overlap_{a}_{b}"), *v);
        }
    }
    r.finish(tol);
    r.runtime_ms = elapsed_ms(start);
    Ok(r)
}

/// A real-valued bound attached to a channel.
pub trait BoundEvaluator {
    fn name(&self) -> String;
    fn evaluate(&self, ch: &KrausChannel) -> Result<f64>;
}

/// Coherent information for a fixed pure input; affine over flagged mixtures.
#[derive(Debug, Clone)]
pub struct FixedInputCoherent {
    pub input: PureState,
    pub inputs: Vec<usize>,
}

impl BoundEvaluator for FixedInputCoherent {
    fn name(&self) -> String {
        "fixed-input-coherent".into()
    }

    fn evaluate(&self, ch: &KrausChannel) -> Result<f64> {
        coherent_information_with(ch, &self.input, &self.inputs, Evaluation::Blockwise, Exec::default())
            .map(|v| v.value)
    }
}

/// `½ Q(N ⊗ N, ρ)` on the two-use private input; a lower bound on the
/// quantum (hence private) capacity of channels with input `(C, D)`.
#[derive(Debug, Clone, Copy)]
pub struct TwoUseCoherentBound {
    pub d: usize,
}

impl BoundEvaluator for TwoUseCoherentBound {
    fn name(&self) -> String {
        "two-use-coherent".into()
    }

    fn evaluate(&self, ch: &KrausChannel) -> Result<f64> {
        let input = build_private_input(self.d)?;
        let two = tensor(ch, ch);
        let q = coherent_information_with(
            &two,
            &input,
            &PRIVATE_CHANNEL_INPUTS,
            Evaluation::Blockwise,
            Exec::default(),
        )?;
        Ok(q.value / 2.0)
    }
}

/// `(1/p) [T(p N ⊕ (1-p) M) - (1-p) T(M)]` with the mixture realised as a
/// flagged mixture.
pub fn nonconvexity_functional(t: &dyn BoundEvaluator, n: &KrausChannel, m: &KrausChannel, p: f64) -> Result<f64> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(QcapError::InvalidProbability(p));
    }
    let mix = flagged_mixture(vec![
        FlaggedBranch::new(p, n.clone()),
        FlaggedBranch::new(1.0 - p, m.clone()),
    ])?;
    let tm = if p < 1.0 { t.evaluate(m)? } else { 0.0 };
    Ok((t.evaluate(&mix)? - (1.0 - p) * tm) / p)
}

/// Functional of the erasure branch against the rocket branch with the
/// two-use evaluator, compared with the erasure channel's private capacity
/// `max{0, 2(1-2p) log d}`.
pub fn functional_experiment(params: &PrivateParams, tol: Tolerance) -> Result<ExperimentReport> {
    let start = Instant::now();
    params.validate()?;
    let PrivateParams {
        d,
        q,
        p,
        n_samples,
        seed,
    } = *params;
    if q == 0.0 {
        return Err(QcapError::InvalidProbability(q));
    }
    let eval = TwoUseCoherentBound { d };
    let mut r = ExperimentReport::new("functional");
    r.param("d", Param::Int(d as u64));
    r.param("q", Param::Real(q));
    r.param("p", Param::Real(p));
    r.param("samples", Param::Int(n_samples as u64));
    r.param("seed", Param::Int(seed));
    r.param("evaluator", Param::Text(eval.name()));

    let n = erasure_branch(d, p)?;
    let m = rocket_sampled(d, n_samples, seed)?;
    let g = nonconvexity_functional(&eval, &n, &m, q)?;
    let erasure_private = (2.0 * (1.0 - 2.0 * p) * (d as f64).log2()).max(0.0);
    r.analytic.insert("erasure_private".into(), erasure_private);
    r.numeric.insert("functional".into(), g);
    r.numeric.insert("erasure_bound".into(), eval.evaluate(&n)?);
    r.numeric
        .insert("exceeds".into(), f64::from(u8::from(g > erasure_private + tol.atol)));
    r.check_ge("exceeds", g, erasure_private);
    r.finish(tol);
    r.runtime_ms = elapsed_ms(start);
    Ok(r)
}
