//! One-shot information quantities: coherent information, mutual
//! information, Holevo χ and private information.

use std::collections::BTreeMap;

use rand::Rng;
use serde::Serialize;

use crate::channels::{apply_with, complementary, KrausChannel};
use crate::error::{QcapError, Result};
use crate::par::{self, Exec};
use crate::qmat::random::{random_pure_state, rng_stream};
use crate::qmat::spectrum::{entropy_of_spectrum, hermitian_eigenvalues};
use crate::qmat::{check_subsystems, max_entangled, ComplexMatrix, DensityMatrix, PureState, Tolerance, C64};

/// Classical-quantum ensemble `{p_x, ρ_x}`.
#[derive(Debug, Clone)]
pub struct CQEnsemble {
    probs: Vec<f64>,
    states: Vec<DensityMatrix>,
}

impl CQEnsemble {
    pub fn new(probs: Vec<f64>, states: Vec<DensityMatrix>) -> Result<Self> {
        if probs.is_empty() || probs.len() != states.len() {
            return Err(QcapError::DimensionMismatch(format!(
                "{} probabilities for {} states",
                probs.len(),
                states.len()
            )));
        }
        if let Some(&p) = probs
            .iter()
            .find(|p| !(0.0..=1.0 + Tolerance::DEFAULT_ATOL).contains(*p))
        {
            return Err(QcapError::InvalidProbability(p));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > Tolerance::DEFAULT_ATOL {
            return Err(QcapError::ProbabilitySum(total));
        }
        let dims = states[0].dims();
        if let Some(s) = states.iter().find(|s| s.dims() != dims) {
            return Err(QcapError::DimensionMismatch(format!(
                "ensemble states have dims {dims:?} and {:?}",
                s.dims()
            )));
        }
        Ok(Self { probs, states })
    }

    /// Uniform ensemble over the given pure states.
    pub fn uniform_pure(states: &[PureState]) -> Result<Self> {
        let p = 1.0 / states.len().max(1) as f64;
        Self::new(vec![p; states.len()], states.iter().map(|s| s.to_density()).collect())
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn states(&self) -> &[DensityMatrix] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    /// `Σ_x p_x ρ_x`.
    pub fn average(&self) -> DensityMatrix {
        let n = self.states[0].side();
        let mut m = ComplexMatrix::zeros(n, n);
        for (p, s) in self.probs.iter().zip(&self.states) {
            m.add_scaled(s.matrix(), C64::new(*p, 0.0));
        }
        DensityMatrix::from_parts(m, self.states[0].dims().to_vec())
    }
}

/// A value in bits with optional labelled sub-values.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct InfoValue {
    pub value: f64,
    pub components: BTreeMap<String, f64>,
}

impl InfoValue {
    pub fn scalar(value: f64) -> Self {
        Self {
            value,
            components: BTreeMap::new(),
        }
    }
}

/// How flagged channels are evaluated.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum Evaluation {
    /// Weighted sum over branches; orthogonal flags make this exact.
    #[default]
    Blockwise,
    /// Full output space, ignoring the branch structure.
    Dense,
}

/// Entropy of `M M†` (equivalently `M† M`), using the smaller side.
fn factor_entropy(m: &ComplexMatrix) -> Result<f64> {
    let gram = if m.rows() <= m.cols() {
        m.matmul(&m.adjoint())
    } else {
        m.adjoint().matmul(m)
    };
    entropy_of_spectrum(&hermitian_eigenvalues(&gram)?)
}

/// Reorders `phi` so the channel inputs come last; returns the amplitudes and
/// the reference registers.
fn split_input(ch: &KrausChannel, phi: &PureState, inputs: &[usize]) -> Result<(PureState, Vec<usize>)> {
    if inputs.is_empty() {
        return Err(QcapError::EmptySubsystemSet);
    }
    let dims = phi.dims();
    check_subsystems(inputs, dims.len())?;
    let dim_in: usize = inputs.iter().map(|&k| dims[k]).product();
    if dim_in != ch.dim_in() {
        return Err(QcapError::DimensionMismatch(format!(
            "input registers {inputs:?} have dimension {dim_in}, channel expects {}",
            ch.dim_in()
        )));
    }
    let reference: Vec<usize> = (0..dims.len()).filter(|k| !inputs.contains(k)).collect();
    let mut order = reference.clone();
    order.extend_from_slice(inputs);
    Ok((phi.permute_systems(&order)?, reference))
}

/// `V_k = Φ K_kᵀ` for every Kraus operator, with `Φ` the amplitude matrix
/// (reference × input).
fn branch_vectors(ch: &KrausChannel, phi_mat: &ComplexMatrix, exec: Exec) -> Vec<ComplexMatrix> {
    par::map_slice(exec, ch.kraus(), |k| phi_mat.matmul(&k.transpose()))
}

fn leaf_coherent(ch: &KrausChannel, phi_mat: &ComplexMatrix, exec: Exec) -> Result<(f64, f64)> {
    let vs = branch_vectors(ch, phi_mat, exec);
    let (da, dout, nk) = (phi_mat.rows(), ch.dim_out(), vs.len());
    // ρ^{AB} = M M† with column k of M equal to vec(V_k).
    let mut m = ComplexMatrix::zeros(da * dout, nk);
    // ρ^B = N N† with N[o, (k, a)] = V_k[a, o].
    let mut n = ComplexMatrix::zeros(dout, nk * da);
    for (k, v) in vs.iter().enumerate() {
        for a in 0..da {
            for o in 0..dout {
                let z = v[(a, o)];
                m[(a * dout + o, k)] = z;
                n[(o, k * da + a)] = z;
            }
        }
    }
    Ok((factor_entropy(&n)?, factor_entropy(&m)?))
}

fn coherent_rec(ch: &KrausChannel, phi_mat: &ComplexMatrix, eval: Evaluation, exec: Exec) -> Result<InfoValue> {
    if let (Evaluation::Blockwise, Some(branches)) = (eval, ch.branches()) {
        let values = par::map_slice(exec, branches, |b| {
            if b.probability > 0.0 {
                coherent_rec(&b.channel, phi_mat, eval, exec).map(|v| Some(v.value))
            } else {
                Ok(None)
            }
        });
        let mut out = InfoValue::default();
        for (i, (b, v)) in branches.iter().zip(values).enumerate() {
            if let Some(v) = v? {
                out.value += b.probability * v;
                out.components.insert(format!("branch_{i}"), v);
                out.components.insert(format!("weight_{i}"), b.probability);
            }
        }
        return Ok(out);
    }
    let (hb, hab) = leaf_coherent(ch, phi_mat, exec)?;
    let mut out = InfoValue::scalar(hb - hab);
    out.components.insert("h_b".into(), hb);
    out.components.insert("h_ab".into(), hab);
    Ok(out)
}

/// `Q(N, φ) = H(B) - H(AB)` for `ρ^{AB} = (id ⊗ N)(φ)`, where `inputs` lists
/// the registers of `phi` fed to the channel (in order) and all other
/// registers form the reference.
///
/// Flagged channels are evaluated branch by branch; the components hold each
/// branch value (`branch_i`) and its weight (`weight_i`).
pub fn coherent_information(ch: &KrausChannel, phi: &PureState, inputs: &[usize]) -> Result<InfoValue> {
    coherent_information_with(ch, phi, inputs, Evaluation::Blockwise, Exec::default())
}

pub fn coherent_information_with(
    ch: &KrausChannel,
    phi: &PureState,
    inputs: &[usize],
    eval: Evaluation,
    exec: Exec,
) -> Result<InfoValue> {
    let (moved, _) = split_input(ch, phi, inputs)?;
    let dim_in = ch.dim_in();
    let da = moved.len() / dim_in;
    let phi_mat = ComplexMatrix::from_vec(da, dim_in, moved.amplitudes().to_vec());
    coherent_rec(ch, &phi_mat, eval, exec)
}

/// Dense `(id ⊗ N)(φ)` on the reference registers (original order) followed
/// by the channel output registers.
pub fn joint_output(ch: &KrausChannel, phi: &PureState, inputs: &[usize]) -> Result<DensityMatrix> {
    let (moved, reference) = split_input(ch, phi, inputs)?;
    let dim_in = ch.dim_in();
    let da = moved.len() / dim_in;
    let phi_mat = ComplexMatrix::from_vec(da, dim_in, moved.amplitudes().to_vec());
    let dout = ch.dim_out();
    let mut rho = ComplexMatrix::zeros(da * dout, da * dout);
    for v in branch_vectors(ch, &phi_mat, Exec::default()) {
        let flat = v.into_vec();
        rho.add_scaled(&ComplexMatrix::outer(&flat, &flat), C64::new(1.0, 0.0));
    }
    let mut dims: Vec<usize> = reference.iter().map(|&k| phi.dims()[k]).collect();
    dims.extend_from_slice(ch.out_dims());
    DensityMatrix::new(rho, dims)
}

/// `H(B) - H(AB)` of a bipartite state, with `reference` the `A` registers.
pub fn coherent_information_of_state(rho: &DensityMatrix, reference: &[usize]) -> Result<f64> {
    let n = rho.dims().len();
    check_subsystems(reference, n)?;
    let rest: Vec<usize> = (0..n).filter(|k| !reference.contains(k)).collect();
    if rest.is_empty() {
        return Err(QcapError::TrivialCut);
    }
    Ok(rho.partial_trace(&rest)?.entropy()? - rho.entropy()?)
}

/// `I(A;B) = H(A) + H(B) - H(AB)` with `A = cut` and `B` the rest.
pub fn mutual_information(rho: &DensityMatrix, cut: &[usize]) -> Result<f64> {
    let n = rho.dims().len();
    check_subsystems(cut, n)?;
    if cut.is_empty() || cut.len() == n {
        return Err(QcapError::TrivialCut);
    }
    let rest: Vec<usize> = (0..n).filter(|k| !cut.contains(k)).collect();
    let ha = rho.partial_trace(cut)?.entropy()?;
    let hb = rho.partial_trace(&rest)?.entropy()?;
    Ok(ha + hb - rho.entropy()?)
}

/// Maps each ensemble state through `ch`; probabilities are unchanged.
pub fn cq_push(ch: &KrausChannel, e: &CQEnsemble) -> Result<CQEnsemble> {
    cq_push_with(ch, e, Exec::default())
}

pub fn cq_push_with(ch: &KrausChannel, e: &CQEnsemble, exec: Exec) -> Result<CQEnsemble> {
    let states = par::map_slice(exec, &e.states, |s| apply_with(ch, s, Exec::Sequential))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    Ok(CQEnsemble {
        probs: e.probs.clone(),
        states,
    })
}

/// `χ = H(Σ p_x ρ_x) - Σ p_x H(ρ_x)`, i.e. `I(X;B)` of the cq state.
pub fn holevo_chi(e: &CQEnsemble) -> Result<f64> {
    let mut avg_entropy = 0.0;
    for (p, s) in e.probs.iter().zip(&e.states) {
        if *p > 0.0 {
            avg_entropy += p * s.entropy()?;
        }
    }
    Ok(e.average().entropy()? - avg_entropy)
}

/// Explicit `Σ_x p_x |x⟩⟨x| ⊗ ρ_x` on `X ⊗ (state registers)`.
pub fn cq_state(e: &CQEnsemble) -> Result<DensityMatrix> {
    let n = e.len();
    let b = e.states[0].side();
    let mut m = ComplexMatrix::zeros(n * b, n * b);
    for (x, (p, s)) in e.probs.iter().zip(&e.states).enumerate() {
        for i in 0..b {
            for j in 0..b {
                m[(x * b + i, x * b + j)] = s.matrix()[(i, j)] * *p;
            }
        }
    }
    let mut dims = vec![n];
    dims.extend_from_slice(e.states[0].dims());
    DensityMatrix::new(m, dims)
}

/// `I(X;B) - I(X;E)` for the ensemble sent through `ch` and its complement.
pub fn private_information_value(ch: &KrausChannel, e: &CQEnsemble) -> Result<InfoValue> {
    if e.states[0].side() != ch.dim_in() {
        return Err(QcapError::DimensionMismatch(format!(
            "ensemble states have dimension {}, channel expects {}",
            e.states[0].side(),
            ch.dim_in()
        )));
    }
    let ixb = holevo_chi(&cq_push(ch, e)?)?;
    let ixe = holevo_chi(&cq_push(&complementary(ch), e)?)?;
    let mut out = InfoValue::scalar(ixb - ixe);
    out.components.insert("i_xb".into(), ixb);
    out.components.insert("i_xe".into(), ixe);
    Ok(out)
}

/// Which one-shot quantity [`lower_bound_search`] maximises.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Objective {
    Coherent,
    Holevo,
    Private,
}

fn random_ensemble<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CQEnsemble {
    let weights: Vec<f64> = (0..d).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
    let total: f64 = weights.iter().sum();
    let states = (0..d).map(|_| random_pure_state(&[d], rng).to_density()).collect();
    CQEnsemble::new(weights.iter().map(|w| w / total).collect(), states).expect("normalised weights")
}

fn computational_ensemble(d: usize) -> CQEnsemble {
    let states: Vec<PureState> = (0..d)
        .map(|i| PureState::basis(vec![d], &[i]).expect("digit fits"))
        .collect();
    CQEnsemble::uniform_pure(&states).expect("uniform ensemble")
}

fn evaluate_candidate(objective: Objective, ch: &KrausChannel, candidate: Candidate) -> Result<f64> {
    let d = ch.dim_in();
    match (objective, candidate) {
        (Objective::Coherent, Candidate::Pure(phi)) => {
            coherent_information_with(ch, &phi, &[1], Evaluation::Blockwise, Exec::Sequential).map(|v| v.value)
        }
        (Objective::Holevo, Candidate::Ensemble(e)) => holevo_chi(&cq_push_with(ch, &e, Exec::Sequential)?),
        (Objective::Private, Candidate::Ensemble(e)) => private_information_value(ch, &e).map(|v| v.value),
        _ => Err(QcapError::InvalidParameter(format!(
            "candidate kind does not match objective (d={d})"
        ))),
    }
}

enum Candidate {
    Pure(PureState),
    Ensemble(CQEnsemble),
}

fn canonical_candidates(objective: Objective, d: usize) -> Vec<Candidate> {
    match objective {
        Objective::Coherent => vec![
            Candidate::Pure(PureState::basis(vec![d, d], &[0, 0]).expect("digit fits")),
            Candidate::Pure(max_entangled(d).expect("d >= 1")),
        ],
        Objective::Holevo | Objective::Private => vec![
            Candidate::Ensemble(
                CQEnsemble::uniform_pure(&[PureState::basis(vec![d], &[0]).expect("digit fits")])
                    .expect("single state"),
            ),
            Candidate::Ensemble(computational_ensemble(d)),
        ],
    }
}

fn random_candidate(objective: Objective, d: usize, seed: u64, restart: usize) -> Candidate {
    let mut rng = rng_stream(seed, restart as u64);
    match objective {
        Objective::Coherent => Candidate::Pure(random_pure_state(&[d, d], &mut rng)),
        Objective::Holevo | Objective::Private => Candidate::Ensemble(random_ensemble(d, &mut rng)),
    }
}

/// Best value of `objective` over two canonical inputs (product and maximally
/// entangled input, or single-state and computational-basis ensemble) plus
/// `restarts` random ones. The reference system of coherent-information inputs
/// has the channel's input dimension; random ensembles have `dim_in` pure
/// states. This is a lower bound on the one-shot quantity, nothing more.
pub fn lower_bound_search(objective: Objective, ch: &KrausChannel, restarts: usize, seed: u64) -> Result<InfoValue> {
    lower_bound_search_with(objective, ch, restarts, seed, Exec::default())
}

pub fn lower_bound_search_with(
    objective: Objective,
    ch: &KrausChannel,
    restarts: usize,
    seed: u64,
    exec: Exec,
) -> Result<InfoValue> {
    if restarts == 0 {
        return Err(QcapError::InvalidParameter("restarts must be at least 1".into()));
    }
    let d = ch.dim_in();
    let canonical = canonical_candidates(objective, d);
    let n_canon = canonical.len();
    let mut values = Vec::with_capacity(n_canon + restarts);
    for c in canonical {
        values.push(evaluate_candidate(objective, ch, c));
    }
    values.extend(par::map_range(exec, restarts, |r| {
        evaluate_candidate(objective, ch, random_candidate(objective, d, seed, r))
    }));
    let mut best = (0usize, f64::NEG_INFINITY);
    for (i, v) in values.into_iter().enumerate() {
        let v = v?;
        if v > best.1 {
            best = (i, v);
        }
    }
    let mut out = InfoValue::scalar(best.1);
    out.components.insert("best_candidate".into(), best.0 as f64);
    out.components.insert("candidates".into(), (n_canon + restarts) as f64);
    Ok(out)
}
