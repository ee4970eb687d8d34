use std::fmt;
use std::sync::{Arc, OnceLock};

use crate::error::{QcapError, Result};
use crate::par::{self, Exec};
use crate::qmat::{check_subsystems, ComplexMatrix, DensityMatrix, Tolerance, C64};

/// One component of a flagged mixture: the channel applied with `probability`.
#[derive(Debug, Clone)]
pub struct FlaggedBranch {
    pub probability: f64,
    pub channel: KrausChannel,
}

impl FlaggedBranch {
    pub fn new(probability: f64, channel: KrausChannel) -> Self {
        Self { probability, channel }
    }
}

/// Completely positive trace-preserving map given by Kraus operators.
///
/// Tensor products are stored as a pair of factors and their Kraus family is
/// only materialised when first requested. Flagged mixtures (and tensor
/// products of them) also keep their branch decomposition; the branch outputs
/// occupy mutually orthogonal subspaces of the full output space.
#[derive(Clone)]
pub struct KrausChannel {
    in_dims: Vec<usize>,
    out_dims: Vec<usize>,
    kraus: OnceLock<Arc<Vec<ComplexMatrix>>>,
    factors: Option<Arc<(KrausChannel, KrausChannel)>>,
    branches: Option<Arc<Vec<FlaggedBranch>>>,
}

impl fmt::Debug for KrausChannel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("KrausChannel")
            .field("in_dims", &self.in_dims)
            .field("out_dims", &self.out_dims)
            .field("num_kraus", &self.num_kraus())
            .field("branches", &self.branches.as_ref().map(|b| b.len()))
            .finish()
    }
}

fn completeness_error(kraus: &[ComplexMatrix], dim_in: usize) -> f64 {
    let mut sum = ComplexMatrix::zeros(dim_in, dim_in);
    for k in kraus {
        sum.add_scaled(&k.adjoint().matmul(k), C64::new(1.0, 0.0));
    }
    sum.max_abs_diff(&ComplexMatrix::identity(dim_in))
}

impl KrausChannel {
    /// Validated channel with a single input and a single output register.
    pub fn new(kraus: Vec<ComplexMatrix>) -> Result<Self> {
        let (rows, cols) = kraus
            .first()
            .map(|k| (k.rows(), k.cols()))
            .ok_or(QcapError::EmptyKraus)?;
        Self::with_dims(kraus, vec![cols], vec![rows])
    }

    /// Validated channel with explicit register structure on both sides.
    pub fn with_dims(kraus: Vec<ComplexMatrix>, in_dims: Vec<usize>, out_dims: Vec<usize>) -> Result<Self> {
        Self::with_dims_tol(kraus, in_dims, out_dims, Tolerance::default())
    }

    pub fn with_dims_tol(
        kraus: Vec<ComplexMatrix>,
        in_dims: Vec<usize>,
        out_dims: Vec<usize>,
        tol: Tolerance,
    ) -> Result<Self> {
        if kraus.is_empty() {
            return Err(QcapError::EmptyKraus);
        }
        if in_dims.iter().chain(&out_dims).any(|&d| d == 0) {
            return Err(QcapError::ZeroDimension);
        }
        let dim_in: usize = in_dims.iter().product();
        let dim_out: usize = out_dims.iter().product();
        for k in &kraus {
            if k.rows() != dim_out || k.cols() != dim_in {
                return Err(QcapError::DimensionMismatch(format!(
                    "Kraus operator is {}x{}, expected {dim_out}x{dim_in}",
                    k.rows(),
                    k.cols()
                )));
            }
        }
        let err = completeness_error(&kraus, dim_in);
        if err > tol.atol {
            return Err(QcapError::Incomplete(err));
        }
        Ok(Self::from_kraus_unchecked(kraus, in_dims, out_dims))
    }

    pub(crate) fn from_kraus_unchecked(kraus: Vec<ComplexMatrix>, in_dims: Vec<usize>, out_dims: Vec<usize>) -> Self {
        let cell = OnceLock::new();
        let _ = cell.set(Arc::new(kraus));
        Self {
            in_dims,
            out_dims,
            kraus: cell,
            factors: None,
            branches: None,
        }
    }

    pub fn dim_in(&self) -> usize {
        self.in_dims.iter().product()
    }

    pub fn dim_out(&self) -> usize {
        self.out_dims.iter().product()
    }

    pub fn in_dims(&self) -> &[usize] {
        &self.in_dims
    }

    pub fn out_dims(&self) -> &[usize] {
        &self.out_dims
    }

    /// Number of Kraus operators, without materialising tensor products.
    pub fn num_kraus(&self) -> usize {
        if let Some(k) = self.kraus.get() {
            return k.len();
        }
        let (a, b) = self.factors.as_deref().expect("lazy channel has factors");
        a.num_kraus() * b.num_kraus()
    }

    pub fn kraus(&self) -> &[ComplexMatrix] {
        self.kraus.get_or_init(|| {
            let (a, b) = self.factors.as_deref().expect("lazy channel has factors");
            let mut ops = Vec::with_capacity(a.num_kraus() * b.num_kraus());
            for ka in a.kraus() {
                for kb in b.kraus() {
                    ops.push(ka.kron(kb));
                }
            }
            Arc::new(ops)
        })
    }

    /// Branch decomposition, present for flagged mixtures and their tensor
    /// products.
    pub fn branches(&self) -> Option<&[FlaggedBranch]> {
        self.branches.as_deref().map(|b| b.as_slice())
    }

    /// Same channel with the output registers relabelled (same total dim).
    pub fn with_out_dims(mut self, out_dims: Vec<usize>) -> Result<Self> {
        if out_dims.iter().product::<usize>() != self.dim_out() || out_dims.contains(&0) {
            return Err(QcapError::DimensionMismatch(format!(
                "output dims {out_dims:?} do not multiply to {}",
                self.dim_out()
            )));
        }
        self.out_dims = out_dims;
        Ok(self)
    }

    /// Same channel with the input registers relabelled (same total dim).
    pub fn with_in_dims(mut self, in_dims: Vec<usize>) -> Result<Self> {
        if in_dims.iter().product::<usize>() != self.dim_in() || in_dims.contains(&0) {
            return Err(QcapError::DimensionMismatch(format!(
                "input dims {in_dims:?} do not multiply to {}",
                self.dim_in()
            )));
        }
        self.in_dims = in_dims;
        Ok(self)
    }

    /// Largest deviation of `Σ K†K` from the identity.
    pub fn completeness_error(&self) -> f64 {
        completeness_error(self.kraus(), self.dim_in())
    }

    /// `Σ_k K ρ K†` on a bare matrix of side `dim_in`.
    pub(crate) fn apply_matrix(&self, rho: &ComplexMatrix, exec: Exec) -> ComplexMatrix {
        let terms = par::map_slice(exec, self.kraus(), |k| k.matmul(rho).matmul(&k.adjoint()));
        let mut out = ComplexMatrix::zeros(self.dim_out(), self.dim_out());
        for t in &terms {
            out.add_scaled(t, C64::new(1.0, 0.0));
        }
        out
    }
}

/// Builds a validated channel from a nonempty Kraus family.
pub fn make_channel(kraus: Vec<ComplexMatrix>) -> Result<KrausChannel> {
    KrausChannel::new(kraus)
}

/// `ch(ρ)`; the output carries the channel's output register structure.
pub fn apply(ch: &KrausChannel, rho: &DensityMatrix) -> Result<DensityMatrix> {
    apply_with(ch, rho, Exec::default())
}

pub fn apply_with(ch: &KrausChannel, rho: &DensityMatrix, exec: Exec) -> Result<DensityMatrix> {
    if rho.side() != ch.dim_in() {
        return Err(QcapError::DimensionMismatch(format!(
            "state has dimension {}, channel expects {}",
            rho.side(),
            ch.dim_in()
        )));
    }
    let out = ch.apply_matrix(rho.matrix(), exec);
    DensityMatrix::new(out, ch.out_dims().to_vec())
}

/// Applies `ch` to the registers `targets` of `state` (in the listed order).
///
/// The output registers take the place of the first target; all untouched
/// registers keep their relative order.
pub fn apply_on_subsystems(ch: &KrausChannel, state: &DensityMatrix, targets: &[usize]) -> Result<DensityMatrix> {
    if targets.is_empty() {
        return Err(QcapError::EmptySubsystemSet);
    }
    let dims = state.dims();
    check_subsystems(targets, dims.len())?;
    let dim_in: usize = targets.iter().map(|&t| dims[t]).product();
    if dim_in != ch.dim_in() {
        return Err(QcapError::DimensionMismatch(format!(
            "targets {targets:?} have dimension {dim_in}, channel expects {}",
            ch.dim_in()
        )));
    }
    let others: Vec<usize> = (0..dims.len()).filter(|k| !targets.contains(k)).collect();
    let mut order = others.clone();
    order.extend_from_slice(targets);
    let moved = state.permute_systems(&order)?;
    let rho = moved.matrix();

    let m: usize = others.iter().map(|&k| dims[k]).product();
    let (n, o) = (dim_in, ch.dim_out());
    let mut out = ComplexMatrix::zeros(m * o, m * o);
    let adj: Vec<ComplexMatrix> = ch.kraus().iter().map(|k| k.adjoint()).collect();
    let rows: Vec<usize> = (0..n).collect();
    for a in 0..m {
        for b in 0..m {
            let ra: Vec<usize> = rows.iter().map(|r| a * n + r).collect();
            let cb: Vec<usize> = rows.iter().map(|c| b * n + c).collect();
            let block = rho.select(&ra, &cb);
            if block.max_abs() == 0.0 {
                continue;
            }
            for (k, kd) in ch.kraus().iter().zip(&adj) {
                let t = k.matmul(&block).matmul(kd);
                for i in 0..o {
                    for j in 0..o {
                        out[(a * o + i, b * o + j)] += t[(i, j)];
                    }
                }
            }
        }
    }

    let mut out_dims: Vec<usize> = others.iter().map(|&k| dims[k]).collect();
    out_dims.extend_from_slice(ch.out_dims());
    let out = DensityMatrix::new(out, out_dims)?;

    let n_before = others.iter().filter(|&&k| k < targets[0]).count();
    let n_others = others.len();
    let n_out = ch.out_dims().len();
    let mut perm: Vec<usize> = (0..n_before).collect();
    perm.extend(n_others..n_others + n_out);
    perm.extend(n_before..n_others);
    out.permute_systems(&perm)
}

/// `a ⊗ b`. Kraus operators are `K_i ⊗ L_j`, built on first use.
pub fn tensor(a: &KrausChannel, b: &KrausChannel) -> KrausChannel {
    let mut in_dims = a.in_dims.clone();
    in_dims.extend_from_slice(&b.in_dims);
    let mut out_dims = a.out_dims.clone();
    out_dims.extend_from_slice(&b.out_dims);

    let branches = match (a.branches(), b.branches()) {
        (None, None) => None,
        (Some(ba), None) => Some(
            ba.iter()
                .map(|x| FlaggedBranch::new(x.probability, tensor(&x.channel, b)))
                .collect::<Vec<_>>(),
        ),
        (None, Some(bb)) => Some(
            bb.iter()
                .map(|y| FlaggedBranch::new(y.probability, tensor(a, &y.channel)))
                .collect(),
        ),
        (Some(ba), Some(bb)) => Some(
            ba.iter()
                .flat_map(|x| {
                    bb.iter()
                        .map(move |y| FlaggedBranch::new(x.probability * y.probability, tensor(&x.channel, &y.channel)))
                })
                .collect(),
        ),
    };

    KrausChannel {
        in_dims,
        out_dims,
        kraus: OnceLock::new(),
        factors: Some(Arc::new((a.clone(), b.clone()))),
        branches: branches.map(Arc::new),
    }
}

/// `after ∘ before`.
pub fn compose(after: &KrausChannel, before: &KrausChannel) -> Result<KrausChannel> {
    if after.dim_in() != before.dim_out() {
        return Err(QcapError::DimensionMismatch(format!(
            "cannot compose: outer channel takes {}, inner channel emits {}",
            after.dim_in(),
            before.dim_out()
        )));
    }
    let mut ops = Vec::with_capacity(after.num_kraus() * before.num_kraus());
    for a in after.kraus() {
        for b in before.kraus() {
            ops.push(a.matmul(b));
        }
    }
    Ok(KrausChannel::from_kraus_unchecked(
        ops,
        before.in_dims.clone(),
        after.out_dims.clone(),
    ))
}

/// Complementary channel of the Stinespring isometry `V = Σ_k K_k ⊗ |k⟩_E`.
///
/// Its Kraus operators are `F_b = Σ_k |k⟩⟨b| K_k`, one per output basis vector
/// of `ch`; the environment has one level per Kraus operator of `ch`.
pub fn complementary(ch: &KrausChannel) -> KrausChannel {
    let kraus = ch.kraus();
    let n = kraus.len();
    let ops = (0..ch.dim_out())
        .map(|b| {
            let mut f = ComplexMatrix::zeros(n, ch.dim_in());
            for (k, op) in kraus.iter().enumerate() {
                f.as_mut_slice()[k * ch.dim_in()..(k + 1) * ch.dim_in()].copy_from_slice(op.row(b));
            }
            f
        })
        .collect();
    KrausChannel::from_kraus_unchecked(ops, ch.in_dims.clone(), vec![n])
}

/// Probabilistic combination whose output is the direct sum of the branch
/// outputs, so the block index acts as an orthogonal flag.
///
/// Branch `i` contributes Kraus operators `√p_i · embed_i ∘ K`; branches with
/// zero probability keep their output block but contribute no operators.
pub fn flagged_mixture(branches: Vec<FlaggedBranch>) -> Result<KrausChannel> {
    let first = branches.first().ok_or(QcapError::EmptyKraus)?;
    let in_dims = first.channel.in_dims.clone();
    let dim_in = first.channel.dim_in();
    let mut total = 0.0;
    for b in &branches {
        if !(0.0..=1.0).contains(&b.probability) {
            return Err(QcapError::InvalidProbability(b.probability));
        }
        if b.channel.dim_in() != dim_in {
            return Err(QcapError::DimensionMismatch(format!(
                "branch input dimension {} differs from {dim_in}",
                b.channel.dim_in()
            )));
        }
        total += b.probability;
    }
    if (total - 1.0).abs() > Tolerance::DEFAULT_ATOL {
        return Err(QcapError::ProbabilitySum(total));
    }

    let dim_out: usize = branches.iter().map(|b| b.channel.dim_out()).sum();
    let mut ops = Vec::new();
    let mut offset = 0;
    for b in &branches {
        let bo = b.channel.dim_out();
        if b.probability > 0.0 {
            let w = C64::new(b.probability.sqrt(), 0.0);
            for k in b.channel.kraus() {
                let mut e = ComplexMatrix::zeros(dim_out, dim_in);
                for i in 0..bo {
                    for j in 0..dim_in {
                        e[(offset + i, j)] = w * k[(i, j)];
                    }
                }
                ops.push(e);
            }
        }
        offset += bo;
    }
    let mut ch = KrausChannel::from_kraus_unchecked(ops, in_dims, vec![dim_out]);
    ch.branches = Some(Arc::new(branches));
    Ok(ch)
}
