//! Environment-assisted channels: isometries `W: A ⊗ E → B ⊗ F` whose
//! environment input `E` is prepared by a helper.

use crate::error::{QcapError, Result};
use crate::infomeasures::CQEnsemble;
use crate::qmat::ops::weyl;
use crate::qmat::spectrum::hermitian_eigen;
use crate::qmat::{ComplexMatrix, DensityMatrix, PureState, Tolerance, C64};

/// Eigenvalues below this are dropped when splitting states into pure parts.
const RANK_CUTOFF: f64 = 1e-14;

/// Classical flag `|value⟩⟨value|` on a `levels`-dimensional register,
/// delivered to the receiver next to `B`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Flag {
    pub value: usize,
    pub levels: usize,
}

/// Isometry `W: A ⊗ E → B ⊗ F` (row index `b·|F| + f`, column `a·|E| + e`).
#[derive(Debug, Clone)]
pub struct HelperIsometry {
    w: ComplexMatrix,
    dim_a: usize,
    dim_e: usize,
    dim_b: usize,
    dim_f: usize,
    flag: Option<Flag>,
}

impl HelperIsometry {
    pub fn new(w: ComplexMatrix, dim_a: usize, dim_e: usize, dim_b: usize, dim_f: usize) -> Result<Self> {
        if w.rows() != dim_b * dim_f || w.cols() != dim_a * dim_e {
            return Err(QcapError::DimensionMismatch(format!(
                "isometry is {}x{}, expected {}x{}",
                w.rows(),
                w.cols(),
                dim_b * dim_f,
                dim_a * dim_e
            )));
        }
        let err = w.isometry_error();
        if err > Tolerance::DEFAULT_ATOL {
            return Err(QcapError::NotUnitary(err));
        }
        Ok(Self {
            w,
            dim_a,
            dim_e,
            dim_b,
            dim_f,
            flag: None,
        })
    }

    pub fn with_flag(mut self, value: usize, levels: usize) -> Result<Self> {
        if value >= levels {
            return Err(QcapError::InvalidParameter(format!(
                "flag value {value} does not fit {levels} levels"
            )));
        }
        self.flag = Some(Flag { value, levels });
        Ok(self)
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.w
    }

    pub fn dim_a(&self) -> usize {
        self.dim_a
    }

    pub fn dim_e(&self) -> usize {
        self.dim_e
    }

    pub fn dim_b(&self) -> usize {
        self.dim_b
    }

    pub fn dim_f(&self) -> usize {
        self.dim_f
    }

    pub fn flag(&self) -> Option<Flag> {
        self.flag
    }

    /// Receiver registers for one use: `[B]` or `[B, flag]`.
    pub fn receiver_dims(&self) -> Vec<usize> {
        match self.flag {
            Some(f) => vec![self.dim_b, f.levels],
            None => vec![self.dim_b],
        }
    }
}

/// `Σ_{x,z} |xz⟩^F ⟨xz|^A ⊗ W(x,z)^{E→B}` with `|A| = |F| = d²`, `|E| = |B| = d`.
pub fn controlled_weyl_isometry(d: usize) -> Result<HelperIsometry> {
    if d < 2 {
        return Err(QcapError::InvalidParameter(
            "controlled Weyl isometry needs d >= 2".into(),
        ));
    }
    let (da, de, db, df) = (d * d, d, d, d * d);
    let mut w = ComplexMatrix::zeros(db * df, da * de);
    for x in 0..d {
        for z in 0..d {
            let a = x * d + z;
            let op = weyl(d, x, z);
            for b in 0..d {
                for e in 0..d {
                    w[(b * df + a, a * de + e)] = op[(b, e)];
                }
            }
        }
    }
    HelperIsometry::new(w, da, de, db, df)
}

/// `|φ⟩^A ⊗ |ψ⟩^E ↦ |ψ⟩^B ⊗ |φ⟩^F` with `|A| = |F| = d²`, `|E| = |B| = d`.
pub fn swap_isometry(d: usize) -> Result<HelperIsometry> {
    if d < 2 {
        return Err(QcapError::InvalidParameter("swap isometry needs d >= 2".into()));
    }
    let (da, de, db, df) = (d * d, d, d, d * d);
    let mut w = ComplexMatrix::zeros(db * df, da * de);
    for a in 0..da {
        for e in 0..de {
            w[(e * df + a, a * de + e)] = C64::new(1.0, 0.0);
        }
    }
    HelperIsometry::new(w, da, de, db, df)
}

fn pure_parts(rho: &DensityMatrix) -> Result<Vec<(f64, Vec<C64>)>> {
    let (vals, vecs) = hermitian_eigen(rho.matrix())?;
    Ok(vals.into_iter().zip(vecs).filter(|(l, _)| *l > RANK_CUTOFF).collect())
}

/// Applies the isometry on the adjacent register pair starting at `pos`.
fn apply_on_pair(v: &[C64], dims: &mut Vec<usize>, pos: usize, iso: &HelperIsometry) -> Vec<C64> {
    let left: usize = dims[..pos].iter().product();
    let right: usize = dims[pos + 2..].iter().product();
    let (n_in, n_out) = (iso.dim_a * iso.dim_e, iso.dim_b * iso.dim_f);
    let mut out = vec![C64::new(0.0, 0.0); left * n_out * right];
    let mut x = vec![C64::new(0.0, 0.0); n_in];
    for l in 0..left {
        for r in 0..right {
            let mut any = false;
            for (i, slot) in x.iter_mut().enumerate() {
                *slot = v[(l * n_in + i) * right + r];
                any |= slot.norm_sqr() > 0.0;
            }
            if !any {
                continue;
            }
            let y = iso.w.apply(&x);
            for (o, val) in y.into_iter().enumerate() {
                out[(l * n_out + o) * right + r] = val;
            }
        }
    }
    dims.splice(pos..pos + 2, [iso.dim_b, iso.dim_f]);
    out
}

fn check_isos(isos: &[HelperIsometry], a_dims: &[usize], e_dims: &[usize]) -> Result<()> {
    if isos.is_empty() {
        return Err(QcapError::InvalidParameter(
            "at least one channel use is required".into(),
        ));
    }
    let n = isos.len();
    if a_dims.len() != n || e_dims.len() != n {
        return Err(QcapError::DimensionMismatch(format!(
            "{n} channel uses need {n} input and {n} environment registers, got {} and {}",
            a_dims.len(),
            e_dims.len()
        )));
    }
    for (i, iso) in isos.iter().enumerate() {
        if iso.dim_a != a_dims[i] || iso.dim_e != e_dims[i] {
            return Err(QcapError::DimensionMismatch(format!(
                "use {i}: isometry expects A={} E={}, got A={} E={}",
                iso.dim_a, iso.dim_e, a_dims[i], e_dims[i]
            )));
        }
    }
    Ok(())
}

/// Receiver state `tr_F W^{⊗n} (ψ ⊗ ε) (W^{⊗n})†` for pure sender and helper
/// inputs, flags included. Output registers are `B_1 [flag_1] B_2 [flag_2] …`.
pub fn helper_map_pure(isos: &[HelperIsometry], input: &PureState, eta: &PureState) -> Result<DensityMatrix> {
    check_isos(isos, input.dims(), eta.dims())?;
    let m = receiver_matrix(isos, input.amplitudes(), eta.amplitudes());
    attach_flags(isos, m)
}

/// Unflagged receiver matrix on `B_1 … B_n` for pure inputs.
fn receiver_matrix(isos: &[HelperIsometry], input: &[C64], eta: &[C64]) -> ComplexMatrix {
    let n = isos.len();
    let mut v = Vec::with_capacity(input.len() * eta.len());
    for a in input {
        v.extend(eta.iter().map(|e| a * e));
    }
    let mut dims: Vec<usize> = isos
        .iter()
        .map(|w| w.dim_a)
        .chain(isos.iter().map(|w| w.dim_e))
        .collect();
    // Interleave to (A_1, E_1, A_2, E_2, ...).
    let perm: Vec<usize> = (0..n).flat_map(|i| [i, n + i]).collect();
    let ps = PureState::from_unnormalized(v, dims.clone()).expect("product of unit vectors");
    let ps = ps.permute_systems(&perm).expect("valid interleave");
    dims = ps.dims().to_vec();
    let mut v = ps.amplitudes().to_vec();
    for (i, iso) in isos.iter().enumerate() {
        v = apply_on_pair(&v, &mut dims, 2 * i, iso);
    }
    // (B_1, F_1, ..., B_n, F_n) -> (B_1..B_n, F_1..F_n)
    let perm: Vec<usize> = (0..n).map(|i| 2 * i).chain((0..n).map(|i| 2 * i + 1)).collect();
    let ps = PureState::from_unnormalized(v, dims).expect("isometries preserve the norm");
    let ps = ps.permute_systems(&perm).expect("valid split");
    let db: usize = isos.iter().map(|w| w.dim_b).product();
    let df: usize = isos.iter().map(|w| w.dim_f).product();
    let mmat = ComplexMatrix::from_vec(db, df, ps.amplitudes().to_vec());
    mmat.matmul(&mmat.adjoint())
}

fn attach_flags(isos: &[HelperIsometry], rho_b: ComplexMatrix) -> Result<DensityMatrix> {
    let n = isos.len();
    let b_dims: Vec<usize> = isos.iter().map(|w| w.dim_b).collect();
    let mut out = DensityMatrix::new(rho_b, b_dims)?;
    let flagged: Vec<(usize, Flag)> = isos
        .iter()
        .enumerate()
        .filter_map(|(i, w)| w.flag.map(|f| (i, f)))
        .collect();
    if flagged.is_empty() {
        return Ok(out);
    }
    for (_, f) in &flagged {
        out = out.tensor(&PureState::basis(vec![f.levels], &[f.value])?.to_density());
    }
    // Move each flag right after its B register.
    let mut perm = Vec::with_capacity(n + flagged.len());
    for i in 0..n {
        perm.push(i);
        if let Some(k) = flagged.iter().position(|(j, _)| *j == i) {
            perm.push(n + k);
        }
    }
    out.permute_systems(&perm)
}

/// Receiver state for arbitrary (mixed) sender input on `A_1 … A_n` and helper
/// state on `E_1 … E_n`.
pub fn helper_map(isos: &[HelperIsometry], input: &DensityMatrix, eta: &DensityMatrix) -> Result<DensityMatrix> {
    check_isos(isos, input.dims(), eta.dims())?;
    let db: usize = isos.iter().map(|w| w.dim_b).product();
    let mut acc = ComplexMatrix::zeros(db, db);
    let eta_parts = pure_parts(eta)?;
    for (la, va) in pure_parts(input)? {
        for (le, ve) in &eta_parts {
            let m = receiver_matrix(isos, &va, ve);
            acc.add_scaled(&m, C64::new(la * le, 0.0));
        }
    }
    attach_flags(isos, acc)
}

/// Pushes every state of a classical-quantum ensemble on `A_1 … A_n` through
/// the assisted channel.
pub fn helper_apply_ensemble(
    isos: &[HelperIsometry],
    ensemble: &CQEnsemble,
    eta: &DensityMatrix,
) -> Result<CQEnsemble> {
    let states = ensemble
        .states()
        .iter()
        .map(|s| helper_map(isos, s, eta))
        .collect::<Result<Vec<_>>>()?;
    CQEnsemble::new(ensemble.probs().to_vec(), states)
}

/// `N_η^{⊗n}` applied to a classical-quantum input on `X ⊗ A_1 … A_n`.
///
/// The first register of `input` is the classical register `X`; its
/// off-diagonal blocks must vanish. The result lives on `X ⊗ B_1 [flag_1] …`.
pub fn helper_apply(isos: &[HelperIsometry], input: &DensityMatrix, eta: &DensityMatrix) -> Result<DensityMatrix> {
    let dims = input.dims();
    if dims.len() != isos.len() + 1 {
        return Err(QcapError::DimensionMismatch(format!(
            "expected X plus {} input registers, got dims {dims:?}",
            isos.len()
        )));
    }
    let (ens, x_dim) = split_classical(input)?;
    let pushed = helper_apply_ensemble(isos, &ens, eta)?;
    let mut out_dims = vec![x_dim];
    out_dims.extend(isos.iter().flat_map(|w| w.receiver_dims()));
    let block = pushed.states()[0].side();
    let mut mat = ComplexMatrix::zeros(x_dim * block, x_dim * block);
    for (x, (p, s)) in pushed.probs().iter().zip(pushed.states()).enumerate() {
        for i in 0..block {
            for j in 0..block {
                mat[(x * block + i, x * block + j)] = s.matrix()[(i, j)] * *p;
            }
        }
    }
    DensityMatrix::new(mat, out_dims)
}

/// Splits `Σ_x |x⟩⟨x| ⊗ p_x ρ_x` into its ensemble; zero-weight blocks get the
/// maximally mixed state so the ensemble stays well formed.
pub(crate) fn split_classical(input: &DensityMatrix) -> Result<(CQEnsemble, usize)> {
    let dims = input.dims();
    let x_dim = dims[0];
    let rest: Vec<usize> = dims[1..].to_vec();
    let block: usize = rest.iter().product();
    let m = input.matrix();
    let mut off: f64 = 0.0;
    let mut probs = Vec::with_capacity(x_dim);
    let mut states = Vec::with_capacity(x_dim);
    for x in 0..x_dim {
        for y in 0..x_dim {
            if x == y {
                continue;
            }
            for i in 0..block {
                for j in 0..block {
                    off = off.max(m[(x * block + i, y * block + j)].norm());
                }
            }
        }
        let idx: Vec<usize> = (x * block..(x + 1) * block).collect();
        let sub = m.select(&idx, &idx);
        let p = sub.trace().re;
        probs.push(p.max(0.0));
        if p > RANK_CUTOFF {
            states.push(DensityMatrix::new(sub.scale_real(1.0 / p), rest.clone())?);
        } else {
            let mm = ComplexMatrix::identity(block).scale_real(1.0 / block as f64);
            states.push(DensityMatrix::new(mm, rest.clone())?);
        }
    }
    if off > Tolerance::DEFAULT_ATOL {
        return Err(QcapError::NotClassical(off));
    }
    let total: f64 = probs.iter().sum();
    let probs = probs.into_iter().map(|p| p / total).collect();
    Ok((CQEnsemble::new(probs, states)?, x_dim))
}
