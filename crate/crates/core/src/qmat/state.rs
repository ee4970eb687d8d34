use super::spectrum::{hermitian_eigenvalues, matrix_entropy};
use super::{ComplexMatrix, C64};
use crate::error::{QcapError, Result};

/// Absolute tolerance used by validations and equality checks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub atol: f64,
}

impl Tolerance {
    pub const DEFAULT_ATOL: f64 = 1e-7;

    pub fn new(atol: f64) -> Result<Self> {
        if atol > 0.0 && atol.is_finite() {
            Ok(Self { atol })
        } else {
            Err(QcapError::InvalidParameter(format!(
                "tolerance must be positive, got {atol}"
            )))
        }
    }
}

impl Default for Tolerance {
    fn default() -> Self {
        Self {
            atol: Self::DEFAULT_ATOL,
        }
    }
}

/// Register layout helper. Subsystems are listed left to right; the leftmost
/// subsystem is the most significant digit of a flattened index.
#[derive(Debug, Clone)]
pub(crate) struct Layout<'a> {
    dims: &'a [usize],
}

impl<'a> Layout<'a> {
    pub(crate) fn new(dims: &'a [usize]) -> Self {
        Self { dims }
    }

    pub(crate) fn strides(&self) -> Vec<usize> {
        let mut s = vec![1; self.dims.len()];
        for k in (0..self.dims.len().saturating_sub(1)).rev() {
            s[k] = s[k + 1] * self.dims[k + 1];
        }
        s
    }

    /// For every flat index, the flat index of the digits selected by `subsystems`
    /// (in the order given) within their own sub-layout.
    pub(crate) fn sub_indices(&self, subsystems: &[usize]) -> Vec<usize> {
        let total: usize = self.dims.iter().product();
        let strides = self.strides();
        let sub_dims: Vec<usize> = subsystems.iter().map(|&k| self.dims[k]).collect();
        let sub_strides = Layout::new(&sub_dims).strides();
        (0..total)
            .map(|flat| {
                subsystems
                    .iter()
                    .zip(&sub_strides)
                    .map(|(&k, &ss)| ((flat / strides[k]) % self.dims[k]) * ss)
                    .sum()
            })
            .collect()
    }
}

pub(crate) fn check_subsystems(indices: &[usize], count: usize) -> Result<()> {
    let mut seen = vec![false; count];
    for &i in indices {
        if i >= count {
            return Err(QcapError::SubsystemOutOfRange { index: i, count });
        }
        if seen[i] {
            return Err(QcapError::OverlappingTargets(indices.to_vec()));
        }
        seen[i] = true;
    }
    Ok(())
}

fn check_permutation(perm: &[usize], count: usize) -> Result<()> {
    if perm.len() != count {
        return Err(QcapError::InvalidPermutation(perm.to_vec()));
    }
    let mut seen = vec![false; count];
    for &p in perm {
        if p >= count || seen[p] {
            return Err(QcapError::InvalidPermutation(perm.to_vec()));
        }
        seen[p] = true;
    }
    Ok(())
}

/// `map[old_flat] = new_flat` for the reordering where new subsystem `k` is old
/// subsystem `perm[k]`.
fn permutation_map(dims: &[usize], perm: &[usize]) -> Vec<usize> {
    Layout::new(dims).sub_indices(perm)
}

fn check_dims(dims: &[usize], len: usize) -> Result<()> {
    if dims.contains(&0) {
        return Err(QcapError::ZeroDimension);
    }
    let prod: usize = dims.iter().product();
    if prod != len {
        return Err(QcapError::DimensionMismatch(format!(
            "subsystem dims {dims:?} (product {prod}) do not match size {len}"
        )));
    }
    Ok(())
}

/// Unit vector with an ordered list of subsystem dimensions.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    amps: Vec<C64>,
    dims: Vec<usize>,
}

impl PureState {
    pub fn new(amps: Vec<C64>, dims: Vec<usize>) -> Result<Self> {
        check_dims(&dims, amps.len())?;
        let norm: f64 = amps.iter().map(|z| z.norm_sqr()).sum();
        if (norm - 1.0).abs() > Tolerance::DEFAULT_ATOL {
            return Err(QcapError::InvalidState(format!("squared norm {norm} is not 1")));
        }
        Ok(Self { amps, dims })
    }

    /// Normalises `amps` first; fails on the zero vector.
    pub fn from_unnormalized(amps: Vec<C64>, dims: Vec<usize>) -> Result<Self> {
        let norm: f64 = amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(QcapError::InvalidState("zero vector".into()));
        }
        Self::new(amps.into_iter().map(|z| z / norm).collect(), dims)
    }

    /// Computational basis vector `|digits⟩`.
    pub fn basis(dims: Vec<usize>, digits: &[usize]) -> Result<Self> {
        if digits.len() != dims.len() || digits.iter().zip(&dims).any(|(x, d)| x >= d) {
            return Err(QcapError::InvalidParameter(format!(
                "basis digits {digits:?} do not fit dims {dims:?}"
            )));
        }
        let total: usize = dims.iter().product();
        let strides = Layout::new(&dims).strides();
        let flat: usize = digits.iter().zip(&strides).map(|(x, s)| x * s).sum();
        let mut amps = vec![C64::new(0.0, 0.0); total];
        amps[flat] = C64::new(1.0, 0.0);
        Self::new(amps, dims)
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn len(&self) -> usize {
        self.amps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amps.is_empty()
    }

    pub fn tensor(&self, other: &Self) -> Self {
        let mut amps = Vec::with_capacity(self.len() * other.len());
        for a in &self.amps {
            amps.extend(other.amps.iter().map(|b| a * b));
        }
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        Self { amps, dims }
    }

    pub fn inner(&self, other: &Self) -> C64 {
        self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum()
    }

    /// Reorders subsystems: new subsystem `k` is old subsystem `perm[k]`.
    pub fn permute_systems(&self, perm: &[usize]) -> Result<Self> {
        check_permutation(perm, self.dims.len())?;
        let map = permutation_map(&self.dims, perm);
        let mut amps = vec![C64::new(0.0, 0.0); self.amps.len()];
        for (old, &new) in map.iter().enumerate() {
            amps[new] = self.amps[old];
        }
        Ok(Self {
            amps,
            dims: perm.iter().map(|&k| self.dims[k]).collect(),
        })
    }

    /// Applies `op` to the listed subsystems (in that order).
    pub fn apply_local(&self, op: &ComplexMatrix, targets: &[usize]) -> Result<Self> {
        check_subsystems(targets, self.dims.len())?;
        let dim_in: usize = targets.iter().map(|&t| self.dims[t]).product();
        if op.rows() != dim_in || op.cols() != dim_in {
            return Err(QcapError::DimensionMismatch(format!(
                "local operator is {}x{}, targets have dimension {dim_in}",
                op.rows(),
                op.cols()
            )));
        }
        let rest: Vec<usize> = (0..self.dims.len()).filter(|k| !targets.contains(k)).collect();
        let mut order = rest.clone();
        order.extend_from_slice(targets);
        let moved = self.permute_systems(&order)?;
        let outer = moved.len() / dim_in;
        let mut amps = Vec::with_capacity(moved.len());
        for chunk in moved.amps.chunks(dim_in) {
            amps.extend(op.apply(chunk));
        }
        debug_assert_eq!(amps.len(), outer * dim_in);
        let out = Self { amps, dims: moved.dims };
        out.permute_systems(&inverse_permutation(&order))
    }

    pub fn to_density(&self) -> DensityMatrix {
        DensityMatrix {
            mat: ComplexMatrix::outer(&self.amps, &self.amps),
            dims: self.dims.clone(),
        }
    }
}

pub(crate) fn inverse_permutation(perm: &[usize]) -> Vec<usize> {
    let mut inv = vec![0; perm.len()];
    for (k, &p) in perm.iter().enumerate() {
        inv[p] = k;
    }
    inv
}

/// Hermitian, positive semidefinite, unit-trace matrix with subsystem dims.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    mat: ComplexMatrix,
    dims: Vec<usize>,
}

impl DensityMatrix {
    pub fn new(mat: ComplexMatrix, dims: Vec<usize>) -> Result<Self> {
        Self::with_tolerance(mat, dims, Tolerance::default())
    }

    /// Validates Hermiticity, unit trace and positivity within `tol`.
    pub fn with_tolerance(mat: ComplexMatrix, dims: Vec<usize>, tol: Tolerance) -> Result<Self> {
        if !mat.is_square() {
            return Err(QcapError::DimensionMismatch(format!(
                "density matrix must be square, got {}x{}",
                mat.rows(),
                mat.cols()
            )));
        }
        check_dims(&dims, mat.rows())?;
        let tr = mat.trace();
        if (tr.re - 1.0).abs() > tol.atol || tr.im.abs() > tol.atol {
            return Err(QcapError::InvalidState(format!("trace {tr} is not 1")));
        }
        let eig = hermitian_eigenvalues(&mat)?;
        if let Some(&min) = eig.first() {
            if min < -tol.atol {
                return Err(QcapError::NegativeEigenvalue(min));
            }
        }
        Ok(Self { mat, dims })
    }

    /// Skips validation; callers guarantee the invariants by construction.
    pub(crate) fn from_parts(mat: ComplexMatrix, dims: Vec<usize>) -> Self {
        debug_assert_eq!(mat.rows(), dims.iter().product::<usize>());
        Self { mat, dims }
    }

    /// `I/d`.
    pub fn maximally_mixed(d: usize) -> Result<Self> {
        if d == 0 {
            return Err(QcapError::ZeroDimension);
        }
        Ok(Self {
            mat: ComplexMatrix::identity(d).scale_real(1.0 / d as f64),
            dims: vec![d],
        })
    }

    /// Diagonal state with the given probabilities on a single register.
    pub fn classical(probs: &[f64]) -> Result<Self> {
        Self::new(ComplexMatrix::diag(probs), vec![probs.len()])
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.mat
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.mat
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn side(&self) -> usize {
        self.mat.rows()
    }

    pub fn tensor(&self, other: &Self) -> Self {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        Self {
            mat: self.mat.kron(&other.mat),
            dims,
        }
    }

    /// Merges all subsystems into one register of the same total dimension.
    pub fn flatten_dims(&self) -> Self {
        Self {
            mat: self.mat.clone(),
            dims: vec![self.side()],
        }
    }

    /// Relabels the register structure; the product must be unchanged.
    pub fn with_dims(&self, dims: Vec<usize>) -> Result<Self> {
        check_dims(&dims, self.side())?;
        Ok(Self {
            mat: self.mat.clone(),
            dims,
        })
    }

    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        hermitian_eigenvalues(&self.mat)
    }

    /// Von Neumann entropy in bits.
    pub fn entropy(&self) -> Result<f64> {
        matrix_entropy(&self.mat)
    }

    /// Reorders subsystems: new subsystem `k` is old subsystem `perm[k]`.
    pub fn permute_systems(&self, perm: &[usize]) -> Result<Self> {
        check_permutation(perm, self.dims.len())?;
        let map = permutation_map(&self.dims, perm);
        let n = self.side();
        let mut mat = ComplexMatrix::zeros(n, n);
        for i in 0..n {
            let row = self.mat.row(i);
            let ni = map[i];
            for (j, &z) in row.iter().enumerate() {
                mat[(ni, map[j])] = z;
            }
        }
        Ok(Self {
            mat,
            dims: perm.iter().map(|&k| self.dims[k]).collect(),
        })
    }

    /// Reduced state on `keep`, in the original relative order of the kept
    /// subsystems.
    pub fn partial_trace(&self, keep: &[usize]) -> Result<Self> {
        if keep.is_empty() {
            return Err(QcapError::EmptySubsystemSet);
        }
        check_subsystems(keep, self.dims.len())?;
        let mut keep = keep.to_vec();
        keep.sort_unstable();
        let traced: Vec<usize> = (0..self.dims.len()).filter(|k| !keep.contains(k)).collect();
        let layout = Layout::new(&self.dims);
        let kept_idx = layout.sub_indices(&keep);
        let traced_idx = layout.sub_indices(&traced);
        let kept_dims: Vec<usize> = keep.iter().map(|&k| self.dims[k]).collect();
        let kd: usize = kept_dims.iter().product();
        let td: usize = traced.iter().map(|&k| self.dims[k]).product();

        // Group flat indices by their traced digits.
        let mut groups = vec![Vec::with_capacity(kd); td];
        for (flat, &t) in traced_idx.iter().enumerate() {
            groups[t].push(flat);
        }
        let mut mat = ComplexMatrix::zeros(kd, kd);
        for g in &groups {
            for &i in g {
                let ki = kept_idx[i];
                for &j in g {
                    mat[(ki, kept_idx[j])] += self.mat[(i, j)];
                }
            }
        }
        Ok(Self { mat, dims: kept_dims })
    }

    /// Completely dephases the listed subsystems in the computational basis.
    pub fn dephase(&self, subsystems: &[usize]) -> Result<Self> {
        check_subsystems(subsystems, self.dims.len())?;
        let key = Layout::new(&self.dims).sub_indices(subsystems);
        let n = self.side();
        let mat = ComplexMatrix::from_fn(n, n, |i, j| {
            if key[i] == key[j] {
                self.mat[(i, j)]
            } else {
                C64::new(0.0, 0.0)
            }
        });
        Ok(Self {
            mat,
            dims: self.dims.clone(),
        })
    }

    /// Conjugates by a unitary acting on the listed subsystems.
    pub fn apply_unitary(&self, u: &ComplexMatrix, targets: &[usize]) -> Result<Self> {
        check_subsystems(targets, self.dims.len())?;
        let dim: usize = targets.iter().map(|&t| self.dims[t]).product();
        let err = u.unitarity_error();
        if u.rows() != dim || err > Tolerance::DEFAULT_ATOL {
            return Err(QcapError::NotUnitary(err));
        }
        let rest: Vec<usize> = (0..self.dims.len()).filter(|k| !targets.contains(k)).collect();
        let mut order = rest;
        order.extend_from_slice(targets);
        let moved = self.permute_systems(&order)?;
        let outer: usize = moved.side() / dim;
        let full = ComplexMatrix::identity(outer).kron(u);
        let mat = full.matmul(&moved.mat).matmul(&full.adjoint());
        Self::from_parts(mat, moved.dims).permute_systems(&inverse_permutation(&order))
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.mat.max_abs_diff(&other.mat)
    }
}
