//! Hermitian spectra and von Neumann entropies.
//!
//! Dense Hermitian eigenproblems go through nalgebra's tridiagonal solver.
//! Before solving, the matrix is split into the connected components of its
//! exact nonzero pattern; block-diagonal states (erasure flags, direct-sum
//! outputs, classical registers) then decompose into many small problems.

use super::{ComplexMatrix, DensityMatrix, Tolerance, C64};
use crate::error::{QcapError, Result};

/// Connected components of the graph with an edge wherever `m[i][j] != 0`.
fn components(m: &ComplexMatrix) -> Vec<Vec<usize>> {
    let n = m.rows();
    let mut label = vec![usize::MAX; n];
    let mut out = Vec::new();
    let mut stack = Vec::new();
    for start in 0..n {
        if label[start] != usize::MAX {
            continue;
        }
        let id = out.len();
        let mut members = Vec::new();
        label[start] = id;
        stack.push(start);
        while let Some(i) = stack.pop() {
            members.push(i);
            let row = m.row(i);
            for (j, z) in row.iter().enumerate() {
                if label[j] == usize::MAX && (z.re != 0.0 || z.im != 0.0) {
                    label[j] = id;
                    stack.push(j);
                }
            }
        }
        members.sort_unstable();
        out.push(members);
    }
    out
}

fn check_hermitian(m: &ComplexMatrix, tol: Tolerance) -> Result<()> {
    if !m.is_square() {
        return Err(QcapError::DimensionMismatch(format!(
            "expected a square matrix, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    let err = m.hermiticity_error();
    if err > tol.atol * m.max_abs().max(1.0) {
        return Err(QcapError::NotHermitian(err));
    }
    Ok(())
}

fn block_eigenvalues(block: &ComplexMatrix) -> Vec<f64> {
    match block.rows() {
        0 => vec![],
        1 => vec![block[(0, 0)].re],
        _ => {
            // Symmetrise so the solver only ever sees an exactly Hermitian input.
            let h = block.to_nalgebra();
            let h = (&h + h.adjoint()) * C64::new(0.5, 0.0);
            h.symmetric_eigenvalues().iter().copied().collect()
        }
    }
}

/// Real eigenvalues of a Hermitian matrix, ascending.
pub fn hermitian_eigenvalues(m: &ComplexMatrix) -> Result<Vec<f64>> {
    hermitian_eigenvalues_with(m, Tolerance::default())
}

pub fn hermitian_eigenvalues_with(m: &ComplexMatrix, tol: Tolerance) -> Result<Vec<f64>> {
    check_hermitian(m, tol)?;
    let mut eig = Vec::with_capacity(m.rows());
    for comp in components(m) {
        if comp.len() == 1 {
            eig.push(m[(comp[0], comp[0])].re);
        } else {
            eig.extend(block_eigenvalues(&m.select(&comp, &comp)));
        }
    }
    eig.sort_by(f64::total_cmp);
    Ok(eig)
}

/// Eigenvalues (ascending) with matching normalised eigenvectors.
pub fn hermitian_eigen(m: &ComplexMatrix) -> Result<(Vec<f64>, Vec<Vec<C64>>)> {
    check_hermitian(m, Tolerance::default())?;
    let n = m.rows();
    let mut pairs: Vec<(f64, Vec<C64>)> = Vec::with_capacity(n);
    for comp in components(m) {
        let block = m.select(&comp, &comp);
        let h = block.to_nalgebra();
        let h = (&h + h.adjoint()) * C64::new(0.5, 0.0);
        let se = h.symmetric_eigen();
        for (k, &val) in se.eigenvalues.iter().enumerate() {
            let mut v = vec![C64::new(0.0, 0.0); n];
            for (local, &global) in comp.iter().enumerate() {
                v[global] = se.eigenvectors[(local, k)];
            }
            pairs.push((val, v));
        }
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(pairs.into_iter().unzip())
}

/// Shannon/von Neumann entropy in bits of a spectrum.
///
/// Values in `[-atol, 0]` are treated as numerical noise and clamped to zero;
/// anything more negative is rejected.
pub fn entropy_of_spectrum(eigenvalues: &[f64]) -> Result<f64> {
    entropy_of_spectrum_with(eigenvalues, Tolerance::default())
}

pub fn entropy_of_spectrum_with(eigenvalues: &[f64], tol: Tolerance) -> Result<f64> {
    let mut h = 0.0;
    for &l in eigenvalues {
        if l < -tol.atol {
            return Err(QcapError::NegativeEigenvalue(l));
        }
        if l > 0.0 {
            h -= l * l.log2();
        }
    }
    Ok(h.max(0.0))
}

/// `H(ρ) = -tr ρ log₂ ρ`.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> Result<f64> {
    entropy_of_spectrum(&hermitian_eigenvalues(rho.matrix())?)
}

/// Entropy of a Hermitian PSD matrix that is already known to be a state.
pub(crate) fn matrix_entropy(m: &ComplexMatrix) -> Result<f64> {
    entropy_of_spectrum(&hermitian_eigenvalues(m)?)
}

/// Shannon entropy in bits of a probability vector (zeros allowed).
pub fn shannon_entropy(probs: &[f64]) -> f64 {
    probs.iter().filter(|&&p| p > 0.0).map(|&p| -p * p.log2()).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qmat::random::random_hermitian;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn diagonal_spectrum() {
        let m = ComplexMatrix::diag(&[0.75, 0.25]);
        assert_eq!(hermitian_eigenvalues(&m).unwrap(), vec![0.25, 0.75]);
    }

    #[test]
    fn rank_one_projector() {
        let v: Vec<C64> = (0..5).map(|i| C64::new(i as f64, 1.0 - i as f64)).collect();
        let norm: f64 = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let v: Vec<C64> = v.iter().map(|z| z / norm).collect();
        let p = ComplexMatrix::outer(&v, &v);
        let eig = hermitian_eigenvalues(&p).unwrap();
        for l in &eig[..4] {
            assert!(l.abs() < 1e-12);
        }
        assert!((eig[4] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn eigenvalues_sum_to_trace() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in [2, 5, 17, 40] {
            let h = random_hermitian(n, &mut rng);
            let eig = hermitian_eigenvalues(&h).unwrap();
            let direct: f64 = (0..n).map(|i| h[(i, i)].re).sum();
            assert!((eig.iter().sum::<f64>() - direct).abs() < 1e-10);
        }
    }

    #[test]
    fn block_split_matches_unsplit_solver() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = random_hermitian(4, &mut rng);
        let b = random_hermitian(3, &mut rng);
        // Interleave the two blocks so the split has to find them.
        let perm = [0, 4, 1, 5, 2, 6, 3];
        let mut m = ComplexMatrix::zeros(7, 7);
        for i in 0..7 {
            for j in 0..7 {
                let (pi, pj) = (perm[i], perm[j]);
                m[(pi, pj)] = match (i < 4, j < 4) {
                    (true, true) => a[(i, j)],
                    (false, false) => b[(i - 4, j - 4)],
                    _ => C64::new(0.0, 0.0),
                };
            }
        }
        let split = hermitian_eigenvalues(&m).unwrap();
        let mut full: Vec<f64> = m.to_nalgebra().symmetric_eigenvalues().iter().copied().collect();
        full.sort_by(f64::total_cmp);
        for (x, y) in split.iter().zip(&full) {
            assert!((x - y).abs() < 1e-10);
        }
    }

    #[test]
    fn eigenvectors_reconstruct_matrix() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let h = random_hermitian(6, &mut rng);
        let (vals, vecs) = hermitian_eigen(&h).unwrap();
        let mut rebuilt = ComplexMatrix::zeros(6, 6);
        for (l, v) in vals.iter().zip(&vecs) {
            rebuilt.add_scaled(&ComplexMatrix::outer(v, v), C64::new(*l, 0.0));
        }
        assert!(rebuilt.max_abs_diff(&h) < 1e-10);
    }

    #[test]
    fn non_hermitian_rejected() {
        let m = ComplexMatrix::from_vec(
            2,
            2,
            vec![
                C64::new(1.0, 0.0),
                C64::new(1.0, 0.0),
                C64::new(0.0, 0.0),
                C64::new(1.0, 0.0),
            ],
        );
        assert!(matches!(hermitian_eigenvalues(&m), Err(QcapError::NotHermitian(_))));
    }

    #[test]
    fn entropy_clamp_window() {
        assert_eq!(entropy_of_spectrum(&[-5e-8, 1.0]).unwrap(), 0.0);
        assert!(matches!(
            entropy_of_spectrum(&[-1e-6, 1.0]),
            Err(QcapError::NegativeEigenvalue(_))
        ));
        assert!((entropy_of_spectrum(&[0.5, 0.5, 0.0, 0.0]).unwrap() - 1.0).abs() < 1e-15);
    }
}
