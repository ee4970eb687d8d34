//! Seeded random matrices and states.
//!
//! All generators draw from ChaCha8 so a fixed seed gives bit-identical
//! output on every platform and run.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::{ComplexMatrix, DensityMatrix, PureState, C64};

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent stream `stream` of the generator seeded with `seed`.
pub fn rng_stream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im)
}

fn gaussian_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> ComplexMatrix {
    let data = (0..rows * cols).map(|_| complex_gaussian(rng)).collect();
    ComplexMatrix::from_vec(rows, cols, data)
}

/// Orthonormalises the columns of `m` in place (two Gram-Schmidt passes).
fn orthonormalize_columns(m: &mut ComplexMatrix) {
    let (rows, cols) = (m.rows(), m.cols());
    assert!(cols <= rows, "cannot orthonormalise more columns than rows");
    for j in 0..cols {
        for _ in 0..2 {
            for k in 0..j {
                let proj: C64 = (0..rows).map(|i| m[(i, k)].conj() * m[(i, j)]).sum();
                for i in 0..rows {
                    let v = m[(i, k)];
                    m[(i, j)] -= proj * v;
                }
            }
        }
        let norm = (0..rows).map(|i| m[(i, j)].norm_sqr()).sum::<f64>().sqrt();
        for i in 0..rows {
            m[(i, j)] /= norm;
        }
    }
}

/// Haar-random `rows x cols` isometry (`cols <= rows`).
pub fn random_isometry<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> ComplexMatrix {
    let mut m = gaussian_matrix(rows, cols, rng);
    orthonormalize_columns(&mut m);
    m
}

/// Haar-random unitary drawn from `rng`.
///
/// Gram-Schmidt on a complex Ginibre matrix is QR with a positive diagonal,
/// which gives exactly the Haar measure.
pub fn haar_unitary_from<R: Rng + ?Sized>(d: usize, rng: &mut R) -> ComplexMatrix {
    random_isometry(d, d, rng)
}

/// Haar-random `d x d` unitary, deterministic in `seed`.
pub fn haar_unitary(d: usize, seed: u64) -> ComplexMatrix {
    haar_unitary_from(d, &mut rng_from_seed(seed))
}

pub fn random_pure_state<R: Rng + ?Sized>(dims: &[usize], rng: &mut R) -> PureState {
    let n: usize = dims.iter().product();
    let amps = (0..n).map(|_| complex_gaussian(rng)).collect();
    PureState::from_unnormalized(amps, dims.to_vec()).expect("gaussian vector is nonzero")
}

/// Random mixed state of rank at most `rank`, obtained by tracing out a
/// `rank`-dimensional purifying system.
pub fn random_density<R: Rng + ?Sized>(dims: &[usize], rank: usize, rng: &mut R) -> DensityMatrix {
    let n: usize = dims.iter().product();
    let g = gaussian_matrix(n, rank.max(1), rng);
    let mut m = g.matmul(&g.adjoint());
    let tr = m.trace().re;
    m = m.scale_real(1.0 / tr);
    // Exact Hermitian symmetry for the validation below.
    let m = ComplexMatrix::from_fn(n, n, |i, j| (m[(i, j)] + m[(j, i)].conj()) * 0.5);
    DensityMatrix::new(m, dims.to_vec()).expect("Wishart matrix is a valid state")
}

/// Random Hermitian matrix with Gaussian entries.
pub fn random_hermitian<R: Rng + ?Sized>(n: usize, rng: &mut R) -> ComplexMatrix {
    let g = gaussian_matrix(n, n, rng);
    ComplexMatrix::from_fn(n, n, |i, j| (g[(i, j)] + g[(j, i)].conj()) * 0.5)
}
