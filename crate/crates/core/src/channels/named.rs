use rand::Rng;

use super::kraus::{flagged_mixture, FlaggedBranch, KrausChannel};
use crate::error::{QcapError, Result};
use crate::qmat::ops::controlled_phase;
use crate::qmat::random::{haar_unitary_from, random_isometry, rng_from_seed};
use crate::qmat::{ComplexMatrix, Tolerance, C64};

/// Default number of sampled `(U, V)` pairs standing in for the 2-design average.
pub const DEFAULT_ROCKET_SAMPLES: usize = 4;

pub fn identity(d: usize) -> KrausChannel {
    KrausChannel::from_kraus_unchecked(vec![ComplexMatrix::identity(d)], vec![d], vec![d])
}

/// Replaces every input by `|0⟩⟨0|`.
pub fn constant(d: usize) -> KrausChannel {
    let ops = (0..d).map(|i| ComplexMatrix::unit(d, d, 0, i)).collect();
    KrausChannel::from_kraus_unchecked(ops, vec![d], vec![d])
}

/// Completely dephasing channel in the computational basis.
pub fn dephasing(d: usize) -> KrausChannel {
    let ops = (0..d).map(|i| ComplexMatrix::unit(d, d, i, i)).collect();
    KrausChannel::from_kraus_unchecked(ops, vec![d], vec![d])
}

/// Erasure channel `(1-p) ρ + p |e⟩⟨e|` from `d` into `d + 1` levels; the
/// flag `|e⟩` is the last basis vector.
pub fn erasure(d: usize, p: f64) -> Result<KrausChannel> {
    if d == 0 {
        return Err(QcapError::ZeroDimension);
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(QcapError::InvalidProbability(p));
    }
    let mut ops = Vec::with_capacity(d + 1);
    let keep = ComplexMatrix::from_fn(d + 1, d, |i, j| {
        C64::new(if i == j { (1.0 - p).sqrt() } else { 0.0 }, 0.0)
    });
    ops.push(keep);
    for i in 0..d {
        ops.push(ComplexMatrix::unit(d + 1, d, d, i).scale_real(p.sqrt()));
    }
    Ok(KrausChannel::from_kraus_unchecked(ops, vec![d], vec![d + 1]))
}

/// Rocket channel for fixed unitaries: `ρ ↦ tr_C (P (U⊗V) ρ (U⊗V)† P†)` on
/// registers `(C, D)`, output `D`. The constant classical record of `(U, V)`
/// is not included; [`rocket_sampled`] carries it as the branch index.
pub fn rocket_conditional(d: usize, u: &ComplexMatrix, v: &ComplexMatrix) -> Result<KrausChannel> {
    if d == 0 {
        return Err(QcapError::ZeroDimension);
    }
    for m in [u, v] {
        let err = m.unitarity_error();
        if m.rows() != d || err > Tolerance::DEFAULT_ATOL {
            return Err(QcapError::NotUnitary(err));
        }
    }
    let puv = controlled_phase(d).matmul(&u.kron(v));
    let ops = (0..d)
        .map(|c| {
            let rows: Vec<usize> = (c * d..(c + 1) * d).collect();
            let cols: Vec<usize> = (0..d * d).collect();
            puv.select(&rows, &cols)
        })
        .collect();
    Ok(KrausChannel::from_kraus_unchecked(ops, vec![d, d], vec![d]))
}

/// The `n` Haar-sampled `(U, V)` pairs used by [`rocket_sampled`] for `seed`.
pub fn rocket_unitaries(d: usize, n: usize, seed: u64) -> Vec<(ComplexMatrix, ComplexMatrix)> {
    let mut rng = rng_from_seed(seed);
    (0..n)
        .map(|_| {
            let u = haar_unitary_from(d, &mut rng);
            let v = haar_unitary_from(d, &mut rng);
            (u, v)
        })
        .collect()
}

/// Uniform flagged mixture of `n_samples` conditional rocket channels with
/// Haar-random `(U, V)`.
pub fn rocket_sampled(d: usize, n_samples: usize, seed: u64) -> Result<KrausChannel> {
    if n_samples == 0 {
        return Err(QcapError::InvalidParameter("n_samples must be at least 1".into()));
    }
    let w = 1.0 / n_samples as f64;
    let branches = rocket_unitaries(d, n_samples, seed)
        .iter()
        .map(|(u, v)| rocket_conditional(d, u, v).map(|ch| FlaggedBranch::new(w, ch)))
        .collect::<Result<Vec<_>>>()?;
    flagged_mixture(branches)
}

/// Random channel from a Haar isometry `d_in → d_out · n_kraus`, cut into
/// `n_kraus` blocks. Requires `d_out * n_kraus >= d_in`.
pub fn random_channel<R: Rng + ?Sized>(d_in: usize, d_out: usize, n_kraus: usize, rng: &mut R) -> KrausChannel {
    assert!(d_out * n_kraus >= d_in, "isometry needs d_out * n_kraus >= d_in");
    let v = random_isometry(d_out * n_kraus, d_in, rng);
    let cols: Vec<usize> = (0..d_in).collect();
    let ops = (0..n_kraus)
        .map(|k| {
            let rows: Vec<usize> = (k * d_out..(k + 1) * d_out).collect();
            v.select(&rows, &cols)
        })
        .collect();
    KrausChannel::from_kraus_unchecked(ops, vec![d_in], vec![d_out])
}
