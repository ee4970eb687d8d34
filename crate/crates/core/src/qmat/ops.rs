use std::f64::consts::PI;

use super::{ComplexMatrix, DensityMatrix, PureState, C64};
use crate::error::{QcapError, Result};

/// Primitive `d`-th root of unity raised to `k`, `exp(2πi k/d)`.
pub fn omega_pow(d: usize, k: usize) -> C64 {
    C64::from_polar(1.0, 2.0 * PI * ((k % d) as f64) / d as f64)
}

/// `(1/√d) Σ_i |ii⟩` on dims `(d, d)`.
pub fn max_entangled(d: usize) -> Result<PureState> {
    if d == 0 {
        return Err(QcapError::ZeroDimension);
    }
    let amp = C64::new(1.0 / (d as f64).sqrt(), 0.0);
    let mut amps = vec![C64::new(0.0, 0.0); d * d];
    for i in 0..d {
        amps[i * d + i] = amp;
    }
    PureState::new(amps, vec![d, d])
}

/// Shift `X(x)|j⟩ = |j+x mod d⟩`.
pub fn shift(d: usize, x: usize) -> ComplexMatrix {
    weyl(d, x, 0)
}

/// Clock `Z(z)|j⟩ = ω^{zj}|j⟩`.
pub fn clock(d: usize, z: usize) -> ComplexMatrix {
    weyl(d, 0, z)
}

/// Weyl operator `W(x,z) = X(x) Z(z)`, so `W(x,z)|j⟩ = ω^{zj} |j+x⟩`.
/// Both labels are taken mod `d`.
pub fn weyl(d: usize, x: usize, z: usize) -> ComplexMatrix {
    assert!(d >= 1, "dimension must be at least 1");
    let mut m = ComplexMatrix::zeros(d, d);
    for j in 0..d {
        m[((j + x) % d, j)] = omega_pow(d, (z % d) * j);
    }
    m
}

/// Joint phase `P = Σ_ij ω^{ij} |i⟩⟨i| ⊗ |j⟩⟨j|` on `d ⊗ d`.
pub fn controlled_phase(d: usize) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(d * d, d * d);
    for i in 0..d {
        for j in 0..d {
            m[(i * d + j, i * d + j)] = omega_pow(d, i * j);
        }
    }
    m
}

/// Completely dephases the listed subsystems of `rho`.
pub fn dephase(rho: &DensityMatrix, subsystems: &[usize]) -> Result<DensityMatrix> {
    rho.dephase(subsystems)
}

/// Reduced state on `keep`.
pub fn partial_trace(rho: &DensityMatrix, keep: &[usize]) -> Result<DensityMatrix> {
    rho.partial_trace(keep)
}
