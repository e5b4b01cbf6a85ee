//! Fixtures shared by the benchmarks.

use addfield::kernels::{Grid1D, KernelSpec};
use addfield::{AdditiveField, CirculantSampler};

/// Planar Gaussian field on `[0, r]²` at spacing `eps`.
pub fn planar_field(r: f64, eps: f64, seed: u64) -> AdditiveField {
    let grid = Grid1D::covering(0.0, r, eps).expect("grid");
    let sampler = CirculantSampler::new(&KernelSpec::standard_gaussian(), &grid).expect("sampler");
    AdditiveField::planar(sampler.sample(seed), sampler.sample(seed ^ 0x9e37_79b9))
}
