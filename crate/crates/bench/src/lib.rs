//! Shared inputs for the solver benchmarks.

use num_complex::Complex64;
use twophoton::{auto_cutoff, EffectiveParams, LindbladGenerator, Parity, ParityBlock};

/// Resonant pump rates the benches are parameterised over.
pub const PUMPS: [f64; 3] = [2.0, 10.0, 40.0];

pub fn params(g: f64) -> EffectiveParams {
    EffectiveParams::new(g, 1.0, 0.5 * g).expect("benchmark parameters are valid")
}

/// Generator at the automatic cutoff and its even-even block.
pub fn even_block(g: f64) -> (LindbladGenerator, ParityBlock) {
    let p = params(g);
    let dim = auto_cutoff(&p);
    let generator = LindbladGenerator::new(p, dim).expect("cutoff is valid");
    (generator, ParityBlock::new(dim, Parity::Even, Parity::Even))
}

/// Smooth block input with geometric decay away from the vacuum corner.
pub fn block_input(block: &ParityBlock) -> Vec<Complex64> {
    (0..block.len())
        .map(|k| {
            let (p, q) = (k / block.ncols, k % block.ncols);
            Complex64::new(0.9f64.powi((p + q) as i32), 0.01 * (p as f64 - q as f64))
        })
        .collect()
}
