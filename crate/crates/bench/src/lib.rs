//! Fixtures shared by the benchmarks.

use qecverify::channels::random_ampliate_channel;
use qecverify::{KrausChannel, SpaceDecomposition};

/// A channel from the ampliate family on `dim_a ⊗ dim_b` with two perp dimensions.
pub fn ampliate_fixture(
    dim_a: usize,
    dim_b: usize,
    dim_b1: usize,
    seed: u64,
) -> (KrausChannel, SpaceDecomposition) {
    let d = SpaceDecomposition::new(dim_a, dim_b, dim_b1, 2).expect("valid decomposition");
    let e = random_ampliate_channel(&d, 2, seed).expect("generator succeeds");
    (e, d)
}
