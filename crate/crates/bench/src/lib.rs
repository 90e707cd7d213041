//! Instance sets shared by the criterion benches.

use qip_core::fuzz::{random_qip, FuzzConfig};
use qip_core::generators::{gen_mcn, gen_qrandomparity, Graph, McnBudgets};
use qip_core::QipInstance;

/// QRandomParity instances, one per seed.
pub fn qrp_set(n: usize, seeds: u64) -> Vec<QipInstance> {
    (0..seeds)
        .map(|s| gen_qrandomparity(n, s).expect("n >= 2"))
        .collect()
}

/// MCN on a G(n, p) graph with unit budgets.
pub fn mcn_instance(vertices: usize, density: f64, seed: u64) -> QipInstance {
    let g = Graph::random(vertices, density, seed);
    gen_mcn(
        &g,
        McnBudgets {
            omega: 1,
            phi: 1,
            lambda: 1,
        },
    )
    .expect("unit budgets fit any graph with a vertex")
}

pub fn fuzz_set(seeds: u64) -> Vec<QipInstance> {
    let cfg = FuzzConfig::default();
    (0..seeds).map(|s| random_qip(s, &cfg)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sets_have_the_requested_size() {
        assert_eq!(qrp_set(4, 3).len(), 3);
        assert_eq!(fuzz_set(5).len(), 5);
        assert_eq!(mcn_instance(5, 0.3, 1).variables().len(), 20);
    }
}
