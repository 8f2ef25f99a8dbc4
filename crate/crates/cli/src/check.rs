//! The `check` subcommand: seeded self-tests of the crate's two load-bearing
//! guarantees — primal/dual free-energy agreement and the reversibility of
//! the Metropolis kernel — plus basic probability sanity, run against fresh
//! random landscapes rather than fixtures.

use rand::Rng;

use landscape_core::duality::{fenchel_h_to_f, structure_function};
use landscape_core::rng::stream_rng;
use landscape_core::sampler::{detailed_balance_check, transition_matrix, ProposalKernel};
use landscape_core::thermo::{free_energy_zero_t, gibbs, ActionParams};
use landscape_core::ModelSpace;

/// Stream id for self-test landscapes; distinct from the noise and chain
/// streams used by experiments.
const STREAM_CHECK: u64 = 3;

/// Result of one self-test: its name, verdict, and the measured worst case.
#[derive(Debug, Clone)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn random_space(rng: &mut impl Rng) -> ModelSpace {
    let n = rng.random_range(2..=12);
    let mut pairs = Vec::with_capacity(n);
    let mut complexity = rng.random_range(0..3u32);
    for _ in 0..n {
        pairs.push((complexity, 10.0 * rng.random::<f64>()));
        complexity += rng.random_range(1..=3u32);
    }
    ModelSpace::synthetic(&pairs).expect("strictly increasing complexities")
}

fn lambda_probes(rng: &mut impl Rng) -> Vec<f64> {
    let mut probes: Vec<f64> = (0..20).map(|_| 5.0 * rng.random::<f64>()).collect();
    probes.push(0.0);
    probes
}

fn duality_check(rng: &mut impl Rng) -> CheckOutcome {
    let mut mismatches = 0usize;
    let mut total = 0usize;
    for _ in 0..40 {
        let space = random_space(rng);
        let sf = structure_function(&space);
        for lambda in lambda_probes(rng) {
            let primal = free_energy_zero_t(&space, lambda).0;
            let dual = fenchel_h_to_f(&sf, lambda);
            total += 1;
            if primal.to_bits() != dual.to_bits() {
                mismatches += 1;
            }
        }
    }
    CheckOutcome {
        name: "duality",
        passed: mismatches == 0,
        detail: format!("{mismatches}/{total} primal/dual evaluations differ bitwise"),
    }
}

fn gibbs_check(rng: &mut impl Rng) -> CheckOutcome {
    let mut worst = 0.0f64;
    for _ in 0..40 {
        let space = random_space(rng);
        let params = ActionParams {
            lambda: 3.0 * rng.random::<f64>(),
            temperature: 0.2 + 3.0 * rng.random::<f64>(),
        };
        match gibbs(&space, params) {
            Ok(dist) => {
                let sum: f64 = dist.probabilities.iter().sum();
                worst = worst.max((sum - 1.0).abs());
                if dist.probabilities.iter().any(|p| !(0.0..=1.0).contains(p)) {
                    worst = f64::INFINITY;
                }
            }
            Err(_) => worst = f64::INFINITY,
        }
    }
    CheckOutcome {
        name: "gibbs normalization",
        passed: worst <= 1e-12,
        detail: format!("max |sum(pi) - 1| = {worst:.3e}"),
    }
}

fn row_sum_check(rng: &mut impl Rng) -> CheckOutcome {
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let space = random_space(rng);
        for kernel in [ProposalKernel::NeighborStep, ProposalKernel::UniformJump] {
            let params = (2.0 * rng.random::<f64>(), 0.3 + 2.0 * rng.random::<f64>());
            match transition_matrix(&space, kernel, params.0, params.1) {
                Ok(matrix) => {
                    for i in 0..matrix.nrows() {
                        let sum: f64 = matrix.row(i).iter().sum();
                        worst = worst.max((sum - 1.0).abs());
                    }
                }
                Err(_) => worst = f64::INFINITY,
            }
        }
    }
    CheckOutcome {
        name: "transition row sums",
        passed: worst <= 1e-12,
        detail: format!("max |row sum - 1| = {worst:.3e}"),
    }
}

fn balance_check(rng: &mut impl Rng) -> CheckOutcome {
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let space = random_space(rng);
        for kernel in [ProposalKernel::NeighborStep, ProposalKernel::UniformJump] {
            for (lambda, temperature) in [(0.0, 1.0), (0.5, 0.5), (2.0, 4.0)] {
                match detailed_balance_check(&space, kernel, lambda, temperature) {
                    Ok(violation) => worst = worst.max(violation),
                    Err(_) => worst = f64::INFINITY,
                }
            }
        }
    }
    CheckOutcome {
        name: "detailed balance",
        passed: worst <= 1e-12,
        detail: format!("max |pi_i P_ij - pi_j P_ji| = {worst:.3e}"),
    }
}

/// Runs every self-test against landscapes drawn from `seed`. The caller
/// prints the outcomes and converts any failure into exit code 3.
pub fn run_checks(seed: u64) -> Vec<CheckOutcome> {
    let mut rng = stream_rng(seed, STREAM_CHECK);
    vec![
        duality_check(&mut rng),
        gibbs_check(&mut rng),
        row_sum_check(&mut rng),
        balance_check(&mut rng),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_checks_pass_on_default_seed() {
        let outcomes = run_checks(42);
        assert_eq!(outcomes.len(), 4);
        for outcome in &outcomes {
            assert!(outcome.passed, "{}: {}", outcome.name, outcome.detail);
        }
    }

    #[test]
    fn checks_are_deterministic() {
        let a: Vec<String> = run_checks(7).into_iter().map(|o| o.detail).collect();
        let b: Vec<String> = run_checks(7).into_iter().map(|o| o.detail).collect();
        assert_eq!(a, b);
    }

    #[test]
    fn seeds_vary_the_landscapes() {
        let a: Vec<String> = run_checks(1).into_iter().map(|o| o.detail).collect();
        let b: Vec<String> = run_checks(2).into_iter().map(|o| o.detail).collect();
        assert_ne!(a, b);
    }
}
