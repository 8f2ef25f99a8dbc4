//! Metropolis dynamics over a model space: symmetric proposal kernels, the
//! exact transition matrix and its detailed-balance check against the Gibbs
//! distribution, empirical stationary distributions, and simulated annealing
//! on a geometric temperature schedule.

use std::path::Path;

use nalgebra::DMatrix;
use rand::Rng;

use crate::rng::{stream_rng, STREAM_CHAIN};
use crate::space::ModelSpace;
use crate::thermo::{self, ActionParams};
use crate::{Error, Result};

/// Symmetric proposal distributions `Q(S→S') = Q(S'→S)`.
///
/// `NeighborStep` moves ±1 in index and reflects at the boundaries as a
/// self-loop proposal (each out-of-range direction proposes the current
/// state), which keeps `Q` symmetric for every state count. `UniformJump`
/// proposes uniformly among all other states and is irreducible and
/// aperiodic on any space with ≥ 2 states.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProposalKernel {
    NeighborStep,
    UniformJump,
}

impl ProposalKernel {
    /// Maps one uniform draw `u ∈ [0,1)` to a proposed index.
    pub fn propose(self, current: usize, n: usize, u: f64) -> usize {
        debug_assert!(current < n);
        debug_assert!((0.0..1.0).contains(&u));
        if n == 1 {
            return 0;
        }
        match self {
            ProposalKernel::NeighborStep => {
                if u < 0.5 {
                    if current == 0 {
                        0
                    } else {
                        current - 1
                    }
                } else if current == n - 1 {
                    n - 1
                } else {
                    current + 1
                }
            }
            ProposalKernel::UniformJump => {
                let j = (u * (n - 1) as f64) as usize;
                // Clamp guards u rounding up to exactly n−1 candidates.
                let j = j.min(n - 2);
                if j >= current {
                    j + 1
                } else {
                    j
                }
            }
        }
    }

    /// Exact proposal probability `Q(from → to)` on `n` states.
    pub fn probability(self, from: usize, to: usize, n: usize) -> f64 {
        debug_assert!(from < n && to < n);
        if n == 1 {
            return 1.0;
        }
        match self {
            ProposalKernel::NeighborStep => {
                if to == from {
                    let mut p = 0.0;
                    if from == 0 {
                        p += 0.5;
                    }
                    if from == n - 1 {
                        p += 0.5;
                    }
                    p
                } else if to + 1 == from || from + 1 == to {
                    0.5
                } else {
                    0.0
                }
            }
            ProposalKernel::UniformJump => {
                if to == from {
                    0.0
                } else {
                    1.0 / (n - 1) as f64
                }
            }
        }
    }
}

fn validate_sampler_params(space: &ModelSpace, lambda: f64, temperature: f64) -> Result<()> {
    if !temperature.is_finite() || temperature <= 0.0 {
        return Err(Error::NonPositiveTemperature(temperature));
    }
    if !lambda.is_finite() || lambda < 0.0 {
        return Err(Error::InvalidSampler(format!(
            "lambda must be finite and nonnegative, got {lambda}"
        )));
    }
    debug_assert!(!space.is_empty());
    Ok(())
}

/// One Metropolis step: propose via the kernel, accept with probability
/// `min{1, exp(−ΔA/T)}`. Returns the next index and whether the proposal was
/// accepted.
///
/// Always consumes exactly two RNG draws — one for the proposal, one for the
/// acceptance — even when the acceptance test is a foregone conclusion, so
/// chain positions stay aligned across landscapes and seeds.
pub fn metropolis_step<R: Rng>(
    space: &ModelSpace,
    kernel: ProposalKernel,
    lambda: f64,
    temperature: f64,
    current: usize,
    rng: &mut R,
) -> Result<(usize, bool)> {
    validate_sampler_params(space, lambda, temperature)?;
    let n = space.len();
    if current >= n {
        return Err(Error::InvalidSampler(format!(
            "state index {current} out of range for {n} states"
        )));
    }
    let u_propose = rng.random::<f64>();
    let u_accept = rng.random::<f64>();
    let proposal = kernel.propose(current, n, u_propose);
    let delta = thermo::action(&space.points()[proposal], lambda)
        - thermo::action(&space.points()[current], lambda);
    // exp(−Δ/T) ≥ 1 whenever Δ ≤ 0 and u < 1, so no separate branch is
    // needed for the always-accept case.
    let accepted = u_accept < (-delta / temperature).exp();
    Ok((if accepted { proposal } else { current }, accepted))
}

/// Exact Metropolis transition matrix: off-diagonals
/// `Q(i→j)·min{1, exp(−(A_j−A_i)/T)}`, diagonal absorbing the rejection
/// mass. Rows sum to 1 within accumulation error.
pub fn transition_matrix(
    space: &ModelSpace,
    kernel: ProposalKernel,
    lambda: f64,
    temperature: f64,
) -> Result<DMatrix<f64>> {
    const LIMIT: usize = 1000;
    validate_sampler_params(space, lambda, temperature)?;
    let n = space.len();
    if n > LIMIT {
        return Err(Error::SpaceTooLarge {
            size: n,
            limit: LIMIT,
        });
    }
    let actions = thermo::actions(space, lambda);
    let mut matrix = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        let mut off_diagonal = 0.0;
        for j in 0..n {
            if i == j {
                continue;
            }
            let q = kernel.probability(i, j, n);
            if q > 0.0 {
                let accept = ((actions[i] - actions[j]) / temperature).exp().min(1.0);
                let p = q * accept;
                matrix[(i, j)] = p;
                off_diagonal += p;
            }
        }
        // Rounding can push the rejection mass a few ulps below zero.
        matrix[(i, i)] = (1.0 - off_diagonal).max(0.0);
    }
    Ok(matrix)
}

/// Max over ordered state pairs of `|π_i P_ij − π_j P_ji|`.
pub fn balance_violation(pi: &[f64], matrix: &DMatrix<f64>) -> f64 {
    let n = pi.len();
    debug_assert_eq!(matrix.nrows(), n);
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let gap = (pi[i] * matrix[(i, j)] - pi[j] * matrix[(j, i)]).abs();
            worst = worst.max(gap);
        }
    }
    worst
}

/// Detailed-balance residual of the exact transition matrix against the
/// Gibbs distribution; the reversibility argument predicts 0, and floating
/// point delivers ≤ 1e−12 for moderate spaces.
pub fn detailed_balance_check(
    space: &ModelSpace,
    kernel: ProposalKernel,
    lambda: f64,
    temperature: f64,
) -> Result<f64> {
    let matrix = transition_matrix(space, kernel, lambda, temperature)?;
    let dist = thermo::gibbs(
        space,
        ActionParams {
            lambda,
            temperature,
        },
    )?;
    Ok(balance_violation(&dist.probabilities, &matrix))
}

/// Visit frequencies of a Metropolis chain started at state 0, counting the
/// post-step state of every step at index ≥ `burn_in`. Deterministic given
/// `seed`.
pub fn stationary_distribution_empirical(
    space: &ModelSpace,
    kernel: ProposalKernel,
    lambda: f64,
    temperature: f64,
    n_steps: u64,
    burn_in: u64,
    seed: u64,
) -> Result<Vec<f64>> {
    validate_sampler_params(space, lambda, temperature)?;
    if n_steps <= burn_in {
        return Err(Error::InvalidSampler(format!(
            "n_steps ({n_steps}) must exceed burn_in ({burn_in})"
        )));
    }
    let mut rng = stream_rng(seed, STREAM_CHAIN);
    let mut state = 0usize;
    let mut visits = vec![0u64; space.len()];
    for step in 0..n_steps {
        let (next, _) = metropolis_step(space, kernel, lambda, temperature, state, &mut rng)?;
        state = next;
        if step >= burn_in {
            visits[state] += 1;
        }
    }
    let kept = (n_steps - burn_in) as f64;
    Ok(visits.iter().map(|&v| v as f64 / kept).collect())
}

/// Total variation distance `½ Σ |a_i − b_i|` between two probability
/// vectors.
pub fn total_variation(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    0.5 * a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>()
}

/// Geometric cooling schedule and chain parameters for simulated annealing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnnealingConfig {
    pub t0: f64,
    pub t_min: f64,
    pub gamma: f64,
    pub steps_per_temperature: u32,
    pub lambda: f64,
    pub seed: u64,
}

impl AnnealingConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |message: String| Err(Error::InvalidAnnealing(message));
        if !self.t0.is_finite() || self.t0 <= 0.0 {
            return fail(format!("t0 must be finite and positive, got {}", self.t0));
        }
        if !self.t_min.is_finite() || self.t_min <= 0.0 {
            return fail(format!(
                "t_min must be finite and positive, got {}",
                self.t_min
            ));
        }
        if self.t_min >= self.t0 {
            return fail(format!(
                "t_min ({}) must be below t0 ({})",
                self.t_min, self.t0
            ));
        }
        if !self.gamma.is_finite() || self.gamma <= 0.0 || self.gamma >= 1.0 {
            return fail(format!(
                "gamma must lie strictly between 0 and 1, got {}",
                self.gamma
            ));
        }
        if self.steps_per_temperature == 0 {
            return fail("steps_per_temperature must be at least 1".into());
        }
        if !self.lambda.is_finite() || self.lambda < 0.0 {
            return fail(format!(
                "lambda must be finite and nonnegative, got {}",
                self.lambda
            ));
        }
        Ok(())
    }
}

/// Aggregate statistics of one annealing run. `visits` counts the post-step
/// state of every step, so it sums to `trajectory_length`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainStats {
    pub visits: Vec<u64>,
    pub acceptance_rate: f64,
    pub final_state_index: usize,
    pub trajectory_length: u64,
}

/// One recorded step of a traced annealing run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceStep {
    pub step: u64,
    pub temperature: f64,
    pub state_index: usize,
    pub action: f64,
    pub accepted: bool,
}

fn anneal_core(
    space: &ModelSpace,
    config: &AnnealingConfig,
    mut observe: impl FnMut(&TraceStep),
) -> Result<(usize, ChainStats)> {
    config.validate()?;
    let n = space.len();
    let actions = thermo::actions(space, config.lambda);
    let mut rng = stream_rng(config.seed, STREAM_CHAIN);

    let mut state = 0usize;
    let mut best_index = 0usize;
    let mut best_action = actions[0];
    let mut visits = vec![0u64; n];
    let mut accepted_count = 0u64;
    let mut total = 0u64;

    // NeighborStep keeps moves local so the cold phase settles into the
    // nearest basin; the hot phase supplies the global mixing.
    let kernel = ProposalKernel::NeighborStep;
    let mut temperature = config.t0;
    while temperature > config.t_min {
        for _ in 0..config.steps_per_temperature {
            let u_propose = rng.random::<f64>();
            let u_accept = rng.random::<f64>();
            let proposal = kernel.propose(state, n, u_propose);
            let delta = actions[proposal] - actions[state];
            let accepted = u_accept < (-delta / temperature).exp();
            if accepted {
                state = proposal;
            }
            if actions[state] < best_action {
                best_action = actions[state];
                best_index = state;
            }
            visits[state] += 1;
            if accepted {
                accepted_count += 1;
            }
            observe(&TraceStep {
                step: total,
                temperature,
                state_index: state,
                action: actions[state],
                accepted,
            });
            total += 1;
        }
        temperature *= config.gamma;
    }

    let stats = ChainStats {
        visits,
        acceptance_rate: accepted_count as f64 / total as f64,
        final_state_index: state,
        trajectory_length: total,
    };
    Ok((best_index, stats))
}

/// Simulated annealing over the action landscape at `config.lambda`,
/// starting from state 0 and cooling `T ← γT` after each level of
/// `steps_per_temperature` Metropolis steps.
///
/// Returns the best-action state ever visited (including the start state),
/// not merely the final one — a strictly better minimizer for one comparison
/// per step.
pub fn simulated_annealing(
    space: &ModelSpace,
    config: &AnnealingConfig,
) -> Result<(usize, ChainStats)> {
    anneal_core(space, config, |_| {})
}

/// [`simulated_annealing`] with a full per-step trace. Identical chain for
/// identical config: the trace observer does not touch the RNG.
pub fn simulated_annealing_traced(
    space: &ModelSpace,
    config: &AnnealingConfig,
) -> Result<(usize, ChainStats, Vec<TraceStep>)> {
    let mut trace = Vec::new();
    let (best, stats) = anneal_core(space, config, |step| trace.push(*step))?;
    Ok((best, stats, trace))
}

/// CSV export with columns `(step, temperature, state_index, action,
/// accepted)`; `accepted` is 1 or 0.
pub fn export_trace_csv(trace: &[TraceStep], path: &Path) -> Result<()> {
    let io_err = |e: csv::Error| Error::Io {
        path: path.display().to_string(),
        source: std::io::Error::other(e),
    };
    let mut writer = csv::Writer::from_path(path).map_err(io_err)?;
    writer
        .write_record(["step", "temperature", "state_index", "action", "accepted"])
        .map_err(io_err)?;
    for row in trace {
        writer
            .write_record([
                format!("{}", row.step),
                format!("{}", row.temperature),
                format!("{}", row.state_index),
                format!("{}", row.action),
                if row.accepted { "1" } else { "0" }.to_string(),
            ])
            .map_err(io_err)?;
    }
    writer.flush().map_err(|e| Error::Io {
        path: path.display().to_string(),
        source: e,
    })
}
