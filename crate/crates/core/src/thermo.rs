//! Thermodynamics of a finite model space: the action
//! `A_λ(S) = λ·Comp(S) + Loss(S)`, its Gibbs distribution and free energy at
//! `T > 0`, the exact zero-temperature envelope, the complexity
//! susceptibility `χ = Var[Comp]`, and the two-state / k-state resonance
//! analysis.

use std::path::Path;

use rayon::prelude::*;

use crate::space::{ModelPoint, ModelSpace};
use crate::{Error, Result};

/// Lagrange multiplier and temperature for one evaluation. `temperature = 0`
/// selects exact minimization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ActionParams {
    pub lambda: f64,
    pub temperature: f64,
}

impl ActionParams {
    pub fn new(lambda: f64, temperature: f64) -> Result<Self> {
        if !lambda.is_finite() || lambda < 0.0 {
            return Err(Error::InvalidParams(format!(
                "lambda must be finite and nonnegative, got {lambda}"
            )));
        }
        if !temperature.is_finite() || temperature < 0.0 {
            return Err(Error::InvalidParams(format!(
                "temperature must be finite and nonnegative, got {temperature}"
            )));
        }
        Ok(ActionParams {
            lambda,
            temperature,
        })
    }
}

/// Shared line evaluation `loss + λ·complexity`.
///
/// Everything that compares actions across modules funnels through this one
/// expression so that minima computed from raw losses and from structure
/// functions agree bit-for-bit, not merely approximately.
#[inline]
pub fn action_value(lambda: f64, complexity: f64, loss: f64) -> f64 {
    loss + lambda * complexity
}

/// `A_λ(S) = λ·Comp(S) + Loss(S)` for one fitted model.
pub fn action(point: &ModelPoint, lambda: f64) -> f64 {
    debug_assert!(lambda >= 0.0);
    action_value(lambda, f64::from(point.complexity), point.train_loss)
}

/// Action of every state, in space order.
pub fn actions(space: &ModelSpace, lambda: f64) -> Vec<f64> {
    space.points().iter().map(|p| action(p, lambda)).collect()
}

/// Exact minimum of the action and the winning complexity `d*(λ)`. Ties
/// break toward smaller complexity (the iteration runs in increasing
/// complexity order and only strict improvements replace the winner).
pub fn free_energy_zero_t(space: &ModelSpace, lambda: f64) -> (f64, u32) {
    debug_assert!(lambda >= 0.0);
    let mut best_value = f64::INFINITY;
    let mut best_complexity = 0;
    for point in space.points() {
        let value = action(point, lambda);
        if value < best_value {
            best_value = value;
            best_complexity = point.complexity;
        }
    }
    (best_value, best_complexity)
}

/// Gibbs weights `π(S) ∝ exp(−A_λ(S)/T)` over a model space.
#[derive(Debug, Clone, PartialEq)]
pub struct GibbsDistribution {
    pub probabilities: Vec<f64>,
    pub log_z: f64,
    pub params: ActionParams,
}

/// Boltzmann distribution of the action at `params.temperature > 0`.
///
/// Exponents are shifted by their maximum before exponentiation, so any
/// finite actions — SSE values reach 10³ and beyond — normalize without
/// overflow and the probabilities sum to 1 within accumulation error.
pub fn gibbs(space: &ModelSpace, params: ActionParams) -> Result<GibbsDistribution> {
    if params.temperature <= 0.0 {
        return Err(Error::NonPositiveTemperature(params.temperature));
    }
    let exponents: Vec<f64> = space
        .points()
        .iter()
        .map(|p| -action(p, params.lambda) / params.temperature)
        .collect();
    let shift = exponents.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = exponents.iter().map(|&z| (z - shift).exp()).collect();
    let total: f64 = weights.iter().sum();
    Ok(GibbsDistribution {
        probabilities: weights.iter().map(|w| w / total).collect(),
        log_z: shift + total.ln(),
        params,
    })
}

/// `F(λ,T) = −T·log Z(λ,T)`; converges to the zero-temperature envelope as
/// `T → 0`.
pub fn free_energy_t(space: &ModelSpace, params: ActionParams) -> Result<f64> {
    Ok(-params.temperature * gibbs(space, params)?.log_z)
}

/// Susceptibility `χ(λ) = Var_π[Comp]` under the Gibbs distribution.
///
/// The variance itself is well-defined at any `T > 0`; the derivative
/// identities `dF/dλ = ⟨Comp⟩` and `d²F/dλ² = χ` hold at `T = 1`, which is
/// where the test suite checks them.
pub fn susceptibility(space: &ModelSpace, params: ActionParams) -> Result<f64> {
    let dist = gibbs(space, params)?;
    Ok(complexity_variance(space, &dist.probabilities))
}

fn complexity_mean(space: &ModelSpace, probabilities: &[f64]) -> f64 {
    space
        .points()
        .iter()
        .zip(probabilities)
        .fold(0.0, |acc, (p, &w)| acc + w * f64::from(p.complexity))
}

fn complexity_variance(space: &ModelSpace, probabilities: &[f64]) -> f64 {
    let mean = complexity_mean(space, probabilities);
    space
        .points()
        .iter()
        .zip(probabilities)
        .fold(0.0, |acc, (p, &w)| {
            let d = f64::from(p.complexity) - mean;
            acc + w * d * d
        })
}

/// Where two models exchange dominance: the crossing `λ*`, the susceptibility
/// peak height there, and the exact full width at half maximum of the
/// `T = 1` two-state susceptibility curve.
#[derive(Debug, Clone, PartialEq)]
pub struct ResonanceReport {
    pub lambda_star: Option<f64>,
    pub chi_peak: f64,
    pub peak_width_estimate: Option<f64>,
    pub participating_complexities: Vec<u32>,
}

/// Two-state resonance: `λ* = (L₁−L₂)/(C₂−C₁)` when the crossing condition
/// `(L₁−L₂)(C₂−C₁) > 0` holds; otherwise one model dominates the envelope
/// for every `λ ≥ 0` and there is no resonance.
pub fn resonance_two_state(p1: &ModelPoint, p2: &ModelPoint) -> Result<ResonanceReport> {
    if p1.complexity == p2.complexity {
        return Err(Error::EqualComplexities(p1.complexity));
    }
    let delta_c = f64::from(p2.complexity) - f64::from(p1.complexity);
    let lambda_star = (p1.train_loss - p2.train_loss) / delta_c;
    if lambda_star > 0.0 {
        // χ(λ*+ε) = ΔC²/(4·cosh²(ε·ΔC/2)) at T=1; half maximum at
        // cosh² = 2, i.e. FWHM = 4·ln(1+√2)/|ΔC|.
        let fwhm = 4.0 * (1.0 + std::f64::consts::SQRT_2).ln() / delta_c.abs();
        Ok(ResonanceReport {
            lambda_star: Some(lambda_star),
            chi_peak: delta_c * delta_c / 4.0,
            peak_width_estimate: Some(fwhm),
            participating_complexities: vec![p1.complexity, p2.complexity],
        })
    } else {
        Ok(ResonanceReport {
            lambda_star: None,
            chi_peak: 0.0,
            peak_width_estimate: None,
            participating_complexities: Vec::new(),
        })
    }
}

/// Quadratic expansion of the degenerate k-state susceptibility around the
/// resonance: `χ(ε) ≈ (1/k)Σ(Cᵢ−C̄)² − (ε²/k)Σ(Cᵢ−C̄)⁴`, accurate to
/// `O(ε³)`.
pub fn kstate_chi_expansion(complexities: &[u32], epsilon: f64) -> Result<f64> {
    if complexities.len() < 2 {
        return Err(Error::TooFewStates(complexities.len()));
    }
    let k = complexities.len() as f64;
    let mean = complexities.iter().map(|&c| f64::from(c)).sum::<f64>() / k;
    let (sum_sq, sum_quart) = complexities.iter().fold((0.0, 0.0), |(s2, s4), &c| {
        let d = f64::from(c) - mean;
        (s2 + d * d, s4 + d * d * d * d)
    });
    Ok(sum_sq / k - epsilon * epsilon * sum_quart / k)
}

/// `F`, `⟨Comp⟩`, and `χ` tabulated over a λ grid at one temperature.
#[derive(Debug, Clone, PartialEq)]
pub struct FreeEnergyCurve {
    pub lambdas: Vec<f64>,
    pub free_energy: Vec<f64>,
    pub mean_complexity: Vec<f64>,
    pub chi: Vec<f64>,
    pub temperature: f64,
}

impl FreeEnergyCurve {
    /// CSV export with columns `(lambda, F, mean_comp, chi)`.
    pub fn export_csv(&self, path: &Path) -> Result<()> {
        let io_err = |source: std::io::Error| Error::Io {
            path: path.display().to_string(),
            source,
        };
        let mut writer =
            csv::Writer::from_path(path).map_err(|e| io_err(std::io::Error::other(e)))?;
        writer
            .write_record(["lambda", "F", "mean_comp", "chi"])
            .map_err(|e| io_err(std::io::Error::other(e)))?;
        for i in 0..self.lambdas.len() {
            writer
                .write_record([
                    format!("{}", self.lambdas[i]),
                    format!("{}", self.free_energy[i]),
                    format!("{}", self.mean_complexity[i]),
                    format!("{}", self.chi[i]),
                ])
                .map_err(|e| io_err(std::io::Error::other(e)))?;
        }
        writer.flush().map_err(io_err)
    }
}

fn validate_grid(lambdas: &[f64]) -> Result<()> {
    if lambdas.is_empty() {
        return Err(Error::InvalidGrid("empty grid".into()));
    }
    if let Some(bad) = lambdas.iter().find(|l| !l.is_finite() || **l < 0.0) {
        return Err(Error::InvalidGrid(format!("invalid value {bad}")));
    }
    if let Some(w) = lambdas.windows(2).find(|w| w[0] >= w[1]) {
        return Err(Error::InvalidGrid(format!(
            "{} is not less than {}",
            w[0], w[1]
        )));
    }
    Ok(())
}

/// Tabulates the landscape over `lambdas` (strictly increasing, all ≥ 0).
///
/// At `T = 0` each grid point carries the exact envelope value and winning
/// complexity with `χ = 0`; at `T > 0` the Gibbs mean and variance. The λ
/// points are independent and evaluated in parallel; per-λ results are
/// bit-deterministic regardless of thread scheduling.
pub fn sweep_lambda(
    space: &ModelSpace,
    lambdas: &[f64],
    temperature: f64,
) -> Result<FreeEnergyCurve> {
    validate_grid(lambdas)?;
    if !temperature.is_finite() || temperature < 0.0 {
        return Err(Error::InvalidParams(format!(
            "temperature must be finite and nonnegative, got {temperature}"
        )));
    }

    let rows: Vec<(f64, f64, f64)> = if temperature == 0.0 {
        lambdas
            .par_iter()
            .map(|&lambda| {
                let (f, winner) = free_energy_zero_t(space, lambda);
                (f, f64::from(winner), 0.0)
            })
            .collect()
    } else {
        lambdas
            .par_iter()
            .map(|&lambda| {
                let dist = gibbs(
                    space,
                    ActionParams {
                        lambda,
                        temperature,
                    },
                )?;
                let f = -temperature * dist.log_z;
                let mean = complexity_mean(space, &dist.probabilities);
                let chi = complexity_variance(space, &dist.probabilities);
                Ok((f, mean, chi))
            })
            .collect::<Result<Vec<_>>>()?
    };

    Ok(FreeEnergyCurve {
        lambdas: lambdas.to_vec(),
        free_energy: rows.iter().map(|r| r.0).collect(),
        mean_complexity: rows.iter().map(|r| r.1).collect(),
        chi: rows.iter().map(|r| r.2).collect(),
        temperature,
    })
}
