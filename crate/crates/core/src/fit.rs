//! Least-squares fits for the nested linear families (polynomial, Fourier)
//! and enumeration of whole model spaces.
//!
//! Linear systems are solved through an SVD of the design matrix — an
//! orthogonal decomposition, never the normal equations — with small
//! singular values truncated, so rank-deficient designs fall back to the
//! minimum-norm solution instead of aborting a sweep.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};

use crate::dataset::Dataset;
use crate::space::{Family, ModelPoint, ModelSpace};
use crate::tree::fit_tree;
use crate::{Error, Result};

/// Degree-`degree` polynomial least squares; complexity is the coefficient
/// count `degree + 1`. Losses are raw SSE on each split.
pub fn fit_polynomial(dataset: &Dataset, degree: u32) -> Result<ModelPoint> {
    let p = degree as usize + 1;
    if p > dataset.xs.len() {
        return Err(Error::InvalidFit(format!(
            "degree {} needs {} coefficients but the train split has only {} points",
            degree,
            p,
            dataset.xs.len()
        )));
    }
    let (train, clean, noisy) = linear_family_losses(dataset, |xs| polynomial_design(xs, degree))?;
    ModelPoint::new(Family::Polynomial, degree, train, clean, noisy)
}

/// Truncated Fourier series `a₀ + Σ_{k≤d} (a_k cos 2kπx + b_k sin 2kπx)`;
/// complexity is the coefficient count `2·max_mode + 1`.
pub fn fit_fourier(dataset: &Dataset, max_mode: u32) -> Result<ModelPoint> {
    let p = 2 * max_mode as usize + 1;
    if p > dataset.xs.len() {
        return Err(Error::InvalidFit(format!(
            "max_mode {} needs {} coefficients but the train split has only {} points",
            max_mode,
            p,
            dataset.xs.len()
        )));
    }
    let (train, clean, noisy) = linear_family_losses(dataset, |xs| fourier_design(xs, max_mode))?;
    ModelPoint::new(Family::Fourier, max_mode, train, clean, noisy)
}

/// Fits indices `0..=max_index` of one family and packs the points into a
/// space sorted by complexity. Fit errors carry the offending index.
pub fn enumerate_space(dataset: &Dataset, family: Family, max_index: u32) -> Result<ModelSpace> {
    let mut points = Vec::with_capacity(max_index as usize + 1);
    for index in 0..=max_index {
        let fitted = match family {
            Family::Polynomial => fit_polynomial(dataset, index),
            Family::Fourier => fit_fourier(dataset, index),
            Family::Tree => fit_tree(dataset, index),
        };
        points.push(fitted.map_err(|source| Error::AtIndex {
            index,
            source: Box::new(source),
        })?);
    }
    ModelSpace::from_points(points, dataset.tag())
}

/// Monomial basis in `t = 2x − 1`. Same span as the monomials in `x`, so
/// fitted values and SSE are unchanged, but the Vandermonde matrix is far
/// better conditioned on [0,1].
fn polynomial_design(xs: &[f64], degree: u32) -> DMatrix<f64> {
    let p = degree as usize + 1;
    let mut design = DMatrix::zeros(xs.len(), p);
    for (i, &x) in xs.iter().enumerate() {
        let t = 2.0 * x - 1.0;
        let mut power = 1.0;
        for j in 0..p {
            design[(i, j)] = power;
            power *= t;
        }
    }
    design
}

/// Columns ordered `[1, cos 2πx, sin 2πx, cos 4πx, sin 4πx, …]`.
fn fourier_design(xs: &[f64], max_mode: u32) -> DMatrix<f64> {
    let p = 2 * max_mode as usize + 1;
    let mut design = DMatrix::zeros(xs.len(), p);
    for (i, &x) in xs.iter().enumerate() {
        design[(i, 0)] = 1.0;
        for k in 1..=max_mode as usize {
            let angle = 2.0 * k as f64 * PI * x;
            design[(i, 2 * k - 1)] = angle.cos();
            design[(i, 2 * k)] = angle.sin();
        }
    }
    design
}

fn linear_family_losses(
    dataset: &Dataset,
    design: impl Fn(&[f64]) -> DMatrix<f64>,
) -> Result<(f64, f64, f64)> {
    let a = design(&dataset.xs);
    let y = DVector::from_column_slice(&dataset.ys_train);
    let coefficients = solve_least_squares(a.clone(), &y)?;

    let train = sse(&(&y - &a * &coefficients));
    let predictions = design(&dataset.xs_test) * &coefficients;
    let clean = sse(&(DVector::from_column_slice(&dataset.ys_test_clean) - &predictions));
    let noisy = sse(&(DVector::from_column_slice(&dataset.ys_test_noisy) - &predictions));
    Ok((train, clean, noisy))
}

/// Minimum-norm least-squares solution via SVD with relative singular-value
/// truncation.
fn solve_least_squares(a: DMatrix<f64>, y: &DVector<f64>) -> Result<DVector<f64>> {
    let dims = a.nrows().max(a.ncols()) as f64;
    let svd = a.svd(true, true);
    let max_singular = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let cutoff = max_singular * dims * f64::EPSILON;
    let solution = svd.solve(y, cutoff).map_err(|e| Error::Solver(e.into()))?;
    if solution.iter().any(|c| !c.is_finite()) {
        return Err(Error::Solver("non-finite coefficients".into()));
    }
    Ok(DVector::from_column_slice(solution.as_slice()))
}

fn sse(residuals: &DVector<f64>) -> f64 {
    residuals.iter().fold(0.0, |acc, r| acc + r * r)
}
