//! Structure functions and their Legendre–Fenchel duality with the
//! zero-temperature free energy: `F(λ) = min_α [λα + h(α)]` and
//! `h**(α) = max_λ [F(λ) − λα]`, plus the lower-envelope geometry —
//! breakpoint (kink) detection and the test-loss elbow.

use std::path::Path;

use crate::space::ModelSpace;
use crate::thermo::{action_value, FreeEnergyCurve};
use crate::{Error, Result};

/// Best achievable train loss `h(α)` under each complexity budget `α`,
/// tabulated at the distinct complexities of the generating space.
#[derive(Debug, Clone, PartialEq)]
pub struct StructureFunction {
    pub alphas: Vec<u32>,
    pub h: Vec<f64>,
    pub source_tag: String,
}

impl StructureFunction {
    /// CSV export with columns `(alpha, h)`.
    pub fn export_csv(&self, path: &Path) -> Result<()> {
        let io_err = |e: csv::Error| Error::Io {
            path: path.display().to_string(),
            source: std::io::Error::other(e),
        };
        let mut writer = csv::Writer::from_path(path).map_err(io_err)?;
        writer.write_record(["alpha", "h"]).map_err(io_err)?;
        for (alpha, h) in self.alphas.iter().zip(&self.h) {
            writer
                .write_record([format!("{alpha}"), format!("{h}")])
                .map_err(io_err)?;
        }
        writer.flush().map_err(|e| Error::Io {
            path: path.display().to_string(),
            source: e,
        })
    }
}

/// `h(α)` = running minimum of train loss over points with complexity ≤ α.
/// The h values are existing train losses, never rounded combinations, which
/// is what makes the primal-dual identity below exact.
pub fn structure_function(space: &ModelSpace) -> StructureFunction {
    let mut alphas = Vec::with_capacity(space.len());
    let mut h = Vec::with_capacity(space.len());
    let mut best = f64::INFINITY;
    for point in space.points() {
        if point.train_loss < best {
            best = point.train_loss;
        }
        alphas.push(point.complexity);
        h.push(best);
    }
    StructureFunction {
        alphas,
        h,
        source_tag: space.dataset_ref.clone(),
    }
}

/// `F(λ) = min_α [λα + h(α)]` over the finite support (h = +∞ off-support).
///
/// Evaluates each line through [`action_value`] in increasing-α order with
/// strict-improvement updates — the same expression and ordering as
/// [`crate::thermo::free_energy_zero_t`], so the two agree bit-for-bit on
/// the space that generated `sf`.
pub fn fenchel_h_to_f(sf: &StructureFunction, lambda: f64) -> f64 {
    debug_assert!(lambda >= 0.0);
    let mut best = f64::INFINITY;
    for (&alpha, &h) in sf.alphas.iter().zip(&sf.h) {
        let value = action_value(lambda, f64::from(alpha), h);
        if value < best {
            best = value;
        }
    }
    best
}

/// Tabulates [`fenchel_h_to_f`] over a λ grid as a zero-temperature curve.
/// `mean_complexity` carries the winning α (ties → smaller), `chi` is zero.
pub fn fenchel_curve(sf: &StructureFunction, lambdas: &[f64]) -> Result<FreeEnergyCurve> {
    if lambdas.is_empty() {
        return Err(Error::InvalidGrid("empty grid".into()));
    }
    if let Some(bad) = lambdas.iter().find(|l| !l.is_finite() || **l < 0.0) {
        return Err(Error::InvalidGrid(format!("invalid value {bad}")));
    }
    let mut free_energy = Vec::with_capacity(lambdas.len());
    let mut winners = Vec::with_capacity(lambdas.len());
    for &lambda in lambdas {
        let mut best = f64::INFINITY;
        let mut winner = 0u32;
        for (&alpha, &h) in sf.alphas.iter().zip(&sf.h) {
            let value = action_value(lambda, f64::from(alpha), h);
            if value < best {
                best = value;
                winner = alpha;
            }
        }
        free_energy.push(best);
        winners.push(f64::from(winner));
    }
    Ok(FreeEnergyCurve {
        lambdas: lambdas.to_vec(),
        free_energy,
        mean_complexity: winners,
        chi: vec![0.0; lambdas.len()],
        temperature: 0.0,
    })
}

/// `h**(α) = max_λ [F(λ) − λα]` over the curve's λ grid.
///
/// `F` is piecewise linear and concave in λ, so the maximum is attained at a
/// breakpoint or grid endpoint: a grid containing `{0} ∪ breakpoints ∪ {λ >
/// last breakpoint}` makes the result exact. It recovers the lower convex
/// envelope of h — equal to h(α) exactly when `(α, h(α))` is a hull vertex,
/// and the hull chord value below h elsewhere.
pub fn fenchel_f_to_h(curve: &FreeEnergyCurve, alpha: u32) -> Result<f64> {
    if curve.temperature > 0.0 {
        return Err(Error::PositiveTemperatureCurve(curve.temperature));
    }
    if curve.lambdas.is_empty() {
        return Err(Error::InvalidGrid("empty grid".into()));
    }
    let alpha = f64::from(alpha);
    let mut best = f64::NEG_INFINITY;
    for (&lambda, &f) in curve.lambdas.iter().zip(&curve.free_energy) {
        let value = f - lambda * alpha;
        if value > best {
            best = value;
        }
    }
    Ok(best)
}

/// A kink of the piecewise-linear `F(λ)`: at `lambda` the winning complexity
/// drops from `slope_before` to `slope_after` (`dF/dλ` = selected
/// complexity).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvelopeBreakpoint {
    pub lambda: f64,
    pub slope_before: u32,
    pub slope_after: u32,
}

/// CSV export with columns `(lambda, slope_before, slope_after)`.
pub fn export_breakpoints_csv(breakpoints: &[EnvelopeBreakpoint], path: &Path) -> Result<()> {
    let io_err = |e: csv::Error| Error::Io {
        path: path.display().to_string(),
        source: std::io::Error::other(e),
    };
    let mut writer = csv::Writer::from_path(path).map_err(io_err)?;
    writer
        .write_record(["lambda", "slope_before", "slope_after"])
        .map_err(io_err)?;
    for bp in breakpoints {
        writer
            .write_record([
                format!("{}", bp.lambda),
                format!("{}", bp.slope_before),
                format!("{}", bp.slope_after),
            ])
            .map_err(io_err)?;
    }
    writer.flush().map_err(|e| Error::Io {
        path: path.display().to_string(),
        source: e,
    })
}

/// All breakpoints of `F(λ) = min_S [L_S + λ·C_S]` for λ > 0, sorted by
/// increasing λ, via the dual convex-hull construction: the winners are the
/// vertices of the lower convex hull of the `(C, L)` point set, and
/// consecutive hull vertices cross at `λ = ΔL/ΔC`.
///
/// Exact geometry — no λ grid is scanned, so resolution artifacts cannot
/// appear. Collinear hull runs collapse into one breakpoint carrying the
/// extreme slopes.
pub fn detect_kinks(space: &ModelSpace) -> Vec<EnvelopeBreakpoint> {
    // (C, L) pairs arrive sorted by strictly increasing complexity.
    let pts: Vec<(f64, f64)> = space
        .points()
        .iter()
        .map(|p| (f64::from(p.complexity), p.train_loss))
        .collect();

    // Lower convex hull, monotone chain. cross ≤ 0 also pops collinear
    // middles, so hull slopes end up strictly increasing left to right.
    let cross = |o: (f64, f64), a: (f64, f64), b: (f64, f64)| -> f64 {
        (a.0 - o.0) * (b.1 - o.1) - (b.0 - o.0) * (a.1 - o.1)
    };
    let mut hull: Vec<(f64, f64)> = Vec::with_capacity(pts.len());
    for &p in &pts {
        while hull.len() >= 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
            hull.pop();
        }
        hull.push(p);
    }

    // Only the descending part matters for λ ≥ 0: once the hull turns flat
    // or upward, those vertices never win (a flat segment crosses at λ = 0,
    // which is outside the positive-breakpoint domain).
    while hull.len() >= 2 && hull[hull.len() - 1].1 >= hull[hull.len() - 2].1 {
        hull.pop();
    }

    // Walk right to left: hull slopes increase with C, so crossing λ values
    // (their negatives) come out strictly increasing.
    let mut breakpoints: Vec<EnvelopeBreakpoint> = Vec::with_capacity(hull.len().saturating_sub(1));
    for j in (1..hull.len()).rev() {
        let (c_after, l_after) = hull[j - 1];
        let (c_before, l_before) = hull[j];
        let lambda = (l_after - l_before) / (c_before - c_after);
        let bp = EnvelopeBreakpoint {
            lambda,
            slope_before: c_before as u32,
            slope_after: c_after as u32,
        };
        match breakpoints.last_mut() {
            // Float-equal λ from distinct segments: merge, keeping the
            // extreme slopes of the run.
            Some(last) if last.lambda == lambda => last.slope_after = bp.slope_after,
            _ => breakpoints.push(bp),
        }
    }
    breakpoints
}

/// The empirical overfitting threshold: the complexity minimizing the noisy
/// test loss (ties → smaller complexity).
pub fn elbow_from_test_loss(space: &ModelSpace) -> u32 {
    let mut best = f64::INFINITY;
    let mut alpha_star = 0u32;
    for point in space.points() {
        if point.test_loss_noisy < best {
            best = point.test_loss_noisy;
            alpha_star = point.complexity;
        }
    }
    alpha_star
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::generate_dataset;
    use crate::fit::{enumerate_space, fit_polynomial};
    use crate::fit_tree;
    use crate::space::{Family, ModelPoint, ModelSpace};
    use crate::thermo::{free_energy_zero_t, resonance_two_state, sweep_lambda};

    fn sf(pairs: &[(u32, f64)]) -> StructureFunction {
        structure_function(&ModelSpace::synthetic(pairs).unwrap())
    }

    #[test]
    fn running_minimum_examples() {
        let s = sf(&[(1, 5.0), (2, 3.0), (3, 4.0)]);
        assert_eq!(s.alphas, vec![1, 2, 3]);
        assert_eq!(s.h, vec![5.0, 3.0, 3.0]);

        let s = sf(&[(2, 7.0)]);
        assert_eq!(s.alphas, vec![2]);
        assert_eq!(s.h, vec![7.0]);
    }

    #[test]
    fn h_matches_per_budget_refit_minimum() {
        let dataset = generate_dataset(32, 16, 1, 0.2, 9).unwrap();
        let space = enumerate_space(&dataset, Family::Polynomial, 6).unwrap();
        let s = structure_function(&space);
        for (i, &alpha) in s.alphas.iter().enumerate() {
            let oracle = (0..=6)
                .map(|d| fit_polynomial(&dataset, d).unwrap())
                .filter(|p| p.complexity <= alpha)
                .map(|p| p.train_loss)
                .fold(f64::INFINITY, f64::min);
            assert_eq!(s.h[i], oracle, "alpha={alpha}");
        }
    }

    #[test]
    fn fenchel_forward_hand_values() {
        let s = sf(&[(1, 2.0), (3, 0.0)]);
        // min(2 + 1·1, 0 + 1·3) = 3.
        assert_eq!(fenchel_h_to_f(&s, 1.0), 3.0);
        // λ=0 collapses to the loss floor.
        assert_eq!(fenchel_h_to_f(&s, 0.0), 0.0);
        assert_eq!(fenchel_h_to_f(&s, 2.0), 4.0);
    }

    #[test]
    fn primal_dual_bit_exact_on_random_grid() {
        let space = ModelSpace::synthetic(&[
            (1, 5.125),
            (2, 3.0625),
            (4, 2.71),
            (7, 0.33),
            (9, 0.329),
            (15, 0.01),
        ])
        .unwrap();
        let s = structure_function(&space);
        for i in 0..200 {
            let lambda = f64::from(i) * 0.017;
            let via_sf = fenchel_h_to_f(&s, lambda);
            let (direct, _) = free_energy_zero_t(&space, lambda);
            assert!(
                via_sf == direct,
                "λ={lambda}: {via_sf:?} != {direct:?} (bits {:x} vs {:x})",
                via_sf.to_bits(),
                direct.to_bits()
            );
        }
    }

    #[test]
    fn fenchel_curve_matches_sweep() {
        let space = ModelSpace::synthetic(&[(1, 4.0), (3, 1.5), (6, 0.2)]).unwrap();
        let grid = [0.0, 0.1, 0.5, 0.9, 2.0];
        let from_sf = fenchel_curve(&structure_function(&space), &grid).unwrap();
        let from_space = sweep_lambda(&space, &grid, 0.0).unwrap();
        assert_eq!(from_sf.free_energy, from_space.free_energy);
        assert_eq!(from_sf.mean_complexity, from_space.mean_complexity);
        assert_eq!(from_sf.temperature, 0.0);
    }

    #[test]
    fn biconjugation_exact_at_extreme_points() {
        let s = sf(&[(1, 2.0), (3, 0.0)]);
        // Both support points are hull vertices: breakpoint λ=1, endpoints
        // {0, 2} complete the exact grid.
        let curve = fenchel_curve(&s, &[0.0, 1.0, 2.0]).unwrap();
        assert_eq!(fenchel_f_to_h(&curve, 1).unwrap(), 2.0);
        assert_eq!(fenchel_f_to_h(&curve, 3).unwrap(), 0.0);
    }

    #[test]
    fn biconjugation_returns_chord_below_nonconvex_point() {
        let s = sf(&[(1, 4.0), (2, 3.9), (3, 0.0)]);
        // Hull spans (1,4)–(3,0); the middle point sits above the chord.
        let space = ModelSpace::synthetic(&[(1, 4.0), (2, 3.9), (3, 0.0)]).unwrap();
        let kinks = detect_kinks(&space);
        assert_eq!(kinks.len(), 1);
        assert_eq!(kinks[0].lambda, 2.0);
        let grid = [0.0, 2.0, 3.0];
        let curve = fenchel_curve(&s, &grid).unwrap();
        assert_eq!(fenchel_f_to_h(&curve, 1).unwrap(), 4.0);
        assert_eq!(fenchel_f_to_h(&curve, 2).unwrap(), 2.0);
        assert_eq!(fenchel_f_to_h(&curve, 3).unwrap(), 0.0);
    }

    #[test]
    fn biconjugation_rejects_warm_curves() {
        let space = ModelSpace::synthetic(&[(1, 2.0), (3, 0.0)]).unwrap();
        let warm = sweep_lambda(&space, &[0.5, 1.0], 1.0).unwrap();
        assert!(matches!(
            fenchel_f_to_h(&warm, 1),
            Err(Error::PositiveTemperatureCurve(t)) if t == 1.0
        ));
    }

    #[test]
    fn kink_examples() {
        let space = ModelSpace::synthetic(&[(1, 2.0), (3, 0.0)]).unwrap();
        let kinks = detect_kinks(&space);
        assert_eq!(
            kinks,
            vec![EnvelopeBreakpoint {
                lambda: 1.0,
                slope_before: 3,
                slope_after: 1
            }]
        );

        // C=1 with the lowest loss dominates every λ ≥ 0.
        let space = ModelSpace::synthetic(&[(1, 0.0), (2, 5.0), (3, 6.0)]).unwrap();
        assert!(detect_kinks(&space).is_empty());

        // Collinear triple collapses to one breakpoint with extreme slopes.
        let space = ModelSpace::synthetic(&[(1, 4.0), (2, 2.0), (3, 0.0)]).unwrap();
        let kinks = detect_kinks(&space);
        assert_eq!(
            kinks,
            vec![EnvelopeBreakpoint {
                lambda: 2.0,
                slope_before: 3,
                slope_after: 1
            }]
        );

        let space = ModelSpace::synthetic(&[(2, 7.0)]).unwrap();
        assert!(detect_kinks(&space).is_empty());

        // Equal losses cross only at λ=0, which is outside the domain.
        let space = ModelSpace::synthetic(&[(1, 1.0), (3, 1.0)]).unwrap();
        assert!(detect_kinks(&space).is_empty());
    }

    #[test]
    fn kinks_ordered_with_decreasing_slopes() {
        let space =
            ModelSpace::synthetic(&[(1, 6.0), (2, 3.0), (4, 1.0), (7, 0.0), (9, 5.0)]).unwrap();
        let kinks = detect_kinks(&space);
        assert_eq!(kinks.len(), 3);
        let lambdas: Vec<f64> = kinks.iter().map(|k| k.lambda).collect();
        assert_eq!(lambdas, vec![1.0 / 3.0, 1.0, 3.0]);
        for w in kinks.windows(2) {
            assert!(w[0].lambda < w[1].lambda);
            assert!(w[1].slope_before <= w[0].slope_after);
        }
        for k in &kinks {
            assert!(k.slope_after < k.slope_before);
        }
    }

    #[test]
    fn two_point_kink_equals_resonance() {
        let pairs = [(2u32, 5.0), (6u32, 1.0)];
        let space = ModelSpace::synthetic(&pairs).unwrap();
        let kinks = detect_kinks(&space);
        let p1 = ModelPoint::from_complexity_loss(pairs[0].0, pairs[0].1).unwrap();
        let p2 = ModelPoint::from_complexity_loss(pairs[1].0, pairs[1].1).unwrap();
        let resonance = resonance_two_state(&p1, &p2).unwrap();
        assert_eq!(kinks.len(), 1);
        assert_eq!(Some(kinks[0].lambda), resonance.lambda_star);
    }

    fn space_with_test_losses(test_losses: &[f64]) -> ModelSpace {
        let points: Vec<ModelPoint> = test_losses
            .iter()
            .enumerate()
            .map(|(i, &t)| ModelPoint::new(Family::Polynomial, i as u32, 1.0, t, t).unwrap())
            .collect();
        ModelSpace::from_points(points, "synthetic test losses").unwrap()
    }

    #[test]
    fn elbow_hand_examples() {
        // Complexities run 1..=4 for degrees 0..=3.
        let space = space_with_test_losses(&[9.0, 4.0, 5.0, 8.0]);
        assert_eq!(elbow_from_test_loss(&space), 2);

        let space = space_with_test_losses(&[9.0, 7.0, 5.0, 4.0]);
        assert_eq!(elbow_from_test_loss(&space), 4);

        // Tie goes to the smaller complexity.
        let space = space_with_test_losses(&[5.0, 3.0, 3.0]);
        assert_eq!(elbow_from_test_loss(&space), 2);
    }

    #[test]
    fn tree_elbow_matches_exhaustive_refits() {
        let dataset = generate_dataset(256, 512, 2, 0.25, 11).unwrap();
        let space = enumerate_space(&dataset, Family::Tree, 12).unwrap();
        let alpha_star = elbow_from_test_loss(&space);

        let mut best = f64::INFINITY;
        let mut oracle = 0u32;
        for depth in 0..=12 {
            let point = fit_tree(&dataset, depth).unwrap();
            if point.test_loss_noisy < best {
                best = point.test_loss_noisy;
                oracle = point.complexity;
            }
        }
        assert_eq!(alpha_star, oracle);
        // The elbow must be interior for this profile to mean anything.
        assert!(alpha_star > 0 && alpha_star < 12, "alpha*={alpha_star}");
    }

    #[test]
    fn csv_exports_write_expected_headers() {
        let dir = tempfile::tempdir().unwrap();
        let s = sf(&[(1, 5.0), (2, 3.0), (3, 4.0)]);
        let sf_path = dir.path().join("sf.csv");
        s.export_csv(&sf_path).unwrap();
        let text = std::fs::read_to_string(&sf_path).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("alpha,h"));
        assert_eq!(lines.next(), Some("1,5"));
        assert_eq!(lines.count(), 2);

        let bp_path = dir.path().join("bp.csv");
        let kinks = vec![EnvelopeBreakpoint {
            lambda: 0.5,
            slope_before: 3,
            slope_after: 1,
        }];
        export_breakpoints_csv(&kinks, &bp_path).unwrap();
        let text = std::fs::read_to_string(&bp_path).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("lambda,slope_before,slope_after"));
        assert_eq!(lines.next(), Some("0.5,3,1"));
    }
}
