//! Model points and finite model spaces: the discrete (complexity, loss)
//! landscape every other module operates on.

use std::fmt;
use std::str::FromStr;

use crate::{Error, Result};

/// Enumerable regression family. The family fixes how a parameter index
/// maps to a complexity value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    Polynomial,
    Fourier,
    Tree,
}

impl Family {
    /// Complexity of the family member at `param_index`: coefficient count
    /// `d+1` for degree-`d` polynomials, `2d+1` for Fourier series up to
    /// mode `d`, and the depth itself for depth-`d` trees.
    pub fn complexity(self, param_index: u32) -> u32 {
        match self {
            Family::Polynomial => param_index + 1,
            Family::Fourier => 2 * param_index + 1,
            Family::Tree => param_index,
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Family::Polynomial => "polynomial",
            Family::Fourier => "fourier",
            Family::Tree => "tree",
        };
        f.write_str(name)
    }
}

impl FromStr for Family {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "polynomial" | "poly" => Ok(Family::Polynomial),
            "fourier" => Ok(Family::Fourier),
            "tree" => Ok(Family::Tree),
            other => Err(format!(
                "unknown family {other:?} (expected polynomial, fourier, or tree)"
            )),
        }
    }
}

/// One fitted model: its family coordinates plus raw SSE losses on the
/// train split and on both test targets.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelPoint {
    pub family: Family,
    pub param_index: u32,
    pub complexity: u32,
    pub train_loss: f64,
    pub test_loss_clean: f64,
    pub test_loss_noisy: f64,
}

impl ModelPoint {
    /// Builds a point with the complexity derived from the family rule.
    /// Losses must be finite and nonnegative.
    pub fn new(
        family: Family,
        param_index: u32,
        train_loss: f64,
        test_loss_clean: f64,
        test_loss_noisy: f64,
    ) -> Result<Self> {
        for (name, loss) in [
            ("train_loss", train_loss),
            ("test_loss_clean", test_loss_clean),
            ("test_loss_noisy", test_loss_noisy),
        ] {
            if !loss.is_finite() || loss < 0.0 {
                return Err(Error::InvalidPoint(format!(
                    "{name} must be finite and nonnegative, got {loss}"
                )));
            }
        }
        Ok(ModelPoint {
            family,
            param_index,
            complexity: family.complexity(param_index),
            train_loss,
            test_loss_clean,
            test_loss_noisy,
        })
    }

    /// Synthetic point for landscapes given directly as (complexity, loss)
    /// pairs; test losses mirror the train loss. Any complexity is
    /// realizable: `C ≥ 1` as a polynomial of degree `C−1`, `C = 0` as a
    /// depth-0 tree.
    pub fn from_complexity_loss(complexity: u32, loss: f64) -> Result<Self> {
        let (family, param_index) = if complexity == 0 {
            (Family::Tree, 0)
        } else {
            (Family::Polynomial, complexity - 1)
        };
        ModelPoint::new(family, param_index, loss, loss, loss)
    }
}

/// Nonempty list of model points with strictly increasing complexities,
/// tagged with the provenance of the dataset that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpace {
    points: Vec<ModelPoint>,
    pub dataset_ref: String,
}

impl ModelSpace {
    pub fn from_points(points: Vec<ModelPoint>, dataset_ref: impl Into<String>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidSpace("no points".into()));
        }
        if let Some(w) = points
            .windows(2)
            .find(|w| w[0].complexity >= w[1].complexity)
        {
            return Err(Error::InvalidSpace(format!(
                "complexities {} and {} out of order",
                w[0].complexity, w[1].complexity
            )));
        }
        Ok(ModelSpace {
            points,
            dataset_ref: dataset_ref.into(),
        })
    }

    /// Space built from raw (complexity, train loss) pairs; pairs must be
    /// sorted by strictly increasing complexity.
    pub fn synthetic(pairs: &[(u32, f64)]) -> Result<Self> {
        let points = pairs
            .iter()
            .map(|&(c, l)| ModelPoint::from_complexity_loss(c, l))
            .collect::<Result<Vec<_>>>()?;
        ModelSpace::from_points(points, "synthetic")
    }

    pub fn points(&self) -> &[ModelPoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        false // nonempty by construction
    }
}
