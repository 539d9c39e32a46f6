//! Belief over task goals as a weighted sample set on a fixed goal grid.
//!
//! The samples never move: the proposal is deterministic, so the importance
//! weight recursion collapses to `w_i <- w_i * P(u_h | beta_i, x_r, x_e)`
//! followed by normalization. On a fixed grid this is exact discrete Bayes.
//!
//! The likelihood reduction relies on three modelling preconditions, which the
//! rest of the crate respects:
//! - the robot command is a deterministic function of the goal and progress
//!   when the human is not acting, so it carries no extra goal evidence;
//! - human actions are Markov given the goal and the current state;
//! - robot and environment transitions are deterministic given the inputs.

use std::sync::Arc;

use crate::error::{Error, Result};

/// Relative floor applied to each likelihood ratio before the weight product.
///
/// A single noisy observation must not zero a grid point forever.
pub const LIKELIHOOD_FLOOR: f64 = 1e-12;

/// Tolerance on `sum(w) == 1` accepted by [`Belief::from_weights`].
pub const NORMALIZATION_TOL: f64 = 1e-9;

/// Sorted candidate goals (grams).
#[derive(Debug, Clone, PartialEq)]
pub struct GoalGrid {
    values: Arc<[f64]>,
}

impl GoalGrid {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidGrid(
                "grid must hold at least one goal".into(),
            ));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite() || **v < 0.0) {
            return Err(Error::InvalidGrid(format!(
                "goal values must be finite and nonnegative, got {v}"
            )));
        }
        if values.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidGrid(
                "goal values must be strictly increasing".into(),
            ));
        }
        Ok(Self {
            values: values.into(),
        })
    }

    /// `count` evenly spaced goals covering `[min_g, max_g]`.
    ///
    /// A single-point grid sits at `min_g`.
    pub fn uniform(min_g: f64, max_g: f64, count: usize) -> Result<Self> {
        if count == 0 {
            return Err(Error::InvalidGrid("grid count must be at least 1".into()));
        }
        if !(min_g.is_finite() && max_g.is_finite()) || min_g < 0.0 {
            return Err(Error::InvalidGrid(format!(
                "grid bounds must be finite and nonnegative, got [{min_g}, {max_g}]"
            )));
        }
        if count == 1 {
            return Self::new(vec![min_g]);
        }
        if max_g <= min_g {
            return Err(Error::InvalidGrid(format!(
                "grid max {max_g} must exceed min {min_g}"
            )));
        }
        let step = (max_g - min_g) / (count - 1) as f64;
        let values = (0..count)
            .map(|i| {
                if i == count - 1 {
                    max_g
                } else {
                    min_g + step * i as f64
                }
            })
            .collect();
        Self::new(values)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Index of the grid goal closest to `goal`; ties go to the smaller goal.
    pub fn nearest_index(&self, goal: f64) -> usize {
        let mut best = 0;
        for (i, v) in self.values.iter().enumerate() {
            if (v - goal).abs() < (self.values[best] - goal).abs() {
                best = i;
            }
        }
        best
    }
}

/// One value of `P(u_h | beta_i, x_r, x_e)` per grid goal.
#[derive(Debug, Clone, PartialEq)]
pub struct LikelihoodVector {
    values: Vec<f64>,
}

impl LikelihoodVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        for (index, &value) in values.iter().enumerate() {
            if !value.is_finite() || value < 0.0 {
                return Err(Error::InvalidLikelihood { index, value });
            }
        }
        Ok(Self { values })
    }

    /// The uninformative vector used when the human does not act.
    pub fn ones(len: usize) -> Self {
        Self {
            values: vec![1.0; len],
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Likelihoods divided by their maximum, floored at [`LIKELIHOOD_FLOOR`].
    ///
    /// Returns `None` when every entry is zero.
    pub fn floored_ratios(&self) -> Option<Vec<f64>> {
        let max = self.values.iter().copied().fold(0.0_f64, f64::max);
        if max <= 0.0 {
            return None;
        }
        Some(
            self.values
                .iter()
                .map(|&l| (l / max).max(LIKELIHOOD_FLOOR))
                .collect(),
        )
    }
}

/// Normalized weights over a [`GoalGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct Belief {
    grid: GoalGrid,
    weights: Vec<f64>,
}

impl Belief {
    /// Uniform prior, every weight `1/|B|`.
    pub fn uniform(grid: GoalGrid) -> Self {
        let n = grid.len();
        Self {
            weights: vec![1.0 / n as f64; n],
            grid,
        }
    }

    pub fn from_weights(grid: GoalGrid, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != grid.len() {
            return Err(Error::LengthMismatch {
                expected: grid.len(),
                got: weights.len(),
            });
        }
        if let Some((index, &value)) = weights
            .iter()
            .enumerate()
            .find(|(_, w)| !w.is_finite() || **w < 0.0 || **w > 1.0)
        {
            return Err(Error::InvalidParams(format!(
                "weight {index} outside [0, 1]: {value}"
            )));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::InvalidParams(format!(
                "weights sum to {total}, expected 1"
            )));
        }
        Ok(Self { grid, weights })
    }

    pub fn grid(&self) -> &GoalGrid {
        &self.grid
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `(beta, w)` pairs in grid order.
    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.grid
            .values()
            .iter()
            .copied()
            .zip(self.weights.iter().copied())
    }
}

/// Uniform prior over `grid`.
pub fn init_belief(grid: &GoalGrid) -> Belief {
    Belief::uniform(grid.clone())
}

/// One step of the weight recursion followed by normalization.
///
/// A constant likelihood vector leaves the belief bit-for-bit unchanged.
pub fn update_belief(belief: &Belief, likelihood: &LikelihoodVector) -> Result<Belief> {
    if likelihood.len() != belief.weights.len() {
        return Err(Error::LengthMismatch {
            expected: belief.weights.len(),
            got: likelihood.len(),
        });
    }
    let ratios = likelihood
        .floored_ratios()
        .ok_or(Error::DegeneratePosterior)?;
    if ratios.iter().all(|&r| r == 1.0) {
        return Ok(belief.clone());
    }

    let mut weights: Vec<f64> = belief
        .weights
        .iter()
        .zip(&ratios)
        .map(|(w, r)| w * r)
        .collect();
    let eta: f64 = weights.iter().sum();
    if !(eta > 0.0 && eta.is_finite()) {
        return Err(Error::DegeneratePosterior);
    }
    for w in &mut weights {
        *w /= eta;
    }
    Ok(Belief {
        grid: belief.grid.clone(),
        weights,
    })
}

/// Goal with the largest weight; ties go to the smallest goal.
pub fn map_estimate(belief: &Belief) -> f64 {
    let mut best = 0;
    for (i, &w) in belief.weights.iter().enumerate() {
        if w > belief.weights[best] {
            best = i;
        }
    }
    belief.grid.values()[best]
}

pub fn mean_estimate(belief: &Belief) -> f64 {
    belief.iter().map(|(beta, w)| beta * w).sum()
}

/// Shannon entropy in nats, with `0 ln 0 = 0`.
pub fn entropy(belief: &Belief) -> f64 {
    -belief
        .weights
        .iter()
        .filter(|&&w| w > 0.0)
        .map(|&w| w * w.ln())
        .sum::<f64>()
}
