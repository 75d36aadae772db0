//! Shannon entropy in bits over finite distributions.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::check_index;

/// Slack allowed outside `[0, 1]` before a probability is rejected; values
/// within it are clamped.
pub const CLAMP_TOL: f64 = 1e-12;

/// Tolerance on the total mass of a distribution.
pub const SUM_TOL: f64 = 1e-9;

fn clamp_probability(p: f64) -> Result<f64> {
    if p.is_nan() || !(-CLAMP_TOL..=1.0 + CLAMP_TOL).contains(&p) {
        Err(Error::OutOfRange(p))
    } else {
        Ok(p.clamp(0.0, 1.0))
    }
}

/// `-sum p log2 p` with `0 log 0 = 0`. No validation.
pub(crate) fn entropy_bits(probabilities: &[f64]) -> f64 {
    let h: f64 = probabilities
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| -p * p.log2())
        .sum();
    // an all-mass-on-one-cell table can come out as -0.0
    h.max(0.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteDistribution {
    probabilities: Vec<f64>,
}

impl DiscreteDistribution {
    pub fn new(probabilities: Vec<f64>) -> Result<Self> {
        if probabilities.is_empty() {
            return Err(Error::InvalidDistribution("empty distribution".into()));
        }
        let probabilities = probabilities
            .into_iter()
            .map(|p| {
                clamp_probability(p)
                    .map_err(|_| Error::InvalidDistribution(format!("entry {p} outside [0, 1]")))
            })
            .collect::<Result<Vec<_>>>()?;
        let total: f64 = probabilities.iter().sum();
        if (total - 1.0).abs() > SUM_TOL {
            return Err(Error::InvalidDistribution(format!(
                "entries sum to {total}"
            )));
        }
        Ok(Self { probabilities })
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }
}

pub fn shannon_entropy(d: &DiscreteDistribution) -> f64 {
    entropy_bits(&d.probabilities)
}

/// Entropy of a two-outcome variable with probability `p` for one outcome.
pub fn binary_entropy(p: f64) -> Result<f64> {
    let p = clamp_probability(p)?;
    Ok(entropy_bits(&[p, 1.0 - p]))
}

/// Outcome table of an adjacent pair `(X_i, X_{i+1})` under exclusivity.
///
/// The `(+1, +1)` cell is identically zero, leaving three probabilities:
/// `p_mm` for `(-1,-1)`, `p_mp` for `(-1,+1)`, `p_pm` for `(+1,-1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairDistribution {
    index: usize,
    p_mm: f64,
    p_mp: f64,
    p_pm: f64,
}

impl PairDistribution {
    /// `index` is the 1-based position of the first observable of the pair.
    pub fn new(index: usize, p_mm: f64, p_mp: f64, p_pm: f64) -> Result<Self> {
        check_index(index)?;
        let invalid = |what: String| Error::InvalidDistribution(format!("pair {index}: {what}"));
        let [p_mm, p_mp, p_pm] = [p_mm, p_mp, p_pm].map(|p| clamp_probability(p).map_err(|_| p));
        let (p_mm, p_mp, p_pm) = match (p_mm, p_mp, p_pm) {
            (Ok(a), Ok(b), Ok(c)) => (a, b, c),
            (Err(p), _, _) | (_, Err(p), _) | (_, _, Err(p)) => {
                return Err(invalid(format!("entry {p} outside [0, 1]")))
            }
        };
        let total = p_mm + p_mp + p_pm;
        if (total - 1.0).abs() > SUM_TOL {
            return Err(invalid(format!("entries sum to {total}")));
        }
        Ok(Self {
            index,
            p_mm,
            p_mp,
            p_pm,
        })
    }

    pub fn index(&self) -> usize {
        self.index
    }

    pub fn p_mm(&self) -> f64 {
        self.p_mm
    }

    pub fn p_mp(&self) -> f64 {
        self.p_mp
    }

    pub fn p_pm(&self) -> f64 {
        self.p_pm
    }

    /// `p(+1)` of the first observable of the pair.
    pub fn first_plus(&self) -> f64 {
        self.p_pm
    }

    /// `p(+1)` of the second observable of the pair.
    pub fn second_plus(&self) -> f64 {
        self.p_mp
    }

    /// Cells in `[[(-1,-1), (-1,+1)], [(+1,-1), (+1,+1)]]` order.
    pub fn cells(&self) -> [[f64; 2]; 2] {
        [[self.p_mm, self.p_mp], [self.p_pm, 0.0]]
    }
}

/// Joint entropy `H(X_i, X_{i+1})` over the three admissible outcomes.
pub fn pair_entropy(pd: &PairDistribution) -> f64 {
    entropy_bits(&[pd.p_mm, pd.p_mp, pd.p_pm])
}

/// A joint table `p(x, y)` over two finite variables, row index `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct JointTable {
    rows: usize,
    cols: usize,
    cells: Vec<f64>,
}

impl JointTable {
    pub fn new(rows: usize, cols: usize, cells: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 || cells.len() != rows * cols {
            return Err(Error::InvalidDistribution(format!(
                "{} cells for a {rows}x{cols} table",
                cells.len()
            )));
        }
        let cells = DiscreteDistribution::new(cells)?.probabilities;
        Ok(Self { rows, cols, cells })
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.cells[x * self.cols + y]
    }

    pub fn joint_entropy(&self) -> f64 {
        entropy_bits(&self.cells)
    }

    pub fn marginal_x(&self) -> Vec<f64> {
        (0..self.rows)
            .map(|x| (0..self.cols).map(|y| self.get(x, y)).sum())
            .collect()
    }

    pub fn marginal_y(&self) -> Vec<f64> {
        (0..self.cols)
            .map(|y| (0..self.rows).map(|x| self.get(x, y)).sum())
            .collect()
    }

    pub fn entropy_x(&self) -> f64 {
        entropy_bits(&self.marginal_x())
    }

    pub fn entropy_y(&self) -> f64 {
        entropy_bits(&self.marginal_y())
    }

    /// `H(X|Y) = sum_y p(y) H(X | Y = y)`, from the conditional rows.
    pub fn conditional_entropy_x_given_y(&self) -> f64 {
        self.marginal_y()
            .iter()
            .enumerate()
            .filter(|(_, &py)| py > 0.0)
            .map(|(y, &py)| {
                let cond: Vec<f64> = (0..self.rows).map(|x| self.get(x, y) / py).collect();
                py * entropy_bits(&cond)
            })
            .sum()
    }

    /// `H(Y|X)` computed the same way over rows.
    pub fn conditional_entropy_y_given_x(&self) -> f64 {
        self.marginal_x()
            .iter()
            .enumerate()
            .filter(|(_, &px)| px > 0.0)
            .map(|(x, &px)| {
                let cond: Vec<f64> = (0..self.cols).map(|y| self.get(x, y) / px).collect();
                px * entropy_bits(&cond)
            })
            .sum()
    }
}
