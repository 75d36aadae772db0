//! Quantum outcome statistics and the entropic functional `M`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::entropy::{binary_entropy, entropy_bits, pair_entropy, PairDistribution};
use crate::error::{Error, Result};
use crate::model::{check_index, next_index, CyclicObservableSet, StateVector};
use crate::CYCLE_LEN;

/// Slack on `p(1|X_i) + p(1|X_{i+1}) <= 1`.
pub const EXCLUSIVITY_TOL: f64 = 1e-9;

/// Observables whose single entropies enter `M` (1-based).
pub const SINGLE_TERMS: [usize; 3] = [2, 3, 4];

/// `p(+1 | X_i) = |<v_i|psi>|^2`.
pub fn outcome_probability(
    set: &CyclicObservableSet,
    i: usize,
    state: &StateVector,
) -> Result<f64> {
    let v = set.direction(i)?;
    Ok(v.inner(state).norm_sqr().clamp(0.0, 1.0))
}

/// Joint outcome table of `(X_i, X_{i+1})`, indices mod 5.
pub fn pair_distribution(
    set: &CyclicObservableSet,
    i: usize,
    state: &StateVector,
) -> Result<PairDistribution> {
    check_index(i)?;
    let first = outcome_probability(set, i, state)?;
    let second = outcome_probability(set, next_index(i), state)?;
    pair_from_singles(i, first, second)
}

fn pair_from_singles(i: usize, first: f64, second: f64) -> Result<PairDistribution> {
    let plus = first + second;
    if plus > 1.0 + EXCLUSIVITY_TOL {
        return Err(Error::ExclusivityViolation {
            pair: i,
            mass: plus - 1.0,
        });
    }
    PairDistribution::new(i, (1.0 - plus).max(0.0), second, first)
}

/// Entropies and the value of `M` for one set of statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InequalityReport {
    #[serde(rename = "m_bits")]
    pub m_value: f64,
    /// `H(X_i, X_{i+1})` for `i = 1..5`; the last entry is `H(X5, X1)`.
    pub pair_entropies: [f64; CYCLE_LEN],
    /// `H(X2), H(X3), H(X4)`.
    pub single_entropies: [f64; 3],
    /// `p(+1 | X_i)` for `i = 1..5`.
    pub single_probabilities: [f64; CYCLE_LEN],
    pub violated: bool,
}

impl InequalityReport {
    pub fn from_parts(
        pair_entropies: [f64; CYCLE_LEN],
        single_entropies: [f64; 3],
        single_probabilities: [f64; CYCLE_LEN],
    ) -> Self {
        let m_value = m_functional(&pair_entropies, &single_entropies);
        Self {
            m_value,
            pair_entropies,
            single_entropies,
            single_probabilities,
            violated: m_value > 0.0,
        }
    }

    /// `M` recomputed from the stored entropies.
    pub fn recompute_m(&self) -> f64 {
        m_functional(&self.pair_entropies, &self.single_entropies)
    }
}

/// `H(X5X1) - H(X1X2) - H(X2X3) - H(X3X4) - H(X4X5) + H(X2) + H(X3) + H(X4)`.
pub fn m_functional(pair_entropies: &[f64; CYCLE_LEN], single_entropies: &[f64; 3]) -> f64 {
    let [h12, h23, h34, h45, h51] = *pair_entropies;
    h51 - h12 - h23 - h34 - h45 + single_entropies.iter().sum::<f64>()
}

pub fn evaluate_m(set: &CyclicObservableSet, state: &StateVector) -> Result<InequalityReport> {
    let mut singles = [0.0; CYCLE_LEN];
    for (i, p) in singles.iter_mut().enumerate() {
        *p = outcome_probability(set, i + 1, state)?;
    }
    let mut pair_h = [0.0; CYCLE_LEN];
    for (i, h) in pair_h.iter_mut().enumerate() {
        let pd = pair_from_singles(i + 1, singles[i], singles[(i + 1) % CYCLE_LEN])?;
        *h = pair_entropy(&pd);
    }
    let mut single_h = [0.0; 3];
    for (h, &i) in single_h.iter_mut().zip(&SINGLE_TERMS) {
        *h = binary_entropy(singles[i - 1])?;
    }
    Ok(InequalityReport::from_parts(pair_h, single_h, singles))
}

/// Plug-in estimate of `M` from `shots_per_pair` simulated joint
/// measurements of each adjacent pair.
///
/// Each pair is an independent experiment. The single-observable frequency
/// `p(+1|X_i)` pools both experiments that contain `X_i`. The generator is
/// ChaCha8 seeded with `seed`; equal inputs give equal reports.
pub fn estimate_m_sampled(
    set: &CyclicObservableSet,
    state: &StateVector,
    shots_per_pair: u64,
    seed: u64,
) -> Result<InequalityReport> {
    if shots_per_pair == 0 {
        return Err(Error::InvalidDistribution(
            "shots_per_pair must be at least 1".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = shots_per_pair as f64;
    let mut plus_counts = [0u64; CYCLE_LEN];
    let mut pair_h = [0.0; CYCLE_LEN];
    for i in 1..=CYCLE_LEN {
        let pd = pair_distribution(set, i, state)?;
        // counts of (-1,-1), (-1,+1), (+1,-1)
        let mut counts = [0u64; 3];
        for _ in 0..shots_per_pair {
            let u: f64 = rng.random();
            let cell = if u < pd.p_pm() {
                2
            } else if u < pd.p_pm() + pd.p_mp() {
                1
            } else {
                0
            };
            counts[cell] += 1;
        }
        pair_h[i - 1] = entropy_bits(&counts.map(|c| c as f64 / n));
        plus_counts[i - 1] += counts[2];
        plus_counts[next_index(i) - 1] += counts[1];
    }
    let singles = plus_counts.map(|c| c as f64 / (2.0 * n));
    let mut single_h = [0.0; 3];
    for (h, &i) in single_h.iter_mut().zip(&SINGLE_TERMS) {
        *h = binary_entropy(singles[i - 1])?;
    }
    Ok(InequalityReport::from_parts(pair_h, single_h, singles))
}
