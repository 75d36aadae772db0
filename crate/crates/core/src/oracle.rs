//! Classical side of the inequality.
//!
//! A non-contextual model is a single distribution over all 32 outcome
//! tuples `(x_1, ..., x_5)`. This module evaluates `M` on such distributions,
//! samples them for falsification runs, and decides whether five prescribed
//! pair tables admit a common joint extension.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::entropy::{binary_entropy, entropy_bits, PairDistribution, SUM_TOL};
use crate::error::{Error, Result};
use crate::inequality::{m_functional, SINGLE_TERMS};
use crate::model::check_index;
use crate::simplex::phase_one;
use crate::CYCLE_LEN;

pub const ATOMS: usize = 1 << CYCLE_LEN;

/// Largest `(+1,+1)` pair mass accepted as exclusive.
pub const EXCLUSIVE_TOL: f64 = 1e-9;

/// Constraint residual above which a joint extension is declared absent.
pub const FEASIBILITY_TOL: f64 = 1e-6;

/// Classical `M` above this counts as a violation of the bound.
pub const CLASSICAL_SLACK: f64 = 1e-12;

/// Bit `k` of an atom index is set when `x_{k+1} = +1`.
fn plus(atom: usize, k: usize) -> bool {
    atom >> k & 1 == 1
}

/// A distribution over `{-1, +1}^5`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointDistribution5 {
    atoms: Vec<f64>,
}

impl JointDistribution5 {
    pub fn new(atoms: [f64; ATOMS]) -> Result<Self> {
        if let Some(&p) = atoms.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(Error::InvalidDistribution(format!(
                "atom {p} outside [0, 1]"
            )));
        }
        let total: f64 = atoms.iter().sum();
        if (total - 1.0).abs() > SUM_TOL {
            return Err(Error::InvalidDistribution(format!("atoms sum to {total}")));
        }
        Ok(Self {
            atoms: atoms.to_vec(),
        })
    }

    pub fn uniform() -> Self {
        Self {
            atoms: vec![1.0 / ATOMS as f64; ATOMS],
        }
    }

    /// All mass on one tuple; `outcomes[k]` is the value of `X_{k+1}`.
    pub fn point_mass(outcomes: [i8; CYCLE_LEN]) -> Self {
        let index = outcomes
            .iter()
            .enumerate()
            .filter(|(_, &x)| x > 0)
            .fold(0, |acc, (k, _)| acc | 1 << k);
        Self::point_mass_at(index)
    }

    pub(crate) fn point_mass_at(index: usize) -> Self {
        let mut atoms = vec![0.0; ATOMS];
        atoms[index] = 1.0;
        Self { atoms }
    }

    pub fn atoms(&self) -> &[f64] {
        &self.atoms
    }

    /// Probability of the tuple `outcomes` (entries `-1` or `+1`).
    pub fn atom(&self, outcomes: [i8; CYCLE_LEN]) -> f64 {
        let index = (0..CYCLE_LEN)
            .filter(|&k| outcomes[k] > 0)
            .fold(0, |acc, k| acc | 1 << k);
        self.atoms[index]
    }

    /// `p(+1 | X_i)`.
    pub fn single_plus(&self, i: usize) -> Result<f64> {
        check_index(i)?;
        Ok(self
            .atoms
            .iter()
            .enumerate()
            .filter(|(a, _)| plus(*a, i - 1))
            .map(|(_, p)| p)
            .sum())
    }

    fn single_plus_unchecked(&self, k: usize) -> f64 {
        (0..ATOMS)
            .filter(|&a| plus(a, k))
            .map(|a| self.atoms[a])
            .sum()
    }

    fn pair_cells(&self, k: usize) -> [[f64; 2]; 2] {
        let next = (k + 1) % CYCLE_LEN;
        let mut cells = [[0.0; 2]; 2];
        for (a, &p) in self.atoms.iter().enumerate() {
            cells[plus(a, k) as usize][plus(a, next) as usize] += p;
        }
        cells
    }
}

/// A full 2x2 outcome table of `(X_i, X_{i+1})`, rows and columns ordered
/// `-1, +1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairTable {
    pub index: usize,
    pub cells: [[f64; 2]; 2],
}

impl PairTable {
    pub fn entropy(&self) -> f64 {
        entropy_bits(&self.cells.concat())
    }

    /// Folds into the three-outcome exclusive form.
    pub fn exclusive(&self) -> Result<PairDistribution> {
        let mass = self.cells[1][1];
        if mass > EXCLUSIVE_TOL {
            return Err(Error::ExclusivityViolation {
                pair: self.index,
                mass,
            });
        }
        PairDistribution::new(
            self.index,
            self.cells[0][0] + mass,
            self.cells[0][1],
            self.cells[1][0],
        )
    }
}

impl From<&PairDistribution> for PairTable {
    fn from(pd: &PairDistribution) -> Self {
        PairTable {
            index: pd.index(),
            cells: pd.cells(),
        }
    }
}

/// Marginal table of `(X_i, X_{i+1})`, indices mod 5.
pub fn marginalize_pair(jd: &JointDistribution5, i: usize) -> Result<PairTable> {
    check_index(i)?;
    Ok(PairTable {
        index: i,
        cells: jd.pair_cells(i - 1),
    })
}

/// As [`marginalize_pair`], requiring the `(+1,+1)` cell to vanish.
pub fn marginalize_pair_exclusive(jd: &JointDistribution5, i: usize) -> Result<PairDistribution> {
    marginalize_pair(jd, i)?.exclusive()
}

/// `M` evaluated on the marginals of a joint distribution.
pub fn classical_m(jd: &JointDistribution5) -> f64 {
    let pair_h: [f64; CYCLE_LEN] =
        std::array::from_fn(|k| entropy_bits(&jd.pair_cells(k).concat()));
    let single_h = SINGLE_TERMS.map(|i| {
        binary_entropy(jd.single_plus_unchecked(i - 1)).expect("marginal of a valid distribution")
    });
    m_functional(&pair_h, &single_h)
}

/// Tuples with no two cyclically adjacent `+1` outcomes, as atom indices.
pub fn exclusive_support() -> Vec<usize> {
    (0..ATOMS)
        .filter(|&a| (0..CYCLE_LEN).all(|k| !(plus(a, k) && plus(a, (k + 1) % CYCLE_LEN))))
        .collect()
}

fn dirichlet_weights<R: Rng>(rng: &mut R, gamma: &Gamma<f64>, len: usize) -> Vec<f64> {
    loop {
        let w: Vec<f64> = (0..len).map(|_| gamma.sample(rng)).collect();
        let total: f64 = w.iter().sum();
        // tiny concentrations can underflow every draw
        if total > 0.0 && total.is_finite() {
            return w.into_iter().map(|x| x / total).collect();
        }
    }
}

fn gamma_for(concentration: f64) -> Result<Gamma<f64>> {
    Gamma::new(concentration, 1.0)
        .map_err(|e| Error::InvalidDistribution(format!("concentration {concentration}: {e}")))
}

/// A symmetric Dirichlet draw over all 32 atoms.
pub fn sample_dirichlet<R: Rng>(rng: &mut R, concentration: f64) -> Result<JointDistribution5> {
    let gamma = gamma_for(concentration)?;
    Ok(JointDistribution5 {
        atoms: dirichlet_weights(rng, &gamma, ATOMS),
    })
}

/// A symmetric Dirichlet draw over the exclusive support only.
pub fn sample_exclusive<R: Rng>(rng: &mut R, concentration: f64) -> Result<JointDistribution5> {
    let gamma = gamma_for(concentration)?;
    let support = exclusive_support();
    let weights = dirichlet_weights(rng, &gamma, support.len());
    let mut atoms = vec![0.0; ATOMS];
    for (&a, w) in support.iter().zip(weights) {
        atoms[a] = w;
    }
    Ok(JointDistribution5 { atoms })
}

/// Outcome of a joint-extension check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityVerdict {
    pub feasible: bool,
    pub witness: Option<JointDistribution5>,
    /// Largest constraint violation of the best point found.
    pub residual: f64,
}

/// Decides whether five exclusive pair tables are the marginals of one
/// joint distribution.
pub fn check_joint_extension(
    targets: &[PairDistribution; CYCLE_LEN],
) -> Result<FeasibilityVerdict> {
    let tables: Vec<PairTable> = targets.iter().map(PairTable::from).collect();
    check_joint_extension_tables(&tables.try_into().expect("five targets"))
}

/// As [`check_joint_extension`] for arbitrary 2x2 tables.
pub fn check_joint_extension_tables(
    targets: &[PairTable; CYCLE_LEN],
) -> Result<FeasibilityVerdict> {
    for (k, t) in targets.iter().enumerate() {
        if t.index != k + 1 {
            return Err(Error::MalformedTargets(format!(
                "target {} is labeled as pair {}",
                k + 1,
                t.index
            )));
        }
        let flat = t.cells.concat();
        let total: f64 = flat.iter().sum();
        if flat.iter().any(|p| !(0.0..=1.0).contains(p)) || (total - 1.0).abs() > SUM_TOL {
            return Err(Error::MalformedTargets(format!(
                "pair {} table {:?}",
                k + 1,
                t.cells
            )));
        }
    }

    let (a, b) = extension_constraints(targets);
    let outcome = phase_one(&a, &b);
    let residual = max_residual(&a, &b, &outcome.x);
    if outcome.infeasibility <= FEASIBILITY_TOL && residual <= FEASIBILITY_TOL {
        let mut atoms = outcome.x;
        let total: f64 = atoms.iter().sum();
        atoms.iter_mut().for_each(|p| *p = (*p / total).min(1.0));
        Ok(FeasibilityVerdict {
            feasible: true,
            witness: Some(JointDistribution5 { atoms }),
            residual,
        })
    } else {
        Ok(FeasibilityVerdict {
            feasible: false,
            witness: None,
            residual,
        })
    }
}

/// Normalization row followed by the 4 cells of each of the 5 pairs.
fn extension_constraints(targets: &[PairTable; CYCLE_LEN]) -> (Vec<Vec<f64>>, Vec<f64>) {
    let mut a = vec![vec![1.0; ATOMS]];
    let mut b = vec![1.0];
    for (k, t) in targets.iter().enumerate() {
        let next = (k + 1) % CYCLE_LEN;
        for (x, y) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
            a.push(
                (0..ATOMS)
                    .map(|atom| f64::from(plus(atom, k) as u8 == x && plus(atom, next) as u8 == y))
                    .collect(),
            );
            b.push(t.cells[x as usize][y as usize]);
        }
    }
    (a, b)
}

fn max_residual(a: &[Vec<f64>], b: &[f64], x: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(row, rhs)| (row.iter().zip(x).map(|(c, v)| c * v).sum::<f64>() - rhs).abs())
        .fold(0.0, f64::max)
}

/// Settings for a randomized check of the classical bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleConfig {
    pub samples: u64,
    pub seed: u64,
    /// Dirichlet concentrations, used round-robin across samples.
    pub concentrations: Vec<f64>,
    /// Restrict samples to the exclusive support.
    pub exclusive: bool,
    /// Worker threads; the summary does not depend on it.
    pub workers: usize,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            samples: 100_000,
            seed: 0,
            concentrations: vec![0.1, 1.0, 10.0],
            exclusive: false,
            workers: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleSummary {
    pub samples: u64,
    pub point_masses: u64,
    pub max_m_observed: f64,
    pub violations_found: u64,
    pub seed: u64,
}

const CHUNK: u64 = 4096;

/// Evaluates [`classical_m`] on `samples` random joint distributions and on
/// every point mass.
///
/// Chunk `c` of the samples draws from ChaCha8 seeded with `seed` on stream
/// `c`, so the summary is identical for any worker count.
pub fn run_classical_oracle(config: &OracleConfig) -> Result<OracleSummary> {
    if config.concentrations.is_empty() {
        return Err(Error::InvalidDistribution("no concentrations given".into()));
    }
    let gammas = config
        .concentrations
        .iter()
        .map(|&c| gamma_for(c))
        .collect::<Result<Vec<_>>>()?;
    let support = exclusive_support();

    let chunk_stats = |chunk: u64| -> (f64, u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        rng.set_stream(chunk);
        let start = chunk * CHUNK;
        let end = (start + CHUNK).min(config.samples);
        let mut max_m = f64::NEG_INFINITY;
        let mut violations = 0;
        for s in start..end {
            let gamma = &gammas[(s % gammas.len() as u64) as usize];
            let jd = if config.exclusive {
                let mut atoms = vec![0.0; ATOMS];
                for (&a, w) in support
                    .iter()
                    .zip(dirichlet_weights(&mut rng, gamma, support.len()))
                {
                    atoms[a] = w;
                }
                JointDistribution5 { atoms }
            } else {
                JointDistribution5 {
                    atoms: dirichlet_weights(&mut rng, gamma, ATOMS),
                }
            };
            let m = classical_m(&jd);
            max_m = max_m.max(m);
            violations += u64::from(m > CLASSICAL_SLACK || m.is_nan());
        }
        (max_m, violations)
    };

    let chunks = config.samples.div_ceil(CHUNK);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers.max(1))
        .build()
        .map_err(|e| Error::InvalidDistribution(format!("thread pool: {e}")))?;
    let (mut max_m, mut violations) = pool.install(|| {
        (0..chunks)
            .into_par_iter()
            .map(chunk_stats)
            .reduce(|| (f64::NEG_INFINITY, 0), |a, b| (a.0.max(b.0), a.1 + b.1))
    });

    for index in 0..ATOMS {
        let m = classical_m(&JointDistribution5::point_mass_at(index));
        max_m = max_m.max(m);
        violations += u64::from(m > CLASSICAL_SLACK || m.is_nan());
    }

    Ok(OracleSummary {
        samples: config.samples,
        point_masses: ATOMS as u64,
        max_m_observed: max_m,
        violations_found: violations,
        seed: config.seed,
    })
}
