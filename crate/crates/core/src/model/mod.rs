//! States, observable directions and the two parametrized state families.

mod config;

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::{CYCLE_LEN, DIM};

pub use config::{load_observables, parse_fraction, parse_observables, ObservableConfig};

/// Norms at or below this are treated as the zero vector.
pub const ZERO_NORM: f64 = 1e-14;

/// Largest tolerated `|<v_i|v_{i+1}>|` when validating a cyclic set.
pub const ORTHOGONALITY_TOL: f64 = 1e-10;

/// An unnormalized vector of four complex amplitudes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Vec4([Complex64; DIM]);

impl Vec4 {
    pub fn new(components: [Complex64; DIM]) -> Result<Self> {
        if components
            .iter()
            .all(|c| c.re.is_finite() && c.im.is_finite())
        {
            Ok(Self(components))
        } else {
            Err(Error::NonFinite)
        }
    }

    pub fn from_real(components: [f64; DIM]) -> Result<Self> {
        Self::new(components.map(|x| Complex64::new(x, 0.0)))
    }

    pub fn components(&self) -> &[Complex64; DIM] {
        &self.0
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `<self|other>`, conjugate-linear in `self`.
    pub fn inner(&self, other: &Vec4) -> Complex64 {
        inner(&self.0, &other.0)
    }
}

fn inner(a: &[Complex64; DIM], b: &[Complex64; DIM]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// A unit-norm pure state of the four-level system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateVector([Complex64; DIM]);

impl StateVector {
    pub fn from_real(components: [f64; DIM]) -> Result<Self> {
        normalize(&Vec4::from_real(components)?)
    }

    pub fn components(&self) -> &[Complex64; DIM] {
        &self.0
    }

    pub fn as_vec4(&self) -> Vec4 {
        Vec4(self.0)
    }

    pub fn inner(&self, other: &StateVector) -> Complex64 {
        inner(&self.0, &other.0)
    }

    /// Multiplies every amplitude by `exp(i * phase)`.
    pub fn with_global_phase(&self, phase: f64) -> StateVector {
        let factor = Complex64::from_polar(1.0, phase);
        StateVector(self.0.map(|c| c * factor))
    }
}

/// Scales `v` to unit Euclidean norm.
pub fn normalize(v: &Vec4) -> Result<StateVector> {
    let norm = v.norm();
    if norm <= ZERO_NORM {
        return Err(Error::ZeroVector { norm });
    }
    Ok(StateVector(v.0.map(|c| c / norm)))
}

/// Five unit directions `v_1..v_5` with `<v_i|v_{i+1}> = 0` (indices mod 5).
///
/// Observable `X_i` is `2|v_i><v_i| - I`. All indices taken or reported by
/// this type are 1-based.
#[derive(Debug, Clone, PartialEq)]
pub struct CyclicObservableSet {
    label: String,
    directions: [StateVector; CYCLE_LEN],
}

impl CyclicObservableSet {
    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn directions(&self) -> &[StateVector; CYCLE_LEN] {
        &self.directions
    }

    /// Direction `v_i` for `i` in `1..=5`.
    pub fn direction(&self, i: usize) -> Result<&StateVector> {
        check_index(i)?;
        Ok(&self.directions[i - 1])
    }

    /// Full matrix of overlaps `<v_i|v_j>`, 0-based storage.
    pub fn gram_matrix(&self) -> [[Complex64; CYCLE_LEN]; CYCLE_LEN] {
        gram(&self.directions)
    }

    /// The same directions relabeled so that the new `v_1` is the old
    /// `v_{1+shift}`.
    pub fn rotated(&self, shift: usize) -> CyclicObservableSet {
        let mut directions = self.directions;
        directions.rotate_left(shift % CYCLE_LEN);
        CyclicObservableSet {
            label: format!("{}@rot{}", self.label, shift % CYCLE_LEN),
            directions,
        }
    }
}

pub(crate) fn check_index(i: usize) -> Result<()> {
    if (1..=CYCLE_LEN).contains(&i) {
        Ok(())
    } else {
        Err(Error::BadIndex(i))
    }
}

pub(crate) fn next_index(i: usize) -> usize {
    i % CYCLE_LEN + 1
}

pub fn gram(directions: &[StateVector; CYCLE_LEN]) -> [[Complex64; CYCLE_LEN]; CYCLE_LEN] {
    let mut g = [[Complex64::new(0.0, 0.0); CYCLE_LEN]; CYCLE_LEN];
    for (i, row) in g.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            *cell = directions[i].inner(&directions[j]);
        }
    }
    g
}

/// Normalizes the five vectors and checks cyclic orthogonality.
pub fn build_observables(
    label: impl Into<String>,
    vectors: &[Vec4; CYCLE_LEN],
) -> Result<CyclicObservableSet> {
    let mut directions = [StateVector([Complex64::new(0.0, 0.0); DIM]); CYCLE_LEN];
    for (d, v) in directions.iter_mut().zip(vectors) {
        *d = normalize(v)?;
    }
    for i in 0..CYCLE_LEN {
        let overlap = directions[i].inner(&directions[(i + 1) % CYCLE_LEN]).norm();
        if overlap > ORTHOGONALITY_TOL {
            return Err(Error::CyclicityViolation {
                index: i + 1,
                overlap,
            });
        }
    }
    Ok(CyclicObservableSet {
        label: label.into(),
        directions,
    })
}

/// Unnormalized default directions as exact fractions `(numerator, denominator)`.
pub const DEFAULT_VECTORS: [[(i64, i64); DIM]; CYCLE_LEN] = [
    [(3, 1), (1, 1), (0, 1), (-3, 1)],
    [(1, 1), (1, 2), (3, 2), (7, 6)],
    [(4, 1), (1, 1), (-2, 1), (-9, 7)],
    [(1, 1), (1, 2), (1, 1), (35, 18)],
    [(2, 1), (0, 1), (-53, 9), (2, 1)],
];

pub const DEFAULT_LABEL: &str = "builtin";

/// The built-in five-vector configuration.
pub fn default_observables() -> CyclicObservableSet {
    let vectors = DEFAULT_VECTORS.map(|row| {
        // Numerators and denominators are small integers, so the division is
        // the correctly rounded value of the fraction.
        Vec4::from_real(row.map(|(p, q)| p as f64 / q as f64)).expect("finite constants")
    });
    build_observables(DEFAULT_LABEL, &vectors).expect("default vectors are cyclically orthogonal")
}

/// The two parametrized state families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FamilyKind {
    /// `(sin a, -sin b, cos b, cos a)`, normalized.
    Entangled,
    /// `(sin a, sin a, cos b, cos b)`, normalized.
    Product,
}

impl FamilyKind {
    pub fn at(self, alpha: f64, beta: f64) -> StateFamily {
        match self {
            FamilyKind::Entangled => StateFamily::Entangled { alpha, beta },
            FamilyKind::Product => StateFamily::Product { alpha, beta },
        }
    }

    /// Default `(alpha, beta)` window; both axes share it.
    pub fn default_window(self) -> (f64, f64) {
        match self {
            FamilyKind::Entangled => (0.0, 2.0 * PI),
            FamilyKind::Product => (-2.0 * PI, 2.0 * PI),
        }
    }

    pub fn state(self, alpha: f64, beta: f64) -> Result<StateVector> {
        make_state(&self.at(alpha, beta))
    }
}

impl fmt::Display for FamilyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FamilyKind::Entangled => "entangled",
            FamilyKind::Product => "product",
        })
    }
}

/// A state request: one of the built-in families at `(alpha, beta)` radians,
/// or explicit amplitudes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StateFamily {
    Entangled { alpha: f64, beta: f64 },
    Product { alpha: f64, beta: f64 },
    Custom(Vec4),
}

pub fn make_state(family: &StateFamily) -> Result<StateVector> {
    match *family {
        StateFamily::Entangled { alpha, beta } => {
            StateVector::from_real([alpha.sin(), -beta.sin(), beta.cos(), alpha.cos()])
        }
        StateFamily::Product { alpha, beta } => {
            let (s, c) = (alpha.sin(), beta.cos());
            if s * s + c * c <= ZERO_NORM {
                return Err(Error::DegenerateState { alpha, beta });
            }
            StateVector::from_real([s, s, c, c])
        }
        StateFamily::Custom(v) => normalize(&v),
    }
}
