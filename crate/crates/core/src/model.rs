//! Parameters, phase-space states, the coupled vector field and its
//! symmetries.
//!
//! The phase space is `(x1, x2, y1, y2)` with `x` fast and `y` slow. All
//! velocities returned here are true time-`t` derivatives: the fast
//! components are already divided by `epsilon`, so an integrator sees one
//! ordinary ODE and the fast/slow split is metadata.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Fold abscissa `2/sqrt(3)`: the positive root of `phi'(x) = 0`.
pub const FOLD_X: f64 = 1.1547005383792515;

/// `phi(2/sqrt(3)) = 16/(3 sqrt(3))`, the local maximum of the cubic.
pub const PHI_AT_FOLD: f64 = 3.0792014356780038;

/// Cubic nonlinearity `phi(x) = 4x - x^3`.
#[inline]
pub fn phi(x: f64) -> f64 {
    4.0 * x - x * x * x
}

/// `phi'(x) = 4 - 3x^2`.
#[inline]
pub fn phi_prime(x: f64) -> f64 {
    4.0 - 3.0 * x * x
}

/// `phi''(x) = -6x`.
#[inline]
pub fn phi_double_prime(x: f64) -> f64 {
    -6.0 * x
}

/// How the slow equations of the two cells are wired together.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub enum CouplingMode {
    /// `y_i' = x_i - b y_i - c - k (y_i - y_j)` for both cells.
    #[default]
    SymmetricBidirectional,
    /// One-directional forcing: `y1' = x1 - b y1 - c + k y2`,
    /// `y2' = x2 - b y2 - c`.
    AsymmetricForcing,
    /// Second cell runs its own `(b2, c2, k2)`:
    /// `y2' = x2 - b2 y2 - c2 - k2 (y2 - y1)`; the first cell keeps `(b, c, k)`.
    PerturbedSecondCell { b2: f64, c2: f64, k2: f64 },
}

/// Scalar parameters of the coupled system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Params {
    /// Linear slow feedback.
    pub b: f64,
    /// Slow offset.
    pub c: f64,
    /// Coupling strength.
    pub k: f64,
    /// Time-scale ratio, must be positive.
    pub epsilon: f64,
    #[serde(default)]
    pub mode: CouplingMode,
}

impl Params {
    /// Symmetric bidirectional coupling with the given scalars.
    pub fn symmetric(b: f64, c: f64, k: f64, epsilon: f64) -> Self {
        Params { b, c, k, epsilon, mode: CouplingMode::SymmetricBidirectional }
    }

    /// One-directional forcing of cell 1 by cell 2.
    pub fn asymmetric(b: f64, c: f64, k: f64, epsilon: f64) -> Self {
        Params { b, c, k, epsilon, mode: CouplingMode::AsymmetricForcing }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if !(self.epsilon > 0.0) || !self.epsilon.is_finite() {
            return Err(ModelError::InvalidEpsilon(self.epsilon));
        }
        let finite = self.b.is_finite() && self.c.is_finite() && self.k.is_finite();
        let mode_finite = match self.mode {
            CouplingMode::PerturbedSecondCell { b2, c2, k2 } => {
                b2.is_finite() && c2.is_finite() && k2.is_finite()
            }
            _ => true,
        };
        if !finite || !mode_finite {
            return Err(ModelError::NonFiniteParameter);
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("epsilon must be positive and finite, got {0}")]
    InvalidEpsilon(f64),
    #[error("parameters must be finite")]
    NonFiniteParameter,
    #[error("operation requires mode = SymmetricBidirectional")]
    NonSymmetricMode,
}

/// A point of the 4-D phase space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct State {
    pub x1: f64,
    pub x2: f64,
    pub y1: f64,
    pub y2: f64,
}

impl State {
    pub fn new(x1: f64, x2: f64, y1: f64, y2: f64) -> Self {
        State { x1, x2, y1, y2 }
    }

    pub fn is_finite(&self) -> bool {
        self.x1.is_finite() && self.x2.is_finite() && self.y1.is_finite() && self.y2.is_finite()
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.x1, self.x2, self.y1, self.y2]
    }

    pub fn from_array(a: [f64; 4]) -> Self {
        State { x1: a[0], x2: a[1], y1: a[2], y2: a[3] }
    }

    /// Sum coordinates `(x1+x2, y1+y2, x1-x2, y1-y2)`.
    pub fn to_z(self) -> ZState {
        ZState {
            z1: self.x1 + self.x2,
            z2: self.y1 + self.y2,
            z3: self.x1 - self.x2,
            z4: self.y1 - self.y2,
        }
    }

    /// Componentwise maximum absolute difference.
    pub fn sup_distance(&self, other: &State) -> f64 {
        (self.x1 - other.x1)
            .abs()
            .max((self.x2 - other.x2).abs())
            .max((self.y1 - other.y1).abs())
            .max((self.y2 - other.y2).abs())
    }
}

/// Sum/difference coordinates diagonalizing the swap symmetry:
/// `z1 = x1+x2`, `z2 = y1+y2` span the synchrony plane, `z3 = x1-x2`,
/// `z4 = y1-y2` its orthogonal complement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZState {
    pub z1: f64,
    pub z2: f64,
    pub z3: f64,
    pub z4: f64,
}

impl ZState {
    pub fn new(z1: f64, z2: f64, z3: f64, z4: f64) -> Self {
        ZState { z1, z2, z3, z4 }
    }

    pub fn to_state(self) -> State {
        State {
            x1: 0.5 * (self.z1 + self.z3),
            x2: 0.5 * (self.z1 - self.z3),
            y1: 0.5 * (self.z2 + self.z4),
            y2: 0.5 * (self.z2 - self.z4),
        }
    }
}

/// Swap symmetry `gamma(x1,x2,y1,y2) = (x2,x1,y2,y1)`. Fix(gamma) is the
/// synchrony plane.
#[inline]
pub fn gamma(s: State) -> State {
    State { x1: s.x2, x2: s.x1, y1: s.y2, y2: s.y1 }
}

/// Swap-negate symmetry `delta(x1,x2,y1,y2) = (-x2,-x1,-y2,-y1)`. Fix(delta)
/// is the antisynchrony plane; it is a symmetry of the flow only when c = 0.
#[inline]
pub fn delta(s: State) -> State {
    State { x1: -s.x2, x2: -s.x1, y1: -s.y2, y2: -s.y1 }
}

/// Slow right-hand sides `(y1', y2')` for the given mode, as functions of
/// the full state.
#[inline]
fn slow_rhs(p: &Params, s: &State) -> (f64, f64) {
    match p.mode {
        CouplingMode::SymmetricBidirectional => (
            s.x1 - p.b * s.y1 - p.c - p.k * (s.y1 - s.y2),
            s.x2 - p.b * s.y2 - p.c - p.k * (s.y2 - s.y1),
        ),
        CouplingMode::AsymmetricForcing => (
            s.x1 - p.b * s.y1 - p.c + p.k * s.y2,
            s.x2 - p.b * s.y2 - p.c,
        ),
        CouplingMode::PerturbedSecondCell { b2, c2, k2 } => (
            s.x1 - p.b * s.y1 - p.c - p.k * (s.y1 - s.y2),
            s.x2 - b2 * s.y2 - c2 - k2 * (s.y2 - s.y1),
        ),
    }
}

/// Full vector field `(x1', x2', y1', y2')` in true time; fast components
/// come out divided by epsilon.
pub fn rhs(p: &Params, s: &State) -> State {
    let (g1, g2) = slow_rhs(p, s);
    State {
        x1: (-s.y1 + phi(s.x1)) / p.epsilon,
        x2: (-s.y2 + phi(s.x2)) / p.epsilon,
        y1: g1,
        y2: g2,
    }
}

/// Vector field in the sum/difference coordinates. Only defined for the
/// symmetric mode, where the change of coordinates block-diagonalizes the
/// linear slow part:
///
/// ```text
///     eps z1' = -z2 + phi((z1+z3)/2) + phi((z1-z3)/2)
///         z2' = z1 - b z2 - 2c
///     eps z3' = -z4 + phi((z1+z3)/2) - phi((z1-z3)/2)
///         z4' = z3 - b z4 - 2k z4
/// ```
pub fn rhs_z(p: &Params, z: &ZState) -> Result<ZState, ModelError> {
    if p.mode != CouplingMode::SymmetricBidirectional {
        return Err(ModelError::NonSymmetricMode);
    }
    let xp = 0.5 * (z.z1 + z.z3);
    let xm = 0.5 * (z.z1 - z.z3);
    Ok(ZState {
        z1: (-z.z2 + phi(xp) + phi(xm)) / p.epsilon,
        z2: z.z1 - p.b * z.z2 - 2.0 * p.c,
        z3: (-z.z4 + phi(xp) - phi(xm)) / p.epsilon,
        z4: z.z3 - p.b * z.z4 - 2.0 * p.k * z.z4,
    })
}

/// Analytic 4x4 Jacobian of [`rhs`] at `s`, row-major over
/// `(x1, x2, y1, y2)`.
pub fn jacobian(p: &Params, s: &State) -> [[f64; 4]; 4] {
    let e = p.epsilon;
    let (r3, r4) = match p.mode {
        CouplingMode::SymmetricBidirectional => {
            ([1.0, 0.0, -(p.b + p.k), p.k], [0.0, 1.0, p.k, -(p.b + p.k)])
        }
        CouplingMode::AsymmetricForcing => ([1.0, 0.0, -p.b, p.k], [0.0, 1.0, 0.0, -p.b]),
        CouplingMode::PerturbedSecondCell { b2, k2, .. } => {
            ([1.0, 0.0, -(p.b + p.k), p.k], [0.0, 1.0, k2, -(b2 + k2)])
        }
    };
    [
        [phi_prime(s.x1) / e, 0.0, -1.0 / e, 0.0],
        [0.0, phi_prime(s.x2) / e, 0.0, -1.0 / e],
        r3,
        r4,
    ]
}
