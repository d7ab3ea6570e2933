//! The critical manifold `C0 = { y_i = phi(x_i) }`, its fold lines at
//! `x_i = +-2/sqrt(3)`, the nine-region stability chart of the fast
//! subsystem, and proximity-to-slow-manifold diagnostics.

use crate::integrator::Trajectory;
use crate::model::{phi, phi_prime, rhs, Params, State, FOLD_X};
use serde::{Deserialize, Serialize};

/// Connected components of `C0` minus the fold lines, plus the fold labels.
///
/// Attracting quadrants: `A1` has both `x_i > 2/sqrt(3)`, `A2` has
/// `x1 < -2/sqrt(3), x2 > 2/sqrt(3)`, `A3` both `< -2/sqrt(3)`, `A4` has
/// `x1 > 2/sqrt(3), x2 < -2/sqrt(3)`. Saddle strips: `S1` east
/// (`x1 > 2/sqrt(3)`, `|x2| < 2/sqrt(3)`), `S2` north, `S3` west, `S4`
/// south. `R` is the central repelling square.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RegionLabel {
    A1,
    A2,
    A3,
    A4,
    S1,
    S2,
    S3,
    S4,
    R,
    FoldLine,
    DoubleFold,
}

impl RegionLabel {
    pub fn is_attracting(&self) -> bool {
        matches!(self, RegionLabel::A1 | RegionLabel::A2 | RegionLabel::A3 | RegionLabel::A4)
    }

    pub fn is_saddle(&self) -> bool {
        matches!(self, RegionLabel::S1 | RegionLabel::S2 | RegionLabel::S3 | RegionLabel::S4)
    }

    pub fn is_repelling(&self) -> bool {
        matches!(self, RegionLabel::R)
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            RegionLabel::A1 => "A1",
            RegionLabel::A2 => "A2",
            RegionLabel::A3 => "A3",
            RegionLabel::A4 => "A4",
            RegionLabel::S1 => "S1",
            RegionLabel::S2 => "S2",
            RegionLabel::S3 => "S3",
            RegionLabel::S4 => "S4",
            RegionLabel::R => "R",
            RegionLabel::FoldLine => "FoldLine",
            RegionLabel::DoubleFold => "DoubleFold",
        }
    }
}

/// A point of the critical manifold, `y_i = phi(x_i)` by construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalPoint {
    pub x1: f64,
    pub x2: f64,
    pub y1: f64,
    pub y2: f64,
}

impl CriticalPoint {
    pub fn state(&self) -> State {
        State::new(self.x1, self.x2, self.y1, self.y2)
    }
}

/// The point of `C0` over `(x1, x2)`.
pub fn lift(x1: f64, x2: f64) -> CriticalPoint {
    CriticalPoint { x1, x2, y1: phi(x1), y2: phi(x2) }
}

/// Default half-width of the fold band used by [`classify_region`].
pub const DEFAULT_FOLD_TOL: f64 = 1e-9;

/// Classify `(x1, x2)` against the fold lines. A coordinate within `tol`
/// of `+-2/sqrt(3)` counts as on-fold; one on-fold coordinate gives
/// `FoldLine`, two give `DoubleFold`. Classification at the band edges is
/// boundary-sensitive by nature.
pub fn classify_region(x1: f64, x2: f64, tol: f64) -> RegionLabel {
    let on1 = (x1.abs() - FOLD_X).abs() < tol;
    let on2 = (x2.abs() - FOLD_X).abs() < tol;
    match (on1, on2) {
        (true, true) => RegionLabel::DoubleFold,
        (true, false) | (false, true) => RegionLabel::FoldLine,
        (false, false) => {
            let out1 = x1.abs() > FOLD_X;
            let out2 = x2.abs() > FOLD_X;
            match (out1, out2) {
                (true, true) => match (x1 > 0.0, x2 > 0.0) {
                    (true, true) => RegionLabel::A1,
                    (false, true) => RegionLabel::A2,
                    (false, false) => RegionLabel::A3,
                    (true, false) => RegionLabel::A4,
                },
                (true, false) => {
                    if x1 > 0.0 {
                        RegionLabel::S1
                    } else {
                        RegionLabel::S3
                    }
                }
                (false, true) => {
                    if x2 > 0.0 {
                        RegionLabel::S2
                    } else {
                        RegionLabel::S4
                    }
                }
                (false, false) => RegionLabel::R,
            }
        }
    }
}

/// Eigenvalues `(phi'(x1), phi'(x2))` of the fast-layer Jacobian, up to the
/// positive factor `1/epsilon`; the sign pattern classifies the layer
/// equilibrium independently of epsilon.
pub fn fast_jacobian_eigenvalues(x1: f64, x2: f64) -> (f64, f64) {
    (phi_prime(x1), phi_prime(x2))
}

/// Per-sample distance to the critical manifold:
/// `max(|y1 - phi(x1)|, |y2 - phi(x2)|)`.
pub fn slow_manifold_residual(traj: &Trajectory) -> Vec<f64> {
    traj.states
        .iter()
        .map(|s| (s.y1 - phi(s.x1)).abs().max((s.y2 - phi(s.x2)).abs()))
        .collect()
}

/// Maximal index runs where the trajectory dwells on the attracting sheet:
/// both `|x_i|` beyond the fold by `margin` and the fast speed below
/// `speed_threshold` (which splits segments at the jumps).
pub fn attracting_dwell_segments(
    traj: &Trajectory,
    p: &Params,
    margin: f64,
    speed_threshold: f64,
) -> Vec<(usize, usize)> {
    let mut segments = Vec::new();
    let mut start: Option<usize> = None;
    for (i, s) in traj.states.iter().enumerate() {
        let v = rhs(p, s);
        let slow = v.x1.abs().max(v.x2.abs()) < speed_threshold;
        let deep_a = s.x1.abs() > FOLD_X + margin && s.x2.abs() > FOLD_X + margin;
        if slow && deep_a {
            if start.is_none() {
                start = Some(i);
            }
        } else if let Some(s0) = start.take() {
            if i - s0 >= 2 {
                segments.push((s0, i - 1));
            }
        }
    }
    if let Some(s0) = start {
        let last = traj.len() - 1;
        if last - s0 >= 2 {
            segments.push((s0, last));
        }
    }
    segments
}

/// CSV region grid `x1,x2,label` over the lattice
/// `{x1_0 + i*dx} x {x2_0 + j*dx2}`, row-major in `x2` then `x1`.
pub fn region_grid_csv(x1_range: (f64, f64, usize), x2_range: (f64, f64, usize), tol: f64) -> String {
    let mut out = String::from("x1,x2,label\n");
    let (a1, b1, n1) = x1_range;
    let (a2, b2, n2) = x2_range;
    for i in 0..n1 {
        let x1 = if n1 > 1 { a1 + (b1 - a1) * i as f64 / (n1 - 1) as f64 } else { a1 };
        for j in 0..n2 {
            let x2 = if n2 > 1 { a2 + (b2 - a2) * j as f64 / (n2 - 1) as f64 } else { a2 };
            out.push_str(&format!(
                "{:.16e},{:.16e},{}\n",
                x1,
                x2,
                classify_region(x1, x2, tol).as_str()
            ));
        }
    }
    out
}
