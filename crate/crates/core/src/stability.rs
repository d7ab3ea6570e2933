//! Transverse linear stability of the synchrony and antisynchrony planes,
//! the synchrony/antisynchrony/bistability predicates, and full-system
//! equilibrium finding.
//!
//! In the sum/difference coordinates the linearization at a synchronous
//! point block-diagonalizes; the block transverse to the synchrony plane is
//!
//! ```text
//!     N_gamma(x) = | phi'(x)/eps   -1/eps    |
//!                  | 1             -(b+2k)   |
//! ```
//!
//! and the block transverse to the antisynchrony plane (a symmetry only for
//! c = 0) replaces `b + 2k` by `b`. The plane is attracting at `x` when the
//! block has positive determinant and negative trace.

use crate::cubic::solve_cubic;
use crate::integrator::Trajectory;
use crate::model::{jacobian, phi, phi_prime, rhs, CouplingMode, Params, State};
use nalgebra::Matrix4;
use serde::{Deserialize, Serialize};

/// Transverse 2x2 linearization report.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TransverseReport {
    pub matrix: [[f64; 2]; 2],
    pub det: f64,
    pub trace: f64,
    pub attracting: bool,
    pub normally_hyperbolic: bool,
}

fn transverse_report(p: &Params, x: f64, slow_coef: f64) -> TransverseReport {
    let e = p.epsilon;
    let dp = phi_prime(x);
    let matrix = [[dp / e, -1.0 / e], [1.0, -slow_coef]];
    let det = matrix[0][0] * matrix[1][1] - matrix[0][1] * matrix[1][0];
    let trace = matrix[0][0] + matrix[1][1];
    let attracting = det > 0.0 && trace < 0.0;
    // no eigenvalue on the imaginary axis: nonzero determinant and not a
    // purely imaginary pair (trace = 0 with det > 0)
    let normally_hyperbolic = det != 0.0 && !(trace == 0.0 && det > 0.0);
    TransverseReport { matrix, det, trace, attracting, normally_hyperbolic }
}

/// Transverse block of the linearization at a synchronous point `(x, x)` on
/// the critical manifold. Closed forms:
/// `det = -((b+2k) phi'(x) - 1)/eps`, `trace = phi'(x)/eps - (b+2k)`.
pub fn n_gamma(p: &Params, x: f64) -> TransverseReport {
    transverse_report(p, x, p.b + 2.0 * p.k)
}

/// Transverse block at an antisynchronous point `(x, -x)`:
/// `det = -(b phi'(x) - 1)/eps`, `trace = phi'(x)/eps - b`.
pub fn n_delta(p: &Params, x: f64) -> TransverseReport {
    transverse_report(p, x, p.b)
}

/// Closed-form determinant of [`n_gamma`], for cross-checking.
pub fn n_gamma_det_closed(p: &Params, x: f64) -> f64 {
    -((p.b + 2.0 * p.k) * phi_prime(x) - 1.0) / p.epsilon
}

/// Closed-form trace of [`n_gamma`].
pub fn n_gamma_trace_closed(p: &Params, x: f64) -> f64 {
    phi_prime(x) / p.epsilon - (p.b + 2.0 * p.k)
}

/// Closed-form determinant of [`n_delta`].
pub fn n_delta_det_closed(p: &Params, x: f64) -> f64 {
    -(p.b * phi_prime(x) - 1.0) / p.epsilon
}

/// Closed-form trace of [`n_delta`].
pub fn n_delta_trace_closed(p: &Params, x: f64) -> f64 {
    phi_prime(x) / p.epsilon - p.b
}

/// Sufficient condition for the synchrony plane's intersection with the
/// attracting sheet to be normally hyperbolic and locally attracting:
/// `k > -b/2` (strict).
pub fn synchrony_attracting(p: &Params) -> bool {
    p.k > -p.b / 2.0
}

/// Non-strict variant `k >= -b/2`: pointwise normal hyperbolicity holds on
/// the closed half-line, so both predicates are exposed and callers choose.
pub fn synchrony_attracting_nonstrict(p: &Params) -> bool {
    p.k >= -p.b / 2.0
}

/// Antisynchrony predicate report.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct AntisynchronyReport {
    /// The attraction condition `b > 0`.
    pub attracting: bool,
    /// True when c = 0, so the antisynchrony plane is exactly invariant.
    pub exact_invariance: bool,
    /// |c|: for small nonzero values the attracting structure persists with
    /// offset O(c).
    pub invariance_defect: f64,
}

/// Sufficient condition for an attracting antisynchronous structure:
/// `b > 0`; exact for `c = 0`, approximate with precision `O(c)` otherwise.
pub fn antisynchrony_attracting(p: &Params) -> AntisynchronyReport {
    AntisynchronyReport {
        attracting: p.b > 0.0,
        exact_invariance: p.c == 0.0,
        invariance_defect: p.c.abs(),
    }
}

/// Hyperbolicity classes of a full-system equilibrium.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EquilibriumKind {
    Sink,
    Source,
    SaddleLike,
    Nonhyperbolic,
}

/// A full-system equilibrium with its 4x4 eigenvalues.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Equilibrium {
    pub state: State,
    /// Eigenvalues as (re, im) pairs, sorted by real part.
    pub eigenvalues: [(f64, f64); 4],
    pub stability: EquilibriumKind,
    pub on_synchrony_plane: bool,
}

/// All equilibria of the full system: `y_i = phi(x_i)` with both slow
/// right-hand sides zero. Found by multistart Newton refinement on a 60x60
/// grid over `[-3, 3]^2` in the fast variables, deduplicated at distance
/// 1e-6; two cubic curves intersect in at most nine points, which the grid
/// resolves in practice. Synchrony-plane solutions are cross-checked against
/// the scalar equation `x - b phi(x) - c = 0`.
pub fn find_equilibria(p: &Params) -> Vec<Equilibrium> {
    // slow residuals on the critical manifold, mode-aware
    let g = |x1: f64, x2: f64| -> (f64, f64) {
        let s = State::new(x1, x2, phi(x1), phi(x2));
        let v = rhs(p, &s);
        (v.y1, v.y2)
    };
    let n = 60;
    let mut found: Vec<(f64, f64)> = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let x1 = -3.0 + 6.0 * (i as f64 + 0.5) / n as f64;
            let x2 = -3.0 + 6.0 * (j as f64 + 0.5) / n as f64;
            if let Some((r1, r2)) = newton_2d(&g, x1, x2) {
                if r1.abs() > 3.2 || r2.abs() > 3.2 {
                    continue;
                }
                if !found.iter().any(|(a, b)| (a - r1).abs() < 1e-6 && (b - r2).abs() < 1e-6) {
                    found.push((r1, r2));
                }
            }
        }
    }
    found.sort_by(|a, b| a.partial_cmp(b).unwrap());

    let out: Vec<Equilibrium> = found
        .into_iter()
        .map(|(x1, x2)| {
            let state = State::new(x1, x2, phi(x1), phi(x2));
            let jac = jacobian(p, &state);
            let m = Matrix4::from_fn(|r, c| jac[r][c]);
            let eigs = m.complex_eigenvalues();
            let mut ev: Vec<(f64, f64)> = eigs.iter().map(|z| (z.re, z.im)).collect();
            ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let eigenvalues = [ev[0], ev[1], ev[2], ev[3]];
            let scale = ev.iter().fold(1.0_f64, |m, (re, im)| m.max(re.abs()).max(im.abs()));
            let tol = 1e-9 * scale;
            let stability = if ev.iter().any(|(re, _)| re.abs() <= tol) {
                EquilibriumKind::Nonhyperbolic
            } else if ev.iter().all(|(re, _)| *re < 0.0) {
                EquilibriumKind::Sink
            } else if ev.iter().all(|(re, _)| *re > 0.0) {
                EquilibriumKind::Source
            } else {
                EquilibriumKind::SaddleLike
            };
            Equilibrium {
                state,
                eigenvalues,
                stability,
                on_synchrony_plane: (x1 - x2).abs() < 1e-6,
            }
        })
        .collect();

    // cross-check: synchrony-plane equilibria of the symmetric coupling are
    // the real roots of b x^3 + (1 - 4b) x - c = 0
    if p.mode == CouplingMode::SymmetricBidirectional {
        let roots = solve_cubic(p.b, 0.0, 1.0 - 4.0 * p.b, -p.c);
        for r in roots.iter().filter(|r| r.abs() <= 3.0) {
            debug_assert!(
                out.iter().any(|e| e.on_synchrony_plane && (e.state.x1 - r).abs() < 1e-5),
                "synchrony-plane root {r} missed by the grid search"
            );
        }
    }
    out
}

fn newton_2d(g: &impl Fn(f64, f64) -> (f64, f64), mut x1: f64, mut x2: f64) -> Option<(f64, f64)> {
    for _ in 0..60 {
        let (g1, g2) = g(x1, x2);
        if !g1.is_finite() || !g2.is_finite() {
            return None;
        }
        if g1.abs().max(g2.abs()) < 1e-13 {
            return Some((x1, x2));
        }
        // finite-difference Jacobian keeps this correct for every mode
        let h = 1e-7;
        let (a1, a2) = g(x1 + h, x2);
        let (b1, b2) = g(x1, x2 + h);
        let j11 = (a1 - g1) / h;
        let j21 = (a2 - g2) / h;
        let j12 = (b1 - g1) / h;
        let j22 = (b2 - g2) / h;
        let det = j11 * j22 - j12 * j21;
        if det.abs() < 1e-14 {
            return None;
        }
        x1 -= (g1 * j22 - g2 * j12) / det;
        x2 -= (g2 * j11 - g1 * j21) / det;
        if x1.abs() > 50.0 || x2.abs() > 50.0 {
            return None;
        }
    }
    None
}

/// Sup-norm residual of the full vector field at a claimed equilibrium.
pub fn equilibrium_residual(p: &Params, e: &Equilibrium) -> f64 {
    rhs(p, &e.state).to_array().iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}

/// Synchrony and antisynchrony precision of a trajectory after `t0`:
/// `delta_sync = sup_{t > t0} max(|x1-x2|, |y1-y2|)` over the stored
/// samples, and `delta_anti` likewise with sums.
pub fn synchrony_precision(traj: &Trajectory, t0: f64) -> (f64, f64) {
    let mut delta_sync = 0.0_f64;
    let mut delta_anti = 0.0_f64;
    for (t, s) in traj.times.iter().zip(traj.states.iter()) {
        if *t < t0 {
            continue;
        }
        delta_sync = delta_sync.max((s.x1 - s.x2).abs()).max((s.y1 - s.y2).abs());
        delta_anti = delta_anti.max((s.x1 + s.x2).abs()).max((s.y1 + s.y2).abs());
    }
    (delta_sync, delta_anti)
}
