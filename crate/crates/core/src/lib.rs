//! Numerical toolkit for two FitzHugh-Nagumo cells coupled linearly through
//! the slow equations:
//!
//! ```text
//!     eps * x1' = -y1 + phi(x1)
//!     eps * x2' = -y2 + phi(x2)
//!           y1' = x1 - b*y1 - c - k*(y1 - y2)
//!           y2' = x2 - b*y2 - c - k*(y2 - y1)
//! ```
//!
//! with the cubic nonlinearity `phi(x) = 4x - x^3`. The crate provides:
//!
//! * the vector field in original and sum/difference coordinates, together
//!   with the swap and swap-negate symmetries ([`model`]);
//! * a stiff-capable adaptive integrator with dense output and event
//!   detection ([`integrator`]);
//! * the critical manifold `y_i = phi(x_i)`, its fold lines at
//!   `x_i = +-2/sqrt(3)`, and the nine-region stability chart ([`geometry`]);
//! * the reduced slow flow, its desingularizations, folded equilibria and
//!   their classification, double-fold canard verdicts, and a singular-orbit
//!   generator ([`reduced`]);
//! * transverse stability of the synchrony and antisynchrony planes and
//!   full-system equilibria ([`stability`]);
//! * trajectory post-processing: oscillation segmentation, canard detection,
//!   mixed-mode signatures and relaxation-oscillation detection ([`analysis`]).

pub mod analysis;
pub mod cubic;
pub mod geometry;
pub mod integrator;
pub mod model;
pub mod reduced;
pub mod stability;

pub use analysis::{
    detect_canard, detect_relaxation_oscillation, mmo_signature, segment_oscillations,
    CanardReport, MmoSignature, OscKind, OscillationEvent, RelaxationOscillation,
};
pub use geometry::{classify_region, fast_jacobian_eigenvalues, lift, CriticalPoint, RegionLabel};
pub use integrator::{
    integrate, integrate_two, Direction, EventKind, EventSpec, FastVar, IntegratorConfig,
    IntegratorError, Method, Trajectory, TrajectoryEvent,
};
pub use model::{
    delta, gamma, phi, phi_double_prime, phi_prime, rhs, rhs_z, CouplingMode, ModelError, Params,
    State, ZState, FOLD_X, PHI_AT_FOLD,
};
pub use reduced::{
    double_fold_jacobian, f_field, find_folded_equilibria, folded_node_exists, h_field,
    jump_target, singular_orbit, slow_rhs_on_c0, table_classification, BoundaryArc, CanardVerdict,
    FoldedEquilibrium, SingularOrbit, StabilityClass,
};
pub use stability::{
    antisynchrony_attracting, find_equilibria, n_delta, n_gamma, synchrony_attracting,
    synchrony_precision, Equilibrium, TransverseReport,
};
