//! Adaptive time integration of the coupled system with dense output and
//! event detection.
//!
//! The default method is a linearly implicit Rosenbrock pair of order 2(3)
//! with the analytic Jacobian of the vector field; it is L-stable, which the
//! stiff regime `epsilon << 1` requires. An explicit Dormand-Prince 5(4)
//! scheme is included as a cross-check for non-stiff runs.
//!
//! Dense output is cubic Hermite on each accepted step, built from the
//! states and exact derivatives at the step endpoints (both methods evaluate
//! the derivative at the new point anyway). Events are located by sign-change
//! bracketing on the dense output, refined by bisection.

use crate::model::{jacobian, rhs, Params, State, FOLD_X};
use nalgebra::{Matrix4, Vector4};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Which fast variable an operation refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FastVar {
    X1,
    X2,
}

/// Crossing direction filter for events.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum Direction {
    Rising,
    Falling,
    #[default]
    Any,
}

/// Scalar event functions whose zeros are located along the trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum EventKind {
    /// `x_i - sign * 2/sqrt(3)`, the fold lines of the critical manifold.
    FoldCrossing { variable: FastVar, sign: i8 },
    /// `normal . state - offset` for an arbitrary hyperplane.
    PlaneCrossing { normal: [f64; 4], offset: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventSpec {
    pub id: String,
    pub kind: EventKind,
    #[serde(default)]
    pub direction: Direction,
}

impl EventSpec {
    pub fn fold(id: impl Into<String>, variable: FastVar, sign: i8) -> Self {
        EventSpec { id: id.into(), kind: EventKind::FoldCrossing { variable, sign }, direction: Direction::Any }
    }

    pub fn plane(id: impl Into<String>, normal: [f64; 4], offset: f64, direction: Direction) -> Self {
        EventSpec { id: id.into(), kind: EventKind::PlaneCrossing { normal, offset }, direction }
    }

    fn eval(&self, s: &State) -> f64 {
        match &self.kind {
            EventKind::FoldCrossing { variable, sign } => {
                let x = match variable {
                    FastVar::X1 => s.x1,
                    FastVar::X2 => s.x2,
                };
                x - (*sign as f64) * FOLD_X
            }
            EventKind::PlaneCrossing { normal, offset } => {
                let a = s.to_array();
                normal.iter().zip(a.iter()).map(|(n, v)| n * v).sum::<f64>() - offset
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum Method {
    /// Linearly implicit Rosenbrock 2(3), L-stable, analytic Jacobian.
    #[default]
    Rosenbrock23,
    /// Explicit Dormand-Prince 5(4); cross-check for non-stiff runs.
    DormandPrince54,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IntegratorConfig {
    pub rtol: f64,
    pub atol: f64,
    pub t_end: f64,
    pub max_steps: usize,
    /// Initial step size; chosen automatically when absent.
    pub initial_step: Option<f64>,
    #[serde(default)]
    pub events: Vec<EventSpec>,
    #[serde(default)]
    pub method: Method,
}

impl IntegratorConfig {
    /// Defaults: rtol 1e-8, atol 1e-10, Rosenbrock, no events.
    pub fn new(t_end: f64) -> Self {
        IntegratorConfig {
            rtol: 1e-8,
            atol: 1e-10,
            t_end,
            max_steps: 20_000_000,
            initial_step: None,
            events: Vec::new(),
            method: Method::Rosenbrock23,
        }
    }

    pub fn with_events(mut self, events: Vec<EventSpec>) -> Self {
        self.events = events;
        self
    }

    pub fn with_method(mut self, method: Method) -> Self {
        self.method = method;
        self
    }

    pub fn with_tolerances(mut self, rtol: f64, atol: f64) -> Self {
        self.rtol = rtol;
        self.atol = atol;
        self
    }

    fn validate(&self) -> Result<(), IntegratorError> {
        if !(self.rtol > 0.0) || !(self.atol > 0.0) {
            return Err(IntegratorError::InvalidConfig("rtol and atol must be positive".into()));
        }
        if !(self.t_end > 0.0) {
            return Err(IntegratorError::InvalidConfig("t_end must be positive".into()));
        }
        if self.max_steps == 0 {
            return Err(IntegratorError::InvalidConfig("max_steps must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum IntegratorError {
    #[error("invalid integrator config: {0}")]
    InvalidConfig(String),
    #[error("step size underflow at t = {t}")]
    StepSizeUnderflow { t: f64 },
    #[error("exceeded {0} steps")]
    MaxStepsExceeded(usize),
    #[error("non-finite state at t = {t}")]
    NonFiniteState { t: f64 },
    #[error(transparent)]
    Model(#[from] crate::model::ModelError),
}

/// An event occurrence: localized time, event id and the interpolated state.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrajectoryEvent {
    pub t: f64,
    pub id: String,
    pub state: State,
}

/// Time-stamped solution samples at the accepted steps, with the exact
/// derivative at each sample for dense (cubic Hermite) interpolation.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<State>,
    pub derivs: Vec<State>,
    pub events: Vec<TrajectoryEvent>,
    pub accepted: usize,
    pub rejected: usize,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn start_time(&self) -> f64 {
        self.times[0]
    }

    pub fn end_time(&self) -> f64 {
        *self.times.last().unwrap()
    }

    pub fn end_state(&self) -> State {
        *self.states.last().unwrap()
    }

    /// Dense evaluation at `t` (clamped to the trajectory span) by cubic
    /// Hermite interpolation on the enclosing step.
    pub fn sample(&self, t: f64) -> State {
        let t = t.clamp(self.start_time(), self.end_time());
        let idx = match self.times.binary_search_by(|probe| probe.partial_cmp(&t).unwrap()) {
            Ok(i) => return self.states[i],
            Err(i) => i.saturating_sub(1).min(self.times.len() - 2),
        };
        hermite(
            self.times[idx],
            self.times[idx + 1],
            &self.states[idx],
            &self.states[idx + 1],
            &self.derivs[idx],
            &self.derivs[idx + 1],
            t,
        )
    }

    /// Derivative of the interpolant at `t`.
    pub fn sample_deriv(&self, t: f64) -> State {
        let t = t.clamp(self.start_time(), self.end_time());
        let idx = match self.times.binary_search_by(|probe| probe.partial_cmp(&t).unwrap()) {
            Ok(i) => return self.derivs[i.min(self.times.len() - 1)],
            Err(i) => i.saturating_sub(1).min(self.times.len() - 2),
        };
        hermite_deriv(
            self.times[idx],
            self.times[idx + 1],
            &self.states[idx],
            &self.states[idx + 1],
            &self.derivs[idx],
            &self.derivs[idx + 1],
            t,
        )
    }

    /// CSV serialization: header `t,x1,x2,y1,y2`, one row per accepted step,
    /// 17 significant digits, `\n` line endings.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(self.len() * 96 + 16);
        out.push_str("t,x1,x2,y1,y2\n");
        for (t, s) in self.times.iter().zip(self.states.iter()) {
            out.push_str(&format!(
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}\n",
                t, s.x1, s.x2, s.y1, s.y2
            ));
        }
        out
    }

    /// Sidecar JSON list of the localized events.
    pub fn events_to_json(&self) -> String {
        serde_json::to_string_pretty(&self.events).expect("event serialization")
    }
}

fn hermite(t0: f64, t1: f64, y0: &State, y1: &State, f0: &State, f1: &State, t: f64) -> State {
    let h = t1 - t0;
    let s = (t - t0) / h;
    let s2 = s * s;
    let s3 = s2 * s;
    let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
    let h10 = s3 - 2.0 * s2 + s;
    let h01 = -2.0 * s3 + 3.0 * s2;
    let h11 = s3 - s2;
    let a0 = y0.to_array();
    let a1 = y1.to_array();
    let d0 = f0.to_array();
    let d1 = f1.to_array();
    let mut out = [0.0; 4];
    for i in 0..4 {
        out[i] = h00 * a0[i] + h10 * h * d0[i] + h01 * a1[i] + h11 * h * d1[i];
    }
    State::from_array(out)
}

fn hermite_deriv(t0: f64, t1: f64, y0: &State, y1: &State, f0: &State, f1: &State, t: f64) -> State {
    let h = t1 - t0;
    let s = (t - t0) / h;
    let s2 = s * s;
    let dh00 = (6.0 * s2 - 6.0 * s) / h;
    let dh10 = 3.0 * s2 - 4.0 * s + 1.0;
    let dh01 = (-6.0 * s2 + 6.0 * s) / h;
    let dh11 = 3.0 * s2 - 2.0 * s;
    let a0 = y0.to_array();
    let a1 = y1.to_array();
    let d0 = f0.to_array();
    let d1 = f1.to_array();
    let mut out = [0.0; 4];
    for i in 0..4 {
        out[i] = dh00 * a0[i] + dh10 * d0[i] + dh01 * a1[i] + dh11 * d1[i];
    }
    State::from_array(out)
}

/// Integrate from `s0` at t = 0 up to `cfg.t_end`.
pub fn integrate(p: &Params, s0: State, cfg: &IntegratorConfig) -> Result<Trajectory, IntegratorError> {
    cfg.validate()?;
    p.validate()?;
    if !s0.is_finite() {
        return Err(IntegratorError::NonFiniteState { t: 0.0 });
    }
    match cfg.method {
        Method::Rosenbrock23 => drive(p, s0, cfg, rosenbrock_step),
        Method::DormandPrince54 => drive(p, s0, cfg, dopri_step),
    }
}

/// Integrate two initial conditions independently under the same config.
pub fn integrate_two(
    p: &Params,
    s0a: State,
    s0b: State,
    cfg: &IntegratorConfig,
) -> Result<(Trajectory, Trajectory), IntegratorError> {
    Ok((integrate(p, s0a, cfg)?, integrate(p, s0b, cfg)?))
}

struct StepResult {
    y_new: State,
    f_new: State,
    err_vec: [f64; 4],
}

type Stepper = fn(&Params, &State, &State, f64) -> Option<StepResult>;

/// Scaled RMS norm of the embedded error estimate. The scale is symmetric
/// under coordinate permutations, so conjugated runs see identical step
/// sequences up to roundoff.
fn error_norm(err: &[f64; 4], y0: &State, y1: &State, rtol: f64, atol: f64) -> f64 {
    let a0 = y0.to_array();
    let a1 = y1.to_array();
    let mut acc = 0.0;
    for i in 0..4 {
        let sc = atol + rtol * a0[i].abs().max(a1[i].abs());
        let r = err[i] / sc;
        acc += r * r;
    }
    (acc / 4.0).sqrt()
}

const ROS_D: f64 = 0.292893218813452476; // 1/(2+sqrt(2))
const ROS_E32: f64 = 7.414213562373095049; // 6+sqrt(2)

fn rosenbrock_step(p: &Params, y: &State, f0: &State, h: f64) -> Option<StepResult> {
    let j = jacobian(p, y);
    let jmat = Matrix4::from_fn(|r, c| j[r][c]);
    let w = Matrix4::identity() - jmat * (h * ROS_D);
    let lu = w.lu();

    let v_f0 = Vector4::from(f0.to_array());
    let k1 = lu.solve(&v_f0)?;

    let mid = State::from_array([
        y.x1 + 0.5 * h * k1[0],
        y.x2 + 0.5 * h * k1[1],
        y.y1 + 0.5 * h * k1[2],
        y.y2 + 0.5 * h * k1[3],
    ]);
    let f1 = Vector4::from(rhs(p, &mid).to_array());
    let k2 = lu.solve(&(f1 - k1))? + k1;

    let y_new = State::from_array([
        y.x1 + h * k2[0],
        y.x2 + h * k2[1],
        y.y1 + h * k2[2],
        y.y2 + h * k2[3],
    ]);
    let f_new_state = rhs(p, &y_new);
    let f2 = Vector4::from(f_new_state.to_array());
    let k3 = lu.solve(&(f2 - ROS_E32 * (k2 - f1) - 2.0 * (k1 - v_f0)))?;

    let e = (h / 6.0) * (k1 - 2.0 * k2 + k3);
    Some(StepResult { y_new, f_new: f_new_state, err_vec: [e[0], e[1], e[2], e[3]] })
}

fn dopri_step(p: &Params, y: &State, f0: &State, h: f64) -> Option<StepResult> {
    const A21: f64 = 1.0 / 5.0;
    const A31: f64 = 3.0 / 40.0;
    const A32: f64 = 9.0 / 40.0;
    const A41: f64 = 44.0 / 45.0;
    const A42: f64 = -56.0 / 15.0;
    const A43: f64 = 32.0 / 9.0;
    const A51: f64 = 19372.0 / 6561.0;
    const A52: f64 = -25360.0 / 2187.0;
    const A53: f64 = 64448.0 / 6561.0;
    const A54: f64 = -212.0 / 729.0;
    const A61: f64 = 9017.0 / 3168.0;
    const A62: f64 = -355.0 / 33.0;
    const A63: f64 = 46732.0 / 5247.0;
    const A64: f64 = 49.0 / 176.0;
    const A65: f64 = -5103.0 / 18656.0;
    const A71: f64 = 35.0 / 384.0;
    const A73: f64 = 500.0 / 1113.0;
    const A74: f64 = 125.0 / 192.0;
    const A75: f64 = -2187.0 / 6784.0;
    const A76: f64 = 11.0 / 84.0;
    const E1: f64 = 71.0 / 57600.0;
    const E3: f64 = -71.0 / 16695.0;
    const E4: f64 = 71.0 / 1920.0;
    const E5: f64 = -17253.0 / 339200.0;
    const E6: f64 = 22.0 / 525.0;
    const E7: f64 = -1.0 / 40.0;

    let a0 = y.to_array();
    let k1 = f0.to_array();
    let stage = |coef: &[(f64, [f64; 4])]| {
        let mut s = a0;
        for (c, k) in coef {
            for i in 0..4 {
                s[i] += h * c * k[i];
            }
        }
        rhs(p, &State::from_array(s)).to_array()
    };
    let k2 = stage(&[(A21, k1)]);
    let k3 = stage(&[(A31, k1), (A32, k2)]);
    let k4 = stage(&[(A41, k1), (A42, k2), (A43, k3)]);
    let k5 = stage(&[(A51, k1), (A52, k2), (A53, k3), (A54, k4)]);
    let k6 = stage(&[(A61, k1), (A62, k2), (A63, k3), (A64, k4), (A65, k5)]);
    let mut ynew = a0;
    for i in 0..4 {
        ynew[i] += h * (A71 * k1[i] + A73 * k3[i] + A74 * k4[i] + A75 * k5[i] + A76 * k6[i]);
    }
    let y_new = State::from_array(ynew);
    let f_new = rhs(p, &y_new);
    let k7 = f_new.to_array();
    let mut err_vec = [0.0; 4];
    for i in 0..4 {
        err_vec[i] =
            h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
    }
    Some(StepResult { y_new, f_new, err_vec })
}

fn initial_step(p: &Params, y: &State, f: &State, cfg: &IntegratorConfig) -> f64 {
    let ynorm = y.to_array().iter().fold(0.0_f64, |m, v| m.max(v.abs())).max(cfg.atol);
    let fnorm = f.to_array().iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let mut h = if fnorm > 1e-12 { 0.01 * ynorm / fnorm } else { 1e-3 };
    // never start coarser than a fraction of the horizon or of the fast scale
    h = h.min(cfg.t_end / 100.0).min(p.epsilon).max(1e-10);
    h
}

fn drive(p: &Params, s0: State, cfg: &IntegratorConfig, step: Stepper) -> Result<Trajectory, IntegratorError> {
    let order_exp = match cfg.method {
        Method::Rosenbrock23 => 1.0 / 3.0,
        Method::DormandPrince54 => 1.0 / 5.0,
    };
    let mut t = 0.0;
    let mut y = s0;
    let mut f = rhs(p, &y);
    if !f.is_finite() {
        return Err(IntegratorError::NonFiniteState { t });
    }
    let mut h = cfg.initial_step.unwrap_or_else(|| initial_step(p, &y, &f, cfg)).min(cfg.t_end);

    let mut traj = Trajectory {
        times: vec![t],
        states: vec![y],
        derivs: vec![f],
        events: Vec::new(),
        accepted: 0,
        rejected: 0,
    };

    let mut steps = 0usize;
    while t < cfg.t_end {
        steps += 1;
        if steps > cfg.max_steps {
            return Err(IntegratorError::MaxStepsExceeded(cfg.max_steps));
        }
        if h < 1e-14 * t.abs().max(1.0) {
            return Err(IntegratorError::StepSizeUnderflow { t });
        }
        let h_here = h.min(cfg.t_end - t);
        let res = step(p, &y, &f, h_here);
        let (y_new, f_new, err_vec) = match res {
            Some(r) => (r.y_new, r.f_new, r.err_vec),
            None => {
                // singular W or other linear-algebra failure: retry smaller
                traj.rejected += 1;
                h *= 0.2;
                continue;
            }
        };
        if !y_new.is_finite() || !err_vec.iter().all(|e| e.is_finite()) {
            traj.rejected += 1;
            h *= 0.2;
            continue;
        }
        let errv = error_norm(&err_vec, &y, &y_new, cfg.rtol, cfg.atol);
        if errv <= 1.0 {
            let t_new = t + h_here;
            locate_events(&mut traj, cfg, t, t_new, &y, &y_new, &f, &f_new);
            t = t_new;
            y = y_new;
            f = f_new;
            traj.times.push(t);
            traj.states.push(y);
            traj.derivs.push(f);
            traj.accepted += 1;
            let factor = if errv > 0.0 { 0.8 * errv.powf(-order_exp) } else { 5.0 };
            h = h_here * factor.clamp(0.2, 5.0);
        } else {
            traj.rejected += 1;
            let factor = 0.8 * errv.powf(-order_exp);
            h = h_here * factor.clamp(0.1, 0.8);
        }
    }
    Ok(traj)
}

#[allow(clippy::too_many_arguments)]
fn locate_events(
    traj: &mut Trajectory,
    cfg: &IntegratorConfig,
    t0: f64,
    t1: f64,
    y0: &State,
    y1: &State,
    f0: &State,
    f1: &State,
) {
    if cfg.events.is_empty() {
        return;
    }
    let eval = |t: f64| hermite(t0, t1, y0, y1, f0, f1, t);
    let mut found: Vec<TrajectoryEvent> = Vec::new();
    const SUBDIV: usize = 8;
    for spec in &cfg.events {
        let mut ta = t0;
        let mut ga = spec.eval(y0);
        for i in 1..=SUBDIV {
            let tb = t0 + (t1 - t0) * (i as f64) / (SUBDIV as f64);
            let gb = spec.eval(&eval(tb));
            let crossing = ga == 0.0 || (ga < 0.0) != (gb < 0.0);
            if crossing {
                let rising = ga < gb;
                let wanted = match spec.direction {
                    Direction::Any => true,
                    Direction::Rising => rising,
                    Direction::Falling => !rising,
                };
                if wanted {
                    let t_star = bisect_event(spec, &eval, ta, tb, ga);
                    found.push(TrajectoryEvent { t: t_star, id: spec.id.clone(), state: eval(t_star) });
                }
            }
            ta = tb;
            ga = gb;
        }
    }
    found.sort_by(|a, b| a.t.partial_cmp(&b.t).unwrap().then_with(|| a.id.cmp(&b.id)));
    traj.events.extend(found);
}

fn bisect_event(spec: &EventSpec, eval: &impl Fn(f64) -> State, mut lo: f64, mut hi: f64, glo: f64) -> f64 {
    if glo == 0.0 {
        return lo;
    }
    let tol = 1e-12 * hi.abs().max(1.0);
    let mut slo = glo.signum();
    for _ in 0..100 {
        if hi - lo <= tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let gm = spec.eval(&eval(mid));
        if gm == 0.0 {
            return mid;
        }
        if gm.signum() == slo {
            lo = mid;
            slo = gm.signum();
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{gamma, phi};

    fn sym(b: f64, c: f64, k: f64, epsilon: f64) -> Params {
        Params::symmetric(b, c, k, epsilon)
    }

    #[test]
    fn equilibrium_stays_constant() {
        let p = sym(0.0, 0.0, 1.0, 0.5);
        let cfg = IntegratorConfig::new(10.0);
        let traj = integrate(&p, State::new(0.0, 0.0, 0.0, 0.0), &cfg).unwrap();
        for s in &traj.states {
            assert!(s.sup_distance(&State::new(0.0, 0.0, 0.0, 0.0)) <= 1e-9);
        }
    }

    #[test]
    fn synchrony_plane_is_invariant_under_integration() {
        let p = sym(0.1, 0.3, 0.7, 0.05);
        let cfg = IntegratorConfig::new(100.0);
        let traj = integrate(&p, State::new(1.0, 1.0, 2.0, 2.0), &cfg).unwrap();
        let mut drift = 0.0_f64;
        for s in &traj.states {
            drift = drift.max((s.x1 - s.x2).abs()).max((s.y1 - s.y2).abs());
        }
        assert!(drift <= 1e-7, "drift {drift}");
    }

    #[test]
    fn determinism_is_bitwise() {
        let p = sym(0.1, -0.5, 0.4, 0.05);
        let cfg = IntegratorConfig::new(20.0);
        let a = integrate(&p, State::new(-1.5, 2.0, phi(-1.5), phi(2.0)), &cfg).unwrap();
        let b = integrate(&p, State::new(-1.5, 2.0, phi(-1.5), phi(2.0)), &cfg).unwrap();
        assert_eq!(a.times, b.times);
        assert!(a.states.iter().zip(b.states.iter()).all(|(u, v)| u == v));
        assert_eq!(a.to_csv(), b.to_csv());
    }

    #[test]
    fn tolerance_halving_moves_endpoint_less_than_ten_coarse_tolerances() {
        let p = sym(0.0, -2.0, 1.0, 0.5);
        let s0 = State::new(-1.5, 2.0, phi(-1.5), phi(2.0));
        let coarse = IntegratorConfig::new(10.0).with_tolerances(1e-8, 1e-10);
        let fine = IntegratorConfig::new(10.0).with_tolerances(5e-9, 5e-11);
        let a = integrate(&p, s0, &coarse).unwrap().end_state();
        let b = integrate(&p, s0, &fine).unwrap().end_state();
        let scale = a.to_array().iter().fold(1.0_f64, |m, v| m.max(v.abs()));
        assert!(a.sup_distance(&b) <= 10.0 * 1e-8 * scale, "diff {}", a.sup_distance(&b));
    }

    #[test]
    fn fold_crossing_event_is_localized() {
        let p = sym(0.0, 0.0, 1.0, 0.05);
        let cfg = IntegratorConfig::new(5.0).with_events(vec![
            EventSpec::fold("fold_x1_plus", FastVar::X1, 1),
            EventSpec::fold("fold_x1_minus", FastVar::X1, -1),
        ]);
        // start on the synchrony plane: a relaxation oscillation crosses folds
        let traj = integrate(&p, State::new(1.5, 1.5, phi(1.5), phi(1.5)), &cfg).unwrap();
        assert!(!traj.events.is_empty());
        for ev in &traj.events {
            let target = if ev.id.ends_with("plus") { FOLD_X } else { -FOLD_X };
            assert!(
                (ev.state.x1 - target).abs() <= 1e-8,
                "event {} at x1 = {} (|dx| = {:.2e})",
                ev.id,
                ev.state.x1,
                (ev.state.x1 - target).abs()
            );
        }
    }

    #[test]
    fn gamma_conjugated_initial_conditions_give_conjugated_flows() {
        let p = sym(0.1, 0.0, 0.1, 0.05);
        let cfg = IntegratorConfig::new(20.0);
        let s0 = State::new(-1.5, 2.0, phi(-1.5), phi(2.0));
        let (a, b) = integrate_two(&p, s0, gamma(s0), &cfg).unwrap();
        let mut worst = 0.0_f64;
        let mut t = 0.0;
        while t <= 20.0 {
            worst = worst.max(gamma(a.sample(t)).sup_distance(&b.sample(t)));
            t += 0.05;
        }
        assert!(worst <= 1e-6, "sup distance {worst}");
    }

    #[test]
    fn identical_initial_conditions_give_identical_trajectories() {
        let p = sym(0.1, 0.0, 0.1, 0.5);
        let cfg = IntegratorConfig::new(5.0);
        let s0 = State::new(1.3, -1.4, 0.2, 0.1);
        let (a, b) = integrate_two(&p, s0, s0, &cfg).unwrap();
        assert_eq!(a.times, b.times);
        assert!(a.states.iter().zip(b.states.iter()).all(|(u, v)| u == v));
    }

    #[test]
    fn explicit_method_agrees_with_implicit_in_mild_regime() {
        let p = sym(0.0, -2.0, 1.0, 0.5);
        let s0 = State::new(-1.5, 2.0, phi(-1.5), phi(2.0));
        let ros = integrate(&p, s0, &IntegratorConfig::new(10.0)).unwrap();
        let dp = integrate(&p, s0, &IntegratorConfig::new(10.0).with_method(Method::DormandPrince54)).unwrap();
        assert!(ros.end_state().sup_distance(&dp.end_state()) <= 1e-6);
    }

    #[test]
    fn max_steps_is_enforced() {
        let p = sym(0.0, 0.0, 1.0, 0.01);
        let mut cfg = IntegratorConfig::new(100.0);
        cfg.max_steps = 10;
        let err = integrate(&p, State::new(1.5, -1.3, 0.0, 0.0), &cfg).unwrap_err();
        assert!(matches!(err, IntegratorError::MaxStepsExceeded(10)));
    }

    #[test]
    fn non_finite_initial_state_is_rejected() {
        let p = sym(0.0, 0.0, 1.0, 0.5);
        let cfg = IntegratorConfig::new(1.0);
        let err = integrate(&p, State::new(f64::NAN, 0.0, 0.0, 0.0), &cfg).unwrap_err();
        assert!(matches!(err, IntegratorError::NonFiniteState { .. }));
    }

    #[test]
    fn csv_format_is_stable() {
        let p = sym(0.0, 0.0, 1.0, 0.5);
        let cfg = IntegratorConfig::new(0.5);
        let traj = integrate(&p, State::new(0.1, 0.2, 0.3, 0.4), &cfg).unwrap();
        let csv = traj.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), "t,x1,x2,y1,y2");
        let first = lines.next().unwrap();
        assert_eq!(first.split(',').count(), 5);
        assert!(first.starts_with("0.0000000000000000e0"));
        assert!(!csv.contains('\r'));
    }
}
