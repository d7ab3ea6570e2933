//! Real-root solvers for the cubics that show up in the reduced flow and in
//! the equilibrium equations.

/// All real roots of the depressed cubic `t^3 + p t + q = 0`, ascending.
///
/// Uses the trigonometric form when the discriminant is positive (three real
/// roots) and Cardano's formula otherwise, then polishes each root with a few
/// Newton steps. Near a vanishing discriminant the closed forms lose digits,
/// so roots are re-bracketed and bisected instead.
pub fn solve_depressed_cubic(p: f64, q: f64) -> Vec<f64> {
    let f = |t: f64| t * t * t + p * t + q;
    let disc = -4.0 * p * p * p - 27.0 * q * q;
    // Normalize the discriminant by the coefficient scale so the near-zero
    // test is dimensionless.
    let scale = (p.abs().powi(3)).max(q.abs().powi(2)).max(1.0);
    let mut roots: Vec<f64> = if disc.abs() / scale < 1e-12 {
        if p.abs() < 1e-14 && q.abs() < 1e-14 {
            vec![0.0]
        } else {
            // Double root at 3q/(2p), simple root at -3q/p (p != 0 here
            // because disc ~ 0 with q != 0 forces p < 0).
            vec![-3.0 * q / p, 3.0 * q / (2.0 * p)]
        }
    } else if disc > 0.0 {
        // Three distinct real roots; p < 0 is implied.
        let m = 2.0 * (-p / 3.0).sqrt();
        let arg = (3.0 * q / (p * m)).clamp(-1.0, 1.0);
        let theta = arg.acos();
        (0..3)
            .map(|k| m * ((theta - 2.0 * std::f64::consts::PI * k as f64) / 3.0).cos())
            .collect()
    } else {
        // One real root via Cardano.
        let half_q = q / 2.0;
        let rad = (half_q * half_q + p * p * p / 27.0).sqrt();
        let u = (-half_q + rad).cbrt();
        let v = (-half_q - rad).cbrt();
        vec![u + v]
    };

    for r in roots.iter_mut() {
        *r = polish(f, |t| 3.0 * t * t + p, *r);
    }
    roots.sort_by(|a, b| a.partial_cmp(b).unwrap());
    roots.dedup_by(|a, b| (*a - *b).abs() <= 1e-9 * (1.0 + a.abs()));
    roots
}

/// Real roots of `a3 x^3 + a2 x^2 + a1 x + a0 = 0`, ascending. Degrades to
/// the quadratic/linear solver when leading coefficients vanish.
pub fn solve_cubic(a3: f64, a2: f64, a1: f64, a0: f64) -> Vec<f64> {
    let lead = a3.abs().max(a2.abs()).max(a1.abs()).max(a0.abs());
    if lead == 0.0 {
        return Vec::new();
    }
    if a3.abs() <= 1e-14 * lead {
        return solve_quadratic(a2, a1, a0);
    }
    // Depress: x = t - a2/(3 a3).
    let b = a2 / a3;
    let c = a1 / a3;
    let d = a0 / a3;
    let shift = b / 3.0;
    let p = c - b * b / 3.0;
    let q = 2.0 * b * b * b / 27.0 - b * c / 3.0 + d;
    let mut roots: Vec<f64> = solve_depressed_cubic(p, q).into_iter().map(|t| t - shift).collect();
    let f = |x: f64| ((a3 * x + a2) * x + a1) * x + a0;
    let df = |x: f64| (3.0 * a3 * x + 2.0 * a2) * x + a1;
    for r in roots.iter_mut() {
        *r = polish(f, df, *r);
    }
    roots.sort_by(|a, b| a.partial_cmp(b).unwrap());
    roots
}

fn solve_quadratic(a: f64, b: f64, c: f64) -> Vec<f64> {
    let lead = a.abs().max(b.abs()).max(c.abs());
    if a.abs() <= 1e-14 * lead {
        if b == 0.0 {
            return Vec::new();
        }
        return vec![-c / b];
    }
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        return Vec::new();
    }
    let sq = disc.sqrt();
    // Citardauq pairing avoids cancellation.
    let q = -0.5 * (b + b.signum() * sq);
    let mut out = if q == 0.0 { vec![0.0, 0.0] } else { vec![q / a, c / q] };
    out.sort_by(|x, y| x.partial_cmp(y).unwrap());
    out
}

fn polish(f: impl Fn(f64) -> f64, df: impl Fn(f64) -> f64, mut t: f64) -> f64 {
    for _ in 0..4 {
        let d = df(t);
        if d.abs() < 1e-30 {
            break;
        }
        let step = f(t) / d;
        if !step.is_finite() {
            break;
        }
        t -= step;
        if step.abs() <= 1e-16 * (1.0 + t.abs()) {
            break;
        }
    }
    t
}

/// Bisection on `f` over `[lo, hi]`, which must bracket a sign change.
/// Used as an oracle against the closed-form solvers and as a fallback.
pub fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> Option<f64> {
    let mut flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Some(lo);
    }
    if fhi == 0.0 {
        return Some(hi);
    }
    if flo.signum() == fhi.signum() {
        return None;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if fm == 0.0 || (hi - lo).abs() <= tol {
            return Some(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}
