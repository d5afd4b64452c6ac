//! Explicit time stepping of the anisotropic curve shortening flow
//! u_t = ψ(θ)κν for smooth elliptic anisotropies, with runtime monitors
//! for the evolution identities, the length element and the curvature
//! blow-up rate.
//!
//! The scheme is explicit Euler in time with centered differences in
//! space, plus periodic uniform-arc-length resampling. Reparametrization
//! is tangential motion only: the equation prescribes just the normal
//! velocity, so it does not change the evolving support.

use crate::anisotropy::Anisotropy;
use crate::curve::ParametricCurve;
use crate::error::{Error, Result};
use crate::geometry::Vec2;

/// Hard explicit-stability limit for dt·maxψ/(minΔs)².
const CFL_HARD: f64 = 0.5;

#[derive(Debug, Clone)]
pub struct SmoothFlowConfig {
    /// Courant factor in (0, 0.5].
    pub dt_cfl: f64,
    /// Time horizon.
    pub t_max: f64,
    /// Steps between uniform-arc-length resamplings (0 disables).
    pub reparam_every: usize,
    /// Blow-up threshold on max |κ|.
    pub kappa_stop: f64,
    /// Degeneracy threshold on the smallest edge.
    pub min_edge: f64,
    /// Steps between recorded frames.
    pub record_every: usize,
    /// Fixed dt override for refinement experiments (still CFL-checked).
    pub dt_fixed: Option<f64>,
    /// Times at which a frame is forced (the stepper lands on them exactly).
    pub checkpoints: Vec<f64>,
}

impl SmoothFlowConfig {
    pub fn new(t_max: f64) -> Self {
        SmoothFlowConfig {
            dt_cfl: 0.2,
            t_max,
            reparam_every: 50,
            kappa_stop: 1e6,
            min_edge: 1e-7,
            record_every: 50,
            dt_fixed: None,
            checkpoints: Vec::new(),
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.dt_cfl > 0.0 && self.dt_cfl <= CFL_HARD) {
            return Err(Error::InvalidConfig(format!(
                "dt_cfl = {} outside (0, 0.5]",
                self.dt_cfl
            )));
        }
        if !(self.t_max > 0.0) {
            return Err(Error::InvalidConfig(format!("t_max = {} ≤ 0", self.t_max)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    ReachedTMax,
    /// max |κ| crossed kappa_stop: the blow-up regime.
    KappaStop,
    /// An edge degenerated below min_edge.
    MinEdge,
}

#[derive(Debug, Clone, Copy)]
pub struct FrameDiagnostics {
    pub length: f64,
    pub area: f64,
    pub max_kappa: f64,
    pub max_kappa_phi: f64,
    pub min_ux: f64,
    pub max_ux: f64,
    /// g = max κ_φ².
    pub g: f64,
}

#[derive(Debug, Clone)]
pub struct FlowFrame {
    pub t: f64,
    pub curve: ParametricCurve,
    pub diag: FrameDiagnostics,
    /// True if a reparametrization happened since the previous recorded frame.
    pub reparam_since_last: bool,
}

#[derive(Debug, Clone)]
pub struct FlowTrace {
    pub frames: Vec<FlowFrame>,
    pub stop: StopReason,
}

impl FlowTrace {
    pub fn last(&self) -> &FlowFrame {
        self.frames.last().expect("trace has at least one frame")
    }

    /// Frame closest to time `t`.
    pub fn frame_at(&self, t: f64) -> &FlowFrame {
        self.frames
            .iter()
            .min_by(|a, b| {
                (a.t - t).abs().partial_cmp(&(b.t - t).abs()).unwrap()
            })
            .expect("trace has at least one frame")
    }
}

fn diagnostics(curve: &ParametricCurve, a: &Anisotropy) -> FrameDiagnostics {
    let n = curve.len();
    let dx = 2.0 * std::f64::consts::PI / n as f64;
    let kphi = curve
        .theta()
        .iter()
        .zip(curve.kappa())
        .map(|(&th, &k)| {
            let (s, _, s2) = a.sigma_d012(th);
            (s + s2) * k
        })
        .fold(0.0f64, |m, k| m.max(k.abs()));
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for &l in curve.edge_lengths() {
        lo = lo.min(l / dx);
        hi = hi.max(l / dx);
    }
    FrameDiagnostics {
        length: curve.total_length(),
        area: curve.signed_area(),
        max_kappa: curve.max_abs_kappa(),
        max_kappa_phi: kphi,
        min_ux: lo,
        max_ux: hi,
        g: kphi * kphi,
    }
}

/// Max of ψ(θ) over the curve samples.
fn max_psi_on(curve: &ParametricCurve, a: &Anisotropy) -> f64 {
    curve
        .theta()
        .iter()
        .map(|&th| {
            let (s, _, s2) = a.sigma_d012(th);
            s * (s + s2)
        })
        .fold(0.0f64, f64::max)
}

fn min_edge_len(curve: &ParametricCurve) -> f64 {
    curve.edge_lengths().iter().cloned().fold(f64::INFINITY, f64::min)
}

/// One explicit Euler step u ← u + dt·ψ(θ)κν, frames rebuilt.
///
/// `dt` must respect the hard stability bound 0.5·(min Δs)²/max ψ.
pub fn step(curve: &ParametricCurve, a: &Anisotropy, dt: f64) -> Result<ParametricCurve> {
    a.require_smooth()?;
    let psi_max = max_psi_on(curve, a);
    let h = min_edge_len(curve);
    let bound = CFL_HARD * h * h / psi_max;
    if !(dt > 0.0) || dt > bound {
        return Err(Error::CflViolation { dt, bound });
    }
    let pts: Vec<Vec2> = (0..curve.len())
        .map(|i| {
            let th = curve.theta()[i];
            let (s, _, s2) = a.sigma_d012(th);
            let v = s * (s + s2) * curve.kappa()[i];
            curve.point(i) + curve.normals()[i] * (v * dt)
        })
        .collect();
    if pts.iter().any(|p| !p.is_finite()) {
        return Err(Error::CurvatureOverflow {
            max_kappa: curve.max_abs_kappa(),
        });
    }
    ParametricCurve::from_points(pts)
}

/// Advance the flow until t_max, kappa_stop or min_edge, recording frames
/// and diagnostics. Stop precedence: kappa_stop, then min_edge, then t_max.
pub fn run(c0: &ParametricCurve, a: &Anisotropy, cfg: &SmoothFlowConfig) -> Result<FlowTrace> {
    cfg.validate()?;
    a.require_smooth()?;
    a.ellipticity_constant()?;

    let mut checkpoints: Vec<f64> = cfg
        .checkpoints
        .iter()
        .cloned()
        .filter(|&c| c > 0.0 && c <= cfg.t_max)
        .collect();
    checkpoints.sort_by(|x, y| x.partial_cmp(y).unwrap());

    let mut curve = c0.clone();
    let mut t = 0.0;
    let mut frames = Vec::new();
    let mut reparam_flag = false;
    let mut steps: usize = 0;
    frames.push(FlowFrame {
        t,
        curve: curve.clone(),
        diag: diagnostics(&curve, a),
        reparam_since_last: false,
    });

    let stop;
    loop {
        if curve.max_abs_kappa() >= cfg.kappa_stop {
            stop = StopReason::KappaStop;
            break;
        }
        if min_edge_len(&curve) <= cfg.min_edge {
            stop = StopReason::MinEdge;
            break;
        }
        if t >= cfg.t_max - 1e-14 {
            stop = StopReason::ReachedTMax;
            break;
        }

        let h = min_edge_len(&curve);
        let psi_max = max_psi_on(&curve, a);
        let mut dt = match cfg.dt_fixed {
            Some(fixed) => fixed,
            None => cfg.dt_cfl * h * h / psi_max,
        };
        dt = dt.min(cfg.t_max - t);
        let next_cp = checkpoints.iter().cloned().find(|&c| c > t + 1e-14);
        let mut at_checkpoint = false;
        if let Some(cp) = next_cp {
            if t + dt >= cp - 1e-14 {
                dt = cp - t;
                at_checkpoint = true;
            }
        }

        curve = step(&curve, a, dt)?;
        t += dt;
        steps += 1;

        if cfg.reparam_every > 0 && steps % cfg.reparam_every == 0 {
            curve = curve.resample_uniform(curve.len())?;
            reparam_flag = true;
        }

        let record = at_checkpoint
            || (cfg.record_every > 0 && steps % cfg.record_every == 0)
            || t >= cfg.t_max - 1e-14;
        if record {
            frames.push(FlowFrame {
                t,
                curve: curve.clone(),
                diag: diagnostics(&curve, a),
                reparam_since_last: reparam_flag,
            });
            reparam_flag = false;
        }
    }

    // Final frame if the loop broke before recording the current state.
    if (frames.last().unwrap().t - t).abs() > 1e-15 {
        frames.push(FlowFrame {
            t,
            curve: curve.clone(),
            diag: diagnostics(&curve, a),
            reparam_since_last: reparam_flag,
        });
    }

    Ok(FlowTrace { frames, stop })
}

/// The a-priori curvature bound C′/√(1−2tC′²), +∞ outside [0, 1/(2C′²)).
pub fn curvature_bound(c_prime: f64, t: f64) -> f64 {
    let denom = 1.0 - 2.0 * t * c_prime * c_prime;
    if denom <= 0.0 {
        f64::INFINITY
    } else {
        c_prime / denom.sqrt()
    }
}

/// Worst positive violation of g(t) ≤ g(0)/(1−2t·g(0)) over the recorded
/// frames inside the guaranteed window.
pub fn propk_violation(tr: &FlowTrace) -> f64 {
    let g0 = tr.frames[0].diag.g;
    tr.frames
        .iter()
        .filter(|f| 1.0 - 2.0 * f.t * g0 > 0.0)
        .map(|f| f.diag.g - g0 / (1.0 - 2.0 * f.t * g0))
        .fold(0.0f64, f64::max)
}

#[derive(Debug, Clone, Copy)]
pub struct ResidualReport {
    pub dt: f64,
    /// max_i |Δθ_i/dt − ∂_s(ψκ)_i|
    pub r_theta: f64,
    /// max_i |Δκ_i/dt − (∂_ss(ψκ) + ψκ³)_i|
    pub r_kappa: f64,
}

/// Residuals of the evolution identities θ_t = (ψκ)_s and
/// κ_t = (ψκ)_ss + ψκ³ between frame `idx` and its successor.
/// Both frames must share the parametrization (no reparam in between).
pub fn identity_residuals(tr: &FlowTrace, idx: usize, a: &Anisotropy) -> Result<ResidualReport> {
    if idx + 1 >= tr.frames.len() {
        return Err(Error::FramesNotAligned(idx, idx + 1));
    }
    let f0 = &tr.frames[idx];
    let f1 = &tr.frames[idx + 1];
    if f1.reparam_since_last || f0.curve.len() != f1.curve.len() {
        return Err(Error::FramesNotAligned(idx, idx + 1));
    }
    let dt = f1.t - f0.t;
    let c0 = &f0.curve;
    let n = c0.len();
    let psi_kappa: Vec<f64> = (0..n)
        .map(|i| {
            let (s, _, s2) = a.sigma_d012(c0.theta()[i]);
            s * (s + s2) * c0.kappa()[i]
        })
        .collect();
    let dpk = c0.d_ds(&psi_kappa);
    let ddpk = c0.d2_ds2(&psi_kappa);

    let wrap = |x: f64| {
        let mut y = x;
        while y > std::f64::consts::PI {
            y -= 2.0 * std::f64::consts::PI;
        }
        while y <= -std::f64::consts::PI {
            y += 2.0 * std::f64::consts::PI;
        }
        y
    };
    let mut r_theta = 0.0f64;
    let mut r_kappa = 0.0f64;
    for i in 0..n {
        let dth = wrap(f1.curve.theta()[i] - c0.theta()[i]);
        r_theta = r_theta.max((dth / dt - dpk[i]).abs());
        let (s, _, s2) = a.sigma_d012(c0.theta()[i]);
        let psi = s * (s + s2);
        let k = c0.kappa()[i];
        let rhs = ddpk[i] + psi * k * k * k;
        let dk = f1.curve.kappa()[i] - k;
        r_kappa = r_kappa.max((dk / dt - rhs).abs());
    }
    Ok(ResidualReport { dt, r_theta, r_kappa })
}

#[derive(Debug, Clone, Copy)]
pub struct LengthMonitorReport {
    /// Worst per-sample increase of |u_x| between reparam-free frame pairs.
    pub max_ux_increase: f64,
    /// Worst |ΔL/Δt + ∫ψκ²ds| over reparam-free frame pairs.
    pub max_dl_residual: f64,
    pub pairs_checked: usize,
}

/// Verify |u_x| nonincreasing per sample and dL/dt ≈ −∫ψκ²ds across
/// consecutive recorded frames with no reparametrization in between.
pub fn length_element_monitor(tr: &FlowTrace, a: &Anisotropy) -> LengthMonitorReport {
    let mut max_inc = 0.0f64;
    let mut max_res = 0.0f64;
    let mut pairs = 0usize;
    for w in tr.frames.windows(2) {
        let (f0, f1) = (&w[0], &w[1]);
        if f1.reparam_since_last || f0.curve.len() != f1.curve.len() {
            continue;
        }
        pairs += 1;
        let n = f0.curve.len();
        for i in 0..n {
            let inc = f1.curve.edge_lengths()[i] - f0.curve.edge_lengths()[i];
            max_inc = max_inc.max(inc * n as f64 / (2.0 * std::f64::consts::PI));
        }
        let dt = f1.t - f0.t;
        if dt > 0.0 {
            let dl = (f1.diag.length - f0.diag.length) / dt;
            let mut integral = 0.0;
            let c0 = &f0.curve;
            for i in 0..n {
                let (s, _, s2) = a.sigma_d012(c0.theta()[i]);
                let psi = s * (s + s2);
                let k = c0.kappa()[i];
                let ds = 0.5 * (c0.edge_lengths()[(i + n - 1) % n] + c0.edge_lengths()[i]);
                integral += psi * k * k * ds;
            }
            max_res = max_res.max((dl + integral).abs());
        }
    }
    LengthMonitorReport {
        max_ux_increase: max_inc,
        max_dl_residual: max_res,
        pairs_checked: pairs,
    }
}

/// Extinction-time estimate: least-squares fit of max|κ|⁻² against t over
/// the last 20% of frames (κ ~ (2(T−t))^{−1/2} linearizes this quantity).
pub fn estimate_extinction_time(tr: &FlowTrace) -> Result<f64> {
    let m = tr.frames.len();
    let start = m - (m / 5).max(2);
    let pts: Vec<(f64, f64)> = tr.frames[start..]
        .iter()
        .map(|f| (f.t, 1.0 / (f.diag.max_kappa * f.diag.max_kappa)))
        .collect();
    if pts.len() < 2 {
        return Err(Error::NotApproachingBlowup(
            "too few late frames for the extinction fit".into(),
        ));
    }
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    let intercept = (sy - slope * sx) / n;
    if slope >= 0.0 {
        return Err(Error::NotApproachingBlowup(
            "max|κ|⁻² is not decreasing".into(),
        ));
    }
    // κ⁻² = −slope·(T − t)  ⇒  T = −intercept/slope.
    Ok(-intercept / slope)
}

#[derive(Debug, Clone, Copy)]
pub struct BlowupReport {
    pub t_est: f64,
    /// min over late frames of √(T_est − t)·max|κ|.
    pub min_late_ratio: f64,
    /// α = max_θ |ψ + ψ″|.
    pub alpha: f64,
    /// The guaranteed lower rate 1/√(2α).
    pub threshold: f64,
}

/// Compare the late-time rate √(T−t)·‖κ‖_∞ against the bound 1/√(2α).
/// Requires a trace terminated by kappa_stop.
pub fn blowup_rate_check(tr: &FlowTrace, t_est: f64, a: &Anisotropy) -> Result<BlowupReport> {
    if tr.stop != StopReason::KappaStop {
        return Err(Error::NotApproachingBlowup(format!(
            "trace stopped by {:?}, not kappa_stop",
            tr.stop
        )));
    }
    let m = tr.frames.len();
    let start = m - (m / 5).max(2);
    let mut min_ratio = f64::INFINITY;
    for f in &tr.frames[start..] {
        if f.t < t_est {
            min_ratio = min_ratio.min((t_est - f.t).sqrt() * f.diag.max_kappa);
        }
    }
    if !min_ratio.is_finite() {
        return Err(Error::NotApproachingBlowup(
            "no late frames before the estimated extinction time".into(),
        ));
    }
    // α by second differences of ψ on the angular grid.
    let grid = crate::anisotropy::ANGULAR_GRID;
    let h = 2.0 * std::f64::consts::PI / grid as f64;
    let psi = |th: f64| {
        let (s, _, s2) = a.sigma_d012(th);
        s * (s + s2)
    };
    let mut alpha = 0.0f64;
    for i in 0..grid {
        let th = i as f64 * h;
        let p = psi(th);
        let dd = (psi(th + h) - 2.0 * p + psi(th - h)) / (h * h);
        alpha = alpha.max((p + dd).abs());
    }
    Ok(BlowupReport {
        t_est,
        min_late_ratio: min_ratio,
        alpha,
        threshold: 1.0 / (2.0 * alpha).sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::{sample_circle_ccw, sample_polygon};
    use std::f64::consts::PI;

    fn aniso_4fold(beta: f64) -> Anisotropy {
        let mut coeffs = vec![0.0; 5];
        coeffs[0] = 1.0;
        coeffs[4] = beta;
        Anisotropy::smooth_from_coeffs(coeffs).unwrap()
    }

    #[test]
    fn single_step_shrinks_circle() {
        let e = Anisotropy::euclidean();
        let c = sample_circle_ccw(Vec2::ZERO, 1.0, 512);
        let dt = 2e-5;
        let out = step(&c, &e, dt).unwrap();
        let expect = (1.0 - 2.0 * dt).sqrt();
        for p in out.points() {
            assert!((p.norm() - expect).abs() < 1e-8 + 4e-6, "r = {}", p.norm());
        }
    }

    #[test]
    fn straight_samples_unmoved() {
        // Rounded square with sampled straight sides: interior side samples
        // have κ = 0 exactly and must not move.
        let r = 0.5;
        let mut pts = Vec::new();
        let m = 24;
        for corner in 0..4 {
            let phi0 = corner as f64 * PI / 2.0;
            let center = Vec2::from_angle(phi0 + PI / 4.0) * ((2.0 - r) * 2.0_f64.sqrt());
            let mut arc_pts = Vec::new();
            for j in 0..m {
                let phi = phi0 + PI / 2.0 * j as f64 / (m - 1) as f64;
                arc_pts.push(center + Vec2::from_angle(phi) * r);
            }
            pts.extend_from_slice(&arc_pts);
            // Straight run to the next corner's arc start.
            let next_phi0 = (corner + 1) as f64 * PI / 2.0;
            let next_center =
                Vec2::from_angle(next_phi0 + PI / 4.0) * ((2.0 - r) * 2.0_f64.sqrt());
            let a = *arc_pts.last().unwrap();
            let b = next_center + Vec2::from_angle(next_phi0) * r;
            for j in 1..m {
                pts.push(a + (b - a) * (j as f64 / m as f64));
            }
        }
        let c = ParametricCurve::from_points(pts).unwrap();
        let e = Anisotropy::euclidean();
        let dt = 1e-6;
        let out = step(&c, &e, dt).unwrap();
        let mut checked = 0;
        for i in 0..c.len() {
            if c.kappa()[i].abs() < 1e-10 {
                checked += 1;
                assert!((out.point(i) - c.point(i)).norm() < 1e-15);
            }
        }
        assert!(checked > 0, "test needs flat samples");
    }

    #[test]
    fn cfl_violation_rejected() {
        let e = Anisotropy::euclidean();
        let c = sample_circle_ccw(Vec2::ZERO, 1.0, 64);
        assert!(matches!(
            step(&c, &e, 1.0),
            Err(Error::CflViolation { .. })
        ));
    }

    #[test]
    fn circle_run_to_half_radius() {
        let e = Anisotropy::euclidean();
        let c = sample_circle_ccw(Vec2::ZERO, 1.0, 512);
        let cfg = SmoothFlowConfig::new(0.375);
        let tr = run(&c, &e, &cfg).unwrap();
        assert_eq!(tr.stop, StopReason::ReachedTMax);
        let last = tr.last();
        assert!((last.t - 0.375).abs() < 1e-12);
        for p in last.curve.points() {
            assert!((p.norm() - 0.5).abs() < 1e-3, "r = {}", p.norm());
        }
        // Length monotone along the trace.
        for w in tr.frames.windows(2) {
            assert!(w[1].diag.length <= w[0].diag.length + 1e-9);
        }
        // Turning number preserved.
        assert_eq!(last.curve.turning_number(), 1);
    }

    #[test]
    fn wulff_shrinks_self_similarly() {
        let a = aniso_4fold(0.05);
        let w = a.wulff_shape(512).unwrap();
        let c0 = ParametricCurve::from_points(w.vertices.clone()).unwrap();
        let cfg = SmoothFlowConfig::new(0.3);
        let tr = run(&c0, &a, &cfg).unwrap();
        let last = tr.last();
        let scale = 1.0 / (1.0 - 2.0 * last.t).sqrt();
        let rescaled: Vec<Vec2> = last.curve.points().iter().map(|&p| p * scale).collect();
        let d = crate::geometry::hausdorff_polylines(&rescaled, &w.vertices);
        assert!(d < 5e-3, "rescaled Hausdorff distance {d}");
    }

    #[test]
    fn figure_eight_short_run() {
        let n = 512;
        let pts: Vec<Vec2> = (0..n)
            .map(|i| {
                let t = 2.0 * PI * i as f64 / n as f64;
                Vec2::new(t.sin(), t.sin() * t.cos())
            })
            .collect();
        let c = ParametricCurve::from_points(pts).unwrap();
        let a = aniso_4fold(0.02);
        let mut cfg = SmoothFlowConfig::new(0.01);
        cfg.reparam_every = 25;
        let tr = run(&c, &a, &cfg).unwrap();
        assert_eq!(tr.stop, StopReason::ReachedTMax);
        assert_eq!(tr.last().curve.turning_number(), 0);
    }

    #[test]
    fn curvature_bound_values() {
        assert!((curvature_bound(1.0, 0.0) - 1.0).abs() < 1e-15);
        assert!((curvature_bound(1.0, 0.25) - 2.0f64.sqrt()).abs() < 1e-12);
        assert!(curvature_bound(2.0, 0.125).is_infinite());
    }

    #[test]
    fn propk_bound_holds_on_circle() {
        let e = Anisotropy::euclidean();
        let c = sample_circle_ccw(Vec2::ZERO, 1.0, 256);
        let mut cfg = SmoothFlowConfig::new(0.3);
        cfg.record_every = 20;
        let tr = run(&c, &e, &cfg).unwrap();
        // g(t) = 1/(1−2t) saturates the bound; discretization noise only.
        let v = propk_violation(&tr);
        assert!(v < 5e-3, "violation {v}");
    }

    #[test]
    fn residuals_on_circle() {
        let e = Anisotropy::euclidean();
        let c = sample_circle_ccw(Vec2::ZERO, 1.0, 256);
        let mut cfg = SmoothFlowConfig::new(1e-3);
        cfg.record_every = 1;
        cfg.reparam_every = 0;
        let tr = run(&c, &e, &cfg).unwrap();
        let r = identity_residuals(&tr, 0, &e).unwrap();
        // On the circle (ψκ)_s ≈ 0 and κ_t = κ³: residuals are discretization-size.
        assert!(r.r_theta < 1e-2, "r_θ = {}", r.r_theta);
        assert!(r.r_kappa < 1e-1, "r_κ = {}", r.r_kappa);
    }

    #[test]
    fn residual_requires_aligned_frames() {
        let e = Anisotropy::euclidean();
        let c = sample_circle_ccw(Vec2::ZERO, 1.0, 128);
        let mut cfg = SmoothFlowConfig::new(0.02);
        cfg.record_every = 10;
        cfg.reparam_every = 10;
        let tr = run(&c, &e, &cfg).unwrap();
        assert!(tr.frames[1].reparam_since_last);
        assert!(matches!(
            identity_residuals(&tr, 0, &e),
            Err(Error::FramesNotAligned(_, _))
        ));
    }

    #[test]
    fn length_element_monitor_on_anisotropic_run() {
        let a = aniso_4fold(0.03);
        let c = sample_circle_ccw(Vec2::ZERO, 1.0, 256);
        let mut cfg = SmoothFlowConfig::new(0.05);
        cfg.record_every = 10;
        cfg.reparam_every = 200;
        let tr = run(&c, &a, &cfg).unwrap();
        let rep = length_element_monitor(&tr, &a);
        assert!(rep.pairs_checked > 5);
        assert!(rep.max_ux_increase <= 1e-8, "increase {}", rep.max_ux_increase);
        assert!(rep.max_dl_residual < 5e-2, "dL residual {}", rep.max_dl_residual);
    }

    #[test]
    fn frozen_comparison_is_exact() {
        // dt = 0 comparison: duplicate frame, zero change.
        let e = Anisotropy::euclidean();
        let c = sample_circle_ccw(Vec2::ZERO, 1.0, 64);
        let f = FlowFrame {
            t: 0.0,
            curve: c.clone(),
            diag: diagnostics(&c, &e),
            reparam_since_last: false,
        };
        let tr = FlowTrace {
            frames: vec![f.clone(), FlowFrame { t: 1.0, ..f }],
            stop: StopReason::ReachedTMax,
        };
        let rep = length_element_monitor(&tr, &e);
        assert_eq!(rep.max_ux_increase, 0.0);
    }

    #[test]
    fn blowup_rate_on_circle() {
        let e = Anisotropy::euclidean();
        let c = sample_circle_ccw(Vec2::ZERO, 1.0, 256);
        let mut cfg = SmoothFlowConfig::new(1.0);
        cfg.kappa_stop = 50.0;
        cfg.record_every = 25;
        cfg.reparam_every = 25;
        cfg.min_edge = 1e-12;
        let tr = run(&c, &e, &cfg).unwrap();
        assert_eq!(tr.stop, StopReason::KappaStop);
        let t_est = estimate_extinction_time(&tr).unwrap();
        assert!((t_est - 0.5).abs() < 2e-3, "T_est = {t_est}");
        let rep = blowup_rate_check(&tr, t_est, &e).unwrap();
        assert!((rep.alpha - 1.0).abs() < 1e-6);
        let target = 1.0 / 2.0f64.sqrt();
        assert!(
            (rep.min_late_ratio - target).abs() < 0.04,
            "ratio {} vs {target}",
            rep.min_late_ratio
        );

        // Early-stopped trace is rejected.
        let cfg2 = SmoothFlowConfig::new(0.05);
        let tr2 = run(&c, &e, &cfg2).unwrap();
        assert!(matches!(
            blowup_rate_check(&tr2, 0.5, &e),
            Err(Error::NotApproachingBlowup(_))
        ));
    }

    #[test]
    fn stop_precedence_kappa_before_edge() {
        let e = Anisotropy::euclidean();
        let c = sample_circle_ccw(Vec2::ZERO, 1.0, 128);
        let mut cfg = SmoothFlowConfig::new(10.0);
        cfg.kappa_stop = 5.0;
        cfg.min_edge = 1e-12;
        cfg.reparam_every = 20;
        let tr = run(&c, &e, &cfg).unwrap();
        assert_eq!(tr.stop, StopReason::KappaStop);
    }

    #[test]
    fn sampled_polygon_flow_survives() {
        // Mildly smoothed square under a smooth anisotropy: no blow-up in
        // a short window, length decreases.
        let sq = sample_polygon(
            &[
                Vec2::new(1.0, -1.0),
                Vec2::new(1.0, 1.0),
                Vec2::new(-1.0, 1.0),
                Vec2::new(-1.0, -1.0),
            ],
            48,
        )
        .unwrap();
        let a = aniso_4fold(0.02);
        let mut cfg = SmoothFlowConfig::new(2e-3);
        cfg.reparam_every = 10;
        let tr = run(&sq, &a, &cfg).unwrap();
        assert!(tr.last().diag.length < tr.frames[0].diag.length);
    }
}
