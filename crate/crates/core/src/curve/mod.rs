//! Immersed closed curves: parametric samplings with cached frames, and
//! crystalline polygons adapted to a Wulff fan.
//!
//! Frame conventions follow τ = (sinθ, −cosθ), ν = (cosθ, sinθ) = τ^⊥ and
//! κ = θ_s, so a counterclockwise convex curve has κ > 0 with ν pointing
//! inward, and u_t = ψκν shrinks it.

mod crystal;
mod field;

pub use crystal::{axis_square_crystal, CrystalCurve, Facet};
#[cfg(test)]
pub(crate) use crystal::l_shape_fixture;
pub use field::{
    cahn_hoffman_field, cahn_hoffman_field_crystal, check_local_rw, gauge_distance_to_polyline,
    wulff_offset, CahnHoffmanField, RwCertificate, RwProbe,
};

use crate::anisotropy::Anisotropy;
use crate::error::{Error, Result};
use crate::geometry::{hausdorff_polylines, Vec2};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Angular tolerance for matching a facet normal against the Wulff fan.
pub const NORMAL_MATCH_TOL: f64 = 1e-8;

/// Closed sampled curve with cached arc-length frames.
#[derive(Debug, Clone)]
pub struct ParametricCurve {
    points: Vec<Vec2>,
    edge_lengths: Vec<f64>,
    arc_length: Vec<f64>,
    theta: Vec<f64>,
    tangents: Vec<Vec2>,
    normals: Vec<Vec2>,
    kappa: Vec<f64>,
    turning_number: i32,
}

fn wrap_pi(mut x: f64) -> f64 {
    while x > PI {
        x -= 2.0 * PI;
    }
    while x <= -PI {
        x += 2.0 * PI;
    }
    x
}

impl ParametricCurve {
    /// Build a curve from cyclic samples, filling every cached frame:
    /// tangents from centered differences, a continuous lift of the normal
    /// angle, and curvature as the centered difference of the lift with
    /// respect to arc length.
    pub fn from_points(points: Vec<Vec2>) -> Result<Self> {
        let n = points.len();
        if n < 4 {
            return Err(Error::InvalidCurve(format!(
                "need at least 4 samples, got {n}"
            )));
        }
        let mut diameter: f64 = 0.0;
        for p in &points {
            if !p.is_finite() {
                return Err(Error::InvalidCurve("non-finite sample".into()));
            }
            diameter = diameter.max((*p - points[0]).norm());
        }
        let min_edge = 1e-14 + 1e-12 * diameter;

        let mut edge_lengths = Vec::with_capacity(n);
        for i in 0..n {
            let len = (points[(i + 1) % n] - points[i]).norm();
            if len < min_edge {
                return Err(Error::DegenerateEdge { index: i, len });
            }
            edge_lengths.push(len);
        }
        let mut arc_length = Vec::with_capacity(n);
        let mut s = 0.0;
        for &l in &edge_lengths {
            arc_length.push(s);
            s += l;
        }

        // Raw normal angle from centered chords: τ = (sinθ, −cosθ) ⇒ θ = atan2(τx, −τy).
        let mut alpha = Vec::with_capacity(n);
        for i in 0..n {
            let chord = points[(i + 1) % n] - points[(i + n - 1) % n];
            if chord.norm() < min_edge {
                return Err(Error::DegenerateEdge {
                    index: i,
                    len: chord.norm(),
                });
            }
            let t = chord.normalized();
            alpha.push(t.x.atan2(-t.y));
        }
        let mut theta = Vec::with_capacity(n);
        theta.push(alpha[0]);
        for i in 1..n {
            let prev = theta[i - 1];
            theta.push(prev + wrap_pi(alpha[i] - alpha[i - 1]));
        }
        let total = theta[n - 1] + wrap_pi(alpha[0] - alpha[n - 1]) - theta[0];
        let m_f = total / (2.0 * PI);
        let turning_number = m_f.round() as i32;
        if (m_f - turning_number as f64).abs() > 1e-6 {
            return Err(Error::InvalidCurve(format!(
                "turning number not an integer: {m_f}"
            )));
        }

        let tangents: Vec<Vec2> = theta.iter().map(|&t| Vec2::new(t.sin(), -t.cos())).collect();
        let normals: Vec<Vec2> = theta.iter().map(|&t| Vec2::from_angle(t)).collect();

        let two_pi_m = 2.0 * PI * turning_number as f64;
        let theta_at = |i: isize| -> f64 {
            let m = n as isize;
            let wrapped = i.rem_euclid(m) as usize;
            let turns = (i - wrapped as isize) / m;
            theta[wrapped] + turns as f64 * two_pi_m
        };
        let mut kappa = Vec::with_capacity(n);
        for i in 0..n {
            let dth = theta_at(i as isize + 1) - theta_at(i as isize - 1);
            let ds = edge_lengths[(i + n - 1) % n] + edge_lengths[i];
            kappa.push(dth / ds);
        }

        Ok(ParametricCurve {
            points,
            edge_lengths,
            arc_length,
            theta,
            tangents,
            normals,
            kappa,
            turning_number,
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Vec2] {
        &self.points
    }

    pub fn point(&self, i: usize) -> Vec2 {
        self.points[i]
    }

    pub fn edge_lengths(&self) -> &[f64] {
        &self.edge_lengths
    }

    /// Cumulative arc length at each sample (s₀ = 0).
    pub fn arc_length(&self) -> &[f64] {
        &self.arc_length
    }

    pub fn total_length(&self) -> f64 {
        self.arc_length[self.len() - 1] + self.edge_lengths[self.len() - 1]
    }

    /// Continuous lift of the normal angle.
    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn tangents(&self) -> &[Vec2] {
        &self.tangents
    }

    pub fn normals(&self) -> &[Vec2] {
        &self.normals
    }

    pub fn kappa(&self) -> &[f64] {
        &self.kappa
    }

    pub fn turning_number(&self) -> i32 {
        self.turning_number
    }

    pub fn max_abs_kappa(&self) -> f64 {
        self.kappa.iter().fold(0.0f64, |m, &k| m.max(k.abs()))
    }

    /// Signed enclosed area (shoelace).
    pub fn signed_area(&self) -> f64 {
        let n = self.len();
        let mut a = 0.0;
        for i in 0..n {
            a += self.points[i].cross(self.points[(i + 1) % n]);
        }
        0.5 * a
    }

    /// Anisotropic curvature κ_φ = (σ(θ) + σ″(θ))·κ per sample.
    /// Requires a smooth or regularized anisotropy.
    pub fn aniso_curvature(&self, a: &Anisotropy) -> Result<Vec<f64>> {
        a.support_angle(0.0)?;
        Ok(self
            .theta
            .iter()
            .zip(&self.kappa)
            .map(|(&th, &k)| {
                let (s, _, s2) = a.sigma_d012(th);
                (s + s2) * k
            })
            .collect())
    }

    /// Arc-length derivative of a per-sample scalar by centered differences.
    pub fn d_ds(&self, f: &[f64]) -> Vec<f64> {
        let n = self.len();
        (0..n)
            .map(|i| {
                let ds = self.edge_lengths[(i + n - 1) % n] + self.edge_lengths[i];
                (f[(i + 1) % n] - f[(i + n - 1) % n]) / ds
            })
            .collect()
    }

    /// Second arc-length derivative on a possibly non-uniform grid.
    pub fn d2_ds2(&self, f: &[f64]) -> Vec<f64> {
        let n = self.len();
        (0..n)
            .map(|i| {
                let hm = self.edge_lengths[(i + n - 1) % n];
                let hp = self.edge_lengths[i];
                let fm = f[(i + n - 1) % n];
                let fp = f[(i + 1) % n];
                2.0 * (hm * fp + hp * fm - (hm + hp) * f[i]) / (hm * hp * (hm + hp))
            })
            .collect()
    }

    /// Resample to `n` uniformly spaced arc-length samples using periodic
    /// Catmull-Rom interpolation over the chord-length parametrization.
    pub fn resample_uniform(&self, n: usize) -> Result<ParametricCurve> {
        let m = self.len();
        let total = self.total_length();
        let knots = &self.arc_length;
        let mut out = Vec::with_capacity(n);
        let mut seg = 0usize;
        for j in 0..n {
            let target = total * j as f64 / n as f64;
            while seg + 1 < m && knots[seg + 1] <= target {
                seg += 1;
            }
            out.push(self.eval_catmull_rom(seg, target));
        }
        ParametricCurve::from_points(out)
    }

    /// Barry-Goldman Catmull-Rom on the chord parametrization, segment `i`.
    fn eval_catmull_rom(&self, i: usize, s: f64) -> Vec2 {
        let m = self.len();
        let idx = |k: isize| (i as isize + k).rem_euclid(m as isize) as usize;
        let total = self.total_length();
        // Unwrapped knot positions around segment i.
        let t1 = self.arc_length[i];
        let t0 = t1 - self.edge_lengths[idx(-1)];
        let t2 = t1 + self.edge_lengths[i];
        let t3 = t2 + self.edge_lengths[idx(1)];
        let p0 = self.points[idx(-1)];
        let p1 = self.points[idx(0)];
        let p2 = self.points[idx(1)];
        let p3 = self.points[idx(2)];
        let mut t = s;
        if t < t1 {
            t += total;
        }
        if t > t2 {
            t -= total;
        }
        let a1 = p0 * ((t1 - t) / (t1 - t0)) + p1 * ((t - t0) / (t1 - t0));
        let a2 = p1 * ((t2 - t) / (t2 - t1)) + p2 * ((t - t1) / (t2 - t1));
        let a3 = p2 * ((t3 - t) / (t3 - t2)) + p3 * ((t - t2) / (t3 - t2));
        let b1 = a1 * ((t2 - t) / (t2 - t0)) + a2 * ((t - t0) / (t2 - t0));
        let b2 = a2 * ((t3 - t) / (t3 - t1)) + a3 * ((t - t1) / (t3 - t1));
        b1 * ((t2 - t) / (t2 - t1)) + b2 * ((t - t1) / (t2 - t1))
    }

    /// CSV of per-sample (s, x, y, theta, kappa, kappa_phi).
    pub fn to_csv(&self, kappa_phi: Option<&[f64]>) -> String {
        let mut out = String::from("s,x,y,theta,kappa,kappa_phi\n");
        for i in 0..self.len() {
            let kphi = kappa_phi.map(|k| k[i]).unwrap_or(f64::NAN);
            out.push_str(&format!(
                "{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e}\n",
                self.arc_length[i],
                self.points[i].x,
                self.points[i].y,
                self.theta[i],
                self.kappa[i],
                kphi
            ));
        }
        out
    }
}

/// Symmetric Hausdorff distance between two curves, with point-to-segment
/// refinement so the value is resolution-robust.
pub fn hausdorff_distance(c1: &ParametricCurve, c2: &ParametricCurve) -> f64 {
    hausdorff_polylines(c1.points(), c2.points())
}

/// JSON interchange for curves.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type")]
pub enum CurveSpec {
    #[serde(rename = "parametric")]
    Parametric { points: Vec<[f64; 2]> },
    #[serde(rename = "crystal")]
    Crystal {
        anchor: [f64; 2],
        facets: Vec<FacetSpec>,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FacetSpec {
    pub normal_index: usize,
    pub length: f64,
}

impl CurveSpec {
    pub fn from_json(json: &str) -> Result<Self> {
        serde_json::from_str(json).map_err(|e| Error::InvalidCurve(format!("bad curve JSON: {e}")))
    }
}

impl ParametricCurve {
    pub fn to_spec(&self) -> CurveSpec {
        CurveSpec::Parametric {
            points: self.points.iter().map(|p| [p.x, p.y]).collect(),
        }
    }

    pub fn from_spec(spec: &CurveSpec) -> Result<Self> {
        match spec {
            CurveSpec::Parametric { points } => {
                ParametricCurve::from_points(points.iter().map(|p| Vec2::new(p[0], p[1])).collect())
            }
            CurveSpec::Crystal { .. } => Err(Error::InvalidCurve(
                "expected a parametric curve, got a crystal one".into(),
            )),
        }
    }
}

/// Counterclockwise circle sampling (κ > 0, ν inward in the paper frame).
pub fn sample_circle_ccw(center: Vec2, radius: f64, n: usize) -> ParametricCurve {
    let pts = (0..n)
        .map(|i| {
            let t = 2.0 * PI * i as f64 / n as f64;
            center + Vec2::from_angle(t) * radius
        })
        .collect();
    ParametricCurve::from_points(pts).expect("circle sampling is valid")
}

/// Clockwise circle sampling (κ < 0, ν outward in the paper frame).
pub fn sample_circle_cw(center: Vec2, radius: f64, n: usize) -> ParametricCurve {
    let pts = (0..n)
        .map(|i| {
            let t = -2.0 * PI * i as f64 / n as f64;
            center + Vec2::from_angle(t) * radius
        })
        .collect();
    ParametricCurve::from_points(pts).expect("circle sampling is valid")
}

/// Sample a convex polygon's boundary with `per_edge` samples per edge,
/// including each vertex. Orientation follows the vertex list.
pub fn sample_polygon(vertices: &[Vec2], per_edge: usize) -> Result<ParametricCurve> {
    let n = vertices.len();
    let mut pts = Vec::with_capacity(n * per_edge);
    for i in 0..n {
        let a = vertices[i];
        let b = vertices[(i + 1) % n];
        for j in 0..per_edge {
            let t = j as f64 / per_edge as f64;
            pts.push(a + (b - a) * t);
        }
    }
    ParametricCurve::from_points(pts)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn circle_frames() {
        let c = sample_circle_ccw(Vec2::ZERO, 1.0, 256);
        assert_eq!(c.turning_number(), 1);
        for (&k, (&t, &n)) in c
            .kappa()
            .iter()
            .zip(c.tangents().iter().zip(c.normals().iter()))
        {
            assert!((k - 1.0).abs() < 1e-3, "κ = {k}");
            // Orthonormality exact to rounding.
            assert!((t.norm() - 1.0).abs() < 1e-15);
            assert!((n.norm() - 1.0).abs() < 1e-15);
            assert!(t.dot(n).abs() < 1e-15);
        }
        // CCW convex: inward normal.
        let p0 = c.point(0);
        assert!(c.normals()[0].dot(p0) < 0.0);

        let cw = sample_circle_cw(Vec2::ZERO, 2.0, 256);
        assert_eq!(cw.turning_number(), -1);
        assert!((cw.kappa()[0] + 0.5).abs() < 1e-3);
        assert!(cw.normals()[0].dot(cw.point(0)) > 0.0);
    }

    #[test]
    fn figure_eight_turning_number_zero() {
        // Gerono lemniscate: immersed with a single transversal crossing.
        let n = 512;
        let pts: Vec<Vec2> = (0..n)
            .map(|i| {
                let t = 2.0 * PI * i as f64 / n as f64;
                Vec2::new(t.sin(), t.sin() * t.cos())
            })
            .collect();
        let c = ParametricCurve::from_points(pts).unwrap();
        assert_eq!(c.turning_number(), 0);
    }

    #[test]
    fn ellipse_curvature_closed_form() {
        // κ(t) = ab/(a²sin²t + b²cos²t)^{3/2}; at t = 0 (point (a,0)): a/b².
        let (a, b) = (2.0, 1.0);
        let n = 1024;
        let pts: Vec<Vec2> = (0..n)
            .map(|i| {
                let t = 2.0 * PI * i as f64 / n as f64;
                Vec2::new(a * t.cos(), b * t.sin())
            })
            .collect();
        let c = ParametricCurve::from_points(pts).unwrap();
        let k0 = c.kappa()[0];
        assert!((k0 - a / (b * b)).abs() < 5e-4, "κ(0) = {k0}");
    }

    #[test]
    fn gauss_bonnet() {
        let c = sample_circle_ccw(Vec2::ZERO, 1.3, 200);
        let n = c.len();
        let mut total = 0.0;
        for i in 0..n {
            let ds = 0.5 * (c.edge_lengths()[(i + n - 1) % n] + c.edge_lengths()[i]);
            total += c.kappa()[i] * ds;
        }
        assert!(
            (total - 2.0 * PI).abs() < 2.0 * PI / n as f64 * 5.0,
            "∮κ ds = {total}"
        );
    }

    #[test]
    fn turning_number_stable_under_resampling() {
        let n = 300;
        let pts: Vec<Vec2> = (0..n)
            .map(|i| {
                let t = 2.0 * PI * i as f64 / n as f64;
                let r = 1.0 + 0.3 * (3.0 * t).cos();
                Vec2::from_angle(t) * r
            })
            .collect();
        let c = ParametricCurve::from_points(pts).unwrap();
        for m in [150, 200, 450] {
            let r = c.resample_uniform(m).unwrap();
            assert_eq!(r.turning_number(), c.turning_number());
            // Uniform spacing achieved.
            let lens = r.edge_lengths();
            let avg = r.total_length() / m as f64;
            for &l in lens {
                assert!((l - avg).abs() < 0.02 * avg);
            }
        }
    }

    #[test]
    fn aniso_curvature_smooth_cases() {
        let e = Anisotropy::euclidean();
        let c = sample_circle_ccw(Vec2::ZERO, 1.0, 256);
        for k in c.aniso_curvature(&e).unwrap() {
            assert!((k - 1.0).abs() < 1e-3);
        }
        let c2 = sample_circle_ccw(Vec2::ZERO, 2.0, 256);
        for k in c2.aniso_curvature(&e).unwrap() {
            assert!((k - 0.5).abs() < 1e-3);
        }

        // σ = 1 + β cos 4θ on the unit circle: κ_φ = 1 − 15β cos4θ.
        let beta = 0.01;
        let mut coeffs = vec![0.0; 5];
        coeffs[0] = 1.0;
        coeffs[4] = beta;
        let a = Anisotropy::smooth_from_coeffs(coeffs).unwrap();
        let kphi = c.aniso_curvature(&a).unwrap();
        for (i, &k) in kphi.iter().enumerate() {
            let th = c.theta()[i];
            let expect = (1.0 - 15.0 * beta * (4.0 * th).cos()) * c.kappa()[i];
            assert!((k - expect).abs() < 1e-10);
        }
        // Sample with normal angle ≡ 0 (mod 2π): κ_φ = (1−15β)·κ.
        let i0 = (0..c.len())
            .min_by(|&i, &j| {
                let di = wrap_pi(c.theta()[i]).abs();
                let dj = wrap_pi(c.theta()[j]).abs();
                di.partial_cmp(&dj).unwrap()
            })
            .unwrap();
        assert!((kphi[i0] - (1.0 - 15.0 * beta) * c.kappa()[i0]).abs() < 1e-4);

        // Crystalline anisotropy unsupported.
        let sq = Anisotropy::crystalline(vec![
            Vec2::new(1.0, -1.0),
            Vec2::new(1.0, 1.0),
            Vec2::new(-1.0, 1.0),
            Vec2::new(-1.0, -1.0),
        ])
        .unwrap();
        assert!(c.aniso_curvature(&sq).is_err());
    }

    #[test]
    fn hausdorff_examples() {
        let c1 = sample_circle_ccw(Vec2::ZERO, 1.0, 256);
        assert_eq!(hausdorff_distance(&c1, &c1), 0.0);
        let c2 = sample_circle_ccw(Vec2::ZERO, 1.25, 300);
        assert!((hausdorff_distance(&c1, &c2) - 0.25).abs() < 1e-3);
    }

    #[test]
    fn hausdorff_corner_rounding() {
        // Square side 2 vs the same square with corners rounded by r = 0.2:
        // distance r(√2−1) attained at the corners.
        let r = 0.2;
        let sq = sample_polygon(
            &[
                Vec2::new(1.0, -1.0),
                Vec2::new(1.0, 1.0),
                Vec2::new(-1.0, 1.0),
                Vec2::new(-1.0, -1.0),
            ],
            64,
        )
        .unwrap();
        // Arc centers sit at (±(1−r), ±(1−r)); consecutive arc endpoints are
        // joined by the straight sides via the polyline chords exactly.
        let mut pts = Vec::new();
        let m = 64;
        for corner in 0..4 {
            let phi0 = corner as f64 * PI / 2.0;
            let center = Vec2::from_angle(phi0 + PI / 4.0) * ((1.0 - r) * 2.0_f64.sqrt());
            for j in 0..m {
                let phi = phi0 + PI / 2.0 * j as f64 / (m - 1) as f64;
                pts.push(center + Vec2::from_angle(phi) * r);
            }
        }
        let rounded = ParametricCurve::from_points(pts).unwrap();
        let d = hausdorff_distance(&sq, &rounded);
        let expect = r * (2.0_f64.sqrt() - 1.0);
        assert!((d - expect).abs() < 2e-3, "d = {d}, expect {expect}");
    }

    #[test]
    fn csv_export_shape() {
        let c = sample_circle_ccw(Vec2::ZERO, 1.0, 8);
        let csv = c.to_csv(None);
        assert!(csv.starts_with("s,x,y,theta,kappa,kappa_phi\n"));
        assert_eq!(csv.lines().count(), 9);
    }

    #[test]
    fn degenerate_inputs_rejected() {
        assert!(ParametricCurve::from_points(vec![Vec2::ZERO; 3]).is_err());
        let mut pts: Vec<Vec2> = (0..8)
            .map(|i| Vec2::from_angle(2.0 * PI * i as f64 / 8.0))
            .collect();
        pts[3] = pts[2];
        assert!(matches!(
            ParametricCurve::from_points(pts),
            Err(Error::DegenerateEdge { .. })
        ));
    }
}
