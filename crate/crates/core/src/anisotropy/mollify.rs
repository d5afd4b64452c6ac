//! Regularization of anisotropies by periodic mollification of the
//! support-angle function.
//!
//! Construction for γ_ε given a base γ:
//!   1. σ_m = σ ∗ k_ε with a C^∞ even bump kernel of angular width ε
//!      (half-width ε/2). Derivatives are taken analytically: σ_m′ pairs σ
//!      against k′; for crystalline bases σ_m″ uses the exact decomposition
//!      σ″ = −σ on the smooth arcs plus a Dirac mass of size l_j (the Wulff
//!      edge length) at each facet-normal angle θ_j, so that
//!      σ_m + σ_m″ = ε + Σ_j l_j·k(θ − θ_j) after step 2, with exact
//!      cancellation of the quadrature noise.
//!   2. add ε (a Euclidean term), which enforces σ + σ″ ≥ ε.
//!   3. scale by c = min_θ σ(θ)/(σ_m(θ)+ε) (slightly shrunk), which
//!      enforces σ_ε ≤ σ pointwise, i.e. γ_ε ≥ γ and W_{γ_ε} ⊆ W_γ.
//!
//! The result is tabulated on a dense uniform grid and interpolated with
//! periodic Catmull-Rom splines; σ′ and σ″ have their own tables and are
//! never obtained by differencing.

use super::{Anisotropy, Repr, ANGULAR_GRID};
use crate::error::{Error, Result};
use crate::parallel;
use std::f64::consts::PI;

const QUAD_POINTS: usize = 513;
const SCALE_SAFETY: f64 = 1e-6;

fn wrap_pi(mut x: f64) -> f64 {
    while x > PI {
        x -= 2.0 * PI;
    }
    while x <= -PI {
        x += 2.0 * PI;
    }
    x
}

/// The standard bump exp(−1/(1−r²)) on (−1,1) and its first derivative.
fn bump(r: f64) -> f64 {
    if r.abs() >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - r * r)).exp()
    }
}

fn bump_d1(r: f64) -> f64 {
    if r.abs() >= 1.0 {
        0.0
    } else {
        let q = 1.0 - r * r;
        bump(r) * (-2.0 * r / (q * q))
    }
}

struct Kernel {
    w: f64,
    /// ∫_{-1}^{1} exp(−1/(1−r²)) dr
    z: f64,
}

impl Kernel {
    fn new(w: f64) -> Self {
        // Simpson on the unit-scale bump; smooth with flat tails, converges fast.
        let m = 2048;
        let h = 2.0 / m as f64;
        let mut z = 0.0;
        for i in 0..=m {
            let r = -1.0 + i as f64 * h;
            let wgt = if i == 0 || i == m {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            z += wgt * bump(r);
        }
        z *= h / 3.0;
        Kernel { w, z }
    }

    fn k(&self, t: f64) -> f64 {
        bump(t / self.w) / (self.z * self.w)
    }

    fn k1(&self, t: f64) -> f64 {
        bump_d1(t / self.w) / (self.z * self.w * self.w)
    }
}

/// Dense uniform table of (σ, σ′, σ″) over [0, 2π) with periodic
/// Catmull-Rom interpolation, each derivative from its own table.
#[derive(Debug, Clone)]
pub(crate) struct SigmaTable {
    sigma: Vec<f64>,
    d1: Vec<f64>,
    d2: Vec<f64>,
}

fn catmull_rom(p0: f64, p1: f64, p2: f64, p3: f64, t: f64) -> f64 {
    p1 + 0.5
        * t
        * ((p2 - p0)
            + t * ((2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3) + t * (-p0 + 3.0 * p1 - 3.0 * p2 + p3)))
}

impl SigmaTable {
    fn interp(table: &[f64], theta: f64) -> f64 {
        let m = table.len();
        let x = theta.rem_euclid(2.0 * PI) / (2.0 * PI) * m as f64;
        let i = (x.floor() as usize).min(m - 1);
        let t = x - i as f64;
        let at = |j: isize| table[(i as isize + j).rem_euclid(m as isize) as usize];
        catmull_rom(at(-1), at(0), at(1), at(2), t)
    }

    pub(crate) fn eval(&self, theta: f64) -> (f64, f64, f64) {
        (
            Self::interp(&self.sigma, theta),
            Self::interp(&self.d1, theta),
            Self::interp(&self.d2, theta),
        )
    }
}

pub(crate) fn regularize(base: &Anisotropy, epsilon: f64) -> Result<Anisotropy> {
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(Error::EpsilonOutOfRange(epsilon));
    }
    let w = 0.5 * epsilon;
    let kernel = Kernel::new(w);

    // Simpson nodes/weights on [-w, w].
    let q = QUAD_POINTS;
    let h = 2.0 * w / (q - 1) as f64;
    let nodes: Vec<(f64, f64)> = (0..q)
        .map(|i| {
            let t = -w + i as f64 * h;
            let wgt = if i == 0 || i == q - 1 {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            } * h
                / 3.0;
            (t, wgt)
        })
        .collect();

    // Facet-normal kink angles and their σ′ jump masses (= Wulff edge lengths).
    let kinks: Option<Vec<(f64, f64)>> = match &base.repr {
        Repr::Crystalline { wulff } => Some(
            wulff
                .facet_normals
                .iter()
                .zip(&wulff.facet_lengths)
                .map(|(n, &l)| (n.angle(), l))
                .collect(),
        ),
        _ => None,
    };

    let m = ANGULAR_GRID;
    let rows: Vec<(f64, f64, f64)> = parallel::map_collect(m, |i| {
        let th = 2.0 * PI * i as f64 / m as f64;
        let mut s_m = 0.0;
        let mut s_m1 = 0.0;
        for &(t, wgt) in &nodes {
            let sb = base.sigma(th - t);
            s_m += wgt * sb * kernel.k(t);
            s_m1 += wgt * sb * kernel.k1(t);
        }
        let s_m2 = match &kinks {
            Some(ks) => {
                let spikes: f64 = ks.iter().map(|&(tj, l)| l * kernel.k(wrap_pi(th - tj))).sum();
                spikes - s_m
            }
            None => {
                let mut acc = 0.0;
                for &(t, wgt) in &nodes {
                    acc += wgt * base.sigma_d012(th - t).2 * kernel.k(t);
                }
                acc
            }
        };
        (s_m + epsilon, s_m1, s_m2)
    });

    let mut table = SigmaTable {
        sigma: rows.iter().map(|r| r.0).collect(),
        d1: rows.iter().map(|r| r.1).collect(),
        d2: rows.iter().map(|r| r.2).collect(),
    };

    // Scaling factor: min of σ_base/(σ_m+ε) over a 4× finer grid plus the
    // kink angles themselves (the ratio is V-shaped there).
    let fine = 4 * m;
    let mut c = parallel::min_over(fine, |i| {
        let th = 2.0 * PI * i as f64 / fine as f64;
        base.sigma(th) / SigmaTable::interp(&table.sigma, th)
    });
    if let Some(ks) = &kinks {
        for &(tj, _) in ks {
            c = c.min(base.sigma(tj) / SigmaTable::interp(&table.sigma, tj));
        }
    }
    let c = c * (1.0 - SCALE_SAFETY);
    if !(c.is_finite() && c > 0.0) {
        return Err(Error::InvalidAnisotropy(format!(
            "regularization scaling failed (c = {c})"
        )));
    }
    for v in table
        .sigma
        .iter_mut()
        .chain(table.d1.iter_mut())
        .chain(table.d2.iter_mut())
    {
        *v *= c;
    }

    let out = Anisotropy {
        repr: Repr::Regularized {
            base: Box::new(base.clone()),
            epsilon,
            table,
        },
    };

    // Contract checks: ellipticity of γ_ε° through ψ, and ψ-positivity of the
    // polar side by second differences of θ ↦ γ_ε(ν(θ)).
    out.ellipticity_constant()?;
    let check_grid = 512;
    let fd_h = 1e-4;
    let min_psi_polar = parallel::min_over(check_grid, |i| {
        let th = 2.0 * PI * i as f64 / check_grid as f64;
        let s0 = out.eval_norm(crate::geometry::Vec2::from_angle(th));
        let sp = out.eval_norm(crate::geometry::Vec2::from_angle(th + fd_h));
        let sm = out.eval_norm(crate::geometry::Vec2::from_angle(th - fd_h));
        let d2 = (sp - 2.0 * s0 + sm) / (fd_h * fd_h);
        s0 * (s0 + d2)
    });
    if min_psi_polar <= 0.0 {
        return Err(Error::NonElliptic {
            min_psi: min_psi_polar,
        });
    }

    Ok(out)
}
