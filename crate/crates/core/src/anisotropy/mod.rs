//! Anisotropies: norms on the plane together with their polars, Wulff
//! shapes, support-angle functions and duality maps.
//!
//! Throughout, `sigma` is the support-angle function σ(θ) = γ°(cosθ, sinθ)
//! of the polar norm, i.e. the support function of the Wulff shape
//! W_γ = {γ ≤ 1} evaluated on unit directions. The mobility-weighted
//! stiffness ψ(θ) = σ(σ + σ″) is the diffusion coefficient of the
//! parametric flow; its positive lower bound is the ellipticity constant.

mod mollify;
mod spec;

pub use spec::AnisotropySpec;

use crate::error::{Error, Result};
use crate::geometry::{Polygon, Vec2};
use crate::parallel;
use std::f64::consts::PI;

/// Default angular grid for "for all θ" checks and sweeps.
pub const ANGULAR_GRID: usize = 4096;
/// Tolerance for algebraic identities.
pub const TOL_ALG: f64 = 1e-9;
/// Tolerance for differenced quantities.
pub const TOL_DIFF: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AnisotropyKind {
    Euclidean,
    SmoothParametric,
    Crystalline,
    Regularized,
}

impl AnisotropyKind {
    pub fn name(self) -> &'static str {
        match self {
            AnisotropyKind::Euclidean => "euclidean",
            AnisotropyKind::SmoothParametric => "smooth",
            AnisotropyKind::Crystalline => "crystalline",
            AnisotropyKind::Regularized => "regularized",
        }
    }
}

/// Convex polygon with derived facet data, the boundary of a Wulff shape.
#[derive(Debug, Clone)]
pub struct WulffPolygon {
    /// Counterclockwise vertex list.
    pub vertices: Vec<Vec2>,
    /// Unit outward normal of edge i (from vertex i to vertex i+1).
    pub facet_normals: Vec<Vec2>,
    /// Length of edge i.
    pub facet_lengths: Vec<f64>,
}

impl WulffPolygon {
    /// Derive facet data from a counterclockwise convex vertex list.
    pub fn from_vertices(vertices: Vec<Vec2>) -> Result<Self> {
        let n = vertices.len();
        if n < 3 {
            return Err(Error::InvalidAnisotropy(format!(
                "Wulff polygon needs at least 3 vertices, got {n}"
            )));
        }
        let poly = Polygon::new(vertices.clone());
        if poly.signed_area() <= 0.0 {
            return Err(Error::InvalidAnisotropy(
                "Wulff vertices must be counterclockwise".into(),
            ));
        }
        if !poly.is_convex(1e-12 * poly.signed_area().abs()) {
            return Err(Error::InvalidAnisotropy("Wulff polygon is not convex".into()));
        }
        let mut normals = Vec::with_capacity(n);
        let mut lengths = Vec::with_capacity(n);
        for i in 0..n {
            let e = vertices[(i + 1) % n] - vertices[i];
            let len = e.norm();
            if len < 1e-14 {
                return Err(Error::InvalidAnisotropy(format!(
                    "repeated Wulff vertex at index {i}"
                )));
            }
            lengths.push(len);
            // Outward normal of a CCW polygon: edge rotated clockwise.
            normals.push(-(e.perp()) / len);
        }
        // Normals must advance strictly counterclockwise (strict convexity of the fan).
        for i in 0..n {
            let a = normals[i];
            let b = normals[(i + 1) % n];
            if a.cross(b) <= 0.0 {
                return Err(Error::InvalidAnisotropy(format!(
                    "facet normals not strictly ordered by angle at edge {i}"
                )));
            }
        }
        Ok(WulffPolygon {
            vertices,
            facet_normals: normals,
            facet_lengths: lengths,
        })
    }

    pub fn num_facets(&self) -> usize {
        self.vertices.len()
    }

    pub fn as_polygon(&self) -> Polygon {
        Polygon::new(self.vertices.clone())
    }

    /// Minkowski gauge of the polygon (0 is interior by construction for Wulff shapes).
    pub fn gauge(&self, x: Vec2) -> f64 {
        let n = self.vertices.len();
        let mut g: f64 = 0.0;
        for i in 0..n {
            let h = self.facet_normals[i].dot(self.vertices[i]);
            g = g.max(self.facet_normals[i].dot(x) / h);
        }
        g.max(0.0)
    }

    /// Index of the facet whose outward normal is within `tol` radians of `nu`, if any.
    pub fn facet_matching_normal(&self, nu: Vec2, tol: f64) -> Option<usize> {
        let nu = nu.normalized();
        self.facet_normals
            .iter()
            .position(|&n| n.cross(nu).abs() < tol && n.dot(nu) > 0.0)
    }
}

/// Result of the duality map ∂γ°(ν): a single point for smooth anisotropies,
/// a Wulff vertex or a whole Wulff edge for crystalline ones.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ChDirection {
    Point(Vec2),
    /// Edge of the Wulff shape, endpoints in counterclockwise order.
    Segment(Vec2, Vec2),
}

impl ChDirection {
    /// Any admissible selection from the set.
    pub fn any_point(&self) -> Vec2 {
        match *self {
            ChDirection::Point(p) => p,
            ChDirection::Segment(a, b) => (a + b) * 0.5,
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) enum Repr {
    Euclidean,
    /// σ(θ) = Σ_k coeffs[k]·cos(kθ); odd harmonics are rejected (norm evenness).
    Smooth { coeffs: Vec<f64> },
    Crystalline { wulff: WulffPolygon },
    Regularized {
        base: Box<Anisotropy>,
        epsilon: f64,
        table: mollify::SigmaTable,
    },
}

/// An anisotropy (a norm on the plane). Immutable after construction; all
/// operations are pure and safe to call concurrently.
#[derive(Debug, Clone)]
pub struct Anisotropy {
    pub(crate) repr: Repr,
}

/// Flip `x` into the upper half plane; norms are even so this is free and
/// makes evenness of evaluations exact.
fn canonical(x: Vec2) -> Vec2 {
    if x.y < 0.0 || (x.y == 0.0 && x.x < 0.0) {
        -x
    } else {
        x
    }
}

impl Anisotropy {
    pub fn euclidean() -> Self {
        Anisotropy { repr: Repr::Euclidean }
    }

    /// Smooth-parametric anisotropy from Fourier cosine coefficients of σ:
    /// σ(θ) = Σ_k coeffs[k]·cos(kθ). Odd harmonics violate σ(θ+π) = σ(θ)
    /// and are rejected; σ must be positive.
    pub fn smooth_from_coeffs(coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::InvalidAnisotropy("empty coefficient list".into()));
        }
        for (k, &c) in coeffs.iter().enumerate() {
            if k % 2 == 1 && c != 0.0 {
                return Err(Error::InvalidAnisotropy(format!(
                    "odd cosine harmonic {k} breaks evenness of the norm"
                )));
            }
        }
        let a = Anisotropy {
            repr: Repr::Smooth { coeffs },
        };
        for i in 0..ANGULAR_GRID {
            let th = 2.0 * PI * i as f64 / ANGULAR_GRID as f64;
            let (s, _, _) = a.sigma_d012(th);
            if s <= 0.0 {
                return Err(Error::InvalidAnisotropy(format!(
                    "σ({th:.6}) = {s} is not positive"
                )));
            }
        }
        Ok(a)
    }

    /// Crystalline anisotropy from its Wulff polygon (counterclockwise,
    /// centrally symmetric, 0 in the interior). Vertices are exactly
    /// symmetrized so that evaluations are even to the last bit.
    pub fn crystalline(vertices: Vec<Vec2>) -> Result<Self> {
        let mut verts = vertices;
        let n = verts.len();
        if n < 4 || n % 2 != 0 {
            return Err(Error::InvalidAnisotropy(format!(
                "a centrally symmetric Wulff polygon needs an even number ≥ 4 of vertices, got {n}"
            )));
        }
        if Polygon::new(verts.clone()).signed_area() < 0.0 {
            verts.reverse();
        }
        let m = n / 2;
        let scale = verts.iter().map(|v| v.norm()).fold(0.0, f64::max);
        for i in 0..m {
            let d = (verts[i] + verts[i + m]).norm();
            if d > 1e-9 * scale {
                return Err(Error::InvalidAnisotropy(format!(
                    "vertices {i} and {} are not antipodal (gap {d:.3e})",
                    i + m
                )));
            }
            verts[i + m] = -verts[i];
        }
        let wulff = WulffPolygon::from_vertices(verts)?;
        for i in 0..n {
            let h = wulff.facet_normals[i].dot(wulff.vertices[i]);
            if h <= 0.0 {
                return Err(Error::InvalidAnisotropy(
                    "origin is not interior to the Wulff polygon".into(),
                ));
            }
        }
        Ok(Anisotropy {
            repr: Repr::Crystalline { wulff },
        })
    }

    pub fn kind(&self) -> AnisotropyKind {
        match self.repr {
            Repr::Euclidean => AnisotropyKind::Euclidean,
            Repr::Smooth { .. } => AnisotropyKind::SmoothParametric,
            Repr::Crystalline { .. } => AnisotropyKind::Crystalline,
            Repr::Regularized { .. } => AnisotropyKind::Regularized,
        }
    }

    /// ε of a regularized anisotropy.
    pub fn epsilon(&self) -> Option<f64> {
        match &self.repr {
            Repr::Regularized { epsilon, .. } => Some(*epsilon),
            _ => None,
        }
    }

    /// Base anisotropy of a regularized one.
    pub fn base(&self) -> Option<&Anisotropy> {
        match &self.repr {
            Repr::Regularized { base, .. } => Some(base),
            _ => None,
        }
    }

    /// True for kinds with a classical σ″ (everything except crystalline).
    pub fn is_smooth_kind(&self) -> bool {
        !matches!(self.repr, Repr::Crystalline { .. })
    }

    pub(crate) fn require_smooth(&self) -> Result<()> {
        if self.is_smooth_kind() {
            Ok(())
        } else {
            Err(Error::KindUnsupported(self.kind().name()))
        }
    }

    /// σ, σ′, σ″ without the kind check; crystalline σ′/σ″ are garbage here.
    pub(crate) fn sigma_d012(&self, theta: f64) -> (f64, f64, f64) {
        match &self.repr {
            Repr::Euclidean => (1.0, 0.0, 0.0),
            Repr::Smooth { coeffs } => {
                let (mut s, mut d1, mut d2) = (0.0, 0.0, 0.0);
                for (k, &c) in coeffs.iter().enumerate() {
                    if c == 0.0 {
                        continue;
                    }
                    let kf = k as f64;
                    let (sin, cos) = (kf * theta).sin_cos();
                    s += c * cos;
                    d1 -= c * kf * sin;
                    d2 -= c * kf * kf * cos;
                }
                (s, d1, d2)
            }
            Repr::Crystalline { wulff } => {
                let u = Vec2::from_angle(theta);
                (wulff.as_polygon().support(u), f64::NAN, f64::NAN)
            }
            Repr::Regularized { table, .. } => table.eval(theta),
        }
    }

    /// σ(θ) alone (valid for every kind; the crystalline support function is
    /// evaluated exactly as a max over Wulff vertices).
    pub fn sigma(&self, theta: f64) -> f64 {
        match &self.repr {
            Repr::Crystalline { wulff } => {
                let u = Vec2::from_angle(theta);
                wulff
                    .vertices
                    .iter()
                    .map(|v| v.dot(u))
                    .fold(f64::NEG_INFINITY, f64::max)
            }
            _ => self.sigma_d012(theta).0,
        }
    }

    /// The norm γ(x).
    ///
    /// Crystalline: Minkowski gauge of the Wulff polygon. Smooth kinds:
    /// γ(x) = sup_θ x·ν(θ)/σ(θ) by bipolarity, refined by golden section.
    pub fn eval_norm(&self, x: Vec2) -> f64 {
        if x == Vec2::ZERO {
            return 0.0;
        }
        let x = canonical(x);
        match &self.repr {
            Repr::Euclidean => x.norm(),
            Repr::Crystalline { wulff } => wulff.gauge(x),
            _ => {
                let f = |theta: f64| {
                    let u = Vec2::from_angle(theta);
                    x.dot(u) / self.sigma_d012(theta).0
                };
                let coarse = 512;
                let mut best_i = 0;
                let mut best = f64::NEG_INFINITY;
                for i in 0..coarse {
                    let v = f(2.0 * PI * i as f64 / coarse as f64);
                    if v > best {
                        best = v;
                        best_i = i;
                    }
                }
                let h = 2.0 * PI / coarse as f64;
                let mut lo = h * (best_i as f64 - 1.0);
                let mut hi = h * (best_i as f64 + 1.0);
                // Golden-section ascent on the bracket.
                let phi = 0.5 * (3.0 - 5.0_f64.sqrt());
                let mut x1 = lo + phi * (hi - lo);
                let mut x2 = hi - phi * (hi - lo);
                let (mut f1, mut f2) = (f(x1), f(x2));
                for _ in 0..80 {
                    if f1 < f2 {
                        lo = x1;
                        x1 = x2;
                        f1 = f2;
                        x2 = hi - phi * (hi - lo);
                        f2 = f(x2);
                    } else {
                        hi = x2;
                        x2 = x1;
                        f2 = f1;
                        x1 = lo + phi * (hi - lo);
                        f1 = f(x1);
                    }
                }
                best.max(f1).max(f2)
            }
        }
    }

    /// The polar norm γ°(x) = sup{ξ·x : γ(ξ) ≤ 1}.
    pub fn eval_polar(&self, x: Vec2) -> f64 {
        if x == Vec2::ZERO {
            return 0.0;
        }
        let x = canonical(x);
        match &self.repr {
            Repr::Euclidean => x.norm(),
            Repr::Crystalline { wulff } => wulff
                .vertices
                .iter()
                .map(|v| v.dot(x))
                .fold(f64::NEG_INFINITY, f64::max),
            _ => {
                let r = x.norm();
                r * self.sigma_d012(x.angle()).0
            }
        }
    }

    /// (σ, σ′, σ″) at `theta`. Errors for crystalline anisotropies, whose σ″
    /// is a measure.
    pub fn support_angle(&self, theta: f64) -> Result<(f64, f64, f64)> {
        self.require_smooth()?;
        Ok(self.sigma_d012(theta))
    }

    /// ψ(θ) = σ(θ)(σ(θ) + σ″(θ)).
    pub fn psi(&self, theta: f64) -> Result<f64> {
        let (s, _, s2) = self.support_angle(theta)?;
        Ok(s * (s + s2))
    }

    /// Discrete ellipticity constant: min of ψ over the default angular grid.
    /// Errors if the minimum is not strictly positive.
    pub fn ellipticity_constant(&self) -> Result<f64> {
        self.require_smooth()?;
        let min_psi = parallel::min_over(ANGULAR_GRID, |i| {
            let th = 2.0 * PI * i as f64 / ANGULAR_GRID as f64;
            let (s, _, s2) = self.sigma_d012(th);
            s * (s + s2)
        });
        if min_psi <= 0.0 {
            return Err(Error::NonElliptic { min_psi });
        }
        Ok(min_psi)
    }

    /// Max of ψ over the default angular grid (explicit-scheme stability bound).
    pub fn max_psi(&self) -> Result<f64> {
        self.require_smooth()?;
        Ok(-parallel::min_over(ANGULAR_GRID, |i| {
            let th = 2.0 * PI * i as f64 / ANGULAR_GRID as f64;
            let (s, _, s2) = self.sigma_d012(th);
            -s * (s + s2)
        }))
    }

    /// Boundary of the Wulff shape W_γ = {γ ≤ 1}.
    ///
    /// Crystalline anisotropies return their exact vertices; smooth kinds use
    /// the support-function parametrization x(θ) = σ(θ)ν(θ) + σ′(θ)ν(θ)^⊥ at
    /// `resolution` uniformly spaced angles.
    pub fn wulff_shape(&self, resolution: usize) -> Result<WulffPolygon> {
        if resolution < 3 {
            return Err(Error::ResolutionTooSmall(resolution));
        }
        match &self.repr {
            Repr::Crystalline { wulff } => Ok(wulff.clone()),
            _ => {
                let pts = parallel::map_collect(resolution, |i| {
                    let th = 2.0 * PI * i as f64 / resolution as f64;
                    let (s, d1, _) = self.sigma_d012(th);
                    let u = Vec2::from_angle(th);
                    u * s + u.perp() * d1
                });
                WulffPolygon::from_vertices(pts)
            }
        }
    }

    /// The duality map: ∂γ°(ν) as a point (smooth kinds) or exposed face of
    /// the Wulff shape (crystalline). Errors on the zero vector.
    pub fn cahn_hoffman_direction(&self, nu: Vec2) -> Result<ChDirection> {
        if nu == Vec2::ZERO {
            return Err(Error::InvalidAnisotropy(
                "Cahn-Hoffman direction of the zero vector".into(),
            ));
        }
        let nu = nu.normalized();
        match &self.repr {
            Repr::Crystalline { wulff } => {
                // Facet-normal directions expose a whole Wulff edge.
                if let Some(i) = wulff.facet_matching_normal(nu, crate::curve::NORMAL_MATCH_TOL) {
                    let n = wulff.num_facets();
                    return Ok(ChDirection::Segment(
                        wulff.vertices[i],
                        wulff.vertices[(i + 1) % n],
                    ));
                }
                let i = wulff.as_polygon().support_vertex(nu);
                Ok(ChDirection::Point(wulff.vertices[i]))
            }
            _ => {
                let th = nu.angle();
                let (s, d1, _) = self.sigma_d012(th);
                Ok(ChDirection::Point(nu * s + nu.perp() * d1))
            }
        }
    }

    /// Smooth elliptic approximation γ_ε ≥ γ with W_{γ_ε} ⊆ W_γ; see
    /// [`mollify`] for the construction.
    pub fn regularize(&self, epsilon: f64) -> Result<Anisotropy> {
        mollify::regularize(self, epsilon)
    }
}
