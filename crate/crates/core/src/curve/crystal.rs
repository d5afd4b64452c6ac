//! Admissible crystalline polygons: cyclic facet lists adapted to a Wulff fan.
//!
//! Facets are stored in counterclockwise order with *outward* unit normals
//! taken from the Wulff fan; the edge direction of facet F is ν_F rotated by
//! +π/2, so walking the facet list traverses the polygon counterclockwise.
//! δ_F = +1 when the normal index advances counterclockwise through the fan
//! at both endpoints of F, −1 when it recedes at both, 0 otherwise; facets
//! with δ_F = 0 have zero crystalline curvature and are stationary.

use super::{CurveSpec, FacetSpec, ParametricCurve};
use crate::anisotropy::WulffPolygon;
use crate::error::{Error, Result};
use crate::geometry::{Polygon, Vec2};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Facet {
    /// Index into the Wulff fan's facet normals.
    pub normal_index: usize,
    pub length: f64,
    /// Local convexity factor in {−1, 0, +1}.
    pub delta: i8,
}

#[derive(Debug, Clone)]
pub struct CrystalCurve {
    /// Position of the first facet's starting vertex.
    pub anchor: Vec2,
    pub facets: Vec<Facet>,
}

/// Turn direction of the transition a → b in the fan: +1 counterclockwise
/// (convex), −1 clockwise (concave).
fn turn_direction(a: Vec2, b: Vec2) -> Result<i8> {
    let cross = a.cross(b);
    if cross > 1e-14 {
        Ok(1)
    } else if cross < -1e-14 {
        Ok(-1)
    } else if a.dot(b) > 0.0 {
        Err(Error::NonAdmissible(
            "consecutive facets share a normal; merge them".into(),
        ))
    } else {
        Err(Error::NonAdmissible(
            "consecutive facets have antiparallel normals".into(),
        ))
    }
}

fn deltas_from_normals(normals: &[Vec2]) -> Result<Vec<i8>> {
    let n = normals.len();
    let mut turns = Vec::with_capacity(n);
    for i in 0..n {
        turns.push(turn_direction(normals[i], normals[(i + 1) % n])?);
    }
    Ok((0..n)
        .map(|i| {
            let before = turns[(i + n - 1) % n];
            let after = turns[i];
            if before == after {
                before
            } else {
                0
            }
        })
        .collect())
}

impl CrystalCurve {
    /// Build an admissible polygon from (normal_index, length) pairs.
    ///
    /// Inputs must be adapted: every normal index valid, consecutive indices
    /// adjacent in the fan, all lengths positive, and the facet loop closed.
    pub fn new(anchor: Vec2, facets: &[(usize, f64)], wulff: &WulffPolygon) -> Result<Self> {
        let m = wulff.num_facets();
        if facets.len() < 3 {
            return Err(Error::NonAdmissible(format!(
                "need at least 3 facets, got {}",
                facets.len()
            )));
        }
        for &(idx, len) in facets {
            if idx >= m {
                return Err(Error::NonAdmissible(format!(
                    "normal index {idx} out of range (fan has {m} facets)"
                )));
            }
            if !(len > 0.0) {
                return Err(Error::NonAdmissible(format!(
                    "facet length {len} is not positive"
                )));
            }
        }
        for w in 0..facets.len() {
            let a = facets[w].0;
            let b = facets[(w + 1) % facets.len()].0;
            let diff = (b + m - a) % m;
            if diff != 1 && diff != m - 1 {
                return Err(Error::NonAdmissible(format!(
                    "consecutive facet normals {a} and {b} are not adjacent in the fan"
                )));
            }
        }
        Self::assemble(anchor, facets, wulff)
    }

    /// Build without the fan-adjacency requirement; used after facet-removal
    /// events, which may legitimately join non-adjacent normals.
    pub(crate) fn assemble(
        anchor: Vec2,
        facets: &[(usize, f64)],
        wulff: &WulffPolygon,
    ) -> Result<Self> {
        let normals: Vec<Vec2> = facets
            .iter()
            .map(|&(idx, _)| wulff.facet_normals[idx])
            .collect();
        let deltas = deltas_from_normals(&normals)?;
        let out = CrystalCurve {
            anchor,
            facets: facets
                .iter()
                .zip(&deltas)
                .map(|(&(normal_index, length), &delta)| Facet {
                    normal_index,
                    length,
                    delta,
                })
                .collect(),
        };
        let closure = out.closure_defect(wulff);
        let perimeter = out.perimeter();
        if closure > 1e-8 * perimeter {
            return Err(Error::NonAdmissible(format!(
                "facet loop does not close (defect {closure:.3e}, perimeter {perimeter:.3e})"
            )));
        }
        Ok(out)
    }

    pub fn num_facets(&self) -> usize {
        self.facets.len()
    }

    pub fn perimeter(&self) -> f64 {
        self.facets.iter().map(|f| f.length).sum()
    }

    /// Edge direction of facet i: outward normal rotated counterclockwise.
    pub fn edge_direction(&self, i: usize, wulff: &WulffPolygon) -> Vec2 {
        wulff.facet_normals[self.facets[i].normal_index].perp()
    }

    /// |Σ l_F τ_F|, the closure defect.
    pub fn closure_defect(&self, wulff: &WulffPolygon) -> f64 {
        let mut acc = Vec2::ZERO;
        for (i, f) in self.facets.iter().enumerate() {
            acc += self.edge_direction(i, wulff) * f.length;
        }
        acc.norm()
    }

    /// Vertex positions, starting at the anchor.
    pub fn vertices(&self, wulff: &WulffPolygon) -> Vec<Vec2> {
        let mut v = Vec::with_capacity(self.facets.len());
        let mut p = self.anchor;
        for (i, f) in self.facets.iter().enumerate() {
            v.push(p);
            p += self.edge_direction(i, wulff) * f.length;
        }
        v
    }

    pub fn as_polygon(&self, wulff: &WulffPolygon) -> Polygon {
        Polygon::new(self.vertices(wulff))
    }

    pub fn area(&self, wulff: &WulffPolygon) -> f64 {
        self.as_polygon(wulff).signed_area()
    }

    /// Support value of each facet's line: h_i = ν_i · (any point on facet i).
    pub fn support_values(&self, wulff: &WulffPolygon) -> Vec<f64> {
        let verts = self.vertices(wulff);
        self.facets
            .iter()
            .enumerate()
            .map(|(i, f)| wulff.facet_normals[f.normal_index].dot(verts[i]))
            .collect()
    }

    /// Crystalline curvature per facet: κ_φ^F = δ_F · l_{W_φ} / l_F.
    pub fn aniso_curvature(&self, wulff: &WulffPolygon) -> Result<Vec<f64>> {
        self.facets
            .iter()
            .map(|f| {
                if !(f.length > 0.0) {
                    return Err(Error::NonAdmissible(format!(
                        "facet length {} is not positive",
                        f.length
                    )));
                }
                Ok(f.delta as f64 * wulff.facet_lengths[f.normal_index] / f.length)
            })
            .collect()
    }

    /// Dense parametric sampling of the polygon boundary (counterclockwise),
    /// for Hausdorff comparisons against smooth flows.
    pub fn sample(&self, wulff: &WulffPolygon, per_facet: usize) -> Result<ParametricCurve> {
        let verts = self.vertices(wulff);
        super::sample_polygon(&verts, per_facet.max(2))
    }

    pub fn to_spec(&self) -> CurveSpec {
        CurveSpec::Crystal {
            anchor: [self.anchor.x, self.anchor.y],
            facets: self
                .facets
                .iter()
                .map(|f| FacetSpec {
                    normal_index: f.normal_index,
                    length: f.length,
                })
                .collect(),
        }
    }

    pub fn from_spec(spec: &CurveSpec, wulff: &WulffPolygon) -> Result<Self> {
        match spec {
            CurveSpec::Crystal { anchor, facets } => CrystalCurve::new(
                Vec2::new(anchor[0], anchor[1]),
                &facets
                    .iter()
                    .map(|f| (f.normal_index, f.length))
                    .collect::<Vec<_>>(),
                wulff,
            ),
            CurveSpec::Parametric { .. } => Err(Error::InvalidCurve(
                "expected a crystal curve, got a parametric one".into(),
            )),
        }
    }
}

/// Square curve of side `side` centered at the origin, adapted to a Wulff
/// polygon whose fan contains the four axis normals (e.g. the unit square).
pub fn axis_square_crystal(side: f64, wulff: &WulffPolygon) -> Result<CrystalCurve> {
    let dirs = [
        Vec2::new(1.0, 0.0),
        Vec2::new(0.0, 1.0),
        Vec2::new(-1.0, 0.0),
        Vec2::new(0.0, -1.0),
    ];
    let mut facets = Vec::new();
    for d in dirs {
        let idx = wulff
            .facet_matching_normal(d, super::NORMAL_MATCH_TOL)
            .ok_or_else(|| Error::NonAdmissible("fan lacks an axis normal".into()))?;
        facets.push((idx, side));
    }
    let h = side / 2.0;
    CrystalCurve::new(Vec2::new(h, -h), &facets, wulff)
}

/// L-shape with a 3×3 outer corner and a 0.5-high foot; the two facets
/// bordering the reentrant corner have δ = 0. Test fixture.
#[cfg(test)]
pub(crate) fn l_shape_fixture(wulff: &WulffPolygon) -> CrystalCurve {
    let e = wulff.facet_matching_normal(Vec2::new(1.0, 0.0), 1e-9).unwrap();
    let n = wulff.facet_matching_normal(Vec2::new(0.0, 1.0), 1e-9).unwrap();
    let w = wulff.facet_matching_normal(Vec2::new(-1.0, 0.0), 1e-9).unwrap();
    let s = wulff.facet_matching_normal(Vec2::new(0.0, -1.0), 1e-9).unwrap();
    // (0,0)→(3,0)→(3,0.5)→(1,0.5)→(1,3)→(0,3)→(0,0)
    CrystalCurve::new(
        Vec2::new(0.0, 0.0),
        &[(s, 3.0), (e, 0.5), (n, 2.0), (e, 2.5), (n, 1.0), (w, 3.0)],
        wulff,
    )
    .unwrap()
}
