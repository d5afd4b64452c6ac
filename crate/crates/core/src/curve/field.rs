//! Cahn-Hoffman vector fields, Wulff offsets and RW-condition certificates.
//!
//! Two constructions are implemented, matching the two cases the theory
//! actually defines: pointwise N = Dγ°(ν) for smooth anisotropies on
//! sampled curves, and the energy-minimizing selection on Wulff-adapted
//! polygons, where N interpolates linearly between the Wulff vertices
//! bounding each exposed edge and stays constant on zero-curvature facets.
//! Everything else is rejected as non-admissible.

use super::{CrystalCurve, ParametricCurve, NORMAL_MATCH_TOL};
use crate::anisotropy::{Anisotropy, AnisotropyKind, WulffPolygon};
use crate::error::{Error, Result};
use crate::geometry::Vec2;
use crate::parallel;

#[derive(Debug, Clone)]
pub struct CahnHoffmanField {
    /// Per-sample values (parametric curves) or per-vertex values (crystals).
    pub values: Vec<Vec2>,
    /// Discrete estimate of ‖N_s‖_∞ = max |ΔN|/Δs.
    pub lipschitz_bound: f64,
}

impl CahnHoffmanField {
    /// 1/‖N_s‖_∞, the admissible offset radius.
    pub fn offset_radius(&self) -> f64 {
        if self.lipschitz_bound > 0.0 {
            1.0 / self.lipschitz_bound
        } else {
            f64::INFINITY
        }
    }
}

fn lipschitz_of(values: &[Vec2], edge_lengths: &[f64]) -> f64 {
    let n = values.len();
    (0..n)
        .map(|i| (values[(i + 1) % n] - values[i]).norm() / edge_lengths[i])
        .fold(0.0, f64::max)
}

/// Cahn-Hoffman field of a sampled curve.
pub fn cahn_hoffman_field(c: &ParametricCurve, a: &Anisotropy) -> Result<CahnHoffmanField> {
    match a.kind() {
        AnisotropyKind::Crystalline => crystalline_field(c, a),
        _ => {
            let values: Vec<Vec2> = c
                .theta()
                .iter()
                .map(|&th| {
                    let (s, d1, _) = a.sigma_d012(th);
                    let nu = Vec2::from_angle(th);
                    nu * s + nu.perp() * d1
                })
                .collect();
            let lipschitz_bound = lipschitz_of(&values, c.edge_lengths());
            Ok(CahnHoffmanField {
                values,
                lipschitz_bound,
            })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum SampleClass {
    /// ν matches the fan normal of Wulff edge j: the exposed face is an edge.
    Flat(usize),
    /// Generic direction exposing Wulff vertex v.
    Corner(usize),
}

/// Energy-minimizing field on a Wulff-adapted sampled polygon.
fn crystalline_field(c: &ParametricCurve, a: &Anisotropy) -> Result<CahnHoffmanField> {
    let wulff = a.wulff_shape(4)?;
    let n = c.len();
    let poly = wulff.as_polygon();

    let class: Vec<SampleClass> = c
        .normals()
        .iter()
        .map(|&nu| match wulff.facet_matching_normal(nu, NORMAL_MATCH_TOL) {
            Some(j) => SampleClass::Flat(j),
            None => SampleClass::Corner(poly.support_vertex(nu)),
        })
        .collect();

    // Maximal runs of equal classification, cyclic.
    let mut runs: Vec<(SampleClass, usize, usize)> = Vec::new(); // (class, start, len)
    let mut i = 0;
    while i < n {
        let cls = class[i];
        let mut len = 1;
        while len < n && class[(i + len) % n] == cls {
            len += 1;
        }
        runs.push((cls, i, len));
        i += len;
        if len == n {
            break;
        }
    }
    // Rotate so runs[0] starts a fresh run (handle wrap-around merging).
    if runs.len() >= 2 {
        let (first_cls, _, _) = runs[0];
        let (last_cls, last_start, last_len) = *runs.last().unwrap();
        if first_cls == last_cls && (last_start + last_len) % n == runs[0].1 {
            let merged_len = runs[0].2 + last_len;
            runs[0] = (first_cls, last_start, merged_len);
            runs.pop();
        }
    }

    if !runs.iter().any(|r| matches!(r.0, SampleClass::Flat(_))) {
        return Err(Error::NonAdmissible(
            "no sample direction matches a Wulff facet normal; curve is not an adapted polygon"
                .into(),
        ));
    }
    if runs.len() == 1 {
        return Err(Error::NonAdmissible(
            "curve resolves a single facet only".into(),
        ));
    }
    // A polygon corner is straddled by at most two centered chords; long
    // corner runs mean genuinely curved arcs, which are not adapted.
    for &(cls, _, len) in &runs {
        if matches!(cls, SampleClass::Corner(_)) && len > 3 {
            return Err(Error::NonAdmissible(format!(
                "corner region spans {len} samples; curve is not an adapted polygon"
            )));
        }
    }

    let r = runs.len();
    let mut values = vec![Vec2::ZERO; n];
    let nv = wulff.num_facets();

    // Corner runs pin N to their exposed vertex; flat runs sweep between the
    // vertices pinned by the neighboring corner runs.
    for (ri, &(cls, start, len)) in runs.iter().enumerate() {
        match cls {
            SampleClass::Corner(v) => {
                for k in 0..len {
                    values[(start + k) % n] = wulff.vertices[v];
                }
            }
            SampleClass::Flat(j) => {
                let prev = runs[(ri + r - 1) % r];
                let next = runs[(ri + 1) % r];
                let (SampleClass::Corner(va), SampleClass::Corner(vb)) = (prev.0, next.0) else {
                    return Err(Error::NonAdmissible(format!(
                        "flat facets for Wulff edges meet without a corner between (edge {j})"
                    )));
                };
                let endpoints = [j, (j + 1) % nv];
                if !endpoints.contains(&va) || !endpoints.contains(&vb) {
                    return Err(Error::NonAdmissible(format!(
                        "facet run for Wulff edge {j} is bounded by vertices {va}, {vb} \
                         which are not its endpoints"
                    )));
                }
                let wa = wulff.vertices[va];
                let wb = wulff.vertices[vb];
                // Anchor the sweep at the corner samples adjacent to the run.
                let ia = (prev.1 + prev.2 - 1) % n;
                let ib = next.1;
                let s = c.arc_length();
                let total = c.total_length();
                let sa = s[ia];
                let span = {
                    let mut d = s[ib] - sa;
                    if d <= 0.0 {
                        d += total;
                    }
                    d
                };
                if va == vb {
                    for k in 0..len {
                        values[(start + k) % n] = wa;
                    }
                } else {
                    for k in 0..len {
                        let idx = (start + k) % n;
                        let mut ds = s[idx] - sa;
                        if ds < 0.0 {
                            ds += total;
                        }
                        values[idx] = wa + (wb - wa) * (ds / span);
                    }
                }
            }
        }
    }

    let lipschitz_bound = lipschitz_of(&values, c.edge_lengths());
    Ok(CahnHoffmanField {
        values,
        lipschitz_bound,
    })
}

/// Per-vertex Cahn-Hoffman values of a crystal curve: at the corner joining
/// facets with fan normals j → j′ the value is the shared Wulff vertex.
pub fn cahn_hoffman_field_crystal(
    c: &CrystalCurve,
    wulff: &WulffPolygon,
) -> Result<CahnHoffmanField> {
    let m = c.num_facets();
    let nv = wulff.num_facets();
    let mut values = Vec::with_capacity(m);
    for i in 0..m {
        let prev = c.facets[(i + m - 1) % m].normal_index;
        let cur = c.facets[i].normal_index;
        let v = if (prev + 1) % nv == cur {
            // convex turn: edges prev, prev+1 share vertex prev+1
            (prev + 1) % nv
        } else if (cur + 1) % nv == prev {
            // concave turn: edges prev, prev−1 share vertex prev
            prev
        } else {
            // Non-adjacent transition (post-event state): expose the bisector.
            let bis = (wulff.facet_normals[prev] + wulff.facet_normals[cur]).normalized();
            wulff.as_polygon().support_vertex(bis)
        };
        values.push(wulff.vertices[v]);
    }
    let lengths: Vec<f64> = c.facets.iter().map(|f| f.length).collect();
    let lipschitz_bound = lipschitz_of(&values, &lengths);
    Ok(CahnHoffmanField {
        values,
        lipschitz_bound,
    })
}

/// Offset u_i + d·n_i along a Cahn-Hoffman field. Valid for |d| strictly
/// inside the admissible radius 1/‖n_s‖_∞.
pub fn wulff_offset(
    c: &ParametricCurve,
    field: &CahnHoffmanField,
    d: f64,
) -> Result<ParametricCurve> {
    let radius = field.offset_radius();
    if d.abs() >= radius {
        return Err(Error::OffsetRadiusExceeded { d, radius });
    }
    let pts = c
        .points()
        .iter()
        .zip(&field.values)
        .map(|(&u, &n)| u + n * d)
        .collect();
    ParametricCurve::from_points(pts)
}

#[derive(Debug, Clone, Copy)]
pub struct RwProbe {
    pub index: usize,
    /// Worst penetration depth of the translate centered at u − R·N.
    pub depth_minus: f64,
    /// Worst penetration depth of the translate centered at u + R·N.
    pub depth_plus: f64,
}

#[derive(Debug, Clone)]
pub struct RwCertificate {
    pub radius: f64,
    pub probes: Vec<RwProbe>,
}

impl RwCertificate {
    pub fn max_depth(&self) -> f64 {
        self.probes
            .iter()
            .map(|p| p.depth_minus.max(p.depth_plus))
            .fold(0.0, f64::max)
    }

    pub fn max_depth_minus(&self) -> f64 {
        self.probes.iter().map(|p| p.depth_minus).fold(0.0, f64::max)
    }

    pub fn max_depth_plus(&self) -> f64 {
        self.probes.iter().map(|p| p.depth_plus).fold(0.0, f64::max)
    }

    pub fn all_pass(&self, tol: f64) -> bool {
        self.max_depth() <= tol
    }
}

/// Check the local RW_φ condition: at `probes` evenly spaced samples, place
/// the tangent translate R·W_φ on each side (centers u ∓ R·N) and verify no
/// curve point of the local graph window penetrates the open translate.
/// The window is the maximal arc where ν stays within π/3 of the probe
/// normal. Report-only: returns per-probe worst penetration depths.
pub fn check_local_rw(
    c: &ParametricCurve,
    a: &Anisotropy,
    radius: f64,
    probes: usize,
) -> Result<RwCertificate> {
    let field = cahn_hoffman_field(c, a)?;
    let n = c.len();
    let probes = probes.min(n).max(1);
    let cos_window = (std::f64::consts::PI / 3.0).cos();

    let results = parallel::map_collect(probes, |p| {
        let i = p * n / probes;
        let nu_i = c.normals()[i];
        // Local graph window around i.
        let mut lo = i as isize;
        let mut hi = i as isize;
        let half = (n / 2) as isize;
        while (i as isize - lo) < half {
            let prev = (lo - 1).rem_euclid(n as isize) as usize;
            if c.normals()[prev].dot(nu_i) < cos_window {
                break;
            }
            lo -= 1;
        }
        while (hi - i as isize) < half {
            let next = (hi + 1).rem_euclid(n as isize) as usize;
            if c.normals()[next].dot(nu_i) < cos_window {
                break;
            }
            hi += 1;
        }

        let mut depth = [0.0f64; 2];
        for (side_idx, side) in [-1.0, 1.0].into_iter().enumerate() {
            let center = c.point(i) + field.values[i] * (side * radius);
            let mut worst: f64 = 0.0;
            for k in lo..=hi {
                let ku = k.rem_euclid(n as isize) as usize;
                let g = a.eval_norm(c.point(ku) - center);
                worst = worst.max(radius - g);
            }
            depth[side_idx] = worst;
        }
        RwProbe {
            index: i,
            depth_minus: depth[0],
            depth_plus: depth[1],
        }
    });

    Ok(RwCertificate {
        radius,
        probes: results,
    })
}

/// γ-distance from `p` to a closed polyline: min over segments of the gauge
/// γ(q − p), each segment minimized by ternary search (the gauge is convex
/// along a segment).
pub fn gauge_distance_to_polyline(a: &Anisotropy, p: Vec2, poly: &[Vec2]) -> f64 {
    let m = poly.len();
    let mut best = f64::INFINITY;
    for j in 0..m {
        let q0 = poly[j];
        let q1 = poly[(j + 1) % m];
        let f = |t: f64| a.eval_norm(q0 + (q1 - q0) * t - p);
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        for _ in 0..60 {
            let m1 = lo + (hi - lo) / 3.0;
            let m2 = hi - (hi - lo) / 3.0;
            if f(m1) <= f(m2) {
                hi = m2;
            } else {
                lo = m1;
            }
        }
        best = best.min(f(0.5 * (lo + hi))).min(f(0.0)).min(f(1.0));
    }
    best
}
