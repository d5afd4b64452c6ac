//! JSON interchange format for anisotropies.
//!
//! ```json
//! {"kind": "euclidean"}
//! {"kind": "smooth", "sigma_coeffs": [1.0, 0.0, 0.0, 0.0, 0.05]}
//! {"kind": "crystalline", "wulff_vertices": [[1,-1],[1,1],[-1,1],[-1,-1]]}
//! {"kind": "regularized", "epsilon": 0.1, "base": {"kind": "crystalline", ...}}
//! ```

use super::{Anisotropy, AnisotropyKind, Repr};
use crate::error::{Error, Result};
use crate::geometry::Vec2;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AnisotropySpec {
    pub kind: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma_coeffs: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wulff_vertices: Option<Vec<[f64; 2]>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub base: Option<Box<AnisotropySpec>>,
}

impl AnisotropySpec {
    pub fn build(&self) -> Result<Anisotropy> {
        match self.kind.as_str() {
            "euclidean" => Ok(Anisotropy::euclidean()),
            "smooth" => {
                let coeffs = self.sigma_coeffs.clone().ok_or_else(|| {
                    Error::InvalidAnisotropy("smooth kind requires sigma_coeffs".into())
                })?;
                Anisotropy::smooth_from_coeffs(coeffs)
            }
            "crystalline" => {
                let verts = self.wulff_vertices.clone().ok_or_else(|| {
                    Error::InvalidAnisotropy("crystalline kind requires wulff_vertices".into())
                })?;
                Anisotropy::crystalline(verts.iter().map(|v| Vec2::new(v[0], v[1])).collect())
            }
            "regularized" => {
                let eps = self.epsilon.ok_or_else(|| {
                    Error::InvalidAnisotropy("regularized kind requires epsilon".into())
                })?;
                let base = self
                    .base
                    .as_ref()
                    .ok_or_else(|| Error::InvalidAnisotropy("regularized kind requires base".into()))?
                    .build()?;
                base.regularize(eps)
            }
            other => Err(Error::InvalidAnisotropy(format!("unknown kind {other:?}"))),
        }
    }
}

impl Anisotropy {
    pub fn from_json(json: &str) -> Result<Anisotropy> {
        let spec: AnisotropySpec = serde_json::from_str(json)
            .map_err(|e| Error::InvalidAnisotropy(format!("bad anisotropy JSON: {e}")))?;
        spec.build()
    }

    pub fn to_spec(&self) -> AnisotropySpec {
        match &self.repr {
            Repr::Euclidean => AnisotropySpec {
                kind: AnisotropyKind::Euclidean.name().into(),
                sigma_coeffs: None,
                wulff_vertices: None,
                epsilon: None,
                base: None,
            },
            Repr::Smooth { coeffs } => AnisotropySpec {
                kind: AnisotropyKind::SmoothParametric.name().into(),
                sigma_coeffs: Some(coeffs.clone()),
                wulff_vertices: None,
                epsilon: None,
                base: None,
            },
            Repr::Crystalline { wulff } => AnisotropySpec {
                kind: AnisotropyKind::Crystalline.name().into(),
                sigma_coeffs: None,
                wulff_vertices: Some(wulff.vertices.iter().map(|v| [v.x, v.y]).collect()),
                epsilon: None,
                base: None,
            },
            Repr::Regularized { base, epsilon, .. } => AnisotropySpec {
                kind: AnisotropyKind::Regularized.name().into(),
                sigma_coeffs: None,
                wulff_vertices: None,
                epsilon: Some(*epsilon),
                base: Some(Box::new(base.to_spec())),
            },
        }
    }
}
