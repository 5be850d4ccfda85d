//! JSON documents for solved circle patterns.
//!
//! Floats are written in their shortest round-trip form, which never needs
//! more than 17 significant digits, so parse(emit(doc)) == doc exactly.

use num_complex::Complex64;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graphcore::{CombMap, MapSpec};
use crate::planar_embed::{self, face_weight_from_positions, CenterEmbedding, PlanarSolution};

pub const DOCUMENT_VERSION: u32 = 1;

/// Largest difference allowed between recorded and recomputed residuals.
pub const RESIDUAL_RECOMPUTE_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub generator: String,
    pub seed: Option<u64>,
    pub tolerance: f64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PatternResiduals {
    /// Angle condition defect at the centers.
    pub angle: f64,
    /// Largest relative error of face weights recomputed from centers.
    pub face_weight: f64,
    /// Largest deviation of a vertex from its face circles, relative to the
    /// diameter of the pattern.
    pub circle: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PatternDocument {
    pub version: u32,
    pub metadata: Metadata,
    pub graph: MapSpec,
    pub face_weights: Vec<f64>,
    pub centers: CenterEmbedding,
    pub vertices: Vec<Complex64>,
    /// Radius per face; the outer entry belongs to the circle through the
    /// outer vertices.
    pub radii: Vec<f64>,
    pub outer_center: Option<Complex64>,
    pub residuals: PatternResiduals,
}

impl PatternDocument {
    pub fn from_solution(map: &CombMap, x: &[f64], sol: &PlanarSolution, metadata: Metadata) -> Self {
        let mut doc = PatternDocument {
            version: DOCUMENT_VERSION,
            metadata,
            graph: map.to_spec(),
            face_weights: x.to_vec(),
            centers: sol.centers.clone(),
            vertices: sol.pattern.vertices.clone(),
            radii: sol.pattern.radii.clone(),
            outer_center: sol.pattern.outer_center,
            residuals: PatternResiduals::default(),
        };
        doc.residuals = doc.recompute_residuals(map);
        doc
    }

    pub fn map(&self) -> Result<CombMap> {
        CombMap::from_spec(&self.graph)
    }

    /// Residuals computed from the geometry fields alone.
    pub fn recompute_residuals(&self, map: &CombMap) -> PatternResiduals {
        let angle = planar_embed::angle_condition(map, &self.centers);
        let mut face_weight: f64 = 0.0;
        for f in map.bounded_faces() {
            let (x, _) = face_weight_from_positions(map, f, self.centers.face(f), |h| self.centers.across(map, h));
            let want = self.face_weights[f];
            face_weight = face_weight.max((x - want).abs() / want.abs().max(1e-300));
        }
        let pts: Vec<Complex64> = self.vertices.iter().chain(self.centers.points().iter()).copied().collect();
        let scale = crate::geom::diameter(&pts).max(1e-300);
        let mut circle: f64 = 0.0;
        for f in 0..map.n_faces() {
            let c = if map.is_outer(f) { self.outer_center } else { self.centers.faces[f] };
            let Some(c) = c else { continue };
            for &h in map.face_halves(f) {
                let d = (self.vertices[map.origin(h)] - c).norm();
                circle = circle.max((d - self.radii[f]).abs() / scale);
            }
        }
        PatternResiduals { angle, face_weight, circle }
    }

    /// Checks the field shapes and that the recorded residuals match the
    /// geometry.
    pub fn validate(&self) -> Result<CombMap> {
        let map = self.map()?;
        let shape = |path: &str, got: usize, want: usize| {
            if got == want {
                Ok(())
            } else {
                Err(Error::Schema { path: path.into(), message: format!("expected {want} entries, found {got}") })
            }
        };
        shape("face_weights", self.face_weights.len(), map.n_faces())?;
        shape("centers.faces", self.centers.faces.len(), map.n_faces())?;
        shape("centers.corners", self.centers.corners.len(), map.n_edges())?;
        shape("vertices", self.vertices.len(), map.n_vertices())?;
        shape("radii", self.radii.len(), map.n_faces())?;
        for f in map.bounded_faces() {
            if self.centers.faces[f].is_none() {
                return Err(Error::Schema { path: format!("centers.faces[{f}]"), message: "bounded face without a center".into() });
            }
        }
        for e in 0..map.n_edges() {
            if map.is_boundary_edge(e) && self.centers.corners[e].is_none() {
                return Err(Error::Schema { path: format!("centers.corners[{e}]"), message: "boundary edge without a corner".into() });
            }
        }
        let r = self.recompute_residuals(&map);
        let pairs = [("residuals.angle", r.angle, self.residuals.angle), ("residuals.face_weight", r.face_weight, self.residuals.face_weight), ("residuals.circle", r.circle, self.residuals.circle)];
        for (path, got, want) in pairs {
            if (got - want).abs() > RESIDUAL_RECOMPUTE_TOL {
                return Err(Error::Schema { path: path.into(), message: format!("recorded {want:e}, recomputed {got:e}") });
            }
        }
        Ok(map)
    }

    pub fn to_json(&self) -> String {
        to_json(self)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let value: serde_json::Value = serde_json::from_str(text).map_err(schema_error)?;
        let version = value
            .get("version")
            .ok_or_else(|| Error::Schema { path: "version".into(), message: "missing field `version`".into() })?
            .as_u64()
            .ok_or_else(|| Error::Schema { path: "version".into(), message: "expected an unsigned integer".into() })?;
        if version != DOCUMENT_VERSION as u64 {
            return Err(Error::UnsupportedVersion(version.min(u32::MAX as u64) as u32));
        }
        from_json(text)
    }
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

/// Parses JSON, reporting the failing field with line and column.
pub fn from_json<T: DeserializeOwned>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(schema_error)
}

fn schema_error(e: serde_json::Error) -> Error {
    let msg = e.to_string();
    let path = field_name(&msg).unwrap_or_else(|| format!("line {} column {}", e.line(), e.column()));
    Error::Schema { path, message: msg }
}

/// Field named in a serde message such as "missing field `x` at line 3".
fn field_name(msg: &str) -> Option<String> {
    let start = msg.find('`')? + 1;
    let len = msg[start..].find('`')?;
    Some(msg[start..start + len].to_string())
}
