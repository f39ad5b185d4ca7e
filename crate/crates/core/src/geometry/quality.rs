//! Element quality statistics.

use super::mesh::TriMesh;
use crate::error::GeometryError;
use serde::Serialize;

/// Summary of element shape and size.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QualityReport {
    /// Smallest interior angle in degrees.
    pub min_angle_deg: f64,
    /// Largest circumradius / (2 inradius) ratio (1 for equilateral triangles).
    pub max_aspect_ratio: f64,
    pub h_min: f64,
    pub h_max: f64,
}

pub fn mesh_quality_report(mesh: &TriMesh) -> Result<QualityReport, GeometryError> {
    if mesh.triangles.is_empty() {
        return Err(GeometryError::EmptyMesh);
    }
    let mut rep = QualityReport {
        min_angle_deg: 180.0,
        max_aspect_ratio: 0.0,
        h_min: f64::INFINITY,
        h_max: 0.0,
    };
    for (ti, t) in mesh.triangles.iter().enumerate() {
        let p: Vec<[f64; 2]> = t.iter().map(|&i| mesh.nodes[i]).collect();
        let len = |i: usize, j: usize| ((p[i][0] - p[j][0]).powi(2) + (p[i][1] - p[j][1]).powi(2)).sqrt();
        let (a, b, c) = (len(1, 2), len(2, 0), len(0, 1));
        for (x, y, z) in [(a, b, c), (b, c, a), (c, a, b)] {
            let cos = ((y * y + z * z - x * x) / (2.0 * y * z)).clamp(-1.0, 1.0);
            rep.min_angle_deg = rep.min_angle_deg.min(cos.acos().to_degrees());
        }
        let area = mesh.area(ti);
        let s = 0.5 * (a + b + c);
        let inr = area / s;
        let circ = a * b * c / (4.0 * area);
        rep.max_aspect_ratio = rep.max_aspect_ratio.max(circ / (2.0 * inr));
        rep.h_min = rep.h_min.min(a.min(b).min(c));
        rep.h_max = rep.h_max.max(a.max(b).max(c));
    }
    Ok(rep)
}
