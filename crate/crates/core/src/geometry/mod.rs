//! Reference cell geometry, periodic cell meshes and the replicated thin layer.

mod layer;
mod mesh;
mod quality;

pub use layer::{LayerGeometry, LayerSides};
pub use mesh::{EdgeTag, Phase, PeriodicMesh, TaggedEdge, TriMesh};
pub use quality::{mesh_quality_report, QualityReport};

use crate::error::GeometryError;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Parametric description of the fluid part of the reference cell
/// `Z = (0,1) x (-1,1)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum FluidRegion {
    /// Open disk strictly inside the cell.
    Cavity { center: [f64; 2], radius: f64 },
    /// Horizontal band `lower < y2 < upper`, periodic across the lateral sides.
    Channel { lower: f64, upper: f64 },
    /// No fluid at all; the whole cell is solid.
    Solid,
}

/// The reference cell with its fluid/solid partition.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellGeometry {
    pub fluid: FluidRegion,
    /// Minimal distance between the fluid region and the top/bottom faces.
    pub clearance: f64,
}

impl CellGeometry {
    /// Disk of the given center and radius.
    pub fn cavity(center: [f64; 2], radius: f64) -> Result<Self, GeometryError> {
        if !(radius > 0.0) || !center.iter().all(|c| c.is_finite()) {
            return Err(GeometryError::DegenerateRegion(format!("cavity radius {radius}")));
        }
        let clearance = 1.0 - center[1].abs() - radius;
        if clearance <= 0.0 {
            return Err(GeometryError::TouchesTopBottom(format!(
                "cavity of radius {radius} at height {} reaches y2 = +-1",
                center[1]
            )));
        }
        if radius >= center[0] || radius >= 1.0 - center[0] {
            return Err(GeometryError::InvalidParameters(format!(
                "cavity of radius {radius} at y1 = {} crosses the lateral boundary",
                center[0]
            )));
        }
        Ok(Self { fluid: FluidRegion::Cavity { center, radius }, clearance })
    }

    /// Band `lower < y2 < upper`.
    pub fn channel(lower: f64, upper: f64) -> Result<Self, GeometryError> {
        if !(lower < upper) {
            return Err(GeometryError::DegenerateRegion(format!("channel bounds {lower} >= {upper}")));
        }
        if lower <= -1.0 || upper >= 1.0 {
            return Err(GeometryError::TouchesTopBottom(format!(
                "channel ({lower}, {upper}) reaches y2 = +-1"
            )));
        }
        Ok(Self { fluid: FluidRegion::Channel { lower, upper }, clearance: (1.0 + lower).min(1.0 - upper) })
    }

    /// Cell without fluid.
    pub fn solid() -> Self {
        Self { fluid: FluidRegion::Solid, clearance: f64::INFINITY }
    }

    /// Builds a geometry from a family tag and a flat parameter list:
    /// `cavity [c1, c2, r]`, `channel [h1, h2]`, `solid []`.
    pub fn build(family: &str, params: &[f64]) -> Result<Self, GeometryError> {
        match (family, params) {
            ("cavity", [c1, c2, r]) => Self::cavity([*c1, *c2], *r),
            ("channel", [h1, h2]) => Self::channel(*h1, *h2),
            ("solid", []) => Ok(Self::solid()),
            _ => Err(GeometryError::InvalidParameters(format!(
                "unknown family `{family}` or wrong parameter count {}",
                params.len()
            ))),
        }
    }

    /// Exact area of the fluid region.
    pub fn fluid_area(&self) -> f64 {
        match self.fluid {
            FluidRegion::Cavity { radius, .. } => PI * radius * radius,
            FluidRegion::Channel { lower, upper } => upper - lower,
            FluidRegion::Solid => 0.0,
        }
    }

    /// Exact first `y2`-moment of the fluid region.
    pub fn fluid_moment(&self) -> f64 {
        match self.fluid {
            FluidRegion::Cavity { center, radius } => center[1] * PI * radius * radius,
            FluidRegion::Channel { lower, upper } => 0.5 * (upper * upper - lower * lower),
            FluidRegion::Solid => 0.0,
        }
    }

    /// Number of connected solid components (periodic in `y1`).
    pub fn solid_components(&self) -> usize {
        match self.fluid {
            FluidRegion::Channel { .. } => 2,
            _ => 1,
        }
    }

    /// Whether the fluid crosses the lateral cell boundary.
    pub fn fluid_percolates(&self) -> bool {
        matches!(self.fluid, FluidRegion::Channel { .. })
    }

    /// Short human-readable description used in provenance records.
    pub fn describe(&self) -> String {
        match self.fluid {
            FluidRegion::Cavity { center, radius } => {
                format!("cavity(c=({}, {}), r={})", center[0], center[1], radius)
            }
            FluidRegion::Channel { lower, upper } => format!("channel({lower}, {upper})"),
            FluidRegion::Solid => "solid".to_string(),
        }
    }

    /// Generates an interface-conforming periodic mesh with target size `h`.
    pub fn mesh(&self, h: f64) -> Result<PeriodicMesh, GeometryError> {
        mesh::generate_periodic_cell_mesh(self, h)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cavity_area() {
        let g = CellGeometry::build("cavity", &[0.5, 0.0, 0.25]).unwrap();
        assert!((g.fluid_area() - PI / 16.0).abs() < 1e-15);
    }

    #[test]
    fn cavity_too_large() {
        let e = CellGeometry::build("cavity", &[0.5, 0.0, 1.2]).unwrap_err();
        assert!(matches!(e, GeometryError::TouchesTopBottom(_)));
    }

    #[test]
    fn degenerate_regions() {
        assert!(matches!(CellGeometry::cavity([0.5, 0.0], 0.0), Err(GeometryError::DegenerateRegion(_))));
        assert!(matches!(CellGeometry::channel(0.3, 0.3), Err(GeometryError::DegenerateRegion(_))));
        assert!(matches!(CellGeometry::channel(-1.0, 0.3), Err(GeometryError::TouchesTopBottom(_))));
    }

    #[test]
    fn channel_moments() {
        let g = CellGeometry::build("channel", &[-0.3, 0.3]).unwrap();
        assert!((g.fluid_area() - 0.6).abs() < 1e-15);
        assert_eq!(g.fluid_moment(), 0.0);
        assert_eq!(g.solid_components(), 2);
    }
}
