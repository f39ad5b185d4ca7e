//! Lagrange P1/P2 shape functions on triangles.
//!
//! Local P2 node order: the three vertices, then the midpoints of edges
//! (0,1), (1,2), (2,0).

/// Affine geometry of one triangle.
#[derive(Clone, Copy, Debug)]
pub struct TriGeom {
    pub p: [[f64; 2]; 3],
    pub area: f64,
    /// Gradients of the barycentric coordinates.
    pub grad_l: [[f64; 2]; 3],
}

impl TriGeom {
    pub fn new(p: [[f64; 2]; 3]) -> Self {
        let det = (p[1][0] - p[0][0]) * (p[2][1] - p[0][1]) - (p[2][0] - p[0][0]) * (p[1][1] - p[0][1]);
        let grad = |a: usize, b: usize| [(p[a][1] - p[b][1]) / det, (p[b][0] - p[a][0]) / det];
        Self { p, area: 0.5 * det, grad_l: [grad(1, 2), grad(2, 0), grad(0, 1)] }
    }

    /// Physical point of barycentric coordinates `l`.
    pub fn point(&self, l: [f64; 3]) -> [f64; 2] {
        [
            l[0] * self.p[0][0] + l[1] * self.p[1][0] + l[2] * self.p[2][0],
            l[0] * self.p[0][1] + l[1] * self.p[1][1] + l[2] * self.p[2][1],
        ]
    }
}

pub const EDGE_LOCAL: [[usize; 2]; 3] = [[0, 1], [1, 2], [2, 0]];

pub fn p2_values(l: [f64; 3]) -> [f64; 6] {
    [
        l[0] * (2.0 * l[0] - 1.0),
        l[1] * (2.0 * l[1] - 1.0),
        l[2] * (2.0 * l[2] - 1.0),
        4.0 * l[0] * l[1],
        4.0 * l[1] * l[2],
        4.0 * l[2] * l[0],
    ]
}

pub fn p2_grads(l: [f64; 3], g: &TriGeom) -> [[f64; 2]; 6] {
    let gl = &g.grad_l;
    let comb = |a: f64, ga: [f64; 2], b: f64, gb: [f64; 2]| [a * ga[0] + b * gb[0], a * ga[1] + b * gb[1]];
    [
        comb(4.0 * l[0] - 1.0, gl[0], 0.0, gl[0]),
        comb(4.0 * l[1] - 1.0, gl[1], 0.0, gl[1]),
        comb(4.0 * l[2] - 1.0, gl[2], 0.0, gl[2]),
        comb(4.0 * l[1], gl[0], 4.0 * l[0], gl[1]),
        comb(4.0 * l[2], gl[1], 4.0 * l[1], gl[2]),
        comb(4.0 * l[0], gl[2], 4.0 * l[2], gl[0]),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partition_of_unity_and_gradients() {
        let g = TriGeom::new([[0.1, 0.2], [1.3, 0.1], [0.4, 0.9]]);
        for l in [[0.2, 0.3, 0.5], [1.0, 0.0, 0.0], [0.1, 0.1, 0.8]] {
            let v = p2_values(l);
            assert!((v.iter().sum::<f64>() - 1.0).abs() < 1e-14);
            let gr = p2_grads(l, &g);
            let s = gr.iter().fold([0.0, 0.0], |a, b| [a[0] + b[0], a[1] + b[1]]);
            assert!(s[0].abs() < 1e-12 && s[1].abs() < 1e-12);
            // Gradient of the interpolant of x equals e1.
            let xs = [g.p[0][0], g.p[1][0], g.p[2][0], 0.5 * (g.p[0][0] + g.p[1][0]), 0.5 * (g.p[1][0] + g.p[2][0]), 0.5 * (g.p[2][0] + g.p[0][0])];
            let dx = (0..6).fold([0.0, 0.0], |a, k| [a[0] + xs[k] * gr[k][0], a[1] + xs[k] * gr[k][1]]);
            assert!((dx[0] - 1.0).abs() < 1e-12 && dx[1].abs() < 1e-12);
        }
    }
}
