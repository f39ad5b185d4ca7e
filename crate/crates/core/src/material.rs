//! Linear elasticity tensors in two dimensions.

use crate::error::MaterialError;
use serde::{Deserialize, Serialize};

/// Fourth-order elasticity tensor `A_ijkl` for `n = 2`.
///
/// Internally stored as a 3x3 Voigt matrix acting on engineering strains
/// `[e11, e22, 2 e12]`, which is equivalent to the full tensor when the
/// minor symmetries hold.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ElasticityTensor {
    voigt: [[f64; 3]; 3],
}

fn voigt_index(i: usize, j: usize) -> usize {
    match (i, j) {
        (0, 0) => 0,
        (1, 1) => 1,
        _ => 2,
    }
}

impl ElasticityTensor {
    /// Isotropic tensor with Lamé parameters.
    pub fn isotropic(lambda: f64, mu: f64) -> Result<Self, MaterialError> {
        Self::from_voigt([[lambda + 2.0 * mu, lambda, 0.0], [lambda, lambda + 2.0 * mu, 0.0], [0.0, 0.0, mu]])
    }

    /// Tensor from its Voigt matrix (engineering shear convention). Fails if
    /// the matrix is not symmetric or not positive definite.
    pub fn from_voigt(voigt: [[f64; 3]; 3]) -> Result<Self, MaterialError> {
        let t = Self { voigt };
        let defect = t.symmetry_defect();
        if defect > 1e-12 {
            return Err(MaterialError::NotSymmetric(defect));
        }
        let c0 = t.coercivity();
        if !(c0 > 0.0) {
            return Err(MaterialError::NotCoercive(c0));
        }
        Ok(t)
    }

    /// The identity on symmetric matrices (`A e = e`).
    pub fn identity() -> Self {
        Self { voigt: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 0.5]] }
    }

    pub fn voigt(&self) -> &[[f64; 3]; 3] {
        &self.voigt
    }

    /// Component `A_ijkl` (indices in `0..2`).
    pub fn component(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        self.voigt[voigt_index(i, j)][voigt_index(k, l)]
    }

    /// Largest violation of the minor and major symmetries, relative to the
    /// largest entry.
    pub fn symmetry_defect(&self) -> f64 {
        let scale = self.voigt.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
        let mut d = 0.0f64;
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    for l in 0..2 {
                        let a = self.component(i, j, k, l);
                        d = d.max((a - self.component(j, i, k, l)).abs());
                        d = d.max((a - self.component(i, j, l, k)).abs());
                        d = d.max((a - self.component(k, l, i, j)).abs());
                    }
                }
            }
        }
        d / scale
    }

    /// Smallest eigenvalue of the tensor as a quadratic form on symmetric
    /// matrices with the Frobenius inner product.
    pub fn coercivity(&self) -> f64 {
        let s = [1.0, 1.0, std::f64::consts::SQRT_2];
        let m = nalgebra::Matrix3::from_fn(|r, c| 0.5 * (self.voigt[r][c] + self.voigt[c][r]) * s[r] * s[c]);
        m.symmetric_eigenvalues().min()
    }

    /// Stress `A e` in Voigt form for an engineering strain vector.
    pub fn stress(&self, e: [f64; 3]) -> [f64; 3] {
        let c = &self.voigt;
        [
            c[0][0] * e[0] + c[0][1] * e[1] + c[0][2] * e[2],
            c[1][0] * e[0] + c[1][1] * e[1] + c[1][2] * e[2],
            c[2][0] * e[0] + c[2][1] * e[1] + c[2][2] * e[2],
        ]
    }

    /// Energy pairing `A e : f` of two engineering strain vectors.
    pub fn pair(&self, e: [f64; 3], f: [f64; 3]) -> f64 {
        let s = self.stress(e);
        s[0] * f[0] + s[1] * f[1] + s[2] * f[2]
    }

    /// Tensor scaled by `s > 0`.
    pub fn scaled(&self, s: f64) -> Self {
        let mut v = self.voigt;
        v.iter_mut().flatten().for_each(|x| *x *= s);
        Self { voigt: v }
    }
}

/// Engineering strain vector of the unit strain `M_ij = (e_i e_j^T + e_j e_i^T)/2`.
pub fn unit_strain(i: usize, j: usize) -> [f64; 3] {
    match (i, j) {
        (0, 0) => [1.0, 0.0, 0.0],
        (1, 1) => [0.0, 1.0, 0.0],
        _ => [0.0, 0.0, 1.0],
    }
}
