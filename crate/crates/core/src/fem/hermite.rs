//! Cubic Hermite shape functions on a 1D element.

/// Values, first and second derivatives of the four cubic Hermite basis
/// functions (value/slope at the left end, value/slope at the right end) on
/// an element of length `h`, at local coordinate `s` in `[0, 1]`.
pub fn hermite_basis(s: f64, h: f64) -> ([f64; 4], [f64; 4], [f64; 4]) {
    let (s2, s3) = (s * s, s * s * s);
    let v = [1.0 - 3.0 * s2 + 2.0 * s3, h * (s - 2.0 * s2 + s3), 3.0 * s2 - 2.0 * s3, h * (s3 - s2)];
    let d = [(-6.0 * s + 6.0 * s2) / h, 1.0 - 4.0 * s + 3.0 * s2, (6.0 * s - 6.0 * s2) / h, 3.0 * s2 - 2.0 * s];
    let dd = [(-6.0 + 12.0 * s) / (h * h), (-4.0 + 6.0 * s) / h, (6.0 - 12.0 * s) / (h * h), (6.0 * s - 2.0) / h];
    (v, d, dd)
}

/// Linear Lagrange basis on `[0, 1]` and its derivatives on an element of length `h`.
pub fn linear_basis(s: f64, h: f64) -> ([f64; 2], [f64; 2]) {
    ([1.0 - s, s], [-1.0 / h, 1.0 / h])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproduces_cubics() {
        // f(x) = x^3 on [1, 3].
        let (x0, h) = (1.0, 2.0);
        let dofs = [1.0, 3.0, 27.0, 27.0];
        for s in [0.0, 0.3, 0.5, 0.9, 1.0] {
            let x: f64 = x0 + s * h;
            let (v, d, dd) = hermite_basis(s, h);
            let f: f64 = (0..4).map(|k| v[k] * dofs[k]).sum();
            let df: f64 = (0..4).map(|k| d[k] * dofs[k]).sum();
            let ddf: f64 = (0..4).map(|k| dd[k] * dofs[k]).sum();
            assert!((f - x.powi(3)).abs() < 1e-12);
            assert!((df - 3.0 * x * x).abs() < 1e-12);
            assert!((ddf - 6.0 * x).abs() < 1e-12);
        }
    }
}
