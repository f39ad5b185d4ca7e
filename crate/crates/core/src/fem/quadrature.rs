//! Quadrature rules on the reference triangle and the unit interval.

/// Six-point rule exact for polynomials of degree 4. Points are barycentric
/// coordinates; weights sum to one (multiply by the triangle area).
pub const TRI6: [([f64; 3], f64); 6] = {
    const A1: f64 = 0.445_948_490_915_964_886_32;
    const B1: f64 = 1.0 - 2.0 * A1;
    const W1: f64 = 0.223_381_589_678_011_465_70;
    const A2: f64 = 0.091_576_213_509_770_743_46;
    const B2: f64 = 1.0 - 2.0 * A2;
    const W2: f64 = 0.109_951_743_655_321_867_64;
    [
        ([A1, A1, B1], W1),
        ([A1, B1, A1], W1),
        ([B1, A1, A1], W1),
        ([A2, A2, B2], W2),
        ([A2, B2, A2], W2),
        ([B2, A2, A2], W2),
    ]
};

/// Three-point Gauss rule on `[0, 1]`, exact for degree 5; weights sum to one.
pub const GAUSS3: [(f64, f64); 3] = {
    const D: f64 = 0.387_298_334_620_741_688_52; // sqrt(3/5)/2
    [(0.5 - D, 5.0 / 18.0), (0.5, 8.0 / 18.0), (0.5 + D, 5.0 / 18.0)]
};

/// Five-point Gauss rule on `[0, 1]`, exact for degree 9; weights sum to one.
pub const GAUSS5: [(f64, f64); 5] = {
    const X1: f64 = 0.269_234_655_052_841_553_22; // 0.5 * 0.538469310105683
    const X2: f64 = 0.453_089_922_969_331_996_37; // 0.5 * 0.906179845938664
    const W0: f64 = 0.568_888_888_888_888_888_89 / 2.0;
    const W1: f64 = 0.478_628_670_499_366_468_04 / 2.0;
    const W2: f64 = 0.236_926_885_056_189_087_51 / 2.0;
    [(0.5 - X2, W2), (0.5 - X1, W1), (0.5, W0), (0.5 + X1, W1), (0.5 + X2, W2)]
};

#[cfg(test)]
mod tests {
    use super::*;

    fn monomial_integral(i: u32, j: u32) -> f64 {
        // Integral of l0^i l1^j over the reference triangle divided by its area.
        let f = |n: u32| (1..=n).map(|k| k as f64).product::<f64>();
        2.0 * f(i) * f(j) / f(i + j + 2)
    }

    #[test]
    fn triangle_rule_is_degree_four() {
        for i in 0..=4 {
            for j in 0..=(4 - i) {
                let q: f64 = TRI6.iter().map(|(l, w)| w * l[0].powi(i as i32) * l[1].powi(j as i32)).sum();
                assert!((q - monomial_integral(i, j)).abs() < 1e-14, "{i} {j}");
            }
        }
    }

    #[test]
    fn gauss_rules() {
        for k in 0..=5 {
            let q: f64 = GAUSS3.iter().map(|(x, w)| w * x.powi(k)).sum();
            assert!((q - 1.0 / (k as f64 + 1.0)).abs() < 1e-15);
        }
        for k in 0..=9 {
            let q: f64 = GAUSS5.iter().map(|(x, w)| w * x.powi(k)).sum();
            assert!((q - 1.0 / (k as f64 + 1.0)).abs() < 1e-14);
        }
    }
}
