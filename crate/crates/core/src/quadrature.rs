//! Gauss–Legendre quadrature on boxes.

use std::f64::consts::PI;

use crate::basis::BoxDomain;

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    /// Roots of P_n by Newton iteration from the Chebyshev-like initial guess,
    /// weights from the derivative at the root.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "a quadrature rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        let nf = n as f64;
        for i in 0..m {
            let mut z = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, z);
                dp = d;
                let dz = p / d;
                z -= dz;
                if dz.abs() < 1e-15 {
                    dp = legendre_with_derivative(n, z).1;
                    break;
                }
            }
            let w = 2.0 / ((1.0 - z * z) * dp * dp);
            nodes[i] = -z;
            nodes[n - 1 - i] = z;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Nodes and weights mapped to `[a, b]`.
    pub fn mapped(&self, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let nodes = self.nodes.iter().map(|t| mid + half * t).collect();
        let weights = self.weights.iter().map(|w| half * w).collect();
        (nodes, weights)
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Calls `visit(x, w)` for every node `x` and weight `w` of the
/// tensor-product Gauss–Legendre rule on `domain`. Boxes of zero measure have
/// no nodes.
pub fn for_each_node<F>(domain: &BoxDomain, points_per_dim: usize, mut visit: F)
where
    F: FnMut(&[f64], f64),
{
    if domain.measure() == 0.0 {
        return;
    }
    let rule = GaussLegendre::new(points_per_dim);
    let axes: Vec<(Vec<f64>, Vec<f64>)> = domain
        .lower()
        .iter()
        .zip(domain.upper())
        .map(|(&a, &b)| rule.mapped(a, b))
        .collect();
    let d = axes.len();
    let mut counter = vec![0usize; d];
    let mut x = vec![0.0; d];
    loop {
        let mut w = 1.0;
        for k in 0..d {
            x[k] = axes[k].0[counter[k]];
            w *= axes[k].1[counter[k]];
        }
        visit(&x, w);

        let mut k = d;
        loop {
            if k == 0 {
                return;
            }
            k -= 1;
            counter[k] += 1;
            if counter[k] < points_per_dim {
                break;
            }
            counter[k] = 0;
        }
    }
}

/// Tensor-product Gauss–Legendre integral of `f` over `domain`.
pub fn integrate_box<F>(domain: &BoxDomain, points_per_dim: usize, mut f: F) -> f64
where
    F: FnMut(&[f64]) -> f64,
{
    let mut total = 0.0;
    for_each_node(domain, points_per_dim, |x, w| total += w * f(x));
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrates_polynomials_exactly() {
        // an n-point rule is exact up to degree 2n - 1
        let rule = GaussLegendre::new(5);
        let integral: f64 = rule
            .nodes
            .iter()
            .zip(&rule.weights)
            .map(|(x, w)| w * x.powi(8))
            .sum();
        assert!((integral - 2.0 / 9.0).abs() < 1e-14);
        assert!((rule.weights.iter().sum::<f64>() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn nodes_are_sorted_and_symmetric() {
        for n in [1, 2, 7, 64, 256] {
            let rule = GaussLegendre::new(n);
            assert!(rule.nodes.windows(2).all(|w| w[0] < w[1]));
            for i in 0..n {
                assert!((rule.nodes[i] + rule.nodes[n - 1 - i]).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn box_integral_of_product() {
        let domain = BoxDomain::new(vec![0.0, -1.0], vec![1.0, 2.0]).unwrap();
        let v = integrate_box(&domain, 8, |x| x[0] * x[1] * x[1]);
        // (1/2) * (8/3 + 1/3)
        assert!((v - 1.5).abs() < 1e-13);
    }

    #[test]
    fn zero_measure_box_is_zero() {
        let domain = BoxDomain::new(vec![0.3], vec![0.3]).unwrap();
        assert_eq!(integrate_box(&domain, 16, |_| 1.0), 0.0);
    }
}
