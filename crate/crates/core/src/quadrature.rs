//! Small quadrature helpers shared by the grid and contour code.

use std::f64::consts::PI;
use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector};

/// Gauss–Legendre nodes and weights on [-1, 1].
pub fn gauss_legendre(order: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(order >= 1);
    let n = order;
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..(n + 1) / 2 {
        // Tricomi initial guess, refined by Newton on P_n.
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let n = n as f64;
    let dp = n * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Finite-difference weights (Fornberg) for derivatives 0..=max_order at `x`.
///
/// Returns `w[m][j]`, the weight of `nodes[j]` in the m-th derivative.
pub fn fornberg_weights(x: f64, nodes: &[f64], max_order: usize) -> Vec<Vec<f64>> {
    let n = nodes.len();
    let mut c = vec![vec![0.0; n]; max_order + 1];
    c[0][0] = 1.0;
    let mut c1 = 1.0;
    let mut c4 = nodes[0] - x;
    for i in 1..n {
        let mn = i.min(max_order);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = nodes[i] - x;
        for j in 0..i {
            let c3 = nodes[i] - nodes[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c
}

/// Weights integrating the Lagrange interpolant through `nodes` over [a, b].
pub fn interpolant_integral_weights(nodes: &[f64], a: f64, b: f64) -> Vec<f64> {
    let (gx, gw) = gauss_legendre(nodes.len().max(2));
    let half = 0.5 * (b - a);
    let mid = 0.5 * (b + a);
    let mut out = vec![0.0; nodes.len()];
    for (x, w) in gx.iter().zip(&gw) {
        let s = mid + half * x;
        let basis = fornberg_weights(s, nodes, 0);
        for (o, l) in out.iter_mut().zip(&basis[0]) {
            *o += half * w * l;
        }
    }
    out
}

/// Endpoint corrections (in units of the spacing) that lift the trapezoid rule
/// to sixth order at a boundary node: add `h * c[j]` to the weight of the j-th
/// node counted inward from the boundary.
pub fn gregory_corrections() -> &'static [f64; 6] {
    static CORR: OnceLock<[f64; 6]> = OnceLock::new();
    CORR.get_or_init(|| {
        // Euler–Maclaurin lower-end terms: h²/12 f' − h⁴/720 f''' + h⁶/30240 f⁽⁵⁾.
        let rhs = [0.0, 1.0 / 12.0, 0.0, -1.0 / 120.0, 0.0, 1.0 / 252.0];
        let m = DMatrix::from_fn(6, 6, |p, j| (j as f64).powi(p as i32));
        let sol = m
            .lu()
            .solve(&DVector::from_row_slice(&rhs))
            .expect("Vandermonde system is regular");
        let mut out = [0.0; 6];
        out.copy_from_slice(sol.as_slice());
        out
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(8);
        let total: f64 = w.iter().sum();
        assert!((total - 2.0).abs() < 1e-14);
        let p14: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(14)).sum();
        assert!((p14 - 2.0 / 15.0).abs() < 1e-14);
    }

    #[test]
    fn fornberg_derivatives_of_cubic() {
        let nodes = [0.0, 0.5, 1.0, 1.5, 2.0];
        let f = |x: f64| x * x * x - 2.0 * x;
        let w = fornberg_weights(0.7, &nodes, 2);
        let eval = |m: usize| -> f64 { w[m].iter().zip(&nodes).map(|(w, x)| w * f(*x)).sum() };
        assert!((eval(0) - f(0.7)).abs() < 1e-13);
        assert!((eval(1) - (3.0 * 0.49 - 2.0)).abs() < 1e-12);
        assert!((eval(2) - 4.2).abs() < 1e-11);
    }

    #[test]
    fn corrected_trapezoid_is_exact_for_quintics() {
        let c = gregory_corrections();
        let n = 40;
        let h = 0.25;
        let mut w = vec![h; n];
        w[0] = 0.5 * h;
        w[n - 1] = 0.5 * h;
        for j in 0..6 {
            w[j] += h * c[j];
            w[n - 1 - j] += h * c[j];
        }
        let len = h * (n - 1) as f64;
        for p in 0..=5 {
            let q: f64 = (0..n).map(|k| w[k] * (k as f64 * h).powi(p)).sum();
            let exact = len.powi(p + 1) / (p + 1) as f64;
            assert!((q - exact).abs() < 1e-10 * exact, "degree {p}: {q} vs {exact}");
        }
        assert!(c.iter().sum::<f64>().abs() < 1e-14);
    }
}
