//! One-dimensional quadrature rules.

use crate::{Error, Result};

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
#[derive(Clone, Debug)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("Gauss-Legendre needs n_nodes >= 1".into()));
        }
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                // Legendre recurrence for P_n(x) and its derivative.
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Ok(Self { nodes, weights })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Maps the rule onto `[a, b]`, returning `(x_i, w_i)` pairs.
    pub fn on_interval(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let (half, mid) = (0.5 * (b - a), 0.5 * (a + b));
        self.nodes.iter().zip(&self.weights).map(move |(x, w)| (mid + half * x, half * w))
    }

    pub fn integrate(&self, mut f: impl FnMut(f64) -> f64, a: f64, b: f64) -> f64 {
        self.on_interval(a, b).map(|(x, w)| w * f(x)).sum()
    }

    /// Composite rule over `panels` equal sub-intervals.
    pub fn integrate_composite(
        &self,
        mut f: impl FnMut(f64) -> f64,
        a: f64,
        b: f64,
        panels: usize,
    ) -> f64 {
        let panels = panels.max(1);
        let h = (b - a) / panels as f64;
        (0..panels)
            .map(|k| {
                let lo = a + k as f64 * h;
                self.integrate(&mut f, lo, lo + h)
            })
            .sum()
    }
}

/// `n_nodes`-point Gauss–Legendre estimate of `∫_a^b f`.
pub fn gauss_legendre(f: impl FnMut(f64) -> f64, a: f64, b: f64, n_nodes: usize) -> Result<f64> {
    if !(b >= a) {
        return Err(Error::InvalidParameter(format!("quadrature bounds reversed: [{a}, {b}]")));
    }
    Ok(GaussLegendre::new(n_nodes)?.integrate(f, a, b))
}

/// Composite Simpson rule on `n_samples` equally spaced points (odd, ≥ 3).
pub fn simpson(mut f: impl FnMut(f64) -> f64, a: f64, b: f64, n_samples: usize) -> Result<f64> {
    if n_samples < 3 || n_samples % 2 == 0 {
        return Err(Error::InvalidParameter(format!(
            "Simpson needs an odd sample count >= 3 (got {n_samples})"
        )));
    }
    let h = (b - a) / (n_samples - 1) as f64;
    let mut sum = f(a) + f(b);
    for i in 1..n_samples - 1 {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        sum += w * f(a + i as f64 * h);
    }
    Ok(sum * h / 3.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    #[test]
    fn constant_on_unit_interval() {
        assert!((gauss_legendre(|_| 1.0, 0.0, 1.0, 1).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn cubic_exact_with_two_nodes() {
        let v = gauss_legendre(|x| x * x * x, 0.0, 1.0, 2).unwrap();
        assert!((v - 0.25).abs() < 1e-15);
    }

    #[test]
    fn sine_over_half_period() {
        let v = gauss_legendre(f64::sin, 0.0, PI, 21).unwrap();
        assert!((v - 2.0).abs() < 1e-12);
    }

    #[test]
    fn weights_sum_to_two() {
        for n in [1, 2, 5, 21, 64] {
            let g = GaussLegendre::new(n).unwrap();
            assert!((g.weights().iter().sum::<f64>() - 2.0).abs() < 1e-13, "n = {n}");
            assert!(g.nodes().windows(2).all(|w| w[0] < w[1]));
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(gauss_legendre(|x| x, 0.0, 1.0, 0).is_err());
        assert!(gauss_legendre(|x| x, 1.0, 0.0, 3).is_err());
        assert!(simpson(|x| x, 0.0, 1.0, 4).is_err());
    }

    #[test]
    fn simpson_exact_on_cubics() {
        let v = simpson(|x| 4.0 * x * x * x - x, 0.0, 2.0, 3).unwrap();
        assert!((v - 14.0).abs() < 1e-13);
    }

    proptest! {
        #[test]
        fn exact_for_degree_below_2n(n in 1usize..12, seed in prop::collection::vec(-2.0f64..2.0, 24), a in -3.0f64..0.0, len in 0.1f64..4.0) {
            let b = a + len;
            let deg = 2 * n - 1;
            let coef = &seed[..=deg];
            let poly = |x: f64| coef.iter().rev().fold(0.0, |acc, c| acc * x + c);
            let anti = |x: f64| coef.iter().enumerate().rev()
                .fold(0.0, |acc, (k, c)| acc + c * x.powi(k as i32 + 1) / (k as f64 + 1.0));
            let exact = anti(b) - anti(a);
            let got = gauss_legendre(poly, a, b, n).unwrap();
            prop_assert!((got - exact).abs() <= 1e-10 * exact.abs().max(1.0), "{got} vs {exact}");
        }
    }
}
