//! Gauss–Legendre quadrature with adaptive bisection.

use std::f64::consts::PI;

/// An `n`-point Gauss–Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "a quadrature rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            // Tricomi initial guess, then Newton on P_n.
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
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
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&x, &w)| (mid + half * x, half * w))
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
        self.mapped(a, b).map(|(x, w)| w * f(x)).sum()
    }

    /// Adaptive bisection until the one-panel and two-panel estimates agree
    /// to `rel_tol` (relative to the running total, with an absolute floor).
    pub fn adaptive(&self, f: &impl Fn(f64) -> f64, a: f64, b: f64, rel_tol: f64) -> f64 {
        let whole = self.integrate(f, a, b);
        self.refine(f, a, b, whole, rel_tol, whole.abs().max(1e-300), 0)
    }

    #[allow(clippy::too_many_arguments)]
    fn refine(
        &self,
        f: &impl Fn(f64) -> f64,
        a: f64,
        b: f64,
        whole: f64,
        rel_tol: f64,
        scale: f64,
        depth: usize,
    ) -> f64 {
        let mid = 0.5 * (a + b);
        let left = self.integrate(f, a, mid);
        let right = self.integrate(f, mid, b);
        let both = left + right;
        if depth >= 40 || (both - whole).abs() <= rel_tol * scale.max(both.abs()) {
            return both;
        }
        self.refine(f, a, mid, left, rel_tol, scale, depth + 1)
            + self.refine(f, mid, b, right, rel_tol, scale, depth + 1)
    }
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}
