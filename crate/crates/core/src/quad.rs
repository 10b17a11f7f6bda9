//! Gauss-Legendre rules and a composite integrator with dyadic refinement.

use std::f64::consts::PI;

/// Nodes and weights of the `n`-point Gauss-Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
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
    (nodes, weights)
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Result of a composite quadrature run.
#[derive(Clone, Copy, Debug)]
pub struct Quadrature {
    pub value: f64,
    pub error_estimate: f64,
    pub panels: usize,
}

/// Composite Gauss-Legendre rule with `panels` equal panels on `[a, b]`.
pub fn fixed_gauss<F>(f: F, a: f64, b: f64, order: usize, panels: usize) -> f64
where
    F: Fn(f64) -> f64,
{
    let (x, w) = gauss_legendre(order);
    panel_sum(&f, a, b, &x, &w, panels.max(1))
}

fn panel_sum<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, x: &[f64], w: &[f64], panels: usize) -> f64 {
    let h = (b - a) / panels as f64;
    (0..panels)
        .map(|p| {
            let mid = a + (p as f64 + 0.5) * h;
            x.iter()
                .zip(w)
                .map(|(&xi, &wi)| wi * f(mid + 0.5 * h * xi))
                .sum::<f64>()
                * 0.5
                * h
        })
        .sum()
}

/// Composite Gauss-Legendre rule of the given order on `[a, b]`, doubling the
/// panel count until two successive estimates differ by at most `tol / 2`.
pub fn composite_gauss<F>(
    f: F,
    a: f64,
    b: f64,
    order: usize,
    initial_panels: usize,
    tol: f64,
    max_panels: usize,
) -> Quadrature
where
    F: Fn(f64) -> f64,
{
    let (x, w) = gauss_legendre(order);
    let rule = |panels: usize| panel_sum(&f, a, b, &x, &w, panels);
    let mut panels = initial_panels.max(1);
    let mut prev = rule(panels);
    loop {
        let next_panels = panels * 2;
        let next = rule(next_panels);
        let diff = (next - prev).abs();
        if diff <= 0.5 * tol || next_panels >= max_panels {
            return Quadrature {
                value: next,
                error_estimate: diff,
                panels: next_panels,
            };
        }
        panels = next_panels;
        prev = next;
    }
}
