//! Brute-force pricing `π(g) = ∫ g dF` for arbitrary payoff evaluators.
//!
//! Deliberately independent of the library's integration path: the density
//! part is integrated in price space with composite Gauss–Legendre panels
//! refined by doubling, never through the Gauss–Kronrod kernel or the
//! closed-form option values.

use crate::error::{Error, Result};
use crate::measure::{Density, Measure};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// Density mass allowed to fall outside the integration window.
    pub tail_budget: f64,
    /// Maximum number of panels per cell between breakpoints.
    pub max_panels: usize,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            abs_tol: 1e-13,
            rel_tol: 1e-11,
            tail_budget: 1e-16,
            max_panels: 1 << 14,
        }
    }
}

impl OracleConfig {
    pub fn validate(&self) -> Result<()> {
        if self.abs_tol > 0.0 && self.rel_tol > 0.0 && self.tail_budget > 0.0 && self.max_panels > 0 {
            Ok(())
        } else {
            Err(Error::InvalidArgument("oracle tolerances must be positive".into()))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OraclePrice {
    pub price: f64,
    pub error_estimate: f64,
}

const GL_ORDER: usize = 12;

/// Gauss–Legendre nodes and weights on [-1, 1] by Newton iteration on P_n.
fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for j in 2..=n {
                let j = j as f64;
                let p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
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
        nodes[i] = x;
        weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}

fn composite<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, panels: usize, rule: &(Vec<f64>, Vec<f64>)) -> f64 {
    let h = (b - a) / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let lo = a + p as f64 * h;
        let mid = lo + 0.5 * h;
        let mut s = 0.0;
        for (x, w) in rule.0.iter().zip(&rule.1) {
            s += w * f(mid + 0.5 * h * x);
        }
        total += 0.5 * h * s;
    }
    total
}

/// Window `[lo, hi]` outside which the density carries at most
/// `budget` of mass, found by bisection on its distribution function.
fn window(d: &Density, budget: f64) -> (f64, f64) {
    match d {
        Density::Table(t) => (t.lo(), t.hi()),
        Density::Lognormal(_) => {
            let total = d.total_mass();
            let mut hi = 1.0;
            while total - d.cdf(hi) > budget {
                hi *= 2.0;
            }
            let mut lo = 1.0;
            while d.cdf(lo) > budget && lo > 1e-300 {
                lo *= 0.5;
            }
            // room for payoffs growing polynomially in the upper tail
            (lo, 2.0 * hi)
        }
    }
}

/// Prices `g` under `measure`. `breakpoints` are the known kinks and jumps
/// of `g`; no quadrature panel straddles one.
pub fn oracle_price<G: Fn(f64) -> f64>(
    measure: &Measure,
    g: G,
    breakpoints: &[f64],
    cfg: &OracleConfig,
) -> Result<OraclePrice> {
    cfg.validate()?;
    let mut price = 0.0;
    for a in measure.atoms() {
        price += a.w * g(a.x);
    }
    let mut error_estimate = 0.0;
    if let Some(d) = measure.density() {
        let rule = gauss_legendre(GL_ORDER);
        let (lo, hi) = window(d, cfg.tail_budget);
        let mut edges: Vec<f64> = breakpoints
            .iter()
            .copied()
            .chain(measure.breakpoints())
            .filter(|&x| x > lo && x < hi)
            .collect();
        edges.push(lo);
        edges.push(hi);
        edges.sort_by(|a, b| a.partial_cmp(b).unwrap());
        edges.dedup();
        let integrand = |x: f64| g(x) * d.pdf(x);
        for w in edges.windows(2) {
            let (a, b) = (w[0], w[1]);
            let mut panels = 1;
            let mut prev = composite(&integrand, a, b, panels, &rule);
            loop {
                panels *= 2;
                let next = composite(&integrand, a, b, panels, &rule);
                let diff = (next - prev).abs();
                if diff <= cfg.abs_tol.max(cfg.rel_tol * next.abs()) {
                    price += next;
                    error_estimate += diff;
                    break;
                }
                if panels >= cfg.max_panels {
                    return Err(Error::Quadrature { a, b, error: diff });
                }
                prev = next;
            }
        }
        error_estimate += cfg.tail_budget;
    }
    Ok(OraclePrice {
        price,
        error_estimate,
    })
}
