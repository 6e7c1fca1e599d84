//! Log-return coordinates: Hermite-function approximations of a return
//! density, θ-spread payoffs, and recovery of the put curve through the
//! double limit `k₁ → 0` after `N → ∞`.
//!
//! Prices relate to returns through `S = s0·exp(σx + m)`; the defaults are
//! `s0 = 1, σ = 1, m = 0`.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::curves::{PriceCurve, Role};
use crate::error::{Error, Result};
use crate::quad;

/// Highest Hermite order evaluated by recurrence.
pub const MAX_ORDER: usize = 64;

/// Panel width for the composite rules over the return axis.
const PANEL: f64 = 0.25;
const MIN_PANELS: f64 = 32.0;

/// Hermite functions ψ₀..ψ_n at `x`, orthonormal in L²(ℝ).
pub fn hermite_functions(n: usize, x: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(n + 1);
    let p0 = std::f64::consts::PI.powf(-0.25) * (-0.5 * x * x).exp();
    out.push(p0);
    if n == 0 {
        return out;
    }
    out.push(std::f64::consts::SQRT_2 * x * p0);
    for j in 1..n {
        let j = j as f64;
        let next = (2.0 / (j + 1.0)).sqrt() * x * out[j as usize] - (j / (j + 1.0)).sqrt() * out[j as usize - 1];
        out.push(next);
    }
    out
}

/// A density on the return axis.
pub trait ReturnDensity: Send + Sync {
    fn pdf(&self, x: f64) -> f64;
    /// Interval outside which the density is negligible.
    fn window(&self) -> (f64, f64);
    /// Points where the density is not smooth.
    fn kinks(&self) -> Vec<f64> {
        Vec::new()
    }
}

/// Return densities used as ground truth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum ReturnDensitySpec {
    Gaussian { mean: f64, std: f64 },
    GaussianMixture { components: Vec<[f64; 3]> },
    /// Exponential tails on both sides; a slow case for Hermite expansions.
    Laplace { loc: f64, scale: f64 },
}

impl ReturnDensitySpec {
    pub fn standard_gaussian() -> Self {
        ReturnDensitySpec::Gaussian { mean: 0.0, std: 1.0 }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match self {
            ReturnDensitySpec::Gaussian { mean, std } => mean.is_finite() && *std > 0.0,
            ReturnDensitySpec::GaussianMixture { components } => {
                !components.is_empty()
                    && components
                        .iter()
                        .all(|c| c[0] >= 0.0 && c[1].is_finite() && c[2] > 0.0)
            }
            ReturnDensitySpec::Laplace { loc, scale } => loc.is_finite() && *scale > 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Validation(format!("invalid return density {self:?}")))
        }
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let spec: Self = serde_json::from_str(s)?;
        spec.validate()?;
        Ok(spec)
    }
}

fn gaussian(x: f64, mean: f64, std: f64) -> f64 {
    crate::special::norm_pdf((x - mean) / std) / std
}

impl ReturnDensity for ReturnDensitySpec {
    fn pdf(&self, x: f64) -> f64 {
        match self {
            ReturnDensitySpec::Gaussian { mean, std } => gaussian(x, *mean, *std),
            ReturnDensitySpec::GaussianMixture { components } => {
                components.iter().map(|c| c[0] * gaussian(x, c[1], c[2])).sum()
            }
            ReturnDensitySpec::Laplace { loc, scale } => (-(x - loc).abs() / scale).exp() / (2.0 * scale),
        }
    }

    fn window(&self) -> (f64, f64) {
        match self {
            ReturnDensitySpec::Gaussian { mean, std } => (mean - 12.0 * std, mean + 12.0 * std),
            ReturnDensitySpec::GaussianMixture { components } => components.iter().fold(
                (f64::INFINITY, f64::NEG_INFINITY),
                |(lo, hi), c| (lo.min(c[1] - 12.0 * c[2]), hi.max(c[1] + 12.0 * c[2])),
            ),
            ReturnDensitySpec::Laplace { loc, scale } => (loc - 40.0 * scale, loc + 40.0 * scale),
        }
    }

    fn kinks(&self) -> Vec<f64> {
        match self {
            ReturnDensitySpec::Laplace { loc, .. } => vec![*loc],
            _ => Vec::new(),
        }
    }
}

/// Truncated expansion `f_N = Σ c_j ψ_j`. Possibly signed.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityApprox {
    coefficients: Vec<f64>,
}

impl DensityApprox {
    pub fn new(coefficients: Vec<f64>) -> Result<Self> {
        if coefficients.is_empty() || coefficients.len() > MAX_ORDER + 1 {
            return Err(Error::InvalidArgument(format!(
                "expansion order must be in 0..={MAX_ORDER}"
            )));
        }
        if coefficients.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidArgument("coefficients must be finite".into()));
        }
        Ok(Self { coefficients })
    }

    pub fn order(&self) -> usize {
        self.coefficients.len() - 1
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn eval(&self, x: f64) -> f64 {
        hermite_functions(self.order(), x)
            .iter()
            .zip(&self.coefficients)
            .map(|(p, c)| p * c)
            .sum()
    }
}

impl ReturnDensity for DensityApprox {
    fn pdf(&self, x: f64) -> f64 {
        self.eval(x)
    }

    fn window(&self) -> (f64, f64) {
        // ψ_n is negligible beyond |x| ≈ √(2n+1) + 10
        let r = (2.0 * self.order() as f64 + 1.0).sqrt() + 10.0;
        (-r, r)
    }
}

fn panel_edges(lo: f64, hi: f64, extra: &[f64]) -> Vec<f64> {
    let n = ((hi - lo) / PANEL).ceil().max(MIN_PANELS) as usize;
    let mut edges: Vec<f64> = (0..=n).map(|i| lo + (hi - lo) * i as f64 / n as f64).collect();
    edges.extend(extra.iter().copied().filter(|&x| x > lo && x < hi));
    edges.sort_by(|a, b| a.partial_cmp(b).unwrap());
    edges.dedup();
    edges
}

fn composite<F: Fn(f64) -> f64>(f: F, edges: &[f64]) -> f64 {
    edges.windows(2).map(|w| quad::fixed(&f, w[0], w[1])).sum()
}

fn union(a: (f64, f64), b: (f64, f64)) -> (f64, f64) {
    (a.0.min(b.0), a.1.max(b.1))
}

/// Projects `f` onto ψ₀..ψ_N.
pub fn hermite_project(f: &dyn ReturnDensity, order: usize) -> Result<DensityApprox> {
    if order > MAX_ORDER {
        return Err(Error::InvalidArgument(format!("order {order} exceeds {MAX_ORDER}")));
    }
    let probe = DensityApprox::new(vec![0.0; order + 1])?;
    let (lo, hi) = union(f.window(), probe.window());
    let edges = panel_edges(lo, hi, &f.kinks());
    let mut c = vec![0.0; order + 1];
    for w in edges.windows(2) {
        for (j, cj) in c.iter_mut().enumerate() {
            *cj += quad::fixed(|x| f.pdf(x) * hermite_functions(j, x)[j], w[0], w[1]);
        }
    }
    DensityApprox::new(c)
}

/// ‖f − f_N‖₂ by quadrature of the residual.
pub fn l2_error(f: &dyn ReturnDensity, approx: &DensityApprox) -> f64 {
    let (lo, hi) = union(f.window(), approx.window());
    let edges = panel_edges(lo, hi, &f.kinks());
    composite(|x| (f.pdf(x) - approx.eval(x)).powi(2), &edges).sqrt()
}

/// θ(x) = (k2 − eˣ)⁺ − (k2/k1)(k1 − eˣ)⁺
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThetaPayoff {
    pub k1: f64,
    pub k2: f64,
}

impl ThetaPayoff {
    pub fn new(k1: f64, k2: f64) -> Result<Self> {
        if !(k1 > 0.0 && k2 > 0.0 && k1.is_finite() && k2.is_finite()) {
            return Err(Error::InvalidArgument("θ strikes must be positive".into()));
        }
        Ok(Self { k1, k2 })
    }

    pub fn eval(&self, x: f64) -> f64 {
        let s = x.exp();
        (self.k2 - s).max(0.0) - self.k2 / self.k1 * (self.k1 - s).max(0.0)
    }

    /// θ vanishes at and above this point.
    pub fn upper(&self) -> f64 {
        self.k1.max(self.k2).ln()
    }

    /// ‖θ‖₂, which is finite because θ → 0 as x → −∞.
    pub fn l2_norm(&self) -> f64 {
        let hi = self.upper();
        let edges = panel_edges(hi - 60.0, hi, &[self.k1.ln(), self.k2.ln()]);
        composite(|x| self.eval(x).powi(2), &edges).sqrt()
    }
}

fn integrate_up_to(f: &dyn ReturnDensity, g: impl Fn(f64) -> f64, hi: f64, kinks: &[f64]) -> f64 {
    let (lo, top) = f.window();
    let hi = hi.min(top);
    if hi <= lo {
        return 0.0;
    }
    let mut extra = f.kinks();
    extra.extend_from_slice(kinks);
    let edges = panel_edges(lo, hi, &extra);
    composite(|x| g(x) * f.pdf(x), &edges)
}

/// ⟨θ, f⟩
pub fn theta_inner(f: &dyn ReturnDensity, k1: f64, k2: f64) -> Result<f64> {
    let th = ThetaPayoff::new(k1, k2)?;
    Ok(integrate_up_to(f, |x| th.eval(x), th.upper(), &[k1.ln(), k2.ln()]))
}

/// P(k) = ∫ (k − eˣ)⁺ f(x) dx
pub fn put_under_density(f: &dyn ReturnDensity, k: f64) -> f64 {
    if k <= 0.0 {
        return 0.0;
    }
    integrate_up_to(f, |x| (k - x.exp()).max(0.0), k.ln(), &[])
}

/// (k2/k1)·P(k1), the part of ⟨θ, f⟩ that vanishes as k1 → 0.
pub fn correction_term(f: &dyn ReturnDensity, k1: f64, k2: f64) -> f64 {
    k2 / k1 * put_under_density(f, k1)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceTable {
    pub orders: Vec<usize>,
    pub k1: Vec<f64>,
    pub k2: f64,
    /// `values[i][j] = ⟨θ_{k1[j], k2}, f_{orders[i]}⟩`
    pub values: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Recovery {
    pub table: ConvergenceTable,
    /// Highest order, smallest k1: the iterated limit.
    pub iterated: f64,
    /// `values[i][i]`, exploratory.
    pub diagonal: Vec<f64>,
}

/// Tabulates ⟨θ_{k1,k2}, f_n⟩ over the approximations and the decreasing
/// `k1` sequence and reads off P(k2).
pub fn recover_put(approx: &[DensityApprox], k2: f64, k1: &[f64]) -> Result<Recovery> {
    if approx.is_empty() || k1.is_empty() {
        return Err(Error::InvalidArgument("need at least one order and one k1".into()));
    }
    if approx.windows(2).any(|w| w[1].order() <= w[0].order()) {
        return Err(Error::InvalidArgument("orders must be increasing".into()));
    }
    if k1.windows(2).any(|w| w[1] >= w[0]) || k1[k1.len() - 1] <= 0.0 {
        return Err(Error::InvalidArgument("k1 must decrease and stay positive".into()));
    }
    let values = approx
        .iter()
        .map(|a| k1.iter().map(|&k| theta_inner(a, k, k2)).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    let iterated = values[values.len() - 1][k1.len() - 1];
    let diagonal = (0..values.len().min(k1.len())).map(|i| values[i][i]).collect();
    Ok(Recovery {
        table: ConvergenceTable {
            orders: approx.iter().map(DensityApprox::order).collect(),
            k1: k1.to_vec(),
            k2,
            values,
        },
        iterated,
        diagonal,
    })
}

/// `S = s0·exp(σx + m)`
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReturnCoords {
    pub s0: f64,
    pub sigma: f64,
    pub drift: f64,
}

impl Default for ReturnCoords {
    fn default() -> Self {
        Self {
            s0: 1.0,
            sigma: 1.0,
            drift: 0.0,
        }
    }
}

/// Put curve `P(k) = ∫ (k − S(x))⁺ f(x) dx`. Flagged non-coherent since
/// truncated expansions may be signed.
pub fn pushforward_to_price(
    f: Arc<dyn ReturnDensity>,
    strikes: &[f64],
    coords: ReturnCoords,
) -> Result<PriceCurve> {
    if !(coords.s0 > 0.0 && coords.sigma > 0.0 && coords.drift.is_finite()) {
        return Err(Error::InvalidArgument("s0 and σ must be positive".into()));
    }
    let put = {
        let f = Arc::clone(&f);
        move |k: f64| {
            if k <= 0.0 {
                return 0.0;
            }
            let hi = ((k / coords.s0).ln() - coords.drift) / coords.sigma;
            let price = |x: f64| coords.s0 * (coords.sigma * x + coords.drift).exp();
            integrate_up_to(f.as_ref(), |x| (k - price(x)).max(0.0), hi, &[])
        }
    };
    let values = strikes.iter().map(|&k| put(k)).collect();
    let (lo, hi) = f.window();
    let mass = composite(|x| f.pdf(x), &panel_edges(lo, hi, &f.kinks()));
    let mut curve = PriceCurve::from_grid(Role::Put, strikes.to_vec(), values)?
        .with_metadata(Some(mass), None)
        .with_evaluator(Arc::new(put));
    curve.coherent = false;
    Ok(curve)
}
