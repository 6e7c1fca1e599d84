//! The pricing measure dF on the price axis and signed curvature measures.
//!
//! A measure is a finite list of atoms plus at most one absolutely
//! continuous part. Integrals over the atomic part are exact finite sums;
//! the density part is integrated either in closed form (lognormal moments
//! and option values), segment-exactly (piecewise-linear tables), or with
//! adaptive Gauss–Kronrod quadrature for arbitrary integrands.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::{self, Estimate, QuadConfig};
use crate::special::{black_call, black_put, norm_cdf, norm_pdf};

/// Standard-normal cut used to truncate the lognormal density. The mass
/// beyond `±LOGNORMAL_Z_CUT` is below 1e-23.
const LOGNORMAL_Z_CUT: f64 = 10.0;

/// Endpoint-aware interval on the real line. The upper end may be `+∞`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
    pub lo_closed: bool,
    pub hi_closed: bool,
}

impl Interval {
    /// `(lo, hi]`, the default convention.
    pub fn left_open(lo: f64, hi: f64) -> Self {
        Self {
            lo,
            hi,
            lo_closed: false,
            hi_closed: hi.is_finite(),
        }
    }

    /// `[lo, hi)`
    pub fn right_open(lo: f64, hi: f64) -> Self {
        Self {
            lo,
            hi,
            lo_closed: true,
            hi_closed: false,
        }
    }

    pub fn open(lo: f64, hi: f64) -> Self {
        Self {
            lo,
            hi,
            lo_closed: false,
            hi_closed: false,
        }
    }

    pub fn closed(lo: f64, hi: f64) -> Self {
        Self {
            lo,
            hi,
            lo_closed: true,
            hi_closed: hi.is_finite(),
        }
    }

    /// `[0, ∞)`
    pub fn half_line() -> Self {
        Self::right_open(0.0, f64::INFINITY)
    }

    pub fn contains(&self, x: f64) -> bool {
        let above = if self.lo_closed { x >= self.lo } else { x > self.lo };
        let below = if self.hi_closed { x <= self.hi } else { x < self.hi };
        above && below
    }

    pub fn is_empty(&self) -> bool {
        self.hi < self.lo || (self.hi == self.lo && !(self.lo_closed && self.hi_closed))
    }
}

impl Default for Interval {
    fn default() -> Self {
        Self::left_open(0.0, f64::INFINITY)
    }
}

/// A point mass. Weights are positive in a [`Measure`] and nonzero (of
/// either sign) in a [`StieltjesMeasure`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub x: f64,
    pub w: f64,
}

/// Lognormal terminal law `S_T = S0 exp(σ√T Z − σ²T/2)` scaled by `mass`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lognormal {
    pub s0: f64,
    pub sigma: f64,
    pub maturity: f64,
    pub mass: f64,
}

impl Lognormal {
    fn total_std(&self) -> f64 {
        self.sigma * self.maturity.sqrt()
    }

    fn z_of(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return f64::NEG_INFINITY;
        }
        if x.is_infinite() {
            return f64::INFINITY;
        }
        let s = self.total_std();
        ((x / self.s0).ln() + 0.5 * s * s) / s
    }

    fn x_of(&self, z: f64) -> f64 {
        let s = self.total_std();
        self.s0 * (s * z - 0.5 * s * s).exp()
    }

    pub fn pdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        let s = self.total_std();
        self.mass * norm_pdf(self.z_of(x)) / (x * s)
    }

    pub fn cdf(&self, x: f64) -> f64 {
        self.mass * norm_cdf(self.z_of(x))
    }

    /// Price range carrying all but a negligible sliver of the mass.
    pub fn effective_support(&self) -> (f64, f64) {
        (self.x_of(-LOGNORMAL_Z_CUT), self.x_of(LOGNORMAL_Z_CUT))
    }
}

/// Piecewise-linear function on `[xs[0], xs[n-1]]`, zero outside.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    xs: Vec<f64>,
    ys: Vec<f64>,
}

impl Table {
    pub fn new(points: &[(f64, f64)]) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::InvalidMeasure("a table needs at least two points".into()));
        }
        let mut xs = Vec::with_capacity(points.len());
        let mut ys = Vec::with_capacity(points.len());
        for &(x, y) in points {
            if !x.is_finite() || !y.is_finite() {
                return Err(Error::InvalidMeasure("table entries must be finite".into()));
            }
            if let Some(&prev) = xs.last() {
                if x <= prev {
                    return Err(Error::InvalidMeasure(format!(
                        "table abscissae must be strictly increasing (at x={x})"
                    )));
                }
            }
            xs.push(x);
            ys.push(y);
        }
        Ok(Self { xs, ys })
    }

    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    pub fn ys(&self) -> &[f64] {
        &self.ys
    }

    pub fn points(&self) -> Vec<(f64, f64)> {
        self.xs.iter().copied().zip(self.ys.iter().copied()).collect()
    }

    pub fn lo(&self) -> f64 {
        self.xs[0]
    }

    pub fn hi(&self) -> f64 {
        *self.xs.last().unwrap()
    }

    pub fn eval(&self, x: f64) -> f64 {
        if x < self.lo() || x > self.hi() {
            return 0.0;
        }
        let i = match self.xs.partition_point(|&p| p <= x) {
            0 => 0,
            n if n >= self.xs.len() => self.xs.len() - 2,
            n => n - 1,
        };
        let (x0, x1) = (self.xs[i], self.xs[i + 1]);
        let t = (x - x0) / (x1 - x0);
        self.ys[i] + t * (self.ys[i + 1] - self.ys[i])
    }

    /// ∫ g(x) y(x) dx over `[a, b] ∩ support`, exact when `g` is a
    /// polynomial of degree ≤ 20 on each segment not split by `kinks`.
    fn integrate_exact<G: Fn(f64) -> f64>(&self, g: G, a: f64, b: f64, kinks: &[f64]) -> f64 {
        let lo = a.max(self.lo());
        let hi = b.min(self.hi());
        if hi <= lo {
            return 0.0;
        }
        let mut edges: Vec<f64> = self
            .xs
            .iter()
            .chain(kinks.iter())
            .copied()
            .filter(|&x| x > lo && x < hi)
            .collect();
        edges.push(lo);
        edges.push(hi);
        edges.sort_by(|p, q| p.partial_cmp(q).unwrap());
        edges.dedup();
        edges
            .windows(2)
            .map(|w| quad::fixed(|x| g(x) * self.eval(x), w[0], w[1]))
            .sum()
    }

    fn mass_between(&self, a: f64, b: f64) -> f64 {
        self.integrate_exact(|_| 1.0, a, b, &[])
    }

    fn positive_part(&self) -> Table {
        self.clip(|y| y.max(0.0))
    }

    fn negative_part(&self) -> Table {
        self.clip(|y| (-y).max(0.0))
    }

    // Inserts zero crossings so that the clipped function stays piecewise linear.
    fn clip(&self, f: impl Fn(f64) -> f64) -> Table {
        let mut xs = vec![self.xs[0]];
        let mut ys = vec![f(self.ys[0])];
        for i in 0..self.xs.len() - 1 {
            let (x0, x1, y0, y1) = (self.xs[i], self.xs[i + 1], self.ys[i], self.ys[i + 1]);
            if (y0 < 0.0 && y1 > 0.0) || (y0 > 0.0 && y1 < 0.0) {
                let xc = x0 + (x1 - x0) * y0 / (y0 - y1);
                if xc > x0 && xc < x1 {
                    xs.push(xc);
                    ys.push(0.0);
                }
            }
            xs.push(x1);
            ys.push(f(y1));
        }
        Table { xs, ys }
    }

    fn scaled(&self, factor: f64) -> Table {
        Table {
            xs: self.xs.clone(),
            ys: self.ys.iter().map(|y| y * factor).collect(),
        }
    }
}

/// Absolutely continuous part of a measure.
#[derive(Debug, Clone, PartialEq)]
pub enum Density {
    Lognormal(Lognormal),
    Table(Table),
}

impl Density {
    pub fn pdf(&self, x: f64) -> f64 {
        match self {
            Density::Lognormal(l) => l.pdf(x),
            Density::Table(t) => t.eval(x),
        }
    }

    pub fn total_mass(&self) -> f64 {
        match self {
            Density::Lognormal(l) => l.mass,
            Density::Table(t) => t.mass_between(t.lo(), t.hi()),
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        match self {
            Density::Lognormal(l) => l.cdf(x),
            Density::Table(t) => t.mass_between(f64::NEG_INFINITY, x),
        }
    }

    /// Mass strictly above `x`, computed without cancellation.
    pub fn survival(&self, x: f64) -> f64 {
        match self {
            Density::Lognormal(l) => l.mass * norm_cdf(-l.z_of(x)),
            Density::Table(t) => t.mass_between(x, f64::INFINITY),
        }
    }

    pub fn mean(&self) -> f64 {
        match self {
            Density::Lognormal(l) => l.mass * l.s0,
            Density::Table(t) => t.integrate_exact(|x| x, t.lo(), t.hi(), &[]),
        }
    }

    pub fn put(&self, k: f64) -> f64 {
        match self {
            Density::Lognormal(l) => l.mass * black_put(l.s0, k, l.total_std()),
            Density::Table(t) => t.integrate_exact(|x| k - x, f64::NEG_INFINITY, k, &[]),
        }
    }

    pub fn call(&self, k: f64) -> f64 {
        match self {
            Density::Lognormal(l) => l.mass * black_call(l.s0, k, l.total_std()),
            Density::Table(t) => t.integrate_exact(|x| x - k, k, f64::INFINITY, &[]),
        }
    }

    /// Interval outside of which the density is zero or negligible.
    pub fn effective_support(&self) -> (f64, f64) {
        match self {
            Density::Lognormal(l) => l.effective_support(),
            Density::Table(t) => (t.lo(), t.hi()),
        }
    }

    fn nodes(&self) -> &[f64] {
        match self {
            Density::Lognormal(_) => &[],
            Density::Table(t) => t.xs(),
        }
    }

    fn integrate<F: Fn(f64) -> f64>(
        &self,
        f: &F,
        lo: f64,
        hi: f64,
        hints: &[f64],
        cfg: &QuadConfig,
    ) -> Result<Estimate> {
        match self {
            Density::Lognormal(l) => {
                let zlo = l.z_of(lo).max(-LOGNORMAL_Z_CUT);
                let zhi = l.z_of(hi).min(LOGNORMAL_Z_CUT);
                if zhi <= zlo {
                    return Ok(Estimate { value: 0.0, error: 0.0 });
                }
                let zh: Vec<f64> = hints.iter().map(|&x| l.z_of(x)).collect();
                let g = |z: f64| f(l.x_of(z)) * norm_pdf(z) * l.mass;
                quad::integrate(g, zlo, zhi, &zh, cfg)
            }
            Density::Table(t) => {
                let a = lo.max(t.lo());
                let b = hi.min(t.hi());
                if b <= a {
                    return Ok(Estimate { value: 0.0, error: 0.0 });
                }
                let mut bp: Vec<f64> = t.xs().to_vec();
                bp.extend_from_slice(hints);
                quad::integrate(|x| f(x) * t.eval(x), a, b, &bp, cfg)
            }
        }
    }
}

fn validate_atoms(atoms: &mut Vec<Atom>, signed: bool) -> Result<()> {
    for a in atoms.iter() {
        if !a.x.is_finite() || !a.w.is_finite() {
            return Err(Error::InvalidMeasure("atoms must be finite".into()));
        }
        if !signed && a.x < 0.0 {
            return Err(Error::InvalidMeasure(format!("atom at negative price {}", a.x)));
        }
        if signed && a.w == 0.0 {
            return Err(Error::InvalidMeasure(format!("zero-weight atom at {}", a.x)));
        }
        if !signed && a.w <= 0.0 {
            return Err(Error::InvalidMeasure(format!(
                "atom at {} has non-positive weight {}",
                a.x, a.w
            )));
        }
    }
    atoms.sort_by(|a, b| a.x.partial_cmp(&b.x).unwrap());
    if let Some(w) = atoms.windows(2).find(|w| w[0].x == w[1].x) {
        return Err(Error::InvalidMeasure(format!("duplicate atom at {}", w[0].x)));
    }
    Ok(())
}

/// The one shared ∫ f dm kernel: exact atom sums plus quadrature over the
/// density part, respecting the interval's open/closed endpoints.
fn integrate_parts<F: Fn(f64) -> f64>(
    atoms: &[Atom],
    density: Option<&Density>,
    f: &F,
    interval: Interval,
    hints: &[f64],
    cfg: &QuadConfig,
) -> Result<Estimate> {
    if interval.is_empty() {
        return Ok(Estimate { value: 0.0, error: 0.0 });
    }
    let mut value = 0.0;
    for a in atoms.iter().filter(|a| interval.contains(a.x)) {
        let fx = f(a.x);
        if !fx.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "integrand is undefined at atom x={}",
                a.x
            )));
        }
        value += a.w * fx;
    }
    let mut error = 0.0;
    if let Some(d) = density {
        let (slo, shi) = d.effective_support();
        let lo = interval.lo.max(slo);
        let hi = interval.hi.min(shi);
        if hi > lo {
            let mut bp: Vec<f64> = hints.to_vec();
            bp.extend(atoms.iter().map(|a| a.x));
            let e = d.integrate(f, lo, hi, &bp, cfg)?;
            value += e.value;
            error += e.error;
        }
    }
    Ok(Estimate { value, error })
}

/// The positive finite pricing measure dF on the price axis.
#[derive(Debug, Clone, PartialEq)]
pub struct Measure {
    atoms: Vec<Atom>,
    density: Option<Density>,
    finite_mean: bool,
}

impl Measure {
    pub fn new(atoms: Vec<Atom>, density: Option<Density>, finite_mean: bool) -> Result<Self> {
        let mut atoms = atoms;
        validate_atoms(&mut atoms, false)?;
        match &density {
            Some(Density::Lognormal(l)) => {
                let ok = [l.s0, l.sigma, l.maturity, l.mass]
                    .iter()
                    .all(|v| v.is_finite() && *v > 0.0);
                if !ok {
                    return Err(Error::InvalidMeasure(
                        "lognormal parameters must be finite and positive".into(),
                    ));
                }
            }
            Some(Density::Table(t)) => {
                if t.lo() < 0.0 {
                    return Err(Error::InvalidMeasure("density table extends below zero".into()));
                }
                if let Some(i) = t.ys().iter().position(|&y| y < 0.0) {
                    return Err(Error::InvalidMeasure(format!(
                        "density negative at x={}",
                        t.xs()[i]
                    )));
                }
            }
            None => {}
        }
        Ok(Self {
            atoms,
            density,
            finite_mean,
        })
    }

    /// Pure-atom measure from `(location, weight)` pairs.
    pub fn from_atoms(atoms: &[(f64, f64)]) -> Result<Self> {
        let atoms = atoms.iter().map(|&(x, w)| Atom { x, w }).collect();
        Self::new(atoms, None, true)
    }

    pub fn lognormal(s0: f64, sigma: f64, maturity: f64, mass: f64) -> Result<Self> {
        Self::new(
            Vec::new(),
            Some(Density::Lognormal(Lognormal {
                s0,
                sigma,
                maturity,
                mass,
            })),
            true,
        )
    }

    pub fn from_table(points: &[(f64, f64)]) -> Result<Self> {
        Self::new(Vec::new(), Some(Density::Table(Table::new(points)?)), true)
    }

    pub fn with_atoms(self, atoms: &[(f64, f64)]) -> Result<Self> {
        let mut all = self.atoms;
        all.extend(atoms.iter().map(|&(x, w)| Atom { x, w }));
        Self::new(all, self.density, self.finite_mean)
    }

    pub fn with_finite_mean(mut self, flag: bool) -> Self {
        self.finite_mean = flag;
        self
    }

    /// Checks a declared total mass against the computed one.
    pub fn check_total_mass(&self, declared: f64, tol: f64) -> Result<()> {
        let actual = self.total_mass();
        if (actual - declared).abs() > tol {
            return Err(Error::InvalidMeasure(format!(
                "declared total mass {declared} but measure carries {actual}"
            )));
        }
        Ok(())
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn density(&self) -> Option<&Density> {
        self.density.as_ref()
    }

    pub fn finite_mean(&self) -> bool {
        self.finite_mean
    }

    pub fn is_atomic(&self) -> bool {
        self.density.is_none()
    }

    /// Atom locations and density nodes, i.e. every point where integrands
    /// against this measure should be split.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.atoms.iter().map(|a| a.x).collect();
        if let Some(d) = &self.density {
            v.extend_from_slice(d.nodes());
        }
        v
    }

    /// Upper end of the region carrying (numerically) all of the mass.
    pub fn effective_upper(&self) -> f64 {
        let a = self.atoms.last().map_or(0.0, |a| a.x);
        let d = self.density.as_ref().map_or(0.0, |d| d.effective_support().1);
        a.max(d)
    }

    /// F(x) = dF([0, x]); includes an atom at `x`.
    pub fn cdf(&self, x: f64) -> f64 {
        if x < 0.0 {
            return 0.0;
        }
        let n = self.atoms.partition_point(|a| a.x <= x);
        let atoms: f64 = self.atoms[..n].iter().map(|a| a.w).sum();
        atoms + self.density.as_ref().map_or(0.0, |d| d.cdf(x))
    }

    /// F(x−); excludes an atom at `x`.
    pub fn cdf_left(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        let n = self.atoms.partition_point(|a| a.x < x);
        let atoms: f64 = self.atoms[..n].iter().map(|a| a.w).sum();
        atoms + self.density.as_ref().map_or(0.0, |d| d.cdf(x))
    }

    /// F(∞) − F(x), the mass strictly above `x`.
    pub fn survival(&self, x: f64) -> f64 {
        let n = self.atoms.partition_point(|a| a.x <= x);
        let atoms: f64 = self.atoms[n..].iter().map(|a| a.w).sum();
        atoms + self.density.as_ref().map_or(0.0, |d| d.survival(x))
    }

    /// F(∞)
    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.w).sum::<f64>()
            + self.density.as_ref().map_or(0.0, |d| d.total_mass())
    }

    pub fn mean(&self) -> Result<f64> {
        if !self.finite_mean {
            return Err(Error::NoFiniteMean);
        }
        Ok(self.atoms.iter().map(|a| a.w * a.x).sum::<f64>()
            + self.density.as_ref().map_or(0.0, |d| d.mean()))
    }

    /// P(k) = ∫ (k − x)⁺ dF(x), in closed form per component.
    pub fn put_price(&self, k: f64) -> f64 {
        let atoms: f64 = self
            .atoms
            .iter()
            .take_while(|a| a.x < k)
            .map(|a| a.w * (k - a.x))
            .sum();
        atoms + self.density.as_ref().map_or(0.0, |d| d.put(k))
    }

    /// C(k) = ∫ (x − k)⁺ dF(x); needs a finite mean.
    pub fn call_price(&self, k: f64) -> Result<f64> {
        if !self.finite_mean {
            return Err(Error::NoFiniteMean);
        }
        let atoms: f64 = self
            .atoms
            .iter()
            .filter(|a| a.x > k)
            .map(|a| a.w * (a.x - k))
            .sum();
        Ok(atoms + self.density.as_ref().map_or(0.0, |d| d.call(k)))
    }

    /// ∫_interval f dF with the default quadrature tolerances.
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F, interval: Interval, hints: &[f64]) -> Result<f64> {
        self.integrate_with(f, interval, hints, &QuadConfig::default())
            .map(|e| e.value)
    }

    pub fn integrate_with<F: Fn(f64) -> f64>(
        &self,
        f: F,
        interval: Interval,
        hints: &[f64],
        cfg: &QuadConfig,
    ) -> Result<Estimate> {
        integrate_parts(&self.atoms, self.density.as_ref(), &f, interval, hints, cfg)
    }

    /// View as a signed measure supported on `[0, ∞)`.
    pub fn to_stieltjes(&self) -> StieltjesMeasure {
        StieltjesMeasure {
            atoms: self.atoms.clone(),
            density: self.density.clone(),
            support: Interval::half_line(),
        }
    }
}

/// A finite signed measure, e.g. the curvature ν of a difference-of-convex
/// payoff. Its density part, if any, is a piecewise-linear table.
#[derive(Debug, Clone, PartialEq)]
pub struct StieltjesMeasure {
    atoms: Vec<Atom>,
    density: Option<Density>,
    support: Interval,
}

impl StieltjesMeasure {
    pub fn new(atoms: Vec<Atom>, density: Option<Table>, support: Interval) -> Result<Self> {
        let mut atoms = atoms;
        validate_atoms(&mut atoms, true)?;
        if let Some(a) = atoms.iter().find(|a| !support.contains(a.x)) {
            return Err(Error::InvalidMeasure(format!(
                "atom at {} lies outside the declared support",
                a.x
            )));
        }
        if let Some(t) = &density {
            if t.lo() < support.lo || t.hi() > support.hi {
                return Err(Error::InvalidMeasure(
                    "density table extends outside the declared support".into(),
                ));
            }
        }
        Ok(Self {
            atoms,
            density: density.map(Density::Table),
            support,
        })
    }

    pub fn zero() -> Self {
        Self {
            atoms: Vec::new(),
            density: None,
            support: Interval::open(0.0, f64::INFINITY),
        }
    }

    /// Signed measure on `(lo, ∞)` from atoms and an optional table.
    pub fn above(lo: f64, atoms: &[(f64, f64)], table: Option<&[(f64, f64)]>) -> Result<Self> {
        let atoms = atoms.iter().map(|&(x, w)| Atom { x, w }).collect();
        let table = table.map(Table::new).transpose()?;
        Self::new(atoms, table, Interval::open(lo, f64::INFINITY))
    }

    /// Curvature measure on `(0, ∞)` from atoms and an optional table.
    pub fn on_positive_axis(atoms: &[(f64, f64)], table: Option<&[(f64, f64)]>) -> Result<Self> {
        let atoms = atoms.iter().map(|&(x, w)| Atom { x, w }).collect();
        let table = table.map(Table::new).transpose()?;
        Self::new(atoms, table, Interval::open(0.0, f64::INFINITY))
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn table(&self) -> Option<&Table> {
        match &self.density {
            Some(Density::Table(t)) => Some(t),
            _ => None,
        }
    }

    pub fn support(&self) -> Interval {
        self.support
    }

    pub fn is_zero(&self) -> bool {
        self.atoms.is_empty() && self.density.is_none()
    }

    pub fn breakpoints(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.atoms.iter().map(|a| a.x).collect();
        if let Some(d) = &self.density {
            v.extend_from_slice(d.nodes());
        }
        v
    }

    /// Largest point of the support carrying mass.
    pub fn upper(&self) -> f64 {
        let a = self.atoms.last().map_or(0.0, |a| a.x);
        let d = self.table().map_or(0.0, |t| t.hi());
        a.max(d)
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            atoms: self
                .atoms
                .iter()
                .map(|a| Atom { x: a.x, w: a.w * factor })
                .filter(|a| a.w != 0.0)
                .collect(),
            density: self.table().map(|t| Density::Table(t.scaled(factor))),
            support: self.support,
        }
    }

    fn part(&self, positive: bool) -> Measure {
        let atoms = self
            .atoms
            .iter()
            .filter(|a| (a.w > 0.0) == positive)
            .map(|a| Atom { x: a.x, w: a.w.abs() })
            .collect();
        let density = self.table().and_then(|t| {
            let p = if positive { t.positive_part() } else { t.negative_part() };
            if p.ys().iter().all(|&y| y == 0.0) {
                None
            } else {
                Some(Density::Table(p))
            }
        });
        Measure {
            atoms,
            density,
            finite_mean: true,
        }
    }

    /// ν⁺ of the Jordan decomposition.
    pub fn positive_part(&self) -> Measure {
        self.part(true)
    }

    /// ν⁻ of the Jordan decomposition.
    pub fn negative_part(&self) -> Measure {
        self.part(false)
    }

    pub fn is_positive(&self) -> bool {
        let neg = self.negative_part();
        neg.atoms.is_empty() && neg.density.is_none()
    }

    /// ν(interval), exact.
    pub fn mass(&self, interval: Interval) -> f64 {
        let atoms: f64 = self
            .atoms
            .iter()
            .filter(|a| interval.contains(a.x))
            .map(|a| a.w)
            .sum();
        let dens = self
            .table()
            .map_or(0.0, |t| t.mass_between(interval.lo, interval.hi));
        atoms + dens
    }

    /// |ν|(interval), exact.
    pub fn variation(&self, interval: Interval) -> f64 {
        let atoms: f64 = self
            .atoms
            .iter()
            .filter(|a| interval.contains(a.x))
            .map(|a| a.w.abs())
            .sum();
        let dens = self.table().map_or(0.0, |t| {
            t.positive_part().mass_between(interval.lo, interval.hi)
                + t.negative_part().mass_between(interval.lo, interval.hi)
        });
        atoms + dens
    }

    pub fn total_variation(&self) -> f64 {
        self.variation(self.support)
    }

    /// ∫_interval f dν (the same kernel as for [`Measure`]).
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F, interval: Interval, hints: &[f64]) -> Result<f64> {
        self.integrate_with(f, interval, hints, &QuadConfig::default())
            .map(|e| e.value)
    }

    pub fn integrate_with<F: Fn(f64) -> f64>(
        &self,
        f: F,
        interval: Interval,
        hints: &[f64],
        cfg: &QuadConfig,
    ) -> Result<Estimate> {
        integrate_parts(&self.atoms, self.density.as_ref(), &f, interval, hints, cfg)
    }
}

// ---------------------------------------------------------------------------
// JSON schema

fn default_true() -> bool {
    true
}

fn default_one() -> f64 {
    1.0
}

/// `{ "atoms": [[x, w], ...], "density": {...}, "finite_mean": bool }`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasureSpec {
    #[serde(default)]
    pub atoms: Vec<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub density: Option<DensitySpec>,
    #[serde(default = "default_true")]
    pub finite_mean: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub total_mass: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase", deny_unknown_fields)]
pub enum DensitySpec {
    Lognormal {
        s0: f64,
        sigma: f64,
        maturity: f64,
        #[serde(default = "default_one")]
        mass: f64,
    },
    Table {
        points: Vec<[f64; 2]>,
    },
}

impl TryFrom<&MeasureSpec> for Measure {
    type Error = Error;

    fn try_from(spec: &MeasureSpec) -> Result<Self> {
        let atoms = spec.atoms.iter().map(|p| Atom { x: p[0], w: p[1] }).collect();
        let density = match &spec.density {
            None => None,
            Some(DensitySpec::Lognormal {
                s0,
                sigma,
                maturity,
                mass,
            }) => Some(Density::Lognormal(Lognormal {
                s0: *s0,
                sigma: *sigma,
                maturity: *maturity,
                mass: *mass,
            })),
            Some(DensitySpec::Table { points }) => {
                let pts: Vec<(f64, f64)> = points.iter().map(|p| (p[0], p[1])).collect();
                Some(Density::Table(Table::new(&pts)?))
            }
        };
        let m = Measure::new(atoms, density, spec.finite_mean)?;
        if let Some(cap) = spec.total_mass {
            m.check_total_mass(cap, 1e-8)?;
        }
        Ok(m)
    }
}

impl From<&Measure> for MeasureSpec {
    fn from(m: &Measure) -> Self {
        let density = m.density.as_ref().map(|d| match d {
            Density::Lognormal(l) => DensitySpec::Lognormal {
                s0: l.s0,
                sigma: l.sigma,
                maturity: l.maturity,
                mass: l.mass,
            },
            Density::Table(t) => DensitySpec::Table {
                points: t.points().into_iter().map(|(x, y)| [x, y]).collect(),
            },
        });
        MeasureSpec {
            atoms: m.atoms.iter().map(|a| [a.x, a.w]).collect(),
            density,
            finite_mean: m.finite_mean,
            total_mass: None,
        }
    }
}

impl Measure {
    pub fn from_json(s: &str) -> Result<Self> {
        let spec: MeasureSpec = serde_json::from_str(s)?;
        Measure::try_from(&spec)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&MeasureSpec::from(self)).expect("measure spec serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn two_atoms() -> Measure {
        Measure::from_atoms(&[(1.0, 0.4), (2.0, 0.5)]).unwrap()
    }

    #[test]
    fn cdf_at_point_mass_is_right_continuous() {
        let m = Measure::from_atoms(&[(1.0, 1.0)]).unwrap();
        assert_eq!(m.cdf(0.999), 0.0);
        assert_eq!(m.cdf(1.0), 1.0);
        assert_eq!(m.cdf_left(1.0), 0.0);
        assert_eq!(m.cdf(-3.0), 0.0);
    }

    #[test]
    fn sub_probability_two_atoms() {
        let m = two_atoms();
        assert_eq!(m.cdf(1.5), 0.4);
        assert_eq!(m.cdf(f64::INFINITY), 0.9);
        assert_eq!(m.cdf_left(2.0), 0.4);
        assert!((m.total_mass() - 0.9).abs() < 1e-15);
        assert!((m.mean().unwrap() - 1.4).abs() < 1e-15);
    }

    #[test]
    fn lognormal_cdf_matches_erf() {
        let m = Measure::lognormal(1.0, 0.2, 1.0, 1.0).unwrap();
        // F(1) = Φ(σ/2) for the martingale lognormal, via erf directly
        let expected = 0.5 * (1.0 + libm::erf(0.1 / std::f64::consts::SQRT_2));
        assert!((m.cdf(1.0) - expected).abs() < 1e-15);
        for x in [0.5, 0.9, 1.0, 1.3] {
            assert_eq!(m.cdf(x), m.cdf_left(x));
        }
    }

    #[test]
    fn lognormal_mean_matches_quadrature() {
        let m = Measure::lognormal(1.0, 0.2, 1.0, 1.0).unwrap();
        let q = m.integrate(|x| x, Interval::half_line(), &[]).unwrap();
        assert!((m.mean().unwrap() - 1.0).abs() < 1e-15);
        assert!((q - 1.0).abs() < 1e-9);
    }

    #[test]
    fn mean_requires_flag() {
        let m = two_atoms().with_finite_mean(false);
        assert_eq!(m.mean(), Err(Error::NoFiniteMean));
        assert_eq!(m.call_price(1.0), Err(Error::NoFiniteMean));
    }

    #[test]
    fn integrate_total_mass_and_lebesgue() {
        let m = two_atoms();
        let v = m.integrate(|_| 1.0, Interval::default(), &[]).unwrap();
        assert!((v - 0.9).abs() < 1e-15);

        let leb = StieltjesMeasure::on_positive_axis(&[], Some(&[(0.0, 1.0), (1.0, 1.0)])).unwrap();
        let v = leb.integrate(|x| x, Interval::left_open(0.0, 1.0), &[]).unwrap();
        assert!((v - 0.5).abs() < 1e-14);
    }

    #[test]
    fn integrate_call_curve_against_curvature_of_square() {
        // ∫ (2 − k)⁺ · 2 dk = 4 = ∫ x² dδ₂
        let delta2 = Measure::from_atoms(&[(2.0, 1.0)]).unwrap();
        let nu = StieltjesMeasure::on_positive_axis(&[], Some(&[(0.0, 2.0), (10.0, 2.0)])).unwrap();
        let c = |k: f64| delta2.call_price(k).unwrap();
        let v = nu.integrate(c, Interval::open(0.0, f64::INFINITY), &[2.0]).unwrap();
        assert!((v - 4.0).abs() < 1e-12);
    }

    #[test]
    fn endpoint_flags_are_respected() {
        let m = two_atoms();
        let f = |_: f64| 1.0;
        assert_eq!(m.integrate(f, Interval::left_open(1.0, 2.0), &[]).unwrap(), 0.5);
        assert_eq!(m.integrate(f, Interval::right_open(1.0, 2.0), &[]).unwrap(), 0.4);
        assert_eq!(m.integrate(f, Interval::open(1.0, 2.0), &[]).unwrap(), 0.0);
        assert_eq!(m.integrate(f, Interval::closed(1.0, 2.0), &[]).unwrap(), 0.9);
    }

    #[test]
    fn undefined_integrand_at_atom() {
        let m = Measure::from_atoms(&[(0.0, 1.0)]).unwrap();
        assert!(m.integrate(|x| 1.0 / x, Interval::half_line(), &[]).is_err());
    }

    #[test]
    fn invalid_measures_rejected() {
        assert!(Measure::from_atoms(&[(1.0, 0.0)]).is_err());
        assert!(Measure::from_atoms(&[(1.0, 0.2), (1.0, 0.3)]).is_err());
        assert!(Measure::from_atoms(&[(-1.0, 0.2)]).is_err());
        assert!(Measure::from_table(&[(0.0, 1.0), (1.0, -0.5)]).is_err());
        assert!(Measure::lognormal(1.0, 0.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn closed_forms_agree_with_kernel() {
        for m in fixtures::all_measures() {
            for k in [0.0, 0.3, 0.8, 1.0, 1.5, 2.0, 3.5] {
                let p = m.integrate(|x| (k - x).max(0.0), Interval::half_line(), &[k]).unwrap();
                assert!((p - m.put_price(k)).abs() < 1e-9, "put {k}");
                let c = m.integrate(|x| (x - k).max(0.0), Interval::half_line(), &[k]).unwrap();
                assert!((c - m.call_price(k).unwrap()).abs() < 1e-9, "call {k}");
            }
            let mass = m.integrate(|_| 1.0, Interval::half_line(), &[]).unwrap();
            assert!((mass - m.total_mass()).abs() < 1e-9);
        }
    }

    #[test]
    fn additivity_over_adjacent_intervals() {
        let m = fixtures::three_atoms();
        let f = |x: f64| x * x - 0.3 * x;
        for (a, b, c) in [(0.0, 1.0, 2.5), (0.5, 1.5, 3.0), (1.0, 2.0, 10.0)] {
            let left = m.integrate(f, Interval::left_open(a, b), &[]).unwrap();
            let right = m.integrate(f, Interval::left_open(b, c), &[]).unwrap();
            let all = m.integrate(f, Interval::left_open(a, c), &[]).unwrap();
            assert!((left + right - all).abs() < 1e-12);
        }
    }

    #[test]
    fn monotone_truncations_increase_to_the_full_integral() {
        let m = fixtures::mixture();
        let f = |x: f64| x * x;
        let full = m.integrate(f, Interval::half_line(), &[]).unwrap();
        let mut prev = -1.0;
        for n in 1..=6 {
            let n = n as f64;
            let v = m.integrate(f, Interval::closed(0.0, n), &[]).unwrap();
            assert!(v >= prev - 1e-12);
            assert!(v <= full + 1e-9);
            prev = v;
        }
        assert!((prev - full).abs() < 1e-8);
    }

    #[test]
    fn jordan_decomposition() {
        let nu = StieltjesMeasure::on_positive_axis(
            &[(1.0, 0.5), (2.0, -0.25)],
            Some(&[(0.0, 1.0), (2.0, -1.0)]),
        )
        .unwrap();
        let pos = nu.positive_part();
        let neg = nu.negative_part();
        assert!((pos.total_mass() - 1.0).abs() < 1e-14);
        assert!((neg.total_mass() - 0.75).abs() < 1e-14);
        assert!((nu.total_variation() - 1.75).abs() < 1e-14);
        assert!(!nu.is_positive());
        let f = |x: f64| (3.0 - x).max(0.0);
        let direct = nu.integrate(f, Interval::half_line(), &[]).unwrap();
        let split = pos.integrate(f, Interval::half_line(), &[]).unwrap()
            - neg.integrate(f, Interval::half_line(), &[]).unwrap();
        assert!((direct - split).abs() < 1e-12);
    }

    #[test]
    fn json_round_trip_and_unknown_fields() {
        let src = r#"{ "atoms": [[2.0, 0.5], [1.0, 0.4]],
                       "density": { "family": "lognormal", "s0": 1.0, "sigma": 0.2, "maturity": 1.0, "mass": 0.1 },
                       "finite_mean": true }"#;
        let m = Measure::from_json(src).unwrap();
        assert_eq!(m.atoms()[0].x, 1.0);
        let back = Measure::from_json(&m.to_json()).unwrap();
        assert_eq!(m, back);

        assert!(Measure::from_json(r#"{ "atoms": [], "colour": 1 }"#).is_err());
        assert!(Measure::from_json(
            r#"{ "density": { "family": "table", "points": [[0,1],[1,1]], "extra": 0 } }"#
        )
        .is_err());
        assert!(Measure::from_json(r#"{ "atoms": [[1, 0.5]], "total_mass": 0.7 }"#).is_err());
    }
}
