//! Static replication of convex, difference-of-convex and piecewise
//! difference-of-convex payoffs from the call price curve.
//!
//! A payoff on `[a, ∞)` is described by its value and right slope at `a`
//! and its curvature measure ν on `(a, ∞)`:
//! `g(x) = g(a) + D⁺g(a)(x − a) + ∫_(a,∞) (x − k)⁺ dν(k)`.

use serde::{Deserialize, Serialize};

use crate::curves::{PriceCurve, Role, TailPolicy};
use crate::error::{Error, Result};
use crate::measure::{Atom, Interval, Measure, StieltjesMeasure, Table};
use crate::portfolio::Portfolio;
use crate::quad::QuadConfig;

/// Largest level accepted by [`dyadic_call_portfolio`].
pub const MAX_DYADIC_LEVEL: u32 = 12;

#[derive(Debug, Clone, PartialEq)]
pub struct DcPayoff {
    pub origin: f64,
    pub g0: f64,
    pub slope0: f64,
    pub curvature: StieltjesMeasure,
    /// Set when ν was estimated from samples of `g` rather than given.
    pub approximate: bool,
}

impl DcPayoff {
    /// Payoff on `[0, ∞)`.
    pub fn new(g0: f64, slope0: f64, curvature: StieltjesMeasure) -> Result<Self> {
        Self::at(0.0, g0, slope0, curvature)
    }

    /// Payoff described from the point `origin`.
    pub fn at(origin: f64, g0: f64, slope0: f64, curvature: StieltjesMeasure) -> Result<Self> {
        if !origin.is_finite() || origin < 0.0 || !g0.is_finite() || !slope0.is_finite() {
            return Err(Error::InvalidPayoff("origin, value and slope must be finite".into()));
        }
        if curvature.atoms().iter().any(|a| a.x <= origin) {
            return Err(Error::InvalidPayoff(format!(
                "curvature atoms must lie strictly above {origin}"
            )));
        }
        if curvature.table().is_some_and(|t| t.lo() < origin) {
            return Err(Error::InvalidPayoff(format!(
                "curvature density must start at or above {origin}"
            )));
        }
        Ok(Self {
            origin,
            g0,
            slope0,
            curvature,
            approximate: false,
        })
    }

    pub fn is_convex(&self) -> bool {
        self.curvature.is_positive()
    }

    pub fn evaluate(&self, x: f64) -> f64 {
        let affine = self.g0 + self.slope0 * (x - self.origin);
        if x <= self.origin {
            return affine;
        }
        let atoms: f64 = self
            .curvature
            .atoms()
            .iter()
            .take_while(|a| a.x < x)
            .map(|a| a.w * (x - a.x))
            .sum();
        let dens = self.curvature.table().map_or(0.0, |t| ramp(t, self.origin, x));
        affine + atoms + dens
    }

    /// D⁺g(x)
    pub fn right_slope(&self, x: f64) -> f64 {
        if x < self.origin {
            return self.slope0;
        }
        self.slope0 + self.curvature.mass(Interval::left_open(self.origin, x))
    }

    /// D⁻g(x)
    pub fn left_slope(&self, x: f64) -> f64 {
        if x <= self.origin {
            return self.slope0;
        }
        self.slope0 + self.curvature.mass(Interval::open(self.origin, x))
    }
}

/// ∫_(lo, x) (x − k) y(k) dk for a piecewise-linear `y`; Simpson's rule is
/// exact for the quadratic integrand on each segment.
fn ramp(t: &Table, lo: f64, x: f64) -> f64 {
    let (xs, ys) = (t.xs(), t.ys());
    let mut total = 0.0;
    for i in 0..xs.len() - 1 {
        let a = xs[i].max(lo);
        let b = xs[i + 1].min(x);
        if b <= a {
            continue;
        }
        let y = |k: f64| ys[i] + (k - xs[i]) * (ys[i + 1] - ys[i]) / (xs[i + 1] - xs[i]);
        let f = |k: f64| (x - k) * y(k);
        let m = 0.5 * (a + b);
        total += (b - a) / 6.0 * (f(a) + 4.0 * f(m) + f(b));
    }
    total
}

/// Splits off the affine part: returns `(g0, slope0, g − g0 − slope0·x)`.
pub fn normalize_dc(payoff: &DcPayoff) -> (f64, f64, DcPayoff) {
    let mut rest = payoff.clone();
    rest.g0 = 0.0;
    rest.slope0 = 0.0;
    (payoff.g0, payoff.slope0, rest)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Piece {
    pub a: f64,
    /// Right end, exclusive; may be `+∞`.
    pub b: f64,
    pub payoff: DcPayoff,
}

/// A payoff equal to a DC function on each `[a, b)` and zero elsewhere.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseDcPayoff {
    pieces: Vec<Piece>,
}

impl PiecewiseDcPayoff {
    pub fn new(mut pieces: Vec<Piece>) -> Result<Self> {
        if pieces.is_empty() {
            return Err(Error::InvalidPayoff("no pieces".into()));
        }
        pieces.sort_by(|p, q| p.a.partial_cmp(&q.a).unwrap_or(std::cmp::Ordering::Equal));
        for p in &pieces {
            if !(p.a < p.b) || p.a.is_nan() || p.b.is_nan() {
                return Err(Error::InvalidPayoff(format!("empty span [{}, {})", p.a, p.b)));
            }
            if p.payoff.origin != p.a {
                return Err(Error::InvalidPayoff("piece data must be given at its left end".into()));
            }
        }
        if let Some(w) = pieces.windows(2).find(|w| w[1].a < w[0].b) {
            return Err(Error::InvalidPayoff(format!("pieces overlap at {}", w[1].a)));
        }
        Ok(Self { pieces })
    }

    pub fn from_dc(payoff: DcPayoff) -> Self {
        Self {
            pieces: vec![Piece {
                a: payoff.origin,
                b: f64::INFINITY,
                payoff,
            }],
        }
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    /// The single DC payoff on `[0, ∞)`, if that is what this is.
    pub fn as_global(&self) -> Option<&DcPayoff> {
        match self.pieces.as_slice() {
            [p] if p.a == 0.0 && p.b.is_infinite() => Some(&p.payoff),
            _ => None,
        }
    }

    pub fn evaluate(&self, x: f64) -> f64 {
        self.pieces
            .iter()
            .find(|p| x >= p.a && x < p.b)
            .map_or(0.0, |p| p.payoff.evaluate(x))
    }

    /// Piece ends plus curvature atoms: where `g` may jump or kink.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut v = Vec::new();
        for p in &self.pieces {
            v.push(p.a);
            if p.b.is_finite() {
                v.push(p.b);
            }
            v.extend(p.payoff.curvature.breakpoints());
        }
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        v.dedup();
        v
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let spec: PayoffSpec = serde_json::from_str(s)?;
        Self::try_from(&spec)
    }
}

// ---------------------------------------------------------------------------
// Pricing

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct PriceBreakdown {
    pub price: f64,
    pub bond_term: f64,
    pub forward_term: f64,
    pub curvature_term: f64,
    pub boundary_term: f64,
    /// Bound on the curvature integral dropped past the last quoted strike.
    pub tail_bound: f64,
}

fn require_call(call: &PriceCurve) -> Result<()> {
    if call.role != Role::Call {
        return Err(Error::InvalidCurve("a call curve is required".into()));
    }
    Ok(())
}

fn is_empty(m: &Measure) -> bool {
    m.atoms().is_empty() && m.density().is_none()
}

fn mass(m: &Measure, iv: Interval) -> Result<f64> {
    m.integrate(|_| 1.0, iv, &[])
}

fn integrate_curve(call: &PriceCurve, m: &Measure, iv: Interval, hints: &[f64]) -> Result<f64> {
    m.integrate_with(|k| call.eval(k).unwrap_or(f64::NAN), iv, hints, &QuadConfig::tight())
        .map(|e| e.value)
}

/// ∫_iv C dm for a positive measure `m`, with the tail bound incurred.
fn integrate_call(call: &PriceCurve, m: &Measure, iv: Interval) -> Result<(f64, f64)> {
    if is_empty(m) || iv.is_empty() {
        return Ok((0.0, 0.0));
    }
    let mut hints = m.breakpoints();
    hints.extend_from_slice(call.strikes());
    if call.has_evaluator() {
        let v = integrate_curve(call, m, iv, &hints)?;
        return Ok((v, 0.0));
    }
    let (k0, kmax) = (call.first_strike(), call.last_strike());
    if iv.lo < k0 {
        let below = Interval {
            hi: k0,
            hi_closed: false,
            ..iv
        };
        if !below.is_empty() && mass(m, below)? > 0.0 {
            return Err(Error::OutOfSpan {
                strike: iv.lo,
                lo: k0,
                hi: kmax,
            });
        }
    }
    let lo_closed = if iv.lo < k0 { true } else { iv.lo_closed };
    let lo = iv.lo.max(k0);
    if iv.hi <= kmax {
        let inside = Interval { lo, lo_closed, ..iv };
        let v = integrate_curve(call, m, inside, &hints)?;
        return Ok((v, 0.0));
    }
    let inside = Interval {
        lo,
        hi: kmax,
        lo_closed,
        hi_closed: true,
    };
    let v = if inside.is_empty() {
        0.0
    } else {
        integrate_curve(call, m, inside, &hints)?
    };
    let tail = Interval {
        lo: kmax,
        lo_closed: false,
        ..iv
    };
    let c_last = call.eval(kmax)?;
    let bound = c_last.max(0.0) * mass(m, tail)?;
    match call.tail {
        TailPolicy::Truncate { budget } => {
            if bound > budget {
                return Err(Error::TailBudget { bound, budget });
            }
            Ok((v, bound))
        }
        TailPolicy::Exponential => {
            let t = integrate_curve(call, m, tail, &hints)?;
            Ok((v + t, bound))
        }
    }
}

/// ∫_iv C dν = ∫ C dν⁺ − ∫ C dν⁻, with the summed tail bound.
fn curvature_integral(call: &PriceCurve, nu: &StieltjesMeasure, iv: Interval) -> Result<(f64, f64)> {
    let (p, tp) = integrate_call(call, &nu.positive_part(), iv)?;
    let (n, tn) = integrate_call(call, &nu.negative_part(), iv)?;
    Ok((p - n, tp + tn))
}

/// Price of a convex payoff: `g0·F(∞) + slope0·mean + ∫ C dν`.
pub fn price_convex(call: &PriceCurve, payoff: &DcPayoff) -> Result<PriceBreakdown> {
    if !payoff.is_convex() {
        return Err(Error::InvalidPayoff(
            "curvature has a negative part; price it as a difference of convex payoffs".into(),
        ));
    }
    price_dc(call, payoff)
}

/// Price of a DC payoff on `[0, ∞)`.
pub fn price_dc(call: &PriceCurve, payoff: &DcPayoff) -> Result<PriceBreakdown> {
    require_call(call)?;
    if payoff.origin != 0.0 {
        return Err(Error::InvalidPayoff(
            "payoff must be described from 0; use the piecewise pricer".into(),
        ));
    }
    let f_inf = call.f_infinity.ok_or(Error::MissingMetadata("f_infinity"))?;
    let mean = call.mean.ok_or(Error::MissingMetadata("mean"))?;
    let (curv, tail_bound) = curvature_integral(call, &payoff.curvature, Interval::open(0.0, f64::INFINITY))?;
    let bond_term = payoff.g0 * f_inf;
    let forward_term = payoff.slope0 * mean;
    Ok(PriceBreakdown {
        price: bond_term + forward_term + curv,
        bond_term,
        forward_term,
        curvature_term: curv,
        boundary_term: 0.0,
        tail_bound,
    })
}

/// Price of a piecewise DC payoff. For grid-only call curves every finite
/// piece end must be a grid strike, and a piece starting at `a > 0` needs
/// a grid strike below `a`.
pub fn price_piecewise_dc(call: &PriceCurve, payoff: &PiecewiseDcPayoff) -> Result<PriceBreakdown> {
    require_call(call)?;
    let mut out = PriceBreakdown::default();
    for p in payoff.pieces() {
        if !call.has_evaluator() {
            for x in [p.a, p.b].into_iter().filter(|x| x.is_finite()) {
                if call.grid_index(x).is_none() {
                    return Err(Error::InvalidPayoff(format!(
                        "breakpoint {x} is not a quoted strike"
                    )));
                }
            }
        }
        let h = &p.payoff;
        let (curv, tail) = curvature_integral(call, &h.curvature, Interval::open(p.a, p.b))?;
        let c_a = call.eval(p.a)?;
        let dp_a = call.right_derivative(p.a)?;
        let dm_a = call.left_derivative(p.a)?;
        // ΔF(a) = D⁺C(a) − D⁻C(a)
        let mut boundary = c_a * h.slope0 - dp_a * h.g0 + h.g0 * (dp_a - dm_a);
        if p.b.is_finite() {
            let c_b = call.eval(p.b)?;
            let dm_b = call.left_derivative(p.b)?;
            boundary += -c_b * h.left_slope(p.b) + dm_b * h.evaluate(p.b);
        }
        out.curvature_term += curv;
        out.boundary_term += boundary;
        out.tail_bound += tail;
    }
    out.price = out.curvature_term + out.boundary_term;
    Ok(out)
}

/// Cell width of the dyadic mesh at `level`.
pub fn dyadic_mesh(level: u32) -> f64 {
    (-((level + 3) as f64)).exp2()
}

/// Call portfolio `Σ ν((kᵢ, kᵢ₊₁])·(x − kᵢ₊₁)⁺` over the dyadic mesh of
/// `(0, level]`. Meshes are nested, so for convex payoffs the portfolios
/// increase with the level and stay below the payoff.
pub fn dyadic_call_portfolio(payoff: &DcPayoff, level: u32) -> Result<Portfolio> {
    if !payoff.is_convex() {
        return Err(Error::InvalidPayoff("dyadic portfolios need a convex payoff".into()));
    }
    if payoff.origin != 0.0 || payoff.g0 != 0.0 || payoff.slope0 != 0.0 {
        return Err(Error::InvalidPayoff(
            "normalize the payoff first (g0 = slope0 = 0 at the origin)".into(),
        ));
    }
    if level == 0 || level > MAX_DYADIC_LEVEL {
        return Err(Error::InvalidArgument(format!(
            "level must be in 1..={MAX_DYADIC_LEVEL}"
        )));
    }
    let h = dyadic_mesh(level);
    let cells = (level as u64) << (level + 3);
    let mut p = Portfolio::new();
    for i in 0..cells {
        let (lo, hi) = (i as f64 * h, (i + 1) as f64 * h);
        let q = payoff.curvature.mass(Interval::left_open(lo, hi));
        if q != 0.0 {
            p = p.call(hi, q);
        }
    }
    Ok(p)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailDecayRow {
    pub a: f64,
    /// g(a)·(F(∞) − F(a))
    pub value_term: f64,
    /// C(a)·D⁺g(a)
    pub slope_term: f64,
}

/// Boundary terms at `a` that vanish as `a → ∞` when `g ∈ L¹(dF)`.
pub fn tail_decay_report(measure: &Measure, payoff: &DcPayoff, a_grid: &[f64]) -> Result<Vec<TailDecayRow>> {
    a_grid
        .iter()
        .map(|&a| {
            Ok(TailDecayRow {
                a,
                value_term: payoff.evaluate(a) * measure.survival(a),
                slope_term: measure.call_price(a)? * payoff.right_slope(a),
            })
        })
        .collect()
}

/// Approximate DC description of a C² payoff from samples on `grid`
/// (which must start at 0): ν is tabulated from second differences.
pub fn curvature_from_second_differences<G: Fn(f64) -> f64>(g: G, grid: &[f64]) -> Result<DcPayoff> {
    if grid.len() < 3 || grid[0] != 0.0 {
        return Err(Error::InvalidArgument("grid must start at 0 with at least three points".into()));
    }
    if grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidArgument("grid must be strictly increasing".into()));
    }
    let v: Vec<f64> = grid.iter().map(|&x| g(x)).collect();
    let n = grid.len();
    let slope = |i: usize| (v[i + 1] - v[i]) / (grid[i + 1] - grid[i]);
    let mut pts: Vec<(f64, f64)> = (1..n - 1)
        .map(|i| (grid[i], 2.0 * (slope(i) - slope(i - 1)) / (grid[i + 1] - grid[i - 1])))
        .collect();
    let (first, last) = (pts[0].1, pts[pts.len() - 1].1);
    pts.insert(0, (grid[0], first));
    pts.push((grid[n - 1], last));
    // derivative at 0 of the quadratic through the first three samples
    let slope0 = slope(0) - grid[1] * (slope(1) - slope(0)) / grid[2];
    let nu = StieltjesMeasure::new(
        Vec::<Atom>::new(),
        Some(Table::new(&pts)?),
        Interval::open(0.0, f64::INFINITY),
    )?;
    let mut out = DcPayoff::new(v[0], slope0, nu)?;
    out.approximate = true;
    Ok(out)
}

// ---------------------------------------------------------------------------
// JSON schema

/// `{ "pieces": [ { "span": [a, b|null], "g0_at_a", "slope0_at_a",
/// "curvature": { "atoms": [[k, w]], "density": [[x, y]] } } ] }`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PayoffSpec {
    pub pieces: Vec<PieceSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PieceSpec {
    pub span: (f64, Option<f64>),
    pub g0_at_a: f64,
    pub slope0_at_a: f64,
    #[serde(default)]
    pub curvature: CurvatureSpec,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurvatureSpec {
    #[serde(default)]
    pub atoms: Vec<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub density: Option<Vec<[f64; 2]>>,
}

impl TryFrom<&PayoffSpec> for PiecewiseDcPayoff {
    type Error = Error;

    fn try_from(spec: &PayoffSpec) -> Result<Self> {
        let pieces = spec
            .pieces
            .iter()
            .map(|p| {
                let (a, b) = (p.span.0, p.span.1.unwrap_or(f64::INFINITY));
                let atoms: Vec<(f64, f64)> = p.curvature.atoms.iter().map(|x| (x[0], x[1])).collect();
                let table: Option<Vec<(f64, f64)>> = p
                    .curvature
                    .density
                    .as_ref()
                    .map(|d| d.iter().map(|x| (x[0], x[1])).collect());
                let nu = StieltjesMeasure::above(a, &atoms, table.as_deref())
                    .map_err(|e| Error::InvalidPayoff(e.to_string()))?;
                Ok(Piece {
                    a,
                    b,
                    payoff: DcPayoff::at(a, p.g0_at_a, p.slope0_at_a, nu)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        PiecewiseDcPayoff::new(pieces)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curves::call_curve;
    use crate::fixtures;
    use crate::oracle::{oracle_price, OracleConfig};

    fn square(upper: f64) -> DcPayoff {
        let nu = StieltjesMeasure::on_positive_axis(&[], Some(&[(0.0, 2.0), (upper, 2.0)])).unwrap();
        DcPayoff::new(0.0, 0.0, nu).unwrap()
    }

    fn fine_grid(hi: f64, n: usize) -> Vec<f64> {
        (0..=n).map(|i| hi * i as f64 / n as f64).collect()
    }

    #[test]
    fn square_reconstructs_inside_its_span() {
        let g = square(10.0);
        for x in [0.0, 0.3, 1.0, 4.5, 10.0] {
            assert!((g.evaluate(x) - x * x).abs() < 1e-12, "x={x}");
        }
        assert!((g.right_slope(3.0) - 6.0).abs() < 1e-12);
    }

    #[test]
    fn convex_price_matches_second_moment() {
        let m = fixtures::lognormal();
        let call = call_curve(&m, &fine_grid(10.0, 100)).unwrap();
        let b = price_convex(&call, &square(10.0)).unwrap();
        let exact = (0.04f64).exp();
        assert!((b.price - exact).abs() < 1e-8, "{} vs {exact}", b.price);
    }

    #[test]
    fn affine_part_prices_bond_and_forward() {
        let m = fixtures::mixture();
        let call = call_curve(&m, &fine_grid(5.0, 50)).unwrap();
        let g = DcPayoff::new(2.0, -0.5, StieltjesMeasure::zero()).unwrap();
        let b = price_dc(&call, &g).unwrap();
        let want = 2.0 * m.total_mass() - 0.5 * m.mean().unwrap();
        assert!((b.price - want).abs() < 1e-12);
    }

    #[test]
    fn convex_pricer_rejects_negative_curvature() {
        let m = fixtures::lognormal();
        let call = call_curve(&m, &[0.0, 1.0, 2.0]).unwrap();
        let nu = StieltjesMeasure::on_positive_axis(&[(1.0, -1.0)], None).unwrap();
        let g = DcPayoff::new(0.0, 0.0, nu).unwrap();
        assert!(matches!(price_convex(&call, &g), Err(Error::InvalidPayoff(_))));
        assert!(price_dc(&call, &g).is_ok());
    }

    #[test]
    fn straddle_via_dc_matches_oracle() {
        // |x − 1| = (1 − x) + 2(x − 1)⁺
        let m = fixtures::three_atoms();
        let call = call_curve(&m, &fine_grid(4.0, 40)).unwrap();
        let nu = StieltjesMeasure::on_positive_axis(&[(1.0, 2.0)], None).unwrap();
        let g = DcPayoff::new(1.0, -1.0, nu).unwrap();
        let b = price_dc(&call, &g).unwrap();
        let o = oracle_price(&m, |x| (x - 1.0).abs(), &[1.0], &OracleConfig::default()).unwrap();
        assert!((b.price - o.price).abs() < 1e-12);
    }

    #[test]
    fn digital_reduces_to_left_limits() {
        let m = fixtures::two_atoms();
        let grid = fine_grid(3.0, 30);
        let call = PriceCurve::from_grid(
            Role::Call,
            grid.clone(),
            grid.iter().map(|&k| m.call_price(k).unwrap()).collect(),
        )
        .unwrap()
        .with_metadata(Some(m.total_mass()), m.mean().ok());
        let piece = Piece {
            a: 1.0,
            b: 2.0,
            payoff: DcPayoff::at(1.0, 1.0, 0.0, StieltjesMeasure::zero()).unwrap(),
        };
        let g = PiecewiseDcPayoff::new(vec![piece]).unwrap();
        let b = price_piecewise_dc(&call, &g).unwrap();
        assert!((b.price - (m.cdf_left(2.0) - m.cdf_left(1.0))).abs() < 1e-12);
        assert!((b.price - 0.4).abs() < 1e-12);
    }

    #[test]
    fn off_grid_breakpoint_is_rejected() {
        let m = fixtures::two_atoms();
        let call = PriceCurve::from_grid(Role::Call, vec![0.0, 1.0, 2.0], vec![1.4, 0.5, 0.0])
            .unwrap()
            .with_metadata(Some(m.total_mass()), m.mean().ok());
        let piece = Piece {
            a: 0.5,
            b: 2.0,
            payoff: DcPayoff::at(0.5, 1.0, 0.0, StieltjesMeasure::zero()).unwrap(),
        };
        let g = PiecewiseDcPayoff::new(vec![piece]).unwrap();
        assert!(matches!(price_piecewise_dc(&call, &g), Err(Error::InvalidPayoff(_))));
    }

    #[test]
    fn piecewise_matches_oracle_on_mixture() {
        // g = x on [0, 1), 2 − (x − 1.5)⁺·3 + ... on [1, 2), 0.5 on [2, ∞)
        let m = fixtures::mixture();
        let call = call_curve(&m, &fine_grid(8.0, 80)).unwrap();
        let json = r#"{ "pieces": [
            { "span": [0, 1], "g0_at_a": 0, "slope0_at_a": 1 },
            { "span": [1, 2], "g0_at_a": 2, "slope0_at_a": 0,
              "curvature": { "atoms": [[1.5, -3]] } },
            { "span": [2, null], "g0_at_a": 0.5, "slope0_at_a": 0 } ] }"#;
        let g = PiecewiseDcPayoff::from_json(json).unwrap();
        let b = price_piecewise_dc(&call, &g).unwrap();
        let o = oracle_price(&m, |x| g.evaluate(x), &g.breakpoints(), &OracleConfig::default()).unwrap();
        assert!((b.price - o.price).abs() < 1e-7, "{} vs {}", b.price, o.price);
    }

    #[test]
    fn single_piece_agrees_with_global_formula() {
        let m = fixtures::lognormal();
        let call = call_curve(&m, &fine_grid(10.0, 100)).unwrap();
        let g = square(10.0);
        let global = price_dc(&call, &g).unwrap().price;
        let pw = price_piecewise_dc(&call, &PiecewiseDcPayoff::from_dc(g)).unwrap().price;
        assert!((global - pw).abs() < 1e-9);
    }

    #[test]
    fn truncation_respects_budget() {
        let m = fixtures::lognormal();
        let grid = fine_grid(1.2, 12);
        let call = PriceCurve::from_grid(
            Role::Call,
            grid.clone(),
            grid.iter().map(|&k| m.call_price(k).unwrap()).collect(),
        )
        .unwrap()
        .with_metadata(Some(1.0), Some(1.0));
        assert!(matches!(price_convex(&call, &square(10.0)), Err(Error::TailBudget { .. })));
        let loose = call.clone().with_tail(TailPolicy::Truncate { budget: 10.0 });
        let b = price_convex(&loose, &square(10.0)).unwrap();
        assert!(b.tail_bound > 0.0);
        assert!(b.price <= (0.04f64).exp());
    }

    #[test]
    fn dyadic_square_quantities() {
        let p = dyadic_call_portfolio(&square(10.0), 3).unwrap();
        let h = dyadic_mesh(3);
        assert_eq!(p.legs.len(), 3 << 6);
        assert!(p.legs.iter().all(|l| (l.quantity - 2.0 * h).abs() < 1e-14));
    }

    #[test]
    fn dyadic_prices_increase_to_point_mass_value() {
        let m = Measure::from_atoms(&[(1.0, 1.0)]).unwrap();
        let prices: Vec<f64> = (3..=6)
            .map(|n| dyadic_call_portfolio(&square(10.0), n).unwrap().price_under(&m).unwrap())
            .collect();
        assert!(prices.windows(2).all(|w| w[1] > w[0]));
        for (n, p) in (3..=6).zip(&prices) {
            assert!((1.0 - p - dyadic_mesh(n)).abs() < 1e-12);
        }
    }

    #[test]
    fn dyadic_requires_normalized_convex_payoff() {
        let g = DcPayoff::new(1.0, 0.0, StieltjesMeasure::zero()).unwrap();
        assert!(dyadic_call_portfolio(&g, 2).is_err());
        let (g0, s0, rest) = normalize_dc(&g);
        assert_eq!((g0, s0), (1.0, 0.0));
        assert!(dyadic_call_portfolio(&rest, 2).is_ok());
        assert!(dyadic_call_portfolio(&rest, MAX_DYADIC_LEVEL + 1).is_err());
    }

    #[test]
    fn tail_terms_decay_for_forward() {
        let m = fixtures::lognormal();
        let g = DcPayoff::new(0.0, 1.0, StieltjesMeasure::zero()).unwrap();
        let rows = tail_decay_report(&m, &g, &[2.0, 4.0, 6.0, 8.0, 10.0]).unwrap();
        for w in rows.windows(2) {
            assert!(w[1].value_term <= w[0].value_term);
            assert!(w[1].slope_term <= w[0].slope_term);
        }
        let last = rows.last().unwrap();
        assert!(last.value_term < 1e-6 && last.slope_term < 1e-6);
    }

    #[test]
    fn second_differences_recover_square() {
        let g = curvature_from_second_differences(|x| x * x, &fine_grid(4.0, 40)).unwrap();
        assert!(g.approximate);
        assert!(g.slope0.abs() < 1e-12);
        assert!((g.evaluate(2.5) - 6.25).abs() < 1e-9);
    }

    #[test]
    fn payoff_json_rejects_unknown_fields_and_overlaps() {
        assert!(PiecewiseDcPayoff::from_json(r#"{"pieces":[{"span":[0,null],"g0_at_a":0,"slope0_at_a":0,"x":1}]}"#).is_err());
        let overlap = r#"{"pieces":[{"span":[0,2],"g0_at_a":0,"slope0_at_a":0},
                                     {"span":[1,3],"g0_at_a":0,"slope0_at_a":0}]}"#;
        assert!(matches!(PiecewiseDcPayoff::from_json(overlap), Err(Error::InvalidPayoff(_))));
    }
}
