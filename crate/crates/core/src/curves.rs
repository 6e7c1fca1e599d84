//! Put and call price curves, their one-sided derivatives, put–call parity
//! and the zero-rate Black–Scholes map with its inverse.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measure::{Interval, Measure};
use crate::special::{black_call, black_put};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Put,
    Call,
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Role::Put => f.write_str("put"),
            Role::Call => f.write_str("call"),
        }
    }
}

/// How call prices beyond the last quoted strike are treated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "policy", rename_all = "lowercase")]
pub enum TailPolicy {
    /// C is not extrapolated; integrals against curvature beyond the last
    /// strike are dropped and bounded by `C(k_max)·|ν|(tail)`, which must not
    /// exceed `budget`.
    Truncate { budget: f64 },
    /// C(k) = C(k_max)·exp(−λ(k − k_max)) with λ matching the last slope.
    Exponential,
}

impl Default for TailPolicy {
    fn default() -> Self {
        TailPolicy::Truncate { budget: 1e-6 }
    }
}

pub type Evaluator = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Option prices on a strike grid, optionally backed by an exact
/// evaluator for off-grid strikes.
#[derive(Clone)]
pub struct PriceCurve {
    pub role: Role,
    strikes: Vec<f64>,
    values: Vec<f64>,
    evaluator: Option<Evaluator>,
    /// F(∞), the zero-coupon bond price.
    pub f_infinity: Option<f64>,
    /// ∫ x dF, the forward value.
    pub mean: Option<f64>,
    pub tail: TailPolicy,
    /// False for curves generated from signed density approximations, for
    /// which the shape checks are advisory only.
    pub coherent: bool,
}

impl fmt::Debug for PriceCurve {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PriceCurve")
            .field("role", &self.role)
            .field("strikes", &self.strikes)
            .field("values", &self.values)
            .field("evaluator", &self.evaluator.is_some())
            .field("f_infinity", &self.f_infinity)
            .field("mean", &self.mean)
            .field("tail", &self.tail)
            .field("coherent", &self.coherent)
            .finish()
    }
}

const GRID_SNAP: f64 = 1e-12;

fn validate_grid(strikes: &[f64]) -> Result<()> {
    if strikes.is_empty() {
        return Err(Error::InvalidCurve("empty strike grid".into()));
    }
    for (i, &k) in strikes.iter().enumerate() {
        if !k.is_finite() || k < 0.0 {
            return Err(Error::InvalidCurve(format!("invalid strike {k}")));
        }
        if i > 0 && k <= strikes[i - 1] {
            return Err(Error::InvalidCurve(format!(
                "strikes must be strictly increasing (at k={k})"
            )));
        }
    }
    Ok(())
}

impl PriceCurve {
    pub fn from_grid(role: Role, strikes: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        validate_grid(&strikes)?;
        if strikes.len() != values.len() {
            return Err(Error::InvalidCurve(format!(
                "{} strikes but {} prices",
                strikes.len(),
                values.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidCurve(format!("non-finite price {v}")));
        }
        Ok(Self {
            role,
            strikes,
            values,
            evaluator: None,
            f_infinity: None,
            mean: None,
            tail: TailPolicy::default(),
            coherent: true,
        })
    }

    pub fn with_metadata(mut self, f_infinity: Option<f64>, mean: Option<f64>) -> Self {
        self.f_infinity = f_infinity;
        self.mean = mean;
        self
    }

    pub fn with_evaluator(mut self, evaluator: Evaluator) -> Self {
        self.evaluator = Some(evaluator);
        self
    }

    pub fn with_tail(mut self, tail: TailPolicy) -> Self {
        self.tail = tail;
        self
    }

    pub fn strikes(&self) -> &[f64] {
        &self.strikes
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn has_evaluator(&self) -> bool {
        self.evaluator.is_some()
    }

    pub fn first_strike(&self) -> f64 {
        self.strikes[0]
    }

    pub fn last_strike(&self) -> f64 {
        *self.strikes.last().unwrap()
    }

    fn out_of_span(&self, k: f64) -> Error {
        Error::OutOfSpan {
            strike: k,
            lo: self.first_strike(),
            hi: self.last_strike(),
        }
    }

    /// Index of a grid node within snapping distance of `k`.
    pub fn grid_index(&self, k: f64) -> Option<usize> {
        let tol = GRID_SNAP * k.abs().max(1.0);
        let i = self.strikes.partition_point(|&s| s < k - tol);
        (i < self.strikes.len() && (self.strikes[i] - k).abs() <= tol).then_some(i)
    }

    /// Price at `k`: the evaluator when present, otherwise piecewise-linear
    /// interpolation, with the tail policy applied to calls past the grid.
    pub fn eval(&self, k: f64) -> Result<f64> {
        if let Some(f) = &self.evaluator {
            if k < 0.0 {
                return Err(self.out_of_span(k));
            }
            return Ok(f(k));
        }
        if let Some(i) = self.grid_index(k) {
            return Ok(self.values[i]);
        }
        let (lo, hi) = (self.first_strike(), self.last_strike());
        if k < lo {
            return Err(self.out_of_span(k));
        }
        if k > hi {
            return match (self.role, self.tail) {
                (Role::Call, TailPolicy::Exponential) => Ok(self.exponential_tail(k)),
                _ => Err(self.out_of_span(k)),
            };
        }
        let i = self.strikes.partition_point(|&s| s <= k) - 1;
        let (k0, k1) = (self.strikes[i], self.strikes[i + 1]);
        let t = (k - k0) / (k1 - k0);
        Ok(self.values[i] + t * (self.values[i + 1] - self.values[i]))
    }

    fn exponential_tail(&self, k: f64) -> f64 {
        let n = self.strikes.len();
        let c_last = self.values[n - 1];
        if n < 2 || c_last <= 0.0 {
            return 0.0;
        }
        let slope = (self.values[n - 1] - self.values[n - 2]) / (self.strikes[n - 1] - self.strikes[n - 2]);
        if slope >= 0.0 {
            return 0.0;
        }
        let lambda = -slope / c_last;
        c_last * (-lambda * (k - self.last_strike())).exp()
    }

    /// D⁺ of the curve at `k`. Grid-backed curves use the forward difference
    /// to the next grid point; evaluator-backed curves use shrinking forward
    /// differences with Richardson extrapolation.
    pub fn right_derivative(&self, k: f64) -> Result<f64> {
        if let Some(f) = &self.evaluator {
            if k < 0.0 {
                return Err(self.out_of_span(k));
            }
            return richardson(f.as_ref(), k, 1.0);
        }
        let n = self.strikes.len();
        let i = match self.grid_index(k) {
            Some(i) => i,
            None if k > self.first_strike() && k < self.last_strike() => {
                self.strikes.partition_point(|&s| s <= k) - 1
            }
            None => return Err(self.out_of_span(k)),
        };
        if i + 1 >= n {
            return Err(self.out_of_span(k));
        }
        Ok((self.values[i + 1] - self.values[i]) / (self.strikes[i + 1] - self.strikes[i]))
    }

    /// D⁻ of the curve at `k`; at `k = 0` this is `F(0−) = 0` for puts and
    /// `−F(∞)` for calls.
    pub fn left_derivative(&self, k: f64) -> Result<f64> {
        if k == 0.0 {
            return match self.role {
                Role::Put => Ok(0.0),
                Role::Call => self
                    .f_infinity
                    .map(|f| -f)
                    .ok_or(Error::MissingMetadata("f_infinity")),
            };
        }
        if let Some(f) = &self.evaluator {
            if k < 0.0 {
                return Err(self.out_of_span(k));
            }
            return richardson(f.as_ref(), k, -1.0);
        }
        let i = match self.grid_index(k) {
            Some(i) => i,
            None if k > self.first_strike() && k < self.last_strike() => {
                self.strikes.partition_point(|&s| s < k)
            }
            None => return Err(self.out_of_span(k)),
        };
        if i == 0 {
            return Err(self.out_of_span(k));
        }
        Ok((self.values[i] - self.values[i - 1]) / (self.strikes[i] - self.strikes[i - 1]))
    }

    /// Shape checks that need only the curve itself. Returns one message
    /// per violated property; empty means the curve is admissible.
    pub fn shape_violations(&self, tol: f64) -> Vec<String> {
        let mut out = Vec::new();
        if !self.coherent {
            return out;
        }
        let (k, v) = (&self.strikes, &self.values);
        for i in 1..k.len() {
            let d = v[i] - v[i - 1];
            match self.role {
                Role::Put if d < -tol => out.push(format!("put curve decreasing at k={}", k[i])),
                Role::Call if d > tol => out.push(format!("call curve increasing at k={}", k[i])),
                _ => {}
            }
        }
        for i in 1..k.len().saturating_sub(1) {
            let s0 = (v[i] - v[i - 1]) / (k[i] - k[i - 1]);
            let s1 = (v[i + 1] - v[i]) / (k[i + 1] - k[i]);
            if s1 < s0 - tol {
                out.push(format!("{} curve not convex at k={}", self.role, k[i]));
            }
        }
        if k[0] == 0.0 {
            match self.role {
                Role::Put if v[0].abs() > tol => out.push(format!("put value at k=0 is {} (expected 0)", v[0])),
                Role::Call => {
                    if let Some(m) = self.mean {
                        if (v[0] - m).abs() > tol {
                            out.push(format!("call value at k=0 is {} but the mean is {m}", v[0]));
                        }
                    }
                }
                _ => {}
            }
        }
        if v.iter().any(|&x| x < -tol) {
            out.push(format!("{} curve has negative prices", self.role));
        }
        out
    }

    /// Checks that need the generating measure: `P(k) ≤ kF(k)`, the sharp
    /// Lipschitz bounds `|ΔP| ≤ |Δk|·F(k₂−)` and `|ΔC| ≤ |Δk|·(F(∞) − F(k₁))`
    /// for `k₁ < k₂`, and the call tail bound
    /// `C(k) ≤ ∫_[k,∞) x dF`.
    pub fn measure_violations(&self, measure: &Measure, tol: f64) -> Result<Vec<String>> {
        let mut out = Vec::new();
        let (k, v) = (&self.strikes, &self.values);
        for i in 0..k.len() {
            if self.role == Role::Put && v[i] > k[i] * measure.cdf(k[i]) + tol {
                out.push(format!("P(k) > kF(k) at k={}", k[i]));
            }
            for j in (i + 1)..k.len() {
                // puts: mass below k_j; calls: mass above k_i
                let lip = match self.role {
                    Role::Put => measure.cdf_left(k[j]),
                    Role::Call => measure.survival(k[i]),
                };
                let bound = (k[j] - k[i]) * lip;
                if (v[j] - v[i]).abs() > bound + tol {
                    out.push(format!("Lipschitz bound violated between k={} and k={}", k[i], k[j]));
                }
            }
        }
        if self.role == Role::Call {
            let kmax = self.last_strike();
            let tail_moment = measure.integrate(|x| x, Interval::right_open(kmax, f64::INFINITY), &[])?;
            if *v.last().unwrap() > tail_moment + tol {
                out.push(format!("C(k_max) exceeds the tail moment at k={kmax}"));
            }
        }
        Ok(out)
    }
}

/// One-sided derivative by shrinking differences with two Richardson
/// steps. `dir = 1` gives D⁺, `dir = −1` gives D⁻.
fn richardson(f: &(dyn Fn(f64) -> f64 + Send + Sync), k: f64, dir: f64) -> Result<f64> {
    let fk = f(k);
    let mut h = 1e-3 * k.abs().max(1.0);
    if dir < 0.0 {
        h = h.min(k);
    }
    let diff = |h: f64| dir * (f(k + dir * h) - fk) / h;
    for _ in 0..30 {
        let d1 = diff(h);
        let d2 = diff(h / 2.0);
        let d3 = diff(h / 4.0);
        let r1 = 2.0 * d2 - d1;
        let r2 = 2.0 * d3 - d2;
        let q = (4.0 * r2 - r1) / 3.0;
        if (q - r2).abs() <= 1e-9 * q.abs().max(1.0) {
            return Ok(q);
        }
        h /= 4.0;
    }
    Err(Error::Derivative(k))
}

/// P(k) = ∫ (k − x)⁺ dF on `strikes`, carrying F(∞) and (if finite) the
/// mean as metadata and the measure's closed forms as off-grid evaluator.
pub fn put_curve(measure: &Measure, strikes: &[f64]) -> Result<PriceCurve> {
    validate_grid(strikes)?;
    let values = strikes.iter().map(|&k| measure.put_price(k)).collect();
    let mean = measure.mean().ok();
    let m = Arc::new(measure.clone());
    Ok(PriceCurve::from_grid(Role::Put, strikes.to_vec(), values)?
        .with_metadata(Some(measure.total_mass()), mean)
        .with_evaluator(Arc::new(move |k| m.put_price(k))))
}

/// C(k) = ∫ (x − k)⁺ dF on `strikes`; the measure must have a finite mean.
pub fn call_curve(measure: &Measure, strikes: &[f64]) -> Result<PriceCurve> {
    validate_grid(strikes)?;
    let mean = measure.mean()?;
    let values = strikes
        .iter()
        .map(|&k| measure.call_price(k))
        .collect::<Result<Vec<_>>>()?;
    let m = Arc::new(measure.clone());
    Ok(PriceCurve::from_grid(Role::Call, strikes.to_vec(), values)?
        .with_metadata(Some(measure.total_mass()), Some(mean))
        .with_evaluator(Arc::new(move |k| m.call_price(k).unwrap_or(f64::NAN))))
}

/// Per-strike residual `C(k) − P(k) + k·F(∞) − mean`.
pub fn parity_gap(put: &PriceCurve, call: &PriceCurve, f_infinity: f64, mean: f64) -> Result<Vec<f64>> {
    if put.role != Role::Put || call.role != Role::Call {
        return Err(Error::InvalidArgument("parity needs a put curve and a call curve".into()));
    }
    let (kp, kc) = (put.strikes(), call.strikes());
    if kp.len() != kc.len() || kp.iter().zip(kc).any(|(a, b)| (a - b).abs() > GRID_SNAP * a.max(1.0)) {
        return Err(Error::GridMismatch);
    }
    Ok(kp
        .iter()
        .zip(put.values().iter().zip(call.values()))
        .map(|(&k, (&p, &c))| c - p + k * f_infinity - mean)
        .collect())
}

/// Zero-rate Black–Scholes put; `sigma = 0` gives the intrinsic value.
pub fn bs_put(s0: f64, k: f64, t: f64, sigma: f64) -> f64 {
    black_put(s0, k, sigma * t.sqrt())
}

pub fn bs_call(s0: f64, k: f64, t: f64, sigma: f64) -> f64 {
    black_call(s0, k, sigma * t.sqrt())
}

pub const IMPLIED_VOL_BRACKET: (f64, f64) = (1e-9, 5.0);

/// Inverts [`bs_put`] in σ by bisection on [`IMPLIED_VOL_BRACKET`].
pub fn implied_vol(price: f64, s0: f64, k: f64, t: f64) -> Result<f64> {
    let lo_band = (k - s0).max(0.0);
    if !(price >= lo_band && price < k) || !price.is_finite() {
        return Err(Error::ArbitrageBand {
            price,
            lo: lo_band,
            hi: k,
        });
    }
    let (mut lo, mut hi) = IMPLIED_VOL_BRACKET;
    let p_lo = bs_put(s0, k, t, lo);
    let p_hi = bs_put(s0, k, t, hi);
    if price <= p_lo {
        return Ok(lo);
    }
    if price > p_hi {
        return Err(Error::InvalidArgument(format!(
            "put price {price} implies a volatility above {hi}"
        )));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if bs_put(s0, k, t, mid) < price {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-15 {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// `start:stop:step` strike-grid syntax, inclusive of `stop` when it lies
/// on the grid.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        return Err(Error::Parse(format!("grid '{spec}' is not start:stop:step")));
    }
    let nums = parts
        .iter()
        .map(|p| p.trim().parse::<f64>().map_err(|e| Error::Parse(format!("grid '{spec}': {e}"))))
        .collect::<Result<Vec<_>>>()?;
    let (start, stop, step) = (nums[0], nums[1], nums[2]);
    if !(step > 0.0) || stop < start || start < 0.0 {
        return Err(Error::Parse(format!("grid '{spec}' is empty or has a non-positive step")));
    }
    let n = ((stop - start) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|i| start + i as f64 * step).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::special::norm_cdf;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    // Black–Scholes put from first principles, independent of `special`.
    fn bs_put_oracle(s0: f64, k: f64, t: f64, sigma: f64) -> f64 {
        let phi = |x: f64| 0.5 * (1.0 + libm::erf(x / std::f64::consts::SQRT_2));
        let v = sigma * t.sqrt();
        let d1 = ((s0 / k).ln() + 0.5 * v * v) / v;
        k * phi(-(d1 - v)) - s0 * phi(-d1)
    }

    #[test]
    fn put_curve_of_point_mass() {
        let m = Measure::from_atoms(&[(1.0, 1.0)]).unwrap();
        let c = put_curve(&m, &[0.0, 1.0, 2.0]).unwrap();
        assert_eq!(c.values(), &[0.0, 0.0, 1.0]);
    }

    #[test]
    fn two_atom_put_and_call() {
        let m = fixtures::two_atoms();
        let p = put_curve(&m, &[3.0]).unwrap();
        assert!(close(p.values()[0], 1.3, 1e-15));
        let c = call_curve(&m, &[0.0]).unwrap();
        assert!(close(c.values()[0], 1.4, 1e-15));
        let d = Measure::from_atoms(&[(2.0, 1.0)]).unwrap();
        assert_eq!(call_curve(&d, &[1.0]).unwrap().values()[0], 1.0);
    }

    #[test]
    fn lognormal_curves_match_bs_oracle() {
        let m = fixtures::lognormal();
        let p = put_curve(&m, &[1.0]).unwrap();
        assert!(close(p.values()[0], bs_put_oracle(1.0, 1.0, 1.0, 0.2), 1e-12));
        // quadrature route
        let q = m.integrate(|x| (1.0 - x).max(0.0), Interval::half_line(), &[1.0]).unwrap();
        assert!(close(q, bs_put_oracle(1.0, 1.0, 1.0, 0.2), 1e-9));
        let c = call_curve(&m, &[1.0]).unwrap();
        // zero-rate parity at the money gives C = P
        assert!(close(c.values()[0], bs_put_oracle(1.0, 1.0, 1.0, 0.2), 1e-12));
    }

    #[test]
    fn call_curve_needs_finite_mean() {
        let m = fixtures::two_atoms().with_finite_mean(false);
        assert!(matches!(call_curve(&m, &[1.0]), Err(Error::NoFiniteMean)));
    }

    #[test]
    fn parity_of_point_mass() {
        let m = Measure::from_atoms(&[(1.0, 1.0)]).unwrap();
        let g = [0.0, 1.0, 2.0];
        let p = put_curve(&m, &g).unwrap();
        let c = call_curve(&m, &g).unwrap();
        let gap = parity_gap(&p, &c, 1.0, 1.0).unwrap();
        assert!(gap.iter().all(|r| r.abs() < 1e-15));

        let mut vals = p.values().to_vec();
        vals[1] += 0.01;
        let bumped = PriceCurve::from_grid(Role::Put, g.to_vec(), vals).unwrap();
        let gap = parity_gap(&bumped, &c, 1.0, 1.0).unwrap();
        assert!(close(gap[1], -0.01, 1e-15));
    }

    #[test]
    fn parity_rejects_mismatched_grids() {
        let m = fixtures::two_atoms();
        let p = put_curve(&m, &[0.0, 1.0]).unwrap();
        let c = call_curve(&m, &[0.0, 1.5]).unwrap();
        assert_eq!(parity_gap(&p, &c, 0.9, 1.4), Err(Error::GridMismatch));
    }

    #[test]
    fn grid_right_derivatives() {
        let m = Measure::from_atoms(&[(1.0, 1.0)]).unwrap();
        let grid: Vec<f64> = (0..=8).map(|i| i as f64 * 0.25).collect();
        let vals = grid.iter().map(|&k| m.put_price(k)).collect();
        let p = PriceCurve::from_grid(Role::Put, grid, vals).unwrap();
        assert_eq!(p.right_derivative(1.5).unwrap(), 1.0);
        assert_eq!(p.right_derivative(0.5).unwrap(), 0.0);
        assert_eq!(p.right_derivative(1.0).unwrap(), 1.0);
        assert_eq!(p.left_derivative(1.0).unwrap(), 0.0);
        assert!(p.right_derivative(2.0).is_err());

        let two = fixtures::two_atoms();
        let grid: Vec<f64> = (0..=12).map(|i| i as f64 * 0.25).collect();
        let vals = grid.iter().map(|&k| two.put_price(k)).collect();
        let p = PriceCurve::from_grid(Role::Put, grid, vals).unwrap();
        assert!(close(p.right_derivative(1.0).unwrap(), 0.4, 1e-15));
    }

    #[test]
    fn evaluator_derivatives_match_cdf() {
        let m = fixtures::mixture();
        let p = put_curve(&m, &[0.0, 3.0]).unwrap();
        let c = call_curve(&m, &[0.0, 3.0]).unwrap();
        let finf = m.total_mass();
        for k in [0.3, 0.5, 0.9, 1.0, 1.5, 2.2] {
            assert!(close(p.right_derivative(k).unwrap(), m.cdf(k), 1e-8), "D+P at {k}");
            assert!(close(p.left_derivative(k).unwrap(), m.cdf_left(k), 1e-8), "D-P at {k}");
            assert!(close(c.right_derivative(k).unwrap(), m.cdf(k) - finf, 1e-8), "D+C at {k}");
            assert!(close(c.left_derivative(k).unwrap(), m.cdf_left(k) - finf, 1e-8), "D-C at {k}");
        }
    }

    #[test]
    fn bs_degenerate_volatility() {
        for k in [0.5, 1.0, 1.5] {
            assert!(close(bs_put(1.0, k, 1.0, 1e-12), (k - 1.0f64).max(0.0), 1e-12));
        }
    }

    #[test]
    fn bs_put_matches_normal_cdf_oracle() {
        let d1 = 0.1;
        let expected = norm_cdf(-(d1 - 0.2)) - norm_cdf(-d1);
        assert!(close(bs_put(1.0, 1.0, 1.0, 0.2), expected, 1e-15));
        assert!(close(bs_put(1.0, 1.0, 1.0, 0.2), bs_put_oracle(1.0, 1.0, 1.0, 0.2), 1e-15));
    }

    #[test]
    fn implied_vol_round_trip() {
        let p = bs_put(1.0, 1.1, 1.0, 0.2);
        let v = implied_vol(p, 1.0, 1.1, 1.0).unwrap();
        assert!(close(v, 0.2, 1e-10));
    }

    #[test]
    fn implied_vol_rejects_arbitrage() {
        assert!(matches!(implied_vol(0.05, 1.0, 1.1, 1.0), Err(Error::ArbitrageBand { .. })));
        assert!(matches!(implied_vol(1.2, 1.0, 1.1, 1.0), Err(Error::ArbitrageBand { .. })));
    }

    #[test]
    fn shape_checks_flag_non_convexity() {
        let c = PriceCurve::from_grid(Role::Put, vec![0.0, 1.0, 1.5, 2.0], vec![0.0, 0.2, 0.6, 0.7]).unwrap();
        let v = c.shape_violations(1e-12);
        assert!(v.iter().any(|m| m == "put curve not convex at k=1.5"), "{v:?}");
    }

    #[test]
    fn exponential_tail_is_continuous_and_decays() {
        let m = fixtures::lognormal();
        let grid: Vec<f64> = (0..=20).map(|i| i as f64 * 0.1).collect();
        let vals = grid.iter().map(|&k| m.call_price(k).unwrap()).collect();
        let c = PriceCurve::from_grid(Role::Call, grid, vals)
            .unwrap()
            .with_tail(TailPolicy::Exponential);
        let at = c.eval(2.0).unwrap();
        assert!(close(c.eval(2.0 + 1e-9).unwrap(), at, 1e-9));
        assert!(c.eval(3.0).unwrap() < at);
        let truncated = c.clone().with_tail(TailPolicy::default());
        assert!(truncated.eval(3.0).is_err());
    }

    #[test]
    fn grid_syntax() {
        assert_eq!(parse_grid("0:1:0.25").unwrap(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert_eq!(parse_grid("0:5:0.1").unwrap().len(), 51);
        assert!(parse_grid("0:1").is_err());
        assert!(parse_grid("0:1:0").is_err());
    }
}
