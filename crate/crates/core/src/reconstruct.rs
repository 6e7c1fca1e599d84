//! Recovering F from put prices, put-spread approximations of indicators,
//! and exact static replication of piecewise-linear payoffs.

use serde::Serialize;

use crate::curves::{PriceCurve, Role};
use crate::error::{Error, Result};
use crate::measure::Measure;
use crate::oracle::{oracle_price, OracleConfig};
use crate::portfolio::Portfolio;

/// Right-difference estimate of F on a strike grid.
///
/// `f_hat[i]` is the slope of the put curve on `[k_i, k_{i+1}]`, which by
/// convexity brackets `F(k_i) ≤ f_hat[i] ≤ F(k_{i+1}−)`. `bound[i]` is the
/// width of the bracket for `F(k_i)` computable from the curve alone.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CdfEstimate {
    pub strikes: Vec<f64>,
    pub f_hat: Vec<f64>,
    pub bound: Vec<f64>,
}

impl CdfEstimate {
    pub fn len(&self) -> usize {
        self.strikes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.strikes.is_empty()
    }
}

pub fn cdf_from_puts(put: &PriceCurve) -> Result<CdfEstimate> {
    if put.role != Role::Put {
        return Err(Error::InvalidArgument("CDF recovery needs a put curve".into()));
    }
    let (k, p) = (put.strikes(), put.values());
    if k.len() < 2 {
        return Err(Error::InvalidCurve("need at least two strikes".into()));
    }
    let scale = p.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    if let Some(msg) = put.shape_violations(1e-12 * scale).into_iter().next() {
        return Err(Error::Validation(msg));
    }
    let n = k.len() - 1;
    let f_hat: Vec<f64> = (0..n).map(|i| (p[i + 1] - p[i]) / (k[i + 1] - k[i])).collect();
    // F(k_i) ∈ [f_hat[i-1], f_hat[i]], and F ≥ 0 at the first node
    let bound = (0..n)
        .map(|i| {
            let lower = if i == 0 { 0.0 } else { f_hat[i - 1] };
            (f_hat[i] - lower).max(0.0)
        })
        .collect();
    Ok(CdfEstimate {
        strikes: k[..n].to_vec(),
        f_hat,
        bound,
    })
}

/// `(Put(b) − Put(a))/(b − a)`: equals 1 on `[0, a]`, 0 on `[b, ∞)` and is
/// linear in between.
pub fn put_spread_indicator(a: f64, b: f64) -> Result<Portfolio> {
    if !(a >= 0.0 && a < b && b.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "put spread needs 0 ≤ a < b, got a={a}, b={b}"
        )));
    }
    let alpha = 1.0 / (b - a);
    Ok(Portfolio::new().put(b, alpha).put(a, -alpha))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Basis {
    Calls,
    Puts,
    /// Calls, unless puts need strictly fewer affine (bond/forward) legs.
    Auto,
}

/// Exact replication of the continuous piecewise-linear payoff through
/// `nodes` (first node at x = 0) continuing with `terminal_slope` past the
/// last node.
pub fn replicate_piecewise_linear(nodes: &[(f64, f64)], terminal_slope: f64, basis: Basis) -> Result<Portfolio> {
    if nodes.is_empty() {
        return Err(Error::InvalidArgument("no nodes".into()));
    }
    if nodes[0].0 != 0.0 {
        return Err(Error::InvalidArgument("the first node must be at x = 0".into()));
    }
    if nodes.iter().any(|(x, g)| !x.is_finite() || !g.is_finite()) || !terminal_slope.is_finite() {
        return Err(Error::InvalidArgument("nodes must be finite".into()));
    }
    if let Some(w) = nodes.windows(2).find(|w| w[1].0 <= w[0].0) {
        return Err(Error::InvalidArgument(format!("nodes not strictly increasing at x={}", w[1].0)));
    }
    let mut slopes: Vec<f64> = nodes
        .windows(2)
        .map(|w| (w[1].1 - w[0].1) / (w[1].0 - w[0].0))
        .collect();
    slopes.push(terminal_slope);
    // kink at node i (i ≥ 1) is slopes[i] − slopes[i−1]
    let kinks: Vec<(f64, f64)> = (1..nodes.len())
        .map(|i| (nodes[i].0, slopes[i] - slopes[i - 1]))
        .collect();

    let calls = {
        let mut p = Portfolio::new().bond(nodes[0].1).forward(slopes[0]);
        for &(x, q) in &kinks {
            p = p.call(x, q);
        }
        p.simplified()
    };
    let puts = {
        let (xl, gl) = *nodes.last().unwrap();
        let mut p = Portfolio::new().bond(gl - terminal_slope * xl).forward(terminal_slope);
        for &(x, q) in &kinks {
            p = p.put(x, q);
        }
        p.simplified()
    };
    let affine_legs = |p: &Portfolio| (p.bond_units != 0.0) as u8 + (p.forward_units != 0.0) as u8;
    Ok(match basis {
        Basis::Calls => calls,
        Basis::Puts => puts,
        Basis::Auto if affine_legs(&puts) < affine_legs(&calls) => puts,
        Basis::Auto => calls,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct L1Report {
    pub l1_error: f64,
    pub price_error: f64,
}

/// `∫ |g − φ| dF` and `|π(g) − π(φ)|` for a portfolio `φ`, both via the
/// oracle. `breakpoints` are the kinks and jumps of `g`.
pub fn l1_approximation_report<G: Fn(f64) -> f64>(
    g: G,
    breakpoints: &[f64],
    portfolio: &Portfolio,
    measure: &Measure,
) -> Result<L1Report> {
    let cfg = OracleConfig::default();
    let mut bp = breakpoints.to_vec();
    bp.extend(portfolio.strikes());
    let l1 = oracle_price(measure, |x| (g(x) - portfolio.payoff(x)).abs(), &bp, &cfg)?.price;
    let pg = oracle_price(measure, &g, &bp, &cfg)?.price;
    let pp = oracle_price(measure, |x| portfolio.payoff(x), &bp, &cfg)?.price;
    Ok(L1Report {
        l1_error: l1,
        price_error: (pg - pp).abs(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curves::put_curve;
    use crate::fixtures;

    fn grid(step: f64, max: f64) -> Vec<f64> {
        let n = (max / step).round() as usize;
        (0..=n).map(|i| i as f64 * step).collect()
    }

    #[test]
    fn point_mass_recovered_exactly() {
        let m = Measure::from_atoms(&[(1.0, 1.0)]).unwrap();
        let p = put_curve(&m, &grid(0.5, 2.0)).unwrap();
        let e = cdf_from_puts(&p).unwrap();
        assert_eq!(e.strikes, vec![0.0, 0.5, 1.0, 1.5]);
        assert_eq!(e.f_hat, vec![0.0, 0.0, 1.0, 1.0]);
    }

    #[test]
    fn two_atoms_on_grid() {
        let m = fixtures::two_atoms();
        let p = put_curve(&m, &grid(0.5, 3.0)).unwrap();
        let e = cdf_from_puts(&p).unwrap();
        for (k, f) in e.strikes.iter().zip(&e.f_hat) {
            assert!((f - m.cdf(*k)).abs() < 1e-12, "k={k}");
        }
        assert!((e.f_hat[2] - 0.4).abs() < 1e-15);
        assert!((e.f_hat[4] - 0.9).abs() < 1e-15);
    }

    #[test]
    fn bounds_bracket_the_truth() {
        for m in fixtures::all_measures() {
            let p = put_curve(&m, &grid(0.1, 4.0)).unwrap();
            let e = cdf_from_puts(&p).unwrap();
            for i in 0..e.len() {
                let f = m.cdf(e.strikes[i]);
                assert!(e.f_hat[i] >= f - 1e-12);
                assert!(e.f_hat[i] <= m.cdf(e.strikes[i] + 0.1) + 1e-12);
                assert!((e.f_hat[i] - f).abs() <= e.bound[i] + 1e-12);
            }
            assert!(e.f_hat.windows(2).all(|w| w[1] >= w[0] - 1e-12));
        }
    }

    #[test]
    fn rejects_non_convex_input() {
        let c = PriceCurve::from_grid(Role::Put, vec![0.0, 1.0, 1.5, 2.0], vec![0.0, 0.2, 0.6, 0.7]).unwrap();
        match cdf_from_puts(&c) {
            Err(Error::Validation(m)) => assert_eq!(m, "put curve not convex at k=1.5"),
            other => panic!("{other:?}"),
        }
        assert!(PriceCurve::from_grid(Role::Put, vec![0.0, 1.0, 1.0], vec![0.0; 3]).is_err());
    }

    #[test]
    fn put_spread_shape_and_prices() {
        let s = put_spread_indicator(1.0, 2.0).unwrap();
        assert_eq!(s.payoff(1.5), 0.5);
        assert_eq!(s.payoff(0.3), 1.0);
        assert_eq!(s.payoff(2.5), 0.0);

        let d = Measure::from_atoms(&[(1.5, 1.0)]).unwrap();
        assert_eq!(s.price_under(&d).unwrap(), 0.5);

        let far = Measure::from_atoms(&[(0.5, 0.3), (3.0, 0.6)]).unwrap();
        assert!((s.price_under(&far).unwrap() - 0.3).abs() < 1e-15);
        assert!(put_spread_indicator(2.0, 2.0).is_err());
    }

    #[test]
    fn piecewise_linear_identity_and_butterfly() {
        let single = replicate_piecewise_linear(&[(0.0, 1.5), (1.5, 0.0)], 0.0, Basis::Auto).unwrap();
        assert_eq!(single, Portfolio::new().put(1.5, 1.0));

        let fly = replicate_piecewise_linear(&[(0.0, 0.0), (1.0, 0.0), (2.0, 1.0), (3.0, 0.0)], 0.0, Basis::Auto)
            .unwrap();
        assert_eq!(fly, Portfolio::new().call(1.0, 1.0).call(2.0, -2.0).call(3.0, 1.0));
        let d2 = Measure::from_atoms(&[(2.0, 1.0)]).unwrap();
        assert_eq!(fly.price_under(&d2).unwrap(), 1.0);
        assert!((fly.price_under(&fixtures::two_atoms()).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn replication_bases_agree_everywhere() {
        let nodes = [(0.0, 2.0), (0.5, 1.0), (1.2, 1.4), (2.0, 0.3)];
        let c = replicate_piecewise_linear(&nodes, 0.7, Basis::Calls).unwrap();
        let p = replicate_piecewise_linear(&nodes, 0.7, Basis::Puts).unwrap();
        for i in 0..60 {
            let x = i as f64 * 0.05;
            assert!((c.payoff(x) - p.payoff(x)).abs() < 1e-12);
        }
        assert!((c.payoff(3.0) - (0.3 + 0.7)).abs() < 1e-12);
        assert!(replicate_piecewise_linear(&[(0.0, 1.0), (1.0, 0.0), (0.5, 1.0)], 0.0, Basis::Auto).is_err());
        assert!(replicate_piecewise_linear(&[(0.1, 1.0)], 0.0, Basis::Auto).is_err());
    }

    #[test]
    fn l1_report_for_exact_replication_is_zero() {
        let nodes = [(0.0, 0.0), (1.0, 0.0), (2.0, 1.0), (3.0, 0.0)];
        let fly = replicate_piecewise_linear(&nodes, 0.0, Basis::Auto).unwrap();
        let g = |x: f64| if x <= 1.0 { 0.0 } else if x <= 2.0 { x - 1.0 } else { (3.0 - x).max(0.0) };
        let r = l1_approximation_report(g, &[1.0, 2.0, 3.0], &fly, &fixtures::lognormal()).unwrap();
        assert!(r.l1_error < 1e-12 && r.price_error < 1e-12);
    }

    #[test]
    fn l1_report_for_indicator_obeys_spread_bound() {
        let m = fixtures::lognormal();
        let (a, b) = (0.9, 1.1);
        let s = put_spread_indicator(a, b).unwrap();
        let ind = move |x: f64| if x <= a { 1.0 } else { 0.0 };
        let r = l1_approximation_report(ind, &[a], &s, &m).unwrap();
        assert!(r.price_error <= r.l1_error + 1e-12);
        assert!(r.l1_error <= m.cdf(b) - m.cdf(a) + 1e-10);
    }
}
