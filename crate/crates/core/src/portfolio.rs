//! Finite linear combinations of bonds, forwards, puts and calls.

use serde::{Deserialize, Serialize};

use crate::curves::PriceCurve;
use crate::error::{Error, Result};
use crate::measure::Measure;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OptionKind {
    Put,
    Call,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Leg {
    pub strike: f64,
    pub quantity: f64,
    pub kind: OptionKind,
}

impl Leg {
    pub fn payoff(&self, x: f64) -> f64 {
        let intrinsic = match self.kind {
            OptionKind::Put => (self.strike - x).max(0.0),
            OptionKind::Call => (x - self.strike).max(0.0),
        };
        self.quantity * intrinsic
    }
}

/// Payoff `bond_units + forward_units·x + Σ qᵢ·(option i)(x)`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Portfolio {
    pub bond_units: f64,
    pub forward_units: f64,
    pub legs: Vec<Leg>,
}

impl Portfolio {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn bond(mut self, units: f64) -> Self {
        self.bond_units += units;
        self
    }

    pub fn forward(mut self, units: f64) -> Self {
        self.forward_units += units;
        self
    }

    pub fn put(mut self, strike: f64, quantity: f64) -> Self {
        self.legs.push(Leg {
            strike,
            quantity,
            kind: OptionKind::Put,
        });
        self
    }

    pub fn call(mut self, strike: f64, quantity: f64) -> Self {
        self.legs.push(Leg {
            strike,
            quantity,
            kind: OptionKind::Call,
        });
        self
    }

    pub fn payoff(&self, x: f64) -> f64 {
        self.bond_units + self.forward_units * x + self.legs.iter().map(|l| l.payoff(x)).sum::<f64>()
    }

    pub fn strikes(&self) -> Vec<f64> {
        self.legs.iter().map(|l| l.strike).collect()
    }

    /// Price under a known measure: bond ↦ F(∞), forward ↦ mean, options
    /// ↦ closed-form curve values.
    pub fn price_under(&self, measure: &Measure) -> Result<f64> {
        let needs_mean = self.forward_units != 0.0
            || self.legs.iter().any(|l| l.kind == OptionKind::Call);
        let mean = if needs_mean { measure.mean()? } else { 0.0 };
        let mut total = self.bond_units * measure.total_mass() + self.forward_units * mean;
        for l in &self.legs {
            let v = match l.kind {
                OptionKind::Put => measure.put_price(l.strike),
                OptionKind::Call => measure.call_price(l.strike)?,
            };
            total += l.quantity * v;
        }
        Ok(total)
    }

    /// Price from quoted curves. Puts need a put curve and calls a call
    /// curve; bond and forward values come from either curve's metadata.
    pub fn price_from_curves(&self, put: Option<&PriceCurve>, call: Option<&PriceCurve>) -> Result<f64> {
        let meta = |f: fn(&PriceCurve) -> Option<f64>, name: &'static str| -> Result<f64> {
            put.and_then(f)
                .or_else(|| call.and_then(f))
                .ok_or(Error::MissingMetadata(name))
        };
        let mut total = 0.0;
        if self.bond_units != 0.0 {
            total += self.bond_units * meta(|c| c.f_infinity, "f_infinity")?;
        }
        if self.forward_units != 0.0 {
            total += self.forward_units * meta(|c| c.mean, "mean")?;
        }
        for l in &self.legs {
            let curve = match l.kind {
                OptionKind::Put => put,
                OptionKind::Call => call,
            }
            .ok_or_else(|| Error::InvalidArgument(format!("no {:?} curve to price leg", l.kind)))?;
            total += l.quantity * curve.eval(l.strike)?;
        }
        Ok(total)
    }

    /// Drops legs with zero quantity and merges legs of equal kind and strike.
    pub fn simplified(mut self) -> Self {
        self.legs.retain(|l| l.quantity != 0.0);
        self.legs.sort_by(|a, b| {
            (a.kind as u8, a.strike)
                .partial_cmp(&(b.kind as u8, b.strike))
                .unwrap()
        });
        let mut merged: Vec<Leg> = Vec::with_capacity(self.legs.len());
        for l in self.legs {
            match merged.last_mut() {
                Some(m) if m.kind == l.kind && m.strike == l.strike => m.quantity += l.quantity,
                _ => merged.push(l),
            }
        }
        merged.retain(|l| l.quantity != 0.0);
        self.legs = merged;
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn payoff_combines_affine_and_options() {
        let p = Portfolio::new().bond(1.0).forward(-0.5).put(2.0, 1.0).call(1.0, 2.0);
        assert_eq!(p.payoff(0.0), 1.0 + 2.0);
        assert_eq!(p.payoff(3.0), 1.0 - 1.5 + 4.0);
    }

    #[test]
    fn closed_form_price_matches_integral() {
        let m = fixtures::mixture();
        let p = Portfolio::new().bond(0.3).forward(0.2).put(1.1, 2.0).call(0.9, -1.0);
        let direct = m
            .integrate(|x| p.payoff(x), crate::Interval::half_line(), &p.strikes())
            .unwrap();
        assert!((p.price_under(&m).unwrap() - direct).abs() < 1e-9);
    }

    #[test]
    fn simplify_merges_and_drops() {
        let p = Portfolio::new().put(1.0, 1.0).put(1.0, -1.0).call(2.0, 1.0).call(2.0, 0.5);
        let s = p.simplified();
        assert_eq!(s.legs.len(), 1);
        assert_eq!(s.legs[0].quantity, 1.5);
    }
}
