//! Reference measures shared by the test suites and the CLI `verify`
//! subcommand.

use crate::measure::Measure;

/// Atoms (1, 0.4), (2, 0.5): a sub-probability measure with F(∞) = 0.9.
pub fn two_atoms() -> Measure {
    Measure::from_atoms(&[(1.0, 0.4), (2.0, 0.5)]).unwrap()
}

pub fn three_atoms() -> Measure {
    Measure::from_atoms(&[(0.5, 0.2), (1.0, 0.35), (2.5, 0.4)]).unwrap()
}

/// Martingale lognormal with S0 = 1, σ = 0.2, T = 1 and unit mass.
pub fn lognormal() -> Measure {
    Measure::lognormal(1.0, 0.2, 1.0, 1.0).unwrap()
}

/// Discounted lognormal core plus two atoms, total mass 0.95.
pub fn mixture() -> Measure {
    Measure::lognormal(1.0, 0.25, 1.0, 0.8)
        .unwrap()
        .with_atoms(&[(0.5, 0.05), (1.5, 0.1)])
        .unwrap()
}

/// Piecewise-linear tabulated density with an atom at its left end.
pub fn tabulated() -> Measure {
    Measure::from_table(&[(0.2, 0.0), (0.8, 0.5), (1.2, 0.5), (2.0, 0.0)])
        .unwrap()
        .with_atoms(&[(0.2, 0.05)])
        .unwrap()
}

pub fn all_measures() -> Vec<Measure> {
    vec![two_atoms(), three_atoms(), lognormal(), mixture(), tabulated()]
}
