//! Command-line front end. Every subcommand is a pure function of its
//! input files; results go to `--out` or stdout, diagnostics to stderr.
//! Exit codes: 0 success, 1 I/O failure, 2 validation or schema failure.

use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

use crate::curves::{call_curve, parity_gap, parse_grid, put_curve, PriceCurve, Role, TailPolicy};
use crate::error::{Error, Result};
use crate::io;
use crate::oracle::{oracle_price, OracleConfig};
use crate::reconstruct::{cdf_from_puts, replicate_piecewise_linear, Basis};
use crate::replication::{dyadic_call_portfolio, normalize_dc, price_dc, price_piecewise_dc};
use crate::returns::{correction_term, hermite_project, put_under_density, recover_put, ReturnDensitySpec};

#[derive(Debug, Parser)]
#[command(name = "stieltjes", version, about = "Option-implied pricing measures and static replication")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum RoleArg {
    Put,
    Call,
}

impl From<RoleArg> for Role {
    fn from(r: RoleArg) -> Self {
        match r {
            RoleArg::Put => Role::Put,
            RoleArg::Call => Role::Call,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum TailArg {
    Truncate,
    Exponential,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum BasisArg {
    Calls,
    Puts,
    Auto,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Put or call curve of a measure on a strike grid.
    Curve {
        #[arg(long)]
        measure: PathBuf,
        /// Strike grid `start:stop:step`.
        #[arg(long)]
        strikes: String,
        #[arg(long, value_enum)]
        role: RoleArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Right-difference estimate of F from a put curve.
    Reconstruct {
        #[arg(long)]
        puts: PathBuf,
        #[arg(long)]
        meta: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Price a piecewise difference-of-convex payoff from a call curve.
    Price {
        #[arg(long)]
        calls: PathBuf,
        #[arg(long)]
        meta: Option<PathBuf>,
        #[arg(long)]
        payoff: PathBuf,
        /// Measure to compare against with the brute-force pricer.
        #[arg(long)]
        verify: Option<PathBuf>,
        /// Largest accepted difference to the brute-force price.
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[arg(long, value_enum, default_value = "truncate")]
        tail: TailArg,
        #[arg(long, default_value_t = 1e-6)]
        budget: f64,
    },
    /// Static replication portfolio: exact for piecewise-linear nodes, or
    /// the dyadic call approximation of a convex payoff.
    Replicate {
        /// CSV `x,g` of a piecewise-linear payoff.
        #[arg(long, conflicts_with = "payoff")]
        nodes: Option<PathBuf>,
        #[arg(long, default_value_t = 0.0)]
        terminal_slope: f64,
        #[arg(long, value_enum, default_value = "auto")]
        basis: BasisArg,
        /// Payoff JSON with a single piece on `[0, ∞)`.
        #[arg(long)]
        payoff: Option<PathBuf>,
        #[arg(long, default_value_t = 6)]
        level: u32,
        /// Measure under which to report the portfolio price.
        #[arg(long)]
        measure: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Convergence table of θ-spread prices under Hermite approximations.
    Converge {
        /// Return-density JSON; the standard Gaussian when omitted.
        #[arg(long)]
        density: Option<PathBuf>,
        #[arg(long, value_delimiter = ',', default_value = "0,4,8,16")]
        orders: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_value = "0.5,0.25,0.1,0.05")]
        k1: Vec<f64>,
        #[arg(long, default_value_t = 1.0)]
        k2: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Curve-property and parity checks for a measure.
    Verify {
        #[arg(long)]
        measure: PathBuf,
        #[arg(long, default_value = "0:5:0.1")]
        strikes: String,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
}

/// Parses `argv` (including the program name) and runs the command.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    match execute(cli.command, &mut out) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn write_csv_to(out: &mut dyn Write, header: &str, rows: impl Iterator<Item = String>) -> Result<()> {
    writeln!(out, "{header}")?;
    for r in rows {
        writeln!(out, "{r}")?;
    }
    Ok(())
}

pub fn execute(command: Command, out: &mut dyn Write) -> Result<()> {
    match command {
        Command::Curve {
            measure,
            strikes,
            role,
            out: path,
        } => {
            let m = io::read_measure(&measure)?;
            let grid = parse_grid(&strikes)?;
            let curve = match Role::from(role) {
                Role::Put => put_curve(&m, &grid)?,
                Role::Call => call_curve(&m, &grid)?,
            };
            check_curve(&curve, Some(&m), 1e-9)?;
            match path {
                Some(p) => {
                    io::write_curve(&p, &curve)?;
                    writeln!(out, "wrote {} {} prices to {}", curve.strikes().len(), curve.role, p.display())?;
                }
                None => write_csv_to(
                    out,
                    "strike,price",
                    curve.strikes().iter().zip(curve.values()).map(|(k, v)| format!("{k},{v}")),
                )?,
            }
        }
        Command::Reconstruct { puts, meta, out: path } => {
            let curve = io::read_curve(&puts, Role::Put, meta.as_deref())?;
            let est = cdf_from_puts(&curve)?;
            match path {
                Some(p) => {
                    io::write_cdf(&p, &est)?;
                    writeln!(out, "wrote {} CDF estimates to {}", est.len(), p.display())?;
                }
                None => write_csv_to(
                    out,
                    "strike,f_hat,bound",
                    (0..est.len()).map(|i| format!("{},{},{}", est.strikes[i], est.f_hat[i], est.bound[i])),
                )?,
            }
        }
        Command::Price {
            calls,
            meta,
            payoff,
            verify,
            tol,
            tail,
            budget,
        } => {
            let tail = match tail {
                TailArg::Truncate => TailPolicy::Truncate { budget },
                TailArg::Exponential => TailPolicy::Exponential,
            };
            let curve = io::read_curve(&calls, Role::Call, meta.as_deref())?.with_tail(tail);
            check_curve(&curve, None, 1e-9)?;
            let g = io::read_payoff(&payoff)?;
            let b = match g.as_global() {
                Some(dc) => price_dc(&curve, dc)?,
                None => price_piecewise_dc(&curve, &g)?,
            };
            writeln!(out, "price {}", b.price)?;
            writeln!(
                out,
                "bond {} forward {} curvature {} boundary {} tail_bound {}",
                b.bond_term, b.forward_term, b.curvature_term, b.boundary_term, b.tail_bound
            )?;
            if let Some(mpath) = verify {
                let m = io::read_measure(&mpath)?;
                let o = oracle_price(&m, |x| g.evaluate(x), &g.breakpoints(), &OracleConfig::default())?;
                let delta = (b.price - o.price).abs();
                writeln!(out, "oracle {} delta {delta:e}", o.price)?;
                if delta > tol {
                    return Err(Error::Validation(format!(
                        "price differs from the brute-force price by {delta:e} (tolerance {tol:e})"
                    )));
                }
            }
        }
        Command::Replicate {
            nodes,
            terminal_slope,
            basis,
            payoff,
            level,
            measure,
            out: path,
        } => {
            let p = match (nodes, payoff) {
                (Some(n), _) => {
                    let basis = match basis {
                        BasisArg::Calls => Basis::Calls,
                        BasisArg::Puts => Basis::Puts,
                        BasisArg::Auto => Basis::Auto,
                    };
                    replicate_piecewise_linear(&io::read_nodes(&n)?, terminal_slope, basis)?
                }
                (None, Some(pp)) => {
                    let g = io::read_payoff(&pp)?;
                    let dc = g.as_global().ok_or_else(|| {
                        Error::InvalidPayoff("dyadic replication needs a single piece on [0, ∞)".into())
                    })?;
                    let (g0, s0, normalized) = normalize_dc(dc);
                    dyadic_call_portfolio(&normalized, level)?.bond(g0).forward(s0)
                }
                (None, None) => return Err(Error::InvalidArgument("pass --nodes or --payoff".into())),
            };
            if let Some(mpath) = measure {
                let m = io::read_measure(&mpath)?;
                writeln!(out, "portfolio price {}", p.price_under(&m)?)?;
            }
            match path {
                Some(f) => {
                    io::write_portfolio(&f, &p)?;
                    writeln!(out, "wrote {} option legs to {}", p.legs.len(), f.display())?;
                }
                None => {
                    writeln!(out, "bond {} forward {}", p.bond_units, p.forward_units)?;
                    write_csv_to(
                        out,
                        "kind,strike,quantity",
                        p.legs.iter().map(|l| {
                            let kind = match l.kind {
                                crate::OptionKind::Put => "put",
                                crate::OptionKind::Call => "call",
                            };
                            format!("{kind},{},{}", l.strike, l.quantity)
                        }),
                    )?;
                }
            }
        }
        Command::Converge {
            density,
            orders,
            k1,
            k2,
            out: path,
        } => {
            let f = match density {
                Some(p) => io::read_return_density(&p)?,
                None => ReturnDensitySpec::standard_gaussian(),
            };
            let approx = orders
                .iter()
                .map(|&n| hermite_project(&f, n))
                .collect::<Result<Vec<_>>>()?;
            let r = recover_put(&approx, k2, &k1)?;
            let reference = put_under_density(&f, k2);
            let mut rows = Vec::new();
            for (i, &n) in r.table.orders.iter().enumerate() {
                for (j, &k) in r.table.k1.iter().enumerate() {
                    let v = r.table.values[i][j];
                    rows.push(vec![n as f64, k, v, (v - reference).abs()]);
                }
            }
            let header = ["order", "k1", "theta_inner", "abs_error"];
            match &path {
                Some(p) => io::write_table(p, &header, &rows)?,
                None => write_csv_to(
                    out,
                    &header.join(","),
                    rows.iter()
                        .map(|r| r.iter().map(f64::to_string).collect::<Vec<_>>().join(",")),
                )?,
            }
            let last_k1 = *k1.last().unwrap_or(&f64::NAN);
            writeln!(
                out,
                "estimate {} reference {} abs_error {:e} correction {:e}",
                r.iterated,
                reference,
                (r.iterated - reference).abs(),
                correction_term(&f, last_k1, k2)
            )?;
        }
        Command::Verify { measure, strikes, tol } => {
            let m = io::read_measure(&measure)?;
            let grid = parse_grid(&strikes)?;
            let put = put_curve(&m, &grid)?;
            check_curve(&put, Some(&m), tol)?;
            writeln!(out, "put curve ok ({} strikes)", grid.len())?;
            if m.finite_mean() {
                let call = call_curve(&m, &grid)?;
                check_curve(&call, Some(&m), tol)?;
                let gap = parity_gap(&put, &call, m.total_mass(), m.mean()?)?;
                let worst = gap.iter().fold(0.0f64, |a, g| a.max(g.abs()));
                if worst > tol {
                    return Err(Error::Validation(format!("parity residual {worst:e} exceeds {tol:e}")));
                }
                writeln!(out, "call curve ok, parity residual {worst:e}")?;
            }
        }
    }
    Ok(())
}

fn check_curve(curve: &PriceCurve, measure: Option<&crate::Measure>, tol: f64) -> Result<()> {
    let mut v = curve.shape_violations(tol);
    if let Some(m) = measure {
        v.extend(curve.measure_violations(m, tol)?);
    }
    match v.into_iter().next() {
        Some(msg) => Err(Error::Validation(msg)),
        None => Ok(()),
    }
}
