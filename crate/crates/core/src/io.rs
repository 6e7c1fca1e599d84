//! File formats: curve CSV with JSON sidecar, CDF and table CSVs, and the
//! JSON measure, payoff and return-density specs.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::curves::{PriceCurve, Role};
use crate::error::{Error, Result};
use crate::measure::Measure;
use crate::portfolio::{OptionKind, Portfolio};
use crate::reconstruct::CdfEstimate;
use crate::replication::PiecewiseDcPayoff;
use crate::returns::ReturnDensitySpec;

/// `{ "role": "put"|"call", "f_infinity": ..., "mean": ... }`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveMeta {
    pub role: Role,
    #[serde(default)]
    pub f_infinity: Option<f64>,
    #[serde(default)]
    pub mean: Option<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
struct CurveRow {
    strike: f64,
    price: f64,
}

/// `p.csv` ↦ `p.meta.json`
pub fn sidecar_path(csv: &Path) -> PathBuf {
    let stem = csv.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    csv.with_file_name(format!("{stem}.meta.json"))
}

fn read_string(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn expect_headers(rdr: &mut csv::Reader<fs::File>, want: &[&str], path: &Path) -> Result<()> {
    let got: Vec<String> = rdr.headers()?.iter().map(|h| h.trim().to_string()).collect();
    if got != want {
        return Err(Error::Parse(format!(
            "{}: expected header {:?}, found {:?}",
            path.display(),
            want.join(","),
            got.join(",")
        )));
    }
    Ok(())
}

fn open_csv(path: &Path) -> Result<csv::Reader<fs::File>> {
    let file = fs::File::open(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    Ok(csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(file))
}

/// Reads a curve CSV. Metadata comes from `meta` if given, else from the
/// sidecar next to the CSV if present. A sidecar role must match `role`.
pub fn read_curve(path: &Path, role: Role, meta: Option<&Path>) -> Result<PriceCurve> {
    let mut rdr = open_csv(path)?;
    expect_headers(&mut rdr, &["strike", "price"], path)?;
    let mut strikes = Vec::new();
    let mut values = Vec::new();
    for row in rdr.deserialize() {
        let row: CurveRow = row?;
        strikes.push(row.strike);
        values.push(row.price);
    }
    let sidecar = sidecar_path(path);
    let meta_path = meta.map(Path::to_path_buf).or_else(|| sidecar.exists().then_some(sidecar));
    let meta = match meta_path {
        Some(p) => Some(serde_json::from_str::<CurveMeta>(&read_string(&p)?)?),
        None => None,
    };
    if let Some(m) = &meta {
        if m.role != role {
            return Err(Error::Validation(format!(
                "metadata declares a {} curve where a {role} curve is expected",
                m.role
            )));
        }
    }
    let curve = PriceCurve::from_grid(role, strikes, values)?;
    Ok(match meta {
        Some(m) => curve.with_metadata(m.f_infinity, m.mean),
        None => curve,
    })
}

/// Writes the grid values and, when any metadata is known, the sidecar.
pub fn write_curve(path: &Path, curve: &PriceCurve) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for (&strike, &price) in curve.strikes().iter().zip(curve.values()) {
        w.serialize(CurveRow { strike, price })?;
    }
    w.flush()?;
    let meta = CurveMeta {
        role: curve.role,
        f_infinity: curve.f_infinity,
        mean: curve.mean,
    };
    fs::write(sidecar_path(path), serde_json::to_string_pretty(&meta)?)?;
    Ok(())
}

pub fn write_cdf(path: &Path, est: &CdfEstimate) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["strike", "f_hat", "bound"])?;
    for i in 0..est.len() {
        w.write_record(&[
            est.strikes[i].to_string(),
            est.f_hat[i].to_string(),
            est.bound[i].to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_cdf(path: &Path) -> Result<CdfEstimate> {
    let mut rdr = open_csv(path)?;
    expect_headers(&mut rdr, &["strike", "f_hat", "bound"], path)?;
    let mut est = CdfEstimate {
        strikes: Vec::new(),
        f_hat: Vec::new(),
        bound: Vec::new(),
    };
    for row in rdr.deserialize() {
        let (k, f, b): (f64, f64, f64) = row?;
        est.strikes.push(k);
        est.f_hat.push(f);
        est.bound.push(b);
    }
    Ok(est)
}

/// `kind,strike,quantity` with `bond` and `forward` rows carrying no strike.
pub fn write_portfolio(path: &Path, p: &Portfolio) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["kind", "strike", "quantity"])?;
    if p.bond_units != 0.0 {
        w.write_record(&["bond".to_string(), String::new(), p.bond_units.to_string()])?;
    }
    if p.forward_units != 0.0 {
        w.write_record(&["forward".to_string(), String::new(), p.forward_units.to_string()])?;
    }
    for l in &p.legs {
        let kind = match l.kind {
            OptionKind::Put => "put",
            OptionKind::Call => "call",
        };
        w.write_record(&[kind.to_string(), l.strike.to_string(), l.quantity.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// Nodes `x,g` of a piecewise-linear payoff.
pub fn read_nodes(path: &Path) -> Result<Vec<(f64, f64)>> {
    let mut rdr = open_csv(path)?;
    expect_headers(&mut rdr, &["x", "g"], path)?;
    rdr.deserialize()
        .map(|r| r.map_err(Error::from))
        .collect()
}

pub fn read_measure(path: &Path) -> Result<Measure> {
    Measure::from_json(&read_string(path)?)
}

pub fn read_payoff(path: &Path) -> Result<PiecewiseDcPayoff> {
    PiecewiseDcPayoff::from_json(&read_string(path)?)
}

pub fn read_return_density(path: &Path) -> Result<ReturnDensitySpec> {
    ReturnDensitySpec::from_json(&read_string(path)?)
}

/// Writes a header row and numeric rows.
pub fn write_table(path: &Path, header: &[&str], rows: &[Vec<f64>]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(header)?;
    for r in rows {
        w.write_record(r.iter().map(f64::to_string))?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curves::put_curve;
    use crate::fixtures;

    #[test]
    fn curve_round_trip_with_sidecar() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.csv");
        let c = put_curve(&fixtures::two_atoms(), &[0.0, 1.0, 2.0, 3.0]).unwrap();
        write_curve(&path, &c).unwrap();
        assert!(dir.path().join("p.meta.json").exists());
        let back = read_curve(&path, Role::Put, None).unwrap();
        assert_eq!(back.strikes(), c.strikes());
        assert_eq!(back.values(), c.values());
        assert_eq!(back.f_infinity, Some(0.9));
        assert!(matches!(read_curve(&path, Role::Call, None), Err(Error::Validation(_))));
    }

    #[test]
    fn bad_header_is_a_parse_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.csv");
        fs::write(&path, "k,value\n1,2\n").unwrap();
        let e = read_curve(&path, Role::Call, None).unwrap_err();
        assert!(matches!(e, Error::Parse(_)));
        assert_eq!(e.exit_code(), 2);
    }

    #[test]
    fn missing_file_is_io() {
        let e = read_curve(Path::new("/nonexistent/x.csv"), Role::Put, None).unwrap_err();
        assert_eq!(e.exit_code(), 1);
    }

    #[test]
    fn cdf_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("f.csv");
        let est = CdfEstimate {
            strikes: vec![0.0, 1.0],
            f_hat: vec![0.1, 0.5],
            bound: vec![0.1, 0.4],
        };
        write_cdf(&path, &est).unwrap();
        assert_eq!(read_cdf(&path).unwrap(), est);
    }
}
