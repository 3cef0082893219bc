//! CSV and JSON artifacts.
//!
//! * trace: `t,delta,x_1..x_d`
//! * tours: `k,tau,z_1..z_d`
//! * design: `x_1..x_p,y`
//! * regeneration records: `i,eta_i,bell`
//!
//! Floats are written in shortest round-trip form, so equal inputs give
//! byte-identical files.

use std::io::{Read, Write};

use nalgebra::DMatrix;

use crate::chain::{SplitChainTrace, Tour, TourSequence};
use crate::error::{Error, Result};
use crate::probit::RegenProbRecord;

fn csv_err(e: csv::Error) -> Error {
    let line = e.position().map(|p| p.line() as usize).unwrap_or(0);
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        kind => Error::Parse {
            line,
            msg: format!("{kind:?}"),
        },
    }
}

fn parse_field<T: std::str::FromStr>(rec: &csv::StringRecord, i: usize, what: &str) -> Result<T> {
    let line = rec.position().map(|p| p.line() as usize).unwrap_or(0);
    let raw = rec.get(i).ok_or_else(|| Error::Parse {
        line,
        msg: format!("missing column {what}"),
    })?;
    raw.trim().parse().map_err(|_| Error::Parse {
        line,
        msg: format!("cannot parse {what} from {raw:?}"),
    })
}

fn check_header(headers: &csv::StringRecord, fixed: &[&str], prefix: &str) -> Result<usize> {
    let bad = |msg: String| Error::Parse { line: 1, msg };
    if headers.len() <= fixed.len() && !(fixed.len() == headers.len() && prefix.is_empty()) {
        return Err(bad(format!("expected columns {fixed:?} followed by {prefix}1..")));
    }
    for (i, name) in fixed.iter().enumerate() {
        if headers.get(i).map(str::trim) != Some(*name) {
            return Err(bad(format!("column {} should be {name:?}", i + 1)));
        }
    }
    let d = headers.len() - fixed.len();
    for j in 0..d {
        let want = format!("{prefix}{}", j + 1);
        if headers.get(fixed.len() + j).map(str::trim) != Some(want.as_str()) {
            return Err(bad(format!("column {} should be {want:?}", fixed.len() + j + 1)));
        }
    }
    Ok(d)
}

fn header_row(fixed: &[&str], prefix: &str, d: usize) -> Vec<String> {
    fixed
        .iter()
        .map(|s| s.to_string())
        .chain((1..=d).map(|j| format!("{prefix}{j}")))
        .collect()
}

pub fn write_trace_csv<W: Write>(trace: &SplitChainTrace, w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(header_row(&["t", "delta"], "x_", trace.dim()))
        .map_err(csv_err)?;
    for (i, (x, &bell)) in trace.states().zip(trace.bells()).enumerate() {
        let mut row = vec![(i + 1).to_string(), u8::from(bell).to_string()];
        row.extend(x.iter().map(|v| v.to_string()));
        wr.write_record(&row).map_err(csv_err)?;
    }
    wr.flush()?;
    Ok(())
}

/// Reads a trace; `t` must run `1, 2, ...` and `delta` must be 0 or 1.
pub fn read_trace_csv<R: Read>(r: R, lag: usize, seed: u64) -> Result<SplitChainTrace> {
    let mut rd = csv::Reader::from_reader(r);
    let d = check_header(rd.headers().map_err(csv_err)?, &["t", "delta"], "x_")?;
    let mut states = Vec::new();
    let mut bells = Vec::new();
    for (i, rec) in rd.records().enumerate() {
        let rec = rec.map_err(csv_err)?;
        let line = rec.position().map(|p| p.line() as usize).unwrap_or(i + 2);
        let t: usize = parse_field(&rec, 0, "t")?;
        if t != i + 1 {
            return Err(Error::Parse {
                line,
                msg: format!("t = {t}, expected {}", i + 1),
            });
        }
        let delta: u8 = parse_field(&rec, 1, "delta")?;
        if delta > 1 {
            return Err(Error::Parse {
                line,
                msg: format!("delta = {delta} is not binary"),
            });
        }
        bells.push(delta == 1);
        for j in 0..d {
            states.push(parse_field::<f64>(&rec, 2 + j, "state")?);
        }
    }
    SplitChainTrace::from_parts(states, bells, d, lag, seed)
}

pub fn write_tours_csv<W: Write>(tours: &TourSequence, w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(header_row(&["k", "tau"], "z_", tours.dim))
        .map_err(csv_err)?;
    for (k, t) in tours.tours.iter().enumerate() {
        let mut row = vec![(k + 1).to_string(), t.tau.to_string()];
        row.extend(t.z.iter().map(|v| v.to_string()));
        wr.write_record(&row).map_err(csv_err)?;
    }
    wr.flush()?;
    Ok(())
}

pub fn read_tours_csv<R: Read>(r: R) -> Result<TourSequence> {
    let mut rd = csv::Reader::from_reader(r);
    let d = check_header(rd.headers().map_err(csv_err)?, &["k", "tau"], "z_")?;
    let mut tours = Vec::new();
    for (i, rec) in rd.records().enumerate() {
        let rec = rec.map_err(csv_err)?;
        let line = rec.position().map(|p| p.line() as usize).unwrap_or(i + 2);
        let k: usize = parse_field(&rec, 0, "k")?;
        if k != i + 1 {
            return Err(Error::Parse {
                line,
                msg: format!("k = {k}, expected {}", i + 1),
            });
        }
        let tau: usize = parse_field(&rec, 1, "tau")?;
        if tau == 0 {
            return Err(Error::Parse {
                line,
                msg: "tau must be positive".into(),
            });
        }
        let z = (0..d)
            .map(|j| parse_field::<f64>(&rec, 2 + j, "z"))
            .collect::<Result<Vec<_>>>()?;
        if z.iter().any(|v| !v.is_finite()) {
            return Err(Error::Parse {
                line,
                msg: "non-finite tour sum".into(),
            });
        }
        tours.push(Tour { z, tau });
    }
    TourSequence::new(d, tours, 0)
}

pub fn write_design_csv<W: Write>(x: &DMatrix<f64>, y: &[bool], w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    let mut header = header_row(&[], "x_", x.ncols());
    header.push("y".into());
    wr.write_record(&header).map_err(csv_err)?;
    for (i, &yi) in y.iter().enumerate() {
        let mut row: Vec<String> = x.row(i).iter().map(|v| v.to_string()).collect();
        row.push(u8::from(yi).to_string());
        wr.write_record(&row).map_err(csv_err)?;
    }
    wr.flush()?;
    Ok(())
}

/// Reads `x_1..x_p,y` with binary `y`.
pub fn read_design_csv<R: Read>(r: R) -> Result<(DMatrix<f64>, Vec<bool>)> {
    let mut rd = csv::Reader::from_reader(r);
    let headers = rd.headers().map_err(csv_err)?.clone();
    let p = headers.len().saturating_sub(1);
    if p == 0 || headers.get(p).map(str::trim) != Some("y") {
        return Err(Error::Parse {
            line: 1,
            msg: "expected columns x_1..x_p,y".into(),
        });
    }
    let mut covariates = headers.clone();
    covariates.truncate(p);
    check_header(&covariates, &[], "x_")?;
    let mut vals = Vec::new();
    let mut y = Vec::new();
    for rec in rd.records() {
        let rec = rec.map_err(csv_err)?;
        for j in 0..p {
            vals.push(parse_field::<f64>(&rec, j, "covariate")?);
        }
        let yi: u8 = parse_field(&rec, p, "y")?;
        if yi > 1 {
            return Err(Error::Parse {
                line: rec.position().map(|p| p.line() as usize).unwrap_or(0),
                msg: format!("y = {yi} is not binary"),
            });
        }
        y.push(yi == 1);
    }
    Ok((DMatrix::from_row_slice(y.len(), p, &vals), y))
}

pub fn write_records_csv<W: Write>(records: &[RegenProbRecord], w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(["i", "eta_i", "bell"]).map_err(csv_err)?;
    for r in records {
        wr.write_record([r.step.to_string(), r.eta.to_string(), u8::from(r.bell).to_string()])
            .map_err(csv_err)?;
    }
    wr.flush()?;
    Ok(())
}
