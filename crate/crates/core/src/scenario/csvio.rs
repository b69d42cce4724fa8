//! CSV files for run logs, metrics reports and datasets.
//!
//! Floats are written in shortest round-trip exponent form so that parsing an
//! exported file gives back the exact values.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use nalgebra::{DMatrix, DVector};

use super::metrics::MetricsReport;
use super::run::{LogRow, RunLog};
use crate::error::{Error, Result};
use crate::network::TrainBatch;

const RUN_BLOCKS: [&str; 5] = ["theta", "theta_d", "e", "s", "theta_m"];
const DATASET_BLOCKS: [&str; 5] = [
    "theta_dot_r",
    "theta",
    "theta_dot",
    "theta_ddot_r",
    "theta_m",
];

fn blocks(names: &[&str], n: usize) -> Vec<String> {
    names
        .iter()
        .flat_map(|b| (1..=n).map(move |j| format!("{b}_{j}")))
        .collect()
}

fn fmt(v: f64) -> String {
    format!("{v:e}")
}

/// Run log header: `time_s`, per-joint blocks, `norm_a_hat`, optional `V`,
/// `regressor_version`.
pub fn run_header(n_joints: usize, with_lyapunov: bool) -> Vec<String> {
    let mut h = vec!["time_s".to_string()];
    h.extend(blocks(&RUN_BLOCKS, n_joints));
    h.push("norm_a_hat".into());
    if with_lyapunov {
        h.push("V".into());
    }
    h.push("regressor_version".into());
    h
}

pub fn write_run_log<W: Write>(w: W, log: &RunLog) -> Result<()> {
    let with_v = log.has_lyapunov();
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(run_header(log.n_joints, with_v))?;
    for row in &log.rows {
        let mut rec = vec![fmt(row.time)];
        for block in [&row.theta, &row.theta_d, &row.e, &row.s, &row.theta_m] {
            rec.extend(block.iter().map(|v| fmt(*v)));
        }
        rec.push(fmt(row.norm_a_hat));
        if with_v {
            rec.push(fmt(row.lyapunov.unwrap_or(f64::NAN)));
        }
        rec.push(row.regressor_version.to_string());
        wr.write_record(rec)?;
    }
    wr.flush()?;
    Ok(())
}

fn parse_f64(s: &str, line: usize) -> Result<f64> {
    s.trim()
        .parse()
        .map_err(|_| Error::Parse(format!("line {line}: bad number `{s}`")))
}

pub fn read_run_log<R: Read>(r: R) -> Result<RunLog> {
    let mut rd = csv::Reader::from_reader(r);
    let header: Vec<String> = rd.headers()?.iter().map(str::to_string).collect();
    let n = header
        .iter()
        .filter(|h| {
            h.strip_prefix("theta_")
                .is_some_and(|j| j.parse::<usize>().is_ok())
        })
        .count();
    if n == 0 {
        return Err(Error::Parse("run log header has no joint columns".into()));
    }
    let with_v = header.iter().any(|h| h == "V");
    if header != run_header(n, with_v) {
        return Err(Error::Parse(format!(
            "unexpected run log header: {}",
            header.join(",")
        )));
    }
    let mut log = RunLog::new(n);
    for (i, rec) in rd.records().enumerate() {
        let rec = rec?;
        let line = i + 2;
        let mut vals = Vec::with_capacity(rec.len());
        for field in rec.iter().take(rec.len() - 1) {
            vals.push(parse_f64(field, line)?);
        }
        let version: u64 = rec[rec.len() - 1]
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("line {line}: bad regressor version")))?;
        let block = |b: usize| DVector::from_column_slice(&vals[1 + b * n..1 + (b + 1) * n]);
        log.rows.push(LogRow {
            time: vals[0],
            theta: block(0),
            theta_d: block(1),
            e: block(2),
            s: block(3),
            theta_m: block(4),
            norm_a_hat: vals[1 + 5 * n],
            lyapunov: with_v.then(|| vals[2 + 5 * n]),
            regressor_version: version,
        });
    }
    Ok(log)
}

pub fn save_run_log(path: impl AsRef<Path>, log: &RunLog) -> Result<()> {
    write_run_log(File::create(path)?, log)
}

pub fn load_run_log(path: impl AsRef<Path>) -> Result<RunLog> {
    read_run_log(File::open(path)?)
}

/// One row per joint plus an `all` row; columns `l2`, `linf`, then one
/// Frobenius column per window.
pub fn write_metrics<W: Write>(w: W, report: &MetricsReport) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    let mut header = vec!["joint".to_string(), "l2".into(), "linf".into()];
    header.extend(
        report
            .windows
            .iter()
            .map(|m| format!("frob_{}", m.window.label())),
    );
    wr.write_record(&header)?;
    for j in 0..report.n_joints {
        let mut rec = vec![(j + 1).to_string(), fmt(report.l2[j]), fmt(report.linf[j])];
        rec.extend(report.windows.iter().map(|m| fmt(m.joint_frobenius[j])));
        wr.write_record(rec)?;
    }
    let l2_all = report.l2.iter().map(|v| v * v).sum::<f64>().sqrt();
    let linf_all = report.linf.iter().copied().fold(0.0, f64::max);
    let mut rec = vec!["all".to_string(), fmt(l2_all), fmt(linf_all)];
    rec.extend(report.windows.iter().map(|m| fmt(m.frobenius)));
    wr.write_record(rec)?;
    wr.flush()?;
    Ok(())
}

pub fn save_metrics(path: impl AsRef<Path>, report: &MetricsReport) -> Result<()> {
    write_metrics(File::create(path)?, report)
}

pub fn dataset_header(n_joints: usize) -> Vec<String> {
    blocks(&DATASET_BLOCKS, n_joints)
}

/// Inputs `(θ̇, θ, θ̇, θ̈)` followed by the target `θ_m`.
pub fn write_dataset<W: Write>(w: W, batch: &TrainBatch) -> Result<()> {
    let n = batch.n_joints();
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(dataset_header(n))?;
    for r in 0..batch.len() {
        let rec: Vec<String> = batch
            .inputs
            .row(r)
            .iter()
            .chain(batch.targets.row(r).iter())
            .map(|v| fmt(*v))
            .collect();
        wr.write_record(rec)?;
    }
    wr.flush()?;
    Ok(())
}

pub fn read_dataset<R: Read>(r: R) -> Result<TrainBatch> {
    let mut rd = csv::Reader::from_reader(r);
    let width = rd.headers()?.len();
    if width == 0 || width % 5 != 0 {
        return Err(Error::Parse(format!("dataset has {width} columns")));
    }
    let n = width / 5;
    let header: Vec<String> = rd.headers()?.iter().map(str::to_string).collect();
    if header != dataset_header(n) {
        return Err(Error::Parse("unexpected dataset header".into()));
    }
    let mut data = Vec::new();
    for (i, rec) in rd.records().enumerate() {
        for field in rec?.iter() {
            data.push(parse_f64(field, i + 2)?);
        }
    }
    let rows = data.len() / width;
    let all = DMatrix::from_row_slice(rows, width, &data);
    TrainBatch::new(
        all.columns(0, 4 * n).into_owned(),
        all.columns(4 * n, n).into_owned(),
    )
}

pub fn save_dataset(path: impl AsRef<Path>, batch: &TrainBatch) -> Result<()> {
    write_dataset(File::create(path)?, batch)
}

pub fn load_dataset(path: impl AsRef<Path>) -> Result<TrainBatch> {
    read_dataset(File::open(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_schema() {
        assert_eq!(
            run_header(2, true).join(","),
            "time_s,theta_1,theta_2,theta_d_1,theta_d_2,e_1,e_2,s_1,s_2,theta_m_1,theta_m_2,norm_a_hat,V,regressor_version"
        );
        assert_eq!(
            dataset_header(1).join(","),
            "theta_dot_r_1,theta_1,theta_dot_1,theta_ddot_r_1,theta_m_1"
        );
    }

    #[test]
    fn empty_log_is_header_only() {
        let mut buf = Vec::new();
        write_run_log(&mut buf, &RunLog::new(1)).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text,
            "time_s,theta_1,theta_d_1,e_1,s_1,theta_m_1,norm_a_hat,regressor_version\n"
        );
        assert!(read_run_log(text.as_bytes()).unwrap().is_empty());
    }
}
