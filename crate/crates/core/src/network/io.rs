//! Weight files and loss-history CSV.
//!
//! Weight files are line-oriented text:
//!
//! ```text
//! FLEXJOINT-NET 1
//! n_joints <n>
//! basis_dim <N>
//! layers <L>
//! layer <i> <in_dim> <out_dim> <tanh|relu|linear>    (L lines)
//! input_mean <4n values>
//! input_std <4n values>
//! weights <i> <out_dim·in_dim values, row-major>     (L lines)
//! bias <i> <out_dim values>                          (L lines)
//! a_hat <N values>
//! ```
//!
//! Values are written in shortest round-trip scientific notation, so a
//! save/load cycle is bit-exact.

use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::Path;

use nalgebra::{DMatrix, DVector};

use super::net::{Activation, Dense, OutputLayer, RegressorNet};
use super::train::TrainReport;
use crate::error::{Error, Result};

pub const WEIGHTS_MAGIC: &str = "FLEXJOINT-NET";
pub const WEIGHTS_VERSION: u32 = 1;

fn push_values<'a>(s: &mut String, values: impl IntoIterator<Item = &'a f64>) {
    for v in values {
        write!(s, " {v:e}").expect("write to String");
    }
    s.push('\n');
}

pub fn weights_to_string(net: &RegressorNet, out: &OutputLayer) -> String {
    let mut s = String::new();
    writeln!(s, "{WEIGHTS_MAGIC} {WEIGHTS_VERSION}").unwrap();
    writeln!(s, "n_joints {}", net.n_joints()).unwrap();
    writeln!(s, "basis_dim {}", net.basis_dim()).unwrap();
    writeln!(s, "layers {}", net.layers().len()).unwrap();
    for (i, spec) in net.layer_specs().iter().enumerate() {
        writeln!(
            s,
            "layer {i} {} {} {}",
            spec.in_dim,
            spec.out_dim,
            spec.activation.name()
        )
        .unwrap();
    }
    s.push_str("input_mean");
    push_values(&mut s, net.input_mean().iter());
    s.push_str("input_std");
    push_values(&mut s, net.input_std().iter());
    for (i, l) in net.layers().iter().enumerate() {
        write!(s, "weights {i}").unwrap();
        let w = &l.weights;
        let row_major: Vec<f64> = (0..w.nrows())
            .flat_map(|r| (0..w.ncols()).map(move |c| w[(r, c)]))
            .collect();
        push_values(&mut s, row_major.iter());
    }
    for (i, l) in net.layers().iter().enumerate() {
        write!(s, "bias {i}").unwrap();
        push_values(&mut s, l.bias.iter());
    }
    s.push_str("a_hat");
    push_values(&mut s, out.a_hat.iter());
    s
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
}

impl<'a> Lines<'a> {
    fn next_fields(&mut self, key: &str) -> Result<(usize, Vec<&'a str>)> {
        loop {
            let (no, line) = self
                .inner
                .next()
                .ok_or_else(|| Error::Parse(format!("unexpected end of file, wanted `{key}`")))?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let mut fields = line.split_whitespace();
            let head = fields.next().unwrap_or_default();
            if head != key {
                return Err(Error::Parse(format!(
                    "line {}: expected `{key}`, found `{head}`",
                    no + 1
                )));
            }
            return Ok((no + 1, fields.collect()));
        }
    }
}

fn parse_usize(line: usize, s: &str) -> Result<usize> {
    s.parse()
        .map_err(|_| Error::Parse(format!("line {line}: bad integer `{s}`")))
}

fn parse_values(line: usize, fields: &[&str], expected: usize) -> Result<Vec<f64>> {
    if fields.len() != expected {
        return Err(Error::Parse(format!(
            "line {line}: expected {expected} values, found {}",
            fields.len()
        )));
    }
    fields
        .iter()
        .map(|f| {
            f.parse::<f64>()
                .map_err(|_| Error::Parse(format!("line {line}: bad number `{f}`")))
        })
        .collect()
}

fn single(line: usize, fields: &[&str]) -> Result<usize> {
    match fields {
        [v] => parse_usize(line, v),
        _ => Err(Error::Parse(format!("line {line}: expected one value"))),
    }
}

pub fn weights_from_str(text: &str) -> Result<(RegressorNet, OutputLayer)> {
    let mut lines = Lines {
        inner: text.lines().enumerate(),
    };
    let (no, f) = lines.next_fields(WEIGHTS_MAGIC)?;
    let version = single(no, &f)?;
    if version != WEIGHTS_VERSION as usize {
        return Err(Error::Parse(format!(
            "unsupported weights version {version}"
        )));
    }
    let (no, f) = lines.next_fields("n_joints")?;
    let n_joints = single(no, &f)?;
    let (no, f) = lines.next_fields("basis_dim")?;
    let basis_dim = single(no, &f)?;
    let (no, f) = lines.next_fields("layers")?;
    let n_layers = single(no, &f)?;
    let mut specs = Vec::with_capacity(n_layers);
    for i in 0..n_layers {
        let (no, f) = lines.next_fields("layer")?;
        if f.len() != 4 || parse_usize(no, f[0])? != i {
            return Err(Error::Parse(format!("line {no}: malformed layer {i}")));
        }
        let act = Activation::from_name(f[3])
            .ok_or_else(|| Error::Parse(format!("line {no}: unknown activation `{}`", f[3])))?;
        specs.push((parse_usize(no, f[1])?, parse_usize(no, f[2])?, act));
    }
    let d = 4 * n_joints;
    let (no, f) = lines.next_fields("input_mean")?;
    let mean = parse_values(no, &f, d)?;
    let (no, f) = lines.next_fields("input_std")?;
    let std = parse_values(no, &f, d)?;
    let mut weights = Vec::with_capacity(n_layers);
    for (i, (din, dout, _)) in specs.iter().enumerate() {
        let (no, f) = lines.next_fields("weights")?;
        if f.first().map(|s| parse_usize(no, s)).transpose()? != Some(i) {
            return Err(Error::Parse(format!("line {no}: expected weights {i}")));
        }
        let vals = parse_values(no, &f[1..], din * dout)?;
        weights.push(DMatrix::from_row_slice(*dout, *din, &vals));
    }
    let mut layers = Vec::with_capacity(n_layers);
    for (i, ((_, dout, act), w)) in specs.iter().zip(weights).enumerate() {
        let (no, f) = lines.next_fields("bias")?;
        if f.first().map(|s| parse_usize(no, s)).transpose()? != Some(i) {
            return Err(Error::Parse(format!("line {no}: expected bias {i}")));
        }
        let vals = parse_values(no, &f[1..], *dout)?;
        layers.push(Dense {
            weights: w,
            bias: DVector::from_vec(vals),
            activation: *act,
        });
    }
    let (no, f) = lines.next_fields("a_hat")?;
    let a_hat = parse_values(no, &f, basis_dim)?;
    let mut net = RegressorNet::from_layers(layers, n_joints, basis_dim)?;
    net.set_normalization(DVector::from_vec(mean), DVector::from_vec(std))?;
    Ok((net, OutputLayer::new(DVector::from_vec(a_hat))))
}

pub fn save_weights(path: impl AsRef<Path>, net: &RegressorNet, out: &OutputLayer) -> Result<()> {
    fs::write(path, weights_to_string(net, out))?;
    Ok(())
}

pub fn load_weights(path: impl AsRef<Path>) -> Result<(RegressorNet, OutputLayer)> {
    weights_from_str(&fs::read_to_string(path)?)
}

/// Writes `epoch,train_mse,test_mse` rows.
pub fn write_loss_history<W: Write>(w: W, report: &TrainReport) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(["epoch", "train_mse", "test_mse"])?;
    for e in &report.history {
        wr.write_record([
            e.epoch.to_string(),
            format!("{:e}", e.train_mse),
            format!("{:e}", e.test_mse),
        ])?;
    }
    wr.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::default_architecture;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn text_round_trip_is_bit_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut net = RegressorNet::new(&default_architecture(2, 5, 3), 2, 3, &mut rng).unwrap();
        net.set_normalization(
            DVector::from_fn(8, |i, _| i as f64 * 0.37 - 1.0),
            DVector::from_fn(8, |i, _| 0.1 + i as f64 / 3.0),
        )
        .unwrap();
        let out = OutputLayer::random(3, &mut rng);
        let text = weights_to_string(&net, &out);
        assert!(text.starts_with("FLEXJOINT-NET 1\n"));
        let (net2, out2) = weights_from_str(&text).unwrap();
        assert_eq!(net, net2);
        assert_eq!(out, out2);
    }

    #[test]
    fn rejects_bad_magic_and_truncation() {
        assert!(weights_from_str("SOMETHING 1\n").is_err());
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let net = RegressorNet::new(&default_architecture(1, 3, 2), 1, 2, &mut rng).unwrap();
        let text = weights_to_string(&net, &OutputLayer::zeros(2));
        let cut: String = text.lines().take(8).collect::<Vec<_>>().join("\n");
        assert!(weights_from_str(&cut).is_err());
    }
}
