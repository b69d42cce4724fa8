//! Excitation and reference trajectories.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::control::DesiredSample;
use crate::error::{Error, Result};

/// Schroeder phase of harmonic `k` (1-based) out of `n_harmonics`.
pub fn schroeder_phase(k: usize, n_harmonics: usize) -> f64 {
    -PI * (k * (k - 1)) as f64 / n_harmonics as f64
}

/// Schroeder-phase multisine `A·Σ cos(2π k f₀ t + φ_k)` sampled at `rate`,
/// scaled so the largest sample magnitude equals `amplitude`.
pub fn gen_multisine(
    n_harmonics: usize,
    base_freq: f64,
    amplitude: f64,
    duration: f64,
    rate: f64,
) -> Result<Vec<f64>> {
    if n_harmonics == 0 {
        return Err(Error::Config(
            "multisine needs at least one harmonic".into(),
        ));
    }
    if !(base_freq > 0.0 && rate > 0.0 && duration > 0.0) {
        return Err(Error::Config(
            "multisine frequency, rate and duration must be > 0".into(),
        ));
    }
    if rate <= 2.0 * n_harmonics as f64 * base_freq {
        return Err(Error::Config(format!(
            "sample rate {rate} Hz violates Nyquist for {n_harmonics} harmonics of {base_freq} Hz"
        )));
    }
    let len = (duration * rate).round() as usize;
    let raw: Vec<f64> = (0..len)
        .map(|i| {
            let t = i as f64 / rate;
            (1..=n_harmonics)
                .map(|k| {
                    (2.0 * PI * k as f64 * base_freq * t + schroeder_phase(k, n_harmonics)).cos()
                })
                .sum()
        })
        .collect();
    let peak = raw.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if peak == 0.0 {
        return Ok(raw);
    }
    Ok(raw.into_iter().map(|v| amplitude * v / peak).collect())
}

/// Peak magnitude over RMS.
pub fn crest_factor(samples: &[f64]) -> f64 {
    let peak = samples.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let rms = (samples.iter().map(|v| v * v).sum::<f64>() / samples.len() as f64).sqrt();
    peak / rms
}

/// `offset + amplitude·sin(2π·frequency·t + phase)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SinusoidSpec {
    pub amplitude: f64,
    pub frequency: f64,
    #[serde(default)]
    pub phase: f64,
    #[serde(default)]
    pub offset: f64,
}

impl SinusoidSpec {
    pub fn new(amplitude: f64, frequency: f64, phase: f64, offset: f64) -> Self {
        SinusoidSpec {
            amplitude,
            frequency,
            phase,
            offset,
        }
    }

    /// Position, velocity and acceleration at `t`.
    pub fn eval(&self, t: f64) -> (f64, f64, f64) {
        let w = 2.0 * PI * self.frequency;
        let arg = w * t + self.phase;
        (
            self.offset + self.amplitude * arg.sin(),
            self.amplitude * w * arg.cos(),
            -self.amplitude * w * w * arg.sin(),
        )
    }
}

/// Analytic per-joint sinusoidal trajectory.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SinusoidTrajectory {
    pub joints: Vec<SinusoidSpec>,
}

impl SinusoidTrajectory {
    pub fn new(joints: Vec<SinusoidSpec>) -> Self {
        SinusoidTrajectory { joints }
    }

    pub fn n_joints(&self) -> usize {
        self.joints.len()
    }

    pub fn sample(&self, t: f64) -> DesiredSample {
        let n = self.joints.len();
        let mut d = DesiredSample {
            position: DVector::zeros(n),
            velocity: DVector::zeros(n),
            acceleration: DVector::zeros(n),
        };
        for (i, j) in self.joints.iter().enumerate() {
            let (p, v, a) = j.eval(t);
            d.position[i] = p;
            d.velocity[i] = v;
            d.acceleration[i] = a;
        }
        d
    }
}

/// Seeded family of random sinusoids inside a joint-limit box.
///
/// Each trajectory is an `n_joints × length` matrix sampled at `rate`. The
/// amplitude of joint `j` is drawn from `amplitude_range` clipped to the half
/// width of `limits[j]`, and the offset keeps every sample inside the box.
#[allow(clippy::too_many_arguments)]
pub fn gen_sinusoid_family(
    count: usize,
    amplitude_range: (f64, f64),
    freq_range: (f64, f64),
    n_joints: usize,
    length: usize,
    rate: f64,
    limits: &[(f64, f64)],
    seed: u64,
) -> Result<Vec<DMatrix<f64>>> {
    let (a_lo, a_hi) = amplitude_range;
    let (f_lo, f_hi) = freq_range;
    if !(a_lo > 0.0 && a_hi >= a_lo && f_lo > 0.0 && f_hi >= f_lo && rate > 0.0) {
        return Err(Error::Config(
            "amplitude and frequency ranges must be positive".into(),
        ));
    }
    if limits.len() != n_joints {
        return Err(Error::Dimension {
            what: "joint limits",
            expected: n_joints,
            got: limits.len(),
        });
    }
    for (j, (lo, hi)) in limits.iter().enumerate() {
        if !(hi > lo) {
            return Err(Error::Config(format!("joint {j} limit box is empty")));
        }
        if a_lo > 0.5 * (hi - lo) {
            return Err(Error::Config(format!(
                "minimum amplitude {a_lo} does not fit joint {j} limits [{lo}, {hi}]"
            )));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draw = |rng: &mut ChaCha8Rng, lo: f64, hi: f64| {
        if hi > lo {
            rng.random_range(lo..hi)
        } else {
            lo
        }
    };
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let specs: Vec<SinusoidSpec> = limits
            .iter()
            .map(|(lo, hi)| {
                let amp = draw(&mut rng, a_lo, a_hi.min(0.5 * (hi - lo)));
                let freq = draw(&mut rng, f_lo, f_hi);
                let phase = rng.random_range(0.0..2.0 * PI);
                let offset = draw(&mut rng, lo + amp, hi - amp);
                SinusoidSpec::new(amp, freq, phase, offset)
            })
            .collect();
        let m = DMatrix::from_fn(n_joints, length, |j, i| {
            let (lo, hi) = limits[j];
            specs[j].eval(i as f64 / rate).0.clamp(lo, hi)
        });
        out.push(m);
    }
    Ok(out)
}
