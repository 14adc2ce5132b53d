//! Seeded synthetic samples: `u ~ U[-1, 1]`, `y = f(u)`, features
//! `Q_m(u + R·ε)` with `ε ~ U[-1, 1]` drawn once per observation.

use std::fmt;
use std::str::FromStr;

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::basis::BasisSpec;
use crate::moments::Dataset;
use crate::{Error, Result};

/// Recorded in output metadata so a dataset can be regenerated elsewhere.
pub const RNG_ALGORITHM: &str = "ChaCha8 (rand_chacha 0.9, seed_from_u64), uniform via 53-bit mantissa";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Target {
    Linear,
    Runge,
    Step,
}

impl Target {
    pub const ALL: [Target; 3] = [Target::Linear, Target::Runge, Target::Step];

    pub fn name(self) -> &'static str {
        match self {
            Target::Linear => "linear",
            Target::Runge => "runge",
            Target::Step => "step",
        }
    }
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Target {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Target::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| Error::UnknownTarget(s.to_string()))
    }
}

/// `x`, `1/(1+25x²)`, or the unit step with `f(0) = 0`.
pub fn target_fn(target: Target, t: f64) -> f64 {
    match target {
        Target::Linear => t,
        Target::Runge => 1.0 / (1.0 + 25.0 * t * t),
        Target::Step => {
            if t > 0.0 {
                1.0
            } else {
                0.0
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub target: Target,
    pub m: usize,
    pub noise_r: f64,
    pub basis: BasisSpec,
    pub seed: u64,
}

impl SynthSpec {
    pub fn validate(&self) -> Result<()> {
        if self.m == 0 {
            return Err(Error::InvalidParameter("sample count must be at least 1".into()));
        }
        if !(self.noise_r.is_finite() && self.noise_r >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "noise amplitude must be finite and non-negative, got {}",
                self.noise_r
            )));
        }
        Ok(())
    }
}

/// Uniform draws from a seeded ChaCha8 stream.
pub struct UniformSource {
    rng: ChaCha8Rng,
}

impl UniformSource {
    pub fn new(seed: u64) -> Self {
        UniformSource {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// `[0, 1)` from the top 53 bits.
    pub fn unit(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// `[-1, 1)`
    pub fn symmetric(&mut self) -> f64 {
        2.0 * self.unit() - 1.0
    }

    /// Index in `0..n`, `n > 0`.
    pub fn index(&mut self, n: usize) -> usize {
        ((self.unit() * n as f64) as usize).min(n - 1)
    }
}

/// Inputs `u⁽ˡ⁾` and the dataset built from them.
pub fn generate_with_inputs(spec: &SynthSpec) -> Result<(Vec<f64>, Dataset)> {
    spec.validate()?;
    let mut rng = UniformSource::new(spec.seed);
    let d = spec.basis.degree_count;
    let mut inputs = Vec::with_capacity(spec.m);
    let mut features = Vec::with_capacity(spec.m * d);
    let mut labels = Vec::with_capacity(spec.m);
    for _ in 0..spec.m {
        let u = rng.symmetric();
        let eps = rng.symmetric();
        inputs.push(u);
        labels.push(target_fn(spec.target, u));
        features.extend(spec.basis.evaluate(u + spec.noise_r * eps));
    }
    Ok((inputs, Dataset::new(d, features, labels)?))
}

pub fn generate(spec: &SynthSpec) -> Result<Dataset> {
    generate_with_inputs(spec).map(|(_, d)| d)
}
