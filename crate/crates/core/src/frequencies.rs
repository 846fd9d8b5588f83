//! Natural frequencies and their projection onto the zero-mean subspace.
//!
//! Centering subtracts the arithmetic mean; the N×N projection matrix is never
//! formed. Random draws use ChaCha8 seeded with `seed_from_u64`, so a seed
//! reproduces the same vector on every platform and build.

use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::format::g17;

/// A validated frequency vector together with its centered form.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrequencySpec {
    omega: Vec<f64>,
    centered: Vec<f64>,
    inf_norm: f64,
    sigma: f64,
}

impl FrequencySpec {
    /// Raw natural frequencies ω as given.
    pub fn omega(&self) -> &[f64] {
        &self.omega
    }

    /// Centered frequencies Ω = ω − ⟨ω⟩.
    pub fn centered(&self) -> &[f64] {
        &self.centered
    }

    pub fn n(&self) -> usize {
        self.omega.len()
    }

    /// ‖Ω‖∞.
    pub fn inf_norm(&self) -> f64 {
        self.inf_norm
    }

    /// Population standard deviation of ω, i.e. √((1/N)ΣΩ_j²).
    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// True when all centered frequencies vanish (identical oscillators).
    pub fn is_homogeneous(&self) -> bool {
        self.inf_norm == 0.0
    }
}

/// Centers `omega` and computes its summary norms.
pub fn center(omega: &[f64]) -> Result<FrequencySpec> {
    if omega.len() < 2 {
        return Err(Error::Dimension(format!(
            "need at least 2 frequencies, got {}",
            omega.len()
        )));
    }
    if let Some(i) = omega.iter().position(|w| !w.is_finite()) {
        return Err(Error::Validation(format!(
            "frequency {} is not finite ({})",
            i, omega[i]
        )));
    }
    let n = omega.len() as f64;
    let mean = omega.iter().sum::<f64>() / n;
    let centered: Vec<f64> = omega.iter().map(|w| w - mean).collect();
    let inf_norm = centered.iter().fold(0.0_f64, |m, w| m.max(w.abs()));
    let sigma = (centered.iter().map(|w| w * w).sum::<f64>() / n).sqrt();
    Ok(FrequencySpec {
        omega: omega.to_vec(),
        centered,
        inf_norm,
        sigma,
    })
}

/// Draws `n` frequencies from N(mean, std²), sorts them ascending and centers them.
pub fn sample_normal(n: usize, mean: f64, std: f64, seed: u64) -> Result<FrequencySpec> {
    if n < 2 {
        return Err(Error::Dimension(format!("need at least 2 oscillators, got {}", n)));
    }
    if !(std >= 0.0) || !std.is_finite() || !mean.is_finite() {
        return Err(Error::Parameter(format!(
            "normal distribution needs finite mean and std >= 0, got mean={} std={}",
            mean, std
        )));
    }
    let normal = Normal::new(mean, std).map_err(|e| Error::Parameter(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut omega: Vec<f64> = (0..n).map(|_| normal.sample(&mut rng)).collect();
    // stable sort: ties keep draw order
    omega.sort_by(f64::total_cmp);
    center(&omega)
}

/// Parses a frequency list: one decimal per line with `#` comments, or a JSON array.
pub fn parse_frequencies(text: &str) -> Result<Vec<f64>> {
    if text.trim_start().starts_with('[') {
        let values: Vec<f64> = serde_json::from_str(text).map_err(|e| Error::Parse {
            line: e.line(),
            message: format!("invalid JSON frequency array: {}", e),
        })?;
        return Ok(values);
    }
    let mut values = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let value: f64 = line.parse().map_err(|_| Error::Parse {
            line: idx + 1,
            message: format!("cannot parse {:?} as a number", line),
        })?;
        if !value.is_finite() {
            return Err(Error::Parse {
                line: idx + 1,
                message: format!("frequency {:?} is not finite", line),
            });
        }
        values.push(value);
    }
    Ok(values)
}

pub fn read_frequency_file(path: &Path) -> Result<Vec<f64>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Validation(format!("cannot read {}: {}", path.display(), e)))?;
    parse_frequencies(&text)
}

/// Renders frequencies in the line format, 17 significant digits each.
pub fn write_frequencies(omega: &[f64]) -> String {
    let mut out = String::new();
    for w in omega {
        out.push_str(&g17(*w));
        out.push('\n');
    }
    out
}
