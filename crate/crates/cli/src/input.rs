use std::path::PathBuf;

use clap::Args;
use phaselock::frequencies::{center, parse_frequencies, read_frequency_file, sample_normal};
use phaselock::{Error, FrequencySpec};

use crate::Failure;

/// Frequency source. Exactly one must be given.
#[derive(Args, Debug, Clone, Default)]
pub struct InputArgs {
    /// Frequency file: one value per line (`#` comments) or a JSON array
    #[arg(long, value_name = "PATH")]
    pub input: Option<PathBuf>,

    /// Inline frequencies, comma separated
    #[arg(long, value_name = "LIST", allow_hyphen_values = true)]
    pub omega: Option<String>,

    /// Seeded normal draw, e.g. `--sample n=20 seed=7 [mean=0 std=1]`
    #[arg(long, value_name = "KEY=VALUE", num_args = 1..)]
    pub sample: Option<Vec<String>>,
}

impl InputArgs {
    pub fn is_empty(&self) -> bool {
        self.input.is_none() && self.omega.is_none() && self.sample.is_none()
    }

    pub fn resolve(&self) -> Result<FrequencySpec, Failure> {
        let given = [self.input.is_some(), self.omega.is_some(), self.sample.is_some()]
            .iter()
            .filter(|&&b| b)
            .count();
        if given != 1 {
            return Err(Failure::input(
                "exactly one of --input, --omega or --sample is required",
            ));
        }
        if let Some(path) = &self.input {
            let values = read_frequency_file(path).map_err(|e| match e {
                Error::Parse { line, message } => {
                    Failure::input(format!("{}:{}: {}", path.display(), line, message))
                }
                other => Failure::from(other),
            })?;
            return Ok(center(&values)?);
        }
        if let Some(list) = &self.omega {
            let text = list.split(',').map(str::trim).collect::<Vec<_>>().join("\n");
            let values = parse_frequencies(&text).map_err(|e| match e {
                Error::Parse { line, message } => {
                    Failure::input(format!("--omega entry {}: {}", line, message))
                }
                other => Failure::from(other),
            })?;
            return Ok(center(&values)?);
        }
        let pairs = self.sample.as_deref().unwrap_or_default();
        let sample = SampleSpec::parse(pairs)?;
        Ok(sample_normal(sample.n, sample.mean, sample.std, sample.seed)?)
    }
}

#[derive(Debug, PartialEq)]
struct SampleSpec {
    n: usize,
    seed: u64,
    mean: f64,
    std: f64,
}

impl SampleSpec {
    fn parse(pairs: &[String]) -> Result<Self, Failure> {
        let mut n = None;
        let mut spec = SampleSpec { n: 0, seed: 0, mean: 0.0, std: 1.0 };
        for pair in pairs {
            let (key, value) = pair
                .split_once('=')
                .ok_or_else(|| Failure::input(format!("--sample: expected KEY=VALUE, got {:?}", pair)))?;
            let bad = |what: &str| Failure::input(format!("--sample {}: {:?} is not {}", key, value, what));
            match key {
                "n" => n = Some(value.parse().map_err(|_| bad("a count"))?),
                "seed" => spec.seed = value.parse().map_err(|_| bad("an unsigned integer"))?,
                "mean" => spec.mean = value.parse().map_err(|_| bad("a number"))?,
                "std" => spec.std = value.parse().map_err(|_| bad("a number"))?,
                "dist" if value == "normal" => {}
                "dist" => return Err(bad("a supported distribution (normal)")),
                _ => return Err(Failure::input(format!("--sample: unknown key {:?}", key))),
            }
        }
        spec.n = n.ok_or_else(|| Failure::input("--sample requires n=<count>"))?;
        Ok(spec)
    }
}

/// `--k-grid`: either `a,b,c` or `lo:hi:count` (inclusive, evenly spaced).
pub fn parse_k_grid(text: &str) -> Result<Vec<f64>, Failure> {
    let bad = || Failure::input(format!("--k-grid: cannot parse {:?}", text));
    let grid: Vec<f64> = if let [lo, hi, count] = text.split(':').collect::<Vec<_>>()[..] {
        let lo: f64 = lo.trim().parse().map_err(|_| bad())?;
        let hi: f64 = hi.trim().parse().map_err(|_| bad())?;
        let count: usize = count.trim().parse().map_err(|_| bad())?;
        match count {
            0 => return Err(bad()),
            1 => vec![lo],
            _ => (0..count)
                .map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64)
                .collect(),
        }
    } else {
        text.split(',')
            .map(|s| s.trim().parse::<f64>().map_err(|_| bad()))
            .collect::<Result<_, _>>()?
    };
    if grid.is_empty() {
        return Err(bad());
    }
    Ok(grid)
}

/// Comma-separated phase list for `simulate --init`.
pub fn parse_phases(text: &str) -> Result<Vec<f64>, Failure> {
    text.split(',')
        .enumerate()
        .map(|(i, s)| {
            s.trim()
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Failure::input(format!("--init entry {}: {:?} is not a number", i + 1, s)))
        })
        .collect()
}
