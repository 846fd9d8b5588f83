//! Fixed-step RK4 integration of the grounded model `ẋ = Ω + k f(x)`.
//!
//! After every step the state is re-projected onto the zero-mean subspace.
//! Traces record `L = R²`, the equilibrium residual `‖Ω + k f(x)‖∞` and, for
//! homogeneous runs, the logistic envelope `D(t)` that bounds `L` from above.

use std::f64::consts::PI;
use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::format::g17;
use crate::frequencies::{center, FrequencySpec};
use crate::order_field::{field_into, order_sq, remove_mean, PhaseState, ZERO_ORDER_THRESHOLD};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum InitialPhases {
    /// Uniform on [−π, π), then centered. Drawn from ChaCha8 seeded with `SimConfig::seed`.
    UniformRandom,
    /// Given phases; centered before use.
    Given(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimConfig {
    pub k: f64,
    pub t_end: f64,
    pub dt: f64,
    pub record_every: usize,
    pub seed: u64,
    pub init: InitialPhases,
}

impl SimConfig {
    /// Uniform-random start, record every step, `dt = min(0.01, 0.1/max(1, k))`.
    pub fn new(k: f64, t_end: f64) -> Self {
        SimConfig {
            k,
            t_end,
            dt: default_dt(k),
            record_every: 1,
            seed: 0,
            init: InitialPhases::UniformRandom,
        }
    }

    pub fn with_dt(mut self, dt: f64) -> Self {
        self.dt = dt;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_init(mut self, init: InitialPhases) -> Self {
        self.init = init;
        self
    }

    pub fn with_record_every(mut self, every: usize) -> Self {
        self.record_every = every;
        self
    }

    fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::Parameter(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.t_end >= self.dt) || !self.t_end.is_finite() {
            return Err(Error::Parameter(format!(
                "t_end = {} must be at least dt = {}",
                self.t_end, self.dt
            )));
        }
        if self.record_every == 0 {
            return Err(Error::Parameter("record_every must be at least 1".into()));
        }
        if !(self.k >= 0.0) || !self.k.is_finite() {
            return Err(Error::Parameter(format!("k must be finite and >= 0, got {}", self.k)));
        }
        Ok(())
    }
}

pub fn default_dt(k: f64) -> f64 {
    0.01_f64.min(0.1 / k.max(1.0))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimTrace {
    pub times: Vec<f64>,
    /// R² at each recorded time.
    pub l: Vec<f64>,
    /// Dominating function; only for homogeneous runs with L(t₀) > 0.
    pub d: Option<Vec<f64>>,
    pub residual: Vec<f64>,
    pub final_state: PhaseState,
    pub converged: bool,
}

impl SimTrace {
    /// CSV with header `t,L,D,residual`; the D column is empty when absent.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "t,L,D,residual")?;
        for i in 0..self.times.len() {
            let d = self.d.as_ref().map(|d| g17(d[i])).unwrap_or_default();
            writeln!(
                out,
                "{},{},{},{}",
                g17(self.times[i]),
                g17(self.l[i]),
                d,
                g17(self.residual[i])
            )?;
        }
        Ok(())
    }
}

struct Rk4 {
    k1: Vec<f64>,
    k2: Vec<f64>,
    k3: Vec<f64>,
    k4: Vec<f64>,
    tmp: Vec<f64>,
}

impl Rk4 {
    fn new(n: usize) -> Self {
        Rk4 {
            k1: vec![0.0; n],
            k2: vec![0.0; n],
            k3: vec![0.0; n],
            k4: vec![0.0; n],
            tmp: vec![0.0; n],
        }
    }

    fn rhs(omega: &[f64], k: f64, x: &[f64], out: &mut [f64]) {
        field_into(x, out);
        for (o, w) in out.iter_mut().zip(omega) {
            *o = w + k * *o;
        }
    }

    fn step(&mut self, omega: &[f64], k: f64, dt: f64, x: &mut [f64]) {
        let n = x.len();
        Self::rhs(omega, k, x, &mut self.k1);
        for i in 0..n {
            self.tmp[i] = x[i] + 0.5 * dt * self.k1[i];
        }
        Self::rhs(omega, k, &self.tmp, &mut self.k2);
        for i in 0..n {
            self.tmp[i] = x[i] + 0.5 * dt * self.k2[i];
        }
        Self::rhs(omega, k, &self.tmp, &mut self.k3);
        for i in 0..n {
            self.tmp[i] = x[i] + dt * self.k3[i];
        }
        Self::rhs(omega, k, &self.tmp, &mut self.k4);
        for i in 0..n {
            x[i] += dt / 6.0 * (self.k1[i] + 2.0 * self.k2[i] + 2.0 * self.k3[i] + self.k4[i]);
        }
        remove_mean(x);
    }
}

fn residual_inf(omega: &[f64], k: f64, x: &[f64], scratch: &mut [f64]) -> f64 {
    field_into(x, scratch);
    scratch
        .iter()
        .zip(omega)
        .fold(0.0_f64, |m, (f, w)| m.max((w + k * f).abs()))
}

fn initial_state(n: usize, config: &SimConfig) -> Result<Vec<f64>> {
    let mut x = match &config.init {
        InitialPhases::UniformRandom => {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            (0..n).map(|_| rng.random_range(-PI..PI)).collect()
        }
        InitialPhases::Given(x) => {
            if x.len() != n {
                return Err(Error::Dimension(format!(
                    "initial phases have {} entries, spec has {}",
                    x.len(),
                    n
                )));
            }
            if x.iter().any(|v| !v.is_finite()) {
                return Err(Error::Validation("initial phases must be finite".into()));
            }
            x.clone()
        }
    };
    remove_mean(&mut x);
    Ok(x)
}

/// Integrates from t = 0 to `t_end` and records every `record_every` steps plus the last step.
pub fn integrate(spec: &FrequencySpec, config: &SimConfig) -> Result<SimTrace> {
    config.validate()?;
    let n = spec.n();
    let omega = spec.centered();
    let k = config.k;
    let mut x = initial_state(n, config)?;
    let steps = (config.t_end / config.dt).round().max(1.0) as usize;

    let mut rk = Rk4::new(n);
    let mut scratch = vec![0.0; n];
    let mut times = Vec::new();
    let mut l = Vec::new();
    let mut residual = Vec::new();
    let mut record = |t: f64, x: &[f64], scratch: &mut [f64]| {
        times.push(t);
        l.push(order_sq(x));
        residual.push(residual_inf(omega, k, x, scratch));
    };
    record(0.0, &x, &mut scratch);

    let mut last_time = 0.0;
    for step in 1..=steps {
        rk.step(omega, k, config.dt, &mut x);
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::Divergence { last_time });
        }
        let t = step as f64 * config.dt;
        last_time = t;
        if step % config.record_every == 0 || step == steps {
            record(t, &x, &mut scratch);
        }
    }
    let final_residual = *residual.last().expect("at least one sample");
    Ok(SimTrace {
        times,
        l,
        d: None,
        residual,
        final_state: PhaseState::new(x)?,
        converged: final_residual < 1e-6 * k.max(1.0),
    })
}

/// `D(t) = 1 / (1 − e^{−2k(t−t₀)}·(L₀ − 1)/L₀)`.
pub fn dominating_function(l0: f64, k: f64, t0: f64, t: f64) -> Result<f64> {
    if !(l0 > 0.0 && l0 <= 1.0) {
        return Err(Error::Parameter(format!("L0 must lie in (0, 1], got {}", l0)));
    }
    if !(k > 0.0) {
        return Err(Error::Parameter(format!("k must be positive, got {}", k)));
    }
    if !(t >= t0) {
        return Err(Error::Parameter(format!("t = {} precedes t0 = {}", t, t0)));
    }
    Ok(1.0 / (1.0 - (-2.0 * k * (t - t0)).exp() * ((l0 - 1.0) / l0)))
}

/// Earliest `t ≥ t0` with `D(t) ≥ level`, from the closed-form inverse of `D`.
pub fn dominating_crossing_time(l0: f64, k: f64, t0: f64, level: f64) -> Result<Option<f64>> {
    dominating_function(l0, k, t0, t0)?;
    if !(level > 0.0 && level < 1.0) {
        return Ok(None);
    }
    if l0 >= level {
        return Ok(Some(t0));
    }
    // e^{−2kτ} = (1 − 1/level)·L₀/(L₀ − 1)
    let ratio = (1.0 - 1.0 / level) * l0 / (l0 - 1.0);
    Ok(Some(t0 - ratio.ln() / (2.0 * k)))
}

/// Integrates `ẋ = k f(x)` for `n` identical oscillators and attaches `D(t)`.
pub fn homogeneous_run(n: usize, k: f64, config: &SimConfig) -> Result<SimTrace> {
    let spec = center(&vec![0.0; n])?;
    let config = SimConfig { k, ..config.clone() };
    let mut trace = integrate(&spec, &config)?;
    let l0 = trace.l[0];
    if k > 0.0 && l0.sqrt() >= ZERO_ORDER_THRESHOLD {
        let t0 = trace.times[0];
        let d = trace
            .times
            .iter()
            .map(|&t| dominating_function(l0, k, t0, t))
            .collect::<Result<Vec<_>>>()?;
        trace.d = Some(d);
    }
    Ok(trace)
}

/// First recorded time with `L ≥ threshold`.
pub fn convergence_time(trace: &SimTrace, threshold: f64) -> Option<f64> {
    trace
        .l
        .iter()
        .position(|&l| l >= threshold)
        .map(|i| trace.times[i])
}
