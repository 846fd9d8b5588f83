//! Critical coupling, existence tests and explicit fixed points.
//!
//! Everything here is built on the radical profile
//!
//! ```text
//! p_j(u) = √(1 − (Ω_j/u)²),    P(u) = (1/N) Σ_j p_j(u),    u > ‖Ω‖∞
//! ```
//!
//! A fixed point with order parameter β and sign vector `a` exists iff
//! `β = (1/N) Σ a_j p_j(kβ)` for some β ∈ [‖Ω‖∞/k, 1]. For the all-plus sign
//! vector the right side is `P(kβ)`, which is concave in β, so the critical
//! coupling is the tangency of `P` with the line `u/k`. The tangency point u*
//! is the unique root of `v(u) = w(u)` with `v = 2P` and `w = (1/N)Σ 1/p_j`,
//! found by bisection on `(‖Ω‖∞, √2‖Ω‖∞]`, and `k_c = u*/P(u*)`.

use std::f64::consts::SQRT_2;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::frequencies::FrequencySpec;
use crate::order_field::{centroid, field_into, PhaseState};

/// Default cap on N for fixed-point enumeration (2^N sign vectors).
pub const DEFAULT_MAX_N: usize = 16;

/// Relative bisection tolerance used when none is given: `eps = 1e−10·‖Ω‖∞`.
pub const DEFAULT_RELATIVE_EPS: f64 = 1e-10;

/// Largest admissible `|β − RHS(β)|` accepted by [`construct_fixed_point`].
pub const BETA_CONDITION_TOL: f64 = 1e-10;

/// Grid size used to locate roots of the self-consistency equation for mixed sign vectors.
pub const SCAN_POINTS: usize = 1024;

/// Slack below zero at which the all-plus curve still counts as touching the identity line.
const TANGENCY_TOL: f64 = 1e-12;

/// Residual tolerance for certificates: `1e−8·max(1, k)`.
pub fn certification_tolerance(k: f64) -> f64 {
    1e-8 * k.max(1.0)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CouplingReport {
    /// ‖Ω‖∞.
    pub lower_inf: f64,
    /// 2σ_ω.
    pub lower_sigma: f64,
    /// Sufficient-coupling upper bound; `+∞` when vacuous, 0 when Ω = 0.
    pub upper: f64,
    pub kc: f64,
    pub u_star: f64,
    pub iterations: u32,
    /// Final bracket width requested.
    pub tolerance: f64,
    /// Ω = 0: every coupling admits the aligned fixed point.
    pub degenerate: bool,
}

/// A vector in {−1, +1}^N.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct SignVector(Vec<i8>);

impl SignVector {
    pub fn new(a: Vec<i8>) -> Result<Self> {
        if let Some(i) = a.iter().position(|&v| v != 1 && v != -1) {
            return Err(Error::Validation(format!(
                "sign entry {} is {}, expected -1 or +1",
                i, a[i]
            )));
        }
        Ok(SignVector(a))
    }

    pub fn all_plus(n: usize) -> Self {
        SignVector(vec![1; n])
    }

    /// Bit `i` of `code` set means `a_i = −1`; code 0 is all-plus.
    pub fn from_code(n: usize, code: u64) -> Self {
        SignVector((0..n).map(|i| if code >> i & 1 == 1 { -1 } else { 1 }).collect())
    }

    pub fn code(&self) -> u64 {
        self.0
            .iter()
            .enumerate()
            .filter(|(_, &v)| v < 0)
            .fold(0, |acc, (i, _)| acc | 1 << i)
    }

    pub fn as_slice(&self) -> &[i8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_all_plus(&self) -> bool {
        self.0.iter().all(|&v| v > 0)
    }

    pub fn is_all_minus(&self) -> bool {
        self.0.iter().all(|&v| v < 0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FixedPointCertificate {
    pub a: SignVector,
    pub beta: f64,
    pub k: f64,
    pub x_star: PhaseState,
    /// `max_i |k·f_i(x*) + Ω_i|`.
    pub residual_inf: f64,
    /// R(x*), equal to β by construction.
    pub order_r: f64,
}

/// Certificates sharing the same order-parameter magnitude.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquivalenceClass {
    pub order_r: f64,
    /// Indices into [`Enumeration::certificates`].
    pub members: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Enumeration {
    /// Ordered by sign-vector code, then β descending.
    pub certificates: Vec<FixedPointCertificate>,
    pub classes: Vec<EquivalenceClass>,
    /// Roots that failed certification; nonzero indicates numerical trouble.
    pub rejected: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScanRow {
    pub beta: f64,
    /// P(kβ).
    pub p: f64,
    /// Identity line h(kβ; k) = β.
    pub h: f64,
}

#[inline]
fn radical(omega: f64, u: f64) -> f64 {
    let q = omega / u;
    (1.0 - q * q).max(0.0).sqrt()
}

/// P(u) = (1/N) Σ √(1 − (Ω_j/u)²), radicands clamped at zero.
pub fn radical_mean(spec: &FrequencySpec, u: f64) -> f64 {
    let om = spec.centered();
    om.iter().map(|&w| radical(w, u)).sum::<f64>() / om.len() as f64
}

/// (1/N) Σ a_j √(1 − (Ω_j/(kβ))²).
pub fn signed_radical_mean(spec: &FrequencySpec, k: f64, a: &SignVector, beta: f64) -> f64 {
    let om = spec.centered();
    let u = k * beta;
    om.iter()
        .zip(a.as_slice())
        .map(|(&w, &s)| s as f64 * radical(w, u))
        .sum::<f64>()
        / om.len() as f64
}

/// Both sides of the tangency equation: `(v(u), w(u)) = (2P(u), (1/N)Σ 1/p_j(u))`.
pub fn tangency_sides(spec: &FrequencySpec, u: f64) -> (f64, f64) {
    let om = spec.centered();
    let n = om.len() as f64;
    let (sum_p, sum_inv) = om.iter().fold((0.0, 0.0), |(sp, si), &w| {
        let p = radical(w, u);
        (sp + p, si + 1.0 / p)
    });
    (2.0 * sum_p / n, sum_inv / n)
}

pub fn lower_bounds(spec: &FrequencySpec) -> (f64, f64) {
    (spec.inf_norm(), 2.0 * spec.sigma())
}

/// `‖Ω‖∞ / P(‖Ω‖∞)`, or `+∞` when every |Ω_j| equals the norm.
pub fn upper_bound(spec: &FrequencySpec) -> Result<f64> {
    if spec.is_homogeneous() {
        return Err(Error::Degenerate(
            "all centered frequencies are zero; k_c = 0".into(),
        ));
    }
    let m = spec.inf_norm();
    let denom = radical_mean(spec, m);
    Ok(if denom > 0.0 { m / denom } else { f64::INFINITY })
}

/// Worst-case bisection count for bracket width `(√2−1)·‖Ω‖∞` and tolerance `eps`.
pub fn iteration_budget(inf_norm: f64, eps: f64) -> u32 {
    let halvings = ((SQRT_2 - 1.0) * inf_norm / eps).log2().ceil().max(0.0);
    halvings as u32 + 1
}

pub fn default_eps(spec: &FrequencySpec) -> f64 {
    if spec.is_homogeneous() {
        DEFAULT_RELATIVE_EPS
    } else {
        DEFAULT_RELATIVE_EPS * spec.inf_norm()
    }
}

/// Exact critical coupling by bisection on the tangency equation.
pub fn compute_kc(spec: &FrequencySpec, eps: f64) -> Result<CouplingReport> {
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(Error::Parameter(format!("eps must be positive and finite, got {}", eps)));
    }
    let (lower_inf, lower_sigma) = lower_bounds(spec);
    if spec.is_homogeneous() {
        return Ok(CouplingReport {
            lower_inf,
            lower_sigma,
            upper: 0.0,
            kc: 0.0,
            u_star: 0.0,
            iterations: 0,
            tolerance: eps,
            degenerate: true,
        });
    }
    let m = spec.inf_norm();
    let (mut a, mut b) = (m, SQRT_2 * m);
    let mut iterations = 0;
    // endpoints are never evaluated: w(a) diverges
    while b - a > eps {
        let u = 0.5 * (a + b);
        if u <= a || u >= b {
            break;
        }
        iterations += 1;
        let (v, w) = tangency_sides(spec, u);
        if v > w {
            b = u;
        } else {
            a = u;
        }
    }
    let u_star = 0.5 * (a + b);
    let kc = u_star / radical_mean(spec, u_star);
    Ok(CouplingReport {
        lower_inf,
        lower_sigma,
        upper: upper_bound(spec)?,
        kc,
        u_star,
        iterations,
        tolerance: eps,
        degenerate: false,
    })
}

fn check_k(k: f64) -> Result<()> {
    if !(k > 0.0) || !k.is_finite() {
        return Err(Error::Parameter(format!("coupling k must be positive and finite, got {}", k)));
    }
    Ok(())
}

/// Bisection on a bracket where `f(lo)` and `f(hi)` have opposite signs
/// (or `f(lo) == 0`), carried to machine resolution. Returns the endpoint
/// with the smaller |f|.
fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let mut f_lo = f(lo);
    let mut f_hi = f(hi);
    if f_lo == 0.0 {
        return lo;
    }
    if f_hi == 0.0 {
        return hi;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return mid;
        }
        if (f_mid > 0.0) == (f_lo > 0.0) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
            f_hi = f_mid;
        }
    }
    if f_lo.abs() <= f_hi.abs() {
        lo
    } else {
        hi
    }
}

/// Roots of `P(kβ) = β` on `[‖Ω‖∞/k, 1]`, largest first. Ω ≠ 0 assumed.
fn all_plus_roots(spec: &FrequencySpec, k: f64) -> Vec<f64> {
    let lo = spec.inf_norm() / k;
    if lo >= 1.0 {
        return Vec::new();
    }
    let om = spec.centered();
    let n = om.len() as f64;
    let gap = |beta: f64| radical_mean(spec, k * beta) - beta;
    // g'(β) = k·P'(kβ) − 1, decreasing because P is concave
    let slope = |beta: f64| {
        let u = k * beta;
        let dp = om
            .iter()
            .map(|&w| {
                let p = radical(w, u);
                let q = w / u;
                if p == 0.0 {
                    f64::INFINITY
                } else {
                    q * q / (u * p)
                }
            })
            .sum::<f64>()
            / n;
        k * dp - 1.0
    };
    let peak = if slope(1.0) >= 0.0 { 1.0 } else { bisect(slope, lo, 1.0) };
    let top = gap(peak);
    if top < -TANGENCY_TOL {
        return Vec::new();
    }
    if top <= 0.0 {
        return vec![peak];
    }
    let mut roots = Vec::with_capacity(2);
    if peak < 1.0 {
        roots.push(bisect(gap, peak, 1.0));
    }
    if gap(lo) <= 0.0 {
        roots.push(bisect(gap, lo, peak));
    }
    roots
}

/// Largest β with `β = P(kβ)`, if any. Present iff k ≥ k_c.
pub fn existence_at(spec: &FrequencySpec, k: f64) -> Result<Option<f64>> {
    check_k(k)?;
    if spec.is_homogeneous() {
        return Ok(Some(1.0));
    }
    Ok(all_plus_roots(spec, k).first().copied())
}

/// All β ∈ [‖Ω‖∞/k, 1] solving the self-consistency equation for sign vector `a`, largest first.
///
/// All-plus vectors use the concave structure and find both roots exactly.
/// Other vectors are scanned on a uniform grid of [`SCAN_POINTS`] points and
/// every sign change is refined by bisection; two roots closer than one grid
/// cell can be missed. For Ω = 0 the single root is `|mean(a)|`, since the
/// mirrored configuration is then also an equilibrium.
pub fn existence_with_signs(spec: &FrequencySpec, k: f64, a: &SignVector) -> Result<Vec<f64>> {
    check_k(k)?;
    if a.len() != spec.n() {
        return Err(Error::Dimension(format!(
            "sign vector has {} entries, spec has {}",
            a.len(),
            spec.n()
        )));
    }
    if spec.is_homogeneous() {
        let mean = a.as_slice().iter().map(|&s| s as f64).sum::<f64>() / a.len() as f64;
        return Ok(if mean != 0.0 { vec![mean.abs()] } else { Vec::new() });
    }
    if a.is_all_plus() {
        return Ok(all_plus_roots(spec, k));
    }
    let lo = spec.inf_norm() / k;
    if lo > 1.0 || a.is_all_minus() {
        return Ok(Vec::new());
    }
    let defect = |beta: f64| beta - signed_radical_mean(spec, k, a, beta);
    let step = (1.0 - lo) / (SCAN_POINTS - 1) as f64;
    let grid: Vec<f64> = (0..SCAN_POINTS)
        .map(|i| if i + 1 == SCAN_POINTS { 1.0 } else { lo + i as f64 * step })
        .collect();
    let values: Vec<f64> = grid.iter().map(|&b| defect(b)).collect();
    let mut roots = Vec::new();
    for i in 0..SCAN_POINTS {
        if values[i] == 0.0 {
            roots.push(grid[i]);
        } else if i + 1 < SCAN_POINTS && values[i + 1] != 0.0 && (values[i] > 0.0) != (values[i + 1] > 0.0) {
            roots.push(bisect(defect, grid[i], grid[i + 1]));
        }
    }
    roots.sort_by(|x, y| y.total_cmp(x));
    roots.dedup_by(|x, y| (*x - *y).abs() < 1e-12);
    Ok(roots)
}

/// Builds the fixed point associated with `(a, β)` and certifies it against the field.
///
/// Offsets `δ_i = atan2(−Ω_i/(kβ), a_i·√(1 − (Ω_i/(kβ))²))` place each
/// oscillator relative to the mean phase `ψ = mean(δ)`; then `x*_i = ψ − δ_i`.
pub fn construct_fixed_point(
    spec: &FrequencySpec,
    k: f64,
    a: &SignVector,
    beta: f64,
) -> Result<FixedPointCertificate> {
    check_k(k)?;
    if a.len() != spec.n() {
        return Err(Error::Dimension(format!(
            "sign vector has {} entries, spec has {}",
            a.len(),
            spec.n()
        )));
    }
    if !(beta > 0.0 && beta <= 1.0) {
        return Err(Error::Parameter(format!("beta must lie in (0, 1], got {}", beta)));
    }
    let u = k * beta;
    if spec.inf_norm() > u * (1.0 + 1e-12) {
        return Err(Error::Parameter(format!(
            "k*beta = {} is below ||Omega||_inf = {}",
            u,
            spec.inf_norm()
        )));
    }
    let rhs = signed_radical_mean(spec, k, a, beta);
    let target = if spec.is_homogeneous() { rhs.abs() } else { rhs };
    let defect = (beta - target).abs();
    if defect > BETA_CONDITION_TOL {
        return Err(Error::Certification {
            defect,
            tolerance: BETA_CONDITION_TOL,
        });
    }
    let om = spec.centered();
    let offsets: Vec<f64> = om
        .iter()
        .zip(a.as_slice())
        .map(|(&w, &s)| {
            let q = (w / u).clamp(-1.0, 1.0);
            (-q).atan2(s as f64 * (1.0 - q * q).sqrt())
        })
        .collect();
    let psi = offsets.iter().sum::<f64>() / offsets.len() as f64;
    let x: Vec<f64> = offsets.iter().map(|d| psi - d).collect();

    let mut field = vec![0.0; x.len()];
    field_into(&x, &mut field);
    let residual_inf = field
        .iter()
        .zip(om)
        .fold(0.0_f64, |m, (f, w)| m.max((k * f + w).abs()));
    let tolerance = certification_tolerance(k);
    if !(residual_inf <= tolerance) {
        return Err(Error::Certification {
            defect: residual_inf,
            tolerance,
        });
    }
    let (s, c) = centroid(&x);
    let order_r = s.hypot(c);
    Ok(FixedPointCertificate {
        a: a.clone(),
        beta,
        k,
        x_star: PhaseState::new(x)?,
        residual_inf,
        order_r,
    })
}

/// Every certified fixed point reachable through the self-consistency equation.
pub fn enumerate_fixed_points(spec: &FrequencySpec, k: f64, max_n: usize) -> Result<Enumeration> {
    check_k(k)?;
    let n = spec.n();
    if n > max_n || n >= 64 {
        return Err(Error::Capacity { n, max_n });
    }
    let per_sign: Vec<(Vec<FixedPointCertificate>, usize)> = (0..1u64 << n)
        .into_par_iter()
        .map(|code| {
            let a = SignVector::from_code(n, code);
            let mut certs = Vec::new();
            let mut rejected = 0;
            // k was validated above and `a` has length n, so only certification can fail
            for beta in existence_with_signs(spec, k, &a).unwrap_or_default() {
                match construct_fixed_point(spec, k, &a, beta) {
                    Ok(c) => certs.push(c),
                    Err(_) => rejected += 1,
                }
            }
            (certs, rejected)
        })
        .collect();

    let mut certificates = Vec::new();
    let mut rejected = 0;
    for (c, r) in per_sign {
        certificates.extend(c);
        rejected += r;
    }
    let classes = group_by_order(&certificates);
    Ok(Enumeration {
        certificates,
        classes,
        rejected,
    })
}

/// Groups certificates whose R values agree within 1e−8.
fn group_by_order(certs: &[FixedPointCertificate]) -> Vec<EquivalenceClass> {
    let mut idx: Vec<usize> = (0..certs.len()).collect();
    idx.sort_by(|&i, &j| certs[j].order_r.total_cmp(&certs[i].order_r));
    let mut classes: Vec<EquivalenceClass> = Vec::new();
    for i in idx {
        let r = certs[i].order_r;
        match classes.last_mut() {
            Some(cls) if (cls.order_r - r).abs() <= 1e-8 => cls.members.push(i),
            _ => classes.push(EquivalenceClass {
                order_r: r,
                members: vec![i],
            }),
        }
    }
    classes
}

/// Admissible range `(r_min, r_max)` of R at any fixed point for coupling `k`.
pub fn order_band(spec: &FrequencySpec, k: f64) -> Result<(f64, f64)> {
    check_k(k)?;
    let ratio = spec.sigma() / k;
    let mut disc = 1.0 - 4.0 * ratio * ratio;
    if disc < 0.0 {
        if disc < -1e-12 {
            return Err(Error::BandUndefined {
                k,
                two_sigma: 2.0 * spec.sigma(),
            });
        }
        disc = 0.0;
    }
    let half = 0.5 * disc.sqrt();
    Ok(((0.5 - half).max(0.0).sqrt(), (0.5 + half).sqrt()))
}

/// Samples the all-plus curve `P(kβ)` and the line `β` on `[‖Ω‖∞/k, 1]`.
pub fn scan_curve(spec: &FrequencySpec, k: f64, samples: usize) -> Result<Vec<ScanRow>> {
    check_k(k)?;
    if samples < 2 {
        return Err(Error::Parameter(format!("need at least 2 samples, got {}", samples)));
    }
    let lo = spec.inf_norm() / k;
    if lo > 1.0 {
        return Err(Error::EmptyRange { ratio: lo });
    }
    let step = (1.0 - lo) / (samples - 1) as f64;
    Ok((0..samples)
        .map(|i| {
            let beta = if i + 1 == samples { 1.0 } else { lo + i as f64 * step };
            ScanRow {
                beta,
                p: radical_mean(spec, k * beta),
                h: beta,
            }
        })
        .collect())
}
