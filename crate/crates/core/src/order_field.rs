//! Order parameter, coupling field and the reduced Jacobian.
//!
//! The coupling field is `f_i(x) = (1/N) Σ_j sin(x_j − x_i)`. Expanding the
//! sine gives `f_i = S·cos x_i − C·sin x_i` with `S + iC`-style centroid sums
//! `S = (1/N)Σ sin x_j`, `C = (1/N)Σ cos x_j`, which is how it is evaluated
//! here (O(N) per call). When the centroid vanishes the same expression gives
//! zero, so the `R = 0` case needs no branch.

use std::f64::consts::TAU;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};

/// Below this magnitude the order parameter is treated as zero and ψ is absent.
pub const ZERO_ORDER_THRESHOLD: f64 = 1e-9;

/// A phase configuration on the zero-mean subspace.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhaseState {
    x: Vec<f64>,
}

impl PhaseState {
    /// Wraps `x`, checking `|Σx_j| ≤ 1e−10·N`.
    pub fn new(x: Vec<f64>) -> Result<Self> {
        check_len(&x)?;
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::Validation("phase vector has non-finite entries".into()));
        }
        let sum: f64 = x.iter().sum();
        if sum.abs() > 1e-10 * x.len() as f64 {
            return Err(Error::Validation(format!(
                "phases are not zero-mean (sum = {:e})",
                sum
            )));
        }
        Ok(PhaseState { x })
    }

    /// Projects arbitrary phases onto the zero-mean subspace (`x = Vθ`).
    pub fn project(theta: &[f64]) -> Result<Self> {
        check_len(theta)?;
        if theta.iter().any(|v| !v.is_finite()) {
            return Err(Error::Validation("phase vector has non-finite entries".into()));
        }
        let mut x = theta.to_vec();
        remove_mean(&mut x);
        Ok(PhaseState { x })
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.x
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.x
    }

    pub fn n(&self) -> usize {
        self.x.len()
    }
}

impl AsRef<[f64]> for PhaseState {
    fn as_ref(&self) -> &[f64] {
        &self.x
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OrderParameter {
    /// Magnitude R ∈ [0, 1].
    pub r: f64,
    /// Mean phase ψ ∈ [0, 2π); `None` when R is below [`ZERO_ORDER_THRESHOLD`].
    pub psi: Option<f64>,
}

/// Classification of a candidate equilibrium of the homogeneous system `ẋ = k f(x)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum HomogeneousClass {
    NotFixed,
    /// R(x) = 0 but some pairwise sine is nonzero.
    ZeroOrder,
    /// Every pairwise sine vanishes, R(x) > 0.
    PhaseAligned,
    /// R(x) = 0 and every pairwise sine vanishes (possible only for even N).
    Both,
}

fn check_len(x: &[f64]) -> Result<()> {
    if x.len() < 2 {
        return Err(Error::Dimension(format!(
            "need at least 2 phases, got {}",
            x.len()
        )));
    }
    Ok(())
}

pub(crate) fn remove_mean(x: &mut [f64]) {
    let mean = x.iter().sum::<f64>() / x.len() as f64;
    x.iter_mut().for_each(|v| *v -= mean);
}

/// Mean sine and mean cosine of the phases.
pub(crate) fn centroid(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let (s, c) = x
        .iter()
        .fold((0.0, 0.0), |(s, c), v| (s + v.sin(), c + v.cos()));
    (s / n, c / n)
}

/// R(x)² without allocation or validation.
pub(crate) fn order_sq(x: &[f64]) -> f64 {
    let (s, c) = centroid(x);
    (s * s + c * c).min(1.0)
}

/// Writes f(x) into `out`.
pub(crate) fn field_into(x: &[f64], out: &mut [f64]) {
    let (s, c) = centroid(x);
    for (o, v) in out.iter_mut().zip(x) {
        let (sin, cos) = v.sin_cos();
        *o = s * cos - c * sin;
    }
}

pub fn order_parameter(x: &[f64]) -> Result<OrderParameter> {
    check_len(x)?;
    let (s, c) = centroid(x);
    let r = s.hypot(c).min(1.0);
    let psi = if r < ZERO_ORDER_THRESHOLD {
        None
    } else {
        Some(s.atan2(c).rem_euclid(TAU))
    };
    Ok(OrderParameter { r, psi })
}

pub fn coupling_field(x: &[f64]) -> Result<Vec<f64>> {
    check_len(x)?;
    let mut out = vec![0.0; x.len()];
    field_into(x, &mut out);
    Ok(out)
}

/// Jacobian of `y ↦ f_{1..N−1}(Π(y))` where `Π(y) = (y, −Σy)`.
///
/// The first N−1 entries of `x` are taken as `y`; the last phase is rebuilt
/// through Π, so for a zero-mean state this is the Jacobian at `x` itself.
/// The 1/N factor of `f` is kept.
pub fn reduced_jacobian(x: &[f64]) -> Result<DMatrix<f64>> {
    check_len(x)?;
    let n = x.len();
    let m = n - 1;
    let y = &x[..m];
    let last = -y.iter().sum::<f64>();
    let scale = 1.0 / n as f64;
    Ok(DMatrix::from_fn(m, m, |i, j| {
        let tail = (last - y[i]).cos();
        if i == j {
            let others: f64 = (0..m)
                .filter(|&p| p != i)
                .map(|p| (y[p] - y[i]).cos())
                .sum();
            -scale * (others + 2.0 * tail)
        } else {
            scale * ((y[j] - y[i]).cos() - tail)
        }
    }))
}

pub fn classify_homogeneous_fixed_point(x: &[f64], tol: f64) -> Result<HomogeneousClass> {
    if !(tol > 0.0) {
        return Err(Error::Parameter(format!("tolerance must be positive, got {}", tol)));
    }
    let f = coupling_field(x)?;
    if f.iter().any(|v| v.abs() > tol) {
        return Ok(HomogeneousClass::NotFixed);
    }
    let zero = order_sq(x).sqrt() <= tol;
    let aligned = x
        .iter()
        .enumerate()
        .all(|(i, a)| x[i + 1..].iter().all(|b| (a - b).sin().abs() <= tol));
    Ok(match (zero, aligned) {
        (true, true) => HomogeneousClass::Both,
        (true, false) => HomogeneousClass::ZeroOrder,
        (false, true) => HomogeneousClass::PhaseAligned,
        // small field but neither condition certified at this tolerance
        (false, false) => HomogeneousClass::NotFixed,
    })
}

/// `√(N R²(1−R²)) − ‖f(x)‖₂`; never below rounding noise.
pub fn field_norm_bound_gap(x: &[f64]) -> Result<f64> {
    let f = coupling_field(x)?;
    let n = x.len() as f64;
    let l = order_sq(x);
    let bound = (n * l * (1.0 - l).max(0.0)).sqrt();
    let norm = f.iter().map(|v| v * v).sum::<f64>().sqrt();
    Ok(bound - norm)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_4, PI};

    fn pairwise_field(x: &[f64]) -> Vec<f64> {
        let n = x.len() as f64;
        x.iter()
            .map(|xi| x.iter().map(|xj| (xj - xi).sin()).sum::<f64>() / n)
            .collect()
    }

    #[test]
    fn aligned_phases() {
        let op = order_parameter(&[0.0, 0.0, 0.0]).unwrap();
        assert!((op.r - 1.0).abs() < 1e-15);
        assert_eq!(op.psi, Some(0.0));
    }

    #[test]
    fn antipodal_pair_has_no_phase() {
        let op = order_parameter(&[0.0, PI]).unwrap();
        assert!(op.r < 1e-15);
        assert_eq!(op.psi, None);
    }

    #[test]
    fn quarter_split() {
        let op = order_parameter(&[FRAC_PI_4, -FRAC_PI_4]).unwrap();
        assert!((op.r - FRAC_PI_4.cos()).abs() < 1e-15);
        assert!(op.psi.unwrap().abs() < 1e-15);
    }

    #[test]
    fn order_parameter_dimension() {
        assert!(matches!(order_parameter(&[]), Err(Error::Dimension(_))));
    }

    #[test]
    fn field_examples() {
        assert_eq!(coupling_field(&[0.0; 5]).unwrap(), vec![0.0; 5]);
        let f = coupling_field(&[-FRAC_PI_4, FRAC_PI_4]).unwrap();
        assert!((f[0] - 0.5).abs() < 1e-15 && (f[1] + 0.5).abs() < 1e-15);
    }

    #[test]
    fn jacobian_at_origin_n3() {
        let j = reduced_jacobian(&[0.0, 0.0, 0.0]).unwrap();
        assert!((j[(0, 0)] + 1.0).abs() < 1e-15);
        assert!((j[(1, 1)] + 1.0).abs() < 1e-15);
        assert!(j[(0, 1)].abs() < 1e-15 && j[(1, 0)].abs() < 1e-15);
        assert!((j.determinant() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn jacobian_nonsingular_at_homogeneous_fixed_points() {
        // phases in {0, π} with more at 0 than at π: f = 0 and R ≠ 0
        for (n, rho) in [(3, 1), (5, 2), (6, 1), (6, 2), (7, 0)] {
            let mut x: Vec<f64> = (0..n).map(|i| if i < rho { PI } else { 0.0 }).collect();
            remove_mean(&mut x);
            assert!(order_sq(&x) > 1e-6);
            let det = reduced_jacobian(&x).unwrap().determinant();
            assert!(det.abs() > 1e-8, "n={} rho={} det={}", n, rho, det);
        }
    }

    #[test]
    fn classify_examples() {
        let tol = 1e-9;
        assert_eq!(
            classify_homogeneous_fixed_point(&[0.0, PI, 0.0, PI], tol).unwrap(),
            HomogeneousClass::Both
        );
        assert_eq!(
            classify_homogeneous_fixed_point(&[0.0, 2.0 * PI / 3.0, 4.0 * PI / 3.0], tol).unwrap(),
            HomogeneousClass::ZeroOrder
        );
        assert_eq!(
            classify_homogeneous_fixed_point(&[0.0, 0.0, 0.0], tol).unwrap(),
            HomogeneousClass::PhaseAligned
        );
        assert_eq!(
            classify_homogeneous_fixed_point(&[0.0, 0.3, -0.3], tol).unwrap(),
            HomogeneousClass::NotFixed
        );
        assert!(classify_homogeneous_fixed_point(&[0.0, 0.0], 0.0).is_err());
    }

    #[test]
    fn bound_equality_even_n() {
        for n in [2usize, 4, 10] {
            for c in [0.0, 0.2, 0.5, 0.9, 1.0] {
                let a = f64::acos(c);
                let x: Vec<f64> = (0..n).map(|i| if i < n / 2 { a } else { -a }).collect();
                assert!(field_norm_bound_gap(&x).unwrap().abs() < 1e-10);
            }
        }
    }

    #[test]
    fn phase_state_validation() {
        assert!(PhaseState::new(vec![1.0, -1.0]).is_ok());
        assert!(PhaseState::new(vec![1.0, 1.0]).is_err());
        let p = PhaseState::project(&[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(p.as_slice(), &[-1.0, 0.0, 1.0]);
    }

    fn phases() -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(-PI..PI, 2..30)
    }

    proptest! {
        #[test]
        fn field_matches_pairwise_sum(x in phases()) {
            let fast = coupling_field(&x).unwrap();
            for (a, b) in fast.iter().zip(pairwise_field(&x)) {
                prop_assert!((a - b).abs() < 1e-12);
            }
        }

        #[test]
        fn field_matches_polar_form(x in phases()) {
            let op = order_parameter(&x).unwrap();
            if let Some(psi) = op.psi {
                let f = coupling_field(&x).unwrap();
                for (fi, xi) in f.iter().zip(&x) {
                    prop_assert!((fi - op.r * (psi - xi).sin()).abs() < 1e-10);
                }
            }
        }

        #[test]
        fn shift_invariance(x in phases(), c in -10.0..10.0f64) {
            let a = order_parameter(&x).unwrap();
            let shifted: Vec<f64> = x.iter().map(|v| v + c).collect();
            let b = order_parameter(&shifted).unwrap();
            prop_assert!((a.r - b.r).abs() < 1e-12);
            if a.r > 1e-6 {
                let d = (b.psi.unwrap() - a.psi.unwrap() - c).rem_euclid(TAU);
                prop_assert!(d < 1e-9 || TAU - d < 1e-9);
            }
        }

        #[test]
        fn reduction_property(x in phases(), k in 0.5..5.0f64, p in 0usize..30) {
            // with Ω := −k f(x), the equation holds at all i ≠ p by construction;
            // the zero-sum identity forces it at p too
            let mut y = x.clone();
            remove_mean(&mut y);
            let f = coupling_field(&y).unwrap();
            let p = p % y.len();
            let omega_rest: f64 = f.iter().enumerate().filter(|(i, _)| *i != p).map(|(_, v)| -k * v).sum();
            let omega_p = -omega_rest; // Ω sums to zero
            prop_assert!((k * f[p] + omega_p).abs() < 1e-12 * y.len() as f64 * k.max(1.0));
        }

        #[test]
        fn permuting_phases_preserves_jacobian_rank(x in prop::collection::vec(-PI..PI, 3..9)) {
            let mut y = x.clone();
            remove_mean(&mut y);
            let mut z = y.clone();
            z.reverse();
            let ja = reduced_jacobian(&y).unwrap();
            let jb = reduced_jacobian(&z).unwrap();
            let rank = |m: &DMatrix<f64>| m.clone().svd(false, false).rank(1e-9);
            prop_assert_eq!(rank(&ja), rank(&jb));
        }
    }
}
