//! Moment comparison toolbox: Paley-Zygmund type lower bounds on
//! `P(Y >= 0)` for mean-zero `Y`, the fourth moment of a sum of independent
//! mean-zero terms, and exact central moments of quadratic forms in a
//! sphere-uniform vector.

use crate::error::{domain, Result};
use crate::scalar::{lit, Field, Real};

/// Second and fourth central moments of a mean-zero variable.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentSummary<T> {
    pub m2: T,
    pub m4: T,
}

impl<T: Field> MomentSummary<T> {
    /// Validates `m2, m4 >= 0` and the Cauchy-Schwarz constraint `m4 >= m2^2`.
    pub fn new(m2: T, m4: T) -> Result<Self> {
        if m2 < T::zero() || m4 < T::zero() {
            return domain(format!("negative moment (m2={m2:?}, m4={m4:?})"));
        }
        if m4 < m2.clone() * m2.clone() {
            return domain(format!("m4 < m2^2 (m2={m2:?}, m4={m4:?})"));
        }
        Ok(Self { m2, m4 })
    }

    /// `m4 / m2^2`; `None` for a degenerate (constant) variable.
    pub fn kurtosis_ratio(&self) -> Option<T> {
        if self.m2.is_zero() {
            None
        } else {
            Some(self.m4.clone() / (self.m2.clone() * self.m2.clone()))
        }
    }

    pub fn is_degenerate(&self) -> bool {
        self.m2.is_zero()
    }
}

/// `2^{-4/3} (E Y^2)^2 / E Y^4`, a lower bound on `P(Y >= 0)`.
pub fn pz_lower_bound<T: Real>(ms: &MomentSummary<T>) -> Result<T> {
    if ms.m4 <= T::zero() {
        return domain("pz_lower_bound: fourth moment is zero");
    }
    Ok(lit::<T>(2.0).powf(lit(-4.0 / 3.0)) * ms.m2 * ms.m2 / ms.m4)
}

/// Breakpoint `(3/2)(sqrt 3 - 1)` between the two branches of [`sharp_pz`].
pub fn sharp_pz_breakpoint<T: Real>() -> T {
    lit::<T>(1.5) * (lit::<T>(3.0).sqrt() - T::one())
}

/// Sharp lower bound on `P(Y > 0)` for a non-zero mean-zero `Y` with
/// kurtosis ratio `r`.
pub fn sharp_pz<T: Real>(r: T) -> Result<T> {
    if !(r >= T::one()) {
        return domain(format!("sharp_pz: kurtosis ratio {r} < 1"));
    }
    let half = lit::<T>(0.5);
    if r < sharp_pz_breakpoint() {
        Ok(half * (T::one() - ((r - T::one()) / (r + lit(3.0))).sqrt()))
    } else {
        Ok((lit::<T>(2.0) * lit::<T>(3.0).sqrt() - lit(3.0)) / r)
    }
}

/// `(2 sqrt 3 - 3) / 15`.
pub fn sharp_pz_at_15<T: Real>() -> T {
    (lit::<T>(2.0) * lit::<T>(3.0).sqrt() - lit(3.0)) / lit(15.0)
}

/// `1 / (15 * 2^{4/3})`: the small-threshold lower bound on
/// `P(sum_k lambda_k g_k^2 > sum_k lambda_k)`.
pub fn gaussian_form_pz_bound<T: Real>() -> T {
    T::one() / (lit::<T>(15.0) * lit::<T>(2.0).powf(lit(4.0 / 3.0)))
}

/// Moments of `Y_1 + ... + Y_n` for independent mean-zero terms:
/// `m2 = sum m2_i`, `m4 = sum m4_i + 6 sum_{i<j} m2_i m2_j`.
pub fn sum_fourth_moment<T: Field>(terms: &[MomentSummary<T>]) -> Result<MomentSummary<T>> {
    let mut m2 = T::zero();
    let mut m4 = T::zero();
    let six = T::from_u8(6).expect("small constant");
    for t in terms {
        if t.m2 < T::zero() || t.m4 < T::zero() {
            return domain(format!("negative moment in term {t:?}"));
        }
        m4 = m4 + t.m4.clone() + six.clone() * m2.clone() * t.m2.clone();
        m2 = m2 + t.m2.clone();
    }
    Ok(MomentSummary { m2, m4 })
}

/// Exact central moments of `X = sum_j a_j theta_j^2` with `theta` uniform
/// on the sphere in `R^d`. With `b_j = a_j - mean(a)`,
///
/// `m2 = 2 sum b_j^2 / (d(d+2))`,
/// `m4 = (12 (sum b_j^2)^2 + 48 sum b_j^4) / (d(d+2)(d+4)(d+6))`.
pub fn sphere_form_moments<T: Field>(a: &[T]) -> Result<MomentSummary<T>> {
    if a.is_empty() {
        return domain("sphere_form_moments: empty weight vector");
    }
    if let Some(bad) = a.iter().find(|x| **x < T::zero()) {
        return domain(format!("sphere_form_moments: negative weight {bad:?}"));
    }
    let num = |k: usize| T::from_usize(k).expect("small constant");
    let d = a.len();
    let mean = a.iter().fold(T::zero(), |s, x| s + x.clone()) / num(d);
    let (s2, s4) = a.iter().fold((T::zero(), T::zero()), |(s2, s4), x| {
        let b = x.clone() - mean.clone();
        let b2 = b.clone() * b;
        (s2 + b2.clone(), s4 + b2.clone() * b2)
    });
    let m2 = num(2) * s2.clone() / (num(d) * num(d + 2));
    let m4 = (num(12) * s2.clone() * s2 + num(48) * s4)
        / (num(d) * num(d + 2) * num(d + 4) * num(d + 6));
    Ok(MomentSummary { m2, m4 })
}
