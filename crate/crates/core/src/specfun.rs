//! Special functions: modified Bessel functions of order zero and one, their
//! ratio, Nåsell's rational lower bound for the ratio, the Gaussian upper
//! tail and even moments of the chi distribution.
//!
//! Every floating point evaluation returns an [`EvalReal`]: the computed
//! value together with a conservative bound on its absolute error. Bounds
//! cover truncation (series remainders, asymptotic remainders, continued
//! fraction bracketing) plus a rounding allowance assuming correctly
//! rounded arithmetic and `exp`/`ln` within a couple of ulps.

use num_bigint::BigUint;

use crate::error::{domain, Error, Result};
use crate::scalar::{count, lit, Real};

/// A value with a certified enclosure half-width.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalReal<T> {
    pub value: T,
    pub abs_err_bound: T,
}

impl<T: Real> EvalReal<T> {
    pub fn new(value: T, abs_err_bound: T) -> Self {
        debug_assert!(abs_err_bound >= T::zero() || abs_err_bound.is_nan());
        Self {
            value,
            abs_err_bound,
        }
    }

    pub fn exact(value: T) -> Self {
        Self::new(value, T::zero())
    }

    /// Relative error bound, `abs_err_bound / |value|`.
    pub fn rel_err(&self) -> T {
        if self.value == T::zero() {
            if self.abs_err_bound == T::zero() {
                T::zero()
            } else {
                T::infinity()
            }
        } else {
            self.abs_err_bound / self.value.abs()
        }
    }

    pub fn lower(&self) -> T {
        self.value - self.abs_err_bound
    }

    pub fn upper(&self) -> T {
        self.value + self.abs_err_bound
    }

    /// Whether `x` lies inside the enclosure.
    pub fn contains(&self, x: T) -> bool {
        (self.value - x).abs() <= self.abs_err_bound
    }

    /// Product with error propagation (first order plus cross term).
    #[allow(clippy::should_implement_trait)]
    pub fn mul(self, other: Self) -> Self {
        let value = self.value * other.value;
        let err = self.abs_err_bound * other.value.abs()
            + other.abs_err_bound * self.value.abs()
            + self.abs_err_bound * other.abs_err_bound
            + value.abs() * T::epsilon();
        Self::new(value, err)
    }

    /// Quotient with error propagation; `other` must be bounded away from 0.
    #[allow(clippy::should_implement_trait)]
    pub fn div(self, other: Self) -> Self {
        let value = self.value / other.value;
        let denom_low = other.value.abs() - other.abs_err_bound;
        let err = if denom_low <= T::zero() {
            T::infinity()
        } else {
            (self.abs_err_bound + value.abs() * other.abs_err_bound) / denom_low
                + value.abs() * T::epsilon()
        };
        Self::new(value, err)
    }

    /// Multiplies by an exactly known scalar, allowing one rounding.
    pub fn scale(self, factor: T) -> Self {
        let value = self.value * factor;
        Self::new(
            value,
            self.abs_err_bound * factor.abs() + value.abs() * T::epsilon(),
        )
    }
}

/// Arguments at or below this use the power series; above it the scaled
/// asymptotic expansion.
const SERIES_CUTOFF: f64 = 15.0;

/// Nåsell's `L_{0,5,1}` numerator coefficients, index = power of `u`.
pub const NASELL_NUMERATOR: [i64; 8] = [0, 120960, 60480, 25200, 7140, 1455, 204, 16];
/// Nåsell's `L_{0,5,1}` denominator coefficients, index = power of `u`.
pub const NASELL_DENOMINATOR: [i64; 8] = [241920, 120960, 80640, 29400, 7950, 1563, 212, 16];

fn check_arg<T: Real>(x: T, name: &str) -> Result<()> {
    if !x.is_finite() {
        return domain(format!("{name}: non-finite argument {x}"));
    }
    if x < T::zero() {
        return domain(format!("{name}: negative argument {x}"));
    }
    Ok(())
}

/// Power series of `I_order(x)`, `order` in {0, 1}. All terms are positive.
fn bessel_series<T: Real>(x: T, order: u32) -> EvalReal<T> {
    let eps = T::epsilon();
    let q = x * x / lit(4.0);
    let half = lit::<T>(0.5);
    let mut term = if order == 0 { T::one() } else { x * half };
    let mut sum = term;
    if term == T::zero() {
        return EvalReal::exact(T::zero());
    }
    let mut k: usize = 0;
    let remainder = loop {
        k += 1;
        let kf: T = count(k);
        term = term * q / (kf * (kf + count(order as usize)));
        sum = sum + term;
        let next_ratio = q / ((kf + T::one()) * (kf + T::one() + count(order as usize)));
        if next_ratio < half {
            let tail = term * next_ratio / (T::one() - next_ratio);
            if tail <= eps * sum * lit(0.25) || k > 2000 {
                break tail;
            }
        }
    };
    // Each term carries at most 3k roundings; the positive sum adds k more.
    let rounding = count::<T>(4 * (k + 2)) * eps * sum;
    EvalReal::new(sum + remainder * half, remainder * half + rounding)
}

/// Asymptotic expansion of `e^{-x} I_order(x)` for large `x`.
fn bessel_scaled_asymptotic<T: Real>(x: T, order: u32) -> EvalReal<T> {
    let eps = T::epsilon();
    let mu: T = count((4 * order * order) as usize);
    let eight_x = lit::<T>(8.0) * x;
    let mut term = T::one();
    let mut sum = T::one();
    let mut k: usize = 0;
    let omitted = loop {
        k += 1;
        let odd: T = count(2 * k - 1);
        let next = -term * (mu - odd * odd) / (count::<T>(k) * eight_x);
        if next.abs() >= term.abs() || next.abs() <= eps * sum.abs() * lit(0.0625) || k > 200 {
            break next.abs();
        }
        term = next;
        sum = sum + term;
    };
    let prefactor = T::one() / (T::TAU() * x).sqrt();
    let value = prefactor * sum;
    // Remainder of the Hankel-type expansion is bounded by a modest multiple
    // of the first omitted term; the exponentially small companion
    // contribution is at most e^{-2x} relative.
    let chi = (T::PI() * count::<T>(k)).sqrt();
    let growth = (lit::<T>(0.25) / x).exp();
    let truncation = lit::<T>(2.0) * chi * growth * omitted + (lit::<T>(-2.0) * x).exp();
    let rounding = count::<T>(4 * (k + 3)) * eps;
    EvalReal::new(value, value.abs() * (truncation + rounding))
}

fn scaled_bessel<T: Real>(x: T, order: u32) -> EvalReal<T> {
    if x <= lit(SERIES_CUTOFF) {
        let s = bessel_series(x, order);
        let scale = (-x).exp();
        let value = s.value * scale;
        EvalReal::new(
            value,
            s.abs_err_bound * scale + value.abs() * lit::<T>(3.0) * T::epsilon(),
        )
    } else {
        bessel_scaled_asymptotic(x, order)
    }
}

fn unscaled_bessel<T: Real>(x: T, order: u32, name: &str) -> Result<EvalReal<T>> {
    if x <= lit(SERIES_CUTOFF) {
        return Ok(bessel_series(x, order));
    }
    let s = bessel_scaled_asymptotic(x, order);
    let scale = x.exp();
    let value = s.value * scale;
    if !value.is_finite() {
        return Err(Error::Overflow(format!("{name}({x}) exceeds the float range")));
    }
    // exp(x) of an exact argument: a few ulps.
    Ok(EvalReal::new(
        value,
        s.abs_err_bound * scale + value.abs() * lit::<T>(3.0) * T::epsilon(),
    ))
}

/// Modified Bessel function of the first kind, order zero.
pub fn bessel_i0<T: Real>(x: T) -> Result<EvalReal<T>> {
    check_arg(x, "bessel_i0")?;
    unscaled_bessel(x, 0, "bessel_i0")
}

/// Modified Bessel function of the first kind, order one.
pub fn bessel_i1<T: Real>(x: T) -> Result<EvalReal<T>> {
    check_arg(x, "bessel_i1")?;
    unscaled_bessel(x, 1, "bessel_i1")
}

/// `e^{-x} I_0(x)`, finite for every finite `x >= 0`.
pub fn exp_scaled_i0<T: Real>(x: T) -> Result<EvalReal<T>> {
    check_arg(x, "exp_scaled_i0")?;
    Ok(scaled_bessel(x, 0))
}

/// `e^{-x} I_1(x)`, finite for every finite `x >= 0`.
pub fn exp_scaled_i1<T: Real>(x: T) -> Result<EvalReal<T>> {
    check_arg(x, "exp_scaled_i1")?;
    Ok(scaled_bessel(x, 1))
}

/// The ratio `I_1(u) / I_0(u)`, in `[0, 1)`.
pub fn bessel_ratio<T: Real>(u: T) -> Result<EvalReal<T>> {
    check_arg(u, "bessel_ratio")?;
    if u == T::zero() {
        return Ok(EvalReal::exact(T::zero()));
    }
    let i0 = scaled_bessel(u, 0);
    let i1 = scaled_bessel(u, 1);
    let r = i1.div(i0);
    let value = r.value.min(T::one() - T::epsilon()).max(T::zero());
    Ok(EvalReal::new(value, r.abs_err_bound + (r.value - value).abs()))
}

/// `1 - I_1(u)/I_0(u)` without cancellation for large `u`, where it
/// behaves like `1/(2u)`.
pub fn bessel_ratio_complement<T: Real>(u: T) -> Result<EvalReal<T>> {
    check_arg(u, "bessel_ratio_complement")?;
    if u <= lit(SERIES_CUTOFF) {
        let r = bessel_ratio(u)?;
        let value = T::one() - r.value;
        return Ok(EvalReal::new(value, r.abs_err_bound + value * T::epsilon()));
    }
    // Term-wise difference of the two asymptotic series (the k = 0 terms
    // cancel exactly).
    let eps = T::epsilon();
    let eight_u = lit::<T>(8.0) * u;
    let (mut t0, mut t1) = (T::one(), T::one());
    let mut diff = T::zero();
    let mut k: usize = 0;
    let omitted = loop {
        k += 1;
        let odd: T = count(2 * k - 1);
        let kk: T = count(k);
        let n0 = -t0 * (-odd * odd) / (kk * eight_u);
        let n1 = -t1 * (lit::<T>(4.0) - odd * odd) / (kk * eight_u);
        let step = n0 - n1;
        if n0.abs() >= t0.abs() || step.abs() <= eps * diff.abs() * lit(0.0625) || k > 200 {
            break n0.abs() + n1.abs();
        }
        t0 = n0;
        t1 = n1;
        diff = diff + step;
    };
    let i0 = bessel_scaled_asymptotic(u, 0);
    let prefactor = T::one() / (T::TAU() * u).sqrt();
    let numer = prefactor * diff;
    let chi = (T::PI() * count::<T>(k)).sqrt();
    let growth = (lit::<T>(0.25) / u).exp();
    let numer_err = prefactor
        * (lit::<T>(4.0) * chi * growth * omitted + lit::<T>(2.0) * (lit::<T>(-2.0) * u).exp())
        + numer.abs() * count::<T>(4 * (k + 3)) * eps;
    Ok(EvalReal::new(numer, numer_err).div(i0))
}

/// `P(0 < g < t)` for `t >= 0`, accurate in relative terms for small `t`.
pub fn gaussian_central_mass<T: Real>(t: T) -> EvalReal<T> {
    if t <= lit(2.0) {
        let t2 = t * t;
        let mut term = t;
        let mut sum = t;
        let mut k: usize = 0;
        while term > sum * T::epsilon() * lit(0.125) && k < 500 {
            k += 1;
            term = term * t2 / count(2 * k + 1);
            sum = sum + term;
        }
        let value = gaussian_density(t) * sum;
        // Once a term drops below sum*eps/8 the ratios are below 4/7, so
        // the remainder is under sum*eps/6.
        let err = value * (count::<T>(3 * (k + 3)) * T::epsilon() + (t2 + lit(6.0)) * T::epsilon());
        EvalReal::new(value, err)
    } else {
        let tail = gaussian_upper_tail(t);
        EvalReal::new(lit::<T>(0.5) - tail.value, tail.abs_err_bound + T::epsilon())
    }
}

fn horner<T: Real>(coeffs: &[i64], u: T) -> T {
    coeffs
        .iter()
        .rev()
        .fold(T::zero(), |acc, &c| acc * u + T::from_i64(c).expect("small integer"))
}

/// Nåsell's rational lower bound `L_{0,5,1}(u) <= I_1(u)/I_0(u)`.
pub fn nasell_lower<T: Real>(u: T) -> T {
    horner(&NASELL_NUMERATOR, u) / horner(&NASELL_DENOMINATOR, u)
}

/// Standard normal density.
pub fn gaussian_density<T: Real>(t: T) -> T {
    (-t * t * lit(0.5)).exp() / T::TAU().sqrt()
}

/// Gaussian upper tail `P(g > t)` for standard normal `g`.
pub fn gaussian_upper_tail<T: Real>(t: T) -> EvalReal<T> {
    let eps = T::epsilon();
    if t.is_nan() {
        return EvalReal::new(t, T::infinity());
    }
    if t < T::zero() {
        let r = gaussian_upper_tail(-t);
        let value = T::one() - r.value;
        return EvalReal::new(value, r.abs_err_bound + eps);
    }
    if t.is_infinite() {
        return EvalReal::exact(T::zero());
    }
    let half = lit::<T>(0.5);
    let phi = gaussian_density(t);
    let phi_rel = (t * t * half + lit(3.0)) * eps;
    if t <= lit(2.0) {
        // int_0^t e^{-s^2/2} ds = e^{-t^2/2} sum_k t^{2k+1} / (2k+1)!!
        let t2 = t * t;
        let mut term = t;
        let mut sum = t;
        let mut k: usize = 0;
        let remainder = loop {
            k += 1;
            term = term * t2 / count(2 * k + 1);
            sum = sum + term;
            let ratio = t2 / count(2 * k + 3);
            if ratio < half {
                let tail = term * ratio / (T::one() - ratio);
                if tail <= eps * sum * lit(0.25) || term == T::zero() {
                    break tail;
                }
            }
        };
        let central = phi * sum;
        let central_err = central * (count::<T>(3 * (k + 2)) * eps + phi_rel) + phi * remainder;
        let value = half - central;
        EvalReal::new(value, central_err + eps * half)
    } else {
        // Laplace continued fraction for the Mills ratio,
        // m(t) = 1/(t + 1/(t + 2/(t + 3/(t + ...)))), via modified Lentz.
        // Consecutive convergents bracket the value.
        let tiny = T::min_positive_value().sqrt();
        let mut f = t;
        let mut c = f;
        let mut d = T::zero();
        let mut k: usize = 0;
        let delta_gap = loop {
            k += 1;
            let a: T = count(k);
            d = t + a * d;
            if d.abs() < tiny {
                d = tiny;
            }
            d = T::one() / d;
            c = t + a / c;
            if c.abs() < tiny {
                c = tiny;
            }
            let delta = c * d;
            f = f * delta;
            let gap = (delta - T::one()).abs();
            if gap <= eps * half || k > 5000 {
                break gap;
            }
        };
        let mills = T::one() / f;
        let value = phi * mills;
        let err = value * (count::<T>(2 * k + 4) * eps + phi_rel) + value * delta_gap * lit(2.0);
        EvalReal::new(value, err)
    }
}

/// Two-sided Gaussian tail `P(|g| > t) = 2 P(g > t)` for `t >= 0`.
pub fn gaussian_two_sided_tail<T: Real>(t: T) -> EvalReal<T> {
    gaussian_upper_tail(t.abs()).scale(lit(2.0))
}

/// `E|g|^{2p}` for a standard Gaussian vector in `R^d`, i.e.
/// `d (d+2) ... (d+2p-2)`.
pub fn chi_even_moment(d: u32, p: u32) -> Result<BigUint> {
    if d == 0 || p == 0 {
        return domain(format!("chi_even_moment needs d >= 1 and p >= 1 (got d={d}, p={p})"));
    }
    Ok((0..p).fold(BigUint::from(1u32), |acc, i| acc * BigUint::from(d + 2 * i)))
}
