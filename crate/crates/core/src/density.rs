//! The rank-two Gaussian comparator `X = sqrt(g1^2 + g2^2 / lambda)`,
//! `lambda >= 1`.
//!
//! Its density is
//! `f(t) = sqrt(lambda) t exp(-(lambda+1) t^2 / 4) I0((lambda-1) t^2 / 4)`,
//! evaluated here as `sqrt(lambda) t e^{-t^2/2} [e^{-x} I0(x)]` so that no
//! intermediate overflows. On top of `f` the module provides the tail
//! `h(t) = P(X > t)`, the hazard `f/h`, the truncated cube moment
//! `E (X - u)_+^3`, and the tangent-line bound
//! `E (X-u)_+^3 <= C0 (t-u)^3 h(t)` with `u = t - c / hazard(t)`.

use std::cell::Cell;

use crate::error::{domain, Error, Result};
use crate::quad::{integrate_with_breaks, Tolerance};
use crate::report::CertificateReport;
use crate::scalar::{count, lit, Real};
use crate::specfun::{
    bessel_ratio, bessel_ratio_complement, exp_scaled_i0, gaussian_central_mass,
    gaussian_two_sided_tail, nasell_lower, EvalReal,
};

const MAX_PANELS: usize = 4000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityModel<T> {
    lambda: T,
    t0: T,
    c: T,
    c0: T,
    rel_tol: T,
}

/// Outcome of one evaluation of the truncated cube moment, with both
/// integral representations.
#[derive(Debug, Clone, Copy)]
pub struct CubeMoment<T> {
    pub value: EvalReal<T>,
    /// `int_u^inf (x-u)^3 f(x) dx`
    pub via_density: EvalReal<T>,
    /// `int_u^inf 3 (x-u)^2 h(x) dx`
    pub via_tail: EvalReal<T>,
}

#[derive(Debug, Clone, Copy)]
pub struct TangentBound<T> {
    pub t: T,
    pub u: T,
    pub hazard: EvalReal<T>,
    pub tail: EvalReal<T>,
    pub cube_moment: EvalReal<T>,
    /// `E (X-u)_+^3 / ((t-u)^3 h(t))`
    pub ratio: EvalReal<T>,
    pub c0: T,
}

impl<T: Real> TangentBound<T> {
    pub fn within_bound(&self) -> bool {
        self.ratio.value <= self.c0
    }
}

/// `sqrt(2/(pi e))`.
pub fn claim2_threshold<T: Real>() -> T {
    (lit::<T>(2.0) / (T::PI() * T::E())).sqrt()
}

impl<T: Real> DensityModel<T> {
    pub fn new(lambda: T) -> Result<Self> {
        if !lambda.is_finite() || lambda < T::one() {
            return domain(format!("density model needs finite lambda >= 1, got {lambda}"));
        }
        let t0 = lit::<T>(0.75);
        let c = (T::one() - t0) * claim2_threshold::<T>();
        let c0 = lit::<T>(6.0) * c.exp() / (c * c * c);
        let rel_tol = lit::<T>(1e-12).max(count::<T>(256) * T::epsilon());
        Ok(Self {
            lambda,
            t0,
            c,
            c0,
            rel_tol,
        })
    }

    /// Overrides the relative quadrature tolerance.
    pub fn with_tolerance(mut self, rel_tol: T) -> Self {
        self.rel_tol = rel_tol.max(count::<T>(64) * T::epsilon());
        self
    }

    pub fn lambda(&self) -> T {
        self.lambda
    }

    /// Left end `3/4` of the log-concavity range.
    pub fn t0(&self) -> T {
        self.t0
    }

    /// `(1 - t0) sqrt(2/(pi e))`.
    pub fn c(&self) -> T {
        self.c
    }

    /// `6 e^c / c^3`.
    pub fn c0(&self) -> T {
        self.c0
    }

    pub fn rel_tol(&self) -> T {
        self.rel_tol
    }

    fn bessel_arg(&self, t: T) -> T {
        (self.lambda - T::one()) * t * t * lit(0.25)
    }

    pub fn density_f(&self, t: T) -> EvalReal<T> {
        if !(t > T::zero()) {
            return EvalReal::exact(T::zero());
        }
        if t.is_infinite() {
            return EvalReal::exact(T::zero());
        }
        let s = exp_scaled_i0(self.bessel_arg(t)).expect("argument is finite and nonnegative");
        let g = (-t * t * lit(0.5)).exp();
        let value = self.lambda.sqrt() * t * g * s.value;
        let rel = s.rel_err() + (t * t * lit(0.5) + lit(8.0)) * T::epsilon();
        EvalReal::new(value, value * rel)
    }

    /// `log f(t)` for `t > 0`.
    pub fn log_density(&self, t: T) -> T {
        let s = exp_scaled_i0(self.bessel_arg(t)).expect("argument is finite and nonnegative");
        lit::<T>(0.5) * self.lambda.ln() + t.ln() - t * t * lit(0.5) + s.value.ln()
    }

    /// Integrates `f` over `[a, b]` with the model tolerance; also returns
    /// the largest relative error bound seen among density evaluations.
    fn integrate_density<F: Fn(T) -> T>(&self, weight: F, a: T, b: T, rel: T) -> Result<EvalReal<T>> {
        let worst = Cell::new(T::zero());
        let breaks: Vec<T> = (1..8).map(|k| a + (b - a) * count::<T>(k) / lit(8.0)).collect();
        let q = integrate_with_breaks(
            |x| {
                let f = self.density_f(x);
                if f.value > T::zero() {
                    worst.set(worst.get().max(f.rel_err()));
                }
                weight(x) * f.value
            },
            a,
            b,
            &breaks,
            Tolerance::relative(rel),
            MAX_PANELS,
        )?;
        Ok(EvalReal::new(
            q.value,
            q.abs_err_bound + q.value.abs() * worst.get(),
        ))
    }

    /// `h(t) = P(X > t)`.
    pub fn tail_h(&self, t: T) -> Result<EvalReal<T>> {
        if t.is_nan() {
            return domain("tail_h: NaN argument");
        }
        if t <= T::zero() {
            return Ok(EvalReal::exact(T::one()));
        }
        // |g1| <= X <= sqrt(g1^2 + g2^2): 2 Phibar(t) <= h(t) <= e^{-t^2/2}.
        let lower = gaussian_two_sided_tail(t).value;
        if lower <= T::min_positive_value() {
            let upper = (-t * t * lit(0.5)).exp();
            return Ok(EvalReal::new(upper * lit(0.5), upper * lit(0.5)));
        }
        let eta = self.rel_tol * lit(0.125);
        let end = (lit::<T>(-2.0) * (eta * lower).ln()).sqrt();
        let truncation = (-end * end * lit(0.5)).exp();
        let q = self.integrate_density(|_| T::one(), t, end, self.rel_tol * lit(0.5))?;
        let half_trunc = truncation * lit(0.5);
        Ok(EvalReal::new(q.value + half_trunc, q.abs_err_bound + half_trunc))
    }

    /// `a(t) = f(t) / h(t)`, the negative log-derivative of the tail.
    pub fn hazard_a(&self, t: T) -> Result<EvalReal<T>> {
        if !(t > T::zero()) || !t.is_finite() {
            return domain(format!("hazard_a needs finite t > 0, got {t}"));
        }
        let h = self.tail_h(t)?;
        if h.value <= T::zero() {
            return Err(Error::NotEvaluable(format!("tail underflows at t = {t}")));
        }
        Ok(self.density_f(t).div(h))
    }

    /// End point `T` beyond which `E (X-u)^3 1{X > T}` and
    /// `int_T^inf 3(x-u)^2 h` are below `eta * E (X-u)_+^3`.
    fn moment_cutoff(&self, u: T, eta: T) -> (T, T) {
        // E (X-u)_+^3 >= P(X > u+1) >= 2 Phibar(u+1).
        let floor = gaussian_two_sided_tail(u + T::one()).value;
        let mut end = u + T::one();
        loop {
            let g = (-end * end * lit(0.5)).exp();
            let e2 = end * end;
            let via_density = g * (e2 * e2 + lit::<T>(4.0) * e2 + lit(8.0)) / end;
            let via_tail = lit::<T>(3.0) * g * (e2 + lit(2.0)) / end;
            let bound = via_density.max(via_tail);
            if bound <= eta * floor || end > u + lit(60.0) {
                return (end, bound);
            }
            end = end + lit(0.25);
        }
    }

    /// `E (X - u)_+^3`, computed against the density and against the tail;
    /// the two must agree within their combined error.
    pub fn truncated_cube_moment(&self, u: T) -> Result<CubeMoment<T>> {
        if !u.is_finite() || u < T::zero() {
            return domain(format!("truncated_cube_moment needs finite u >= 0, got {u}"));
        }
        let floor = gaussian_two_sided_tail(u + T::one()).value;
        if floor <= T::min_positive_value() {
            return Err(Error::NotEvaluable(format!("cube moment underflows at u = {u}")));
        }
        let eta = self.rel_tol * lit(0.125);
        let (end, trunc) = self.moment_cutoff(u, eta);
        let half_trunc = trunc * lit(0.5);

        let d = self.integrate_density(
            |x| {
                let s = x - u;
                s * s * s
            },
            u,
            end,
            self.rel_tol * lit(0.5),
        )?;
        let via_density = EvalReal::new(d.value + half_trunc, d.abs_err_bound + half_trunc);

        let worst = Cell::new(T::zero());
        let failed = Cell::new(false);
        let breaks: Vec<T> = (1..8).map(|k| u + (end - u) * count::<T>(k) / lit(8.0)).collect();
        let q = integrate_with_breaks(
            |x| match self.tail_h(x) {
                Ok(h) => {
                    if h.value > T::zero() {
                        worst.set(worst.get().max(h.rel_err()));
                    }
                    let s = x - u;
                    lit::<T>(3.0) * s * s * h.value
                }
                Err(_) => {
                    failed.set(true);
                    T::nan()
                }
            },
            u,
            end,
            &breaks,
            Tolerance::relative(self.rel_tol * lit(0.5)),
            MAX_PANELS,
        );
        if failed.get() {
            return Err(Error::Quadrature("inner tail evaluation failed".into()));
        }
        let q = q?;
        let via_tail = EvalReal::new(
            q.value + half_trunc,
            q.abs_err_bound + q.value.abs() * worst.get() + half_trunc,
        );

        let gap = (via_density.value - via_tail.value).abs();
        let allowed = lit::<T>(2.0) * (via_density.abs_err_bound + via_tail.abs_err_bound)
            + count::<T>(64) * T::epsilon() * via_density.value.abs();
        if gap > allowed {
            return Err(Error::Invariant(format!(
                "cube moment representations disagree at u = {u}: {} vs {} (allowed {allowed})",
                via_density.value, via_tail.value
            )));
        }
        Ok(CubeMoment {
            value: EvalReal::new(via_density.value, via_density.abs_err_bound.max(gap)),
            via_density,
            via_tail,
        })
    }

    /// Tangent-line bound at `t > 1`: picks `u = t - c / a(t)`, requires
    /// `u > t0`, and returns the ratio `E(X-u)_+^3 / ((t-u)^3 h(t))`, which
    /// log-concavity of `h` on `(t0, inf)` caps at `C0`.
    pub fn lemma4_bound(&self, t: T) -> Result<TangentBound<T>> {
        if !(t > T::one()) || !t.is_finite() {
            return domain(format!("tangent bound needs finite t > 1, got {t}"));
        }
        let hazard = self.hazard_a(t)?;
        let u = t - self.c / hazard.value;
        if !(u > self.t0) {
            return Err(Error::Invariant(format!(
                "u = {u} is not above t0 = {} (lambda = {}, t = {t})",
                self.t0, self.lambda
            )));
        }
        let cube = self.truncated_cube_moment(u)?;
        let tail = self.tail_h(t)?;
        let gap = self.c / hazard.value;
        let gap_rel = hazard.rel_err() + lit::<T>(2.0) * T::epsilon();
        let denom_value = gap * gap * gap;
        let denom = EvalReal::new(denom_value, denom_value * lit::<T>(3.0) * gap_rel).mul(tail);
        let ratio = cube.value.div(denom);
        let out = TangentBound {
            t,
            u,
            hazard,
            tail,
            cube_moment: cube.value,
            ratio,
            c0: self.c0,
        };
        if !out.within_bound() {
            return Err(Error::Invariant(format!(
                "ratio {} exceeds C0 = {} at lambda = {}, t = {t}",
                ratio.value, self.c0, self.lambda
            )));
        }
        Ok(out)
    }

    /// `B(t) = (2uR(u) + 1/2)^2 - (2u - 1/2)^2 + 1 + t^2` at
    /// `u = (lambda-1) t^2/4`; `(log f)''(t) = -B(t)/t^2`.
    pub fn log_concavity_bracket(&self, t: T) -> Result<EvalReal<T>> {
        if !(t > T::zero()) || !t.is_finite() {
            return domain(format!("bracket needs finite t > 0, got {t}"));
        }
        let u = self.bessel_arg(t);
        let r = bessel_ratio(u)?;
        let comp = bessel_ratio_complement(u)?;
        // (2uR + 1/2)^2 - (2u - 1/2)^2 = 2u (1 + R) (1 - 2u (1 - R))
        let two_u = lit::<T>(2.0) * u;
        let inner = T::one() - two_u * comp.value;
        let inner_err = two_u * comp.abs_err_bound + (two_u * comp.value).abs() * lit::<T>(2.0) * T::epsilon();
        let outer = two_u * (T::one() + r.value);
        let outer_err = two_u * r.abs_err_bound + outer * lit::<T>(2.0) * T::epsilon();
        let prod = outer * inner;
        let prod_err = outer_err * inner.abs() + outer * inner_err + outer_err * inner_err;
        let tail = T::one() + t * t;
        let value = prod + tail;
        let err = prod_err + (prod.abs() + tail) * lit::<T>(3.0) * T::epsilon();
        Ok(EvalReal::new(value, err))
    }

    /// Second derivative of `log f` by central differences with one
    /// Richardson step, `h = max(1e-4, 1e-4 t)`.
    pub fn log_density_second_derivative(&self, t: T) -> T {
        let step = lit::<T>(1e-4).max(lit::<T>(1e-4) * t);
        let g0 = self.log_density(t);
        let second = |h: T| (self.log_density(t + h) - lit::<T>(2.0) * g0 + self.log_density(t - h)) / (h * h);
        let coarse = second(step);
        let fine = second(step * lit(0.5));
        (lit::<T>(4.0) * fine - coarse) / lit(3.0)
    }

    /// Numeric log-concavity on `grid` (all points must exceed `3/4`):
    /// the exact bracket is positive, the finite-difference `(log f)''` is
    /// non-positive, and the two agree through `(log f)'' = -B/t^2`.
    pub fn logconcavity_check(&self, grid: &[T]) -> Result<CertificateReport> {
        if let Some(bad) = grid.iter().find(|&&t| !(t > self.t0)) {
            return domain(format!("log-concavity grid point {bad} is not above 3/4"));
        }
        let mut report = CertificateReport::new();
        for &t in grid {
            let bracket = self.log_concavity_bracket(t)?;
            let exact = -bracket.value / (t * t);
            let fd = self.log_density_second_derivative(t);
            let step = lit::<T>(1e-4).max(lit::<T>(1e-4) * t);
            let noise = count::<T>(64) * T::epsilon() * (self.log_density(t).abs() + T::one()) / (step * step);
            let tol = lit::<T>(1e-5) * (T::one() + exact.abs()) + noise + bracket.abs_err_bound / (t * t);
            let agree = (fd - exact).abs() <= tol;
            report.push(
                format!("lambda={} t={}", self.lambda, t),
                bracket.lower() > T::zero() && fd <= tol && agree,
                format!(
                    "bracket={} (+-{}), fd (log f)''={}, -B/t^2={}",
                    bracket.value, bracket.abs_err_bound, fd, exact
                ),
            );
            // Reduced form with R replaced by its rational lower bound and
            // t by 3/4.
            let u = self.bessel_arg(t);
            let l = nasell_lower(u);
            let two_u = lit::<T>(2.0) * u;
            let reduced = (two_u * l + lit(0.5)).powi(2) - (two_u - lit(0.5)).powi(2) + lit(1.5625);
            report.push(
                format!("lambda={} t={} reduced", self.lambda, t),
                reduced > T::zero(),
                format!("u={u}, reduced bracket={reduced}"),
            );
        }
        Ok(report)
    }
}

/// `psi(u) = int_0^{pi sqrt u} e^{-s^2/2} ds - sqrt(2 pi u / (4u + 1))`.
pub fn psi<T: Real>(u: T) -> Result<EvalReal<T>> {
    if !u.is_finite() || u < T::zero() {
        return domain(format!("psi needs finite u >= 0, got {u}"));
    }
    let root2pi = T::TAU().sqrt();
    let mass = gaussian_central_mass(T::PI() * u.sqrt()).scale(root2pi);
    let other = (T::TAU() * u / (lit::<T>(4.0) * u + T::one())).sqrt();
    let value = mass.value - other;
    Ok(EvalReal::new(
        value,
        mass.abs_err_bound + other * lit::<T>(3.0) * T::epsilon() + value.abs() * T::epsilon(),
    ))
}

/// `log sqrt(pi/2) - pi^2 u / 2 + (3/2) log(4u + 1)`, which has the sign of
/// `psi'(u)`.
pub fn psi_sign_function<T: Real>(u: T) -> T {
    (T::PI() / lit(2.0)).sqrt().ln() - T::PI() * T::PI() * u * lit(0.5)
        + lit::<T>(1.5) * (lit::<T>(4.0) * u + T::one()).ln()
}

/// Checks `f_lambda(1) > sqrt(2/(pi e))` for each `lambda` in the grid,
/// `psi > 0` on a logarithmic grid over `[1e-4, 1e4]`, and the
/// positive-then-negative sign pattern of [`psi_sign_function`].
pub fn claim2_check<T: Real>(lambda_grid: &[T]) -> Result<CertificateReport> {
    if lambda_grid.is_empty() {
        return domain("claim2_check: empty lambda grid");
    }
    let threshold = claim2_threshold::<T>();
    let mut report = CertificateReport::new();
    for &lambda in lambda_grid {
        let f1 = DensityModel::new(lambda)?.density_f(T::one());
        let margin = f1.value - threshold;
        report.push(
            format!("f_lambda(1) > sqrt(2/(pi e)) at lambda={lambda}"),
            margin > f1.abs_err_bound + threshold * T::epsilon(),
            format!("f={} (+-{}), margin={}", f1.value, f1.abs_err_bound, margin),
        );
    }

    let psi0 = psi(T::zero())?;
    report.push("psi(0) = 0", psi0.value == T::zero(), format!("psi(0)={}", psi0.value));

    let points = 161;
    let mut worst = T::infinity();
    let mut worst_at = T::zero();
    let mut all_positive = true;
    for k in 0..points {
        let exponent = lit::<T>(-4.0) + lit::<T>(8.0) * count::<T>(k) / count::<T>(points - 1);
        let u = lit::<T>(10.0).powf(exponent);
        let p = psi(u)?;
        if p.lower() <= T::zero() {
            all_positive = false;
        }
        if p.value < worst {
            worst = p.value;
            worst_at = u;
        }
    }
    report.push(
        "psi > 0 on log grid [1e-4, 1e4]",
        all_positive,
        format!("{points} points, min psi={worst} at u={worst_at}"),
    );

    // Sign pattern on [0, 10]: positive at 0, negative at the end, one change.
    let steps = 10_000;
    let mut changes = 0;
    let mut prev = psi_sign_function(T::zero());
    for k in 1..=steps {
        let u = lit::<T>(10.0) * count::<T>(k) / count::<T>(steps);
        let s = psi_sign_function(u);
        if (s > T::zero()) != (prev > T::zero()) {
            changes += 1;
        }
        prev = s;
    }
    let start = psi_sign_function(T::zero());
    report.push(
        "sign of psi' is + then -",
        start > T::zero() && prev < T::zero() && changes == 1,
        format!("value at 0={start}, value at 10={prev}, sign changes={changes}"),
    );
    Ok(report)
}

/// `E (|g| - s)_+^3` for a standard Gaussian `g` and `s >= 0`; the rank-one
/// comparator's truncated cube moment.
pub fn half_normal_cube_moment<T: Real>(s: T, rel_tol: T) -> Result<EvalReal<T>> {
    if !s.is_finite() || s < T::zero() {
        return domain(format!("half_normal_cube_moment needs finite s >= 0, got {s}"));
    }
    let floor = gaussian_two_sided_tail(s + T::one()).value;
    if floor <= T::min_positive_value() {
        return Err(Error::NotEvaluable(format!("cube moment underflows at s = {s}")));
    }
    let eta = rel_tol * lit(0.125);
    let two_phi = |x: T| lit::<T>(2.0) * (-x * x * lit(0.5)).exp() / T::TAU().sqrt();
    // int_T^inf (x-s)^3 2 phi(x) dx <= 2 phi(T) (T^2 + 2)
    let mut end = s + T::one();
    while two_phi(end) * (end * end + lit(2.0)) > eta * floor {
        end = end + lit(0.25);
    }
    let trunc = two_phi(end) * (end * end + lit(2.0));
    let q = integrate_with_breaks(
        |x| {
            let d = x - s;
            d * d * d * two_phi(x)
        },
        s,
        end,
        &[],
        Tolerance::relative(rel_tol * lit(0.5)),
        MAX_PANELS,
    )?;
    let half = trunc * lit(0.5);
    Ok(EvalReal::new(
        q.value + half,
        q.abs_err_bound + half + q.value * (end * end + lit(8.0)) * T::epsilon(),
    ))
}
