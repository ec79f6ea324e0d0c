//! Monte Carlo for sums `S = sum_j A_j xi_j` of independent uniform
//! vectors `xi_j` on the sphere `S^{d-1}`, with `d x d` matrices `A_j`.
//!
//! Sample `i` draws `xi_j` from the stream `(seed, i, j)`, so hit counts
//! are identical for any number of worker threads.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::moments::{gaussian_form_pz_bound, sharp_pz_at_15};
use crate::rademacher::{exact_tail, WeightConfig, MAX_MOMENT_ENUMERATION};
use crate::rng::CounterRng;
use crate::specfun::gaussian_two_sided_tail;

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

const BLOCK: u64 = 4096;

/// Lower bound `(7 - 4 sqrt 3) / 75` on `P(|S|^2 >= E|S|^2)`.
pub fn theorem2_bound() -> f64 {
    (7.0 - 4.0 * 3f64.sqrt()) / 75.0
}

/// Lower bound `(2 sqrt 3 - 3) / 15` for the symmetrized inner
/// probability.
pub fn symmetrization_bound() -> f64 {
    sharp_pz_at_15()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MatrixCoefficients {
    d: usize,
    /// Row-major `d x d` blocks.
    matrices: Vec<Vec<f64>>,
}

impl MatrixCoefficients {
    pub fn new(d: usize, matrices: Vec<Vec<f64>>) -> Result<Self> {
        if d == 0 {
            return domain("dimension must be >= 1");
        }
        if matrices.is_empty() {
            return domain("need at least one matrix");
        }
        if let Some(m) = matrices.iter().find(|m| m.len() != d * d) {
            return domain(format!("matrix with {} entries, expected {}", m.len(), d * d));
        }
        if matrices.iter().flatten().any(|x| !x.is_finite()) {
            return domain("matrix entries must be finite");
        }
        Ok(Self { d, matrices })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn n(&self) -> usize {
        self.matrices.len()
    }

    pub fn matrices(&self) -> &[Vec<f64>] {
        &self.matrices
    }

    /// `E|S|^2 = sum_j |A_j|_F^2 / d`.
    pub fn mu(&self) -> f64 {
        self.matrices.iter().flatten().map(|x| x * x).sum::<f64>() / self.d as f64
    }

    /// `y = A_j x`.
    fn apply(&self, j: usize, x: &[f64], y: &mut [f64]) {
        let a = &self.matrices[j];
        for (r, yr) in y.iter_mut().enumerate() {
            *yr = a[r * self.d..(r + 1) * self.d]
                .iter()
                .zip(x)
                .map(|(p, q)| p * q)
                .sum();
        }
    }

    /// `A_j = Id / sqrt(n)`.
    pub fn identity_scaled(d: usize, n: usize) -> Result<Self> {
        let s = 1.0 / (n as f64).sqrt();
        Self::new(d, (0..n).map(|_| diag(d, |i| if i < d { s } else { 0.0 })).collect())
    }

    /// `A_j = diag(1, 0, ..., 0) / sqrt(n)`.
    pub fn rank_one_diag(d: usize, n: usize) -> Result<Self> {
        let s = 1.0 / (n as f64).sqrt();
        Self::new(d, (0..n).map(|_| diag(d, |i| if i == 0 { s } else { 0.0 })).collect())
    }

    /// i.i.d. standard Gaussian entries.
    pub fn gaussian(d: usize, n: usize, seed: u64) -> Result<Self> {
        let mut rng = CounterRng::new(seed, 0, u64::MAX);
        Self::new(d, (0..n).map(|_| gaussian_block(&mut rng, d, d)).collect())
    }

    /// `A_j = B_j C_j` with Gaussian `B_j` (`d x rank`), `C_j` (`rank x d`).
    pub fn rank_deficient(d: usize, n: usize, rank: usize, seed: u64) -> Result<Self> {
        if rank == 0 || rank > d {
            return domain(format!("rank {rank} outside 1..={d}"));
        }
        let mut rng = CounterRng::new(seed, 1, u64::MAX);
        let mats = (0..n)
            .map(|_| {
                let b = gaussian_block(&mut rng, d, rank);
                let c = gaussian_block(&mut rng, rank, d);
                let mut a = vec![0.0; d * d];
                for r in 0..d {
                    for k in 0..d {
                        a[r * d + k] = (0..rank).map(|m| b[r * rank + m] * c[m * d + k]).sum();
                    }
                }
                a
            })
            .collect();
        Self::new(d, mats)
    }

    /// One Gaussian matrix scaled by 10 among `n - 1` scaled by 0.1.
    pub fn single_spike(d: usize, n: usize, seed: u64) -> Result<Self> {
        let mut rng = CounterRng::new(seed, 2, u64::MAX);
        let mats = (0..n)
            .map(|j| {
                let s = if j == 0 { 10.0 } else { 0.1 };
                gaussian_block(&mut rng, d, d).into_iter().map(|x| x * s).collect()
            })
            .collect();
        Self::new(d, mats)
    }

    pub fn from_family(family: Family, d: usize, n: usize, seed: u64) -> Result<Self> {
        match family {
            Family::IdentityScaled => Self::identity_scaled(d, n),
            Family::RankOneDiag => Self::rank_one_diag(d, n),
            Family::Gaussian => Self::gaussian(d, n, seed),
            Family::RankDeficient => Self::rank_deficient(d, n, d.div_ceil(2), seed),
            Family::SingleSpike => Self::single_spike(d, n, seed),
        }
    }
}

fn diag(d: usize, f: impl Fn(usize) -> f64) -> Vec<f64> {
    let mut a = vec![0.0; d * d];
    for i in 0..d {
        a[i * d + i] = f(i);
    }
    a
}

fn gaussian_block(rng: &mut impl Rng, rows: usize, cols: usize) -> Vec<f64> {
    (0..rows * cols).map(|_| rng.sample(StandardNormal)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    IdentityScaled,
    RankOneDiag,
    Gaussian,
    RankDeficient,
    SingleSpike,
}

impl Family {
    pub const ALL: [Family; 5] = [
        Family::IdentityScaled,
        Family::RankOneDiag,
        Family::Gaussian,
        Family::RankDeficient,
        Family::SingleSpike,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::IdentityScaled => "identity-scaled",
            Family::RankOneDiag => "rank-one-diag",
            Family::Gaussian => "gaussian",
            Family::RankDeficient => "rank-deficient",
            Family::SingleSpike => "single-spike",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| Error::Domain(format!("unknown family {s:?}")))
    }
}

/// Adversarial ensembles for the lower-bound experiments: Gaussian,
/// rank-deficient, the two extremal diagonal families and single-spike
/// mixtures, with `d <= 8` and `n <= 32`.
pub fn adversarial_ensembles(seed: u64) -> Vec<(String, MatrixCoefficients)> {
    let plan: [(Family, usize, usize); 20] = [
        (Family::Gaussian, 1, 1),
        (Family::Gaussian, 2, 2),
        (Family::Gaussian, 2, 8),
        (Family::Gaussian, 3, 3),
        (Family::Gaussian, 5, 16),
        (Family::Gaussian, 8, 32),
        (Family::RankDeficient, 2, 2),
        (Family::RankDeficient, 3, 4),
        (Family::RankDeficient, 5, 5),
        (Family::RankDeficient, 8, 8),
        (Family::IdentityScaled, 1, 2),
        (Family::IdentityScaled, 2, 2),
        (Family::IdentityScaled, 3, 1),
        (Family::IdentityScaled, 8, 32),
        (Family::RankOneDiag, 1, 1),
        (Family::RankOneDiag, 2, 4),
        (Family::RankOneDiag, 8, 32),
        (Family::SingleSpike, 2, 4),
        (Family::SingleSpike, 3, 8),
        (Family::SingleSpike, 8, 16),
    ];
    plan.iter()
        .enumerate()
        .map(|(k, &(f, d, n))| {
            let m = MatrixCoefficients::from_family(f, d, n, seed.wrapping_add(k as u64))
                .expect("valid ensemble");
            (format!("{} d={d} n={n}", f.name()), m)
        })
        .collect()
}

/// Uniform point on `S^{d-1}` as `g / |g|`; a zero draw is redrawn.
pub fn sample_sphere(d: usize, rng: &mut impl Rng, out: &mut [f64]) {
    debug_assert_eq!(out.len(), d);
    loop {
        for x in out.iter_mut() {
            *x = rng.sample(StandardNormal);
        }
        let norm = out.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 0.0 && norm.is_finite() {
            out.iter_mut().for_each(|x| *x /= norm);
            return;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Convention {
    /// `|S| >= threshold`
    Ge,
    /// `|S| > threshold`
    Gt,
}

impl Convention {
    pub fn symbol(self) -> &'static str {
        match self {
            Convention::Ge => "ge",
            Convention::Gt => "gt",
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SimConfig {
    pub samples: u64,
    pub seed: u64,
    /// Worker threads; `None` uses the global pool.
    pub workers: Option<usize>,
}

impl SimConfig {
    pub fn new(samples: u64, seed: u64) -> Self {
        Self {
            samples,
            seed,
            workers: None,
        }
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = Some(workers);
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailEstimate {
    pub p_hat: f64,
    pub hits: u64,
    pub samples: u64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub seed: u64,
    pub convention: Convention,
    /// Samples within `1e-12` relative of the threshold, resolved by the
    /// convention.
    pub ties: u64,
}

impl TailEstimate {
    pub fn from_counts(hits: u64, samples: u64, seed: u64, convention: Convention, ties: u64) -> Self {
        let (ci_low, ci_high) = wilson_interval(hits, samples);
        Self {
            p_hat: hits as f64 / samples as f64,
            hits,
            samples,
            ci_low,
            ci_high,
            seed,
            convention,
            ties,
        }
    }

    pub fn stderr(&self) -> f64 {
        (self.p_hat * (1.0 - self.p_hat) / self.samples as f64).sqrt()
    }
}

/// 95% Wilson score interval.
pub fn wilson_interval(hits: u64, samples: u64) -> (f64, f64) {
    let n = samples as f64;
    let p = hits as f64 / n;
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = Z95 / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    ((center - half).max(0.0).min(p), (center + half).min(1.0).max(p))
}

fn run_pool<R: Send>(workers: Option<usize>, job: impl FnOnce() -> R + Send) -> Result<R> {
    match workers {
        None => Ok(job()),
        Some(0) => domain("workers must be >= 1"),
        Some(k) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(k)
                .build()
                .map_err(|e| Error::Resource(format!("thread pool: {e}")))?;
            Ok(pool.install(job))
        }
    }
}

/// For each sample, `|S|^2` and `sum_j |A_j xi_j|^2`.
fn for_each_sample<R: Send + Default>(
    mc: &MatrixCoefficients,
    cfg: &SimConfig,
    visit: impl Fn(&mut R, f64, f64, &[Vec<f64>]) + Sync + Send,
) -> Result<Vec<R>> {
    if cfg.samples == 0 {
        return domain("samples must be >= 1");
    }
    let d = mc.d;
    let n = mc.n();
    let blocks = cfg.samples.div_ceil(BLOCK);
    run_pool(cfg.workers, || {
        (0..blocks)
            .into_par_iter()
            .map(|b| {
                let mut acc = R::default();
                let mut xi = vec![0.0; d];
                let mut images = vec![vec![0.0; d]; n];
                let mut s = vec![0.0; d];
                for i in b * BLOCK..((b + 1) * BLOCK).min(cfg.samples) {
                    s.iter_mut().for_each(|x| *x = 0.0);
                    let mut parts = 0.0;
                    for (j, img) in images.iter_mut().enumerate() {
                        let mut rng = CounterRng::new(cfg.seed, i, j as u64);
                        sample_sphere(d, &mut rng, &mut xi);
                        mc.apply(j, &xi, img);
                        for (sk, ik) in s.iter_mut().zip(img.iter()) {
                            *sk += ik;
                        }
                        parts += img.iter().map(|x| x * x).sum::<f64>();
                    }
                    let norm = s.iter().map(|x| x * x).sum::<f64>();
                    visit(&mut acc, norm, parts, &images);
                }
                acc
            })
            .collect()
    })
}

/// `P(|S| >= threshold)` and `P(|S| > threshold)` from the same samples.
/// Squared norms within `1e-12` relative of `threshold^2` count as ties:
/// hits for `>=`, misses for `>`.
pub fn estimate_both(
    mc: &MatrixCoefficients,
    threshold: f64,
    cfg: &SimConfig,
) -> Result<(TailEstimate, TailEstimate)> {
    if !(threshold >= 0.0) || !threshold.is_finite() {
        return domain(format!("threshold must be finite and >= 0, got {threshold}"));
    }
    let thr = threshold * threshold;
    let band = 1e-12 * thr.max(f64::MIN_POSITIVE);
    let parts: Vec<(u64, u64)> = for_each_sample(mc, cfg, |acc: &mut (u64, u64), norm, _, _| {
        let diff = norm - thr;
        if diff.abs() <= band {
            acc.1 += 1;
        } else if diff > 0.0 {
            acc.0 += 1;
        }
    })?;
    let above: u64 = parts.iter().map(|p| p.0).sum();
    let ties: u64 = parts.iter().map(|p| p.1).sum();
    Ok((
        TailEstimate::from_counts(above + ties, cfg.samples, cfg.seed, Convention::Ge, ties),
        TailEstimate::from_counts(above, cfg.samples, cfg.seed, Convention::Gt, ties),
    ))
}

/// `P(|S| >= threshold)` or `P(|S| > threshold)`; see [`estimate_both`]
/// for ties.
pub fn estimate_exceed(
    mc: &MatrixCoefficients,
    threshold: f64,
    convention: Convention,
    cfg: &SimConfig,
) -> Result<TailEstimate> {
    let (ge, gt) = estimate_both(mc, threshold, cfg)?;
    Ok(match convention {
        Convention::Ge => ge,
        Convention::Gt => gt,
    })
}

/// Mean of `|S|^2` and its standard error.
pub fn mean_square_norm(mc: &MatrixCoefficients, cfg: &SimConfig) -> Result<(f64, f64)> {
    let parts: Vec<(f64, f64)> = for_each_sample(mc, cfg, |acc: &mut (f64, f64), norm, _, _| {
        acc.0 += norm;
        acc.1 += norm * norm;
    })?;
    Ok(mean_and_stderr(&parts, cfg.samples))
}

fn mean_and_stderr(parts: &[(f64, f64)], samples: u64) -> (f64, f64) {
    let (s1, s2) = parts.iter().fold((0.0, 0.0), |a, p| (a.0 + p.0, a.1 + p.1));
    let m = samples as f64;
    let mean = s1 / m;
    let var = (s2 / m - mean * mean).max(0.0) * m / (m - 1.0).max(1.0);
    (mean, (var / m).sqrt())
}

/// A Monte Carlo estimate checked against a constant.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundCheck {
    pub estimate: TailEstimate,
    pub mu: f64,
    pub bound: f64,
    pub pass: bool,
}

/// `P(|S|^2 >= mu)` against `(7 - 4 sqrt 3)/75`; fails only when the
/// whole Wilson interval lies below the bound.
pub fn theorem2_experiment(mc: &MatrixCoefficients, cfg: &SimConfig) -> Result<BoundCheck> {
    Ok(bound_experiments(mc, cfg)?.0)
}

/// `P(|S|^2 > mu)` against `1 - (7 - 4 sqrt 3)/75`; fails only when the
/// whole Wilson interval lies above it.
pub fn corollary_experiment(mc: &MatrixCoefficients, cfg: &SimConfig) -> Result<BoundCheck> {
    Ok(bound_experiments(mc, cfg)?.1)
}

/// Both of the above from one pass over the samples.
pub fn bound_experiments(mc: &MatrixCoefficients, cfg: &SimConfig) -> Result<(BoundCheck, BoundCheck)> {
    let mu = mc.mu();
    let (ge, gt) = estimate_both(mc, mu.sqrt(), cfg)?;
    let bound = theorem2_bound();
    Ok((
        BoundCheck {
            pass: ge.ci_high >= bound,
            estimate: ge,
            mu,
            bound,
        },
        BoundCheck {
            pass: gt.ci_low <= 1.0 - bound,
            estimate: gt,
            mu,
            bound: 1.0 - bound,
        },
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SymmetrizationReport {
    pub samples: u64,
    pub min_inner: f64,
    pub violations: u64,
    /// Frequency of `sum_j |A_j xi_j|^2 >= mu`.
    pub conditioning_frequency: f64,
    pub bound: f64,
}

impl SymmetrizationReport {
    pub fn pass(&self) -> bool {
        self.violations == 0
    }
}

/// For each sampled tuple `xi`, the exact probability over signs that
/// `|sum_j eps_j A_j xi_j|^2 >= sum_j |A_j xi_j|^2`, compared with
/// `(2 sqrt 3 - 3)/15`.
pub fn symmetrization_diagnostic(
    mc: &MatrixCoefficients,
    outer_samples: u64,
    seed: u64,
) -> Result<SymmetrizationReport> {
    if mc.n() > MAX_MOMENT_ENUMERATION {
        return Err(Error::Resource(format!(
            "symmetrization enumerates 2^n signs; n = {} exceeds {MAX_MOMENT_ENUMERATION}",
            mc.n()
        )));
    }
    let mu = mc.mu();
    let bound = symmetrization_bound();
    let cfg = SimConfig::new(outer_samples, seed);
    #[derive(Default)]
    struct Acc {
        min: Option<f64>,
        violations: u64,
        conditioned: u64,
        error: Option<Error>,
    }
    let parts: Vec<Acc> = for_each_sample(mc, &cfg, |acc: &mut Acc, _, parts, images| {
        if parts >= mu {
            acc.conditioned += 1;
        }
        let inner = WeightConfig::new(images.to_vec()).and_then(|w| exact_tail(&w, 1.0, false));
        match inner {
            Ok(t) => {
                let p = t.to_f64();
                acc.min = Some(acc.min.map_or(p, |m: f64| m.min(p)));
                if p < bound {
                    acc.violations += 1;
                }
            }
            Err(e) => acc.error = acc.error.take().or(Some(e)),
        }
    })?;
    if let Some(e) = parts.iter().find_map(|a| a.error.clone()) {
        return Err(e);
    }
    Ok(SymmetrizationReport {
        samples: outer_samples,
        min_inner: parts.iter().filter_map(|a| a.min).fold(f64::INFINITY, f64::min),
        violations: parts.iter().map(|a| a.violations).sum(),
        conditioning_frequency: parts.iter().map(|a| a.conditioned).sum::<u64>() as f64 / outer_samples as f64,
        bound,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LimitReport {
    pub family: Family,
    pub d: usize,
    pub n: usize,
    pub estimate: TailEstimate,
    /// Conjectured large-`(d, n)` limit of `P(|S|^2 >= mu)`.
    pub conjectured_limit: f64,
}

/// `P(|S|^2 >= mu)` for one of the two extremal diagonal families; a trend
/// report with no pass/fail.
pub fn highd_limit_experiment(d: usize, n: usize, family: Family, cfg: &SimConfig) -> Result<LimitReport> {
    let conjectured_limit = match family {
        Family::IdentityScaled => 0.5,
        Family::RankOneDiag => gaussian_two_sided_tail(1.0f64).value,
        other => return domain(format!("no limit is attached to family {}", other.name())),
    };
    let mc = MatrixCoefficients::from_family(family, d, n, cfg.seed)?;
    let estimate = estimate_exceed(&mc, mc.mu().sqrt(), Convention::Ge, cfg)?;
    Ok(LimitReport {
        family,
        d,
        n,
        estimate,
        conjectured_limit,
    })
}

/// `P(sum_k lambda_k g_k^2 > sum_k lambda_k)` for nonnegative weights, to
/// compare with `1/(15 2^{4/3})`.
pub fn gaussian_form_exceed(lambdas: &[f64], cfg: &SimConfig) -> Result<TailEstimate> {
    if lambdas.is_empty() || lambdas.iter().any(|&l| !(l >= 0.0) || !l.is_finite()) {
        return domain("weights must be a nonempty list of finite nonnegative numbers");
    }
    if cfg.samples == 0 {
        return domain("samples must be >= 1");
    }
    let total: f64 = lambdas.iter().sum();
    let blocks = cfg.samples.div_ceil(BLOCK);
    let hits: Vec<u64> = run_pool(cfg.workers, || {
        (0..blocks)
            .into_par_iter()
            .map(|b| {
                let mut h = 0;
                for i in b * BLOCK..((b + 1) * BLOCK).min(cfg.samples) {
                    let mut rng = CounterRng::new(cfg.seed, i, 0);
                    let q: f64 = lambdas
                        .iter()
                        .map(|l| {
                            let g: f64 = rng.sample(StandardNormal);
                            l * g * g
                        })
                        .sum();
                    h += (q > total) as u64;
                }
                h
            })
            .collect()
    })?;
    Ok(TailEstimate::from_counts(
        hits.iter().sum(),
        cfg.samples,
        cfg.seed,
        Convention::Gt,
        0,
    ))
}

/// Passes when the estimate is not significantly below
/// `1/(15 2^{4/3})`.
pub fn gaussian_form_check(lambdas: &[f64], cfg: &SimConfig) -> Result<BoundCheck> {
    let estimate = gaussian_form_exceed(lambdas, cfg)?;
    let bound = gaussian_form_pz_bound::<f64>();
    Ok(BoundCheck {
        pass: estimate.p_hat + 3.0 * estimate.stderr() >= bound,
        mu: lambdas.iter().sum(),
        estimate,
        bound,
    })
}

/// Central moments of `X = sum_j a_j theta_j^2` for `theta` uniform on
/// `S^{d-1}` (`d = a.len()`), by Monte Carlo around the exact mean.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SphereFormEstimate {
    pub m2: f64,
    pub m2_stderr: f64,
    pub m4: f64,
    pub m4_stderr: f64,
}

pub fn sphere_form_mc(a: &[f64], cfg: &SimConfig) -> Result<SphereFormEstimate> {
    let d = a.len();
    if d == 0 || a.iter().any(|x| !x.is_finite()) {
        return domain("weights must be a nonempty list of finite numbers");
    }
    if cfg.samples < 2 {
        return domain("need at least 2 samples");
    }
    let mean = a.iter().sum::<f64>() / d as f64;
    let blocks = cfg.samples.div_ceil(BLOCK);
    let parts: Vec<[f64; 4]> = run_pool(cfg.workers, || {
        (0..blocks)
            .into_par_iter()
            .map(|b| {
                let mut acc = [0.0; 4];
                let mut theta = vec![0.0; d];
                for i in b * BLOCK..((b + 1) * BLOCK).min(cfg.samples) {
                    let mut rng = CounterRng::new(cfg.seed, i, 0);
                    sample_sphere(d, &mut rng, &mut theta);
                    let y = a.iter().zip(&theta).map(|(aj, t)| aj * t * t).sum::<f64>() - mean;
                    let y2 = y * y;
                    let y4 = y2 * y2;
                    acc[0] += y2;
                    acc[1] += y2 * y2;
                    acc[2] += y4;
                    acc[3] += y4 * y4;
                }
                acc
            })
            .collect()
    })?;
    let (m2, m2_stderr) = mean_and_stderr(&parts.iter().map(|p| (p[0], p[1])).collect::<Vec<_>>(), cfg.samples);
    let (m4, m4_stderr) = mean_and_stderr(&parts.iter().map(|p| (p[2], p[3])).collect::<Vec<_>>(), cfg.samples);
    Ok(SphereFormEstimate {
        m2,
        m2_stderr,
        m4,
        m4_stderr,
    })
}
