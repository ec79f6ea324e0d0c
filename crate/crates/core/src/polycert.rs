//! Exact positivity certificates for the degree-14 polynomial behind the
//! log-concavity claim.
//!
//! With `L(u)` the rational lower bound for `I1/I0` (see
//! [`crate::specfun::nasell_lower`]),
//! `(2u L(u) + 1/2)^2 - (2u - 1/2)^2 + 1 + (3/4)^2 = P(u) / Q(u)` where
//! `Q = 16 D(u)^2 > 0`. Everything here runs over `BigRational`; no float
//! enters a certificate.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{domain, Error, Result};
use crate::report::CertificateReport;
use crate::specfun::{NASELL_DENOMINATOR, NASELL_NUMERATOR};
use crate::RationalPoly;

/// Transcribed coefficients of `P`, ascending degree.
pub const CLAIM1_COEFFS: [i64; 15] = [
    1_463_132_160_000,
    3_335_941_324_800,
    404_799_897_600,
    -249_138_892_800,
    -239_747_558_400,
    -55_539_993_600,
    1_473_272_640,
    4_994_831_520,
    1_686_522_420,
    309_775_380,
    28_100_385,
    -1_681_032,
    768_112,
    57_984,
    2_304,
];

/// End point of a Sturm interval.
#[derive(Debug, Clone, PartialEq)]
pub enum Bound {
    NegInf,
    At(BigRational),
    PosInf,
}

impl Bound {
    pub fn at_int(n: i64) -> Self {
        Bound::At(BigRational::from_integer(n.into()))
    }
}

fn rat(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

fn sign(x: &BigRational) -> i8 {
    if x.is_positive() {
        1
    } else if x.is_negative() {
        -1
    } else {
        0
    }
}

fn sign_at(p: &RationalPoly, at: &Bound) -> i8 {
    match at {
        Bound::At(x) => sign(&p.eval(x)),
        Bound::PosInf => p.leading().map_or(0, sign),
        Bound::NegInf => {
            let s = p.leading().map_or(0, sign);
            if p.degree().unwrap_or(0) % 2 == 1 {
                -s
            } else {
                s
            }
        }
    }
}

/// Monic-free gcd over the rationals, normalised to its primitive part.
fn poly_gcd(a: &RationalPoly, b: &RationalPoly) -> RationalPoly {
    let (mut x, mut y) = (a.primitive_part(), b.primitive_part());
    while !y.is_zero() {
        let (_, r) = x.div_rem(&y);
        x = y;
        y = r.primitive_part();
    }
    x
}

/// Sturm chain of the square-free part of `p`, each member rescaled by a
/// positive rational.
fn sturm_chain(p: &RationalPoly) -> Vec<RationalPoly> {
    let g = poly_gcd(p, &p.derivative());
    let (sqfree, _) = p.div_rem(&g);
    let mut chain = vec![sqfree.primitive_part()];
    let d = chain[0].derivative().primitive_part();
    if d.is_zero() {
        return chain;
    }
    chain.push(d);
    loop {
        let n = chain.len();
        let (_, r) = chain[n - 2].div_rem(&chain[n - 1]);
        if r.is_zero() {
            return chain;
        }
        chain.push((-&r).primitive_part());
    }
}

fn variations(chain: &[RationalPoly], at: &Bound) -> usize {
    let signs: Vec<i8> = chain.iter().map(|q| sign_at(q, at)).filter(|&s| s != 0).collect();
    signs.windows(2).filter(|w| w[0] != w[1]).count()
}

fn bound_cmp(a: &Bound, b: &Bound) -> Ordering {
    use Bound::*;
    match (a, b) {
        (NegInf, NegInf) | (PosInf, PosInf) => Ordering::Equal,
        (NegInf, _) | (_, PosInf) => Ordering::Less,
        (_, NegInf) | (PosInf, _) => Ordering::Greater,
        (At(x), At(y)) => x.cmp(y),
    }
}

/// Number of distinct real roots of `p` in `(a, b]`.
pub fn sturm_sign_changes(p: &RationalPoly, a: &Bound, b: &Bound) -> Result<usize> {
    if p.is_zero() {
        return domain("Sturm count of the zero polynomial");
    }
    if bound_cmp(a, b) != Ordering::Less {
        return domain(format!("Sturm interval needs a < b, got {a:?} and {b:?}"));
    }
    if p.degree() == Some(0) {
        return Ok(0);
    }
    let chain = sturm_chain(p);
    let va = variations(&chain, a);
    let vb = variations(&chain, b);
    va.checked_sub(vb)
        .ok_or_else(|| Error::Invariant("Sturm variations increased along the interval".into()))
}

/// Cauchy root bound `1 + max |c_k / c_n|`: every real root lies in
/// `[-M, M]`.
pub fn cauchy_bound(p: &RationalPoly) -> Result<BigRational> {
    let Some(lead) = p.leading() else {
        return domain("root bound of the zero polynomial");
    };
    let n = p.degree().unwrap_or(0);
    let max = p.coeffs()[..n]
        .iter()
        .map(|c| (c / lead).abs())
        .fold(BigRational::zero(), |m, x| if x > m { x } else { m });
    Ok(BigRational::one() + max)
}

/// Certifies `p(u) > 0` for every `u > 0`: no root in `(0, M]` for the
/// Cauchy bound `M`, positive leading coefficient (so no sign change on
/// `(M, inf)`), and `p(1) > 0`.
pub fn verify_positive_on_open_ray(p: &RationalPoly) -> CertificateReport {
    let mut report = CertificateReport::new();
    if p.is_zero() {
        report.push("nonzero polynomial", false, "p is the zero polynomial");
        return report;
    }
    let m = cauchy_bound(p).expect("p is nonzero");
    let zero = Bound::At(BigRational::zero());
    let roots = sturm_sign_changes(p, &zero, &Bound::At(m.clone())).expect("p nonzero and 0 < M");
    report.push(
        "no roots in (0, M]",
        roots == 0,
        format!("Sturm count {roots} on (0, {m}] (Cauchy bound)"),
    );
    let lead = p.leading().expect("p nonzero");
    report.push(
        "leading coefficient positive",
        lead.is_positive(),
        format!("leading coefficient {lead}, degree {}", p.degree().unwrap_or(0)),
    );
    let beyond = sturm_sign_changes(p, &Bound::At(m), &Bound::PosInf).expect("M < inf");
    report.push(
        "no roots beyond M",
        beyond == 0,
        format!("Sturm count {beyond} on (M, inf)"),
    );
    let at_one = p.eval(&BigRational::one());
    report.push("p(1) > 0", at_one.is_positive(), format!("p(1) = {at_one}"));
    report
}

/// Exact expansion of `Q(u) * [(2uL + 1/2)^2 - (2u - 1/2)^2 + 1 + 9/16]`
/// with `L = N/D` and `Q = 16 D^2`.
pub fn derive_claim1_poly() -> RationalPoly {
    let n = RationalPoly::from_i64(&NASELL_NUMERATOR);
    let d = RationalPoly::from_i64(&NASELL_DENOMINATOR);
    let half = BigRational::new(1.into(), 2.into());
    let two_u = RationalPoly::from_i64(&[0, 2]);
    let first = &(&two_u * &n) + &d.scale(&half);
    let second = &two_u - &RationalPoly::constant(half);
    let d2 = &d * &d;
    let inner = &(&(&first * &first) - &(&(&second * &second) * &d2))
        + &d2.scale(&BigRational::new(25.into(), 16.into()));
    inner.scale(&rat(16))
}

/// `Q(u) = 16 D(u)^2`.
pub fn claim1_denominator() -> RationalPoly {
    let d = RationalPoly::from_i64(&NASELL_DENOMINATOR);
    (&d * &d).scale(&rat(16))
}

/// The transcribed `P`, checked coefficient by coefficient against
/// [`derive_claim1_poly`].
pub fn build_claim1_poly() -> Result<RationalPoly> {
    let transcribed = RationalPoly::from_i64(&CLAIM1_COEFFS);
    let derived = derive_claim1_poly();
    let n = transcribed.coeffs().len().max(derived.coeffs().len());
    for k in 0..n {
        let (a, b) = (transcribed.coeff(k), derived.coeff(k));
        if a != b {
            return Err(Error::Certification(format!(
                "coefficient of u^{k} differs: transcribed {a}, derived {b}"
            )));
        }
    }
    Ok(transcribed)
}

/// `P(u + 2)`.
pub fn claim1_shifted_poly() -> Result<RationalPoly> {
    Ok(build_claim1_poly()?.shift(&rat(2)))
}

/// Coefficient-level argument: `P > 0` on `(0, 2)` from grouped terms,
/// and `P(u + 2) > 0` for `u >= 0` from its coefficients and a quartic
/// with no real roots.
pub fn verify_paper_case_analysis() -> CertificateReport {
    let mut report = CertificateReport::new();
    let p = match build_claim1_poly() {
        Ok(p) => p,
        Err(e) => {
            report.push("transcription matches derivation", false, e.to_string());
            return report;
        }
    };
    let a = |k: usize| p.coeff(k);
    let e10 = rat(10_000_000_000);

    let v = a(0) + (a(5) + e10.clone()) * rat(32);
    report.push(
        "(i) a0 + (a5 + 1e10) 2^5 > 0",
        v.is_positive(),
        format!("value {v}"),
    );
    let v = a(2) - e10 * rat(8);
    report.push("(ii) a2 - 1e10 2^3 > 0", v.is_positive(), format!("value {v}"));
    let v = a(1) + rat(4) * a(3) + rat(8) * a(4);
    report.push("(iii) a1 + 4 a3 + 8 a4 > 0", v.is_positive(), format!("value {v}"));
    let v = a(10) + rat(2) * a(11);
    report.push("(iv) a10 + 2 a11 > 0", v.is_positive(), format!("value {v}"));
    for k in [6, 7, 8, 9, 12, 13, 14] {
        let v = a(k);
        report.push(format!("(v) a{k} > 0"), v.is_positive(), format!("a{k} = {v}"));
    }

    let shifted = p.shift(&rat(2));
    let b = |k: usize| shifted.coeff(k);
    let bad: Vec<usize> = (5..=14).filter(|&k| !b(k).is_positive()).collect();
    report.push(
        "(vi) b_k > 0 for k >= 5",
        bad.is_empty(),
        if bad.is_empty() {
            let k = argmin(&shifted, 5..=14);
            format!("smallest is b{k} = {}", b(k))
        } else {
            format!("nonpositive at k = {bad:?}")
        },
    );

    let quartic = shifted.truncate_degrees(0, 4);
    let sturm = sturm_sign_changes(&quartic, &Bound::NegInf, &Bound::PosInf);
    let disc = quartic_real_root_count(&b(0), &b(1), &b(2), &b(3), &b(4));
    let pass = matches!((&sturm, &disc), (Ok(0), Ok(0)));
    report.push(
        "(vii) quartic part of P(u+2) has no real roots",
        pass,
        format!(
            "Sturm count {}, discriminant rule count {}",
            sturm.map_or_else(|e| e.to_string(), |n| n.to_string()),
            disc.map_or_else(|e| e.to_string(), |n| n.to_string())
        ),
    );
    let v = b(0);
    report.push("(viii) b0 > 0", v.is_positive(), format!("b0 = {v}"));
    report
}

fn argmin(p: &RationalPoly, range: std::ops::RangeInclusive<usize>) -> usize {
    range
        .min_by(|&i, &j| p.coeff(i).cmp(&p.coeff(j)))
        .expect("nonempty range")
}

/// Number of distinct real roots of `c4 u^4 + c3 u^3 + c2 u^2 + c1 u + c0`
/// from the discriminant and the auxiliary invariants `P`, `R`, `Delta0`,
/// `D`.
pub fn quartic_real_root_count(
    c0: &BigRational,
    c1: &BigRational,
    c2: &BigRational,
    c3: &BigRational,
    c4: &BigRational,
) -> Result<usize> {
    if c4.is_zero() {
        return domain("quartic with zero leading coefficient");
    }
    let (a, b, c, d, e) = (c4, c3, c2, c1, c0);
    let k = |n: i64| rat(n);
    let disc = k(256) * a * a * a * e * e * e - k(192) * a * a * b * d * e * e
        - k(128) * a * a * c * c * e * e
        + k(144) * a * a * c * d * d * e
        - k(27) * a * a * d * d * d * d
        + k(144) * a * b * b * c * e * e
        - k(6) * a * b * b * d * d * e
        - k(80) * a * b * c * c * d * e
        + k(18) * a * b * c * d * d * d
        + k(16) * a * c * c * c * c * e
        - k(4) * a * c * c * c * d * d
        - k(27) * b * b * b * b * e * e
        + k(18) * b * b * b * c * d * e
        - k(4) * b * b * b * d * d * d
        - k(4) * b * b * c * c * c * e
        + b * b * c * c * d * d;
    let p = k(8) * a * c - k(3) * b * b;
    let r = b * b * b + k(8) * d * a * a - k(4) * a * b * c;
    let delta0 = c * c - k(3) * b * d + k(12) * a * e;
    let dd = k(64) * a * a * a * e - k(16) * a * a * c * c + k(16) * a * b * b * c
        - k(16) * a * a * b * d
        - k(3) * b * b * b * b;

    let (sd, sp, sdd) = (sign(&disc), sign(&p), sign(&dd));
    let count = match sd {
        -1 => 2,
        1 => {
            if sp < 0 && sdd < 0 {
                4
            } else {
                0
            }
        }
        _ => {
            if delta0.is_zero() {
                if sdd == 0 {
                    1
                } else {
                    2
                }
            } else if sdd == 0 && sp < 0 {
                2
            } else if sdd == 0 && sp > 0 && r.is_zero() {
                0
            } else if sp < 0 && sdd < 0 {
                3
            } else if sdd > 0 || (sp > 0 && (sdd != 0 || !r.is_zero())) {
                1
            } else {
                return Err(Error::Invariant(format!(
                    "unclassified quartic: disc=0, P={p}, D={dd}, R={r}, Delta0={delta0}"
                )));
            }
        }
    };
    Ok(count)
}

/// Convenience wrapper taking integer coefficients, ascending degree.
pub fn quartic_real_root_count_i64(c: [i64; 5]) -> Result<usize> {
    quartic_real_root_count(&rat(c[0]), &rat(c[1]), &rat(c[2]), &rat(c[3]), &rat(c[4]))
}

/// `P` and `Q` evaluated exactly at `u`.
pub fn claim1_eval(u: &BigRational) -> Result<(BigRational, BigRational)> {
    Ok((build_claim1_poly()?.eval(u), claim1_denominator().eval(u)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::nasell_lower;
    use num_traits::ToPrimitive;
    use proptest::prelude::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn all_reals(p: &RationalPoly) -> usize {
        sturm_sign_changes(p, &Bound::NegInf, &Bound::PosInf).unwrap()
    }

    #[test]
    fn sturm_examples() {
        assert_eq!(all_reals(&RationalPoly::from_i64(&[1, 0, 1])), 0);
        assert_eq!(all_reals(&RationalPoly::from_i64(&[-1, 0, 1])), 2);
        // u(u-1)(u-2)
        let p = RationalPoly::from_i64(&[0, 2, -3, 1]);
        assert_eq!(sturm_sign_changes(&p, &Bound::at_int(0), &Bound::at_int(2)).unwrap(), 2);
        assert_eq!(sturm_sign_changes(&p, &Bound::at_int(-1), &Bound::at_int(0)).unwrap(), 1);
        assert!(sturm_sign_changes(&RationalPoly::zero(), &Bound::NegInf, &Bound::PosInf).is_err());
        assert!(sturm_sign_changes(&p, &Bound::at_int(2), &Bound::at_int(0)).is_err());
        // repeated roots count once: (u-1)^3 (u+1)^2
        let r = &RationalPoly::linear_root(rat(1)).pow(3) * &RationalPoly::linear_root(rat(-1)).pow(2);
        assert_eq!(all_reals(&r), 2);
    }

    #[test]
    fn claim1_coefficients() {
        let p = build_claim1_poly().unwrap();
        assert_eq!(p.degree(), Some(14));
        assert_eq!(p.coeff(0), rat(1_463_132_160_000));
        assert_eq!(p.coeff(14), rat(2304));
        assert_eq!(p.coeff(11), rat(-1_681_032));
        let negative: Vec<usize> = (0..=14).filter(|&k| p.coeff(k).is_negative()).collect();
        assert_eq!(negative, vec![3, 4, 5, 11]);
        assert_eq!(derive_claim1_poly(), p);
    }

    #[test]
    fn claim1_positive_on_ray() {
        let p = build_claim1_poly().unwrap();
        let report = verify_positive_on_open_ray(&p);
        assert!(report.overall(), "{:?}", report.first_failure());
        // Two real roots, both on the negative axis.
        assert_eq!(all_reals(&p), 2);
        assert_eq!(sturm_sign_changes(&p, &Bound::NegInf, &Bound::at_int(0)).unwrap(), 2);
    }

    #[test]
    fn positive_ray_examples() {
        assert!(!verify_positive_on_open_ray(&RationalPoly::from_i64(&[-1, 1])).overall());
        assert!(verify_positive_on_open_ray(&RationalPoly::from_i64(&[1, 1, 1])).overall());
        assert!(!verify_positive_on_open_ray(&RationalPoly::from_i64(&[1, 0, -1])).overall());
        assert!(!verify_positive_on_open_ray(&RationalPoly::zero()).overall());
        // root exactly at 0 is outside the open ray
        assert!(verify_positive_on_open_ray(&RationalPoly::from_i64(&[0, 1])).overall());
    }

    #[test]
    fn case_analysis() {
        let report = verify_paper_case_analysis();
        assert!(report.overall(), "{:?}", report.first_failure());
        assert_eq!(report.checks.len(), 14);
        assert!(report.get("(v) a6 > 0").unwrap().witness.contains("1473272640"));
        assert!(report.get("(i) a0 + (a5 + 1e10) 2^5 > 0").unwrap().witness.contains("5852364800"));
        let b = claim1_shifted_poly().unwrap();
        assert_eq!(b.coeff(0), rat(3_500_836_126_720));
        assert_eq!(b.coeff(1), rat(-5_041_205_133_312));
    }

    #[test]
    fn quartic_examples() {
        assert_eq!(quartic_real_root_count_i64([1, 0, 0, 0, 1]).unwrap(), 0);
        assert_eq!(quartic_real_root_count_i64([4, 0, -5, 0, 1]).unwrap(), 4);
        assert_eq!(quartic_real_root_count_i64([0, 0, 0, 0, 1]).unwrap(), 1);
        // (u-1)^3 (u+2)
        assert_eq!(quartic_real_root_count_i64([-2, 5, -3, -1, 1]).unwrap(), 2);
        assert!(quartic_real_root_count_i64([1, 1, 1, 1, 0]).is_err());
        let b = claim1_shifted_poly().unwrap();
        let n = quartic_real_root_count(&b.coeff(0), &b.coeff(1), &b.coeff(2), &b.coeff(3), &b.coeff(4));
        assert_eq!(n.unwrap(), 0);
    }

    /// Sign of exact P(u) against a double evaluation of the bracket with
    /// the rational lower bound, whenever the latter is clear of its
    /// rounding envelope.
    #[test]
    fn exact_and_float_signs_agree() {
        for (n, d) in [(1, 10), (1, 2), (1, 1), (2, 1), (5, 1), (10, 1)] {
            let u = q(n, d);
            let (p, qq) = claim1_eval(&u).unwrap();
            assert!(qq.is_positive());
            let x = n as f64 / d as f64;
            let l = nasell_lower(x);
            let a = 2.0 * x * l + 0.5;
            let b = 2.0 * x - 0.5;
            let v = a * a - b * b + 25.0 / 16.0;
            let err = 16.0 * f64::EPSILON * (a * a + b * b + 2.0);
            assert!(v.abs() > err);
            assert_eq!(v > 0.0, p.is_positive(), "u={x}");
            let ratio = (p / qq).to_f64().unwrap();
            assert!((ratio - v).abs() <= 1e-9 * v.abs().max(1.0), "u={x}: {ratio} vs {v}");
        }
    }

    #[test]
    fn certificates_are_fast() {
        let start = std::time::Instant::now();
        assert!(verify_positive_on_open_ray(&build_claim1_poly().unwrap()).overall());
        assert!(verify_paper_case_analysis().overall());
        assert!(start.elapsed().as_secs_f64() < 5.0);
    }

    fn planted(roots: &[(i64, i64, u32)], complex: &[(i64, i64)], lead: i64) -> RationalPoly {
        let mut p = RationalPoly::constant(rat(lead));
        for &(n, d, m) in roots {
            p = &p * &RationalPoly::linear_root(q(n, d)).pow(m);
        }
        for &(s, t) in complex {
            // (u - s)^2 + t^2 with t != 0
            p = &p * &RationalPoly::from_i64(&[s * s + t * t, -2 * s, 1]);
        }
        p
    }

    proptest! {
        #[test]
        fn sturm_counts_planted_roots(
            roots in prop::collection::vec((-20i64..20, 1i64..5, 1u32..3), 0..5),
            complex in prop::collection::vec((-5i64..5, 1i64..4), 0..2),
            lead in prop::sample::select(vec![-3i64, -1, 1, 2, 7]),
            a in -30i64..30,
            width in 1i64..40,
        ) {
            let p = planted(&roots, &complex, lead);
            let mut distinct: Vec<BigRational> = roots.iter().map(|&(n, d, _)| q(n, d)).collect();
            distinct.sort();
            distinct.dedup();
            prop_assert_eq!(all_reals(&p), distinct.len());
            let (lo, hi) = (q(a, 4), q(a + width, 4));
            let inside = distinct.iter().filter(|r| **r > lo && **r <= hi).count();
            let got = sturm_sign_changes(&p, &Bound::At(lo), &Bound::At(hi)).unwrap();
            prop_assert_eq!(got, inside);
        }

        #[test]
        fn quartic_rule_matches_sturm_planted(
            roots in prop::collection::vec((-6i64..6, 1i64..3), 0..5),
            complex in prop::collection::vec((-3i64..3, 1i64..3), 0..3),
            lead in prop::sample::select(vec![-2i64, -1, 1, 3]),
        ) {
            // Build exactly a quartic from linear and quadratic factors.
            let mut rs: Vec<(i64, i64, u32)> = Vec::new();
            let mut cs: Vec<(i64, i64)> = Vec::new();
            let mut deg = 0;
            for &(s, t) in &complex {
                if deg + 2 <= 4 { cs.push((s, t)); deg += 2; }
            }
            for &(n, d) in &roots {
                if deg < 4 { rs.push((n, d, 1)); deg += 1; }
            }
            while deg < 4 { rs.push((1, 1, 1)); deg += 1; }
            let p = planted(&rs, &cs, lead);
            prop_assert_eq!(p.degree(), Some(4));
            let c: Vec<BigRational> = (0..5).map(|k| p.coeff(k)).collect();
            let rule = quartic_real_root_count(&c[0], &c[1], &c[2], &c[3], &c[4]).unwrap();
            prop_assert_eq!(rule, all_reals(&p));
        }

        #[test]
        fn quartic_rule_matches_sturm_random(c in prop::collection::vec(-12i64..12, 5)) {
            prop_assume!(c[4] != 0);
            let p = RationalPoly::from_i64(&c);
            let rule = quartic_real_root_count_i64([c[0], c[1], c[2], c[3], c[4]]).unwrap();
            prop_assert_eq!(rule, all_reals(&p));
        }
    }
}
