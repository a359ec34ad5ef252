//! Bias, the moment identity, statistical distance, and extractor and
//! disperser audits.

use std::collections::HashMap;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::anf::{eval_vector, MonomialOrder, Polynomial};
use crate::error::{check_budget, Error, Result};
use crate::exact::{abs_diff, from_f64, to_f64, ExactRational};
use crate::gf2::BitVector;
use crate::rng::{derived, Stream};
use crate::sources::{support_of, Distribution, Sampler, Source};

/// Largest coefficient-vector length for which [`moment_lhs`] enumerates
/// every polynomial.
pub const MOMENT_MAX_MONOMIALS: usize = 20;

/// Work cap (polynomials × support points) for [`moment_lhs`].
pub const MOMENT_WORK_LIMIT: u128 = 1 << 30;

/// Cap on the number of distinct partial sums kept by [`moment_rhs`].
pub const CONVOLUTION_LIMIT: u128 = 1 << 24;

/// Samples drawn per derived stream in [`bias_mc`].
const MC_CHUNK: u64 = 1 << 16;

/// Exact or estimated bias with its confidence data.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BiasReport {
    /// The bias as a float (exact value rounded, or the estimate).
    pub bias: f64,
    /// Present in exact mode.
    pub exact: Option<ExactRational>,
    /// Present in Monte-Carlo mode.
    pub samples: Option<u64>,
    pub halfwidth: Option<f64>,
    pub delta_fail: Option<f64>,
}

/// `Pr[f(X) = 0] - Pr[f(X) = 1]`.
pub fn bias_exact(f: &Polynomial, s: &Source) -> Result<BigRational> {
    check_lengths(f, s)?;
    bias_of_distribution(f, &support_of(s)?)
}

pub fn bias_of_distribution(f: &Polynomial, dist: &Distribution) -> Result<BigRational> {
    let mut signed = BigInt::zero();
    for (x, c) in dist.points() {
        if f.evaluate(x)? {
            signed -= *c;
        } else {
            signed += *c;
        }
    }
    Ok(BigRational::new(signed, BigInt::from(dist.total())))
}

/// Exact bias under the uniform distribution, from the truth table.
pub fn bias_uniform(f: &Polynomial) -> Result<BigRational> {
    let table = f.truth_table()?;
    let ones = table.weight() as i64;
    let size = table.len() as i64;
    Ok(BigRational::new(
        BigInt::from(size - 2 * ones),
        BigInt::from(size),
    ))
}

fn check_lengths(f: &Polynomial, s: &Source) -> Result<()> {
    if f.n() != s.n() {
        return Err(Error::LengthMismatch {
            expected: s.n(),
            found: f.n(),
        });
    }
    Ok(())
}

/// Halfwidth `sqrt(4 ln(2/δ) / N)` of the Chernoff interval for the mean
/// of `N` independent `[0,1]` indicators.
pub fn chernoff_halfwidth(samples: u64, delta_fail: f64) -> f64 {
    (4.0 * (2.0 / delta_fail).ln() / samples as f64).sqrt()
}

/// Monte-Carlo bias estimate. The ±1 values are the affine image
/// `1 - 2·[f = 1]` of an indicator, so the reported halfwidth is twice
/// [`chernoff_halfwidth`].
///
/// Sampling is split into fixed-size chunks, each with its own stream
/// derived from one master seed drawn from `rng`; the estimate depends on
/// `rng` only, not on the thread count.
pub fn bias_mc(
    f: &Polynomial,
    s: &Source,
    samples: u64,
    delta_fail: f64,
    rng: &mut Stream,
) -> Result<BiasReport> {
    check_lengths(f, s)?;
    if samples == 0 {
        return Err(Error::InvalidParameter(
            "bias estimate needs at least one sample".into(),
        ));
    }
    if !(delta_fail > 0.0 && delta_fail < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "failure probability {delta_fail} not in (0, 1)"
        )));
    }
    let sampler = Sampler::new(s)?;
    let master: u64 = rng.gen();
    let chunks = samples.div_ceil(MC_CHUNK);
    let ones = (0..chunks)
        .into_par_iter()
        .map(|c| -> Result<u64> {
            let mut local = derived(master, c);
            let count = MC_CHUNK.min(samples - c * MC_CHUNK);
            let mut ones = 0;
            for _ in 0..count {
                if f.evaluate(&sampler.sample(&mut local)?)? {
                    ones += 1;
                }
            }
            Ok(ones)
        })
        .collect::<Result<Vec<u64>>>()?
        .into_iter()
        .sum::<u64>();
    Ok(BiasReport {
        bias: 1.0 - 2.0 * ones as f64 / samples as f64,
        exact: None,
        samples: Some(samples),
        halfwidth: Some(2.0 * chernoff_halfwidth(samples, delta_fail)),
        delta_fail: Some(delta_fail),
    })
}

/// Exact report wrapper around [`bias_exact`].
pub fn bias_report_exact(f: &Polynomial, s: &Source) -> Result<BiasReport> {
    let b = bias_exact(f, s)?;
    Ok(BiasReport {
        bias: to_f64(&b),
        exact: Some(ExactRational(b)),
        samples: None,
        halfwidth: None,
        delta_fail: None,
    })
}

/// `E_f[bias_X(f)^t]` over every polynomial of degree `<= d` in `n`
/// variables, each evaluated directly on the support.
pub fn moment_lhs(s: &Source, n: usize, d: usize, t: u32) -> Result<BigRational> {
    if s.n() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            found: s.n(),
        });
    }
    let order = MonomialOrder::new(n, d)?;
    let b = order.len();
    check_budget(
        "polynomial enumeration (monomials)",
        b as u128,
        MOMENT_MAX_MONOMIALS as u128,
    )?;
    let dist = support_of(s)?;
    check_budget(
        "polynomial enumeration",
        (1u128 << b) * dist.len() as u128,
        MOMENT_WORK_LIMIT,
    )?;
    let masks: Vec<u64> = dist
        .support()
        .map(|x| eval_vector(x, &order).map(|e| e.to_u64()))
        .collect::<Result<_>>()?;
    let counts: Vec<i64> = dist.points().iter().map(|p| p.1 as i64).collect();
    let mut acc = BigInt::zero();
    for coeffs in 0..1u64 << b {
        let signed: i64 = masks
            .iter()
            .zip(&counts)
            .map(|(&e, &c)| {
                if (coeffs & e).count_ones() % 2 == 1 {
                    -c
                } else {
                    c
                }
            })
            .sum();
        acc += num_traits::pow(BigInt::from(signed), t as usize);
    }
    let den = num_traits::pow(BigInt::from(dist.total()), t as usize) << b;
    Ok(BigRational::new(acc, den))
}

/// `Pr[eval_d(x_1) + ... + eval_d(x_t) = 0]` for independent draws, by
/// repeated XOR-convolution of the eval-vector distribution.
pub fn moment_rhs(s: &Source, n: usize, d: usize, t: u32) -> Result<BigRational> {
    if s.n() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            found: s.n(),
        });
    }
    let order = MonomialOrder::new(n, d)?;
    let dist = support_of(s)?;
    let mut base: HashMap<BitVector, BigUint> = HashMap::new();
    for (x, c) in dist.points() {
        *base.entry(eval_vector(x, &order)?).or_default() += *c;
    }
    let mut cur: HashMap<BitVector, BigUint> =
        HashMap::from([(BitVector::zeros(order.len()), BigUint::one())]);
    for _ in 0..t {
        check_budget(
            "eval-sum convolution",
            (cur.len() as u128) * (base.len() as u128),
            CONVOLUTION_LIMIT * 16,
        )?;
        let mut next: HashMap<BitVector, BigUint> = HashMap::new();
        for (v, cv) in &cur {
            for (e, ce) in &base {
                *next.entry(v.xor(e)).or_default() += cv * ce;
            }
        }
        check_budget(
            "eval-sum convolution",
            next.len() as u128,
            CONVOLUTION_LIMIT,
        )?;
        cur = next;
    }
    let zero = cur
        .remove(&BitVector::zeros(order.len()))
        .unwrap_or_default();
    let den = num_traits::pow(BigUint::from(dist.total()), t as usize);
    Ok(BigRational::new(zero.into(), den.into()))
}

/// Half the L1 distance between two distributions on the same space.
pub fn statistical_distance(p: &Distribution, q: &Distribution) -> Result<BigRational> {
    if p.n() != q.n() {
        return Err(Error::LengthMismatch {
            expected: p.n(),
            found: q.n(),
        });
    }
    let (tp, tq) = (BigInt::from(p.total()), BigInt::from(q.total()));
    // Σ |cp/tp - cq/tq| = Σ |cp·tq - cq·tp| / (tp·tq)
    let mut sum = BigInt::zero();
    let (a, b) = (p.points(), q.points());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        let ord = match (a.get(i), b.get(j)) {
            (Some(x), Some(y)) => x.0.cmp(&y.0),
            (Some(_), None) => std::cmp::Ordering::Less,
            _ => std::cmp::Ordering::Greater,
        };
        let (cp, cq) = match ord {
            std::cmp::Ordering::Less => {
                i += 1;
                (a[i - 1].1, 0)
            }
            std::cmp::Ordering::Greater => {
                j += 1;
                (0, b[j - 1].1)
            }
            std::cmp::Ordering::Equal => {
                i += 1;
                j += 1;
                (a[i - 1].1, b[j - 1].1)
            }
        };
        let diff = BigInt::from(cp) * &tq - BigInt::from(cq) * &tp;
        sum += if diff < BigInt::zero() { -diff } else { diff };
    }
    Ok(BigRational::new(sum, tp * tq * 2))
}

/// Distance from the uniform distribution on `F_2^m` of a distribution whose
/// support may omit points.
pub fn distance_from_uniform(p: &Distribution) -> BigRational {
    let m = p.n();
    let size = BigInt::one() << m;
    let t = BigInt::from(p.total());
    // Entries present: |c/t - 1/2^m|; absent: 1/2^m each.
    let mut sum = BigInt::zero();
    for (_, c) in p.points() {
        let diff = BigInt::from(*c) * &size - &t;
        sum += if diff < BigInt::zero() { -diff } else { diff };
    }
    let missing = &size - BigInt::from(p.len());
    sum += missing * &t;
    BigRational::new(sum, size * t * 2)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

impl Verdict {
    pub fn from_bool(pass: bool) -> Self {
        if pass {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }

    pub fn passed(self) -> bool {
        self == Verdict::Pass
    }
}

/// One source's line in an [`AuditReport`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SourceAudit {
    pub source_index: usize,
    /// Distance of the output distribution from uniform.
    pub distance: ExactRational,
    /// Output values attained (disperser audits).
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub image: Option<Vec<bool>>,
    pub verdict: Verdict,
}

/// Result of an extractor or disperser audit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub verdict: Verdict,
    pub max_distance: ExactRational,
    /// For extractor audits the source attaining the maximum distance; for
    /// disperser audits the first source with a constant image.
    pub witness_source_index: Option<usize>,
    pub per_source: Vec<SourceAudit>,
}

impl AuditReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data serializes")
    }

    /// One row per source.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "source_index,distance_numerator,distance_denominator,distance,image,verdict\n",
        );
        for s in &self.per_source {
            let image = s
                .image
                .as_ref()
                .map(|v| {
                    v.iter()
                        .map(|&b| if b { "1" } else { "0" })
                        .collect::<Vec<_>>()
                        .join(" ")
                })
                .unwrap_or_default();
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                s.source_index,
                s.distance.0.numer(),
                s.distance.0.denom(),
                s.distance.value(),
                image,
                if s.verdict.passed() { "pass" } else { "fail" }
            ));
        }
        out
    }
}

/// Largest output length accepted by [`extractor_audit`].
pub const MAX_OUTPUT_BITS: usize = 16;

fn output_distribution(fs: &[Polynomial], dist: &Distribution) -> Result<Distribution> {
    let mut pushed = Vec::with_capacity(dist.len());
    for (x, c) in dist.points() {
        let y = BitVector::from_bits(
            fs.iter()
                .map(|f| f.evaluate(x))
                .collect::<Result<Vec<_>>>()?,
        );
        pushed.push((y, *c));
    }
    Distribution::from_counts(fs.len(), pushed)
}

/// Exact distance of `(f_1(X), ..., f_m(X))` from `U_m` for each source;
/// passes iff the maximum is at most `epsilon`.
pub fn extractor_audit(fs: &[Polynomial], sources: &[Source], epsilon: f64) -> Result<AuditReport> {
    if fs.is_empty() || fs.len() > MAX_OUTPUT_BITS {
        return Err(Error::InvalidParameter(format!(
            "extractor audit needs 1..={MAX_OUTPUT_BITS} output polynomials, got {}",
            fs.len()
        )));
    }
    let eps = from_f64(epsilon)
        .ok_or_else(|| Error::InvalidParameter(format!("epsilon {epsilon} is not finite")))?;
    let mut per_source = Vec::new();
    let mut worst: Option<(usize, BigRational)> = None;
    for (i, s) in sources.iter().enumerate() {
        for f in fs {
            check_lengths(f, s)?;
        }
        let out = output_distribution(fs, &support_of(s)?)?;
        let dist = distance_from_uniform(&out);
        if worst.as_ref().is_none_or(|w| dist > w.1) {
            worst = Some((i, dist.clone()));
        }
        per_source.push(SourceAudit {
            source_index: i,
            verdict: Verdict::from_bool(dist <= eps),
            distance: ExactRational(dist),
            image: None,
        });
    }
    let (witness, max) = match worst {
        Some((i, d)) => (Some(i), d),
        None => (None, BigRational::zero()),
    };
    Ok(AuditReport {
        verdict: Verdict::from_bool(max <= eps),
        max_distance: ExactRational(max),
        witness_source_index: witness,
        per_source,
    })
}

/// Passes iff `f` takes both values on every source.
pub fn disperser_audit(f: &Polynomial, sources: &[Source]) -> Result<AuditReport> {
    let mut per_source = Vec::new();
    let mut witness = None;
    let mut max = BigRational::zero();
    for (i, s) in sources.iter().enumerate() {
        check_lengths(f, s)?;
        let out = output_distribution(std::slice::from_ref(f), &support_of(s)?)?;
        let image: Vec<bool> = out.support().map(|v| v.get(0)).collect();
        let pass = image.len() == 2;
        if !pass && witness.is_none() {
            witness = Some(i);
        }
        let dist = distance_from_uniform(&out);
        if dist > max {
            max = dist.clone();
        }
        per_source.push(SourceAudit {
            source_index: i,
            distance: ExactRational(dist),
            image: Some(image),
            verdict: Verdict::from_bool(pass),
        });
    }
    Ok(AuditReport {
        verdict: Verdict::from_bool(witness.is_none()),
        max_distance: ExactRational(max),
        witness_source_index: witness,
        per_source,
    })
}

/// `|a - b|` for two exact biases.
pub fn bias_gap(a: &BigRational, b: &BigRational) -> BigRational {
    abs_diff(a, b)
}
