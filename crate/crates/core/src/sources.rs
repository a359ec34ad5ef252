//! Weak-source models: descriptions, exact enumeration, sampling, and the
//! family-size and min-entropy threshold calculators.

use std::collections::HashMap;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::anf::Polynomial;
use crate::error::{check_budget, Error, Result};
use crate::gf2::{binom_sum, span_elements, BitVector, EchelonBasis};
use crate::rng::Stream;

/// Largest support (or input space) [`support_of`] will enumerate.
pub const SUPPORT_LIMIT: u128 = 1 << 22;

/// Draws tried by rejection sampling of a variety before giving up.
pub const VARIETY_REJECTION_LIMIT: u64 = 1 << 24;

/// One output bit of a local source: a function of the listed input bits.
///
/// `table` has length `2^inputs.len()`; entry `i` is the output when the
/// listed inputs spell `i`, first listed input least significant.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LocalBit {
    pub inputs: Vec<usize>,
    pub table: BitVector,
}

impl LocalBit {
    fn eval(&self, u: &BitVector) -> bool {
        let idx = self
            .inputs
            .iter()
            .enumerate()
            .fold(0usize, |acc, (k, &i)| acc | (u.get(i) as usize) << k);
        self.table.get(idx)
    }
}

/// A weak random source over F_2^n.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "SourceFile", into = "SourceFile")]
pub enum Source {
    /// Uniform over an explicit set of distinct points.
    Flat { n: usize, support: Vec<BitVector> },
    /// Uniform over `offset + span(basis)`.
    Affine {
        n: usize,
        offset: BitVector,
        basis: Vec<BitVector>,
    },
    /// `X + Y` for independent flat `X`, `Y`.
    Sumset { x: Box<Source>, y: Box<Source> },
    /// Each output bit reads at most `r` of `m` uniform input bits.
    Local {
        m: usize,
        r: usize,
        bits: Vec<LocalBit>,
    },
    /// `P(U_m)` for a list of polynomials over `m` variables.
    PolynomialImage { m: usize, polys: Vec<Polynomial> },
    /// Uniform over the common zero set of the polynomials.
    Variety { n: usize, polys: Vec<Polynomial> },
}

impl Source {
    pub fn flat(n: usize, support: Vec<BitVector>) -> Result<Self> {
        let s = Source::Flat { n, support };
        s.validate()?;
        Ok(s)
    }

    pub fn affine(offset: BitVector, basis: Vec<BitVector>) -> Result<Self> {
        let s = Source::Affine {
            n: offset.len(),
            offset,
            basis,
        };
        s.validate()?;
        Ok(s)
    }

    /// Uniform over all of F_2^n.
    pub fn uniform(n: usize) -> Self {
        Source::Affine {
            n,
            offset: BitVector::zeros(n),
            basis: (0..n).map(|i| BitVector::unit(n, i)).collect(),
        }
    }

    pub fn sumset(x: Source, y: Source) -> Result<Self> {
        let s = Source::Sumset {
            x: Box::new(x),
            y: Box::new(y),
        };
        s.validate()?;
        Ok(s)
    }

    pub fn local(m: usize, r: usize, bits: Vec<LocalBit>) -> Result<Self> {
        let s = Source::Local { m, r, bits };
        s.validate()?;
        Ok(s)
    }

    pub fn polynomial_image(m: usize, polys: Vec<Polynomial>) -> Result<Self> {
        let s = Source::PolynomialImage { m, polys };
        s.validate()?;
        Ok(s)
    }

    pub fn variety(n: usize, polys: Vec<Polynomial>) -> Result<Self> {
        let s = Source::Variety { n, polys };
        s.validate()?;
        Ok(s)
    }

    /// Output length.
    pub fn n(&self) -> usize {
        match self {
            Source::Flat { n, .. } | Source::Affine { n, .. } | Source::Variety { n, .. } => *n,
            Source::Sumset { x, .. } => x.n(),
            Source::Local { bits, .. } => bits.len(),
            Source::PolynomialImage { polys, .. } => polys.len(),
        }
    }

    /// Checks the structural invariants of the model.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        match self {
            Source::Flat { n, support } => {
                if support.is_empty() {
                    return bad("flat source needs a nonempty support".into());
                }
                if let Some(v) = support.iter().find(|v| v.len() != *n) {
                    return Err(Error::LengthMismatch {
                        expected: *n,
                        found: v.len(),
                    });
                }
                let mut sorted = support.clone();
                sorted.sort();
                if sorted.windows(2).any(|w| w[0] == w[1]) {
                    return bad("flat support has repeated points".into());
                }
            }
            Source::Affine { n, offset, basis } => {
                if offset.len() != *n {
                    return Err(Error::LengthMismatch {
                        expected: *n,
                        found: offset.len(),
                    });
                }
                let mut echelon = EchelonBasis::new(*n);
                for b in basis {
                    if b.len() != *n {
                        return Err(Error::LengthMismatch {
                            expected: *n,
                            found: b.len(),
                        });
                    }
                    if !echelon.insert(b) {
                        return bad("affine basis vectors are linearly dependent".into());
                    }
                }
            }
            Source::Sumset { x, y } => {
                if !matches!(**x, Source::Flat { .. }) || !matches!(**y, Source::Flat { .. }) {
                    return bad("sumset components must be flat sources".into());
                }
                x.validate()?;
                y.validate()?;
                if x.n() != y.n() {
                    return Err(Error::LengthMismatch {
                        expected: x.n(),
                        found: y.n(),
                    });
                }
            }
            Source::Local { m, r, bits } => {
                for (j, b) in bits.iter().enumerate() {
                    if b.inputs.len() > *r {
                        return bad(format!(
                            "output bit {j} reads {} > r = {r} inputs",
                            b.inputs.len()
                        ));
                    }
                    if let Some(&i) = b.inputs.iter().find(|&&i| i >= *m) {
                        return bad(format!("output bit {j} reads input {i} >= m = {m}"));
                    }
                    if b.table.len() != 1 << b.inputs.len() {
                        return Err(Error::LengthMismatch {
                            expected: 1 << b.inputs.len(),
                            found: b.table.len(),
                        });
                    }
                }
            }
            Source::PolynomialImage { m, polys } => {
                if let Some(p) = polys.iter().find(|p| p.n() != *m) {
                    return Err(Error::LengthMismatch {
                        expected: *m,
                        found: p.n(),
                    });
                }
            }
            Source::Variety { n, polys } => {
                if let Some(p) = polys.iter().find(|p| p.n() != *n) {
                    return Err(Error::LengthMismatch {
                        expected: *n,
                        found: p.n(),
                    });
                }
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("plain data serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| {
            Error::parse(
                format!("line {} column {}", e.line(), e.column()),
                e.to_string(),
            )
        })
    }
}

/// On-disk form of a [`Source`].
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum SourceFile {
    Flat {
        n: usize,
        support: Vec<BitVector>,
    },
    Affine {
        n: usize,
        offset: BitVector,
        basis: Vec<BitVector>,
    },
    Sumset {
        x: Box<SourceFile>,
        y: Box<SourceFile>,
    },
    Local {
        m: usize,
        r: usize,
        bits: Vec<LocalBit>,
    },
    Polynomial {
        m: usize,
        polys: Vec<Polynomial>,
    },
    Variety {
        n: usize,
        polys: Vec<Polynomial>,
    },
}

impl TryFrom<SourceFile> for Source {
    type Error = Error;

    fn try_from(f: SourceFile) -> Result<Self> {
        let s = match f {
            SourceFile::Flat { n, support } => Source::Flat { n, support },
            SourceFile::Affine { n, offset, basis } => Source::Affine { n, offset, basis },
            SourceFile::Sumset { x, y } => Source::Sumset {
                x: Box::new(Source::try_from(*x)?),
                y: Box::new(Source::try_from(*y)?),
            },
            SourceFile::Local { m, r, bits } => Source::Local { m, r, bits },
            SourceFile::Polynomial { m, polys } => Source::PolynomialImage { m, polys },
            SourceFile::Variety { n, polys } => Source::Variety { n, polys },
        };
        s.validate()?;
        Ok(s)
    }
}

impl From<Source> for SourceFile {
    fn from(s: Source) -> Self {
        match s {
            Source::Flat { n, support } => SourceFile::Flat { n, support },
            Source::Affine { n, offset, basis } => SourceFile::Affine { n, offset, basis },
            Source::Sumset { x, y } => SourceFile::Sumset {
                x: Box::new((*x).into()),
                y: Box::new((*y).into()),
            },
            Source::Local { m, r, bits } => SourceFile::Local { m, r, bits },
            Source::PolynomialImage { m, polys } => SourceFile::Polynomial { m, polys },
            Source::Variety { n, polys } => SourceFile::Variety { n, polys },
        }
    }
}

/// An exactly enumerated distribution: point `v` has probability
/// `count(v) / total`. Points are distinct and sorted canonically.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Distribution {
    n: usize,
    points: Vec<(BitVector, u64)>,
    total: u64,
}

impl Distribution {
    /// Collects weighted points, merging repeats. Zero counts are dropped.
    pub fn from_counts(
        n: usize,
        counts: impl IntoIterator<Item = (BitVector, u64)>,
    ) -> Result<Self> {
        let mut map: HashMap<BitVector, u64> = HashMap::new();
        for (v, c) in counts {
            if v.len() != n {
                return Err(Error::LengthMismatch {
                    expected: n,
                    found: v.len(),
                });
            }
            if c > 0 {
                *map.entry(v).or_default() += c;
            }
        }
        let mut points: Vec<_> = map.into_iter().collect();
        points.sort_by(|a, b| a.0.cmp(&b.0));
        let total = points.iter().map(|p| p.1).sum();
        if total == 0 {
            return Err(Error::InvalidParameter("distribution has no mass".into()));
        }
        Ok(Self { n, points, total })
    }

    pub fn uniform_over(n: usize, points: impl IntoIterator<Item = BitVector>) -> Result<Self> {
        Self::from_counts(n, points.into_iter().map(|v| (v, 1)))
    }

    pub fn point_mass(v: BitVector) -> Self {
        Self {
            n: v.len(),
            points: vec![(v, 1)],
            total: 1,
        }
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[(BitVector, u64)] {
        &self.points
    }

    pub fn support(&self) -> impl Iterator<Item = &BitVector> {
        self.points.iter().map(|p| &p.0)
    }

    pub fn count_of(&self, v: &BitVector) -> u64 {
        self.points
            .binary_search_by(|p| p.0.cmp(v))
            .map_or(0, |i| self.points[i].1)
    }

    pub fn probability(&self, v: &BitVector) -> BigRational {
        ratio(self.count_of(v), self.total)
    }

    /// `(point, exact probability)` pairs.
    pub fn probabilities(&self) -> Vec<(BitVector, BigRational)> {
        self.points
            .iter()
            .map(|(v, c)| (v.clone(), ratio(*c, self.total)))
            .collect()
    }

    pub fn max_count(&self) -> u64 {
        self.points.iter().map(|p| p.1).max().unwrap_or(0)
    }

    /// The distribution of `g(X)`.
    pub fn push_forward(
        &self,
        out_len: usize,
        g: impl Fn(&BitVector) -> BitVector,
    ) -> Result<Self> {
        Self::from_counts(out_len, self.points.iter().map(|(v, c)| (g(v), *c)))
    }

    /// `-log2` of the largest point probability.
    pub fn min_entropy(&self) -> f64 {
        log2_ratio(self.total, self.max_count())
    }
}

pub(crate) fn ratio(num: u64, den: u64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// `log2(a / b)` for positive integers, accurate well below 1e-9.
fn log2_ratio(a: u64, b: u64) -> f64 {
    if a == b {
        return 0.0;
    }
    (a as f64).log2() - (b as f64).log2()
}

/// Exact distribution of a source.
pub fn support_of(s: &Source) -> Result<Distribution> {
    s.validate()?;
    match s {
        Source::Flat { n, support } => Distribution::uniform_over(*n, support.iter().cloned()),
        Source::Affine { n, offset, basis } => {
            check_budget(
                "affine support",
                1u128 << basis.len().min(127),
                SUPPORT_LIMIT,
            )?;
            Distribution::uniform_over(
                *n,
                span_elements(*n, basis).into_iter().map(|v| v.xor(offset)),
            )
        }
        Source::Sumset { x, y } => {
            let (xs, ys) = (flat_points(x), flat_points(y));
            check_budget(
                "sumset pairs",
                (xs.len() as u128) * (ys.len() as u128),
                SUPPORT_LIMIT,
            )?;
            let mut counts: HashMap<BitVector, u64> = HashMap::new();
            for a in xs {
                for b in ys {
                    *counts.entry(a.xor(b)).or_default() += 1;
                }
            }
            Distribution::from_counts(x.n(), counts)
        }
        Source::Local { m, bits, .. } => {
            check_budget("local source inputs", 1u128 << (*m).min(127), SUPPORT_LIMIT)?;
            let out = (0..1u64 << m).map(|u| {
                let u = BitVector::from_u64(*m, u);
                (BitVector::from_bits(bits.iter().map(|b| b.eval(&u))), 1)
            });
            Distribution::from_counts(bits.len(), out)
        }
        Source::PolynomialImage { m, polys } => {
            check_budget(
                "polynomial source inputs",
                1u128 << (*m).min(127),
                SUPPORT_LIMIT,
            )?;
            let tables: Vec<BitVector> = polys
                .iter()
                .map(|p| p.truth_table())
                .collect::<Result<_>>()?;
            let out = (0..1usize << m)
                .map(|u| (BitVector::from_bits(tables.iter().map(|t| t.get(u))), 1));
            Distribution::from_counts(polys.len(), out)
        }
        Source::Variety { n, polys } => Distribution::uniform_over(*n, variety_points(*n, polys)?),
    }
}

fn flat_points(s: &Source) -> &[BitVector] {
    match s {
        Source::Flat { support, .. } => support,
        _ => unreachable!("validated sumset components are flat"),
    }
}

/// Truth table of `x ↦ [some p_i(x) = 1]`, the complement of the variety.
pub(crate) fn variety_complement_table(n: usize, polys: &[Polynomial]) -> Result<BitVector> {
    check_budget("variety search space", 1u128 << n.min(127), SUPPORT_LIMIT)?;
    let mut acc = vec![0u64; BitVector::zeros(1 << n).words().len()];
    for p in polys {
        for (a, w) in acc.iter_mut().zip(p.truth_table()?.words()) {
            *a |= w;
        }
    }
    Ok(BitVector::from_words(1 << n, acc))
}

/// Points of the common zero set, in canonical order.
pub fn variety_points(n: usize, polys: &[Polynomial]) -> Result<Vec<BitVector>> {
    let outside = variety_complement_table(n, polys)?;
    let mut points: Vec<BitVector> = (0..1u64 << n)
        .filter(|&x| !outside.get(x as usize))
        .map(|x| BitVector::from_u64(n, x))
        .collect();
    if points.is_empty() {
        return Err(Error::EmptyVariety);
    }
    points.sort();
    Ok(points)
}

/// A source prepared for repeated draws.
pub enum Sampler<'a> {
    Direct(&'a Source),
    Points(Vec<BitVector>),
    Rejection { n: usize, polys: &'a [Polynomial] },
}

impl<'a> Sampler<'a> {
    /// Varieties are enumerated when the search space fits the support
    /// budget, and sampled by rejection otherwise.
    pub fn new(s: &'a Source) -> Result<Self> {
        s.validate()?;
        Ok(match s {
            Source::Variety { n, polys } if (*n as u128) < 128 && (1u128 << n) <= SUPPORT_LIMIT => {
                Sampler::Points(variety_points(*n, polys)?)
            }
            Source::Variety { n, polys } => Sampler::Rejection { n: *n, polys },
            other => Sampler::Direct(other),
        })
    }

    pub fn sample(&self, rng: &mut Stream) -> Result<BitVector> {
        match self {
            Sampler::Points(points) => Ok(points[rng.gen_range(0..points.len())].clone()),
            Sampler::Rejection { n, polys } => {
                for _ in 0..VARIETY_REJECTION_LIMIT {
                    let x = BitVector::random(*n, rng);
                    if polys
                        .iter()
                        .all(|p| !p.evaluate(&x).expect("validated lengths"))
                    {
                        return Ok(x);
                    }
                }
                Err(Error::RetriesExhausted {
                    what: "variety rejection sampling",
                    attempts: VARIETY_REJECTION_LIMIT,
                })
            }
            Sampler::Direct(s) => sample_direct(s, rng),
        }
    }
}

fn sample_direct(s: &Source, rng: &mut Stream) -> Result<BitVector> {
    Ok(match s {
        Source::Flat { support, .. } => support[rng.gen_range(0..support.len())].clone(),
        Source::Affine { offset, basis, .. } => {
            let mut v = offset.clone();
            for b in basis {
                if rng.gen::<bool>() {
                    v.xor_assign(b);
                }
            }
            v
        }
        Source::Sumset { x, y } => sample_direct(x, rng)?.xor(&sample_direct(y, rng)?),
        Source::Local { m, bits, .. } => {
            let u = BitVector::random(*m, rng);
            BitVector::from_bits(bits.iter().map(|b| b.eval(&u)))
        }
        Source::PolynomialImage { m, polys } => {
            let u = BitVector::random(*m, rng);
            BitVector::from_bits(
                polys
                    .iter()
                    .map(|p| p.evaluate(&u).expect("validated lengths")),
            )
        }
        Source::Variety { .. } => return Sampler::new(s)?.sample(rng),
    })
}

/// One draw from the source. For repeated draws from a variety build a
/// [`Sampler`] once instead.
pub fn sample_source(s: &Source, rng: &mut Stream) -> Result<BitVector> {
    Sampler::new(s)?.sample(rng)
}

/// Min-entropy in bits.
pub fn min_entropy(s: &Source) -> Result<f64> {
    Ok(support_of(s)?.min_entropy())
}

/// Family kinds covered by [`entropy_threshold`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FamilyKind {
    Local,
    Polynomial,
    Variety,
}

/// Parameters of a threshold computation. `c` scales the threshold and
/// `beta` enters the polynomial-source family count; both default to 1.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdQuery {
    pub kind: FamilyKind,
    pub n: usize,
    pub d: usize,
    pub r: usize,
    #[serde(default = "one")]
    pub c: f64,
    #[serde(default = "one")]
    pub beta: f64,
}

fn one() -> f64 {
    1.0
}

impl ThresholdQuery {
    pub fn new(kind: FamilyKind, n: usize, d: usize, r: usize) -> Self {
        Self {
            kind,
            n,
            d,
            r,
            c: 1.0,
            beta: 1.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdReport {
    /// Upper bound on `log2` of the family size.
    pub log2_family_size: f64,
    /// The same bound as an exact integer, when it is one.
    pub log2_family_size_exact: Option<BigUint>,
    /// Min-entropy threshold `k`.
    pub k: f64,
    /// True when `k > n`, so no source of length `n` qualifies.
    pub vacuous: bool,
}

/// Family-size bound and min-entropy threshold for a small source family.
///
/// * local: `k = C d (2^r n + r n log n)^{1/d}`, family size
///   `2^{n (2 r log n + 2^r)}`;
/// * polynomial: `k = C ((C^r d^d / r^r) n)^{1/(d-r)}`, family size
///   `2^{(beta (k-1) / r)^r n}` at that `k`;
/// * variety: `k = C d n^{(r+1)/d}`, family size `2^{(n+1) C(n, <=r)}`.
pub fn entropy_threshold(q: &ThresholdQuery) -> Result<ThresholdReport> {
    if q.n == 0 || q.d == 0 || q.r == 0 {
        return Err(Error::InvalidParameter(
            "n, d and r must be positive".into(),
        ));
    }
    if q.c <= 0.0 || q.beta <= 0.0 {
        return Err(Error::InvalidParameter("constants must be positive".into()));
    }
    let (n, d, r) = (q.n as f64, q.d as f64, q.r as f64);
    let (k, log2_size, exact) = match q.kind {
        FamilyKind::Local => {
            let k = q.c * d * (2f64.powf(r) * n + r * n * n.log2()).powf(1.0 / d);
            let size = n * (2.0 * r * n.log2() + 2f64.powf(r));
            let exact = q.n.is_power_of_two().then(|| {
                let log_n = q.n.trailing_zeros() as usize;
                BigUint::from(q.n) * (BigUint::from(2 * q.r * log_n) + (BigUint::from(1u32) << q.r))
            });
            (k, size, exact)
        }
        FamilyKind::Polynomial => {
            if q.d <= q.r {
                return Err(Error::InvalidParameter(format!(
                    "polynomial sources need d > r, got d = {} and r = {}",
                    q.d, q.r
                )));
            }
            let inner = q.c.powf(r) * d.powf(d) / r.powf(r) * n;
            let k = q.c * inner.powf(1.0 / (d - r));
            let size = (q.beta * (k - 1.0).max(0.0) / r).powf(r) * n;
            (k, size, None)
        }
        FamilyKind::Variety => {
            let k = q.c * d * n.powf((r + 1.0) / d);
            let exact = BigUint::from(q.n + 1) * binom_sum(q.n, q.r);
            let size: f64 = exact.to_string().parse().expect("decimal integer");
            (k, size, Some(exact))
        }
    };
    Ok(ThresholdReport {
        log2_family_size: log2_size,
        log2_family_size_exact: exact,
        k,
        vacuous: k > n,
    })
}

/// Result of [`variety_reduce`].
#[derive(Clone, Debug)]
pub struct VarietyReduction {
    /// `n + 1` random combinations of the inputs with the same zero set.
    pub polys: Vec<Polynomial>,
    /// Coefficient draws used, at least 1.
    pub attempts: u64,
}

/// Replaces a system `p_1..p_t` over `n` variables by `n + 1` uniformly
/// random GF(2) combinations with the same common zero set, redrawing
/// the combination coefficients until the zero sets agree exactly.
pub fn variety_reduce(
    polys: &[Polynomial],
    rng: &mut Stream,
    budget: u64,
) -> Result<VarietyReduction> {
    let first = polys.first().ok_or_else(|| {
        Error::InvalidParameter("variety reduction needs at least one polynomial".into())
    })?;
    let (n, order) = (first.n(), first.order().clone());
    if let Some(p) = polys.iter().find(|p| p.n() != n || p.cap() != order.d()) {
        return Err(Error::DimensionMismatch(format!(
            "mixed systems: (n={}, d={}) and (n={}, d={})",
            n,
            order.d(),
            p.n(),
            p.cap()
        )));
    }
    check_budget("variety reduction variables", n as u128, 20)?;
    let tables: Vec<BitVector> = polys
        .iter()
        .map(|p| p.truth_table())
        .collect::<Result<_>>()?;
    let target = variety_complement_table(n, polys)?;
    let words = target.words().len();
    for attempt in 1..=budget {
        let alphas: Vec<BitVector> = (0..=n)
            .map(|_| BitVector::random(polys.len(), rng))
            .collect();
        let mut outside = vec![0u64; words];
        let mut scratch = vec![0u64; words];
        for a in &alphas {
            scratch.iter_mut().for_each(|w| *w = 0);
            for j in a.iter_ones() {
                for (s, t) in scratch.iter_mut().zip(tables[j].words()) {
                    *s ^= t;
                }
            }
            for (o, s) in outside.iter_mut().zip(&scratch) {
                *o |= s;
            }
        }
        if outside == target.words() {
            let combined = alphas
                .iter()
                .map(|a| {
                    let mut coeffs = BitVector::zeros(order.len());
                    for j in a.iter_ones() {
                        coeffs.xor_assign(polys[j].coeffs());
                    }
                    Polynomial::from_coeffs(&order, coeffs)
                })
                .collect::<Result<_>>()?;
            return Ok(VarietyReduction {
                polys: combined,
                attempts: attempt,
            });
        }
    }
    Err(Error::RetriesExhausted {
        what: "variety reduction",
        attempts: budget,
    })
}
