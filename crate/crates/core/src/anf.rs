//! Multivariate GF(2) polynomials of bounded degree in algebraic normal form.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::sync::Arc;

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use crate::error::{check_budget, Error, Result};
use crate::gf2::{binom_sum_usize, moebius_in_place, BitMatrix, BitVector};
use crate::rng::Stream;

/// Largest monomial table a [`MonomialOrder`] will build.
pub const MAX_MONOMIALS: usize = 1 << 26;

/// Largest variable count for which dense truth tables are produced.
pub const MAX_TABLE_VARS: usize = 24;

/// The monomials `x^I` with `|I| <= d` over `n` variables: degree ascending,
/// ties broken lexicographically on sorted 0-based index lists.
pub struct MonomialOrder {
    n: usize,
    d: usize,
    monomials: Vec<Vec<usize>>,
    masks: Option<Vec<u64>>,
    index: HashMap<Vec<usize>, usize>,
}

impl MonomialOrder {
    pub fn new(n: usize, d: usize) -> Result<Self> {
        let count = binom_sum_usize(n, d).unwrap_or(usize::MAX);
        check_budget("monomial count", count as u128, MAX_MONOMIALS as u128)?;
        let monomials: Vec<Vec<usize>> = (0..=d.min(n))
            .flat_map(|w| (0..n).combinations(w))
            .collect();
        let masks = (n <= 64).then(|| {
            monomials
                .iter()
                .map(|m| m.iter().fold(0u64, |acc, &i| acc | 1 << i))
                .collect()
        });
        let index = monomials
            .iter()
            .enumerate()
            .map(|(i, m)| (m.clone(), i))
            .collect();
        Ok(Self {
            n,
            d,
            monomials,
            masks,
            index,
        })
    }

    pub fn shared(n: usize, d: usize) -> Result<Arc<Self>> {
        Self::new(n, d).map(Arc::new)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    /// The degree cap.
    #[inline]
    pub fn d(&self) -> usize {
        self.d
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.monomials.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.monomials.is_empty()
    }

    pub fn monomial(&self, i: usize) -> &[usize] {
        &self.monomials[i]
    }

    pub fn monomials(&self) -> &[Vec<usize>] {
        &self.monomials
    }

    /// Position of the monomial with sorted index list `vars`.
    pub fn index_of(&self, vars: &[usize]) -> Option<usize> {
        self.index.get(vars).copied()
    }

    /// Integer masks of the monomials, available when `n <= 64`.
    pub fn masks(&self) -> Option<&[u64]> {
        self.masks.as_deref()
    }

    fn check_len(&self, x: &BitVector) -> Result<()> {
        if x.len() != self.n {
            return Err(Error::LengthMismatch {
                expected: self.n,
                found: x.len(),
            });
        }
        Ok(())
    }

    #[inline]
    fn monomial_at(&self, i: usize, x: &BitVector) -> bool {
        match &self.masks {
            Some(masks) => {
                let xi = x.words().first().copied().unwrap_or(0);
                xi & masks[i] == masks[i]
            }
            None => self.monomials[i].iter().all(|&v| x.get(v)),
        }
    }
}

impl fmt::Debug for MonomialOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "MonomialOrder(n={}, d={}, len={})",
            self.n,
            self.d,
            self.len()
        )
    }
}

/// `eval_d(x)`: the value of every monomial of the order at `x`.
pub fn eval_vector(x: &BitVector, order: &MonomialOrder) -> Result<BitVector> {
    order.check_len(x)?;
    Ok(eval_vector_unchecked(x, order))
}

fn eval_vector_unchecked(x: &BitVector, order: &MonomialOrder) -> BitVector {
    match order.masks() {
        Some(masks) => {
            let xi = x.words().first().copied().unwrap_or(0);
            BitVector::from_bits(masks.iter().map(|&m| xi & m == m))
        }
        None => BitVector::from_bits((0..order.len()).map(|i| order.monomial_at(i, x))),
    }
}

/// [`eval_vector`] on the integer encoding of `x`; requires `n <= 64`.
pub fn eval_vector_u64(x: u64, order: &MonomialOrder) -> BitVector {
    let masks = order.masks().expect("integer evaluation needs n <= 64");
    BitVector::from_bits(masks.iter().map(|&m| x & m == m))
}

/// A polynomial as a coefficient vector over a frozen monomial order.
#[derive(Clone)]
pub struct Polynomial {
    order: Arc<MonomialOrder>,
    coeffs: BitVector,
}

impl Polynomial {
    pub fn zero(order: &Arc<MonomialOrder>) -> Self {
        Self {
            order: order.clone(),
            coeffs: BitVector::zeros(order.len()),
        }
    }

    pub fn constant(order: &Arc<MonomialOrder>, bit: bool) -> Self {
        let mut p = Self::zero(order);
        p.coeffs.set(0, bit);
        p
    }

    pub fn from_coeffs(order: &Arc<MonomialOrder>, coeffs: BitVector) -> Result<Self> {
        if coeffs.len() != order.len() {
            return Err(Error::LengthMismatch {
                expected: order.len(),
                found: coeffs.len(),
            });
        }
        Ok(Self {
            order: order.clone(),
            coeffs,
        })
    }

    /// The sum of the listed monomials (0-based index lists, any order
    /// within a monomial). Repeated monomials, repeated indices, indices
    /// `>= n` and monomials above the cap are rejected.
    pub fn from_monomials(order: &Arc<MonomialOrder>, monomials: &[Vec<usize>]) -> Result<Self> {
        let mut p = Self::zero(order);
        for (k, m) in monomials.iter().enumerate() {
            let mut vars = m.clone();
            vars.sort_unstable();
            if let Some(&bad) = vars.iter().find(|&&v| v >= order.n()) {
                return Err(Error::parse(
                    format!("monomials[{k}]"),
                    format!("index {bad} out of range for n = {}", order.n()),
                ));
            }
            if vars.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::parse(format!("monomials[{k}]"), "duplicate index"));
            }
            if vars.len() > order.d() {
                return Err(Error::parse(
                    format!("monomials[{k}]"),
                    format!("degree {} exceeds cap {}", vars.len(), order.d()),
                ));
            }
            let i = order
                .index_of(&vars)
                .expect("validated monomial is in the order");
            if p.coeffs.get(i) {
                return Err(Error::parse(format!("monomials[{k}]"), "repeated monomial"));
            }
            p.coeffs.set(i, true);
        }
        Ok(p)
    }

    /// Uniform coefficients over the given order.
    pub fn random(order: &Arc<MonomialOrder>, rng: &mut Stream) -> Self {
        Self {
            order: order.clone(),
            coeffs: BitVector::random(order.len(), rng),
        }
    }

    #[inline]
    pub fn order(&self) -> &Arc<MonomialOrder> {
        &self.order
    }

    #[inline]
    pub fn coeffs(&self) -> &BitVector {
        &self.coeffs
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.order.n()
    }

    /// The degree cap of the underlying order.
    #[inline]
    pub fn cap(&self) -> usize {
        self.order.d()
    }

    /// Largest monomial size with coefficient 1; 0 for the zero polynomial.
    pub fn degree(&self) -> usize {
        self.coeffs
            .iter_ones()
            .last()
            .map_or(0, |i| self.order.monomial(i).len())
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_zero()
    }

    /// Monomials with coefficient 1, in order.
    pub fn monomials(&self) -> Vec<Vec<usize>> {
        self.coeffs
            .iter_ones()
            .map(|i| self.order.monomial(i).to_vec())
            .collect()
    }

    pub fn evaluate(&self, x: &BitVector) -> Result<bool> {
        self.order.check_len(x)?;
        Ok(self
            .coeffs
            .iter_ones()
            .fold(false, |acc, i| acc ^ self.order.monomial_at(i, x)))
    }

    /// Evaluation on the integer encoding; requires `n <= 64`.
    #[inline]
    pub fn evaluate_u64(&self, x: u64) -> bool {
        let masks = self
            .order
            .masks()
            .expect("integer evaluation needs n <= 64");
        self.coeffs
            .iter_ones()
            .fold(false, |acc, i| acc ^ (x & masks[i] == masks[i]))
    }

    pub fn xor(&self, other: &Self) -> Result<Self> {
        self.same_order(other)?;
        Ok(Self {
            order: self.order.clone(),
            coeffs: self.coeffs.xor(&other.coeffs),
        })
    }

    pub fn add_constant(&self, bit: bool) -> Self {
        let mut p = self.clone();
        if bit {
            p.coeffs.flip(0);
        }
        p
    }

    fn same_order(&self, other: &Self) -> Result<()> {
        if self.n() != other.n() || self.cap() != other.cap() {
            return Err(Error::DimensionMismatch(format!(
                "polynomials over (n={}, d={}) and (n={}, d={})",
                self.n(),
                self.cap(),
                other.n(),
                other.cap()
            )));
        }
        Ok(())
    }

    /// The same function over another order with the same `n`; fails if a
    /// monomial exceeds the new cap.
    pub fn recast(&self, order: &Arc<MonomialOrder>) -> Result<Self> {
        if order.n() != self.n() {
            return Err(Error::DimensionMismatch(format!(
                "recast from n={} to n={}",
                self.n(),
                order.n()
            )));
        }
        Self::from_monomials(order, &self.monomials())
    }

    /// Packed truth table: bit `x` is `f(x)` for `x` in `0..2^n`.
    pub fn truth_table(&self) -> Result<BitVector> {
        let n = self.n();
        check_budget("truth table variables", n as u128, MAX_TABLE_VARS as u128)?;
        let masks = self.order.masks().expect("n <= 24");
        let mut table = BitVector::zeros(1 << n);
        for i in self.coeffs.iter_ones() {
            table.set(masks[i] as usize, true);
        }
        let mut words = table.words().to_vec();
        moebius_in_place(&mut words, n);
        Ok(BitVector::from_words(1 << n, words))
    }

    /// The ANF of `x ↦ q(L x)` for an `m × n` matrix `L`, by expanding the
    /// product of the substituted linear forms.
    pub fn compose_linear(&self, l: &BitMatrix) -> Result<Self> {
        self.check_compose(l)?;
        let n = l.cols();
        let order = MonomialOrder::shared(n, self.cap())?;
        let rows: Vec<Vec<usize>> = (0..l.rows()).map(|i| l.row(i).support()).collect();
        let mut acc: HashSet<Vec<usize>> = HashSet::new();
        for k in self.coeffs.iter_ones() {
            let mut terms: HashSet<Vec<usize>> = HashSet::from([Vec::new()]);
            for &var in self.order.monomial(k) {
                let mut next = HashSet::new();
                for t in &terms {
                    for &j in &rows[var] {
                        let mut m = t.clone();
                        if let Err(pos) = m.binary_search(&j) {
                            m.insert(pos, j);
                        }
                        toggle(&mut next, m);
                    }
                }
                terms = next;
            }
            for t in terms {
                toggle(&mut acc, t);
            }
        }
        let mut coeffs = BitVector::zeros(order.len());
        for m in acc {
            let i = order.index_of(&m).expect("composition never raises degree");
            coeffs.set(i, true);
        }
        Self::from_coeffs(&order, coeffs)
    }

    /// [`Self::compose_linear`] computed through the truth table of
    /// `x ↦ q(L x)` and a Möbius transform; limited to `n <= 24`.
    pub fn compose_linear_via_table(&self, l: &BitMatrix) -> Result<Self> {
        self.check_compose(l)?;
        let n = l.cols();
        check_budget("truth table variables", n as u128, MAX_TABLE_VARS as u128)?;
        let table = BitVector::from_bits((0..1u64 << n).map(|x| {
            let y = l
                .mul_vec(&BitVector::from_u64(n, x))
                .expect("dimensions checked");
            self.evaluate(&y).expect("dimensions checked")
        }));
        let full = anf_from_truth_table(&table)?;
        let order = MonomialOrder::shared(n, self.cap())?;
        full.recast(&order)
    }

    fn check_compose(&self, l: &BitMatrix) -> Result<()> {
        if l.rows() != self.n() {
            return Err(Error::DimensionMismatch(format!(
                "polynomial over {} variables composed with {}x{} map",
                self.n(),
                l.rows(),
                l.cols()
            )));
        }
        Ok(())
    }

    pub fn to_file(&self) -> PolynomialFile {
        PolynomialFile {
            n: self.n(),
            d: self.cap(),
            monomials: self.monomials(),
        }
    }

    pub fn from_file(file: &PolynomialFile) -> Result<Self> {
        let order = MonomialOrder::shared(file.n, file.d)?;
        Self::from_monomials(&order, &file.monomials)
    }

    /// Canonical compact JSON.
    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_file()).expect("plain data serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let file: PolynomialFile = serde_json::from_str(s).map_err(|e| {
            Error::parse(
                format!("line {} column {}", e.line(), e.column()),
                e.to_string(),
            )
        })?;
        Self::from_file(&file)
    }
}

fn toggle(set: &mut HashSet<Vec<usize>>, m: Vec<usize>) {
    if !set.remove(&m) {
        set.insert(m);
    }
}

impl PartialEq for Polynomial {
    fn eq(&self, other: &Self) -> bool {
        self.n() == other.n() && self.cap() == other.cap() && self.coeffs == other.coeffs
    }
}

impl Eq for Polynomial {}

impl fmt::Debug for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Polynomial(n={}, d={}, {})", self.n(), self.cap(), self)
    }
}

impl fmt::Display for Polynomial {
    /// Human-readable sum with 1-based variable names, e.g. `x1*x2 + x3 + 1`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms: Vec<String> = self
            .monomials()
            .iter()
            .rev()
            .map(|m| {
                if m.is_empty() {
                    "1".to_string()
                } else {
                    m.iter().map(|v| format!("x{}", v + 1)).join("*")
                }
            })
            .collect();
        if terms.is_empty() {
            f.write_str("0")
        } else {
            f.write_str(&terms.join(" + "))
        }
    }
}

impl Serialize for Polynomial {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_file().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Polynomial {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let file = PolynomialFile::deserialize(d)?;
        Self::from_file(&file).map_err(serde::de::Error::custom)
    }
}

/// On-disk polynomial form: the monomials with coefficient 1.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolynomialFile {
    pub n: usize,
    pub d: usize,
    pub monomials: Vec<Vec<usize>>,
}

/// Uniformly random polynomial of degree at most `d` in `n` variables,
/// constant term included.
pub fn sample_poly(n: usize, d: usize, rng: &mut Stream) -> Result<Polynomial> {
    if d > n {
        return Err(Error::InvalidParameter(format!(
            "degree cap {d} exceeds n = {n}"
        )));
    }
    let order = MonomialOrder::shared(n, d)?;
    Ok(Polynomial::random(&order, rng))
}

/// The unique ANF (degree cap `n`) of a truth table of length `2^n`.
pub fn anf_from_truth_table(table: &BitVector) -> Result<Polynomial> {
    let len = table.len();
    if len == 0 || !len.is_power_of_two() {
        return Err(Error::InvalidParameter(format!(
            "truth table length {len} is not a power of two"
        )));
    }
    let n = len.trailing_zeros() as usize;
    check_budget("truth table variables", n as u128, MAX_TABLE_VARS as u128)?;
    let mut words = table.words().to_vec();
    moebius_in_place(&mut words, n);
    let coeff_table = BitVector::from_words(len, words);
    let order = MonomialOrder::shared(n, n)?;
    let masks = order.masks().expect("n <= 24");
    let coeffs = BitVector::from_bits(masks.iter().map(|&m| coeff_table.get(m as usize)));
    Polynomial::from_coeffs(&order, coeffs)
}

/// Degree of the function given by a truth table.
pub fn table_degree(table: &BitVector) -> Result<usize> {
    let len = table.len();
    if len == 0 || !len.is_power_of_two() {
        return Err(Error::InvalidParameter(format!(
            "truth table length {len} is not a power of two"
        )));
    }
    let n = len.trailing_zeros() as usize;
    let mut words = table.words().to_vec();
    moebius_in_place(&mut words, n);
    Ok(BitVector::from_words(len, words)
        .iter_ones()
        .map(|s| s.count_ones() as usize)
        .max()
        .unwrap_or(0))
}
