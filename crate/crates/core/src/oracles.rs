//! Brute-force and randomized adversaries: additive energy and
//! low-energy partitions, shift counts for low-degree zero sets, the
//! left-degree disperser attack, monochromatic-sumset search, evasive-set
//! audits, and the inner-product dichotomy.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use itertools::Itertools;
use num_bigint::BigUint;
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::anf::{eval_vector, MonomialOrder, Polynomial};
use crate::bias::Verdict;
use crate::constructions::EvasiveDescriptor;
use crate::error::{check_budget, Error, Result};
use crate::gf2::{binom, span_dim, span_elements, BitMatrix, BitVector, EchelonBasis};
use crate::rng::Stream;

/// Cap on `|X|·|Y|` for pairwise enumerations.
pub const PAIR_LIMIT: u128 = 1 << 26;

/// Largest variable count for truth-table based oracles.
pub const TABLE_VARS: usize = 24;

fn common_len(sets: &[&[BitVector]]) -> Result<usize> {
    let n = sets
        .iter()
        .flat_map(|s| s.first())
        .map(BitVector::len)
        .next()
        .ok_or_else(|| Error::InvalidParameter("empty set".into()))?;
    for v in sets.iter().flat_map(|s| s.iter()) {
        if v.len() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                found: v.len(),
            });
        }
    }
    Ok(n)
}

fn sum_counts(x: &[BitVector], y: &[BitVector]) -> HashMap<BitVector, u64> {
    let mut counts = HashMap::new();
    for a in x {
        for b in y {
            *counts.entry(a.xor(b)).or_insert(0) += 1;
        }
    }
    counts
}

/// `Σ_w |{(x, y) ∈ X × Y : x + y = w}|^2`.
pub fn additive_energy(x: &[BitVector], y: &[BitVector]) -> Result<BigUint> {
    if x.is_empty() || y.is_empty() {
        return Ok(BigUint::default());
    }
    common_len(&[x, y])?;
    check_budget(
        "energy pairs",
        x.len() as u128 * y.len() as u128,
        PAIR_LIMIT,
    )?;
    Ok(sum_counts(x, y)
        .values()
        .map(|&c| BigUint::from(c) * c)
        .sum())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnergyPartition {
    pub x_parts: Vec<Vec<BitVector>>,
    pub y_parts: Vec<Vec<BitVector>>,
    pub t: usize,
    /// Cap on every fiber `|{(x, y) ∈ X_i × Y_j : x + y = w}|`.
    pub ell: usize,
    pub max_fiber: u64,
    /// Partitions drawn, including the accepted one.
    pub retries_used: u64,
    /// Whether `ℓ >= 4` and `t >= k (1 + ℓ/2) / (ℓ - 1)`; success does not
    /// depend on it.
    pub constraint_satisfied: bool,
}

impl EnergyPartition {
    /// `ℓ^2 · 2^{2(k-t)}`.
    pub fn energy_cap(&self) -> BigUint {
        let part = self.x_parts.first().map_or(0, Vec::len) as u64;
        BigUint::from(self.ell as u64).pow(2) * part * part
    }
}

fn is_power_of_two_len(v: &[BitVector]) -> Option<usize> {
    v.len()
        .is_power_of_two()
        .then(|| v.len().trailing_zeros() as usize)
}

/// Splits `X` and `Y` into `2^t` uniformly random parts of equal size,
/// redrawing both partitions until every fiber of every part pair has at
/// most `ℓ` elements.
pub fn energy_partition(
    x: &[BitVector],
    y: &[BitVector],
    t: usize,
    ell: usize,
    rng: &mut Stream,
    retries: u64,
) -> Result<EnergyPartition> {
    common_len(&[x, y])?;
    let k = is_power_of_two_len(x)
        .ok_or_else(|| Error::InvalidParameter("|X| must be a power of two".into()))?;
    if y.len() != x.len() {
        return Err(Error::InvalidParameter("|X| and |Y| must agree".into()));
    }
    if t > k {
        return Err(Error::InvalidParameter(format!(
            "2^{t} does not divide 2^{k}"
        )));
    }
    if ell == 0 {
        return Err(Error::InvalidParameter("ℓ must be at least 1".into()));
    }
    check_budget(
        "energy pairs",
        x.len() as u128 * y.len() as u128,
        PAIR_LIMIT,
    )?;
    let constraint_satisfied =
        ell >= 4 && (t as f64) >= k as f64 / (ell as f64 - 1.0) * (1.0 + ell as f64 / 2.0);
    let size = 1usize << (k - t);
    let mut xs = x.to_vec();
    let mut ys = y.to_vec();
    for attempt in 1..=retries {
        xs.shuffle(rng);
        ys.shuffle(rng);
        let x_parts: Vec<Vec<BitVector>> = xs.chunks(size).map(<[_]>::to_vec).collect();
        let y_parts: Vec<Vec<BitVector>> = ys.chunks(size).map(<[_]>::to_vec).collect();
        let max_fiber = x_parts
            .iter()
            .cartesian_product(&y_parts)
            .map(|(a, b)| sum_counts(a, b).into_values().max().unwrap_or(0))
            .max()
            .unwrap_or(0);
        if max_fiber <= ell as u64 {
            return Ok(EnergyPartition {
                x_parts,
                y_parts,
                t,
                ell,
                max_fiber,
                retries_used: attempt,
                constraint_satisfied,
            });
        }
    }
    Err(Error::RetriesExhausted {
        what: "energy partition",
        attempts: retries,
    })
}

/// Masks of every element of `span(basis)` for `n <= 64`.
fn span_masks(basis: &[BitVector]) -> Vec<u64> {
    let mut out = vec![0u64];
    for b in basis {
        let m = b.to_u64();
        let len = out.len();
        for i in 0..len {
            out.push(out[i] ^ m);
        }
    }
    out
}

fn independent(basis: &[BitVector]) -> bool {
    basis.is_empty() || span_dim(basis[0].len(), basis) == basis.len()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShiftCount {
    pub count: u64,
    /// `n - Σ_{j<d} (d - j) C(t, j)` for `d = deg f`, `t = dim V`.
    pub bound_exponent: i64,
    pub verdict: Verdict,
}

/// Counts `x` with `f(x + v) = 0` for every `v` in `span(V)`, for `f`
/// vanishing on `span(V)`.
pub fn cw_shift_count(f: &Polynomial, v_basis: &[BitVector]) -> Result<ShiftCount> {
    let n = f.n();
    check_budget("variables", n as u128, TABLE_VARS as u128)?;
    if let Some(v) = v_basis.iter().find(|v| v.len() != n) {
        return Err(Error::LengthMismatch {
            expected: n,
            found: v.len(),
        });
    }
    if !independent(v_basis) {
        return Err(Error::InvalidParameter(
            "subspace basis is dependent".into(),
        ));
    }
    let table = f.truth_table()?;
    let shifts = span_masks(v_basis);
    if shifts.iter().any(|&v| table.get(v as usize)) {
        return Err(Error::Precondition(
            "polynomial does not vanish on the subspace".into(),
        ));
    }
    check_budget(
        "shift enumeration",
        (1u128 << n) * shifts.len() as u128,
        1 << 32,
    )?;
    let count = (0..1u64 << n)
        .filter(|&x| shifts.iter().all(|&v| !table.get((x ^ v) as usize)))
        .count() as u64;
    let (d, t) = (f.degree(), v_basis.len());
    let loss: i64 = (0..d)
        .map(|j| (d - j) as i64 * i64::try_from(binom(t, j)).expect("small binomial"))
        .sum();
    let bound_exponent = n as i64 - loss;
    let verdict = bound_exponent <= 0 || (bound_exponent < 64 && count >= 1u64 << bound_exponent);
    Ok(ShiftCount {
        count,
        bound_exponent,
        verdict: Verdict::from_bool(verdict),
    })
}

/// A uniform polynomial of degree `<= d` vanishing on `span(V)`: the
/// nullspace of the rows `eval_d(v)`, `v ∈ span(V)`, sampled uniformly.
pub fn sample_vanishing_poly(
    n: usize,
    d: usize,
    v_basis: &[BitVector],
    rng: &mut Stream,
) -> Result<Polynomial> {
    check_budget("subspace dimension", v_basis.len() as u128, 20)?;
    let order = MonomialOrder::shared(n, d)?;
    let rows: Vec<BitVector> = span_elements(n, v_basis)
        .iter()
        .map(|v| eval_vector(v, &order))
        .collect::<Result<_>>()?;
    let kernel = BitMatrix::from_rows(order.len(), &rows)?.nullspace();
    let mut coeffs = BitVector::zeros(order.len());
    for k in &kernel {
        if rng.gen::<bool>() {
            coeffs.xor_assign(k);
        }
    }
    Polynomial::from_coeffs(&order, coeffs)
}

/// `t` independent uniform vectors of length `n`, by rejection.
pub fn random_independent(n: usize, t: usize, rng: &mut Stream) -> Result<Vec<BitVector>> {
    if t > n {
        return Err(Error::InvalidParameter(format!(
            "no {t} independent vectors in dimension {n}"
        )));
    }
    let mut basis = EchelonBasis::new(n);
    let mut out = Vec::with_capacity(t);
    while out.len() < t {
        let v = BitVector::random(n, rng);
        if basis.insert(&v) {
            out.push(v);
        }
    }
    Ok(out)
}

/// Sets `A`, `B` on which a function is constant or into whose sumset a
/// set is closed; see the `verify_*` functions for each reading.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AttackWitness {
    pub a: Vec<BitVector>,
    pub b: Vec<BitVector>,
    /// The constant value, for constancy witnesses.
    pub value: Option<bool>,
    pub verified: bool,
    pub seed: Option<u64>,
    #[serde(default)]
    pub params: BTreeMap<String, serde_json::Value>,
}

impl AttackWitness {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("witness serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::parse("witness", e.to_string()))
    }
}

fn distinct(v: &[BitVector]) -> bool {
    v.iter().collect::<HashSet<_>>().len() == v.len()
}

/// `f_y(x) = value` for every `x ∈ a`, `y ∈ b`, with `f_y` the table at the
/// integer index of `y`.
pub fn verify_disperser_witness(tables: &[BitVector], w: &AttackWitness) -> bool {
    let Some(value) = w.value else { return false };
    distinct(&w.a)
        && distinct(&w.b)
        && w.b.iter().all(|y| match tables.get(y.to_u64() as usize) {
            Some(table) => w.a.iter().all(|x| {
                x.len() <= 63
                    && (x.to_u64() as usize) < table.len()
                    && table.get(x.to_u64() as usize) == value
            }),
            None => false,
        })
}

/// `f(a + b) = value` for every `a ∈ A`, `b ∈ B`.
pub fn verify_sumset_witness(f: &Polynomial, w: &AttackWitness) -> bool {
    let Some(value) = w.value else { return false };
    distinct(&w.a)
        && distinct(&w.b)
        && w.a
            .iter()
            .cartesian_product(&w.b)
            .all(|(a, b)| f.evaluate(&a.xor(b)) == Ok(value))
}

/// `A + B ⊆ S`.
pub fn verify_containment_witness(s: &dyn Membership, w: &AttackWitness) -> bool {
    distinct(&w.a)
        && distinct(&w.b)
        && w.a
            .iter()
            .cartesian_product(&w.b)
            .all(|(a, b)| a.len() == s.len() && b.len() == s.len() && s.contains(&a.xor(b)))
}

/// Truth tables of `f_y`, one per `y` in integer order.
pub fn family_tables(family: &[Polynomial]) -> Result<(usize, Vec<BitVector>)> {
    let n = family
        .first()
        .ok_or_else(|| Error::InvalidParameter("empty family".into()))?
        .n();
    if family.len() != 1 << n {
        return Err(Error::InvalidParameter(format!(
            "family of {} functions over {n} variables, expected 2^{n}",
            family.len()
        )));
    }
    check_budget("family variables", n as u128, 12)?;
    let tables = family
        .iter()
        .map(|f| {
            if f.n() != n {
                return Err(Error::LengthMismatch {
                    expected: n,
                    found: f.n(),
                });
            }
            f.truth_table()
        })
        .collect::<Result<_>>()?;
    Ok((n, tables))
}

/// The family `f_y = f(·, y)` of a polynomial over `2n` variables with
/// `x` first.
pub fn family_of_two_block(f: &Polynomial) -> Result<Vec<Polynomial>> {
    if !f.n().is_multiple_of(2) {
        return Err(Error::InvalidParameter(
            "two-block polynomial needs an even variable count".into(),
        ));
    }
    let n = f.n() / 2;
    check_budget("family variables", n as u128, 12)?;
    let order = MonomialOrder::shared(n, n)?;
    let table = f.truth_table()?;
    (0..1usize << n)
        .map(|y| {
            let bits = BitVector::from_bits((0..1usize << n).map(|x| table.get(x | y << n)));
            let g = crate::anf::anf_from_truth_table(&bits)?;
            g.recast(&order)
        })
        .collect()
}

/// Searches for `X = span(V)` with `dim V = t` and `Y`, `|Y| >= 2^t`, on
/// which `f_y(x)` is constant.
///
/// The constant is the majority value `b` of `f_y(0)`; each of `budget`
/// rounds draws a fresh `V` and keeps the `y` with `f_y ≡ b` on `span(V)`.
/// Without a full-size `Y`, the largest nonempty one found is returned
/// with `params["complete"] = false`.
pub fn disperser_attack(
    tables: &[BitVector],
    n: usize,
    t: usize,
    budget: u64,
    rng: &mut Stream,
) -> Result<AttackWitness> {
    if tables.len() != 1 << n || tables.iter().any(|tb| tb.len() != 1 << n) {
        return Err(Error::InvalidParameter(format!(
            "expected 2^{n} tables of length 2^{n}"
        )));
    }
    if t > n {
        return Err(Error::InvalidParameter(format!("t = {t} exceeds n = {n}")));
    }
    let ones = tables.iter().filter(|tb| tb.get(0)).count();
    let b = 2 * ones > tables.len();
    let candidates: Vec<usize> = (0..tables.len())
        .filter(|&y| tables[y].get(0) == b)
        .collect();
    let mut best: Option<(Vec<BitVector>, Vec<usize>)> = None;
    for _ in 0..budget {
        let basis = random_independent(n, t, rng)?;
        let shifts = span_masks(&basis);
        let ys: Vec<usize> = candidates
            .iter()
            .copied()
            .filter(|&y| shifts.iter().all(|&v| tables[y].get(v as usize) == b))
            .collect();
        let done = ys.len() >= 1 << t;
        if best.as_ref().is_none_or(|(_, bys)| ys.len() > bys.len()) {
            best = Some((basis, ys));
        }
        if done {
            break;
        }
    }
    let (basis, ys) = best
        .filter(|(_, ys)| !ys.is_empty())
        .ok_or(Error::RetriesExhausted {
            what: "disperser attack",
            attempts: budget,
        })?;
    let complete = ys.len() >= 1 << t;
    let mut w = AttackWitness {
        a: span_elements(n, &basis),
        b: ys
            .iter()
            .map(|&y| BitVector::from_u64(n, y as u64))
            .collect(),
        value: Some(b),
        verified: false,
        seed: None,
        params: BTreeMap::from([
            ("n".to_string(), n.into()),
            ("t".to_string(), t.into()),
            ("complete".to_string(), complete.into()),
        ]),
    };
    w.verified = verify_disperser_witness(tables, &w);
    Ok(w)
}

/// Restarts and per-step patience for the greedy sumset searches.
const GREEDY_PATIENCE: u64 = 256;

/// Greedy search for `A`, `B` of size `s` with `f` constant on `A + B`.
/// Growth alternates between `A` and `B`; each candidate test counts
/// against `budget`, and a step that stalls for many candidates restarts
/// the search.
pub fn monochromatic_sumset_search(
    f: &Polynomial,
    s: usize,
    budget: u64,
    rng: &mut Stream,
) -> Result<Option<AttackWitness>> {
    let n = f.n();
    if s == 0 || (n < 64 && s as u64 > 1u64 << n) {
        return Err(Error::InvalidParameter(format!(
            "target size {s} out of range"
        )));
    }
    let mut spent = 0u64;
    while spent < budget {
        let a0 = BitVector::random(n, rng);
        let b0 = BitVector::random(n, rng);
        let value = f.evaluate(&a0.xor(&b0))?;
        let mut sets = [vec![a0], vec![b0]];
        let mut side = 0;
        'grow: while sets[0].len() < s || sets[1].len() < s {
            if sets[side].len() >= s {
                side ^= 1;
            }
            let mut stall = 0;
            loop {
                if spent >= budget {
                    return Ok(None);
                }
                spent += 1;
                let c = BitVector::random(n, rng);
                let ok = !sets[side].contains(&c)
                    && sets[side ^ 1]
                        .iter()
                        .all(|o| f.evaluate(&c.xor(o)) == Ok(value));
                if ok {
                    sets[side].push(c);
                    side ^= 1;
                    break;
                }
                stall += 1;
                if stall >= GREEDY_PATIENCE {
                    break 'grow;
                }
            }
        }
        if sets[0].len() >= s && sets[1].len() >= s {
            let [a, b] = sets;
            let mut w = AttackWitness {
                a,
                b,
                value: Some(value),
                verified: false,
                seed: None,
                params: BTreeMap::from([("n".to_string(), n.into()), ("s".to_string(), s.into())]),
            };
            w.verified = verify_sumset_witness(f, &w);
            return Ok(Some(w));
        }
    }
    Ok(None)
}

/// A set of vectors of a fixed length with membership tests and uniform
/// sampling of its members.
pub trait Membership: Sync {
    fn len(&self) -> usize;
    fn is_empty(&self) -> bool {
        self.len() == 0
    }
    fn contains(&self, z: &BitVector) -> bool;
    fn sample(&self, rng: &mut Stream) -> BitVector;
}

/// An explicitly listed set.
pub struct ExplicitSet {
    len: usize,
    members: Vec<BitVector>,
    lookup: HashSet<BitVector>,
}

impl ExplicitSet {
    pub fn new(members: Vec<BitVector>) -> Result<Self> {
        let len = common_len(&[&members])?;
        let lookup: HashSet<BitVector> = members.iter().cloned().collect();
        let members = lookup.iter().cloned().sorted().collect();
        Ok(Self {
            len,
            members,
            lookup,
        })
    }

    pub fn members(&self) -> &[BitVector] {
        &self.members
    }
}

impl Membership for ExplicitSet {
    fn len(&self) -> usize {
        self.len
    }

    fn contains(&self, z: &BitVector) -> bool {
        self.lookup.contains(z)
    }

    fn sample(&self, rng: &mut Stream) -> BitVector {
        self.members.choose(rng).expect("nonempty set").clone()
    }
}

/// All of `F_2^r`.
pub struct FullSpace(pub usize);

impl Membership for FullSpace {
    fn len(&self) -> usize {
        self.0
    }

    fn contains(&self, z: &BitVector) -> bool {
        z.len() == self.0
    }

    fn sample(&self, rng: &mut Stream) -> BitVector {
        BitVector::random(self.0, rng)
    }
}

/// The image `{h(x)}` of an evasive encoder, tested through its first `k`
/// coordinates.
pub struct Graph<'a>(pub &'a EvasiveDescriptor);

impl Membership for Graph<'_> {
    fn len(&self) -> usize {
        self.0.width()
    }

    fn contains(&self, z: &BitVector) -> bool {
        z.len() == self.0.width() && self.0.image(&z.slice(0, self.0.k)).is_ok_and(|h| &h == z)
    }

    fn sample(&self, rng: &mut Stream) -> BitVector {
        self.0
            .image(&BitVector::random(self.0.k, rng))
            .expect("domain-length input")
    }
}

/// The graph `{(x, M x)}` of a linear map.
pub struct LinearGraph(pub BitMatrix);

impl Membership for LinearGraph {
    fn len(&self) -> usize {
        self.0.cols() + self.0.rows()
    }

    fn contains(&self, z: &BitVector) -> bool {
        let k = self.0.cols();
        z.len() == self.len()
            && self
                .0
                .mul_vec(&z.slice(0, k))
                .is_ok_and(|y| y == z.slice(k, z.len()))
    }

    fn sample(&self, rng: &mut Stream) -> BitVector {
        let x = BitVector::random(self.0.cols(), rng);
        let y = self.0.mul_vec(&x).expect("matching length");
        x.concat(&y)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvasiveAudit {
    /// `Pass` when no witness was found.
    pub verdict: Verdict,
    pub exhaustive: bool,
    /// Subspaces enumerated, candidate sets drawn, or candidate tests.
    pub checked: u64,
    pub flagged: u64,
    pub flag_rate: f64,
    pub witness: Option<AttackWitness>,
}

/// Greedy search for `A`, `B` of size `2^t` with `A + B ⊆ S`: `A` starts
/// from a member `a_0` of `S`, `B` from `a_0 + s'`, and candidates are
/// partner-plus-member shifts so that one sum is in `S` by construction.
pub fn sumset_evasive_audit(
    s: &dyn Membership,
    t: usize,
    budget: u64,
    rng: &mut Stream,
) -> Result<EvasiveAudit> {
    let target = 1usize << t;
    let mut spent = 0u64;
    let mut restarts = 0u64;
    while spent < budget {
        restarts += 1;
        let a0 = s.sample(rng);
        let b0 = a0.xor(&s.sample(rng));
        let mut sets = [vec![a0], vec![b0]];
        let mut side = 0;
        let mut stalled = false;
        while (sets[0].len() < target || sets[1].len() < target) && !stalled {
            if sets[side].len() >= target {
                side ^= 1;
            }
            let mut stall = 0;
            loop {
                if spent >= budget {
                    break;
                }
                spent += 1;
                let anchor = sets[side ^ 1].choose(rng).expect("nonempty").clone();
                let c = anchor.xor(&s.sample(rng));
                if !sets[side].contains(&c) && sets[side ^ 1].iter().all(|o| s.contains(&c.xor(o)))
                {
                    sets[side].push(c);
                    side ^= 1;
                    break;
                }
                stall += 1;
                if stall >= GREEDY_PATIENCE {
                    stalled = true;
                    break;
                }
            }
            if spent >= budget {
                break;
            }
        }
        if sets[0].len() >= target && sets[1].len() >= target {
            let [a, b] = sets;
            let mut w = AttackWitness {
                a,
                b,
                value: None,
                verified: false,
                seed: None,
                params: BTreeMap::from([
                    ("r".to_string(), s.len().into()),
                    ("t".to_string(), t.into()),
                ]),
            };
            w.verified = verify_containment_witness(s, &w);
            return Ok(EvasiveAudit {
                verdict: Verdict::Fail,
                exhaustive: false,
                checked: spent,
                flagged: 1,
                flag_rate: 1.0 / restarts as f64,
                witness: Some(w),
            });
        }
    }
    Ok(EvasiveAudit {
        verdict: Verdict::Pass,
        exhaustive: false,
        checked: spent,
        flagged: 0,
        flag_rate: 0.0,
        witness: None,
    })
}

/// Calls `visit` with a basis of every `dim`-dimensional subspace of
/// `F_2^m` exactly once (reduced echelon bases, pivots at the lowest
/// index of each row); stops early when `visit` returns `false`.
pub fn for_each_subspace(m: usize, dim: usize, mut visit: impl FnMut(&[u64]) -> bool) {
    assert!(m <= 63 && dim <= m);
    for pivots in (0..m).combinations(dim) {
        let frees: Vec<Vec<usize>> = pivots
            .iter()
            .map(|&p| (p + 1..m).filter(|c| !pivots.contains(c)).collect())
            .collect();
        let total: usize = frees.iter().map(Vec::len).sum();
        let mut rows = vec![0u64; dim];
        for assignment in 0u64..1 << total {
            let mut bit = 0;
            for (i, &p) in pivots.iter().enumerate() {
                let mut row = 1u64 << p;
                for &c in &frees[i] {
                    if assignment >> bit & 1 == 1 {
                        row |= 1 << c;
                    }
                    bit += 1;
                }
                rows[i] = row;
            }
            if !visit(&rows) {
                return;
            }
        }
    }
}

/// Number of `dim`-dimensional subspaces of `F_2^m`.
pub fn gaussian_binomial(m: usize, dim: usize) -> BigUint {
    let mut num = BigUint::from(1u8);
    let mut den = BigUint::from(1u8);
    for i in 0..dim {
        num *= (BigUint::from(1u8) << (m - i)) - 1u8;
        den *= (BigUint::from(1u8) << (i + 1)) - 1u8;
    }
    num / den
}

/// Every `ℓ`-dimensional subspace `V` of the ambient space is checked for
/// `|S ∩ V| < threshold`.
pub fn subspace_evasive_exhaustive(
    points: &[BitVector],
    ell: usize,
    threshold: usize,
) -> Result<EvasiveAudit> {
    let m = common_len(&[points])?;
    if m > 10 || ell > 3 || ell > m {
        return Err(Error::budget(
            "exhaustive subspace enumeration",
            (m.max(ell)) as u128,
            10,
        ));
    }
    let mut member = vec![false; 1 << m];
    for p in points {
        member[p.to_u64() as usize] = true;
    }
    let mut checked = 0u64;
    let mut witness = None;
    for_each_subspace(m, ell, |rows| {
        checked += 1;
        let basis: Vec<BitVector> = rows.iter().map(|&r| BitVector::from_u64(m, r)).collect();
        let inside: Vec<BitVector> = span_masks(&basis)
            .into_iter()
            .filter(|&v| member[v as usize])
            .map(|v| BitVector::from_u64(m, v))
            .collect();
        if inside.len() >= threshold {
            witness = Some(AttackWitness {
                a: basis,
                b: inside,
                value: None,
                verified: true,
                seed: None,
                params: BTreeMap::from([
                    ("ell".to_string(), ell.into()),
                    ("threshold".to_string(), threshold.into()),
                ]),
            });
            return false;
        }
        true
    });
    let flagged = witness.is_some() as u64;
    Ok(EvasiveAudit {
        verdict: Verdict::from_bool(witness.is_none()),
        exhaustive: true,
        checked,
        flagged,
        flag_rate: flagged as f64 / checked.max(1) as f64,
        witness,
    })
}

/// Draws `trials` sets `A` of `set_size` distinct domain points and flags
/// those with `dim span(h(A)) <= ℓ`.
pub fn subspace_evasive_randomized(
    h: &dyn Fn(&BitVector) -> Result<BitVector>,
    domain: usize,
    ell: usize,
    set_size: usize,
    trials: u64,
    rng: &mut Stream,
) -> Result<EvasiveAudit> {
    if domain < 64 && set_size as u64 > 1u64 << domain {
        return Err(Error::InvalidParameter(format!(
            "cannot draw {set_size} distinct points of F_2^{domain}"
        )));
    }
    let mut flagged = 0;
    let mut witness = None;
    for _ in 0..trials {
        let mut a = HashSet::new();
        while a.len() < set_size {
            a.insert(BitVector::random(domain, rng));
        }
        let a: Vec<BitVector> = a.into_iter().sorted().collect();
        let images: Vec<BitVector> = a.iter().map(h).collect::<Result<_>>()?;
        let width = images.first().map_or(0, BitVector::len);
        if span_dim(width, &images) <= ell {
            flagged += 1;
            witness.get_or_insert_with(|| AttackWitness {
                a,
                b: images,
                value: None,
                verified: true,
                seed: None,
                params: BTreeMap::from([("ell".to_string(), ell.into())]),
            });
        }
    }
    Ok(EvasiveAudit {
        verdict: Verdict::from_bool(flagged == 0),
        exhaustive: false,
        checked: trials,
        flagged,
        flag_rate: if trials == 0 {
            0.0
        } else {
            flagged as f64 / trials as f64
        },
        witness,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dichotomy {
    pub dim_a: usize,
    pub dim_b: usize,
    /// `{<a, b> : a ∈ A, b ∈ B}`, ascending.
    pub values: Vec<bool>,
}

pub fn dichotomy_check(a: &[BitVector], b: &[BitVector]) -> Result<Dichotomy> {
    let n = common_len(&[a, b])?;
    check_budget(
        "inner products",
        a.len() as u128 * b.len() as u128,
        PAIR_LIMIT,
    )?;
    let values: BTreeSet<bool> = a
        .iter()
        .cartesian_product(b)
        .map(|(x, y)| x.dot(y))
        .collect();
    Ok(Dichotomy {
        dim_a: span_dim(n, a),
        dim_b: span_dim(n, b),
        values: values.into_iter().collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::anf::sample_poly;
    use crate::constructions::build_evasive_h;
    use crate::gf2::sample_uniform_matrix;
    use crate::rng::stream;

    fn vecs(n: usize, xs: &[u64]) -> Vec<BitVector> {
        xs.iter().map(|&x| BitVector::from_u64(n, x)).collect()
    }

    fn quadruples(x: &[BitVector], y: &[BitVector]) -> u64 {
        let mut c = 0;
        for x1 in x {
            for x2 in x {
                for y1 in y {
                    for y2 in y {
                        if x1.xor(y1) == x2.xor(y2) {
                            c += 1;
                        }
                    }
                }
            }
        }
        c
    }

    fn random_set(n: usize, size: usize, rng: &mut Stream) -> Vec<BitVector> {
        let mut s = HashSet::new();
        while s.len() < size {
            s.insert(BitVector::random(n, rng));
        }
        s.into_iter().sorted().collect()
    }

    #[test]
    fn energy_examples() {
        assert_eq!(
            additive_energy(&vecs(3, &[0]), &vecs(3, &[0])).unwrap(),
            1u8.into()
        );
        assert_eq!(
            additive_energy(&vecs(1, &[0, 1]), &vecs(1, &[0, 1])).unwrap(),
            8u8.into()
        );
        for k in 0..=3usize {
            let basis = random_independent(6, k, &mut stream(k as u64)).unwrap();
            let v = span_elements(6, &basis);
            let e = additive_energy(&v, &v).unwrap();
            assert_eq!(e, BigUint::from(1u64 << (3 * k)));
            assert_eq!(e, quadruples(&v, &v).into());
        }
    }

    #[test]
    fn energy_bounds_and_symmetry() {
        let mut rng = stream(3);
        for _ in 0..40 {
            let n = rng.gen_range(2..=6);
            let x = random_set(n, rng.gen_range(1..=8.min(1 << n)), &mut rng);
            let y = random_set(n, rng.gen_range(1..=8.min(1 << n)), &mut rng);
            let e = additive_energy(&x, &y).unwrap();
            assert_eq!(e, quadruples(&x, &y).into());
            assert_eq!(e, additive_energy(&y, &x).unwrap());
            let c = BitVector::random(n, &mut rng);
            let shifted: Vec<BitVector> = x.iter().map(|v| v.xor(&c)).collect();
            assert_eq!(e, additive_energy(&shifted, &y).unwrap());
            let pairs = (x.len() * y.len()) as u64;
            let distinct_sums = sum_counts(&x, &y).len() as u64;
            assert!(e >= pairs.into());
            assert_eq!(e == pairs.into(), distinct_sums == pairs);
        }
    }

    #[test]
    fn singleton_partition() {
        let mut rng = stream(1);
        let x = random_set(6, 8, &mut rng);
        let y = random_set(6, 8, &mut rng);
        let p = energy_partition(&x, &y, 3, 1, &mut rng, 1).unwrap();
        assert_eq!(p.retries_used, 1);
        for (a, b) in p.x_parts.iter().cartesian_product(&p.y_parts) {
            assert_eq!(additive_energy(a, b).unwrap(), 1u8.into());
        }
    }

    #[test]
    fn partition_is_exact_and_capped() {
        let mut rng = stream(2);
        let x = random_set(10, 256, &mut rng);
        let y = random_set(10, 256, &mut rng);
        let p = energy_partition(&x, &y, 7, 5, &mut rng, 100).unwrap();
        let mut xs: Vec<BitVector> = p.x_parts.concat();
        xs.sort();
        assert_eq!(xs, x);
        assert!(p
            .x_parts
            .iter()
            .chain(&p.y_parts)
            .all(|part| part.len() == 2));
        for (a, b) in p.x_parts.iter().cartesian_product(&p.y_parts) {
            assert!(additive_energy(a, b).unwrap() <= p.energy_cap());
        }
        assert_eq!(p.energy_cap(), 100u8.into());
    }

    #[test]
    fn tight_partition_retries() {
        let mut rng = stream(4);
        let basis = random_independent(8, 4, &mut rng).unwrap();
        let v = span_elements(8, &basis);
        assert!(matches!(
            energy_partition(&v, &v, 2, 1, &mut rng, 5),
            Err(Error::RetriesExhausted { .. })
        ));
    }

    #[test]
    fn cw_examples() {
        let order = MonomialOrder::shared(3, 1).unwrap();
        let zero = Polynomial::zero(&order);
        let r = cw_shift_count(&zero, &vecs(3, &[2])).unwrap();
        assert_eq!(r.count, 8);
        let x1 = Polynomial::from_monomials(&order, &[vec![0]]).unwrap();
        let r = cw_shift_count(&x1, &vecs(3, &[2])).unwrap();
        assert_eq!(
            (r.count, r.bound_exponent, r.verdict),
            (4, 2, Verdict::Pass)
        );
        assert!(matches!(
            cw_shift_count(&x1, &vecs(3, &[1])),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn cw_random_trials() {
        let mut rng = stream(8);
        for trial in 0..200 {
            let n = rng.gen_range(4..=12);
            let d = rng.gen_range(1..=3);
            let t = rng.gen_range(1..=4.min(n));
            let (n, d, t) = if trial < 50 { (8, 2, 2) } else { (n, d, t) };
            let basis = random_independent(n, t, &mut rng).unwrap();
            let f = sample_vanishing_poly(n, d, &basis, &mut rng).unwrap();
            for v in span_elements(n, &basis) {
                assert!(!f.evaluate(&v).unwrap());
            }
            assert!(
                cw_shift_count(&f, &basis).unwrap().verdict.passed(),
                "trial {trial}"
            );
        }
    }

    #[test]
    fn attack_on_inner_product() {
        let n = 6;
        let order = MonomialOrder::shared(n, 1).unwrap();
        let family: Vec<Polynomial> = (0..1u64 << n)
            .map(|y| {
                let monos: Vec<Vec<usize>> = (0..n)
                    .filter(|i| y >> i & 1 == 1)
                    .map(|i| vec![i])
                    .collect();
                Polynomial::from_monomials(&order, &monos).unwrap()
            })
            .collect();
        let (_, tables) = family_tables(&family).unwrap();
        for t in 1..=3 {
            let w = disperser_attack(&tables, n, t, 1, &mut stream(t as u64)).unwrap();
            assert!(w.verified);
            assert_eq!(w.value, Some(false));
            assert_eq!(w.b.len(), 1 << (n - t));
            for y in &w.b {
                assert!(w.a.iter().all(|x| !x.dot(y)));
            }
        }
        let zero = vec![BitVector::zeros(1 << n); 1 << n];
        let w = disperser_attack(&zero, n, 2, 1, &mut stream(0)).unwrap();
        assert_eq!(w.b.len(), 1 << n);
    }

    #[test]
    fn attack_witnesses_verify_after_round_trip() {
        let n = 8;
        let mut rng = stream(12);
        let family: Vec<Polynomial> = (0..1 << n)
            .map(|_| sample_poly(n, 2, &mut rng).unwrap())
            .collect();
        let (_, tables) = family_tables(&family).unwrap();
        let w = disperser_attack(&tables, n, 2, 200, &mut rng).unwrap();
        let back = AttackWitness::from_json(&w.to_json()).unwrap();
        assert_eq!(back, w);
        assert_eq!(back.verified, verify_disperser_witness(&tables, &back));
        assert!(back.verified);
        let mut broken = back.clone();
        broken.value = broken.value.map(|b| !b);
        assert!(!verify_disperser_witness(&tables, &broken));
    }

    #[test]
    fn two_block_family() {
        let order = MonomialOrder::shared(4, 2).unwrap();
        let f = Polynomial::from_monomials(&order, &[vec![0, 2], vec![1, 3], vec![3]]).unwrap();
        let fam = family_of_two_block(&f).unwrap();
        for y in 0..4u64 {
            for x in 0..4u64 {
                assert_eq!(fam[y as usize].evaluate_u64(x), f.evaluate_u64(x | y << 2));
            }
        }
    }

    #[test]
    fn sumset_search_examples() {
        let order = MonomialOrder::shared(6, 1).unwrap();
        let one = Polynomial::constant(&order, true);
        let w = monochromatic_sumset_search(&one, 4, 100, &mut stream(1))
            .unwrap()
            .unwrap();
        assert!(w.verified && w.a.len() == 4);
        let lin = Polynomial::from_monomials(&order, &[vec![0], vec![3]]).unwrap();
        let w = monochromatic_sumset_search(&lin, 4, 10_000, &mut stream(2))
            .unwrap()
            .unwrap();
        assert!(verify_sumset_witness(&lin, &w));
        let back = AttackWitness::from_json(&w.to_json()).unwrap();
        assert!(verify_sumset_witness(&lin, &back));
    }

    #[test]
    fn random_cubic_resists_small_search() {
        let f = sample_poly(10, 3, &mut stream(6)).unwrap();
        assert!(monochromatic_sumset_search(&f, 16, 100_000, &mut stream(7))
            .unwrap()
            .is_none());
    }

    #[test]
    fn sumset_audit_examples() {
        let a = sumset_evasive_audit(&FullSpace(6), 2, 100, &mut stream(0)).unwrap();
        assert_eq!(a.verdict, Verdict::Fail);
        let w = a.witness.unwrap();
        assert!(w.verified && w.a.len() == 4);
        let mut rng = stream(9);
        for r in [8, 12] {
            let m = sample_uniform_matrix(r / 2, r / 2, &mut rng);
            let g = LinearGraph(m);
            let a = sumset_evasive_audit(&g, 3, 100_000, &mut rng).unwrap();
            assert!(a
                .witness
                .as_ref()
                .is_some_and(|w| w.verified && verify_containment_witness(&g, w)));
        }
        let h = build_evasive_h(10, 2, 10, 3).unwrap();
        let graph = Graph(&h);
        let a = sumset_evasive_audit(&graph, 3, 100_000, &mut stream(4)).unwrap();
        assert!(a.witness.is_none());
        let explicit = ExplicitSet::new(h.image_set().unwrap()).unwrap();
        assert!(explicit.contains(&graph.sample(&mut rng)));
    }

    #[test]
    fn subspace_enumeration_counts() {
        for m in 0..=6 {
            for dim in 0..=m.min(3) {
                let mut seen = HashSet::new();
                let mut count = 0u64;
                for_each_subspace(m, dim, |rows| {
                    count += 1;
                    let basis: Vec<BitVector> =
                        rows.iter().map(|&r| BitVector::from_u64(m, r)).collect();
                    assert_eq!(span_dim(m, &basis), dim);
                    let mut span = span_masks(&basis);
                    span.sort();
                    assert!(seen.insert(span));
                    true
                });
                assert_eq!(BigUint::from(count), gaussian_binomial(m, dim));
            }
        }
        assert_eq!(gaussian_binomial(10, 3), 6_347_715u32.into());
    }

    #[test]
    fn subspace_audit_examples() {
        let basis = random_independent(6, 2, &mut stream(1)).unwrap();
        let s = span_elements(6, &basis);
        let a = subspace_evasive_exhaustive(&s, 2, 4).unwrap();
        assert_eq!(a.verdict, Verdict::Fail);
        for m in 2..=8 {
            let units: Vec<BitVector> = (0..m).map(|i| BitVector::unit(m, i)).collect();
            let a = subspace_evasive_exhaustive(&units, 1, 2).unwrap();
            assert!(a.verdict.passed());
            assert_eq!(a.checked, (1 << m) - 1);
        }
        let id = |x: &BitVector| Ok(x.clone());
        let r = subspace_evasive_randomized(&id, 4, 2, 3, 200, &mut stream(2)).unwrap();
        let mut rng = stream(2);
        let mut expect = 0;
        for _ in 0..200 {
            let mut a = HashSet::new();
            while a.len() < 3 {
                a.insert(BitVector::random(4, &mut rng));
            }
            let a: Vec<BitVector> = a.into_iter().collect();
            if span_dim(4, &a) <= 2 {
                expect += 1;
            }
        }
        assert_eq!(r.flagged, expect);
    }

    #[test]
    fn dichotomy_examples() {
        let a = vecs(4, &[0b0011, 0b0001]);
        let perp = vecs(4, &[0b0100, 0b1000, 0b1100]);
        assert_eq!(dichotomy_check(&a, &perp).unwrap().values, vec![false]);
        let all = vecs(3, &(0..8).collect::<Vec<_>>());
        let d = dichotomy_check(&all, &all).unwrap();
        assert_eq!((d.dim_a, d.values.clone()), (3, vec![false, true]));
        let mut rng = stream(5);
        let mut checked = 0;
        while checked < 500 {
            let n = rng.gen_range(1..=6);
            let a = random_set(n, rng.gen_range(1..=1 << n), &mut rng);
            let b = random_set(n, rng.gen_range(1..=1 << n), &mut rng);
            let d = dichotomy_check(&a, &b).unwrap();
            if d.dim_a + d.dim_b > n + 1 {
                assert_eq!(d.values, vec![false, true]);
                checked += 1;
            }
        }
    }
}
