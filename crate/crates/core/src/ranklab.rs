//! Eval-rank of sets and sumsets, high-rank subsets via random linear
//! maps, full-rank certification, and the coupled sumset sampler.

use std::collections::{HashMap, HashSet};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::anf::{eval_vector, MonomialOrder};
use crate::error::{check_budget, Error, Result};
use crate::gf2::{
    binom_sum_usize, hamming_ball, sample_invertible, sample_uniform_matrix, weight_slice,
    BitMatrix, BitVector, EchelonBasis,
};
use crate::rng::Stream;
use crate::sources::Source;

/// Cap on `|S| · C(n, <=d)` bits processed by [`eval_rank`].
pub const RANK_WORK_LIMIT: u128 = 1 << 32;

/// Cap on `|A| · |B|` for sumset enumeration.
pub const SUMSET_LIMIT: u128 = 1 << 24;

/// Rank of `eval_d(S)` with a witness subset whose eval-vectors are
/// independent.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankCertificate {
    pub n: usize,
    pub d: usize,
    pub rank: usize,
    pub witness: Vec<BitVector>,
}

impl RankCertificate {
    /// Recomputes the witness eval-vectors and checks their independence.
    pub fn verify(&self) -> Result<bool> {
        if self.witness.len() != self.rank {
            return Ok(false);
        }
        let order = MonomialOrder::new(self.n, self.d)?;
        let mut basis = EchelonBasis::new(order.len());
        for x in &self.witness {
            if !basis.insert(&eval_vector(x, &order)?) {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

fn common_len(sets: &[&[BitVector]]) -> Result<usize> {
    let n = sets
        .iter()
        .flat_map(|s| s.first())
        .map(BitVector::len)
        .next()
        .ok_or_else(|| Error::InvalidParameter("empty point set".into()))?;
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

/// `rank(eval_d(S))`. The witness lists the first points (in input order)
/// that raise the rank.
pub fn eval_rank(set: &[BitVector], d: usize) -> Result<RankCertificate> {
    let n = common_len(&[set])?;
    let order = MonomialOrder::new(n, d)?;
    check_budget(
        "eval-rank matrix",
        set.len() as u128 * order.len() as u128,
        RANK_WORK_LIMIT,
    )?;
    let mut basis = EchelonBasis::new(order.len());
    let mut witness = Vec::new();
    for x in set {
        if basis.insert(&eval_vector(x, &order)?) {
            witness.push(x.clone());
            if witness.len() == order.len() {
                break;
            }
        }
    }
    Ok(RankCertificate {
        n,
        d,
        rank: witness.len(),
        witness,
    })
}

/// The set-sum `A + B` with collision data.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sumset {
    /// Distinct sums in canonical order.
    pub elements: Vec<BitVector>,
    pub pairs: u64,
    pub distinct: u64,
    /// True when some sum arises from two different pairs.
    pub collisions: bool,
}

pub fn sumset_of(a: &[BitVector], b: &[BitVector]) -> Result<Sumset> {
    common_len(&[a, b])?;
    let pairs = a.len() as u128 * b.len() as u128;
    check_budget("sumset pairs", pairs, SUMSET_LIMIT)?;
    let mut seen = HashSet::with_capacity(pairs as usize);
    for x in a {
        for y in b {
            seen.insert(x.xor(y));
        }
    }
    let mut elements: Vec<BitVector> = seen.into_iter().collect();
    elements.sort();
    let distinct = elements.len() as u64;
    Ok(Sumset {
        elements,
        pairs: pairs as u64,
        distinct,
        collisions: (distinct as u128) < pairs,
    })
}

/// Whether `A + B` has full eval_d-rank: all `|A|·|B|` sums distinct and
/// their eval-vectors independent.
pub fn full_rank_check(
    a: &[BitVector],
    b: &[BitVector],
    d: usize,
) -> Result<(bool, RankCertificate)> {
    let s = sumset_of(a, b)?;
    let cert = eval_rank(&s.elements, d)?;
    Ok((!s.collisions && cert.rank as u64 == s.pairs, cert))
}

/// When a sampled map is accepted by [`find_high_rank_subsets`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MapAcceptance {
    /// `L(A) = L(B) = F_2^m`.
    Surjective,
    /// `L(A)` and `L(B)` both contain the Hamming ball of radius `d/2`,
    /// the only preimages the selection uses.
    BallCover,
}

/// Output of [`find_high_rank_subsets`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HighRankSubsets {
    pub a_prime: Vec<BitVector>,
    pub b_prime: Vec<BitVector>,
    pub map: BitMatrix,
    /// Maps drawn, including the accepted one.
    pub attempts: u64,
    pub certificate: RankCertificate,
}

fn images_contain(images: &HashMap<u64, &BitVector>, targets: &[BitVector]) -> bool {
    targets.iter().all(|t| images.contains_key(&t.to_u64()))
}

/// `L x` for every point, keeping the canonically smallest preimage of each
/// image value. Requires `m <= 64`.
fn canonical_preimages<'a>(
    l: &BitMatrix,
    set: &'a [BitVector],
) -> Result<HashMap<u64, &'a BitVector>> {
    let mut best: HashMap<u64, &BitVector> = HashMap::new();
    for x in set {
        let y = l.mul_vec(x)?.to_u64();
        best.entry(y)
            .and_modify(|cur| {
                if x < *cur {
                    *cur = x;
                }
            })
            .or_insert(x);
    }
    Ok(best)
}

/// Draws uniform `m × n` maps until one is accepted, then picks one
/// preimage in `A` and in `B` of each point of the radius-`d/2` ball. The
/// certificate's rank is checked against `C(m, <=d)` before returning.
pub fn find_high_rank_subsets(
    a: &[BitVector],
    b: &[BitVector],
    d: usize,
    m: usize,
    trials: u64,
    acceptance: MapAcceptance,
    rng: &mut Stream,
) -> Result<HighRankSubsets> {
    let n = check_high_rank_pre(a, b, d, m)?;
    let ball = hamming_ball(m, d / 2);
    for attempt in 1..=trials {
        let l = sample_uniform_matrix(m, n, rng);
        let (pa, pb) = (canonical_preimages(&l, a)?, canonical_preimages(&l, b)?);
        let accepted = match acceptance {
            MapAcceptance::Surjective => pa.len() == 1 << m && pb.len() == 1 << m,
            MapAcceptance::BallCover => images_contain(&pa, &ball) && images_contain(&pb, &ball),
        };
        if accepted {
            let mut out = select_and_certify(&pa, &pb, &ball, d, m, l)?;
            out.attempts = attempt;
            return Ok(out);
        }
    }
    Err(Error::RetriesExhausted {
        what: "linear map covering both sets",
        attempts: trials,
    })
}

/// [`find_high_rank_subsets`] with a caller-supplied map.
pub fn find_high_rank_subsets_with_map(
    a: &[BitVector],
    b: &[BitVector],
    d: usize,
    l: &BitMatrix,
) -> Result<HighRankSubsets> {
    let m = l.rows();
    let n = check_high_rank_pre(a, b, d, m)?;
    if l.cols() != n {
        return Err(Error::DimensionMismatch(format!(
            "map has {} columns, points have length {n}",
            l.cols()
        )));
    }
    let ball = hamming_ball(m, d / 2);
    let (pa, pb) = (canonical_preimages(l, a)?, canonical_preimages(l, b)?);
    if !images_contain(&pa, &ball) || !images_contain(&pb, &ball) {
        return Err(Error::Precondition(
            "map images do not cover the Hamming ball".into(),
        ));
    }
    let mut out = select_and_certify(&pa, &pb, &ball, d, m, l.clone())?;
    out.attempts = 1;
    Ok(out)
}

fn check_high_rank_pre(a: &[BitVector], b: &[BitVector], d: usize, m: usize) -> Result<usize> {
    let n = common_len(&[a, b])?;
    if !d.is_multiple_of(2) {
        return Err(Error::InvalidParameter(format!("degree {d} must be even")));
    }
    if m > n || m > 64 {
        return Err(Error::InvalidParameter(format!(
            "target dimension {m} exceeds min(n, 64) with n = {n}"
        )));
    }
    let need = binom_sum_usize(m, d / 2).unwrap_or(usize::MAX);
    if a.len() < need || b.len() < need {
        return Err(Error::InvalidParameter(format!(
            "sets of sizes {} and {} are smaller than the ball size {need}",
            a.len(),
            b.len()
        )));
    }
    Ok(n)
}

fn select_and_certify(
    pa: &HashMap<u64, &BitVector>,
    pb: &HashMap<u64, &BitVector>,
    ball: &[BitVector],
    d: usize,
    m: usize,
    l: BitMatrix,
) -> Result<HighRankSubsets> {
    let pick = |p: &HashMap<u64, &BitVector>| -> Vec<BitVector> {
        ball.iter().map(|t| p[&t.to_u64()].clone()).collect()
    };
    let (a_prime, b_prime) = (pick(pa), pick(pb));
    let sums = sumset_of(&a_prime, &b_prime)?;
    let certificate = eval_rank(&sums.elements, d)?;
    let target = binom_sum_usize(m, d).unwrap_or(usize::MAX);
    if certificate.rank < target {
        return Err(Error::Precondition(format!(
            "certified rank {} is below C({m}, <={d}) = {target}",
            certificate.rank
        )));
    }
    Ok(HighRankSubsets {
        a_prime,
        b_prime,
        map: l,
        attempts: 0,
        certificate,
    })
}

fn flat_support(s: &Source) -> Result<&[BitVector]> {
    match s {
        Source::Flat { support, .. } => Ok(support),
        _ => Err(Error::InvalidParameter("expected a flat source".into())),
    }
}

/// A uniform point of `{x ∈ supp(s) : E x = z}`.
pub fn conditional_preimage_sample(
    s: &Source,
    e: &BitMatrix,
    z: &BitVector,
    rng: &mut Stream,
) -> Result<BitVector> {
    let support = flat_support(s)?;
    if z.len() != e.rows() {
        return Err(Error::LengthMismatch {
            expected: e.rows(),
            found: z.len(),
        });
    }
    let mut fiber = Vec::new();
    for x in support {
        if &e.mul_vec(x)? == z {
            fiber.push(x);
        }
    }
    if fiber.is_empty() {
        return Err(Error::EmptyFiber);
    }
    Ok(fiber[rng.gen_range(0..fiber.len())].clone())
}

/// One draw of the coupled sampler.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpecialSumsetDraw {
    pub e: BitMatrix,
    pub l: BitMatrix,
    pub b0: Vec<BitVector>,
    pub b1: Vec<BitVector>,
    pub x_star: Vec<BitVector>,
    pub y_star: Vec<BitVector>,
    pub full_rank: bool,
    /// Maps `E` drawn before one was surjective on both supports.
    pub map_attempts: u64,
}

/// Draws `E` uniform among `m × n` maps surjective on both supports, an
/// invertible `L`, and one preimage in `X` of each `L u` (`u ∈ B0`) and in
/// `Y` of each `L v` (`v ∈ B1`). `B0` and `B1` are the weight-`⌊d/2⌋`
/// vectors on the first and on the last `⌊m/3⌋` coordinates.
pub fn special_sumset_sampler(
    x: &Source,
    y: &Source,
    d: usize,
    m: usize,
    trials: u64,
    rng: &mut Stream,
) -> Result<SpecialSumsetDraw> {
    let (xs, ys) = (flat_support(x)?, flat_support(y)?);
    let n = common_len(&[xs, ys])?;
    if d == 0 {
        return Err(Error::InvalidParameter("degree must be at least 1".into()));
    }
    let third = m / 3;
    if third == 0 || m > n || m > 64 {
        return Err(Error::InvalidParameter(format!(
            "need 3 <= m <= min(n, 64), got m = {m}, n = {n}"
        )));
    }
    let half = d / 2;
    let b0 = weight_slice(m, half, 1, third)?;
    let b1 = weight_slice(m, half, m - third + 1, m)?;

    let surjective = |e: &BitMatrix, pts: &[BitVector]| -> Result<Vec<u64>> {
        let images: Vec<u64> = pts
            .iter()
            .map(|p| e.mul_vec(p).map(|v| v.to_u64()))
            .collect::<Result<_>>()?;
        Ok(images)
    };
    let full = 1usize << m;
    let mut found = None;
    for attempt in 1..=trials {
        let e = sample_uniform_matrix(m, n, rng);
        let (ix, iy) = (surjective(&e, xs)?, surjective(&e, ys)?);
        let distinct = |v: &[u64]| v.iter().collect::<HashSet<_>>().len();
        if distinct(&ix) == full && distinct(&iy) == full {
            found = Some((attempt, e, ix, iy));
            break;
        }
    }
    let (map_attempts, e, ix, iy) = found.ok_or(Error::RetriesExhausted {
        what: "map surjective on both supports",
        attempts: trials,
    })?;

    let fiber_pick =
        |images: &[u64], pts: &[BitVector], z: u64, rng: &mut Stream| -> Option<BitVector> {
            let fiber: Vec<usize> = (0..pts.len()).filter(|&i| images[i] == z).collect();
            (!fiber.is_empty()).then(|| pts[fiber[rng.gen_range(0..fiber.len())]].clone())
        };
    for _ in 0..trials {
        let l = sample_invertible(m, rng)?;
        let pick = |set: &[BitVector],
                    images: &[u64],
                    pts: &[BitVector],
                    rng: &mut Stream|
         -> Result<Option<Vec<BitVector>>> {
            let mut out = Vec::with_capacity(set.len());
            for u in set {
                let z = l.mul_vec(u)?.to_u64();
                match fiber_pick(images, pts, z, rng) {
                    Some(p) => out.push(p),
                    None => return Ok(None),
                }
            }
            Ok(Some(out))
        };
        let Some(x_star) = pick(&b0, &ix, xs, rng)? else {
            continue;
        };
        let Some(y_star) = pick(&b1, &iy, ys, rng)? else {
            continue;
        };
        let (full_rank, _) = full_rank_check(&x_star, &y_star, d)?;
        if !full_rank {
            return Err(Error::Precondition(
                "coupled draw failed the full-rank check".into(),
            ));
        }
        return Ok(SpecialSumsetDraw {
            e,
            l,
            b0,
            b1,
            x_star,
            y_star,
            full_rank,
            map_attempts,
        });
    }
    Err(Error::RetriesExhausted {
        what: "invertible map with nonempty fibers",
        attempts: trials,
    })
}
