//! Linear binary codes: balancedness, exhaustive list sizes, the Johnson
//! radius check, and the code-to-extractor entropy parameter.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bias::chernoff_halfwidth;
use crate::error::{check_budget, Error, Result};
use crate::exact::ExactRational;
use crate::gf2::{BitMatrix, BitVector};
use crate::rng::Stream;

/// Largest message dimension enumerated exhaustively.
pub const MAX_EXHAUSTIVE_DIM: usize = 24;

/// Work cap (centers × codewords) for [`list_size_exhaustive`].
pub const LIST_WORK_LIMIT: u128 = 1 << 32;

/// The code spanned by the rows of a `dim × T` generator matrix.
///
/// Statistics are over the set of distinct codewords, so a generator with
/// dependent rows describes the same code as a basis of its row space.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CodeView {
    generator: BitMatrix,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CodeFile {
    dim: usize,
    length: usize,
    generator: Vec<BitVector>,
}

impl CodeView {
    pub fn new(generator: BitMatrix) -> Result<Self> {
        if generator.cols() == 0 {
            return Err(Error::InvalidParameter(
                "block length must be at least 1".into(),
            ));
        }
        Ok(Self { generator })
    }

    /// Code whose codewords are `G m` for a `T × dim` matrix `G`.
    pub fn from_column_generator(g: &BitMatrix) -> Result<Self> {
        Self::new(g.transpose())
    }

    pub fn generator(&self) -> &BitMatrix {
        &self.generator
    }

    pub fn dim(&self) -> usize {
        self.generator.rows()
    }

    pub fn length(&self) -> usize {
        self.generator.cols()
    }

    /// A basis of the row space.
    pub fn basis(&self) -> Vec<BitVector> {
        let (r, pivots) = self.generator.rref();
        (0..pivots.len()).map(|i| r.row(i)).collect()
    }

    pub fn encode(&self, message: &BitVector) -> Result<BitVector> {
        self.generator.transpose().mul_vec(message)
    }

    /// Every distinct codeword, zero first, in Gray-code order of the basis.
    pub fn codewords(&self) -> Result<Vec<BitVector>> {
        let basis = self.basis();
        check_budget(
            "code dimension",
            basis.len() as u128,
            MAX_EXHAUSTIVE_DIM as u128,
        )?;
        Ok(crate::gf2::span_elements(self.length(), &basis))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&CodeFile {
            dim: self.dim(),
            length: self.length(),
            generator: self.generator.row_vectors(),
        })
        .expect("code file serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let file: CodeFile =
            serde_json::from_str(s).map_err(|e| Error::parse("code file", e.to_string()))?;
        if file.generator.len() != file.dim {
            return Err(Error::parse(
                "code file",
                format!("dim {} but {} rows", file.dim, file.generator.len()),
            ));
        }
        if let Some(row) = file.generator.iter().find(|r| r.len() != file.length) {
            return Err(Error::parse(
                "code file",
                format!(
                    "row of length {} in a length-{} code",
                    row.len(),
                    file.length
                ),
            ));
        }
        Self::new(BitMatrix::from_rows(file.length, &file.generator)?)
    }
}

/// `|T - 2 wt| <= ε T`, i.e. `(1-ε)/2 T <= wt <= (1+ε)/2 T`.
pub fn is_balanced(weight: usize, length: usize, eps: &BigRational) -> bool {
    let gap = BigInt::from((length as i64 - 2 * weight as i64).abs());
    BigRational::from_integer(gap) <= eps * BigRational::from_integer(BigInt::from(length))
}

/// `|T - 2 wt| / T` for every nonzero codeword, maximized; zero for the
/// trivial code.
pub fn measured_epsilon(c: &CodeView) -> Result<BigRational> {
    let t = c.length() as i64;
    let worst = c
        .codewords()?
        .iter()
        .skip(1)
        .map(|w| (t - 2 * w.weight() as i64).abs())
        .max()
        .unwrap_or(0);
    Ok(BigRational::new(worst.into(), t.into()))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Enumeration {
    Exhaustive,
    Sampled { samples: u64, delta_fail: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BalancednessReport {
    /// Fraction of nonzero codewords outside the weight window.
    pub fraction: f64,
    /// Present in exhaustive mode.
    pub exact: Option<ExactRational>,
    /// Nonzero codewords examined (distinct in exhaustive mode, drawn in
    /// sampled mode).
    pub nonzero: u64,
    pub unbalanced: u64,
    /// Present in sampled mode.
    pub halfwidth: Option<f64>,
    /// The examined nonzero codeword farthest from weight `T/2`.
    pub worst_codeword: Option<BitVector>,
}

/// Fraction of nonzero codewords that are not `ε`-balanced; the zero
/// codeword is left out of both numerator and denominator.
pub fn balancedness_report(
    c: &CodeView,
    eps: &BigRational,
    mode: Enumeration,
    rng: &mut Stream,
) -> Result<BalancednessReport> {
    let t = c.length();
    let mut tally = Tally::default();
    match mode {
        Enumeration::Exhaustive => {
            for w in c.codewords()?.iter().skip(1) {
                tally.add(w, t, eps);
            }
            let exact = if tally.nonzero == 0 {
                BigRational::zero()
            } else {
                BigRational::new(tally.unbalanced.into(), tally.nonzero.into())
            };
            Ok(BalancednessReport {
                fraction: crate::exact::to_f64(&exact),
                exact: Some(ExactRational(exact)),
                nonzero: tally.nonzero,
                unbalanced: tally.unbalanced,
                halfwidth: None,
                worst_codeword: tally.worst.map(|(_, w)| w),
            })
        }
        Enumeration::Sampled {
            samples,
            delta_fail,
        } => {
            if samples == 0 || !(delta_fail > 0.0 && delta_fail < 1.0) {
                return Err(Error::InvalidParameter(
                    "sampled mode needs samples >= 1 and 0 < delta_fail < 1".into(),
                ));
            }
            let gt = c.generator.transpose();
            for _ in 0..samples {
                let w = gt.mul_vec(&BitVector::random(c.dim(), rng))?;
                if !w.is_zero() {
                    tally.add(&w, t, eps);
                }
            }
            let fraction = if tally.nonzero == 0 {
                0.0
            } else {
                tally.unbalanced as f64 / tally.nonzero as f64
            };
            Ok(BalancednessReport {
                fraction,
                exact: None,
                nonzero: tally.nonzero,
                unbalanced: tally.unbalanced,
                halfwidth: Some(if tally.nonzero == 0 {
                    1.0
                } else {
                    chernoff_halfwidth(tally.nonzero, delta_fail)
                }),
                worst_codeword: tally.worst.map(|(_, w)| w),
            })
        }
    }
}

#[derive(Default)]
struct Tally {
    nonzero: u64,
    unbalanced: u64,
    worst: Option<(usize, BitVector)>,
}

impl Tally {
    fn add(&mut self, w: &BitVector, t: usize, eps: &BigRational) {
        let wt = w.weight();
        self.nonzero += 1;
        if !is_balanced(wt, t, eps) {
            self.unbalanced += 1;
        }
        let gap = t.abs_diff(2 * wt);
        if self.worst.as_ref().is_none_or(|(g, _)| gap > *g) {
            self.worst = Some((gap, w.clone()));
        }
    }
}

/// Largest number of codewords within Hamming distance `max_distance` of a
/// single center, over all `2^T` centers, with the smallest center (as an
/// integer) attaining it.
pub fn list_size_within(c: &CodeView, max_distance: usize) -> Result<(u64, BitVector)> {
    let t = c.length();
    check_budget("block length", t as u128, 32)?;
    let words: Vec<u64> = c.codewords()?.iter().map(BitVector::to_u64).collect();
    check_budget(
        "list-size enumeration",
        (1u128 << t) * words.len() as u128,
        LIST_WORK_LIMIT,
    )?;
    let (best, center) = (0..1u64 << t)
        .into_par_iter()
        .map(|x| {
            (
                words
                    .iter()
                    .filter(|&&w| ((w ^ x).count_ones() as usize) <= max_distance)
                    .count() as u64,
                x,
            )
        })
        .reduce(
            || (0, u64::MAX),
            |a, b| {
                if a.0 > b.0 || (a.0 == b.0 && a.1 < b.1) {
                    a
                } else {
                    b
                }
            },
        );
    Ok((best, BitVector::from_u64(t, center)))
}

/// [`list_size_within`] at relative radius `ρ`: distance `<= ρ T`.
pub fn list_size_exhaustive(c: &CodeView, radius: &BigRational) -> Result<(u64, BitVector)> {
    if radius.is_negative() {
        return Err(Error::InvalidParameter(
            "radius must be non-negative".into(),
        ));
    }
    let scaled = radius * BigRational::from_integer(BigInt::from(c.length()));
    let d = scaled.floor().to_integer();
    let d = usize::try_from(d.min(BigInt::from(c.length()))).expect("bounded by length");
    list_size_within(c, d)
}

/// Largest integer `w` with `w <= (1 - √ε) T / 2`, decided exactly:
/// `T - 2w >= 0` and `(T - 2w)^2 >= ε T^2`.
pub fn johnson_distance(length: usize, eps: &BigRational) -> Result<usize> {
    if eps.is_negative() || eps > &BigRational::one() {
        return Err(Error::InvalidParameter("ε must lie in [0, 1]".into()));
    }
    let t = BigInt::from(length);
    let bound = eps * BigRational::from_integer(&t * &t);
    Ok((0..=length / 2)
        .rev()
        .find(|&w| {
            let gap = BigInt::from(length - 2 * w);
            BigRational::from_integer(&gap * &gap) >= bound
        })
        .unwrap_or(0))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JohnsonReport {
    pub epsilon: ExactRational,
    pub max_distance: usize,
    pub max_list_size: u64,
    pub bound: u64,
    pub center: BitVector,
    pub verdict: crate::bias::Verdict,
}

/// Checks that an `ε`-balanced code has at most `2T` codewords in every
/// ball of relative radius `(1 - √ε)/2`. A code that is not `ε`-balanced
/// is a precondition error.
pub fn johnson_check(c: &CodeView, eps: &BigRational) -> Result<JohnsonReport> {
    let t = c.length();
    if let Some(w) = c
        .codewords()?
        .iter()
        .skip(1)
        .find(|w| !is_balanced(w.weight(), t, eps))
    {
        return Err(Error::Precondition(format!(
            "codeword of weight {} in length {t} is not ε-balanced for ε = {eps}",
            w.weight()
        )));
    }
    let max_distance = johnson_distance(t, eps)?;
    let (max_list_size, center) = list_size_within(c, max_distance)?;
    let bound = 2 * t as u64;
    Ok(JohnsonReport {
        epsilon: ExactRational(eps.clone()),
        max_distance,
        max_list_size,
        bound,
        center,
        verdict: crate::bias::Verdict::from_bool(max_list_size <= bound),
    })
}

/// `k = log2 L + log2(1/ε) + 1`.
pub fn code_extractor_params(list_size: u64, eps: f64) -> Result<f64> {
    if list_size == 0 || !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidParameter("need L >= 1 and 0 < ε < 1".into()));
    }
    Ok((list_size as f64).log2() - eps.log2() + 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::reed_muller_generator;
    use crate::exact::rational;
    use crate::gf2::sample_uniform_matrix;
    use crate::rng::stream;
    use rand::Rng;

    fn linear_functions(t: usize) -> CodeView {
        // Codeword of a: y ↦ <a, y> over all y in F_2^t.
        let rows: Vec<BitVector> = (0..t)
            .map(|i| BitVector::from_bits((0..1u64 << t).map(|y| y >> i & 1 == 1)))
            .collect();
        CodeView::new(BitMatrix::from_rows(1 << t, &rows).unwrap()).unwrap()
    }

    fn weight_histogram(c: &CodeView) -> Vec<u64> {
        let mut h = vec![0; c.length() + 1];
        for m in 0..1u64 << c.dim() {
            h[c.encode(&BitVector::from_u64(c.dim(), m)).unwrap().weight()] += 1;
        }
        h
    }

    #[test]
    fn zero_code() {
        let c = CodeView::new(BitMatrix::zeros(2, 5)).unwrap();
        let r = balancedness_report(&c, &rational(1, 2), Enumeration::Exhaustive, &mut stream(0))
            .unwrap();
        assert_eq!((r.nonzero, r.fraction), (0, 0.0));
        assert!(johnson_check(&c, &BigRational::zero())
            .unwrap()
            .verdict
            .passed());
    }

    #[test]
    fn full_space_length_four() {
        let c = CodeView::from_column_generator(&reed_muller_generator(2, 2).unwrap()).unwrap();
        assert_eq!(c.codewords().unwrap().len(), 16);
        let h = weight_histogram(&c);
        let unbalanced = h[4];
        assert_eq!(unbalanced, 1);
        let r = balancedness_report(&c, &rational(1, 2), Enumeration::Exhaustive, &mut stream(0))
            .unwrap();
        assert_eq!(r.exact.unwrap().0, rational(1, 15));
    }

    #[test]
    fn linear_functions_are_zero_balanced() {
        let c = linear_functions(3);
        let r = balancedness_report(
            &c,
            &BigRational::zero(),
            Enumeration::Exhaustive,
            &mut stream(0),
        )
        .unwrap();
        assert_eq!((r.nonzero, r.unbalanced), (7, 0));
        assert_eq!(measured_epsilon(&c).unwrap(), BigRational::zero());
    }

    #[test]
    fn list_size_examples() {
        let c = linear_functions(3);
        assert_eq!(list_size_exhaustive(&c, &BigRational::zero()).unwrap().0, 1);
        assert_eq!(list_size_exhaustive(&c, &rational(1, 1)).unwrap().0, 8);
        assert_eq!(list_size_exhaustive(&c, &rational(2, 1)).unwrap().0, 8);
        let (l, _) = list_size_exhaustive(&c, &rational(1, 2)).unwrap();
        let brute = (0..256u64)
            .map(|x| {
                c.codewords()
                    .unwrap()
                    .iter()
                    .filter(|w| (w.to_u64() ^ x).count_ones() <= 4)
                    .count() as u64
            })
            .max()
            .unwrap();
        assert_eq!(l, brute);
        assert!(l <= 16);
        let j = johnson_check(&c, &BigRational::zero()).unwrap();
        assert_eq!(j.max_distance, 4);
        assert!(j.verdict.passed());
    }

    #[test]
    fn johnson_rejects_unbalanced() {
        let c = CodeView::new(BitMatrix::from_rows(4, &[BitVector::ones(4)]).unwrap()).unwrap();
        assert!(matches!(
            johnson_check(&c, &rational(1, 2)),
            Err(Error::Precondition(_))
        ));
        assert!(johnson_check(&c, &rational(1, 1)).unwrap().verdict.passed());
    }

    #[test]
    fn johnson_distance_matches_float() {
        for t in 1..=40 {
            for (p, q) in [(0, 1), (1, 4), (1, 2), (1, 9), (3, 7), (1, 1)] {
                let w = johnson_distance(t, &rational(p, q)).unwrap();
                let float = (1.0 - (p as f64 / q as f64).sqrt()) * t as f64 / 2.0;
                assert!(
                    w as f64 <= float + 1e-9 && (w + 1) as f64 > float - 1e-9,
                    "t={t} ε={p}/{q} w={w}"
                );
            }
        }
    }

    #[test]
    fn extractor_params() {
        assert!((code_extractor_params(16, 0.25).unwrap() - 7.0).abs() < 1e-12);
        assert!((code_extractor_params(1, 0.5).unwrap() - 2.0).abs() < 1e-12);
        assert!((code_extractor_params(8, 1.0 - 1e-12).unwrap() - 4.0).abs() < 1e-9);
        assert!(code_extractor_params(0, 0.5).is_err());
    }

    #[test]
    fn file_round_trip() {
        let c = linear_functions(2);
        let back = CodeView::from_json(&c.to_json()).unwrap();
        assert_eq!(back, c);
        assert!(CodeView::from_json(r#"{"dim":1,"length":3,"generator":["01"]}"#).is_err());
    }

    #[test]
    fn sampled_agrees_with_exhaustive() {
        let mut rng = stream(5);
        for _ in 0..50 {
            let dim = rng.gen_range(1..=10);
            let t = rng.gen_range(4..=16);
            let c = CodeView::new(sample_uniform_matrix(dim, t, &mut rng)).unwrap();
            let eps = rational(1, 2);
            let exact = balancedness_report(&c, &eps, Enumeration::Exhaustive, &mut rng).unwrap();
            let est = balancedness_report(
                &c,
                &eps,
                Enumeration::Sampled {
                    samples: 4000,
                    delta_fail: 1e-3,
                },
                &mut rng,
            )
            .unwrap();
            if est.nonzero > 0 {
                assert!((exact.fraction - est.fraction).abs() <= est.halfwidth.unwrap());
            }
        }
    }

    #[test]
    fn random_subcodes_of_even_weight_code() {
        let g = reed_muller_generator(3, 2).unwrap();
        let base = CodeView::from_column_generator(&g).unwrap();
        let eps = rational(1, 2);
        let delta = balancedness_report(&base, &eps, Enumeration::Exhaustive, &mut stream(0))
            .unwrap()
            .fraction;
        let mut rng = stream(17);
        let trials = 1000;
        let bad = (0..trials)
            .filter(|_| {
                let h = sample_uniform_matrix(g.cols(), 2, &mut rng);
                let sub = CodeView::from_column_generator(&g.mul(&h).unwrap()).unwrap();
                balancedness_report(&sub, &eps, Enumeration::Exhaustive, &mut stream(0))
                    .unwrap()
                    .unbalanced
                    > 0
            })
            .count();
        let p = bad as f64 / trials as f64;
        let se = (p * (1.0 - p) / trials as f64).sqrt();
        assert!(p <= delta * 3.0 + 3.0 * se, "p={p} delta={delta}");
    }
}
