//! Builders and evaluators for concrete low-degree extractors: the
//! inner-product two-source extractor over a quadratic expansion, the seeded
//! extractor from a random Reed–Muller subcode, the sumset-evasive encoder,
//! and the left-degree split of two-block polynomials.

use std::f64::consts::E;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::anf::{eval_vector_u64, table_degree, MonomialOrder, Polynomial};
use crate::error::{check_budget, Error, Result};
use crate::gf2::{binom_sum, sample_uniform_matrix, BitMatrix, BitVector};
use crate::rng::stream;

/// Largest `2n` for which the full two-input truth table is built.
pub const MAX_TWO_INPUT_VARS: usize = 24;

/// Cap on the seeded generator size `2^t · C(t, <=d)` and on `C(t, <=d) · n`.
pub const SEEDED_LIMIT: u128 = 1 << 28;

/// `Ext(x, y) = <h(x), h(y)>` with `h(x) = (x, f_1(x), ..., f_r(x))` and
/// random quadratic `f_i`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TwoSourceDescriptor {
    pub n: usize,
    pub r: usize,
    pub polys: Vec<Polynomial>,
    pub seed: u64,
}

/// Appended-polynomial count used when none is given.
pub fn default_two_source_r(n: usize) -> usize {
    11 * n
}

/// Samples `r` independent uniform polynomials of degree `<= 2` (constant
/// terms included) over `n` variables.
pub fn build_two_source(n: usize, r: Option<usize>, seed: u64) -> Result<TwoSourceDescriptor> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be at least 1".into()));
    }
    let r = r.unwrap_or_else(|| default_two_source_r(n));
    if r == 0 {
        return Err(Error::InvalidParameter("r must be at least 1".into()));
    }
    let order = MonomialOrder::shared(n, 2.min(n))?;
    let mut rng = stream(seed);
    let polys = (0..r)
        .map(|_| Polynomial::random(&order, &mut rng))
        .collect();
    Ok(TwoSourceDescriptor { n, r, polys, seed })
}

impl TwoSourceDescriptor {
    /// `h(x) = (x, f_1(x), ..., f_r(x))`.
    pub fn expand(&self, x: &BitVector) -> Result<BitVector> {
        if x.len() != self.n {
            return Err(Error::LengthMismatch {
                expected: self.n,
                found: x.len(),
            });
        }
        let tail = BitVector::from_bits(
            self.polys
                .iter()
                .map(|f| f.evaluate(x))
                .collect::<Result<Vec<_>>>()?,
        );
        Ok(x.concat(&tail))
    }

    pub fn validate(&self) -> Result<()> {
        if self.polys.len() != self.r || self.r == 0 {
            return Err(Error::InvalidParameter(format!(
                "expected {} polynomials, found {}",
                self.r,
                self.polys.len()
            )));
        }
        if let Some(p) = self
            .polys
            .iter()
            .find(|p| p.n() != self.n || p.degree() > 2)
        {
            return Err(Error::InvalidParameter(format!(
                "appended polynomial over n = {} with degree {}",
                p.n(),
                p.degree()
            )));
        }
        Ok(())
    }
}

pub fn eval_two_source(desc: &TwoSourceDescriptor, x: &BitVector, y: &BitVector) -> Result<bool> {
    Ok(desc.expand(x)?.dot(&desc.expand(y)?))
}

/// Truth table of `(x, y) ↦ Ext(x, y)` over `2n` variables, `x` in the low
/// `n` bits of the index.
pub fn two_source_truth_table(desc: &TwoSourceDescriptor) -> Result<BitVector> {
    let n = desc.n;
    check_budget(
        "two-input truth table variables",
        2 * n as u128,
        MAX_TWO_INPUT_VARS as u128,
    )?;
    let h: Vec<BitVector> = (0..1u64 << n)
        .map(|x| desc.expand(&BitVector::from_u64(n, x)))
        .collect::<Result<_>>()?;
    let size = 1usize << (2 * n);
    let mut table = BitVector::zeros(size);
    for (y, hy) in h.iter().enumerate() {
        for (x, hx) in h.iter().enumerate() {
            if hx.dot(hy) {
                table.set(x | y << n, true);
            }
        }
    }
    Ok(table)
}

/// Degree of the full ANF of `Ext` over `2n` variables.
pub fn two_source_degree(desc: &TwoSourceDescriptor) -> Result<usize> {
    table_degree(&two_source_truth_table(desc)?)
}

/// `Ext(x, y) = (G H x)_y` for the Reed–Muller generator `G` of `RM(t, d)`
/// and a uniform `H`.
///
/// Row `y` of `G` is `eval_d(y)` for the seed whose integer encoding is `y`
/// (bit `i` is `y_{i+1}`); columns follow the monomial order on `t`
/// variables.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeededDescriptor {
    pub n: usize,
    pub t: usize,
    pub d: usize,
    pub g: BitMatrix,
    pub h: BitMatrix,
    pub seed: u64,
}

/// The `2^t × C(t, <=d)` generator of `RM(t, d)`.
pub fn reed_muller_generator(t: usize, d: usize) -> Result<BitMatrix> {
    check_budget("seed length", t as u128, 63)?;
    let order = MonomialOrder::new(t, d)?;
    check_budget(
        "Reed-Muller generator",
        (1u128 << t) * order.len() as u128,
        SEEDED_LIMIT,
    )?;
    let rows: Vec<BitVector> = (0..1u64 << t).map(|y| eval_vector_u64(y, &order)).collect();
    BitMatrix::from_rows(order.len(), &rows)
}

pub fn build_seeded(n: usize, t: usize, d: usize, seed: u64) -> Result<SeededDescriptor> {
    if d == 0 || d > t {
        return Err(Error::InvalidParameter(format!(
            "need 1 <= d <= t, got d = {d}, t = {t}"
        )));
    }
    let g = reed_muller_generator(t, d)?;
    check_budget("subcode matrix", g.cols() as u128 * n as u128, SEEDED_LIMIT)?;
    if g.rank() != g.cols() {
        return Err(Error::Precondition(
            "Reed-Muller generator lost column rank".into(),
        ));
    }
    let h = sample_uniform_matrix(g.cols(), n, &mut stream(seed));
    Ok(SeededDescriptor {
        n,
        t,
        d,
        g,
        h,
        seed,
    })
}

impl SeededDescriptor {
    /// Generator of the subcode `{G H x}`: an `n × 2^t` matrix whose row `i`
    /// is the codeword of `e_i`.
    pub fn code_generator(&self) -> Result<BitMatrix> {
        Ok(self.g.mul(&self.h)?.transpose())
    }
}

/// `(G H x)_y`, evaluated as `w = H x` followed by the row-`y` lookup of `G`.
pub fn eval_seeded(desc: &SeededDescriptor, x: &BitVector, y: &BitVector) -> Result<bool> {
    if y.len() != desc.t {
        return Err(Error::LengthMismatch {
            expected: desc.t,
            found: y.len(),
        });
    }
    let w = desc.h.mul_vec(x)?;
    let row = BitVector::from_words(
        desc.g.cols(),
        desc.g.row_words(y.to_u64() as usize).to_vec(),
    );
    Ok(row.dot(&w))
}

/// Truth table of `(x, y) ↦ Ext(x, y)` over `n + t` variables, `x` in the
/// low `n` bits of the index.
pub fn seeded_truth_table(desc: &SeededDescriptor) -> Result<BitVector> {
    let (n, t) = (desc.n, desc.t);
    check_budget(
        "seeded truth table variables",
        (n + t) as u128,
        MAX_TWO_INPUT_VARS as u128,
    )?;
    let mut table = BitVector::zeros(1 << (n + t));
    for y in 0..1u64 << t {
        let yv = BitVector::from_u64(t, y);
        for x in 0..1u64 << n {
            if eval_seeded(desc, &BitVector::from_u64(n, x), &yv)? {
                table.set((x | y << n) as usize, true);
            }
        }
    }
    Ok(table)
}

/// Largest number of variables below `split` (the left block) in any
/// monomial of `f`.
pub fn left_degree(f: &Polynomial, split: usize) -> usize {
    f.monomials()
        .iter()
        .map(|m| m.iter().filter(|&&v| v < split).count())
        .max()
        .unwrap_or(0)
}

/// Largest number of variables at or above `split` in any monomial.
pub fn right_degree(f: &Polynomial, split: usize) -> usize {
    f.monomials()
        .iter()
        .map(|m| m.iter().filter(|&&v| v >= split).count())
        .max()
        .unwrap_or(0)
}

/// Sumset-evasive encoder `h(x) = (x, f_1(x), ..., f_r(x))` over `k`
/// variables with random `f_i` of degree `<= d`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvasiveDescriptor {
    pub k: usize,
    pub d: usize,
    pub r: usize,
    pub polys: Vec<Polynomial>,
    pub seed: u64,
}

pub fn build_evasive_h(k: usize, d: usize, r: usize, seed: u64) -> Result<EvasiveDescriptor> {
    if k == 0 || r == 0 || d == 0 || d > k {
        return Err(Error::InvalidParameter(format!(
            "need k, r >= 1 and 1 <= d <= k, got k = {k}, d = {d}, r = {r}"
        )));
    }
    let order = MonomialOrder::shared(k, d)?;
    let mut rng = stream(seed);
    let polys = (0..r)
        .map(|_| Polynomial::random(&order, &mut rng))
        .collect();
    Ok(EvasiveDescriptor {
        k,
        d,
        r,
        polys,
        seed,
    })
}

/// Requires an even `d`, as the sumset-evasive bound does.
pub fn build_evasive_h_checked(
    k: usize,
    d: usize,
    r: usize,
    seed: u64,
) -> Result<EvasiveDescriptor> {
    if !d.is_multiple_of(2) {
        return Err(Error::InvalidParameter(format!("degree {d} must be even")));
    }
    build_evasive_h(k, d, r, seed)
}

impl EvasiveDescriptor {
    /// Output length `k + r`.
    pub fn width(&self) -> usize {
        self.k + self.r
    }

    pub fn image(&self, x: &BitVector) -> Result<BitVector> {
        if x.len() != self.k {
            return Err(Error::LengthMismatch {
                expected: self.k,
                found: x.len(),
            });
        }
        let tail = BitVector::from_bits(
            self.polys
                .iter()
                .map(|f| f.evaluate(x))
                .collect::<Result<Vec<_>>>()?,
        );
        Ok(x.concat(&tail))
    }

    /// `h` applied to every point of `F_2^k`, in integer order.
    pub fn image_set(&self) -> Result<Vec<BitVector>> {
        check_budget("evasive image", 1u128 << self.k.min(127), 1 << 22)?;
        (0..1u64 << self.k)
            .map(|x| self.image(&BitVector::from_u64(self.k, x)))
            .collect()
    }
}

/// Smallest `r` meeting `r >= 8 d^2 (2e)^d k / C(⌊t/100⌋, <=⌊d/2⌋)`.
pub fn min_evasive_r(k: usize, d: usize, t: usize) -> f64 {
    let denom: f64 = binom_sum(t / 100, d / 2)
        .to_string()
        .parse()
        .expect("decimal integer");
    8.0 * (d * d) as f64 * (2.0 * E).powi(d as i32) * k as f64 / denom
}

/// Splits a polynomial over `2n` variables (first `n` are `x`) into
/// `g + h` where `h` holds the monomials with no `y` variable.
pub fn split_left_degree(f: &Polynomial) -> Result<(Polynomial, Polynomial)> {
    if !f.n().is_multiple_of(2) {
        return Err(Error::InvalidParameter(format!(
            "two-block split needs an even variable count, got {}",
            f.n()
        )));
    }
    let n = f.n() / 2;
    let order: &Arc<MonomialOrder> = f.order();
    let mut g = BitVector::zeros(order.len());
    let mut h = BitVector::zeros(order.len());
    for i in f.coeffs().iter_ones() {
        if order.monomial(i).iter().all(|&v| v < n) {
            h.set(i, true);
        } else {
            g.set(i, true);
        }
    }
    Ok((
        Polynomial::from_coeffs(order, g)?,
        Polynomial::from_coeffs(order, h)?,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::anf::{anf_from_truth_table, sample_poly};
    use crate::rng::stream;
    use rand::Rng;

    #[test]
    fn two_source_shape() {
        let a = build_two_source(3, None, 11).unwrap();
        assert_eq!(a.r, 33);
        assert_eq!(a, build_two_source(3, None, 11).unwrap());
        assert!(a.polys.iter().all(|p| p.coeffs().len() == 7));
        a.validate().unwrap();
    }

    #[test]
    fn two_source_examples() {
        let a = build_two_source(4, Some(5), 3).unwrap();
        let mut rng = stream(1);
        for _ in 0..20 {
            let x = BitVector::random(4, &mut rng);
            let hx = a.expand(&x).unwrap();
            assert_eq!(eval_two_source(&a, &x, &x).unwrap(), hx.weight() % 2 == 1);
        }
        let order = MonomialOrder::shared(4, 2).unwrap();
        let zero = TwoSourceDescriptor {
            n: 4,
            r: 1,
            polys: vec![Polynomial::zero(&order)],
            seed: 0,
        };
        for y in 0..16 {
            assert!(
                !eval_two_source(&zero, &BitVector::zeros(4), &BitVector::from_u64(4, y)).unwrap()
            );
        }
    }

    #[test]
    fn two_source_degree_at_most_four() {
        for seed in 0..20 {
            for n in 1..=4 {
                let a = build_two_source(n, None, seed).unwrap();
                assert!(two_source_degree(&a).unwrap() <= 4);
            }
        }
    }

    #[test]
    fn seeded_generator_examples() {
        let g = reed_muller_generator(2, 1).unwrap();
        assert_eq!(g.to_string(), "100\n110\n101\n111");
        let full = reed_muller_generator(3, 3).unwrap();
        assert_eq!((full.rows(), full.cols(), full.rank()), (8, 8, 8));
        assert_eq!(
            build_seeded(5, 2, 1, 9).unwrap(),
            build_seeded(5, 2, 1, 9).unwrap()
        );
    }

    #[test]
    fn seeded_zero_h() {
        let mut s = build_seeded(4, 2, 1, 1).unwrap();
        s.h = BitMatrix::zeros(s.h.rows(), s.h.cols());
        for x in 0..16 {
            for y in 0..4 {
                assert!(
                    !eval_seeded(&s, &BitVector::from_u64(4, x), &BitVector::from_u64(2, y))
                        .unwrap()
                );
            }
        }
    }

    #[test]
    fn seeded_two_paths_agree() {
        for n in 1..=8 {
            let s = build_seeded(n, 2, 1, n as u64).unwrap();
            let gh = s.g.mul(&s.h).unwrap();
            for y in 0..4u64 {
                let yv = BitVector::from_u64(2, y);
                for x in 0..1u64 << n {
                    let xv = BitVector::from_u64(n, x);
                    let w = s.h.mul_vec(&xv).unwrap();
                    // (Hx)_∅ + y_1 (Hx)_{1} + y_2 (Hx)_{2}
                    let formula = w.get(0) ^ (yv.get(0) & w.get(1)) ^ (yv.get(1) & w.get(2));
                    let matrix = gh.mul_vec(&xv).unwrap().get(y as usize);
                    let got = eval_seeded(&s, &xv, &yv).unwrap();
                    assert_eq!(got, formula);
                    assert_eq!(got, matrix);
                }
            }
        }
    }

    #[test]
    fn seeded_structure() {
        for seed in 0..10 {
            for d in 1..=3 {
                let s = build_seeded(4, 3, d, seed).unwrap();
                let f = anf_from_truth_table(&seeded_truth_table(&s).unwrap()).unwrap();
                assert!(left_degree(&f, 4) <= 1);
                assert!(right_degree(&f, 4) <= d);
            }
        }
    }

    #[test]
    fn evasive_helper() {
        let r = min_evasive_r(200, 2, 200);
        let expect = 8.0 * 4.0 * (2.0 * E).powi(2) * 200.0 / 3.0;
        assert!((r - expect).abs() < 1e-9);
        assert!((r - 63053.0).abs() < 1.0, "{r}");
        let a = build_evasive_h(5, 2, 3, 4).unwrap();
        assert_eq!(a, build_evasive_h(5, 2, 3, 4).unwrap());
        assert!(build_evasive_h_checked(5, 3, 3, 4).is_err());
    }

    #[test]
    fn evasive_zero_graph() {
        let order = MonomialOrder::shared(3, 2).unwrap();
        let h = EvasiveDescriptor {
            k: 3,
            d: 2,
            r: 1,
            polys: vec![Polynomial::zero(&order)],
            seed: 0,
        };
        for v in h.image_set().unwrap() {
            assert!(!v.get(3));
        }
    }

    #[test]
    fn appended_block_expands_independent_sets() {
        let (k, d) = (8, 2);
        let order = MonomialOrder::shared(k, d).unwrap();
        let mut good = 0;
        for seed in 0..100 {
            let mut rng = stream(1000 + seed);
            let mut set = Vec::new();
            let mut basis = crate::gf2::EchelonBasis::new(order.len());
            while set.len() < 10 {
                let x = BitVector::random(k, &mut rng);
                if basis.insert(&crate::anf::eval_vector(&x, &order).unwrap()) {
                    set.push(x);
                }
            }
            let h = build_evasive_h(k, d, 11 * k, seed).unwrap();
            let images: Vec<BitVector> = set.iter().map(|x| h.image(x).unwrap()).collect();
            assert_eq!(crate::gf2::span_dim(h.width(), &images), set.len());
            let tails: Vec<BitVector> = images.iter().map(|v| v.slice(k, h.width())).collect();
            if crate::gf2::span_dim(h.r, &tails) + 2 >= set.len() {
                good += 1;
            }
        }
        assert!(good >= 99, "{good}");
    }

    #[test]
    fn split_examples() {
        let order = MonomialOrder::shared(4, 2).unwrap();
        let f = Polynomial::from_monomials(&order, &[vec![0, 1], vec![0, 2]]).unwrap();
        let (g, h) = split_left_degree(&f).unwrap();
        assert_eq!(h.monomials(), vec![vec![0, 1]]);
        assert_eq!(g.monomials(), vec![vec![0, 2]]);
        let only_y = Polynomial::from_monomials(&order, &[vec![], vec![2], vec![2, 3]]).unwrap();
        let (g, h) = split_left_degree(&only_y).unwrap();
        assert_eq!(h.monomials(), vec![Vec::<usize>::new()]);
        assert_eq!(g.monomials(), vec![vec![2], vec![2, 3]]);
    }

    #[test]
    fn split_reassembles() {
        let mut rng = stream(2);
        for _ in 0..50 {
            let n = rng.gen_range(1..=4);
            let d = rng.gen_range(1..=3.min(2 * n));
            let f = sample_poly(2 * n, d, &mut rng).unwrap();
            let (g, h) = split_left_degree(&f).unwrap();
            assert!(left_degree(&g, n) < d.max(1));
            assert!(h.monomials().iter().all(|m| m.iter().all(|&v| v < n)));
            for x in 0..1u64 << (2 * n) {
                assert_eq!(g.evaluate_u64(x) ^ h.evaluate_u64(x), f.evaluate_u64(x));
            }
        }
    }
}
