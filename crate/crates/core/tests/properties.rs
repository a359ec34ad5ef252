use lowdeg::anf::{anf_from_truth_table, sample_poly};
use lowdeg::bias::{moment_lhs, moment_rhs, statistical_distance};
use lowdeg::codes::{johnson_check, measured_epsilon, CodeView};
use lowdeg::gf2::{sample_uniform_matrix, span_dim};
use lowdeg::oracles::additive_energy;
use lowdeg::ranklab::eval_rank;
use lowdeg::sources::support_of;
use lowdeg::{stream, BitMatrix, BitVector, MonomialOrder, Polynomial, Source};
use num_bigint::BigUint;
use proptest::prelude::*;
use rand::Rng;

fn random_vectors(n: usize, count: usize, seed: u64) -> Vec<BitVector> {
    let mut rng = stream(seed);
    (0..count).map(|_| BitVector::random(n, &mut rng)).collect()
}

fn distinct_vectors(n: usize, count: usize, seed: u64) -> Vec<BitVector> {
    let mut v = random_vectors(n, count, seed);
    v.sort();
    v.dedup();
    v
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn vector_string_round_trip(bits in proptest::collection::vec(any::<bool>(), 0..200)) {
        let v = BitVector::from_bits(bits.clone());
        let s = v.to_string();
        prop_assert_eq!(s.len(), bits.len());
        prop_assert_eq!(s.parse::<BitVector>().unwrap(), v.clone());
        let json = serde_json::to_string(&v).unwrap();
        prop_assert_eq!(serde_json::from_str::<BitVector>(&json).unwrap(), v);
    }

    #[test]
    fn dot_is_bilinear(n in 1usize..130, seed: u64) {
        let v = random_vectors(n, 3, seed);
        prop_assert_eq!(v[0].xor(&v[1]).dot(&v[2]), v[0].dot(&v[2]) ^ v[1].dot(&v[2]));
        prop_assert_eq!(v[0].dot(&v[1]), v[1].dot(&v[0]));
    }

    #[test]
    fn rank_survives_row_operations(rows in 1usize..=16, cols in 1usize..=16, seed: u64) {
        let mut rng = stream(seed);
        let m = sample_uniform_matrix(rows, cols, &mut rng);
        let r = m.rank();
        prop_assert_eq!(r, m.transpose().rank());
        let mut ops = m.row_vectors();
        for _ in 0..20 {
            let (i, j) = (rng.gen_range(0..rows), rng.gen_range(0..rows));
            if i != j {
                let add = ops[j].clone();
                ops[i].xor_assign(&add);
            }
            ops.swap(rng.gen_range(0..rows), rng.gen_range(0..rows));
        }
        prop_assert_eq!(BitMatrix::from_rows(cols, &ops).unwrap().rank(), r);
        let kernel = m.nullspace();
        prop_assert_eq!(kernel.len() + r, cols);
        for k in &kernel {
            prop_assert!(m.mul_vec(k).unwrap().is_zero());
        }
    }

    #[test]
    fn inverse_is_two_sided(n in 1usize..=12, seed: u64) {
        let m = sample_uniform_matrix(n, n, &mut stream(seed));
        match m.inverse() {
            Some(inv) => {
                prop_assert_eq!(m.rank(), n);
                prop_assert_eq!(m.mul(&inv).unwrap(), BitMatrix::identity(n));
                prop_assert_eq!(inv.mul(&m).unwrap(), BitMatrix::identity(n));
            }
            None => prop_assert!(m.rank() < n),
        }
    }

    #[test]
    fn anf_is_a_bijection(n in 0usize..=8, seed: u64) {
        let mut rng = stream(seed);
        let table = BitVector::random(1 << n, &mut rng);
        let f = anf_from_truth_table(&table).unwrap();
        prop_assert_eq!(f.truth_table().unwrap(), table.clone());
        for x in 0..1u64 << n {
            prop_assert_eq!(f.evaluate_u64(x), table.get(x as usize));
        }
        let g = sample_poly(n, n.min(3), &mut rng).unwrap();
        let back = anf_from_truth_table(&g.truth_table().unwrap()).unwrap();
        prop_assert_eq!(back.recast(g.order()).unwrap(), g);
    }

    #[test]
    fn polynomial_json_round_trip(n in 1usize..=10, d in 0usize..=3, seed: u64) {
        let order = MonomialOrder::shared(n, d).unwrap();
        let f = Polynomial::random(&order, &mut stream(seed));
        let json = f.to_json();
        let back = Polynomial::from_json(&json).unwrap();
        prop_assert_eq!(back.to_json(), json);
        prop_assert_eq!(back, f);
    }

    #[test]
    fn composition_routes_agree(m in 1usize..=6, n in 1usize..=6, d in 1usize..=3, seed: u64) {
        let mut rng = stream(seed);
        let order = MonomialOrder::shared(m, d).unwrap();
        let q = Polynomial::random(&order, &mut rng);
        let l = sample_uniform_matrix(m, n, &mut rng);
        let sym = q.compose_linear(&l).unwrap();
        prop_assert_eq!(&sym, &q.compose_linear_via_table(&l).unwrap());
        prop_assert!(sym.degree() <= q.degree());
    }

    #[test]
    fn moment_identity_on_random_flats(n in 1usize..=3, size in 1usize..=8, d in 0usize..=2, t in 1u32..=3, seed: u64) {
        let support = distinct_vectors(n, size, seed);
        let s = Source::flat(n, support).unwrap();
        prop_assert_eq!(moment_lhs(&s, n, d, t).unwrap(), moment_rhs(&s, n, d, t).unwrap());
    }

    #[test]
    fn data_processing(n in 1usize..=6, m in 1usize..=6, size in 1usize..=20, seed: u64) {
        let mut rng = stream(seed);
        let (p, q) = (distinct_vectors(n, size, seed), distinct_vectors(n, size, seed ^ 1));
        let (dp, dq) = (support_of(&Source::flat(n, p).unwrap()).unwrap(), support_of(&Source::flat(n, q).unwrap()).unwrap());
        let l = sample_uniform_matrix(m, n, &mut rng);
        let map = |x: &BitVector| l.mul_vec(x).unwrap();
        let before = statistical_distance(&dp, &dq).unwrap();
        let after = statistical_distance(&dp.push_forward(m, map).unwrap(), &dq.push_forward(m, map).unwrap()).unwrap();
        prop_assert!(after <= before);
    }

    #[test]
    fn eval_rank_never_grows_under_maps(n in 1usize..=8, m in 1usize..=8, d in 1usize..=3, size in 1usize..=40, seed: u64) {
        let mut rng = stream(seed);
        let s = distinct_vectors(n, size, seed);
        let l = sample_uniform_matrix(m, n, &mut rng);
        let mut image: Vec<BitVector> = s.iter().map(|x| l.mul_vec(x).unwrap()).collect();
        image.sort();
        image.dedup();
        prop_assert!(eval_rank(&s, d).unwrap().rank >= eval_rank(&image, d).unwrap().rank);
        prop_assert!(eval_rank(&s, d).unwrap().verify().unwrap());
    }

    #[test]
    fn energy_at_least_pair_count(n in 1usize..=8, a in 1usize..=16, b in 1usize..=16, seed: u64) {
        let x = distinct_vectors(n, a, seed);
        let y = distinct_vectors(n, b, seed ^ 7);
        let e = additive_energy(&x, &y).unwrap();
        prop_assert!(e >= BigUint::from(x.len() * y.len()));
        prop_assert!(e <= BigUint::from(x.len() * y.len() * x.len().min(y.len())));
    }

    #[test]
    fn johnson_holds_at_measured_balance(dim in 1usize..=6, t in 1usize..=12, seed: u64) {
        let g = sample_uniform_matrix(dim, t, &mut stream(seed));
        let code = CodeView::new(g).unwrap();
        let eps = measured_epsilon(&code).unwrap();
        prop_assert!(johnson_check(&code, &eps).unwrap().verdict.passed());
    }

    #[test]
    fn span_dim_matches_rank(n in 1usize..=20, count in 0usize..=24, seed: u64) {
        let v = random_vectors(n, count, seed);
        let expect = if v.is_empty() { 0 } else { BitMatrix::from_rows(n, &v).unwrap().rank() };
        prop_assert_eq!(span_dim(n, &v), expect);
    }
}
