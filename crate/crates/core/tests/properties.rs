use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use colorank::approx::ApproxConfig;
use colorank::basic::{basic_rank, basic_to_general, check_rank_bound, derive_ranked, random_basic, validate_basic, validate_ranked};
use colorank::geometry::{barycentric, conv_membership, point_of, relint_disjoint, RationalPoint};
use colorank::io;
use colorank::model::{independent_theta, Elem, FiniteModel, ModelRanker, RankedModelOracle};
use colorank::ordinal::{ord_cmp, ord_parse, OrdinalCNF};
use colorank::seq::Seq;
use colorank::tree::{random_tree, rank_all, validate_tree, RankOracle};

fn cfg() -> ApproxConfig {
    ApproxConfig::default()
}

fn ordinal() -> impl Strategy<Value = OrdinalCNF> {
    proptest::collection::btree_map(0u32..4, 1u64..5, 0..4).prop_map(|m| {
        let terms = m.into_iter().rev().collect();
        OrdinalCNF::from_terms(terms).unwrap()
    })
}

fn model() -> impl Strategy<Value = FiniteModel> {
    (1u32..=4).prop_flat_map(|size| {
        proptest::collection::btree_set((0..size, 0..size), 0..=(size * size) as usize).prop_map(move |pairs| {
            let tuples = pairs.into_iter().map(|(a, b)| vec![a, b]);
            FiniteModel::empty(size).with_relation("E", 2, tuples).unwrap()
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ordinals_print_and_parse_back(a in ordinal()) {
        prop_assert_eq!(ord_parse(&a.to_string()).unwrap(), a);
    }

    #[test]
    fn successor_is_strictly_larger(a in ordinal(), b in ordinal()) {
        prop_assert_eq!(ord_cmp(&a.succ(), &a), std::cmp::Ordering::Greater);
        if ord_cmp(&a, &b).is_lt() {
            prop_assert!(ord_cmp(&a.succ(), &b).is_le());
        }
    }

    #[test]
    fn sequences_print_and_parse_back(v in proptest::collection::vec(0u32..20, 0..6)) {
        let s = Seq(v);
        prop_assert_eq!(s.to_string().parse::<Seq>().unwrap(), s);
    }

    #[test]
    fn random_trees_are_valid_and_round_trip(seed in any::<u64>(), h in 2usize..=4, branches in 1usize..6) {
        let t = random_tree(&mut ChaCha8Rng::seed_from_u64(seed), 2, h, 3, 2, branches);
        prop_assert!(validate_tree(&t).is_ok());
        let text = io::write_tree(&t);
        prop_assert_eq!(io::parse_tree(&text).unwrap(), t);
    }

    #[test]
    fn fixpoint_ranks_match_the_recursion(seed in any::<u64>(), h in 2usize..=4, branches in 1usize..5) {
        let t = random_tree(&mut ChaCha8Rng::seed_from_u64(seed), 2, h, 3, 2, branches);
        let report = rank_all(&t, &cfg()).unwrap();
        let mut oracle = RankOracle::new(&t, &cfg()).unwrap();
        for (a, v) in report.iter() {
            prop_assert_eq!(oracle.rank(a), v, "{}", a.key());
            prop_assert!((v as usize) < h - a.level);
        }
    }

    #[test]
    fn basic_ranks_agree_with_the_general_image(seed in any::<u64>(), h in 3usize..=4, branches in 1usize..5) {
        let t = random_basic(&mut ChaCha8Rng::seed_from_u64(seed), h, 2, 3, branches);
        prop_assert!(validate_basic(&t).is_ok());
        let general = rank_all(&basic_to_general(&t), &cfg()).unwrap();
        prop_assert_eq!(basic_rank(&t, &cfg()).unwrap().tree_rank, general.tree_rank);
    }

    #[test]
    fn derived_rankings_are_valid_and_bounded(seed in any::<u64>(), h in 3usize..=4, branches in 1usize..5) {
        let t = random_basic(&mut ChaCha8Rng::seed_from_u64(seed), h, 2, 3, branches);
        let rt = derive_ranked(&t, &cfg()).unwrap();
        prop_assert!(validate_ranked(&rt, &cfg()).unwrap().is_ok());
        prop_assert!(check_rank_bound(&rt, &cfg()).unwrap().is_ok());
        let text = io::write_ranked(&rt, false);
        prop_assert_eq!(io::parse_ranked(&text).unwrap().tree, rt);
    }

    #[test]
    fn independence_is_downward_closed(m in model(), mask in 1u32..16) {
        let w: Vec<Elem> = (0..m.size).filter(|i| mask & (1 << i) != 0).collect();
        prop_assume!(!w.is_empty());
        if independent_theta(&m, 2, &w).unwrap() {
            for drop in &w {
                let sub: Vec<Elem> = w.iter().copied().filter(|x| x != drop).collect();
                if !sub.is_empty() {
                    prop_assert!(independent_theta(&m, 2, &sub).unwrap());
                }
            }
        }
    }

    #[test]
    fn oracles_round_trip_and_carry_members(m in model()) {
        let o = RankedModelOracle::from_model(&m, 2).unwrap();
        let mut ranker = ModelRanker::new(&m, 2);
        for (w, e) in &o.entries {
            prop_assert!(w.contains(&e.crit));
            prop_assert_eq!(ranker.rank(w).unwrap().map(|r| OrdinalCNF::from_nat(r as u64)), Some(e.rank.clone()));
        }
        prop_assert_eq!(io::parse_oracle(&io::write_oracle(&o)).unwrap(), o);
        prop_assert_eq!(io::parse_model(&io::write_model(&m)).unwrap(), m);
    }

    #[test]
    fn curve_points_in_a_simplex_have_affine_weights(bits in proptest::collection::vec(0u32..2, 9)) {
        let strings: Vec<Seq> = bits.chunks(3).map(|c| Seq(c.to_vec())).collect();
        prop_assume!(strings[0] != strings[1] && strings[1] != strings[2] && strings[0] != strings[2]);
        let t: Vec<RationalPoint> = strings.iter().map(|s| point_of(s, 2)).collect();
        let centroid = colorank::geometry::centroid(&t);
        let w = barycentric(&centroid, &t).unwrap().unwrap();
        let total = w.iter().fold(colorank::geometry::Rational::from_integer(0.into()), |acc, x| acc + x);
        prop_assert_eq!(total, colorank::geometry::Rational::from_integer(1.into()));
        for p in &t {
            prop_assert!(conv_membership(p, &t).unwrap());
        }
    }

    #[test]
    fn disjoint_pairs_of_curve_segments(a in 0u32..8, b in 0u32..8, c in 0u32..8, d in 0u32..8) {
        let seq = |x: u32| Seq(vec![x >> 2 & 1, x >> 1 & 1, x & 1]);
        prop_assume!(a != b && c != d);
        let mut x0 = [a, b];
        let mut x1 = [c, d];
        x0.sort();
        x1.sort();
        prop_assume!(x0 != x1);
        let seg = |x: [u32; 2]| x.iter().map(|&i| point_of(&seq(i), 2)).collect::<Vec<_>>();
        prop_assert!(relint_disjoint(&seg(x0), &seg(x1)).unwrap());
    }
}
