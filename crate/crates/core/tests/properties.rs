mod common;

use std::collections::BTreeSet;

use cyclo_core::category::{enumerate_homs, hom_count};
use cyclo_core::groupoid::GArrow;
use cyclo_core::loops::{
    cyclic_walk, factor_through_cycle, factorize_arrow, minimal_generator, pmin, represent_arrow,
    GenMode, Loop,
};
use cyclo_core::qgroups::{common_generator, validate_hom, Height, RationalSubgroup};
use cyclo_core::{BigArrow, BigRational, BigSubgroup};
use num_bigint::BigInt;
use num_rational::Ratio;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::{filtered_functors, height_profiles, model, random_phi_loop, random_positive_member};

fn arrow_in(n: usize) -> impl Strategy<Value = GArrow<i64>> {
    (0..n, -(4 * n as i64)..=4 * n as i64).prop_map(move |(s, d)| model(n).arrow(s, d).unwrap())
}

fn big(f: &GArrow<i64>) -> BigArrow {
    f.cast().unwrap()
}

proptest! {
    #[test]
    fn composition_is_associative(n in 1usize..=6, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        use rand::Rng;
        let x = model(n);
        let f = x.arrow(rng.gen_range(0..n), rng.gen_range(-18..=18i64)).unwrap();
        let g = x.arrow(f.cod(), rng.gen_range(-18..=18i64)).unwrap();
        let h = x.arrow(g.cod(), rng.gen_range(-18..=18i64)).unwrap();
        prop_assert_eq!(h.compose(&g.compose(&f).unwrap()).unwrap(), h.compose(&g).unwrap().compose(&f).unwrap());
    }

    #[test]
    fn big_and_small_scalars_agree(n in 1usize..=6, f in (0usize..6, -40i64..=40), k in -4i64..=4) {
        let f = model(n).arrow(f.0 % n, f.1).unwrap();
        let b = big(&f);
        prop_assert_eq!(b.to_string(), f.to_string());
        prop_assert_eq!(b.inverse().cast::<i64>().unwrap(), f.inverse());
        prop_assert_eq!(b.classify(), f.classify());
        prop_assert_eq!(b.pow(&BigInt::from(k)).map(|g| g.cast::<i64>().unwrap()), f.pow(&k));
        let fb = factorize_arrow(&b);
        let fs = factorize_arrow(&f);
        prop_assert_eq!(fb.base_path_length, fs.base_path_length);
        prop_assert_eq!(fb.winding, BigInt::from(fs.winding));
    }

    #[test]
    fn factoring_through_the_cycle_is_unique(f in (1usize..=8).prop_flat_map(arrow_in)) {
        let n = f.model_n();
        match factor_through_cycle(&f) {
            Err(_) => prop_assert!(!f.is_positive()),
            Ok((alpha, w)) => {
                prop_assert_eq!(alpha.disp() + w * n as i64, *f.disp());
                // every (minimal positive arrow, winding) pair reproducing f
                let pairs: Vec<(i64, i64)> = (0..n as i64)
                    .flat_map(|c| (0..=5i64).map(move |w| (c, w)))
                    .filter(|&(c, w)| {
                        let a = model(n).arrow(f.dom(), c).unwrap();
                        a == pmin(model(n), a.dom(), a.cod()).unwrap() && c + w * n as i64 == *f.disp()
                    })
                    .collect();
                prop_assert_eq!(pairs, vec![(*alpha.disp(), w)]);
            }
        }
    }

    #[test]
    fn huge_displacements_factorize_exactly(n in 1usize..=8, digits in "[1-9][0-9]{20,40}", negative in any::<bool>()) {
        let mut disp: BigInt = digits.parse().unwrap();
        if negative {
            disp = -disp;
        }
        let f = model(n).arrow(0, disp.clone()).unwrap();
        let fact = factorize_arrow(&f);
        prop_assert!(fact.base_path_length < n);
        prop_assert_eq!(fact.recompose(n), disp);
    }

    #[test]
    fn minimal_generators_do_not_depend_on_the_scalar(seed in any::<u64>(), n in 1usize..=6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = random_phi_loop(&mut rng, n);
        let y = random_phi_loop(&mut rng, n);
        let small = minimal_generator(&x, &y, GenMode::Epicyclic).unwrap();
        let to_big = |l: &Loop<i64>| Loop::new(l.arrows().iter().map(big).collect()).unwrap();
        let large = minimal_generator(&to_big(&x), &to_big(&y), GenMode::Epicyclic).unwrap();
        prop_assert_eq!(large.0, to_big(&small.0));
        prop_assert_eq!(large.1.len(), small.1.len());
    }

    #[test]
    fn subgroups_are_closed_and_torsion_free(profile in 0usize..6, bound in 1usize..=3) {
        let h = &height_profiles()[profile];
        let sample = h.sample_elements(bound);
        prop_assert!(sample.contains(&Ratio::from_integer(0)) && sample.contains(h.scale()));
        for u in &sample {
            prop_assert!(sample.contains(&-u));
            for v in &sample {
                prop_assert!(h.contains(&(u - v)), "{} - {} left {}", u, v, h);
                // total order with P(x) iff x >= 0
                let p = |q: Ratio<i64>| q >= Ratio::from_integer(0);
                prop_assert!(p(u - v) || p(v - u));
                if p(u - v) && p(v - u) {
                    prop_assert_eq!(u, v);
                }
            }
            if *u != Ratio::from_integer(0) {
                for k in 1..=6 {
                    prop_assert!(u * k != Ratio::from_integer(0));
                }
            }
        }
    }

    #[test]
    fn common_generators_in_big_arithmetic(profile in 0usize..6, seed in any::<u64>()) {
        let h = &height_profiles()[profile];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = random_positive_member(&mut rng, h);
        let y = random_positive_member(&mut rng, h);
        let small = common_generator(h, &x, &y).unwrap();
        let hb: BigSubgroup = h.to_string().parse().unwrap();
        let lift = |q: &Ratio<i64>| BigRational::new(BigInt::from(*q.numer()), BigInt::from(*q.denom()));
        let large = common_generator(&hb, &lift(&x), &lift(&y)).unwrap();
        prop_assert_eq!(large.z, lift(&small.z));
        prop_assert_eq!(large.n, BigInt::from(small.n));
        prop_assert_eq!(large.m, BigInt::from(small.m));
    }

    #[test]
    fn integer_ratios_are_the_homs_of_z(num in -12i64..=12, den in 1i64..=6) {
        let z = RationalSubgroup::<i64>::integers();
        let r = Ratio::new(num, den);
        let accepted = validate_hom(&z, &z, &r).is_ok();
        prop_assert_eq!(accepted, r.is_integer() && num > 0);
    }
}

#[test]
fn successive_terms_are_closed_under_composition_and_inverse() {
    for n in 1..=5usize {
        let x = model(n);
        for mask in 1u32..(1 << n) {
            let objects: BTreeSet<usize> = (0..n).filter(|o| mask & (1 << o) != 0).collect();
            let base = *objects.iter().next().unwrap();
            let z = Loop::new(cyclic_walk(x, base, &objects)).unwrap();
            let representable: Vec<GArrow<i64>> = x
                .enumerate_arrows::<i64>(2 * n)
                .into_iter()
                .filter(|f| represent_arrow(&z, f).is_some())
                .collect();
            for f in &representable {
                let term = represent_arrow(&z, f).unwrap();
                assert_eq!(term.evaluate(&z), *f);
                assert!(
                    represent_arrow(&z, &f.inverse()).is_some(),
                    "X_{n} {f}^-1 against {:?}",
                    z.arrows()
                );
                for g in representable.iter().filter(|g| g.dom() == f.cod()) {
                    let gf = g.compose(f).unwrap();
                    let t = represent_arrow(&z, &gf);
                    assert_eq!(t.map(|t| t.evaluate(&z)), Some(gf), "X_{n} {g} o {f}");
                }
            }
            // exactly the arrows between domains of z
            let expected = x
                .enumerate_arrows::<i64>(2 * n)
                .into_iter()
                .filter(|f| objects.contains(&f.dom()) && objects.contains(&f.cod()))
                .count();
            assert_eq!(representable.len(), expected);
        }
    }
}

#[test]
fn hom_counts_by_degree() {
    for n in 1..=5usize {
        for m in 1..=5usize {
            for k in 1..=3usize {
                let exact = enumerate_homs(n, m, k).len() - enumerate_homs(n, m, k - 1).len();
                assert_eq!(
                    exact as u128,
                    hom_count(n, m, k).unwrap(),
                    "({n},{m}) degree {k}"
                );
            }
        }
    }
    for n in 1..=3usize {
        for m in 1..=3usize {
            let functors = filtered_functors(n, m, 3 * m as i64, false)
                .into_iter()
                .filter(|h| h.images.iter().sum::<i64>() <= 3 * m as i64)
                .count();
            assert_eq!(functors, enumerate_homs(n, m, 3).len(), "({n},{m})");
        }
    }
}

#[test]
fn infinite_heights_are_sampled_to_the_bound() {
    let h = RationalSubgroup::<i64>::with_heights(&[(2, Height::Infinite)]).unwrap();
    let sample = h.sample_elements(3);
    assert!(sample.contains(&Ratio::new(1, 8)));
    assert!(!sample.contains(&Ratio::new(1, 16)));
}
