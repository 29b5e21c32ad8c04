use groupmds::chartheory::{decompose_class_function, ClassFunction};
use groupmds::cyclotomic::{Cyclotomic, Rational};
use groupmds::group::{element_index, enumerate_elements, inverse, multiply, random_element, GroupElement, GroupSpec};
use groupmds::mds::{double_center_squared, eigendecompose, pseudo_embedding, strain};
use groupmds::metric::{GroupMetric, MetricSpec};
use groupmds::rankings::{parse_rankings, permutation_to_ranking, ranking_to_permutation, synthesize_rankings};
use groupmds::spectral::{spectrum_via_characters, trace_from_distances};
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn any_group() -> impl Strategy<Value = GroupSpec> {
    prop_oneof![
        (1usize..=9).prop_map(|n| GroupSpec::symmetric(n).unwrap()),
        (1usize..=16).prop_map(|k| GroupSpec::elementary_abelian_2(k).unwrap()),
        (1usize..=1000).prop_map(|n| GroupSpec::cyclic(n).unwrap()),
    ]
}

fn elements(spec: &GroupSpec, seed: u64, count: usize) -> Vec<GroupElement> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| random_element(spec, &mut rng)).collect()
}

fn rational() -> impl Strategy<Value = Rational> {
    (-30i128..=30, 1i128..=12).prop_map(|(n, d)| Rational::new(n, d))
}

fn cyclotomic() -> impl Strategy<Value = Cyclotomic> {
    prop::sample::select(vec![1usize, 2, 3, 4, 5, 6, 8, 9, 12, 15])
        .prop_flat_map(|m| prop::collection::vec(rational(), m).prop_map(move |c| Cyclotomic::from_coefficients(m, c)))
}

fn small_group() -> impl Strategy<Value = GroupSpec> {
    prop_oneof![
        (1usize..=5).prop_map(|n| GroupSpec::symmetric(n).unwrap()),
        (1usize..=6).prop_map(|k| GroupSpec::elementary_abelian_2(k).unwrap()),
        (1usize..=40).prop_map(|n| GroupSpec::cyclic(n).unwrap()),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn group_axioms(spec in any_group(), seed in any::<u64>()) {
        let v = elements(&spec, seed, 3);
        let (a, b, c) = (&v[0], &v[1], &v[2]);
        let e = spec.identity();
        let ab_c = multiply(&spec, &multiply(&spec, a, b).unwrap(), c).unwrap();
        let a_bc = multiply(&spec, a, &multiply(&spec, b, c).unwrap()).unwrap();
        prop_assert_eq!(ab_c, a_bc);
        prop_assert_eq!(&multiply(&spec, a, &e).unwrap(), a);
        prop_assert_eq!(&multiply(&spec, &e, a).unwrap(), a);
        prop_assert_eq!(multiply(&spec, a, &inverse(&spec, a).unwrap()).unwrap(), e);
        prop_assert!(spec.contains(a));
        if spec.is_abelian() {
            prop_assert_eq!(multiply(&spec, a, b).unwrap(), multiply(&spec, b, a).unwrap());
        }
    }

    #[test]
    fn element_display_round_trips(spec in any_group(), seed in any::<u64>()) {
        let g = &elements(&spec, seed, 1)[0];
        prop_assert_eq!(&spec.parse_element(&g.to_string()).unwrap(), g);
    }

    #[test]
    fn enumeration_index_is_a_bijection(spec in small_group()) {
        let all = enumerate_elements(&spec).unwrap();
        prop_assert_eq!(all.len() as u128, spec.order());
        for (i, g) in all.iter().enumerate() {
            prop_assert_eq!(element_index(&spec, g).unwrap(), i);
        }
    }

    #[test]
    fn metric_axioms_and_bi_invariance(spec in any_group(), seed in any::<u64>()) {
        let metric = MetricSpec::natural_for(&spec);
        let v = elements(&spec, seed, 4);
        let (f, g, h, x) = (&v[0], &v[1], &v[2], &v[3]);
        let d = |a: &GroupElement, b: &GroupElement| metric.distance(&spec, a, b).unwrap();
        prop_assert_eq!(d(g, g), 0);
        prop_assert_eq!(d(g, h), d(h, g));
        prop_assert!(d(g, h) <= d(g, x) + d(x, h));
        if g != h {
            prop_assert!(d(g, h) > 0);
        }
        let left = d(&multiply(&spec, f, g).unwrap(), &multiply(&spec, f, h).unwrap());
        let right = d(&multiply(&spec, g, f).unwrap(), &multiply(&spec, h, f).unwrap());
        prop_assert_eq!(left, d(g, h));
        prop_assert_eq!(right, d(g, h));
    }

    #[test]
    fn cyclotomic_ring_laws(a in cyclotomic(), b in cyclotomic(), c in cyclotomic()) {
        prop_assert_eq!(&(&a + &b) - &b, a.clone());
        prop_assert_eq!(&a * &b, &b * &a);
        prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
        prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
        prop_assert!((&a - &a).is_zero());
    }

    #[test]
    fn cyclotomic_embedding_is_a_homomorphism(a in cyclotomic(), b in cyclotomic()) {
        let sum = (&a + &b).to_complex() - (a.to_complex() + b.to_complex());
        let prod = (&a * &b).to_complex() - a.to_complex() * b.to_complex();
        prop_assert!(sum.norm() < 1e-9 && prod.norm() < 1e-7);
        prop_assert!((a.conj().to_complex() - a.to_complex().conj()).norm() < 1e-9);
    }

    #[test]
    fn cyclotomic_normal_forms(a in cyclotomic(), k in 1usize..=4) {
        let lifted = a.lift(a.order() * k);
        prop_assert_eq!(&lifted, &a);
        prop_assert_eq!(lifted.canonical(), a.lift(a.order() * k).canonical());
        let s = a.clone().simplified();
        prop_assert_eq!(&s, &a);
        prop_assert_eq!(s.to_rational().is_some(), a.to_rational().is_some());
        if let Some(r) = a.to_rational() {
            prop_assert!((a.to_complex().re - r.numer().to_owned() as f64 / *r.denom() as f64).abs() < 1e-9);
            prop_assert!(a.to_complex().im.abs() < 1e-9);
        }
    }

    #[test]
    fn roots_of_unity(m in 1usize..=60, p in -100i64..100) {
        let z = Cyclotomic::root_of_unity(m, p);
        let mut acc = Cyclotomic::one();
        for _ in 0..m {
            acc = &acc * &z;
        }
        prop_assert_eq!(acc, Cyclotomic::one());
        prop_assert_eq!(&z * &z.conj(), Cyclotomic::one());
    }

    #[test]
    fn decomposition_reconstructs(spec in small_group(), seed in any::<u64>()) {
        let classes = groupmds::chartheory::class_sizes(&spec).len();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let values: Vec<Rational> =
            (0..classes).map(|_| Rational::new(rand::Rng::gen_range(&mut rng, -40..40), rand::Rng::gen_range(&mut rng, 1..9))).collect();
        let f = ClassFunction::from_rationals(spec, values).unwrap();
        let dec = decompose_class_function(&f).unwrap();
        prop_assert_eq!(dec.reconstruct().unwrap(), f);
    }

    #[test]
    fn spectrum_accounts_for_every_direction(spec in small_group()) {
        let metric = MetricSpec::natural_for(&spec);
        let s = spectrum_via_characters(&spec, &metric).unwrap();
        let total: u128 = s.entries.iter().map(|e| e.multiplicity).sum();
        prop_assert_eq!(total + 1, spec.order());
        prop_assert_eq!(s.trace(), Cyclotomic::from_rational(trace_from_distances(&spec, &metric, 1 << 12).unwrap()));
        let keys: Vec<f64> = s.entries.iter().filter(|e| !e.eigenvalue.is_zero()).map(|e| e.eigenvalue.to_f64()).collect();
        prop_assert!(keys.windows(2).all(|w| w[0] > w[1]));
        for e in &s.entries {
            prop_assert!(e.eigenvalue.to_complex().im.abs() < 1e-9);
        }
    }

    #[test]
    fn strain_and_reconstruction_on_random_points(
        points in prop::collection::vec(prop::collection::vec(-5.0f64..5.0, 4), 3..12),
        k in 0usize..12,
    ) {
        let n = points.len();
        let sq = DMatrix::from_fn(n, n, |i, j| points[i].iter().zip(&points[j]).map(|(a, b)| (a - b) * (a - b)).sum::<f64>());
        let kernel = double_center_squared(&sq);
        let rows = kernel.matrix().row_sum();
        prop_assert!(rows.amax() < 1e-9);
        let dec = eigendecompose(&kernel).unwrap();
        let k = k.min(n);
        let residual = (kernel.matrix() - dec.rebuild_top(k)).norm_squared();
        prop_assert!((strain(&dec, k) - residual).abs() < 1e-8 * (1.0 + residual));
        let full = pseudo_embedding(&dec, n);
        for i in 0..n {
            for j in 0..n {
                prop_assert!((full.pseudo_distance_sq(i, j) - sq[(i, j)]).abs() < 1e-8 * (1.0 + sq[(i, j)]));
            }
        }
    }

    #[test]
    fn ranking_permutation_round_trip(n in 1usize..=12, seed in any::<u64>()) {
        let spec = GroupSpec::symmetric(n).unwrap();
        let g = &elements(&spec, seed, 1)[0];
        let ranking = permutation_to_ranking(g).unwrap();
        let reference: Vec<usize> = (1..=n).collect();
        prop_assert_eq!(&ranking_to_permutation(&ranking, &reference).unwrap(), g);
    }

    #[test]
    fn synthetic_text_round_trips(n in 2usize..=9, rows in 1usize..200, seed in any::<u64>()) {
        let data = synthesize_rankings(n, rows, seed).unwrap();
        prop_assert_eq!(data.total_count(), rows as u64);
        let text = data.to_text();
        prop_assert_eq!(parse_rankings(&text).unwrap().to_text(), text);
    }
}
