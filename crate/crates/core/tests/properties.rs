mod common;

use std::collections::BTreeSet;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

use common::{injections, oracle_embedding};
use cube_amalgam::io::{canonical_bytes, parse_structure, serialize_structure, structure_to_value};
use cube_amalgam::random::{random_cube, random_extension, random_structure, RandomOptions};
use cube_amalgam::witness::check_absorption;
use cube_amalgam::{
    complete_bkl, disjoint_amalgamate, extend_cube, find_embeddings, generated_substructure, satisfies_theta, theta,
    validate_cube, validate_disjoint, validate_disjoint_embedding, validate_family, Elem, Embedding, Face, IdAllocator,
    Shape, Strategy,
};

fn strategies() -> Vec<Strategy> {
    vec![
        Strategy::bkl(1),
        Strategy::bkl(2),
        Strategy::bkl(3),
        Strategy::sets().labeled(4),
        Strategy::graphs(),
        Strategy::bkl(2).labeled(5),
    ]
}

/// Reverses every array in a document, so the input is valid but not canonical.
fn scramble(v: &mut Value) {
    match v {
        Value::Array(a) => {
            a.reverse();
            a.iter_mut().for_each(scramble);
        }
        Value::Object(m) => m.values_mut().for_each(scramble),
        _ => {}
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn documents_round_trip(seed in any::<u64>(), which in 0usize..6, size in 0usize..5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let st = strategies()[which];
        let ids: Vec<Elem> = (0..size as Elem).map(|i| 3 * i + 1).collect();
        let s = random_structure(&mut rng, &st, ids, 2).unwrap();
        let bytes = serialize_structure(&s);
        prop_assert_eq!(&parse_structure(&bytes).unwrap(), &s);
        let mut doc = structure_to_value(&s);
        let canonical = canonical_bytes(&doc);
        // `s` lists are tuple values and keep their order
        if let Some(Value::Array(ts)) = doc.get_mut("tuples") {
            ts.reverse();
        }
        if let Some(Value::Array(es)) = doc.get_mut("elements") {
            es.reverse();
            es.iter_mut().for_each(|e| scramble(e));
        }
        let compact = serde_json::to_vec(&doc).unwrap();
        prop_assert_eq!(serialize_structure(&parse_structure(&compact).unwrap()), canonical);
    }

    #[test]
    fn theta_agrees_with_embeddings(seed in any::<u64>(), n in 1usize..3, sa in 0usize..4, sb in 1usize..5, labeled in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let st = if labeled { Strategy::bkl(n).labeled(2) } else { Strategy::bkl(n) };
        let a = random_structure(&mut rng, &st, (0..sa as Elem).collect(), 1).unwrap();
        let b = random_structure(&mut rng, &st, (10..10 + sb as Elem).collect(), 1).unwrap();
        let t = theta(&a);
        for map in injections(&a, &b) {
            let assignment: Vec<Elem> = map.iter().map(|p| p.1).collect();
            prop_assert_eq!(satisfies_theta(&b, &t, &assignment).unwrap(), oracle_embedding(&a, &b, &map));
        }
    }

    #[test]
    fn search_finds_exactly_the_embeddings(seed in any::<u64>(), which in 0usize..6, sa in 0usize..4, sb in 0usize..5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let st = strategies()[which];
        let a = random_structure(&mut rng, &st, (0..sa as Elem).collect(), 1).unwrap();
        let b = random_structure(&mut rng, &st, (0..sb as Elem).collect(), 1).unwrap();
        let found: BTreeSet<Vec<(Elem, Elem)>> =
            find_embeddings(&a, &b, usize::MAX).unwrap().iter().map(|e| e.pairs().collect()).collect();
        let expected: BTreeSet<Vec<(Elem, Elem)>> =
            injections(&a, &b).into_iter().filter(|m| oracle_embedding(&a, &b, m)).collect();
        prop_assert_eq!(found, expected);
    }

    #[test]
    fn completion_is_valid_and_keeps_the_boundary(seed in any::<u64>(), n in 1usize..4, k in 1usize..4) {
        prop_assume!(k <= n);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut ids = IdAllocator::new();
        let p = random_cube(&mut rng, &Strategy::bkl(n), k, Shape::Boundary, RandomOptions::default(), &mut ids).unwrap();
        let full = complete_bkl(&p, n, &mut ids).unwrap();
        prop_assert!(validate_family(full.face(full.top()).unwrap()).is_valid());
        prop_assert!(validate_cube(&full).is_valid());
        prop_assert!(validate_disjoint(&full).is_valid());
        prop_assert_eq!(full.boundary(), p);
        if k == n && n >= 2 {
            prop_assert!(check_absorption(&full).unwrap().violations.is_empty());
        }
    }

    #[test]
    fn other_families_amalgamate_in_any_dimension(seed in any::<u64>(), k in 1usize..5, graphs in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let st = if graphs { Strategy::graphs().labeled(10) } else { Strategy::sets().labeled(10) };
        let mut ids = IdAllocator::new();
        let p = random_cube(&mut rng, &st, k, Shape::Boundary, RandomOptions::default(), &mut ids).unwrap();
        let full = disjoint_amalgamate(&st, &p, &mut ids).unwrap();
        prop_assert!(validate_cube(&full).is_valid() && validate_disjoint(&full).is_valid());
        prop_assert!(validate_family(full.face(full.top()).unwrap()).is_valid());
        prop_assert_eq!(full.boundary(), p);
    }

    #[test]
    fn extension_respects_the_cube(seed in any::<u64>(), k in 1usize..3, mask in 0u16..4, extra in 1usize..3) {
        let rho = Face(mask & ((1 << k) - 1));
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let st = Strategy::bkl(3);
        let mut ids = IdAllocator::new();
        let c = random_cube(&mut rng, &st, k, Shape::Full, RandomOptions::default(), &mut ids).unwrap();
        let a = c.face(rho).unwrap();
        let b = random_extension(&mut rng, &st, a, extra, &mut BTreeSet::new(), 2, &mut ids).unwrap();
        let h = Embedding::identity(a.elements());
        let (d, hs) = extend_cube(&st, &c, rho, &h, &b, &mut ids).unwrap();
        prop_assert!(validate_cube(&d).is_valid() && validate_disjoint(&d).is_valid());
        prop_assert!(validate_disjoint_embedding(&c, &d, &hs).unwrap().is_valid());
        prop_assert_eq!(d.face(rho).unwrap(), &b);
        for (tau, face) in c.faces() {
            if !rho.is_subset(tau) {
                prop_assert_eq!(d.face(tau).unwrap(), face);
            }
        }
    }

    #[test]
    fn labeled_embeddings_are_unique(seed in any::<u64>(), which in 0usize..3, sa in 0usize..4, sb in 0usize..6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let st = [Strategy::bkl(2), Strategy::sets(), Strategy::graphs()][which].labeled(3);
        let b = random_structure(&mut rng, &st, (0..sb as Elem).collect(), 1).unwrap();
        let a = random_structure(&mut rng, &st, (20..20 + sa as Elem).collect(), 1).unwrap();
        prop_assert!(find_embeddings(&a, &b, usize::MAX).unwrap().len() <= 1);
        if sa <= sb {
            let keep: BTreeSet<Elem> = generated_substructure(&b, &b.elements()[..sa].iter().copied().collect());
            let sub = b.restrict(&keep).unwrap();
            prop_assert_eq!(find_embeddings(&sub, &b, usize::MAX).unwrap().len(), 1);
        }
    }
}
