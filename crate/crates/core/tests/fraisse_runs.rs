use std::collections::BTreeSet;

use cube_amalgam::fraisse::{axiom_instances, coverage_of, run, RunConfig, RunState, Status};
use cube_amalgam::io::{cube_to_value, disjoint_embedding_to_value};
use cube_amalgam::{
    find_embeddings, find_embeddings_extending, is_isomorphic, is_reducible, validate_cube, validate_disjoint,
    validate_disjoint_embedding, Elem, Face, Strategy,
};

fn config(strategy: Strategy, k: usize, rounds: usize, seed: u64) -> RunConfig {
    let mut c = RunConfig::new(strategy, k, rounds, seed);
    c.keep_stages = true;
    c
}

#[test]
fn stages_are_linked_by_disjoint_embeddings() {
    let s = run(config(Strategy::bkl(3).labeled(8), 2, 2, 1)).unwrap();
    assert_eq!(s.stages.len(), s.history.len() + 1);
    for (i, st) in s.history.iter().enumerate() {
        let (a, b) = (&s.stages[i], &s.stages[i + 1]);
        assert!(validate_cube(b).is_valid() && validate_disjoint(b).is_valid());
        assert!(validate_disjoint_embedding(a, b, &st.h).unwrap().is_valid());
        for (tau, face) in a.faces() {
            if !st.rho.is_subset(tau) {
                assert_eq!(face, b.face(tau).unwrap());
                assert!(st.h.get(tau).unwrap().is_identity());
            } else {
                assert!(b.face(tau).unwrap().len() > face.len());
            }
        }
    }
}

#[test]
fn first_step_touches_only_faces_above_rho() {
    let mut s = RunState::new(config(Strategy::sets(), 2, 1, 0)).unwrap();
    let task = s.enumerate_tasks().unwrap().into_iter().find(|t| t.rho == Face(2)).unwrap();
    s.step(&task).unwrap();
    let sizes: Vec<usize> = Face::all(2).into_iter().map(|f| s.cube.face(f).unwrap().len()).collect();
    assert_eq!(sizes, vec![0, 0, 1, 1]);
}

/// Recomputes every chain from the stored stages.
fn check_chains(s: &RunState) {
    for c in &s.chains {
        for (j, (&x, &y)) in c.xs.iter().zip(&c.ys).enumerate() {
            let cube = &s.stages[c.birth + j];
            let top = cube.top();
            assert_eq!(cube.map(c.sigma, top).unwrap().get(x), Some(y));
            assert!(!cube.image(c.tau, top).contains(&y), "chain {} {} at stage {}", c.sigma, c.tau, c.birth + j);
        }
        assert_eq!(c.birth + c.xs.len() - 1, s.stage());
    }
}

#[test]
fn witness_chains_hold_at_every_stage() {
    for (st, k) in
        [(Strategy::bkl(2), 1), (Strategy::bkl(3).labeled(8), 2), (Strategy::sets(), 3), (Strategy::graphs(), 2)]
    {
        let s = run(config(st, k, 3, 9)).unwrap();
        assert!(s.violations.is_empty(), "{:?}", s.violations);
        check_chains(&s);
    }
}

#[test]
fn certificates() {
    let k1 = run(config(Strategy::bkl(2), 1, 3, 2)).unwrap();
    let c = k1.certify_irreducible().unwrap();
    assert_eq!(c.status, Status::Pass);
    assert_eq!(c.pairs.len(), 1);
    assert_eq!((c.pairs[0].sigma, c.pairs[0].tau), (Face(1), Face::EMPTY));
    assert!(is_reducible(&k1.cube).unwrap().is_none());

    let k2 = run(config(Strategy::bkl(3), 2, 3, 2)).unwrap();
    let c = k2.certify_irreducible().unwrap();
    assert_eq!(c.status, Status::Pass);
    // every ordered pair of faces with σ ⊄ τ
    let expected = Face::all(2)
        .iter()
        .flat_map(|&s| Face::all(2).into_iter().map(move |t| (s, t)))
        .filter(|(s, t)| !s.is_subset(*t))
        .count();
    assert_eq!(c.pairs.len(), expected);
    assert!(c.verify(&k2.cube));

    let sets = run(config(Strategy::sets(), 3, 2, 2)).unwrap();
    assert_eq!(sets.certify_irreducible().unwrap().status, Status::Pass);
    let top = sets.cube.top();
    for (s, _) in sets.cube.faces() {
        for (t, _) in sets.cube.faces() {
            if !s.is_subset(t) {
                assert!(!sets.cube.image(s, top).is_subset(&sets.cube.image(t, top)));
            }
        }
    }
}

#[test]
fn tampered_certificate_fails_verification() {
    let s = run(config(Strategy::sets(), 2, 1, 4)).unwrap();
    let mut c = s.certify_irreducible().unwrap();
    let bottom = s.cube.image(Face::EMPTY, s.cube.top());
    c.pairs[0].y = Some(*bottom.iter().next().unwrap());
    assert!(!c.verify(&s.cube));
}

#[test]
fn growth_per_round() {
    let s = run(config(Strategy::bkl(2), 1, 3, 3)).unwrap();
    for round in 0..3 {
        let touched: BTreeSet<Face> = s.history.iter().filter(|h| h.round == round).map(|h| h.rho).collect();
        let first = s.history.iter().position(|h| h.round == round).unwrap();
        let last = s.history.iter().rposition(|h| h.round == round).unwrap() + 1;
        for f in touched {
            assert!(s.stages[last].face(f).unwrap().len() > s.stages[first].face(f).unwrap().len());
        }
    }
}

#[test]
fn runs_are_deterministic() {
    let a = run(config(Strategy::bkl(3).labeled(6), 2, 2, 11)).unwrap();
    let b = run(config(Strategy::bkl(3).labeled(6), 2, 2, 11)).unwrap();
    assert_eq!(cube_to_value(&a.cube), cube_to_value(&b.cube));
    let h = |s: &RunState| s.history.iter().map(|x| disjoint_embedding_to_value(&x.h)).collect::<Vec<_>>();
    assert_eq!(h(&a), h(&b));
    assert_eq!(a.chains, b.chains);
}

fn two_orders(st: Strategy) -> (RunState, RunState) {
    let mut base = RunState::new(RunConfig::new(st, 2, 1, 1)).unwrap();
    base.run_round().unwrap();
    let tasks = base.enumerate_tasks().unwrap();
    let pick = |f: Face| tasks.iter().find(|t| t.rho == f && t.base.is_empty()).unwrap().clone();
    let (t1, t2) = (pick(Face(1)), pick(Face(2)));
    let mut a = base.clone();
    a.step(&t1).unwrap();
    a.step(&t2).unwrap();
    let mut b = base;
    b.step(&t2).unwrap();
    b.step(&t1).unwrap();
    (a, b)
}

#[test]
fn independent_steps_commute_for_sets_and_graphs() {
    for st in [Strategy::sets(), Strategy::graphs()] {
        let (a, b) = two_orders(st);
        for (f, x) in a.cube.faces() {
            assert!(is_isomorphic(x, b.cube.face(f).unwrap()).unwrap().is_some(), "{st:?} face {f}");
        }
    }
}

#[test]
fn independent_bkl_steps_agree_on_shape() {
    // fresh tuples enumerate the top in id order, so the two orders give
    // different tables; sizes and the untouched bottom still agree
    let (a, b) = two_orders(Strategy::bkl(3));
    for (f, x) in a.cube.faces() {
        assert_eq!(x.len(), b.cube.face(f).unwrap().len());
    }
    assert!(is_isomorphic(a.cube.face(Face::EMPTY).unwrap(), b.cube.face(Face::EMPTY).unwrap()).unwrap().is_some());
}

#[test]
fn coverage_before_and_after_one_round() {
    let empty = RunState::new(RunConfig::new(Strategy::bkl(2), 1, 1, 0)).unwrap();
    let r = empty.coverage_report().unwrap();
    assert_eq!(r.instance_count, 1);
    assert!(r.faces.iter().all(|f| !f.instances[0].realized));

    let s = run(RunConfig::new(Strategy::bkl(2), 1, 1, 0)).unwrap();
    let r = s.coverage_report().unwrap();
    assert!(r.faces.iter().all(|f| f.instances.iter().all(|i| i.a_size > 0 || i.realized)));
}

#[test]
fn realized_fraction_is_nondecreasing() {
    for (st, cap) in [(Strategy::bkl(2), 1), (Strategy::sets(), 2), (Strategy::sets(), 3)] {
        let mut c = RunConfig::new(st, 1, 4, 5);
        c.cap = cap;
        c.keep_stages = true;
        let s = run(c.clone()).unwrap();
        let instances = axiom_instances(&c).unwrap();
        let mut prev = 0.0;
        for round in 1..=4 {
            let end = s.history.iter().rposition(|h| h.round == round - 1).unwrap() + 1;
            let f = coverage_of(&s.stages[end], &instances, end).unwrap().fraction();
            assert!(f >= prev, "{st:?} cap {cap}: round {round} dropped to {f} from {prev}");
            prev = f;
        }
    }
}

#[test]
fn extended_realizations_stay_extended() {
    let mut c = RunConfig::new(Strategy::graphs(), 1, 3, 8);
    c.cap = 2;
    c.budget = Some(8);
    c.keep_stages = true;
    let s = run(c.clone()).unwrap();
    let instances = axiom_instances(&c).unwrap();
    for (i, st) in s.history.iter().enumerate() {
        for (f, face) in s.stages[i].faces() {
            let next = s.stages[i + 1].face(f).unwrap();
            let h = st.h.get(f).unwrap();
            for inst in &instances {
                for e in find_embeddings(&inst.a, face, usize::MAX).unwrap() {
                    if find_embeddings_extending(&inst.b, face, &e, 1).unwrap().is_empty() {
                        continue;
                    }
                    let moved = e.then(h).unwrap();
                    assert!(!find_embeddings_extending(&inst.b, next, &moved, 1).unwrap().is_empty());
                }
            }
        }
    }
}

#[test]
fn element_cap_aborts_with_partial_state() {
    let mut c = RunConfig::new(Strategy::sets(), 2, 5, 0);
    c.max_elements = Some(5);
    let s = run(c).unwrap();
    assert!(s.aborted.is_some());
    let top: Vec<Elem> = s.cube.face(s.cube.top()).unwrap().elements().to_vec();
    assert!(top.len() >= 5 && top.len() < 8);
}
