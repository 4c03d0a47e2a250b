#![allow(dead_code)]

use cube_amalgam::{Elem, Family, FiniteStructure};

/// Embedding check straight from the definition: injective, label sets
/// preserved, edges preserved and reflected, and every tuple's relation
/// index and function values carried over.
pub fn oracle_embedding(a: &FiniteStructure, b: &FiniteStructure, map: &[(Elem, Elem)]) -> bool {
    let f = |x: Elem| map.iter().find(|p| p.0 == x).map(|p| p.1);
    if a.elements().iter().any(|&x| f(x).map_or(true, |y| !b.contains(y))) {
        return false;
    }
    let mut image: Vec<Elem> = a.elements().iter().map(|&x| f(x).unwrap()).collect();
    image.sort_unstable();
    image.dedup();
    if image.len() != a.len() {
        return false;
    }
    if a.elements().iter().any(|&x| a.label_set(x) != b.label_set(f(x).unwrap())) {
        return false;
    }
    match a.family() {
        Family::Sets => true,
        Family::Graphs => a
            .elements()
            .iter()
            .all(|&u| a.elements().iter().all(|&v| a.has_edge(u, v) == b.has_edge(f(u).unwrap(), f(v).unwrap()))),
        Family::Bkl { .. } => a.tuples().into_iter().all(|(t, e)| {
            let ft: Vec<Elem> = t.iter().map(|&x| f(x).unwrap()).collect();
            let Some(be) = b.entry(&ft) else { return false };
            be.rel == e.rel && (0..=e.rel as usize).all(|i| b.s(i, &ft) == Some(f(a.s(i, &t).unwrap()).unwrap()))
        }),
    }
}

/// All injective maps from `a`'s elements into `b`'s.
pub fn injections(a: &FiniteStructure, b: &FiniteStructure) -> Vec<Vec<(Elem, Elem)>> {
    fn go(a: &[Elem], b: &[Elem], cur: &mut Vec<(Elem, Elem)>, out: &mut Vec<Vec<(Elem, Elem)>>) {
        if cur.len() == a.len() {
            out.push(cur.clone());
            return;
        }
        for &y in b {
            if cur.iter().all(|p| p.1 != y) {
                cur.push((a[cur.len()], y));
                go(a, b, cur, out);
                cur.pop();
            }
        }
    }
    let mut out = Vec::new();
    go(a.elements(), b.elements(), &mut Vec::new(), &mut out);
    out
}
