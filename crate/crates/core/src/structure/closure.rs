use std::collections::BTreeSet;

use super::{decode, encode, Body, Elem, FiniteStructure};

/// Closure of `seeds` (given as positions) under the function symbols.
///
/// Returns the membership vector over positions. Stops early once `stop`
/// becomes a member, if given.
pub(crate) fn closure_positions(s: &FiniteStructure, seeds: &[usize], stop: Option<usize>) -> Vec<bool> {
    let m = s.len();
    let mut member = vec![false; m];
    let mut order: Vec<usize> = Vec::new();
    for &p in seeds {
        if !member[p] {
            member[p] = true;
            order.push(p);
        }
    }
    let Body::Bkl { n, .. } = &s.body else { return member };
    let n = *n;
    if stop.is_some_and(|t| member[t]) {
        return member;
    }
    // Tuples over order[..done] have been processed already.
    let mut done = 0;
    let mut idx = vec![0usize; n];
    let mut pos = vec![0usize; n];
    while done < order.len() {
        let len = order.len();
        let total = len.pow(n as u32);
        for t in 0..total {
            decode(t, len, &mut idx);
            if idx.iter().all(|&i| i < done) {
                continue;
            }
            for (p, &i) in pos.iter_mut().zip(idx.iter()) {
                *p = order[i];
            }
            let entry = s.entry_at(encode(&pos, m));
            for &v in &entry.values {
                let pv = s.position(v).expect("closed table");
                if !member[pv] {
                    member[pv] = true;
                    order.push(pv);
                    if stop == Some(pv) {
                        return member;
                    }
                }
            }
        }
        done = len;
    }
    member
}

/// Least superset of `seeds` closed under every `s_i`, sorted.
///
/// Seeds that are not elements are ignored. For sets and graphs the
/// closure of a seed set is itself.
pub fn generated_substructure(s: &FiniteStructure, seeds: &BTreeSet<Elem>) -> BTreeSet<Elem> {
    let pos: Vec<usize> = seeds.iter().filter_map(|&e| s.position(e)).collect();
    closure_positions(s, &pos, None).into_iter().enumerate().filter(|(_, m)| *m).map(|(p, _)| s.elements()[p]).collect()
}

pub fn is_closed(s: &FiniteStructure, set: &BTreeSet<Elem>) -> bool {
    &generated_substructure(s, set) == set
}

pub(crate) fn independent_positions(s: &FiniteStructure, cand: &[usize]) -> bool {
    let mut rest = Vec::with_capacity(cand.len());
    for (i, &b) in cand.iter().enumerate() {
        rest.clear();
        rest.extend(cand.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, &p)| p));
        if closure_positions(s, &rest, Some(b))[b] {
            return false;
        }
    }
    true
}

/// True iff no member of `candidate` lies in the substructure generated by
/// the others. Ids that are not elements are ignored.
pub fn independence_check(s: &FiniteStructure, candidate: &BTreeSet<Elem>) -> bool {
    let pos: Vec<usize> = candidate.iter().filter_map(|&e| s.position(e)).collect();
    independent_positions(s, &pos)
}
