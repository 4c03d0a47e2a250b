//! Enumeration of small isomorphism types and one-point extensions.

use std::collections::BTreeSet;

use crate::amalgam::Strategy;
use crate::error::{Error, Result};
use crate::structure::{
    for_each_tuple, is_isomorphic, next_subset, validate_family, Elem, Family, FiniteStructure, TupleEntry,
};

/// Refuse enumerations larger than this.
pub const ENUMERATION_LIMIT: u128 = 1 << 22;

/// Entries with relation index at most `rel_cap` and values in `elements`,
/// in order of relation index, then lexicographically.
fn entry_options(elements: &[Elem], rel_cap: u32) -> Vec<TupleEntry> {
    let m = elements.len();
    let mut out = Vec::new();
    for rel in 0..=rel_cap {
        for_each_tuple(m, rel as usize + 1, |pos| {
            out.push(TupleEntry::new(rel, pos.iter().map(|&p| elements[p]).collect()));
        });
    }
    out
}

/// Iterates every assignment of one option per slot, first slot most
/// significant.
fn for_each_choice(radix: &[usize], mut f: impl FnMut(&[usize]) -> Result<()>) -> Result<()> {
    let total: u128 = radix.iter().map(|&r| r as u128).product();
    if total > ENUMERATION_LIMIT {
        return Err(Error::Unsupported(format!(
            "{total} candidate tables; lower the size cap or the relation-index cap"
        )));
    }
    if radix.contains(&0) {
        return Ok(());
    }
    let mut cur = vec![0usize; radix.len()];
    loop {
        f(&cur)?;
        let mut i = radix.len();
        loop {
            if i == 0 {
                return Ok(());
            }
            i -= 1;
            cur[i] += 1;
            if cur[i] < radix[i] {
                break;
            }
            cur[i] = 0;
        }
    }
}

/// Valid one-point extensions of `base` by the point `new`, unlabeled,
/// in a fixed canonical order. Every tuple involving `new` ranges over
/// entries with relation index at most `rel_cap`.
pub fn one_point_extensions(
    strategy: &Strategy,
    base: &FiniteStructure,
    new: Elem,
    rel_cap: u32,
) -> Result<Vec<FiniteStructure>> {
    let base = base.reduct();
    let mut elements = base.elements().to_vec();
    elements.push(new);
    let out = match strategy.family {
        Family::Sets => vec![FiniteStructure::set(elements)?],
        Family::Graphs => {
            let b = base.elements().to_vec();
            let mut out = Vec::new();
            for bits in 0..1u64 << b.len() {
                let mut edges = base.edges();
                for (i, &x) in b.iter().enumerate() {
                    if bits & (1 << i) != 0 {
                        edges.push((x, new));
                        edges.push((new, x));
                    }
                }
                out.push(FiniteStructure::graph(elements.clone(), edges)?);
            }
            out
        }
        Family::Bkl { n } => {
            elements.sort_unstable();
            let options = entry_options(&elements, rel_cap);
            let mut fresh: Vec<Vec<Elem>> = Vec::new();
            for_each_tuple(elements.len(), n, |pos| {
                let t: Vec<Elem> = pos.iter().map(|&p| elements[p]).collect();
                if t.contains(&new) {
                    fresh.push(t);
                }
            });
            let radix = vec![options.len(); fresh.len()];
            let mut out = Vec::new();
            for_each_choice(&radix, |choice| {
                let mut i = 0;
                let s = FiniteStructure::bkl(n, elements.clone(), |t| {
                    if t.contains(&new) {
                        let e = options[choice[i]].clone();
                        i += 1;
                        e
                    } else {
                        base.entry(t).expect("base tuple").clone()
                    }
                })?;
                if validate_family(&s).is_valid() {
                    out.push(s);
                }
                Ok(())
            })?;
            out
        }
    };
    Ok(out)
}

/// Valid structures on `0..size` with relation indices at most `rel_cap`,
/// one per isomorphism type, first representative kept.
pub fn enumerate_types(strategy: &Strategy, size: usize, rel_cap: u32) -> Result<Vec<FiniteStructure>> {
    let elements: Vec<Elem> = (0..size as Elem).collect();
    let mut candidates = Vec::new();
    match strategy.family {
        Family::Sets => candidates.push(FiniteStructure::set(elements)?),
        Family::Graphs => {
            let pairs: Vec<(Elem, Elem)> =
                (0..size as Elem).flat_map(|u| (u + 1..size as Elem).map(move |v| (u, v))).collect();
            for_each_choice(&vec![2; pairs.len()], |choice| {
                let edges = pairs.iter().zip(choice).filter(|(_, &c)| c == 1).flat_map(|(&(u, v), _)| [(u, v), (v, u)]);
                candidates.push(FiniteStructure::graph(elements.clone(), edges)?);
                Ok(())
            })?;
        }
        Family::Bkl { n } => {
            let options = entry_options(&elements, rel_cap);
            let count = size.pow(n as u32);
            for_each_choice(&vec![options.len(); count], |choice| {
                let mut i = 0;
                let s = FiniteStructure::bkl(n, elements.clone(), |_| {
                    i += 1;
                    options[choice[i - 1]].clone()
                })?;
                if validate_family(&s).is_valid() {
                    candidates.push(s);
                }
                Ok(())
            })?;
        }
    }
    let mut reps: Vec<FiniteStructure> = Vec::new();
    for c in candidates {
        if !reps.iter().any(|r| is_isomorphic(r, &c).map(|x| x.is_some()).unwrap_or(false)) {
            reps.push(c);
        }
    }
    Ok(reps)
}

/// Closed subsets of `s` with at most `max` elements, by size then
/// lexicographically.
pub fn closed_subsets(s: &FiniteStructure, max: usize) -> Vec<BTreeSet<Elem>> {
    let m = s.len();
    let mut out = vec![BTreeSet::new()];
    for size in 1..=max.min(m) {
        let mut idx: Vec<usize> = (0..size).collect();
        loop {
            let set: BTreeSet<Elem> = idx.iter().map(|&i| s.elements()[i]).collect();
            if crate::structure::is_closed(s, &set) {
                out.push(set);
            }
            if !next_subset(&mut idx, m) {
                break;
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_element_bkl2_types() {
        let st = Strategy::bkl(2);
        let t = enumerate_types(&st, 1, 0).unwrap();
        assert_eq!(t.len(), 1);
        assert_eq!(enumerate_types(&st, 1, 2).unwrap().len(), 3);
        let empty = FiniteStructure::empty(Family::Bkl { n: 2 });
        assert_eq!(one_point_extensions(&st, &empty, 7, 0).unwrap().len(), 1);
    }

    #[test]
    fn extensions_of_a_point() {
        let st = Strategy::bkl(2);
        let p = FiniteStructure::bkl(2, vec![0], TupleEntry::trivial).unwrap();
        // (0,1), (1,0), (1,1) each pick s_0 from {0, 1}
        assert_eq!(one_point_extensions(&st, &p, 1, 0).unwrap().len(), 8);
        let g = FiniteStructure::graph(vec![0, 1], []).unwrap();
        assert_eq!(one_point_extensions(&Strategy::graphs(), &g, 2, 0).unwrap().len(), 4);
    }

    #[test]
    fn small_graph_types() {
        let counts: Vec<usize> = (0..=4).map(|s| enumerate_types(&Strategy::graphs(), s, 0).unwrap().len()).collect();
        assert_eq!(counts, vec![1, 1, 2, 4, 11]);
    }

    #[test]
    fn n1_two_element_types_satisfy_b3() {
        // Every valid type must have one point generating the other.
        for s in enumerate_types(&Strategy::bkl(1), 2, 0).unwrap() {
            assert!(crate::structure::validate_bkl(&s).unwrap().is_valid());
        }
    }

    #[test]
    fn closed_subsets_of_a_chain() {
        let s = FiniteStructure::bkl(1, vec![0, 1, 2], |t| TupleEntry::new(0, vec![(t[0] + 1).min(2)])).unwrap();
        let c = closed_subsets(&s, 2);
        assert_eq!(c, vec![BTreeSet::new(), [2].into(), [1, 2].into()]);
    }
}
