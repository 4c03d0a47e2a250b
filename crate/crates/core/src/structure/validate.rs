use std::collections::HashMap;

use super::closure::independent_positions;
use super::{Body, FiniteStructure};
use crate::error::{Error, Result};
use crate::report::{ValidationReport, Violation};

/// Next (size)-subset of `0..m` in lexicographic order.
pub(crate) fn next_subset(idx: &mut [usize], m: usize) -> bool {
    let k = idx.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if idx[i] < m - k + i {
            idx[i] += 1;
            for j in i + 1..k {
                idx[j] = idx[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Checks axioms (B1)-(B4) on a BKL structure.
///
/// (B1) and (B2) hold by representation and are re-checked on the stored
/// entries. (B3) reports the lexicographically first substructure-independent
/// set of size n + 1. (B4) holds for every finite structure.
pub fn validate_bkl(s: &FiniteStructure) -> Result<ValidationReport> {
    let Body::Bkl { n, table } = &s.body else {
        return Err(Error::FamilyMismatch { left: s.family().to_string(), right: "bkl".into() });
    };
    let n = *n;
    let mut report = ValidationReport::default();
    let mut first_use: HashMap<u32, usize> = HashMap::new();
    for (i, &slot) in table.slots.iter().enumerate() {
        first_use.entry(slot).or_insert(i);
    }
    let mut pos = vec![0; n];
    for (slot, entry) in table.entries.iter().enumerate() {
        let Some(&at) = first_use.get(&(slot as u32)) else { continue };
        super::decode(at, s.len(), &mut pos);
        let tuple = pos.iter().map(|&p| s.elements()[p]).collect::<Vec<_>>();
        if entry.values.len() != entry.rel as usize + 1 {
            report.push(Violation::B1 { tuple: tuple.clone() });
        }
        if entry.values.iter().any(|v| !s.contains(*v)) {
            report.push(Violation::B2 { tuple });
        }
    }
    let m = s.len();
    if m > n {
        let mut idx: Vec<usize> = (0..=n).collect();
        loop {
            if independent_positions(s, &idx) {
                report.push(Violation::B3 { independent: idx.iter().map(|&p| s.elements()[p]).collect() });
                break;
            }
            if !next_subset(&mut idx, m) {
                break;
            }
        }
    }
    Ok(report)
}

/// Axiom (A1): distinct elements carry distinct label sets.
pub fn validate_labels(s: &FiniteStructure) -> Result<ValidationReport> {
    let labels = s.labels().ok_or_else(|| Error::Unsupported("structure carries no labels".into()))?;
    let mut report = ValidationReport::default();
    let mut seen = HashMap::new();
    for (p, set) in labels.sets().iter().enumerate() {
        if let Some(&q) = seen.get(set) {
            report.push(Violation::A1 { left: s.elements()[q], right: s.elements()[p] });
            break;
        }
        seen.insert(*set, p);
    }
    Ok(report)
}

/// Symmetric and irreflexive adjacency.
pub fn validate_graph(s: &FiniteStructure) -> Result<ValidationReport> {
    if !matches!(s.body, Body::Graph { .. }) {
        return Err(Error::FamilyMismatch { left: s.family().to_string(), right: "graphs".into() });
    }
    let mut report = ValidationReport::default();
    let m = s.len();
    for i in 0..m {
        if s.adj_at(i, i) {
            report.push(Violation::GraphLoop { vertex: s.elements()[i] });
        }
        for j in 0..m {
            if s.adj_at(i, j) && !s.adj_at(j, i) {
                report.push(Violation::GraphAsymmetric { from: s.elements()[i], to: s.elements()[j] });
            }
        }
    }
    Ok(report)
}

/// Membership in the structure's own family, plus (A1) when labeled.
pub fn validate_family(s: &FiniteStructure) -> ValidationReport {
    let mut report = match &s.body {
        Body::Bkl { .. } => validate_bkl(s).expect("bkl body"),
        Body::Set => ValidationReport::default(),
        Body::Graph { .. } => validate_graph(s).expect("graph body"),
    };
    if s.is_labeled() {
        report.extend(validate_labels(s).expect("labeled"));
    }
    report
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeMap;

    use super::*;
    use crate::structure::{Family, LabelSet, TupleEntry};

    #[test]
    fn empty_structure_is_valid() {
        for n in 1..4 {
            assert!(validate_bkl(&FiniteStructure::empty(Family::Bkl { n })).unwrap().is_valid());
        }
    }

    #[test]
    fn two_self_generated_points_violate_b3_for_n1() {
        let s = FiniteStructure::bkl(1, vec![0, 1], TupleEntry::trivial).unwrap();
        let r = validate_bkl(&s).unwrap();
        assert_eq!(r.violations, vec![Violation::B3 { independent: vec![0, 1] }]);
    }

    #[test]
    fn n1_point_generating_the_other_is_valid() {
        let s = FiniteStructure::bkl(1, vec![0, 1], |t| TupleEntry::new(1, vec![t[0], 1 - t[0]])).unwrap();
        assert!(validate_bkl(&s).unwrap().is_valid());
    }

    #[test]
    fn label_collisions() {
        let one = FiniteStructure::set(vec![7]).unwrap();
        let l = one.with_labels(4, &[(7, LabelSet::EMPTY)].into()).unwrap();
        assert!(validate_labels(&l).unwrap().is_valid());

        let two = FiniteStructure::set(vec![1, 2]).unwrap();
        let same: BTreeMap<_, _> = [(1, LabelSet::from_indices([0])), (2, LabelSet::from_indices([0]))].into();
        let r = validate_labels(&two.clone().with_labels(4, &same).unwrap()).unwrap();
        assert_eq!(r.violations, vec![Violation::A1 { left: 1, right: 2 }]);

        let distinct: BTreeMap<_, _> = [(1, LabelSet::from_indices([0])), (2, LabelSet::from_indices([0, 1]))].into();
        assert!(validate_labels(&two.clone().with_labels(4, &distinct).unwrap()).unwrap().is_valid());

        let out_of_range: BTreeMap<_, _> = [(1, LabelSet::from_indices([5])), (2, LabelSet::EMPTY)].into();
        assert!(matches!(two.with_labels(4, &out_of_range), Err(Error::LabelOutOfRange { .. })));
    }

    #[test]
    fn graph_checks() {
        let g = FiniteStructure::graph(vec![0, 1, 2], [(0, 1), (1, 0), (1, 1), (1, 2)]).unwrap();
        let r = validate_graph(&g).unwrap();
        assert!(r.violations.contains(&Violation::GraphLoop { vertex: 1 }));
        assert!(r.violations.contains(&Violation::GraphAsymmetric { from: 1, to: 2 }));
        assert_eq!(r.violations.len(), 2);
    }
}
