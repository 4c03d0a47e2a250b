//! Set colimits of partial cubes and disjoint amalgamation.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::cube::{validate_cube, validate_disjoint, CubeDiagram, Face, Shape};
use crate::error::{Error, Result};
use crate::report::ValidationReport;
use crate::structure::{validate_family, Elem, Embedding, Family, FiniteStructure, LabelSet, TupleEntry};

/// Monotone source of fresh element ids.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IdAllocator {
    next: Elem,
}

impl IdAllocator {
    pub fn new() -> Self {
        IdAllocator { next: 0 }
    }

    /// An allocator whose ids exceed every id used in `structures`.
    pub fn above<'a>(structures: impl IntoIterator<Item = &'a FiniteStructure>) -> Self {
        let mut a = IdAllocator::new();
        for s in structures {
            if let Some(m) = s.max_id() {
                a.observe(m);
            }
        }
        a
    }

    pub fn observe(&mut self, used: Elem) {
        self.next = self.next.max(used + 1);
    }

    pub fn fresh(&mut self) -> Elem {
        let e = self.next;
        self.next += 1;
        e
    }

    pub fn peek(&self) -> Elem {
        self.next
    }
}

/// Which family amalgamates, and whether structures carry labels.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Strategy {
    #[serde(flatten)]
    pub family: Family,
    /// Label universe size, if labeled.
    pub labels: Option<u32>,
}

impl Strategy {
    pub fn new(family: Family, labels: Option<u32>) -> Self {
        Strategy { family, labels }
    }

    pub fn bkl(n: usize) -> Self {
        Strategy { family: Family::Bkl { n }, labels: None }
    }

    pub fn sets() -> Self {
        Strategy { family: Family::Sets, labels: None }
    }

    pub fn graphs() -> Self {
        Strategy { family: Family::Graphs, labels: None }
    }

    pub fn labeled(self, universe: u32) -> Self {
        Strategy { labels: Some(universe), ..self }
    }

    /// Largest k with disjoint k-amalgamation, if bounded.
    pub fn amalgamation_bound(&self) -> Option<usize> {
        self.family.bkl_arity()
    }

    pub fn empty(&self) -> FiniteStructure {
        let s = FiniteStructure::empty(self.family);
        match self.labels {
            Some(l) => s.with_labels(l, &BTreeMap::new()).expect("empty labeling"),
            None => s,
        }
    }

    /// Errors unless `s` has this strategy's family and label universe.
    pub fn check_member(&self, s: &FiniteStructure) -> Result<()> {
        match (self.family, s.family()) {
            (Family::Bkl { n: x }, Family::Bkl { n: y }) if x != y => {
                return Err(Error::ArityMismatch { left: x, right: y })
            }
            (x, y) if x != y => return Err(Error::FamilyMismatch { left: x.to_string(), right: y.to_string() }),
            _ => {}
        }
        if s.universe() != self.labels {
            return Err(Error::LabelMismatch { left: self.labels, right: s.universe() });
        }
        Ok(())
    }

    /// Family axioms (and A1 when labeled).
    pub fn validate(&self, s: &FiniteStructure) -> Result<ValidationReport> {
        self.check_member(s)?;
        Ok(validate_family(s))
    }
}

/// The colimit of a partial cube in sets, with its injections.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SetColimit {
    /// Top ids in increasing order; class `i` got the `i`-th id.
    pub elements: Vec<Elem>,
    pub injections: BTreeMap<Face, Embedding>,
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

fn require_valid(report: ValidationReport) -> Result<()> {
    if report.is_valid() {
        Ok(())
    } else {
        Err(Error::Invalid(report))
    }
}

/// Quotient of the disjoint union of the faces by `a ~ f^σ_τ(a)`.
///
/// Classes are ordered by their least `(id, face)` member and receive
/// fresh ids from `ids` in that order.
pub fn set_colimit(p: &CubeDiagram, ids: &mut IdAllocator) -> Result<SetColimit> {
    if p.shape() != Shape::Boundary {
        return Err(Error::ShapeMismatch("colimit input must be a boundary diagram".into()));
    }
    let mut report = validate_cube(p);
    report.extend(validate_disjoint(p));
    require_valid(report)?;
    colimit_unchecked(p, ids)
}

pub(crate) fn colimit_unchecked(p: &CubeDiagram, ids: &mut IdAllocator) -> Result<SetColimit> {
    let mut node: HashMap<(Face, Elem), usize> = HashMap::new();
    let mut keys: Vec<(Elem, Face)> = Vec::new();
    for (f, a) in p.faces() {
        for &e in a.elements() {
            node.insert((f, e), keys.len());
            keys.push((e, f));
        }
    }
    let mut parent: Vec<usize> = (0..keys.len()).collect();
    for ((s, t), m) in p.maps() {
        if s == t {
            continue;
        }
        for (x, y) in m.pairs() {
            let (a, b) = (find(&mut parent, node[&(s, x)]), find(&mut parent, node[&(t, y)]));
            if a != b {
                parent[a] = b;
            }
        }
    }
    let mut least: BTreeMap<usize, (Elem, Face)> = BTreeMap::new();
    for i in 0..keys.len() {
        let r = find(&mut parent, i);
        let k = keys[i];
        least.entry(r).and_modify(|cur| *cur = (*cur).min(k)).or_insert(k);
    }
    let mut classes: Vec<(Elem, Face, usize)> = least.into_iter().map(|(r, (e, f))| (e, f, r)).collect();
    classes.sort();
    let mut top_id: HashMap<usize, Elem> = HashMap::new();
    let mut elements = Vec::with_capacity(classes.len());
    for (_, _, r) in classes {
        let id = ids.fresh();
        top_id.insert(r, id);
        elements.push(id);
    }
    let mut injections = BTreeMap::new();
    for (f, a) in p.faces() {
        let inj = Embedding::from_pairs(a.elements().iter().map(|&e| {
            let r = find(&mut parent, node[&(f, e)]);
            (e, top_id[&r])
        }));
        if !inj.is_injective() {
            return Err(Error::Internal(format!("colimit injection at face {f} is not injective")));
        }
        injections.insert(f, inj);
    }
    Ok(SetColimit { elements, injections })
}

fn check_faces(strategy: &Strategy, p: &CubeDiagram) -> Result<()> {
    for (_, a) in p.faces() {
        strategy.check_member(a)?;
    }
    Ok(())
}

fn check_range(strategy: &Strategy, k: usize) -> Result<()> {
    if let Some(n) = strategy.amalgamation_bound() {
        if k > n {
            return Err(Error::ArityExceeded { k, n });
        }
    }
    Ok(())
}

/// Transports labels from the faces to the colimit; a set used by two top
/// elements is a collision.
fn transport_labels(universe: u32, p: &CubeDiagram, col: &SetColimit, top: FiniteStructure) -> Result<FiniteStructure> {
    let mut sets: BTreeMap<Elem, LabelSet> = BTreeMap::new();
    for (f, a) in p.faces() {
        for (x, y) in col.injections[&f].pairs() {
            let l = a.label_set(x).expect("labeled face");
            if let Some(prev) = sets.insert(y, l) {
                if prev != l {
                    return Err(Error::Internal(format!("label sets disagree on colimit element {y}")));
                }
            }
        }
    }
    let mut owner: HashMap<LabelSet, Elem> = HashMap::new();
    for (&e, &l) in &sets {
        if let Some(&o) = owner.get(&l) {
            return Err(Error::LabelCollision(o, e));
        }
        owner.insert(l, e);
    }
    top.with_labels(universe, &sets)
}

/// Builds a BKL table on `top` by copying entries through `sources` and
/// filling every other tuple with `fill`. Conflicting copies are an error.
pub(crate) fn assemble_bkl<'a>(
    n: usize,
    top: &[Elem],
    sources: impl IntoIterator<Item = (&'a FiniteStructure, &'a Embedding)>,
    mut fill: impl FnMut(&[Elem]) -> TupleEntry,
) -> Result<FiniteStructure> {
    let m = top.len();
    let total = m.checked_pow(n as u32).ok_or_else(|| Error::Unsupported("tuple table too large".into()))?;
    const UNSET: u32 = u32::MAX;
    let mut slot = vec![UNSET; total];
    let mut entries: Vec<TupleEntry> = Vec::new();
    let mut interned: HashMap<TupleEntry, u32> = HashMap::new();
    let top_pos: HashMap<Elem, usize> = top.iter().enumerate().map(|(i, &e)| (e, i)).collect();
    let mut pos = vec![0usize; n];
    for (a, inj) in sources {
        let ma = a.len();
        let map_pos: Vec<usize> =
            a.elements().iter().map(|&e| top_pos[&inj.get(e).expect("total injection")]).collect();
        let f = |e: Elem| inj.get(e).expect("total injection");
        for t in 0..ma.pow(n as u32) {
            crate::structure::decode(t, ma, &mut pos);
            let idx = pos.iter().fold(0, |acc, &p| acc * m + map_pos[p]);
            let e = a.entry_at(t).map_values(f);
            let id = *interned.entry(e).or_insert_with_key(|k| {
                entries.push(k.clone());
                (entries.len() - 1) as u32
            });
            if slot[idx] == UNSET {
                slot[idx] = id;
            } else if slot[idx] != id {
                let tuple: Vec<Elem> = pos.iter().map(|&p| top[map_pos[p]]).collect();
                return Err(Error::BadEntry { tuple, reason: "faces disagree on this tuple".into() });
            }
        }
    }
    let mut i = 0;
    FiniteStructure::bkl(n, top.to_vec(), |t| {
        let e = match slot[i] {
            UNSET => fill(t),
            id => entries[id as usize].clone(),
        };
        i += 1;
        e
    })
}

/// The completion recipe: every tuple not inside a face image gets
/// relation index `N = |top| - 1` and values enumerating the top in
/// increasing id order.
pub fn complete_bkl(p: &CubeDiagram, n: usize, ids: &mut IdAllocator) -> Result<CubeDiagram> {
    let k = p.k();
    if k > n {
        return Err(Error::ArityExceeded { k, n });
    }
    if k == 0 {
        return Err(Error::ShapeMismatch("amalgamation needs k >= 1".into()));
    }
    for (_, a) in p.faces() {
        match a.family() {
            Family::Bkl { n: m } if m == n => {}
            Family::Bkl { n: m } => return Err(Error::ArityMismatch { left: n, right: m }),
            other => return Err(Error::FamilyMismatch { left: format!("bkl({n})"), right: other.to_string() }),
        }
    }
    let universe = p.face(Face::EMPTY).and_then(|a| a.universe());
    let strategy = Strategy { family: Family::Bkl { n }, labels: universe };
    check_faces(&strategy, p)?;
    let col = set_colimit(p, ids)?;
    finish(&strategy, p, col)
}

fn build_top(strategy: &Strategy, p: &CubeDiagram, col: &SetColimit) -> Result<FiniteStructure> {
    let top = match strategy.family {
        Family::Bkl { n } => {
            let all = col.elements.clone();
            let rel = all.len().saturating_sub(1) as u32;
            let sources = p.faces().map(|(f, a)| (a, &col.injections[&f]));
            assemble_bkl(n, &col.elements, sources, |_| TupleEntry::new(rel, all.clone()))?
        }
        Family::Sets => FiniteStructure::set(col.elements.clone())?,
        Family::Graphs => {
            let mut edges = BTreeSet::new();
            for (f, a) in p.faces() {
                let inj = &col.injections[&f];
                for (u, v) in a.edges() {
                    edges.insert((inj.get(u).unwrap(), inj.get(v).unwrap()));
                }
            }
            FiniteStructure::graph(col.elements.clone(), edges)?
        }
    };
    match strategy.labels {
        Some(l) => transport_labels(l, p, col, top),
        None => Ok(top),
    }
}

fn finish(strategy: &Strategy, p: &CubeDiagram, col: SetColimit) -> Result<CubeDiagram> {
    let top = build_top(strategy, p, &col)?;
    p.with_top(top, &col.injections)
}

/// Extends a disjoint partial cube to a full one using the strategy's
/// completion. The boundary of the result is the input, unchanged.
pub fn disjoint_amalgamate(strategy: &Strategy, p: &CubeDiagram, ids: &mut IdAllocator) -> Result<CubeDiagram> {
    if p.shape() != Shape::Boundary {
        return Err(Error::ShapeMismatch("amalgamation input must be a boundary diagram".into()));
    }
    check_range(strategy, p.k())?;
    if p.k() == 0 {
        return Err(Error::ShapeMismatch("amalgamation needs k >= 1".into()));
    }
    check_faces(strategy, p)?;
    let col = set_colimit(p, ids)?;
    finish(strategy, p, col)
}

/// As [`disjoint_amalgamate`] but trusts that `p` is a disjoint cube.
pub(crate) fn amalgamate_unchecked(strategy: &Strategy, p: &CubeDiagram, ids: &mut IdAllocator) -> Result<CubeDiagram> {
    check_range(strategy, p.k())?;
    let col = colimit_unchecked(p, ids)?;
    finish(strategy, p, col)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::structure::validate_bkl;

    fn singles_over(base: FiniteStructure, sides: Vec<FiniteStructure>, maps: Vec<Embedding>) -> CubeDiagram {
        let mut faces = BTreeMap::from([(Face::EMPTY, base)]);
        let mut m = BTreeMap::new();
        for (i, (s, e)) in sides.into_iter().zip(maps).enumerate() {
            faces.insert(Face::singleton(i), s);
            m.insert((Face::EMPTY, Face::singleton(i)), e);
        }
        CubeDiagram::new(2, Shape::Boundary, faces, m).unwrap()
    }

    fn point(n: usize, id: Elem) -> FiniteStructure {
        FiniteStructure::bkl(n, vec![id], TupleEntry::trivial).unwrap()
    }

    #[test]
    fn two_singletons_give_two_classes() {
        let e = FiniteStructure::empty(Family::Bkl { n: 2 });
        let p = singles_over(e, vec![point(2, 0), point(2, 1)], vec![Embedding::default(); 2]);
        let col = set_colimit(&p, &mut IdAllocator::above([point(2, 1)].iter())).unwrap();
        assert_eq!(col.elements, vec![2, 3]);
        let full = complete_bkl(&p, 2, &mut IdAllocator::new()).unwrap();
        let top = full.face(Face::full(2)).unwrap();
        assert!(validate_bkl(top).unwrap().is_valid());
        let mixed = top.entry(&[0, 1]).unwrap();
        assert_eq!(mixed, &TupleEntry::new(1, vec![0, 1]));
    }

    #[test]
    fn shared_base_is_identified() {
        let base = point(2, 0);
        let side =
            |new: Elem| FiniteStructure::bkl(2, vec![0, new], |t| TupleEntry::new(0, vec![t[0].min(t[1])])).unwrap();
        let p = singles_over(base, vec![side(1), side(2)], vec![Embedding::identity(&[0]); 2]);
        let col = set_colimit(&p, &mut IdAllocator::new()).unwrap();
        assert_eq!(col.elements.len(), 3);
        assert_eq!(col.injections[&Face(1)].get(0), col.injections[&Face(2)].get(0));
    }

    #[test]
    fn k_above_n_is_refused() {
        let faces = Shape::Boundary.faces(3).into_iter().map(|f| (f, FiniteStructure::empty(Family::Bkl { n: 2 })));
        let p = CubeDiagram::new(3, Shape::Boundary, faces.collect(), BTreeMap::new()).unwrap();
        let err = complete_bkl(&p, 2, &mut IdAllocator::new()).unwrap_err();
        assert!(matches!(err, Error::ArityExceeded { k: 3, n: 2 }));
        assert!(err.to_string().contains("1 <= k <= 2"));
    }

    #[test]
    fn sets_take_the_disjoint_union() {
        let e = FiniteStructure::set(vec![]).unwrap();
        let s = |id| FiniteStructure::set(vec![id]).unwrap();
        let p = singles_over(e, vec![s(0), s(1)], vec![Embedding::default(); 2]);
        let full = disjoint_amalgamate(&Strategy::sets(), &p, &mut IdAllocator::new()).unwrap();
        assert_eq!(full.face(Face(3)).unwrap().len(), 2);
        assert_eq!(full.boundary(), p);
    }

    #[test]
    fn labeled_collision_is_reported() {
        let e = FiniteStructure::set(vec![]).unwrap().with_labels(2, &BTreeMap::new()).unwrap();
        let s = |id| FiniteStructure::set(vec![id]).unwrap().with_labels(2, &[(id, LabelSet::EMPTY)].into()).unwrap();
        let p = singles_over(e, vec![s(0), s(1)], vec![Embedding::default(); 2]);
        let r = disjoint_amalgamate(&Strategy::sets().labeled(2), &p, &mut IdAllocator::new());
        assert!(matches!(r, Err(Error::LabelCollision(..))));
    }
}
