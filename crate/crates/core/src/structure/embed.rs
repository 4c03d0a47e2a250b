use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use super::{decode, encode, tuple_count, Body, Elem, FiniteStructure};
use crate::error::{Error, Result};

/// An injective map between element ids.
///
/// Whether it is an embedding between two particular structures is checked
/// by [`check_embedding`]; search results are embeddings by construction.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Embedding {
    map: BTreeMap<Elem, Elem>,
}

impl Embedding {
    pub fn new(map: BTreeMap<Elem, Elem>) -> Self {
        Embedding { map }
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (Elem, Elem)>) -> Self {
        Embedding { map: pairs.into_iter().collect() }
    }

    pub fn identity(elements: &[Elem]) -> Self {
        Embedding { map: elements.iter().map(|&e| (e, e)).collect() }
    }

    pub fn get(&self, e: Elem) -> Option<Elem> {
        self.map.get(&e).copied()
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn pairs(&self) -> impl Iterator<Item = (Elem, Elem)> + '_ {
        self.map.iter().map(|(&a, &b)| (a, b))
    }

    pub fn as_map(&self) -> &BTreeMap<Elem, Elem> {
        &self.map
    }

    pub fn domain(&self) -> BTreeSet<Elem> {
        self.map.keys().copied().collect()
    }

    pub fn image(&self) -> BTreeSet<Elem> {
        self.map.values().copied().collect()
    }

    /// Image of a subset; ids outside the domain are skipped.
    pub fn image_of<'a>(&self, set: impl IntoIterator<Item = &'a Elem>) -> BTreeSet<Elem> {
        set.into_iter().filter_map(|e| self.get(*e)).collect()
    }

    pub fn is_injective(&self) -> bool {
        self.image().len() == self.map.len()
    }

    pub fn is_identity(&self) -> bool {
        self.map.iter().all(|(a, b)| a == b)
    }

    /// `next ∘ self`: apply `self` first. Fails if some image is outside
    /// `next`'s domain.
    pub fn then(&self, next: &Embedding) -> Result<Embedding> {
        let mut out = BTreeMap::new();
        for (&a, &b) in &self.map {
            let c = next.get(b).ok_or_else(|| Error::BadMap(format!("{b} outside domain of composite")))?;
            out.insert(a, c);
        }
        Ok(Embedding { map: out })
    }

    pub fn inverse(&self) -> Embedding {
        Embedding { map: self.map.iter().map(|(&a, &b)| (b, a)).collect() }
    }
}

pub(crate) fn compatible(a: &FiniteStructure, b: &FiniteStructure) -> Result<()> {
    match (a.family(), b.family()) {
        (super::Family::Bkl { n: x }, super::Family::Bkl { n: y }) if x != y => {
            return Err(Error::ArityMismatch { left: x, right: y })
        }
        (x, y) if x != y => return Err(Error::FamilyMismatch { left: x.to_string(), right: y.to_string() }),
        _ => {}
    }
    if a.universe() != b.universe() {
        return Err(Error::LabelMismatch { left: a.universe(), right: b.universe() });
    }
    Ok(())
}

/// Direct check that `map` is an embedding `a -> b`, tuple by tuple.
///
/// Kept deliberately naive: it is the reference the search and the
/// θ-formulas are compared against.
pub fn check_embedding(a: &FiniteStructure, b: &FiniteStructure, map: &Embedding) -> Result<(), String> {
    compatible(a, b).map_err(|e| e.to_string())?;
    if map.len() != a.len() || a.elements().iter().any(|&e| map.get(e).is_none()) {
        return Err("domain differs from source elements".into());
    }
    if !map.is_injective() {
        return Err("not injective".into());
    }
    if let Some(x) = map.image().into_iter().find(|&x| !b.contains(x)) {
        return Err(format!("image {x} is not a target element"));
    }
    let f = |e: Elem| map.get(e).unwrap();
    for &e in a.elements() {
        if a.label_set(e) != b.label_set(f(e)) {
            return Err(format!("labels differ at {e}"));
        }
    }
    match (&a.body, &b.body) {
        (Body::Bkl { .. }, Body::Bkl { .. }) => {
            for (t, ea) in a.tuples() {
                let image: Vec<Elem> = t.iter().map(|&x| f(x)).collect();
                let eb = b.entry(&image).expect("total table");
                if ea.rel != eb.rel {
                    return Err(format!("relation index differs on {t:?}"));
                }
                for i in 0..=ea.rel as usize {
                    if f(ea.s(i, &t)) != eb.s(i, &image) {
                        return Err(format!("s_{i} not preserved on {t:?}"));
                    }
                }
            }
        }
        (Body::Graph { .. }, Body::Graph { .. }) => {
            for &u in a.elements() {
                for &v in a.elements() {
                    if a.has_edge(u, v) != b.has_edge(f(u), f(v)) {
                        return Err(format!("adjacency differs on ({u}, {v})"));
                    }
                }
            }
        }
        _ => {}
    }
    Ok(())
}

struct Search<'a> {
    a: &'a FiniteStructure,
    b: &'a FiniteStructure,
    /// Tuple indices of `a` whose coordinates and values all sit at
    /// positions `<= p`, bucketed by that maximum `p`.
    ready: Vec<Vec<usize>>,
    fixed: Vec<Option<usize>>,
    by_label: Option<HashMap<u64, usize>>,
    img: Vec<usize>,
    used: Vec<bool>,
    limit: usize,
    out: Vec<Embedding>,
}

impl<'a> Search<'a> {
    fn new(a: &'a FiniteStructure, b: &'a FiniteStructure, fixed: Vec<Option<usize>>, limit: usize) -> Self {
        let ma = a.len();
        let mut ready = vec![Vec::new(); ma];
        if let Body::Bkl { n, table } = &a.body {
            let entry_max: Vec<usize> = table
                .entries
                .iter()
                .map(|e| e.values.iter().map(|&v| a.position(v).unwrap()).max().unwrap_or(0))
                .collect();
            let mut pos = vec![0; *n];
            for t in 0..tuple_count(ma, *n) {
                decode(t, ma, &mut pos);
                let lvl = pos.iter().copied().max().unwrap().max(entry_max[table.slots[t] as usize]);
                ready[lvl].push(t);
            }
        }
        let by_label =
            b.labels().map(|l| l.sets().iter().enumerate().map(|(p, s)| (s.bits(), p)).collect::<HashMap<_, _>>());
        Search { a, b, ready, fixed, by_label, img: vec![0; ma], used: vec![false; b.len()], limit, out: vec![] }
    }

    fn consistent(&self, p: usize) -> bool {
        let (a, b) = (self.a, self.b);
        match (&a.body, &b.body) {
            (Body::Bkl { n, .. }, Body::Bkl { .. }) => {
                let (ma, mb) = (a.len(), b.len());
                let mut pos = vec![0; *n];
                for &t in &self.ready[p] {
                    decode(t, ma, &mut pos);
                    let ea = a.entry_at(t);
                    for q in pos.iter_mut() {
                        *q = self.img[*q];
                    }
                    let eb = b.entry_at(encode(&pos, mb));
                    if ea.rel != eb.rel {
                        return false;
                    }
                    for (va, vb) in ea.values.iter().zip(&eb.values) {
                        let pa = a.position(*va).unwrap();
                        if b.elements()[self.img[pa]] != *vb {
                            return false;
                        }
                    }
                }
                true
            }
            (Body::Graph { .. }, Body::Graph { .. }) => (0..=p).all(|q| {
                a.adj_at(q, p) == b.adj_at(self.img[q], self.img[p])
                    && a.adj_at(p, q) == b.adj_at(self.img[p], self.img[q])
            }),
            _ => true,
        }
    }

    fn candidates(&self, p: usize) -> Vec<usize> {
        if let Some(q) = self.fixed[p] {
            return vec![q];
        }
        match (&self.by_label, self.a.label_at(p)) {
            (Some(index), Some(l)) => index.get(&l.bits()).copied().into_iter().collect(),
            _ => (0..self.b.len()).collect(),
        }
    }

    fn run(&mut self, p: usize) {
        if self.out.len() >= self.limit {
            return;
        }
        if p == self.a.len() {
            let map = self.a.elements().iter().zip(&self.img).map(|(&x, &q)| (x, self.b.elements()[q])).collect();
            self.out.push(Embedding::new(map));
            return;
        }
        for q in self.candidates(p) {
            if self.used[q] || self.a.label_at(p) != self.b.label_at(q) {
                continue;
            }
            self.img[p] = q;
            if !self.consistent(p) {
                continue;
            }
            self.used[q] = true;
            self.run(p + 1);
            self.used[q] = false;
            if self.out.len() >= self.limit {
                return;
            }
        }
    }
}

/// Embeddings `a -> b` extending `fixed`, in lexicographic order of the map
/// on `a`'s sorted elements; at most `limit` of them.
pub fn find_embeddings_extending(
    a: &FiniteStructure,
    b: &FiniteStructure,
    fixed: &Embedding,
    limit: usize,
) -> Result<Vec<Embedding>> {
    compatible(a, b)?;
    if a.len() > b.len() || limit == 0 {
        return Ok(vec![]);
    }
    let mut pinned = vec![None; a.len()];
    for (x, y) in fixed.pairs() {
        let px = a.position(x).ok_or(Error::NotAnElement(x))?;
        let py = b.position(y).ok_or(Error::NotAnElement(y))?;
        pinned[px] = Some(py);
    }
    let mut search = Search::new(a, b, pinned, limit);
    search.run(0);
    Ok(search.out)
}

pub fn find_embeddings(a: &FiniteStructure, b: &FiniteStructure, limit: usize) -> Result<Vec<Embedding>> {
    find_embeddings_extending(a, b, &Embedding::default(), limit)
}

pub fn embeds(a: &FiniteStructure, b: &FiniteStructure) -> Result<bool> {
    Ok(!find_embeddings(a, b, 1)?.is_empty())
}

/// First bijective embedding in lexicographic order, if any.
pub fn is_isomorphic(a: &FiniteStructure, b: &FiniteStructure) -> Result<Option<Embedding>> {
    compatible(a, b)?;
    if a.len() != b.len() {
        return Ok(None);
    }
    Ok(find_embeddings(a, b, 1)?.pop())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::structure::{Family, LabelSet, TupleEntry};

    fn chain() -> FiniteStructure {
        FiniteStructure::bkl(1, vec![0, 1, 2], |t| TupleEntry::new(0, vec![(t[0] + 1).min(2)])).unwrap()
    }

    #[test]
    fn identity_is_found_first() {
        let s = chain();
        let found = find_embeddings(&s, &s, 10).unwrap();
        assert_eq!(found, vec![Embedding::identity(s.elements())]);
        assert_eq!(is_isomorphic(&s, &s).unwrap(), Some(Embedding::identity(s.elements())));
    }

    #[test]
    fn larger_source_has_no_embedding() {
        let s = chain();
        let small = s.restrict(&[2].into()).unwrap();
        assert!(find_embeddings(&s, &small, 10).unwrap().is_empty());
        assert_eq!(find_embeddings(&small, &s, 10).unwrap().len(), 1);
    }

    #[test]
    fn arity_mismatch_is_an_error() {
        let a = FiniteStructure::empty(Family::Bkl { n: 1 });
        let b = FiniteStructure::empty(Family::Bkl { n: 2 });
        assert!(matches!(find_embeddings(&a, &b, 1), Err(Error::ArityMismatch { .. })));
    }

    #[test]
    fn sets_embed_in_lexicographic_order() {
        let a = FiniteStructure::set(vec![0, 1]).unwrap();
        let b = FiniteStructure::set(vec![5, 6, 7]).unwrap();
        let found = find_embeddings(&a, &b, 100).unwrap();
        assert_eq!(found.len(), 6);
        assert_eq!(found[0], Embedding::from_pairs([(0, 5), (1, 6)]));
        assert_eq!(found[5], Embedding::from_pairs([(0, 7), (1, 6)]));
    }

    #[test]
    fn labeled_embeddings_are_unique() {
        let b = FiniteStructure::set(vec![5, 6, 7])
            .unwrap()
            .with_labels(
                3,
                &[(5, LabelSet::from_indices([0])), (6, LabelSet::from_indices([1])), (7, LabelSet::EMPTY)].into(),
            )
            .unwrap();
        let a = b.restrict(&[5, 7].into()).unwrap().rename(&Embedding::from_pairs([(5, 0), (7, 1)])).unwrap();
        let found = find_embeddings(&a, &b, 100).unwrap();
        assert_eq!(found, vec![Embedding::from_pairs([(0, 5), (1, 7)])]);
    }

    #[test]
    fn transported_structure_is_isomorphic() {
        let s = chain();
        let perm = Embedding::from_pairs([(0, 12), (1, 10), (2, 11)]);
        let t = s.rename(&perm).unwrap();
        let iso = is_isomorphic(&s, &t).unwrap().unwrap();
        assert_eq!(iso, perm);
        assert!(check_embedding(&s, &t, &perm).is_ok());
    }

    #[test]
    fn graph_embeddings_are_induced() {
        let path = FiniteStructure::graph(vec![0, 1, 2], [(0, 1), (1, 0), (1, 2), (2, 1)]).unwrap();
        let tri = FiniteStructure::graph(vec![0, 1, 2], [(0, 1), (1, 0), (1, 2), (2, 1), (0, 2), (2, 0)]).unwrap();
        assert!(find_embeddings(&path, &tri, 10).unwrap().is_empty());
        assert_eq!(find_embeddings(&path, &path, 10).unwrap().len(), 2);
    }
}
