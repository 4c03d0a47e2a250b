//! Embeddability digraphs of finite families and induced cube search.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::amalgam::{disjoint_amalgamate, IdAllocator, Strategy};
use crate::cube::{CubeDiagram, Face, Shape};
use crate::error::{Error, Result};
use crate::structure::{find_embeddings, is_isomorphic, Embedding, Family, FiniteStructure, LabelSet};
use crate::types::enumerate_types;

/// Arc `u -> v` iff the structure at `u` embeds into the one at `v`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EmbeddabilityDigraph {
    /// Isomorphism-class representatives, first occurrence kept.
    pub vertices: Vec<FiniteStructure>,
    /// Index into the input family of each vertex.
    pub origin: Vec<usize>,
    /// Vertex of each input structure.
    pub class_of: Vec<usize>,
    arcs: Vec<Vec<bool>>,
    /// One embedding per arc.
    pub witnesses: BTreeMap<(usize, usize), Embedding>,
}

impl EmbeddabilityDigraph {
    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn arc(&self, u: usize, v: usize) -> bool {
        self.arcs[u][v]
    }

    pub fn arcs(&self) -> Vec<(usize, usize)> {
        let n = self.len();
        (0..n).flat_map(|u| (0..n).map(move |v| (u, v))).filter(|&(u, v)| self.arcs[u][v]).collect()
    }

    pub fn is_reflexive(&self) -> bool {
        (0..self.len()).all(|u| self.arcs[u][u])
    }

    pub fn is_transitive(&self) -> bool {
        let n = self.len();
        (0..n).all(|u| (0..n).all(|v| !self.arcs[u][v] || (0..n).all(|w| !self.arcs[v][w] || self.arcs[u][w])))
    }

    /// Graphviz rendering; self-loops are left implicit.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph embeddability {\n");
        for (i, v) in self.vertices.iter().enumerate() {
            let _ = writeln!(out, "  v{i} [label=\"{i}: |A|={}\"];", v.len());
        }
        for (u, v) in self.arcs() {
            if u != v {
                let _ = writeln!(out, "  v{u} -> v{v};");
            }
        }
        out.push_str("}\n");
        out
    }
}

/// Builds the digraph of `family`, deduplicated up to isomorphism.
pub fn build_digraph(family: &[FiniteStructure]) -> Result<EmbeddabilityDigraph> {
    if let Some(first) = family.first() {
        for s in &family[1..] {
            if s.family() != first.family() {
                return Err(Error::FamilyMismatch { left: first.family().to_string(), right: s.family().to_string() });
            }
            if s.universe() != first.universe() {
                return Err(Error::LabelMismatch { left: first.universe(), right: s.universe() });
            }
        }
    }
    let mut vertices: Vec<FiniteStructure> = Vec::new();
    let mut origin = Vec::new();
    let mut class_of = Vec::new();
    for (i, s) in family.iter().enumerate() {
        let mut found = None;
        for (j, v) in vertices.iter().enumerate() {
            if v.len() == s.len() && is_isomorphic(v, s)?.is_some() {
                found = Some(j);
                break;
            }
        }
        match found {
            Some(j) => class_of.push(j),
            None => {
                class_of.push(vertices.len());
                vertices.push(s.clone());
                origin.push(i);
            }
        }
    }
    let n = vertices.len();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|u| (0..n).map(move |v| (u, v))).collect();
    let found: Vec<((usize, usize), Option<Embedding>)> = pairs
        .par_iter()
        .map(|&(u, v)| Ok(((u, v), find_embeddings(&vertices[u], &vertices[v], 1)?.pop())))
        .collect::<Result<_>>()?;
    let mut arcs = vec![vec![false; n]; n];
    let mut witnesses = BTreeMap::new();
    for ((u, v), e) in found {
        if let Some(e) = e {
            arcs[u][v] = true;
            witnesses.insert((u, v), e);
        }
    }
    let d = EmbeddabilityDigraph { vertices, origin, class_of, arcs, witnesses };
    if !d.is_reflexive() || !d.is_transitive() {
        return Err(Error::Internal("embeddability digraph is not a preorder".into()));
    }
    Ok(d)
}

/// An induced copy of the subset lattice of `k` points.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CubeWitness {
    pub k: usize,
    pub assignment: BTreeMap<Face, usize>,
}

impl CubeWitness {
    /// Re-checks injectivity and the induced condition against `d`.
    pub fn verify(&self, d: &EmbeddabilityDigraph) -> bool {
        let faces = Face::all(self.k);
        if faces.iter().any(|f| !self.assignment.contains_key(f)) || self.assignment.len() != faces.len() {
            return false;
        }
        let used: BTreeSet<usize> = self.assignment.values().copied().collect();
        if used.len() != faces.len() || used.iter().any(|&v| v >= d.len()) {
            return false;
        }
        faces.iter().all(|&s| {
            faces.iter().all(|&t| s == t || d.arc(self.assignment[&s], self.assignment[&t]) == s.is_subset(t))
        })
    }
}

/// First induced embedding of the `k`-cube, faces assigned in face order
/// and vertices tried by index.
pub fn find_cube_embedding(d: &EmbeddabilityDigraph, k: usize) -> Option<CubeWitness> {
    if k > 16 {
        return None;
    }
    let faces = Face::all(k);
    if faces.len() > d.len() {
        return None;
    }
    let mut chosen: Vec<usize> = Vec::with_capacity(faces.len());
    let mut used = vec![false; d.len()];
    if search(d, &faces, &mut chosen, &mut used) {
        Some(CubeWitness { k, assignment: faces.into_iter().zip(chosen).collect() })
    } else {
        None
    }
}

fn search(d: &EmbeddabilityDigraph, faces: &[Face], chosen: &mut Vec<usize>, used: &mut [bool]) -> bool {
    let i = chosen.len();
    if i == faces.len() {
        return true;
    }
    let f = faces[i];
    for v in 0..d.len() {
        if used[v] {
            continue;
        }
        let fits = faces[..i]
            .iter()
            .zip(chosen.iter())
            .all(|(&g, &u)| d.arc(u, v) == g.is_subset(f) && d.arc(v, u) == f.is_subset(g));
        if !fits {
            continue;
        }
        chosen.push(v);
        used[v] = true;
        if search(d, faces, chosen, used) {
            return true;
        }
        used[v] = false;
        chosen.pop();
    }
    false
}

/// Largest `k <= k_max` whose cube embeds, or `None` for an empty digraph.
/// A lower bound for the family's dimension.
pub fn dimension_estimate(d: &EmbeddabilityDigraph, k_max: usize) -> Option<usize> {
    let mut best = None;
    for k in 0..=k_max {
        if find_cube_embedding(d, k).is_none() {
            break;
        }
        best = Some(k);
    }
    best
}

/// A label pattern: labels required (`t`) and forbidden (`f`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Pattern {
    pub t: LabelSet,
    pub f: LabelSet,
}

/// Patterns over indices `< universe`: disjoint, nonempty, by total size,
/// then union, required-first; at most `cap` of them.
pub fn label_patterns(universe: u32, cap: usize) -> Vec<Pattern> {
    let mut out = Vec::new();
    if cap == 0 {
        return out;
    }
    for u in LabelSet::enumerate(universe.min(64)).filter(|u| !u.is_empty()) {
        let bits = u.bits();
        let mut ts: Vec<LabelSet> = Vec::new();
        let mut sub = bits;
        loop {
            ts.push(LabelSet::from_bits(sub));
            if sub == 0 {
                break;
            }
            sub = (sub - 1) & bits;
        }
        ts.sort_by(|a, b| b.cmp(a));
        for t in ts {
            out.push(Pattern { t, f: LabelSet::from_bits(bits & !t.bits()) });
            if out.len() == cap {
                return out;
            }
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleConfig {
    pub strategy: Strategy,
    /// Largest type size.
    pub size: usize,
    pub labels: u32,
    pub patterns: usize,
    /// Largest relation index in enumerated types.
    pub rel_cap: u32,
}

/// Types and pattern tuples the sample must realize.
pub fn sample_requirements(config: &SampleConfig) -> Result<Vec<(FiniteStructure, Vec<Pattern>)>> {
    let plain = Strategy { labels: None, ..config.strategy };
    let patterns = label_patterns(config.labels, config.patterns);
    let mut out = Vec::new();
    for size in 1..=config.size {
        for a in enumerate_types(&plain, size, config.rel_cap)? {
            let mut idx = vec![0usize; size];
            if patterns.is_empty() {
                continue;
            }
            loop {
                out.push((a.clone(), idx.iter().map(|&i| patterns[i]).collect()));
                let mut j = size;
                loop {
                    if j == 0 {
                        break;
                    }
                    j -= 1;
                    idx[j] += 1;
                    if idx[j] < patterns.len() {
                        break;
                    }
                    idx[j] = 0;
                }
                if idx.iter().all(|&i| i == 0) {
                    break;
                }
            }
        }
    }
    Ok(out)
}

/// Whether `s` has a copy of `a` whose elements match `patterns`.
pub fn realizes(s: &FiniteStructure, a: &FiniteStructure, patterns: &[Pattern]) -> Result<bool> {
    let plain = s.reduct();
    for e in find_embeddings(a, &plain, usize::MAX)? {
        let ok = a.elements().iter().zip(patterns).all(|(&x, p)| {
            let l = s.label_set(e.get(x).unwrap()).unwrap_or(LabelSet::EMPTY);
            p.t.is_subset(l) && l.is_disjoint(p.f)
        });
        if ok {
            return Ok(true);
        }
    }
    Ok(false)
}

fn try_sample(config: &SampleConfig, universe: u32) -> Result<FiniteStructure> {
    let strategy = Strategy { labels: Some(universe), ..config.strategy };
    let mut ids = IdAllocator::new();
    let mut sample = strategy.empty();
    let mut used: BTreeSet<LabelSet> = BTreeSet::new();
    for (a, patterns) in sample_requirements(config)? {
        if realizes(&sample, &a, &patterns)? {
            continue;
        }
        let mut pairs = Vec::new();
        let mut sets = BTreeMap::new();
        for (&x, p) in a.elements().iter().zip(&patterns) {
            let set = LabelSet::least_unused(universe, p.t, p.f, &used)
                .ok_or(Error::LabelsExhausted { required: universe + 1 })?;
            used.insert(set);
            let y = ids.fresh();
            pairs.push((x, y));
            sets.insert(y, set);
        }
        let copy = a.rename(&Embedding::from_pairs(pairs))?.with_labels(universe, &sets)?;
        let empty = strategy.empty();
        let square = CubeDiagram::new(
            2,
            Shape::Boundary,
            [(Face(0), empty), (Face(1), sample.clone()), (Face(2), copy)].into(),
            BTreeMap::new(),
        )?;
        let full = disjoint_amalgamate(&strategy, &square, &mut ids)?;
        sample = full.face(Face(3)).unwrap().clone();
    }
    Ok(sample)
}

/// One labeled structure realizing every type of size at most
/// `config.size` under every tuple of the first `config.patterns`
/// patterns, built by repeated disjoint amalgamation over the empty
/// structure.
pub fn generic_labeled_sample(config: &SampleConfig) -> Result<FiniteStructure> {
    if let Family::Bkl { n } = config.strategy.family {
        if n < 2 {
            return Err(Error::ArityExceeded { k: 2, n });
        }
    }
    if config.labels > 64 {
        return Err(Error::UniverseTooLarge(config.labels));
    }
    match try_sample(config, config.labels) {
        Err(Error::LabelsExhausted { .. }) => {
            for universe in config.labels + 1..=64 {
                if try_sample(config, universe).is_ok() {
                    return Err(Error::LabelsExhausted { required: universe });
                }
            }
            Err(Error::LabelsExhausted { required: 65 })
        }
        other => other,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::structure::{validate_family, Elem};

    fn chain(len: usize) -> FiniteStructure {
        FiniteStructure::set((0..len as Elem).collect()).unwrap()
    }

    #[test]
    fn one_vertex_digraph() {
        let d = build_digraph(&[chain(2), chain(2)]).unwrap();
        assert_eq!(d.len(), 1);
        assert_eq!(d.arcs(), vec![(0, 0)]);
        assert_eq!(d.class_of, vec![0, 0]);
        assert_eq!(dimension_estimate(&d, 3), Some(0));
    }

    #[test]
    fn clique_has_no_cube() {
        let d = build_digraph(&[chain(0), chain(1), chain(2)]).unwrap();
        assert!(find_cube_embedding(&d, 1).is_some());
        let g = |e: Vec<(Elem, Elem)>| FiniteStructure::graph(vec![0, 1], e).unwrap();
        let complete = build_digraph(&[g(vec![(0, 1), (1, 0)])]).unwrap();
        assert!(find_cube_embedding(&complete, 1).is_none());
    }

    #[test]
    fn labeled_subsets_form_a_cube() {
        let fam: Vec<FiniteStructure> = Face::all(3)
            .into_iter()
            .map(|f| {
                let els: Vec<Elem> = f.indices().map(|i| i as Elem).collect();
                let sets = els.iter().map(|&e| (e, LabelSet::from_indices([e]))).collect();
                FiniteStructure::set(els).unwrap().with_labels(3, &sets).unwrap()
            })
            .collect();
        let d = build_digraph(&fam).unwrap();
        let w = find_cube_embedding(&d, 3).unwrap();
        assert!(w.verify(&d));
        assert_eq!(dimension_estimate(&d, 5), Some(3));
    }

    #[test]
    fn patterns_are_ordered() {
        let p = label_patterns(2, 4);
        assert_eq!(p[0], Pattern { t: LabelSet::from_indices([0]), f: LabelSet::EMPTY });
        assert_eq!(p[1], Pattern { t: LabelSet::EMPTY, f: LabelSet::from_indices([0]) });
        assert_eq!(p[2].t, LabelSet::from_indices([1]));
    }

    #[test]
    fn two_unary_patterns_on_sets() {
        let cfg = SampleConfig { strategy: Strategy::sets(), size: 1, labels: 1, patterns: 2, rel_cap: 0 };
        let s = generic_labeled_sample(&cfg).unwrap();
        assert_eq!(s.len(), 2);
        let sets: BTreeSet<LabelSet> = s.elements().iter().map(|&e| s.label_set(e).unwrap()).collect();
        assert_eq!(sets, [LabelSet::EMPTY, LabelSet::from_indices([0])].into());
    }

    #[test]
    fn bkl2_sample_is_valid() {
        let cfg = SampleConfig { strategy: Strategy::bkl(2), size: 1, labels: 2, patterns: 2, rel_cap: 0 };
        let s = generic_labeled_sample(&cfg).unwrap();
        assert!(validate_family(&s).is_valid());
        for (a, p) in sample_requirements(&cfg).unwrap() {
            assert!(realizes(&s, &a, &p).unwrap());
        }
        let one = SampleConfig { strategy: Strategy::bkl(1), ..cfg };
        assert!(matches!(generic_labeled_sample(&one), Err(Error::ArityExceeded { .. })));
    }

    #[test]
    fn small_universe_reports_requirement() {
        let cfg = SampleConfig { strategy: Strategy::sets(), size: 2, labels: 1, patterns: 2, rel_cap: 0 };
        // each missing realization is a fresh copy, so {0} and {0, 1} are
        // both spent before the pair of 0-labeled points is needed
        let r = generic_labeled_sample(&cfg);
        assert!(matches!(r, Err(Error::LabelsExhausted { required: 3 })), "{r:?}");
        assert!(generic_labeled_sample(&SampleConfig { labels: 3, ..cfg }).is_ok());
    }
}
