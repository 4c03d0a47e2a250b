//! Seeded random structures and cubes for tests, benchmarks and sampling.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::Rng;

use crate::amalgam::{assemble_bkl, colimit_unchecked, IdAllocator, Strategy};
use crate::cube::{CubeDiagram, Face, Shape};
use crate::error::Result;
use crate::structure::{validate_bkl, Elem, Embedding, Family, FiniteStructure, LabelSet, TupleEntry};

const ATTEMPTS: usize = 24;

/// Tuning knobs for the generators.
#[derive(Clone, Copy, Debug)]
pub struct RandomOptions {
    /// Largest relation index drawn for random entries.
    pub max_rel: u32,
    /// Largest face size.
    pub max_face: usize,
}

impl Default for RandomOptions {
    fn default() -> Self {
        RandomOptions { max_rel: 2, max_face: 4 }
    }
}

fn random_entry<R: Rng>(rng: &mut R, top: &[Elem], max_rel: u32) -> TupleEntry {
    let rel = rng.gen_range(0..=max_rel);
    TupleEntry::new(rel, (0..=rel).map(|_| *top.choose(rng).unwrap()).collect())
}

fn recipe_entry(top: &[Elem]) -> TupleEntry {
    TupleEntry::new(top.len() as u32 - 1, top.to_vec())
}

/// A BKL structure on `top` whose tuples inside the given sources are
/// copied and whose other tuples are random; falls back to the
/// all-generating recipe when no random draw passes the validator.
fn random_bkl_over<'a, R: Rng>(
    rng: &mut R,
    n: usize,
    top: &[Elem],
    sources: &[(&'a FiniteStructure, &'a Embedding)],
    max_rel: u32,
) -> Result<FiniteStructure> {
    for _ in 0..ATTEMPTS {
        let s = assemble_bkl(n, top, sources.iter().copied(), |_| random_entry(rng, top, max_rel))?;
        if validate_bkl(&s)?.is_valid() {
            return Ok(s);
        }
    }
    assemble_bkl(n, top, sources.iter().copied(), |_| recipe_entry(top))
}

/// A random valid structure of the strategy's family on `elements`.
pub fn random_structure<R: Rng>(
    rng: &mut R,
    strategy: &Strategy,
    elements: Vec<Elem>,
    max_rel: u32,
) -> Result<FiniteStructure> {
    let s = match strategy.family {
        Family::Bkl { n } => random_bkl_over(rng, n, &sorted(elements), &[], max_rel)?,
        Family::Sets => FiniteStructure::set(elements)?,
        Family::Graphs => {
            let els = sorted(elements);
            let mut edges = Vec::new();
            for (i, &u) in els.iter().enumerate() {
                for &v in &els[i + 1..] {
                    if rng.gen_bool(0.5) {
                        edges.push((u, v));
                        edges.push((v, u));
                    }
                }
            }
            FiniteStructure::graph(els, edges)?
        }
    };
    match strategy.labels {
        Some(l) => {
            let mut used = BTreeSet::new();
            let sets = random_labels(rng, l, s.elements(), &mut used);
            s.with_labels(l, &sets)
        }
        None => Ok(s),
    }
}

fn sorted(mut v: Vec<Elem>) -> Vec<Elem> {
    v.sort_unstable();
    v
}

/// Distinct random label sets for `elements`, avoiding and extending `used`.
pub fn random_labels<R: Rng>(
    rng: &mut R,
    universe: u32,
    elements: &[Elem],
    used: &mut BTreeSet<LabelSet>,
) -> BTreeMap<Elem, LabelSet> {
    let mut out = BTreeMap::new();
    for &e in elements {
        let set = loop {
            let bits = if universe >= 64 { rng.gen::<u64>() } else { rng.gen_range(0..1u64 << universe) };
            let cand = LabelSet::from_bits(bits);
            if !used.contains(&cand) {
                break cand;
            }
        };
        used.insert(set);
        out.insert(e, set);
    }
    out
}

/// A random member of the family on the colimit of `sources` plus `extra`
/// fresh points. Tuples and edges inside a source image are copied.
fn random_over<R: Rng>(
    rng: &mut R,
    strategy: &Strategy,
    top: &[Elem],
    sources: &[(&FiniteStructure, &Embedding)],
    used: &mut BTreeSet<LabelSet>,
    max_rel: u32,
) -> Result<FiniteStructure> {
    let s = match strategy.family {
        Family::Bkl { n } => random_bkl_over(rng, n, top, sources, max_rel)?,
        Family::Sets => FiniteStructure::set(top.to_vec())?,
        Family::Graphs => {
            let mut inside: BTreeMap<(Elem, Elem), bool> = BTreeMap::new();
            for (a, inj) in sources {
                for &u in a.elements() {
                    for &v in a.elements() {
                        inside.insert((inj.get(u).unwrap(), inj.get(v).unwrap()), a.has_edge(u, v));
                    }
                }
            }
            let mut edges = Vec::new();
            for (i, &u) in top.iter().enumerate() {
                for &v in &top[i + 1..] {
                    let e = match inside.get(&(u, v)) {
                        Some(&e) => e,
                        None => rng.gen_bool(0.5),
                    };
                    if e {
                        edges.push((u, v));
                        edges.push((v, u));
                    }
                }
            }
            FiniteStructure::graph(top.to_vec(), edges)?
        }
    };
    let Some(universe) = strategy.labels else { return Ok(s) };
    let mut sets = BTreeMap::new();
    for (a, inj) in sources {
        for (x, y) in inj.pairs() {
            sets.insert(y, a.label_set(x).unwrap());
        }
    }
    let fresh: Vec<Elem> = top.iter().copied().filter(|e| !sets.contains_key(e)).collect();
    sets.extend(random_labels(rng, universe, &fresh, used));
    s.with_labels(universe, &sets)
}

/// A random disjoint cube of dimension `k`: each face is built on the
/// colimit of the faces below it, possibly with one extra point, with
/// random entries outside the images.
pub fn random_cube<R: Rng>(
    rng: &mut R,
    strategy: &Strategy,
    k: usize,
    shape: Shape,
    opts: RandomOptions,
    ids: &mut IdAllocator,
) -> Result<CubeDiagram> {
    let mut faces: BTreeMap<Face, FiniteStructure> = BTreeMap::new();
    let mut maps: BTreeMap<(Face, Face), Embedding> = BTreeMap::new();
    let mut used = BTreeSet::new();
    for sigma in shape.faces(k) {
        let (top, injections) = if sigma.is_empty() {
            (Vec::new(), BTreeMap::new())
        } else {
            let below = sub_boundary(&faces, &maps, sigma)?;
            let col = colimit_unchecked(&below, ids)?;
            let idx: Vec<usize> = sigma.indices().collect();
            let lift = |f: Face| Face::from_indices(f.indices().map(|j| idx[j]));
            (col.elements, col.injections.into_iter().map(|(f, e)| (lift(f), e)).collect::<BTreeMap<_, _>>())
        };
        let mut top = top;
        let room = opts.max_face.saturating_sub(top.len());
        let extra = if room == 0 { 0 } else { rng.gen_range(0..=room.min(if sigma.is_empty() { 2 } else { 1 })) };
        for _ in 0..extra {
            top.push(ids.fresh());
        }
        let sources: Vec<(&FiniteStructure, &Embedding)> = injections.iter().map(|(f, e)| (&faces[f], e)).collect();
        let a = random_over(rng, strategy, &top, &sources, &mut used, opts.max_rel)?;
        for (f, inj) in &injections {
            maps.insert((*f, sigma), inj.clone());
        }
        faces.insert(sigma, a);
    }
    CubeDiagram::new(k, shape, faces, maps)
}

/// The boundary of the sub-cube below `sigma`, re-indexed as a
/// `|sigma|`-cube.
fn sub_boundary(
    faces: &BTreeMap<Face, FiniteStructure>,
    maps: &BTreeMap<(Face, Face), Embedding>,
    sigma: Face,
) -> Result<CubeDiagram> {
    let idx: Vec<usize> = sigma.indices().collect();
    let squash = |f: Face| Face::from_indices(idx.iter().enumerate().filter(|(_, &i)| f.contains(i)).map(|(j, _)| j));
    let subs: Vec<Face> = sigma.subsets().into_iter().filter(|&f| f != sigma).collect();
    let mut pf = BTreeMap::new();
    let mut pm = BTreeMap::new();
    for &s in &subs {
        pf.insert(squash(s), faces[&s].clone());
        for &t in &subs {
            if s != t && s.is_subset(t) {
                if let Some(m) = maps.get(&(s, t)) {
                    pm.insert((squash(s), squash(t)), m.clone());
                }
            }
        }
    }
    CubeDiagram::new(idx.len(), Shape::Boundary, pf, pm)
}

/// `a` plus `extra` fresh points, with random entries (or edges, or
/// labels) on everything new. The inclusion is an embedding.
pub fn random_extension<R: Rng>(
    rng: &mut R,
    strategy: &Strategy,
    a: &FiniteStructure,
    extra: usize,
    used_labels: &mut BTreeSet<LabelSet>,
    max_rel: u32,
    ids: &mut IdAllocator,
) -> Result<FiniteStructure> {
    if let Some(m) = a.max_id() {
        ids.observe(m);
    }
    let mut top = a.elements().to_vec();
    for _ in 0..extra {
        top.push(ids.fresh());
    }
    let id = Embedding::identity(a.elements());
    random_over(rng, strategy, &top, &[(a, &id)], used_labels, max_rel)
}

/// A random element subset of `s` of the given size.
pub fn random_subset<R: Rng>(rng: &mut R, s: &FiniteStructure, size: usize) -> BTreeSet<Elem> {
    s.elements().choose_multiple(rng, size).copied().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cube::{validate_cube, validate_disjoint};
    use crate::structure::validate_family;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn random_cubes_are_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for (st, k) in
            [(Strategy::bkl(2), 2), (Strategy::bkl(3), 3), (Strategy::sets().labeled(8), 3), (Strategy::graphs(), 3)]
        {
            for _ in 0..10 {
                let mut ids = IdAllocator::new();
                let c = random_cube(&mut rng, &st, k, Shape::Full, RandomOptions::default(), &mut ids).unwrap();
                assert!(validate_cube(&c).is_valid());
                assert!(validate_disjoint(&c).is_valid());
                for (f, a) in c.faces() {
                    assert!(f == c.top() || a.len() <= 4);
                    assert!(validate_family(a).is_valid());
                }
            }
        }
    }
}
