//! Bounded search for partial (n+1)-cubes in BKL_n with no valid completion.
//!
//! Whether a completion satisfies (B3) depends on each tuple's entry only
//! through the set of values it contributes to closures, so completions
//! are enumerated up to that equivalence: one value set containing `c_0`
//! per tuple outside the faces.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::amalgam::{assemble_bkl, Strategy};
use crate::cube::{CubeDiagram, Face, Shape};
use crate::error::{Error, Result};
use crate::structure::{
    decode, encode, generated_substructure, independence_check, validate_bkl, Elem, Embedding, Family, FiniteStructure,
    TupleEntry,
};

/// Search effort at one top size.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SizeReport {
    pub size: usize,
    /// Tuples whose entry is not forced by the faces.
    pub free_tuples: usize,
    /// Decision-tree nodes visited.
    pub nodes: u64,
    pub valid_completion: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FailureWitness {
    pub n: usize,
    pub cap: usize,
    #[serde(skip)]
    pub cube: CubeDiagram,
    /// An (n+1)-set that is substructure-independent in every completion found.
    pub independent: Vec<Elem>,
    pub sizes: Vec<SizeReport>,
}

/// The disjoint partial (n+1)-cube with `A_σ = {i : i ∈ σ}`, all entries
/// trivial and all maps inclusions.
pub fn canonical_partial_cube(n: usize) -> CubeDiagram {
    let k = n + 1;
    let faces: BTreeMap<Face, FiniteStructure> = Shape::Boundary
        .faces(k)
        .into_iter()
        .map(|f| (f, FiniteStructure::bkl(n, f.indices().map(|i| i as Elem).collect(), TupleEntry::trivial).unwrap()))
        .collect();
    let mut maps = BTreeMap::new();
    for (&s, a) in &faces {
        for &t in faces.keys() {
            if s.is_subset(t) {
                maps.insert((s, t), Embedding::identity(a.elements()));
            }
        }
    }
    CubeDiagram::new(k, Shape::Boundary, faces, maps).expect("canonical cube")
}

enum Closure {
    Reached,
    Closed,
    Need(usize),
}

struct Completion {
    n: usize,
    m: usize,
    /// Value-set bitmask per tuple; `None` while undecided.
    values: Vec<Option<u64>>,
    nodes: u64,
}

impl Completion {
    fn closure(&self, seeds: u64, target: usize) -> Closure {
        let mut member = seeds;
        let mut need = None;
        let mut pos = vec![0; self.n];
        loop {
            let before = member;
            for t in 0..self.values.len() {
                decode(t, self.m, &mut pos);
                if pos.iter().any(|&p| member & (1 << p) == 0) {
                    continue;
                }
                match self.values[t] {
                    Some(v) => member |= v,
                    None => {
                        need.get_or_insert(t);
                    }
                }
            }
            if member & (1 << target) != 0 {
                return Closure::Reached;
            }
            if member == before {
                return match need {
                    Some(t) => Closure::Need(t),
                    None => Closure::Closed,
                };
            }
            need = None;
        }
    }

    /// `Err(set)` if some (n+1)-set is independent whatever the undecided
    /// tuples are, `Ok(None)` if every (n+1)-set is dependent, otherwise the
    /// tuple to branch on.
    fn status(&self) -> Result<Option<usize>, u64> {
        let mut branch = None;
        let mut idx: Vec<usize> = (0..=self.n).collect();
        if self.m <= self.n {
            return Ok(None);
        }
        loop {
            let set: u64 = idx.iter().fold(0, |acc, &i| acc | (1 << i));
            let mut dependent = false;
            let mut undecided = None;
            for &b in &idx {
                match self.closure(set & !(1 << b), b) {
                    Closure::Reached => {
                        dependent = true;
                        break;
                    }
                    Closure::Need(t) => {
                        undecided.get_or_insert(t);
                    }
                    Closure::Closed => {}
                }
            }
            if !dependent {
                match undecided {
                    None => return Err(set),
                    Some(t) => {
                        branch.get_or_insert(t);
                    }
                }
            }
            if !crate::structure::next_subset(&mut idx, self.m) {
                break;
            }
        }
        Ok(branch)
    }

    /// Returns a forced independent set if no completion is valid.
    fn search(&mut self) -> Result<(), u64> {
        self.nodes += 1;
        let t = match self.status() {
            Err(set) => return Err(set),
            Ok(None) => return Ok(()),
            Ok(Some(t)) => t,
        };
        let mut pos = vec![0; self.n];
        decode(t, self.m, &mut pos);
        let c0 = 1u64 << pos[0];
        let others = ((1u64 << self.m) - 1) & !c0;
        let mut witness = None;
        let mut sub = 0u64;
        loop {
            self.values[t] = Some(c0 | sub);
            match self.search() {
                Ok(()) => return Ok(()),
                Err(set) => {
                    witness.get_or_insert(set);
                }
            }
            if sub == others {
                break;
            }
            sub = (sub.wrapping_sub(others)) & others;
        }
        self.values[t] = None;
        Err(witness.expect("at least one branch"))
    }
}

/// Fixed entries of a completion of `p` on `size` elements, as value sets;
/// the top's ids are `0..size` with the colimit's first.
fn fixed_values(p: &CubeDiagram, n: usize, size: usize) -> (Vec<Option<u64>>, Vec<usize>) {
    let total = size.pow(n as u32);
    let mut values = vec![None; total];
    let mut pos = vec![0; n];
    for (_, a) in p.faces() {
        for (t, entry) in a.tuples() {
            for (slot, &e) in pos.iter_mut().zip(&t) {
                *slot = e as usize;
            }
            let mask = entry.decompress(&t, entry.rel as usize + 1).iter().fold(1u64 << t[0], |acc, &v| acc | (1 << v));
            values[encode(&pos, size)] = Some(mask);
        }
    }
    let free = (0..total).filter(|&t| values[t].is_none()).collect();
    (values, free)
}

/// Exhaustively searches completions of the canonical partial (n+1)-cube
/// with top sizes `n+1..=cap` for one satisfying (B3).
///
/// Returns the cube if none exists within the cap, `None` if some size
/// admits a valid completion.
pub fn search_failure_witness(strategy: &Strategy, cap: usize) -> Result<Option<FailureWitness>> {
    let n = match strategy.family {
        Family::Bkl { n } => n,
        other => {
            return Err(Error::Unsupported(format!(
                "{other} has disjoint amalgamation in every dimension; there is nothing to witness"
            )))
        }
    };
    if n == 0 || n + 1 > 63 || cap > 63 {
        return Err(Error::Unsupported("search needs 1 <= n and cap below 64".into()));
    }
    let cube = canonical_partial_cube(n);
    let mut sizes = Vec::new();
    let mut independent = None;
    for size in n + 1..=cap {
        let (values, free) = fixed_values(&cube, n, size);
        let mut c = Completion { n, m: size, values, nodes: 0 };
        match c.search() {
            Ok(()) => {
                sizes.push(SizeReport { size, free_tuples: free.len(), nodes: c.nodes, valid_completion: true });
                return Ok(None);
            }
            Err(set) => {
                independent.get_or_insert(set);
                sizes.push(SizeReport { size, free_tuples: free.len(), nodes: c.nodes, valid_completion: false });
            }
        }
    }
    let independent = (0..64).filter(|i| independent.unwrap_or(0) & (1 << i) != 0).collect();
    Ok(Some(FailureWitness { n, cap, cube, independent, sizes }))
}

/// Literal enumeration for cross-checking: builds every completion of `p`
/// (whose ids must lie below `size`) on `0..size` (one table per value-set assignment) and runs the
/// validator on each. Returns `(tables, valid)`.
pub fn enumerate_completions(p: &CubeDiagram, n: usize, size: usize) -> Result<(u64, u64)> {
    let (values, free) = fixed_values(p, n, size);
    let top: Vec<Elem> = (0..size as Elem).collect();
    let mut pos = vec![0; n];
    let choices: Vec<Vec<u64>> = free
        .iter()
        .map(|&t| {
            decode(t, size, &mut pos);
            let c0 = 1u64 << pos[0];
            (0..1u64 << size).filter(|v| v & c0 != 0).collect()
        })
        .collect();
    let mut counter = vec![0usize; free.len()];
    let (mut tables, mut valid) = (0u64, 0u64);
    let sources: Vec<(&FiniteStructure, Embedding)> =
        p.faces().map(|(_, a)| (a, Embedding::identity(a.elements()))).collect();
    let free_index: BTreeMap<usize, usize> = free.iter().enumerate().map(|(i, &t)| (t, i)).collect();
    loop {
        let mut i = 0usize;
        let s = assemble_bkl(n, &top, sources.iter().map(|(a, e)| (*a, e)), |_| {
            let mut t;
            loop {
                t = i;
                i += 1;
                if values[t].is_none() {
                    break;
                }
            }
            let mask = choices[free_index[&t]][counter[free_index[&t]]];
            let vals: Vec<Elem> = (0..size as Elem).filter(|&e| mask & (1 << e) != 0).collect();
            TupleEntry::new(vals.len() as u32 - 1, vals)
        })?;
        tables += 1;
        if validate_bkl(&s)?.is_valid() {
            valid += 1;
        }
        let mut j = 0;
        loop {
            if j == counter.len() {
                return Ok((tables, valid));
            }
            counter[j] += 1;
            if counter[j] < choices[j].len() {
                break;
            }
            counter[j] = 0;
            j += 1;
        }
    }
}

/// Outcome of [`check_absorption`].
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct AbsorptionReport {
    pub selections: u64,
    /// Selections whose closure misses part of the bottom face's image.
    pub violations: Vec<Vec<Elem>>,
}

/// For a full `n`-cube in BKL_n: every choice of `x_i` in the image of
/// `A_{i}` but outside the image of the face opposite `i` must generate a
/// substructure of the top containing the image of `A_∅`.
pub fn check_absorption(c: &CubeDiagram) -> Result<AbsorptionReport> {
    let k = c.k();
    let top_face = c.top();
    let top = c.face(top_face).ok_or(Error::MissingFace(top_face))?;
    match top.family() {
        Family::Bkl { n } if n == k => {}
        other => return Err(Error::Unsupported(format!("absorption concerns {k}-cubes in bkl({k}), not {other}"))),
    }
    let bottom = c.image(Face::EMPTY, top_face);
    let candidates: Vec<Vec<Elem>> = (0..k)
        .map(|i| {
            let opposite = c.image(top_face.without(i), top_face);
            c.image(Face::singleton(i), top_face).into_iter().filter(|x| !opposite.contains(x)).collect()
        })
        .collect();
    let mut report = AbsorptionReport::default();
    if candidates.iter().any(|v| v.is_empty()) {
        return Ok(report);
    }
    let mut idx = vec![0usize; k];
    loop {
        let pick: Vec<Elem> = idx.iter().zip(&candidates).map(|(&i, v)| v[i]).collect();
        report.selections += 1;
        let closure = generated_substructure(top, &pick.iter().copied().collect());
        if !bottom.is_subset(&closure) {
            report.violations.push(pick);
        }
        let mut j = k;
        loop {
            if j == 0 {
                return Ok(report);
            }
            j -= 1;
            idx[j] += 1;
            if idx[j] < candidates[j].len() {
                break;
            }
            idx[j] = 0;
        }
    }
}

/// Whether `set` stays independent in `s` (a re-check of a witness).
pub fn is_forced_independent(s: &FiniteStructure, set: &[Elem]) -> bool {
    independence_check(s, &set.iter().copied().collect())
}
