//! Finite structures of the three supported families and their labeled
//! expansions.
//!
//! A BKL_n structure has countably many n-ary function symbols `s_i` and
//! n-ary relation symbols `R_j`. Every n-tuple satisfies exactly one `R_j`
//! and `s_i(c) = c_0` whenever `i > j`, so a tuple is stored as one
//! [`TupleEntry`]: the index `j` and the `j + 1` values `s_0(c), ..., s_j(c)`.
//! Tables are total over `elements^n`, repeated coordinates included, and
//! identical entries are interned so that large completions stay compact.

mod closure;
mod embed;
mod labels;
mod theta;
mod validate;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use closure::{generated_substructure, independence_check, is_closed};
pub use embed::{check_embedding, embeds, find_embeddings, find_embeddings_extending, is_isomorphic, Embedding};
pub use labels::{LabelSet, Labeling};
pub use theta::{satisfies_theta, theta, Atom, ThetaFormula};
pub(crate) use validate::next_subset;
pub use validate::{validate_bkl, validate_family, validate_graph, validate_labels};

/// Element ids are global naturals; structures never renumber them.
pub type Elem = u32;

/// The class a structure belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Family {
    Bkl { n: usize },
    Sets,
    Graphs,
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::Bkl { .. } => "bkl",
            Family::Sets => "sets",
            Family::Graphs => "graphs",
        }
    }

    /// Arity of the BKL symbols, if any.
    pub fn bkl_arity(&self) -> Option<usize> {
        match self {
            Family::Bkl { n } => Some(*n),
            _ => None,
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::Bkl { n } => write!(f, "bkl({n})"),
            Family::Sets => write!(f, "sets"),
            Family::Graphs => write!(f, "graphs"),
        }
    }
}

/// The relation index of a tuple and its non-trivial function values.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TupleEntry {
    pub rel: u32,
    /// `s_0(c), ..., s_rel(c)`; always `rel + 1` long.
    pub values: Vec<Elem>,
}

impl TupleEntry {
    pub fn new(rel: u32, values: Vec<Elem>) -> Self {
        TupleEntry { rel, values }
    }

    /// `R_0(c)` and `s_0(c) = c_0`: the entry that generates nothing new.
    pub fn trivial(tuple: &[Elem]) -> Self {
        TupleEntry { rel: 0, values: vec![tuple[0]] }
    }

    /// Value of `s_i` on `tuple`, decompressing the implicit `c_0` tail.
    pub fn s(&self, i: usize, tuple: &[Elem]) -> Elem {
        self.values.get(i).copied().unwrap_or(tuple[0])
    }

    /// The first `count` function values with the implicit tail filled in.
    pub fn decompress(&self, tuple: &[Elem], count: usize) -> Vec<Elem> {
        (0..count).map(|i| self.s(i, tuple)).collect()
    }

    /// Inverse of [`TupleEntry::decompress`] given the relation index.
    pub fn compress(rel: u32, decompressed: &[Elem]) -> Self {
        TupleEntry { rel, values: decompressed[..=rel as usize].to_vec() }
    }

    pub fn map_values(&self, f: impl Fn(Elem) -> Elem) -> Self {
        TupleEntry { rel: self.rel, values: self.values.iter().map(|&v| f(v)).collect() }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct Table {
    pub(crate) entries: Vec<TupleEntry>,
    /// Entry index for each tuple, in lexicographic order of positions.
    pub(crate) slots: Vec<u32>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) enum Body {
    Bkl {
        n: usize,
        table: Table,
    },
    Set,
    /// Row-major adjacency over positions.
    Graph {
        adj: Vec<bool>,
    },
}

/// A finite structure, optionally expanded by unary label predicates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteStructure {
    elements: Vec<Elem>,
    pub(crate) body: Body,
    labels: Option<Labeling>,
}

/// Number of n-tuples over m elements.
pub(crate) fn tuple_count(m: usize, n: usize) -> usize {
    m.checked_pow(n as u32).expect("tuple table too large")
}

pub(crate) fn decode(mut index: usize, m: usize, out: &mut [usize]) {
    for slot in out.iter_mut().rev() {
        *slot = index % m;
        index /= m;
    }
}

pub(crate) fn encode(positions: &[usize], m: usize) -> usize {
    positions.iter().fold(0, |acc, &p| acc * m + p)
}

/// Iterates all n-tuples over `0..m` in lexicographic order.
pub(crate) fn for_each_tuple(m: usize, n: usize, mut f: impl FnMut(&[usize])) {
    if m == 0 {
        return;
    }
    let mut cur = vec![0usize; n];
    loop {
        f(&cur);
        let mut i = n;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            cur[i] += 1;
            if cur[i] < m {
                break;
            }
            cur[i] = 0;
        }
    }
}

fn sorted_unique(mut elements: Vec<Elem>) -> Result<Vec<Elem>> {
    elements.sort_unstable();
    if let Some(w) = elements.windows(2).find(|w| w[0] == w[1]) {
        return Err(Error::DuplicateElement(w[0]));
    }
    Ok(elements)
}

impl FiniteStructure {
    pub fn empty(family: Family) -> Self {
        let body = match family {
            Family::Bkl { n } => Body::Bkl { n, table: Table { entries: vec![], slots: vec![] } },
            Family::Sets => Body::Set,
            Family::Graphs => Body::Graph { adj: vec![] },
        };
        FiniteStructure { elements: vec![], body, labels: None }
    }

    /// Builds a BKL_n structure by evaluating `entry` on every n-tuple.
    pub fn bkl(n: usize, elements: Vec<Elem>, mut entry: impl FnMut(&[Elem]) -> TupleEntry) -> Result<Self> {
        if n == 0 {
            return Err(Error::ArityMismatch { left: 0, right: 1 });
        }
        let elements = sorted_unique(elements)?;
        let m = elements.len();
        let mut entries: Vec<TupleEntry> = Vec::new();
        let mut interned: HashMap<TupleEntry, u32> = HashMap::new();
        let mut slots = Vec::with_capacity(tuple_count(m, n));
        let mut tuple = vec![0 as Elem; n];
        let mut err = None;
        for_each_tuple(m, n, |pos| {
            if err.is_some() {
                return;
            }
            for (t, &p) in tuple.iter_mut().zip(pos) {
                *t = elements[p];
            }
            let e = entry(&tuple);
            if e.values.len() != e.rel as usize + 1 {
                err = Some(Error::BadEntry {
                    tuple: tuple.clone(),
                    reason: format!("{} values for relation index {}", e.values.len(), e.rel),
                });
                return;
            }
            if let Some(&v) = e.values.iter().find(|v| elements.binary_search(v).is_err()) {
                err = Some(Error::NotAnElement(v));
                return;
            }
            let idx = *interned.entry(e).or_insert_with_key(|k| {
                entries.push(k.clone());
                (entries.len() - 1) as u32
            });
            slots.push(idx);
        });
        if let Some(e) = err {
            return Err(e);
        }
        Ok(FiniteStructure { elements, body: Body::Bkl { n, table: Table { entries, slots } }, labels: None })
    }

    /// Builds a BKL_n structure from an explicit tuple list, which must be total.
    pub fn bkl_from_entries(
        n: usize,
        elements: Vec<Elem>,
        entries: impl IntoIterator<Item = (Vec<Elem>, TupleEntry)>,
    ) -> Result<Self> {
        let mut map: BTreeMap<Vec<Elem>, TupleEntry> = BTreeMap::new();
        for (t, e) in entries {
            if t.len() != n {
                return Err(Error::BadEntry { tuple: t, reason: format!("tuple length differs from arity {n}") });
            }
            if let Some(&x) = t.iter().find(|x| !elements.contains(x)) {
                return Err(Error::NotAnElement(x));
            }
            if map.insert(t.clone(), e).is_some() {
                return Err(Error::BadEntry { tuple: t, reason: "duplicate tuple".into() });
            }
        }
        let mut missing = None;
        let s = Self::bkl(n, elements, |t| match map.get(t) {
            Some(e) => e.clone(),
            None => {
                missing.get_or_insert_with(|| t.to_vec());
                TupleEntry::trivial(t)
            }
        })?;
        match missing {
            Some(t) => Err(Error::NonTotalTable(t)),
            None => Ok(s),
        }
    }

    pub fn set(elements: Vec<Elem>) -> Result<Self> {
        Ok(FiniteStructure { elements: sorted_unique(elements)?, body: Body::Set, labels: None })
    }

    /// A graph from directed pairs. Symmetry and irreflexivity are checked
    /// by [`validate_graph`], not here.
    pub fn graph(elements: Vec<Elem>, edges: impl IntoIterator<Item = (Elem, Elem)>) -> Result<Self> {
        let elements = sorted_unique(elements)?;
        let m = elements.len();
        let mut adj = vec![false; m * m];
        for (u, v) in edges {
            let pu = elements.binary_search(&u).map_err(|_| Error::NotAnElement(u))?;
            let pv = elements.binary_search(&v).map_err(|_| Error::NotAnElement(v))?;
            adj[pu * m + pv] = true;
        }
        Ok(FiniteStructure { elements, body: Body::Graph { adj }, labels: None })
    }

    /// Attaches labels; every element needs a set, indices below `universe`.
    pub fn with_labels(mut self, universe: u32, sets: &BTreeMap<Elem, LabelSet>) -> Result<Self> {
        if universe > 64 {
            return Err(Error::UniverseTooLarge(universe));
        }
        let mut out = Vec::with_capacity(self.elements.len());
        for e in &self.elements {
            let set = *sets.get(e).ok_or(Error::BadMap(format!("no label set for element {e}")))?;
            if let Some(l) = set.max_index() {
                if l >= universe {
                    return Err(Error::LabelOutOfRange { label: l, universe });
                }
            }
            out.push(set);
        }
        if let Some(&e) = sets.keys().find(|e| self.elements.binary_search(e).is_err()) {
            return Err(Error::NotAnElement(e));
        }
        self.labels = Some(Labeling::new(universe, out));
        Ok(self)
    }

    /// The reduct that forgets the labels.
    pub fn reduct(&self) -> Self {
        FiniteStructure { elements: self.elements.clone(), body: self.body.clone(), labels: None }
    }

    pub fn elements(&self) -> &[Elem] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn family(&self) -> Family {
        match &self.body {
            Body::Bkl { n, .. } => Family::Bkl { n: *n },
            Body::Set => Family::Sets,
            Body::Graph { .. } => Family::Graphs,
        }
    }

    pub fn position(&self, e: Elem) -> Option<usize> {
        self.elements.binary_search(&e).ok()
    }

    pub fn contains(&self, e: Elem) -> bool {
        self.position(e).is_some()
    }

    pub fn max_id(&self) -> Option<Elem> {
        self.elements.last().copied()
    }

    pub fn labels(&self) -> Option<&Labeling> {
        self.labels.as_ref()
    }

    pub fn is_labeled(&self) -> bool {
        self.labels.is_some()
    }

    pub fn universe(&self) -> Option<u32> {
        self.labels.as_ref().map(|l| l.universe())
    }

    pub fn label_set(&self, e: Elem) -> Option<LabelSet> {
        let p = self.position(e)?;
        self.labels.as_ref().map(|l| l.sets()[p])
    }

    pub(crate) fn label_at(&self, p: usize) -> Option<LabelSet> {
        self.labels.as_ref().map(|l| l.sets()[p])
    }

    /// Entry of `tuple` (BKL only).
    pub fn entry(&self, tuple: &[Elem]) -> Option<&TupleEntry> {
        let Body::Bkl { n, table } = &self.body else { return None };
        if tuple.len() != *n {
            return None;
        }
        let mut idx = 0usize;
        for &t in tuple {
            idx = idx * self.len() + self.position(t)?;
        }
        Some(&table.entries[table.slots[idx] as usize])
    }

    pub(crate) fn entry_at(&self, index: usize) -> &TupleEntry {
        match &self.body {
            Body::Bkl { table, .. } => &table.entries[table.slots[index] as usize],
            _ => panic!("entry_at on a structure without tuple table"),
        }
    }

    /// `s_i(tuple)` with the compressed tail decompressed.
    pub fn s(&self, i: usize, tuple: &[Elem]) -> Option<Elem> {
        self.entry(tuple).map(|e| e.s(i, tuple))
    }

    /// All (tuple, entry) pairs in lexicographic tuple order (BKL only).
    pub fn tuples(&self) -> Vec<(Vec<Elem>, &TupleEntry)> {
        let Body::Bkl { n, table } = &self.body else { return vec![] };
        let mut out = Vec::with_capacity(table.slots.len());
        let mut i = 0;
        for_each_tuple(self.len(), *n, |pos| {
            let t = pos.iter().map(|&p| self.elements[p]).collect();
            out.push((t, &table.entries[table.slots[i] as usize]));
            i += 1;
        });
        out
    }

    pub fn has_edge(&self, u: Elem, v: Elem) -> bool {
        match (&self.body, self.position(u), self.position(v)) {
            (Body::Graph { adj }, Some(pu), Some(pv)) => adj[pu * self.len() + pv],
            _ => false,
        }
    }

    pub(crate) fn adj_at(&self, pu: usize, pv: usize) -> bool {
        match &self.body {
            Body::Graph { adj } => adj[pu * self.len() + pv],
            _ => false,
        }
    }

    /// Directed edge list in lexicographic order (graphs only).
    pub fn edges(&self) -> Vec<(Elem, Elem)> {
        let Body::Graph { adj } = &self.body else { return vec![] };
        let m = self.len();
        let mut out = vec![];
        for i in 0..m {
            for j in 0..m {
                if adj[i * m + j] {
                    out.push((self.elements[i], self.elements[j]));
                }
            }
        }
        out
    }

    /// The substructure on `keep`, which must be closed for BKL structures.
    pub fn restrict(&self, keep: &BTreeSet<Elem>) -> Result<Self> {
        if let Some(&e) = keep.iter().find(|e| !self.contains(**e)) {
            return Err(Error::NotAnElement(e));
        }
        let elements: Vec<Elem> = keep.iter().copied().collect();
        let mut out = match &self.body {
            Body::Bkl { n, .. } => {
                if !is_closed(self, keep) {
                    return Err(Error::NotClosed);
                }
                Self::bkl(*n, elements.clone(), |t| self.entry(t).expect("closed subset").clone())?
            }
            Body::Set => Self::set(elements.clone())?,
            Body::Graph { .. } => {
                let edges = self.edges().into_iter().filter(|(u, v)| keep.contains(u) && keep.contains(v));
                Self::graph(elements.clone(), edges)?
            }
        };
        if let Some(l) = &self.labels {
            let sets = elements.iter().map(|&e| (e, self.label_set(e).unwrap())).collect();
            out = out.with_labels(l.universe(), &sets)?;
        }
        Ok(out)
    }

    /// Transports the structure along an injective id map defined on every element.
    pub fn rename(&self, map: &Embedding) -> Result<Self> {
        let mut image = Vec::with_capacity(self.len());
        for &e in &self.elements {
            image.push(map.get(e).ok_or_else(|| Error::BadMap(format!("{e} unmapped")))?);
        }
        let new_elements = sorted_unique(image).map_err(|_| Error::BadMap("not injective".into()))?;
        let f = |e: Elem| map.get(e).expect("mapped");
        let inverse: HashMap<Elem, Elem> = self.elements.iter().map(|&e| (f(e), e)).collect();
        let mut out = match &self.body {
            Body::Bkl { n, .. } => Self::bkl(*n, new_elements.clone(), |t| {
                let pre: Vec<Elem> = t.iter().map(|x| inverse[x]).collect();
                self.entry(&pre).expect("total").map_values(f)
            })?,
            Body::Set => Self::set(new_elements.clone())?,
            Body::Graph { .. } => {
                Self::graph(new_elements.clone(), self.edges().into_iter().map(|(u, v)| (f(u), f(v))))?
            }
        };
        if let Some(l) = &self.labels {
            let sets = self.elements.iter().zip(l.sets()).map(|(&e, &s)| (f(e), s)).collect();
            out = out.with_labels(l.universe(), &sets)?;
        }
        Ok(out)
    }
}
