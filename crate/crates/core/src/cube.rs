//! Cube-shaped diagrams over the subset lattice of `{0, ..., k-1}`.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::report::{ValidationReport, Violation};
use crate::structure::{check_embedding, Elem, Embedding, FiniteStructure};

pub const MAX_DIM: usize = 16;

/// A subset of `[k]` as a bitmask. Faces are ordered by size, then by mask.
#[derive(Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Face(pub u16);

impl Face {
    pub const EMPTY: Face = Face(0);

    pub fn full(k: usize) -> Face {
        assert!(k <= MAX_DIM);
        Face(((1u32 << k) - 1) as u16)
    }

    pub fn singleton(i: usize) -> Face {
        Face(1 << i)
    }

    pub fn from_indices(indices: impl IntoIterator<Item = usize>) -> Face {
        Face(indices.into_iter().fold(0, |acc, i| acc | (1 << i)))
    }

    pub fn mask(self) -> u16 {
        self.0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn contains(self, i: usize) -> bool {
        i < MAX_DIM && self.0 & (1 << i) != 0
    }

    pub fn is_subset(self, other: Face) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn union(self, other: Face) -> Face {
        Face(self.0 | other.0)
    }

    pub fn intersection(self, other: Face) -> Face {
        Face(self.0 & other.0)
    }

    pub fn difference(self, other: Face) -> Face {
        Face(self.0 & !other.0)
    }

    pub fn with(self, i: usize) -> Face {
        Face(self.0 | (1 << i))
    }

    pub fn without(self, i: usize) -> Face {
        Face(self.0 & !(1 << i))
    }

    pub fn indices(self) -> impl Iterator<Item = usize> {
        (0..MAX_DIM).filter(move |&i| self.contains(i))
    }

    /// Whether the face lives in a `k`-cube.
    pub fn fits(self, k: usize) -> bool {
        (self.0 as u32) >> k == 0
    }

    /// All faces of the `k`-cube in face order.
    pub fn all(k: usize) -> Vec<Face> {
        let mut v: Vec<Face> = (0..1u32 << k).map(|m| Face(m as u16)).collect();
        v.sort();
        v
    }

    /// Subsets of this face in face order.
    pub fn subsets(self) -> Vec<Face> {
        let mut v = Vec::new();
        let mut s = self.0;
        loop {
            v.push(Face(s));
            if s == 0 {
                break;
            }
            s = (s - 1) & self.0;
        }
        v.sort();
        v
    }
}

impl Ord for Face {
    fn cmp(&self, other: &Self) -> Ordering {
        self.len().cmp(&other.len()).then(self.0.cmp(&other.0))
    }
}

impl PartialOrd for Face {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Face {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (j, i) in self.indices().enumerate() {
            if j > 0 {
                write!(f, ",")?;
            }
            write!(f, "{i}")?;
        }
        write!(f, "}}")
    }
}

impl fmt::Debug for Face {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Shape {
    Full,
    /// Every face except the top one.
    Boundary,
}

impl Shape {
    pub fn faces(self, k: usize) -> Vec<Face> {
        let mut faces = Face::all(k);
        if self == Shape::Boundary {
            faces.pop();
        }
        faces
    }
}

/// Structures `A_σ` and embeddings `f^σ_τ` for every present `σ ⊆ τ`,
/// identities included.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CubeDiagram {
    k: usize,
    shape: Shape,
    faces: BTreeMap<Face, FiniteStructure>,
    maps: BTreeMap<(Face, Face), Embedding>,
}

impl CubeDiagram {
    /// Assembles a diagram. Identity maps are filled in; any other missing
    /// map is composed from the maps along covering relations if possible.
    pub fn new(
        k: usize,
        shape: Shape,
        faces: BTreeMap<Face, FiniteStructure>,
        mut maps: BTreeMap<(Face, Face), Embedding>,
    ) -> Result<Self> {
        if k > MAX_DIM {
            return Err(Error::DimensionTooLarge(k));
        }
        let expected = shape.faces(k);
        for &f in faces.keys() {
            if !f.fits(k) || (shape == Shape::Boundary && f == Face::full(k)) {
                return Err(Error::FaceOutOfRange { face: f, k });
            }
        }
        if let Some(&f) = expected.iter().find(|f| !faces.contains_key(f)) {
            return Err(Error::MissingFace(f));
        }
        for &(s, t) in maps.keys() {
            if !s.is_subset(t) || !faces.contains_key(&s) || !faces.contains_key(&t) {
                return Err(Error::ShapeMismatch(format!("map {s} -> {t} does not fit the cube")));
            }
        }
        for (&f, a) in &faces {
            maps.entry((f, f)).or_insert_with(|| Embedding::identity(a.elements()));
        }
        for &t in &expected {
            for s in t.subsets().into_iter().rev() {
                if maps.contains_key(&(s, t)) {
                    continue;
                }
                let step = t.difference(s).indices().next().unwrap();
                let mid = s.with(step);
                let composed = match (maps.get(&(s, mid)), maps.get(&(mid, t))) {
                    _ if faces[&s].is_empty() => Embedding::default(),
                    (Some(a), Some(b)) => a.then(b)?,
                    _ => return Err(Error::MissingMap(s, t)),
                };
                maps.insert((s, t), composed);
            }
        }
        Ok(CubeDiagram { k, shape, faces, maps })
    }

    /// The 0-dimensional cube on one structure.
    pub fn point(a: FiniteStructure) -> Self {
        CubeDiagram::new(0, Shape::Full, [(Face::EMPTY, a)].into(), BTreeMap::new()).expect("point cube")
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn top(&self) -> Face {
        Face::full(self.k)
    }

    pub fn faces(&self) -> impl Iterator<Item = (Face, &FiniteStructure)> {
        self.faces.iter().map(|(&f, s)| (f, s))
    }

    pub fn face_list(&self) -> Vec<Face> {
        self.faces.keys().copied().collect()
    }

    pub fn face(&self, f: Face) -> Option<&FiniteStructure> {
        self.faces.get(&f)
    }

    pub fn map(&self, s: Face, t: Face) -> Option<&Embedding> {
        self.maps.get(&(s, t))
    }

    pub fn maps(&self) -> impl Iterator<Item = ((Face, Face), &Embedding)> {
        self.maps.iter().map(|(&k, v)| (k, v))
    }

    /// `f^σ_τ(A_σ)`.
    pub fn image(&self, s: Face, t: Face) -> BTreeSet<Elem> {
        match self.maps.get(&(s, t)) {
            Some(m) => m.image(),
            None => BTreeSet::new(),
        }
    }

    /// Drops the top face, if present.
    pub fn boundary(&self) -> CubeDiagram {
        let top = self.top();
        let faces = self.faces.iter().filter(|(&f, _)| f != top).map(|(&f, s)| (f, s.clone())).collect();
        let maps = self.maps.iter().filter(|((_, t), _)| *t != top).map(|(&k, v)| (k, v.clone())).collect();
        CubeDiagram { k: self.k, shape: Shape::Boundary, faces, maps }
    }

    /// Adds a top face and its maps to a boundary diagram.
    pub fn with_top(&self, top: FiniteStructure, into_top: &BTreeMap<Face, Embedding>) -> Result<CubeDiagram> {
        if self.shape != Shape::Boundary {
            return Err(Error::ShapeMismatch("diagram already has a top face".into()));
        }
        let t = self.top();
        let mut faces = self.faces.clone();
        let mut maps = self.maps.clone();
        for (&f, m) in into_top {
            maps.insert((f, t), m.clone());
        }
        faces.insert(t, top);
        CubeDiagram::new(self.k, Shape::Full, faces, maps)
    }

    /// The sub-diagram on the faces below `sigma`, re-indexed as a
    /// `|sigma|`-cube.
    pub fn restrict_to(&self, sigma: Face) -> Result<CubeDiagram> {
        let idx: Vec<usize> = sigma.indices().collect();
        let squash =
            |f: Face| Face::from_indices(idx.iter().enumerate().filter(|(_, &i)| f.contains(i)).map(|(j, _)| j));
        let mut faces = BTreeMap::new();
        let mut maps = BTreeMap::new();
        for s in sigma.subsets() {
            let a = self.faces.get(&s).ok_or(Error::MissingFace(s))?;
            faces.insert(squash(s), a.clone());
            for t in sigma.subsets() {
                if s.is_subset(t) {
                    if let Some(m) = self.maps.get(&(s, t)) {
                        maps.insert((squash(s), squash(t)), m.clone());
                    }
                }
            }
        }
        CubeDiagram::new(idx.len(), Shape::Full, faces, maps)
    }
}

/// Identity and functoriality, plus that every map is an embedding.
pub fn validate_cube(c: &CubeDiagram) -> ValidationReport {
    let mut r = ValidationReport::default();
    for (&(s, t), m) in &c.maps {
        let (a, b) = (&c.faces[&s], &c.faces[&t]);
        if s == t {
            if !(m.is_identity() && m.len() == a.len() && check_embedding(a, a, m).is_ok()) {
                r.push(Violation::NotIdentity { face: s });
            }
        } else if let Err(reason) = check_embedding(a, b, m) {
            r.push(Violation::NotEmbedding { from: s, to: t, reason });
        }
    }
    let faces = c.face_list();
    for &s in &faces {
        for &t in &faces {
            if !s.is_subset(t) || s == t {
                continue;
            }
            for &u in &faces {
                if !t.is_subset(u) || t == u {
                    continue;
                }
                let direct = &c.maps[&(s, u)];
                match c.maps[&(s, t)].then(&c.maps[&(t, u)]) {
                    Ok(m) if &m == direct => {}
                    _ => r.push(Violation::Functoriality { sigma: s, tau: t, rho: u }),
                }
            }
        }
    }
    r
}

/// `f^σ_{σ∪τ}(A_σ) ∩ f^τ_{σ∪τ}(A_τ) = f^{σ∩τ}_{σ∪τ}(A_{σ∩τ})` for every
/// unordered pair whose union is present.
pub fn validate_disjoint(c: &CubeDiagram) -> ValidationReport {
    let mut r = ValidationReport::default();
    let faces = c.face_list();
    for (i, &s) in faces.iter().enumerate() {
        for &t in &faces[i + 1..] {
            if s.is_subset(t) || t.is_subset(s) {
                continue;
            }
            let u = s.union(t);
            if !c.faces.contains_key(&u) {
                continue;
            }
            let lhs: BTreeSet<Elem> = c.image(s, u).intersection(&c.image(t, u)).copied().collect();
            if lhs != c.image(s.intersection(t), u) {
                r.push(Violation::Disjointness { sigma: s, tau: t });
            }
        }
    }
    r
}

/// First pair `σ ⊄ τ` (in face order) whose top image is contained in
/// the other's.
pub fn is_reducible(c: &CubeDiagram) -> Result<Option<(Face, Face)>> {
    if c.shape != Shape::Full {
        return Err(Error::ShapeMismatch("reducibility needs the top face".into()));
    }
    let top = c.top();
    let faces = c.face_list();
    let images: BTreeMap<Face, BTreeSet<Elem>> = faces.iter().map(|&f| (f, c.image(f, top))).collect();
    for &s in &faces {
        for &t in &faces {
            if !s.is_subset(t) && images[&s].is_subset(&images[&t]) {
                return Ok(Some((s, t)));
            }
        }
    }
    Ok(None)
}

/// Per-face embeddings `h_σ: A_σ -> B_σ` between two cubes.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DisjointEmbedding {
    pub maps: BTreeMap<Face, Embedding>,
}

impl DisjointEmbedding {
    pub fn identity(c: &CubeDiagram) -> Self {
        DisjointEmbedding { maps: c.faces().map(|(f, a)| (f, Embedding::identity(a.elements()))).collect() }
    }

    pub fn get(&self, f: Face) -> Option<&Embedding> {
        self.maps.get(&f)
    }

    /// `next ∘ self`, face by face.
    pub fn then(&self, next: &DisjointEmbedding) -> Result<DisjointEmbedding> {
        let mut maps = BTreeMap::new();
        for (&f, m) in &self.maps {
            let n = next.maps.get(&f).ok_or(Error::MissingFace(f))?;
            maps.insert(f, m.then(n)?);
        }
        Ok(DisjointEmbedding { maps })
    }
}

/// Naturality and mixed disjointness of `h` from `a` to `b`.
pub fn validate_disjoint_embedding(
    a: &CubeDiagram,
    b: &CubeDiagram,
    h: &DisjointEmbedding,
) -> Result<ValidationReport> {
    if a.k != b.k || a.shape != b.shape {
        return Err(Error::ShapeMismatch(format!(
            "source is a {:?} {}-cube, target a {:?} {}-cube",
            a.shape, a.k, b.shape, b.k
        )));
    }
    let mut r = ValidationReport::default();
    let faces = a.face_list();
    for &f in &faces {
        let Some(m) = h.maps.get(&f) else { return Err(Error::MissingFace(f)) };
        if let Err(reason) = check_embedding(&a.faces[&f], &b.faces[&f], m) {
            r.push(Violation::HNotEmbedding { face: f, reason });
        }
    }
    if !r.is_valid() {
        return Ok(r);
    }
    for &s in &faces {
        for &t in &faces {
            if !s.is_subset(t) {
                continue;
            }
            let left = a.maps[&(s, t)].then(&h.maps[&t]);
            let right = h.maps[&s].then(&b.maps[&(s, t)]);
            match (left, right) {
                (Ok(l), Ok(rr)) if l == rr => {}
                _ => r.push(Violation::Naturality { sigma: s, tau: t }),
            }
        }
    }
    for &s in &faces {
        for &t in &faces {
            let u = s.union(t);
            if !a.faces.contains_key(&u) {
                continue;
            }
            let hu = &h.maps[&u];
            let moved = hu.image_of(&a.image(s, u));
            let lhs: BTreeSet<Elem> = moved.intersection(&b.image(t, u)).copied().collect();
            let rhs = hu.image_of(&a.image(s.intersection(t), u));
            if lhs != rhs {
                r.push(Violation::MixedDisjointness { sigma: s, tau: t });
            }
        }
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_points(top_edges: [(Elem, Elem); 2]) -> CubeDiagram {
        let e = FiniteStructure::set(vec![]).unwrap();
        let a = FiniteStructure::set(vec![0]).unwrap();
        let b = FiniteStructure::set(vec![1]).unwrap();
        let top = FiniteStructure::set(vec![10, 11]).unwrap();
        let faces = [(Face(0), e), (Face(1), a), (Face(2), b), (Face(3), top)].into();
        let maps = [
            ((Face(0), Face(1)), Embedding::default()),
            ((Face(0), Face(2)), Embedding::default()),
            ((Face(1), Face(3)), Embedding::from_pairs([top_edges[0]])),
            ((Face(2), Face(3)), Embedding::from_pairs([top_edges[1]])),
        ]
        .into();
        CubeDiagram::new(2, Shape::Full, faces, maps).unwrap()
    }

    #[test]
    fn face_order() {
        let f = Face::all(3);
        let masks: Vec<u16> = f.iter().map(|f| f.0).collect();
        assert_eq!(masks, vec![0, 1, 2, 4, 3, 5, 6, 7]);
        assert_eq!(Face(5).to_string(), "{0,2}");
        assert_eq!(Face(6).subsets(), vec![Face(0), Face(2), Face(4), Face(6)]);
    }

    #[test]
    fn point_cube_is_valid() {
        let c = CubeDiagram::point(FiniteStructure::set(vec![3]).unwrap());
        assert!(validate_cube(&c).is_valid());
        assert!(validate_disjoint(&c).is_valid());
        assert_eq!(is_reducible(&c).unwrap(), None);
    }

    #[test]
    fn disjoint_square() {
        let c = two_points([(0, 10), (1, 11)]);
        assert!(validate_cube(&c).is_valid());
        assert!(validate_disjoint(&c).is_valid());
        assert_eq!(is_reducible(&c).unwrap(), None);
        let collapsed = two_points([(0, 10), (1, 10)]);
        assert_eq!(
            validate_disjoint(&collapsed).violations,
            vec![Violation::Disjointness { sigma: Face(1), tau: Face(2) }]
        );
    }

    #[test]
    fn constant_cube_is_reducible() {
        let a = FiniteStructure::set(vec![0]).unwrap();
        let faces = Face::all(1).into_iter().map(|f| (f, a.clone())).collect();
        let maps = [((Face(0), Face(1)), Embedding::identity(&[0]))].into();
        let c = CubeDiagram::new(1, Shape::Full, faces, maps).unwrap();
        assert_eq!(is_reducible(&c).unwrap(), Some((Face(1), Face(0))));
    }

    #[test]
    fn wrong_identity_is_reported() {
        let a = FiniteStructure::set(vec![0, 1]).unwrap();
        let maps = [((Face(0), Face(0)), Embedding::from_pairs([(0, 1), (1, 0)]))].into();
        let c = CubeDiagram::new(0, Shape::Full, [(Face(0), a)].into(), maps).unwrap();
        assert_eq!(validate_cube(&c).violations, vec![Violation::NotIdentity { face: Face(0) }]);
    }

    #[test]
    fn identity_embedding_is_disjoint() {
        let c = two_points([(0, 10), (1, 11)]);
        let h = DisjointEmbedding::identity(&c);
        assert!(validate_disjoint_embedding(&c, &c, &h).unwrap().is_valid());
        let mut bad = h.clone();
        bad.maps.insert(Face(3), Embedding::from_pairs([(10, 11), (11, 10)]));
        let r = validate_disjoint_embedding(&c, &c, &bad).unwrap();
        assert!(r.violations.contains(&Violation::Naturality { sigma: Face(1), tau: Face(3) }));
    }

    #[test]
    fn missing_face_is_structural() {
        let r = CubeDiagram::new(
            1,
            Shape::Full,
            [(Face(0), FiniteStructure::set(vec![]).unwrap())].into(),
            BTreeMap::new(),
        );
        assert!(matches!(r, Err(Error::MissingFace(Face(1)))));
    }
}
