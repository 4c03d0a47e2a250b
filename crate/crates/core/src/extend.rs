//! Pushing an extension of one face through a disjoint cube.

use std::collections::BTreeMap;

use crate::amalgam::{amalgamate_unchecked, IdAllocator, Strategy};
use crate::cube::{
    validate_cube, validate_disjoint, validate_disjoint_embedding, CubeDiagram, DisjointEmbedding, Face, Shape,
};
use crate::error::{Error, Result};
use crate::report::{ValidationReport, Violation};
use crate::structure::{check_embedding, Embedding, FiniteStructure};

/// Extends `c` along `h: A_ρ -> b` to a cube `B` with `B_ρ = b` and a
/// disjoint embedding `c -> B` whose component at `ρ` is `h`.
///
/// Faces not above `ρ` are carried over unchanged with identity
/// components. The result is validated before it is returned.
pub fn extend_cube(
    strategy: &Strategy,
    c: &CubeDiagram,
    rho: Face,
    h: &Embedding,
    b: &FiniteStructure,
    ids: &mut IdAllocator,
) -> Result<(CubeDiagram, DisjointEmbedding)> {
    if c.shape() != Shape::Full {
        return Err(Error::ShapeMismatch("extension needs a full cube".into()));
    }
    let mut pre = validate_cube(c);
    pre.extend(validate_disjoint(c));
    if !pre.is_valid() {
        return Err(Error::Invalid(pre));
    }
    let out = extend_unchecked(strategy, c, rho, h, b, ids)?;
    let mut post = validate_cube(&out.0);
    post.extend(validate_disjoint(&out.0));
    post.extend(validate_disjoint_embedding(c, &out.0, &out.1)?);
    if !post.is_valid() {
        return Err(Error::Internal(format!("extension failed its own checks: {post}")));
    }
    Ok(out)
}

pub(crate) fn extend_unchecked(
    strategy: &Strategy,
    c: &CubeDiagram,
    rho: Face,
    h: &Embedding,
    b: &FiniteStructure,
    ids: &mut IdAllocator,
) -> Result<(CubeDiagram, DisjointEmbedding)> {
    let k = c.k();
    if let Some(n) = strategy.amalgamation_bound() {
        if k >= n {
            return Err(Error::ExtensionRange { k, n });
        }
    }
    if !rho.fits(k) {
        return Err(Error::FaceOutOfRange { face: rho, k });
    }
    strategy.check_member(b)?;
    let a_rho = c.face(rho).expect("full cube");
    if let Err(reason) = check_embedding(a_rho, b, h) {
        let mut r = ValidationReport::default();
        r.push(Violation::HNotEmbedding { face: rho, reason });
        return Err(Error::Invalid(r));
    }
    for (_, a) in c.faces() {
        if let Some(m) = a.max_id() {
            ids.observe(m);
        }
    }
    if let Some(m) = b.max_id() {
        ids.observe(m);
    }

    let f = |s: Face, t: Face| c.map(s, t).expect("full cube");
    let mut faces: BTreeMap<Face, FiniteStructure> = BTreeMap::new();
    let mut g: BTreeMap<(Face, Face), Embedding> = BTreeMap::new();
    let mut hs: BTreeMap<Face, Embedding> = BTreeMap::new();

    let mut above: Vec<Face> = Vec::new();
    for tau in Face::all(k) {
        if rho.is_subset(tau) {
            above.push(tau);
            continue;
        }
        let a = c.face(tau).unwrap();
        faces.insert(tau, a.clone());
        hs.insert(tau, Embedding::identity(a.elements()));
        for s in tau.subsets() {
            g.insert((s, tau), f(s, tau).clone());
        }
    }
    above.sort_by_key(|t| (t.difference(rho).len(), *t));

    for tau in above {
        if tau == rho {
            faces.insert(rho, b.clone());
            hs.insert(rho, h.clone());
            for s in rho.subsets() {
                let m = if s == rho { Embedding::identity(b.elements()) } else { f(s, rho).then(h)? };
                g.insert((s, rho), m);
            }
            continue;
        }
        let a_idx: Vec<usize> = tau.difference(rho).indices().collect();
        let m = a_idx.len();
        let mark = 1usize << m;
        let face_of = |nu: usize| {
            a_idx.iter().enumerate().filter(|(i, _)| nu & (1 << i) != 0).fold(rho, |acc, (_, &j)| acc.with(j))
        };
        let part = Shape::Boundary.faces(m + 1);
        let mut pf: BTreeMap<Face, FiniteStructure> = BTreeMap::new();
        let mut pm: BTreeMap<(Face, Face), Embedding> = BTreeMap::new();
        for &nu in &part {
            let nu_bits = nu.mask() as usize;
            let src = face_of(nu_bits);
            let s = if nu_bits & mark != 0 { faces[&src].clone() } else { c.face(src).unwrap().clone() };
            pf.insert(nu, s);
            for &nu2 in &part {
                if nu == nu2 || !nu.is_subset(nu2) {
                    continue;
                }
                let n2 = nu2.mask() as usize;
                let dst = face_of(n2);
                let map = match (nu_bits & mark != 0, n2 & mark != 0) {
                    (false, false) => f(src, dst).clone(),
                    (true, true) => g[&(src, dst)].clone(),
                    (false, true) => f(src, dst).then(&hs[&dst])?,
                    (true, false) => unreachable!("subset relation"),
                };
                pm.insert((nu, nu2), map);
            }
        }
        let partial = CubeDiagram::new(m + 1, Shape::Boundary, pf, pm)?;
        let full = amalgamate_unchecked(strategy, &partial, ids)?;
        let top = Face::full(m + 1);
        let b_tau = full.face(top).unwrap().clone();
        let h_tau = full.map(Face::full(m), top).unwrap().clone();
        for s in tau.subsets() {
            let map = if s == tau {
                Embedding::identity(b_tau.elements())
            } else if rho.is_subset(s) {
                let nu =
                    a_idx.iter().enumerate().filter(|(_, &j)| s.contains(j)).fold(mark, |acc, (i, _)| acc | (1 << i));
                full.map(Face(nu as u16), top).unwrap().clone()
            } else {
                f(s, tau).then(&h_tau)?
            };
            g.insert((s, tau), map);
        }
        faces.insert(tau, b_tau);
        hs.insert(tau, h_tau);
    }
    let cube = CubeDiagram::new(k, Shape::Full, faces, g)?;
    Ok((cube, DisjointEmbedding { maps: hs }))
}
