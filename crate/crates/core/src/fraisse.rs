//! The iterative construction of an irreducible k-cube: a chain of
//! disjoint cubes linked by disjoint embeddings, each stage extending one
//! face by one point and pushing the extension through the cube.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::amalgam::{disjoint_amalgamate, IdAllocator, Strategy};
use crate::cube::{is_reducible, CubeDiagram, DisjointEmbedding, Face, Shape, MAX_DIM};
use crate::error::{Error, Result};
use crate::extend::{extend_cube, extend_unchecked};
use crate::structure::{
    find_embeddings, find_embeddings_extending, Elem, Embedding, Family, FiniteStructure, LabelSet,
};
use crate::types::{closed_subsets, enumerate_types, one_point_extensions};

/// Placeholder id of the point a task adds, replaced by a fresh id when
/// the task runs.
pub const NEW_POINT: Elem = Elem::MAX;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunConfig {
    #[serde(flatten)]
    pub strategy: Strategy,
    pub k: usize,
    pub rounds: usize,
    /// Largest extension target `|B'|`.
    pub cap: usize,
    pub seed: u64,
    /// Largest relation index on tuples through the new point.
    pub rel_cap: u32,
    /// Tasks executed per round; `None` drains the whole round.
    pub budget: Option<usize>,
    /// Abort once the top face exceeds this many elements.
    pub max_elements: Option<usize>,
    /// Keep every stage's cube, not just the maps between them.
    pub keep_stages: bool,
    /// Re-validate every extension.
    pub check_stages: bool,
}

impl RunConfig {
    pub fn new(strategy: Strategy, k: usize, rounds: usize, seed: u64) -> Self {
        RunConfig {
            strategy,
            k,
            rounds,
            cap: 1,
            seed,
            rel_cap: 0,
            budget: None,
            max_elements: None,
            keep_stages: false,
            check_stages: true,
        }
    }

    pub fn round_budget(&self) -> usize {
        self.budget.unwrap_or(usize::MAX)
    }

    pub fn check(&self) -> Result<()> {
        if self.k > MAX_DIM {
            return Err(Error::DimensionTooLarge(self.k));
        }
        if let Family::Bkl { n } = self.strategy.family {
            if self.k == 0 || self.k >= n {
                return Err(Error::ExtensionRange { k: self.k, n });
            }
        }
        if self.cap == 0 {
            return Err(Error::Unsupported("the size cap must be at least 1".into()));
        }
        if self.round_budget() == 0 {
            return Err(Error::Unsupported("the round budget must be at least 1".into()));
        }
        Ok(())
    }
}

/// Add one point to the closed substructure `base` of face `rho`, with the
/// new point's tuples (or edges) as in `ext`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExtensionTask {
    pub rho: Face,
    pub base: BTreeSet<Elem>,
    /// Unlabeled structure on `base ∪ {NEW_POINT}`.
    pub ext: FiniteStructure,
}

impl ExtensionTask {
    fn transport(&self, h: &Embedding) -> Result<ExtensionTask> {
        let mut pairs: Vec<(Elem, Elem)> = Vec::new();
        for &b in &self.base {
            pairs.push((b, h.get(b).ok_or_else(|| Error::Internal(format!("task element {b} lost")))?));
        }
        let base = pairs.iter().map(|p| p.1).collect();
        pairs.push((NEW_POINT, NEW_POINT));
        let ext = self.ext.rename(&Embedding::from_pairs(pairs))?;
        Ok(ExtensionTask { rho: self.rho, base, ext })
    }
}

/// One stage transition.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Stage {
    /// Index of the cube this stage produced.
    pub index: usize,
    pub round: usize,
    pub rho: Face,
    pub base: BTreeSet<Elem>,
    /// Id given to the task's new point in `A_ρ`.
    pub new_point: Elem,
    /// The disjoint embedding from the previous cube into this one.
    pub h: DisjointEmbedding,
}

/// A proof that `f^σ(A_σ) ⊄ f^τ(A_τ)`, carried forward stage by stage.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WitnessChain {
    pub sigma: Face,
    pub tau: Face,
    /// Stage at which the chain starts.
    pub birth: usize,
    /// `x_j ∈ A^j_σ` for `j = birth, birth + 1, ...`.
    pub xs: Vec<Elem>,
    /// `y_j = f^σ_{[k]}(x_j)`.
    pub ys: Vec<Elem>,
}

impl WitnessChain {
    pub fn current(&self) -> (Elem, Elem) {
        (*self.xs.last().unwrap(), *self.ys.last().unwrap())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainViolation {
    pub sigma: Face,
    pub tau: Face,
    pub stage: usize,
    pub reason: String,
}

#[derive(Clone, Debug)]
pub struct RunState {
    pub config: RunConfig,
    pub cube: CubeDiagram,
    pub history: Vec<Stage>,
    /// Every stage's cube, stage 0 first, when kept.
    pub stages: Vec<CubeDiagram>,
    pub chains: Vec<WitnessChain>,
    pub violations: Vec<ChainViolation>,
    pub rounds_done: usize,
    pub aborted: Option<String>,
    ids: IdAllocator,
    rng: ChaCha8Rng,
}

impl RunState {
    /// Stage 0: the empty cube.
    pub fn new(config: RunConfig) -> Result<Self> {
        config.check()?;
        let faces = Face::all(config.k).into_iter().map(|f| (f, config.strategy.empty())).collect();
        let cube = CubeDiagram::new(config.k, Shape::Full, faces, BTreeMap::new())?;
        let stages = if config.keep_stages { vec![cube.clone()] } else { Vec::new() };
        let rng = ChaCha8Rng::seed_from_u64(config.seed);
        Ok(RunState {
            config,
            cube,
            history: Vec::new(),
            stages,
            chains: Vec::new(),
            violations: Vec::new(),
            rounds_done: 0,
            aborted: None,
            ids: IdAllocator::new(),
            rng,
        })
    }

    pub fn stage(&self) -> usize {
        self.history.len()
    }

    /// All tasks on the current cube: face order, then base by size and
    /// lexicographically, then extension in canonical order.
    pub fn enumerate_tasks(&self) -> Result<Vec<ExtensionTask>> {
        let mut out = Vec::new();
        for (rho, a) in self.cube.faces() {
            let reduct = a.reduct();
            for base in closed_subsets(&reduct, self.config.cap - 1) {
                let b = reduct.restrict(&base)?;
                for ext in one_point_extensions(&self.config.strategy, &b, NEW_POINT, self.config.rel_cap)? {
                    out.push(ExtensionTask { rho, base: base.clone(), ext });
                }
            }
        }
        Ok(out)
    }

    /// Performs one task: a disjoint 2-amalgamation inside `A_ρ`, then
    /// the extension of the whole cube along it.
    pub fn step(&mut self, task: &ExtensionTask) -> Result<()> {
        let strategy = self.config.strategy;
        let rho = task.rho;
        let a_rho = self.cube.face(rho).ok_or(Error::MissingFace(rho))?.clone();
        let base = a_rho.restrict(&task.base)?;
        let new = self.ids.fresh();
        let mut pairs: Vec<(Elem, Elem)> = task.base.iter().map(|&b| (b, b)).collect();
        pairs.push((NEW_POINT, new));
        let mut ext = task.ext.rename(&Embedding::from_pairs(pairs))?;
        if let Some(universe) = strategy.labels {
            let top = self.cube.face(self.cube.top()).unwrap();
            let used: BTreeSet<LabelSet> = top.labels().map(|l| l.sets().iter().copied().collect()).unwrap_or_default();
            let label = LabelSet::least_unused(universe, LabelSet::EMPTY, LabelSet::EMPTY, &used)
                .ok_or(Error::LabelsExhausted { required: universe + 1 })?;
            let mut sets: BTreeMap<Elem, LabelSet> =
                task.base.iter().map(|&b| (b, a_rho.label_set(b).unwrap())).collect();
            sets.insert(new, label);
            ext = ext.with_labels(universe, &sets)?;
        }
        let id_base = Embedding::identity(base.elements());
        let square = CubeDiagram::new(
            2,
            Shape::Boundary,
            [(Face(0), base.clone()), (Face(1), a_rho.clone()), (Face(2), ext)].into(),
            [((Face(0), Face(1)), id_base.clone()), ((Face(0), Face(2)), id_base)].into(),
        )?;
        let two = disjoint_amalgamate(&strategy, &square, &mut self.ids).map_err(|e| match e {
            e @ Error::LabelsExhausted { .. } => e,
            e => Error::Internal(format!("2-amalgamation failed: {e}")),
        })?;
        let new_face = two.face(Face(3)).unwrap().clone();
        let h_rho = two.map(Face(1), Face(3)).unwrap().clone();
        let (next, h) = if self.config.check_stages {
            extend_cube(&strategy, &self.cube, rho, &h_rho, &new_face, &mut self.ids)?
        } else {
            extend_unchecked(&strategy, &self.cube, rho, &h_rho, &new_face, &mut self.ids)?
        };
        let new_point = two.map(Face(2), Face(3)).unwrap().get(new).unwrap();
        let prev = std::mem::replace(&mut self.cube, next);
        let index = self.history.len() + 1;
        self.history.push(Stage { index, round: self.rounds_done, rho, base: task.base.clone(), new_point, h });
        self.advance_chains(&prev);
        if self.config.keep_stages {
            self.stages.push(self.cube.clone());
        }
        Ok(())
    }

    fn advance_chains(&mut self, prev: &CubeDiagram) {
        let stage = self.history.len();
        let h = &self.history.last().unwrap().h;
        let top = self.cube.top();
        let image = |c: &CubeDiagram, f: Face| c.image(f, top);
        for chain in &mut self.chains {
            let (x, y) = chain.current();
            let x2 = h.get(chain.sigma).and_then(|m| m.get(x));
            let y2 = h.get(top).and_then(|m| m.get(y));
            let (Some(x2), Some(y2)) = (x2, y2) else {
                self.violations.push(ChainViolation {
                    sigma: chain.sigma,
                    tau: chain.tau,
                    stage,
                    reason: "chain element left the domain".into(),
                });
                continue;
            };
            chain.xs.push(x2);
            chain.ys.push(y2);
        }
        for chain in &self.chains {
            let (x, y) = chain.current();
            let fx = self.cube.map(chain.sigma, top).and_then(|m| m.get(x));
            if fx != Some(y) {
                self.violations.push(ChainViolation {
                    sigma: chain.sigma,
                    tau: chain.tau,
                    stage,
                    reason: format!("y = {y} is not the image of x = {x}"),
                });
            }
            if image(&self.cube, chain.tau).contains(&y) {
                self.violations.push(ChainViolation {
                    sigma: chain.sigma,
                    tau: chain.tau,
                    stage,
                    reason: format!("y = {y} fell into the image of {}", chain.tau),
                });
            }
        }
        let rho = self.history.last().unwrap().rho;
        let open: BTreeSet<(Face, Face)> = self.chains.iter().map(|c| (c.sigma, c.tau)).collect();
        let faces = self.cube.face_list();
        for &sigma in &faces {
            if !rho.is_subset(sigma) {
                continue;
            }
            let old = h.get(sigma).unwrap().image_of(prev.face(sigma).unwrap().elements());
            let fresh: Vec<Elem> =
                self.cube.face(sigma).unwrap().elements().iter().copied().filter(|e| !old.contains(e)).collect();
            for &tau in &faces {
                if rho.is_subset(tau) || open.contains(&(sigma, tau)) {
                    continue;
                }
                let tau_image = image(&self.cube, tau);
                let f = self.cube.map(sigma, top).unwrap();
                match fresh.iter().map(|&x| (x, f.get(x).unwrap())).find(|(_, y)| !tau_image.contains(y)) {
                    Some((x, y)) => {
                        self.chains.push(WitnessChain { sigma, tau, birth: stage, xs: vec![x], ys: vec![y] })
                    }
                    None => self.violations.push(ChainViolation {
                        sigma,
                        tau,
                        stage,
                        reason: "no new element escapes the image".into(),
                    }),
                }
            }
        }
        self.chains.sort_by_key(|c| (c.sigma, c.tau));
    }

    /// One round: enumerate the round-start tasks, shuffle each face's
    /// list, and execute them face by face in turn up to the budget.
    /// Queued tasks are carried along each step's disjoint embedding.
    pub fn run_round(&mut self) -> Result<()> {
        let tasks = self.enumerate_tasks()?;
        let mut by_face: BTreeMap<Face, Vec<ExtensionTask>> = BTreeMap::new();
        for t in tasks {
            by_face.entry(t.rho).or_default().push(t);
        }
        for list in by_face.values_mut() {
            list.shuffle(&mut self.rng);
        }
        let mut queue: Vec<ExtensionTask> = Vec::new();
        let budget = self.config.round_budget();
        let depth = by_face.values().map(|v| v.len()).max().unwrap_or(0);
        'fill: for i in 0..depth {
            for list in by_face.values() {
                if queue.len() == budget {
                    break 'fill;
                }
                if let Some(t) = list.get(i) {
                    queue.push(t.clone());
                }
            }
        }
        let mut pending = std::collections::VecDeque::from(queue);
        while let Some(task) = pending.pop_front() {
            if let Some(limit) = self.config.max_elements {
                let size = self.cube.face(self.cube.top()).unwrap().len();
                if size >= limit {
                    self.aborted = Some(format!("top face reached {size} elements (limit {limit})"));
                    return Ok(());
                }
            }
            self.step(&task)?;
            let h = &self.history.last().unwrap().h;
            for t in pending.iter_mut() {
                *t = t.transport(h.get(t.rho).unwrap())?;
            }
        }
        self.rounds_done += 1;
        Ok(())
    }

    /// Per-face coverage of one-point extension axioms `A ⊆ B` with
    /// `|B| <= cap`, evaluated on the unlabeled reducts.
    pub fn coverage_report(&self) -> Result<CoverageReport> {
        let instances = axiom_instances(&self.config)?;
        coverage_of(&self.cube, &instances, self.stage())
    }

    /// Witnesses for every ordered pair `σ ⊄ τ`, re-checked by membership.
    pub fn certify_irreducible(&self) -> Result<Certificate> {
        let top = self.cube.top();
        let faces = self.cube.face_list();
        let mut pairs = Vec::new();
        let mut failed = None;
        for &sigma in &faces {
            for &tau in &faces {
                if sigma.is_subset(tau) {
                    continue;
                }
                let chain = self.chains.iter().find(|c| c.sigma == sigma && c.tau == tau);
                let witness = chain.map(|c| c.current()).filter(|&(x, y)| {
                    self.cube.map(sigma, top).and_then(|m| m.get(x)) == Some(y)
                        && !self.cube.image(tau, top).contains(&y)
                });
                if witness.is_none() && failed.is_none() {
                    failed = Some((sigma, tau));
                }
                pairs.push(PairWitness {
                    sigma,
                    tau,
                    x: witness.map(|w| w.0),
                    y: witness.map(|w| w.1),
                    birth: chain.map(|c| c.birth),
                });
            }
        }
        let reducible = is_reducible(&self.cube)?;
        let pass = failed.is_none() && reducible.is_none() && self.violations.is_empty();
        Ok(Certificate { status: if pass { Status::Pass } else { Status::Failed }, pairs, failed, reducible })
    }
}

/// Runs `config.rounds` rounds from the empty cube.
pub fn run(config: RunConfig) -> Result<RunState> {
    let mut state = RunState::new(config)?;
    for _ in 0..state.config.rounds {
        state.run_round()?;
        if state.aborted.is_some() {
            break;
        }
    }
    Ok(state)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Status {
    Pass,
    Failed,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairWitness {
    pub sigma: Face,
    pub tau: Face,
    pub x: Option<Elem>,
    pub y: Option<Elem>,
    pub birth: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Certificate {
    pub status: Status,
    pub pairs: Vec<PairWitness>,
    /// First unwitnessed pair.
    pub failed: Option<(Face, Face)>,
    /// Reducibility witness of the final cube, if any.
    pub reducible: Option<(Face, Face)>,
}

impl Certificate {
    /// Re-checks every witness against `cube` by membership alone.
    pub fn verify(&self, cube: &CubeDiagram) -> bool {
        let top = cube.top();
        self.pairs.iter().all(|p| match (p.x, p.y) {
            (Some(x), Some(y)) => {
                cube.map(p.sigma, top).and_then(|m| m.get(x)) == Some(y) && !cube.image(p.tau, top).contains(&y)
            }
            _ => self.status == Status::Failed,
        })
    }
}

/// An extension axiom instance: `a` closed in `b`, `b` one point larger.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AxiomInstance {
    pub a: FiniteStructure,
    pub b: FiniteStructure,
}

/// Instances with `|B| <= cap`, relation indices at most `rel_cap` on new
/// tuples, types up to isomorphism.
pub fn axiom_instances(config: &RunConfig) -> Result<Vec<AxiomInstance>> {
    let st = Strategy { labels: None, ..config.strategy };
    let mut out = Vec::new();
    for size in 0..config.cap {
        for a in enumerate_types(&st, size, config.rel_cap)? {
            for b in one_point_extensions(&st, &a, size as Elem, config.rel_cap)? {
                out.push(AxiomInstance { a: a.clone(), b });
            }
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceCoverage {
    pub instance: usize,
    pub a_size: usize,
    pub realizations: usize,
    pub extended: usize,
    pub realized: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FaceCoverage {
    pub face: Face,
    pub instances: Vec<InstanceCoverage>,
    pub realized: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverageReport {
    pub stage: usize,
    pub instance_count: usize,
    pub faces: Vec<FaceCoverage>,
    pub realized: usize,
    pub total: usize,
}

impl CoverageReport {
    pub fn fraction(&self) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            self.realized as f64 / self.total as f64
        }
    }
}

/// Coverage of `instances` on every face of `cube`.
pub fn coverage_of(cube: &CubeDiagram, instances: &[AxiomInstance], stage: usize) -> Result<CoverageReport> {
    let mut faces = Vec::new();
    for (f, s) in cube.faces() {
        let s = s.reduct();
        let mut rows = Vec::new();
        for (i, inst) in instances.iter().enumerate() {
            let realizations = find_embeddings(&inst.a, &s, usize::MAX)?;
            let mut extended = 0;
            for e in &realizations {
                if !find_embeddings_extending(&inst.b, &s, e, 1)?.is_empty() {
                    extended += 1;
                }
            }
            rows.push(InstanceCoverage {
                instance: i,
                a_size: inst.a.len(),
                realizations: realizations.len(),
                extended,
                realized: extended == realizations.len(),
            });
        }
        let realized = rows.iter().filter(|r| r.realized).count();
        faces.push(FaceCoverage { face: f, instances: rows, realized });
    }
    let realized = faces.iter().map(|f| f.realized).sum();
    let total = faces.len() * instances.len();
    Ok(CoverageReport { stage, instance_count: instances.len(), faces, realized, total })
}
