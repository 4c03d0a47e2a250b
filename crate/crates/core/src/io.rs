//! Canonical JSON documents for structures, cubes and runs.
//!
//! Canonical form: object keys sorted, lists sorted, no floats, two-space
//! indentation and a trailing newline. Equal values give equal bytes.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::cube::{CubeDiagram, DisjointEmbedding, Face, Shape};
use crate::error::{Error, Result};
use crate::fraisse::{Certificate, RunState, Status};
use crate::structure::{Elem, Embedding, Family, FiniteStructure, LabelSet, TupleEntry};

pub const VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ElementDoc {
    id: Elem,
    labels: Vec<u32>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TupleDoc {
    t: Vec<Elem>,
    r: u32,
    s: Vec<Elem>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StructureDoc {
    version: u32,
    family: String,
    n: Option<usize>,
    #[serde(rename = "L")]
    labels: Option<u32>,
    elements: Vec<ElementDoc>,
    tuples: Vec<TupleDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    edges: Option<Vec<(Elem, Elem)>>,
}

/// Pretty-printed bytes with sorted keys and a trailing newline.
pub fn canonical_bytes(v: &Value) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(v).expect("JSON values serialize");
    out.push(b'\n');
    out
}

pub fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("documents serialize")
}

fn parse_json(bytes: &[u8]) -> Result<Value> {
    serde_json::from_slice(bytes).map_err(|e| Error::Json(e.to_string()))
}

fn from_value<T: DeserializeOwned>(v: Value) -> Result<T> {
    serde_json::from_value(v).map_err(|e| Error::Schema(e.to_string()))
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn structure_to_value(s: &FiniteStructure) -> Value {
    let family = s.family();
    let elements = s
        .elements()
        .iter()
        .map(|&id| ElementDoc { id, labels: s.label_set(id).map(|l| l.iter().collect()).unwrap_or_default() })
        .collect();
    let tuples = s
        .tuples()
        .into_iter()
        .map(|(t, e)| {
            let vals = e.decompress(&t, e.rel as usize + 1);
            TupleDoc { t, r: e.rel, s: vals }
        })
        .collect();
    let doc = StructureDoc {
        version: VERSION,
        family: family.name().to_string(),
        n: family.bkl_arity(),
        labels: s.universe(),
        elements,
        tuples,
        edges: matches!(family, Family::Graphs).then(|| s.edges()),
    };
    to_value(&doc)
}

pub fn serialize_structure(s: &FiniteStructure) -> Vec<u8> {
    canonical_bytes(&structure_to_value(s))
}

pub fn structure_from_value(v: Value) -> Result<FiniteStructure> {
    let doc: StructureDoc = from_value(v)?;
    if doc.version != VERSION {
        return Err(Error::Schema(format!("unsupported document version {}", doc.version)));
    }
    let mut ids: Vec<Elem> = doc.elements.iter().map(|e| e.id).collect();
    ids.sort_unstable();
    if let Some(w) = ids.windows(2).find(|w| w[0] == w[1]) {
        return Err(Error::DuplicateElement(w[0]));
    }
    let s = match (doc.family.as_str(), doc.n) {
        ("bkl", Some(n)) => {
            if n == 0 {
                return Err(Error::Schema("bkl arity must be at least 1".into()));
            }
            if doc.edges.is_some() {
                return Err(Error::Schema("edges are only allowed for graphs".into()));
            }
            let mut entries = Vec::with_capacity(doc.tuples.len());
            for t in doc.tuples {
                if t.s.len() != t.r as usize + 1 {
                    return Err(Error::BadEntry {
                        tuple: t.t,
                        reason: format!("r = {} needs {} values", t.r, t.r + 1),
                    });
                }
                if let Some(&x) = t.s.iter().find(|x| ids.binary_search(x).is_err()) {
                    return Err(Error::NotAnElement(x));
                }
                let entry = TupleEntry::new(t.r, t.s);
                entries.push((t.t, entry));
            }
            FiniteStructure::bkl_from_entries(n, ids, entries)?
        }
        ("sets" | "graphs", None) => {
            if !doc.tuples.is_empty() {
                return Err(Error::Schema(format!("{} documents carry no tuples", doc.family)));
            }
            if doc.family == "sets" {
                if doc.edges.is_some() {
                    return Err(Error::Schema("edges are only allowed for graphs".into()));
                }
                FiniteStructure::set(ids)?
            } else {
                FiniteStructure::graph(ids, doc.edges.unwrap_or_default())?
            }
        }
        ("bkl", None) => return Err(Error::Schema("bkl documents need n".into())),
        ("sets" | "graphs", Some(_)) => return Err(Error::Schema(format!("{} documents take n = null", doc.family))),
        (other, _) => return Err(Error::Schema(format!("unknown family {other:?}"))),
    };
    match doc.labels {
        Some(universe) => {
            let sets: BTreeMap<Elem, LabelSet> =
                doc.elements.iter().map(|e| (e.id, LabelSet::from_indices(e.labels.iter().copied()))).collect();
            for e in &doc.elements {
                if let Some(&l) = e.labels.iter().find(|&&l| l >= universe.min(64)) {
                    return Err(Error::LabelOutOfRange { label: l, universe });
                }
            }
            s.with_labels(universe, &sets)
        }
        None => {
            if doc.elements.iter().any(|e| !e.labels.is_empty()) {
                return Err(Error::Schema("labels given but L is null".into()));
            }
            Ok(s)
        }
    }
}

/// Parses a structure document. Axioms are not checked here.
pub fn parse_structure(bytes: &[u8]) -> Result<FiniteStructure> {
    structure_from_value(parse_json(bytes)?)
}

fn map_to_value(m: &Embedding) -> Value {
    Value::Array(m.pairs().map(|(x, y)| json!([x, y])).collect())
}

fn map_from_value(v: Value) -> Result<Embedding> {
    let pairs: Vec<(Elem, Elem)> = from_value(v)?;
    let e = Embedding::from_pairs(pairs.iter().copied());
    if e.len() != pairs.len() {
        return Err(Error::BadMap("repeated source element".into()));
    }
    Ok(e)
}

pub fn cube_to_value(c: &CubeDiagram) -> Value {
    let faces: Vec<Value> =
        c.faces().map(|(f, a)| json!({ "mask": f.mask(), "structure": structure_to_value(a) })).collect();
    let maps: Vec<Value> = c
        .maps()
        .filter(|((s, t), _)| s != t)
        .map(|((s, t), m)| json!({ "from": s.mask(), "to": t.mask(), "map": map_to_value(m) }))
        .collect();
    json!({
        "version": VERSION,
        "k": c.k(),
        "shape": c.shape(),
        "faces": faces,
        "maps": maps,
    })
}

pub fn serialize_cube(c: &CubeDiagram) -> Vec<u8> {
    canonical_bytes(&cube_to_value(c))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CubeDoc {
    version: u32,
    k: usize,
    shape: Shape,
    faces: Vec<FaceDoc>,
    maps: Vec<MapDoc>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct FaceDoc {
    mask: u16,
    structure: Value,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct MapDoc {
    from: u16,
    to: u16,
    map: Value,
}

pub fn cube_from_value(v: Value) -> Result<CubeDiagram> {
    let doc: CubeDoc = from_value(v)?;
    if doc.version != VERSION {
        return Err(Error::Schema(format!("unsupported document version {}", doc.version)));
    }
    let mut faces = BTreeMap::new();
    for f in doc.faces {
        if faces.insert(Face(f.mask), structure_from_value(f.structure)?).is_some() {
            return Err(Error::Schema(format!("face {} listed twice", Face(f.mask))));
        }
    }
    let mut maps = BTreeMap::new();
    for m in doc.maps {
        if maps.insert((Face(m.from), Face(m.to)), map_from_value(m.map)?).is_some() {
            return Err(Error::Schema(format!("map {} -> {} listed twice", Face(m.from), Face(m.to))));
        }
    }
    CubeDiagram::new(doc.k, doc.shape, faces, maps)
}

pub fn parse_cube(bytes: &[u8]) -> Result<CubeDiagram> {
    cube_from_value(parse_json(bytes)?)
}

pub fn disjoint_embedding_to_value(h: &DisjointEmbedding) -> Value {
    Value::Array(h.maps.iter().map(|(f, m)| json!({ "face": f.mask(), "map": map_to_value(m) })).collect())
}

fn history_to_value(state: &RunState) -> Value {
    Value::Array(
        state
            .history
            .iter()
            .map(|s| {
                json!({
                    "index": s.index,
                    "round": s.round,
                    "rho": s.rho.mask(),
                    "base": s.base,
                    "new_point": s.new_point,
                    "h": disjoint_embedding_to_value(&s.h),
                })
            })
            .collect(),
    )
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileRef {
    pub path: String,
    pub sha256: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub version: u32,
    pub config: Value,
    pub stage_count: usize,
    pub rounds_done: usize,
    pub aborted: Option<String>,
    pub files: Vec<FileRef>,
    pub certificate: Value,
    pub coverage: Value,
}

/// Writes a run's documents and `manifest.json` into `dir`. File bytes
/// depend only on the run, never on the time or the directory name.
pub fn write_run(state: &RunState, dir: &Path) -> Result<RunManifest> {
    fs::create_dir_all(dir)?;
    let certificate = state.certify_irreducible()?;
    let coverage = state.coverage_report()?;
    let mut docs: Vec<(String, Value)> = vec![
        ("cube.json".into(), cube_to_value(&state.cube)),
        ("history.json".into(), history_to_value(state)),
        ("chains.json".into(), json!({ "chains": state.chains, "violations": state.violations })),
        ("coverage.json".into(), to_value(&coverage)),
        ("certificate.json".into(), to_value(&certificate)),
    ];
    if !state.stages.is_empty() {
        fs::create_dir_all(dir.join("stages"))?;
        for (i, c) in state.stages.iter().enumerate() {
            docs.push((format!("stages/stage-{i:04}.json"), cube_to_value(c)));
        }
    }
    let mut files = Vec::new();
    for (path, v) in docs {
        let bytes = canonical_bytes(&v);
        fs::write(dir.join(&path), &bytes)?;
        files.push(FileRef { path, sha256: sha256_hex(&bytes) });
    }
    let manifest = RunManifest {
        version: VERSION,
        config: to_value(&state.config),
        stage_count: state.stage(),
        rounds_done: state.rounds_done,
        aborted: state.aborted.clone(),
        files,
        certificate: certificate_summary(&certificate),
        coverage: json!({
            "realized": coverage.realized,
            "total": coverage.total,
            "instances_per_face": coverage.instance_count,
        }),
    };
    fs::write(dir.join("manifest.json"), canonical_bytes(&to_value(&manifest)))?;
    Ok(manifest)
}

fn certificate_summary(c: &Certificate) -> Value {
    json!({
        "status": c.status,
        "pairs": c.pairs.len(),
        "witnessed": c.pairs.iter().filter(|p| p.y.is_some()).count(),
        "failed": c.failed.map(|(s, t)| [s.mask(), t.mask()]),
        "reducible": c.reducible.map(|(s, t)| [s.mask(), t.mask()]),
    })
}

/// Outcome of re-reading a run directory.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ManifestCheck {
    /// Files whose bytes no longer match the recorded hash.
    pub mismatched: Vec<String>,
    pub missing: Vec<String>,
    /// The stored certificate re-verified against the stored cube.
    pub certificate_reverified: bool,
}

impl ManifestCheck {
    pub fn ok(&self) -> bool {
        self.mismatched.is_empty() && self.missing.is_empty() && self.certificate_reverified
    }
}

pub fn read_manifest(dir: &Path) -> Result<RunManifest> {
    let bytes = fs::read(dir.join("manifest.json"))?;
    from_value(parse_json(&bytes)?)
}

/// Re-hashes every referenced file and re-checks the certificate's
/// witnesses by membership in the stored final cube.
pub fn verify_manifest(dir: &Path) -> Result<ManifestCheck> {
    let manifest = read_manifest(dir)?;
    let mut check = ManifestCheck { mismatched: Vec::new(), missing: Vec::new(), certificate_reverified: false };
    for f in &manifest.files {
        match fs::read(dir.join(&f.path)) {
            Ok(bytes) if sha256_hex(&bytes) == f.sha256 => {}
            Ok(_) => check.mismatched.push(f.path.clone()),
            Err(_) => check.missing.push(f.path.clone()),
        }
    }
    if check.missing.is_empty() {
        let cube = parse_cube(&fs::read(dir.join("cube.json"))?)?;
        let cert: Certificate = from_value(parse_json(&fs::read(dir.join("certificate.json"))?)?)?;
        let status_ok = manifest.certificate.get("status") == Some(&to_value(&cert.status));
        let pass_ok = cert.status == Status::Failed || crate::cube::is_reducible(&cube)?.is_none();
        check.certificate_reverified = status_ok && pass_ok && cert.verify(&cube);
    }
    Ok(check)
}

/// `runs/<seed>-<unix seconds>` under `root`.
pub fn default_run_dir(root: &Path, seed: u64) -> PathBuf {
    let ts = std::time::SystemTime::now().duration_since(std::time::UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    root.join("runs").join(format!("{seed}-{ts}"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::amalgam::Strategy;
    use crate::fraisse::{run, RunConfig};

    #[test]
    fn empty_structure_round_trips() {
        let doc = br#"{"version":1,"family":"bkl","n":2,"L":null,"elements":[],"tuples":[]}"#;
        let s = parse_structure(doc).unwrap();
        assert!(s.is_empty());
        let again = parse_structure(&serialize_structure(&s)).unwrap();
        assert_eq!(again, s);
    }

    #[test]
    fn missing_row_is_non_total() {
        let doc = br#"{"version":1,"family":"bkl","n":1,"L":null,
            "elements":[{"id":0,"labels":[]},{"id":1,"labels":[]}],
            "tuples":[{"t":[0],"r":0,"s":[0]}]}"#;
        let e = parse_structure(doc).unwrap_err();
        assert_eq!(e.code(), "non_total_table");
    }

    #[test]
    fn distinct_error_codes() {
        assert_eq!(parse_structure(b"{").unwrap_err().code(), "malformed_json");
        assert_eq!(parse_structure(br#"{"version":1}"#).unwrap_err().code(), "schema_violation");
        let dangling = br#"{"version":1,"family":"graphs","n":null,"L":null,
            "elements":[{"id":0,"labels":[]}],"tuples":[],"edges":[[0,5]]}"#;
        assert_eq!(parse_structure(dangling).unwrap_err().code(), "dangling_id");
    }

    #[test]
    fn labeled_graph_round_trips() {
        let g = FiniteStructure::graph(vec![3, 5], [(3, 5), (5, 3)])
            .unwrap()
            .with_labels(4, &[(3, LabelSet::from_indices([1])), (5, LabelSet::from_indices([0, 3]))].into())
            .unwrap();
        let bytes = serialize_structure(&g);
        assert_eq!(parse_structure(&bytes).unwrap(), g);
        assert_eq!(serialize_structure(&parse_structure(&bytes).unwrap()), bytes);
    }

    #[test]
    fn run_directory_verifies() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = RunConfig::new(Strategy::bkl(2).labeled(8), 1, 2, 5);
        cfg.keep_stages = true;
        let state = run(cfg).unwrap();
        write_run(&state, dir.path()).unwrap();
        let check = verify_manifest(dir.path()).unwrap();
        assert!(check.ok(), "{check:?}");
        let cube = parse_cube(&fs::read(dir.path().join("cube.json")).unwrap()).unwrap();
        assert_eq!(cube, state.cube);
        fs::write(dir.path().join("coverage.json"), b"{}\n").unwrap();
        assert_eq!(verify_manifest(dir.path()).unwrap().mismatched, vec!["coverage.json".to_string()]);
    }
}
