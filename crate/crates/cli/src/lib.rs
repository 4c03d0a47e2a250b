//! Command-line front end. [`dispatch`] is the whole program; `main` only
//! wires it to the process.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use cube_amalgam::becker::{generic_labeled_sample, SampleConfig};
use cube_amalgam::io::{
    canonical_bytes, cube_to_value, default_run_dir, disjoint_embedding_to_value, parse_cube, parse_structure,
    structure_to_value, to_value, verify_manifest, write_run,
};
use cube_amalgam::{
    build_digraph, complete_bkl, dimension_estimate, disjoint_amalgamate, extend_cube, find_cube_embedding,
    find_embeddings, is_reducible, run, search_failure_witness, theta, validate_cube, validate_disjoint,
    validate_family, CubeDiagram, Embedding, Error, Face, Family, FiniteStructure, IdAllocator, RunConfig, Strategy,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_REFUSAL: i32 = 1;
pub const EXIT_INPUT: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "cube-amalgam", version, about = "Disjoint amalgamation and irreducible cubes of finite structures")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FamilyArg {
    Bkl,
    Sets,
    Graphs,
}

#[derive(Args, Debug)]
struct StrategyArgs {
    #[arg(long, value_enum)]
    family: FamilyArg,
    /// Arity for bkl.
    #[arg(long)]
    n: Option<usize>,
    /// Label universe size.
    #[arg(long)]
    labels: Option<u32>,
}

impl StrategyArgs {
    fn strategy(&self) -> Result<Strategy, Error> {
        let family = match (self.family, self.n) {
            (FamilyArg::Bkl, Some(n)) if n >= 1 => Family::Bkl { n },
            (FamilyArg::Bkl, _) => return Err(Error::Schema("--family bkl needs --n >= 1".into())),
            (FamilyArg::Sets, _) => Family::Sets,
            (FamilyArg::Graphs, _) => Family::Graphs,
        };
        Ok(Strategy::new(family, self.labels))
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check a structure or cube document against its axioms.
    Validate { file: PathBuf },
    /// Print the formula characterizing embeddings of a structure.
    Theta { file: PathBuf },
    /// Count embeddings of one structure into another.
    Embed {
        a: PathBuf,
        b: PathBuf,
        /// Largest number of embeddings listed.
        #[arg(long, default_value_t = 16)]
        limit: usize,
    },
    /// Complete a partial cube to a disjoint full cube.
    Amalgamate {
        file: PathBuf,
        #[arg(long, value_enum)]
        family: FamilyArg,
        #[arg(long)]
        n: Option<usize>,
    },
    /// Extend a cube along an inclusion of one face into a target structure.
    Extend {
        cube: PathBuf,
        #[arg(long)]
        rho: u16,
        #[arg(long)]
        target: PathBuf,
    },
    /// Build an irreducible cube stage by stage and persist the run.
    Fraisse {
        #[command(flatten)]
        strategy: StrategyArgs,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 3)]
        rounds: usize,
        /// Largest extension target size.
        #[arg(long, default_value_t = 1)]
        cap: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0)]
        rel_cap: u32,
        /// Tasks per round; all of them when absent.
        #[arg(long)]
        budget: Option<usize>,
        #[arg(long)]
        max_elements: Option<usize>,
        #[arg(long)]
        keep_stages: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Estimate the dimension of a family of structures.
    Dimension {
        /// Structure files, cube files or run directories.
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        #[arg(long, default_value_t = 4)]
        kmax: usize,
        /// Also write a Graphviz rendering of the digraph.
        #[arg(long)]
        dot: Option<PathBuf>,
    },
    /// Search for a partial (n+1)-cube with no valid completion.
    Counterexample {
        #[arg(long)]
        n: usize,
        /// Largest top size tried; defaults to 2n + 2.
        #[arg(long)]
        cap: Option<usize>,
    },
    /// Build a labeled structure realizing small types under label patterns.
    Sample {
        #[command(flatten)]
        strategy: StrategyArgs,
        #[arg(long, default_value_t = 1)]
        size: usize,
        #[arg(long, default_value_t = 2)]
        patterns: usize,
        #[arg(long, default_value_t = 0)]
        rel_cap: u32,
    },
    /// Re-hash a run directory and re-check its certificate.
    Verify { dir: PathBuf },
}

struct Outcome {
    value: Value,
    code: i32,
}

impl Outcome {
    fn ok(value: Value) -> Self {
        Outcome { value, code: EXIT_OK }
    }
}

/// Runs one command line (program name first) and returns the exit code.
pub fn dispatch<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { err.write_all(text.as_bytes()) } else { out.write_all(text.as_bytes()) };
            return code;
        }
    };
    match execute(cli.command) {
        Ok(o) => {
            let _ = out.write_all(&canonical_bytes(&o.value));
            o.code
        }
        Err(e) => {
            let _ = writeln!(err, "error[{}]: {e}", e.code());
            if e.is_refusal() {
                EXIT_REFUSAL
            } else {
                EXIT_INPUT
            }
        }
    }
}

fn read(path: &Path) -> Result<Vec<u8>, Error> {
    fs::read(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn is_cube_doc(bytes: &[u8]) -> bool {
    serde_json::from_slice::<Value>(bytes).map(|v| v.get("faces").is_some()).unwrap_or(false)
}

fn report_outcome(kind: &str, reports: Vec<(String, cube_amalgam::ValidationReport)>) -> Outcome {
    let valid = reports.iter().all(|(_, r)| r.is_valid());
    let checks: Vec<Value> = reports
        .iter()
        .map(|(name, r)| json!({ "check": name, "valid": r.is_valid(), "violations": r.violations }))
        .collect();
    Outcome {
        value: json!({ "kind": kind, "result": if valid { "valid" } else { "invalid" }, "checks": checks }),
        code: if valid { EXIT_OK } else { EXIT_REFUSAL },
    }
}

fn execute(command: Command) -> Result<Outcome, Error> {
    match command {
        Command::Validate { file } => {
            let bytes = read(&file)?;
            if is_cube_doc(&bytes) {
                let c = parse_cube(&bytes)?;
                let mut reports =
                    vec![("cube".to_string(), validate_cube(&c)), ("disjoint".to_string(), validate_disjoint(&c))];
                for (f, a) in c.faces() {
                    reports.push((format!("face {f}"), validate_family(a)));
                }
                Ok(report_outcome("cube", reports))
            } else {
                let s = parse_structure(&bytes)?;
                Ok(report_outcome("structure", vec![("axioms".to_string(), validate_family(&s))]))
            }
        }
        Command::Theta { file } => {
            let s = parse_structure(&read(&file)?)?;
            let t = theta(&s);
            Ok(Outcome::ok(json!({ "formula": t.to_string(), "vars": t.vars, "atoms": t.atoms })))
        }
        Command::Embed { a, b, limit } => {
            let a = parse_structure(&read(&a)?)?;
            let b = parse_structure(&read(&b)?)?;
            let all = find_embeddings(&a, &b, limit.saturating_add(1))?;
            let listed: Vec<Value> = all.iter().take(limit).map(embedding_value).collect();
            Ok(Outcome::ok(json!({
                "embeds": !all.is_empty(),
                "listed": listed,
                "truncated": all.len() > limit,
            })))
        }
        Command::Amalgamate { file, family, n } => {
            let p = parse_cube(&read(&file)?)?;
            let labels = p.face(Face::EMPTY).and_then(|a| a.universe());
            let strategy = StrategyArgs { family, n, labels }.strategy()?;
            let mut ids = IdAllocator::above(p.faces().map(|(_, a)| a));
            let full = match strategy.family {
                Family::Bkl { n } => complete_bkl(&p, n, &mut ids)?,
                _ => disjoint_amalgamate(&strategy, &p, &mut ids)?,
            };
            Ok(Outcome::ok(cube_to_value(&full)))
        }
        Command::Extend { cube, rho, target } => {
            let c = parse_cube(&read(&cube)?)?;
            let b = parse_structure(&read(&target)?)?;
            let rho = Face(rho);
            let a = c.face(rho).ok_or(Error::MissingFace(rho))?;
            let strategy = Strategy::new(a.family(), a.universe());
            let h = Embedding::identity(a.elements());
            let mut ids = IdAllocator::above(c.faces().map(|(_, a)| a).chain([&b]));
            let (next, hs) = extend_cube(&strategy, &c, rho, &h, &b, &mut ids)?;
            Ok(Outcome::ok(json!({ "cube": cube_to_value(&next), "h": disjoint_embedding_to_value(&hs) })))
        }
        Command::Fraisse { strategy, k, rounds, cap, seed, rel_cap, budget, max_elements, keep_stages, out } => {
            let mut config = RunConfig::new(strategy.strategy()?, k, rounds, seed);
            config.cap = cap;
            config.rel_cap = rel_cap;
            config.budget = budget;
            config.max_elements = max_elements;
            config.keep_stages = keep_stages;
            let state = run(config)?;
            let dir = out.unwrap_or_else(|| default_run_dir(Path::new("."), seed));
            let manifest = write_run(&state, &dir)?;
            Ok(Outcome::ok(to_value(&manifest)))
        }
        Command::Dimension { inputs, kmax, dot } => {
            let mut family = Vec::new();
            for p in &inputs {
                collect_family(p, &mut family)?;
            }
            let d = build_digraph(&family)?;
            if let Some(path) = dot {
                fs::write(&path, d.to_dot()).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
            }
            let estimate = dimension_estimate(&d, kmax);
            let witness = estimate.and_then(|k| find_cube_embedding(&d, k));
            let arcs: Vec<[usize; 2]> = d.arcs().into_iter().map(|(u, v)| [u, v]).collect();
            Ok(Outcome::ok(json!({
                "structures": family.len(),
                "vertices": d.len(),
                "class_of": d.class_of,
                "arcs": arcs,
                "kmax": kmax,
                "dimension_lower_bound": estimate,
                "witness": witness.map(|w| w.assignment.into_iter().map(|(f, v)| json!({ "face": f.mask(), "vertex": v })).collect::<Vec<_>>()),
            })))
        }
        Command::Counterexample { n, cap } => {
            let cap = cap.unwrap_or(2 * n + 2);
            let w = search_failure_witness(&Strategy::bkl(n), cap)?;
            Ok(Outcome::ok(match w {
                Some(w) => json!({
                    "n": n,
                    "cap": cap,
                    "found": true,
                    "independent": w.independent,
                    "sizes": w.sizes,
                    "cube": cube_to_value(&w.cube),
                }),
                None => json!({ "n": n, "cap": cap, "found": false }),
            }))
        }
        Command::Sample { strategy, size, patterns, rel_cap } => {
            let st = strategy.strategy()?;
            let labels = strategy.labels.unwrap_or(1);
            let s = generic_labeled_sample(&SampleConfig { strategy: st, size, labels, patterns, rel_cap })?;
            Ok(Outcome::ok(structure_to_value(&s)))
        }
        Command::Verify { dir } => {
            let check = verify_manifest(&dir)?;
            let code = if check.ok() { EXIT_OK } else { EXIT_REFUSAL };
            Ok(Outcome { value: json!({ "ok": check.ok(), "check": check }), code })
        }
    }
}

fn embedding_value(e: &Embedding) -> Value {
    Value::Array(e.pairs().map(|(x, y)| json!([x, y])).collect())
}

/// Faces of cube files, structure files, and the final cube of run
/// directories, in argument order.
fn collect_family(path: &Path, family: &mut Vec<FiniteStructure>) -> Result<(), Error> {
    let file = if path.is_dir() { path.join("cube.json") } else { path.to_path_buf() };
    let bytes = read(&file)?;
    if is_cube_doc(&bytes) {
        let c: CubeDiagram = parse_cube(&bytes)?;
        family.extend(c.faces().map(|(_, a)| a.clone()));
    } else {
        family.push(parse_structure(&bytes)?);
    }
    Ok(())
}

/// Whether the final cube of a run directory is irreducible.
pub fn run_dir_irreducible(dir: &Path) -> Result<bool, Error> {
    Ok(is_reducible(&parse_cube(&read(&dir.join("cube.json"))?)?)?.is_none())
}
