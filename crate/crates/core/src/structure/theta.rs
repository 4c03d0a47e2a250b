use std::fmt;

use serde::{Deserialize, Serialize};

use super::{Body, Elem, FiniteStructure};
use crate::error::{Error, Result};

/// One conjunct of a θ-formula; variables are indices into the source's
/// sorted element list.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "atom", rename_all = "snake_case")]
pub enum Atom {
    Neq { left: usize, right: usize },
    Rel { rel: u32, args: Vec<usize> },
    Fn { index: u32, args: Vec<usize>, value: usize },
    Edge { from: usize, to: usize, present: bool },
    Label { pred: u32, var: usize, positive: bool },
}

/// A finite conjunction of atomic and negated atomic formulas that holds of
/// an assignment exactly when the assignment is an embedding.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ThetaFormula {
    pub vars: usize,
    pub atoms: Vec<Atom>,
}

impl ThetaFormula {
    pub fn is_truth(&self) -> bool {
        self.atoms.is_empty()
    }
}

fn write_args(f: &mut fmt::Formatter<'_>, args: &[usize]) -> fmt::Result {
    for (i, a) in args.iter().enumerate() {
        if i > 0 {
            write!(f, ",")?;
        }
        write!(f, "x{a}")?;
    }
    Ok(())
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Atom::Neq { left, right } => write!(f, "x{left} != x{right}"),
            Atom::Rel { rel, args } => {
                write!(f, "R_{rel}(")?;
                write_args(f, args)?;
                write!(f, ")")
            }
            Atom::Fn { index, args, value } => {
                write!(f, "s_{index}(")?;
                write_args(f, args)?;
                write!(f, ") = x{value}")
            }
            Atom::Edge { from, to, present } => {
                write!(f, "{}E(x{from},x{to})", if *present { "" } else { "!" })
            }
            Atom::Label { pred, var, positive } => {
                write!(f, "{}P_{pred}(x{var})", if *positive { "" } else { "!" })
            }
        }
    }
}

impl fmt::Display for ThetaFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.atoms.is_empty() {
            return write!(f, "true");
        }
        for (i, a) in self.atoms.iter().enumerate() {
            if i > 0 {
                write!(f, " & ")?;
            }
            write!(f, "{a}")?;
        }
        Ok(())
    }
}

/// θ_A: pairwise inequalities, one `R_{j_c}(c)` per tuple, `s_i(c) = d`
/// for `i <= j_c`; adjacency literals for graphs; label literals for every
/// index below the universe size when labeled.
pub fn theta(s: &FiniteStructure) -> ThetaFormula {
    let m = s.len();
    let mut atoms = Vec::new();
    for i in 0..m {
        for j in i + 1..m {
            atoms.push(Atom::Neq { left: i, right: j });
        }
    }
    let var = |e: Elem| s.position(e).expect("element");
    match &s.body {
        Body::Bkl { .. } => {
            for (t, entry) in s.tuples() {
                let args: Vec<usize> = t.iter().map(|&e| var(e)).collect();
                atoms.push(Atom::Rel { rel: entry.rel, args: args.clone() });
                for (i, &v) in entry.values.iter().enumerate() {
                    atoms.push(Atom::Fn { index: i as u32, args: args.clone(), value: var(v) });
                }
            }
        }
        Body::Graph { .. } => {
            for i in 0..m {
                for j in 0..m {
                    atoms.push(Atom::Edge { from: i, to: j, present: s.adj_at(i, j) });
                }
            }
        }
        Body::Set => {}
    }
    if let Some(l) = s.labels() {
        for (i, set) in l.sets().iter().enumerate() {
            for pred in 0..l.universe() {
                atoms.push(Atom::Label { pred, var: i, positive: set.contains(pred) });
            }
        }
    }
    ThetaFormula { vars: m, atoms }
}

/// Evaluates `formula` in `target` with variable `i` sent to `assignment[i]`.
pub fn satisfies_theta(target: &FiniteStructure, formula: &ThetaFormula, assignment: &[Elem]) -> Result<bool> {
    if assignment.len() < formula.vars {
        return Err(Error::BadMap(format!("assignment covers {} of {} variables", assignment.len(), formula.vars)));
    }
    if let Some(&x) = assignment.iter().find(|&&x| !target.contains(x)) {
        return Err(Error::NotAnElement(x));
    }
    let arity = target.family().bkl_arity();
    for atom in &formula.atoms {
        let holds = match atom {
            Atom::Neq { left, right } => assignment[*left] != assignment[*right],
            Atom::Rel { args, .. } | Atom::Fn { args, .. } if arity != Some(args.len()) => {
                return Err(Error::FamilyMismatch {
                    left: target.family().to_string(),
                    right: format!("bkl({})", args.len()),
                });
            }
            Atom::Rel { rel, args } => {
                let t: Vec<Elem> = args.iter().map(|&v| assignment[v]).collect();
                target.entry(&t).expect("total").rel == *rel
            }
            Atom::Fn { index, args, value } => {
                let t: Vec<Elem> = args.iter().map(|&v| assignment[v]).collect();
                target.s(*index as usize, &t).expect("total") == assignment[*value]
            }
            Atom::Edge { from, to, present } => {
                if target.family() != super::Family::Graphs {
                    return Err(Error::FamilyMismatch { left: target.family().to_string(), right: "graphs".into() });
                }
                target.has_edge(assignment[*from], assignment[*to]) == *present
            }
            Atom::Label { pred, var, positive } => {
                let set = target
                    .label_set(assignment[*var])
                    .ok_or_else(|| Error::Unsupported("label literal on an unlabeled target".into()))?;
                set.contains(*pred) == *positive
            }
        };
        if !holds {
            return Ok(false);
        }
    }
    Ok(true)
}
