//! Finite labeled transition systems.
//!
//! Text format:
//!
//! ```text
//! states: q0 q1 q2
//! initial: q0
//! labels: read close end     # optional; enables strict label checking
//! trans:
//!   q0 read q0
//!   q0 close q1
//!   q1 end q2
//! ```

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LtsError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("line {line}: undeclared state `{name}`")]
    UndeclaredState { line: usize, name: String },
    #[error("line {line}: undeclared label `{name}`")]
    UndeclaredLabel { line: usize, name: String },
    #[error("line {line}: duplicate state `{name}`")]
    DuplicateState { line: usize, name: String },
    #[error("missing `initial:` declaration")]
    MissingInitial,
    #[error("missing `states:` declaration")]
    MissingStates,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lts {
    /// State names; a state's index is its position here.
    pub states: Vec<String>,
    pub labels: BTreeSet<String>,
    pub transitions: BTreeSet<(usize, String, usize)>,
    pub initial: usize,
}

impl Lts {
    /// Builds an Lts from named pieces; labels are taken from the transitions.
    pub fn new(states: &[&str], initial: &str, trans: &[(&str, &str, &str)]) -> Result<Self, LtsError> {
        let mut text = format!("states: {}\ninitial: {}\ntrans:\n", states.join(" "), initial);
        for (s, a, t) in trans {
            text.push_str(&format!("{} {} {}\n", s, a, t));
        }
        parse_lts(&text)
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn state_index(&self, name: &str) -> Option<usize> {
        self.states.iter().position(|s| s == name)
    }

    pub fn successors(&self, state: usize, label: &str) -> impl Iterator<Item = usize> + '_ {
        let label = label.to_string();
        self.transitions
            .iter()
            .filter(move |(s, a, _)| *s == state && *a == label)
            .map(|t| t.2)
    }

    /// Whether the action word can be performed from the initial state.
    pub fn accepts_trace(&self, word: &[&str]) -> bool {
        let mut cur: BTreeSet<usize> = [self.initial].into();
        for a in word {
            cur = cur.iter().flat_map(|&s| self.successors(s, a)).collect();
            if cur.is_empty() {
                return false;
            }
        }
        true
    }
}

/// One state, no transitions, no labels.
pub fn trivial_model() -> Lts {
    Lts {
        states: vec!["s".into()],
        labels: BTreeSet::new(),
        transitions: BTreeSet::new(),
        initial: 0,
    }
}

pub fn parse_lts(text: &str) -> Result<Lts, LtsError> {
    let mut states: Option<Vec<String>> = None;
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut initial: Option<(usize, String)> = None;
    let mut declared_labels: Option<BTreeSet<String>> = None;
    let mut raw_trans: Vec<(usize, Vec<String>)> = Vec::new();
    let mut in_trans = false;

    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let header = |key: &str| content.strip_prefix(key).map(str::trim);
        if let Some(rest) = header("states:") {
            in_trans = false;
            if states.is_some() {
                return Err(LtsError::Syntax { line, msg: "repeated `states:`".into() });
            }
            let mut v = Vec::new();
            for name in rest.split_whitespace() {
                check_ident(name, line)?;
                if index.insert(name.to_string(), v.len()).is_some() {
                    return Err(LtsError::DuplicateState { line, name: name.into() });
                }
                v.push(name.to_string());
            }
            states = Some(v);
        } else if let Some(rest) = header("initial:") {
            in_trans = false;
            let words: Vec<&str> = rest.split_whitespace().collect();
            if words.len() != 1 {
                return Err(LtsError::Syntax { line, msg: "`initial:` takes one state".into() });
            }
            if initial.is_some() {
                return Err(LtsError::Syntax { line, msg: "repeated `initial:`".into() });
            }
            initial = Some((line, words[0].to_string()));
        } else if let Some(rest) = header("labels:") {
            in_trans = false;
            let mut set = BTreeSet::new();
            for l in rest.split_whitespace() {
                check_ident(l, line)?;
                set.insert(l.to_string());
            }
            declared_labels = Some(set);
        } else if let Some(rest) = header("trans:") {
            in_trans = true;
            if !rest.is_empty() {
                raw_trans.push((line, rest.split_whitespace().map(String::from).collect()));
            }
        } else if in_trans {
            raw_trans.push((line, content.split_whitespace().map(String::from).collect()));
        } else {
            return Err(LtsError::Syntax { line, msg: format!("unexpected line `{}`", content) });
        }
    }

    let states = states.ok_or(LtsError::MissingStates)?;
    let (iline, iname) = initial.ok_or(LtsError::MissingInitial)?;
    let initial = *index
        .get(&iname)
        .ok_or(LtsError::UndeclaredState { line: iline, name: iname.clone() })?;
    let mut labels = declared_labels.clone().unwrap_or_default();
    let mut transitions = BTreeSet::new();
    for (line, words) in raw_trans {
        if words.len() != 3 {
            return Err(LtsError::Syntax {
                line,
                msg: "a transition is `source label target`".into(),
            });
        }
        let st = |n: &String| {
            index
                .get(n)
                .copied()
                .ok_or(LtsError::UndeclaredState { line, name: n.clone() })
        };
        let (s, t) = (st(&words[0])?, st(&words[2])?);
        let a = &words[1];
        check_ident(a, line)?;
        match &declared_labels {
            Some(d) if !d.contains(a) => {
                return Err(LtsError::UndeclaredLabel { line, name: a.clone() })
            }
            _ => {}
        }
        labels.insert(a.clone());
        transitions.insert((s, a.clone(), t));
    }
    Ok(Lts { states, labels, transitions, initial })
}

fn check_ident(s: &str, line: usize) -> Result<(), LtsError> {
    let mut cs = s.chars();
    let ok = cs.next().is_some_and(|c| c.is_alphabetic() || c == '_')
        && cs.all(|c| c.is_alphanumeric() || c == '_' || c == '\'');
    if ok {
        Ok(())
    } else {
        Err(LtsError::Syntax { line, msg: format!("invalid name `{}`", s) })
    }
}

pub fn print_lts(m: &Lts) -> String {
    m.to_string()
}

impl fmt::Display for Lts {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "states: {}", self.states.join(" "))?;
        writeln!(f, "initial: {}", self.states[self.initial])?;
        if !self.labels.is_empty() {
            let ls: Vec<&str> = self.labels.iter().map(String::as_str).collect();
            writeln!(f, "labels: {}", ls.join(" "))?;
        }
        writeln!(f, "trans:")?;
        for (s, a, t) in &self.transitions {
            writeln!(f, "  {} {} {}", self.states[*s], a, self.states[*t])?;
        }
        Ok(())
    }
}
