//! The validity pipeline: μ-elimination over a bound schedule, then the
//! Horn-clause path or predicate abstraction, then exact model checking.
//! A formula and its dual are run side by side.

use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{mpsc, Arc};
use std::thread;
use std::time::Instant;

use crate::chc::{hfl_to_chc, solve_external, SolverConfig, SolverVerdict};
use crate::lts::Lts;
use crate::semantics::check_pure_with_stats;
use crate::syntax::{dualize, Formula};
use crate::transforms::{
    abstract_predicates, eliminate_mu, eliminate_mu_scaled, BoundExpr, Entailment, PredicateSet,
};

pub struct PipelineConfig {
    pub bounds: Vec<i64>,
    pub bound: Option<BoundExpr>,
    pub solver: SolverConfig,
    pub preds: Option<PredicateSet>,
    pub engine: Arc<dyn Entailment>,
    pub model: Lts,
    pub table_cap: usize,
}

#[derive(Debug, Clone)]
pub struct Timing {
    pub pipeline: &'static str,
    pub stage: String,
    pub ms: u128,
    pub result: String,
}

/// What one pipeline established about its input.
#[derive(Debug, Clone)]
pub enum Outcome {
    Proved { stage: String, bound: Option<String>, solver: Option<String> },
    /// The input is exactly known to be invalid.
    Refuted { stage: String, solver: Option<String> },
    Unknown(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Valid,
    Invalid,
    Unknown,
}

#[derive(Debug, Clone)]
pub struct Decision {
    pub verdict: Verdict,
    pub pipeline: Option<&'static str>,
    pub stage: Option<String>,
    pub bound: Option<String>,
    pub solver: Option<String>,
    pub reason: Option<String>,
    pub timings: Vec<Timing>,
}

struct Run<'a> {
    cfg: &'a PipelineConfig,
    name: &'static str,
    cancel: &'a AtomicBool,
    timings: Vec<Timing>,
}

impl Run<'_> {
    fn time<T>(&mut self, stage: &str, f: impl FnOnce() -> T, show: impl Fn(&T) -> String) -> T {
        let start = Instant::now();
        let r = f();
        self.timings.push(Timing {
            pipeline: self.name,
            stage: stage.to_string(),
            ms: start.elapsed().as_millis(),
            result: show(&r),
        });
        r
    }

    fn cancelled(&self) -> bool {
        self.cancel.load(Ordering::Relaxed)
    }

    fn exact(&mut self, f: &Formula) -> Result<bool, String> {
        let (m, cap) = (&self.cfg.model, self.cfg.table_cap);
        self.time("check_pure", || check_pure_with_stats(m, f, cap).map(|r| r.0).map_err(|e| e.to_string()), |r| {
            format!("{:?}", r)
        })
    }

    fn prove(&mut self, phi: &Formula) -> Outcome {
        if phi.is_pure() {
            return match self.exact(phi) {
                Ok(true) => Outcome::Proved { stage: "check_pure".into(), bound: None, solver: None },
                Ok(false) => Outcome::Refuted { stage: "check_pure".into(), solver: None },
                Err(e) => Outcome::Unknown(e),
            };
        }
        let has_mu = phi.has_mu();
        let mut candidates: Vec<(Option<String>, Formula)> = Vec::new();
        if !has_mu {
            candidates.push((None, phi.clone()));
        } else if let Some(b) = &self.cfg.bound {
            let r = self.time("elim-mu", || eliminate_mu(phi, b), |r| format!("{}", r.is_ok()));
            match r {
                Ok(g) => candidates.push((Some(b.to_string()), g)),
                Err(e) => return Outcome::Unknown(e.to_string()),
            }
        } else {
            for &k in &self.cfg.bounds {
                let r = self.time(&format!("elim-mu[{}]", k), || eliminate_mu_scaled(phi, k), |r| {
                    format!("{}", r.is_ok())
                });
                match r {
                    Ok(g) => candidates.push((Some(format!("scaled {}", k)), g)),
                    Err(e) => return Outcome::Unknown(e.to_string()),
                }
            }
        }

        let mut notes = Vec::new();
        for (bound, psi) in candidates {
            if self.cancelled() {
                return Outcome::Unknown("cancelled".into());
            }
            let mut horn = false;
            if !psi.has_modalities() {
                match hfl_to_chc(&psi) {
                    Ok(sys) => {
                        horn = true;
                        let (solver, cancel) = (&self.cfg.solver, self.cancel);
                        let r = self.time("chc", || solve_external(&sys, solver, Some(cancel)), |r| match r {
                            Ok(v) => v.to_string(),
                            Err(e) => e.to_string(),
                        });
                        match r {
                            Ok(SolverVerdict::Sat(_)) => {
                                return Outcome::Proved { stage: "chc".into(), bound, solver: Some("sat".into()) }
                            }
                            Ok(SolverVerdict::Unsat) if !has_mu => {
                                return Outcome::Refuted { stage: "chc".into(), solver: Some("unsat".into()) }
                            }
                            Ok(v) => notes.push(format!("chc: {}", v)),
                            Err(e) => notes.push(format!("chc: {}", e)),
                        }
                    }
                    Err(e) => notes.push(format!("chc: {}", e)),
                }
            }
            if horn && self.cfg.preds.is_none() {
                continue;
            }
            let abs = match &self.cfg.preds {
                Some(p) => {
                    let engine = self.cfg.engine.clone();
                    self.time("abstract", || abstract_predicates(&psi, p, engine.as_ref()), |r| {
                        format!("{}", r.is_ok())
                    })
                }
                None if psi.is_pure() => Ok(psi.clone()),
                None => {
                    notes.push("abstraction: no predicates given".into());
                    continue;
                }
            };
            match abs {
                Ok(a) => match self.exact(&a) {
                    Ok(true) => {
                        let sound = self.cfg.preds.is_none() || self.cfg.engine.is_sound();
                        if sound {
                            return Outcome::Proved { stage: "abstraction".into(), bound, solver: None };
                        }
                        notes.push("abstraction: valid under a heuristic entailment engine".into());
                    }
                    Ok(false) => notes.push("abstraction: abstract formula invalid".into()),
                    Err(e) => notes.push(format!("abstraction: {}", e)),
                },
                Err(e) => notes.push(format!("abstraction: {}", e)),
            }
        }
        notes.dedup();
        Outcome::Unknown(if notes.is_empty() { "no stage applied".into() } else { notes.join("; ") })
    }
}

fn run_one(phi: &Formula, cfg: &PipelineConfig, name: &'static str, cancel: &AtomicBool) -> (Outcome, Vec<Timing>) {
    let mut r = Run { cfg, name, cancel, timings: Vec::new() };
    let o = r.prove(phi);
    (o, r.timings)
}

fn decide(winner: &'static str, o: &Outcome) -> Option<Decision> {
    let flip = winner == "dual";
    let (verdict, stage, bound, solver) = match o {
        Outcome::Proved { stage, bound, solver } => {
            (if flip { Verdict::Invalid } else { Verdict::Valid }, stage, bound.clone(), solver.clone())
        }
        Outcome::Refuted { stage, solver } => {
            (if flip { Verdict::Valid } else { Verdict::Invalid }, stage, None, solver.clone())
        }
        Outcome::Unknown(_) => return None,
    };
    Some(Decision {
        verdict,
        pipeline: Some(winner),
        stage: Some(stage.clone()),
        bound,
        solver,
        reason: None,
        timings: Vec::new(),
    })
}

fn unknown(reasons: &[(&'static str, &Outcome)], timings: Vec<Timing>) -> Decision {
    let reason = reasons
        .iter()
        .filter_map(|(n, o)| match o {
            Outcome::Unknown(r) => Some(format!("{}: {}", n, r)),
            _ => None,
        })
        .collect::<Vec<_>>()
        .join(" | ");
    Decision {
        verdict: Verdict::Unknown,
        pipeline: None,
        stage: None,
        bound: None,
        solver: None,
        reason: Some(reason),
        timings,
    }
}

fn contradict(a: &Outcome, b: &Outcome) -> bool {
    matches!(a, Outcome::Proved { .. } | Outcome::Refuted { .. })
        && matches!(b, Outcome::Proved { .. } | Outcome::Refuted { .. })
        && matches!(a, Outcome::Proved { .. }) == matches!(b, Outcome::Proved { .. })
}

fn soundness_violation(a: &Outcome, b: &Outcome) -> ! {
    eprintln!("internal soundness violation: formula pipeline {:?}, dual pipeline {:?}", a, b);
    std::process::abort()
}

/// Runs the formula and its dual. Sequential (formula first) when `race`
/// is false, which makes the result deterministic.
pub fn validity(phi: &Formula, cfg: Arc<PipelineConfig>, race: bool) -> Decision {
    let dual = dualize(phi);
    if !race {
        let never = AtomicBool::new(false);
        let (a, mut ta) = run_one(phi, &cfg, "formula", &never);
        if let Some(mut d) = decide("formula", &a) {
            d.timings = ta;
            return d;
        }
        let (b, tb) = run_one(&dual, &cfg, "dual", &never);
        ta.extend(tb);
        if let Some(mut d) = decide("dual", &b) {
            d.timings = ta;
            return d;
        }
        return unknown(&[("formula", &a), ("dual", &b)], ta);
    }

    let cancel = Arc::new(AtomicBool::new(false));
    let (tx, rx) = mpsc::channel();
    let mut handles = Vec::new();
    for (name, f) in [("formula", phi.clone()), ("dual", dual)] {
        let (tx, cfg, cancel) = (tx.clone(), cfg.clone(), cancel.clone());
        handles.push(thread::spawn(move || {
            let r = run_one(&f, &cfg, name, &cancel);
            let _ = tx.send((name, r));
        }));
    }
    drop(tx);
    let mut results: Vec<(&'static str, Outcome, Vec<Timing>)> = Vec::new();
    let mut decision = None;
    for (name, (o, t)) in rx {
        if decision.is_none() {
            decision = decide(name, &o);
            if decision.is_some() {
                cancel.store(true, Ordering::Relaxed);
            }
        }
        results.push((name, o, t));
    }
    for h in handles {
        let _ = h.join();
    }
    if results.len() == 2 && contradict(&results[0].1, &results[1].1) {
        soundness_violation(&results[0].1, &results[1].1);
    }
    let mut timings: Vec<Timing> = results.iter().flat_map(|r| r.2.clone()).collect();
    timings.sort_by_key(|t| t.pipeline);
    match decision {
        Some(mut d) => {
            d.timings = timings;
            d
        }
        None => {
            let reasons: Vec<(&'static str, &Outcome)> = results.iter().map(|r| (r.0, &r.1)).collect();
            unknown(&reasons, timings)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lts::trivial_model;
    use crate::syntax::parse_formula;
    use crate::transforms::WindowEntailment;
    use std::time::Duration;

    fn cfg() -> Arc<PipelineConfig> {
        Arc::new(PipelineConfig {
            bounds: vec![1, 2],
            bound: None,
            solver: SolverConfig { command: "z3 {file}".into(), timeout: Duration::from_secs(10) },
            preds: None,
            engine: Arc::new(WindowEntailment::new(4)),
            model: trivial_model(),
            table_cap: 1 << 16,
        })
    }

    fn proved() -> Outcome {
        Outcome::Proved { stage: "x".into(), bound: None, solver: None }
    }

    #[test]
    fn dual_outcomes_flip() {
        assert_eq!(decide("formula", &proved()).unwrap().verdict, Verdict::Valid);
        assert_eq!(decide("dual", &proved()).unwrap().verdict, Verdict::Invalid);
        let r = Outcome::Refuted { stage: "x".into(), solver: None };
        assert_eq!(decide("dual", &r).unwrap().verdict, Verdict::Valid);
        assert!(decide("formula", &Outcome::Unknown("u".into())).is_none());
    }

    #[test]
    fn contradictions() {
        let r = Outcome::Refuted { stage: "x".into(), solver: None };
        assert!(contradict(&proved(), &proved()));
        assert!(contradict(&r, &r));
        assert!(!contradict(&proved(), &r));
        assert!(!contradict(&proved(), &Outcome::Unknown("u".into())));
    }

    #[test]
    fn pure_formulas_are_decided_exactly() {
        let t = parse_formula("true /\\ [a]false").unwrap();
        assert_eq!(validity(&t, cfg(), false).verdict, Verdict::Valid);
        let f = parse_formula("<a>true").unwrap();
        let d = validity(&f, cfg(), true);
        assert_eq!(d.verdict, Verdict::Invalid);
        assert_eq!(d.stage.as_deref(), Some("check_pure"));
    }

    #[test]
    fn missing_predicates_leave_modal_formulas_unknown() {
        let f = parse_formula("forall n. (nu x: int -> prop. \\y: int. [a](x (y + 1))) n").unwrap();
        let d = validity(&f, cfg(), false);
        assert_eq!(d.verdict, Verdict::Unknown);
        assert!(d.reason.unwrap().contains("no predicates"));
    }
}
