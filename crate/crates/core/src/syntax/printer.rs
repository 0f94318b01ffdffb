use std::collections::HashSet;

use super::subst::free_vars;
use super::{Arg, Formula, IntExpr, ModalKind, Name, QuantKind, FixKind};

const BINDER: u8 = 0;
const OR: u8 = 1;
const AND: u8 = 2;
const CMP: u8 = 3;
const SUM: u8 = 4;
const UNARY: u8 = 5;
const APP: u8 = 6;
const ATOM: u8 = 7;

/// Renders a formula in the concrete syntax accepted by `parse_formula`.
/// Binders get readable names that never shadow each other or a free
/// variable.
pub fn print_formula(f: &Formula) -> String {
    let reserved: HashSet<String> = free_vars(f).iter().map(display_free).collect();
    let mut p = Printer { scope: Vec::new(), reserved };
    p.formula(f, BINDER)
}

pub fn print_int_expr(e: &IntExpr) -> String {
    let p = Printer { scope: Vec::new(), reserved: HashSet::new() };
    p.int(e, SUM)
}

fn display_free(n: &Name) -> String {
    n.as_str().replace('#', "_")
}

struct Printer {
    scope: Vec<(Name, String)>,
    reserved: HashSet<String>,
}

fn paren(s: String, level: u8, ctx: u8) -> String {
    if level < ctx {
        format!("({})", s)
    } else {
        s
    }
}

const RESERVED_WORDS: &[&str] =
    &["true", "false", "mu", "nu", "forall", "exists", "let", "max", "prop", "int"];

impl Printer {
    fn name(&self, n: &Name) -> String {
        match self.scope.iter().rev().find(|(m, _)| m == n) {
            Some((_, d)) => d.clone(),
            None => display_free(n),
        }
    }

    fn push(&mut self, n: &Name) -> String {
        let taken = |s: &str, p: &Printer| {
            p.reserved.contains(s)
                || RESERVED_WORDS.contains(&s)
                || p.scope.iter().any(|(_, d)| d == s)
        };
        let base = n.base();
        let mut d = base.to_string();
        let mut k = 1;
        while taken(&d, self) {
            d = format!("{}{}", base, k);
            k += 1;
        }
        self.scope.push((n.clone(), d.clone()));
        d
    }

    fn formula(&mut self, f: &Formula, ctx: u8) -> String {
        match f {
            Formula::True => "true".into(),
            Formula::False => "false".into(),
            Formula::Var(x) => self.name(x),
            Formula::Or(a, b) => {
                let s = format!("{} \\/ {}", self.formula(a, OR), self.formula(b, AND));
                paren(s, OR, ctx)
            }
            Formula::And(a, b) => {
                let s = format!("{} /\\ {}", self.formula(a, AND), self.formula(b, CMP));
                paren(s, AND, ctx)
            }
            Formula::Modal(k, a, b) => {
                let body = self.formula(b, UNARY);
                let s = match k {
                    ModalKind::Diamond => format!("<{}>{}", a, body),
                    ModalKind::Box => format!("[{}]{}", a, body),
                };
                paren(s, UNARY, ctx)
            }
            Formula::Atom(a) => {
                let s = format!("{} {} {}", self.int(&a.lhs, SUM), a.op.symbol(), self.int(&a.rhs, SUM));
                paren(s, CMP, ctx)
            }
            Formula::App(..) => {
                let (head, args) = f.spine();
                let mut s = self.formula(head, APP);
                for a in args {
                    s.push(' ');
                    match a {
                        Arg::Int(e) => s.push_str(&self.int(e, ATOM)),
                        Arg::Formula(g) => s.push_str(&self.formula(g, ATOM)),
                    }
                }
                paren(s, APP, ctx)
            }
            Formula::Fix(k, x, t, b) => {
                let kw = match k {
                    FixKind::Mu => "mu",
                    FixKind::Nu => "nu",
                };
                let d = self.push(x);
                let body = self.formula(b, BINDER);
                self.scope.pop();
                paren(format!("{} {}: {}. {}", kw, d, t, body), BINDER, ctx)
            }
            Formula::Lambda(..) => {
                let (params, body) = f.lambdas();
                let mut shown = Vec::new();
                for (x, t) in &params {
                    let d = self.push(x);
                    shown.push(format!("{}: {}", d, t));
                }
                let b = self.formula(body, BINDER);
                self.scope.truncate(self.scope.len() - params.len());
                let head = if shown.len() == 1 {
                    shown.pop().unwrap_or_default()
                } else {
                    format!("({})", shown.join(", "))
                };
                paren(format!("\\{}. {}", head, b), BINDER, ctx)
            }
            Formula::Quant(k, ..) => {
                let kw = match k {
                    QuantKind::Forall => "forall",
                    QuantKind::Exists => "exists",
                };
                // Collect a run of same-kind quantifiers; only the last may carry bounds.
                let mut vars = Vec::new();
                let mut g = f;
                let mut bounds_text = String::new();
                while let Formula::Quant(k2, x, lb, b) = g {
                    if k2 != k {
                        break;
                    }
                    let bt = if lb.is_empty() {
                        String::new()
                    } else if lb.len() == 1 {
                        format!(" >= {}", self.int(&lb[0], SUM))
                    } else {
                        let items: Vec<String> = lb.iter().map(|e| self.int(e, SUM)).collect();
                        format!(" >= max({})", items.join(", "))
                    };
                    vars.push(self.push(x));
                    g = b;
                    if !bt.is_empty() {
                        bounds_text = bt;
                        break;
                    }
                }
                let body = self.formula(g, BINDER);
                self.scope.truncate(self.scope.len() - vars.len());
                paren(format!("{} {}{}. {}", kw, vars.join(", "), bounds_text, body), BINDER, ctx)
            }
        }
    }

    fn int(&self, e: &IntExpr, ctx: u8) -> String {
        match e {
            IntExpr::Const(c) if *c < 0 => paren(format!("{}", c), UNARY, ctx),
            IntExpr::Const(c) => c.to_string(),
            IntExpr::Var(x) => self.name(x),
            IntExpr::Add(a, b) => {
                paren(format!("{} + {}", self.int(a, SUM), self.int(b, UNARY)), SUM, ctx)
            }
            IntExpr::Sub(a, b) => {
                paren(format!("{} - {}", self.int(a, SUM), self.int(b, UNARY)), SUM, ctx)
            }
            IntExpr::Neg(a) => paren(format!("-{}", self.int(a, APP)), UNARY, ctx),
        }
    }
}
