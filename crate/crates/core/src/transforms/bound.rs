use std::fmt;

use crate::syntax::lexer::Tok;
use crate::syntax::parser::{cursor, int_expr, syntax};
use crate::syntax::{IntExpr, LinearForm, Name, ParseError};

/// `max_i (Σ c_ij·x_j + d_i)` over free integer variables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundExpr {
    pieces: Vec<LinearForm>,
}

impl BoundExpr {
    pub fn constant(n: i64) -> Self {
        BoundExpr { pieces: vec![LinearForm::constant(n as i128)] }
    }

    /// Fails on an empty piece list.
    pub fn max_of(pieces: Vec<LinearForm>) -> Option<Self> {
        if pieces.is_empty() {
            None
        } else {
            Some(BoundExpr { pieces })
        }
    }

    pub fn pieces(&self) -> &[LinearForm] {
        &self.pieces
    }

    pub fn vars(&self) -> Vec<Name> {
        let mut out: Vec<Name> = Vec::new();
        for p in &self.pieces {
            for v in p.coeffs.keys() {
                if !out.contains(v) {
                    out.push(v.clone());
                }
            }
        }
        out
    }

    /// One expression per piece, with variables renamed by `rename`.
    pub fn instantiate(&self, rename: &dyn Fn(&Name) -> IntExpr) -> Vec<IntExpr> {
        self.pieces
            .iter()
            .map(|p| {
                let mut e = p.to_expr();
                for v in p.coeffs.keys() {
                    e = e.rename(v, &rename(v));
                }
                e
            })
            .collect()
    }

    pub fn eval(&self, lookup: &dyn Fn(&Name) -> Option<i64>) -> Option<i128> {
        self.pieces.iter().map(|p| p.eval(lookup)).collect::<Option<Vec<_>>>()?.into_iter().max()
    }
}

impl fmt::Display for BoundExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.pieces.iter().map(|p| p.to_expr().to_string()).collect();
        if parts.len() == 1 {
            f.write_str(&parts[0])
        } else {
            write!(f, "max({})", parts.join(", "))
        }
    }
}

/// Parses `e` or `max(e1, ..., ek)` over linear expressions.
pub fn parse_bound(text: &str) -> Result<BoundExpr, ParseError> {
    let mut c = cursor(text)?;
    let mut pieces = Vec::new();
    if c.is_kw("max") {
        c.bump();
        if !c.eat(&Tok::LParen) {
            return Err(syntax(c.pos(), "expected `(` after `max`"));
        }
        loop {
            pieces.push(LinearForm::from_expr(&int_expr(&mut c)?));
            if c.eat(&Tok::Comma) {
                continue;
            }
            if c.eat(&Tok::RParen) {
                break;
            }
            return Err(syntax(c.pos(), format!("expected `,` or `)`, found {}", c.peek())));
        }
    } else {
        pieces.push(LinearForm::from_expr(&int_expr(&mut c)?));
    }
    if !c.at_eof() {
        return Err(syntax(c.pos(), format!("unexpected {}", c.peek())));
    }
    Ok(BoundExpr { pieces })
}

/// Constant bounds `1, 2, 4, ...` up to and including `cap`.
pub fn bound_schedule(cap: i64) -> Vec<i64> {
    let mut out = Vec::new();
    let mut n = 1i64;
    while n <= cap {
        out.push(n);
        match n.checked_mul(2) {
            Some(m) => n = m,
            None => break,
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_affine_max() {
        let b = parse_bound("max(i+1, 1)").unwrap();
        assert_eq!(b.pieces().len(), 2);
        assert_eq!(b.to_string(), "max(i + 1, 1)");
        let at = |i: i64| b.eval(&|_| Some(i)).unwrap();
        assert_eq!(at(-5), 1);
        assert_eq!(at(3), 4);
        assert_eq!(parse_bound("8").unwrap(), BoundExpr::constant(8));
    }

    #[test]
    fn rejects_garbage() {
        assert!(parse_bound("max(").is_err());
        assert!(parse_bound("max()").is_err());
        assert!(parse_bound("x * y").is_err());
        assert!(parse_bound("1 2").is_err());
    }

    #[test]
    fn schedule_doubles() {
        assert_eq!(bound_schedule(20), vec![1, 2, 4, 8, 16]);
        assert!(bound_schedule(0).is_empty());
    }
}
