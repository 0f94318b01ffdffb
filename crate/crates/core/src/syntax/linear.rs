use std::collections::BTreeMap;

use super::{CmpOp, IntExpr, LinearAtom, Name};

/// `Σ coeff·var + constant` with zero coefficients dropped.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Default)]
pub struct LinearForm {
    pub coeffs: BTreeMap<Name, i128>,
    pub constant: i128,
}

impl LinearForm {
    pub fn constant(c: i128) -> Self {
        LinearForm { coeffs: BTreeMap::new(), constant: c }
    }

    pub fn var(v: Name) -> Self {
        let mut coeffs = BTreeMap::new();
        coeffs.insert(v, 1);
        LinearForm { coeffs, constant: 0 }
    }

    pub fn from_expr(e: &IntExpr) -> Self {
        Self::from_expr_with(e, &|v| v.clone())
    }

    /// Like `from_expr`, renaming variables on the way.
    pub fn from_expr_with(e: &IntExpr, rename: &dyn Fn(&Name) -> Name) -> Self {
        match e {
            IntExpr::Const(c) => LinearForm::constant(*c as i128),
            IntExpr::Var(v) => LinearForm::var(rename(v)),
            IntExpr::Add(a, b) => {
                Self::from_expr_with(a, rename).plus(&Self::from_expr_with(b, rename), 1)
            }
            IntExpr::Sub(a, b) => {
                Self::from_expr_with(a, rename).plus(&Self::from_expr_with(b, rename), -1)
            }
            IntExpr::Neg(a) => Self::from_expr_with(a, rename).scale(-1),
        }
    }

    /// `self + k·other`
    pub fn plus(mut self, other: &LinearForm, k: i128) -> Self {
        for (v, c) in &other.coeffs {
            let e = self.coeffs.entry(v.clone()).or_insert(0);
            *e = e.wrapping_add(c.wrapping_mul(k));
            if *e == 0 {
                self.coeffs.remove(v);
            }
        }
        self.constant = self.constant.wrapping_add(other.constant.wrapping_mul(k));
        self
    }

    pub fn scale(mut self, k: i128) -> Self {
        if k == 0 {
            return LinearForm::default();
        }
        for c in self.coeffs.values_mut() {
            *c = c.wrapping_mul(k);
        }
        self.constant = self.constant.wrapping_mul(k);
        self
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn eval(&self, lookup: &dyn Fn(&Name) -> Option<i64>) -> Option<i128> {
        let mut acc = self.constant;
        for (v, c) in &self.coeffs {
            acc = acc.checked_add(c.checked_mul(lookup(v)? as i128)?)?;
        }
        Some(acc)
    }

    /// Renders back to an expression without multiplication: `3x` becomes
    /// `x + x + x`.
    pub fn to_expr(&self) -> IntExpr {
        let mut acc: Option<IntExpr> = None;
        for (v, c) in &self.coeffs {
            for _ in 0..c.unsigned_abs() {
                let x = IntExpr::Var(v.clone());
                acc = Some(match (acc, *c > 0) {
                    (None, true) => x,
                    (None, false) => IntExpr::neg(x),
                    (Some(a), true) => IntExpr::add(a, x),
                    (Some(a), false) => IntExpr::sub(a, x),
                });
            }
        }
        let k = self.constant as i64;
        match acc {
            None => IntExpr::Const(k),
            Some(a) => a.offset(k),
        }
    }
}

/// Canonical form of an atom: `f <= 0`, `f = 0` or `f != 0`, with strict
/// comparisons tightened over the integers and the sign of `f` fixed so
/// that syntactically different but equal atoms coincide.
pub(crate) fn canonical_atom(
    atom: &LinearAtom,
    rename: &dyn Fn(&Name) -> Name,
) -> (CmpOp, LinearForm) {
    let f = LinearForm::from_expr_with(&atom.lhs, rename)
        .plus(&LinearForm::from_expr_with(&atom.rhs, rename), -1);
    let (op, f) = match atom.op {
        CmpOp::Le => (CmpOp::Le, f),
        CmpOp::Lt => (CmpOp::Le, f.plus(&LinearForm::constant(1), 1)),
        CmpOp::Ge => (CmpOp::Le, f.scale(-1)),
        CmpOp::Gt => (CmpOp::Le, f.scale(-1).plus(&LinearForm::constant(1), 1)),
        CmpOp::Eq | CmpOp::Ne => {
            let negative_lead = match f.coeffs.values().next() {
                Some(c) => *c < 0,
                None => f.constant < 0,
            };
            (atom.op, if negative_lead { f.scale(-1) } else { f })
        }
    };
    (op, f)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn a(op: CmpOp, l: IntExpr, r: IntExpr) -> LinearAtom {
        LinearAtom::new(op, l, r)
    }

    #[test]
    fn strict_and_flipped_atoms_coincide() {
        let id = |v: &Name| v.clone();
        let y = || IntExpr::var("y");
        let gt = canonical_atom(&a(CmpOp::Gt, y(), IntExpr::Const(0)), &id);
        let ge = canonical_atom(&a(CmpOp::Ge, y(), IntExpr::Const(1)), &id);
        let lt = canonical_atom(&a(CmpOp::Lt, IntExpr::Const(0), y()), &id);
        assert_eq!(gt, ge);
        assert_eq!(gt, lt);
        let e1 = canonical_atom(&a(CmpOp::Eq, y(), IntExpr::Const(0)), &id);
        let e2 = canonical_atom(&a(CmpOp::Eq, IntExpr::Const(0), y()), &id);
        assert_eq!(e1, e2);
    }

    #[test]
    fn to_expr_round_trips_through_from_expr() {
        let e = IntExpr::sub(
            IntExpr::add(IntExpr::var("x"), IntExpr::Const(1)),
            IntExpr::add(IntExpr::var("y"), IntExpr::var("y")),
        );
        let f = LinearForm::from_expr(&e);
        assert_eq!(LinearForm::from_expr(&f.to_expr()), f);
        assert_eq!(f.coeffs[&Name::new("y")], -2);
        assert_eq!(f.constant, 1);
    }
}
