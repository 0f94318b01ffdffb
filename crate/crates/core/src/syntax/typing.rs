use std::collections::HashMap;

use thiserror::Error;

use super::{Arg, Formula, IntExpr, Name, Type};

/// Types of free variables.
pub type TypeEnv = HashMap<Name, Type>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TypeError {
    #[error("unbound variable `{0}`")]
    Unbound(String),
    #[error("`{var}` has type {found}, expected {expected}")]
    Mismatch { var: String, expected: Type, found: Type },
    #[error("expected {expected}, found {found} in `{context}`")]
    Expected { expected: Type, found: Type, context: String },
    #[error("`{0}` is applied but is not a function")]
    NotAFunction(String),
    #[error("fixpoint binder `{0}` must have a predicate type, not {1}")]
    NotPredicate(String, Type),
    #[error("formula is not closed: free variable `{0}`")]
    NotClosed(String),
}

/// `order(prop) = order(int) = 0`, `order(σ→τ) = max(order(σ)+1, order(τ))`.
pub fn order_of(t: &Type) -> usize {
    match t {
        Type::Prop | Type::Int => 0,
        Type::Arrow(a, r) => (order_of(a) + 1).max(order_of(r)),
    }
}

/// Type of `f` under `env`.
pub fn typecheck(f: &Formula, env: &TypeEnv) -> Result<Type, TypeError> {
    let mut env = env.clone();
    infer(f, &mut env)
}

/// Type of a closed formula.
pub fn typecheck_closed(f: &Formula) -> Result<Type, TypeError> {
    if let Some(x) = super::free_vars(f).into_iter().next() {
        return Err(TypeError::NotClosed(x.to_string()));
    }
    typecheck(f, &TypeEnv::new())
}

fn with<T>(env: &mut TypeEnv, x: &Name, t: &Type, k: impl FnOnce(&mut TypeEnv) -> T) -> T {
    let old = env.insert(x.clone(), t.clone());
    let r = k(env);
    match old {
        Some(o) => env.insert(x.clone(), o),
        None => env.remove(x),
    };
    r
}

fn check_int(e: &IntExpr, env: &TypeEnv) -> Result<(), TypeError> {
    let mut vs = Vec::new();
    e.vars(&mut vs);
    for v in vs {
        match env.get(&v) {
            None => return Err(TypeError::Unbound(v.to_string())),
            Some(Type::Int) => {}
            Some(t) => {
                return Err(TypeError::Mismatch {
                    var: v.to_string(),
                    expected: Type::Int,
                    found: t.clone(),
                })
            }
        }
    }
    Ok(())
}

fn expect_prop(f: &Formula, env: &mut TypeEnv) -> Result<(), TypeError> {
    let t = infer(f, env)?;
    if t != Type::Prop {
        return Err(TypeError::Expected {
            expected: Type::Prop,
            found: t,
            context: f.to_string(),
        });
    }
    Ok(())
}

fn infer(f: &Formula, env: &mut TypeEnv) -> Result<Type, TypeError> {
    match f {
        Formula::True | Formula::False => Ok(Type::Prop),
        Formula::Var(x) => match env.get(x) {
            None => Err(TypeError::Unbound(x.to_string())),
            Some(Type::Int) => Err(TypeError::Expected {
                expected: Type::Prop,
                found: Type::Int,
                context: x.to_string(),
            }),
            Some(t) => Ok(t.clone()),
        },
        Formula::Atom(a) => {
            check_int(&a.lhs, env)?;
            check_int(&a.rhs, env)?;
            Ok(Type::Prop)
        }
        Formula::Or(a, b) | Formula::And(a, b) => {
            expect_prop(a, env)?;
            expect_prop(b, env)?;
            Ok(Type::Prop)
        }
        Formula::Modal(_, _, b) => {
            expect_prop(b, env)?;
            Ok(Type::Prop)
        }
        Formula::Fix(_, x, t, b) => {
            if !t.is_predicate() {
                return Err(TypeError::NotPredicate(x.to_string(), t.clone()));
            }
            let bt = with(env, x, t, |env| infer(b, env))?;
            if bt != *t {
                return Err(TypeError::Mismatch {
                    var: x.to_string(),
                    expected: t.clone(),
                    found: bt,
                });
            }
            Ok(t.clone())
        }
        Formula::Lambda(x, t, b) => {
            let bt = with(env, x, t, |env| infer(b, env))?;
            Ok(Type::arrow(t.clone(), bt))
        }
        Formula::Quant(_, x, lb, b) => {
            for e in lb {
                check_int(e, env)?;
            }
            with(env, x, &Type::Int, |env| expect_prop(b, env))?;
            Ok(Type::Prop)
        }
        Formula::App(h, a) => {
            let ht = infer(h, env)?;
            let Type::Arrow(dom, cod) = ht else {
                return Err(TypeError::NotAFunction(h.to_string()));
            };
            let at = match a {
                Arg::Int(e) => {
                    check_int(e, env)?;
                    Type::Int
                }
                Arg::Formula(g) => infer(g, env)?,
            };
            if at != *dom {
                return Err(TypeError::Expected {
                    expected: *dom,
                    found: at,
                    context: f.to_string(),
                });
            }
            Ok(*cod)
        }
    }
}
