use std::collections::{HashMap, HashSet};
use std::hash::{Hash, Hasher};
use std::rc::Rc;

use super::{Boundary, EvalConfig, EvalStats, SemError};
use crate::lts::Lts;
use crate::syntax::{free_vars, Arg, FixKind, Formula, IntExpr, ModalKind, Name, QuantKind, Type};

/// A tabulated semantic value: a state set or a total function table.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum SemValue {
    Prop(u64),
    Fun(Rc<FunTable>),
}

/// Total table over the argument domain of `param`. Integer arguments are
/// indexed by `k + window`, prop arguments by their bitset, function
/// arguments by their position in the enumeration of monotone tables.
#[derive(Clone, Debug)]
pub struct FunTable {
    pub param: Type,
    pub result: Type,
    pub entries: Vec<SemValue>,
    /// Fixpoint that produced the table; selects the out-of-window value
    /// under the polarity policy. Ignored by equality and hashing.
    pub origin: Option<FixKind>,
}

impl PartialEq for FunTable {
    fn eq(&self, other: &Self) -> bool {
        self.entries == other.entries
    }
}

impl Eq for FunTable {}

impl Hash for FunTable {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.entries.hash(state)
    }
}

/// Pointwise order, lifted through tables.
pub(crate) fn leq(a: &SemValue, b: &SemValue) -> bool {
    match (a, b) {
        (SemValue::Prop(x), SemValue::Prop(y)) => x & !y == 0,
        (SemValue::Fun(x), SemValue::Fun(y)) => {
            x.entries.iter().zip(&y.entries).all(|(p, q)| leq(p, q))
        }
        _ => false,
    }
}

struct Closure<'f> {
    param: Name,
    body: &'f Formula,
    env: Env<'f>,
}

#[derive(Clone)]
enum Val<'f> {
    Prop(u64),
    Int(i64),
    Table(Rc<FunTable>),
    Clo(Rc<Closure<'f>>),
}

impl From<&SemValue> for Val<'_> {
    fn from(v: &SemValue) -> Self {
        match v {
            SemValue::Prop(s) => Val::Prop(*s),
            SemValue::Fun(t) => Val::Table(t.clone()),
        }
    }
}

struct EnvNode<'f> {
    name: Name,
    val: Val<'f>,
    next: Env<'f>,
}

type Env<'f> = Option<Rc<EnvNode<'f>>>;

fn bind<'f>(env: &Env<'f>, name: &Name, val: Val<'f>) -> Env<'f> {
    Some(Rc::new(EnvNode { name: name.clone(), val, next: env.clone() }))
}

fn lookup<'f>(env: &Env<'f>, name: &Name) -> Option<Val<'f>> {
    let mut cur = env;
    while let Some(node) = cur {
        if node.name == *name {
            return Some(node.val.clone());
        }
        cur = &node.next;
    }
    None
}

/// Enumerated domain of an arrow type.
struct Domain {
    elems: Vec<SemValue>,
    index: HashMap<SemValue, usize>,
}

struct Ev<'f> {
    n: usize,
    full: u64,
    succ: HashMap<String, Vec<u64>>,
    cfg: EvalConfig,
    domains: HashMap<Type, Rc<Domain>>,
    closed: HashSet<*const Formula>,
    memo: HashMap<*const Formula, Val<'f>>,
    stats: EvalStats,
}

fn internal(msg: &str) -> SemError {
    SemError::Internal(msg.to_string())
}

impl<'f> Ev<'f> {
    fn new(m: &Lts, cfg: &EvalConfig, root: &'f Formula) -> Result<Self, SemError> {
        let n = m.num_states();
        if n > 64 {
            return Err(SemError::TooManyStates(n));
        }
        let full = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
        let mut succ: HashMap<String, Vec<u64>> = HashMap::new();
        for (s, a, t) in &m.transitions {
            succ.entry(a.clone()).or_insert_with(|| vec![0; n])[*s] |= 1 << t;
        }
        let mut closed = HashSet::new();
        root.visit(&mut |g| {
            if matches!(g, Formula::Fix(..)) && free_vars(g).is_empty() {
                closed.insert(g as *const Formula);
            }
        });
        Ok(Ev {
            n,
            full,
            succ,
            cfg: cfg.clone(),
            domains: HashMap::new(),
            closed,
            memo: HashMap::new(),
            stats: EvalStats::default(),
        })
    }

    fn window_len(&self) -> u128 {
        2 * self.cfg.window.max(0) as u128 + 1
    }

    fn cap_check(&self, ty: &Type, size: u128) -> Result<(), SemError> {
        if size > self.cfg.table_cap as u128 {
            Err(SemError::TableCap { ty: ty.clone(), size, cap: self.cfg.table_cap })
        } else {
            Ok(())
        }
    }

    /// Number of elements of the argument domain at `t`.
    fn domain_len(&mut self, t: &Type) -> Result<u128, SemError> {
        match t {
            Type::Int => Ok(self.window_len()),
            Type::Prop => {
                let len = 1u128 << self.n;
                self.cap_check(t, len)?;
                Ok(len)
            }
            Type::Arrow(..) => Ok(self.domain(t)?.elems.len() as u128),
        }
    }

    /// Leaf entries in a table of type `t`.
    fn table_size(&mut self, t: &Type) -> Result<u128, SemError> {
        match t {
            Type::Prop | Type::Int => Ok(1),
            Type::Arrow(a, b) => {
                let s = self.domain_len(a)?.saturating_mul(self.table_size(b)?);
                self.cap_check(t, s)?;
                Ok(s)
            }
        }
    }

    /// Height of the lattice at `t`.
    fn height(&mut self, t: &Type) -> Result<u128, SemError> {
        match t {
            Type::Prop | Type::Int => Ok(self.n as u128),
            Type::Arrow(a, b) => Ok(self.domain_len(a)?.saturating_mul(self.height(b)?)),
        }
    }

    fn extreme(&mut self, t: &Type, top: bool, origin: Option<FixKind>) -> Result<SemValue, SemError> {
        match t {
            Type::Prop | Type::Int => Ok(SemValue::Prop(if top { self.full } else { 0 })),
            Type::Arrow(a, b) => {
                self.table_size(t)?;
                let len = self.domain_len(a)? as usize;
                let inner = self.extreme(b, top, origin)?;
                Ok(SemValue::Fun(Rc::new(FunTable {
                    param: (**a).clone(),
                    result: (**b).clone(),
                    entries: vec![inner; len],
                    origin,
                })))
            }
        }
    }

    /// All elements of the domain at `t` that can appear as a table key.
    fn values_of(&mut self, t: &Type) -> Result<Vec<SemValue>, SemError> {
        match t {
            Type::Prop => {
                let len = self.domain_len(t)? as u64;
                Ok((0..len).map(SemValue::Prop).collect())
            }
            Type::Arrow(..) => Ok(self.domain(t)?.elems.clone()),
            Type::Int => Err(internal("integers are not table values")),
        }
    }

    /// Enumerates the monotone tables of arrow type `t`.
    fn domain(&mut self, t: &Type) -> Result<Rc<Domain>, SemError> {
        if let Some(d) = self.domains.get(t) {
            return Ok(d.clone());
        }
        let Type::Arrow(a, b) = t else {
            return Err(internal("domain of a non-arrow type"));
        };
        self.table_size(t)?;
        let len = self.domain_len(a)? as usize;
        let keys: Vec<Option<SemValue>> = match &**a {
            Type::Int => vec![None; len],
            _ => self.values_of(a)?.into_iter().map(Some).collect(),
        };
        let key_leq = |i: usize, j: usize| match (&keys[i], &keys[j]) {
            (Some(x), Some(y)) => leq(x, y),
            _ => i == j,
        };
        let cands = self.values_of(b)?;
        let cap = self.cfg.table_cap;
        let mut out = Vec::new();
        let mut chosen: Vec<usize> = Vec::with_capacity(len);
        // Depth-first search over monotone assignments.
        let mut next = vec![0usize; len + 1];
        let mut depth = 0usize;
        loop {
            if depth == len {
                let entries = chosen.iter().map(|&c| cands[c].clone()).collect();
                out.push(SemValue::Fun(Rc::new(FunTable {
                    param: (**a).clone(),
                    result: (**b).clone(),
                    entries,
                    origin: None,
                })));
                if out.len() > cap {
                    return Err(SemError::TableCap { ty: t.clone(), size: out.len() as u128, cap });
                }
                if depth == 0 {
                    break;
                }
                depth -= 1;
                chosen.pop();
                continue;
            }
            let mut found = false;
            while next[depth] < cands.len() {
                let c = next[depth];
                next[depth] += 1;
                let v = &cands[c];
                let ok = (0..depth).all(|j| {
                    (!key_leq(j, depth) || leq(&cands[chosen[j]], v))
                        && (!key_leq(depth, j) || leq(v, &cands[chosen[j]]))
                });
                if ok {
                    chosen.push(c);
                    depth += 1;
                    next[depth] = 0;
                    found = true;
                    break;
                }
            }
            if !found {
                if depth == 0 {
                    break;
                }
                depth -= 1;
                chosen.pop();
            }
        }
        let index = out.iter().enumerate().map(|(i, v)| (v.clone(), i)).collect();
        let d = Rc::new(Domain { elems: out, index });
        self.domains.insert(t.clone(), d.clone());
        Ok(d)
    }

    fn key_index(&mut self, param: &Type, arg: &Val<'f>) -> Result<Option<usize>, SemError> {
        match (param, arg) {
            (Type::Int, Val::Int(k)) => {
                let w = self.cfg.window.max(0);
                Ok(if k.abs() <= w { Some((k + w) as usize) } else { None })
            }
            (Type::Prop, Val::Prop(s)) => Ok(Some(*s as usize)),
            (Type::Arrow(..), _) => {
                let key = self.tabulate(arg, param, None)?;
                let d = self.domain(param)?;
                match d.index.get(&key) {
                    Some(i) => Ok(Some(*i)),
                    None => Err(internal("non-monotone function value used as an argument")),
                }
            }
            _ => Err(internal("argument does not match the table's parameter type")),
        }
    }

    fn boundary(&mut self, table: &FunTable) -> Result<Val<'f>, SemError> {
        let top = self.cfg.boundary == Boundary::Polarity && table.origin == Some(FixKind::Nu);
        let v = self.extreme(&table.result, top, table.origin)?;
        Ok(Val::from(&v))
    }

    fn apply(&mut self, f: &Val<'f>, arg: Val<'f>) -> Result<Val<'f>, SemError> {
        match f {
            Val::Clo(c) => {
                let env = bind(&c.env, &c.param, arg);
                self.eval(c.body, &env)
            }
            Val::Table(t) => match self.key_index(&t.param, &arg)? {
                Some(i) => Ok(Val::from(&t.entries[i])),
                None => self.boundary(t),
            },
            _ => Err(internal("application of a non-function")),
        }
    }

    fn tabulate(&mut self, v: &Val<'f>, t: &Type, origin: Option<FixKind>) -> Result<SemValue, SemError> {
        match (v, t) {
            (Val::Prop(s), _) => Ok(SemValue::Prop(*s)),
            (Val::Table(tb), _) => Ok(SemValue::Fun(tb.clone())),
            (Val::Clo(_), Type::Arrow(a, b)) => {
                self.table_size(t)?;
                let len = self.domain_len(a)? as usize;
                let keys: Vec<Val<'f>> = match &**a {
                    Type::Int => {
                        let w = self.cfg.window.max(0);
                        (-w..=w).map(Val::Int).collect()
                    }
                    _ => self.values_of(a)?.iter().map(Val::from).collect(),
                };
                debug_assert_eq!(keys.len(), len);
                let mut entries = Vec::with_capacity(len);
                for k in keys {
                    let r = self.apply(v, k)?;
                    entries.push(self.tabulate(&r, b, origin)?);
                }
                Ok(SemValue::Fun(Rc::new(FunTable {
                    param: (**a).clone(),
                    result: (**b).clone(),
                    entries,
                    origin,
                })))
            }
            _ => Err(internal("cannot tabulate value at this type")),
        }
    }

    fn int(&self, e: &IntExpr, env: &Env<'f>) -> Result<i64, SemError> {
        let r = match e {
            IntExpr::Const(k) => Some(*k),
            IntExpr::Var(x) => match lookup(env, x) {
                Some(Val::Int(k)) => Some(k),
                _ => return Err(internal("unbound integer variable")),
            },
            IntExpr::Add(a, b) => self.int(a, env)?.checked_add(self.int(b, env)?),
            IntExpr::Sub(a, b) => self.int(a, env)?.checked_sub(self.int(b, env)?),
            IntExpr::Neg(a) => self.int(a, env)?.checked_neg(),
        };
        r.ok_or_else(|| SemError::Overflow(e.to_string()))
    }

    fn prop(&mut self, f: &'f Formula, env: &Env<'f>) -> Result<u64, SemError> {
        match self.eval(f, env)? {
            Val::Prop(s) => Ok(s),
            _ => Err(internal("expected a state set")),
        }
    }

    fn fixpoint(
        &mut self,
        kind: FixKind,
        x: &Name,
        t: &Type,
        body: &'f Formula,
        env: &Env<'f>,
    ) -> Result<Val<'f>, SemError> {
        let height = self.height(t)?;
        let mut cur = self.extreme(t, kind == FixKind::Nu, Some(kind))?;
        let mut rounds: u64 = 0;
        loop {
            rounds += 1;
            let env2 = bind(env, x, Val::from(&cur));
            let r = self.eval(body, &env2)?;
            let next = self.tabulate(&r, t, Some(kind))?;
            if next == cur {
                break;
            }
            cur = next;
            if rounds as u128 > height + 1 {
                return Err(SemError::HeightExceeded { ty: t.clone(), iterations: rounds, height });
            }
        }
        self.stats.fixpoints += 1;
        self.stats.rounds += rounds;
        let ratio = (rounds as u128 * 100 / (height + 1)) as u64;
        self.stats.worst_height_ratio_pct = self.stats.worst_height_ratio_pct.max(ratio);
        Ok(Val::from(&cur))
    }

    fn eval(&mut self, f: &'f Formula, env: &Env<'f>) -> Result<Val<'f>, SemError> {
        Ok(match f {
            Formula::True => Val::Prop(self.full),
            Formula::False => Val::Prop(0),
            Formula::Var(x) => lookup(env, x).ok_or_else(|| internal("unbound variable"))?,
            Formula::Atom(a) => {
                let l = self.int(&a.lhs, env)?;
                let r = self.int(&a.rhs, env)?;
                Val::Prop(if a.op.holds(l, r) { self.full } else { 0 })
            }
            Formula::Or(a, b) => {
                let l = self.prop(a, env)?;
                if l == self.full {
                    return Ok(Val::Prop(l));
                }
                Val::Prop(l | self.prop(b, env)?)
            }
            Formula::And(a, b) => {
                let l = self.prop(a, env)?;
                if l == 0 {
                    return Ok(Val::Prop(0));
                }
                Val::Prop(l & self.prop(b, env)?)
            }
            Formula::Modal(k, label, b) => {
                let s = self.prop(b, env)?;
                let mut out = 0u64;
                let succ = self.succ.get(label.as_str());
                for q in 0..self.n {
                    let next = succ.map_or(0, |v| v[q]);
                    let holds = match k {
                        ModalKind::Diamond => next & s != 0,
                        ModalKind::Box => next & !s == 0,
                    };
                    if holds {
                        out |= 1 << q;
                    }
                }
                Val::Prop(out)
            }
            Formula::Fix(k, x, t, b) => {
                let key = f as *const Formula;
                let closed = self.closed.contains(&key);
                if closed {
                    if let Some(v) = self.memo.get(&key) {
                        return Ok(v.clone());
                    }
                }
                let v = self.fixpoint(*k, x, t, b, env)?;
                if closed {
                    self.memo.insert(key, v.clone());
                }
                v
            }
            Formula::Lambda(x, _, b) => {
                Val::Clo(Rc::new(Closure { param: x.clone(), body: b, env: env.clone() }))
            }
            Formula::App(h, a) => {
                let hv = self.eval(h, env)?;
                let av = match a {
                    Arg::Int(e) => Val::Int(self.int(e, env)?),
                    Arg::Formula(g) => self.eval(g, env)?,
                };
                self.apply(&hv, av)?
            }
            Formula::Quant(k, x, lbs, b) => {
                let w = self.cfg.window.max(0);
                let mut lo = -w;
                for e in lbs {
                    lo = lo.max(self.int(e, env)?);
                }
                let forall = *k == QuantKind::Forall;
                let mut acc = if forall { self.full } else { 0 };
                let mut v = lo;
                while v <= w {
                    let env2 = bind(env, x, Val::Int(v));
                    let s = self.prop(b, &env2)?;
                    acc = if forall { acc & s } else { acc | s };
                    if (forall && acc == 0) || (!forall && acc == self.full) {
                        break;
                    }
                    v += 1;
                }
                Val::Prop(acc)
            }
        })
    }
}

pub(super) fn denote(f: &Formula, m: &Lts, cfg: &EvalConfig) -> Result<(u64, EvalStats), SemError> {
    let mut ev = Ev::new(m, cfg, f)?;
    let s = ev.prop(f, &None)?;
    Ok((s, ev.stats))
}

pub(super) fn denote_value(
    f: &Formula,
    t: &Type,
    m: &Lts,
    cfg: &EvalConfig,
) -> Result<SemValue, SemError> {
    let mut ev = Ev::new(m, cfg, f)?;
    let v = ev.eval(f, &None)?;
    ev.tabulate(&v, t, None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lts::trivial_model;

    #[test]
    fn monotone_prop_to_prop_on_one_state() {
        // Over {∅, {s}}: the monotone maps are const ∅, identity, const {s}.
        let m = trivial_model();
        let root = Formula::True;
        let mut ev = Ev::new(&m, &EvalConfig::default(), &root).unwrap();
        let t = Type::arrow(Type::Prop, Type::Prop);
        assert_eq!(ev.domain(&t).unwrap().elems.len(), 3);
        let t2 = Type::arrow(t.clone(), Type::Prop);
        // Monotone maps from a 3-chain to a 2-chain: 4.
        assert_eq!(ev.domain(&t2).unwrap().elems.len(), 4);
    }

    #[test]
    fn table_equality_ignores_origin() {
        let a = FunTable { param: Type::Prop, result: Type::Prop, entries: vec![], origin: None };
        let b = FunTable { origin: Some(FixKind::Nu), ..a.clone() };
        assert_eq!(a, b);
    }
}
