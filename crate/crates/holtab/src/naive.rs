//! Unshared reference backend: plain owned term trees with a textbook
//! beta/eta normalizer.
//!
//! Nothing here touches the shared store's normalization path, so these
//! trees serve as an independent oracle for it. Because substitution
//! deep-copies and equality walks whole trees, work grows with tree size
//! rather than graph size, which is exactly the cost profile the shared
//! store exists to avoid; `nf` is also the contrast backend for the
//! scaling benchmarks.

use crate::term::{NameId, Node, Store, TermError, TermId, TyId};

/// An owned term tree. Atoms reuse the store's interned labels but the
/// structure is an ordinary recursive enum with no sharing.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum NTerm {
    Db(usize),
    Const(NameId),
    Ap(Box<NTerm>, Box<NTerm>),
    Lam(TyId, Box<NTerm>),
    Bot,
    Imp(Box<NTerm>, Box<NTerm>),
    All(TyId, Box<NTerm>),
    Eq(TyId, Box<NTerm>, Box<NTerm>),
    Choice(TyId),
}

impl NTerm {
    pub fn ap(f: NTerm, a: NTerm) -> NTerm {
        NTerm::Ap(Box::new(f), Box::new(a))
    }

    pub fn lam(ty: TyId, b: NTerm) -> NTerm {
        NTerm::Lam(ty, Box::new(b))
    }

    pub fn imp(s: NTerm, t: NTerm) -> NTerm {
        NTerm::Imp(Box::new(s), Box::new(t))
    }

    pub fn size(&self) -> usize {
        match self {
            NTerm::Db(_) | NTerm::Const(_) | NTerm::Bot | NTerm::Choice(_) => 1,
            NTerm::Ap(a, b) | NTerm::Imp(a, b) => 1 + a.size() + b.size(),
            NTerm::Lam(_, b) | NTerm::All(_, b) => 1 + b.size(),
            NTerm::Eq(_, a, b) => 1 + a.size() + b.size(),
        }
    }
}

fn free_at(t: &NTerm, i: usize) -> bool {
    match t {
        NTerm::Db(j) => *j == i,
        NTerm::Const(_) | NTerm::Bot | NTerm::Choice(_) => false,
        NTerm::Ap(a, b) | NTerm::Imp(a, b) => free_at(a, i) || free_at(b, i),
        NTerm::Eq(_, a, b) => free_at(a, i) || free_at(b, i),
        NTerm::Lam(_, b) | NTerm::All(_, b) => free_at(b, i + 1),
    }
}

/// Free-index set computed by traversal (mask oracle).
pub fn free_indices(t: &NTerm) -> Vec<usize> {
    fn walk(t: &NTerm, depth: usize, out: &mut Vec<usize>) {
        match t {
            NTerm::Db(j) => {
                if *j >= depth {
                    out.push(*j - depth);
                }
            }
            NTerm::Const(_) | NTerm::Bot | NTerm::Choice(_) => {}
            NTerm::Ap(a, b) | NTerm::Imp(a, b) => {
                walk(a, depth, out);
                walk(b, depth, out);
            }
            NTerm::Eq(_, a, b) => {
                walk(a, depth, out);
                walk(b, depth, out);
            }
            NTerm::Lam(_, b) | NTerm::All(_, b) => walk(b, depth + 1, out),
        }
    }
    let mut out = Vec::new();
    walk(t, 0, &mut out);
    out.sort_unstable();
    out.dedup();
    out
}

pub fn shift(t: &NTerm, cutoff: usize, amount: i64) -> NTerm {
    match t {
        NTerm::Db(i) => {
            if *i >= cutoff {
                NTerm::Db((*i as i64 + amount) as usize)
            } else {
                NTerm::Db(*i)
            }
        }
        NTerm::Const(n) => NTerm::Const(*n),
        NTerm::Bot => NTerm::Bot,
        NTerm::Choice(ty) => NTerm::Choice(*ty),
        NTerm::Ap(a, b) => NTerm::ap(shift(a, cutoff, amount), shift(b, cutoff, amount)),
        NTerm::Imp(a, b) => NTerm::imp(shift(a, cutoff, amount), shift(b, cutoff, amount)),
        NTerm::Eq(ty, a, b) => NTerm::Eq(
            *ty,
            Box::new(shift(a, cutoff, amount)),
            Box::new(shift(b, cutoff, amount)),
        ),
        NTerm::Lam(ty, b) => NTerm::lam(*ty, shift(b, cutoff + 1, amount)),
        NTerm::All(ty, b) => NTerm::All(*ty, Box::new(shift(b, cutoff + 1, amount))),
    }
}

/// Capture-avoiding substitution of `s` for index `j`, decrementing the
/// indices above `j`. Copies `s` at every occurrence.
pub fn subst(t: &NTerm, j: usize, s: &NTerm) -> NTerm {
    match t {
        NTerm::Db(i) => {
            if *i == j {
                s.clone()
            } else if *i > j {
                NTerm::Db(i - 1)
            } else {
                NTerm::Db(*i)
            }
        }
        NTerm::Const(n) => NTerm::Const(*n),
        NTerm::Bot => NTerm::Bot,
        NTerm::Choice(ty) => NTerm::Choice(*ty),
        NTerm::Ap(a, b) => NTerm::ap(subst(a, j, s), subst(b, j, s)),
        NTerm::Imp(a, b) => NTerm::imp(subst(a, j, s), subst(b, j, s)),
        NTerm::Eq(ty, a, b) => {
            NTerm::Eq(*ty, Box::new(subst(a, j, s)), Box::new(subst(b, j, s)))
        }
        NTerm::Lam(ty, b) => {
            let s2 = shift(s, 0, 1);
            NTerm::lam(*ty, subst(b, j + 1, &s2))
        }
        NTerm::All(ty, b) => {
            let s2 = shift(s, 0, 1);
            NTerm::All(*ty, Box::new(subst(b, j + 1, &s2)))
        }
    }
}

/// Beta/eta normal form by bottom-up rewriting.
pub fn nf(t: &NTerm) -> NTerm {
    match t {
        NTerm::Db(_) | NTerm::Const(_) | NTerm::Bot | NTerm::Choice(_) => t.clone(),
        NTerm::Ap(f, a) => {
            let f2 = nf(f);
            let a2 = nf(a);
            match f2 {
                NTerm::Lam(_, b) => nf(&subst(&b, 0, &a2)),
                _ => NTerm::ap(f2, a2),
            }
        }
        NTerm::Lam(ty, b) => {
            let b2 = nf(b);
            if let NTerm::Ap(g, arg) = &b2 {
                if matches!(**arg, NTerm::Db(0)) && !free_at(g, 0) {
                    return shift(g, 0, -1);
                }
            }
            NTerm::lam(*ty, b2)
        }
        NTerm::Imp(a, b) => NTerm::imp(nf(a), nf(b)),
        NTerm::All(ty, b) => NTerm::All(*ty, Box::new(nf(b))),
        NTerm::Eq(ty, a, b) => NTerm::Eq(*ty, Box::new(nf(a)), Box::new(nf(b))),
    }
}

/// Reads a stored term out into an owned tree.
pub fn from_store(store: &Store, t: TermId) -> NTerm {
    match store.node(t) {
        Node::Db(i) => NTerm::Db(i as usize),
        Node::Const(n) => NTerm::Const(n),
        Node::Bot => NTerm::Bot,
        Node::Choice(ty) => NTerm::Choice(ty),
        Node::Ap(f, a) => NTerm::ap(from_store(store, f), from_store(store, a)),
        Node::Imp(s, u) => NTerm::imp(from_store(store, s), from_store(store, u)),
        Node::Lam(ty, b) => NTerm::lam(ty, from_store(store, b)),
        Node::All(ty, b) => NTerm::All(ty, Box::new(from_store(store, b))),
        Node::Eq(ty, s, u) => NTerm::Eq(
            ty,
            Box::new(from_store(store, s)),
            Box::new(from_store(store, u)),
        ),
    }
}

/// Builds a (possibly non-normal) tree through the store's normalizing
/// constructors, yielding the shared normal form.
pub fn to_store(store: &mut Store, t: &NTerm) -> Result<TermId, TermError> {
    match t {
        NTerm::Db(i) => store.mk_db(*i),
        NTerm::Const(n) => {
            let ty = store
                .const_ty(*n)
                .expect("constants must be registered before folding");
            Ok(store.mk_const(*n, ty))
        }
        NTerm::Bot => Ok(store.mk_bot()),
        NTerm::Choice(ty) => Ok(store.mk_choice(*ty)),
        NTerm::Ap(f, a) => {
            let f2 = to_store(store, f)?;
            let a2 = to_store(store, a)?;
            store.mk_norm_ap(f2, a2)
        }
        NTerm::Imp(s, u) => {
            let s2 = to_store(store, s)?;
            let u2 = to_store(store, u)?;
            Ok(store.mk_imp(s2, u2))
        }
        NTerm::Lam(ty, b) => {
            let b2 = to_store(store, b)?;
            Ok(store.mk_norm_lam(*ty, b2))
        }
        NTerm::All(ty, b) => {
            let b2 = to_store(store, b)?;
            Ok(store.mk_all(*ty, b2))
        }
        NTerm::Eq(ty, s, u) => {
            let s2 = to_store(store, s)?;
            let u2 = to_store(store, u)?;
            store.mk_eq(*ty, s2, u2)
        }
    }
}

pub mod gen {
    //! Seeded generator of well-typed raw term trees, used by the oracle
    //! suites. Argument types are kept first-order so no generated term
    //! can amplify itself into astronomically large normal forms.

    use rand::prelude::*;

    use super::NTerm;
    use crate::term::{Store, Ty, TyId};

    pub struct TermGen {
        /// types usable as quantifier/binder/equation domains
        pub all_tys: Vec<TyId>,
        /// types usable as generated application arguments
        pub arg_tys: Vec<TyId>,
        /// a couple of constants per type, registered in the store
        consts: Vec<(TyId, Vec<crate::term::NameId>)>,
        prop: TyId,
    }

    impl TermGen {
        pub fn new(store: &mut Store) -> TermGen {
            let prop = store.prop();
            let iota = store.base_sort("$i");
            let alpha = store.base_sort("srt");
            let ii = store.arrow(iota, iota);
            let ip = store.arrow(iota, prop);
            let pp = store.arrow(prop, prop);
            let iii = store.arrow(iota, ii);
            let hi = store.arrow(ii, iota);
            let hii = store.arrow(ii, ii);
            let all_tys = vec![iota, alpha, prop, ii, ip, pp, iii, hi, hii];
            let arg_tys = vec![iota, alpha, prop, ii, ip];
            let mut consts = Vec::new();
            for (k, &ty) in all_tys.iter().enumerate() {
                let mut names = Vec::new();
                for v in 0..2 {
                    let n = store.intern_name(&format!("g{k}_{v}"));
                    store.mk_const(n, ty);
                    names.push(n);
                }
                consts.push((ty, names));
            }
            TermGen {
                all_tys,
                arg_tys,
                consts,
                prop,
            }
        }

        fn const_of(&self, rng: &mut impl Rng, ty: TyId) -> Option<NTerm> {
            self.consts
                .iter()
                .find(|(t, _)| *t == ty)
                .map(|(_, names)| NTerm::Const(*names.choose(rng).unwrap()))
        }

        /// A raw, possibly redex-carrying term of type `ty` under the
        /// binder context `ctx` (innermost last), of at most `budget`
        /// nodes.
        pub fn term(
            &self,
            rng: &mut impl Rng,
            store: &mut Store,
            ty: TyId,
            ctx: &mut Vec<TyId>,
            budget: usize,
        ) -> NTerm {
            if budget <= 1 {
                return self.leaf(rng, store, ty, ctx);
            }
            let arrow = match store.ty(ty) {
                Ty::Arrow(d, c) => Some((d, c)),
                _ => None,
            };
            let is_prop = ty == self.prop;
            loop {
                match rng.gen_range(0..10) {
                    0..=2 => return self.leaf(rng, store, ty, ctx),
                    3..=4 => {
                        // application; may produce a beta redex when the
                        // function side lands on a lambda
                        let arg_ty = *self.arg_tys.choose(rng).unwrap();
                        let fun_ty = store.arrow(arg_ty, ty);
                        let fb = (budget / 2).max(1);
                        let f = self.term(rng, store, fun_ty, ctx, fb);
                        let a = self.term(rng, store, arg_ty, ctx, budget - fb);
                        return NTerm::ap(f, a);
                    }
                    5..=6 => {
                        if let Some((d, c)) = arrow {
                            ctx.push(d);
                            let b = self.term(rng, store, c, ctx, budget - 1);
                            ctx.pop();
                            return NTerm::lam(d, b);
                        }
                    }
                    7 => {
                        if is_prop {
                            let fb = (budget / 2).max(1);
                            let s = self.term(rng, store, self.prop, ctx, fb);
                            let t = self.term(rng, store, self.prop, ctx, budget - fb);
                            return NTerm::imp(s, t);
                        }
                    }
                    8 => {
                        if is_prop {
                            let ety = *self.arg_tys.choose(rng).unwrap();
                            let fb = (budget / 2).max(1);
                            let s = self.term(rng, store, ety, ctx, fb);
                            let t = self.term(rng, store, ety, ctx, budget - fb);
                            return NTerm::Eq(ety, Box::new(s), Box::new(t));
                        }
                    }
                    _ => {
                        if is_prop {
                            let dty = *self.arg_tys.choose(rng).unwrap();
                            ctx.push(dty);
                            let b = self.term(rng, store, self.prop, ctx, budget - 1);
                            ctx.pop();
                            return NTerm::All(dty, Box::new(b));
                        }
                    }
                }
            }
        }

        fn leaf(&self, rng: &mut impl Rng, store: &Store, ty: TyId, ctx: &mut Vec<TyId>) -> NTerm {
            let vars: Vec<usize> = ctx
                .iter()
                .rev()
                .enumerate()
                .filter(|(_, t)| **t == ty)
                .map(|(i, _)| i)
                .collect();
            if !vars.is_empty() && rng.gen_bool(0.5) {
                return NTerm::Db(*vars.choose(rng).unwrap());
            }
            if ty == self.prop && rng.gen_bool(0.2) {
                return NTerm::Bot;
            }
            if let Some(c) = self.const_of(rng, ty) {
                return c;
            }
            // synthesized arrow types outside the pool: wrap lambdas
            // until a pooled type is reached
            match store.ty(ty) {
                Ty::Arrow(d, c) => {
                    ctx.push(d);
                    let b = self.leaf(rng, store, c, ctx);
                    ctx.pop();
                    NTerm::lam(d, b)
                }
                _ => unreachable!("pool base types always have constants"),
            }
        }

        /// A closed term of a random pool type.
        pub fn closed(&self, rng: &mut impl Rng, store: &mut Store, budget: usize) -> NTerm {
            let ty = *self.all_tys.choose(rng).unwrap();
            self.term(rng, store, ty, &mut Vec::new(), budget)
        }

        /// A closed proposition built from connectives, equations, and
        /// quantifiers.
        pub fn closed_prop(&self, rng: &mut impl Rng, store: &mut Store, budget: usize) -> NTerm {
            self.term(rng, store, self.prop, &mut Vec::new(), budget)
        }
    }
}
