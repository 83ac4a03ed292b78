//! Interned types, interned names, and a perfectly shared store of
//! beta/eta-normal terms with integer ids.
//!
//! Every term a [`Store`] hands out is normal, and structurally equal
//! normal terms always share one [`TermId`], so term equality is an
//! integer comparison. Each node carries a bitmask of its free de Bruijn
//! indices (capped at 255), which lets shifting and substitution skip
//! subterms they cannot affect and lets eta-redexes be recognized
//! without traversing the abstraction body. Substitution and shifting
//! are memoized.

use std::collections::HashMap;

use thiserror::Error;

/// Largest representable de Bruijn index.
pub const MAX_DB_INDEX: usize = 255;

/// Handle to an interned simple type.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct TyId(u32);

impl TyId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Handle to an interned name.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct NameId(u32);

impl NameId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Handle to a shared normal term. Id equality is term equality.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct TermId(u32);

impl TermId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// A simple type: the type of propositions, a base sort, or a function type.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum Ty {
    Prop,
    Base(NameId),
    Arrow(TyId, TyId),
}

/// One stored term node. Children are ids back into the same store.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum Node {
    Db(u16),
    Const(NameId),
    Ap(TermId, TermId),
    Lam(TyId, TermId),
    Bot,
    Imp(TermId, TermId),
    All(TyId, TermId),
    Eq(TyId, TermId, TermId),
    Choice(TyId),
}

/// Set of free de Bruijn indices, as a 256-bit mask.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default, Debug)]
pub struct DbMask([u64; 4]);

impl DbMask {
    pub const EMPTY: DbMask = DbMask([0; 4]);

    pub fn singleton(i: usize) -> DbMask {
        debug_assert!(i <= MAX_DB_INDEX);
        let mut m = [0u64; 4];
        m[i / 64] = 1u64 << (i % 64);
        DbMask(m)
    }

    pub fn contains(self, i: usize) -> bool {
        i <= MAX_DB_INDEX && self.0[i / 64] & (1u64 << (i % 64)) != 0
    }

    pub fn union(self, other: DbMask) -> DbMask {
        let mut m = self.0;
        for (w, o) in m.iter_mut().zip(other.0) {
            *w |= o;
        }
        DbMask(m)
    }

    pub fn is_empty(self) -> bool {
        self.0 == [0; 4]
    }

    /// Mask seen from under one more binder: `{i | i+1 in self}`.
    pub fn under_binder(self) -> DbMask {
        let mut m = [0u64; 4];
        for w in 0..4 {
            m[w] = self.0[w] >> 1;
            if w + 1 < 4 {
                m[w] |= self.0[w + 1] << 63;
            }
        }
        DbMask(m)
    }

    /// True when some free index is `>= cutoff`.
    pub fn any_at_or_above(self, cutoff: usize) -> bool {
        if cutoff > MAX_DB_INDEX {
            return false;
        }
        let word = cutoff / 64;
        let bit = cutoff % 64;
        if self.0[word] >> bit != 0 {
            return true;
        }
        self.0[word + 1..].iter().any(|w| *w != 0)
    }

    pub fn max_index(self) -> Option<usize> {
        for w in (0..4).rev() {
            if self.0[w] != 0 {
                return Some(w * 64 + 63 - self.0[w].leading_zeros() as usize);
            }
        }
        None
    }

    pub fn iter(self) -> impl Iterator<Item = usize> {
        (0..=MAX_DB_INDEX).filter(move |&i| self.contains(i))
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TermError {
    #[error("de Bruijn index {0} exceeds the representable maximum of 255")]
    DepthLimitExceeded(usize),
    #[error("type mismatch: {0}")]
    TypeMismatch(String),
}

pub type TermResult = Result<TermId, TermError>;

fn mix_ctx(h: u64, ty: TyId) -> u64 {
    (h ^ (ty.index() as u64).wrapping_add(0x9e3779b97f4a7c15)).wrapping_mul(0x100000001b3)
}

/// The shared store. All construction goes through the `mk_*` methods,
/// which intern, normalize, and maintain the free-index masks.
#[derive(Debug)]
pub struct Store {
    tys: Vec<Ty>,
    ty_lookup: HashMap<Ty, TyId>,
    names: Vec<String>,
    name_lookup: HashMap<String, NameId>,
    nodes: Vec<Node>,
    masks: Vec<DbMask>,
    node_lookup: HashMap<Node, TermId>,
    const_tys: HashMap<NameId, TyId>,
    // type memo for closed terms only; open terms depend on context
    ty_memo: HashMap<TermId, TyId>,
    shift_cache: HashMap<(TermId, u16, i32), TermId>,
    subst_cache: HashMap<(TermId, u16, TermId), TermId>,
    prop_ty: TyId,
    bot: TermId,
}

impl Clone for Store {
    fn clone(&self) -> Store {
        Store {
            tys: self.tys.clone(),
            ty_lookup: self.ty_lookup.clone(),
            names: self.names.clone(),
            name_lookup: self.name_lookup.clone(),
            nodes: self.nodes.clone(),
            masks: self.masks.clone(),
            node_lookup: self.node_lookup.clone(),
            const_tys: self.const_tys.clone(),
            ty_memo: self.ty_memo.clone(),
            shift_cache: self.shift_cache.clone(),
            subst_cache: self.subst_cache.clone(),
            prop_ty: self.prop_ty,
            bot: self.bot,
        }
    }
}

impl Default for Store {
    fn default() -> Store {
        Store::new()
    }
}

impl Store {
    pub fn new() -> Store {
        let mut st = Store {
            tys: Vec::new(),
            ty_lookup: HashMap::new(),
            names: Vec::new(),
            name_lookup: HashMap::new(),
            nodes: Vec::new(),
            masks: Vec::new(),
            node_lookup: HashMap::new(),
            const_tys: HashMap::new(),
            ty_memo: HashMap::new(),
            shift_cache: HashMap::new(),
            subst_cache: HashMap::new(),
            prop_ty: TyId(0),
            bot: TermId(0),
        };
        st.prop_ty = st.intern_ty(Ty::Prop);
        st.bot = st.intern(Node::Bot);
        st
    }

    // ----- types and names -----

    pub fn intern_ty(&mut self, ty: Ty) -> TyId {
        if let Some(&id) = self.ty_lookup.get(&ty) {
            return id;
        }
        let id = TyId(self.tys.len() as u32);
        self.tys.push(ty);
        self.ty_lookup.insert(ty, id);
        id
    }

    pub fn prop(&self) -> TyId {
        self.prop_ty
    }

    pub fn base_sort(&mut self, name: &str) -> TyId {
        let n = self.intern_name(name);
        self.intern_ty(Ty::Base(n))
    }

    pub fn arrow(&mut self, dom: TyId, cod: TyId) -> TyId {
        self.intern_ty(Ty::Arrow(dom, cod))
    }

    pub fn ty(&self, id: TyId) -> Ty {
        self.tys[id.index()]
    }

    pub fn num_types(&self) -> usize {
        self.tys.len()
    }

    pub fn is_sort(&self, id: TyId) -> bool {
        matches!(self.ty(id), Ty::Base(_))
    }

    pub fn intern_name(&mut self, s: &str) -> NameId {
        if let Some(&id) = self.name_lookup.get(s) {
            return id;
        }
        let id = NameId(self.names.len() as u32);
        self.names.push(s.to_owned());
        self.name_lookup.insert(s.to_owned(), id);
        id
    }

    pub fn name_str(&self, id: NameId) -> &str {
        &self.names[id.index()]
    }

    pub fn lookup_name(&self, s: &str) -> Option<NameId> {
        self.name_lookup.get(s).copied()
    }

    // ----- node access -----

    pub fn node(&self, t: TermId) -> Node {
        self.nodes[t.index()]
    }

    pub fn mask(&self, t: TermId) -> DbMask {
        self.masks[t.index()]
    }

    pub fn is_closed(&self, t: TermId) -> bool {
        self.mask(t).is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.nodes.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = TermId> {
        (0..self.nodes.len() as u32).map(TermId)
    }

    pub fn const_ty(&self, n: NameId) -> Option<TyId> {
        self.const_tys.get(&n).copied()
    }

    fn intern(&mut self, node: Node) -> TermId {
        if let Some(&id) = self.node_lookup.get(&node) {
            return id;
        }
        let mask = match node {
            Node::Db(i) => DbMask::singleton(i as usize),
            Node::Const(_) | Node::Bot | Node::Choice(_) => DbMask::EMPTY,
            Node::Ap(a, b) | Node::Imp(a, b) => self.mask(a).union(self.mask(b)),
            Node::Lam(_, b) | Node::All(_, b) => self.mask(b).under_binder(),
            Node::Eq(_, a, b) => self.mask(a).union(self.mask(b)),
        };
        let id = TermId(self.nodes.len() as u32);
        self.nodes.push(node);
        self.masks.push(mask);
        self.node_lookup.insert(node, id);
        id
    }

    // ----- constructors -----

    pub fn mk_db(&mut self, i: usize) -> TermResult {
        if i > MAX_DB_INDEX {
            return Err(TermError::DepthLimitExceeded(i));
        }
        Ok(self.intern(Node::Db(i as u16)))
    }

    /// Shared constant node. The type is recorded for the name the first
    /// time; re-registering with a different type is a caller bug.
    pub fn mk_const(&mut self, name: NameId, ty: TyId) -> TermId {
        match self.const_tys.get(&name) {
            Some(&prev) => assert_eq!(
                prev,
                ty,
                "constant {} registered at two types",
                self.name_str(name)
            ),
            None => {
                self.const_tys.insert(name, ty);
            }
        }
        self.intern(Node::Const(name))
    }

    pub fn mk_bot(&self) -> TermId {
        self.bot
    }

    pub fn mk_imp(&mut self, s: TermId, t: TermId) -> TermId {
        self.intern(Node::Imp(s, t))
    }

    /// `t => $false`, the representation of negation.
    pub fn mk_neg(&mut self, t: TermId) -> TermId {
        let bot = self.bot;
        self.mk_imp(t, bot)
    }

    pub fn mk_all(&mut self, ty: TyId, body: TermId) -> TermId {
        self.intern(Node::All(ty, body))
    }

    pub fn mk_eq(&mut self, ty: TyId, s: TermId, t: TermId) -> TermResult {
        if self.is_closed(s) {
            let sty = self.ty_of_closed(s)?;
            if sty != ty {
                return Err(TermError::TypeMismatch(format!(
                    "equation annotated {} but left side has type {}",
                    self.print_ty(ty),
                    self.print_ty(sty)
                )));
            }
        }
        if self.is_closed(t) {
            let tty = self.ty_of_closed(t)?;
            if tty != ty {
                return Err(TermError::TypeMismatch(format!(
                    "equation annotated {} but right side has type {}",
                    self.print_ty(ty),
                    self.print_ty(tty)
                )));
            }
        }
        Ok(self.intern(Node::Eq(ty, s, t)))
    }

    /// `s != t`, sugar for `(s = t) => $false`.
    pub fn mk_neq(&mut self, ty: TyId, s: TermId, t: TermId) -> TermResult {
        let eq = self.mk_eq(ty, s, t)?;
        Ok(self.mk_neg(eq))
    }

    pub fn mk_choice(&mut self, ty: TyId) -> TermId {
        self.intern(Node::Choice(ty))
    }

    /// Normalizing application. If `f` is an abstraction the redex is
    /// reduced by one cached substitution traversal; otherwise a shared
    /// `Ap` node is returned. Types are checked when both operands are
    /// closed (open operands are the typed front ends' responsibility).
    pub fn mk_norm_ap(&mut self, f: TermId, a: TermId) -> TermResult {
        if self.is_closed(f) {
            let fty = self.ty_of_closed(f)?;
            match self.ty(fty) {
                Ty::Arrow(dom, _) => {
                    if self.is_closed(a) {
                        let aty = self.ty_of_closed(a)?;
                        if aty != dom {
                            return Err(TermError::TypeMismatch(format!(
                                "function expects {} but argument has type {}",
                                self.print_ty(dom),
                                self.print_ty(aty)
                            )));
                        }
                    }
                }
                _ => {
                    return Err(TermError::TypeMismatch(format!(
                        "applied term has non-function type {}",
                        self.print_ty(fty)
                    )))
                }
            }
        }
        self.norm_ap(f, a)
    }

    fn norm_ap(&mut self, f: TermId, a: TermId) -> TermResult {
        match self.node(f) {
            Node::Lam(_, body) => self.subst_norm(body, 0, a),
            _ => Ok(self.intern(Node::Ap(f, a))),
        }
    }

    /// Normalizing abstraction: contracts `^x. f x` to `f` when `x` does
    /// not occur in `f`, decided by the mask alone.
    pub fn mk_norm_lam(&mut self, ty: TyId, body: TermId) -> TermId {
        if let Node::Ap(g, arg) = self.node(body) {
            if self.node(arg) == Node::Db(0) && !self.mask(g).contains(0) {
                return self
                    .shift(g, 0, -1)
                    .expect("eta contraction only lowers indices");
            }
        }
        self.intern(Node::Lam(ty, body))
    }

    // ----- shifting and substitution -----

    /// Adds `amount` to every free index `>= cutoff`. Returns the input id
    /// untouched when the mask shows nothing is affected.
    pub fn shift(&mut self, t: TermId, cutoff: usize, amount: i32) -> TermResult {
        if amount == 0 || !self.mask(t).any_at_or_above(cutoff) {
            return Ok(t);
        }
        let key = (t, cutoff as u16, amount);
        if let Some(&r) = self.shift_cache.get(&key) {
            return Ok(r);
        }
        let result = match self.node(t) {
            Node::Db(i) => {
                let i = i as usize;
                debug_assert!(i >= cutoff);
                let shifted = i as i64 + amount as i64;
                assert!(shifted >= 0, "negative shift applied to a live index");
                self.mk_db(shifted as usize)?
            }
            Node::Ap(f, a) => {
                let f2 = self.shift(f, cutoff, amount)?;
                let a2 = self.shift(a, cutoff, amount)?;
                // shifting preserves the head tag, so no redex can appear
                self.intern(Node::Ap(f2, a2))
            }
            Node::Imp(s, u) => {
                let s2 = self.shift(s, cutoff, amount)?;
                let u2 = self.shift(u, cutoff, amount)?;
                self.intern(Node::Imp(s2, u2))
            }
            Node::Eq(ty, s, u) => {
                let s2 = self.shift(s, cutoff, amount)?;
                let u2 = self.shift(u, cutoff, amount)?;
                self.intern(Node::Eq(ty, s2, u2))
            }
            Node::Lam(ty, b) => {
                let b2 = self.shift(b, cutoff + 1, amount)?;
                self.intern(Node::Lam(ty, b2))
            }
            Node::All(ty, b) => {
                let b2 = self.shift(b, cutoff + 1, amount)?;
                self.intern(Node::All(ty, b2))
            }
            Node::Const(_) | Node::Bot | Node::Choice(_) => unreachable!("mask is empty"),
        };
        self.shift_cache.insert(key, result);
        Ok(result)
    }

    /// Replaces index `j` by `s` in `t`, decrementing the indices above
    /// `j`, and reduces every redex the replacement uncovers, all in one
    /// cached traversal. Untouched subterms are returned by id.
    pub fn subst_norm(&mut self, t: TermId, j: usize, s: TermId) -> TermResult {
        let mask = self.mask(t);
        if !mask.any_at_or_above(j) {
            return Ok(t);
        }
        if !mask.contains(j) {
            return self.shift(t, j, -1);
        }
        let key = (t, j as u16, s);
        if let Some(&r) = self.subst_cache.get(&key) {
            return Ok(r);
        }
        let result = match self.node(t) {
            Node::Db(i) => {
                debug_assert_eq!(i as usize, j);
                s
            }
            Node::Ap(f, a) => {
                let f2 = self.subst_norm(f, j, s)?;
                let a2 = self.subst_norm(a, j, s)?;
                self.norm_ap(f2, a2)?
            }
            Node::Imp(l, r) => {
                let l2 = self.subst_norm(l, j, s)?;
                let r2 = self.subst_norm(r, j, s)?;
                self.intern(Node::Imp(l2, r2))
            }
            Node::Eq(ty, l, r) => {
                let l2 = self.subst_norm(l, j, s)?;
                let r2 = self.subst_norm(r, j, s)?;
                self.intern(Node::Eq(ty, l2, r2))
            }
            Node::Lam(ty, b) => {
                let s2 = self.shift(s, 0, 1)?;
                let b2 = self.subst_norm(b, j + 1, s2)?;
                self.mk_norm_lam(ty, b2)
            }
            Node::All(ty, b) => {
                let s2 = self.shift(s, 0, 1)?;
                let b2 = self.subst_norm(b, j + 1, s2)?;
                self.intern(Node::All(ty, b2))
            }
            Node::Const(_) | Node::Bot | Node::Choice(_) => unreachable!("mask is empty"),
        };
        self.subst_cache.insert(key, result);
        Ok(result)
    }

    /// Drops both memo tables. Recomputation must yield identical ids.
    pub fn clear_op_caches(&mut self) {
        self.shift_cache.clear();
        self.subst_cache.clear();
    }

    // ----- views -----

    /// Splits `t` into its head and argument spine. `t` must not be an
    /// abstraction; in a normal term the head is a constant, a variable,
    /// or a choice operator.
    pub fn head_spine(&self, t: TermId) -> (TermId, Vec<TermId>) {
        let mut args = Vec::new();
        let mut cur = t;
        while let Node::Ap(f, a) = self.node(cur) {
            args.push(a);
            cur = f;
        }
        debug_assert!(!matches!(self.node(cur), Node::Lam(..)));
        args.reverse();
        (cur, args)
    }

    /// Argument types of an n-ary application with head type `head_ty`.
    pub fn arrow_args(&self, head_ty: TyId, n: usize) -> Vec<TyId> {
        let mut out = Vec::with_capacity(n);
        let mut cur = head_ty;
        for _ in 0..n {
            match self.ty(cur) {
                Ty::Arrow(d, c) => {
                    out.push(d);
                    cur = c;
                }
                _ => panic!("arity exceeds arrow type"),
            }
        }
        out
    }

    /// Number of distinct nodes reachable from `t` (the term's size as a
    /// shared graph).
    pub fn reachable_count(&self, t: TermId) -> usize {
        let mut seen = vec![false; self.nodes.len()];
        let mut stack = vec![t];
        let mut count = 0;
        while let Some(x) = stack.pop() {
            if seen[x.index()] {
                continue;
            }
            seen[x.index()] = true;
            count += 1;
            match self.node(x) {
                Node::Ap(a, b) | Node::Imp(a, b) => {
                    stack.push(a);
                    stack.push(b);
                }
                Node::Eq(_, a, b) => {
                    stack.push(a);
                    stack.push(b);
                }
                Node::Lam(_, b) | Node::All(_, b) => stack.push(b),
                _ => {}
            }
        }
        count
    }

    // ----- typing -----

    /// Type of a closed term. Memoized.
    pub fn ty_of_closed(&mut self, t: TermId) -> Result<TyId, TermError> {
        debug_assert!(self.is_closed(t));
        let mut ctx = Vec::new();
        self.ty_of(t, &mut ctx)
    }

    /// Type of `t` under `ctx`, where index `i` has type
    /// `ctx[ctx.len() - 1 - i]`.
    pub fn ty_of(&mut self, t: TermId, ctx: &mut Vec<TyId>) -> Result<TyId, TermError> {
        // closed subterms memoize globally; open ones memoize for the
        // duration of this call, keyed by a hash of the binder context,
        // so shared graphs type in linear time
        let mut hashes = Vec::with_capacity(ctx.len() + 8);
        hashes.push(0xcbf29ce484222325u64);
        for &ty in ctx.iter() {
            hashes.push(mix_ctx(*hashes.last().unwrap(), ty));
        }
        let mut scratch = HashMap::new();
        self.ty_of_rec(t, ctx, &mut hashes, &mut scratch)
    }

    fn ty_of_rec(
        &mut self,
        t: TermId,
        ctx: &mut Vec<TyId>,
        hashes: &mut Vec<u64>,
        scratch: &mut HashMap<(TermId, usize, u64), TyId>,
    ) -> Result<TyId, TermError> {
        let closed = self.is_closed(t);
        let scratch_key = (t, ctx.len(), *hashes.last().unwrap());
        if closed {
            if let Some(&ty) = self.ty_memo.get(&t) {
                return Ok(ty);
            }
        } else if let Some(&ty) = scratch.get(&scratch_key) {
            return Ok(ty);
        }
        let ty = match self.node(t) {
            Node::Db(i) => {
                let i = i as usize;
                if i >= ctx.len() {
                    return Err(TermError::TypeMismatch(format!(
                        "unbound de Bruijn index {i}"
                    )));
                }
                ctx[ctx.len() - 1 - i]
            }
            Node::Const(n) => self.const_ty(n).ok_or_else(|| {
                TermError::TypeMismatch(format!("unregistered constant {}", self.name_str(n)))
            })?,
            Node::Ap(f, a) => {
                let fty = self.ty_of_rec(f, ctx, hashes, scratch)?;
                let aty = self.ty_of_rec(a, ctx, hashes, scratch)?;
                match self.ty(fty) {
                    Ty::Arrow(dom, cod) if dom == aty => cod,
                    Ty::Arrow(dom, _) => {
                        return Err(TermError::TypeMismatch(format!(
                            "function expects {} but argument has type {}",
                            self.print_ty(dom),
                            self.print_ty(aty)
                        )))
                    }
                    _ => {
                        return Err(TermError::TypeMismatch(format!(
                            "applied term has non-function type {}",
                            self.print_ty(fty)
                        )))
                    }
                }
            }
            Node::Lam(dom, b) => {
                ctx.push(dom);
                hashes.push(mix_ctx(*hashes.last().unwrap(), dom));
                let bty = self.ty_of_rec(b, ctx, hashes, scratch);
                ctx.pop();
                hashes.pop();
                self.intern_ty(Ty::Arrow(dom, bty?))
            }
            Node::Bot => self.prop_ty,
            Node::Imp(l, r) => {
                for side in [l, r] {
                    let sty = self.ty_of_rec(side, ctx, hashes, scratch)?;
                    if sty != self.prop_ty {
                        return Err(TermError::TypeMismatch(
                            "implication over non-propositions".into(),
                        ));
                    }
                }
                self.prop_ty
            }
            Node::All(dom, b) => {
                ctx.push(dom);
                hashes.push(mix_ctx(*hashes.last().unwrap(), dom));
                let bty = self.ty_of_rec(b, ctx, hashes, scratch);
                ctx.pop();
                hashes.pop();
                if bty? != self.prop_ty {
                    return Err(TermError::TypeMismatch(
                        "quantifier body is not a proposition".into(),
                    ));
                }
                self.prop_ty
            }
            Node::Eq(ty, l, r) => {
                for side in [l, r] {
                    let sty = self.ty_of_rec(side, ctx, hashes, scratch)?;
                    if sty != ty {
                        return Err(TermError::TypeMismatch(format!(
                            "equation annotated {} has side of type {}",
                            self.print_ty(ty),
                            self.print_ty(sty)
                        )));
                    }
                }
                self.prop_ty
            }
            Node::Choice(sort) => {
                let pred = self.intern_ty(Ty::Arrow(sort, self.prop_ty));
                self.intern_ty(Ty::Arrow(pred, sort))
            }
        };
        if closed {
            self.ty_memo.insert(t, ty);
        } else {
            scratch.insert(scratch_key, ty);
        }
        Ok(ty)
    }

    // ----- printing -----

    pub fn print_ty(&self, ty: TyId) -> String {
        match self.ty(ty) {
            Ty::Prop => "$o".to_owned(),
            Ty::Base(n) => self.name_str(n).to_owned(),
            Ty::Arrow(d, c) => format!("({} > {})", self.print_ty(d), self.print_ty(c)),
        }
    }

    /// Renders `t` in parseable THF core syntax. Bound variables print as
    /// `X1`, `X2`, ... by binder depth; a bare choice operator prints as
    /// its closed binder form, which reparses to the same id.
    pub fn print_term(&self, t: TermId) -> String {
        let mut out = String::new();
        self.print_into(t, &mut Vec::new(), &mut out);
        out
    }

    fn print_into(&self, t: TermId, binders: &mut Vec<String>, out: &mut String) {
        match self.node(t) {
            Node::Db(i) => {
                let i = i as usize;
                assert!(i < binders.len(), "cannot print an open term");
                out.push_str(&binders[binders.len() - 1 - i]);
            }
            Node::Const(n) => out.push_str(self.name_str(n)),
            Node::Bot => out.push_str("$false"),
            Node::Ap(f, a) => {
                out.push('(');
                self.print_into(f, binders, out);
                out.push_str(" @ ");
                self.print_into(a, binders, out);
                out.push(')');
            }
            Node::Imp(s, u) => {
                out.push('(');
                self.print_into(s, binders, out);
                out.push_str(" => ");
                self.print_into(u, binders, out);
                out.push(')');
            }
            Node::Eq(_, s, u) => {
                out.push('(');
                self.print_into(s, binders, out);
                out.push_str(" = ");
                self.print_into(u, binders, out);
                out.push(')');
            }
            Node::Lam(ty, b) => self.print_binder("^", ty, b, binders, out),
            Node::All(ty, b) => self.print_binder("!", ty, b, binders, out),
            Node::Choice(sort) => {
                // closed two-binder rendering; eta-contracts back on reparse
                let pred = format!("X{}", binders.len() + 1);
                let var = format!("X{}", binders.len() + 2);
                out.push_str(&format!(
                    "(^[{pred}: ({sort} > $o)]: (@+[{var}: {sort}]: ({pred} @ {var})))",
                    sort = self.print_ty(sort),
                ));
            }
        }
    }

    fn print_binder(
        &self,
        sym: &str,
        ty: TyId,
        body: TermId,
        binders: &mut Vec<String>,
        out: &mut String,
    ) {
        let name = format!("X{}", binders.len() + 1);
        out.push('(');
        out.push_str(sym);
        out.push('[');
        out.push_str(&name);
        out.push_str(": ");
        out.push_str(&self.print_ty(ty));
        out.push_str("]: ");
        binders.push(name);
        self.print_into(body, binders, out);
        binders.pop();
        out.push(')');
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn iota(st: &mut Store) -> TyId {
        st.base_sort("$i")
    }

    #[test]
    fn interning_is_idempotent() {
        let mut st = Store::new();
        assert_eq!(st.intern_ty(Ty::Prop), st.intern_ty(Ty::Prop));
        let i = iota(&mut st);
        let p = st.prop();
        assert_ne!(st.arrow(i, p), i);
        // the choice-operator type (i > $o) > i is distinct from its parts
        let pred = st.arrow(i, p);
        let choice_ty = st.arrow(pred, i);
        assert_ne!(choice_ty, pred);
        assert_ne!(choice_ty, i);
    }

    #[test]
    fn db_nodes_share_and_mask() {
        let mut st = Store::new();
        assert_eq!(st.mk_db(0).unwrap(), st.mk_db(0).unwrap());
        let d3 = st.mk_db(3).unwrap();
        assert_eq!(st.mask(d3).iter().collect::<Vec<_>>(), vec![3]);
        assert_eq!(st.mk_db(256), Err(TermError::DepthLimitExceeded(256)));
        assert!(st.mk_db(255).is_ok());
    }

    #[test]
    fn constants_share_by_name() {
        let mut st = Store::new();
        let i = iota(&mut st);
        let c = st.intern_name("c");
        let d = st.intern_name("d");
        assert_eq!(st.mk_const(c, i), st.mk_const(c, i));
        assert_ne!(st.mk_const(c, i), st.mk_const(d, i));
        let cc = st.mk_const(c, i);
        assert!(st.is_closed(cc));
    }

    #[test]
    fn binder_consumes_index_zero() {
        let mut st = Store::new();
        let i = iota(&mut st);
        let db0 = st.mk_db(0).unwrap();
        let all = st.mk_all(i, db0);
        assert!(st.is_closed(all));
    }

    #[test]
    fn beta_identity() {
        let mut st = Store::new();
        let i = iota(&mut st);
        let db0 = st.mk_db(0).unwrap();
        let id = st.mk_norm_lam(i, db0);
        let c = st.intern_name("c");
        let c = st.mk_const(c, i);
        assert_eq!(st.mk_norm_ap(id, c).unwrap(), c);
    }

    #[test]
    fn eta_contraction_by_mask() {
        let mut st = Store::new();
        let i = iota(&mut st);
        let ii = st.arrow(i, i);
        let f = st.intern_name("f");
        let f = st.mk_const(f, ii);
        let db0 = st.mk_db(0).unwrap();
        let body = st.mk_norm_ap(f, db0).unwrap();
        assert_eq!(st.mk_norm_lam(i, body), f);
        // identity: db0 is the head itself, no contraction
        let id = st.mk_norm_lam(i, db0);
        assert!(matches!(st.node(id), Node::Lam(..)));
        // self-application head uses the bound variable, no contraction
        let sa = st.intern(Node::Ap(db0, db0));
        let lam = st.mk_norm_lam(i, sa);
        assert!(matches!(st.node(lam), Node::Lam(..)));
    }

    #[test]
    fn shift_short_circuits_closed_terms() {
        let mut st = Store::new();
        let i = iota(&mut st);
        let c = st.intern_name("c");
        let c = st.mk_const(c, i);
        assert_eq!(st.shift(c, 0, 5).unwrap(), c);
        let db0 = st.mk_db(0).unwrap();
        let db2 = st.mk_db(2).unwrap();
        assert_eq!(st.shift(db0, 0, 2).unwrap(), db2);
    }

    #[test]
    fn vacuous_subst_is_identity() {
        let mut st = Store::new();
        let i = iota(&mut st);
        let c = st.intern_name("c");
        let c = st.mk_const(c, i);
        let d = st.intern_name("d");
        let d = st.mk_const(d, i);
        let eq = st.mk_eq(i, c, d).unwrap();
        assert_eq!(st.subst_norm(eq, 0, c).unwrap(), eq);
    }

    #[test]
    fn subst_reduces_uncovered_redexes() {
        let mut st = Store::new();
        let i = iota(&mut st);
        let db0 = st.mk_db(0).unwrap();
        let id = st.mk_norm_lam(i, db0);
        // (db0 db0)[0 := id]  ->  id id  ->  id
        let sa = st.intern(Node::Ap(db0, db0));
        assert_eq!(st.subst_norm(sa, 0, id).unwrap(), id);
    }

    #[test]
    fn cache_transparency() {
        let mut st = Store::new();
        let i = iota(&mut st);
        let ii = st.arrow(i, i);
        let f = st.intern_name("f");
        let f = st.mk_const(f, ii);
        let db0 = st.mk_db(0).unwrap();
        let db1 = st.mk_db(1).unwrap();
        let app = st.mk_norm_ap(f, db1).unwrap();
        let body = st.intern(Node::Ap(app, db0));
        let c = st.intern_name("c");
        let c = st.mk_const(c, i);
        let r1 = st.subst_norm(body, 1, c).unwrap();
        let r2 = st.subst_norm(body, 1, c).unwrap();
        assert_eq!(r1, r2);
        st.clear_op_caches();
        assert_eq!(st.subst_norm(body, 1, c).unwrap(), r1);
    }

    #[test]
    fn self_application_is_rejected_when_closed() {
        let mut st = Store::new();
        let i = iota(&mut st);
        let db0 = st.mk_db(0).unwrap();
        let sa = st.intern(Node::Ap(db0, db0));
        let omega = st.mk_norm_lam(i, sa);
        assert!(matches!(
            st.mk_norm_ap(omega, omega),
            Err(TermError::TypeMismatch(_))
        ));
    }

    #[test]
    fn head_spine_exposes_outer_structure() {
        let mut st = Store::new();
        let i = iota(&mut st);
        let p_ty = {
            let step = st.arrow(i, st.prop());
            st.arrow(i, step)
        };
        let p = st.intern_name("p");
        let p = st.mk_const(p, p_ty);
        let a = st.intern_name("a");
        let a = st.mk_const(a, i);
        let b = st.intern_name("b");
        let b = st.mk_const(b, i);
        let pa = st.mk_norm_ap(p, a).unwrap();
        let pab = st.mk_norm_ap(pa, b).unwrap();
        assert_eq!(st.head_spine(pab), (p, vec![a, b]));
        assert_eq!(st.head_spine(a), (a, vec![]));
    }

    #[test]
    fn negation_is_implication_to_bot() {
        let mut st = Store::new();
        let p = st.prop();
        let s = st.intern_name("s");
        let s = st.mk_const(s, p);
        let neg = st.mk_neg(s);
        assert_eq!(st.node(neg), Node::Imp(s, st.mk_bot()));
    }
}
