//! The search procedure: a priority queue of commands applies tableau
//! rules to a branch, every rule application is recorded as clauses over
//! proposition literals, and the branch is refuted exactly when the
//! clause set becomes unsatisfiable.
//!
//! There is no explicit branch-splitting structure. A rule with several
//! subgoals emits clauses whose guard literals tie the subgoal
//! propositions to the principal formula, and the SAT core does the case
//! analysis. There is no cut rule and no rewriting under equations:
//! every rule looks only at the outer structure of its principal
//! formulas.
//!
//! Quantifier instantiation at a sort is restricted to the terms that
//! have appeared on a side of a disequation at that sort (plus one
//! generated default when there are none). The set grows as disequations
//! appear, and growth retroactively instantiates every quantifier
//! processed so far.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashSet};
use std::time::{Duration, Instant};

use indexmap::{IndexMap, IndexSet};

use crate::sat::{LitMap, Outcome, SatCore};
use crate::strategy::Flags;
use crate::term::{NameId, Node, Store, TermId, Ty, TyId};
use crate::tptp::{negate_conjecture, Problem};

/// A prioritized unit of search work.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum Command {
    ProcessProp(TermId),
    Instantiate { forall: TermId, witness: TermId },
    Mate { pos: TermId, neg: TermId },
    Confront { eqn: TermId, diseq: TermId },
    DefaultInst(TyId),
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum SearchStatus {
    Theorem,
    GaveUp,
    Timeout,
}

#[derive(Clone, Debug)]
pub struct SearchResult {
    pub status: SearchStatus,
    pub steps: u64,
    pub elapsed: Duration,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum StepOutcome {
    Progress,
    QueueEmpty,
    Refuted,
}

/// One dispatched command, for `--trace` and the walkthrough checks.
#[derive(Clone, Debug)]
pub struct TraceEvent {
    pub seq: u64,
    pub priority: u32,
    pub action: TraceAction,
}

#[derive(Clone, Debug)]
pub enum TraceAction {
    Process(TermId),
    Instantiate { forall: TermId, witness: TermId },
    Mate { pos: TermId, neg: TermId, diseqs: Vec<TermId> },
    Confront { eqn: TermId, diseq: TermId },
    DefaultInst { sort: TyId, created: Option<TermId> },
}

/// Which rule emitted a clause (instrumentation for the rule-shape laws).
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum RuleTag {
    Unit,
    Standing,
    Implication,
    NegImplication,
    NegForall,
    Instantiate,
    EqFun,
    NeqFun,
    EqProp,
    NeqProp,
    Mate,
    Confront,
    Decompose,
    Choice,
}

#[derive(Clone, Debug)]
pub struct LoggedClause {
    pub rule: RuleTag,
    pub lits: Vec<i32>,
}

/// Per-branch bookkeeping: what has been processed, which terms may
/// instantiate which quantifiers, and the fresh-name counter.
#[derive(Default)]
struct BranchState {
    processed: IndexSet<TermId>,
    asserted: HashSet<TermId>,
    instantiations: IndexMap<TyId, IndexSet<TermId>>,
    processed_foralls: IndexMap<TyId, IndexSet<TermId>>,
    diseq_sides: IndexMap<TyId, IndexSet<TermId>>,
    pos_atoms: IndexMap<NameId, IndexSet<TermId>>,
    neg_atoms: IndexMap<NameId, IndexSet<TermId>>,
    pos_eqns: IndexMap<TyId, IndexSet<TermId>>,
    diseqs: IndexMap<TyId, IndexSet<TermId>>,
    defaults: IndexMap<TyId, TermId>,
    fresh_counter: u32,
    steps: u64,
}

pub struct Engine {
    store: Store,
    sat: SatCore,
    lits: LitMap,
    flags: Flags,
    st: BranchState,
    queue: BinaryHeap<Reverse<(u32, u64, usize)>>,
    commands: Vec<Command>,
    seen_cmds: HashSet<Command>,
    seq: u64,
    goals: Vec<TermId>,
    // closed subterms indexed by type, for function-type instantiation
    subterms_by_ty: IndexMap<TyId, IndexSet<TermId>>,
    scanned: HashSet<TermId>,
    choice_done: HashSet<TermId>,
    witnesses: Vec<(TermId, TermId)>,
    executed: IndexSet<(TermId, TermId)>,
    clauses_dirty: bool,
    record_trace: bool,
    trace: Vec<TraceEvent>,
    record_clauses: bool,
    clause_log: Vec<LoggedClause>,
}

impl Engine {
    /// Engine over a fresh clone of the problem's store, with the
    /// negated conjecture as the branch to refute.
    pub fn for_problem(problem: &Problem, flags: &Flags) -> Engine {
        let mut store = problem.store.clone();
        let conj = problem.conjecture.as_ref().map(|(_, t)| *t);
        let goals = negate_conjecture(&mut store, &problem.axioms, conj);
        Engine::with_goals(store, goals, flags)
    }

    /// Engine over an explicit store and branch. The given propositions
    /// must be closed, normal, of type `$o`.
    pub fn with_goals(store: Store, goals: Vec<TermId>, flags: &Flags) -> Engine {
        let mut eng = Engine {
            store,
            sat: SatCore::new(),
            lits: LitMap::new(),
            flags: flags.clone(),
            st: BranchState::default(),
            queue: BinaryHeap::new(),
            commands: Vec::new(),
            seen_cmds: HashSet::new(),
            seq: 0,
            goals,
            subterms_by_ty: IndexMap::new(),
            scanned: HashSet::new(),
            choice_done: HashSet::new(),
            witnesses: Vec::new(),
            executed: IndexSet::new(),
            clauses_dirty: false,
            record_trace: false,
            trace: Vec::new(),
            record_clauses: false,
            clause_log: Vec::new(),
        };
        // the standing clause making $false false
        let bot = eng.store.mk_bot();
        eng.ensure_lit(bot);
        eng
    }

    pub fn record_trace(&mut self, on: bool) {
        self.record_trace = on;
    }

    pub fn record_clauses(&mut self, on: bool) {
        self.record_clauses = on;
    }

    // ----- instrumentation accessors -----

    pub fn store(&self) -> &Store {
        &self.store
    }

    pub fn store_mut(&mut self) -> &mut Store {
        &mut self.store
    }

    pub fn lits(&self) -> &LitMap {
        &self.lits
    }

    pub fn sat(&self) -> &SatCore {
        &self.sat
    }

    pub fn trace(&self) -> &[TraceEvent] {
        &self.trace
    }

    pub fn take_trace(&mut self) -> Vec<TraceEvent> {
        std::mem::take(&mut self.trace)
    }

    pub fn clause_log(&self) -> &[LoggedClause] {
        &self.clause_log
    }

    /// Fresh constants created for negative quantifiers and negative
    /// function equations, with the proposition that triggered each.
    pub fn fresh_witnesses(&self) -> &[(TermId, TermId)] {
        &self.witnesses
    }

    pub fn steps(&self) -> u64 {
        self.st.steps
    }

    pub fn instantiations_of(&self, ty: TyId) -> Vec<TermId> {
        self.st
            .instantiations
            .get(&ty)
            .map(|s| s.iter().copied().collect())
            .unwrap_or_default()
    }

    pub fn diseq_sides_of(&self, ty: TyId) -> Vec<TermId> {
        self.st
            .diseq_sides
            .get(&ty)
            .map(|s| s.iter().copied().collect())
            .unwrap_or_default()
    }

    pub fn default_of(&self, ty: TyId) -> Option<TermId> {
        self.st.defaults.get(&ty).copied()
    }

    pub fn sorts_with_instantiations(&self) -> Vec<TyId> {
        self.st.instantiations.keys().copied().collect()
    }

    pub fn processed_foralls_of(&self, ty: TyId) -> Vec<TermId> {
        self.st
            .processed_foralls
            .get(&ty)
            .map(|s| s.iter().copied().collect())
            .unwrap_or_default()
    }

    /// (forall, witness) pairs whose Instantiate command has run.
    pub fn executed_instantiations(&self) -> &IndexSet<(TermId, TermId)> {
        &self.executed
    }

    // ----- literals and clauses -----

    /// Literal for `p`. Allocating a variable for a reflexive equation
    /// or for `$false` immediately adds the standing closure clause.
    fn ensure_lit(&mut self, p: TermId) -> i32 {
        let (lit, fresh_core) = self.lits.ensure(&self.store, p);
        if let Some(core) = fresh_core {
            let var = lit.abs();
            self.sat.ensure_var(var);
            match self.store.node(core) {
                Node::Bot => {
                    self.emit(RuleTag::Standing, vec![-var]);
                }
                Node::Eq(_, a, b) if a == b => {
                    self.emit(RuleTag::Standing, vec![var]);
                }
                _ => {}
            }
        }
        lit
    }

    fn emit(&mut self, rule: RuleTag, lits: Vec<i32>) {
        if self.record_clauses {
            self.clause_log.push(LoggedClause {
                rule,
                lits: lits.clone(),
            });
        }
        self.sat.add_clause(&lits);
        self.clauses_dirty = true;
    }

    // ----- queue -----

    fn enqueue(&mut self, cmd: Command, priority: u32) {
        if !self.seen_cmds.insert(cmd) {
            return;
        }
        let idx = self.commands.len();
        self.commands.push(cmd);
        self.queue.push(Reverse((priority, self.seq, idx)));
        self.seq += 1;
    }

    fn enqueue_process(&mut self, p: TermId) {
        if self.st.processed.contains(&p) {
            return;
        }
        self.ensure_lit(p);
        self.enqueue(Command::ProcessProp(p), self.flags.prio_process);
    }

    /// Puts `p` on the branch unconditionally: literal, unit clause, and
    /// a ProcessProp command. Repeated assertions add nothing.
    pub fn assert_prop(&mut self, p: TermId, priority: u32) {
        if !self.st.asserted.insert(p) {
            return;
        }
        let l = self.ensure_lit(p);
        self.emit(RuleTag::Unit, vec![l]);
        if !self.st.processed.contains(&p) {
            self.enqueue(Command::ProcessProp(p), priority);
        }
    }

    // ----- searching -----

    pub fn search(&mut self, deadline: Duration) -> SearchResult {
        let start = Instant::now();
        let stop = start + deadline;
        let goals = self.goals.clone();
        let prio = self.flags.prio_process;
        for g in goals {
            self.assert_prop(g, prio);
        }
        loop {
            if self.sat.is_root_conflict() {
                return self.finish(SearchStatus::Theorem, start);
            }
            if !self.flags.sat_search_delay && self.clauses_dirty {
                self.clauses_dirty = false;
                match self.sat.solve_deadline(true, Some(stop)) {
                    Some(Outcome::Unsat) => return self.finish(SearchStatus::Theorem, start),
                    Some(Outcome::Sat) => {}
                    None => return self.finish(SearchStatus::Timeout, start),
                }
            }
            if Instant::now() >= stop {
                return self.finish(SearchStatus::Timeout, start);
            }
            match self.step() {
                StepOutcome::Refuted => return self.finish(SearchStatus::Theorem, start),
                StepOutcome::QueueEmpty => {
                    // queue pressure is gone; lift any SAT delay for one
                    // conclusive search
                    let status = match self.sat.solve_deadline(true, Some(stop)) {
                        Some(Outcome::Unsat) => SearchStatus::Theorem,
                        Some(Outcome::Sat) => SearchStatus::GaveUp,
                        None => SearchStatus::Timeout,
                    };
                    return self.finish(status, start);
                }
                StepOutcome::Progress => {}
            }
        }
    }

    fn finish(&self, status: SearchStatus, start: Instant) -> SearchResult {
        SearchResult {
            status,
            steps: self.st.steps,
            elapsed: start.elapsed(),
        }
    }

    /// Pops and dispatches the minimum-priority command (ties broken by
    /// insertion order).
    pub fn step(&mut self) -> StepOutcome {
        let Some(Reverse((priority, seq, idx))) = self.queue.pop() else {
            return StepOutcome::QueueEmpty;
        };
        let cmd = self.commands[idx];
        self.st.steps += 1;
        if self.record_trace {
            let action = match cmd {
                Command::ProcessProp(p) => TraceAction::Process(p),
                Command::Instantiate { forall, witness } => {
                    TraceAction::Instantiate { forall, witness }
                }
                Command::Mate { pos, neg } => TraceAction::Mate {
                    pos,
                    neg,
                    diseqs: Vec::new(),
                },
                Command::Confront { eqn, diseq } => TraceAction::Confront { eqn, diseq },
                Command::DefaultInst(sort) => TraceAction::DefaultInst {
                    sort,
                    created: None,
                },
            };
            self.trace.push(TraceEvent {
                seq,
                priority,
                action,
            });
        }
        match cmd {
            Command::ProcessProp(p) => self.dispatch_process(p),
            Command::Instantiate { forall, witness } => self.dispatch_instantiate(forall, witness),
            Command::Mate { pos, neg } => self.dispatch_mate(pos, neg),
            Command::Confront { eqn, diseq } => self.dispatch_confront(eqn, diseq),
            Command::DefaultInst(sort) => self.dispatch_default_inst(sort),
        }
        if self.sat.is_root_conflict() {
            StepOutcome::Refuted
        } else {
            StepOutcome::Progress
        }
    }

    // ----- command dispatch -----

    fn dispatch_process(&mut self, p: TermId) {
        if !self.st.processed.insert(p) {
            return;
        }
        self.ensure_lit(p);
        self.scan_term(p);
        let bot = self.store.mk_bot();
        match self.store.node(p) {
            Node::Bot => {}
            Node::All(ty, _) => self.rule_forall(p, ty),
            Node::Eq(ty, s, t) => match self.store.ty(ty) {
                Ty::Arrow(dom, cod) => self.rule_eq_fun(p, dom, cod, s, t),
                Ty::Prop => self.rule_eq_prop(p, s, t),
                Ty::Base(_) => self.positive_sort_equation(p, ty),
            },
            Node::Imp(s, t) if t == bot => self.dispatch_negative(p, s),
            Node::Imp(s, t) => self.rule_implication(p, s, t),
            Node::Ap(..) | Node::Const(_) => self.positive_atom(p),
            // closed normal propositions cannot be variables, lambdas,
            // or bare choice operators
            Node::Db(_) | Node::Lam(..) | Node::Choice(_) => {}
        }
    }

    fn dispatch_negative(&mut self, p: TermId, s: TermId) {
        let bot = self.store.mk_bot();
        match self.store.node(s) {
            Node::Bot => {}
            Node::Imp(q, r) if r == bot => {
                // double negation: same literal, so only processing of the
                // inner proposition is needed
                self.enqueue_process(q);
            }
            Node::Imp(q, r) => self.rule_neg_implication(p, q, r),
            Node::All(ty, body) => self.rule_neg_forall(p, ty, body),
            Node::Eq(ty, u, v) => match self.store.ty(ty) {
                Ty::Arrow(dom, cod) => self.rule_neq_fun(p, dom, cod, u, v),
                Ty::Prop => self.rule_neq_prop(p, u, v),
                Ty::Base(_) => self.sort_disequation(p, ty, u, v),
            },
            Node::Ap(..) | Node::Const(_) => self.negative_atom(p, s),
            Node::Db(_) | Node::Lam(..) | Node::Choice(_) => {}
        }
    }

    fn dispatch_instantiate(&mut self, forall: TermId, witness: TermId) {
        self.executed.insert((forall, witness));
        let Node::All(_, body) = self.store.node(forall) else {
            return;
        };
        let Ok(inst) = self.store.subst_norm(body, 0, witness) else {
            return; // depth overflow: drop this instantiation
        };
        let lf = self.ensure_lit(forall);
        let li = self.ensure_lit(inst);
        self.emit(RuleTag::Instantiate, vec![-lf, li]);
        self.enqueue_process(inst);
    }

    fn dispatch_mate(&mut self, pos: TermId, neg: TermId) {
        let (phead, pargs) = self.store.head_spine(pos);
        let Node::Imp(atom, _) = self.store.node(neg) else {
            return;
        };
        let (nhead, nargs) = self.store.head_spine(atom);
        debug_assert_eq!(phead, nhead);
        debug_assert_eq!(pargs.len(), nargs.len());
        let Node::Const(name) = self.store.node(phead) else {
            return;
        };
        let head_ty = self.store.const_ty(name).expect("atom head is registered");
        let arg_tys = self.store.arrow_args(head_ty, pargs.len());
        let lp = self.ensure_lit(pos);
        let ln = self.ensure_lit(neg);
        let mut lits = vec![-lp, -ln];
        let mut diseqs = Vec::with_capacity(pargs.len());
        for ((s, t), ty) in pargs.iter().zip(&nargs).zip(arg_tys) {
            let Ok(d) = self.store.mk_neq(ty, *s, *t) else {
                return;
            };
            lits.push(self.ensure_lit(d));
            diseqs.push(d);
        }
        self.emit(RuleTag::Mate, lits);
        for d in &diseqs {
            self.enqueue_process(*d);
        }
        if self.record_trace {
            if let Some(TraceEvent {
                action: TraceAction::Mate { diseqs: ds, .. },
                ..
            }) = self.trace.last_mut()
            {
                *ds = diseqs;
            }
        }
    }

    fn dispatch_confront(&mut self, eqn: TermId, diseq: TermId) {
        let Node::Eq(ty, s, t) = self.store.node(eqn) else {
            return;
        };
        let Node::Imp(inner, _) = self.store.node(diseq) else {
            return;
        };
        let Node::Eq(_, u, v) = self.store.node(inner) else {
            return;
        };
        let le = self.ensure_lit(eqn);
        let ld = self.ensure_lit(diseq);
        let mk = |eng: &mut Engine, a: TermId, b: TermId| -> Option<(TermId, i32)> {
            let d = eng.store.mk_neq(ty, a, b).ok()?;
            let l = eng.ensure_lit(d);
            Some((d, l))
        };
        let Some((d_su, l_su)) = mk(self, s, u) else { return };
        let Some((d_sv, l_sv)) = mk(self, s, v) else { return };
        let Some((d_tu, l_tu)) = mk(self, t, u) else { return };
        let Some((d_tv, l_tv)) = mk(self, t, v) else { return };
        self.emit(RuleTag::Confront, vec![-le, -ld, l_su, l_sv]);
        self.emit(RuleTag::Confront, vec![-le, -ld, l_tu, l_tv]);
        for d in [d_su, d_sv, d_tu, d_tv] {
            self.enqueue_process(d);
        }
    }

    fn dispatch_default_inst(&mut self, sort: TyId) {
        if self
            .st
            .instantiations
            .get(&sort)
            .is_some_and(|s| !s.is_empty())
        {
            return; // a discriminating term arrived first
        }
        let d = match self.st.defaults.get(&sort) {
            Some(&d) => d,
            None => {
                let d = self.fresh_const(sort);
                self.st.defaults.insert(sort, d);
                d
            }
        };
        if self.record_trace {
            if let Some(TraceEvent {
                action: TraceAction::DefaultInst { created, .. },
                ..
            }) = self.trace.last_mut()
            {
                *created = Some(d);
            }
        }
        self.add_instantiation(sort, d);
    }

    // ----- rules -----

    fn rule_implication(&mut self, p: TermId, s: TermId, t: TermId) {
        let lp = self.ensure_lit(p);
        let ls = self.ensure_lit(s);
        let lt = self.ensure_lit(t);
        self.emit(RuleTag::Implication, vec![-lp, -ls, lt]);
        let ns = self.store.mk_neg(s);
        self.enqueue_process(ns);
        self.enqueue_process(t);
    }

    fn rule_neg_implication(&mut self, p: TermId, s: TermId, t: TermId) {
        if !self.flags.enable_neg_imp {
            return;
        }
        let lp = self.ensure_lit(p);
        let ls = self.ensure_lit(s);
        let lt = self.ensure_lit(t);
        self.emit(RuleTag::NegImplication, vec![-lp, ls]);
        self.emit(RuleTag::NegImplication, vec![-lp, -lt]);
        self.enqueue_process(s);
        let nt = self.store.mk_neg(t);
        self.enqueue_process(nt);
    }

    fn rule_forall(&mut self, p: TermId, ty: TyId) {
        self.st
            .processed_foralls
            .entry(ty)
            .or_default()
            .insert(p);
        let known: Vec<TermId> = self
            .st
            .instantiations
            .get(&ty)
            .map(|s| s.iter().copied().collect())
            .unwrap_or_default();
        for w in known {
            self.enqueue(
                Command::Instantiate {
                    forall: p,
                    witness: w,
                },
                self.flags.prio_instantiate,
            );
        }
        match self.store.ty(ty) {
            Ty::Base(_) => {
                if self
                    .st
                    .instantiations
                    .get(&ty)
                    .map_or(true, |s| s.is_empty())
                {
                    self.enqueue(Command::DefaultInst(ty), self.flags.default_inst_priority);
                }
            }
            Ty::Prop => {
                // quantifiers over propositions range over the two truth
                // values
                let bot = self.store.mk_bot();
                let top = self.store.mk_imp(bot, bot);
                self.add_instantiation(ty, bot);
                self.add_instantiation(ty, top);
            }
            Ty::Arrow(..) => self.enumerate_fun_insts(ty),
        }
    }

    /// Function-type quantifiers are instantiated with the closed
    /// subterms of that type harvested from processed propositions, or
    /// with one fresh default when none exist.
    fn enumerate_fun_insts(&mut self, ty: TyId) {
        let harvest: Vec<TermId> = self
            .subterms_by_ty
            .get(&ty)
            .map(|s| s.iter().copied().collect())
            .unwrap_or_default();
        for w in harvest {
            self.add_instantiation(ty, w);
        }
        if self
            .st
            .instantiations
            .get(&ty)
            .map_or(true, |s| s.is_empty())
        {
            let d = self.fresh_const(ty);
            self.add_instantiation(ty, d);
        }
    }

    fn rule_neg_forall(&mut self, p: TermId, ty: TyId, body: TermId) {
        let w = self.fresh_const(ty);
        self.witnesses.push((p, w));
        let Ok(inst) = self.store.subst_norm(body, 0, w) else {
            return;
        };
        let ninst = self.store.mk_neg(inst);
        let lp = self.ensure_lit(p);
        let ln = self.ensure_lit(ninst);
        self.emit(RuleTag::NegForall, vec![-lp, ln]);
        self.enqueue_process(ninst);
    }

    fn rule_eq_fun(&mut self, p: TermId, dom: TyId, cod: TyId, s: TermId, t: TermId) {
        let Ok(db0) = self.store.mk_db(0) else { return };
        let (Ok(sx), Ok(tx)) = (self.store.mk_norm_ap(s, db0), self.store.mk_norm_ap(t, db0))
        else {
            return;
        };
        let Ok(body) = self.store.mk_eq(cod, sx, tx) else {
            return;
        };
        let ext = self.store.mk_all(dom, body);
        let lp = self.ensure_lit(p);
        let le = self.ensure_lit(ext);
        self.emit(RuleTag::EqFun, vec![-lp, le]);
        self.enqueue_process(ext);
    }

    fn rule_neq_fun(&mut self, p: TermId, dom: TyId, cod: TyId, u: TermId, v: TermId) {
        if !self.flags.enable_neq_fun {
            return;
        }
        let w = self.fresh_const(dom);
        self.witnesses.push((p, w));
        let (Ok(uw), Ok(vw)) = (self.store.mk_norm_ap(u, w), self.store.mk_norm_ap(v, w)) else {
            return;
        };
        let Ok(d) = self.store.mk_neq(cod, uw, vw) else {
            return;
        };
        let lp = self.ensure_lit(p);
        let ld = self.ensure_lit(d);
        self.emit(RuleTag::NeqFun, vec![-lp, ld]);
        self.enqueue_process(d);
    }

    /// Equation at type `$o`: the two branches `{s, t}` and `{~s, ~t}`.
    fn rule_eq_prop(&mut self, p: TermId, s: TermId, t: TermId) {
        let lp = self.ensure_lit(p);
        let ls = self.ensure_lit(s);
        let lt = self.ensure_lit(t);
        self.emit(RuleTag::EqProp, vec![-lp, ls, -lt]);
        self.emit(RuleTag::EqProp, vec![-lp, -ls, lt]);
        self.enqueue_prop_and_negation(s);
        self.enqueue_prop_and_negation(t);
    }

    /// Disequation at type `$o`: the branches `{s, ~t}` and `{~s, t}`.
    fn rule_neq_prop(&mut self, p: TermId, s: TermId, t: TermId) {
        let lp = self.ensure_lit(p);
        let ls = self.ensure_lit(s);
        let lt = self.ensure_lit(t);
        self.emit(RuleTag::NeqProp, vec![-lp, ls, lt]);
        self.emit(RuleTag::NeqProp, vec![-lp, -ls, -lt]);
        self.enqueue_prop_and_negation(s);
        self.enqueue_prop_and_negation(t);
    }

    fn enqueue_prop_and_negation(&mut self, s: TermId) {
        self.enqueue_process(s);
        let ns = self.store.mk_neg(s);
        self.enqueue_process(ns);
    }

    fn positive_sort_equation(&mut self, p: TermId, sort: TyId) {
        self.st.pos_eqns.entry(sort).or_default().insert(p);
        let diseqs: Vec<TermId> = self
            .st
            .diseqs
            .get(&sort)
            .map(|s| s.iter().copied().collect())
            .unwrap_or_default();
        for d in diseqs {
            self.enqueue(
                Command::Confront { eqn: p, diseq: d },
                self.flags.prio_confront,
            );
        }
    }

    fn sort_disequation(&mut self, p: TermId, sort: TyId, u: TermId, v: TermId) {
        self.st.diseqs.entry(sort).or_default().insert(p);
        self.register_discriminating(sort, u);
        self.register_discriminating(sort, v);
        let eqns: Vec<TermId> = self
            .st
            .pos_eqns
            .get(&sort)
            .map(|s| s.iter().copied().collect())
            .unwrap_or_default();
        for e in eqns {
            self.enqueue(
                Command::Confront { eqn: e, diseq: p },
                self.flags.prio_confront,
            );
        }
        if self.flags.enable_decompose && u != v {
            self.rule_decompose(p, u, v);
        }
    }

    /// Same-head disequation at a sort splits into argument
    /// disequations.
    fn rule_decompose(&mut self, p: TermId, u: TermId, v: TermId) {
        let (uh, uargs) = self.store.head_spine(u);
        let (vh, vargs) = self.store.head_spine(v);
        if uh != vh || uargs.is_empty() || uargs.len() != vargs.len() {
            return;
        }
        let Node::Const(name) = self.store.node(uh) else {
            return;
        };
        let head_ty = self.store.const_ty(name).expect("head is registered");
        let arg_tys = self.store.arrow_args(head_ty, uargs.len());
        let lp = self.ensure_lit(p);
        let mut lits = vec![-lp];
        let mut diseqs = Vec::with_capacity(uargs.len());
        for ((s, t), ty) in uargs.iter().zip(&vargs).zip(arg_tys) {
            let Ok(d) = self.store.mk_neq(ty, *s, *t) else {
                return;
            };
            lits.push(self.ensure_lit(d));
            diseqs.push(d);
        }
        self.emit(RuleTag::Decompose, lits);
        for d in diseqs {
            self.enqueue_process(d);
        }
    }

    fn register_discriminating(&mut self, sort: TyId, w: TermId) {
        if self.st.diseq_sides.entry(sort).or_default().insert(w) {
            self.add_instantiation(sort, w);
        }
    }

    fn add_instantiation(&mut self, ty: TyId, w: TermId) {
        if !self.st.instantiations.entry(ty).or_default().insert(w) {
            return;
        }
        let foralls: Vec<TermId> = self
            .st
            .processed_foralls
            .get(&ty)
            .map(|s| s.iter().copied().collect())
            .unwrap_or_default();
        for f in foralls {
            self.enqueue(
                Command::Instantiate {
                    forall: f,
                    witness: w,
                },
                self.flags.prio_instantiate,
            );
        }
    }

    fn positive_atom(&mut self, p: TermId) {
        let (head, args) = self.store.head_spine(p);
        let Node::Const(name) = self.store.node(head) else {
            return; // choice-headed atoms only feed the choice rule
        };
        self.st.pos_atoms.entry(name).or_default().insert(p);
        if args.is_empty() {
            return;
        }
        let negs: Vec<TermId> = self
            .st
            .neg_atoms
            .get(&name)
            .map(|s| s.iter().copied().collect())
            .unwrap_or_default();
        for n in negs {
            self.enqueue(Command::Mate { pos: p, neg: n }, self.flags.prio_mate);
        }
    }

    fn negative_atom(&mut self, p: TermId, atom: TermId) {
        let (head, args) = self.store.head_spine(atom);
        let Node::Const(name) = self.store.node(head) else {
            return;
        };
        self.st.neg_atoms.entry(name).or_default().insert(p);
        if args.is_empty() {
            return;
        }
        let poss: Vec<TermId> = self
            .st
            .pos_atoms
            .get(&name)
            .map(|s| s.iter().copied().collect())
            .unwrap_or_default();
        for q in poss {
            self.enqueue(Command::Mate { pos: q, neg: p }, self.flags.prio_mate);
        }
    }

    /// Walks a newly processed proposition once: indexes its closed
    /// function-typed subterms and expands choice applications.
    fn scan_term(&mut self, p: TermId) {
        let mut stack = vec![p];
        let mut choice_apps = Vec::new();
        while let Some(x) = stack.pop() {
            if !self.scanned.insert(x) {
                continue;
            }
            match self.store.node(x) {
                Node::Ap(f, a) => {
                    if matches!(self.store.node(f), Node::Choice(_)) && self.store.is_closed(x) {
                        choice_apps.push((x, f, a));
                    }
                    stack.push(f);
                    stack.push(a);
                }
                Node::Imp(a, b) => {
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
            if self.store.is_closed(x) {
                if let Ok(ty) = self.store.ty_of_closed(x) {
                    if matches!(self.store.ty(ty), Ty::Arrow(..)) {
                        self.subterms_by_ty.entry(ty).or_default().insert(x);
                    }
                }
            }
        }
        if self.flags.enable_choice {
            for (app, eps, pred) in choice_apps {
                self.rule_choice(app, eps, pred);
            }
        }
    }

    /// A choice application `eps q` on the branch: either `q` is empty or
    /// the chosen term satisfies `q`. The clause is a tautology of the
    /// choice semantics, so it carries no guard literal.
    fn rule_choice(&mut self, app: TermId, eps: TermId, pred: TermId) {
        if !self.choice_done.insert(app) {
            return;
        }
        let Node::Choice(sort) = self.store.node(eps) else {
            return;
        };
        let Ok(db0) = self.store.mk_db(0) else { return };
        let Ok(px) = self.store.mk_norm_ap(pred, db0) else {
            return;
        };
        let npx = self.store.mk_neg(px);
        let empty = self.store.mk_all(sort, npx);
        let Ok(witnessed) = self.store.mk_norm_ap(pred, app) else {
            return;
        };
        let le = self.ensure_lit(empty);
        let lw = self.ensure_lit(witnessed);
        self.emit(RuleTag::Choice, vec![le, lw]);
        self.enqueue_process(empty);
        self.enqueue_process(witnessed);
    }

    fn fresh_const(&mut self, ty: TyId) -> TermId {
        self.st.fresh_counter += 1;
        // '#' is outside TPTP identifier syntax, so these can never
        // collide with parsed constants
        let name = format!("#{}", self.st.fresh_counter);
        let n = self.store.intern_name(&name);
        self.store.mk_const(n, ty)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::strategy::Flags;
    use crate::tptp::parse_problem;

    fn engine_for(text: &str) -> Engine {
        let problem = parse_problem("test", text, None).expect("test problem parses");
        Engine::for_problem(&problem, &Flags::default())
    }

    fn run(text: &str) -> (Engine, SearchResult) {
        let mut eng = engine_for(text);
        eng.record_clauses(true);
        let r = eng.search(Duration::from_secs(20));
        (eng, r)
    }

    #[test]
    fn bot_closes_in_zero_steps() {
        let mut store = Store::new();
        let bot = store.mk_bot();
        let mut eng = Engine::with_goals(store, vec![bot], &Flags::default());
        let r = eng.search(Duration::from_secs(1));
        assert_eq!(r.status, SearchStatus::Theorem);
        assert_eq!(r.steps, 0);
    }

    #[test]
    fn empty_branch_gives_up() {
        let store = Store::new();
        let mut eng = Engine::with_goals(store, vec![], &Flags::default());
        let r = eng.search(Duration::from_secs(1));
        assert_eq!(r.status, SearchStatus::GaveUp);
    }

    #[test]
    fn self_disequation_closes_on_assertion() {
        let mut store = Store::new();
        let iota = store.base_sort("$i");
        let c = store.intern_name("c");
        let c = store.mk_const(c, iota);
        let neq = store.mk_neq(iota, c, c).unwrap();
        let mut eng = Engine::with_goals(store, vec![neq], &Flags::default());
        let prio = eng.flags.prio_process;
        eng.assert_prop(neq, prio);
        // conflict arrives from unit propagation alone, before any step
        assert!(eng.sat.is_root_conflict());
    }

    #[test]
    fn duplicate_assertion_adds_nothing() {
        let mut store = Store::new();
        let p = store.prop();
        let a = store.intern_name("a");
        let a = store.mk_const(a, p);
        let mut eng = Engine::with_goals(store, vec![], &Flags::default());
        eng.assert_prop(a, 0);
        let clauses = eng.sat.num_clauses();
        let queued = eng.queue.len();
        eng.assert_prop(a, 0);
        assert_eq!(eng.sat.num_clauses(), clauses);
        assert_eq!(eng.queue.len(), queued);
    }

    #[test]
    fn implication_emits_branching_clause() {
        let (eng, r) = run(
            "thf(pa_type, type, pa: $o).\n\
             thf(pb_type, type, pb: $o).\n\
             thf(a, axiom, pa => pb).",
        );
        assert_eq!(r.status, SearchStatus::GaveUp);
        let imp_clauses: Vec<_> = eng
            .clause_log()
            .iter()
            .filter(|c| c.rule == RuleTag::Implication)
            .collect();
        assert_eq!(imp_clauses.len(), 1);
        assert_eq!(imp_clauses[0].lits.len(), 3);
    }

    #[test]
    fn satisfiable_branch_never_proves() {
        let (_, r) = run(
            "thf(pa_type, type, pa: $o).\n\
             thf(pb_type, type, pb: $o).\n\
             thf(c, conjecture, pa => pb).",
        );
        assert_eq!(r.status, SearchStatus::GaveUp);
    }

    #[test]
    fn tautology_proves() {
        let (_, r) = run(
            "thf(pa_type, type, pa: $o).\n\
             thf(pb_type, type, pb: $o).\n\
             thf(c, conjecture, (pa => pb) => (~pb => ~pa)).",
        );
        assert_eq!(r.status, SearchStatus::Theorem);
    }

    #[test]
    fn forall_with_no_terms_uses_one_default() {
        let (eng, r) = run(
            "thf(p_type, type, p: $i > $o).\n\
             thf(a, axiom, ! [X: $i]: (p @ X)).",
        );
        assert_eq!(r.status, SearchStatus::GaveUp);
        let sorts = eng.sorts_with_instantiations();
        assert_eq!(sorts.len(), 1);
        let insts = eng.instantiations_of(sorts[0]);
        assert_eq!(insts.len(), 1);
        assert_eq!(eng.default_of(sorts[0]), Some(insts[0]));
    }

    #[test]
    fn discriminating_terms_drive_instantiation() {
        let (eng, r) = run(
            "thf(p_type, type, p: $i > $o).\n\
             thf(c_type, type, c: $i).\n\
             thf(d_type, type, d: $i).\n\
             thf(a1, axiom, ! [X: $i]: (p @ X)).\n\
             thf(a2, axiom, c != d).",
        );
        assert_eq!(r.status, SearchStatus::GaveUp);
        for sort in eng.sorts_with_instantiations() {
            let mut expected = eng.diseq_sides_of(sort);
            if let Some(d) = eng.default_of(sort) {
                if !expected.contains(&d) {
                    expected.push(d);
                }
            }
            let mut insts = eng.instantiations_of(sort);
            insts.sort();
            expected.sort();
            assert_eq!(insts, expected, "instantiations = diseq sides + default");
        }
        // bookkeeping: every (forall, instantiation) pair was executed
        for sort in eng.sorts_with_instantiations() {
            for f in eng.processed_foralls_of(sort) {
                for w in eng.instantiations_of(sort) {
                    assert!(
                        eng.executed_instantiations().contains(&(f, w)),
                        "unexecuted instantiation"
                    );
                }
            }
        }
    }

    #[test]
    fn runs_are_deterministic() {
        let text = std::fs::read_to_string(concat!(
            env!("CARGO_MANIFEST_DIR"),
            "/problems/sev241_5.p"
        ))
        .unwrap();
        let (e1, r1) = run(&text);
        let (e2, r2) = run(&text);
        assert_eq!(r1.status, r2.status);
        assert_eq!(r1.steps, r2.steps);
        assert_eq!(e1.lits().num_vars(), e2.lits().num_vars());
    }

    #[test]
    fn walkthrough_problem_proves_quickly() {
        let text = std::fs::read_to_string(concat!(
            env!("CARGO_MANIFEST_DIR"),
            "/problems/sev241_5.p"
        ))
        .unwrap();
        let (_, r) = run(&text);
        assert_eq!(r.status, SearchStatus::Theorem);
        assert!(r.steps < 1000);
    }

    #[test]
    fn mate_clause_length_is_arity_plus_two() {
        let (eng, _) = run(
            "thf(p_type, type, p: $i > ($i > $o)).\n\
             thf(a_type, type, a: $i).\n\
             thf(b_type, type, b: $i).\n\
             thf(c_type, type, c: $i).\n\
             thf(d_type, type, d: $i).\n\
             thf(pos, axiom, p @ a @ b).\n\
             thf(neg, axiom, ~(p @ c @ d)).",
        );
        let mates: Vec<_> = eng
            .clause_log()
            .iter()
            .filter(|c| c.rule == RuleTag::Mate)
            .collect();
        assert!(!mates.is_empty());
        for m in mates {
            assert_eq!(m.lits.len(), 2 + 2);
        }
    }

    #[test]
    fn neg_forall_creates_distinct_witnesses() {
        let (eng, r) = run(
            "thf(p_type, type, p: $i > $o).\n\
             thf(q_type, type, q: $i > $o).\n\
             thf(a1, axiom, ~(! [X: $i]: (p @ X))).\n\
             thf(a2, axiom, ~(! [X: $i]: (q @ X))).",
        );
        assert_eq!(r.status, SearchStatus::GaveUp);
        let ws = eng.fresh_witnesses();
        assert_eq!(ws.len(), 2);
        assert_ne!(ws[0].1, ws[1].1);
    }
}
