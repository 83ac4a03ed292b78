//! Propositional core: normal propositions map to nonzero integer
//! literals with minus as negation, tableau rules feed in clauses, and
//! the branch structure is refuted exactly when the clause set goes
//! unsatisfiable.
//!
//! The solver is a plain DPLL with two watched literals, incremental
//! root-level unit propagation, and chronological backtracking. A
//! propagate-only mode answers "evidently contradictory or not" without
//! searching.

use std::collections::HashMap;
use std::time::Instant;

use crate::term::{Node, Store, TermId};

/// Result of a full or propagate-only solve.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Outcome {
    Sat,
    Unsat,
}

/// Result of adding a clause and running incremental propagation.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum PropagationOutcome {
    NoConflict,
    Conflict,
}

/// Assigns nonzero integers to normal propositions so that minus is
/// negation: a proposition of the shape `s => $false` gets the negated
/// literal of `s`. Distinct cores get dense positive values from 1 up,
/// in first-encounter order.
#[derive(Default, Clone)]
pub struct LitMap {
    by_prop: HashMap<TermId, i32>,
    props: Vec<TermId>,
}

impl LitMap {
    pub fn new() -> LitMap {
        LitMap::default()
    }

    /// Literal for `p`, allocating a variable for its positive core on
    /// first sight. The second component is the core proposition when
    /// this call created its variable.
    pub fn ensure(&mut self, store: &Store, p: TermId) -> (i32, Option<TermId>) {
        let mut sign = 1;
        let mut core = p;
        let bot = store.mk_bot();
        while let Node::Imp(q, t) = store.node(core) {
            if t != bot {
                break;
            }
            sign = -sign;
            core = q;
        }
        if let Some(&v) = self.by_prop.get(&core) {
            return (sign * v, None);
        }
        let v = self.props.len() as i32 + 1;
        self.props.push(core);
        self.by_prop.insert(core, v);
        (sign * v, Some(core))
    }

    pub fn lit_of(&mut self, store: &Store, p: TermId) -> i32 {
        self.ensure(store, p).0
    }

    /// The proposition a (positive) variable stands for.
    pub fn prop_of_var(&self, var: i32) -> TermId {
        self.props[(var - 1) as usize]
    }

    pub fn num_vars(&self) -> usize {
        self.props.len()
    }

    pub fn vars(&self) -> impl Iterator<Item = (i32, TermId)> + '_ {
        self.props
            .iter()
            .enumerate()
            .map(|(i, &p)| (i as i32 + 1, p))
    }
}

const UNASSIGNED: i8 = 0;

fn watch_slot(lit: i32) -> usize {
    let var = lit.unsigned_abs() as usize;
    2 * (var - 1) + usize::from(lit < 0)
}

/// Clause database with incremental unit propagation and DPLL search.
#[derive(Default, Clone)]
pub struct SatCore {
    /// assigns[var-1]: 1 true, -1 false, 0 unassigned
    assigns: Vec<i8>,
    watches: Vec<Vec<usize>>,
    clauses: Vec<Vec<i32>>,
    trail: Vec<i32>,
    prop_head: usize,
    root_conflict: bool,
    /// cached satisfying assignment from the last successful search
    model: Option<Vec<i8>>,
    /// clauses already validated against the cached model
    model_checked: usize,
    /// root trail length at the last validation
    model_trail: usize,
}

impl SatCore {
    pub fn new() -> SatCore {
        SatCore::default()
    }

    pub fn ensure_var(&mut self, var: i32) {
        let var = var as usize;
        while self.assigns.len() < var {
            self.assigns.push(UNASSIGNED);
            self.watches.push(Vec::new());
            self.watches.push(Vec::new());
        }
    }

    pub fn num_vars(&self) -> usize {
        self.assigns.len()
    }

    pub fn num_clauses(&self) -> usize {
        self.clauses.len()
    }

    pub fn clauses(&self) -> &[Vec<i32>] {
        &self.clauses
    }

    pub fn is_root_conflict(&self) -> bool {
        self.root_conflict
    }

    fn value(&self, lit: i32) -> i8 {
        let v = self.assigns[(lit.unsigned_abs() - 1) as usize];
        if lit < 0 {
            -v
        } else {
            v
        }
    }

    /// Stores a clause (tautologies are dropped, duplicate literals
    /// removed) and propagates its consequences at the root level.
    pub fn add_clause(&mut self, lits: &[i32]) -> PropagationOutcome {
        assert!(!lits.is_empty(), "clauses must be nonempty");
        let mut c: Vec<i32> = Vec::with_capacity(lits.len());
        for &l in lits {
            assert!(l != 0, "literals are nonzero");
            if c.contains(&-l) {
                return self.outcome(); // tautology, carries nothing
            }
            if !c.contains(&l) {
                c.push(l);
            }
        }
        for &l in &c {
            self.ensure_var(l.abs());
        }
        if self.root_conflict {
            return PropagationOutcome::Conflict;
        }
        let ci = self.clauses.len();
        if c.len() == 1 {
            let l = c[0];
            self.clauses.push(c);
            if !self.enqueue(l) || !self.propagate() {
                self.root_conflict = true;
            }
            return self.outcome();
        }
        // prefer non-false literals as the watched pair
        let mut best = [0usize, 1usize];
        let mut found = 0;
        for (i, &l) in c.iter().enumerate() {
            if self.value(l) >= 0 {
                best[found] = i;
                found += 1;
                if found == 2 {
                    break;
                }
            }
        }
        match found {
            2 => {
                c.swap(0, best[0]);
                let b1 = if best[1] == 0 { best[0] } else { best[1] };
                c.swap(1, b1);
                self.watch(c[0], ci);
                self.watch(c[1], ci);
                self.clauses.push(c);
            }
            1 => {
                // unit under the root assignment
                let l = c[best[0]];
                c.swap(0, best[0]);
                self.watch(c[0], ci);
                self.watch(c[1], ci);
                self.clauses.push(c);
                if self.value(l) == 0 && (!self.enqueue(l) || !self.propagate()) {
                    self.root_conflict = true;
                }
            }
            _ => {
                // all false at root
                self.watch(c[0], ci);
                self.watch(c[1], ci);
                self.clauses.push(c);
                self.root_conflict = true;
            }
        }
        self.outcome()
    }

    fn outcome(&self) -> PropagationOutcome {
        if self.root_conflict {
            PropagationOutcome::Conflict
        } else {
            PropagationOutcome::NoConflict
        }
    }

    fn watch(&mut self, lit: i32, clause: usize) {
        self.watches[watch_slot(lit)].push(clause);
    }

    /// Assigns `lit` true. False on immediate contradiction.
    fn enqueue(&mut self, lit: i32) -> bool {
        match self.value(lit) {
            1 => true,
            -1 => false,
            _ => {
                self.assigns[(lit.unsigned_abs() - 1) as usize] = if lit < 0 { -1 } else { 1 };
                self.trail.push(lit);
                true
            }
        }
    }

    /// Two-watched-literal propagation from the current queue position.
    /// False on conflict.
    fn propagate(&mut self) -> bool {
        while self.prop_head < self.trail.len() {
            let p = self.trail[self.prop_head];
            self.prop_head += 1;
            let falsified = -p;
            let slot = watch_slot(falsified);
            let mut watchers = std::mem::take(&mut self.watches[slot]);
            let mut i = 0;
            while i < watchers.len() {
                let ci = watchers[i];
                let (keep, implied) = {
                    let clause = &mut self.clauses[ci];
                    if clause[0] == falsified {
                        clause.swap(0, 1);
                    }
                    debug_assert_eq!(clause[1], falsified);
                    let first = clause[0];
                    if self.assigns[(first.unsigned_abs() - 1) as usize]
                        == (if first < 0 { -1 } else { 1 })
                    {
                        (true, None) // already satisfied by the other watch
                    } else {
                        let mut moved = None;
                        for k in 2..clause.len() {
                            let lk = clause[k];
                            let v = self.assigns[(lk.unsigned_abs() - 1) as usize];
                            let falsy = v == (if lk < 0 { 1 } else { -1 });
                            if !falsy {
                                clause.swap(1, k);
                                moved = Some(clause[1]);
                                break;
                            }
                        }
                        match moved {
                            Some(new_watch) => {
                                self.watches[watch_slot(new_watch)].push(ci);
                                (false, None)
                            }
                            None => (true, Some(first)),
                        }
                    }
                };
                if keep {
                    i += 1;
                } else {
                    watchers.swap_remove(i);
                    continue;
                }
                if let Some(l) = implied {
                    if !self.enqueue(l) {
                        // restore remaining watchers before reporting
                        self.watches[slot].extend_from_slice(&watchers);
                        return false;
                    }
                }
            }
            self.watches[slot].extend_from_slice(&watchers);
        }
        true
    }

    /// Decides propositional status. With `search_allowed` false this
    /// only reports whether propagation alone has already derived a
    /// contradiction; with it true a full DPLL search runs and the exact
    /// status is returned. State is restored to the root level on exit.
    pub fn solve(&mut self, search_allowed: bool) -> Outcome {
        self.solve_deadline(search_allowed, None)
            .expect("no deadline given")
    }

    /// Like [`SatCore::solve`] but gives up (returning `None`) when the
    /// deadline passes mid-search. An interrupted search decides
    /// nothing; state is still restored.
    pub fn solve_deadline(
        &mut self,
        search_allowed: bool,
        deadline: Option<Instant>,
    ) -> Option<Outcome> {
        if self.root_conflict {
            return Some(Outcome::Unsat);
        }
        if !search_allowed {
            return Some(Outcome::Sat);
        }
        if self.model_still_works() {
            return Some(Outcome::Sat);
        }
        let out = self.dpll(deadline)?;
        if out == Outcome::Unsat {
            self.root_conflict = true;
        }
        Some(out)
    }

    fn lit_true_in(m: &[i8], l: i32) -> bool {
        m[(l.unsigned_abs() - 1) as usize] == if l < 0 { -1 } else { 1 }
    }

    /// Revalidates the cached satisfying assignment incrementally: only
    /// root assignments and clauses added since the last validation are
    /// examined, unless a root assignment contradicts the model.
    fn model_still_works(&mut self) -> bool {
        let Some(mut m) = self.model.take() else {
            return false;
        };
        m.resize(self.assigns.len(), 1);
        let mut full_check = false;
        for &l in &self.trail[self.model_trail..] {
            if !Self::lit_true_in(&m, l) {
                // overwrite and fall back to checking everything
                m[(l.unsigned_abs() - 1) as usize] = if l < 0 { -1 } else { 1 };
                full_check = true;
            }
        }
        let from = if full_check { 0 } else { self.model_checked };
        let ok = self.clauses[from..]
            .iter()
            .all(|c| c.iter().any(|&l| Self::lit_true_in(&m, l)));
        if ok {
            self.model_checked = self.clauses.len();
            self.model_trail = self.trail.len();
            self.model = Some(m);
        }
        ok
    }

    fn dpll(&mut self, deadline: Option<Instant>) -> Option<Outcome> {
        let root_len = self.trail.len();
        // decision stack: (trail mark, literal, flipped, scan cursor)
        let mut decisions: Vec<(usize, i32, bool, usize)> = Vec::new();
        let mut scan = 0usize;
        let mut ticks = 0u32;
        loop {
            ticks += 1;
            if ticks % 512 == 0 {
                if let Some(d) = deadline {
                    if Instant::now() >= d {
                        self.unwind(root_len);
                        return None;
                    }
                }
            }
            let conflict = !self.propagate();
            if conflict {
                // chronological backtracking: flip the deepest untried decision
                loop {
                    match decisions.pop() {
                        None => {
                            self.unwind(root_len);
                            return Some(Outcome::Unsat);
                        }
                        Some((mark, lit, flipped, sc)) => {
                            self.unwind(mark);
                            scan = sc;
                            if !flipped {
                                decisions.push((mark, -lit, true, sc));
                                let ok = self.enqueue(-lit);
                                debug_assert!(ok);
                                break;
                            }
                        }
                    }
                }
                continue;
            }
            // advance the cursor past satisfied clauses; the assignment
            // restored on backtrack re-satisfies everything before it
            while scan < self.clauses.len() && self.clauses[scan].iter().any(|&l| self.value(l) == 1)
            {
                scan += 1;
            }
            if scan == self.clauses.len() {
                self.model = Some(self.assigns.clone());
                self.unwind(root_len);
                self.model_checked = self.clauses.len();
                self.model_trail = self.trail.len();
                return Some(Outcome::Sat);
            }
            // lowest-index unassigned variable of the first unsatisfied
            // clause, positive phase first
            let lit = self.clauses[scan]
                .iter()
                .filter(|&&l| self.value(l) == 0)
                .map(|&l| l.abs())
                .min()
                .expect("propagation left no unit behind");
            decisions.push((self.trail.len(), lit, false, scan));
            let ok = self.enqueue(lit);
            debug_assert!(ok);
        }
    }

    fn unwind(&mut self, to: usize) {
        while self.trail.len() > to {
            let l = self.trail.pop().unwrap();
            self.assigns[(l.unsigned_abs() - 1) as usize] = UNASSIGNED;
        }
        self.prop_head = self.prop_head.min(to);
    }

    /// DIMACS rendering of the stored clause set.
    pub fn dump_dimacs(&self) -> String {
        let mut out = format!("p cnf {} {}\n", self.assigns.len(), self.clauses.len());
        for c in &self.clauses {
            for &l in c {
                out.push_str(&l.to_string());
                out.push(' ');
            }
            out.push_str("0\n");
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::term::Store;

    #[test]
    fn unit_conflict() {
        let mut s = SatCore::new();
        assert_eq!(s.add_clause(&[1]), PropagationOutcome::NoConflict);
        assert_eq!(s.add_clause(&[-1]), PropagationOutcome::Conflict);
        assert_eq!(s.solve(false), Outcome::Unsat);
    }

    #[test]
    fn unit_implication() {
        let mut s = SatCore::new();
        assert_eq!(s.add_clause(&[1, 2]), PropagationOutcome::NoConflict);
        assert_eq!(s.add_clause(&[-1]), PropagationOutcome::NoConflict);
        assert_eq!(s.value(2), 1);
    }

    #[test]
    fn search_vs_propagation_only() {
        let mut s = SatCore::new();
        for c in [[1, 2], [-1, 2], [1, -2], [-1, -2]] {
            assert_eq!(s.add_clause(&c), PropagationOutcome::NoConflict);
        }
        assert_eq!(s.solve(false), Outcome::Sat); // not evidently contradictory
        assert_eq!(s.solve(true), Outcome::Unsat);
    }

    #[test]
    fn empty_set_is_sat() {
        let mut s = SatCore::new();
        assert_eq!(s.solve(true), Outcome::Sat);
    }

    #[test]
    fn unsat_is_monotone() {
        let mut s = SatCore::new();
        s.add_clause(&[1]);
        s.add_clause(&[-1]);
        assert_eq!(s.solve(true), Outcome::Unsat);
        s.add_clause(&[2, 3]);
        assert_eq!(s.solve(true), Outcome::Unsat);
        assert_eq!(s.add_clause(&[4]), PropagationOutcome::Conflict);
    }

    #[test]
    fn tautologies_are_dropped() {
        let mut s = SatCore::new();
        s.add_clause(&[1, -1, 2]);
        assert_eq!(s.num_clauses(), 0);
    }

    fn brute_force(nvars: usize, clauses: &[Vec<i32>]) -> Outcome {
        for bits in 0..(1u32 << nvars) {
            let sat = clauses.iter().all(|c| {
                c.iter().any(|&l| {
                    let v = bits >> (l.unsigned_abs() - 1) & 1 == 1;
                    if l > 0 {
                        v
                    } else {
                        !v
                    }
                })
            });
            if sat {
                return Outcome::Sat;
            }
        }
        Outcome::Unsat
    }

    #[test]
    fn agrees_with_truth_tables() {
        use rand::prelude::*;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..300 {
            let nvars = rng.gen_range(1..=8);
            let nclauses = rng.gen_range(1..=24);
            let mut s = SatCore::new();
            let mut clauses = Vec::new();
            for _ in 0..nclauses {
                let len = rng.gen_range(1..=4);
                let c: Vec<i32> = (0..len)
                    .map(|_| {
                        let v = rng.gen_range(1..=nvars) as i32;
                        if rng.gen_bool(0.5) {
                            v
                        } else {
                            -v
                        }
                    })
                    .collect();
                s.add_clause(&c);
                clauses.push(c);
            }
            let expect = brute_force(nvars, &clauses);
            assert_eq!(s.solve(true), expect);
            // solving twice gives the same answer
            assert_eq!(s.solve(true), expect);
        }
    }

    #[test]
    fn litmap_minus_is_negation() {
        let mut store = Store::new();
        let mut lits = LitMap::new();
        let p = store.prop();
        let a = store.intern_name("a");
        let a = store.mk_const(a, p);
        let la = lits.lit_of(&store, a);
        let na = store.mk_neg(a);
        assert_eq!(lits.lit_of(&store, na), -la);
        let nna = store.mk_neg(na);
        assert_eq!(lits.lit_of(&store, nna), la);
    }

    #[test]
    fn litmap_allocates_densely() {
        let mut store = Store::new();
        let mut lits = LitMap::new();
        let p = store.prop();
        let mut got = Vec::new();
        for name in ["a", "b", "c"] {
            let n = store.intern_name(name);
            let t = store.mk_const(n, p);
            got.push(lits.lit_of(&store, t));
        }
        assert_eq!(got, vec![1, 2, 3]);
    }
}
