//! Flat scaling on the iterated tree-duplication family.
//!
//! The shared store keeps every instance's normal form as an O(n)
//! graph, so proving the n-th instance costs about the same for every
//! n; the unshared reference backend builds the full O(2^n) tree and
//! doubles its time with each increment.
//!
//! Run with: cargo run --release -p holtab --example church_scaling

use std::time::{Duration, Instant};

use holtab::church::church_problem;
use holtab::naive;
use holtab::strategy::{builtin_mode, run_mode};
use holtab::term::Node;

fn main() {
    let flags = builtin_mode("base").unwrap();
    println!("shared store (prove, includes parsing):");
    for n in 20..=24 {
        let t0 = Instant::now();
        let problem = church_problem(n);
        let parse = t0.elapsed();
        let (eng, r) = run_mode(&problem, &flags, Duration::from_secs(5), false);
        let total = t0.elapsed();
        let (_, conj) = problem.conjecture.as_ref().unwrap();
        let Node::Eq(_, lhs, _) = problem.store.node(*conj) else {
            unreachable!()
        };
        println!(
            "  n={n}: {:<8?} ({:?} parsing), status {:?}, steps {}, normal form {} shared nodes, {} literals",
            total,
            parse,
            r.status,
            r.steps,
            problem.store.reachable_count(lhs),
            eng.lits().num_vars(),
        );
    }
    println!("unshared reference backend (normalize only):");
    for n in 14..=18 {
        let mut store = holtab::Store::new();
        let problem = church_problem(n);
        let (_, conj) = problem.conjecture.as_ref().unwrap();
        let raw = naive::from_store(&problem.store, *conj);
        let _ = &mut store;
        let t0 = Instant::now();
        let normal = naive::nf(&raw);
        println!(
            "  n={n}: {:<10?} normal form {} tree nodes",
            t0.elapsed(),
            normal.size()
        );
    }
}
