//! Generator for the tree-duplication family: the n-th problem states
//! that iterating `^z. cons z z` n times from `cons nil nil` equals
//! `cons` of two copies of the same iteration from `nil`.
//!
//! Both sides normalize to a complete binary tree of depth n+1, so as a
//! shared graph the normal form has O(n) distinct nodes while as a tree
//! it has O(2^n) positions. Proving the problem needs no search at all,
//! only normalization and the reflexivity closure.

use crate::tptp::{parse_problem, Problem};

/// THF text of the Church numeral for `n` at type `($i > $i) > $i > $i`.
pub fn church_numeral_text(n: usize) -> String {
    let mut body = String::from("X");
    for _ in 0..n {
        body = format!("(F @ {body})");
    }
    format!("(^[F: $i > $i]: (^[X: $i]: {body}))")
}

/// Full THF source of the n-th problem.
pub fn church_source(n: usize) -> String {
    assert!(n >= 1);
    let num = church_numeral_text(n);
    let dup = "(^[Z: $i]: ((cons @ Z) @ Z))";
    format!(
        "% Iterated tree duplication, instance n = {n}.\n\
         thf(cons_type, type, cons: $i > ($i > $i)).\n\
         thf(nil_type, type, nil: $i).\n\
         thf(c{n}, conjecture,\n\
         \x20   (({num} @ {dup}) @ ((cons @ nil) @ nil))\n\
         \x20 = ((cons @ (({num} @ {dup}) @ nil)) @ (({num} @ {dup}) @ nil))).\n"
    )
}

pub fn church_name(n: usize) -> String {
    format!("church_c{n}")
}

/// Parses the generated source into a problem (normalizing both sides
/// of the conjecture in the process).
pub fn church_problem(n: usize) -> Problem {
    parse_problem(&church_name(n), &church_source(n), None)
        .expect("generated problems always parse")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::term::Node;

    #[test]
    fn both_sides_share_one_normal_form() {
        for n in 1..=24 {
            let p = church_problem(n);
            let (_, conj) = p.conjecture.as_ref().unwrap();
            let Node::Eq(_, lhs, rhs) = p.store.node(*conj) else {
                panic!("conjecture is an equation");
            };
            assert_eq!(lhs, rhs, "n = {n}");
        }
    }

    #[test]
    fn shared_size_is_linear_in_n() {
        // each increment adds exactly two application nodes to the
        // normal form: cons t, then (cons t) t
        let mut sizes = Vec::new();
        for n in 1..=8 {
            let p = church_problem(n);
            let (_, conj) = p.conjecture.as_ref().unwrap();
            let Node::Eq(_, lhs, _) = p.store.node(*conj) else {
                unreachable!();
            };
            sizes.push(p.store.reachable_count(lhs));
        }
        for w in sizes.windows(2) {
            assert_eq!(w[1] - w[0], 2, "sizes {sizes:?}");
        }
        // n = 2: nil, cons, and two application pairs per level
        assert_eq!(sizes[1], 8);
    }
}
