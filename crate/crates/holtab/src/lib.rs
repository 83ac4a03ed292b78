//! A ground-tableau theorem prover for simply typed higher-order logic
//! (the TPTP TH0 fragment).
//!
//! The prover is built around three ideas:
//!
//! * **A perfectly shared term store** ([`term::Store`]): every term is
//!   kept beta/eta-normal and interned, so term equality is integer
//!   comparison, and substitution/shifting are cached and skip subterms
//!   their free-index masks prove untouched.
//! * **SAT-mediated branching** ([`sat`], [`engine`]): tableau rules
//!   never split an explicit tree; each rule application emits clauses
//!   over proposition literals (minus is negation) and the branch
//!   structure is refuted when the clause set goes unsatisfiable.
//! * **Discriminating-term instantiation** ([`engine`]): quantifiers at
//!   a sort are instantiated only with terms that appear on a side of a
//!   disequation at that sort, plus a generated default.
//!
//! See the `examples/` directory for runnable walkthroughs of each
//! capability, and the `holtab` binary for the command-line interface.

pub mod bench;
pub mod church;
pub mod corpus;
pub mod engine;
pub mod naive;
pub mod sat;
pub mod strategy;
pub mod szs;
pub mod term;
pub mod tptp;

pub use engine::{Engine, SearchResult, SearchStatus};
pub use strategy::{default_schedule, run_schedule, Flags, Schedule};
pub use term::{NameId, Store, TermId, TyId};
pub use tptp::{parse_problem, parse_problem_file, Problem};
