//! The bundled problem corpus: hand-encoded THF files plus the
//! generated tree-duplication family.
//!
//! The TPTP-derived entries are re-encodings, not the original library
//! files; see `scripts/fetch_tptp.sh` at the repository root for how to
//! obtain the originals for full-corpus runs.

use crate::church;

const FILES: &[(&str, &str)] = &[
    ("sev241_5", include_str!("../problems/sev241_5.p")),
    ("num638_1", include_str!("../problems/num638_1.p")),
    ("syo506_1", include_str!("../problems/syo506_1.p")),
    ("sev108_5", include_str!("../problems/sev108_5.p")),
    ("choice_witness", include_str!("../problems/choice_witness.p")),
    ("contraposition", include_str!("../problems/contraposition.p")),
];

/// All bundled problems as (name, THF source) pairs, in a fixed order.
pub fn bundled_corpus() -> Vec<(String, String)> {
    let mut out: Vec<(String, String)> = FILES
        .iter()
        .map(|(n, t)| (n.to_string(), t.to_string()))
        .collect();
    for n in 20..=24 {
        out.push((church::church_name(n), church::church_source(n)));
    }
    out
}

/// Source text of one bundled problem.
pub fn bundled_source(name: &str) -> Option<String> {
    bundled_corpus().into_iter().find(|(n, _)| n == name).map(|(_, t)| t)
}
