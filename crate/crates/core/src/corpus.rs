//! A fixed collection of sample trees used by the test suites and the
//! acceptance run.

use crate::tree::{finite_normalized, normalized_generator, Generator, NormalizedTree};

#[derive(Debug, Clone)]
pub struct CorpusTree {
    pub name: &'static str,
    pub tree: NormalizedTree,
    /// Member literals before normalization, for finite trees.
    pub source: Option<&'static [&'static str]>,
}

impl CorpusTree {
    pub fn is_finite(&self) -> bool {
        self.tree.is_finite()
    }

    /// The tree file contents for finite trees.
    pub fn source_text(&self) -> Option<String> {
        self.source
            .map(|nodes| nodes.iter().map(|s| format!("{s}\n")).collect())
    }
}

const FINITE: &[(&str, &[&str])] = &[
    ("root-only", &["."]),
    ("left-stub", &[".", "0"]),
    ("cherry", &[".", "0", "1"]),
    ("left-cherry", &[".", "0", "00", "01"]),
    ("zigzag", &[".", "1", "10", "101", "1010"]),
    ("left-chain", &[".", "0", "00", "000", "0000"]),
    ("full-2", &[".", "0", "1", "00", "01", "10", "11"]),
    ("ragged", &[".", "0", "1", "01", "010", "011", "10", "100"]),
    ("fork", &[".", "1", "11", "110", "1101", "111"]),
    (
        "full-3",
        &[
            ".", "0", "1", "00", "01", "10", "11", "000", "001", "010", "011", "100", "101",
            "110", "111",
        ],
    ),
];

/// Two generator trees followed by ten finite trees of height at most 4
/// (at most 5 after normalization).
pub fn standard_corpus() -> Vec<CorpusTree> {
    let mut out: Vec<CorpusTree> = Generator::ALL
        .into_iter()
        .map(|g| CorpusTree {
            name: g.name(),
            tree: normalized_generator(g),
            source: None,
        })
        .collect();
    out.extend(FINITE.iter().map(|&(name, nodes)| CorpusTree {
        name,
        tree: finite_normalized(nodes),
        source: Some(nodes),
    }));
    out
}
