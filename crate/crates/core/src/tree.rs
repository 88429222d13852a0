//! Computable binary trees: finite explicit sets and generator-backed
//! infinite trees, plus the child-completion normalization that every
//! structure in this crate is built on.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use thiserror::Error;

use crate::bits::BinString;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TreeError {
    #[error("tree has no nodes (the root `.` is required)")]
    EmptyTree,
    #[error("not prefix-closed: {node} is present but its prefix {missing} is not")]
    NotPrefixClosed { node: BinString, missing: BinString },
    #[error("{0} is not a member of the tree")]
    NotInTree(BinString),
    #[error("line {line}: {reason}")]
    Syntax { line: usize, reason: String },
    #[error("line {line}: duplicate node {node}")]
    Duplicate { line: usize, node: BinString },
    #[error("unknown generator {0:?} (expected `full-binary` or `single-branch`)")]
    UnknownGenerator(String),
    #[error("tree is infinite; a depth bound is required")]
    Unbounded,
}

/// Named infinite trees given by a total membership predicate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Generator {
    /// Every binary string.
    FullBinary,
    /// The prefixes of `000…`.
    SingleBranch,
}

impl Generator {
    pub const ALL: [Generator; 2] = [Generator::FullBinary, Generator::SingleBranch];

    pub fn name(self) -> &'static str {
        match self {
            Generator::FullBinary => "full-binary",
            Generator::SingleBranch => "single-branch",
        }
    }

    pub fn contains(self, s: &BinString) -> bool {
        match self {
            Generator::FullBinary => true,
            Generator::SingleBranch => s.bits().iter().all(|&b| !b),
        }
    }

    /// Bit `pos` of a fixed infinite path through the generated tree.
    pub fn declared_path_bit(self, _pos: usize) -> bool {
        match self {
            Generator::FullBinary | Generator::SingleBranch => false,
        }
    }
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Generator {
    type Err = TreeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Generator::ALL
            .into_iter()
            .find(|g| g.name() == s)
            .ok_or_else(|| TreeError::UnknownGenerator(s.to_string()))
    }
}

#[derive(Clone, PartialEq, Eq)]
enum Repr {
    Finite(Arc<BTreeSet<BinString>>),
    Generator(Generator),
    /// `{σ, σ⌢0, σ⌢1 : σ ∈ inner}` for an infinite inner tree.
    Closure(Arc<Tree>),
}

/// A prefix-closed, nonempty, decidable set of binary strings.
#[derive(Clone, PartialEq, Eq)]
pub struct Tree {
    repr: Repr,
}

impl fmt::Debug for Tree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.repr {
            Repr::Finite(set) => f.debug_set().entries(set.iter()).finish(),
            Repr::Generator(g) => write!(f, "Generator({g})"),
            Repr::Closure(inner) => write!(f, "Closure({inner:?})"),
        }
    }
}

impl Tree {
    pub fn generator(g: Generator) -> Tree {
        Tree {
            repr: Repr::Generator(g),
        }
    }

    pub fn contains(&self, s: &BinString) -> bool {
        match &self.repr {
            Repr::Finite(set) => set.contains(s),
            Repr::Generator(g) => g.contains(s),
            Repr::Closure(inner) => {
                inner.contains(s) || s.parent().is_some_and(|p| inner.contains(&p))
            }
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self.repr, Repr::Finite(_))
    }

    /// The stored member set of a finite tree.
    pub fn finite_members(&self) -> Option<&BTreeSet<BinString>> {
        match &self.repr {
            Repr::Finite(set) => Some(set),
            _ => None,
        }
    }

    /// Maximum member length; `None` for infinite trees.
    pub fn height(&self) -> Option<usize> {
        self.finite_members()
            .map(|set| set.iter().map(BinString::len).max().unwrap_or(0))
    }

    /// All members of length `d`, lexicographically ordered.
    pub fn level(&self, d: usize) -> Vec<BinString> {
        let mut current = vec![BinString::empty()];
        for _ in 0..d {
            current = self.next_level(&current);
            if current.is_empty() {
                break;
            }
        }
        current
    }

    fn next_level(&self, level: &[BinString]) -> Vec<BinString> {
        level
            .iter()
            .flat_map(|s| [s.child(false), s.child(true)])
            .filter(|c| self.contains(c))
            .collect()
    }

    /// Members of length `0..=d`, one vector per length.
    pub fn levels(&self, d: usize) -> Vec<Vec<BinString>> {
        let mut out = Vec::with_capacity(d + 1);
        let mut current = vec![BinString::empty()];
        for k in 0..=d {
            if k > 0 {
                current = self.next_level(&current);
            }
            out.push(current.clone());
        }
        out
    }

    /// Members of length at most `d` in length-lexicographic order.
    pub fn members_up_to(&self, d: usize) -> Vec<BinString> {
        self.levels(d).into_iter().flatten().collect()
    }

    /// Position of `s` in the length-lexicographic enumeration of the tree.
    pub fn rank(&self, s: &BinString) -> Result<usize, TreeError> {
        if !self.contains(s) {
            return Err(TreeError::NotInTree(s.clone()));
        }
        if let (Repr::Generator(Generator::FullBinary), Some(v)) = (&self.repr, s.value()) {
            if s.len() < 63 {
                return Ok((1usize << s.len()) - 1 + v as usize);
            }
        }
        let mut before = 0;
        let mut current = vec![BinString::empty()];
        for _ in 0..s.len() {
            before += current.len();
            current = self.next_level(&current);
        }
        let pos = current
            .binary_search(s)
            .expect("member of the tree appears in its level");
        Ok(before + pos)
    }

    /// Inverse of [`Tree::rank`]: the member with the given rank, if any.
    pub fn unrank(&self, rank: usize) -> Option<BinString> {
        if let Repr::Generator(Generator::FullBinary) = &self.repr {
            let len = (usize::BITS - 1 - (rank + 1).leading_zeros()) as usize;
            let value = (rank + 1 - (1usize << len)) as u64;
            return Some(BinString::from_value(value, len));
        }
        let mut remaining = rank;
        let mut current = vec![BinString::empty()];
        loop {
            if remaining < current.len() {
                return Some(current.swap_remove(remaining));
            }
            remaining -= current.len();
            current = self.next_level(&current);
            if current.is_empty() {
                return None;
            }
        }
    }

    /// Number of members of length at most `d`.
    pub fn count_up_to(&self, d: usize) -> usize {
        if let Repr::Generator(Generator::FullBinary) = &self.repr {
            if d < usize::BITS as usize - 1 {
                return (1usize << (d + 1)) - 1;
            }
        }
        self.levels(d).iter().map(Vec::len).sum()
    }

    /// One member per line (`.` for the root) in length-lexicographic
    /// order. Infinite trees need a depth bound.
    pub fn to_text(&self, depth: Option<usize>) -> Result<String, TreeError> {
        let members: Vec<BinString> = match (self.finite_members(), depth) {
            (Some(set), None) => set.iter().cloned().collect(),
            (Some(set), Some(d)) => set.iter().filter(|s| s.len() <= d).cloned().collect(),
            (None, Some(d)) => self.members_up_to(d),
            (None, None) => return Err(TreeError::Unbounded),
        };
        let mut out = String::new();
        for m in members {
            out.push_str(&m.to_string());
            out.push('\n');
        }
        Ok(out)
    }
}

/// Checks that `nodes` is nonempty and prefix-closed and wraps it as a
/// finite tree. The witness on failure is the first offending node in
/// length-lexicographic order together with its missing parent.
pub fn validate_tree(nodes: impl IntoIterator<Item = BinString>) -> Result<Tree, TreeError> {
    let set: BTreeSet<BinString> = nodes.into_iter().collect();
    if set.is_empty() {
        return Err(TreeError::EmptyTree);
    }
    for node in &set {
        if let Some(parent) = node.parent() {
            if !set.contains(&parent) {
                return Err(TreeError::NotPrefixClosed {
                    node: node.clone(),
                    missing: parent,
                });
            }
        }
    }
    Ok(Tree {
        repr: Repr::Finite(Arc::new(set)),
    })
}

/// Parses the line-oriented tree format: one node per line, `.` for the
/// root, no blank or duplicate lines, order irrelevant.
pub fn parse_tree_text(text: &str) -> Result<Tree, TreeError> {
    let mut set = BTreeSet::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim_end_matches('\r').trim();
        let node: BinString = trimmed.parse().map_err(|e| TreeError::Syntax {
            line,
            reason: format!("{e} in {trimmed:?}"),
        })?;
        if !set.insert(node.clone()) {
            return Err(TreeError::Duplicate { line, node });
        }
    }
    validate_tree(set)
}

/// A tree in which every non-leaf has both children.
#[derive(Clone, PartialEq, Eq)]
pub struct NormalizedTree {
    tree: Tree,
}

impl fmt::Debug for NormalizedTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Normalized({:?})", self.tree)
    }
}

impl NormalizedTree {
    pub fn as_tree(&self) -> &Tree {
        &self.tree
    }

    pub fn into_tree(self) -> Tree {
        self.tree
    }

    pub fn contains(&self, s: &BinString) -> bool {
        self.tree.contains(s)
    }

    /// Whether `s` has no children. After normalization a missing `s⌢0`
    /// implies a missing `s⌢1`.
    pub fn is_leaf(&self, s: &BinString) -> Result<bool, TreeError> {
        if !self.contains(s) {
            return Err(TreeError::NotInTree(s.clone()));
        }
        Ok(!self.contains(&s.child(false)))
    }

    /// Checks the child-completion invariant on every member up to `depth`,
    /// returning the first violating node.
    pub fn find_invariant_violation(&self, depth: usize) -> Option<BinString> {
        self.tree.members_up_to(depth).into_iter().find(|s| {
            self.contains(&s.child(false)) != self.contains(&s.child(true))
        })
    }
}

impl std::ops::Deref for NormalizedTree {
    type Target = Tree;

    fn deref(&self) -> &Tree {
        &self.tree
    }
}

/// Replaces `T` with `{σ, σ⌢0, σ⌢1 : σ ∈ T}`. The set of infinite paths is
/// unchanged. The full binary tree maps to itself.
pub fn normalize(tree: &Tree) -> NormalizedTree {
    let repr = match &tree.repr {
        Repr::Finite(set) => {
            let mut out = BTreeSet::new();
            for s in set.iter() {
                out.insert(s.child(false));
                out.insert(s.child(true));
                out.insert(s.clone());
            }
            Repr::Finite(Arc::new(out))
        }
        Repr::Generator(Generator::FullBinary) => Repr::Generator(Generator::FullBinary),
        _ => Repr::Closure(Arc::new(tree.clone())),
    };
    NormalizedTree {
        tree: Tree { repr },
    }
}

/// The child-completed generator tree, e.g. `single-branch` becomes
/// `{0ⁿ, 0ⁿ1}`.
pub fn normalized_generator(g: Generator) -> NormalizedTree {
    normalize(&Tree::generator(g))
}

/// Parse then normalize.
pub fn ingest_tree_text(text: &str) -> Result<NormalizedTree, TreeError> {
    parse_tree_text(text).map(|t| normalize(&t))
}

/// Shorthand for tests: a normalized finite tree from `.`/bit literals.
///
/// Panics if the literals are not a valid tree.
pub fn finite_normalized(nodes: &[&str]) -> NormalizedTree {
    let tree = validate_tree(nodes.iter().map(|s| crate::bits::bs(s)))
        .unwrap_or_else(|e| panic!("invalid test tree {nodes:?}: {e}"));
    normalize(&tree)
}
