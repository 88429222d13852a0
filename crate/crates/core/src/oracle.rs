//! Brute-force ground truth on finite windows of the tree.
//!
//! A window is the set of tree members of length at most `d`. An
//! R-respecting map on the window is a swap assignment `j`, one bit per
//! member. Two independent enumerations of the surviving assignments are
//! provided:
//!
//! * [`enumerate_assignments`] keeps the root swapped, leaves unswapped, and
//!   an even number of swaps in each `{σ, σ⌢0, σ⌢1}` inside the window;
//! * [`enumerate_model_checked`] backtracks over all `2^n` assignments and
//!   prunes only with direct evaluations of the `R`, `L`, `P` and `c` atoms.
//!
//! Nodes of length exactly `d` that are not leaves impose nothing below
//! them; leaves anywhere in the window impose the `L` atom.

use std::collections::HashMap;
use std::fmt;

use rayon::prelude::*;
use thiserror::Error;

use crate::bits::BinString;
use crate::reductions::{
    check_parity_claim, iso_to_path, path_to_iso, swaps, IsoOracle, PathLiteral, ReductionError,
};
use crate::structure::{const_node, Node, Side, StructurePair};
use crate::tree::{NormalizedTree, Tree};

/// The members of a tree up to a depth, indexed in length-lexicographic order.
#[derive(Debug, Clone)]
pub struct Window {
    pair: StructurePair,
    depth: usize,
    nodes: Vec<BinString>,
    index: HashMap<BinString, usize>,
    leaf: Vec<bool>,
    /// `(σ⌢0, σ⌢1)` when both lie in the window.
    children: Vec<Option<(usize, usize)>>,
}

impl Window {
    pub fn new(tree: &NormalizedTree, depth: usize) -> Self {
        let nodes = tree.members_up_to(depth);
        let index: HashMap<BinString, usize> =
            nodes.iter().cloned().enumerate().map(|(k, s)| (s, k)).collect();
        let leaf = nodes
            .iter()
            .map(|s| tree.is_leaf(s).expect("window member"))
            .collect();
        let children = nodes
            .iter()
            .map(|s| {
                let left = index.get(&s.child(false))?;
                let right = index.get(&s.child(true))?;
                Some((*left, *right))
            })
            .collect();
        Window {
            pair: StructurePair::new(tree.clone()),
            depth,
            nodes,
            index,
            leaf,
            children,
        }
    }

    pub fn tree(&self) -> &NormalizedTree {
        self.pair.tree()
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn nodes(&self) -> &[BinString] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn position(&self, sigma: &BinString) -> Option<usize> {
        self.index.get(sigma).copied()
    }

    /// View an assignment as a map on the windowed universe.
    pub fn iso<'a>(&'a self, a: &'a TruncatedAssignment) -> AssignmentIso<'a> {
        AssignmentIso { window: self, a }
    }

    fn image(&self, bits: &[bool], n: &Node) -> Node {
        let k = self.index[&n.sigma];
        Node::new(n.sigma.clone(), n.bit ^ bits[k])
    }

    /// The `c`, `R` and `L` atoms at node `k`, evaluated directly.
    fn unary_atoms_ok(&self, k: usize, bits: &[bool]) -> bool {
        let sigma = &self.nodes[k];
        let pair = &self.pair;
        if sigma.is_empty() && self.image(bits, &const_node(Side::M)) != const_node(Side::N) {
            return false;
        }
        [false, true].into_iter().all(|b| {
            let n = Node::new(sigma.clone(), b);
            let fn_ = self.image(bits, &n);
            pair.eval_r(sigma, &n).expect("window member")
                == pair.eval_r(sigma, &fn_).expect("window member")
                && pair.eval_l(&n).expect("window member")
                    == pair.eval_l(&fn_).expect("window member")
        })
    }

    /// Every `P` atom over `(σ, σ⌢0, σ⌢1)` for the window node `k`,
    /// evaluated directly on all eight bit patterns.
    fn p_atoms_ok(&self, k: usize, bits: &[bool]) -> bool {
        let Some((l, r)) = self.children[k] else {
            return true;
        };
        (0u8..8).all(|pattern| {
            let x = Node::new(self.nodes[k].clone(), pattern & 4 != 0);
            let y = Node::new(self.nodes[l].clone(), pattern & 2 != 0);
            let z = Node::new(self.nodes[r].clone(), pattern & 1 != 0);
            let (fx, fy, fz) = (
                self.image(bits, &x),
                self.image(bits, &y),
                self.image(bits, &z),
            );
            self.pair.eval_p(&x, &y, &z).expect("window members")
                == self.pair.eval_p(&fx, &fy, &fz).expect("window members")
        })
    }
}

/// A swap indicator on every member of a window, in window order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TruncatedAssignment {
    pub depth: usize,
    pub bits: Vec<bool>,
}

impl TruncatedAssignment {
    /// The assignment swapping exactly the window members in `swapped`.
    pub fn from_swapped<'a>(
        window: &Window,
        swapped: impl IntoIterator<Item = &'a BinString>,
    ) -> Option<Self> {
        let mut bits = vec![false; window.len()];
        for s in swapped {
            bits[window.position(s)?] = true;
        }
        Some(TruncatedAssignment {
            depth: window.depth,
            bits,
        })
    }

    pub fn swapped<'w>(&self, window: &'w Window) -> Vec<&'w BinString> {
        window
            .nodes
            .iter()
            .zip(&self.bits)
            .filter(|(_, &b)| b)
            .map(|(s, _)| s)
            .collect()
    }
}

/// The `j` bits over window order, e.g. `1100100`.
impl fmt::Display for TruncatedAssignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.bits {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// A [`TruncatedAssignment`] as an [`IsoOracle`]; undefined outside its window.
#[derive(Clone, Copy)]
pub struct AssignmentIso<'a> {
    window: &'a Window,
    a: &'a TruncatedAssignment,
}

impl IsoOracle for AssignmentIso<'_> {
    fn image(&self, n: &Node) -> Result<Node, ReductionError> {
        match self.window.position(&n.sigma) {
            Some(k) => Ok(Node::new(n.sigma.clone(), n.bit ^ self.a.bits[k])),
            None => Err(ReductionError::Undefined(n.clone())),
        }
    }
}

/// Whether the map induced by `a` preserves every `R`, `L` and `c` atom and
/// every `P` atom lying inside the window, each checked by direct
/// evaluation.
pub fn model_check(tree: &NormalizedTree, a: &TruncatedAssignment) -> bool {
    let window = Window::new(tree, a.depth);
    model_check_in(&window, a)
}

pub fn model_check_in(window: &Window, a: &TruncatedAssignment) -> bool {
    a.bits.len() == window.len()
        && (0..window.len())
            .all(|k| window.unary_atoms_ok(k, &a.bits) && window.p_atoms_ok(k, &a.bits))
}

/// All assignments on the depth-`d` window with the root swapped, leaves
/// unswapped, and even parity at each non-leaf whose children are in the
/// window. Ordered lexicographically by bits.
pub fn enumerate_assignments(tree: &NormalizedTree, d: usize) -> Vec<TruncatedAssignment> {
    enumerate_assignments_in(&Window::new(tree, d))
}

pub fn enumerate_assignments_in(window: &Window) -> Vec<TruncatedAssignment> {
    // Parent of each right child, used to force its bit by parity.
    let mut parity_parent = vec![None; window.len()];
    for (k, ch) in window.children.iter().enumerate() {
        if let Some((l, r)) = ch {
            parity_parent[*r] = Some((k, *l));
        }
    }
    let mut out = Vec::new();
    let mut bits = Vec::with_capacity(window.len());
    parity_search(window, &parity_parent, &mut bits, &mut out);
    out
}

fn parity_search(
    window: &Window,
    parity_parent: &[Option<(usize, usize)>],
    bits: &mut Vec<bool>,
    out: &mut Vec<TruncatedAssignment>,
) {
    let k = bits.len();
    if k == window.len() {
        out.push(TruncatedAssignment {
            depth: window.depth,
            bits: bits.clone(),
        });
        return;
    }
    let candidates: &[bool] = if k == 0 {
        &[true]
    } else if let Some((p, l)) = parity_parent[k] {
        if bits[p] ^ bits[l] {
            &[true]
        } else {
            &[false]
        }
    } else {
        &[false, true]
    };
    for &b in candidates {
        if b && window.leaf[k] {
            continue;
        }
        bits.push(b);
        parity_search(window, parity_parent, bits, out);
        bits.pop();
    }
}

/// Backtracking search over all assignments on the depth-`d` window,
/// pruning only by atoms that are fully decided. No parity reasoning is
/// used. Ordered lexicographically by bits.
pub fn enumerate_model_checked(tree: &NormalizedTree, d: usize) -> Vec<TruncatedAssignment> {
    enumerate_model_checked_in(&Window::new(tree, d))
}

pub fn enumerate_model_checked_in(window: &Window) -> Vec<TruncatedAssignment> {
    // A P-scope is decided once its right child, the last in window order, is.
    let mut closes = vec![Vec::new(); window.len()];
    for (k, ch) in window.children.iter().enumerate() {
        if let Some((_, r)) = ch {
            closes[*r].push(k);
        }
    }
    let mut out = Vec::new();
    let mut bits = vec![false; window.len()];
    model_search(window, &closes, 0, &mut bits, &mut out);
    out
}

fn model_search(
    window: &Window,
    closes: &[Vec<usize>],
    k: usize,
    bits: &mut Vec<bool>,
    out: &mut Vec<TruncatedAssignment>,
) {
    if k == window.len() {
        let a = TruncatedAssignment {
            depth: window.depth,
            bits: bits.clone(),
        };
        debug_assert!(model_check_in(window, &a));
        out.push(a);
        return;
    }
    for b in [false, true] {
        bits[k] = b;
        if window.unary_atoms_ok(k, bits) && closes[k].iter().all(|&p| window.p_atoms_ok(p, bits)) {
            model_search(window, closes, k + 1, bits, out);
        }
    }
    bits[k] = false;
}

/// Number of assignments [`enumerate_assignments`] would produce, by
/// dynamic programming over subtrees. Saturates at `u128::MAX`.
pub fn count_assignments(tree: &NormalizedTree, d: usize) -> u128 {
    let window = Window::new(tree, d);
    // counts[k] = (count with j = 0, count with j = 1) for the subtree at k.
    let mut counts = vec![(0u128, 0u128); window.len()];
    for k in (0..window.len()).rev() {
        counts[k] = if window.leaf[k] {
            (1, 0)
        } else if let Some((l, r)) = window.children[k] {
            let (l0, l1) = counts[l];
            let (r0, r1) = counts[r];
            let even = l0.saturating_mul(r0).saturating_add(l1.saturating_mul(r1));
            let odd = l0.saturating_mul(r1).saturating_add(l1.saturating_mul(r0));
            (even, odd)
        } else {
            (1, 1)
        };
    }
    counts.first().map_or(0, |c| c.1)
}

/// The depth-`d` approximants of `[T]`: all members of length `d`.
pub fn enumerate_paths(tree: &Tree, d: usize) -> Vec<BinString> {
    tree.level(d)
}

/// Length-`d` members that are not leaves, i.e. those a path through the
/// window can still pass through.
pub fn live_paths(tree: &NormalizedTree, d: usize) -> Vec<BinString> {
    enumerate_paths(tree, d)
        .into_iter()
        .filter(|s| !tree.is_leaf(s).expect("level member"))
        .collect()
}

/// The truncation of the canonical isomorphism of `path` to the window.
pub fn canonical_assignment(
    window: &Window,
    path: &BinString,
) -> Result<TruncatedAssignment, ReductionError> {
    let f = path_to_iso(window.tree(), PathLiteral::exact(path.clone()));
    let bits = window
        .nodes
        .iter()
        .map(|s| swaps(&f, s))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(TruncatedAssignment {
        depth: window.depth,
        bits,
    })
}

/// Root swapped, leaves unswapped, and [`check_parity_claim`] at every
/// non-leaf with both children in the window.
pub fn passes_claim_filter(window: &Window, a: &TruncatedAssignment) -> bool {
    let f = window.iso(a);
    let tree = window.tree();
    a.bits.len() == window.len()
        && a.bits.first() == Some(&true)
        && (0..window.len()).all(|k| {
            if window.leaf[k] {
                !a.bits[k]
            } else if window.children[k].is_some() {
                check_parity_claim(tree, &f, &window.nodes[k]).expect("window non-leaf")
            } else {
                true
            }
        })
}

/// Compares the two sides scope by scope instead of assignment by
/// assignment. Both filters are conjunctions of constraints on the same
/// scopes (a single node, or `{σ, σ⌢0, σ⌢1}`), so equal local relations
/// give equal global sets. Returns a line per disagreeing local pattern.
pub fn scope_mismatches(tree: &NormalizedTree, d: usize) -> Vec<String> {
    let window = Window::new(tree, d);
    let mut out = Vec::new();
    let mut bits = vec![false; window.len()];
    for k in 0..window.len() {
        for b in [false, true] {
            bits[k] = b;
            let claim = if k == 0 { b } else { !(window.leaf[k] && b) };
            if claim != window.unary_atoms_ok(k, &bits) {
                out.push(format!("scope {} j={}", window.nodes[k], b as u8));
            }
        }
        bits[k] = false;
        if let Some((l, r)) = window.children[k] {
            for pattern in 0u8..8 {
                bits[k] = pattern & 4 != 0;
                bits[l] = pattern & 2 != 0;
                bits[r] = pattern & 1 != 0;
                let a = TruncatedAssignment {
                    depth: d,
                    bits: bits.clone(),
                };
                let claim = check_parity_claim(tree, &window.iso(&a), &window.nodes[k])
                    .expect("window non-leaf");
                if claim != window.p_atoms_ok(k, &bits) {
                    out.push(format!("scope {} j={pattern:03b}", window.nodes[k]));
                }
            }
            bits[k] = false;
            bits[l] = false;
            bits[r] = false;
        }
    }
    out
}

/// Limits for [`verify_equivalence`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VerifyConfig {
    pub max_depth: usize,
    pub max_window_nodes: usize,
    pub max_assignments: u128,
    pub parallel: bool,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            max_depth: 6,
            max_window_nodes: 127,
            max_assignments: 1 << 16,
            parallel: true,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum VerifyError {
    #[error("depth {depth} exceeds the configured maximum {max}")]
    DepthTooLarge { depth: usize, max: usize },
    #[error("window has {nodes} nodes, more than the configured maximum {max}")]
    WindowTooLarge { nodes: usize, max: usize },
    #[error("window admits {count} assignments, more than the configured maximum {max}")]
    TooManyAssignments { count: u128, max: u128 },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EquivalenceReport {
    pub depth: usize,
    pub path_count: usize,
    pub assignment_count: usize,
    pub canonical_count: usize,
    pub mismatches: Vec<String>,
}

impl EquivalenceReport {
    pub fn is_success(&self) -> bool {
        self.mismatches.is_empty()
    }
}

/// Fixed-field text block: one `key value` line per count, then one
/// `mismatch ...` line per violation.
impl fmt::Display for EquivalenceReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "depth {}", self.depth)?;
        writeln!(f, "path_count {}", self.path_count)?;
        writeln!(f, "assignment_count {}", self.assignment_count)?;
        writeln!(f, "canonical_count {}", self.canonical_count)?;
        writeln!(f, "mismatch_count {}", self.mismatches.len())?;
        for m in &self.mismatches {
            writeln!(f, "mismatch {m}")?;
        }
        Ok(())
    }
}

fn collect_mismatches<T, F>(items: &[T], parallel: bool, check: F) -> Vec<String>
where
    T: Sync,
    F: Fn(&T) -> Option<String> + Send + Sync,
{
    if parallel {
        items.par_iter().filter_map(check).collect()
    } else {
        items.iter().filter_map(check).collect()
    }
}

/// Checks the finite shadow of `Q ≡_w Iso(𝑀,𝑁)` on the depth-`d` window:
///
/// 1. every surviving assignment, followed from the root, traces a
///    length-`d` member of the tree;
/// 2. every live length-`d` path yields a canonical assignment that
///    survives both filters and traces back to the same path;
/// 3. the parity-filtered and model-checked enumerations coincide.
pub fn verify_equivalence(
    tree: &NormalizedTree,
    d: usize,
    config: &VerifyConfig,
) -> Result<EquivalenceReport, VerifyError> {
    if d > config.max_depth {
        return Err(VerifyError::DepthTooLarge {
            depth: d,
            max: config.max_depth,
        });
    }
    let window = Window::new(tree, d);
    if window.len() > config.max_window_nodes {
        return Err(VerifyError::WindowTooLarge {
            nodes: window.len(),
            max: config.max_window_nodes,
        });
    }
    let count = count_assignments(tree, d);
    if count > config.max_assignments {
        return Err(VerifyError::TooManyAssignments {
            count,
            max: config.max_assignments,
        });
    }

    let claimed = enumerate_assignments_in(&window);
    let checked = enumerate_model_checked_in(&window);
    let mut mismatches = Vec::new();

    mismatches.extend(collect_mismatches(&claimed, config.parallel, |a| {
        match iso_to_path(tree, &window.iso(a), d) {
            Ok(p) if p.len() == d && p.prefixes().all(|q| tree.contains(&q)) => None,
            Ok(p) => Some(format!("ray {a} traced {p}, not a depth-{d} member")),
            Err(e) => Some(format!("ray {a}: {e}")),
        }
    }));

    let paths = live_paths(tree, d);
    mismatches.extend(collect_mismatches(&paths, config.parallel, |p| {
        let a = match canonical_assignment(&window, p) {
            Ok(a) => a,
            Err(e) => return Some(format!("canonical {p}: {e}")),
        };
        if !passes_claim_filter(&window, &a) {
            return Some(format!("canonical {p} ({a}) fails the parity filter"));
        }
        if !model_check_in(&window, &a) {
            return Some(format!("canonical {p} ({a}) fails the model check"));
        }
        match iso_to_path(tree, &window.iso(&a), d) {
            Ok(back) if back == *p => None,
            Ok(back) => Some(format!("canonical {p} ({a}) traces back to {back}")),
            Err(e) => Some(format!("canonical {p} ({a}): {e}")),
        }
    }));
    let mut canonical: Vec<TruncatedAssignment> = paths
        .iter()
        .filter_map(|p| canonical_assignment(&window, p).ok())
        .filter(|a| passes_claim_filter(&window, a) && model_check_in(&window, a))
        .collect();
    canonical.sort();
    canonical.dedup();

    mismatches.extend(set_differences(&claimed, &checked));

    Ok(EquivalenceReport {
        depth: d,
        path_count: paths.len(),
        assignment_count: claimed.len(),
        canonical_count: canonical.len(),
        mismatches,
    })
}

/// Merge-compares two sorted assignment lists.
fn set_differences(claimed: &[TruncatedAssignment], checked: &[TruncatedAssignment]) -> Vec<String> {
    let mut out = Vec::new();
    let (mut i, mut k) = (0, 0);
    while i < claimed.len() || k < checked.len() {
        match (claimed.get(i), checked.get(k)) {
            (Some(a), Some(b)) if a == b => {
                i += 1;
                k += 1;
            }
            (Some(a), Some(b)) if a < b => {
                out.push(format!("parity-only {a}"));
                i += 1;
            }
            (Some(a), None) => {
                out.push(format!("parity-only {a}"));
                i += 1;
            }
            (_, Some(b)) => {
                out.push(format!("model-only {b}"));
                k += 1;
            }
            (None, None) => unreachable!(),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::bs;
    use crate::tree::{finite_normalized, normalized_generator, Generator};

    fn full() -> NormalizedTree {
        normalized_generator(Generator::FullBinary)
    }

    fn assignment(tree: &NormalizedTree, d: usize, swapped: &[&str]) -> TruncatedAssignment {
        let window = Window::new(tree, d);
        let swapped: Vec<BinString> = swapped.iter().map(|s| bs(s)).collect();
        TruncatedAssignment::from_swapped(&window, &swapped).unwrap()
    }

    #[test]
    fn enumerate_examples() {
        assert_eq!(enumerate_assignments(&full(), 2).len(), 8);
        assert!(enumerate_assignments(&finite_normalized(&["."]), 1).is_empty());
        let d0 = enumerate_assignments(&full(), 0);
        assert_eq!(d0.len(), 1);
        assert_eq!(d0[0].bits, [true]);
    }

    #[test]
    fn enumeration_order_is_lexicographic() {
        let all = enumerate_assignments(&full(), 2);
        let mut sorted = all.clone();
        sorted.sort();
        assert_eq!(all, sorted);
        assert_eq!(all[0].to_string(), "1010001");
    }

    #[test]
    fn paths_examples() {
        let full_tree = Tree::generator(Generator::FullBinary);
        assert_eq!(enumerate_paths(&full_tree, 2).len(), 4);
        assert!(enumerate_paths(&finite_normalized(&["."]), 2).is_empty());
        assert_eq!(
            enumerate_paths(&finite_normalized(&[".", "0"]), 2),
            [bs("00"), bs("01")]
        );
    }

    #[test]
    fn model_check_examples() {
        let t = full();
        let good = assignment(&t, 2, &[".", "0", "00"]);
        assert!(model_check(&t, &good));
        let bad = assignment(&t, 2, &[".", "0"]);
        assert!(!model_check(&t, &bad));
        let unswapped_root = assignment(&t, 2, &["0", "00"]);
        assert!(!model_check(&t, &unswapped_root));
    }

    #[test]
    fn verify_examples() {
        let cfg = VerifyConfig::default();
        let r = verify_equivalence(&full(), 2, &cfg).unwrap();
        assert_eq!(
            (r.path_count, r.assignment_count, r.canonical_count),
            (4, 8, 4)
        );
        assert!(r.is_success(), "{r}");

        let r = verify_equivalence(&finite_normalized(&["."]), 1, &cfg).unwrap();
        assert_eq!((r.path_count, r.assignment_count), (0, 0));
        assert!(r.is_success());

        // Both 00 and 01 are leaves: no isomorphism and no live path.
        let r = verify_equivalence(&finite_normalized(&[".", "0"]), 2, &cfg).unwrap();
        assert_eq!(
            (r.path_count, r.assignment_count, r.canonical_count),
            (0, 0, 0)
        );
        assert!(r.is_success());
    }

    #[test]
    fn verify_limits() {
        let cfg = VerifyConfig::default();
        assert!(matches!(
            verify_equivalence(&full(), 7, &cfg),
            Err(VerifyError::DepthTooLarge { .. })
        ));
        assert!(matches!(
            verify_equivalence(&full(), 5, &cfg),
            Err(VerifyError::TooManyAssignments { .. })
        ));
    }

    #[test]
    fn report_format() {
        let r = verify_equivalence(&full(), 1, &VerifyConfig::default()).unwrap();
        assert_eq!(
            r.to_string(),
            "depth 1\npath_count 2\nassignment_count 2\ncanonical_count 2\nmismatch_count 0\n"
        );
    }

    #[test]
    fn set_differences_reports_both_sides() {
        let a = |s: &str| TruncatedAssignment {
            depth: 0,
            bits: s.chars().map(|c| c == '1').collect(),
        };
        let out = set_differences(&[a("00"), a("01")], &[a("01"), a("11")]);
        assert_eq!(out, ["parity-only 00", "model-only 11"]);
    }

    #[test]
    fn dp_count_matches_enumeration() {
        for d in 0..=4 {
            assert_eq!(
                count_assignments(&full(), d),
                enumerate_assignments(&full(), d).len() as u128
            );
        }
        assert_eq!(count_assignments(&full(), 6), 1u128 << 63);
    }

    #[test]
    fn scopes_agree_on_full_tree() {
        assert!(scope_mismatches(&full(), 5).is_empty());
    }
}
