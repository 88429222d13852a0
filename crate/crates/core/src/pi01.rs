//! Π⁰₁ presentations: monotone prefix checkers for `[T]` and for the class
//! of isomorphism pairs `(f₀, f₁)` between 𝑀 and 𝑁.
//!
//! A pair is coded as one sequence by interleaving, `x(2n) = f₀(n)` and
//! `x(2n+1) = f₁(n)`, where both arguments and values are universe indices
//! (`2·rank(σ) + i`). A prefix is rejected as soon as some fully decided
//! atom already refutes "f₀ is an embedding and f₁ is its inverse"; the
//! first refuting position fixes the verdict, so extensions of a rejected
//! prefix report the same clause and witness.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use thiserror::Error;

use crate::bits::BinString;
use crate::reductions::{path_to_iso, IsoOracle, PathLiteral, ReductionError};
use crate::structure::{const_node, Node, Side, StructurePair};
use crate::tree::{NormalizedTree, Tree};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Pi01Error {
    #[error("map domain is not an initial segment of the naturals: {missing} is missing")]
    NonInitialSegmentDomain { missing: usize },
    #[error("position {position}: value {value} does not index a universe element")]
    UndecodableIndex { position: usize, value: usize },
    #[error("{0} is not in the tree")]
    RejectedInput(BinString),
    #[error(transparent)]
    Reduction(#[from] ReductionError),
}

/// A finite initial segment of an element of Baire space.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct BairePrefix {
    values: Vec<usize>,
}

impl BairePrefix {
    pub fn new(values: Vec<usize>) -> Self {
        BairePrefix { values }
    }

    pub fn values(&self) -> &[usize] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// The decided values of `f₀`.
    pub fn f0(&self) -> Vec<usize> {
        self.values.iter().step_by(2).copied().collect()
    }

    /// The decided values of `f₁`.
    pub fn f1(&self) -> Vec<usize> {
        self.values.iter().skip(1).step_by(2).copied().collect()
    }

    pub fn to_csv(&self) -> String {
        self.values
            .iter()
            .map(ToString::to_string)
            .collect::<Vec<_>>()
            .join(",")
    }
}

impl fmt::Display for BairePrefix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_csv())
    }
}

fn initial_segment(map: &BTreeMap<usize, usize>) -> Result<Vec<usize>, Pi01Error> {
    map.iter()
        .enumerate()
        .map(|(expected, (&k, &v))| {
            if k == expected {
                Ok(v)
            } else {
                Err(Pi01Error::NonInitialSegmentDomain { missing: expected })
            }
        })
        .collect()
}

/// Interleaves two partial maps with initial-segment domains.
///
/// The result is the longest prefix of the interleaving that both maps
/// determine: `2·min(|f₀|,|f₁|)` values, plus `f₀`'s next value when `f₀`
/// is the longer one.
pub fn encode_pair(
    f0: &BTreeMap<usize, usize>,
    f1: &BTreeMap<usize, usize>,
) -> Result<BairePrefix, Pi01Error> {
    Ok(encode_slices(&initial_segment(f0)?, &initial_segment(f1)?))
}

/// [`encode_pair`] for maps already given as value lists.
pub fn encode_slices(f0: &[usize], f1: &[usize]) -> BairePrefix {
    let common = f0.len().min(f1.len());
    let mut values = Vec::with_capacity(2 * common + 1);
    for k in 0..common {
        values.push(f0[k]);
        values.push(f1[k]);
    }
    if f0.len() > common {
        values.push(f0[common]);
    }
    BairePrefix { values }
}

/// Stable identifiers for the refuted clause of a rejection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Clause {
    /// `f₀(c^𝑀) = c^𝑁` (and `f₁(c^𝑁) = c^𝑀`).
    Const,
    /// Each `R_σ` is preserved.
    R,
    /// `L` and its negation are preserved.
    L,
    /// `P` and its negation are preserved.
    P,
    /// The maps are injective.
    Inj,
    /// `f₁ ∘ f₀` and `f₀ ∘ f₁` are identities.
    Inv,
    /// A value reached the configured index bound.
    Bound,
    /// A bit-string prefix left the tree.
    Tree,
}

impl Clause {
    pub fn id(self) -> &'static str {
        match self {
            Clause::Const => "C-CONST",
            Clause::R => "C-R",
            Clause::L => "C-L",
            Clause::P => "C-P",
            Clause::Inj => "C-INJ",
            Clause::Inv => "C-INV",
            Clause::Bound => "C-BOUND",
            Clause::Tree => "C-TREE",
        }
    }
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PrefixVerdict {
    Accept,
    Reject { clause: Clause, witness: String },
}

impl PrefixVerdict {
    pub fn is_accept(&self) -> bool {
        matches!(self, PrefixVerdict::Accept)
    }

    pub fn is_reject(&self) -> bool {
        !self.is_accept()
    }

    pub fn clause(&self) -> Option<Clause> {
        match self {
            PrefixVerdict::Accept => None,
            PrefixVerdict::Reject { clause, .. } => Some(*clause),
        }
    }
}

/// `ACCEPT` or `REJECT <clause-id> <witness>`.
impl fmt::Display for PrefixVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PrefixVerdict::Accept => f.write_str("ACCEPT"),
            PrefixVerdict::Reject { clause, witness } => write!(f, "REJECT {clause} {witness}"),
        }
    }
}

/// Rejects iff `p ∉ T`, naming the shortest prefix of `p` outside the tree.
pub fn tree_prefix_check(tree: &Tree, p: &BinString) -> PrefixVerdict {
    match p.prefixes().find(|q| !tree.contains(q)) {
        None => PrefixVerdict::Accept,
        Some(q) => PrefixVerdict::Reject {
            clause: Clause::Tree,
            witness: q.to_string(),
        },
    }
}

/// `2·|universe to depth d|`, the default hard bound on decoded values.
///
/// Any value an isomorphism can take at an argument of length `≤ d` is
/// below `|universe to depth d|`, so this bound never rejects a prefix of
/// a genuine isomorphism pair whose arguments lie in that window.
pub fn default_max_index(tree: &Tree, depth: usize) -> usize {
    2 * (2 * tree.count_up_to(depth))
}

/// Lazily grown length-lexicographic enumeration of the universe.
#[derive(Debug, Clone)]
struct Enumeration {
    members: Vec<BinString>,
    frontier: Vec<BinString>,
    exhausted: bool,
}

impl Enumeration {
    fn new() -> Self {
        Enumeration {
            members: vec![BinString::empty()],
            frontier: vec![BinString::empty()],
            exhausted: false,
        }
    }

    fn member(&mut self, tree: &Tree, rank: usize) -> Option<&BinString> {
        while rank >= self.members.len() && !self.exhausted {
            let next: Vec<BinString> = self
                .frontier
                .iter()
                .flat_map(|s| [s.child(false), s.child(true)])
                .filter(|c| tree.contains(c))
                .collect();
            self.exhausted = next.is_empty();
            self.members.extend(next.iter().cloned());
            self.frontier = next;
        }
        self.members.get(rank)
    }

    fn node(&mut self, tree: &Tree, index: usize) -> Option<Node> {
        self.member(tree, index / 2)
            .map(|s| Node::new(s.clone(), index % 2 == 1))
    }
}

/// Which half of the pair a position belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Half {
    F0,
    F1,
}

impl Half {
    fn name(self) -> &'static str {
        match self {
            Half::F0 => "f0",
            Half::F1 => "f1",
        }
    }

    fn other(self) -> Half {
        match self {
            Half::F0 => Half::F1,
            Half::F1 => Half::F0,
        }
    }
}

#[derive(Debug, Clone, Default)]
struct PartialMap {
    forward: HashMap<Node, Node>,
    backward: HashMap<Node, Node>,
}

/// Incremental form of [`iso_prefix_check`]: push one Baire value at a
/// time. Once rejected, the verdict never changes.
#[derive(Debug, Clone)]
pub struct IsoPrefixChecker {
    pair: StructurePair,
    max_index: usize,
    universe: Enumeration,
    maps: [PartialMap; 2],
    len: usize,
    verdict: PrefixVerdict,
}

impl IsoPrefixChecker {
    pub fn new(tree: &NormalizedTree, max_index: usize) -> Self {
        IsoPrefixChecker {
            pair: StructurePair::new(tree.clone()),
            max_index,
            universe: Enumeration::new(),
            maps: [PartialMap::default(), PartialMap::default()],
            len: 0,
            verdict: PrefixVerdict::Accept,
        }
    }

    pub fn verdict(&self) -> &PrefixVerdict {
        &self.verdict
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    fn map(&self, half: Half) -> &PartialMap {
        &self.maps[half as usize]
    }

    pub fn push(&mut self, value: usize) -> Result<&PrefixVerdict, Pi01Error> {
        let position = self.len;
        self.len += 1;
        if self.verdict.is_reject() {
            return Ok(&self.verdict);
        }
        let half = if position.is_multiple_of(2) { Half::F0 } else { Half::F1 };
        let tree = self.pair.tree().as_tree().clone();
        // Arguments outside a finite universe carry no constraint.
        let Some(arg) = self.universe.node(&tree, position / 2) else {
            return Ok(&self.verdict);
        };
        if let Some((clause, witness)) = self.refute(half, &arg, value, position)? {
            self.verdict = PrefixVerdict::Reject { clause, witness };
            return Ok(&self.verdict);
        }
        let image = self
            .universe
            .node(&tree, value)
            .expect("decoded during refutation");
        let map = &mut self.maps[half as usize];
        map.forward.insert(arg.clone(), image.clone());
        map.backward.insert(image, arg);
        Ok(&self.verdict)
    }

    fn refute(
        &mut self,
        half: Half,
        arg: &Node,
        value: usize,
        position: usize,
    ) -> Result<Option<(Clause, String)>, Pi01Error> {
        let name = half.name();
        if value >= self.max_index {
            return Ok(Some((
                Clause::Bound,
                format!("{name}{arg}={value}>={}", self.max_index),
            )));
        }
        let tree = self.pair.tree().as_tree().clone();
        let image = self
            .universe
            .node(&tree, value)
            .ok_or(Pi01Error::UndecodableIndex { position, value })?;
        let map = self.map(half);

        if image.sigma != arg.sigma {
            return Ok(Some((Clause::R, format!("{name}{arg}={image}"))));
        }
        if let Some(other) = map.backward.get(&image) {
            return Ok(Some((
                Clause::Inj,
                format!("{name}{other}={name}{arg}={image}"),
            )));
        }
        let (from, to) = match half {
            Half::F0 => (const_node(Side::M), const_node(Side::N)),
            Half::F1 => (const_node(Side::N), const_node(Side::M)),
        };
        if *arg == from && image != to {
            return Ok(Some((Clause::Const, format!("{name}{arg}={image}"))));
        }
        if self.pair.eval_l(arg).expect("universe element") != self.pair.eval_l(&image).expect("universe element")
        {
            return Ok(Some((Clause::L, format!("{name}{arg}={image}"))));
        }
        if let Some(witness) = self.refute_p(half, arg, &image) {
            return Ok(Some((Clause::P, witness)));
        }
        let other = self.map(half.other());
        let other_name = half.other().name();
        if let Some(back) = other.forward.get(&image) {
            if back != arg {
                return Ok(Some((
                    Clause::Inv,
                    format!("{other_name}({name}{arg})={back}"),
                )));
            }
        }
        if let Some(pre) = other.backward.get(arg) {
            if *pre != image {
                return Ok(Some((
                    Clause::Inv,
                    format!("{name}({other_name}{pre})={image}"),
                )));
            }
        }
        Ok(None)
    }

    /// Checks every `P`-triple through `arg` whose other two arguments are
    /// already decided. Since `R` holds on all decided arguments, only
    /// triples shaped `(τ, τ⌢0, τ⌢1)` can change truth value.
    fn refute_p(&self, half: Half, arg: &Node, image: &Node) -> Option<String> {
        let map = &self.map(half).forward;
        let lookup = |n: &Node| -> Option<Node> {
            if n == arg {
                Some(image.clone())
            } else {
                map.get(n).cloned()
            }
        };
        let sigma = &arg.sigma;
        let mut triples: Vec<[Node; 3]> = Vec::new();
        if !self.pair.tree().is_leaf(sigma).expect("universe element") {
            let (left, right) = (sigma.child(false), sigma.child(true));
            for (b1, b2) in [(false, false), (false, true), (true, false), (true, true)] {
                triples.push([
                    arg.clone(),
                    Node::new(left.clone(), b1),
                    Node::new(right.clone(), b2),
                ]);
            }
        }
        if let Some(parent) = sigma.parent() {
            let last = sigma.bit(sigma.len() - 1).expect("nonempty");
            let sibling = parent.child(!last);
            for (b0, bs) in [(false, false), (false, true), (true, false), (true, true)] {
                let p = Node::new(parent.clone(), b0);
                let s = Node::new(sibling.clone(), bs);
                triples.push(if last {
                    [p, s, arg.clone()]
                } else {
                    [p, arg.clone(), s]
                });
            }
        }
        for [x, y, z] in triples {
            let (Some(fx), Some(fy), Some(fz)) = (lookup(&x), lookup(&y), lookup(&z)) else {
                continue;
            };
            let before = self.pair.eval_p(&x, &y, &z).expect("universe elements");
            let after = self.pair.eval_p(&fx, &fy, &fz).expect("universe elements");
            if before != after {
                return Some(format!(
                    "{}[{x},{y},{z}]->[{fx},{fy},{fz}]",
                    half.name()
                ));
            }
        }
        None
    }
}

/// Checks a coded prefix of `(f₀, f₁)` against the Π⁰₁ definition of the
/// isomorphism class. Values at or above `max_index` are rejected outright.
pub fn iso_prefix_check(
    tree: &NormalizedTree,
    p: &BairePrefix,
    max_index: usize,
) -> Result<PrefixVerdict, Pi01Error> {
    let mut checker = IsoPrefixChecker::new(tree, max_index);
    for &v in p.values() {
        if checker.push(v)?.is_reject() {
            break;
        }
    }
    Ok(checker.verdict().clone())
}

/// Codes `f` and its inverse on the universe to depth `depth`.
pub fn encode_iso<F: IsoOracle + ?Sized>(
    tree: &NormalizedTree,
    f: &F,
    depth: usize,
) -> Result<BairePrefix, Pi01Error> {
    let pair = StructurePair::new(tree.clone());
    let universe = pair.universe(depth);
    let mut f0 = Vec::with_capacity(universe.len());
    let mut f1 = vec![None; universe.len()];
    for (k, n) in universe.iter().enumerate() {
        let image = f.image(n)?;
        let idx = pair
            .node_index(&image)
            .map_err(|_| ReductionError::NotInTree(image.sigma.clone()))?;
        f0.push(idx);
        if let Some(slot) = f1.get_mut(idx) {
            *slot = Some(k);
        }
    }
    let f1 = f1
        .into_iter()
        .enumerate()
        .map(|(k, pre)| {
            pre.ok_or_else(|| {
                Pi01Error::Reduction(ReductionError::FiberNotBijective {
                    sigma: universe[k].sigma.clone(),
                })
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(encode_slices(&f0, &f1))
}

/// Finite shadow of "every path computes an isomorphism": from an accepted
/// tree prefix `x`, code the canonical isomorphism on every node whose
/// answer `x` determines.
///
/// Nodes of length `≤ |x|` are determined by `x`. When `x` is a leaf no
/// path extends it; its own node is then left out so that the output stays
/// a prefix the isomorphism checker accepts.
pub fn pipeline_3_to_2(tree: &NormalizedTree, x: &BinString) -> Result<BairePrefix, Pi01Error> {
    if !tree.contains(x) {
        return Err(Pi01Error::RejectedInput(x.clone()));
    }
    let leaf = tree.is_leaf(x).expect("member");
    let depth = if leaf { x.len() - 1 } else { x.len() };
    let f = path_to_iso(tree, PathLiteral::exact(x.clone()));
    encode_iso(tree, &f, depth)
}
