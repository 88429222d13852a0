//! The two effective reductions between tree paths and isomorphisms
//! `𝑀 → 𝑁`.
//!
//! A path `g` yields the canonical isomorphism that swaps exactly the nodes
//! `σ ≺ g`. An isomorphism yields a path by starting at the root (which every
//! isomorphism swaps) and repeatedly stepping to the unique swapped child.
//!
//! Both directions are oracle computations with explicit use bounds: the
//! canonical isomorphism at `(σ, i)` reads only `g↾|σ|`, and the length-`n`
//! extracted path reads the isomorphism only at nodes of length `≤ n`.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::bits::BinString;
use crate::structure::{Node, StructurePair};
use crate::tree::{Generator, NormalizedTree};

/// Why a queried map fails to be an isomorphism `𝑀 → 𝑁`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NotIsoReason {
    /// `f((⟨⟩,0)) ≠ (⟨⟩,1)`, so `c` is not preserved.
    RootNotSwapped,
    /// A leaf is swapped, so `L` is not preserved.
    SwappedLeaf(BinString),
    /// A swapped node has zero or two swapped children.
    BadSwapCount { sigma: BinString, swapped_children: u8 },
}

impl fmt::Display for NotIsoReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NotIsoReason::RootNotSwapped => f.write_str("the root is not swapped"),
            NotIsoReason::SwappedLeaf(s) => write!(f, "leaf {s} is swapped"),
            NotIsoReason::BadSwapCount {
                sigma,
                swapped_children,
            } => write!(
                f,
                "{sigma} is swapped with {swapped_children} swapped children, not 1"
            ),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ReductionError {
    #[error("{0} is not a member of the tree")]
    NotInTree(BinString),
    #[error("path leaves the tree at length {length}: {prefix} is not a member")]
    PathLeavesTree { length: usize, prefix: BinString },
    #[error("path literal has no bit at position {pos}")]
    PathExhausted { pos: usize },
    #[error("map does not respect R_{sigma}: ({sigma},0) is sent to {image}")]
    RSigmaViolation { sigma: BinString, image: Node },
    #[error("map is not a bijection on the fibre of {sigma}")]
    FiberNotBijective { sigma: BinString },
    #[error("map is undefined at {0}")]
    Undefined(Node),
    #[error("not an isomorphism: {0}")]
    NotIsomorphism(NotIsoReason),
    #[error("{0} is a leaf; the parity claim only concerns non-leaves")]
    LeafArgument(BinString),
}

/// An element of Cantor space queried one bit at a time.
///
/// `None` means the oracle has no bit at that position (a finite literal
/// queried past its end).
pub trait PathOracle {
    fn bit_at(&self, pos: usize) -> Option<bool>;
}

impl<P: PathOracle + ?Sized> PathOracle for &P {
    fn bit_at(&self, pos: usize) -> Option<bool> {
        (**self).bit_at(pos)
    }
}

/// Adapter turning a closure into a [`PathOracle`].
pub struct FnPath<F>(pub F);

impl<F: Fn(usize) -> Option<bool>> PathOracle for FnPath<F> {
    fn bit_at(&self, pos: usize) -> Option<bool> {
        (self.0)(pos)
    }
}

/// `g↾n`, failing if the oracle runs out of bits.
pub fn path_prefix<P: PathOracle + ?Sized>(g: &P, n: usize) -> Result<BinString, ReductionError> {
    (0..n)
        .map(|pos| g.bit_at(pos).ok_or(ReductionError::PathExhausted { pos }))
        .collect::<Result<Vec<_>, _>>()
        .map(BinString::from_bits)
}

/// How a path literal continues past its explicit bits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Padding {
    /// No bits past the literal.
    Exact,
    /// The last literal bit forever.
    RepeatLast,
    Zeros,
    /// The generator's declared path, position by position.
    Declared(Generator),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PathLiteralError {
    #[error("invalid character {0:?} in path literal; expected `0`, `1`, or a trailing `*`")]
    InvalidChar(char),
    #[error("`*` repeats the last bit, so it needs at least one bit before it")]
    NothingToRepeat,
}

/// A finite bit string with a padding rule, e.g. `010*` for `0101111…`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PathLiteral {
    prefix: BinString,
    padding: Padding,
}

impl PathLiteral {
    pub fn new(prefix: BinString, padding: Padding) -> Result<Self, PathLiteralError> {
        if padding == Padding::RepeatLast && prefix.is_empty() {
            return Err(PathLiteralError::NothingToRepeat);
        }
        Ok(PathLiteral { prefix, padding })
    }

    pub fn exact(prefix: BinString) -> Self {
        PathLiteral {
            prefix,
            padding: Padding::Exact,
        }
    }

    pub fn prefix(&self) -> &BinString {
        &self.prefix
    }

    pub fn padding(&self) -> Padding {
        self.padding
    }
}

impl PathOracle for PathLiteral {
    fn bit_at(&self, pos: usize) -> Option<bool> {
        if let Some(b) = self.prefix.bit(pos) {
            return Some(b);
        }
        match self.padding {
            Padding::Exact => None,
            Padding::RepeatLast => self.prefix.bit(self.prefix.len() - 1),
            Padding::Zeros => Some(false),
            Padding::Declared(g) => Some(g.declared_path_bit(pos)),
        }
    }
}

/// `BITS` or `BITS*`; `.` or the empty string is the empty exact literal.
impl FromStr for PathLiteral {
    type Err = PathLiteralError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (body, padding) = match s.strip_suffix('*') {
            Some(body) => (body, Padding::RepeatLast),
            None => (s, Padding::Exact),
        };
        let body = if body == "." { "" } else { body };
        let prefix = BinString::from_bit_chars(body).map_err(|e| match e {
            crate::bits::ParseBitsError::InvalidChar(c) => PathLiteralError::InvalidChar(c),
            crate::bits::ParseBitsError::Empty => PathLiteralError::NothingToRepeat,
        })?;
        PathLiteral::new(prefix, padding)
    }
}

impl fmt::Display for PathLiteral {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if !self.prefix.is_empty() {
            write!(f, "{}", self.prefix)?;
        }
        match self.padding {
            Padding::Exact => Ok(()),
            Padding::RepeatLast => f.write_str("*"),
            Padding::Zeros => f.write_str(" (zeros)"),
            Padding::Declared(g) => write!(f, " ({g})"),
        }
    }
}

/// A map on universe elements, queried one node at a time.
pub trait IsoOracle {
    fn image(&self, n: &Node) -> Result<Node, ReductionError>;
}

impl<F: IsoOracle + ?Sized> IsoOracle for &F {
    fn image(&self, n: &Node) -> Result<Node, ReductionError> {
        (**self).image(n)
    }
}

/// The isomorphism that swaps exactly the prefixes of a path.
#[derive(Debug, Clone)]
pub struct CanonicalIso<P> {
    tree: NormalizedTree,
    path: P,
}

/// Swap along `g` and fix everything else.
pub fn path_to_iso<P: PathOracle>(tree: &NormalizedTree, g: P) -> CanonicalIso<P> {
    CanonicalIso {
        tree: tree.clone(),
        path: g,
    }
}

impl<P: PathOracle> CanonicalIso<P> {
    pub fn path(&self) -> &P {
        &self.path
    }

    /// Whether `σ ≺ g`. Reads exactly `g↾|σ|` and checks that each of its
    /// prefixes lies in the tree.
    pub fn on_path(&self, sigma: &BinString) -> Result<bool, ReductionError> {
        if !self.tree.contains(sigma) {
            return Err(ReductionError::NotInTree(sigma.clone()));
        }
        let mut prefix = BinString::empty();
        let mut agrees = true;
        for pos in 0..sigma.len() {
            let b = self
                .path
                .bit_at(pos)
                .ok_or(ReductionError::PathExhausted { pos })?;
            prefix.push(b);
            if !self.tree.contains(&prefix) {
                return Err(ReductionError::PathLeavesTree {
                    length: pos + 1,
                    prefix,
                });
            }
            agrees &= sigma.bit(pos) == Some(b);
        }
        Ok(agrees)
    }
}

impl<P: PathOracle> IsoOracle for CanonicalIso<P> {
    fn image(&self, n: &Node) -> Result<Node, ReductionError> {
        if self.on_path(&n.sigma)? {
            Ok(n.flipped())
        } else {
            Ok(n.clone())
        }
    }
}

/// An R-respecting map given by its set of swapped strings.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SwapSet {
    swapped: BTreeSet<BinString>,
}

impl SwapSet {
    pub fn new(swapped: impl IntoIterator<Item = BinString>) -> Self {
        SwapSet {
            swapped: swapped.into_iter().collect(),
        }
    }

    pub fn identity() -> Self {
        SwapSet::default()
    }

    pub fn swapped(&self) -> &BTreeSet<BinString> {
        &self.swapped
    }

    pub fn is_swapped(&self, sigma: &BinString) -> bool {
        self.swapped.contains(sigma)
    }

    /// Reads an arbitrary map on the universe to depth `depth`, checks
    /// that it preserves each fibre `{(σ,0),(σ,1)}`, and records its swaps.
    pub fn from_oracle<F: IsoOracle + ?Sized>(
        tree: &NormalizedTree,
        f: &F,
        depth: usize,
    ) -> Result<SwapSet, ReductionError> {
        let mut swapped = BTreeSet::new();
        for sigma in tree.members_up_to(depth) {
            let zero = f.image(&Node::new(sigma.clone(), false))?;
            let one = f.image(&Node::new(sigma.clone(), true))?;
            for image in [&zero, &one] {
                if image.sigma != sigma {
                    return Err(ReductionError::RSigmaViolation {
                        sigma,
                        image: image.clone(),
                    });
                }
            }
            if zero.bit == one.bit {
                return Err(ReductionError::FiberNotBijective { sigma });
            }
            if zero.bit {
                swapped.insert(sigma);
            }
        }
        Ok(SwapSet { swapped })
    }
}

impl IsoOracle for SwapSet {
    fn image(&self, n: &Node) -> Result<Node, ReductionError> {
        if self.is_swapped(&n.sigma) {
            Ok(n.flipped())
        } else {
            Ok(n.clone())
        }
    }
}

/// A map given by an explicit finite table.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MapIso {
    map: HashMap<Node, Node>,
}

impl MapIso {
    pub fn new(pairs: impl IntoIterator<Item = (Node, Node)>) -> Self {
        MapIso {
            map: pairs.into_iter().collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }
}

impl IsoOracle for MapIso {
    fn image(&self, n: &Node) -> Result<Node, ReductionError> {
        self.map
            .get(n)
            .cloned()
            .ok_or_else(|| ReductionError::Undefined(n.clone()))
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum IsoTextError {
    #[error("line {line}: expected `(SIGMA,I) -> (SIGMA,I)`, got {text:?}")]
    Malformed { line: usize, text: String },
    #[error("line {line}: {node} is mapped twice")]
    Duplicate { line: usize, node: Node },
}

fn parse_node(s: &str) -> Option<Node> {
    let inner = s.trim().strip_prefix('(')?.strip_suffix(')')?;
    let (sigma, bit) = inner.split_once(',')?;
    let sigma: BinString = sigma.trim().parse().ok()?;
    let bit = match bit.trim() {
        "0" => false,
        "1" => true,
        _ => return None,
    };
    Some(Node::new(sigma, bit))
}

/// Parses one mapping per line, `(σ,i) -> (τ,j)`. Blank lines are skipped.
pub fn parse_iso_text(text: &str) -> Result<MapIso, IsoTextError> {
    let mut map = HashMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() {
            continue;
        }
        let malformed = || IsoTextError::Malformed {
            line,
            text: trimmed.to_string(),
        };
        let (lhs, rhs) = trimmed.split_once("->").ok_or_else(malformed)?;
        let from = parse_node(lhs).ok_or_else(malformed)?;
        let to = parse_node(rhs).ok_or_else(malformed)?;
        if map.insert(from.clone(), to).is_some() {
            return Err(IsoTextError::Duplicate { line, node: from });
        }
    }
    Ok(MapIso { map })
}

/// Writes `f` on the universe to depth `depth`, one `(σ,i) -> (τ,j)` line
/// per element in universe-index order.
pub fn iso_to_text<F: IsoOracle + ?Sized>(
    tree: &NormalizedTree,
    f: &F,
    depth: usize,
) -> Result<String, ReductionError> {
    let pair = StructurePair::new(tree.clone());
    let mut out = String::new();
    for n in pair.universe(depth) {
        let image = f.image(&n)?;
        out.push_str(&format!("{n} -> {image}\n"));
    }
    Ok(out)
}

/// `f` swaps `σ` when `f((σ,0)) = (σ,1)`.
pub fn swaps<F: IsoOracle + ?Sized>(f: &F, sigma: &BinString) -> Result<bool, ReductionError> {
    let image = f.image(&Node::new(sigma.clone(), false))?;
    if image.sigma != *sigma {
        return Err(ReductionError::RSigmaViolation {
            sigma: sigma.clone(),
            image,
        });
    }
    Ok(image.bit)
}

/// Follows the swaps of `f` from the root for `n` steps.
///
/// Only `f((σ,0))` for `|σ| ≤ n` is consulted; the inverse half of an
/// isomorphism pair is never needed. Validation happens along the walk, so
/// a map that is not an isomorphism is reported with the first defect met.
pub fn iso_to_path<F: IsoOracle + ?Sized>(
    tree: &NormalizedTree,
    f: &F,
    n: usize,
) -> Result<BinString, ReductionError> {
    let not_iso = ReductionError::NotIsomorphism;
    let mut sigma = BinString::empty();
    if !swaps(f, &sigma)? {
        return Err(not_iso(NotIsoReason::RootNotSwapped));
    }
    loop {
        if tree.is_leaf(&sigma).map_err(|_| ReductionError::NotInTree(sigma.clone()))? {
            return Err(not_iso(NotIsoReason::SwappedLeaf(sigma)));
        }
        if sigma.len() == n {
            return Ok(sigma);
        }
        let left = swaps(f, &sigma.child(false))?;
        let right = swaps(f, &sigma.child(true))?;
        sigma = match (left, right) {
            (true, false) => sigma.child(false),
            (false, true) => sigma.child(true),
            _ => {
                return Err(not_iso(NotIsoReason::BadSwapCount {
                    swapped_children: left as u8 + right as u8,
                    sigma,
                }))
            }
        };
    }
}

/// For a non-leaf `σ`, whether `f` swaps an even number (0 or 2) of
/// `{σ, σ⌢0, σ⌢1}`.
pub fn check_parity_claim<F: IsoOracle + ?Sized>(
    tree: &NormalizedTree,
    f: &F,
    sigma: &BinString,
) -> Result<bool, ReductionError> {
    let leaf = tree
        .is_leaf(sigma)
        .map_err(|_| ReductionError::NotInTree(sigma.clone()))?;
    if leaf {
        return Err(ReductionError::LeafArgument(sigma.clone()));
    }
    let mut count = 0;
    for s in [sigma.clone(), sigma.child(false), sigma.child(true)] {
        count += swaps(f, &s)? as u8;
    }
    Ok(count % 2 == 0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::bs;
    use crate::structure::node;
    use crate::tree::{finite_normalized, normalized_generator};

    fn full() -> NormalizedTree {
        normalized_generator(Generator::FullBinary)
    }

    fn lit(s: &str) -> PathLiteral {
        s.parse().unwrap()
    }

    #[test]
    fn literal_syntax() {
        let g = lit("01*");
        assert_eq!(path_prefix(&g, 5).unwrap(), bs("01111"));
        let g = lit("010");
        assert_eq!(path_prefix(&g, 3).unwrap(), bs("010"));
        assert_eq!(
            path_prefix(&g, 4),
            Err(ReductionError::PathExhausted { pos: 3 })
        );
        assert_eq!(lit("").prefix(), &BinString::empty());
        assert_eq!(lit(".").prefix(), &BinString::empty());
        assert_eq!("*".parse::<PathLiteral>(), Err(PathLiteralError::NothingToRepeat));
        assert_eq!(
            "01x".parse::<PathLiteral>(),
            Err(PathLiteralError::InvalidChar('x'))
        );
        assert_eq!(lit("10*").to_string(), "10*");
        let zeros = PathLiteral::new(bs("11"), Padding::Zeros).unwrap();
        assert_eq!(path_prefix(&zeros, 4).unwrap(), bs("1100"));
        let declared =
            PathLiteral::new(BinString::empty(), Padding::Declared(Generator::SingleBranch))
                .unwrap();
        assert_eq!(path_prefix(&declared, 3).unwrap(), bs("000"));
    }

    #[test]
    fn path_to_iso_examples() {
        let f = path_to_iso(&full(), PathLiteral::new(BinString::empty(), Padding::Zeros).unwrap());
        assert_eq!(f.image(&node("0", 0)).unwrap(), node("0", 1));
        assert_eq!(f.image(&node("1", 0)).unwrap(), node("1", 0));
        assert_eq!(f.image(&node(".", 1)).unwrap(), node(".", 0));
        let small = finite_normalized(&["."]);
        let f = path_to_iso(&small, lit("1"));
        assert_eq!(f.image(&node(".", 1)).unwrap(), node(".", 0));
    }

    #[test]
    fn path_to_iso_errors() {
        let single = normalized_generator(Generator::SingleBranch);
        let f = path_to_iso(&single, lit("0110"));
        assert_eq!(f.image(&node("01", 1)).unwrap(), node("01", 0));
        assert_eq!(
            f.image(&node("000", 0)),
            Err(ReductionError::PathLeavesTree {
                length: 3,
                prefix: bs("011")
            })
        );
        assert_eq!(f.image(&node("11", 0)), Err(ReductionError::NotInTree(bs("11"))));
        let f = path_to_iso(&full(), lit("0"));
        assert_eq!(
            f.image(&node("01", 0)),
            Err(ReductionError::PathExhausted { pos: 1 })
        );
    }

    #[test]
    fn swaps_examples() {
        let f = path_to_iso(&full(), lit("0*"));
        assert!(swaps(&f, &bs(".")).unwrap());
        assert!(!swaps(&f, &bs("1")).unwrap());
        assert!(!swaps(&SwapSet::identity(), &bs(".")).unwrap());
        let bad = MapIso::new([(node(".", 0), node("0", 0))]);
        assert!(matches!(
            swaps(&bad, &bs(".")),
            Err(ReductionError::RSigmaViolation { .. })
        ));
    }

    #[test]
    fn iso_to_path_examples() {
        let f = path_to_iso(&full(), lit("01*"));
        assert_eq!(iso_to_path(&full(), &f, 3).unwrap(), bs("011"));
        let f = path_to_iso(&full(), lit("0101"));
        assert_eq!(iso_to_path(&full(), &f, 3).unwrap(), bs("010"));
        for n in 0..4 {
            assert_eq!(
                iso_to_path(&full(), &SwapSet::identity(), n),
                Err(ReductionError::NotIsomorphism(NotIsoReason::RootNotSwapped))
            );
        }
        let small = finite_normalized(&["."]);
        let f = SwapSet::new([bs("."), bs("0")]);
        assert_eq!(
            iso_to_path(&small, &f, 1),
            Err(ReductionError::NotIsomorphism(NotIsoReason::SwappedLeaf(bs("0"))))
        );
    }

    #[test]
    fn iso_to_path_bad_swap_counts() {
        let both = SwapSet::new([bs("."), bs("0"), bs("1")]);
        assert_eq!(
            iso_to_path(&full(), &both, 2),
            Err(ReductionError::NotIsomorphism(NotIsoReason::BadSwapCount {
                sigma: bs("."),
                swapped_children: 2
            }))
        );
        let neither = SwapSet::new([bs("."), bs("1"), bs("10")]);
        assert_eq!(iso_to_path(&full(), &neither, 1).unwrap(), bs("1"));
        assert_eq!(
            iso_to_path(&full(), &neither, 3),
            Err(ReductionError::NotIsomorphism(NotIsoReason::BadSwapCount {
                sigma: bs("10"),
                swapped_children: 0
            }))
        );
    }

    #[test]
    fn spawned_rays_are_ignored() {
        // Root ray 0000…; below the unswapped 1, both 10 and 11 start rays.
        let f = SwapSet::new(
            ["." , "0", "00", "000", "10", "100", "11", "110"].map(bs),
        );
        for s in ["0", "1", "10", "11"] {
            assert!(check_parity_claim(&full(), &f, &bs(s)).unwrap(), "{s}");
        }
        assert_eq!(iso_to_path(&full(), &f, 3).unwrap(), bs("000"));
    }

    #[test]
    fn parity_claim_examples() {
        let t = full();
        let root = bs(".");
        assert!(check_parity_claim(&t, &SwapSet::new([bs("."), bs("0")]), &root).unwrap());
        assert!(!check_parity_claim(&t, &SwapSet::new([bs(".")]), &root).unwrap());
        assert!(check_parity_claim(&t, &SwapSet::identity(), &root).unwrap());
        let small = finite_normalized(&["."]);
        assert_eq!(
            check_parity_claim(&small, &SwapSet::identity(), &bs("1")),
            Err(ReductionError::LeafArgument(bs("1")))
        );
    }

    #[test]
    fn swap_set_from_oracle() {
        let t = full();
        let f = path_to_iso(&t, lit("10*"));
        let j = SwapSet::from_oracle(&t, &f, 3).unwrap();
        assert_eq!(j, SwapSet::new(["." , "1", "10", "100"].map(bs)));

        let collapse = MapIso::new([(node(".", 0), node(".", 1)), (node(".", 1), node(".", 1))]);
        assert_eq!(
            SwapSet::from_oracle(&t, &collapse, 0),
            Err(ReductionError::FiberNotBijective { sigma: bs(".") })
        );
    }

    #[test]
    fn iso_text_round_trip() {
        let t = full();
        let f = path_to_iso(&t, lit("1*"));
        let text = iso_to_text(&t, &f, 2).unwrap();
        assert!(text.starts_with("(.,0) -> (.,1)\n(.,1) -> (.,0)\n(0,0) -> (0,0)\n"));
        let parsed = parse_iso_text(&text).unwrap();
        assert_eq!(parsed.len(), 14);
        assert_eq!(iso_to_path(&t, &parsed, 2).unwrap(), bs("11"));
        assert!(matches!(
            parse_iso_text("(.,0) => (.,1)"),
            Err(IsoTextError::Malformed { line: 1, .. })
        ));
        assert!(matches!(
            parse_iso_text("(.,0) -> (.,1)\n(.,0) -> (.,0)\n"),
            Err(IsoTextError::Duplicate { line: 2, .. })
        ));
    }
}
