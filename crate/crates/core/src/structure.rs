//! The structure pair 𝑀, 𝑁 over a normalized tree.
//!
//! Both structures have universe `T × 2`. They share the unary relations
//! `R_σ` and `L` and the ternary relation `P`, and differ only in the
//! constant `c`. Nothing is materialized: every relation is evaluated on
//! demand against the underlying tree.

use std::fmt;

use thiserror::Error;

use crate::bits::BinString;
use crate::tree::{NormalizedTree, TreeError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StructureError {
    #[error("{0} is not a member of the tree")]
    NotInTree(BinString),
    #[error("universe index {index} is outside the enumeration to depth {depth}")]
    IndexOutOfRange { index: usize, depth: usize },
}

impl From<TreeError> for StructureError {
    fn from(e: TreeError) -> Self {
        match e {
            TreeError::NotInTree(s) => StructureError::NotInTree(s),
            other => unreachable!("tree query produced {other}"),
        }
    }
}

/// A universe element `(σ, i)`. Not to be confused with the string `σ⌢i`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Node {
    pub sigma: BinString,
    pub bit: bool,
}

impl Node {
    pub fn new(sigma: BinString, bit: bool) -> Node {
        Node { sigma, bit }
    }

    /// `(σ, 1 − i)`.
    pub fn flipped(&self) -> Node {
        Node::new(self.sigma.clone(), !self.bit)
    }
}

impl fmt::Display for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.sigma, self.bit as u8)
    }
}

impl fmt::Debug for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Test shorthand: `node("01", 1)` is `(01, 1)`.
pub fn node(sigma: &str, i: u8) -> Node {
    assert!(i < 2, "node bit must be 0 or 1");
    Node::new(crate::bits::bs(sigma), i == 1)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Side {
    M,
    N,
}

impl Side {
    pub const BOTH: [Side; 2] = [Side::M, Side::N];
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::M => "M",
            Side::N => "N",
        })
    }
}

/// Interpretation of `c`: `(⟨⟩,0)` in 𝑀 and `(⟨⟩,1)` in 𝑁.
pub fn const_node(side: Side) -> Node {
    Node::new(BinString::empty(), side == Side::N)
}

#[derive(Clone, Debug)]
pub struct StructurePair {
    tree: NormalizedTree,
}

impl StructurePair {
    pub fn new(tree: NormalizedTree) -> Self {
        StructurePair { tree }
    }

    pub fn tree(&self) -> &NormalizedTree {
        &self.tree
    }

    fn member(&self, s: &BinString) -> Result<(), StructureError> {
        if self.tree.contains(s) {
            Ok(())
        } else {
            Err(StructureError::NotInTree(s.clone()))
        }
    }

    /// `R_σ(n)` holds iff `n.sigma = σ`.
    pub fn eval_r(&self, sigma: &BinString, n: &Node) -> Result<bool, StructureError> {
        self.member(sigma)?;
        self.member(&n.sigma)?;
        Ok(*sigma == n.sigma)
    }

    /// `L(n)` holds iff `n.sigma` is a leaf and `n.bit = 0`.
    pub fn eval_l(&self, n: &Node) -> Result<bool, StructureError> {
        Ok(self.tree.is_leaf(&n.sigma)? && !n.bit)
    }

    /// `P(n0, n1, n2)` holds iff `n1.sigma = n0.sigma⌢0`, `n2.sigma =
    /// n0.sigma⌢1` and the three bits sum to an even number.
    pub fn eval_p(&self, n0: &Node, n1: &Node, n2: &Node) -> Result<bool, StructureError> {
        for n in [n0, n1, n2] {
            self.member(&n.sigma)?;
        }
        let shape = n1.sigma == n0.sigma.child(false) && n2.sigma == n0.sigma.child(true);
        let even = (n0.bit as u8 + n1.bit as u8 + n2.bit as u8).is_multiple_of(2);
        Ok(shape && even)
    }

    /// `2·rank(σ) + i`.
    pub fn node_index(&self, n: &Node) -> Result<usize, StructureError> {
        Ok(2 * self.tree.rank(&n.sigma)? + n.bit as usize)
    }

    /// Inverse of [`StructurePair::node_index`] on the universe restricted to
    /// strings of length at most `depth`.
    pub fn index_node(&self, index: usize, depth: usize) -> Result<Node, StructureError> {
        let out_of_range = StructureError::IndexOutOfRange { index, depth };
        let sigma = self.tree.unrank(index / 2).ok_or(out_of_range.clone())?;
        if sigma.len() > depth {
            return Err(out_of_range);
        }
        Ok(Node::new(sigma, index % 2 == 1))
    }

    /// Universe elements with `|σ| ≤ depth`, in index order.
    pub fn universe(&self, depth: usize) -> Vec<Node> {
        self.tree
            .members_up_to(depth)
            .into_iter()
            .flat_map(|s| [Node::new(s.clone(), false), Node::new(s, true)])
            .collect()
    }

    pub fn side(&self, side: Side) -> Structure<'_> {
        Structure { pair: self, side }
    }

    /// Textual dump of the structures restricted to `|σ| ≤ depth`: universe
    /// (`U`), leaf facts (`L`), constants (`C M`, `C N`) and every true
    /// `P`-triple lying inside the window. One fact per line, sorted
    /// bytewise.
    pub fn describe(&self, depth: usize) -> String {
        let mut facts = Vec::new();
        for side in Side::BOTH {
            facts.push(format!("C {side} {}", const_node(side)));
        }
        let members = self.tree.members_up_to(depth);
        for sigma in &members {
            for bit in [false, true] {
                let n = Node::new(sigma.clone(), bit);
                facts.push(format!("U {n}"));
                if self.eval_l(&n).expect("window member") {
                    facts.push(format!("L {n}"));
                }
            }
            if sigma.len() < depth && !self.tree.is_leaf(sigma).expect("window member") {
                let (left, right) = (sigma.child(false), sigma.child(true));
                for bits in 0u8..8 {
                    let n0 = Node::new(sigma.clone(), bits & 4 != 0);
                    let n1 = Node::new(left.clone(), bits & 2 != 0);
                    let n2 = Node::new(right.clone(), bits & 1 != 0);
                    if self.eval_p(&n0, &n1, &n2).expect("window members") {
                        facts.push(format!("P {n0} {n1} {n2}"));
                    }
                }
            }
        }
        facts.sort();
        let mut out = String::new();
        for f in facts {
            out.push_str(&f);
            out.push('\n');
        }
        out
    }
}

/// One of the two structures, viewed through its side.
#[derive(Clone, Copy)]
pub struct Structure<'a> {
    pair: &'a StructurePair,
    side: Side,
}

impl Structure<'_> {
    pub fn side(&self) -> Side {
        self.side
    }

    pub fn r(&self, sigma: &BinString, n: &Node) -> Result<bool, StructureError> {
        self.pair.eval_r(sigma, n)
    }

    pub fn l(&self, n: &Node) -> Result<bool, StructureError> {
        self.pair.eval_l(n)
    }

    pub fn p(&self, n0: &Node, n1: &Node, n2: &Node) -> Result<bool, StructureError> {
        self.pair.eval_p(n0, n1, n2)
    }

    pub fn c(&self) -> Node {
        const_node(self.side)
    }
}
