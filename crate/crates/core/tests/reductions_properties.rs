use std::collections::BTreeSet;
use std::sync::Mutex;

use pathiso::corpus::standard_corpus;
use pathiso::oracle::{enumerate_assignments_in, Window};
use pathiso::reductions::{
    iso_to_path, path_to_iso, FnPath, IsoOracle, PathLiteral, PathOracle, ReductionError, SwapSet,
};
use pathiso::tree::normalized_generator;
use pathiso::{BinString, Generator, Node, StructurePair};
use proptest::prelude::*;

/// Wraps a path and records every position read.
struct RecordingPath<'a> {
    bits: &'a [bool],
    reads: Mutex<BTreeSet<usize>>,
}

impl<'a> RecordingPath<'a> {
    fn new(bits: &'a [bool]) -> Self {
        RecordingPath {
            bits,
            reads: Mutex::new(BTreeSet::new()),
        }
    }

    fn max_read(&self) -> Option<usize> {
        self.reads.lock().unwrap().last().copied()
    }
}

impl PathOracle for RecordingPath<'_> {
    fn bit_at(&self, pos: usize) -> Option<bool> {
        self.reads.lock().unwrap().insert(pos);
        self.bits.get(pos).copied()
    }
}

/// Wraps an isomorphism and records every argument it is queried on.
struct RecordingIso<F> {
    inner: F,
    queries: Mutex<Vec<Node>>,
}

impl<F: IsoOracle> IsoOracle for RecordingIso<F> {
    fn image(&self, n: &Node) -> Result<Node, ReductionError> {
        self.queries.lock().unwrap().push(n.clone());
        self.inner.image(n)
    }
}

fn full() -> pathiso::NormalizedTree {
    normalized_generator(Generator::FullBinary)
}

proptest! {
    #[test]
    fn round_trip_on_the_full_tree(bits in prop::collection::vec(any::<bool>(), 0..24), cut in 0usize..24) {
        let n = cut.min(bits.len());
        let tree = full();
        let g = PathLiteral::exact(BinString::from_bits(bits.clone()));
        let f = path_to_iso(&tree, &g);
        let back = iso_to_path(&tree, &f, n).unwrap();
        prop_assert_eq!(back, BinString::from_bits(bits[..n].to_vec()));
    }

    #[test]
    fn path_to_iso_reads_only_the_sigma_prefix(
        bits in prop::collection::vec(any::<bool>(), 12),
        sigma in prop::collection::vec(any::<bool>(), 0..10),
        i in any::<bool>(),
        flip in 0usize..12,
    ) {
        let tree = full();
        let sigma = BinString::from_bits(sigma);
        let recorder = RecordingPath::new(&bits);
        let f = path_to_iso(&tree, &recorder);
        let n = Node::new(sigma.clone(), i);
        let image = f.image(&n).unwrap();
        prop_assert!(recorder.max_read().is_none_or(|m| m < sigma.len()));
        // Mutating any bit at or beyond |σ| leaves the image unchanged.
        if flip >= sigma.len() {
            let mut mutated = bits.clone();
            mutated[flip] = !mutated[flip];
            let g = PathLiteral::exact(BinString::from_bits(mutated));
            prop_assert_eq!(path_to_iso(&tree, &g).image(&n).unwrap(), image);
        }
    }

    #[test]
    fn iso_to_path_queries_only_short_nodes(
        bits in prop::collection::vec(any::<bool>(), 16),
        n in 0usize..12,
    ) {
        let tree = full();
        let g = PathLiteral::exact(BinString::from_bits(bits.clone()));
        let f = RecordingIso { inner: path_to_iso(&tree, &g), queries: Mutex::new(Vec::new()) };
        let out = iso_to_path(&tree, &f, n).unwrap();
        let queried = f.queries.into_inner().unwrap();
        prop_assert!(queried.iter().all(|q| q.sigma.len() <= n));
        prop_assert!(queried.iter().all(|q| !q.bit));
        // Rewriting the iso on every longer node does not change the output.
        let swapped: BTreeSet<BinString> = BinString::from_bits(bits).prefixes()
            .filter(|s| s.len() <= n)
            .chain([out.child(false), out.child(true), BinString::from_bits(vec![true; n + 2])])
            .collect();
        prop_assert_eq!(iso_to_path(&tree, &SwapSet::new(swapped), n).unwrap(), out);
    }
}

#[test]
fn canonicality_over_all_window_isomorphisms() {
    for c in standard_corpus() {
        for d in 0..=3 {
            let window = Window::new(&c.tree, d);
            for a in enumerate_assignments_in(&window) {
                let f = window.iso(&a);
                let x = iso_to_path(&c.tree, &f, d).unwrap();
                assert!(c.tree.contains(&x), "{} {x}", c.name);
                assert_eq!(x.len(), d);
                let g = PathLiteral::exact(x.clone());
                let canonical = path_to_iso(&c.tree, &g);
                assert_eq!(iso_to_path(&c.tree, &canonical, d).unwrap(), x, "{}", c.name);
            }
        }
    }
}

#[test]
fn canonical_iso_is_an_isomorphism_on_the_window() {
    for c in standard_corpus() {
        let pair = StructurePair::new(c.tree.clone());
        for d in 0..=3 {
            for x in pathiso::oracle::live_paths(&c.tree, d) {
                let g = PathLiteral::exact(x.clone());
                let f = path_to_iso(&c.tree, &g);
                let universe = pair.universe(d);
                for n in &universe {
                    let image = f.image(n).unwrap();
                    assert_eq!(pair.eval_l(n), pair.eval_l(&image), "{}", c.name);
                    assert_eq!(image.sigma, n.sigma);
                }
                let c_m = pathiso::const_node(pathiso::Side::M);
                assert_eq!(f.image(&c_m).unwrap(), pathiso::const_node(pathiso::Side::N));
            }
        }
    }
}

#[test]
fn path_outside_the_tree_is_reported_at_first_exit() {
    let tree = normalized_generator(Generator::SingleBranch);
    let g: PathLiteral = "0010".parse().unwrap();
    let f = path_to_iso(&tree, &g);
    // 001 is a child of a member, 0010 is not in the tree.
    let err = f.image(&Node::new(BinString::from_value(0, 4), false)).unwrap_err();
    assert!(matches!(err, ReductionError::PathLeavesTree { length: 4, .. }), "{err}");
}

#[test]
fn concurrent_queries_match_serial() {
    let tree = full();
    let g = FnPath(|pos: usize| Some(pos % 3 == 1));
    let f = path_to_iso(&tree, &g);
    let nodes = StructurePair::new(tree.clone()).universe(6);
    let serial: Vec<Node> = nodes.iter().map(|n| f.image(n).unwrap()).collect();
    std::thread::scope(|scope| {
        let handles: Vec<_> = (0..4)
            .map(|_| scope.spawn(|| nodes.iter().map(|n| f.image(n).unwrap()).collect::<Vec<_>>()))
            .collect();
        for h in handles {
            assert_eq!(h.join().unwrap(), serial);
        }
    });
    let paths: Vec<_> = std::thread::scope(|scope| {
        (0..8)
            .map(|n| scope.spawn(move || iso_to_path(&full(), &path_to_iso(&full(), FnPath(|p: usize| Some(p % 3 == 1))), n)))
            .collect::<Vec<_>>()
            .into_iter()
            .map(|h| h.join().unwrap().unwrap())
            .collect()
    });
    for (n, p) in paths.iter().enumerate() {
        assert_eq!(p.len(), n);
        assert!(p.bits().iter().enumerate().all(|(k, &b)| b == (k % 3 == 1)));
    }
}
