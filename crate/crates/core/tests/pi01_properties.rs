use pathiso::corpus::standard_corpus;
use pathiso::oracle::{enumerate_paths, model_check_in, TruncatedAssignment, Window};
use pathiso::pi01::{
    default_max_index, encode_iso, iso_prefix_check, pipeline_3_to_2, tree_prefix_check,
    BairePrefix, IsoPrefixChecker, PrefixVerdict,
};
use pathiso::reductions::{iso_to_path, MapIso};
use pathiso::tree::{finite_normalized, normalized_generator};
use pathiso::{BinString, Generator, NormalizedTree, StructurePair};
use proptest::prelude::*;

fn verdicts_along(tree: &NormalizedTree, values: &[usize], max: usize) -> Vec<PrefixVerdict> {
    let mut checker = IsoPrefixChecker::new(tree, max);
    let mut out = vec![checker.verdict().clone()];
    for &v in values {
        out.push(checker.push(v).unwrap().clone());
    }
    out
}

proptest! {
    #[test]
    fn iso_rejection_is_permanent(values in prop::collection::vec(0usize..30, 0..40)) {
        let tree = normalized_generator(Generator::FullBinary);
        let verdicts = verdicts_along(&tree, &values, 60);
        if let Some(k) = verdicts.iter().position(PrefixVerdict::is_reject) {
            prop_assert!(verdicts[k..].iter().all(|v| v == &verdicts[k]));
        }
        // The one-shot check agrees with the incremental one at every length.
        for n in 0..=values.len() {
            let p = BairePrefix::new(values[..n].to_vec());
            prop_assert_eq!(&iso_prefix_check(&tree, &p, 60).unwrap(), &verdicts[n]);
        }
    }

    #[test]
    fn tree_rejection_is_permanent(bits in prop::collection::vec(any::<bool>(), 0..12)) {
        let tree = normalized_generator(Generator::SingleBranch);
        let s = BinString::from_bits(bits);
        let verdicts: Vec<_> = s.prefixes().map(|p| tree_prefix_check(&tree, &p)).collect();
        if let Some(k) = verdicts.iter().position(PrefixVerdict::is_reject) {
            prop_assert!(verdicts[k..].iter().all(|v| v == &verdicts[k]));
        }
    }
}

#[test]
fn full_encoding_accepted_iff_model_check() {
    for c in standard_corpus() {
        let pair = StructurePair::new(c.tree.clone());
        for d in 0..=2 {
            let window = Window::new(&c.tree, d);
            let max = default_max_index(&c.tree, d);
            for v in 0u64..1 << window.len() {
                let a = TruncatedAssignment {
                    depth: d,
                    bits: (0..window.len()).map(|k| v >> k & 1 == 1).collect(),
                };
                let code = encode_iso(&c.tree, &window.iso(&a), d).unwrap();
                assert_eq!(code.len(), 2 * pair.universe(d).len());
                let verdict = iso_prefix_check(&c.tree, &code, max).unwrap();
                assert_eq!(
                    verdict.is_accept(),
                    model_check_in(&window, &a),
                    "{} d={d} {a}: {verdict}",
                    c.name
                );
            }
        }
    }
}

/// Depth-first search over raw Baire values below `bound`, pruned by the
/// checker. Returns the longest accepted prefix length reached.
fn longest_accepted(checker: IsoPrefixChecker, bound: usize, target: usize) -> usize {
    if checker.len() == target {
        return target;
    }
    let mut best = checker.len();
    for v in 0..bound {
        let mut next = checker.clone();
        if next.push(v).unwrap().is_accept() {
            best = best.max(longest_accepted(next, bound, target));
            if best == target {
                break;
            }
        }
    }
    best
}

#[test]
fn finite_trees_refute_every_total_encoding() {
    for nodes in [&["."][..], &[".", "0"], &[".", "0", "1"], &[".", "1", "10"]] {
        let tree = finite_normalized(nodes);
        let h = tree.height().unwrap();
        let size = StructurePair::new(tree.clone()).universe(h).len();
        let checker = IsoPrefixChecker::new(&tree, default_max_index(&tree, h));
        let reached = longest_accepted(checker, size, 2 * size);
        assert!(reached < 2 * size, "{nodes:?}: accepted a total encoding");
    }
}

#[test]
fn encodings_of_window_maps_are_refuted_on_finite_trees() {
    for c in standard_corpus().into_iter().filter(|c| c.is_finite()) {
        let h = c.tree.height().unwrap();
        let window = Window::new(&c.tree, h);
        let universe = StructurePair::new(c.tree.clone()).universe(h);
        let max = default_max_index(&c.tree, h);
        // Every fibre-preserving map when the window is small, otherwise
        // the first 2^12 of them.
        let n = window.len();
        let limit = 1u64 << n.min(12);
        for v in 0..limit {
            let a = TruncatedAssignment {
                depth: h,
                bits: (0..n).map(|k| v >> k & 1 == 1).collect(),
            };
            let code = encode_iso(&c.tree, &window.iso(&a), h).unwrap();
            assert_eq!(code.len(), 2 * universe.len());
            assert!(iso_prefix_check(&c.tree, &code, max).unwrap().is_reject(), "{} {a}", c.name);
        }
    }
}

#[test]
fn pipeline_output_is_accepted_and_decodes_to_its_input() {
    for c in standard_corpus() {
        let pair = StructurePair::new(c.tree.clone());
        for d in 0..=5 {
            for x in enumerate_paths(&c.tree, d) {
                assert!(tree_prefix_check(&c.tree, &x).is_accept());
                let code = pipeline_3_to_2(&c.tree, &x).unwrap();
                let max = default_max_index(&c.tree, d);
                let verdict = iso_prefix_check(&c.tree, &code, max).unwrap();
                assert!(verdict.is_accept(), "{} {x}: {verdict}", c.name);
                if c.tree.is_leaf(&x).unwrap() {
                    continue;
                }
                let f = MapIso::new(
                    code.f0()
                        .into_iter()
                        .enumerate()
                        .map(|(k, v)| (pair.index_node(k, d).unwrap(), pair.index_node(v, d).unwrap())),
                );
                assert_eq!(iso_to_path(&c.tree, &f, d).unwrap(), x, "{}", c.name);
            }
        }
    }
}

#[test]
fn pipeline_rejects_strings_outside_the_tree() {
    let tree = normalized_generator(Generator::SingleBranch);
    let x = BinString::from_value(0b011, 3);
    assert!(tree_prefix_check(&tree, &x).is_reject());
    assert!(pipeline_3_to_2(&tree, &x).is_err());
}

#[test]
fn concurrent_checks_agree() {
    let tree = normalized_generator(Generator::FullBinary);
    let prefixes: Vec<BairePrefix> = enumerate_paths(&tree, 4)
        .iter()
        .map(|x| pipeline_3_to_2(&tree, x).unwrap())
        .collect();
    let serial: Vec<_> = prefixes
        .iter()
        .map(|p| iso_prefix_check(&tree, p, 200).unwrap())
        .collect();
    std::thread::scope(|scope| {
        let handles: Vec<_> = (0..4)
            .map(|_| {
                scope.spawn(|| {
                    prefixes
                        .iter()
                        .map(|p| iso_prefix_check(&tree, p, 200).unwrap())
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        for h in handles {
            assert_eq!(h.join().unwrap(), serial);
        }
    });
}
