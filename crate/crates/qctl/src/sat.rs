//! Satisfiability procedures: the complete decision for the EX fragment on
//! N-bounded trees via the small-model bound, and bounded witness search
//! over finite trees.

use crate::checker::{check_root, Backend, CheckError, CheckOutcome};
use crate::syntax::{exists, FragmentId, Formula, PropName};
use crate::trees::{labelings, shapes_up_to, uniform_shapes, FrontierMode, Shape, TreeModel};

/// Result of a satisfiability query. `Unsat` is only ever produced by the
/// complete procedure; the bounded search reports `UnsatWithinBound`
/// instead.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SatOutcome {
    Sat(TreeModel),
    UnsatWithinBound(String),
    Unsat,
}

impl SatOutcome {
    pub fn is_sat(&self) -> bool {
        matches!(self, SatOutcome::Sat(_))
    }

    pub fn witness(&self) -> Option<&TreeModel> {
        match self {
            SatOutcome::Sat(t) => Some(t),
            _ => None,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum SatError {
    #[error("the bounded decision procedure handles the EX fragment only, got {0}")]
    NotExFragment(FragmentId),
    #[error("branching bound must be at least 1")]
    ZeroBranching,
    #[error(
        "candidate space of about {estimate} trees exceeds the cap {cap}; \
         raise --max-candidates to proceed (completeness is never silently weakened)"
    )]
    CandidateCap { estimate: u128, cap: u128 },
    #[error(transparent)]
    Check(#[from] CheckError),
}

/// Search caps; every refusal names the flag that lifts it.
#[derive(Debug, Clone, Copy)]
pub struct SatLimits {
    /// Cap on the number of candidate labelled trees.
    pub max_candidates: u128,
    /// Below this many label bits per shape the search enumerates label
    /// masks ascending (deterministic first witness); above it, it switches
    /// to the pruned assignment search.
    pub exhaustive_label_bits: usize,
}

impl Default for SatLimits {
    fn default() -> Self {
        SatLimits { max_candidates: 1 << 24, exhaustive_label_bits: 18 }
    }
}

fn candidate_estimate(shapes: &[Shape], props: usize) -> u128 {
    shapes
        .iter()
        .map(|s| 1u128 << ((s.len() * props).min(126)))
        .sum()
}

/// Complete decision for the EX fragment over `N`-bounded trees: a formula
/// is satisfiable iff it holds at the root of some finite tree whose every
/// branch has length exactly the modal depth and whose branching is at most
/// `N`, evaluated under self-loop completion. Candidates are enumerated by
/// increasing node count, then label bitmask, so the first witness is
/// deterministic.
pub fn sat_ex_bounded(f: &Formula, n: usize) -> Result<SatOutcome, SatError> {
    sat_ex_bounded_with(f, n, SatLimits::default())
}

pub fn sat_ex_bounded_with(f: &Formula, n: usize, limits: SatLimits) -> Result<SatOutcome, SatError> {
    if n == 0 {
        return Err(SatError::ZeroBranching);
    }
    match f.fragment() {
        FragmentId::ExOnly => {}
        other => return Err(SatError::NotExFragment(other)),
    }
    let depth = f.modal_depth();
    let props = f.free_props();
    let shapes = uniform_shapes(n, depth);
    let estimate = candidate_estimate(&shapes, props.len());
    if estimate > limits.max_candidates {
        return Err(SatError::CandidateCap { estimate, cap: limits.max_candidates });
    }
    for shape in &shapes {
        if let Some(found) = search_shape(shape, f, &props, FrontierMode::SelfLoop, limits)? {
            return Ok(SatOutcome::Sat(found));
        }
    }
    Ok(SatOutcome::Unsat)
}

/// Bounded witness search over finite trees of any branch lengths: returns
/// `Sat` or `UnsatWithinBound`, never an unqualified `Unsat`.
pub fn sat_finite_tree(
    f: &Formula,
    max_size: usize,
    mode: FrontierMode,
) -> Result<SatOutcome, SatError> {
    sat_finite_tree_with(f, max_size, mode, SatLimits::default())
}

pub fn sat_finite_tree_with(
    f: &Formula,
    max_size: usize,
    mode: FrontierMode,
    limits: SatLimits,
) -> Result<SatOutcome, SatError> {
    let props = f.free_props();
    let shapes = shapes_up_to(max_size, None, None);
    let estimate = candidate_estimate(&shapes, props.len());
    // Shapes handled by the pruned assignment search contribute their shape
    // count rather than their full label space.
    let pruned_estimate: u128 = shapes
        .iter()
        .map(|s| {
            let bits = s.len() * props.len();
            if bits <= limits.exhaustive_label_bits {
                1u128 << bits
            } else {
                1
            }
        })
        .sum();
    if estimate > limits.max_candidates && pruned_estimate > limits.max_candidates {
        return Err(SatError::CandidateCap {
            estimate: estimate.min(pruned_estimate),
            cap: limits.max_candidates,
        });
    }
    for shape in &shapes {
        if let Some(found) = search_shape(shape, f, &props, mode, limits)? {
            return Ok(SatOutcome::Sat(found));
        }
    }
    Ok(SatOutcome::UnsatWithinBound(format!("no model with at most {max_size} nodes")))
}

/// Searches the labelings of one shape for a model of `f`. Small label
/// spaces are enumerated mask-ascending; larger ones go through the pruned
/// backend by closing `f` existentially over its free propositions and
/// reading the witness labeling back.
fn search_shape(
    shape: &Shape,
    f: &Formula,
    props: &[PropName],
    mode: FrontierMode,
    limits: SatLimits,
) -> Result<Option<TreeModel>, SatError> {
    let bits = shape.len() * props.len();
    if bits <= limits.exhaustive_label_bits {
        for tree in labelings(shape, props) {
            if check_root(&tree, mode, f, Backend::Pruned)?.verdict {
                return Ok(Some(tree));
            }
        }
        return Ok(None);
    }
    // existential closure over the free props, innermost bound last
    let mut closed = f.clone();
    for p in props.iter().rev() {
        closed = exists(p.as_str(), closed);
    }
    let tree = shape.to_tree();
    let CheckOutcome { verdict, witness } = check_root(&tree, mode, &closed, Backend::Pruned)?;
    if !verdict {
        return Ok(None);
    }
    let mut found = tree;
    if let Some(labeling) = witness {
        for (p, nodes) in labeling {
            for &v in &nodes {
                found.labels_mut(v).insert(p.clone());
            }
        }
    }
    debug_assert!(check_root(&found, mode, f, Backend::Pruned)?.verdict);
    Ok(Some(found))
}

/// Verdict-only satisfiability of `f` over the labelings of a fixed tree:
/// the existential closure of `f` over its free propositions, evaluated with
/// the pruned backend. The brute-force oracles lean on this.
pub fn satisfiable_on(tree: &TreeModel, f: &Formula, mode: FrontierMode) -> Result<bool, SatError> {
    let mut closed = f.clone();
    for p in f.free_props().iter().rev() {
        closed = exists(p.as_str(), closed.clone());
    }
    Ok(check_root(tree, mode, &closed, Backend::Pruned)?.verdict)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse;
    use crate::trees::NodeId;

    #[test]
    fn chains_cannot_split() {
        let f = parse("EX p & EX ~p").unwrap();
        assert_eq!(sat_ex_bounded(&f, 1).unwrap(), SatOutcome::Unsat);
    }

    #[test]
    fn two_children_split_deterministically() {
        let f = parse("EX p & EX ~p").unwrap();
        let out = sat_ex_bounded(&f, 2).unwrap();
        let t = out.witness().expect("satisfiable at branching 2");
        // first witness in (node count, label bitmask) order: root with
        // children {p} and {}
        assert_eq!(t.len(), 3);
        let p = PropName::new("p");
        assert!(!t.has_label(t.root(), &p));
        let kids = t.children(t.root());
        assert!(t.has_label(kids[0], &p));
        assert!(!t.has_label(kids[1], &p));
    }

    #[test]
    fn false_is_unsat() {
        let f = parse("false").unwrap();
        assert_eq!(sat_ex_bounded(&f, 2).unwrap(), SatOutcome::Unsat);
    }

    #[test]
    fn rejects_non_ex() {
        let f = parse("EF p").unwrap();
        assert!(matches!(sat_ex_bounded(&f, 1), Err(SatError::NotExFragment(_))));
    }

    #[test]
    fn witness_reverifies_under_named_mode() {
        let f = parse("exists q. (EX (q & p) & AX (q -> p))").unwrap();
        if let SatOutcome::Sat(t) = sat_ex_bounded(&f, 2).unwrap() {
            assert!(check_root(&t, FrontierMode::SelfLoop, &f, Backend::Exhaustive)
                .unwrap()
                .verdict);
        } else {
            panic!("expected sat");
        }
    }

    #[test]
    fn monotone_in_branching() {
        for text in ["EX p & EX ~p", "EX (p & EX p)", "AX false | EX true"] {
            let f = parse(text).unwrap();
            if sat_ex_bounded(&f, 1).unwrap().is_sat() {
                assert!(sat_ex_bounded(&f, 2).unwrap().is_sat(), "{text}");
            }
        }
    }

    #[test]
    fn finite_tree_needs_room() {
        let f = parse("EX true").unwrap();
        assert!(matches!(
            sat_finite_tree(&f, 1, FrontierMode::Strict).unwrap(),
            SatOutcome::UnsatWithinBound(_),
        ));
        let out = sat_finite_tree(&f, 2, FrontierMode::Strict).unwrap();
        assert_eq!(out.witness().map(TreeModel::len), Some(2));
    }

    #[test]
    fn finite_tree_contradiction() {
        let f = parse("AXAG false & EXEF true").unwrap();
        assert!(matches!(
            sat_finite_tree(&f, 4, FrontierMode::Strict).unwrap(),
            SatOutcome::UnsatWithinBound(_),
        ));
    }

    #[test]
    fn no_ex_true_is_finite_tree_satisfiable() {
        let f = parse("~EX true").unwrap();
        let out = sat_finite_tree(&f, 3, FrontierMode::Strict).unwrap();
        assert_eq!(out.witness().map(TreeModel::len), Some(1));
    }

    #[test]
    fn closure_path_agrees_with_mask_path() {
        // force the closure path with a tiny label-bit threshold
        let f = parse("EX p & EX ~p & q").unwrap();
        let tight = SatLimits { exhaustive_label_bits: 0, ..SatLimits::default() };
        let a = sat_finite_tree_with(&f, 3, FrontierMode::SelfLoop, tight).unwrap();
        let b = sat_finite_tree(&f, 3, FrontierMode::SelfLoop).unwrap();
        assert!(a.is_sat() && b.is_sat());
        let (wa, wb) = (a.witness().unwrap(), b.witness().unwrap());
        assert_eq!(wa.len(), wb.len());
        for t in [wa, wb] {
            assert!(check_root(t, FrontierMode::SelfLoop, &f, Backend::Exhaustive)
                .unwrap()
                .verdict);
        }
    }

    #[test]
    fn satisfiable_on_fixed_tree() {
        let mut t = TreeModel::leaf([]);
        t.add_child(t.root(), []);
        t.add_child(t.root(), []);
        let f = parse("EX p & EX ~p").unwrap();
        assert!(satisfiable_on(&t, &f, FrontierMode::SelfLoop).unwrap());
        let chain = {
            let mut c = TreeModel::leaf([]);
            c.add_child(c.root(), []);
            c
        };
        assert!(!satisfiable_on(&chain, &f, FrontierMode::SelfLoop).unwrap());
        let _ = NodeId(0);
    }
}
