//! The satisfaction relation for QCTL over frontier-completed finite trees,
//! with two quantifier backends, plus the prenex-normal-form rewriter.

mod eval;
mod pnf;

pub use pnf::{is_prenex, prefix_len, to_pnf, PnfError};

use std::collections::BTreeMap;

use crate::syntax::{Formula, PropName};
use crate::trees::{
    apply_frontier, enumerate_trees, EnumerationError, EvalNode, FrontierMode, NodeId, TreeModel,
};
use eval::{Evaluator, V3};

/// Quantifier search strategy. Both backends compute the same function;
/// `Exhaustive` is the reference oracle (it iterates proposition variants),
/// `Pruned` assigns the quantified proposition node by node, re-evaluating
/// the body in three-valued logic and cutting as soon as it is determined.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Backend {
    Exhaustive,
    #[default]
    Pruned,
}

/// Assignment of propositions to explicit node sets: a witness for the
/// outermost run of existential quantifiers when the verdict is true, or a
/// counterexample for the outermost run of universal quantifiers when it is
/// false.
pub type Labeling = BTreeMap<PropName, Vec<NodeId>>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckOutcome {
    pub verdict: bool,
    pub witness: Option<Labeling>,
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum CheckError {
    #[error("strict frontier mode rejects {0} (finite maximal paths have no until semantics)")]
    StrictUntil(&'static str),
    #[error("node {0} is out of range")]
    BadNode(usize),
    #[error("quantified checking supports at most 60 explicit nodes, tree has {0}")]
    TooManyNodes(usize),
}

fn strict_offender(f: &Formula) -> Option<&'static str> {
    use Formula::*;
    match f {
        True | False | Prop(_) => None,
        EU(..) => Some("E[· U ·]"),
        AU(..) => Some("A[· U ·]"),
        AF(_) => Some("AF"),
        Not(g) | EX(g) | AX(g) | EF(g) | AG(g) | EXEF(g) | AXAG(g) | Exists(_, g)
        | Forall(_, g) => strict_offender(g),
        And(a, b) | Or(a, b) | Implies(a, b) | Iff(a, b) => {
            strict_offender(a).or_else(|| strict_offender(b))
        }
    }
}

/// Splits a leading run of same-kind quantifiers, returning the run's props,
/// whether it is existential, and the remaining body.
fn quantifier_run(f: &Formula) -> Option<(bool, Vec<PropName>, &Formula)> {
    let exists = match f {
        Formula::Exists(..) => true,
        Formula::Forall(..) => false,
        _ => return None,
    };
    let mut props = Vec::new();
    let mut rest = f;
    loop {
        rest = match (exists, rest) {
            (true, Formula::Exists(p, g)) => {
                props.push(p.clone());
                g.as_ref()
            }
            (false, Formula::Forall(p, g)) => {
                props.push(p.clone());
                g.as_ref()
            }
            _ => break,
        };
    }
    Some((exists, props, rest))
}

/// Evaluates `f` at node `v` of `tree` completed by `mode`.
///
/// In `Strict` mode `EU`/`AU`/`AF` are rejected; `EF`/`AG`/`EXEF`/`AXAG` are
/// evaluated natively by reachability and remain available. A proposition
/// absent from every label is simply false everywhere.
pub fn check(
    tree: &TreeModel,
    mode: FrontierMode,
    v: NodeId,
    f: &Formula,
    backend: Backend,
) -> Result<CheckOutcome, CheckError> {
    if v.0 >= tree.len() {
        return Err(CheckError::BadNode(v.0));
    }
    if mode == FrontierMode::Strict {
        if let Some(op) = strict_offender(f) {
            return Err(CheckError::StrictUntil(op));
        }
    }
    let has_quant = {
        fn any_quant(f: &Formula) -> bool {
            use Formula::*;
            match f {
                Exists(..) | Forall(..) => true,
                True | False | Prop(_) => false,
                Not(g) | EX(g) | AX(g) | EF(g) | AG(g) | AF(g) | EXEF(g) | AXAG(g) => any_quant(g),
                And(a, b) | Or(a, b) | Implies(a, b) | Iff(a, b) | EU(a, b) | AU(a, b) => {
                    any_quant(a) || any_quant(b)
                }
            }
        }
        any_quant(f)
    };
    if has_quant && tree.len() > eval::MAX_QUANTIFIED_NODES {
        return Err(CheckError::TooManyNodes(tree.len()));
    }
    let node = EvalNode::Explicit(v);

    let mut ev = Evaluator::new(apply_frontier(tree, mode), backend == Backend::Exhaustive);
    let value = ev.eval(f, node);
    debug_assert_ne!(value, V3::Unknown, "top-level verdict must be definite");
    let verdict = value == V3::True;

    // Witness or counterexample for the outermost quantifier run: re-run a
    // dedicated search for the run's assignment when the verdict says one
    // exists.
    let witness = match quantifier_run(f) {
        Some((exists, props, body)) if verdict == exists => {
            let mut ev2 =
                Evaluator::new(apply_frontier(tree, mode), backend == Backend::Exhaustive);
            ev2.prefix_search(&props, body, node, exists)
                .map(|found| found.into_iter().collect::<Labeling>())
        }
        _ => None,
    };
    Ok(CheckOutcome { verdict, witness })
}

/// `check` at the root.
pub fn check_root(
    tree: &TreeModel,
    mode: FrontierMode,
    f: &Formula,
    backend: Backend,
) -> Result<CheckOutcome, CheckError> {
    check(tree, mode, tree.root(), f, backend)
}

#[derive(Debug, thiserror::Error)]
pub enum EquivalenceError {
    #[error(transparent)]
    Enumeration(#[from] EnumerationError),
    #[error(transparent)]
    Check(#[from] CheckError),
}

/// True iff `f` and `g` agree at the root of every tree with branches of
/// length exactly `depth`, branching at most `max_branching`, labelled over
/// `props`, under self-loop completion. The workhorse behind every
/// lemma-level equivalence test.
pub fn equivalent_on_small_trees(
    f: &Formula,
    g: &Formula,
    max_branching: usize,
    depth: usize,
    props: &[PropName],
    cap: u128,
) -> Result<bool, EquivalenceError> {
    for tree in enumerate_trees(max_branching, depth, props, cap)? {
        let vf = check_root(&tree, FrontierMode::SelfLoop, f, Backend::Pruned)?.verdict;
        let vg = check_root(&tree, FrontierMode::SelfLoop, g, Backend::Pruned)?.verdict;
        if vf != vg {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{self, parse};
    use crate::trees::TreeModel;

    fn leaf_p() -> TreeModel {
        TreeModel::leaf([PropName::new("p")])
    }

    fn check_sl(t: &TreeModel, f: &str) -> bool {
        let f = parse(f).unwrap();
        check_root(t, FrontierMode::SelfLoop, &f, Backend::Pruned)
            .unwrap()
            .verdict
    }

    #[test]
    fn prop_membership() {
        assert!(check_sl(&leaf_p(), "p"));
        assert!(!check_sl(&leaf_p(), "q"));
    }

    #[test]
    fn quantifier_cannot_rescue_contradiction() {
        assert!(!check_sl(&leaf_p(), "exists q. q & ~p"));
        assert!(check_sl(&leaf_p(), "exists q. q & p"));
    }

    #[test]
    fn unique_successor_formula() {
        // bind₁(x): x holds at exactly one child
        let bind = "EX x & ~exists q. (EX (x & q) & EX (x & ~q))";
        let mut one = TreeModel::leaf([]);
        one.add_child(one.root(), [PropName::new("x")]);
        one.add_child(one.root(), []);
        assert!(check_sl(&one, bind));

        let mut two = TreeModel::leaf([]);
        two.add_child(two.root(), [PropName::new("x")]);
        two.add_child(two.root(), [PropName::new("x")]);
        assert!(!check_sl(&two, bind));
    }

    #[test]
    fn backends_agree_on_unique_successor() {
        let bind = parse("EX x & ~exists q. (EX (x & q) & EX (x & ~q))").unwrap();
        let mut t = TreeModel::leaf([]);
        t.add_child(t.root(), [PropName::new("x")]);
        t.add_child(t.root(), []);
        let pruned = check_root(&t, FrontierMode::SelfLoop, &bind, Backend::Pruned).unwrap();
        let exhaustive =
            check_root(&t, FrontierMode::SelfLoop, &bind, Backend::Exhaustive).unwrap();
        assert_eq!(pruned.verdict, exhaustive.verdict);
        assert!(pruned.verdict);
    }

    #[test]
    fn strict_rejects_until() {
        let t = leaf_p();
        let f = parse("E[ true U p ]").unwrap();
        assert!(matches!(
            check_root(&t, FrontierMode::Strict, &f, Backend::Pruned),
            Err(CheckError::StrictUntil(_)),
        ));
        let g = parse("AF p").unwrap();
        assert!(check_root(&t, FrontierMode::Strict, &g, Backend::Pruned).is_err());
        // EF stays available in strict mode
        let h = parse("EF p").unwrap();
        assert!(check_root(&t, FrontierMode::Strict, &h, Backend::Pruned).unwrap().verdict);
    }

    #[test]
    fn strict_leaf_modalities() {
        let t = leaf_p();
        assert!(!check_root(&t, FrontierMode::Strict, &parse("EX true").unwrap(), Backend::Pruned)
            .unwrap()
            .verdict);
        assert!(check_root(&t, FrontierMode::Strict, &parse("AX false").unwrap(), Backend::Pruned)
            .unwrap()
            .verdict);
        assert!(
            !check_root(&t, FrontierMode::Strict, &parse("EXEF true").unwrap(), Backend::Pruned)
                .unwrap()
                .verdict
        );
    }

    #[test]
    fn until_on_chain() {
        let mut t = TreeModel::leaf([PropName::new("a")]);
        let c1 = t.add_child(t.root(), [PropName::new("a")]);
        t.add_child(c1, [PropName::new("b")]);
        assert!(check_sl(&t, "E[ a U b ]"));
        assert!(check_sl(&t, "A[ a U b ]"));
        assert!(check_sl(&t, "AF b"));
        assert!(!check_sl(&t, "E[ b U a ]") || check_sl(&t, "a"));
        // self-loop at the b-leaf keeps AG b false at the root
        assert!(!check_sl(&t, "AG b"));
        assert!(check_sl(&t, "EF b"));
    }

    #[test]
    fn au_requires_all_paths() {
        let mut t = TreeModel::leaf([PropName::new("a")]);
        t.add_child(t.root(), [PropName::new("b")]);
        t.add_child(t.root(), [PropName::new("a")]);
        // the a-leaf loops forever without reaching b
        assert!(!check_sl(&t, "A[ a U b ]"));
        assert!(check_sl(&t, "E[ a U b ]"));
    }

    #[test]
    fn exef_is_strict() {
        let t = leaf_p();
        // With a self-loop the strict future still reaches the node itself.
        assert!(check_sl(&t, "EXEF p"));
        let mut t2 = TreeModel::leaf([PropName::new("p")]);
        t2.add_child(t2.root(), []);
        // p holds only at the root; strict future from the root sees the leaf only
        assert!(!check_sl(&t2, "EXEF p"));
        assert!(check_sl(&t2, "EF p"));
    }

    #[test]
    fn witness_reverifies() {
        let mut t = TreeModel::leaf([]);
        t.add_child(t.root(), [PropName::new("x")]);
        t.add_child(t.root(), []);
        let f = parse("exists q. (EX (x & q) & EX ~q)").unwrap();
        for backend in [Backend::Pruned, Backend::Exhaustive] {
            let out = check_root(&t, FrontierMode::SelfLoop, &f, backend).unwrap();
            assert!(out.verdict);
            let labeling = out.witness.expect("witness for outermost exists");
            let mut relabeled = t.clone();
            for (p, nodes) in &labeling {
                for v in relabeled.node_ids() {
                    relabeled.labels_mut(v).remove(p);
                }
                for &v in nodes {
                    relabeled.labels_mut(v).insert(p.clone());
                }
            }
            let body = parse("EX (x & q) & EX ~q").unwrap();
            assert!(
                check_root(&relabeled, FrontierMode::SelfLoop, &body, Backend::Exhaustive)
                    .unwrap()
                    .verdict
            );
        }
    }

    #[test]
    fn counterexample_for_forall() {
        let t = leaf_p();
        let f = parse("forall q. q").unwrap();
        let out = check_root(&t, FrontierMode::SelfLoop, &f, Backend::Pruned).unwrap();
        assert!(!out.verdict);
        let labeling = out.witness.expect("counterexample for outermost forall");
        // the falsifying assignment leaves q off the root
        assert!(labeling[&PropName::new("q")].is_empty());
    }

    #[test]
    fn duality_forall_exists() {
        let mut t = TreeModel::leaf([]);
        t.add_child(t.root(), [PropName::new("p")]);
        for text in ["EX (p & q)", "q | EX ~q", "AX (q -> p)"] {
            let body = parse(text).unwrap();
            let direct = syntax::forall("q", body.clone());
            let dual = syntax::not(syntax::exists("q", syntax::not(body)));
            let a = check_root(&t, FrontierMode::SelfLoop, &direct, Backend::Pruned).unwrap();
            let b = check_root(&t, FrontierMode::SelfLoop, &dual, Backend::Pruned).unwrap();
            assert_eq!(a.verdict, b.verdict, "duality failed on {text}");
        }
    }

    #[test]
    fn pads_inherit_quantified_labels() {
        // exists q at a leaf: with chain padding the pads copy the leaf's q,
        // so EX (q <-> q) style bodies cannot distinguish pad from leaf.
        let t = TreeModel::leaf([]);
        let f = parse("exists q. (q & AX q)").unwrap();
        let looped = check_root(&t, FrontierMode::SelfLoop, &f, Backend::Pruned).unwrap();
        let padded = check_root(&t, FrontierMode::ChainPad(2), &f, Backend::Pruned).unwrap();
        assert!(looped.verdict);
        assert_eq!(looped.verdict, padded.verdict);
        // and a body that would need the pad to differ from the leaf fails
        let g = parse("exists q. (q & EX ~q)").unwrap();
        assert!(!check_root(&t, FrontierMode::ChainPad(2), &g, Backend::Pruned).unwrap().verdict);
    }

    #[test]
    fn equivalences_on_small_trees() {
        let p = PropName::new("p");
        let f = parse("EF p").unwrap();
        let g = parse("p | EXEF p").unwrap();
        assert!(equivalent_on_small_trees(&f, &g, 2, 2, &[p.clone()], 1 << 24).unwrap());
        let f2 = parse("EX p").unwrap();
        assert!(equivalent_on_small_trees(&f2, &f2, 2, 1, &[p.clone()], 1 << 24).unwrap());
        let g2 = parse("AX p").unwrap();
        assert!(!equivalent_on_small_trees(&f2, &g2, 2, 1, &[p], 1 << 24).unwrap());
    }
}
