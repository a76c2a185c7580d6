//! Logic-to-logic translations between the EX, EF and EXEF fragments, the
//! embeddings of the finite-tree logics into the infinite-tree semantics,
//! and the k-layered-tree validator.

use std::sync::Arc;

use crate::syntax::{
    ag, and, ax, axag, conj, disj, ef, ex, exef, exists, implies, not, prop, FragmentId,
    Formula, PropName,
};
use crate::trees::{NodeId, TreeModel};

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum TranslationError {
    #[error("translation source must be the EX fragment, got {0}")]
    NotExFragment(FragmentId),
    #[error("translation source must be the EXEF fragment, got {0}")]
    NotExefFragment(FragmentId),
    #[error("operator {0} is outside the modality map's domain")]
    OutOfDomain(&'static str),
}

/// `layer_i`, with `layer_m1` standing for layer −1.
pub fn layer_prop(i: isize) -> PropName {
    if i < 0 {
        PropName::new("layer_m1")
    } else {
        PropName::new(format!("layer{i}"))
    }
}

fn layer(i: isize) -> Formula {
    Formula::Prop(layer_prop(i))
}

/// The layer propositions `layer_{−1}, …, layer_k`.
pub fn layer_props(k: usize) -> Vec<PropName> {
    (-1..=k as isize).map(layer_prop).collect()
}

/// `shape(k)` over infinite trees: layer unicity, monotonicity, weak
/// progress, no stuttering, and the root at `layer_k`.
pub fn shape_formula(k: usize) -> Formula {
    let k = k as isize;
    let all = disj((-1..=k).map(layer));
    let mut pairwise = Vec::new();
    for j in -1..=k {
        for i in -1..j {
            pairwise.push(not(and(layer(i), layer(j))));
        }
    }
    let unicity = ag(and(all, conj(pairwise)));
    let monotonic = conj((-1..=k).map(|i| {
        ag(implies(layer(i), ag(disj((-1..=i).map(layer)))))
    }));
    let progress = conj((0..=k).map(|i| ag(implies(layer(i), ef(layer(i - 1))))));
    let no_stutter = conj((0..=k).map(|i| {
        ag(implies(
            layer(i),
            not(exists(
                "p",
                and(prop("p"), ef(and(layer(i), not(prop("p"))))),
            )),
        ))
    }));
    conj([unicity, monotonic, progress, no_stutter, layer(k)])
}

/// Which of the k-layered conditions a tree violates first.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LayerCondition {
    /// (a) every node carries exactly one layer proposition
    Unicity,
    /// (b) a `layer_j` node (j ≥ 0) has a `layer_{j−1}` child, and no
    /// strict descendant exceeds its layer
    Progress,
    /// (c) no two distinct nodes on a branch share `layer_j` with j ≥ 0
    NoStutter,
    /// (d) the root carries `layer_k`
    RootLayer,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LayerCheckReport {
    pub verdict: bool,
    pub violation: Option<(LayerCondition, Vec<NodeId>)>,
}

/// Direct semantic check of the k-layered conditions, reporting the first
/// violated one with witness nodes.
pub fn is_k_layered(tree: &TreeModel, k: usize) -> LayerCheckReport {
    let props = layer_props(k);
    let layer_of = |v: NodeId| -> Vec<isize> {
        props
            .iter()
            .enumerate()
            .filter(|(_, p)| tree.has_label(v, p))
            .map(|(i, _)| i as isize - 1)
            .collect()
    };
    // (a)
    for v in tree.node_ids() {
        if layer_of(v).len() != 1 {
            return LayerCheckReport {
                verdict: false,
                violation: Some((LayerCondition::Unicity, vec![v])),
            };
        }
    }
    let single = |v: NodeId| layer_of(v)[0];
    // (b)
    for v in tree.node_ids() {
        let j = single(v);
        if j >= 0 && !tree.children(v).iter().any(|&c| single(c) == j - 1) {
            return LayerCheckReport {
                verdict: false,
                violation: Some((LayerCondition::Progress, vec![v])),
            };
        }
        let mut stack: Vec<NodeId> = tree.children(v).to_vec();
        while let Some(d) = stack.pop() {
            if single(d) > j {
                return LayerCheckReport {
                    verdict: false,
                    violation: Some((LayerCondition::Progress, vec![v, d])),
                };
            }
            stack.extend(tree.children(d).iter().copied());
        }
    }
    // (c)
    for v in tree.node_ids() {
        let j = single(v);
        if j < 0 {
            continue;
        }
        let mut stack: Vec<NodeId> = tree.children(v).to_vec();
        while let Some(d) = stack.pop() {
            if single(d) == j {
                return LayerCheckReport {
                    verdict: false,
                    violation: Some((LayerCondition::NoStutter, vec![v, d])),
                };
            }
            stack.extend(tree.children(d).iter().copied());
        }
    }
    // (d)
    if single(tree.root()) != k as isize {
        return LayerCheckReport {
            verdict: false,
            violation: Some((LayerCondition::RootLayer, vec![tree.root()])),
        };
    }
    LayerCheckReport { verdict: true, violation: None }
}

/// Rewrites `AX` into `¬EX¬`, leaving everything else untouched.
fn eliminate_ax(f: &Formula) -> Formula {
    use Formula::*;
    match f {
        True | False | Prop(_) => f.clone(),
        AX(g) => not(ex(not(eliminate_ax(g)))),
        Not(g) => not(eliminate_ax(g)),
        EX(g) => ex(eliminate_ax(g)),
        And(a, b) => and(eliminate_ax(a), eliminate_ax(b)),
        Or(a, b) => crate::syntax::or(eliminate_ax(a), eliminate_ax(b)),
        Implies(a, b) => implies(eliminate_ax(a), eliminate_ax(b)),
        Iff(a, b) => crate::syntax::iff(eliminate_ax(a), eliminate_ax(b)),
        Exists(p, g) => Exists(p.clone(), Arc::new(eliminate_ax(g))),
        Forall(p, g) => Forall(p.clone(), Arc::new(eliminate_ax(g))),
        EF(_) | AG(_) | AF(_) | EXEF(_) | AXAG(_) | EU(..) | AU(..) => {
            unreachable!("fragment checked by the caller")
        }
    }
}

/// Rewrites `AXAG` into `¬EXEF¬`.
fn eliminate_axag(f: &Formula) -> Formula {
    use Formula::*;
    match f {
        True | False | Prop(_) => f.clone(),
        AXAG(g) => not(exef(not(eliminate_axag(g)))),
        Not(g) => not(eliminate_axag(g)),
        EXEF(g) => exef(eliminate_axag(g)),
        And(a, b) => and(eliminate_axag(a), eliminate_axag(b)),
        Or(a, b) => crate::syntax::or(eliminate_axag(a), eliminate_axag(b)),
        Implies(a, b) => implies(eliminate_axag(a), eliminate_axag(b)),
        Iff(a, b) => crate::syntax::iff(eliminate_axag(a), eliminate_axag(b)),
        Exists(p, g) => Exists(p.clone(), Arc::new(eliminate_axag(g))),
        Forall(p, g) => Forall(p.clone(), Arc::new(eliminate_axag(g))),
        _ => unreachable!("fragment checked by the caller"),
    }
}

fn layered_trans(i: usize, f: &Formula, step: &dyn Fn(usize, Formula) -> Formula) -> Formula {
    use Formula::*;
    match f {
        True | False | Prop(_) => f.clone(),
        Not(g) => not(layered_trans(i, g, step)),
        And(a, b) => and(layered_trans(i, a, step), layered_trans(i, b, step)),
        Or(a, b) => crate::syntax::or(layered_trans(i, a, step), layered_trans(i, b, step)),
        Implies(a, b) => implies(layered_trans(i, a, step), layered_trans(i, b, step)),
        Iff(a, b) => crate::syntax::iff(layered_trans(i, a, step), layered_trans(i, b, step)),
        Exists(p, g) => Exists(p.clone(), Arc::new(layered_trans(i, g, step))),
        Forall(p, g) => Forall(p.clone(), Arc::new(layered_trans(i, g, step))),
        EX(g) => {
            debug_assert!(i >= 1, "layer index underflow: modal depth miscounted");
            step(i, layered_trans(i - 1, g, step))
        }
        _ => unreachable!("AX eliminated and fragment checked"),
    }
}

/// EX→EF translation over infinite trees: `trans(k, f) ∧ shape(k)` with
/// `k = md(f)` and `trans(i, EX ψ) = EF(layer_{i−1} ∧ trans(i−1, ψ))`. The
/// translated core never mentions `layer_{−1}`.
pub fn ex_to_ef(f: &Formula) -> Result<Formula, TranslationError> {
    match f.fragment() {
        FragmentId::ExOnly => {}
        other => return Err(TranslationError::NotExFragment(other)),
    }
    let clean = eliminate_ax(f);
    let k = clean.modal_depth();
    let core = layered_trans(k, &clean, &|i, inner| {
        ef(and(layer(i as isize - 1), inner))
    });
    debug_assert!(!core.all_props().contains(&layer_prop(-1)));
    Ok(and(core, shape_formula(k)))
}

/// The finite-tree `shape(k)` for the EX→EXEF translation: unicity with the
/// root pinned to `layer_k`, strict monotonicity along edges, and
/// childlessness of `layer_0` nodes. There is no `layer_{−1}` here and no
/// progress demand — a finite witness may stop above layer 0.
pub fn shape_formula_finite(k: usize) -> Formula {
    let k = k as isize;
    let root = if k == 0 {
        layer(k)
    } else {
        and(layer(k), conj((0..k).map(|i| not(layer(i)))))
    };
    let all = disj((0..=k).map(layer));
    let mut pairwise = Vec::new();
    for j in 0..=k {
        for i in 0..j {
            pairwise.push(not(and(layer(i), layer(j))));
        }
    }
    let everywhere = if pairwise.is_empty() { all } else { and(all, conj(pairwise)) };
    let unicity = and(root, axag(everywhere));
    let mut parts = vec![unicity, axag(disj((0..k).map(layer)))];
    parts.extend((0..k).map(|i| axag(implies(layer(i), axag(disj((0..i).map(layer)))))));
    parts.push(axag(implies(layer(0), not(exef(Formula::True)))));
    conj(parts)
}

/// EX→EXEF translation over finite trees (strict mode):
/// `trans(k, f) ∧ shape-finite(k)` with
/// `trans(i, EX ψ) = EXEF(layer_{i−1} ∧ trans(i−1, ψ))`.
pub fn ex_to_exef_finite(f: &Formula) -> Result<Formula, TranslationError> {
    match f.fragment() {
        FragmentId::ExOnly => {}
        other => return Err(TranslationError::NotExFragment(other)),
    }
    let clean = eliminate_ax(f);
    let k = clean.modal_depth();
    let core = layered_trans(k, &clean, &|i, inner| {
        exef(and(layer(i as isize - 1), inner))
    });
    Ok(and(core, shape_formula_finite(k)))
}

fn in_prop() -> Formula {
    prop("in")
}

/// Embeds finite-tree EX satisfiability into the infinite-tree semantics:
/// `in` carves out a subtree holding only finitely on each branch, and every
/// step is relativised to it. Returns `trans(f) ∧ φ_fin` with
/// `φ_fin = in ∧ AF ¬in ∧ AG(¬in → AG ¬in)`.
pub fn embed_finite_in_infinite(f: &Formula) -> Result<Formula, TranslationError> {
    match f.fragment() {
        FragmentId::ExOnly => {}
        other => return Err(TranslationError::NotExFragment(other)),
    }
    fn trans(f: &Formula) -> Formula {
        use Formula::*;
        match f {
            True | False | Prop(_) => f.clone(),
            Not(g) => not(trans(g)),
            And(a, b) => and(trans(a), trans(b)),
            Or(a, b) => crate::syntax::or(trans(a), trans(b)),
            Implies(a, b) => implies(trans(a), trans(b)),
            Iff(a, b) => crate::syntax::iff(trans(a), trans(b)),
            Exists(p, g) => Exists(p.clone(), Arc::new(trans(g))),
            Forall(p, g) => Forall(p.clone(), Arc::new(trans(g))),
            EX(g) => ex(and(in_prop(), trans(g))),
            _ => unreachable!("AX eliminated and fragment checked"),
        }
    }
    let clean = eliminate_ax(f);
    let fin = conj([
        in_prop(),
        crate::syntax::af(not(in_prop())),
        ag(implies(not(in_prop()), ag(not(in_prop())))),
    ]);
    Ok(and(trans(&clean), fin))
}

/// `φ ∧ EXEF ⊤ ∧ AXAG EXEF ⊤`: every node keeps a strict successor, forcing
/// maximal branches to be infinite (the hardness direction of the
/// general-tree embedding).
pub fn totalize(f: &Formula) -> Formula {
    and(
        f.clone(),
        and(exef(Formula::True), axag(exef(Formula::True))),
    )
}

/// Embeds general-tree (possibly finite-branch) EXEF satisfiability into the
/// infinite-tree semantics. Returns the relativised formula
/// `trans(f) ∧ φ'_fin` with `φ'_fin = in ∧ AXAG(¬in → AXAG ¬in)`, paired
/// with [`totalize`]`(f)` for the opposite direction.
pub fn embed_gt_in_infinite(f: &Formula) -> Result<(Formula, Formula), TranslationError> {
    match f.fragment() {
        FragmentId::ExefOnly => {}
        FragmentId::ExOnly if f.modal_depth() == 0 => {}
        other => return Err(TranslationError::NotExefFragment(other)),
    }
    fn trans(f: &Formula) -> Formula {
        use Formula::*;
        match f {
            True | False | Prop(_) => f.clone(),
            Not(g) => not(trans(g)),
            And(a, b) => and(trans(a), trans(b)),
            Or(a, b) => crate::syntax::or(trans(a), trans(b)),
            Implies(a, b) => implies(trans(a), trans(b)),
            Iff(a, b) => crate::syntax::iff(trans(a), trans(b)),
            Exists(p, g) => Exists(p.clone(), Arc::new(trans(g))),
            Forall(p, g) => Forall(p.clone(), Arc::new(trans(g))),
            EXEF(g) => exef(and(in_prop(), trans(g))),
            _ => unreachable!("AXAG eliminated and fragment checked"),
        }
    }
    let clean = eliminate_axag(f);
    let fin = and(
        in_prop(),
        axag(implies(not(in_prop()), axag(not(in_prop())))),
    );
    Ok((and(trans(&clean), fin), totalize(f)))
}

/// Node-by-node replacement of one modality pair by another; `AX` rides
/// along as the dual of `EX` in each direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModalityMap {
    ExToExef,
    ExefToEx,
    ExToEf,
    EfToEx,
}

pub fn rewrite_modality(f: &Formula, map: ModalityMap) -> Result<Formula, TranslationError> {
    use Formula::*;
    let rec = |g: &Arc<Formula>| rewrite_modality(g, map);
    Ok(match f {
        True | False | Prop(_) => f.clone(),
        Not(g) => not(rec(g)?),
        And(a, b) => and(rec(a)?, rec(b)?),
        Or(a, b) => crate::syntax::or(rec(a)?, rec(b)?),
        Implies(a, b) => implies(rec(a)?, rec(b)?),
        Iff(a, b) => crate::syntax::iff(rec(a)?, rec(b)?),
        Exists(p, g) => Exists(p.clone(), Arc::new(rec(g)?)),
        Forall(p, g) => Forall(p.clone(), Arc::new(rec(g)?)),
        EX(g) => match map {
            ModalityMap::ExToExef => exef(rec(g)?),
            ModalityMap::ExToEf => ef(rec(g)?),
            _ => return Err(TranslationError::OutOfDomain("EX")),
        },
        AX(g) => match map {
            ModalityMap::ExToExef => axag(rec(g)?),
            ModalityMap::ExToEf => ag(rec(g)?),
            _ => return Err(TranslationError::OutOfDomain("AX")),
        },
        EXEF(g) => match map {
            ModalityMap::ExefToEx => ex(rec(g)?),
            _ => return Err(TranslationError::OutOfDomain("EXEF")),
        },
        AXAG(g) => match map {
            ModalityMap::ExefToEx => ax(rec(g)?),
            _ => return Err(TranslationError::OutOfDomain("AXAG")),
        },
        EF(g) => match map {
            ModalityMap::EfToEx => ex(rec(g)?),
            _ => return Err(TranslationError::OutOfDomain("EF")),
        },
        AG(g) => match map {
            ModalityMap::EfToEx => ax(rec(g)?),
            _ => return Err(TranslationError::OutOfDomain("AG")),
        },
        AF(_) | EU(..) | AU(..) => return Err(TranslationError::OutOfDomain("until")),
    })
}

/// Layer decoration of a witness: a node at depth `j` gets
/// `layer_{max(−1, k−j)}` on top of its non-layer labels.
pub fn decorate_layers(tree: &TreeModel, k: usize) -> TreeModel {
    let layer_set: Vec<PropName> = layer_props(k.max(tree.height()));
    let depths = tree.depths();
    let mut out = tree.clone();
    for v in tree.node_ids() {
        for p in &layer_set {
            out.labels_mut(v).remove(p);
        }
        let level = (k as isize - depths[v.0] as isize).max(-1);
        out.labels_mut(v).insert(layer_prop(level));
    }
    out
}

/// Appends `copies` chain nodes below every leaf, each carrying the leaf's
/// labels; materializes the completion region a decorated witness needs.
pub fn extend_leaves(tree: &TreeModel, copies: usize) -> TreeModel {
    let mut out = tree.clone();
    let leaves: Vec<NodeId> = tree.node_ids().filter(|&v| tree.is_leaf(v)).collect();
    for leaf in leaves {
        let labels: Vec<PropName> = out.labels(leaf).iter().cloned().collect();
        let mut parent = leaf;
        for _ in 0..copies {
            parent = out.add_child(parent, labels.iter().cloned());
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::checker::{check_root, Backend};
    use crate::syntax::parse;
    use crate::trees::FrontierMode;

    fn chain(layers: &[&str]) -> TreeModel {
        let mut t = TreeModel::leaf([PropName::new(layers[0])]);
        let mut at = t.root();
        for l in &layers[1..] {
            at = t.add_child(at, [PropName::new(*l)]);
        }
        t
    }

    #[test]
    fn layered_chain_passes() {
        let t = chain(&["layer1", "layer0", "layer_m1"]);
        assert!(is_k_layered(&t, 1).verdict);
        let formula_side = check_root(
            &t,
            FrontierMode::SelfLoop,
            &shape_formula(1),
            Backend::Pruned,
        )
        .unwrap()
        .verdict;
        assert!(formula_side);
    }

    #[test]
    fn root_layer_violation() {
        let t = chain(&["layer0", "layer_m1"]);
        let report = is_k_layered(&t, 1);
        assert!(!report.verdict);
        assert_eq!(report.violation.unwrap().0, LayerCondition::RootLayer);
    }

    #[test]
    fn unicity_violation() {
        let mut t = chain(&["layer1", "layer0", "layer_m1"]);
        let root = t.root();
        t.labels_mut(root).insert(PropName::new("layer0"));
        let report = is_k_layered(&t, 1);
        assert_eq!(report.violation.unwrap().0, LayerCondition::Unicity);
    }

    #[test]
    fn no_stutter_display() {
        let f = shape_formula(1);
        let rendered = f.render();
        assert!(
            rendered.contains("AG (layer1 -> ~exists p. (p & EF (layer1 & ~p)))"),
            "got: {rendered}",
        );
        // layer_m1 appears in unicity and monotonicity clauses only: the
        // progress/no-stutter families start at layer 0
        assert!(!rendered.contains("EF layer_m1 & "));
    }

    #[test]
    fn shape_zero_conjuncts() {
        let f = shape_formula(0);
        let rendered = f.render();
        assert!(rendered.contains("layer_m1"));
        assert!(rendered.ends_with("& layer0"), "got: {rendered}");
    }

    #[test]
    fn ef_translation_of_ex() {
        let f = parse("EX p").unwrap();
        let out = ex_to_ef(&f).unwrap();
        let rendered = out.render();
        assert!(rendered.starts_with("EF (layer0 & p) & "), "got: {rendered}");
    }

    #[test]
    fn ef_translation_base() {
        let f = parse("p").unwrap();
        let out = ex_to_ef(&f).unwrap();
        assert!(out.render().starts_with("p & "));
    }

    #[test]
    fn ef_translation_quantifier_homomorphic() {
        let f = parse("exists q. EX q").unwrap();
        let out = ex_to_ef(&f).unwrap();
        assert!(out.render().starts_with("exists q. EF (layer0 & q)"), "{out}");
    }

    #[test]
    fn exef_finite_translation() {
        let f = parse("EX p").unwrap();
        let out = ex_to_exef_finite(&f).unwrap();
        let rendered = out.render();
        assert!(rendered.starts_with("EXEF (layer0 & p) & "), "got: {rendered}");
        assert!(
            rendered.contains("AXAG (layer0 -> ~EXEF true)"),
            "got: {rendered}",
        );
        assert_eq!(out.fragment(), FragmentId::ExefOnly);
    }

    #[test]
    fn exef_finite_on_booleans() {
        let f = parse("p & ~q").unwrap();
        let out = ex_to_exef_finite(&f).unwrap();
        assert!(out.render().starts_with("p & ~q & (layer0"), "{out}");
        // depth 0: no strict descendants allowed at all
        assert!(out.render().contains("AXAG false"), "{out}");
    }

    #[test]
    fn finite_embedding_shapes() {
        let f = parse("EX p").unwrap();
        let out = embed_finite_in_infinite(&f).unwrap();
        assert_eq!(
            out.render(),
            "EX (in & p) & (in & AF ~in & AG (~in -> AG ~in))",
        );
        let base = parse("p").unwrap();
        let out2 = embed_finite_in_infinite(&base).unwrap();
        assert!(out2.render().starts_with("p & "));
    }

    #[test]
    fn gt_embedding_shapes() {
        let f = parse("EXEF p").unwrap();
        let (embedded, total) = embed_gt_in_infinite(&f).unwrap();
        assert_eq!(
            embedded.render(),
            "EXEF (in & p) & (in & AXAG (~in -> AXAG ~in))",
        );
        assert_eq!(total.render(), "EXEF p & (EXEF true & AXAG EXEF true)");
    }

    #[test]
    fn modality_round_trip() {
        let f = parse("exists q. (EX (q & p) & AX ~q)").unwrap();
        let there = rewrite_modality(&f, ModalityMap::ExToExef).unwrap();
        assert_eq!(there.render(), "exists q. (EXEF (q & p) & AXAG ~q)");
        let back = rewrite_modality(&there, ModalityMap::ExefToEx).unwrap();
        assert_eq!(back, f);

        let ef_side = rewrite_modality(&f, ModalityMap::ExToEf).unwrap();
        assert_eq!(ef_side.render(), "exists q. (EF (q & p) & AG ~q)");
        assert_eq!(rewrite_modality(&ef_side, ModalityMap::EfToEx).unwrap(), f);

        assert!(rewrite_modality(&f, ModalityMap::ExefToEx).is_err());
    }

    #[test]
    fn decoration_by_depth() {
        let mut t = TreeModel::leaf([PropName::new("p")]);
        let c = t.add_child(t.root(), []);
        t.add_child(c, []);
        let d = decorate_layers(&t, 1);
        assert!(d.has_label(d.root(), &layer_prop(1)));
        assert!(d.has_label(NodeId(1), &layer_prop(0)));
        assert!(d.has_label(NodeId(2), &layer_prop(-1)));
        assert!(d.has_label(d.root(), &PropName::new("p")));
        assert!(is_k_layered(&d, 1).verdict);
    }

    #[test]
    fn extend_leaves_copies_labels() {
        let t = TreeModel::leaf([PropName::new("p")]);
        let e = extend_leaves(&t, 2);
        assert_eq!(e.len(), 3);
        assert!(e.node_ids().all(|v| e.has_label(v, &PropName::new("p"))));
    }
}
