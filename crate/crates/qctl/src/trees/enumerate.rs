//! Enumeration of candidate tree models for satisfiability search and
//! brute-force oracles.
//!
//! Shapes are canonicalized by non-decreasing subtree serialization, so
//! isomorphic sibling orders are not double-counted; satisfaction is
//! invariant under sibling permutation, so nothing is lost. Labelled trees
//! are produced shape by shape, label bitmask ascending (bit `node·P + j`
//! drives proposition `j` at that node).

use super::{NodeId, TreeModel, TreeNode};
use crate::syntax::PropName;
use std::collections::BTreeSet;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum EnumerationError {
    #[error(
        "enumeration cap exceeded: about {estimate} candidate trees \
         (cap {cap}); raise the cap to proceed"
    )]
    CapExceeded { estimate: u128, cap: u128 },
}

/// Unlabelled tree shape in parent-array form, nodes in preorder.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Shape {
    /// parent[i] for i > 0; parent[0] is unused (root).
    parents: Vec<usize>,
}

impl Shape {
    pub fn len(&self) -> usize {
        self.parents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parents.is_empty()
    }

    pub fn to_tree(&self) -> TreeModel {
        let n = self.parents.len();
        let mut nodes: Vec<TreeNode> = (0..n)
            .map(|_| TreeNode { labels: BTreeSet::new(), children: Vec::new() })
            .collect();
        for i in 1..n {
            let p = self.parents[i];
            nodes[p].children.push(NodeId(i));
        }
        TreeModel::from_parts(NodeId(0), nodes).expect("shape is a valid tree")
    }
}

/// Canonical shapes where every branch has length exactly `exact_depth` and
/// each internal node has between 1 and `max_branching` children. Returned
/// sorted by node count, then by serialization.
pub fn uniform_shapes(max_branching: usize, exact_depth: usize) -> Vec<Shape> {
    // Multisets of child subtrees, child serializations non-decreasing.
    fn level(max_branching: usize, depth: usize) -> Vec<Vec<usize>> {
        // Each shape as a parent vector rooted at 0.
        if depth == 0 {
            return vec![vec![usize::MAX]]; // single node, parent unused
        }
        let subtrees = level(max_branching, depth - 1);
        let mut out = Vec::new();
        // choose a non-decreasing multiset of 1..=max_branching subtrees by index
        fn choose(
            subtrees: &[Vec<usize>],
            max: usize,
            start: usize,
            picked: &mut Vec<usize>,
            out: &mut Vec<Vec<usize>>,
        ) {
            if !picked.is_empty() {
                // materialize this combination
                let mut parents = vec![usize::MAX];
                for &idx in picked.iter() {
                    let sub = &subtrees[idx];
                    let offset = parents.len();
                    parents.push(0); // subtree root hangs off our root
                    for (i, &p) in sub.iter().enumerate().skip(1) {
                        let _ = i;
                        parents.push(p + offset);
                    }
                }
                out.push(parents);
            }
            if picked.len() == max {
                return;
            }
            for idx in start..subtrees.len() {
                picked.push(idx);
                choose(subtrees, max, idx, picked, out);
                picked.pop();
            }
        }
        let mut picked = Vec::new();
        choose(&subtrees, max_branching, 0, &mut picked, &mut out);
        out
    }
    let mut shapes: Vec<Shape> = level(max_branching, exact_depth)
        .into_iter()
        .map(|parents| Shape { parents })
        .collect();
    shapes.sort_by_key(|s| {
        let t = s.to_tree();
        (s.len(), t.serialize_shape(t.root()))
    });
    shapes
}

/// Canonical shapes with at most `max_nodes` nodes, any branch lengths, and
/// optionally bounded depth and branching. Sorted by node count, then by
/// serialization.
pub fn shapes_up_to(
    max_nodes: usize,
    max_depth: Option<usize>,
    max_branching: Option<usize>,
) -> Vec<Shape> {
    // Shapes with at most `budget` nodes and height ≤ depth_left, children
    // chosen as a non-decreasing multiset over the recursively generated
    // (duplicate-free) pool, so every shape appears exactly once.
    fn gen(
        budget: usize,
        depth_left: Option<usize>,
        max_branching: Option<usize>,
    ) -> Vec<Vec<usize>> {
        let mut out = vec![vec![usize::MAX]]; // the leaf
        if budget <= 1 || depth_left == Some(0) {
            return out;
        }
        let pool = gen(budget - 1, depth_left.map(|d| d - 1), max_branching);
        let max_children = max_branching.unwrap_or(budget - 1);
        fn choose(
            pool: &[Vec<usize>],
            budget: usize,
            max_children: usize,
            start: usize,
            picked: &mut Vec<usize>,
            used: usize,
            out: &mut Vec<Vec<usize>>,
        ) {
            if !picked.is_empty() {
                let mut parents = vec![usize::MAX];
                for &idx in picked.iter() {
                    let sub = &pool[idx];
                    let offset = parents.len();
                    parents.push(0);
                    for &p in sub.iter().skip(1) {
                        parents.push(p + offset);
                    }
                }
                out.push(parents);
            }
            if picked.len() >= max_children {
                return;
            }
            for idx in start..pool.len() {
                if used + pool[idx].len() > budget {
                    continue;
                }
                picked.push(idx);
                choose(pool, budget, max_children, idx, picked, used + pool[idx].len(), out);
                picked.pop();
            }
        }
        let mut picked = Vec::new();
        choose(&pool, budget - 1, max_children, 0, &mut picked, 0, &mut out);
        out
    }
    let mut shapes: Vec<Shape> = gen(max_nodes, max_depth, max_branching)
        .into_iter()
        .map(|parents| Shape { parents })
        .collect();
    shapes.sort_by_key(|s| {
        let t = s.to_tree();
        (s.len(), t.serialize_shape(t.root()))
    });
    shapes
}

/// All label assignments of `props` over the shape, bitmask ascending.
pub fn labelings<'a>(
    shape: &'a Shape,
    props: &'a [PropName],
) -> impl Iterator<Item = TreeModel> + 'a {
    let bits = shape.len() * props.len();
    assert!(bits < 64, "labeling enumeration needs fewer than 64 bits");
    let total: u64 = 1 << bits;
    (0..total).map(move |mask| {
        let mut tree = shape.to_tree();
        apply_label_mask(&mut tree, props, mask);
        tree
    })
}

/// Writes label bitmask `mask` onto the tree: bit `node·P + j` sets
/// `props[j]` at that node.
pub fn apply_label_mask(tree: &mut TreeModel, props: &[PropName], mask: u64) {
    let p = props.len();
    for v in 0..tree.len() {
        for (j, name) in props.iter().enumerate() {
            if mask & (1 << (v * p + j)) != 0 {
                tree.labels_mut(NodeId(v)).insert(name.clone());
            } else {
                tree.labels_mut(NodeId(v)).remove(name);
            }
        }
    }
}

/// Every tree (up to sibling order) whose branches all have length exactly
/// `exact_depth`, branching at most `max_branching`, with all label
/// assignments over `props`; deterministic order, no duplicates.
///
/// Refuses with a count estimate when the candidate space exceeds `cap`.
pub fn enumerate_trees(
    max_branching: usize,
    exact_depth: usize,
    props: &[PropName],
    cap: u128,
) -> Result<Vec<TreeModel>, EnumerationError> {
    let shapes = uniform_shapes(max_branching, exact_depth);
    let estimate: u128 = shapes
        .iter()
        .map(|s| 1u128 << ((s.len() * props.len()).min(126)))
        .sum();
    if estimate > cap {
        return Err(EnumerationError::CapExceeded { estimate, cap });
    }
    let mut out = Vec::new();
    for shape in &shapes {
        out.extend(labelings(shape, props));
    }
    Ok(out)
}

/// Like [`enumerate_trees`] but over all branch lengths up to `max_depth`
/// and at most `max_nodes` nodes; the oracle-side search space.
pub fn enumerate_trees_bounded(
    max_nodes: usize,
    max_depth: Option<usize>,
    max_branching: Option<usize>,
    props: &[PropName],
    cap: u128,
) -> Result<Vec<TreeModel>, EnumerationError> {
    let shapes = shapes_up_to(max_nodes, max_depth, max_branching);
    let estimate: u128 = shapes
        .iter()
        .map(|s| 1u128 << ((s.len() * props.len()).min(126)))
        .sum();
    if estimate > cap {
        return Err(EnumerationError::CapExceeded { estimate, cap });
    }
    let mut out = Vec::new();
    for shape in &shapes {
        out.extend(labelings(shape, props));
    }
    Ok(out)
}

/// Uniform-depth shapes as bare trees; used where the caller wants to search
/// labelings itself.
pub fn enumerate_shapes(max_branching: usize, exact_depth: usize) -> Vec<TreeModel> {
    uniform_shapes(max_branching, exact_depth)
        .iter()
        .map(Shape::to_tree)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chain_shape_is_unique() {
        let trees = enumerate_trees(1, 2, &[], 1 << 20).unwrap();
        assert_eq!(trees.len(), 1);
        assert_eq!(trees[0].len(), 3);
    }

    #[test]
    fn depth_one_branching_two() {
        let trees = enumerate_trees(2, 1, &[], 1 << 20).unwrap();
        assert_eq!(trees.len(), 2); // one child; two children
    }

    #[test]
    fn depth_zero_with_prop() {
        let trees = enumerate_trees(2, 0, &[PropName::new("p")], 1 << 20).unwrap();
        assert_eq!(trees.len(), 2);
    }

    #[test]
    fn uniform_depth_two_branching_two_shapes() {
        // multisets: S(2) = S(1) + C(S(1)+1, 2) with S(1) = 2 → 5 shapes
        assert_eq!(uniform_shapes(2, 2).len(), 5);
        for s in uniform_shapes(2, 2) {
            let t = s.to_tree();
            assert!(t.is_uniform_depth(2), "{:?}", s);
        }
    }

    #[test]
    fn bounded_shapes_small_counts() {
        // unordered rooted trees by node count: 1, 1, 2, 4, 9
        let all = shapes_up_to(5, None, None);
        let by_size = |n: usize| all.iter().filter(|s| s.len() == n).count();
        assert_eq!(by_size(1), 1);
        assert_eq!(by_size(2), 1);
        assert_eq!(by_size(3), 2);
        assert_eq!(by_size(4), 4);
        assert_eq!(by_size(5), 9);
    }

    #[test]
    fn bounded_shapes_respect_depth() {
        for s in shapes_up_to(6, Some(1), None) {
            assert!(s.to_tree().height() <= 1);
        }
        // depth ≤ 1 shapes with ≤ 6 nodes: root with 0..=5 children
        assert_eq!(shapes_up_to(6, Some(1), None).len(), 6);
    }

    #[test]
    fn cap_refusal_estimates() {
        let props: Vec<PropName> = (0..3).map(|i| PropName::new(format!("a{i}"))).collect();
        let err = enumerate_trees(2, 2, &props, 10).unwrap_err();
        match err {
            EnumerationError::CapExceeded { estimate, cap } => {
                assert!(estimate > cap);
            }
        }
    }

    #[test]
    fn shapes_sorted_by_size() {
        let shapes = shapes_up_to(6, None, Some(2));
        for w in shapes.windows(2) {
            assert!(w[0].len() <= w[1].len());
        }
    }
}
