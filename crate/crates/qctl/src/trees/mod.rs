//! Finite labelled tree models, Kripke structures, computation-tree
//! unfolding, proposition variants, tree enumeration and frontier
//! completion.

mod enumerate;

pub use enumerate::{
    apply_label_mask, enumerate_shapes, enumerate_trees, enumerate_trees_bounded, labelings,
    shapes_up_to, uniform_shapes, EnumerationError, Shape,
};

use std::collections::BTreeSet;
use std::fmt;

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use crate::syntax::PropName;

/// Index of a node in a [`TreeModel`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub usize);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeNode {
    pub labels: BTreeSet<PropName>,
    pub children: Vec<NodeId>,
}

/// A finite rooted labelled tree. Children are ordered lists for
/// deterministic iteration, but all semantics are order-insensitive.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeModel {
    nodes: Vec<TreeNode>,
    root: NodeId,
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum TreeError {
    #[error("node {0} referenced but not defined")]
    MissingNode(usize),
    #[error("duplicate node id {0}")]
    DuplicateId(usize),
    #[error("node {0} has more than one parent (or a cycle through it)")]
    MultipleParents(usize),
    #[error("node {0} is unreachable from the root")]
    Orphan(usize),
    #[error("root {0} must not appear as a child")]
    RootHasParent(usize),
    #[error("tetration value t({k},{n}) exceeds the configured cap {cap}")]
    TetrationCap { k: usize, n: usize, cap: u64 },
    #[error("node number precondition violated: node {node} is not of type {k}")]
    NotOfType { node: usize, k: usize },
}

impl TreeModel {
    /// Single-node tree with the given labels.
    pub fn leaf(labels: impl IntoIterator<Item = PropName>) -> Self {
        TreeModel {
            nodes: vec![TreeNode { labels: labels.into_iter().collect(), children: Vec::new() }],
            root: NodeId(0),
        }
    }

    /// Builds a tree from per-node label sets and child lists. Index 0 need
    /// not be the root; `root` names it explicitly.
    pub fn from_parts(
        root: NodeId,
        nodes: Vec<TreeNode>,
    ) -> Result<Self, TreeError> {
        let t = TreeModel { nodes, root };
        t.validate()?;
        Ok(t)
    }

    fn validate(&self) -> Result<(), TreeError> {
        let n = self.nodes.len();
        let mut parents = vec![0usize; n];
        for node in &self.nodes {
            for &NodeId(c) in &node.children {
                if c >= n {
                    return Err(TreeError::MissingNode(c));
                }
                parents[c] += 1;
                if parents[c] > 1 {
                    return Err(TreeError::MultipleParents(c));
                }
            }
        }
        if parents[self.root.0] != 0 {
            return Err(TreeError::RootHasParent(self.root.0));
        }
        // Reachability doubles as the cycle check: every node reachable and
        // each non-root having exactly one parent forces a rooted tree.
        let mut seen = vec![false; n];
        let mut stack = vec![self.root];
        while let Some(NodeId(v)) = stack.pop() {
            if seen[v] {
                continue;
            }
            seen[v] = true;
            stack.extend(self.nodes[v].children.iter().copied());
        }
        if let Some(orphan) = seen.iter().position(|s| !s) {
            return Err(TreeError::Orphan(orphan));
        }
        Ok(())
    }

    pub fn root(&self) -> NodeId {
        self.root
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node_ids(&self) -> impl Iterator<Item = NodeId> {
        (0..self.nodes.len()).map(NodeId)
    }

    pub fn children(&self, v: NodeId) -> &[NodeId] {
        &self.nodes[v.0].children
    }

    pub fn labels(&self, v: NodeId) -> &BTreeSet<PropName> {
        &self.nodes[v.0].labels
    }

    pub fn labels_mut(&mut self, v: NodeId) -> &mut BTreeSet<PropName> {
        &mut self.nodes[v.0].labels
    }

    pub fn has_label(&self, v: NodeId, p: &PropName) -> bool {
        self.nodes[v.0].labels.contains(p)
    }

    pub fn is_leaf(&self, v: NodeId) -> bool {
        self.nodes[v.0].children.is_empty()
    }

    /// Edge distance from the root.
    pub fn depth(&self, v: NodeId) -> usize {
        self.depths()[v.0]
    }

    pub fn depths(&self) -> Vec<usize> {
        let mut d = vec![0usize; self.nodes.len()];
        let mut stack = vec![self.root];
        while let Some(NodeId(v)) = stack.pop() {
            for &NodeId(c) in &self.nodes[v].children {
                d[c] = d[v] + 1;
                stack.push(NodeId(c));
            }
        }
        d
    }

    /// Length of the longest branch (in edges).
    pub fn height(&self) -> usize {
        self.depths().into_iter().max().unwrap_or(0)
    }

    /// True when every maximal branch has exactly the given length.
    pub fn is_uniform_depth(&self, depth: usize) -> bool {
        let depths = self.depths();
        self.node_ids()
            .all(|v| !self.is_leaf(v) || depths[v.0] == depth)
    }

    /// Appends a fresh child and returns its id.
    pub fn add_child(
        &mut self,
        parent: NodeId,
        labels: impl IntoIterator<Item = PropName>,
    ) -> NodeId {
        let id = NodeId(self.nodes.len());
        self.nodes.push(TreeNode { labels: labels.into_iter().collect(), children: Vec::new() });
        self.nodes[parent.0].children.push(id);
        id
    }

    /// All `2^len` relabelings of `p` (every other label untouched), in
    /// node-index bitmask ascending order. Bit `i` of the mask drives node
    /// `i`; variant 0 has `p` nowhere.
    pub fn variants<'a>(&'a self, p: &'a PropName) -> impl Iterator<Item = TreeModel> + 'a {
        let n = self.nodes.len();
        assert!(n <= 30, "variant enumeration capped at 2^30 relabelings");
        (0u64..(1u64 << n)).map(move |mask| {
            let mut t = self.clone();
            for i in 0..n {
                if mask & (1 << i) != 0 {
                    t.nodes[i].labels.insert(p.clone());
                } else {
                    t.nodes[i].labels.remove(p);
                }
            }
            t
        })
    }

    /// Serialization used for shape canonicalization and deterministic
    /// ordering: labels and children, children serialized recursively.
    pub fn serialize_shape(&self, v: NodeId) -> String {
        let mut kids: Vec<String> = self
            .children(v)
            .iter()
            .map(|&c| self.serialize_shape(c))
            .collect();
        kids.sort();
        format!("({})", kids.join(""))
    }
}

/// How the finite frontier stands in for an infinite completion when a tree
/// is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FrontierMode {
    /// The tree as-is: leaves have no successors.
    Strict,
    /// Every leaf gains a self-edge.
    SelfLoop,
    /// Every leaf gains a chain of `d ≥ 1` fresh copies carrying the leaf's
    /// labels, the last copy self-looping.
    ChainPad(usize),
}

impl fmt::Display for FrontierMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FrontierMode::Strict => write!(f, "strict"),
            FrontierMode::SelfLoop => write!(f, "self-loop"),
            FrontierMode::ChainPad(d) => write!(f, "chain-pad({d})"),
        }
    }
}

/// A node of a frontier-completed tree: either an explicit node of the base
/// tree or the `i`-th pad copy below a leaf (`1 ≤ i ≤ d`). Pads share the
/// leaf's labels at all times, including quantified relabelings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EvalNode {
    Explicit(NodeId),
    Pad(NodeId, usize),
}

impl EvalNode {
    /// The explicit node whose labels this evaluation node carries.
    pub fn base(self) -> NodeId {
        match self {
            EvalNode::Explicit(v) | EvalNode::Pad(v, _) => v,
        }
    }
}

/// The structure all checker operations evaluate: a tree plus the loop or
/// pad edges its frontier mode adds.
#[derive(Debug, Clone)]
pub struct CompletedTree<'a> {
    pub tree: &'a TreeModel,
    pub mode: FrontierMode,
}

/// Applies a frontier mode; Strict leaves the tree unchanged.
pub fn apply_frontier(tree: &TreeModel, mode: FrontierMode) -> CompletedTree<'_> {
    CompletedTree { tree, mode }
}

impl<'a> CompletedTree<'a> {
    pub fn successors(&self, v: EvalNode) -> Vec<EvalNode> {
        match v {
            EvalNode::Explicit(n) => {
                let kids = self.tree.children(n);
                if !kids.is_empty() {
                    return kids.iter().map(|&c| EvalNode::Explicit(c)).collect();
                }
                match self.mode {
                    FrontierMode::Strict => Vec::new(),
                    FrontierMode::SelfLoop => vec![EvalNode::Explicit(n)],
                    FrontierMode::ChainPad(_) => vec![EvalNode::Pad(n, 1)],
                }
            }
            EvalNode::Pad(leaf, i) => match self.mode {
                FrontierMode::ChainPad(d) if i < d => vec![EvalNode::Pad(leaf, i + 1)],
                FrontierMode::ChainPad(_) => vec![EvalNode::Pad(leaf, i)],
                _ => unreachable!("pad node outside chain-pad mode"),
            },
        }
    }

    /// Every node of the completed structure, explicit nodes first.
    pub fn eval_nodes(&self) -> Vec<EvalNode> {
        let mut out: Vec<EvalNode> = self.tree.node_ids().map(EvalNode::Explicit).collect();
        if let FrontierMode::ChainPad(d) = self.mode {
            for v in self.tree.node_ids() {
                if self.tree.is_leaf(v) {
                    out.extend((1..=d).map(|i| EvalNode::Pad(v, i)));
                }
            }
        }
        out
    }
}

/// A finite directed labelled graph; source of computation-tree unfoldings.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KripkeStructure {
    pub transitions: Vec<Vec<usize>>,
    pub labels: Vec<BTreeSet<PropName>>,
}

impl KripkeStructure {
    pub fn new(transitions: Vec<Vec<usize>>, labels: Vec<BTreeSet<PropName>>) -> Self {
        assert_eq!(transitions.len(), labels.len());
        KripkeStructure { transitions, labels }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Every world has at least one successor.
    pub fn is_total(&self) -> bool {
        self.transitions.iter().all(|t| !t.is_empty())
    }
}

/// Computation-tree unfolding of `k` from `w`, truncated at the given depth:
/// nodes are the finite paths from `w` of length at most `depth`, each path
/// labelled by its last world's labels.
pub fn unfold(k: &KripkeStructure, w: usize, depth: usize) -> TreeModel {
    assert!(w < k.len(), "world out of range");
    let mut tree = TreeModel::leaf(k.labels[w].iter().cloned());
    // (tree node, world, remaining depth)
    let mut queue = vec![(NodeId(0), w, depth)];
    while let Some((node, world, left)) = queue.pop() {
        if left == 0 {
            continue;
        }
        for &next in &k.transitions[world] {
            let child = tree.add_child(node, k.labels[next].iter().cloned());
            queue.push((child, next, left - 1));
        }
    }
    tree
}

/// Exact tetration `t(k, n)`: `t(0,n) = n`, `t(k+1,n) = 2^t(k,n)`, guarded
/// by a cap so infeasible requests fail fast.
pub fn tetration_capped(k: usize, n: usize, cap: u64) -> Result<u64, TreeError> {
    let mut value: u64 = n as u64;
    if value > cap {
        return Err(TreeError::TetrationCap { k, n, cap });
    }
    for step in 0..k {
        if value >= 64 || (1u64 << value) > cap {
            return Err(TreeError::TetrationCap { k, n, cap });
        }
        value = 1u64 << value;
        let _ = step;
    }
    Ok(value)
}

/// Default cap on `t(k, n)` for the type/number machinery.
pub const DEFAULT_TETRATION_CAP: u64 = 1 << 16;

/// Semantic (formula-free) node type check: every node is of type 0, and a
/// node of type `k > 0` must have exactly `t(k,n)` children, all of type
/// `k−1`, whose numbers cover `0..t(k,n)`.
pub fn node_type(
    tree: &TreeModel,
    v: NodeId,
    k: usize,
    n: usize,
    cap: u64,
) -> Result<bool, TreeError> {
    if k == 0 {
        return Ok(true);
    }
    let want = tetration_capped(k, n, cap)?;
    let kids = tree.children(v);
    if kids.len() as u64 != want {
        return Ok(false);
    }
    let mut numbers = BTreeSet::new();
    for &c in kids {
        if !node_type(tree, c, k - 1, n, cap)? {
            return Ok(false);
        }
        numbers.insert(number_unchecked(tree, c, k - 1, n));
    }
    let full: BTreeSet<BigUint> = (0..want).map(BigUint::from).collect();
    Ok(numbers == full)
}

/// Number of a node already known to be of type `k`: for type 0 the value
/// encoded by `p_{n−1} … p_0` (`p0` least significant); for `k > 0` the sum
/// of `2^⟦u⟧` over children `u` carrying `val`.
fn number_unchecked(tree: &TreeModel, v: NodeId, k: usize, n: usize) -> BigUint {
    if k == 0 {
        let mut value = BigUint::from(0u32);
        for bit in 0..n {
            if tree.has_label(v, &PropName::new(format!("p{bit}"))) {
                value += BigUint::from(1u32) << bit;
            }
        }
        value
    } else {
        let val = PropName::new("val");
        let mut value = BigUint::from(0u32);
        for &c in tree.children(v) {
            if tree.has_label(c, &val) {
                let child_number = number_unchecked(tree, c, k - 1, n);
                // child numbers are bounded by t(k,n) ≤ cap, so this fits
                let shift: u64 = child_number
                    .try_into()
                    .expect("child number exceeds shift range");
                value += BigUint::from(1u32) << shift;
            }
        }
        value
    }
}

/// Number of a type-`k` node. The type precondition is checked and reported,
/// never silently skipped.
pub fn node_number(
    tree: &TreeModel,
    v: NodeId,
    k: usize,
    n: usize,
    cap: u64,
) -> Result<BigUint, TreeError> {
    if !node_type(tree, v, k, n, cap)? {
        return Err(TreeError::NotOfType { node: v.0, k });
    }
    Ok(number_unchecked(tree, v, k, n))
}

// --- JSON tree file format -------------------------------------------------
//
// {"root": id, "nodes": [{"id": int, "labels": [string], "children": [int]}]}

#[derive(Serialize, Deserialize)]
struct JsonNode {
    id: usize,
    #[serde(default)]
    labels: Vec<String>,
    #[serde(default)]
    children: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
struct JsonTree {
    root: usize,
    nodes: Vec<JsonNode>,
}

#[derive(Debug, thiserror::Error)]
pub enum TreeIoError {
    #[error("invalid tree JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("invalid tree: {0}")]
    Structure(#[from] TreeError),
    #[error("unknown node id {0}")]
    UnknownId(usize),
}

/// Parses the JSON tree file format; rejects cycles and orphans.
pub fn tree_from_json(text: &str) -> Result<TreeModel, TreeIoError> {
    let raw: JsonTree = serde_json::from_str(text)?;
    let mut index = std::collections::HashMap::new();
    for (i, node) in raw.nodes.iter().enumerate() {
        if index.insert(node.id, i).is_some() {
            return Err(TreeError::DuplicateId(node.id).into());
        }
    }
    let lookup = |id: usize| index.get(&id).copied().ok_or(TreeIoError::UnknownId(id));
    let mut nodes = Vec::with_capacity(raw.nodes.len());
    for node in &raw.nodes {
        let children = node
            .children
            .iter()
            .map(|&c| lookup(c).map(NodeId))
            .collect::<Result<Vec<_>, _>>()?;
        nodes.push(TreeNode {
            labels: node.labels.iter().map(PropName::new).collect(),
            children,
        });
    }
    let root = NodeId(lookup(raw.root)?);
    Ok(TreeModel::from_parts(root, nodes)?)
}

pub fn tree_to_json(tree: &TreeModel) -> String {
    let raw = JsonTree {
        root: tree.root().0,
        nodes: tree
            .node_ids()
            .map(|v| JsonNode {
                id: v.0,
                labels: tree.labels(v).iter().map(|p| p.0.clone()).collect(),
                children: tree.children(v).iter().map(|c| c.0).collect(),
            })
            .collect(),
    };
    serde_json::to_string_pretty(&raw).expect("tree serialization cannot fail")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn props(ps: &[&str]) -> BTreeSet<PropName> {
        ps.iter().map(|p| PropName::new(*p)).collect()
    }

    #[test]
    fn unfold_self_loop_is_constant_chain() {
        let k = KripkeStructure::new(vec![vec![0]], vec![props(&["p"])]);
        let t = unfold(&k, 0, 2);
        assert_eq!(t.len(), 3);
        for v in t.node_ids() {
            assert_eq!(t.labels(v), &props(&["p"]));
        }
        assert!(t.is_uniform_depth(2));
    }

    #[test]
    fn unfold_two_cycle_alternates() {
        let k = KripkeStructure::new(
            vec![vec![1], vec![0]],
            vec![props(&["a"]), props(&["b"])],
        );
        let t = unfold(&k, 0, 2);
        assert_eq!(t.len(), 3);
        let c1 = t.children(t.root())[0];
        let c2 = t.children(c1)[0];
        assert_eq!(t.labels(t.root()), &props(&["a"]));
        assert_eq!(t.labels(c1), &props(&["b"]));
        assert_eq!(t.labels(c2), &props(&["a"]));
    }

    #[test]
    fn unfold_depth_zero() {
        let k = KripkeStructure::new(vec![vec![0]], vec![props(&["p"])]);
        let t = unfold(&k, 0, 0);
        assert_eq!(t.len(), 1);
    }

    #[test]
    fn unfold_depth_monotone() {
        // depth-d unfolding is the depth-d truncation of depth-(d+1)
        let k = KripkeStructure::new(
            vec![vec![0, 1], vec![0]],
            vec![props(&["a"]), props(&["b"])],
        );
        for d in 0..4 {
            let small = unfold(&k, 0, d);
            let big = unfold(&k, 0, d + 1);
            assert_eq!(
                canonical_labelled(&small, small.root(), usize::MAX),
                canonical_labelled(&big, big.root(), d),
            );
        }
    }

    // canonical multiset serialization of a tree truncated at `depth`
    fn canonical_labelled(t: &TreeModel, v: NodeId, depth: usize) -> String {
        let labels: Vec<String> = t.labels(v).iter().map(|p| p.0.clone()).collect();
        if depth == 0 {
            return format!("[{}]()", labels.join(","));
        }
        let mut kids: Vec<String> = t
            .children(v)
            .iter()
            .map(|&c| canonical_labelled(t, c, depth - 1))
            .collect();
        kids.sort();
        format!("[{}]({})", labels.join(","), kids.join(""))
    }

    #[test]
    fn tetration_values() {
        let cap = DEFAULT_TETRATION_CAP;
        assert_eq!(tetration_capped(0, 5, cap).unwrap(), 5);
        assert_eq!(tetration_capped(1, 3, cap).unwrap(), 8);
        assert_eq!(tetration_capped(3, 1, cap).unwrap(), 16);
        assert_eq!(tetration_capped(2, 2, cap).unwrap(), 16);
        assert_eq!(tetration_capped(3, 2, cap).unwrap(), 65536); // cap is inclusive
        assert!(tetration_capped(3, 3, cap).is_err());
    }

    #[test]
    fn node_type_zero_always() {
        let t = TreeModel::leaf(props(&["whatever"]));
        assert!(node_type(&t, t.root(), 0, 1, DEFAULT_TETRATION_CAP).unwrap());
    }

    #[test]
    fn node_type_one_two_children() {
        // n=1: t(1,1)=2; children numbered {0,1} via p0
        let mut t = TreeModel::leaf([]);
        t.add_child(t.root(), []);
        t.add_child(t.root(), props(&["p0"]));
        assert!(node_type(&t, t.root(), 1, 1, DEFAULT_TETRATION_CAP).unwrap());

        let mut bad = TreeModel::leaf([]);
        bad.add_child(bad.root(), []);
        bad.add_child(bad.root(), props(&["p0"]));
        bad.add_child(bad.root(), props(&["p0"]));
        assert!(!node_type(&bad, bad.root(), 1, 1, DEFAULT_TETRATION_CAP).unwrap());

        let mut dup = TreeModel::leaf([]);
        dup.add_child(dup.root(), []);
        dup.add_child(dup.root(), []);
        assert!(!node_type(&dup, dup.root(), 1, 1, DEFAULT_TETRATION_CAP).unwrap());
    }

    #[test]
    fn node_number_type_zero() {
        let t = TreeModel::leaf(props(&["p1"]));
        assert_eq!(
            node_number(&t, t.root(), 0, 2, DEFAULT_TETRATION_CAP).unwrap(),
            BigUint::from(2u32),
        );
        let t0 = TreeModel::leaf([]);
        assert_eq!(
            node_number(&t0, t0.root(), 0, 2, DEFAULT_TETRATION_CAP).unwrap(),
            BigUint::from(0u32),
        );
    }

    #[test]
    fn node_number_type_one() {
        // val exactly on the child numbered 1 → bits b1b0 = 10 → 2
        let mut t = TreeModel::leaf([]);
        t.add_child(t.root(), []);
        t.add_child(t.root(), props(&["p0", "val"]));
        assert_eq!(
            node_number(&t, t.root(), 1, 1, DEFAULT_TETRATION_CAP).unwrap(),
            BigUint::from(2u32),
        );
    }

    #[test]
    fn node_number_reports_precondition() {
        let t = TreeModel::leaf([]);
        let err = node_number(&t, t.root(), 1, 1, DEFAULT_TETRATION_CAP).unwrap_err();
        assert_eq!(err, TreeError::NotOfType { node: 0, k: 1 });
    }

    #[test]
    fn variants_counts() {
        let t = TreeModel::leaf([]);
        let p = PropName::new("p");
        assert_eq!(t.variants(&p).count(), 2);

        let mut t2 = TreeModel::leaf([]);
        t2.add_child(t2.root(), []);
        assert_eq!(t2.variants(&p).count(), 4);

        // first variant has p nowhere
        let mut t3 = TreeModel::leaf(props(&["p"]));
        t3.add_child(t3.root(), []);
        t3.add_child(t3.root(), []);
        let first = t3.variants(&p).next().unwrap();
        assert!(first.node_ids().all(|v| !first.has_label(v, &p)));
    }

    #[test]
    fn variants_distinct_and_agree_off_p() {
        let mut t = TreeModel::leaf(props(&["q"]));
        t.add_child(t.root(), props(&["p"]));
        let p = PropName::new("p");
        let all: Vec<TreeModel> = t.variants(&p).collect();
        assert_eq!(all.len(), 4);
        for (i, a) in all.iter().enumerate() {
            assert!(a.has_label(NodeId(0), &PropName::new("q")));
            for b in &all[i + 1..] {
                assert_ne!(a, b);
            }
        }
    }

    #[test]
    fn frontier_modes() {
        let mut t = TreeModel::leaf(props(&["p"]));
        let c = t.add_child(t.root(), props(&["q"]));

        let strict = apply_frontier(&t, FrontierMode::Strict);
        assert!(strict.successors(EvalNode::Explicit(c)).is_empty());

        let looped = apply_frontier(&t, FrontierMode::SelfLoop);
        assert_eq!(
            looped.successors(EvalNode::Explicit(c)),
            vec![EvalNode::Explicit(c)],
        );

        let padded = apply_frontier(&t, FrontierMode::ChainPad(2));
        assert_eq!(padded.successors(EvalNode::Explicit(c)), vec![EvalNode::Pad(c, 1)]);
        assert_eq!(padded.successors(EvalNode::Pad(c, 1)), vec![EvalNode::Pad(c, 2)]);
        assert_eq!(padded.successors(EvalNode::Pad(c, 2)), vec![EvalNode::Pad(c, 2)]);
        assert_eq!(padded.eval_nodes().len(), 4);
    }

    #[test]
    fn json_round_trip_and_validation() {
        let text = r#"{"root": 10, "nodes": [
            {"id": 10, "labels": ["p"], "children": [11, 12]},
            {"id": 11, "labels": [], "children": []},
            {"id": 12, "labels": ["q", "p"], "children": []}
        ]}"#;
        let t = tree_from_json(text).unwrap();
        assert_eq!(t.len(), 3);
        assert!(t.has_label(t.root(), &PropName::new("p")));
        let again = tree_from_json(&tree_to_json(&t)).unwrap();
        assert_eq!(t, again);

        let cyclic = r#"{"root": 0, "nodes": [
            {"id": 0, "labels": [], "children": [1]},
            {"id": 1, "labels": [], "children": [0]}
        ]}"#;
        assert!(tree_from_json(cyclic).is_err());

        let orphan = r#"{"root": 0, "nodes": [
            {"id": 0, "labels": [], "children": []},
            {"id": 1, "labels": [], "children": []}
        ]}"#;
        assert!(tree_from_json(orphan).is_err());
    }
}
