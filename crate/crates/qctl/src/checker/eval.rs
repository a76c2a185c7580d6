//! Three-valued formula evaluation over frontier-completed trees, with the
//! quantifier search strategies behind both backends.
//!
//! Quantified propositions are relabelled on explicit nodes only; pad copies
//! inherit their leaf's labels and assignments at all times.

use std::collections::HashMap;
use std::sync::Arc;

use crate::syntax::{Formula, PropName};
use crate::trees::{CompletedTree, EvalNode, NodeId};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum V3 {
    True,
    False,
    Unknown,
}

impl V3 {
    fn from_bool(b: bool) -> V3 {
        if b {
            V3::True
        } else {
            V3::False
        }
    }

    fn negate(self) -> V3 {
        match self {
            V3::True => V3::False,
            V3::False => V3::True,
            V3::Unknown => V3::Unknown,
        }
    }

    /// Optimistic boolean projection: Unknown counts as true.
    fn hi(self) -> bool {
        self != V3::False
    }

    /// Pessimistic boolean projection: Unknown counts as false.
    fn lo(self) -> bool {
        self == V3::True
    }
}

fn and3(a: V3, b: V3) -> V3 {
    match (a, b) {
        (V3::False, _) | (_, V3::False) => V3::False,
        (V3::True, V3::True) => V3::True,
        _ => V3::Unknown,
    }
}

fn or3(a: V3, b: V3) -> V3 {
    match (a, b) {
        (V3::True, _) | (_, V3::True) => V3::True,
        (V3::False, V3::False) => V3::False,
        _ => V3::Unknown,
    }
}

/// Partial assignment of one quantified proposition over explicit nodes.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub(crate) struct Frame {
    pub assigned: u64,
    pub values: u64,
}

impl Frame {
    fn get(&self, node: usize) -> Option<bool> {
        if self.assigned & (1 << node) != 0 {
            Some(self.values & (1 << node) != 0)
        } else {
            None
        }
    }

    fn set(&mut self, node: usize, value: bool) {
        self.assigned |= 1 << node;
        if value {
            self.values |= 1 << node;
        } else {
            self.values &= !(1 << node);
        }
    }

    fn unset(&mut self, node: usize) {
        self.assigned &= !(1 << node);
        self.values &= !(1 << node);
    }
}

struct FormulaInfo {
    id: u32,
    /// Propositions occurring free, as interned ids, sorted.
    free: Vec<u32>,
}

type FrameKey = Vec<(u32, Frame)>;

pub(crate) struct Evaluator<'a> {
    ct: CompletedTree<'a>,
    /// Dense node indexing of the completed structure, explicit nodes first.
    nodes: Vec<EvalNode>,
    /// Pad nodes resolve through this map; explicit nodes are their own
    /// index.
    pads: HashMap<EvalNode, usize>,
    succ: Vec<Vec<usize>>,
    reach_cache: Vec<Option<Arc<Vec<usize>>>>,
    prop_ids: HashMap<PropName, u32>,
    prop_names: Vec<PropName>,
    /// Label bitmask per interned prop, over explicit node indices.
    label_masks: Vec<u64>,
    /// Assignment stacks per interned prop; the top frame is the innermost
    /// binder currently in scope.
    frames: Vec<Vec<Frame>>,
    /// Unknown-label reads recorded during evaluation, never truncated
    /// except under spans whose value came back definite.
    reads: Vec<(u32, usize)>,
    /// Definite results per (formula, node), each bucket scanned linearly
    /// over its few frame restrictions.
    memo: HashMap<(u32, u32), Vec<(FrameKey, bool)>>,
    scratch: FrameKey,
    info: HashMap<*const Formula, FormulaInfo>,
    exhaustive: bool,
    pub(crate) explicit_count: usize,
}

pub(crate) const MAX_QUANTIFIED_NODES: usize = 60;

impl<'a> Evaluator<'a> {
    pub(crate) fn new(ct: CompletedTree<'a>, exhaustive: bool) -> Self {
        let nodes = ct.eval_nodes();
        let pads: HashMap<EvalNode, usize> = nodes
            .iter()
            .enumerate()
            .filter(|(_, n)| matches!(n, EvalNode::Pad(..)))
            .map(|(i, &n)| (n, i))
            .collect();
        let explicit_count = ct.tree.len();
        let dense_of = |n: &EvalNode| match n {
            EvalNode::Explicit(v) => v.0,
            pad => pads[pad],
        };
        let succ: Vec<Vec<usize>> = nodes
            .iter()
            .map(|n| ct.successors(*n).iter().map(&dense_of).collect())
            .collect();
        Evaluator {
            reach_cache: vec![None; nodes.len()],
            nodes,
            pads,
            succ,
            prop_ids: HashMap::new(),
            prop_names: Vec::new(),
            label_masks: Vec::new(),
            frames: Vec::new(),
            reads: Vec::new(),
            memo: HashMap::new(),
            scratch: Vec::new(),
            info: HashMap::new(),
            exhaustive,
            explicit_count,
            ct,
        }
    }

    fn dense_of(&self, node: EvalNode) -> usize {
        match node {
            EvalNode::Explicit(v) => v.0,
            pad => self.pads[&pad],
        }
    }

    fn intern(&mut self, p: &PropName) -> u32 {
        if let Some(&id) = self.prop_ids.get(p) {
            return id;
        }
        let id = self.prop_names.len() as u32;
        self.prop_ids.insert(p.clone(), id);
        self.prop_names.push(p.clone());
        let mut mask = 0u64;
        for v in self.ct.tree.node_ids() {
            if self.ct.tree.has_label(v, p) {
                mask |= 1 << v.0;
            }
        }
        self.label_masks.push(mask);
        self.frames.push(Vec::new());
        id
    }

    fn ensure_info(&mut self, f: &Formula) -> u32 {
        let key = f as *const Formula;
        if let Some(info) = self.info.get(&key) {
            return info.id;
        }
        use Formula::*;
        let free: Vec<u32> = match f {
            True | False => Vec::new(),
            Prop(p) => vec![self.intern(p)],
            Not(g) | EX(g) | AX(g) | EF(g) | AG(g) | AF(g) | EXEF(g) | AXAG(g) => {
                let gid = self.ensure_info(g);
                self.free_of(gid, g)
            }
            And(a, b) | Or(a, b) | Implies(a, b) | Iff(a, b) | EU(a, b) | AU(a, b) => {
                let aid = self.ensure_info(a);
                let mut fa = self.free_of(aid, a);
                let bid = self.ensure_info(b);
                fa.extend(self.free_of(bid, b));
                fa.sort_unstable();
                fa.dedup();
                fa
            }
            Exists(p, g) | Forall(p, g) => {
                let pid = self.intern(p);
                let gid = self.ensure_info(g);
                let mut fg = self.free_of(gid, g);
                fg.retain(|&q| q != pid);
                fg
            }
        };
        let id = self.info.len() as u32;
        self.info.insert(key, FormulaInfo { id, free });
        id
    }

    fn free_of(&self, _id: u32, f: &Formula) -> Vec<u32> {
        self.info[&(f as *const Formula)].free.clone()
    }

    fn lookup(&mut self, pid: u32, node: EvalNode) -> V3 {
        let base = node.base().0;
        if let Some(frame) = self.frames[pid as usize].last() {
            match frame.get(base) {
                Some(v) => V3::from_bool(v),
                None => {
                    self.reads.push((pid, base));
                    V3::Unknown
                }
            }
        } else {
            V3::from_bool(self.label_masks[pid as usize] & (1 << base) != 0)
        }
    }

    fn reach_star(&mut self, start: usize) -> Arc<Vec<usize>> {
        if let Some(r) = &self.reach_cache[start] {
            return r.clone();
        }
        let mut seen = vec![false; self.nodes.len()];
        let mut order = Vec::new();
        let mut stack = vec![start];
        while let Some(v) = stack.pop() {
            if seen[v] {
                continue;
            }
            seen[v] = true;
            order.push(v);
            stack.extend(self.succ[v].iter().copied());
        }
        let r = Arc::new(order);
        self.reach_cache[start] = Some(r.clone());
        r
    }

    /// Strictly reachable: successors' reflexive-transitive closures.
    fn reach_plus(&mut self, start: usize) -> Vec<usize> {
        let mut seen = vec![false; self.nodes.len()];
        let mut out = Vec::new();
        for s in self.succ[start].clone() {
            for &v in self.reach_star(s).iter() {
                if !seen[v] {
                    seen[v] = true;
                    out.push(v);
                }
            }
        }
        out
    }

    pub(crate) fn eval(&mut self, f: &Formula, node: EvalNode) -> V3 {
        // atoms skip the memo machinery entirely
        match f {
            Formula::True => return V3::True,
            Formula::False => return V3::False,
            Formula::Prop(p) => {
                let pid = self.intern(p);
                return self.lookup(pid, node);
            }
            _ => {}
        }
        let dense_node = self.dense_of(node) as u32;
        let fid = self.ensure_info(f);
        self.scratch.clear();
        {
            let info = &self.info[&(f as *const Formula)];
            let frames = &self.frames;
            self.scratch.extend(
                info.free
                    .iter()
                    .filter_map(|&pid| frames[pid as usize].last().map(|fr| (pid, *fr))),
            );
        }
        if let Some(bucket) = self.memo.get(&(fid, dense_node)) {
            if let Some((_, v)) = bucket.iter().find(|(k, _)| *k == self.scratch) {
                return V3::from_bool(*v);
            }
        }
        let key = std::mem::take(&mut self.scratch);
        let start = self.reads.len();
        let v = self.eval_inner(f, node);
        if v != V3::Unknown {
            // Definite results hold under every completion, so reads made
            // while computing them cannot be useful branch points upstream.
            self.reads.truncate(start);
            self.memo
                .entry((fid, dense_node))
                .or_default()
                .push((key.clone(), v == V3::True));
        }
        self.scratch = key;
        v
    }

    fn eval_inner(&mut self, f: &Formula, node: EvalNode) -> V3 {
        use Formula::*;
        match f {
            True => V3::True,
            False => V3::False,
            Prop(p) => {
                let pid = self.intern(p);
                self.lookup(pid, node)
            }
            Not(g) => self.eval(g, node).negate(),
            And(a, b) => {
                let va = self.eval(a, node);
                if va == V3::False {
                    return V3::False;
                }
                and3(va, self.eval(b, node))
            }
            Or(a, b) => {
                let va = self.eval(a, node);
                if va == V3::True {
                    return V3::True;
                }
                or3(va, self.eval(b, node))
            }
            Implies(a, b) => {
                let va = self.eval(a, node);
                if va == V3::False {
                    return V3::True;
                }
                or3(va.negate(), self.eval(b, node))
            }
            Iff(a, b) => {
                let va = self.eval(a, node);
                let vb = self.eval(b, node);
                match (va, vb) {
                    (V3::Unknown, _) | (_, V3::Unknown) => V3::Unknown,
                    _ => V3::from_bool(va == vb),
                }
            }
            EX(g) => {
                let d = self.dense_of(node);
                let mut acc = V3::False;
                for i in 0..self.succ[d].len() {
                    let s = self.succ[d][i];
                    acc = or3(acc, self.eval(g, self.nodes[s]));
                    if acc == V3::True {
                        break;
                    }
                }
                acc
            }
            AX(g) => {
                let d = self.dense_of(node);
                let mut acc = V3::True;
                for i in 0..self.succ[d].len() {
                    let s = self.succ[d][i];
                    acc = and3(acc, self.eval(g, self.nodes[s]));
                    if acc == V3::False {
                        break;
                    }
                }
                acc
            }
            EF(g) => self.over_set(g, self.dense_of(node), true, true),
            AG(g) => self.over_set(g, self.dense_of(node), true, false),
            EXEF(g) => self.over_set(g, self.dense_of(node), false, true),
            AXAG(g) => self.over_set(g, self.dense_of(node), false, false),
            AF(g) => self.eval_until(&Formula::True, g, node, false),
            EU(a, b) => self.eval_until(a, b, node, true),
            AU(a, b) => self.eval_until(a, b, node, false),
            Exists(p, g) => self.eval_quant(true, p, g, node),
            Forall(p, g) => self.eval_quant(false, p, g, node),
        }
    }

    /// Disjunction (`existential`) or conjunction over the reflexive
    /// (`reflexive`) or strict transitive closure from `from`.
    fn over_set(&mut self, g: &Formula, from: usize, reflexive: bool, existential: bool) -> V3 {
        let set = if reflexive {
            self.reach_star(from).as_ref().clone()
        } else {
            self.reach_plus(from)
        };
        let mut acc = if existential { V3::False } else { V3::True };
        for v in set {
            let gv = self.eval(g, self.nodes[v]);
            acc = if existential { or3(acc, gv) } else { and3(acc, gv) };
            if (existential && acc == V3::True) || (!existential && acc == V3::False) {
                break;
            }
        }
        acc
    }

    /// `E[a U b]` / `A[a U b]` by boolean least fixpoints on the optimistic
    /// and pessimistic projections; the pair brackets the 3-valued truth.
    fn eval_until(&mut self, a: &Formula, b: &Formula, node: EvalNode, existential: bool) -> V3 {
        let from = self.dense_of(node);
        let relevant = self.reach_star(from);
        let n = self.nodes.len();
        let mut av = vec![V3::Unknown; n];
        let mut bv = vec![V3::Unknown; n];
        for &v in relevant.iter() {
            av[v] = self.eval(a, self.nodes[v]);
            bv[v] = self.eval(b, self.nodes[v]);
        }
        let fix = |a_proj: &dyn Fn(V3) -> bool, b_proj: &dyn Fn(V3) -> bool| -> Vec<bool> {
            let mut z = vec![false; n];
            loop {
                let mut changed = false;
                for &v in relevant.iter() {
                    if z[v] {
                        continue;
                    }
                    let step = if existential {
                        self.succ[v].iter().any(|&s| z[s])
                    } else {
                        !self.succ[v].is_empty() && self.succ[v].iter().all(|&s| z[s])
                    };
                    let next = b_proj(bv[v]) || (a_proj(av[v]) && step);
                    if next {
                        z[v] = true;
                        changed = true;
                    }
                }
                if !changed {
                    return z;
                }
            }
        };
        let lo = fix(&V3::lo, &V3::lo);
        if lo[from] {
            return V3::True;
        }
        let hi = fix(&V3::hi, &V3::hi);
        if !hi[from] {
            return V3::False;
        }
        V3::Unknown
    }

    fn eval_quant(&mut self, exists: bool, p: &PropName, body: &Formula, node: EvalNode) -> V3 {
        assert!(
            self.explicit_count <= MAX_QUANTIFIED_NODES,
            "quantifier search supports at most {MAX_QUANTIFIED_NODES} explicit nodes",
        );
        let pid = self.intern(p);
        if self.exhaustive {
            return self.quant_exhaustive(exists, pid, body, node);
        }
        self.frames[pid as usize].push(Frame::default());
        let v = self.quant_dfs(exists, pid, body, node);
        self.frames[pid as usize].pop();
        v
    }

    /// Reference strategy: iterate all `2^n` relabelings in node-index
    /// bitmask ascending order.
    fn quant_exhaustive(&mut self, exists: bool, pid: u32, body: &Formula, node: EvalNode) -> V3 {
        let n = self.explicit_count;
        assert!(n < 32, "exhaustive backend limited to 31 explicit nodes");
        for mask in 0u64..(1u64 << n) {
            self.frames[pid as usize].push(Frame { assigned: (1u64 << n) - 1, values: mask });
            let v = self.eval(body, node);
            self.frames[pid as usize].pop();
            debug_assert_ne!(v, V3::Unknown, "exhaustive evaluation must be definite");
            if exists && v == V3::True {
                return V3::True;
            }
            if !exists && v == V3::False {
                return V3::False;
            }
        }
        V3::from_bool(!exists)
    }

    /// Pruned strategy: evaluate under the current partial assignment and
    /// split on the first position of `pid` the evaluation actually read,
    /// cutting whole subtrees as soon as the body is determined.
    fn quant_dfs(&mut self, exists: bool, pid: u32, body: &Formula, node: EvalNode) -> V3 {
        let start = self.reads.len();
        match self.eval(body, node) {
            // Definite under a partial assignment means definite under every
            // completion, so the whole subtree is decided.
            V3::True => V3::True,
            V3::False => V3::False,
            V3::Unknown => {
                let split = self.reads[start..]
                    .iter()
                    .find(|(q, _)| *q == pid)
                    .map(|&(_, n)| n);
                let Some(position) = split else {
                    // Unknown through props bound further out; their search
                    // will refine and re-enter.
                    return V3::Unknown;
                };
                let mut acc = if exists { V3::False } else { V3::True };
                for value in [false, true] {
                    self.frames[pid as usize]
                        .last_mut()
                        .expect("frame pushed by eval_quant")
                        .set(position, value);
                    let v = self.quant_dfs(exists, pid, body, node);
                    acc = if exists { or3(acc, v) } else { and3(acc, v) };
                    if (exists && acc == V3::True) || (!exists && acc == V3::False) {
                        break;
                    }
                }
                self.frames[pid as usize]
                    .last_mut()
                    .expect("frame pushed by eval_quant")
                    .unset(position);
                acc
            }
        }
    }

    /// Searches an assignment of `props` (all pushed as fresh frames) making
    /// the body true (`want = true`) or false (`want = false`); used for
    /// witness and counterexample extraction over a quantifier prefix.
    ///
    /// Returns the explicit-node sets, unassigned positions completed with
    /// false.
    pub(crate) fn prefix_search(
        &mut self,
        props: &[PropName],
        body: &Formula,
        node: EvalNode,
        want: bool,
    ) -> Option<Vec<(PropName, Vec<NodeId>)>> {
        let pids: Vec<u32> = props.iter().map(|p| self.intern(p)).collect();
        if self.exhaustive {
            return self.prefix_exhaustive(props, &pids, body, node, want);
        }
        for &pid in &pids {
            self.frames[pid as usize].push(Frame::default());
        }
        let found = self.prefix_dfs(&pids, body, node, want);
        let result = found.then(|| {
            props
                .iter()
                .zip(&pids)
                .map(|(p, &pid)| {
                    let frame = *self.frames[pid as usize].last().unwrap();
                    let nodes = (0..self.explicit_count)
                        .filter(|&i| frame.get(i) == Some(true))
                        .map(NodeId)
                        .collect();
                    (p.clone(), nodes)
                })
                .collect()
        });
        for &pid in &pids {
            self.frames[pid as usize].pop();
        }
        result
    }

    fn prefix_dfs(&mut self, pids: &[u32], body: &Formula, node: EvalNode, want: bool) -> bool {
        let start = self.reads.len();
        match self.eval(body, node) {
            V3::True => want,
            V3::False => !want,
            V3::Unknown => {
                let split = self.reads[start..]
                    .iter()
                    .find(|(q, _)| pids.contains(q))
                    .copied();
                let Some((pid, position)) = split else {
                    return false;
                };
                for value in [false, true] {
                    self.frames[pid as usize].last_mut().unwrap().set(position, value);
                    if self.prefix_dfs(pids, body, node, want) {
                        return true; // keep the successful assignment in place
                    }
                }
                self.frames[pid as usize].last_mut().unwrap().unset(position);
                false
            }
        }
    }

    fn prefix_exhaustive(
        &mut self,
        props: &[PropName],
        pids: &[u32],
        body: &Formula,
        node: EvalNode,
        want: bool,
    ) -> Option<Vec<(PropName, Vec<NodeId>)>> {
        let n = self.explicit_count;
        assert!(n < 32, "exhaustive backend limited to 31 explicit nodes");
        let full = (1u64 << n) - 1;
        fn rec(
            ev: &mut Evaluator<'_>,
            props: &[PropName],
            pids: &[u32],
            idx: usize,
            body: &Formula,
            node: EvalNode,
            want: bool,
            full: u64,
        ) -> Option<Vec<(PropName, Vec<NodeId>)>> {
            if idx == pids.len() {
                let v = ev.eval(body, node);
                return (v == V3::from_bool(want)).then(Vec::new);
            }
            let n = ev.explicit_count;
            for mask in 0u64..(1u64 << n) {
                ev.frames[pids[idx] as usize].push(Frame { assigned: full, values: mask });
                let found = rec(ev, props, pids, idx + 1, body, node, want, full);
                ev.frames[pids[idx] as usize].pop();
                if found.is_some() {
                    let mut rest = found.unwrap();
                    let nodes = (0..n)
                        .filter(|&i| mask & (1 << i) != 0)
                        .map(NodeId)
                        .collect();
                    rest.insert(0, (props[idx].clone(), nodes));
                    return Some(rest);
                }
            }
            None
        }
        rec(self, props, pids, 0, body, node, want, full)
    }
}
