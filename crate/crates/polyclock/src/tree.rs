//! Rooted, binary, time-calibrated phylogenies.
//!
//! Node ids are dense: tips occupy `0..n_tips`, internal nodes follow, and
//! the root is always the last id (`2N - 2` for `N` tips). Node times are
//! calendar times that increase toward the present, so every parent is
//! strictly older (smaller time) than its children.

use crate::error::{Error, Result};

/// A rooted binary tree with calendar-time node calibrations.
#[derive(Debug, Clone)]
pub struct TimeTree {
    n_tips: usize,
    parent: Vec<Option<usize>>,
    children: Vec<Option<(usize, usize)>>,
    node_time: Vec<f64>,
    tip_labels: Vec<String>,
    postorder: Vec<usize>,
}

impl TimeTree {
    /// Assemble a tree from parent links, node times, and tip labels.
    ///
    /// `parent[i]` must be `None` exactly for the root (the last id) and
    /// `tip_labels.len()` fixes the number of tips. All structural
    /// invariants are checked here: binary internal nodes, connectivity,
    /// strictly increasing times from every parent to each child.
    pub fn from_parts(
        parent: Vec<Option<usize>>,
        node_time: Vec<f64>,
        tip_labels: Vec<String>,
    ) -> Result<Self> {
        let n_tips = tip_labels.len();
        if n_tips < 2 {
            return Err(Error::TreeShape(format!(
                "need at least 2 tips, got {n_tips}"
            )));
        }
        let n_nodes = 2 * n_tips - 1;
        if parent.len() != n_nodes || node_time.len() != n_nodes {
            return Err(Error::TreeShape(format!(
                "expected {n_nodes} nodes for {n_tips} tips, got parent len {} and time len {}",
                parent.len(),
                node_time.len()
            )));
        }
        let root = n_nodes - 1;

        let mut child_lists: Vec<Vec<usize>> = vec![Vec::new(); n_nodes];
        for (i, &p) in parent.iter().enumerate() {
            match p {
                None => {
                    if i != root {
                        return Err(Error::TreeShape(format!(
                            "node {i} has no parent but is not the root"
                        )));
                    }
                }
                Some(p) => {
                    if p >= n_nodes || p == i {
                        return Err(Error::TreeShape(format!(
                            "node {i} has invalid parent {p}"
                        )));
                    }
                    child_lists[p].push(i);
                }
            }
        }

        let mut children = vec![None; n_nodes];
        for (i, list) in child_lists.iter().enumerate() {
            if i < n_tips {
                if !list.is_empty() {
                    return Err(Error::TreeShape(format!("tip {i} has children")));
                }
            } else {
                if list.len() != 2 {
                    return Err(Error::TreeShape(format!(
                        "internal node {i} has {} children, expected 2",
                        list.len()
                    )));
                }
                children[i] = Some((list[0], list[1]));
            }
        }

        for (i, &t) in node_time.iter().enumerate() {
            if !t.is_finite() {
                return Err(Error::TreeShape(format!("node {i} has non-finite time")));
            }
            if let Some(p) = parent[i] {
                if node_time[p] >= t {
                    return Err(Error::TreeShape(format!(
                        "node {i} (time {t}) is not strictly younger than its parent {p} (time {})",
                        node_time[p]
                    )));
                }
            }
        }

        // Connectivity and acyclicity: every node must reach the root in
        // fewer than n_nodes parent steps.
        for mut i in 0..n_nodes {
            let mut steps = 0;
            while let Some(p) = parent[i] {
                i = p;
                steps += 1;
                if steps >= n_nodes {
                    return Err(Error::TreeShape("parent links contain a cycle".into()));
                }
            }
            if i != root {
                return Err(Error::TreeShape(format!(
                    "node does not reach the root (stuck at {i})"
                )));
            }
        }

        let postorder = compute_postorder(&children, root);
        Ok(Self {
            n_tips,
            parent,
            children,
            node_time,
            tip_labels,
            postorder,
        })
    }

    pub fn n_tips(&self) -> usize {
        self.n_tips
    }

    /// Total number of nodes, `2N - 1`.
    pub fn node_count(&self) -> usize {
        self.parent.len()
    }

    /// Number of branches, `2N - 2`; branch `i` connects node `i` to its parent.
    pub fn branch_count(&self) -> usize {
        self.node_count() - 1
    }

    pub fn root(&self) -> usize {
        self.node_count() - 1
    }

    pub fn is_tip(&self, node: usize) -> bool {
        node < self.n_tips
    }

    pub fn parent(&self, node: usize) -> Option<usize> {
        self.parent[node]
    }

    pub fn children(&self, node: usize) -> Option<(usize, usize)> {
        self.children[node]
    }

    /// Sibling of a non-root node.
    pub fn sibling(&self, node: usize) -> Option<usize> {
        let p = self.parent[node]?;
        let (a, b) = self.children[p].expect("parent is internal");
        Some(if a == node { b } else { a })
    }

    /// Calendar time of a node (larger = closer to the present).
    pub fn time(&self, node: usize) -> f64 {
        self.node_time[node]
    }

    /// Time span of the branch above `node`: `t(node) - t(parent)`.
    pub fn branch_span(&self, node: usize) -> Option<f64> {
        self.parent[node].map(|p| self.node_time[node] - self.node_time[p])
    }

    pub fn tip_label(&self, tip: usize) -> &str {
        &self.tip_labels[tip]
    }

    pub fn tip_labels(&self) -> &[String] {
        &self.tip_labels
    }

    /// Node ids in post-order (children before parents, root last).
    pub fn postorder(&self) -> &[usize] {
        &self.postorder
    }

    /// Node ids in pre-order (root first, parents before children).
    pub fn preorder(&self) -> Vec<usize> {
        let mut order = Vec::with_capacity(self.node_count());
        let mut stack = vec![self.root()];
        while let Some(n) = stack.pop() {
            order.push(n);
            if let Some((a, b)) = self.children[n] {
                stack.push(b);
                stack.push(a);
            }
        }
        order
    }

    /// Most recent (largest) tip time; the effective present.
    pub fn latest_tip_time(&self) -> f64 {
        (0..self.n_tips)
            .map(|i| self.node_time[i])
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Oldest (smallest) tip time.
    pub fn earliest_tip_time(&self) -> f64 {
        (0..self.n_tips)
            .map(|i| self.node_time[i])
            .fold(f64::INFINITY, f64::min)
    }

    /// Time of the most recent common ancestor of two nodes.
    pub fn mrca(&self, a: usize, b: usize) -> usize {
        let mut seen = vec![false; self.node_count()];
        let mut x = a;
        loop {
            seen[x] = true;
            match self.parent[x] {
                Some(p) => x = p,
                None => break,
            }
        }
        let mut y = b;
        loop {
            if seen[y] {
                return y;
            }
            y = self.parent[y].expect("root is an ancestor of everything");
        }
    }
}

fn compute_postorder(children: &[Option<(usize, usize)>], root: usize) -> Vec<usize> {
    let mut order = Vec::with_capacity(children.len());
    // Iterative two-stack post-order.
    let mut stack = vec![root];
    let mut out = Vec::with_capacity(children.len());
    while let Some(n) = stack.pop() {
        out.push(n);
        if let Some((a, b)) = children[n] {
            stack.push(a);
            stack.push(b);
        }
    }
    while let Some(n) = out.pop() {
        order.push(n);
    }
    order
}
