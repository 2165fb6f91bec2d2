//! Signed rooted trees: the combinatorial skeleton of a Casson handle.
//!
//! Every non-root node stands for one self-intersection of a kinky handle
//! and carries its sign; the root is the attaching region and is unsigned.
//! Finite trees are stored as an arena in breadth-first order, so node ids
//! grow with level and, within a level, from left to right.

mod dsl;
mod embed;
mod generator;

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

pub use dsl::{parse_tree, print_tree, ParseError};
pub use embed::{tree_embeds, EmbeddingMode, EmbeddingWitness, SignPolicy, WitnessViolation};
pub(crate) use generator::binary_with_spine;
pub use generator::{ChildRule, SignRule, TreeGenerator};

/// Index of a node inside a [`SignedTree`].
pub type NodeId = usize;

/// Self-intersection sign of a node.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sign {
    Plus,
    Minus,
    Unsigned,
}

impl Sign {
    pub fn symbol(self) -> char {
        match self {
            Sign::Plus => '+',
            Sign::Minus => '-',
            Sign::Unsigned => '.',
        }
    }

    pub fn from_symbol(c: char) -> Option<Sign> {
        match c {
            '+' => Some(Sign::Plus),
            '-' => Some(Sign::Minus),
            '.' => Some(Sign::Unsigned),
            _ => None,
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.symbol())
    }
}

impl Serialize for Sign {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Sign {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        let mut chars = s.chars();
        match (chars.next().and_then(Sign::from_symbol), chars.next()) {
            (Some(sign), None) => Ok(sign),
            _ => Err(serde::de::Error::custom(format!("invalid sign {s:?}"))),
        }
    }
}

/// Nested form of a tree, used for construction and the JSON export.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeNode {
    pub sign: Sign,
    #[serde(default)]
    pub children: Vec<TreeNode>,
}

impl TreeNode {
    pub fn leaf(sign: Sign) -> Self {
        Self {
            sign,
            children: Vec::new(),
        }
    }

    pub fn new(sign: Sign, children: Vec<TreeNode>) -> Self {
        Self { sign, children }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TreeError {
    #[error("root must be unsigned, found {0}")]
    SignedRoot(Sign),
}

#[derive(Clone, Debug, PartialEq, Eq)]
struct NodeData {
    sign: Sign,
    parent: Option<NodeId>,
    children: Vec<NodeId>,
    level: usize,
    path: Vec<usize>,
}

/// A finite rooted tree with ordered children and per-node signs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SignedTree {
    nodes: Vec<NodeData>,
}

/// Counts for one level of a tree.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelCounts {
    pub level: usize,
    pub nodes: usize,
    pub plus: usize,
    pub minus: usize,
}

impl SignedTree {
    /// The tree consisting of the root alone.
    pub fn root_only() -> Self {
        Self::from_nested(&TreeNode::leaf(Sign::Unsigned)).expect("unsigned root")
    }

    pub fn from_nested(root: &TreeNode) -> Result<Self, TreeError> {
        if root.sign != Sign::Unsigned {
            return Err(TreeError::SignedRoot(root.sign));
        }
        let mut nodes = vec![NodeData {
            sign: root.sign,
            parent: None,
            children: Vec::new(),
            level: 0,
            path: Vec::new(),
        }];
        let mut queue = std::collections::VecDeque::from([(0usize, root)]);
        while let Some((id, node)) = queue.pop_front() {
            for (i, child) in node.children.iter().enumerate() {
                let child_id = nodes.len();
                let mut path = nodes[id].path.clone();
                path.push(i);
                nodes.push(NodeData {
                    sign: child.sign,
                    parent: Some(id),
                    children: Vec::new(),
                    level: nodes[id].level + 1,
                    path,
                });
                nodes[id].children.push(child_id);
                queue.push_back((child_id, child));
            }
        }
        Ok(Self { nodes })
    }

    pub fn to_nested(&self) -> TreeNode {
        self.nested_at(0)
    }

    fn nested_at(&self, id: NodeId) -> TreeNode {
        TreeNode {
            sign: self.nodes[id].sign,
            children: self.nodes[id]
                .children
                .iter()
                .map(|&c| self.nested_at(c))
                .collect(),
        }
    }

    pub const ROOT: NodeId = 0;

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    /// Never true: a tree always has its root.
    pub fn is_empty(&self) -> bool {
        false
    }

    /// Largest level present; `0` for the root-only tree.
    pub fn depth(&self) -> usize {
        self.nodes.last().map_or(0, |n| n.level)
    }

    pub fn node_ids(&self) -> std::ops::Range<NodeId> {
        0..self.nodes.len()
    }

    pub fn sign(&self, id: NodeId) -> Sign {
        self.nodes[id].sign
    }

    pub fn children(&self, id: NodeId) -> &[NodeId] {
        &self.nodes[id].children
    }

    pub fn parent(&self, id: NodeId) -> Option<NodeId> {
        self.nodes[id].parent
    }

    pub fn level(&self, id: NodeId) -> usize {
        self.nodes[id].level
    }

    /// Child indices leading from the root to `id`.
    pub fn path(&self, id: NodeId) -> &[usize] {
        &self.nodes[id].path
    }

    /// Printable name of a node: `ε` for the root, otherwise the child
    /// indices along its path (`[12]` for indices above nine).
    pub fn label(&self, id: NodeId) -> String {
        path_label(self.path(id))
    }

    pub fn find_path(&self, path: &[usize]) -> Option<NodeId> {
        path.iter()
            .try_fold(Self::ROOT, |id, &i| self.children(id).get(i).copied())
    }

    /// Whether `ancestor` lies on the root path of `node` (inclusive).
    pub fn is_ancestor_or_self(&self, ancestor: NodeId, node: NodeId) -> bool {
        let mut cur = Some(node);
        while let Some(id) = cur {
            if id == ancestor {
                return true;
            }
            if self.level(id) <= self.level(ancestor) {
                return false;
            }
            cur = self.parent(id);
        }
        false
    }

    /// Ids of `id` and all its descendants, in breadth-first order.
    pub fn subtree(&self, id: NodeId) -> Vec<NodeId> {
        let mut out = vec![id];
        let mut i = 0;
        while i < out.len() {
            out.extend_from_slice(self.children(out[i]));
            i += 1;
        }
        out
    }

    pub fn leaves(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.node_ids().filter(|&id| self.children(id).is_empty())
    }

    /// The subtree of nodes at levels `<= depth`.
    pub fn truncated(&self, depth: usize) -> SignedTree {
        fn cut(node: &TreeNode, remaining: usize) -> TreeNode {
            TreeNode {
                sign: node.sign,
                children: if remaining == 0 {
                    Vec::new()
                } else {
                    node.children
                        .iter()
                        .map(|c| cut(c, remaining - 1))
                        .collect()
                },
            }
        }
        SignedTree::from_nested(&cut(&self.to_nested(), depth)).expect("root unchanged")
    }

    /// The same shape with every sign erased.
    pub fn unsigned(&self) -> SignedTree {
        let mut out = self.clone();
        for n in &mut out.nodes {
            n.sign = Sign::Unsigned;
        }
        out
    }

    /// Per-level node and sign counts for levels `1..=depth`.
    pub fn level_profile(&self) -> Vec<LevelCounts> {
        let mut profile: Vec<LevelCounts> = (1..=self.depth())
            .map(|level| LevelCounts {
                level,
                nodes: 0,
                plus: 0,
                minus: 0,
            })
            .collect();
        for n in self.nodes.iter().skip(1) {
            let entry = &mut profile[n.level - 1];
            entry.nodes += 1;
            match n.sign {
                Sign::Plus => entry.plus += 1,
                Sign::Minus => entry.minus += 1,
                Sign::Unsigned => {}
            }
        }
        profile
    }

    /// Graphviz rendering.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph tree {\n");
        for id in self.node_ids() {
            out.push_str(&format!(
                "  n{id} [label=\"{} {}\"];\n",
                self.label(id),
                self.sign(id)
            ));
        }
        for id in self.node_ids() {
            for &c in self.children(id) {
                out.push_str(&format!("  n{id} -> n{c};\n"));
            }
        }
        out.push_str("}\n");
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self.to_nested()).expect("tree serializes")
    }
}

pub(crate) fn path_label(path: &[usize]) -> String {
    if path.is_empty() {
        return "ε".to_string();
    }
    path.iter()
        .map(|&i| {
            if i < 10 {
                i.to_string()
            } else {
                format!("[{i}]")
            }
        })
        .collect()
}

impl Serialize for SignedTree {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.to_nested().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for SignedTree {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let nested = TreeNode::deserialize(deserializer)?;
        SignedTree::from_nested(&nested).map_err(serde::de::Error::custom)
    }
}

impl fmt::Display for SignedTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        dsl::write_sexpr(f, self, SignedTree::ROOT)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> SignedTree {
        // root -> + -> {+, -}
        SignedTree::from_nested(&TreeNode::new(
            Sign::Unsigned,
            vec![TreeNode::new(
                Sign::Plus,
                vec![TreeNode::leaf(Sign::Plus), TreeNode::leaf(Sign::Minus)],
            )],
        ))
        .unwrap()
    }

    #[test]
    fn arena_is_breadth_first() {
        let t = sample();
        assert_eq!(t.len(), 4);
        assert_eq!(t.depth(), 2);
        assert_eq!(t.children(0), &[1]);
        assert_eq!(t.children(1), &[2, 3]);
        assert_eq!(t.label(3), "01");
        assert_eq!(t.find_path(&[0, 1]), Some(3));
        assert_eq!(t.find_path(&[1]), None);
        assert_eq!(
            t.to_nested(),
            SignedTree::from_nested(&t.to_nested()).unwrap().to_nested()
        );
    }

    #[test]
    fn signed_root_rejected() {
        let err = SignedTree::from_nested(&TreeNode::leaf(Sign::Plus)).unwrap_err();
        assert_eq!(err, TreeError::SignedRoot(Sign::Plus));
    }

    #[test]
    fn profile_counts() {
        let t = sample();
        assert_eq!(
            t.level_profile(),
            vec![
                LevelCounts {
                    level: 1,
                    nodes: 1,
                    plus: 1,
                    minus: 0
                },
                LevelCounts {
                    level: 2,
                    nodes: 2,
                    plus: 1,
                    minus: 1
                },
            ]
        );
        assert!(SignedTree::root_only().level_profile().is_empty());
    }

    #[test]
    fn ancestry() {
        let t = sample();
        assert!(t.is_ancestor_or_self(0, 3));
        assert!(t.is_ancestor_or_self(1, 2));
        assert!(t.is_ancestor_or_self(2, 2));
        assert!(!t.is_ancestor_or_self(2, 3));
        assert!(!t.is_ancestor_or_self(3, 1));
        assert_eq!(t.subtree(1), vec![1, 2, 3]);
    }

    #[test]
    fn json_shape() {
        let t = sample();
        let json = serde_json::to_string(&t).unwrap();
        assert_eq!(
            json,
            r#"{"sign":".","children":[{"sign":"+","children":[{"sign":"+","children":[]},{"sign":"-","children":[]}]}]}"#
        );
        let back: SignedTree = serde_json::from_str(&json).unwrap();
        assert_eq!(back, t);
    }

    #[test]
    fn dot_lists_edges() {
        let dot = sample().to_dot();
        assert!(dot.contains("n0 -> n1;"));
        assert!(dot.contains("n1 -> n3;"));
    }
}
