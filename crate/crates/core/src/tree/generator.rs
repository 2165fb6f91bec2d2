use std::fmt;
use std::sync::Arc;

use super::{Sign, SignedTree, TreeNode};

/// How the two children of a full binary node are signed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SignRule {
    /// Both children get the same sign; `Unsigned` gives the bare tree.
    Uniform(Sign),
    /// Left child `+`, right child `-`.
    Alternating,
}

impl SignRule {
    fn child_signs(self) -> [Sign; 2] {
        match self {
            SignRule::Uniform(s) => [s, s],
            SignRule::Alternating => [Sign::Plus, Sign::Minus],
        }
    }
}

type RuleFn = dyn Fn(&[usize]) -> Vec<Sign> + Send + Sync;

/// A user-supplied rule mapping the path of a node to the signs of its
/// children. The rule must be total on every path it generates.
#[derive(Clone)]
pub struct ChildRule {
    name: String,
    rule: Arc<RuleFn>,
}

impl ChildRule {
    pub fn new(
        name: impl Into<String>,
        rule: impl Fn(&[usize]) -> Vec<Sign> + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            rule: Arc::new(rule),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn children_of(&self, path: &[usize]) -> Vec<Sign> {
        (self.rule)(path)
    }
}

impl fmt::Debug for ChildRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ChildRule")
            .field("name", &self.name)
            .finish_non_exhaustive()
    }
}

impl PartialEq for ChildRule {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name && Arc::ptr_eq(&self.rule, &other.rule)
    }
}

/// A possibly infinite signed tree, given by a finite description.
#[derive(Clone, Debug, PartialEq)]
pub enum TreeGenerator {
    /// One child per node, all with the given sign.
    Linear(Sign),
    /// Two children per node.
    FullBinary(SignRule),
    /// Two children per node; the leftmost branch carries the given sign
    /// and every other node is `+`.
    BinaryWithBranch(Sign),
    /// A finite tree.
    Explicit(SignedTree),
    Custom(ChildRule),
}

impl TreeGenerator {
    /// A custom generator whose nodes at level `l` have children signed by
    /// `pattern[l % pattern.len()]`.
    pub fn periodic_levels(name: impl Into<String>, pattern: Vec<Vec<Sign>>) -> Self {
        assert!(!pattern.is_empty(), "pattern must have at least one level");
        TreeGenerator::Custom(ChildRule::new(name, move |path: &[usize]| {
            pattern[path.len() % pattern.len()].clone()
        }))
    }

    pub fn is_explicit(&self) -> bool {
        matches!(self, TreeGenerator::Explicit(_))
    }

    /// Signs of the children of the node at `path`.
    fn children_of(&self, path: &[usize]) -> Vec<Sign> {
        match self {
            TreeGenerator::Linear(s) => vec![*s],
            TreeGenerator::FullBinary(rule) => rule.child_signs().to_vec(),
            TreeGenerator::BinaryWithBranch(s) => {
                let on_spine = path.iter().all(|&i| i == 0);
                vec![if on_spine { *s } else { Sign::Plus }, Sign::Plus]
            }
            TreeGenerator::Explicit(t) => t
                .find_path(path)
                .map(|id| t.children(id).iter().map(|&c| t.sign(c)).collect())
                .unwrap_or_default(),
            TreeGenerator::Custom(rule) => rule.children_of(path),
        }
    }

    /// The explicit tree of all nodes at levels `<= depth`.
    pub fn truncate(&self, depth: usize) -> SignedTree {
        if let TreeGenerator::Explicit(t) = self {
            return t.truncated(depth);
        }
        fn grow(
            generator: &TreeGenerator,
            path: &mut Vec<usize>,
            sign: Sign,
            remaining: usize,
        ) -> TreeNode {
            let mut node = TreeNode::leaf(sign);
            if remaining > 0 {
                for (i, child_sign) in generator.children_of(path).into_iter().enumerate() {
                    path.push(i);
                    node.children
                        .push(grow(generator, path, child_sign, remaining - 1));
                    path.pop();
                }
            }
            node
        }
        let root = grow(self, &mut Vec::new(), Sign::Unsigned, depth);
        SignedTree::from_nested(&root).expect("generated root is unsigned")
    }

    /// Number of nodes at each level `1..=levels`, saturating at
    /// `u128::MAX`. The binary families are counted without materializing.
    pub fn level_counts(&self, levels: usize) -> Vec<u128> {
        match self {
            TreeGenerator::Linear(_) => vec![1; levels],
            TreeGenerator::FullBinary(_) | TreeGenerator::BinaryWithBranch(_) => (1..=levels)
                .map(|l| if l < 128 { 1u128 << l } else { u128::MAX })
                .collect(),
            _ => {
                let mut counts = vec![0u128; levels];
                for entry in self.truncate(levels).level_profile() {
                    counts[entry.level - 1] = entry.nodes as u128;
                }
                counts
            }
        }
    }
}

/// Full binary tree of the given depth whose leftmost branch carries
/// `spine` (one sign per level) and whose other nodes are `+`.
pub(crate) fn binary_with_spine(spine: &[Sign]) -> SignedTree {
    fn grow(spine: &[Sign], level: usize, on_spine: bool, sign: Sign) -> TreeNode {
        let mut node = TreeNode::leaf(sign);
        if level < spine.len() {
            let left = if on_spine { spine[level] } else { Sign::Plus };
            node.children.push(grow(spine, level + 1, on_spine, left));
            node.children
                .push(grow(spine, level + 1, false, Sign::Plus));
        }
        node
    }
    SignedTree::from_nested(&grow(spine, 0, true, Sign::Unsigned)).expect("unsigned root")
}
