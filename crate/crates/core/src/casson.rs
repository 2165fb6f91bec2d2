//! Handle-level operations: classifying handles, the s-finiteness of their
//! level sets, the embedding order between handles, the tree-to-Cohen
//! pipeline and the level-count permutation.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::order::{poset_from_tree, PosetDump, SeparativityVerdict};
use crate::pfin::{frechet_contains, AlmostPermutation, ModFinSet, PfinError};
use crate::ro::{atom_splitting, element_count, AlgebraError};
use crate::tree::binary_with_spine;
use crate::tree::{
    print_tree, tree_embeds, EmbeddingMode, EmbeddingWitness, Sign, SignPolicy, SignRule,
    SignedTree, TreeGenerator, TreeNode,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CassonError {
    #[error("depth must be at least 1")]
    ZeroDepth,
    #[error("tree reaches depth {available}, {requested} requested")]
    TreeTooShallow { requested: usize, available: usize },
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error("levels {a} and {b} are both sent to {image}")]
    NotInjective { a: u64, b: u64, image: u64 },
    #[error("level counts are not eventually periodic: {0}")]
    NotEventuallyPeriodic(String),
}

/// A Casson handle, given by its signed tree.
#[derive(Clone, Debug, PartialEq)]
pub struct CassonHandle {
    pub tree: TreeGenerator,
    pub label: String,
}

impl CassonHandle {
    pub fn new(tree: TreeGenerator) -> Self {
        let label = print_tree(&tree);
        Self { tree, label }
    }

    pub fn labelled(tree: TreeGenerator, label: impl Into<String>) -> Self {
        Self {
            tree,
            label: label.into(),
        }
    }

    pub fn exoticness(&self) -> Exoticness {
        known_exoticness(&self.tree)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum HandleKind {
    Standard2Handle,
    CassonHandle,
}

impl fmt::Display for HandleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            HandleKind::Standard2Handle => "Standard2Handle",
            HandleKind::CassonHandle => "CassonHandle",
        })
    }
}

/// What is known about a handle's smooth structure. Looked up, never
/// computed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Exoticness {
    /// A finite tower: the standard 2-handle.
    Standard,
    /// Every stage carries the same sign; such handles are known to be
    /// exotic.
    KnownExotic,
    Unknown,
}

pub fn known_exoticness(tree: &TreeGenerator) -> Exoticness {
    let signed = |s: &Sign| matches!(s, Sign::Plus | Sign::Minus);
    match tree {
        TreeGenerator::Explicit(_) => Exoticness::Standard,
        TreeGenerator::Linear(s) | TreeGenerator::FullBinary(SignRule::Uniform(s)) if signed(s) => {
            Exoticness::KnownExotic
        }
        TreeGenerator::BinaryWithBranch(Sign::Plus) => Exoticness::KnownExotic,
        _ => Exoticness::Unknown,
    }
}

/// The largest `l <= horizon` such that the tree has nodes at every level
/// up to `l`.
fn reached_depth(tree: &TreeGenerator, horizon: usize) -> usize {
    match tree {
        TreeGenerator::Linear(_)
        | TreeGenerator::FullBinary(_)
        | TreeGenerator::BinaryWithBranch(_) => horizon,
        _ => tree.truncate(horizon).depth(),
    }
}

/// Explicit trees are finite towers. A custom rule that dies out within
/// `probe_depth` levels is one too; every other generator is infinite.
pub fn classify_handle(tree: &TreeGenerator, probe_depth: usize) -> HandleKind {
    match tree {
        TreeGenerator::Explicit(_) => HandleKind::Standard2Handle,
        TreeGenerator::Custom(_) if reached_depth(tree, probe_depth) < probe_depth => {
            HandleKind::Standard2Handle
        }
        _ => HandleKind::CassonHandle,
    }
}

/// The set of nonempty levels, level 0 being the root. Infinite
/// generators are taken to have every level nonempty once the first
/// `horizon` levels are.
pub fn level_set(tree: &TreeGenerator, horizon: usize) -> ModFinSet {
    match tree {
        TreeGenerator::Explicit(t) => ModFinSet::finite(0..=t.depth() as u64),
        _ => {
            let depth = reached_depth(tree, horizon);
            if depth < horizon {
                ModFinSet::finite(0..=depth as u64)
            } else {
                ModFinSet::naturals()
            }
        }
    }
}

/// Whether the level set is cofinite.
pub fn sfinite_tree(tree: &TreeGenerator, horizon: usize) -> bool {
    frechet_contains(&level_set(tree, horizon))
}

/// Whether handle `a` embeds in handle `b`, which happens when the tree of
/// `b` embeds in the tree of `a` (up to `depth`). The witness is the tree
/// embedding.
pub fn ch_embeds(
    a: &CassonHandle,
    b: &CassonHandle,
    depth: usize,
    mode: EmbeddingMode,
    policy: SignPolicy,
) -> Option<EmbeddingWitness> {
    tree_embeds(
        &b.tree.truncate(depth),
        &a.tree.truncate(depth),
        mode,
        policy,
    )
}

/// The leftmost branch of length `depth`, as a linear tree, with its
/// embedding into the truncation of `tree`.
pub fn extract_linear(
    tree: &TreeGenerator,
    depth: usize,
) -> Result<(SignedTree, EmbeddingWitness), CassonError> {
    if depth == 0 {
        return Err(CassonError::ZeroDepth);
    }
    let big = tree.truncate(depth);
    if big.depth() < depth {
        return Err(CassonError::TreeTooShallow {
            requested: depth,
            available: big.depth(),
        });
    }
    let mut branch = vec![SignedTree::ROOT];
    while let Some(&first) = big.children(*branch.last().expect("nonempty")).first() {
        branch.push(first);
    }
    let spine: Vec<Sign> = branch[1..].iter().map(|&id| big.sign(id)).collect();
    Ok((
        linear_tree(&spine),
        EmbeddingWitness::from_assignment(branch),
    ))
}

fn linear_tree(spine: &[Sign]) -> SignedTree {
    let mut below: Option<TreeNode> = None;
    for &s in spine.iter().rev() {
        below = Some(TreeNode::new(s, below.into_iter().collect()));
    }
    SignedTree::from_nested(&TreeNode::new(Sign::Unsigned, below.into_iter().collect()))
        .expect("unsigned root")
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlgebraStats {
    pub depth: usize,
    pub elements: u64,
    pub separative: bool,
    pub atom_splitting: bool,
}

/// The outcome of running a handle through the forcing pipeline.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ForcingReport {
    pub tree: String,
    pub depth: usize,
    pub linear_branch: String,
    /// Linear branch into the truncated input tree.
    pub linear_witness: Vec<(String, String)>,
    /// Linear branch into the binary tree carrying it as leftmost branch.
    pub binary_witness: Vec<(String, String)>,
    pub cohen_poset: PosetDump,
    pub algebra_stats: AlgebraStats,
}

fn witness_from_pairs(
    pairs: &[(String, String)],
    small: &SignedTree,
    big: &SignedTree,
) -> Option<EmbeddingWitness> {
    let find = |t: &SignedTree, label: &str| t.node_ids().find(|&id| t.label(id) == label);
    let mut assignment = vec![usize::MAX; small.len()];
    for (u, v) in pairs {
        assignment[find(small, u)?] = find(big, v)?;
    }
    Some(EmbeddingWitness::from_assignment(assignment))
}

impl ForcingReport {
    /// Rebuilds the trees from `tree` and checks both witnesses.
    pub fn replay(&self, tree: &TreeGenerator) -> bool {
        let big = tree.truncate(self.depth);
        let Ok((linear, _)) = extract_linear(tree, self.depth) else {
            return false;
        };
        let spine: Vec<Sign> = linear
            .node_ids()
            .skip(1)
            .map(|id| linear.sign(id))
            .collect();
        let binary = binary_with_spine(&spine);
        let check = |pairs: &[(String, String)], big: &SignedTree| {
            witness_from_pairs(pairs, &linear, big).is_some_and(|w| {
                w.verify(
                    &linear,
                    big,
                    EmbeddingMode::LevelPreserving,
                    SignPolicy::Strict,
                )
                .is_ok()
            })
        };
        linear.to_string() == self.linear_branch
            && check(&self.linear_witness, &big)
            && check(&self.binary_witness, &binary)
    }
}

/// Runs a handle through the forcing pipeline: pick a linear branch, place
/// it on the leftmost branch of a binary tree, then drop all signs and
/// report on the forcing poset of the unsigned binary tree.
pub fn casson_to_cohen(
    tree: &TreeGenerator,
    depth: usize,
    cap: u64,
) -> Result<ForcingReport, CassonError> {
    let (linear, linear_witness) = extract_linear(tree, depth)?;
    let big = tree.truncate(depth);
    let spine: Vec<Sign> = linear
        .node_ids()
        .skip(1)
        .map(|id| linear.sign(id))
        .collect();
    let binary = binary_with_spine(&spine);
    let binary_witness = tree_embeds(
        &linear,
        &binary,
        EmbeddingMode::LevelPreserving,
        SignPolicy::Strict,
    )
    .expect("a branch embeds in a binary tree carrying it");

    let cohen = TreeGenerator::FullBinary(SignRule::Uniform(Sign::Unsigned));
    let poset = poset_from_tree(&cohen.truncate(depth), true);
    let count = element_count(&poset);
    let elements =
        u64::try_from(&count)
            .ok()
            .filter(|&n| n <= cap)
            .ok_or(AlgebraError::CapExceeded {
                atoms: poset.minimal().len(),
                cap,
            })?;
    let SeparativityVerdict { separative, .. } = poset.is_separative();
    let stats = AlgebraStats {
        depth,
        elements,
        separative,
        atom_splitting: atom_splitting(&cohen, depth)?,
    };

    Ok(ForcingReport {
        tree: print_tree(tree),
        depth,
        linear_branch: linear.to_string(),
        linear_witness: linear_witness.label_pairs(&linear, &big),
        binary_witness: binary_witness.label_pairs(&linear, &binary),
        cohen_poset: poset.dump(),
        algebra_stats: stats,
    })
}

/// How the displacement at level `n` is read off the level counts.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PermutationRule {
    /// `p(n) = n + k_n`.
    #[default]
    Literal,
    /// `p(n) = n + k_0 + .. + k_n`.
    Cumulative,
}

/// `(start, period)` of the shortest period the sequence visibly settles
/// into, requiring at least two full periods after the start.
fn detect_period(counts: &[u128]) -> Option<(usize, usize)> {
    let h = counts.len();
    (1..=h / 2).find_map(|p| {
        (0..=h - 2 * p)
            .find(|&start| (start..h - p).all(|n| counts[n] == counts[n + p]))
            .map(|start| (start, p))
    })
}

/// The map sending level `n` to `n` plus the number of nodes (double
/// points) at level `n`. Levels are counted from the first level below the
/// root. Level counts of custom generators are inspected up to `horizon`.
pub fn ch_permutation(
    tree: &TreeGenerator,
    horizon: usize,
    rule: PermutationRule,
) -> Result<AlmostPermutation, CassonError> {
    let counts: Vec<u128> = match tree {
        TreeGenerator::Linear(_) => vec![1; 2],
        TreeGenerator::FullBinary(_) | TreeGenerator::BinaryWithBranch(_) => {
            return Err(CassonError::NotEventuallyPeriodic(
                "level counts double at every level".into(),
            ))
        }
        TreeGenerator::Explicit(t) => tree.level_counts(t.depth() + 2),
        TreeGenerator::Custom(_) => tree.level_counts(horizon),
    };
    let counts: Vec<u128> = match rule {
        PermutationRule::Literal => counts,
        PermutationRule::Cumulative => counts
            .iter()
            .scan(0u128, |acc, &k| {
                *acc = acc.saturating_add(k);
                Some(*acc)
            })
            .collect(),
    };
    let (start, period) = detect_period(&counts).ok_or_else(|| {
        CassonError::NotEventuallyPeriodic(format!("no period within {} levels", counts.len()))
    })?;
    let to_i64 = |k: u128| {
        i64::try_from(k)
            .map_err(|_| CassonError::NotEventuallyPeriodic(format!("count {k} out of range")))
    };
    let mut displacements = vec![0i64; period];
    for n in start..start + period {
        displacements[n % period] = to_i64(counts[n])?;
    }
    let exceptions = (0..start)
        .map(|n| Ok((n as u64, n as u64 + to_i64(counts[n])? as u64)))
        .collect::<Result<Vec<_>, CassonError>>()?;
    AlmostPermutation::new(start as u64, period as u64, displacements, exceptions).map_err(|e| {
        match e {
            PfinError::NotInjective { a, b, image } => CassonError::NotInjective { a, b, image },
            other => CassonError::NotEventuallyPeriodic(other.to_string()),
        }
    })
}
