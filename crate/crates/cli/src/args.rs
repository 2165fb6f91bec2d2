use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(
    name = "handle-forcing",
    version,
    about = "Casson-handle trees, forcing posets, Cohen reals and P(ω)/Fin arithmetic"
)]
pub struct Cli {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
    Dot,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Signed trees and the tree DSL.
    #[command(subcommand)]
    Tree(TreeCmd),
    /// Forcing posets of trees. A deeper node is a stronger condition, and
    /// two conditions are compatible when they have a common extension.
    #[command(subcommand)]
    Poset(PosetCmd),
    /// Regular-open completions and the Cantor algebra.
    #[command(subcommand)]
    Algebra(AlgebraCmd),
    /// Cohen conditions and generic prefixes.
    #[command(subcommand)]
    Cohen(CohenCmd),
    /// Almost permutations and sets mod Fin.
    #[command(subcommand)]
    Perm(PermCmd),
    /// Nonstandard naturals.
    #[command(subcommand)]
    Nonstd(NonstdCmd),
    /// Handle-level operations.
    #[command(subcommand)]
    Casson(CassonCmd),
}

#[derive(Args, Debug, Clone)]
pub struct TreeArg {
    /// Tree in DSL syntax, e.g. `linear(+)` or `(. (+) (-))`.
    #[arg(long)]
    pub tree: String,
    /// Truncation depth; required for infinite generators.
    #[arg(long)]
    pub depth: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    LevelPreserving,
    Homeomorphic,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SignsArg {
    Strict,
    Ignore,
}

#[derive(Args, Debug, Clone)]
pub struct EmbedOpts {
    #[arg(long, value_enum, default_value_t = ModeArg::LevelPreserving)]
    pub mode: ModeArg,
    #[arg(long, value_enum, default_value_t = SignsArg::Strict)]
    pub signs: SignsArg,
}

#[derive(Subcommand, Debug)]
pub enum TreeCmd {
    /// Parse DSL text and emit its structure.
    Parse {
        #[arg(long)]
        text: String,
        /// Depth used to draw infinite generators with `--format dot`.
        #[arg(long, default_value_t = 3)]
        depth: usize,
    },
    /// Print the canonical DSL of a structure emitted by `tree parse`
    /// (read from `--json` or standard input).
    Print {
        #[arg(long)]
        json: Option<String>,
    },
    /// Cut a tree at a depth.
    Truncate {
        #[arg(long)]
        tree: String,
        #[arg(long)]
        depth: usize,
    },
    /// Search for an embedding of one tree into another.
    Embed {
        #[arg(long)]
        small: String,
        #[arg(long)]
        big: String,
        #[arg(long, default_value_t = 4)]
        depth: usize,
        #[command(flatten)]
        opts: EmbedOpts,
    },
}

#[derive(Subcommand, Debug)]
pub enum PosetCmd {
    /// The forcing poset of a tree.
    FromTree {
        #[command(flatten)]
        tree: TreeArg,
        /// Leave the root out of the poset.
        #[arg(long)]
        no_root: bool,
    },
    /// Decide separativity, with a counterexample when it fails.
    Separative {
        #[command(flatten)]
        tree: TreeArg,
        #[arg(long)]
        no_root: bool,
    },
    /// Decide whether a set of conditions is dense.
    Dense {
        #[command(flatten)]
        tree: TreeArg,
        #[arg(long)]
        no_root: bool,
        /// Comma-separated condition labels.
        #[arg(long, value_delimiter = ',')]
        subset: Vec<String>,
    },
}

#[derive(Subcommand, Debug)]
pub enum AlgebraCmd {
    /// Materialize the regular-open completion.
    Complete {
        #[command(flatten)]
        tree: TreeArg,
        #[arg(long)]
        no_root: bool,
    },
    /// Compare the binary-tree completion with the clopen algebra.
    IsoCheck {
        #[arg(long)]
        depth: usize,
    },
    /// Check that every atom splits one level deeper.
    AtomSplit {
        #[arg(long, default_value = "binary")]
        tree: String,
        #[arg(long)]
        depth: usize,
    },
    /// Ternary interval of a finite branch.
    CantorCode {
        /// Binary word; `ε` or empty for the root.
        #[arg(long, allow_hyphen_values = true)]
        prefix: String,
    },
}

#[derive(Subcommand, Debug)]
pub enum CohenCmd {
    /// Meet the listed dense sets in order.
    Generic {
        /// Dense set, e.g. `len:3`, `diff:01^`, `pat:101`; repeatable.
        #[arg(long = "spec")]
        specs: Vec<String>,
        /// How many of the dense sets to meet; defaults to all.
        #[arg(long)]
        steps: Option<usize>,
        #[arg(long)]
        budget: Option<usize>,
    },
    /// Check density of a catalogue set up to a depth.
    VerifyDense {
        #[arg(long)]
        spec: String,
        #[arg(long)]
        depth: usize,
    },
    /// Check that a prefix disagrees with each listed real.
    Diagonal {
        #[arg(long)]
        prefix: String,
        /// Eventually periodic real, e.g. `01^` or `1(0)^`; repeatable.
        #[arg(long = "real")]
        reals: Vec<String>,
    },
}

#[derive(Subcommand, Debug)]
pub enum PermCmd {
    /// Image of a set under an almost permutation.
    Apply {
        #[arg(long)]
        perm: String,
        #[arg(long)]
        set: String,
    },
    /// `f ∘ g`.
    Compose {
        #[arg(long)]
        f: String,
        #[arg(long)]
        g: String,
    },
    Invert {
        #[arg(long)]
        perm: String,
    },
    /// Decide whether the tail reverses order somewhere.
    Classify {
        #[arg(long)]
        perm: String,
    },
    /// Decide equality of two sets mod Fin.
    Eqmodfin {
        #[arg(long)]
        a: String,
        #[arg(long)]
        b: String,
    },
}

#[derive(Subcommand, Debug)]
pub enum NonstdCmd {
    Add {
        #[arg(long, allow_hyphen_values = true)]
        a: String,
        #[arg(long, allow_hyphen_values = true)]
        b: String,
    },
    Mul {
        #[arg(long, allow_hyphen_values = true)]
        a: String,
        #[arg(long, allow_hyphen_values = true)]
        b: String,
    },
    Cmp {
        #[arg(long, allow_hyphen_values = true)]
        a: String,
        #[arg(long, allow_hyphen_values = true)]
        b: String,
    },
    /// Partial sums of a polynomial term in `n`.
    Sum {
        #[arg(long, allow_hyphen_values = true)]
        term: String,
    },
    /// Standard or infinite.
    Classify {
        #[arg(long, allow_hyphen_values = true)]
        a: String,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum RuleArg {
    Literal,
    Cumulative,
}

#[derive(Subcommand, Debug)]
pub enum CassonCmd {
    /// Standard 2-handle or Casson handle.
    Classify {
        #[arg(long)]
        tree: String,
        #[arg(long, default_value_t = 8)]
        probe_depth: usize,
    },
    /// Whether the set of nonempty levels is cofinite.
    Sfinite {
        #[arg(long)]
        tree: String,
        #[arg(long, default_value_t = 8)]
        horizon: usize,
    },
    /// Whether handle `a` embeds in handle `b`.
    Embeds {
        #[arg(long)]
        a: String,
        #[arg(long)]
        b: String,
        #[arg(long, default_value_t = 4)]
        depth: usize,
        #[command(flatten)]
        opts: EmbedOpts,
    },
    /// Run a handle through the forcing pipeline.
    ToCohen {
        #[arg(long)]
        tree: String,
        #[arg(long)]
        depth: usize,
    },
    /// The level-count almost permutation.
    Permutation {
        #[arg(long)]
        tree: String,
        #[arg(long, default_value_t = 12)]
        horizon: usize,
        #[arg(long, value_enum, default_value_t = RuleArg::Literal)]
        rule: RuleArg,
    },
}
