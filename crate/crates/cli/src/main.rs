mod args;

use std::fmt::{Debug, Display};
use std::io::{Read, Write};
use std::process::ExitCode;

use clap::Parser;
use handle_forcing::casson::{self, CassonError, CassonHandle, PermutationRule};
use handle_forcing::cohen::{self, CohenError, DenseSetSpec, PeriodicBinarySeq};
use handle_forcing::nonstd::{self, NonstandardNat, NonstdError, Poly};
use handle_forcing::order::{poset_from_tree, ForcingPoset};
use handle_forcing::pfin::{self, AlmostPermutation, ModFinSet, PfinError};
use handle_forcing::ro::{self, branch_to_interval};
use handle_forcing::tree::{
    parse_tree, print_tree, tree_embeds, EmbeddingMode, Sign, SignPolicy, SignRule, SignedTree,
    TreeGenerator, TreeNode,
};
use handle_forcing::{element_cap_from_env, BitString};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use args::*;

/// What a command produces, in each format it supports.
struct Output {
    json: Value,
    text: String,
    dot: Option<String>,
}

impl Output {
    fn new(json: Value, text: impl Into<String>) -> Self {
        Self {
            json,
            text: text.into(),
            dot: None,
        }
    }

    fn of<T: Serialize + Display>(value: &T) -> Self {
        Self::new(to_json(value), value.to_string())
    }
}

enum Failure {
    /// Malformed input: exit 2.
    Usage(String),
    /// Well-formed input the mathematics rejects: exit 1.
    Domain { kind: String, message: String },
}

fn usage(e: impl Display) -> Failure {
    Failure::Usage(e.to_string())
}

/// The error's variant name, taken from its `Debug` form.
fn domain<E: Debug + Display>(e: E) -> Failure {
    let debug = format!("{e:?}");
    let kind = debug
        .split(|c: char| !c.is_alphanumeric())
        .next()
        .unwrap_or("Error")
        .to_string();
    Failure::Domain {
        kind,
        message: e.to_string(),
    }
}

fn pfin_failure(e: PfinError) -> Failure {
    match e {
        PfinError::Parse { .. } => usage(e),
        other => domain(other),
    }
}

fn nonstd_failure(e: NonstdError) -> Failure {
    match e {
        NonstdError::Parse { .. } => usage(e),
        other => domain(other),
    }
}

fn cohen_failure(e: CohenError) -> Failure {
    match e {
        CohenError::BadSequence { .. } | CohenError::BadSpec { .. } => usage(e),
        other => domain(other),
    }
}

fn to_json<T: Serialize>(value: &T) -> Value {
    serde_json::to_value(value).expect("serializable")
}

type Outcome = Result<Output, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli.command) {
        Ok(out) => {
            let rendered = match cli.format {
                Format::Json => serde_json::to_string_pretty(&out.json).expect("serializable"),
                Format::Text => out.text,
                Format::Dot => match out.dot {
                    Some(dot) => dot,
                    None => return fail(usage("this command has no dot output")),
                },
            };
            let mut stdout = std::io::stdout().lock();
            // A closed pipe is not worth a panic.
            let _ = writeln!(stdout, "{}", rendered.trim_end());
            ExitCode::SUCCESS
        }
        Err(f) => fail(f),
    }
}

fn fail(f: Failure) -> ExitCode {
    let (code, body) = match f {
        Failure::Usage(message) => (2, json!({"error": "usage", "message": message})),
        Failure::Domain { kind, message } => (1, json!({"error": kind, "message": message})),
    };
    eprintln!("{body}");
    ExitCode::from(code)
}

fn run(command: &Command) -> Outcome {
    match command {
        Command::Tree(c) => tree_cmd(c),
        Command::Poset(c) => poset_cmd(c),
        Command::Algebra(c) => algebra_cmd(c),
        Command::Cohen(c) => cohen_cmd(c),
        Command::Perm(c) => perm_cmd(c),
        Command::Nonstd(c) => nonstd_cmd(c),
        Command::Casson(c) => casson_cmd(c),
    }
}

fn generator(text: &str) -> Result<TreeGenerator, Failure> {
    parse_tree(text).map_err(usage)
}

fn materialize(arg: &TreeArg) -> Result<SignedTree, Failure> {
    match (generator(&arg.tree)?, arg.depth) {
        (TreeGenerator::Explicit(t), None) => Ok(t),
        (g, Some(d)) => Ok(g.truncate(d)),
        (_, None) => Err(usage("--depth is required for infinite generators")),
    }
}

fn embed_opts(opts: &EmbedOpts) -> (EmbeddingMode, SignPolicy) {
    let mode = match opts.mode {
        ModeArg::LevelPreserving => EmbeddingMode::LevelPreserving,
        ModeArg::Homeomorphic => EmbeddingMode::Homeomorphic,
    };
    let policy = match opts.signs {
        SignsArg::Strict => SignPolicy::Strict,
        SignsArg::Ignore => SignPolicy::Ignore,
    };
    (mode, policy)
}

fn tree_output(tree: &SignedTree) -> Output {
    Output {
        json: tree.to_json(),
        text: tree.to_string(),
        dot: Some(tree.to_dot()),
    }
}

/// JSON form of a generator, as emitted by `tree parse`.
#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum GeneratorJson {
    Linear { sign: Sign },
    Binary { signs: String },
    BinaryBranch { sign: Sign },
    Explicit { tree: TreeNode },
}

impl GeneratorJson {
    fn from_generator(g: &TreeGenerator) -> Result<Self, Failure> {
        Ok(match g {
            TreeGenerator::Linear(s) => GeneratorJson::Linear { sign: *s },
            TreeGenerator::FullBinary(SignRule::Uniform(s)) => GeneratorJson::Binary {
                signs: s.to_string(),
            },
            TreeGenerator::FullBinary(SignRule::Alternating) => GeneratorJson::Binary {
                signs: "alt".into(),
            },
            TreeGenerator::BinaryWithBranch(s) => GeneratorJson::BinaryBranch { sign: *s },
            TreeGenerator::Explicit(t) => GeneratorJson::Explicit {
                tree: t.to_nested(),
            },
            TreeGenerator::Custom(_) => return Err(usage("custom generators have no JSON form")),
        })
    }

    fn into_generator(self) -> Result<TreeGenerator, Failure> {
        Ok(match self {
            GeneratorJson::Linear { sign } => TreeGenerator::Linear(sign),
            GeneratorJson::Binary { signs } => {
                let rule = match signs.as_str() {
                    "alt" => SignRule::Alternating,
                    s => {
                        let mut chars = s.chars();
                        match (chars.next().and_then(Sign::from_symbol), chars.next()) {
                            (Some(sign), None) => SignRule::Uniform(sign),
                            _ => return Err(usage(format!("invalid binary signs {s:?}"))),
                        }
                    }
                };
                TreeGenerator::FullBinary(rule)
            }
            GeneratorJson::BinaryBranch { sign } => TreeGenerator::BinaryWithBranch(sign),
            GeneratorJson::Explicit { tree } => {
                TreeGenerator::Explicit(SignedTree::from_nested(&tree).map_err(usage)?)
            }
        })
    }
}

fn tree_cmd(c: &TreeCmd) -> Outcome {
    match c {
        TreeCmd::Parse { text, depth } => {
            let g = generator(text)?;
            let canonical = print_tree(&g);
            Ok(Output {
                json: to_json(&GeneratorJson::from_generator(&g)?),
                dot: Some(g.truncate(*depth).to_dot()),
                text: canonical,
            })
        }
        TreeCmd::Print { json } => {
            let raw = match json {
                Some(j) => j.clone(),
                None => {
                    let mut buf = String::new();
                    std::io::stdin().read_to_string(&mut buf).map_err(usage)?;
                    buf
                }
            };
            let parsed: GeneratorJson = serde_json::from_str(&raw).map_err(usage)?;
            let canonical = print_tree(&parsed.into_generator()?);
            Ok(Output::new(Value::String(canonical.clone()), canonical))
        }
        TreeCmd::Truncate { tree, depth } => Ok(tree_output(&generator(tree)?.truncate(*depth))),
        TreeCmd::Embed {
            small,
            big,
            depth,
            opts,
        } => {
            let (mode, policy) = embed_opts(opts);
            let small = generator(small)?.truncate(*depth);
            let big = generator(big)?.truncate(*depth);
            Ok(embedding_output(
                tree_embeds(&small, &big, mode, policy).map(|w| w.label_pairs(&small, &big)),
            ))
        }
    }
}

fn embedding_output(pairs: Option<Vec<(String, String)>>) -> Output {
    match pairs {
        Some(pairs) => {
            let text = pairs
                .iter()
                .map(|(a, b)| format!("{a} -> {b}"))
                .collect::<Vec<_>>()
                .join("\n");
            Output::new(
                json!({"embeds": true, "witness": pairs}),
                format!("embeds\n{text}"),
            )
        }
        None => Output::new(json!({"embeds": false}), "does not embed"),
    }
}

fn tree_poset(tree: &TreeArg, no_root: bool) -> Result<ForcingPoset, Failure> {
    Ok(poset_from_tree(&materialize(tree)?, !no_root))
}

fn poset_cmd(c: &PosetCmd) -> Outcome {
    match c {
        PosetCmd::FromTree { tree, no_root } => {
            let poset = tree_poset(tree, *no_root)?;
            let dump = poset.dump();
            let text = dump
                .leq
                .iter()
                .map(|[p, q]| format!("{p} <= {q}"))
                .collect::<Vec<_>>()
                .join("\n");
            Ok(Output::new(to_json(&dump), text))
        }
        PosetCmd::Separative { tree, no_root } => {
            let verdict = tree_poset(tree, *no_root)?.is_separative();
            let text = match &verdict.counterexample {
                None => "separative".to_string(),
                Some(c) => format!(
                    "not separative: {} is not below {} yet every extension of {} meets {}",
                    c.p, c.q, c.p, c.q
                ),
            };
            Ok(Output::new(to_json(&verdict), text))
        }
        PosetCmd::Dense {
            tree,
            no_root,
            subset,
        } => {
            let poset = tree_poset(tree, *no_root)?;
            let ids = subset
                .iter()
                .map(|l| poset.index_of(l))
                .collect::<Result<Vec<_>, _>>()
                .map_err(domain)?;
            let dense = poset.is_dense_subset(&ids).map_err(domain)?;
            Ok(Output::new(
                json!({ "dense": dense }),
                if dense { "dense" } else { "not dense" },
            ))
        }
    }
}

fn algebra_cmd(c: &AlgebraCmd) -> Outcome {
    let cap = element_cap_from_env();
    match c {
        AlgebraCmd::Complete { tree, no_root } => {
            let poset = tree_poset(tree, *no_root)?;
            let algebra = ro::completion(&poset, cap).map_err(domain)?;
            let dump = algebra.dump();
            let text = algebra
                .elements()
                .iter()
                .map(|e| format!("{{{}}}", e.labels(&poset).join(", ")))
                .collect::<Vec<_>>()
                .join("\n");
            Ok(Output::new(to_json(&dump), text))
        }
        AlgebraCmd::IsoCheck { depth } => {
            let iso = ro::iso_check(*depth, cap).map_err(domain)?;
            Ok(Output::new(
                json!({ "depth": depth, "isomorphic": iso }),
                if iso { "isomorphic" } else { "not isomorphic" },
            ))
        }
        AlgebraCmd::AtomSplit { tree, depth } => {
            let splits = ro::atom_splitting(&generator(tree)?, *depth).map_err(domain)?;
            Ok(Output::new(
                json!({ "depth": depth, "splits": splits }),
                if splits {
                    "every atom splits"
                } else {
                    "some atom does not split"
                },
            ))
        }
        AlgebraCmd::CantorCode { prefix } => {
            let bits: BitString = prefix.parse().map_err(usage)?;
            let interval = branch_to_interval(&bits);
            let width = interval.width();
            Ok(Output::new(
                json!({
                    "prefix": bits,
                    "interval": interval,
                    "width": [width.numer().to_string(), width.denom().to_string()],
                }),
                format!("{bits} -> {interval}, width {width}"),
            ))
        }
    }
}

fn parse_specs(specs: &[String]) -> Result<Vec<DenseSetSpec>, Failure> {
    specs
        .iter()
        .map(|s| s.parse::<DenseSetSpec>().map_err(cohen_failure))
        .collect()
}

fn cohen_cmd(c: &CohenCmd) -> Outcome {
    match c {
        CohenCmd::Generic {
            specs,
            steps,
            budget,
        } => {
            let specs = parse_specs(specs)?;
            let k = steps.unwrap_or(specs.len());
            let run = cohen::generic_prefix_with_budget(
                &specs,
                k,
                budget.unwrap_or(cohen::DEFAULT_EXTENSION_BUDGET),
            )
            .map_err(cohen_failure)?;
            let text = run
                .trace
                .iter()
                .map(|s| format!("{}: {}", specs[s.spec], s.condition))
                .chain(std::iter::once(format!("prefix {}", run.prefix)))
                .collect::<Vec<_>>()
                .join("\n");
            Ok(Output::new(to_json(&run), text))
        }
        CohenCmd::VerifyDense { spec, depth } => {
            let spec: DenseSetSpec = spec.parse().map_err(cohen_failure)?;
            let dense = cohen::verify_dense(&spec, *depth);
            Ok(Output::new(
                json!({ "spec": spec.to_string(), "depth": depth, "dense": dense }),
                if dense { "dense" } else { "not dense" },
            ))
        }
        CohenCmd::Diagonal { prefix, reals } => {
            let prefix: BitString = prefix.parse().map_err(usage)?;
            let reals = reals
                .iter()
                .map(|r| r.parse::<PeriodicBinarySeq>().map_err(cohen_failure))
                .collect::<Result<Vec<_>, _>>()?;
            let escapes = cohen::diagonal_check(&prefix, &reals);
            Ok(Output::new(
                json!({ "prefix": prefix, "escapes": escapes }),
                if escapes {
                    "differs from every listed real"
                } else {
                    "agrees with some listed real"
                },
            ))
        }
    }
}

fn perm(text: &str) -> Result<AlmostPermutation, Failure> {
    text.parse().map_err(pfin_failure)
}

fn set(text: &str) -> Result<ModFinSet, Failure> {
    text.parse().map_err(pfin_failure)
}

fn perm_cmd(c: &PermCmd) -> Outcome {
    match c {
        PermCmd::Apply { perm: p, set: a } => {
            Ok(Output::of(&pfin::induced_auto(&perm(p)?, &set(a)?)))
        }
        PermCmd::Compose { f, g } => Ok(Output::of(&pfin::compose(&perm(f)?, &perm(g)?))),
        PermCmd::Invert { perm: p } => Ok(Output::of(&pfin::invert(&perm(p)?))),
        PermCmd::Classify { perm: p } => {
            let verdict = pfin::classify_cyclic(&perm(p)?);
            let text = match verdict.witness {
                Some((i, j)) => format!("cyclic: {i} < {j} are reversed"),
                None => "non-cyclic".to_string(),
            };
            Ok(Output::new(to_json(&verdict), text))
        }
        PermCmd::Eqmodfin { a, b } => {
            let eq = pfin::eq_mod_fin(&set(a)?, &set(b)?);
            Ok(Output::new(
                json!({ "eq_mod_fin": eq }),
                if eq {
                    "equal mod Fin"
                } else {
                    "not equal mod Fin"
                },
            ))
        }
    }
}

fn nat(text: &str) -> Result<NonstandardNat, Failure> {
    text.parse().map_err(nonstd_failure)
}

/// A nonstandard natural with its first values spelled out.
fn nat_output(a: &NonstandardNat) -> Output {
    let values: Vec<String> = a.first_values(10).iter().map(|v| v.to_string()).collect();
    let mut json = to_json(a);
    json["first_values"] = json!(values);
    Output::new(json, format!("{a}\n[{}, ...]", values.join(", ")))
}

fn nonstd_cmd(c: &NonstdCmd) -> Outcome {
    match c {
        NonstdCmd::Add { a, b } => Ok(nat_output(&nonstd::ns_add(&nat(a)?, &nat(b)?))),
        NonstdCmd::Mul { a, b } => Ok(nat_output(&nonstd::ns_mul(&nat(a)?, &nat(b)?))),
        NonstdCmd::Cmp { a, b } => {
            let order = match nonstd::ns_cmp(&nat(a)?, &nat(b)?) {
                std::cmp::Ordering::Less => "less",
                std::cmp::Ordering::Equal => "equal",
                std::cmp::Ordering::Greater => "greater",
            };
            Ok(Output::new(json!({ "order": order }), order))
        }
        NonstdCmd::Sum { term } => {
            let term: Poly = term.parse().map_err(nonstd_failure)?;
            Ok(nat_output(
                &nonstd::partial_sums(&term).map_err(nonstd_failure)?,
            ))
        }
        NonstdCmd::Classify { a } => {
            let a = nat(a)?;
            let standard = a.is_standard().map(|k| k.to_string());
            let text = match &standard {
                Some(k) => format!("standard {k}"),
                None => "infinite".to_string(),
            };
            Ok(Output::new(
                json!({ "standard": standard, "infinite": a.is_infinite() }),
                text,
            ))
        }
    }
}

fn casson_cmd(c: &CassonCmd) -> Outcome {
    match c {
        CassonCmd::Classify { tree, probe_depth } => {
            let g = generator(tree)?;
            let kind = casson::classify_handle(&g, *probe_depth);
            let exoticness = casson::known_exoticness(&g);
            Ok(Output::new(
                json!({ "kind": kind, "exoticness": exoticness }),
                kind.to_string(),
            ))
        }
        CassonCmd::Sfinite { tree, horizon } => {
            let g = generator(tree)?;
            let levels = casson::level_set(&g, *horizon);
            let sfinite = pfin::frechet_contains(&levels);
            Ok(Output::new(
                json!({ "sfinite": sfinite, "levels": levels }),
                format!(
                    "{} (levels {levels})",
                    if sfinite { "s-finite" } else { "not s-finite" }
                ),
            ))
        }
        CassonCmd::Embeds { a, b, depth, opts } => {
            let (mode, policy) = embed_opts(opts);
            let (a, b) = (
                CassonHandle::new(generator(a)?),
                CassonHandle::new(generator(b)?),
            );
            let witness = casson::ch_embeds(&a, &b, *depth, mode, policy);
            let (small, big) = (b.tree.truncate(*depth), a.tree.truncate(*depth));
            Ok(embedding_output(
                witness.map(|w| w.label_pairs(&small, &big)),
            ))
        }
        CassonCmd::ToCohen { tree, depth } => {
            let report = casson::casson_to_cohen(&generator(tree)?, *depth, element_cap_from_env())
                .map_err(casson_failure)?;
            let s = &report.algebra_stats;
            let text = format!(
                "tree {}\nlinear branch {}\ncohen poset: {} conditions\ncompletion: {} elements\nseparative: {}\natoms split: {}",
                report.tree,
                report.linear_branch,
                report.cohen_poset.conditions.len(),
                s.elements,
                s.separative,
                s.atom_splitting
            );
            Ok(Output::new(to_json(&report), text))
        }
        CassonCmd::Permutation {
            tree,
            horizon,
            rule,
        } => {
            let rule = match rule {
                RuleArg::Literal => PermutationRule::Literal,
                RuleArg::Cumulative => PermutationRule::Cumulative,
            };
            let p = casson::ch_permutation(&generator(tree)?, *horizon, rule)
                .map_err(casson_failure)?;
            let verdict = p.classify_cyclic();
            Ok(Output::new(
                json!({ "permutation": p, "text": p.to_string(), "cyclic": verdict.cyclic }),
                format!(
                    "{p}\n{}",
                    if verdict.cyclic {
                        "cyclic"
                    } else {
                        "non-cyclic"
                    }
                ),
            ))
        }
    }
}

fn casson_failure(e: CassonError) -> Failure {
    domain(e)
}
