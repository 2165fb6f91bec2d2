//! Text syntax for trees and generators.
//!
//! ```text
//! generator := "linear" "(" sign ")"
//!            | "binary" [ "(" (sign | "alt") ")" ]
//!            | "binary_branch" "(" sign ")"
//!            | node
//! node      := "(" sign node* ")"
//! sign      := "+" | "-" | "."
//! ```
//!
//! An explicit tree is written with its root as `(. ...)`. A top-level node
//! with a `+` or `-` sign is read as the single child of an implicit root.

use std::fmt;

use thiserror::Error;

use super::{Sign, SignRule, SignedTree, TreeGenerator, TreeNode};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("syntax error at {line}:{column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("unknown generator {name:?} at {line}:{column}")]
    UnknownGenerator {
        name: String,
        line: usize,
        column: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Token {
    Open,
    Close,
    Sign(Sign),
    Ident(String),
    End,
}

#[derive(Debug, Clone)]
struct Spanned {
    token: Token,
    line: usize,
    column: usize,
}

fn lex(text: &str) -> Result<Vec<Spanned>, ParseError> {
    let mut out = Vec::new();
    let (mut line, mut column) = (1, 1);
    let mut chars = text.chars().peekable();
    while let Some(&c) = chars.peek() {
        let (l, col) = (line, column);
        let token = match c {
            '\n' => {
                chars.next();
                line += 1;
                column = 1;
                continue;
            }
            c if c.is_whitespace() => {
                chars.next();
                column += 1;
                continue;
            }
            '(' => Token::Open,
            ')' => Token::Close,
            '+' | '-' | '.' => Token::Sign(Sign::from_symbol(c).expect("sign symbol")),
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut ident = String::new();
                while let Some(&c) = chars.peek() {
                    if c.is_ascii_alphanumeric() || c == '_' {
                        ident.push(c);
                        chars.next();
                        column += 1;
                    } else {
                        break;
                    }
                }
                out.push(Spanned {
                    token: Token::Ident(ident),
                    line: l,
                    column: col,
                });
                continue;
            }
            other => {
                return Err(ParseError::Syntax {
                    line,
                    column,
                    message: format!("unexpected character {other:?}"),
                })
            }
        };
        chars.next();
        column += 1;
        out.push(Spanned {
            token,
            line: l,
            column: col,
        });
    }
    out.push(Spanned {
        token: Token::End,
        line,
        column,
    });
    Ok(out)
}

struct Parser {
    tokens: Vec<Spanned>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Spanned {
        &self.tokens[self.pos]
    }

    fn next(&mut self) -> Spanned {
        let t = self.tokens[self.pos].clone();
        if t.token != Token::End {
            self.pos += 1;
        }
        t
    }

    fn error<T>(&self, at: &Spanned, message: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError::Syntax {
            line: at.line,
            column: at.column,
            message: message.into(),
        })
    }

    fn expect(&mut self, want: Token, what: &str) -> Result<(), ParseError> {
        let t = self.next();
        if t.token == want {
            Ok(())
        } else {
            self.error(&t, format!("expected {what}"))
        }
    }

    fn sign(&mut self) -> Result<Sign, ParseError> {
        let t = self.next();
        match t.token {
            Token::Sign(s) => Ok(s),
            _ => self.error(&t, "expected sign '+', '-' or '.'"),
        }
    }

    fn node(&mut self) -> Result<TreeNode, ParseError> {
        self.expect(Token::Open, "'('")?;
        let sign = self.sign()?;
        let mut children = Vec::new();
        loop {
            let t = self.peek().clone();
            match t.token {
                Token::Close => {
                    self.next();
                    return Ok(TreeNode { sign, children });
                }
                Token::Open => children.push(self.node()?),
                Token::End => return self.error(&t, "unclosed '('"),
                _ => return self.error(&t, "expected '(' or ')'"),
            }
        }
    }

    fn generator(&mut self) -> Result<TreeGenerator, ParseError> {
        let t = self.peek().clone();
        let generator = match &t.token {
            Token::Open => {
                let node = self.node()?;
                let root = if node.sign == Sign::Unsigned {
                    node
                } else {
                    TreeNode::new(Sign::Unsigned, vec![node])
                };
                TreeGenerator::Explicit(SignedTree::from_nested(&root).expect("unsigned root"))
            }
            Token::Ident(name) => {
                self.next();
                match name.as_str() {
                    "linear" => {
                        self.expect(Token::Open, "'('")?;
                        let s = self.sign()?;
                        self.expect(Token::Close, "')'")?;
                        TreeGenerator::Linear(s)
                    }
                    "binary_branch" => {
                        self.expect(Token::Open, "'('")?;
                        let s = self.sign()?;
                        self.expect(Token::Close, "')'")?;
                        TreeGenerator::BinaryWithBranch(s)
                    }
                    "binary" => {
                        if self.peek().token == Token::Open {
                            self.next();
                            let arg = self.next();
                            let rule = match arg.token {
                                Token::Sign(s) => SignRule::Uniform(s),
                                Token::Ident(ref a) if a == "alt" => SignRule::Alternating,
                                _ => return self.error(&arg, "expected sign or 'alt'"),
                            };
                            self.expect(Token::Close, "')'")?;
                            TreeGenerator::FullBinary(rule)
                        } else {
                            TreeGenerator::FullBinary(SignRule::Uniform(Sign::Unsigned))
                        }
                    }
                    _ => {
                        return Err(ParseError::UnknownGenerator {
                            name: name.clone(),
                            line: t.line,
                            column: t.column,
                        })
                    }
                }
            }
            Token::End => return self.error(&t, "empty input"),
            _ => return self.error(&t, "expected generator or '('"),
        };
        let rest = self.peek().clone();
        if rest.token != Token::End {
            return self.error(&rest, "trailing input");
        }
        Ok(generator)
    }
}

/// Parses tree-DSL source into a generator.
pub fn parse_tree(text: &str) -> Result<TreeGenerator, ParseError> {
    Parser {
        tokens: lex(text)?,
        pos: 0,
    }
    .generator()
}

/// Canonical DSL text of a generator. Custom rules print as
/// `custom(<name>)`, which does not parse back.
pub fn print_tree(generator: &TreeGenerator) -> String {
    match generator {
        TreeGenerator::Linear(s) => format!("linear({s})"),
        TreeGenerator::FullBinary(SignRule::Uniform(Sign::Unsigned)) => "binary".to_string(),
        TreeGenerator::FullBinary(SignRule::Uniform(s)) => format!("binary({s})"),
        TreeGenerator::FullBinary(SignRule::Alternating) => "binary(alt)".to_string(),
        TreeGenerator::BinaryWithBranch(s) => format!("binary_branch({s})"),
        TreeGenerator::Explicit(t) => t.to_string(),
        TreeGenerator::Custom(rule) => format!("custom({})", rule.name()),
    }
}

pub(super) fn write_sexpr(f: &mut fmt::Formatter<'_>, tree: &SignedTree, id: usize) -> fmt::Result {
    write!(f, "({}", tree.sign(id))?;
    for &c in tree.children(id) {
        f.write_str(" ")?;
        write_sexpr(f, tree, c)?;
    }
    f.write_str(")")
}

impl fmt::Display for TreeGenerator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print_tree(self))
    }
}
