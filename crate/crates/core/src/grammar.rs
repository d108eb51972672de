//! Context-free grammars in a small BNF dialect.
//!
//! ```text
//! # comment
//! <expr> ::= <expr> <op> <expr>
//!          | (<expr> / <const>)
//! <op>   ::= + | - | *
//! ```
//!
//! A rule starts on a line containing `::=`; alternatives are separated by `|`,
//! and a line starting with `|` continues the previous rule. `<name>` is a
//! nonterminal reference and is self-delimiting, so `(<expr>` is the terminal
//! `(` followed by `<expr>`. Anything else is an opaque terminal token.

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

/// The expression grammar shipped in `grammars/frobenius.bnf`.
pub const FROBENIUS_BNF: &str = include_str!("../../../grammars/frobenius.bnf");

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GrammarError {
    #[error("syntax error on line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("nonterminal <{0}> is referenced but never defined")]
    UndefinedNonterminal(String),
    #[error("nonterminal <{0}> is defined more than once")]
    DuplicateDefinition(String),
    #[error("unknown nonterminal <{0}>")]
    UnknownNonterminal(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Symbol {
    Terminal(String),
    Nonterminal(String),
}

impl Symbol {
    pub fn is_terminal(&self) -> bool {
        matches!(self, Symbol::Terminal(_))
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Symbol::Terminal(t) => f.write_str(t),
            Symbol::Nonterminal(n) => write!(f, "<{n}>"),
        }
    }
}

/// One alternative on the right-hand side of a rule. Never empty.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Production {
    pub symbols: Vec<Symbol>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NonterminalDef {
    pub name: String,
    /// Source order; rule numbers used by the mapper are positions in this list.
    pub alternatives: Vec<Production>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Grammar {
    nonterminals: Vec<NonterminalDef>,
    index: HashMap<String, usize>,
}

impl Grammar {
    /// Builds a grammar from already-split definitions, checking the
    /// definedness invariants. The first definition is the start symbol.
    pub fn new(nonterminals: Vec<NonterminalDef>) -> Result<Self, GrammarError> {
        let mut index = HashMap::with_capacity(nonterminals.len());
        for (i, nt) in nonterminals.iter().enumerate() {
            if index.insert(nt.name.clone(), i).is_some() {
                return Err(GrammarError::DuplicateDefinition(nt.name.clone()));
            }
        }
        for nt in &nonterminals {
            if nt.alternatives.is_empty() {
                return Err(GrammarError::Syntax {
                    line: 0,
                    message: format!("<{}> has no alternatives", nt.name),
                });
            }
            for prod in &nt.alternatives {
                if prod.symbols.is_empty() {
                    return Err(GrammarError::Syntax {
                        line: 0,
                        message: format!("<{}> has an empty alternative", nt.name),
                    });
                }
                for sym in &prod.symbols {
                    if let Symbol::Nonterminal(name) = sym {
                        if !index.contains_key(name) {
                            return Err(GrammarError::UndefinedNonterminal(name.clone()));
                        }
                    }
                }
            }
        }
        if nonterminals.is_empty() {
            return Err(GrammarError::Syntax {
                line: 0,
                message: "grammar defines no rules".into(),
            });
        }
        Ok(Grammar {
            nonterminals,
            index,
        })
    }

    pub fn nonterminals(&self) -> &[NonterminalDef] {
        &self.nonterminals
    }

    pub fn start(&self) -> &NonterminalDef {
        &self.nonterminals[0]
    }

    pub fn get(&self, name: &str) -> Option<&NonterminalDef> {
        self.index.get(name).map(|&i| &self.nonterminals[i])
    }

    pub fn alternative_count(&self, name: &str) -> Result<usize, GrammarError> {
        self.get(name)
            .map(|nt| nt.alternatives.len())
            .ok_or_else(|| GrammarError::UnknownNonterminal(name.to_string()))
    }

    /// Every terminal token that appears anywhere in the grammar.
    pub fn terminals(&self) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        for nt in &self.nonterminals {
            for prod in &nt.alternatives {
                for sym in &prod.symbols {
                    if let Symbol::Terminal(t) = sym {
                        if !out.contains(&t.as_str()) {
                            out.push(t);
                        }
                    }
                }
            }
        }
        out
    }
}

impl fmt::Display for Grammar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for nt in &self.nonterminals {
            let lhs = format!("<{}> ::= ", nt.name);
            let pad = " ".repeat(lhs.len() - 2);
            for (i, prod) in nt.alternatives.iter().enumerate() {
                if i == 0 {
                    f.write_str(&lhs)?;
                } else {
                    write!(f, "{pad}| ")?;
                }
                let body: Vec<String> = prod.symbols.iter().map(|s| s.to_string()).collect();
                writeln!(f, "{}", body.join(" "))?;
            }
        }
        Ok(())
    }
}

enum Item {
    Bar,
    Sym(Symbol),
}

fn lex_body(body: &str, line: usize) -> Result<Vec<Item>, GrammarError> {
    let mut items = Vec::new();
    let chars: Vec<char> = body.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c == '|' {
            items.push(Item::Bar);
            i += 1;
        } else if c == '<' {
            let start = i + 1;
            let mut j = start;
            while j < chars.len() && chars[j] != '>' {
                if chars[j].is_whitespace() || chars[j] == '<' || chars[j] == '|' {
                    break;
                }
                j += 1;
            }
            if j >= chars.len() || chars[j] != '>' {
                return Err(GrammarError::Syntax {
                    line,
                    message: "unclosed angle bracket".into(),
                });
            }
            if j == start {
                return Err(GrammarError::Syntax {
                    line,
                    message: "empty nonterminal name `<>`".into(),
                });
            }
            items.push(Item::Sym(Symbol::Nonterminal(
                chars[start..j].iter().collect(),
            )));
            i = j + 1;
        } else {
            let start = i;
            while i < chars.len()
                && !chars[i].is_whitespace()
                && chars[i] != '|'
                && chars[i] != '<'
            {
                i += 1;
            }
            items.push(Item::Sym(Symbol::Terminal(chars[start..i].iter().collect())));
        }
    }
    Ok(items)
}

fn parse_lhs(lhs: &str, line: usize) -> Result<String, GrammarError> {
    let lhs = lhs.trim();
    let name = lhs
        .strip_prefix('<')
        .and_then(|s| s.strip_suffix('>'))
        .filter(|s| !s.is_empty() && !s.contains(|c: char| c.is_whitespace() || "<>|".contains(c)))
        .ok_or_else(|| GrammarError::Syntax {
            line,
            message: format!("left-hand side `{lhs}` is not a single <nonterminal>"),
        })?;
    Ok(name.to_string())
}

/// (name, defining line, body pieces with their line numbers)
type RawRule = (String, usize, Vec<(usize, String)>);

/// Parses grammar source text. Nonterminals and their alternatives keep
/// source order.
pub fn parse_bnf(source: &str) -> Result<Grammar, GrammarError> {
    let mut rules: Vec<RawRule> = Vec::new();

    for (idx, raw) in source.lines().enumerate() {
        let line = idx + 1;
        let text = raw.trim();
        if text.is_empty() || text.starts_with('#') {
            continue;
        }
        if let Some((lhs, body)) = text.split_once("::=") {
            let name = parse_lhs(lhs, line)?;
            rules.push((name, line, vec![(line, body.to_string())]));
        } else if text.starts_with('|') {
            match rules.last_mut() {
                Some(rule) => rule.2.push((line, text.to_string())),
                None => {
                    return Err(GrammarError::Syntax {
                        line,
                        message: "continuation `|` before any rule".into(),
                    })
                }
            }
        } else {
            return Err(GrammarError::Syntax {
                line,
                message: format!("expected `<name> ::= ...` or `| ...`, found `{text}`"),
            });
        }
    }

    let mut defs = Vec::with_capacity(rules.len());
    let mut seen: HashMap<String, usize> = HashMap::new();
    for (name, line, pieces) in rules {
        if seen.insert(name.clone(), line).is_some() {
            return Err(GrammarError::DuplicateDefinition(name));
        }
        let mut alternatives = Vec::new();
        let mut current: Vec<Symbol> = Vec::new();
        let mut last_line = line;
        for (piece_line, body) in pieces {
            last_line = piece_line;
            for item in lex_body(&body, piece_line)? {
                match item {
                    Item::Bar => {
                        if current.is_empty() {
                            return Err(GrammarError::Syntax {
                                line: piece_line,
                                message: format!("empty alternative in <{name}>"),
                            });
                        }
                        alternatives.push(Production {
                            symbols: std::mem::take(&mut current),
                        });
                    }
                    Item::Sym(sym) => current.push(sym),
                }
            }
        }
        if current.is_empty() {
            return Err(GrammarError::Syntax {
                line: last_line,
                message: format!("empty alternative in <{name}>"),
            });
        }
        alternatives.push(Production { symbols: current });
        defs.push(NonterminalDef { name, alternatives });
    }

    Grammar::new(defs)
}
