//! Genotype to phenotype mapping.
//!
//! Leftmost derivation from the start symbol: every nonterminal expansion reads
//! the next codon `v` and takes alternative `v % alternative_count`. Nonterminals
//! with a single alternative still read a codon. When the chromosome runs out the
//! reader wraps back to codon 0, at most `max_wraps` times.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::grammar::{Grammar, Symbol};

/// A fixed-length codon string. Each codon is one byte.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Chromosome(pub Vec<u8>);

impl Chromosome {
    pub fn new(codons: Vec<u8>) -> Self {
        Chromosome(codons)
    }

    pub fn codons(&self) -> &[u8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Parses `120, 44, 42` style text. Rejects values outside `0..=255`.
    pub fn parse_csv(text: &str) -> Result<Self, String> {
        let codons = text
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| {
                s.parse::<u8>()
                    .map_err(|_| format!("codon `{s}` is not an integer in 0..=255"))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Chromosome(codons))
    }
}

impl fmt::Display for Chromosome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(u8::to_string).collect();
        f.write_str(&parts.join(","))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MappingLimits {
    pub max_wraps: usize,
    pub max_expansions: usize,
}

impl Default for MappingLimits {
    fn default() -> Self {
        MappingLimits {
            max_wraps: 2,
            max_expansions: 500,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum InvalidReason {
    EmptyChromosome,
    MaxWrapsExceeded,
    MaxExpansionsExceeded,
}

impl fmt::Display for InvalidReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            InvalidReason::EmptyChromosome => "empty chromosome",
            InvalidReason::MaxWrapsExceeded => "codons exhausted after maximum wraps",
            InvalidReason::MaxExpansionsExceeded => "maximum expansions exceeded",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PhenotypeStatus {
    Valid(Vec<String>),
    Invalid(InvalidReason),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Phenotype {
    pub status: PhenotypeStatus,
    pub codons_consumed: usize,
    pub wraps_used: usize,
}

impl Phenotype {
    pub fn tokens(&self) -> Option<&[String]> {
        match &self.status {
            PhenotypeStatus::Valid(tokens) => Some(tokens),
            PhenotypeStatus::Invalid(_) => None,
        }
    }

    pub fn is_valid(&self) -> bool {
        matches!(self.status, PhenotypeStatus::Valid(_))
    }

    /// The terminal tokens joined by single spaces, e.g. `x + x`.
    pub fn expression(&self) -> Option<String> {
        self.tokens().map(|t| t.join(" "))
    }
}

/// One expansion step of a derivation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TraceStep {
    /// Position of the codon in the chromosome (after wrapping).
    pub codon_index: usize,
    pub codon: u8,
    pub nonterminal: String,
    pub alternative_count: usize,
    pub alternative: usize,
    /// Sentential form after this step, symbols separated by spaces.
    pub sentential_form: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Trace {
    pub steps: Vec<TraceStep>,
    pub phenotype: Phenotype,
}

impl fmt::Display for Trace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let nt_width = self
            .steps
            .iter()
            .map(|s| s.nonterminal.len() + 2)
            .max()
            .unwrap_or(0)
            .max("nonterminal".len());
        let rules: Vec<String> = self
            .steps
            .iter()
            .map(|s| format!("{} mod {} = {}", s.codon, s.alternative_count, s.alternative))
            .collect();
        let rule_width = rules.iter().map(String::len).max().unwrap_or(0).max(4);
        writeln!(
            f,
            "{:>4}  {:>5}  {:<nt_width$}  {:<rule_width$}  sentential form",
            "step", "codon", "nonterminal", "rule"
        )?;
        for (i, (s, rule)) in self.steps.iter().zip(&rules).enumerate() {
            let nt = format!("<{}>", s.nonterminal);
            writeln!(
                f,
                "{:>4}  {:>5}  {:<nt_width$}  {:<rule_width$}  {}",
                i, s.codon, nt, rule, s.sentential_form
            )?;
        }
        match &self.phenotype.status {
            PhenotypeStatus::Valid(tokens) => write!(f, "result: {}", tokens.join(" "))?,
            PhenotypeStatus::Invalid(reason) => write!(f, "result: invalid ({reason})")?,
        }
        writeln!(
            f,
            " [codons consumed: {}, wraps: {}]",
            self.phenotype.codons_consumed, self.phenotype.wraps_used
        )
    }
}

fn sentential_form(done: &[String], stack: &[&Symbol]) -> String {
    let mut parts: Vec<String> = done.to_vec();
    parts.extend(stack.iter().rev().map(|s| s.to_string()));
    parts.join(" ")
}

fn derive(
    chromosome: &Chromosome,
    grammar: &Grammar,
    limits: MappingLimits,
    mut steps: Option<&mut Vec<TraceStep>>,
) -> Phenotype {
    let codons = chromosome.codons();
    let start = Symbol::Nonterminal(grammar.start().name.clone());
    // Pending symbols, leftmost on top.
    let mut stack: Vec<&Symbol> = vec![&start];
    let mut out: Vec<String> = Vec::new();
    let mut pos = 0usize;
    let mut consumed = 0usize;
    let mut wraps = 0usize;
    let mut expansions = 0usize;

    let invalid = |reason, consumed, wraps| Phenotype {
        status: PhenotypeStatus::Invalid(reason),
        codons_consumed: consumed,
        wraps_used: wraps,
    };

    while let Some(sym) = stack.pop() {
        let name = match sym {
            Symbol::Terminal(t) => {
                out.push(t.clone());
                continue;
            }
            Symbol::Nonterminal(name) => name,
        };
        if expansions >= limits.max_expansions {
            return invalid(InvalidReason::MaxExpansionsExceeded, consumed, wraps);
        }
        if codons.is_empty() {
            return invalid(InvalidReason::EmptyChromosome, consumed, wraps);
        }
        if pos == codons.len() {
            if wraps >= limits.max_wraps {
                return invalid(InvalidReason::MaxWrapsExceeded, consumed, wraps);
            }
            wraps += 1;
            pos = 0;
        }
        let codon = codons[pos];
        let def = grammar
            .get(name)
            .expect("grammar invariant: every referenced nonterminal is defined");
        let count = def.alternatives.len();
        let choice = codon as usize % count;
        stack.extend(def.alternatives[choice].symbols.iter().rev());
        expansions += 1;
        consumed += 1;

        if let Some(steps) = steps.as_deref_mut() {
            steps.push(TraceStep {
                codon_index: pos,
                codon,
                nonterminal: name.clone(),
                alternative_count: count,
                alternative: choice,
                sentential_form: sentential_form(&out, &stack),
            });
        }
        pos += 1;
    }

    Phenotype {
        status: PhenotypeStatus::Valid(out),
        codons_consumed: consumed,
        wraps_used: wraps,
    }
}

/// Maps a chromosome to its phenotype. Total: failures come back as
/// [`PhenotypeStatus::Invalid`].
pub fn map_genotype(chromosome: &Chromosome, grammar: &Grammar, limits: MappingLimits) -> Phenotype {
    derive(chromosome, grammar, limits, None)
}

/// Same derivation as [`map_genotype`], recording every expansion.
pub fn trace_mapping(chromosome: &Chromosome, grammar: &Grammar, limits: MappingLimits) -> Trace {
    let mut steps = Vec::new();
    let phenotype = derive(chromosome, grammar, limits, Some(&mut steps));
    Trace { steps, phenotype }
}
