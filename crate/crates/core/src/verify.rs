//! Checking closed-form conjectures against the oracle over a parameter range.

use std::fmt;

use num_bigint::BigInt;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::dataset::{DatasetError, TupleFamily};
use crate::expr::{parse_expr_named, EvalMode, Expr, ExprError};
use crate::oracle::{dp_bound, frobenius, frobenius_bruteforce, GenTuple, OracleError};

/// Default upper end of a verification sweep.
pub const DEFAULT_K_HI: i64 = 200;

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error("empty range {lo}..={hi}")]
    EmptyRange { lo: i64, hi: i64 },
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Family(#[from] DatasetError),
    #[error("formula: {0}")]
    Formula(#[from] ExprError),
    #[error("unknown conjecture `{0}`")]
    Unknown(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum OracleKind {
    #[default]
    Apery,
    BruteForce,
}

impl OracleKind {
    fn compute(self, t: &GenTuple) -> Result<i64, OracleError> {
        match self {
            OracleKind::Apery => frobenius(t),
            OracleKind::BruteForce => frobenius_bruteforce(t, dp_bound(t)?),
        }
    }
}

/// A claimed closed form for the Frobenius number of a tuple family,
/// evaluated with floor division.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Conjecture {
    pub name: String,
    pub family: TupleFamily,
    pub formula: Expr,
    /// Smallest parameter the claim covers.
    pub k_min: i64,
}

impl Conjecture {
    /// Builds a conjecture from text such as `"3*k+1,3*k+4,6*k+3,6*k+9"` and
    /// `"(3*k+1)*(k - floor((3*k+1)/21)) - 1"`.
    pub fn parse(name: &str, family: &str, formula: &str, k_min: i64) -> Result<Self, VerifyError> {
        let family = TupleFamily::parse(family, k_min, 0)?;
        let parsed = parse_expr_named(formula)?;
        if let Some(v) = &parsed.var {
            if *v != family.var {
                return Err(VerifyError::Formula(ExprError::Parse {
                    position: 0,
                    message: format!("formula uses `{v}` but the family uses `{}`", family.var),
                }));
            }
        }
        Ok(Conjecture {
            name: name.to_string(),
            family,
            formula: parsed.expr,
            k_min,
        })
    }

    pub fn formula_text(&self) -> String {
        self.formula.render(&self.family.var)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Counterexample {
    pub k: i64,
    pub tuple: GenTuple,
    pub oracle: i64,
    /// Exact formula value; a fraction when the formula is not integral here.
    pub formula: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "kebab-case")]
pub enum Verdict {
    Verified { from: i64, to: i64 },
    Refuted { first: Counterexample },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VerifyReport {
    pub conjecture: String,
    pub family: String,
    pub formula: String,
    pub k_lo: i64,
    pub k_hi: i64,
    pub oracle: OracleKind,
    pub matches: usize,
    /// Parameters whose tuple is not coprime.
    pub skipped: Vec<i64>,
    pub counterexamples: Vec<Counterexample>,
    pub verdict: Verdict,
}

impl VerifyReport {
    pub fn range_size(&self) -> usize {
        (self.k_hi - self.k_lo + 1) as usize
    }

    pub fn is_verified(&self) -> bool {
        matches!(self.verdict, Verdict::Verified { .. })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Counterexample rows shown by the text report.
const TEXT_ROWS: usize = 20;

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "conjecture: {}", self.conjecture)?;
        writeln!(f, "family:     {}", self.family)?;
        writeln!(f, "formula:    {}", self.formula)?;
        writeln!(
            f,
            "range:      {}..={}  matches {}  skipped {}  counterexamples {}",
            self.k_lo,
            self.k_hi,
            self.matches,
            self.skipped.len(),
            self.counterexamples.len()
        )?;
        if !self.counterexamples.is_empty() {
            writeln!(f, "{:>8}  {:>12}  {:>12}  tuple", "k", "oracle", "formula")?;
            for c in self.counterexamples.iter().take(TEXT_ROWS) {
                writeln!(f, "{:>8}  {:>12}  {:>12}  {}", c.k, c.oracle, c.formula, c.tuple)?;
            }
            if self.counterexamples.len() > TEXT_ROWS {
                writeln!(f, "     ... {} more", self.counterexamples.len() - TEXT_ROWS)?;
            }
        }
        match &self.verdict {
            Verdict::Verified { from, to } => writeln!(f, "verdict:    verified for {from}..={to}"),
            Verdict::Refuted { first } => writeln!(f, "verdict:    refuted at k = {}", first.k),
        }
    }
}

enum Outcome {
    Match,
    Skip,
    Counter(Counterexample),
}

fn check_one(c: &Conjecture, k: i64, oracle: OracleKind) -> Result<Outcome, VerifyError> {
    let tuple = c.family.tuple_at(k)?;
    if !tuple.is_coprime() {
        return Ok(Outcome::Skip);
    }
    let expected = oracle.compute(&tuple)?;
    let value = c.formula.evaluate(k, EvalMode::FloorDiv)?;
    if value.is_integer() && value.to_integer() == BigInt::from(expected) {
        Ok(Outcome::Match)
    } else {
        Ok(Outcome::Counter(Counterexample {
            k,
            tuple,
            oracle: expected,
            formula: value.to_string(),
        }))
    }
}

pub fn verify(c: &Conjecture, k_lo: i64, k_hi: i64) -> Result<VerifyReport, VerifyError> {
    verify_with(c, k_lo, k_hi, OracleKind::Apery)
}

/// Compares the formula with the chosen oracle for every `k` in `k_lo..=k_hi`.
pub fn verify_with(
    c: &Conjecture,
    k_lo: i64,
    k_hi: i64,
    oracle: OracleKind,
) -> Result<VerifyReport, VerifyError> {
    if k_lo > k_hi {
        return Err(VerifyError::EmptyRange { lo: k_lo, hi: k_hi });
    }
    let outcomes = (k_lo..=k_hi)
        .into_par_iter()
        .map(|k| check_one(c, k, oracle).map(|o| (k, o)))
        .collect::<Result<Vec<_>, _>>()?;

    let mut matches = 0;
    let mut skipped = Vec::new();
    let mut counterexamples = Vec::new();
    for (k, o) in outcomes {
        match o {
            Outcome::Match => matches += 1,
            Outcome::Skip => skipped.push(k),
            Outcome::Counter(ce) => counterexamples.push(ce),
        }
    }
    let verdict = match counterexamples.first() {
        None => Verdict::Verified {
            from: k_lo,
            to: k_hi,
        },
        Some(first) => Verdict::Refuted {
            first: first.clone(),
        },
    };
    Ok(VerifyReport {
        conjecture: c.name.clone(),
        family: c.family.to_string(),
        formula: c.formula_text(),
        k_lo,
        k_hi,
        oracle,
        matches,
        skipped,
        counterexamples,
        verdict,
    })
}

/// The shipped fixtures: quadruple formula on x = 3k+1, the two
/// linear-recurrence quadruples, the sextuple, and two classical identities.
pub fn builtin_conjectures() -> Vec<Conjecture> {
    let spec: [(&str, &str, &str, i64); 7] = [
        (
            "quad-3k+1",
            "3*k+1, 3*k+4, 6*k+3, 6*k+9",
            "(3*k+1)*(k - floor((3*k+1)/21)) - 1",
            5,
        ),
        (
            "recurrence-4k+1",
            "4*k+1, 3*(4*k+1)+2, 3*(3*(4*k+1)+2)+2, 3*(3*(3*(4*k+1)+2)+2)+2",
            "48*k*k + 16*k - 1 - 3*(4*k+1)*(k + floor(2*k/13) + floor((2*k+6)/13) - floor((2*k+19)/26))",
            0,
        ),
        (
            "recurrence-4k+3",
            "4*k+3, 3*(4*k+3)+2, 3*(3*(4*k+3)+2)+2, 3*(3*(3*(4*k+3)+2)+2)+2",
            "48*k*k + 64*k + 19 - 3*(4*k+3)*(k + floor((2*k+1)/13) + floor((2*k+7)/13) - floor((k+3)/13))",
            0,
        ),
        (
            "sextuple",
            "6*k+1, 6*k+4, 6*k+7, 12*k+3, 12*k+9, 12*k+15",
            "(6*k+1)*(k - floor(k/13)) - 1",
            5,
        ),
        ("pair", "k, k+1", "k*(k+1) - k - (k+1)", 1),
        ("pair-odd", "2*k+1, 2*k+3", "(2*k+1)*(2*k+3) - (2*k+1) - (2*k+3)", 0),
        (
            "consecutive-gap4",
            "a, a+1, a+2, a+4",
            "(a+1)*floor(a/4) + floor((a+1)/4) + 2*floor((a+2)/4) - 1",
            1,
        ),
    ];
    spec.iter()
        .map(|(name, family, formula, k_min)| {
            Conjecture::parse(name, family, formula, *k_min).expect("builtin conjecture parses")
        })
        .collect()
}

pub fn builtin(name: &str) -> Result<Conjecture, VerifyError> {
    builtin_conjectures()
        .into_iter()
        .find(|c| c.name == name)
        .ok_or_else(|| VerifyError::Unknown(name.to_string()))
}
