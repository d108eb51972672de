//! Parametric tuple families and the regression datasets built from them.

use std::fmt;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::expr::{parse_expr_named, EvalMode, Expr, ExprError};
use crate::oracle::{frobenius, GenTuple, OracleError};

/// Parameters scanned before a filtered family is declared empty.
pub const SCAN_CAP: i64 = 1_000_000;

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error("family generator {index}: {source}")]
    Expr {
        index: usize,
        #[source]
        source: ExprError,
    },
    #[error("family is invalid at parameter {param}: {message}")]
    Family { param: i64, message: String },
    #[error("no parameter in {start}..{end} yields a coprime tuple")]
    EmptyFamily { start: i64, end: i64 },
    #[error("only {found} of {wanted} coprime tuples found in {start}..{end}")]
    Exhausted {
        found: usize,
        wanted: usize,
        start: i64,
        end: i64,
    },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("schema error on line {line}: {message}")]
    Schema { line: usize, message: String },
}

/// Generator expressions in one parameter, evaluated with floor division.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TupleFamily {
    #[serde(with = "expr_list")]
    pub generators: Vec<Expr>,
    /// Name of the parameter in rendered output (`x`, `k`, ...).
    pub var: String,
    pub param_start: i64,
    pub count: usize,
    pub coprimality_filter: bool,
}

mod expr_list {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &[Expr], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(v.iter().map(|e| e.to_string()))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Expr>, D::Error> {
        let texts = Vec::<String>::deserialize(d)?;
        texts
            .iter()
            .map(|t| crate::expr::parse_expr(t).map_err(serde::de::Error::custom))
            .collect()
    }
}

impl TupleFamily {
    /// Parses comma-separated generator expressions such as
    /// `x,x+3,2*x+1,2*x+7`. All generators must use the same variable.
    pub fn parse(spec: &str, param_start: i64, count: usize) -> Result<Self, DatasetError> {
        let mut generators = Vec::new();
        let mut var: Option<String> = None;
        for (index, part) in spec.split(',').enumerate() {
            let parsed =
                parse_expr_named(part).map_err(|source| DatasetError::Expr { index, source })?;
            if let Some(v) = parsed.var {
                match &var {
                    Some(existing) if *existing != v => {
                        return Err(DatasetError::Expr {
                            index,
                            source: ExprError::Parse {
                                position: 0,
                                message: format!("variable `{v}` differs from `{existing}`"),
                            },
                        })
                    }
                    _ => var = Some(v),
                }
            }
            generators.push(parsed.expr);
        }
        Ok(TupleFamily {
            generators,
            var: var.unwrap_or_else(|| "x".to_string()),
            param_start,
            count,
            coprimality_filter: true,
        })
    }

    pub fn with_filter(mut self, on: bool) -> Self {
        self.coprimality_filter = on;
        self
    }

    /// The generator tuple at one parameter value.
    pub fn tuple_at(&self, param: i64) -> Result<GenTuple, DatasetError> {
        let mut elements = Vec::with_capacity(self.generators.len());
        for (i, g) in self.generators.iter().enumerate() {
            let family_err = |message: String| DatasetError::Family { param, message };
            let value = g
                .evaluate_integer(param, EvalMode::FloorDiv)
                .map_err(|e| family_err(format!("generator {i}: {e}")))?
                .ok_or_else(|| family_err(format!("generator {i} is not an integer")))?;
            let value: i64 = value
                .try_into()
                .map_err(|_| family_err(format!("generator {i} exceeds 64 bits")))?;
            if value < 1 {
                return Err(family_err(format!("generator {i} is {value}, not positive")));
            }
            elements.push(value);
        }
        GenTuple::new(elements).map_err(|e| DatasetError::Family {
            param,
            message: e.to_string(),
        })
    }

    /// The family's parameters in scan order, honouring the coprimality filter.
    pub fn parameters(&self) -> Result<Vec<(i64, GenTuple)>, DatasetError> {
        let mut out = Vec::with_capacity(self.count);
        if self.count == 0 {
            return Ok(out);
        }
        let end = self.param_start.saturating_add(SCAN_CAP);
        let mut param = self.param_start;
        while out.len() < self.count && param < end {
            let tuple = self.tuple_at(param)?;
            if !self.coprimality_filter || tuple.is_coprime() {
                out.push((param, tuple));
            }
            param += 1;
        }
        if out.is_empty() {
            return Err(DatasetError::EmptyFamily {
                start: self.param_start,
                end,
            });
        }
        if out.len() < self.count {
            return Err(DatasetError::Exhausted {
                found: out.len(),
                wanted: self.count,
                start: self.param_start,
                end,
            });
        }
        Ok(out)
    }
}

impl fmt::Display for TupleFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.generators.iter().map(|g| g.render(&self.var)).collect();
        write!(f, "({})", parts.join(", "))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Row {
    pub param: i64,
    pub tuple: GenTuple,
    pub target: i64,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dataset {
    pub rows: Vec<Row>,
}

/// Computes the oracle target for every family member, in parameter order.
pub fn materialize(family: &TupleFamily) -> Result<Dataset, DatasetError> {
    let params = family.parameters()?;
    let rows = params
        .into_par_iter()
        .map(|(param, tuple)| {
            let target = frobenius(&tuple)?;
            Ok(Row {
                param,
                tuple,
                target,
            })
        })
        .collect::<Result<Vec<_>, OracleError>>()?;
    Ok(Dataset { rows })
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Recomputes every target; returns the first row that disagrees.
    pub fn check_targets(&self) -> Result<Option<&Row>, OracleError> {
        for row in &self.rows {
            if frobenius(&row.tuple)? != row.target {
                return Ok(Some(row));
            }
        }
        Ok(None)
    }

    pub fn to_csv_string(&self) -> String {
        let n = self.rows.first().map_or(0, |r| r.tuple.len());
        let mut out = String::from("param");
        for i in 1..=n {
            out.push_str(&format!(",a{i}"));
        }
        out.push_str(",g\n");
        for r in &self.rows {
            out.push_str(&r.param.to_string());
            for a in r.tuple.elements() {
                out.push(',');
                out.push_str(&a.to_string());
            }
            out.push(',');
            out.push_str(&r.target.to_string());
            out.push('\n');
        }
        out
    }

    /// Content hash of the canonical CSV form.
    pub fn id(&self) -> String {
        hex::encode(Sha256::digest(self.to_csv_string().as_bytes()))
    }

    pub fn from_csv_reader<R: Read>(reader: R) -> Result<Self, DatasetError> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .flexible(true)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let schema = |line: usize, message: String| DatasetError::Schema { line, message };
        let csv_err = |e: csv::Error| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            match e.into_kind() {
                csv::ErrorKind::Io(io) => DatasetError::Io(io),
                other => DatasetError::Schema {
                    line,
                    message: format!("{other:?}"),
                },
            }
        };

        let mut records = rdr.records();
        let header = match records.next() {
            None => return Err(schema(1, "missing header".into())),
            Some(r) => r.map_err(csv_err)?,
        };
        let cols: Vec<&str> = header.iter().collect();
        let n = cols.len().saturating_sub(2);
        let expected: Vec<String> = std::iter::once("param".to_string())
            .chain((1..=n).map(|i| format!("a{i}")))
            .chain(std::iter::once("g".to_string()))
            .collect();
        if cols.len() < 2 || cols != expected {
            return Err(schema(
                1,
                format!("header must be `{}`, found `{}`", expected.join(","), cols.join(",")),
            ));
        }

        let mut rows: Vec<Row> = Vec::new();
        for record in records {
            let record = record.map_err(csv_err)?;
            let line = record.position().map_or(0, |p| p.line() as usize);
            if record.len() != cols.len() {
                return Err(schema(
                    line,
                    format!("expected {} columns, found {}", cols.len(), record.len()),
                ));
            }
            let values = record
                .iter()
                .map(|cell| {
                    cell.parse::<i64>()
                        .map_err(|_| schema(line, format!("`{cell}` is not an integer")))
                })
                .collect::<Result<Vec<i64>, _>>()?;
            let param = values[0];
            let target = values[values.len() - 1];
            let tuple = GenTuple::new(values[1..values.len() - 1].to_vec())
                .map_err(|e| schema(line, e.to_string()))?;
            if let Some(prev) = rows.last() {
                if prev.param >= param {
                    return Err(schema(line, "rows must be sorted by parameter".into()));
                }
            }
            rows.push(Row {
                param,
                tuple,
                target,
            });
        }
        Ok(Dataset { rows })
    }

    pub fn load_csv(path: impl AsRef<Path>) -> Result<Self, DatasetError> {
        Self::from_csv_reader(File::open(path)?)
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<(), DatasetError> {
        let mut f = File::create(path)?;
        f.write_all(self.to_csv_string().as_bytes())?;
        Ok(())
    }
}
