//! JSON exchange format for POVMs and instruments.
//!
//! ```json
//! {"d": 2, "kind": "povm", "operators": [[[[1,0],[0,0]],[[0,0],[0,0]]], ...]}
//! ```
//!
//! Each operator is a `d × d` array of `[re, im]` pairs.

use std::path::Path;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use super::povm::{Instrument, Povm};
use crate::error::{Error, Result};
use crate::qcore::ComplexMatrix;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OperatorKind {
    Povm,
    Instrument,
}

/// Raw file contents before validation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OperatorFile {
    pub d: usize,
    pub kind: OperatorKind,
    pub operators: Vec<Vec<Vec<[f64; 2]>>>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum ParsedOperators {
    Povm(Povm<f64>),
    Instrument(Instrument<f64>),
}

impl ParsedOperators {
    pub fn povm(&self) -> Povm<f64> {
        match self {
            ParsedOperators::Povm(p) => p.clone(),
            ParsedOperators::Instrument(i) => i.povm(),
        }
    }
}

impl OperatorFile {
    pub fn from_povm(povm: &Povm<f64>) -> Self {
        Self {
            d: povm.dim(),
            kind: OperatorKind::Povm,
            operators: povm.effects().iter().map(to_nested).collect(),
        }
    }

    pub fn from_instrument(inst: &Instrument<f64>) -> Self {
        Self {
            d: inst.dim(),
            kind: OperatorKind::Instrument,
            operators: inst.kraus().iter().map(to_nested).collect(),
        }
    }

    /// Applies the type invariants in order and reports the first failure.
    pub fn validate(&self) -> Result<ParsedOperators> {
        let d = self.d;
        if d == 0 {
            return Err(Error::Validation("\"d\" must be at least 1".into()));
        }
        if self.operators.is_empty() {
            return Err(Error::Validation("\"operators\" is empty".into()));
        }
        let mut mats = Vec::with_capacity(self.operators.len());
        for (k, op) in self.operators.iter().enumerate() {
            if op.len() != d {
                return Err(Error::Validation(format!(
                    "operator {k} has {} rows, expected {d}",
                    op.len()
                )));
            }
            let mut entries = Vec::with_capacity(d * d);
            for (r, row) in op.iter().enumerate() {
                if row.len() != d {
                    return Err(Error::Validation(format!(
                        "operator {k} row {r} has {} entries, expected {d}",
                        row.len()
                    )));
                }
                entries.extend(row.iter().map(|[re, im]| Complex::new(*re, *im)));
            }
            let m = ComplexMatrix::from_row_major(d, d, entries)
                .map_err(|e| Error::Validation(format!("operator {k}: {e}")))?;
            mats.push(m);
        }
        match self.kind {
            OperatorKind::Povm => {
                let povm = Povm::new(mats)?;
                povm.validate_psd()?;
                Ok(ParsedOperators::Povm(povm))
            }
            OperatorKind::Instrument => Ok(ParsedOperators::Instrument(Instrument::new(mats)?)),
        }
    }
}

fn to_nested(m: &ComplexMatrix<f64>) -> Vec<Vec<[f64; 2]>> {
    (0..m.rows())
        .map(|r| m.row(r).iter().map(|z| [z.re, z.im]).collect())
        .collect()
}

/// Reads and validates an operator file.
pub fn parse_operator_file(path: &Path) -> Result<ParsedOperators> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_operator_json(&text)
}

pub fn parse_operator_json(text: &str) -> Result<ParsedOperators> {
    let file: OperatorFile = serde_json::from_str(text)?;
    file.validate()
}
