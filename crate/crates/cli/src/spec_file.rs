//! Coin description files: one JSON document per coin, complex entries as
//! `[re, im]`, matrices row-major.

use std::collections::BTreeMap;
use std::path::Path;

use oqw_core::linalg::{self, c, ComplexMatrix};
use oqw_core::{Coin, Coin1D, Coin2D, CoinCT};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CoinKind {
    Oqw1d,
    Oqw2d,
    Ctoqw2d,
}

impl CoinKind {
    pub fn name(self) -> &'static str {
        match self {
            CoinKind::Oqw1d => "oqw1d",
            CoinKind::Oqw2d => "oqw2d",
            CoinKind::Ctoqw2d => "ctoqw2d",
        }
    }

    fn required(self) -> &'static [&'static str] {
        match self {
            CoinKind::Oqw1d => &["L", "R"],
            CoinKind::Oqw2d => &["D1", "D2", "D3", "D4"],
            CoinKind::Ctoqw2d => &["A1", "A2", "A3", "A4", "H"],
        }
    }

    fn optional(self) -> &'static [&'static str] {
        match self {
            CoinKind::Oqw1d => &["B"],
            _ => &[],
        }
    }
}

pub type RawMatrix = Vec<Vec<[f64; 2]>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoinSpecFile {
    pub kind: CoinKind,
    pub dimension: usize,
    pub matrices: BTreeMap<String, RawMatrix>,
    #[serde(default, skip_serializing_if = "serde_json::Value::is_null")]
    pub metadata: serde_json::Value,
}

fn to_matrix(name: &str, raw: &RawMatrix, d: usize) -> Result<ComplexMatrix, CliError> {
    if raw.len() != d {
        return Err(CliError::structural(format!(
            "matrix `{name}` has {} rows, expected {d}",
            raw.len()
        )));
    }
    let mut entries = Vec::with_capacity(d * d);
    for (i, row) in raw.iter().enumerate() {
        if row.len() != d {
            return Err(CliError::structural(format!(
                "matrix `{name}` row {} has {} entries, expected {d}",
                i + 1,
                row.len()
            )));
        }
        for (j, [re, im]) in row.iter().enumerate() {
            if !re.is_finite() || !im.is_finite() {
                return Err(CliError::structural(format!(
                    "matrix `{name}` entry ({}, {}) is not finite",
                    i + 1,
                    j + 1
                )));
            }
            entries.push(c(*re, *im));
        }
    }
    Ok(linalg::from_rows(d, &entries))
}

fn from_matrix(m: &ComplexMatrix) -> RawMatrix {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect()
}

impl CoinSpecFile {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::structural(format!("parse error: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::structural(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Checks names and shapes, then builds the coin.
    pub fn to_coin(&self) -> Result<Coin, CliError> {
        let d = self.dimension;
        if d == 0 {
            return Err(CliError::structural("dimension must be positive"));
        }
        for name in self.matrices.keys() {
            if !self.kind.required().contains(&name.as_str()) && !self.kind.optional().contains(&name.as_str()) {
                return Err(CliError::structural(format!(
                    "matrix `{name}` is not part of a {} coin",
                    self.kind.name()
                )));
            }
        }
        let get = |name: &str| -> Result<ComplexMatrix, CliError> {
            match self.matrices.get(name) {
                Some(raw) => to_matrix(name, raw, d),
                None => Err(CliError::structural(format!(
                    "missing matrix `{name}` for a {} coin",
                    self.kind.name()
                ))),
            }
        };
        let coin = match self.kind {
            CoinKind::Oqw1d => {
                let stay = match self.matrices.get("B") {
                    Some(raw) => to_matrix("B", raw, d)?,
                    None => linalg::zeros(d),
                };
                Coin1D::new(get("L")?, stay, get("R")?)?.into()
            }
            CoinKind::Oqw2d => Coin2D::new([get("D1")?, get("D2")?, get("D3")?, get("D4")?])?.into(),
            CoinKind::Ctoqw2d => {
                CoinCT::new([get("A1")?, get("A2")?, get("A3")?, get("A4")?], get("H")?)?.into()
            }
        };
        Ok(coin)
    }

    /// File contents describing `coin`.
    pub fn from_coin(coin: &Coin, metadata: serde_json::Value) -> Self {
        let mut matrices = BTreeMap::new();
        let kind = match coin {
            Coin::OneD(c) => {
                matrices.insert("L".to_string(), from_matrix(&c.left));
                if c.lazy {
                    matrices.insert("B".to_string(), from_matrix(&c.stay));
                }
                matrices.insert("R".to_string(), from_matrix(&c.right));
                CoinKind::Oqw1d
            }
            Coin::TwoD(c) => {
                for (j, op) in c.ops.iter().enumerate() {
                    matrices.insert(format!("D{}", j + 1), from_matrix(op));
                }
                CoinKind::Oqw2d
            }
            Coin::Continuous(c) => {
                for (j, op) in c.jumps.iter().enumerate() {
                    matrices.insert(format!("A{}", j + 1), from_matrix(op));
                }
                matrices.insert("H".to_string(), from_matrix(&c.hamiltonian));
                CoinKind::Ctoqw2d
            }
        };
        Self {
            kind,
            dimension: coin.dim(),
            matrices,
            metadata,
        }
    }
}
