//! QUBO export/import for external Ising-type solvers, plus the answer
//! file they hand back.
//!
//! The on-disk model is always binary-valued; spin models are converted via
//! `x = (1 - sigma)/2` with the constant offset tracked, so energies round-
//! trip exactly. Variables are flattened in sorted `(component, spin)`
//! order and named `"q:i"`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadratic::{ConstraintMode, Domain, QuadraticModel};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QuboFile {
    pub num_vars: usize,
    pub offset: f64,
    pub linear: Vec<(usize, f64)>,
    pub quadratic: Vec<(usize, usize, f64)>,
    pub var_names: Vec<String>,
}

impl QuboFile {
    /// Binary-domain view of a quadratic model.
    pub fn from_model(qm: &QuadraticModel) -> Self {
        let binary = qm.to_binary();
        let var_names = binary
            .variables()
            .iter()
            .map(|(q, i)| format!("{q}:{i}"))
            .collect();
        QuboFile {
            num_vars: binary.num_variables(),
            offset: binary.offset(),
            linear: binary
                .linear_terms()
                .enumerate()
                .map(|(k, (_, h))| (k, h))
                .collect(),
            quadratic: binary
                .quadratic_terms()
                .map(|(u, v, w)| {
                    (
                        binary.var_position(u).unwrap(),
                        binary.var_position(v).unwrap(),
                        w,
                    )
                })
                .collect(),
            var_names,
        }
    }

    /// Rebuild a binary quadratic model from the flat representation.
    pub fn to_model(&self) -> Result<QuadraticModel> {
        let vars: Vec<(usize, usize)> = self
            .var_names
            .iter()
            .map(|name| parse_var_name(name))
            .collect::<Result<_>>()?;
        let mut qm = QuadraticModel::new(Domain::Binary, ConstraintMode::None, 0.0);
        for &v in &vars {
            qm.add_variable(v);
        }
        qm.add_offset(self.offset);
        for &(k, h) in &self.linear {
            qm.add_linear(*index(&vars, k)?, h);
        }
        for &(k, l, w) in &self.quadratic {
            qm.add_quadratic(*index(&vars, k)?, *index(&vars, l)?, w);
        }
        Ok(qm)
    }
}

fn index(vars: &[(usize, usize)], k: usize) -> Result<&(usize, usize)> {
    vars.get(k).ok_or(Error::ConfigSizeMismatch {
        expected: vars.len(),
        got: k + 1,
    })
}

fn parse_var_name(name: &str) -> Result<(usize, usize)> {
    let bad = || {
        Error::Io(std::io::Error::new(
            std::io::ErrorKind::InvalidData,
            format!("malformed variable name {name:?}, expected \"q:i\""),
        ))
    };
    let (q, i) = name.split_once(':').ok_or_else(bad)?;
    Ok((q.parse().map_err(|_| bad())?, i.parse().map_err(|_| bad())?))
}

pub fn export_qubo(qm: &QuadraticModel, path: &Path) -> Result<()> {
    let text = serde_json::to_string_pretty(&QuboFile::from_model(qm))?;
    std::fs::write(path, text)?;
    Ok(())
}

pub fn import_qubo(path: &Path) -> Result<QuadraticModel> {
    let text = std::fs::read_to_string(path)?;
    let file: QuboFile = serde_json::from_str(&text)?;
    file.to_model()
}

/// Answer injected by an external solver: binary values by flat index.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AnswerFile {
    pub config: Vec<(usize, u8)>,
}

impl AnswerFile {
    pub fn from_binary_config(config: &[i8]) -> Self {
        AnswerFile {
            config: config
                .iter()
                .enumerate()
                .map(|(k, &x)| (k, x as u8))
                .collect(),
        }
    }

    /// Dense 0/1 vector of length `num_vars`.
    pub fn to_binary_config(&self, num_vars: usize) -> Result<Vec<i8>> {
        let mut out = vec![-1i8; num_vars];
        for &(k, x) in &self.config {
            if k >= num_vars || x > 1 {
                return Err(Error::ConfigSizeMismatch {
                    expected: num_vars,
                    got: k + 1,
                });
            }
            out[k] = x as i8;
        }
        if out.iter().any(|&x| x < 0) {
            return Err(Error::ConfigSizeMismatch {
                expected: num_vars,
                got: self.config.len(),
            });
        }
        Ok(out)
    }
}

pub fn write_answer(path: &Path, answer: &AnswerFile) -> Result<()> {
    std::fs::write(path, serde_json::to_string_pretty(answer)?)?;
    Ok(())
}

pub fn read_answer(path: &Path) -> Result<AnswerFile> {
    Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
}
