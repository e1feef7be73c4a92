//! Potts model instances.
//!
//! A Potts spin takes one of `Q` discrete components; two spins contribute
//! `-s * J_ij` to the energy when they hold the same component, where `s` is
//! the coupling scale (`4/N` under the default convention, `1` otherwise).

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Fully connected Potts instance: `N` spins, `Q` components, symmetric
/// couplings with zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct PottsModel {
    n_spins: usize,
    n_components: usize,
    /// Row-major `N x N`, symmetric, zero diagonal.
    couplings: Vec<f64>,
    /// Apply the `4/N` prefactor to pair energies (default on).
    scaled: bool,
    /// Uniform self-interaction carried by the square-of-magnetization form
    /// of the half-hot cost term. Zero for pair-listed instances; equal to
    /// the coupling for the uniform ferromagnet, where the squared-sum
    /// convention contributes the constant `-(s/8) * Q * N * self_coupling`
    /// to half-hot encodings.
    self_coupling: f64,
}

/// On-disk instance format: unlisted pairs are zero. The two optional
/// fields only appear when they differ from the defaults.
#[derive(Serialize, Deserialize)]
struct InstanceFile {
    n_spins: usize,
    n_components: usize,
    couplings: Vec<(usize, usize, f64)>,
    #[serde(default = "default_true", skip_serializing_if = "is_true")]
    scaled: bool,
    #[serde(default, skip_serializing_if = "is_zero")]
    self_coupling: f64,
}

fn default_true() -> bool {
    true
}

#[allow(clippy::trivially_copy_pass_by_ref)]
fn is_true(b: &bool) -> bool {
    *b
}

#[allow(clippy::trivially_copy_pass_by_ref)]
fn is_zero(x: &f64) -> bool {
    *x == 0.0
}

impl PottsModel {
    /// Build from a sparse list of coupled pairs; unlisted pairs are zero.
    /// Each pair may be listed once in either order.
    pub fn from_pairs(
        n_spins: usize,
        n_components: usize,
        pairs: &[(usize, usize, f64)],
    ) -> Result<Self> {
        if n_spins < 2 || n_components < 2 {
            return Err(Error::ModelTooSmall {
                n_spins,
                n_components,
            });
        }
        let mut couplings = vec![0.0; n_spins * n_spins];
        for &(i, j, v) in pairs {
            if i >= n_spins || j >= n_spins || i == j {
                return Err(Error::InvalidCouplings);
            }
            couplings[i * n_spins + j] = v;
            couplings[j * n_spins + i] = v;
        }
        Ok(Self {
            n_spins,
            n_components,
            couplings,
            scaled: true,
            self_coupling: 0.0,
        })
    }

    /// Build from a full matrix; must be symmetric with zero diagonal.
    pub fn from_matrix(n_components: usize, matrix: &[Vec<f64>]) -> Result<Self> {
        let n = matrix.len();
        if n < 2 || n_components < 2 {
            return Err(Error::ModelTooSmall {
                n_spins: n,
                n_components,
            });
        }
        let mut couplings = vec![0.0; n * n];
        for (i, row) in matrix.iter().enumerate() {
            if row.len() != n || row[i] != 0.0 {
                return Err(Error::InvalidCouplings);
            }
            for (j, &v) in row.iter().enumerate() {
                if matrix[j][i] != v {
                    return Err(Error::InvalidCouplings);
                }
                couplings[i * n + j] = v;
            }
        }
        Ok(Self {
            n_spins: n,
            n_components,
            couplings,
            scaled: true,
            self_coupling: 0.0,
        })
    }

    /// Uniform fully connected ferromagnet, `J_ij = j` for all pairs.
    ///
    /// Carries `self_coupling = j` so half-hot encodings reproduce the
    /// squared-magnetization convention `-(j/2N) * sum_q (sum_i s_qi)^2`
    /// including its constant part.
    pub fn ferromagnet(n_spins: usize, n_components: usize, j: f64) -> Result<Self> {
        let mut pairs = Vec::with_capacity(n_spins * (n_spins - 1) / 2);
        for i in 0..n_spins {
            for k in (i + 1)..n_spins {
                pairs.push((i, k, j));
            }
        }
        let mut model = Self::from_pairs(n_spins, n_components, &pairs)?;
        model.self_coupling = j;
        Ok(model)
    }

    /// Disable the `4/N` prefactor; pair energies are then `-J_ij` per
    /// matching component. Glass instances specified directly in coupling
    /// units use this convention.
    pub fn without_scale(mut self) -> Self {
        self.scaled = false;
        self
    }

    pub fn n_spins(&self) -> usize {
        self.n_spins
    }

    pub fn n_components(&self) -> usize {
        self.n_components
    }

    pub fn coupling(&self, i: usize, j: usize) -> f64 {
        self.couplings[i * self.n_spins + j]
    }

    pub fn self_coupling(&self) -> f64 {
        self.self_coupling
    }

    pub fn is_scaled(&self) -> bool {
        self.scaled
    }

    /// Prefactor applied to the pair energy: `4/N` when scaled, else `1`.
    pub fn coupling_scale(&self) -> f64 {
        if self.scaled {
            4.0 / self.n_spins as f64
        } else {
            1.0
        }
    }

    /// Clone with a different component count; couplings are unchanged.
    pub(crate) fn with_components(&self, n_components: usize) -> Self {
        Self {
            n_components,
            ..self.clone()
        }
    }

    /// Potts energy `-s * sum_{i<j} J_ij * delta(S_i, S_j)` of a component
    /// assignment (`assignment[i]` in `0..Q`).
    pub fn potts_energy(&self, assignment: &[usize]) -> Result<f64> {
        if assignment.len() != self.n_spins {
            return Err(Error::ConfigSizeMismatch {
                expected: self.n_spins,
                got: assignment.len(),
            });
        }
        for (spin, &component) in assignment.iter().enumerate() {
            if component >= self.n_components {
                return Err(Error::ComponentOutOfRange {
                    spin,
                    component,
                    n_components: self.n_components,
                });
            }
        }
        let mut aligned = 0.0;
        for i in 0..self.n_spins {
            for j in (i + 1)..self.n_spins {
                if assignment[i] == assignment[j] {
                    aligned += self.coupling(i, j);
                }
            }
        }
        Ok(-self.coupling_scale() * aligned)
    }

    /// Exhaustive ground state over all `Q^N` assignments. Intended for
    /// small instances; panics if the search space exceeds `2^26`.
    pub fn exhaustive_ground(&self) -> (Vec<usize>, f64) {
        let q = self.n_components;
        let n = self.n_spins;
        let total = (q as u128).pow(n as u32);
        assert!(total <= 1 << 26, "search space too large for enumeration");
        let mut assignment = vec![0usize; n];
        let mut best = assignment.clone();
        let mut best_energy = self.potts_energy(&assignment).unwrap();
        'outer: loop {
            // odometer increment
            for slot in assignment.iter_mut() {
                *slot += 1;
                if *slot < q {
                    let energy = self.potts_energy(&assignment).unwrap();
                    if energy < best_energy {
                        best_energy = energy;
                        best = assignment.clone();
                    }
                    continue 'outer;
                }
                *slot = 0;
            }
            break;
        }
        (best, best_energy)
    }

    /// Write the instance JSON (sparse coupling triples).
    pub fn write_instance(&self, path: &Path) -> Result<()> {
        let mut pairs = Vec::new();
        for i in 0..self.n_spins {
            for j in (i + 1)..self.n_spins {
                let v = self.coupling(i, j);
                if v != 0.0 {
                    pairs.push((i, j, v));
                }
            }
        }
        let file = InstanceFile {
            n_spins: self.n_spins,
            n_components: self.n_components,
            couplings: pairs,
            scaled: self.scaled,
            self_coupling: self.self_coupling,
        };
        let text = serde_json::to_string_pretty(&file)?;
        std::fs::write(path, text)?;
        Ok(())
    }

    /// Read an instance JSON written by [`write_instance`] (or by hand).
    pub fn read_instance(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let file: InstanceFile = serde_json::from_str(&text)?;
        let mut model = Self::from_pairs(file.n_spins, file.n_components, &file.couplings)?;
        model.scaled = file.scaled;
        model.self_coupling = file.self_coupling;
        Ok(model)
    }
}
