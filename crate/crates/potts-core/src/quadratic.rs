//! Quadratic models over binary (0/1) or spin (±1) variables.
//!
//! Variables are keyed by `(component q, spin i)`. Energies are pure
//! functions of the stored linear terms, quadratic terms, and constant
//! offset, so an encoding is correct exactly when its stored-term energy
//! matches the source formula.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Variable key: `(component, spin)`.
pub type Var = (usize, usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Domain {
    /// Variables take values 0/1.
    Binary,
    /// Variables take values ±1 with `x = (1 - sigma) / 2`.
    Spin,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstraintMode {
    OneHot,
    HalfHot,
    None,
}

/// Quadratic form `sum h_v x_v + sum w_uv x_u x_v + offset`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticModel {
    domain: Domain,
    constraint_mode: ConstraintMode,
    penalty_lambda: f64,
    /// Sorted, unique variable keys.
    variables: Vec<Var>,
    index: BTreeMap<Var, usize>,
    /// Linear coefficients by variable position.
    linear: Vec<f64>,
    /// Unordered-unique pairs keyed by `(lo, hi)` positions; no self-pairs.
    quadratic: BTreeMap<(usize, usize), f64>,
    offset: f64,
}

/// Decoded component sets with a feasibility verdict. Infeasible configs
/// are reported, never repaired here.
#[derive(Debug, Clone, PartialEq)]
pub struct ComponentAssignment {
    /// Per spin, the set of selected components (`x = 1`), sorted.
    pub selected: Vec<Vec<usize>>,
    pub feasible: bool,
    /// Spins violating the constraint, sorted.
    pub offending: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
struct QuadraticFile {
    domain: Domain,
    constraint_mode: ConstraintMode,
    lambda: f64,
    offset: f64,
    linear: Vec<(usize, usize, f64)>,
    quadratic: Vec<(usize, usize, usize, usize, f64)>,
}

impl QuadraticModel {
    pub fn new(domain: Domain, constraint_mode: ConstraintMode, penalty_lambda: f64) -> Self {
        Self {
            domain,
            constraint_mode,
            penalty_lambda,
            variables: Vec::new(),
            index: BTreeMap::new(),
            linear: Vec::new(),
            quadratic: BTreeMap::new(),
            offset: 0.0,
        }
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn constraint_mode(&self) -> ConstraintMode {
        self.constraint_mode
    }

    pub fn penalty_lambda(&self) -> f64 {
        self.penalty_lambda
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn num_variables(&self) -> usize {
        self.variables.len()
    }

    pub fn variables(&self) -> &[Var] {
        &self.variables
    }

    pub fn var_position(&self, var: Var) -> Option<usize> {
        self.index.get(&var).copied()
    }

    /// Register a variable; idempotent. Variables must be registered before
    /// terms touching them are added.
    pub fn add_variable(&mut self, var: Var) -> usize {
        if let Some(&pos) = self.index.get(&var) {
            return pos;
        }
        // keep `variables` sorted so positions follow BTree order
        let pos = self.variables.partition_point(|v| *v < var);
        self.variables.insert(pos, var);
        self.linear.insert(pos, 0.0);
        // positions after `pos` shift by one
        let shifted: Vec<((usize, usize), f64)> = self
            .quadratic
            .iter()
            .map(|(&(a, b), &w)| {
                let a2 = if a >= pos { a + 1 } else { a };
                let b2 = if b >= pos { b + 1 } else { b };
                ((a2, b2), w)
            })
            .collect();
        self.quadratic = shifted.into_iter().collect();
        self.index = self
            .variables
            .iter()
            .enumerate()
            .map(|(k, &v)| (v, k))
            .collect();
        pos
    }

    pub fn add_linear(&mut self, var: Var, h: f64) {
        let pos = self.add_variable(var);
        self.linear[pos] += h;
    }

    /// Accumulate a pairwise coefficient; the pair is stored unordered and
    /// self-pairs are rejected.
    pub fn add_quadratic(&mut self, u: Var, v: Var, w: f64) {
        assert!(u != v, "self-pairs are not representable");
        let a = self.add_variable(u);
        let b = self.add_variable(v);
        let key = (a.min(b), a.max(b));
        *self.quadratic.entry(key).or_insert(0.0) += w;
    }

    pub fn add_offset(&mut self, c: f64) {
        self.offset += c;
    }

    /// Linear terms as `(var, h)` in variable order.
    pub fn linear_terms(&self) -> impl Iterator<Item = (Var, f64)> + '_ {
        self.variables.iter().copied().zip(self.linear.iter().copied())
    }

    /// Quadratic terms as `(u, v, w)` with `u < v`.
    pub fn quadratic_terms(&self) -> impl Iterator<Item = (Var, Var, f64)> + '_ {
        self.quadratic
            .iter()
            .map(|(&(a, b), &w)| (self.variables[a], self.variables[b], w))
    }

    /// Largest absolute coefficient over all stored terms.
    pub fn max_abs_term(&self) -> f64 {
        let lin = self.linear.iter().fold(0.0f64, |m, h| m.max(h.abs()));
        self.quadratic.values().fold(lin, |m, w| m.max(w.abs()))
    }

    /// Smallest nonzero absolute coefficient, if any term is nonzero.
    pub fn min_nonzero_abs_term(&self) -> Option<f64> {
        self.linear
            .iter()
            .chain(self.quadratic.values())
            .filter(|c| **c != 0.0)
            .map(|c| c.abs())
            .fold(None, |m, c| Some(m.map_or(c, |m: f64| m.min(c))))
    }

    fn check_config(&self, config: &[i8]) -> Result<()> {
        if config.len() != self.variables.len() {
            return Err(Error::ConfigSizeMismatch {
                expected: self.variables.len(),
                got: config.len(),
            });
        }
        Ok(())
    }

    /// Energy of a configuration given in variable order. Binary configs
    /// hold 0/1, spin configs hold ±1.
    pub fn energy(&self, config: &[i8]) -> Result<f64> {
        self.check_config(config)?;
        let mut e = self.offset;
        for (pos, &h) in self.linear.iter().enumerate() {
            e += h * config[pos] as f64;
        }
        for (&(a, b), &w) in &self.quadratic {
            e += w * config[a] as f64 * config[b] as f64;
        }
        Ok(e)
    }

    /// Convert to the spin domain via `x = (1 - sigma) / 2`; identity if
    /// already spin-valued.
    pub fn to_spin(&self) -> Self {
        match self.domain {
            Domain::Spin => self.clone(),
            Domain::Binary => {
                let mut out = self.skeleton(Domain::Spin);
                out.offset = self.offset;
                for (pos, &h) in self.linear.iter().enumerate() {
                    // h*x = h/2 - (h/2) sigma
                    out.offset += h / 2.0;
                    out.linear[pos] -= h / 2.0;
                }
                for (&(a, b), &w) in &self.quadratic {
                    // w*x_a*x_b = w/4 (1 - s_a)(1 - s_b)
                    out.offset += w / 4.0;
                    out.linear[a] -= w / 4.0;
                    out.linear[b] -= w / 4.0;
                    *out.quadratic.entry((a, b)).or_insert(0.0) += w / 4.0;
                }
                out
            }
        }
    }

    /// Convert to the binary domain via `sigma = 1 - 2x`; identity if
    /// already binary.
    pub fn to_binary(&self) -> Self {
        match self.domain {
            Domain::Binary => self.clone(),
            Domain::Spin => {
                let mut out = self.skeleton(Domain::Binary);
                out.offset = self.offset;
                for (pos, &h) in self.linear.iter().enumerate() {
                    // h*sigma = h - 2h*x
                    out.offset += h;
                    out.linear[pos] -= 2.0 * h;
                }
                for (&(a, b), &w) in &self.quadratic {
                    // w*s_a*s_b = w (1 - 2x_a)(1 - 2x_b)
                    out.offset += w;
                    out.linear[a] -= 2.0 * w;
                    out.linear[b] -= 2.0 * w;
                    *out.quadratic.entry((a, b)).or_insert(0.0) += 4.0 * w;
                }
                out
            }
        }
    }

    fn skeleton(&self, domain: Domain) -> Self {
        Self {
            domain,
            constraint_mode: self.constraint_mode,
            penalty_lambda: self.penalty_lambda,
            variables: self.variables.clone(),
            index: self.index.clone(),
            linear: vec![0.0; self.variables.len()],
            quadratic: BTreeMap::new(),
            offset: 0.0,
        }
    }

    /// Map a configuration between domains (`x = (1 - sigma) / 2`).
    pub fn convert_config(config: &[i8], from: Domain, to: Domain) -> Vec<i8> {
        if from == to {
            return config.to_vec();
        }
        match to {
            Domain::Binary => config.iter().map(|&s| (1 - s) / 2).collect(),
            Domain::Spin => config.iter().map(|&x| 1 - 2 * x).collect(),
        }
    }

    /// Selected value in this domain (`x = 1` ⇔ `sigma = -1`).
    fn is_selected(&self, value: i8) -> bool {
        match self.domain {
            Domain::Binary => value == 1,
            Domain::Spin => value == -1,
        }
    }

    /// Decode a configuration into per-spin selected-component sets and
    /// report feasibility under the model's constraint mode.
    pub fn decode_assignment(&self, config: &[i8]) -> Result<ComponentAssignment> {
        self.check_config(config)?;
        let n_spins = self
            .variables
            .iter()
            .map(|&(_, i)| i + 1)
            .max()
            .unwrap_or(0);
        let q = self
            .variables
            .iter()
            .map(|&(c, _)| c + 1)
            .max()
            .unwrap_or(0);
        let mut selected = vec![Vec::new(); n_spins];
        for (pos, &(component, spin)) in self.variables.iter().enumerate() {
            if self.is_selected(config[pos]) {
                selected[spin].push(component);
            }
        }
        let target = match self.constraint_mode {
            ConstraintMode::OneHot => Some(1),
            ConstraintMode::HalfHot => Some(q / 2),
            ConstraintMode::None => None,
        };
        let mut offending = Vec::new();
        if let Some(count) = target {
            for (spin, set) in selected.iter().enumerate() {
                if set.len() != count {
                    offending.push(spin);
                }
            }
        }
        Ok(ComponentAssignment {
            feasible: offending.is_empty(),
            selected,
            offending,
        })
    }

    /// Exhaustive minimum over all configurations via Gray-code single
    /// flips. Panics above 26 variables.
    pub fn exhaustive_minimum(&self) -> (Vec<i8>, f64) {
        let n = self.variables.len();
        assert!(n <= 26, "too many variables for exhaustive search");
        let (lo, hi) = match self.domain {
            Domain::Binary => (0i8, 1i8),
            Domain::Spin => (1i8, -1i8),
        };
        // adjacency for O(deg) flip deltas
        let mut adj: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for (&(a, b), &w) in &self.quadratic {
            adj[a].push((b, w));
            adj[b].push((a, w));
        }
        let mut config = vec![lo; n];
        let mut energy = self.energy(&config).unwrap();
        let mut best = config.clone();
        let mut best_energy = energy;
        for step in 1u64..(1u64 << n) {
            let v = step.trailing_zeros() as usize;
            // flip v and apply the energy delta
            let old = config[v] as f64;
            let new = if config[v] == lo { hi } else { lo };
            let delta_val = new as f64 - old;
            let mut field = self.linear[v];
            for &(u, w) in &adj[v] {
                field += w * config[u] as f64;
            }
            energy += delta_val * field;
            config[v] = new;
            if energy < best_energy {
                best_energy = energy;
                best = config.clone();
            }
        }
        // recompute exactly to shed accumulated drift
        let exact = self.energy(&best).unwrap();
        (best, exact)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&QuadraticFile::from(self))?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: QuadraticFile = serde_json::from_str(text)?;
        let mut qm = QuadraticModel::new(file.domain, file.constraint_mode, file.lambda);
        qm.offset = file.offset;
        for (q, i, h) in file.linear {
            qm.add_linear((q, i), h);
        }
        for (q, i, q2, j, w) in file.quadratic {
            qm.add_quadratic((q, i), (q2, j), w);
        }
        Ok(qm)
    }

    pub fn write_model(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn read_model(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

impl From<&QuadraticModel> for QuadraticFile {
    fn from(qm: &QuadraticModel) -> Self {
        QuadraticFile {
            domain: qm.domain,
            constraint_mode: qm.constraint_mode,
            lambda: qm.penalty_lambda,
            offset: qm.offset,
            // every variable is listed so isolated ones survive round-trips
            linear: qm.linear_terms().map(|((q, i), h)| (q, i, h)).collect(),
            quadratic: qm
                .quadratic_terms()
                .map(|((q, i), (q2, j), w)| (q, i, q2, j, w))
                .collect(),
        }
    }
}
