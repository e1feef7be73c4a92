//! Single-spin-flip Metropolis annealing and half-hot feasibility repair.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::quadratic::{Domain, QuadraticModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScheduleKind {
    Geometric,
}

/// Geometric temperature ladder from `t_start` down to `t_end`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnnealSchedule {
    pub t_start: f64,
    pub t_end: f64,
    pub sweeps: usize,
    /// Moves per sweep; defaults to the variable count.
    pub moves_per_sweep: Option<usize>,
    pub kind: ScheduleKind,
}

impl AnnealSchedule {
    pub fn new(t_start: f64, t_end: f64, sweeps: usize) -> Result<Self> {
        if !(t_start >= t_end && t_end > 0.0) || sweeps == 0 {
            return Err(Error::InvalidSchedule);
        }
        Ok(Self {
            t_start,
            t_end,
            sweeps,
            moves_per_sweep: None,
            kind: ScheduleKind::Geometric,
        })
    }

    /// Scale-aware default: `t_start = 2 max|term|`,
    /// `t_end = 0.01 min nonzero |term|`, `sweeps = ceil(1000 sqrt(vars))`.
    pub fn default_for(qm: &QuadraticModel) -> Self {
        let hottest = qm.max_abs_term();
        let t_start = if hottest > 0.0 { 2.0 * hottest } else { 1.0 };
        let t_end = qm
            .min_nonzero_abs_term()
            .map(|t| 0.01 * t)
            .unwrap_or(t_start * 1e-3)
            .min(t_start);
        let sweeps = (1e3 * (qm.num_variables() as f64).sqrt()).ceil() as usize;
        Self {
            t_start,
            t_end,
            sweeps: sweeps.max(1),
            moves_per_sweep: None,
            kind: ScheduleKind::Geometric,
        }
    }

    fn temperature(&self, sweep: usize) -> f64 {
        if self.sweeps <= 1 {
            return self.t_start;
        }
        let ratio = self.t_end / self.t_start;
        self.t_start * ratio.powf(sweep as f64 / (self.sweeps - 1) as f64)
    }
}

/// Best configuration seen by a single annealing run.
#[derive(Debug, Clone)]
pub struct SaResult {
    pub best_config: Vec<i8>,
    /// Exact stored-term energy of `best_config`.
    pub best_energy: f64,
    pub seed: u64,
    /// Best energy after each sweep, when tracing was requested.
    pub energy_trace: Option<Vec<f64>>,
}

/// Per-variable linear field and neighbor list for O(degree) flip deltas.
pub(crate) struct Adjacency {
    pub linear: Vec<f64>,
    pub neighbors: Vec<Vec<(usize, f64)>>,
}

impl Adjacency {
    pub fn build(qm: &QuadraticModel) -> Self {
        let n = qm.num_variables();
        let mut linear = vec![0.0; n];
        for (pos, (_, h)) in qm.linear_terms().enumerate() {
            linear[pos] = h;
        }
        let mut neighbors: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for (u, v, w) in qm.quadratic_terms() {
            let a = qm.var_position(u).unwrap();
            let b = qm.var_position(v).unwrap();
            neighbors[a].push((b, w));
            neighbors[b].push((a, w));
        }
        Self { linear, neighbors }
    }

    /// Energy change of flipping variable `v` in `config`.
    pub fn flip_delta(&self, domain: Domain, config: &[i8], v: usize) -> f64 {
        let mut field = self.linear[v];
        for &(u, w) in &self.neighbors[v] {
            field += w * config[u] as f64;
        }
        let old = config[v] as f64;
        let new = flipped(domain, config[v]) as f64;
        (new - old) * field
    }
}

pub(crate) fn flipped(domain: Domain, value: i8) -> i8 {
    match domain {
        Domain::Binary => 1 - value,
        Domain::Spin => -value,
    }
}

pub fn simulated_anneal(qm: &QuadraticModel, sched: &AnnealSchedule, seed: u64) -> SaResult {
    anneal_impl(qm, sched, seed, false)
}

/// Like [`simulated_anneal`] but records the per-sweep best energy.
pub fn simulated_anneal_traced(qm: &QuadraticModel, sched: &AnnealSchedule, seed: u64) -> SaResult {
    anneal_impl(qm, sched, seed, true)
}

fn anneal_impl(qm: &QuadraticModel, sched: &AnnealSchedule, seed: u64, trace: bool) -> SaResult {
    let n = qm.num_variables();
    if n == 0 {
        return SaResult {
            best_config: Vec::new(),
            best_energy: qm.offset(),
            seed,
            energy_trace: trace.then(Vec::new),
        };
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let adjacency = Adjacency::build(qm);
    let mut config: Vec<i8> = (0..n)
        .map(|_| match qm.domain() {
            Domain::Binary => rng.gen_range(0..=1),
            Domain::Spin => {
                if rng.gen::<bool>() {
                    1
                } else {
                    -1
                }
            }
        })
        .collect();
    let mut energy = qm.energy(&config).unwrap();
    let mut best = config.clone();
    let mut best_energy = energy;
    let mut history = trace.then(|| Vec::with_capacity(sched.sweeps));

    let moves = sched.moves_per_sweep.unwrap_or(n);
    for sweep in 0..sched.sweeps {
        let temperature = sched.temperature(sweep);
        for _ in 0..moves {
            let v = rng.gen_range(0..n);
            let delta = adjacency.flip_delta(qm.domain(), &config, v);
            let accept = delta <= 0.0 || rng.gen::<f64>() < (-delta / temperature).exp();
            if accept {
                config[v] = flipped(qm.domain(), config[v]);
                energy += delta;
                if energy < best_energy {
                    best_energy = energy;
                    best.copy_from_slice(&config);
                }
            }
        }
        if let Some(h) = history.as_mut() {
            h.push(best_energy);
        }
    }

    // shed incremental drift
    let exact = qm.energy(&best).unwrap();
    SaResult {
        best_config: best,
        best_energy: exact,
        seed,
        energy_trace: history,
    }
}

/// Restore the half-hot count `Q/2` per spin by greedily flipping the
/// variables with the smallest marginal energy increase. Ties keep the
/// lexicographically smallest selected set: surplus selections are dropped
/// from the highest component down, missing ones added from the lowest up.
/// Feasible inputs are returned unchanged.
pub fn repair_half_hot(qm: &QuadraticModel, config: &[i8]) -> Result<Vec<i8>> {
    if config.len() != qm.num_variables() {
        return Err(Error::ConfigSizeMismatch {
            expected: qm.num_variables(),
            got: config.len(),
        });
    }
    let n_spins = qm.variables().iter().map(|&(_, i)| i + 1).max().unwrap_or(0);
    // positions grouped per spin, sorted by component
    let mut groups: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n_spins];
    for (pos, &(component, spin)) in qm.variables().iter().enumerate() {
        groups[spin].push((component, pos));
    }
    let q = groups.first().map_or(0, Vec::len);
    for (spin, g) in groups.iter().enumerate() {
        if g.len() != q {
            return Err(Error::UnevenSelection {
                spin,
                size: g.len(),
                expected: q,
            });
        }
    }
    if !q.is_multiple_of(2) {
        return Err(Error::OddComponents(q));
    }
    let target = q / 2;

    let adjacency = Adjacency::build(qm);
    let selected = |value: i8| match qm.domain() {
        Domain::Binary => value == 1,
        Domain::Spin => value == -1,
    };
    let mut out = config.to_vec();
    for group in &groups {
        loop {
            let count = group.iter().filter(|&&(_, p)| selected(out[p])).count();
            if count == target {
                break;
            }
            let surplus = count > target;
            // candidates that move the count toward the target
            let mut choice: Option<(f64, usize, usize)> = None;
            for &(component, pos) in group {
                if selected(out[pos]) != surplus {
                    continue;
                }
                let delta = adjacency.flip_delta(qm.domain(), &out, pos);
                let better = match choice {
                    None => true,
                    Some((best_delta, best_component, _)) => {
                        delta < best_delta - 1e-12
                            || (delta <= best_delta + 1e-12 && {
                                // keep low components selected
                                if surplus {
                                    component > best_component
                                } else {
                                    component < best_component
                                }
                            })
                    }
                };
                if better {
                    choice = Some((delta, component, pos));
                }
            }
            let (_, _, pos) = choice.expect("candidate exists while count is off target");
            out[pos] = flipped(qm.domain(), out[pos]);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encode::encode_half_hot_ising;
    use crate::model::PottsModel;
    use crate::quadratic::ConstraintMode;
    use rand::rngs::StdRng;

    #[test]
    fn seeded_runs_are_identical() {
        let model = PottsModel::ferromagnet(4, 2, 1.0).unwrap();
        let qm = encode_half_hot_ising(&model, 1.0).unwrap();
        let sched = AnnealSchedule::new(2.0, 0.01, 200).unwrap();
        let a = simulated_anneal(&qm, &sched, 42);
        let b = simulated_anneal(&qm, &sched, 42);
        assert_eq!(a.best_config, b.best_config);
        assert_eq!(a.best_energy, b.best_energy);
    }

    #[test]
    fn all_zero_model_returns_offset() {
        let mut qm = QuadraticModel::new(Domain::Spin, ConstraintMode::None, 0.0);
        for v in 0..4 {
            qm.add_variable((v, 0));
        }
        qm.add_offset(2.5);
        let sched = AnnealSchedule::new(1.0, 0.1, 10).unwrap();
        let result = simulated_anneal(&qm, &sched, 7);
        assert_eq!(result.best_energy, 2.5);
    }

    #[test]
    fn ferromagnet_ground_state_hit_rate() {
        // N=8, Q=2, J=lambda=1: exhaustive ground energy is -8
        let model = PottsModel::ferromagnet(8, 2, 1.0).unwrap();
        let qm = encode_half_hot_ising(&model, 1.0).unwrap();
        let sched = AnnealSchedule::new(2.0, 0.01, 2000).unwrap();
        let mut hits = 0;
        for seed in 0..100 {
            let result = simulated_anneal(&qm, &sched, seed);
            if (result.best_energy - -8.0).abs() < 1e-9 {
                hits += 1;
            }
        }
        assert!(hits >= 95, "ground state found in only {hits}/100 runs");
    }

    #[test]
    fn best_energy_is_exact_model_energy() {
        let model = PottsModel::ferromagnet(5, 2, 0.7).unwrap();
        let qm = encode_half_hot_ising(&model, 1.0).unwrap();
        let sched = AnnealSchedule::default_for(&qm);
        let result = simulated_anneal(&qm, &AnnealSchedule { sweeps: 50, ..sched }, 3);
        assert_eq!(result.best_energy, qm.energy(&result.best_config).unwrap());
    }

    #[test]
    fn repair_keeps_feasible_configs_unchanged() {
        let model = PottsModel::ferromagnet(3, 4, 1.0).unwrap();
        let qm = encode_half_hot_ising(&model, 1.0).unwrap();
        let config: Vec<i8> = qm
            .variables()
            .iter()
            .map(|&(c, _)| if c < 2 { -1 } else { 1 })
            .collect();
        assert_eq!(repair_half_hot(&qm, &config).unwrap(), config);
    }

    #[test]
    fn repair_tie_break_keeps_lowest_components() {
        // one spin, Q=4, zero couplings: all-selected must drop {2,3}
        let mut qm = QuadraticModel::new(Domain::Binary, ConstraintMode::HalfHot, 0.0);
        for c in 0..4 {
            qm.add_variable((c, 0));
        }
        let repaired = repair_half_hot(&qm, &[1, 1, 1, 1]).unwrap();
        assert_eq!(repaired, vec![1, 1, 0, 0]);
        // all-unselected must add {0,1}
        let repaired = repair_half_hot(&qm, &[0, 0, 0, 0]).unwrap();
        assert_eq!(repaired, vec![1, 1, 0, 0]);
    }

    #[test]
    fn repair_always_restores_the_count() {
        use rand::Rng;
        let model = PottsModel::ferromagnet(4, 4, 1.0).unwrap();
        let qm = encode_half_hot_ising(&model, 1.0).unwrap();
        let mut rng = StdRng::seed_from_u64(99);
        for _ in 0..1000 {
            let config: Vec<i8> = (0..qm.num_variables())
                .map(|_| if rng.gen::<bool>() { 1 } else { -1 })
                .collect();
            let repaired = repair_half_hot(&qm, &config).unwrap();
            let decoded = qm.decode_assignment(&repaired).unwrap();
            assert!(decoded.feasible, "repair left an infeasible config");
        }
    }

    #[test]
    fn repair_rejects_odd_component_blocks() {
        let mut qm = QuadraticModel::new(Domain::Binary, ConstraintMode::HalfHot, 0.0);
        for c in 0..3 {
            qm.add_variable((c, 0));
        }
        assert!(matches!(
            repair_half_hot(&qm, &[1, 1, 1]),
            Err(Error::OddComponents(3))
        ));
    }
}
