//! Quadratic encodings of Potts instances.
//!
//! Three encodings are provided, all with the penalty expanded symbolically
//! into linear/quadratic/offset terms so stored-term energies match the
//! source formulas:
//!
//! * one-hot over binary variables:
//!   `-s * sum_{i<j} J_ij sum_q x_qi x_qj + (2λ/Q) sum_i (sum_q x_qi - 1)^2`
//! * one-hot over spins: the cost term replaces `x` by `sigma` and rescales
//!   by 1/4; the penalty is rewritten via `x = (1 - sigma)/2`, which
//!   generates a longitudinal field of strength `λ(Q-2)/Q`
//! * half-hot over spins: same cost term plus `(λ/2Q) sum_i (sum_q s_qi)^2`,
//!   which generates no longitudinal field

use crate::error::{Error, Result};
use crate::model::PottsModel;
use crate::quadratic::{ConstraintMode, Domain, QuadraticModel};

/// One-hot encoding over binary variables (`Q*N` of them).
pub fn encode_one_hot(model: &PottsModel, lambda: f64) -> QuadraticModel {
    let n = model.n_spins();
    let q = model.n_components();
    let scale = model.coupling_scale();
    let mut qm = QuadraticModel::new(Domain::Binary, ConstraintMode::OneHot, lambda);
    register_all(&mut qm, n, q);
    for i in 0..n {
        for j in (i + 1)..n {
            let jij = model.coupling(i, j);
            if jij == 0.0 {
                continue;
            }
            for c in 0..q {
                qm.add_quadratic((c, i), (c, j), -scale * jij);
            }
        }
    }
    // (2λ/Q)(sum_q x - 1)^2 = (2λ/Q)[1 - sum_q x + 2 sum_{q<q'} x x']  (x^2 = x)
    let p = 2.0 * lambda / q as f64;
    for i in 0..n {
        qm.add_offset(p);
        for c in 0..q {
            qm.add_linear((c, i), -p);
            for c2 in (c + 1)..q {
                qm.add_quadratic((c, i), (c2, i), 2.0 * p);
            }
        }
    }
    qm
}

/// One-hot encoding with the cost term written in spin variables.
pub fn encode_one_hot_ising(model: &PottsModel, lambda: f64) -> QuadraticModel {
    let n = model.n_spins();
    let q = model.n_components();
    let qf = q as f64;
    let scale = model.coupling_scale();
    let mut qm = QuadraticModel::new(Domain::Spin, ConstraintMode::OneHot, lambda);
    register_all(&mut qm, n, q);
    for i in 0..n {
        for j in (i + 1)..n {
            let jij = model.coupling(i, j);
            if jij == 0.0 {
                continue;
            }
            for c in 0..q {
                qm.add_quadratic((c, i), (c, j), -scale / 4.0 * jij);
            }
        }
    }
    // (2λ/Q)(sum_q x - 1)^2 with x = (1-s)/2 expands to
    //   (λ/2Q)(sum_q s)^2 - λ(Q-2)/Q sum_q s + λ(Q-2)^2/(2Q)
    // and (sum_q s)^2 = Q + 2 sum_{q<q'} s s'.
    for i in 0..n {
        qm.add_offset(lambda / 2.0 + lambda * (qf - 2.0).powi(2) / (2.0 * qf));
        for c in 0..q {
            qm.add_linear((c, i), -lambda * (qf - 2.0) / qf);
            for c2 in (c + 1)..q {
                qm.add_quadratic((c, i), (c2, i), lambda / qf);
            }
        }
    }
    qm
}

/// Half-hot encoding over spins. Requires even `Q`; generates no linear
/// terms. Odd `Q` is rejected rather than padded (pad manually with a
/// dummy zero-coupled component if needed).
pub fn encode_half_hot_ising(model: &PottsModel, lambda: f64) -> Result<QuadraticModel> {
    let q = model.n_components();
    let sets: Vec<Vec<usize>> = (0..model.n_spins()).map(|_| (0..q).collect()).collect();
    encode_half_hot_restricted(model, &sets, lambda)
}

/// Half-hot encoding over per-spin surviving component sets, as used by the
/// iterative driver's later rounds. Variables are `(k, i)` with `k` a local
/// index into `surviving[i]` (sorted); two variables couple with `-s/4 J_ij`
/// exactly when they refer to the same original component.
pub fn encode_half_hot_restricted(
    model: &PottsModel,
    surviving: &[Vec<usize>],
    lambda: f64,
) -> Result<QuadraticModel> {
    let n = model.n_spins();
    assert_eq!(surviving.len(), n, "one surviving set per spin");
    let q = surviving.first().map_or(0, Vec::len);
    for (spin, set) in surviving.iter().enumerate() {
        if set.len() != q {
            return Err(Error::UnevenSelection {
                spin,
                size: set.len(),
                expected: q,
            });
        }
    }
    if !q.is_multiple_of(2) {
        return Err(Error::OddComponents(q));
    }
    let qf = q as f64;
    let scale = model.coupling_scale();
    let mut qm = QuadraticModel::new(Domain::Spin, ConstraintMode::HalfHot, lambda);
    register_all(&mut qm, n, q);
    for i in 0..n {
        for j in (i + 1)..n {
            let jij = model.coupling(i, j);
            if jij == 0.0 {
                continue;
            }
            for (k, &orig) in surviving[i].iter().enumerate() {
                // couple only shared original components
                if let Ok(l) = surviving[j].binary_search(&orig) {
                    qm.add_quadratic((k, i), (l, j), -scale / 4.0 * jij);
                }
            }
        }
    }
    // (λ/2Q)(sum_q s)^2 = λ/2 + (λ/Q) sum_{q<q'} s s' per spin
    for i in 0..n {
        qm.add_offset(lambda / 2.0);
        for c in 0..q {
            for c2 in (c + 1)..q {
                qm.add_quadratic((c, i), (c2, i), lambda / qf);
            }
        }
    }
    // squared-magnetization convention: constant self-interaction part
    qm.add_offset(-scale / 8.0 * qf * n as f64 * model.self_coupling());
    Ok(qm)
}

fn register_all(qm: &mut QuadraticModel, n: usize, q: usize) {
    for c in 0..q {
        for i in 0..n {
            qm.add_variable((c, i));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadratic::Var;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    /// Binary config selecting component `s[i]` for each spin.
    fn one_hot_config(qm: &QuadraticModel, s: &[usize]) -> Vec<i8> {
        qm.variables()
            .iter()
            .map(|&(c, i)| {
                let selected = s[i] == c;
                match qm.domain() {
                    Domain::Binary => selected as i8,
                    Domain::Spin => {
                        if selected {
                            -1
                        } else {
                            1
                        }
                    }
                }
            })
            .collect()
    }

    #[test]
    fn one_hot_binary_matches_direct_evaluation() {
        let model = PottsModel::from_pairs(2, 3, &[(0, 1, 1.0)]).unwrap();
        let qm = encode_one_hot(&model, 1.0);
        assert_eq!(qm.num_variables(), 6);
        let aligned = qm.energy(&one_hot_config(&qm, &[1, 1])).unwrap();
        let misaligned = qm.energy(&one_hot_config(&qm, &[0, 2])).unwrap();
        assert!((aligned - -2.0).abs() < 1e-12);
        assert!(misaligned.abs() < 1e-12);
    }

    #[test]
    fn one_hot_penalty_vanishes_on_feasible_configs() {
        let model = PottsModel::from_pairs(3, 4, &[(0, 1, 0.7), (1, 2, -0.3)]).unwrap();
        let qm = encode_one_hot(&model, 2.5);
        let mut rng = StdRng::seed_from_u64(3);
        for _ in 0..20 {
            let s: Vec<usize> = (0..3).map(|_| rng.gen_range(0..4)).collect();
            let stored = qm.energy(&one_hot_config(&qm, &s)).unwrap();
            let formula = model.potts_energy(&s).unwrap(); // zero penalty
            assert!((stored - formula).abs() < 1e-12);
        }
    }

    #[test]
    fn one_hot_ising_frozen_values() {
        let model = PottsModel::from_pairs(2, 3, &[(0, 1, 1.0)]).unwrap();
        let qm = encode_one_hot_ising(&model, 1.0);
        let aligned = qm.energy(&one_hot_config(&qm, &[0, 0])).unwrap();
        let misaligned = qm.energy(&one_hot_config(&qm, &[0, 1])).unwrap();
        assert!((aligned - -1.5).abs() < 1e-12);
        assert!((misaligned - 0.5).abs() < 1e-12);
        // the binary/spin energy difference agrees pairwise
        assert!(((aligned - misaligned) - -2.0).abs() < 1e-12);
    }

    #[test]
    fn local_energy_offset_is_constant_per_edge() {
        // enumerate all Q^2 feasible states of one edge
        for q in [2usize, 3, 5, 8] {
            let model = PottsModel::from_pairs(2, q, &[(0, 1, 0.85)]).unwrap();
            let binary = encode_one_hot(&model, 1.0);
            let ising = encode_one_hot_ising(&model, 1.0);
            let mut offsets = Vec::new();
            for a in 0..q {
                for b in 0..q {
                    let e2 = binary.energy(&one_hot_config(&binary, &[a, b])).unwrap();
                    let e4 = ising.energy(&one_hot_config(&ising, &[a, b])).unwrap();
                    offsets.push(e2 - e4);
                }
            }
            for d in &offsets {
                assert!((d - offsets[0]).abs() < 1e-12, "offset varies for Q={q}");
            }
        }
    }

    #[test]
    fn one_hot_argmin_sets_agree_under_enumeration() {
        let mut rng = StdRng::seed_from_u64(11);
        for _ in 0..5 {
            let n = rng.gen_range(2..=4);
            let q = rng.gen_range(2..=4);
            let mut pairs = Vec::new();
            for i in 0..n {
                for j in (i + 1)..n {
                    pairs.push((i, j, rng.gen_range(-1.0..1.0)));
                }
            }
            let model = PottsModel::from_pairs(n, q, &pairs).unwrap();
            let binary = encode_one_hot(&model, 1.0);
            let ising = encode_one_hot_ising(&model, 1.0);
            let mut e2 = Vec::new();
            let mut e4 = Vec::new();
            let mut s = vec![0usize; n];
            loop {
                e2.push(binary.energy(&one_hot_config(&binary, &s)).unwrap());
                e4.push(ising.energy(&one_hot_config(&ising, &s)).unwrap());
                let mut carry = 0;
                while carry < n {
                    s[carry] += 1;
                    if s[carry] < q {
                        break;
                    }
                    s[carry] = 0;
                    carry += 1;
                }
                if carry == n {
                    break;
                }
            }
            let min2 = e2.iter().cloned().fold(f64::INFINITY, f64::min);
            let min4 = e4.iter().cloned().fold(f64::INFINITY, f64::min);
            let argmin2: Vec<usize> = (0..e2.len()).filter(|&k| e2[k] - min2 < 1e-9).collect();
            let argmin4: Vec<usize> = (0..e4.len()).filter(|&k| e4[k] - min4 < 1e-9).collect();
            assert_eq!(argmin2, argmin4);
        }
    }

    #[test]
    fn half_hot_generates_no_linear_terms() {
        let model = PottsModel::from_pairs(3, 4, &[(0, 1, 1.0), (1, 2, -0.5)]).unwrap();
        let qm = encode_half_hot_ising(&model, 1.3).unwrap();
        assert!(qm.linear_terms().all(|(_, h)| h == 0.0));
    }

    #[test]
    fn half_hot_rejects_odd_q() {
        let model = PottsModel::from_pairs(2, 3, &[(0, 1, 1.0)]).unwrap();
        assert!(matches!(
            encode_half_hot_ising(&model, 1.0),
            Err(Error::OddComponents(3))
        ));
    }

    #[test]
    fn half_hot_penalty_zero_iff_balanced_column() {
        let model = PottsModel::from_pairs(2, 4, &[]).unwrap();
        let qm = encode_half_hot_ising(&model, 1.0).unwrap();
        // balanced columns: sum sigma = 0 per spin
        let balanced: Vec<i8> = qm
            .variables()
            .iter()
            .map(|&(c, _)| if c < 2 { -1 } else { 1 })
            .collect();
        assert!(qm.energy(&balanced).unwrap().abs() < 1e-12);
        // unbalanced: one spin has three up
        let unbalanced: Vec<i8> = qm
            .variables()
            .iter()
            .map(|&(c, i)| if i == 0 && c < 3 { 1 } else { -1 })
            .collect();
        assert!(qm.energy(&unbalanced).unwrap() > 0.0);
    }

    #[test]
    fn half_hot_ferromagnet_closed_form() {
        // N=8, Q=2, J=1: rows all +1 / all -1 give -J*N under the
        // squared-magnetization convention
        let model = PottsModel::ferromagnet(8, 2, 1.0).unwrap();
        let qm = encode_half_hot_ising(&model, 1.0).unwrap();
        let config: Vec<i8> = qm
            .variables()
            .iter()
            .map(|&(c, _)| if c == 0 { 1 } else { -1 })
            .collect();
        assert!((qm.energy(&config).unwrap() - -8.0).abs() < 1e-12);
    }

    #[test]
    fn spin_binary_round_trip_on_encodings() {
        let model = PottsModel::from_pairs(3, 3, &[(0, 1, 0.4), (0, 2, -1.1)]).unwrap();
        let qm = encode_one_hot_ising(&model, 1.0);
        let back = qm.to_binary().to_spin();
        let mut rng = StdRng::seed_from_u64(5);
        for _ in 0..30 {
            let config: Vec<i8> = (0..qm.num_variables())
                .map(|_| if rng.gen::<bool>() { 1 } else { -1 })
                .collect();
            let a = qm.energy(&config).unwrap();
            let b = back.energy(&config).unwrap();
            assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
        }
        let _vars: Vec<Var> = qm.variables().to_vec();
    }
}
