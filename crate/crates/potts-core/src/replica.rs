//! Replica-symmetric saddle point of the fully connected glass under the
//! half-hot constraint, in the static approximation and the large-Q limit
//! where `theta = phi = 0` and the per-site balance `M = 0`.
//!
//! With `H(u, v) = J (sqrt(xi) u + sqrt(eta - xi) v) + J0 m` and
//! `Xi = sqrt(H^2 + Gamma^2)`, the self-consistency system reads
//!
//! ```text
//! m   = ∫Du  [∫Dv (H/Xi) sinh(beta Xi)] / [∫Dv cosh(beta Xi)]
//! xi  = ∫Du ([∫Dv (H/Xi) sinh(beta Xi)] / [∫Dv cosh(beta Xi)])^2
//! eta = ∫Du  [∫Dv (H^2/Xi^2 cosh(beta Xi) + Gamma^2/(beta Xi^3) sinh(beta Xi))]
//!            / [∫Dv cosh(beta Xi)]
//! ```
//!
//! At `Gamma = 0` the inner integrals collapse analytically
//! (`∫Dv sinh(b(a+cv)) / ∫Dv cosh(b(a+cv)) = tanh(b a)`) and the system
//! reduces to the classical Sherrington-Kirkpatrick equations, which
//! [`classical_sk_oracle`] solves through an independent code path as a
//! cross-check.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::format::sig12;
use crate::quadrature::GaussHermite;

/// Component count of the glass model; the saddle-point system itself is
/// the large-Q limit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Components {
    Finite(usize),
    Infinite,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GlassParams {
    /// Disorder standard-deviation scale.
    pub j: f64,
    /// Ferromagnetic mean of the couplings.
    pub j0: f64,
    /// Half-hot penalty strength; enters only through the per-site balance,
    /// which is pinned to zero here.
    pub lambda: f64,
    pub gamma: f64,
    /// Finite inverse temperature; the zero-temperature limit is approached
    /// with large values, kept finite because the equations carry `1/beta`.
    pub beta: f64,
    pub q: Components,
}

/// Replica-symmetric order parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RsOrderParams {
    /// Per-group magnetization (`m_plus = -m_minus` grouping).
    pub m: f64,
    /// Inter-replica overlap.
    pub xi: f64,
    /// Intra-replica (imaginary-time) overlap.
    pub eta: f64,
    /// Cross-component inter-replica overlap, `O(1/Q)`.
    pub theta: f64,
    /// Cross-component intra-replica overlap, `O(1/Q)`.
    pub phi: f64,
    /// Per-site component balance.
    pub site_balance: f64,
}

impl RsOrderParams {
    /// State in the large-Q symmetric sector (`theta = phi = M = 0`).
    pub fn symmetric(m: f64, xi: f64, eta: f64) -> Self {
        Self {
            m,
            xi,
            eta,
            theta: 0.0,
            phi: 0.0,
            site_balance: 0.0,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.xi >= 0.0 && self.eta >= self.xi) {
            return Err(Error::InvalidOverlaps {
                xi: self.xi,
                eta: self.eta,
            });
        }
        Ok(())
    }
}

/// Right-hand sides of the saddle-point system evaluated at `s`, using a
/// tensor-product grid for the `(u, v)` double integral. Hyperbolic
/// functions are rescaled per outer node so large `beta` cannot overflow.
///
/// Sums run over ± node pairs, which keeps the odd symmetry of the
/// magnetization integrand exact: a zero mean field stays exactly zero.
pub fn rs_rhs(p: &GlassParams, s: &RsOrderParams, grid: &GaussHermite) -> Result<RsOrderParams> {
    s.validate()?;
    if grid.order() < 8 {
        return Err(Error::QuadratureTooCoarse(grid.order()));
    }
    if !(p.beta.is_finite() && p.beta > 0.0) {
        return Err(Error::InvalidBeta(p.beta));
    }
    let su = s.xi.max(0.0).sqrt();
    let sv = (s.eta - s.xi).max(0.0).sqrt();
    let gamma2 = p.gamma * p.gamma;
    let base = p.j0 * s.m;
    let n = grid.order();
    let nodes = grid.nodes();
    let weights = grid.weights();

    // inner v-integrals at fixed u: (denominator, m-numerator, eta-numerator)
    let inner = |u: f64| -> (f64, f64, f64) {
        let h_at = |v: f64| p.j * (su * u + sv * v) + base;
        // scale factor: exp(c) cancels in every ratio below
        let mut c = f64::NEG_INFINITY;
        for &v in nodes {
            let h = h_at(v);
            c = c.max(p.beta * (h * h + gamma2).sqrt());
        }
        let term = |v: f64| -> (f64, f64, f64) {
            let h = h_at(v);
            let xi_v = (h * h + gamma2).sqrt();
            let r = p.beta * xi_v;
            let cosh = 0.5 * ((r - c).exp() + (-r - c).exp());
            let sinh = 0.5 * ((r - c).exp() - (-r - c).exp());
            let fm = if xi_v > 0.0 { h / xi_v * sinh } else { 0.0 };
            let fe = if p.gamma == 0.0 {
                // H^2/Xi^2 = 1 and the Gamma^2 term vanishes
                cosh
            } else {
                h * h / (xi_v * xi_v) * cosh + gamma2 / (p.beta * xi_v.powi(3)) * sinh
            };
            (cosh, fm, fe)
        };
        let mut denom = 0.0;
        let mut num_m = 0.0;
        let mut num_eta = 0.0;
        for t in 0..n / 2 {
            let (c1, m1, e1) = term(nodes[t]);
            let (c2, m2, e2) = term(nodes[n - 1 - t]);
            denom += weights[t] * c1 + weights[n - 1 - t] * c2;
            num_m += weights[t] * m1 + weights[n - 1 - t] * m2;
            num_eta += weights[t] * e1 + weights[n - 1 - t] * e2;
        }
        if n % 2 == 1 {
            let (cm, mm, em) = term(nodes[n / 2]);
            denom += weights[n / 2] * cm;
            num_m += weights[n / 2] * mm;
            num_eta += weights[n / 2] * em;
        }
        (denom, num_m, num_eta)
    };

    let mut ratio = vec![0.0; n];
    let mut eta_int = vec![0.0; n];
    for (a, &u) in nodes.iter().enumerate() {
        let (denom, num_m, num_eta) = inner(u);
        ratio[a] = num_m / denom;
        eta_int[a] = num_eta / denom;
    }
    let mut m_out = 0.0;
    let mut xi_out = 0.0;
    let mut eta_out = 0.0;
    let mut reduce = |k: usize| {
        m_out += weights[k] * ratio[k];
        xi_out += weights[k] * ratio[k] * ratio[k];
        eta_out += weights[k] * eta_int[k];
    };
    for k in 0..n / 2 {
        reduce(k);
        reduce(n - 1 - k);
    }
    if n % 2 == 1 {
        reduce(n / 2);
    }
    Ok(RsOrderParams::symmetric(m_out, xi_out, eta_out))
}

/// Outcome of the damped fixed-point iteration.
#[derive(Debug, Clone, Copy)]
pub struct RsSolve {
    pub state: RsOrderParams,
    pub converged: bool,
    pub iterations: usize,
    /// Set when convergence took more than 1000 iterations, which happens
    /// near phase boundaries where the map loses contraction.
    pub near_critical: bool,
}

/// Damped fixed-point iteration `s <- (1-d) s + d rhs(s)`. Reaching
/// `max_iter` returns the last state with `converged = false` rather than
/// an error.
pub fn solve_rs(
    p: &GlassParams,
    init: &RsOrderParams,
    damping: f64,
    tol: f64,
    max_iter: usize,
    grid: &GaussHermite,
) -> Result<RsSolve> {
    if !(damping > 0.0 && damping <= 1.0) {
        return Err(Error::InvalidDamping(damping));
    }
    init.validate()?;
    let mut state = *init;
    for iteration in 1..=max_iter {
        let next = rs_rhs(p, &state, grid)?;
        let delta = (next.m - state.m)
            .abs()
            .max((next.xi - state.xi).abs())
            .max((next.eta - state.eta).abs());
        state = RsOrderParams::symmetric(
            (1.0 - damping) * state.m + damping * next.m,
            (1.0 - damping) * state.xi + damping * next.xi,
            (1.0 - damping) * state.eta + damping * next.eta,
        );
        // keep the iterate inside the admissible cone against rounding
        state.xi = state.xi.max(0.0);
        state.eta = state.eta.max(state.xi);
        if delta < tol {
            return Ok(RsSolve {
                state,
                converged: true,
                iterations: iteration,
                near_critical: iteration > 1000,
            });
        }
    }
    Ok(RsSolve {
        state,
        converged: false,
        iterations: max_iter,
        near_critical: true,
    })
}

/// Classical SK replica-symmetric system
/// `m = ∫Du tanh(betaJ sqrt(q) u + betaJ0 m)`,
/// `q = ∫Du tanh^2(betaJ sqrt(q) u + betaJ0 m)`,
/// solved by damped iteration. Independent of [`rs_rhs`]: this is the
/// validation target for the `Gamma = 0` reduction, so it runs on a
/// finer grid than the paths it checks.
pub fn classical_sk_oracle(beta_j: f64, beta_j0: f64) -> (f64, f64) {
    let grid = GaussHermite::new(160);
    let mut m = 0.1f64;
    let mut q = 0.5f64;
    for _ in 0..200_000 {
        let mut m_next = 0.0;
        let mut q_next = 0.0;
        let sq = q.max(0.0).sqrt();
        for (&u, &w) in grid.nodes().iter().zip(grid.weights()) {
            let t = (beta_j * sq * u + beta_j0 * m).tanh();
            m_next += w * t;
            q_next += w * t * t;
        }
        let delta = (m_next - m).abs().max((q_next - q).abs());
        m = 0.5 * m + 0.5 * m_next;
        q = 0.5 * q + 0.5 * q_next;
        if delta < 1e-13 {
            break;
        }
    }
    (m, q)
}

/// Finite-Q scale of the cross-component overlaps:
/// `theta = -xi/Q`, `phi = -eta/Q`.
pub fn theta_phi_estimate(xi: f64, eta: f64, q: usize) -> Result<(f64, f64)> {
    if q < 2 {
        return Err(Error::ModelTooSmall {
            n_spins: 2,
            n_components: q,
        });
    }
    Ok((-xi / q as f64, -eta / q as f64))
}

/// One row of a phase-scan artifact.
#[derive(Debug, Clone, Copy)]
pub struct ScanPoint {
    pub beta: f64,
    pub gamma: f64,
    pub j0: f64,
    pub m: f64,
    pub xi: f64,
    pub eta: f64,
    pub converged: bool,
    pub iterations: usize,
}

/// CSV body for scan rows: `beta,gamma,J0,m,xi,eta,converged,iterations`.
pub fn scan_csv(rows: &[ScanPoint]) -> String {
    let mut out = String::from("beta,gamma,J0,m,xi,eta,converged,iterations\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            sig12(r.beta),
            sig12(r.gamma),
            sig12(r.j0),
            sig12(r.m),
            sig12(r.xi),
            sig12(r.eta),
            r.converged,
            r.iterations
        ));
    }
    out
}
