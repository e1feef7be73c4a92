//! Gauss-Hermite quadrature for the standard Gaussian measure
//! `Du = exp(-u^2/2) du / sqrt(2 pi)`.
//!
//! Nodes and weights come from the Golub-Welsch eigendecomposition of the
//! Jacobi matrix of the probabilists' Hermite polynomials (zero diagonal,
//! off-diagonal `sqrt(k)`). Weights are the squared first components of the
//! orthonormal eigenvectors, so they sum to one by construction.

use nalgebra::DMatrix;

/// Quadrature grid against the normalized Gaussian measure.
#[derive(Debug, Clone)]
pub struct GaussHermite {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    order: usize,
}

impl GaussHermite {
    pub fn new(order: usize) -> Self {
        assert!(order >= 1, "quadrature needs at least one node");
        if order == 1 {
            return Self {
                nodes: vec![0.0],
                weights: vec![1.0],
                order,
            };
        }
        let mut jacobi = DMatrix::zeros(order, order);
        for k in 1..order {
            let b = (k as f64).sqrt();
            jacobi[(k - 1, k)] = b;
            jacobi[(k, k - 1)] = b;
        }
        let eigen = jacobi.symmetric_eigen();
        let mut pairs: Vec<(f64, f64)> = (0..order)
            .map(|k| {
                let node = eigen.eigenvalues[k];
                let first = eigen.eigenvectors[(0, k)];
                (node, first * first)
            })
            .collect();
        pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        let mut nodes: Vec<f64> = pairs.iter().map(|p| p.0).collect();
        let mut weights: Vec<f64> = pairs.iter().map(|p| p.1).collect();
        // enforce the exact ± symmetry of the rule so odd integrands cancel
        // exactly under paired summation
        for k in 0..order / 2 {
            let k2 = order - 1 - k;
            let x = 0.5 * (nodes[k2] - nodes[k]);
            nodes[k] = -x;
            nodes[k2] = x;
            let w = 0.5 * (weights[k] + weights[k2]);
            weights[k] = w;
            weights[k2] = w;
        }
        if order % 2 == 1 {
            nodes[order / 2] = 0.0;
        }
        Self {
            nodes,
            weights,
            order,
        }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `∫ f(u) Du` on the grid.
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}
