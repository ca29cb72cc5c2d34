use super::embedding::EmbeddingMaps;
use crate::fem::SubdomainSystem;

/// The weighted average `E: W → U`, weights proportional to the diagonal of
/// the subdomain matrices.
#[derive(Debug, Clone)]
pub struct AveragingOperator {
    /// Weight of every local dof, per subdomain.
    pub weights: Vec<Vec<f64>>,
}

pub fn build_averaging(systems: &[SubdomainSystem], maps: &EmbeddingMaps) -> AveragingOperator {
    let diagonals: Vec<Vec<f64>> = systems.iter().map(|s| s.matrix.diagonal()).collect();
    let weights = systems
        .iter()
        .map(|sys| {
            sys.dofs
                .iter()
                .enumerate()
                .map(|(l, &g)| {
                    let copies = &maps.copies[g];
                    if copies.len() == 1 {
                        return 1.0;
                    }
                    let total: f64 = copies.iter().map(|&(s, k)| diagonals[s][k]).sum();
                    if total > 0.0 {
                        diagonals[sys.id][l] / total
                    } else {
                        1.0 / copies.len() as f64
                    }
                })
                .collect()
        })
        .collect();
    AveragingOperator { weights }
}

impl AveragingOperator {
    /// `E w` as a global vector.
    pub fn average(&self, w: &[Vec<f64>], systems: &[SubdomainSystem], global_dim: usize) -> Vec<f64> {
        let mut u = vec![0.0; global_dim];
        for (sys, (local, weights)) in systems.iter().zip(w.iter().zip(&self.weights)) {
            for ((&g, &v), &a) in sys.dofs.iter().zip(local).zip(weights) {
                u[g] += a * v;
            }
        }
        u
    }

    /// `Eᵀ u`: weighted copies of a global vector.
    pub fn distribute(&self, u: &[f64], systems: &[SubdomainSystem]) -> Vec<Vec<f64>> {
        systems
            .iter()
            .zip(&self.weights)
            .map(|(sys, weights)| sys.dofs.iter().zip(weights).map(|(&g, &a)| a * u[g]).collect())
            .collect()
    }

    /// `E` restricted to interface values: local interface vectors to a
    /// vector over `Γ`.
    pub fn average_interface(&self, local: &[Vec<f64>], systems: &[SubdomainSystem], maps: &EmbeddingMaps) -> Vec<f64> {
        let mut out = vec![0.0; maps.interface_dim()];
        for (s, sys) in systems.iter().enumerate() {
            for (k, &l) in sys.interface.iter().enumerate() {
                out[maps.local_interface_to_gamma[s][k]] += self.weights[s][l] * local[s][k];
            }
        }
        out
    }

    /// `Eᵀ` restricted to interface values.
    pub fn distribute_interface(&self, r: &[f64], systems: &[SubdomainSystem], maps: &EmbeddingMaps) -> Vec<Vec<f64>> {
        systems
            .iter()
            .enumerate()
            .map(|(s, sys)| {
                sys.interface
                    .iter()
                    .enumerate()
                    .map(|(k, &l)| self.weights[s][l] * r[maps.local_interface_to_gamma[s][k]])
                    .collect()
            })
            .collect()
    }
}
