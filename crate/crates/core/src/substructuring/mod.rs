mod averaging;
mod embedding;
mod globs;
mod harmonic;

pub use averaging::{build_averaging, AveragingOperator};
pub use embedding::{assemble_corner_operator, build_embeddings, EmbeddingMaps};
pub use globs::{classify_globs, select_corners, spans_plane, Glob, GlobKind, GlobSet};
pub use harmonic::{HarmonicExtension, LocalSchur};

use rayon::prelude::*;

use crate::error::Result;
use crate::fem::Problem;

/// Everything derived from the decomposition that does not depend on the
/// choice of weak constraints.
#[derive(Debug, Clone)]
pub struct Substructuring {
    /// Globs by sharing set only, before corner promotion.
    pub classification: GlobSet,
    pub globs: GlobSet,
    pub maps: EmbeddingMaps,
    pub harmonic: HarmonicExtension,
    pub averaging: AveragingOperator,
}

impl Substructuring {
    pub fn new(problem: &Problem) -> Result<Self> {
        let mesh = &problem.mesh;
        let d = mesh.dofs_per_node();
        let classification = classify_globs(mesh, &problem.decomposition);
        let fixed_nodes: Vec<bool> = (0..mesh.node_count())
            .map(|v| (0..d).all(|c| problem.fixed[v * d + c]))
            .collect();
        let globs = select_corners(&classification, mesh, mesh.physics, &fixed_nodes)?;
        let maps = build_embeddings(&problem.systems, &globs, mesh.dof_count(), d);
        let harmonic = HarmonicExtension::new(&problem.systems)?;
        let averaging = build_averaging(&problem.systems, &maps);
        Ok(Substructuring {
            classification,
            globs,
            maps,
            harmonic,
            averaging,
        })
    }

    pub fn interface_dim(&self) -> usize {
        self.maps.interface_dim()
    }

    /// Subdomain interface values of a vector over `Γ`.
    pub fn gather_interface(&self, x: &[f64]) -> Vec<Vec<f64>> {
        self.maps
            .local_interface_to_gamma
            .iter()
            .map(|map| map.iter().map(|&k| x[k]).collect())
            .collect()
    }

    /// Sums subdomain interface vectors into a vector over `Γ`.
    pub fn scatter_interface(&self, local: &[Vec<f64>]) -> Vec<f64> {
        let mut out = vec![0.0; self.interface_dim()];
        for (map, v) in self.maps.local_interface_to_gamma.iter().zip(local) {
            for (&k, &x) in map.iter().zip(v) {
                out[k] += x;
            }
        }
        out
    }

    /// The assembled Schur complement `Σ R_iᵀ S_i R_i` applied to `x`.
    pub fn schur_apply(&self, x: &[f64]) -> Vec<f64> {
        let local = self.gather_interface(x);
        let products: Vec<Vec<f64>> = self
            .harmonic
            .locals
            .par_iter()
            .zip(&local)
            .map(|(loc, v)| loc.schur(v))
            .collect();
        self.scatter_interface(&products)
    }
}
