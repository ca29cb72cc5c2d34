use super::globs::GlobSet;
use crate::fem::SubdomainSystem;
use crate::linalg::{SparseSymMatrix, SymAssembler};

/// Index maps for `R` (global dofs to subdomain copies) and `R^c` (the
/// partially assembled space `W^c` to subdomain copies). In `W^c`, every
/// subdomain's non-corner dofs are numbered contiguously in subdomain order
/// and the shared corner dofs come last.
#[derive(Debug, Clone)]
pub struct EmbeddingMaps {
    pub dofs_per_node: usize,
    pub global_dim: usize,
    pub wc_dim: usize,
    /// First `W^c` index of the corner block.
    pub corner_offset: usize,
    /// `W^c` index of every local dof, per subdomain.
    pub local_to_wc: Vec<Vec<usize>>,
    /// `(subdomain, local dof)` copies of every global dof.
    pub copies: Vec<Vec<(usize, usize)>>,
    /// Owning `(subdomain, local dof)` pairs of every `W^c` dof.
    pub wc_copies: Vec<Vec<(usize, usize)>>,
    /// Sorted global dofs on the interface.
    pub interface_dofs: Vec<usize>,
    /// Position in `interface_dofs` of every subdomain interface dof.
    pub local_interface_to_gamma: Vec<Vec<usize>>,
}

pub fn build_embeddings(systems: &[SubdomainSystem], globs: &GlobSet, global_dim: usize, d: usize) -> EmbeddingMaps {
    let mut copies = vec![Vec::new(); global_dim];
    for sys in systems {
        for (l, &g) in sys.dofs.iter().enumerate() {
            copies[g].push((sys.id, l));
        }
    }
    let mut local_to_wc: Vec<Vec<usize>> = systems.iter().map(|s| vec![usize::MAX; s.dim()]).collect();
    let mut next = 0;
    for sys in systems {
        for (l, &g) in sys.dofs.iter().enumerate() {
            if !globs.is_corner(g / d) {
                local_to_wc[sys.id][l] = next;
                next += 1;
            }
        }
    }
    let corner_offset = next;
    for v in globs.corner_nodes() {
        for c in 0..d {
            let g = v * d + c;
            for &(s, l) in &copies[g] {
                local_to_wc[s][l] = next;
            }
            next += 1;
        }
    }
    let wc_dim = next;
    let mut wc_copies = vec![Vec::new(); wc_dim];
    for sys in systems {
        for l in 0..sys.dim() {
            wc_copies[local_to_wc[sys.id][l]].push((sys.id, l));
        }
    }

    let interface_dofs: Vec<usize> = (0..global_dim).filter(|&g| copies[g].len() > 1).collect();
    let local_interface_to_gamma = systems
        .iter()
        .map(|sys| {
            sys.interface
                .iter()
                .map(|&l| interface_dofs.binary_search(&sys.dofs[l]).expect("interface dof"))
                .collect()
        })
        .collect();

    EmbeddingMaps {
        dofs_per_node: d,
        global_dim,
        wc_dim,
        corner_offset,
        local_to_wc,
        copies,
        wc_copies,
        interface_dofs,
        local_interface_to_gamma,
    }
}

impl EmbeddingMaps {
    pub fn subdomain_count(&self) -> usize {
        self.local_to_wc.len()
    }

    pub fn interface_dim(&self) -> usize {
        self.interface_dofs.len()
    }

    /// `Σ_i dim W_i`.
    pub fn w_dim(&self) -> usize {
        self.local_to_wc.iter().map(Vec::len).sum()
    }

    /// `R u`: subdomain copies of a global vector.
    pub fn restrict(&self, u: &[f64], systems: &[SubdomainSystem]) -> Vec<Vec<f64>> {
        systems.iter().map(|s| s.dofs.iter().map(|&g| u[g]).collect()).collect()
    }

    /// `R^c w_c`.
    pub fn wc_to_w(&self, wc: &[f64]) -> Vec<Vec<f64>> {
        self.local_to_wc
            .iter()
            .map(|map| map.iter().map(|&k| wc[k]).collect())
            .collect()
    }

    /// `R^cᵀ w`: sums the copies of shared corner dofs.
    pub fn w_to_wc(&self, w: &[Vec<f64>]) -> Vec<f64> {
        let mut out = vec![0.0; self.wc_dim];
        for (map, local) in self.local_to_wc.iter().zip(w) {
            for (&k, &v) in map.iter().zip(local) {
                out[k] += v;
            }
        }
        out
    }

    /// The `W^c` representative of a global (continuous) vector.
    pub fn continuous_wc(&self, u: &[f64], systems: &[SubdomainSystem]) -> Vec<f64> {
        let mut out = vec![0.0; self.wc_dim];
        for sys in systems {
            for (l, &g) in sys.dofs.iter().enumerate() {
                out[self.local_to_wc[sys.id][l]] = u[g];
            }
        }
        out
    }
}

/// `A^c = R^cᵀ A R^c`.
pub fn assemble_corner_operator(systems: &[SubdomainSystem], maps: &EmbeddingMaps) -> SparseSymMatrix {
    let nnz: usize = systems.iter().map(|s| s.matrix.nnz()).sum();
    let mut asm = SymAssembler::with_capacity(maps.wc_dim, nnz);
    for sys in systems {
        let map = &maps.local_to_wc[sys.id];
        for (i, j, v) in sys.matrix.upper_triplets() {
            asm.add(map[i], map[j], v);
        }
    }
    asm.finalize()
}
