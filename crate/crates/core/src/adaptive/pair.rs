use rayon::prelude::*;

use crate::constraints::{glob_dofs, ConstraintSet};
use crate::error::{Error, Result};
use crate::fem::SubdomainSystem;
use crate::linalg::DenseMatrix;
use crate::substructuring::{GlobKind, LocalSchur, Substructuring};

/// Two face-sharing subdomains in pair coordinates: the interface dofs of
/// `i` followed by those of `j`, with the corner dofs they share merged.
#[derive(Debug, Clone)]
pub struct SubdomainPair {
    pub i: usize,
    pub j: usize,
    pub dim: usize,
    /// Pair index of every interface dof of `i` and of `j`.
    pub map_i: Vec<usize>,
    pub map_j: Vec<usize>,
    /// Global dof of every pair index.
    pub global_dofs: Vec<usize>,
    /// Non-corner dofs shared by `i` and `j`: `(index in i, index in j,
    /// weight of i, weight of j)`.
    pub shared: Vec<(usize, usize, f64, f64)>,
    pub fixed: Vec<bool>,
    /// Face and edge globs shared by the two subdomains.
    pub globs: Vec<usize>,
    /// `D^c_ij`: base averages on the shared globs, copy `i` minus copy `j`.
    pub constraints: DenseMatrix,
    /// Neither subdomain touches the Dirichlet boundary.
    pub floating: bool,
}

/// `S_i` as a dense matrix over the interface dofs of the subdomain.
pub fn dense_schur(local: &LocalSchur) -> DenseMatrix {
    let n = local.interface_dim();
    let columns: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|k| {
            let mut e = vec![0.0; n];
            e[k] = 1.0;
            local.schur(&e)
        })
        .collect();
    let mut s = DenseMatrix::from_columns(n, &columns);
    s.symmetrize();
    s
}

pub fn build_pair(
    sub: &Substructuring,
    systems: &[SubdomainSystem],
    base: &ConstraintSet,
    i: usize,
    j: usize,
) -> Result<SubdomainPair> {
    let globs = &sub.globs;
    if i == j || globs.faces_between(i, j).is_empty() {
        return Err(Error::NotAdjacent(i, j));
    }
    let d = sub.maps.dofs_per_node;
    let (si, sj) = (&systems[i], &systems[j]);
    let map_i: Vec<usize> = (0..si.interface.len()).collect();
    let mut global_dofs: Vec<usize> = si.interface.iter().map(|&l| si.dofs[l]).collect();
    let mut map_j = Vec::with_capacity(sj.interface.len());
    let mut shared = Vec::new();
    for &l in &sj.interface {
        let g = sj.dofs[l];
        let in_i = si.local_dof(g).and_then(|li| si.interface.iter().position(|&x| x == li));
        match in_i {
            Some(k) if globs.is_corner(g / d) => map_j.push(k),
            Some(k) => {
                map_j.push(global_dofs.len());
                global_dofs.push(g);
                let li = si.interface[k];
                let (a, b) = (sub.averaging.weights[i][li], sub.averaging.weights[j][l]);
                let (wa, wb) = if a + b > 0.0 { (a / (a + b), b / (a + b)) } else { (0.5, 0.5) };
                shared.push((k, global_dofs.len() - 1, wa, wb));
            }
            None => {
                map_j.push(global_dofs.len());
                global_dofs.push(g);
            }
        }
    }
    let dim = global_dofs.len();
    let fixed_global = |g: usize| si.local_dof(g).is_some_and(|l| si.fixed[l]) || sj.local_dof(g).is_some_and(|l| sj.fixed[l]);
    let fixed: Vec<bool> = global_dofs.iter().map(|&g| fixed_global(g)).collect();

    let pair_globs: Vec<usize> = (0..globs.globs.len())
        .filter(|&g| globs.globs[g].kind != GlobKind::Corner && globs.globs[g].contains_pair(i, j))
        .collect();

    let index_of = |g: usize, copy_j: bool| -> usize {
        let (sys, map) = if copy_j { (sj, &map_j) } else { (si, &map_i) };
        let l = sys.local_dof(g).expect("glob dof in subdomain");
        map[sys.interface.iter().position(|&x| x == l).expect("interface dof")]
    };
    let mut rows = Vec::new();
    for a in &base.averages {
        if !pair_globs.contains(&a.glob) {
            continue;
        }
        let dofs = glob_dofs(&globs.globs[a.glob], d);
        let mut row = vec![0.0; dim];
        for (k, &c) in a.coefficients.iter().enumerate() {
            if c != 0.0 {
                row[index_of(dofs[k], false)] += c;
                row[index_of(dofs[k], true)] -= c;
            }
        }
        rows.push(row);
    }
    let constraints = DenseMatrix::from_fn(rows.len(), dim, |r, c| rows[r][c]);
    let floating = !si.fixed.iter().any(|&f| f) && !sj.fixed.iter().any(|&f| f);
    Ok(SubdomainPair {
        i,
        j,
        dim,
        map_i,
        map_j,
        global_dofs,
        shared,
        fixed,
        globs: pair_globs,
        constraints,
        floating,
    })
}

impl SubdomainPair {
    /// `S^c_ij` assembled from dense local Schur complements.
    pub fn assemble_schur(&self, s_i: &DenseMatrix, s_j: &DenseMatrix) -> DenseMatrix {
        let mut s = DenseMatrix::zeros(self.dim, self.dim);
        for (map, local) in [(&self.map_i, s_i), (&self.map_j, s_j)] {
            for (a, &pa) in map.iter().enumerate() {
                for (b, &pb) in map.iter().enumerate() {
                    s[(pa, pb)] += local[(a, b)];
                }
            }
        }
        s
    }

    /// `S^c_ij x` using the interior solves of the two subdomains.
    pub fn schur_apply(&self, sub: &Substructuring, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.dim];
        for (s, map) in [(self.i, &self.map_i), (self.j, &self.map_j)] {
            let local: Vec<f64> = map.iter().map(|&p| x[p]).collect();
            for (&p, v) in map.iter().zip(sub.harmonic.locals[s].schur(&local)) {
                y[p] += v;
            }
        }
        y
    }

    /// `(I − E_ij) x`.
    pub fn jump(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.dim];
        for &(a, b, wa, wb) in &self.shared {
            let diff = x[a] - x[b];
            y[a] = wb * diff;
            y[b] = -wa * diff;
        }
        y
    }

    /// `(I − E_ij)ᵀ x`.
    pub fn jump_transpose(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.dim];
        for &(a, b, wa, wb) in &self.shared {
            let v = wb * x[a] - wa * x[b];
            y[a] = v;
            y[b] = -v;
        }
        y
    }

    /// Continuous rigid body modes in pair coordinates.
    pub fn rigid_modes(&self, mesh: &crate::fem::Mesh) -> Vec<Vec<f64>> {
        (0..mesh.physics.rigid_modes())
            .map(|m| self.global_dofs.iter().map(|&g| mesh.rigid_mode(m, g)).collect())
            .collect()
    }
}
