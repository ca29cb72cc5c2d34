use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::element::{hex8_stiffness, hex8_volume_weights, quad4_area_weights};
use super::material::Material;
use super::mesh::{build_cube_mesh, Decomposition, Mesh};
use super::spec::{DirichletSpec, LoadSpec, ProblemSpec};
use crate::error::{Error, Result};
use crate::linalg::{factorize, FactorKind, Factorization, SparseSymMatrix, SymAssembler};

/// Stiffness and load of one subdomain in its local numbering. Local dofs
/// follow the sorted global nodes, `node · d + component`.
#[derive(Debug, Clone)]
pub struct SubdomainSystem {
    pub id: usize,
    pub nodes: Vec<usize>,
    /// Global dof of every local dof; strictly increasing.
    pub dofs: Vec<usize>,
    pub matrix: SparseSymMatrix,
    pub load: Vec<f64>,
    pub fixed: Vec<bool>,
    pub interior: Vec<usize>,
    pub interface: Vec<usize>,
}

impl SubdomainSystem {
    pub fn dim(&self) -> usize {
        self.dofs.len()
    }

    pub fn local_dof(&self, global: usize) -> Option<usize> {
        self.dofs.binary_search(&global).ok()
    }

    pub fn local_node(&self, node: usize) -> Option<usize> {
        self.nodes.binary_search(&node).ok()
    }
}

fn element_coords(mesh: &Mesh, e: usize) -> [[f64; 3]; 8] {
    let mut c = [[0.0; 3]; 8];
    for (a, &v) in mesh.elements[e].iter().enumerate() {
        c[a] = mesh.coordinates[v];
    }
    c
}

fn element_dofs(mesh: &Mesh, e: usize) -> Vec<usize> {
    let d = mesh.dofs_per_node();
    mesh.elements[e]
        .iter()
        .flat_map(|&v| (0..d).map(move |c| v * d + c))
        .collect()
}

pub fn assemble_subdomain(
    mesh: &Mesh,
    decomposition: &Decomposition,
    materials: &[Material],
    loads: &[LoadSpec],
    id: usize,
) -> Result<SubdomainSystem> {
    let d = mesh.dofs_per_node();
    let nodes = decomposition.subdomain_nodes[id].clone();
    let dofs: Vec<usize> = nodes
        .iter()
        .flat_map(|&v| (0..d).map(move |c| v * d + c))
        .collect();
    let local = |g: usize| dofs.binary_search(&g).expect("element dof inside subdomain");
    let elements = &decomposition.subdomain_elements[id];
    let mut asm = SymAssembler::with_capacity(dofs.len(), elements.len() * 300 * d * d);
    let mut load = vec![0.0; dofs.len()];
    for &e in elements {
        let coords = element_coords(mesh, e);
        let k = hex8_stiffness(&coords, &materials[mesh.materials[e]], e)?;
        let idx: Vec<usize> = element_dofs(mesh, e).into_iter().map(local).collect();
        asm.add_block(&idx, &k);
        for l in loads {
            if let LoadSpec::Body { value } = l {
                let w = hex8_volume_weights(&coords, e)?;
                for a in 0..8 {
                    for c in 0..d {
                        load[idx[a * d + c]] += w[a] * value[c];
                    }
                }
            }
        }
    }
    for l in loads {
        if let LoadSpec::Traction { face, value } = l {
            for (e, side) in mesh.face_elements(*face) {
                if decomposition.element_subdomain[e] != id {
                    continue;
                }
                let corners = side.map(|a| mesh.coordinates[mesh.elements[e][a]]);
                let w = quad4_area_weights(&corners);
                for (s, &a) in side.iter().enumerate() {
                    let node = mesh.elements[e][a];
                    for c in 0..d {
                        load[local(node * d + c)] += w[s] * value[c];
                    }
                }
            }
        }
    }
    for l in loads {
        if let LoadSpec::Random { amplitude, seed } = *l {
            // Each node's load goes to the lowest-numbered subdomain holding it.
            let values = random_load(mesh.dof_count(), amplitude, seed);
            for (k, &g) in dofs.iter().enumerate() {
                if decomposition.node_subdomains[g / d][0] == id {
                    load[k] += values[g];
                }
            }
        }
    }
    let mut interior = Vec::new();
    let mut interface = Vec::new();
    for (l, &g) in dofs.iter().enumerate() {
        if decomposition.is_interface_node(g / d) {
            interface.push(l);
        } else {
            interior.push(l);
        }
    }
    Ok(SubdomainSystem {
        id,
        nodes,
        fixed: vec![false; dofs.len()],
        dofs,
        matrix: asm.finalize(),
        load,
        interior,
        interface,
    })
}

fn random_load(n: usize, amplitude: f64, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| amplitude * rng.gen_range(-1.0..=1.0)).collect()
}

/// Global dofs held at zero.
pub fn dirichlet_dofs(mesh: &Mesh, spec: &DirichletSpec) -> Vec<bool> {
    let d = mesh.dofs_per_node();
    let components: Vec<usize> = spec.components.clone().unwrap_or_else(|| (0..d).collect());
    let mut fixed = vec![false; mesh.dof_count()];
    for &face in &spec.faces {
        for v in mesh.face_nodes(face) {
            for &c in &components {
                fixed[v * d + c] = true;
            }
        }
    }
    fixed
}

/// Decouples the fixed dofs: their rows and columns are cleared except for
/// the diagonal, and their loads are zeroed. Dof counts are unchanged and the
/// assembled matrix stays positive definite on the free dofs.
pub fn apply_dirichlet(systems: &mut [SubdomainSystem], fixed_global: &[bool]) {
    for sys in systems.iter_mut() {
        let fixed: Vec<bool> = sys.dofs.iter().map(|&g| fixed_global[g]).collect();
        if !fixed.iter().any(|&f| f) {
            continue;
        }
        let mut asm = SymAssembler::with_capacity(sys.dim(), sys.matrix.nnz());
        for (i, j, v) in sys.matrix.upper_triplets() {
            if i == j || !(fixed[i] || fixed[j]) {
                asm.add(i, j, v);
            }
        }
        sys.matrix = asm.finalize();
        for (l, f) in sys.load.iter_mut().enumerate() {
            if fixed[l] {
                *f = 0.0;
            }
        }
        sys.fixed = fixed;
    }
}

/// An assembled, constrained, decomposed problem.
#[derive(Debug, Clone)]
pub struct Problem {
    pub mesh: Mesh,
    pub decomposition: Decomposition,
    pub materials: Vec<Material>,
    pub systems: Vec<SubdomainSystem>,
    pub fixed: Vec<bool>,
}

impl Problem {
    pub fn build(spec: &ProblemSpec) -> Result<Problem> {
        spec.validate()?;
        let (mut mesh, decomposition) =
            build_cube_mesh(spec.mesh.subdomains, spec.mesh.elements_per_subdomain, spec.physics);
        for r in &spec.regions {
            for e in 0..mesh.element_count() {
                let ijk = mesh.grid.element_ijk(e);
                if (0..3).all(|a| ijk[a] >= r.min[a] && ijk[a] < r.max[a]) {
                    mesh.materials[e] = r.material;
                }
            }
        }
        let mut systems = (0..decomposition.subdomain_count())
            .into_par_iter()
            .map(|s| assemble_subdomain(&mesh, &decomposition, &spec.materials, &spec.load, s))
            .collect::<Result<Vec<_>>>()?;
        let fixed = dirichlet_dofs(&mesh, &spec.dirichlet);
        apply_dirichlet(&mut systems, &fixed);
        Ok(Problem {
            mesh,
            decomposition,
            materials: spec.materials.clone(),
            systems,
            fixed,
        })
    }

    pub fn dof_count(&self) -> usize {
        self.mesh.dof_count()
    }

    /// `Σ R_iᵀ A_i R_i`.
    pub fn global_matrix(&self) -> SparseSymMatrix {
        let nnz: usize = self.systems.iter().map(|s| s.matrix.nnz()).sum();
        let mut asm = SymAssembler::with_capacity(self.dof_count(), nnz);
        for sys in &self.systems {
            for (i, j, v) in sys.matrix.upper_triplets() {
                asm.add(sys.dofs[i], sys.dofs[j], v);
            }
        }
        asm.finalize()
    }

    /// `Σ R_iᵀ f_i`.
    pub fn global_load(&self) -> Vec<f64> {
        let mut f = vec![0.0; self.dof_count()];
        for sys in &self.systems {
            for (l, &g) in sys.dofs.iter().enumerate() {
                f[g] += sys.load[l];
            }
        }
        f
    }

    /// Direct solve of the assembled problem.
    pub fn direct_solve(&self) -> Result<Vec<f64>> {
        let a = self.global_matrix();
        let factor = factorize_global(&a)?;
        Ok(factor.solve(&self.global_load()))
    }
}

pub fn factorize_global(a: &SparseSymMatrix) -> Result<Factorization> {
    factorize(a, FactorKind::Definite).map_err(|e| match e {
        Error::NotPositiveDefinite { .. } => Error::InsufficientBoundaryConditions,
        other => other,
    })
}

/// Element-by-element global assembly, independent of the decomposition.
pub fn assemble_global_direct(mesh: &Mesh, materials: &[Material], fixed: &[bool]) -> Result<SparseSymMatrix> {
    let mut asm = SymAssembler::new(mesh.dof_count());
    for e in 0..mesh.element_count() {
        let k = hex8_stiffness(&element_coords(mesh, e), &materials[mesh.materials[e]], e)?;
        asm.add_block(&element_dofs(mesh, e), &k);
    }
    let a = asm.finalize();
    let mut out = SymAssembler::new(mesh.dof_count());
    for (i, j, v) in a.upper_triplets() {
        if !(fixed[i] || fixed[j]) {
            out.add(i, j, v);
        }
    }
    // Decoupled diagonals equal the sum of the subdomain diagonals, which is
    // the full diagonal entry.
    for (i, &f) in fixed.iter().enumerate() {
        if f {
            out.add(i, i, a.get(i, i));
        }
    }
    Ok(out.finalize())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::mesh::Physics;

    #[test]
    fn subassembly_matches_direct_assembly() {
        for physics in [Physics::Scalar, Physics::Elasticity] {
            let spec = ProblemSpec::cube([2, 1, 2], 2, physics);
            let p = Problem::build(&spec).unwrap();
            let a = p.global_matrix();
            let b = assemble_global_direct(&p.mesh, &p.materials, &p.fixed).unwrap();
            let mut diff = a.to_dense();
            diff.add_scaled(-1.0, &b.to_dense());
            assert!(diff.max_abs() < 1e-12 * b.max_diagonal());
        }
    }

    #[test]
    fn floating_elasticity_subdomain_annihilates_rigid_modes() {
        let mut spec = ProblemSpec::cube([2, 2, 1], 2, Physics::Elasticity);
        spec.dirichlet.faces.clear();
        let p = Problem::build(&spec).unwrap();
        for sys in &p.systems {
            let scale = sys.matrix.max_diagonal();
            for mode in 0..6 {
                let v: Vec<f64> = sys
                    .dofs
                    .iter()
                    .map(|&g| p.mesh.rigid_mode(mode, g))
                    .collect();
                let r = sys.matrix.matvec(&v);
                assert!(r.iter().all(|v| v.abs() < 1e-9 * scale));
            }
        }
    }

    #[test]
    fn patch_test_reproduces_linear_field() {
        // Linear data on the whole boundary; interior equations are then
        // satisfied exactly by the linear field.
        for physics in [Physics::Scalar, Physics::Elasticity] {
            let (mesh, _) = build_cube_mesh([1, 1, 1], 3, physics);
            let d = mesh.dofs_per_node();
            let mat = match physics {
                Physics::Scalar => Material::Conductivity { conductivity: 2.5 },
                Physics::Elasticity => Material::Elastic {
                    young: 3.0,
                    poisson: 0.25,
                },
            };
            let a = assemble_global_direct(&mesh, &[mat], &vec![false; mesh.dof_count()]).unwrap();
            let u: Vec<f64> = (0..mesh.dof_count())
                .map(|g| {
                    let x = mesh.coordinates[g / d];
                    let c = (g % d) as f64;
                    1.0 + 0.3 * x[0] - 0.7 * x[1] + 0.2 * x[2] + 0.1 * c * x[0]
                })
                .collect();
            let r = a.matvec(&u);
            let n = mesh.grid.nodes_per_axis();
            for v in 0..mesh.node_count() {
                let ijk = mesh.grid.node_ijk(v);
                if (0..3).all(|ax| ijk[ax] > 0 && ijk[ax] + 1 < n[ax]) {
                    for c in 0..d {
                        assert!(r[v * d + c].abs() < 1e-10);
                    }
                }
            }
        }
    }

    #[test]
    fn unconstrained_problem_is_singular() {
        let mut spec = ProblemSpec::cube([1, 1, 2], 2, Physics::Elasticity);
        spec.dirichlet.faces.clear();
        let p = Problem::build(&spec).unwrap();
        assert!(matches!(p.direct_solve(), Err(Error::InsufficientBoundaryConditions)));
        let spec = ProblemSpec::cube([1, 1, 2], 2, Physics::Elasticity);
        assert!(Problem::build(&spec).unwrap().direct_solve().is_ok());
    }
}
