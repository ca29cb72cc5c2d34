mod assembly;
mod element;
mod material;
mod mesh;
mod spec;
mod vtk;

pub use assembly::{
    apply_dirichlet, assemble_global_direct, assemble_subdomain, dirichlet_dofs, factorize_global, Problem,
    SubdomainSystem,
};
pub use element::{hex8_stiffness, hex8_volume_weights, quad4_area_weights};
pub use material::Material;
pub use mesh::{build_cube_mesh, hex_face_nodes, BoxFace, Decomposition, Grid, Mesh, Physics};
pub use spec::{DirichletSpec, LoadSpec, MeshSpec, ProblemSpec, Region};
pub use vtk::write_vtk;
