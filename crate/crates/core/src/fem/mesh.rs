use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Physics {
    Scalar,
    Elasticity,
}

impl Physics {
    pub fn dofs_per_node(self) -> usize {
        match self {
            Physics::Scalar => 1,
            Physics::Elasticity => 3,
        }
    }

    /// Dimension of the kernel of a floating subdomain matrix.
    pub fn rigid_modes(self) -> usize {
        match self {
            Physics::Scalar => 1,
            Physics::Elasticity => 6,
        }
    }
}

/// One of the six faces of the box-shaped domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BoxFace {
    #[serde(rename = "x-")]
    XMin,
    #[serde(rename = "x+")]
    XMax,
    #[serde(rename = "y-")]
    YMin,
    #[serde(rename = "y+")]
    YMax,
    #[serde(rename = "z-")]
    ZMin,
    #[serde(rename = "z+")]
    ZMax,
}

impl BoxFace {
    pub fn axis(self) -> usize {
        match self {
            BoxFace::XMin | BoxFace::XMax => 0,
            BoxFace::YMin | BoxFace::YMax => 1,
            BoxFace::ZMin | BoxFace::ZMax => 2,
        }
    }

    pub fn is_max(self) -> bool {
        matches!(self, BoxFace::XMax | BoxFace::YMax | BoxFace::ZMax)
    }
}

/// Logical dimensions of a structured hexahedral grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Grid {
    /// Elements per axis.
    pub elements: [usize; 3],
}

impl Grid {
    pub fn nodes_per_axis(&self) -> [usize; 3] {
        [self.elements[0] + 1, self.elements[1] + 1, self.elements[2] + 1]
    }

    pub fn node_count(&self) -> usize {
        self.nodes_per_axis().iter().product()
    }

    pub fn element_count(&self) -> usize {
        self.elements.iter().product()
    }

    pub fn node_index(&self, i: usize, j: usize, k: usize) -> usize {
        let [nx, ny, _] = self.nodes_per_axis();
        i + nx * (j + ny * k)
    }

    pub fn node_ijk(&self, node: usize) -> [usize; 3] {
        let [nx, ny, _] = self.nodes_per_axis();
        [node % nx, (node / nx) % ny, node / (nx * ny)]
    }

    pub fn element_index(&self, i: usize, j: usize, k: usize) -> usize {
        i + self.elements[0] * (j + self.elements[1] * k)
    }

    pub fn element_ijk(&self, e: usize) -> [usize; 3] {
        let [ex, ey, _] = self.elements;
        [e % ex, (e / ex) % ey, e / (ex * ey)]
    }

    /// Nodes one grid step away.
    pub fn neighbors(&self, node: usize) -> Vec<usize> {
        let n = self.nodes_per_axis();
        let ijk = self.node_ijk(node);
        let mut out = Vec::with_capacity(6);
        for axis in 0..3 {
            if ijk[axis] > 0 {
                let mut c = ijk;
                c[axis] -= 1;
                out.push(self.node_index(c[0], c[1], c[2]));
            }
            if ijk[axis] + 1 < n[axis] {
                let mut c = ijk;
                c[axis] += 1;
                out.push(self.node_index(c[0], c[1], c[2]));
            }
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct Mesh {
    pub physics: Physics,
    pub grid: Grid,
    pub coordinates: Vec<[f64; 3]>,
    /// Node order: the bottom face counterclockwise, then the top face.
    pub elements: Vec<[usize; 8]>,
    pub materials: Vec<usize>,
}

impl Mesh {
    pub fn node_count(&self) -> usize {
        self.coordinates.len()
    }

    pub fn element_count(&self) -> usize {
        self.elements.len()
    }

    pub fn dofs_per_node(&self) -> usize {
        self.physics.dofs_per_node()
    }

    pub fn dof_count(&self) -> usize {
        self.node_count() * self.dofs_per_node()
    }

    pub fn dof(&self, node: usize, component: usize) -> usize {
        node * self.dofs_per_node() + component
    }

    /// Value of rigid body mode `mode` at global dof `dof`: constants for
    /// the scalar problem; translations, then rotations about x, y, z for
    /// elasticity.
    pub fn rigid_mode(&self, mode: usize, dof: usize) -> f64 {
        let d = self.dofs_per_node();
        let (x, c) = (self.coordinates[dof / d], dof % d);
        if mode < 3 {
            return if c == mode { 1.0 } else { 0.0 };
        }
        let r = match mode {
            3 => [0.0, -x[2], x[1]],
            4 => [x[2], 0.0, -x[0]],
            _ => [-x[1], x[0], 0.0],
        };
        r[c]
    }

    /// Nodes lying on a face of the bounding box.
    pub fn face_nodes(&self, face: BoxFace) -> Vec<usize> {
        let n = self.grid.nodes_per_axis();
        let axis = face.axis();
        let target = if face.is_max() { n[axis] - 1 } else { 0 };
        (0..self.node_count())
            .filter(|&v| self.grid.node_ijk(v)[axis] == target)
            .collect()
    }

    /// Elements with a side on the given box face, paired with the local
    /// node numbers of that side.
    pub fn face_elements(&self, face: BoxFace) -> Vec<(usize, [usize; 4])> {
        let axis = face.axis();
        let target = if face.is_max() {
            self.grid.elements[axis] - 1
        } else {
            0
        };
        let local = hex_face_nodes(face);
        (0..self.element_count())
            .filter(|&e| self.grid.element_ijk(e)[axis] == target)
            .map(|e| (e, local))
            .collect()
    }
}

/// Local node numbers of one side of a hexahedron.
pub fn hex_face_nodes(face: BoxFace) -> [usize; 4] {
    match face {
        BoxFace::XMin => [0, 3, 7, 4],
        BoxFace::XMax => [1, 2, 6, 5],
        BoxFace::YMin => [0, 1, 5, 4],
        BoxFace::YMax => [3, 2, 6, 7],
        BoxFace::ZMin => [0, 1, 2, 3],
        BoxFace::ZMax => [4, 5, 6, 7],
    }
}

#[derive(Debug, Clone)]
pub struct Decomposition {
    pub subdomains_per_axis: [usize; 3],
    pub elements_per_subdomain: usize,
    pub element_subdomain: Vec<usize>,
    /// Sorted subdomains touching each node.
    pub node_subdomains: Vec<Vec<usize>>,
    /// Sorted global nodes of each subdomain.
    pub subdomain_nodes: Vec<Vec<usize>>,
    pub subdomain_elements: Vec<Vec<usize>>,
}

impl Decomposition {
    pub fn from_element_map(mesh: &Mesh, element_subdomain: Vec<usize>, per_axis: [usize; 3], h: usize) -> Self {
        let count = element_subdomain.iter().map(|s| s + 1).max().unwrap_or(0);
        let mut node_subdomains = vec![Vec::new(); mesh.node_count()];
        let mut subdomain_elements = vec![Vec::new(); count];
        for (e, nodes) in mesh.elements.iter().enumerate() {
            let s = element_subdomain[e];
            subdomain_elements[s].push(e);
            for &v in nodes {
                node_subdomains[v].push(s);
            }
        }
        let mut subdomain_nodes = vec![Vec::new(); count];
        for (v, subs) in node_subdomains.iter_mut().enumerate() {
            subs.sort_unstable();
            subs.dedup();
            for &s in subs.iter() {
                subdomain_nodes[s].push(v);
            }
        }
        Decomposition {
            subdomains_per_axis: per_axis,
            elements_per_subdomain: h,
            element_subdomain,
            node_subdomains,
            subdomain_nodes,
            subdomain_elements,
        }
    }

    pub fn subdomain_count(&self) -> usize {
        self.subdomain_nodes.len()
    }

    pub fn is_interface_node(&self, node: usize) -> bool {
        self.node_subdomains[node].len() > 1
    }
}

/// Unit cubes arranged `per_axis`, each split into `h_over_h³` hexahedra.
pub fn build_cube_mesh(per_axis: [usize; 3], h_over_h: usize, physics: Physics) -> (Mesh, Decomposition) {
    assert!(per_axis.iter().all(|&n| n >= 1) && h_over_h >= 1, "counts must be positive");
    let grid = Grid {
        elements: [per_axis[0] * h_over_h, per_axis[1] * h_over_h, per_axis[2] * h_over_h],
    };
    let n = grid.nodes_per_axis();
    let h = 1.0 / h_over_h as f64;
    let mut coordinates = Vec::with_capacity(grid.node_count());
    for k in 0..n[2] {
        for j in 0..n[1] {
            for i in 0..n[0] {
                coordinates.push([i as f64 * h, j as f64 * h, k as f64 * h]);
            }
        }
    }
    let mut elements = Vec::with_capacity(grid.element_count());
    let mut element_subdomain = Vec::with_capacity(grid.element_count());
    for k in 0..grid.elements[2] {
        for j in 0..grid.elements[1] {
            for i in 0..grid.elements[0] {
                let v = |a, b, c| grid.node_index(i + a, j + b, k + c);
                elements.push([
                    v(0, 0, 0),
                    v(1, 0, 0),
                    v(1, 1, 0),
                    v(0, 1, 0),
                    v(0, 0, 1),
                    v(1, 0, 1),
                    v(1, 1, 1),
                    v(0, 1, 1),
                ]);
                let s = [i / h_over_h, j / h_over_h, k / h_over_h];
                element_subdomain.push(s[0] + per_axis[0] * (s[1] + per_axis[1] * s[2]));
            }
        }
    }
    let mesh = Mesh {
        physics,
        grid,
        coordinates,
        materials: vec![0; elements.len()],
        elements,
    };
    let decomposition = Decomposition::from_element_map(&mesh, element_subdomain, per_axis, h_over_h);
    (mesh, decomposition)
}
