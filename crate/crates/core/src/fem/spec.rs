//! Problem description shared by the library and the experiment files.

use serde::{Deserialize, Serialize};

use super::material::Material;
use super::mesh::{BoxFace, Physics};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshSpec {
    pub subdomains: [usize; 3],
    /// Elements along one subdomain edge.
    pub elements_per_subdomain: usize,
}

/// Elements with logical index in `[min, max)` get `material`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Region {
    pub material: usize,
    pub min: [usize; 3],
    pub max: [usize; 3],
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DirichletSpec {
    #[serde(default)]
    pub faces: Vec<BoxFace>,
    /// Components held fixed; all when absent.
    #[serde(default)]
    pub components: Option<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum LoadSpec {
    /// Uniform traction (or flux) on a box face.
    Traction { face: BoxFace, value: Vec<f64> },
    /// Uniform body force (or source).
    Body { value: Vec<f64> },
    /// Independent uniform nodal loads in `[-amplitude, amplitude]` on every
    /// dof, reproducible from `seed`.
    Random {
        #[serde(default = "unit")]
        amplitude: f64,
        #[serde(default)]
        seed: u64,
    },
}

fn unit() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpec {
    pub mesh: MeshSpec,
    pub physics: Physics,
    #[serde(default)]
    pub materials: Vec<Material>,
    #[serde(default)]
    pub regions: Vec<Region>,
    #[serde(default)]
    pub dirichlet: DirichletSpec,
    #[serde(default)]
    pub load: Vec<LoadSpec>,
}

impl ProblemSpec {
    /// Unit material, one clamped face, unit load on the opposite face.
    pub fn cube(subdomains: [usize; 3], elements_per_subdomain: usize, physics: Physics) -> Self {
        let value = match physics {
            Physics::Scalar => vec![1.0],
            Physics::Elasticity => vec![0.0, 0.0, 1.0],
        };
        ProblemSpec {
            mesh: MeshSpec {
                subdomains,
                elements_per_subdomain,
            },
            physics,
            materials: vec![Material::unit(physics)],
            regions: Vec::new(),
            dirichlet: DirichletSpec {
                faces: vec![BoxFace::XMin],
                components: None,
            },
            load: vec![LoadSpec::Traction {
                face: BoxFace::XMax,
                value,
            }],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.mesh.subdomains.contains(&0) || self.mesh.elements_per_subdomain == 0 {
            return Err(Error::InvalidSpec("mesh counts must be positive".into()));
        }
        if self.materials.is_empty() {
            return Err(Error::InvalidSpec("at least one material is required".into()));
        }
        for m in &self.materials {
            m.validate(self.physics)?;
        }
        let d = self.physics.dofs_per_node();
        for r in &self.regions {
            if r.material >= self.materials.len() {
                return Err(Error::InvalidSpec(format!("region refers to unknown material {}", r.material)));
            }
        }
        if let Some(c) = &self.dirichlet.components {
            if c.iter().any(|&c| c >= d) {
                return Err(Error::InvalidSpec("Dirichlet component out of range".into()));
            }
        }
        for l in &self.load {
            let v = match l {
                LoadSpec::Traction { value, .. } | LoadSpec::Body { value } => value,
                LoadSpec::Random { amplitude, .. } => {
                    if !amplitude.is_finite() {
                        return Err(Error::InvalidSpec("random load amplitude must be finite".into()));
                    }
                    continue;
                }
            };
            if v.len() != d {
                return Err(Error::InvalidSpec(format!("load needs {d} components, got {}", v.len())));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toml_round_trip() {
        let text = r#"
            physics = "elasticity"
            [mesh]
            subdomains = [2, 2, 1]
            elements_per_subdomain = 8
            [[materials]]
            young = 1.0e6
            poisson = 0.45
            [[materials]]
            young = 2.1e11
            poisson = 0.3
            [[regions]]
            material = 1
            min = [0, 1, 1]
            max = [16, 2, 2]
            [dirichlet]
            faces = ["x-"]
            [[load]]
            kind = "traction"
            face = "x+"
            value = [0.0, 0.0, 1.0]
        "#;
        let spec: ProblemSpec = toml::from_str(text).unwrap();
        spec.validate().unwrap();
        assert_eq!(spec.materials.len(), 2);
        assert_eq!(spec.dirichlet.faces, vec![BoxFace::XMin]);
        let back: ProblemSpec = toml::from_str(&toml::to_string(&spec).unwrap()).unwrap();
        assert_eq!(back, spec);
    }

    #[test]
    fn mismatched_material_is_rejected() {
        let mut spec = ProblemSpec::cube([1, 1, 1], 1, Physics::Scalar);
        spec.materials = vec![Material::unit(Physics::Elasticity)];
        assert!(spec.validate().is_err());
    }
}
