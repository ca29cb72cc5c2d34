use serde::{Deserialize, Serialize};

use super::mesh::Physics;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Material {
    Conductivity { conductivity: f64 },
    Elastic { young: f64, poisson: f64 },
}

impl Material {
    pub fn validate(&self, physics: Physics) -> Result<()> {
        match (*self, physics) {
            (Material::Conductivity { conductivity }, Physics::Scalar) => {
                if conductivity > 0.0 && conductivity.is_finite() {
                    Ok(())
                } else {
                    Err(Error::InvalidSpec(format!("conductivity must be positive, got {conductivity}")))
                }
            }
            (Material::Elastic { young, poisson }, Physics::Elasticity) => {
                if !(young > 0.0 && young.is_finite()) {
                    return Err(Error::InvalidSpec(format!("Young modulus must be positive, got {young}")));
                }
                if !(0.0..0.5).contains(&poisson) {
                    return Err(Error::InvalidSpec(format!("Poisson ratio must lie in [0, 0.5), got {poisson}")));
                }
                Ok(())
            }
            _ => Err(Error::InvalidSpec(format!("material {self:?} does not match {physics:?} physics"))),
        }
    }

    /// Lamé parameters `(λ, μ)`.
    pub fn lame(&self) -> Option<(f64, f64)> {
        match *self {
            Material::Elastic { young, poisson } => {
                let lambda = young * poisson / ((1.0 + poisson) * (1.0 - 2.0 * poisson));
                let mu = young / (2.0 * (1.0 + poisson));
                Some((lambda, mu))
            }
            Material::Conductivity { .. } => None,
        }
    }

    pub fn unit(physics: Physics) -> Material {
        match physics {
            Physics::Scalar => Material::Conductivity { conductivity: 1.0 },
            Physics::Elasticity => Material::Elastic {
                young: 1.0,
                poisson: 0.3,
            },
        }
    }
}
