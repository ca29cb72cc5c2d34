use rayon::prelude::*;

use crate::error::Result;
use crate::fem::SubdomainSystem;
use crate::linalg::{CsrMatrix, FactorKind, Factorization, Ordering};

/// Interior/interface blocks of one subdomain matrix with the interior block
/// factorized.
#[derive(Debug, Clone)]
pub struct LocalSchur {
    pub interior: Vec<usize>,
    pub interface: Vec<usize>,
    dim: usize,
    factor: Option<Factorization>,
    /// Rows: interior, columns: interface.
    a_ib: CsrMatrix,
    a_bb: CsrMatrix,
}

impl LocalSchur {
    pub fn new(sys: &SubdomainSystem) -> Result<Self> {
        let csr = sys.matrix.csr();
        let factor = if sys.interior.is_empty() {
            None
        } else {
            let a_ii = sys.matrix.principal_submatrix(&sys.interior);
            Some(Factorization::new(&a_ii, FactorKind::Definite, Ordering::Natural)?)
        };
        Ok(LocalSchur {
            interior: sys.interior.clone(),
            interface: sys.interface.clone(),
            dim: sys.dim(),
            factor,
            a_ib: csr.submatrix(&sys.interior, &sys.interface),
            a_bb: csr.submatrix(&sys.interface, &sys.interface),
        })
    }

    pub fn interface_dim(&self) -> usize {
        self.interface.len()
    }

    pub fn solve_interior(&self, rhs: &[f64]) -> Vec<f64> {
        match &self.factor {
            Some(f) => f.solve(rhs),
            None => Vec::new(),
        }
    }

    /// `S x = A_BB x − A_BI A_II⁻¹ A_IB x`.
    pub fn schur(&self, x: &[f64]) -> Vec<f64> {
        let mut y = self.a_bb.matvec(x);
        if self.factor.is_some() {
            let t = self.solve_interior(&self.a_ib.matvec(x));
            let c = self.a_ib.tr_matvec(&t);
            for (a, b) in y.iter_mut().zip(&c) {
                *a -= b;
            }
        }
        y
    }

    /// `f_B − A_BI A_II⁻¹ f_I` for a full local load vector.
    pub fn condense(&self, f: &[f64]) -> Vec<f64> {
        let mut g: Vec<f64> = self.interface.iter().map(|&l| f[l]).collect();
        if self.factor.is_some() {
            let f_i: Vec<f64> = self.interior.iter().map(|&l| f[l]).collect();
            let c = self.a_ib.tr_matvec(&self.solve_interior(&f_i));
            for (a, b) in g.iter_mut().zip(&c) {
                *a -= b;
            }
        }
        g
    }

    /// Full local vector with interface values `x` and interiors solving
    /// `A_II u_I = f_I − A_IB x`; `f = None` gives the discrete harmonic
    /// extension.
    pub fn extend(&self, x: &[f64], f: Option<&[f64]>) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        for (&l, &v) in self.interface.iter().zip(x) {
            out[l] = v;
        }
        if self.factor.is_some() {
            let mut rhs = self.a_ib.matvec(x);
            for (k, r) in rhs.iter_mut().enumerate() {
                *r = f.map_or(0.0, |f| f[self.interior[k]]) - *r;
            }
            for (&l, v) in self.interior.iter().zip(self.solve_interior(&rhs)) {
                out[l] = v;
            }
        }
        out
    }
}

/// The operator `I − P`: per-subdomain discrete harmonic extension.
#[derive(Debug, Clone)]
pub struct HarmonicExtension {
    pub locals: Vec<LocalSchur>,
}

impl HarmonicExtension {
    pub fn new(systems: &[SubdomainSystem]) -> Result<Self> {
        let locals = systems.par_iter().map(LocalSchur::new).collect::<Result<Vec<_>>>()?;
        Ok(HarmonicExtension { locals })
    }

    /// Harmonic extension of interface data given per subdomain.
    pub fn harmonic_extend(&self, boundary: &[Vec<f64>]) -> Vec<Vec<f64>> {
        self.locals
            .par_iter()
            .zip(boundary)
            .map(|(loc, b)| loc.extend(b, None))
            .collect()
    }
}
