//! Trilinear hexahedron with 2×2×2 Gauss quadrature.

use super::material::Material;
use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;

const REFERENCE: [[f64; 3]; 8] = [
    [-1.0, -1.0, -1.0],
    [1.0, -1.0, -1.0],
    [1.0, 1.0, -1.0],
    [-1.0, 1.0, -1.0],
    [-1.0, -1.0, 1.0],
    [1.0, -1.0, 1.0],
    [1.0, 1.0, 1.0],
    [-1.0, 1.0, 1.0],
];

fn gauss_points() -> impl Iterator<Item = [f64; 3]> {
    let g = 1.0 / 3f64.sqrt();
    (0..8).map(move |q| {
        [
            if q & 1 == 0 { -g } else { g },
            if q & 2 == 0 { -g } else { g },
            if q & 4 == 0 { -g } else { g },
        ]
    })
}

fn shape_gradients(xi: [f64; 3]) -> [[f64; 3]; 8] {
    let mut out = [[0.0; 3]; 8];
    for (a, r) in REFERENCE.iter().enumerate() {
        let f = [1.0 + r[0] * xi[0], 1.0 + r[1] * xi[1], 1.0 + r[2] * xi[2]];
        out[a] = [
            0.125 * r[0] * f[1] * f[2],
            0.125 * r[1] * f[0] * f[2],
            0.125 * r[2] * f[0] * f[1],
        ];
    }
    out
}

/// Physical shape-function gradients and `det J` at one quadrature point.
fn physical_gradients(coords: &[[f64; 3]; 8], xi: [f64; 3], element: usize) -> Result<([[f64; 3]; 8], f64)> {
    let dn = shape_gradients(xi);
    let mut j = [[0.0; 3]; 3];
    for a in 0..8 {
        for r in 0..3 {
            for c in 0..3 {
                j[r][c] += dn[a][r] * coords[a][c];
            }
        }
    }
    let det = j[0][0] * (j[1][1] * j[2][2] - j[1][2] * j[2][1]) - j[0][1] * (j[1][0] * j[2][2] - j[1][2] * j[2][0])
        + j[0][2] * (j[1][0] * j[2][1] - j[1][1] * j[2][0]);
    if !(det > 0.0) {
        return Err(Error::DegenerateElement {
            element,
            determinant: det,
        });
    }
    let inv = [
        [
            (j[1][1] * j[2][2] - j[1][2] * j[2][1]) / det,
            (j[0][2] * j[2][1] - j[0][1] * j[2][2]) / det,
            (j[0][1] * j[1][2] - j[0][2] * j[1][1]) / det,
        ],
        [
            (j[1][2] * j[2][0] - j[1][0] * j[2][2]) / det,
            (j[0][0] * j[2][2] - j[0][2] * j[2][0]) / det,
            (j[0][2] * j[1][0] - j[0][0] * j[1][2]) / det,
        ],
        [
            (j[1][0] * j[2][1] - j[1][1] * j[2][0]) / det,
            (j[0][1] * j[2][0] - j[0][0] * j[2][1]) / det,
            (j[0][0] * j[1][1] - j[0][1] * j[1][0]) / det,
        ],
    ];
    let mut grad = [[0.0; 3]; 8];
    for a in 0..8 {
        for c in 0..3 {
            grad[a][c] = inv[c][0] * dn[a][0] + inv[c][1] * dn[a][1] + inv[c][2] * dn[a][2];
        }
    }
    Ok((grad, det))
}

/// Element stiffness: 8×8 for diffusion, 24×24 (`3a + component`) for
/// elasticity.
pub fn hex8_stiffness(coords: &[[f64; 3]; 8], material: &Material, element: usize) -> Result<DenseMatrix> {
    match *material {
        Material::Conductivity { conductivity } => {
            let mut k = DenseMatrix::zeros(8, 8);
            for xi in gauss_points() {
                let (g, det) = physical_gradients(coords, xi, element)?;
                for a in 0..8 {
                    for b in 0..8 {
                        let s = g[a][0] * g[b][0] + g[a][1] * g[b][1] + g[a][2] * g[b][2];
                        k[(a, b)] += conductivity * s * det;
                    }
                }
            }
            Ok(k)
        }
        Material::Elastic { .. } => {
            let (lambda, mu) = material.lame().expect("elastic material");
            let mut d = [[0.0; 6]; 6];
            for r in 0..3 {
                for c in 0..3 {
                    d[r][c] = lambda;
                }
                d[r][r] += 2.0 * mu;
                d[r + 3][r + 3] = mu;
            }
            let mut k = DenseMatrix::zeros(24, 24);
            for xi in gauss_points() {
                let (g, det) = physical_gradients(coords, xi, element)?;
                // Voigt order xx, yy, zz, xy, yz, zx with engineering shear.
                let mut b = [[0.0; 24]; 6];
                for a in 0..8 {
                    let [gx, gy, gz] = g[a];
                    b[0][3 * a] = gx;
                    b[1][3 * a + 1] = gy;
                    b[2][3 * a + 2] = gz;
                    b[3][3 * a] = gy;
                    b[3][3 * a + 1] = gx;
                    b[4][3 * a + 1] = gz;
                    b[4][3 * a + 2] = gy;
                    b[5][3 * a] = gz;
                    b[5][3 * a + 2] = gx;
                }
                let mut db = [[0.0; 24]; 6];
                for r in 0..6 {
                    for c in 0..24 {
                        db[r][c] = (0..6).map(|s| d[r][s] * b[s][c]).sum();
                    }
                }
                for p in 0..24 {
                    for q in p..24 {
                        let v: f64 = (0..6).map(|s| b[s][p] * db[s][q]).sum::<f64>() * det;
                        k[(p, q)] += v;
                    }
                }
            }
            for p in 0..24 {
                for q in 0..p {
                    k[(p, q)] = k[(q, p)];
                }
            }
            Ok(k)
        }
    }
}

/// `∫ N_a dV` for each node.
pub fn hex8_volume_weights(coords: &[[f64; 3]; 8], element: usize) -> Result<[f64; 8]> {
    let mut w = [0.0; 8];
    for xi in gauss_points() {
        let (_, det) = physical_gradients(coords, xi, element)?;
        for (a, r) in REFERENCE.iter().enumerate() {
            let n = 0.125 * (1.0 + r[0] * xi[0]) * (1.0 + r[1] * xi[1]) * (1.0 + r[2] * xi[2]);
            w[a] += n * det;
        }
    }
    Ok(w)
}

/// `∫ N_a dA` over a planar quadrilateral side with 2×2 Gauss quadrature.
pub fn quad4_area_weights(corners: &[[f64; 3]; 4]) -> [f64; 4] {
    let g = 1.0 / 3f64.sqrt();
    let refs = [[-1.0, -1.0], [1.0, -1.0], [1.0, 1.0], [-1.0, 1.0]];
    let mut w = [0.0; 4];
    for &s in &[-g, g] {
        for &t in &[-g, g] {
            let mut ds = [0.0; 3];
            let mut dt = [0.0; 3];
            for (a, r) in refs.iter().enumerate() {
                for c in 0..3 {
                    ds[c] += 0.25 * r[0] * (1.0 + r[1] * t) * corners[a][c];
                    dt[c] += 0.25 * r[1] * (1.0 + r[0] * s) * corners[a][c];
                }
            }
            let cross = [
                ds[1] * dt[2] - ds[2] * dt[1],
                ds[2] * dt[0] - ds[0] * dt[2],
                ds[0] * dt[1] - ds[1] * dt[0],
            ];
            let jac = (cross[0] * cross[0] + cross[1] * cross[1] + cross[2] * cross[2]).sqrt();
            for (a, r) in refs.iter().enumerate() {
                w[a] += 0.25 * (1.0 + r[0] * s) * (1.0 + r[1] * t) * jac;
            }
        }
    }
    w
}
