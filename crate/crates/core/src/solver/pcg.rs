use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::dense::{axpy, dot, norm};
use crate::linalg::tridiagonal_eigenvalues;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Stopping {
    /// `‖r_k‖ / ‖b‖` with the recursively updated residual.
    TrueResidual,
    /// `sqrt(r_kᵀ M r_k / r_0ᵀ M r_0)`.
    Preconditioned,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PcgConfig {
    pub tolerance: f64,
    pub max_iterations: usize,
    pub estimate_condition: bool,
    pub stopping: Stopping,
}

impl Default for PcgConfig {
    fn default() -> Self {
        PcgConfig {
            tolerance: 1e-8,
            max_iterations: 1000,
            estimate_condition: true,
            stopping: Stopping::TrueResidual,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct PcgReport {
    pub iterations: usize,
    /// Lanczos estimate of the condition number; 1 when not estimated.
    pub condition: f64,
    pub lambda_min: f64,
    pub lambda_max: f64,
    /// Relative residual after each iteration, starting with iteration 0.
    pub residuals: Vec<f64>,
    pub converged: bool,
    pub alphas: Vec<f64>,
    pub betas: Vec<f64>,
}

/// One line of the iteration log.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationRecord {
    pub iteration: usize,
    pub residual: f64,
    pub condition: f64,
}

pub fn pcg(
    operator: impl Fn(&[f64]) -> Vec<f64>,
    preconditioner: impl Fn(&[f64]) -> Vec<f64>,
    rhs: &[f64],
    config: &PcgConfig,
) -> Result<(Vec<f64>, PcgReport)> {
    pcg_observed(operator, preconditioner, rhs, config, |_| {})
}

/// PCG from a zero initial guess, reporting every iteration to `observer`.
pub fn pcg_observed(
    operator: impl Fn(&[f64]) -> Vec<f64>,
    preconditioner: impl Fn(&[f64]) -> Vec<f64>,
    rhs: &[f64],
    config: &PcgConfig,
    mut observer: impl FnMut(&IterationRecord),
) -> Result<(Vec<f64>, PcgReport)> {
    assert!(config.tolerance > 0.0, "tolerance must be positive");
    let n = rhs.len();
    let mut x = vec![0.0; n];
    let mut report = PcgReport {
        condition: 1.0,
        lambda_min: 1.0,
        lambda_max: 1.0,
        ..PcgReport::default()
    };
    let b_norm = norm(rhs);
    if b_norm == 0.0 {
        report.converged = true;
        report.residuals.push(0.0);
        return Ok((x, report));
    }

    let mut r = rhs.to_vec();
    let mut z = preconditioner(&r);
    let mut rz = dot(&r, &z);
    let rz0 = rz;
    let mut p = z.clone();
    let measure = |r: &[f64], rz: f64| match config.stopping {
        Stopping::TrueResidual => norm(r) / b_norm,
        Stopping::Preconditioned => (rz.max(0.0) / rz0).sqrt(),
    };
    report.residuals.push(1.0);

    while report.iterations < config.max_iterations {
        let q = operator(&p);
        let pq = dot(&p, &q);
        let alpha = rz / pq;
        axpy(alpha, &p, &mut x);
        axpy(-alpha, &q, &mut r);
        report.alphas.push(alpha);
        report.iterations += 1;

        z = preconditioner(&r);
        let rz_new = dot(&r, &z);
        let residual = measure(&r, rz_new);
        report.residuals.push(residual);
        if config.estimate_condition {
            update_condition(&mut report);
        }
        observer(&IterationRecord {
            iteration: report.iterations,
            residual,
            condition: report.condition,
        });
        if residual <= config.tolerance {
            report.converged = true;
            break;
        }
        let beta = rz_new / rz;
        report.betas.push(beta);
        rz = rz_new;
        for (pi, zi) in p.iter_mut().zip(&z) {
            *pi = zi + beta * *pi;
        }
    }

    if report.converged {
        Ok((x, report))
    } else {
        Err(Error::MaxIterationsExceeded(Box::new(report)))
    }
}

fn update_condition(report: &mut PcgReport) {
    if let Some((lo, hi)) = lanczos_extremes(&report.alphas, &report.betas) {
        report.lambda_min = lo;
        report.lambda_max = hi;
        report.condition = if lo > 0.0 { hi / lo } else { f64::INFINITY };
    }
}

/// Extreme eigenvalues of the Lanczos matrix assembled from the PCG
/// coefficients; uses the first `alphas.len()` steps.
fn lanczos_extremes(alphas: &[f64], betas: &[f64]) -> Option<(f64, f64)> {
    let m = alphas.len();
    if m == 0 {
        return None;
    }
    let mut diag = Vec::with_capacity(m);
    let mut off = Vec::with_capacity(m.saturating_sub(1));
    for j in 0..m {
        let mut d = 1.0 / alphas[j];
        if j > 0 {
            d += betas[j - 1] / alphas[j - 1];
        }
        diag.push(d);
        if j + 1 < m {
            off.push(betas[j].sqrt() / alphas[j]);
        }
    }
    let ev = tridiagonal_eigenvalues(&diag, &off);
    Some((ev[0], ev[m - 1]))
}

/// `λ_max / λ_min` of the Lanczos tridiagonal; 1 for fewer than two steps.
pub fn lanczos_condition_estimate(alphas: &[f64], betas: &[f64]) -> f64 {
    if alphas.len() < 2 {
        return 1.0;
    }
    match lanczos_extremes(alphas, betas) {
        Some((lo, hi)) if lo > 0.0 => hi / lo,
        _ => f64::INFINITY,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::dense::DenseMatrix;

    fn spd(n: usize) -> DenseMatrix {
        DenseMatrix::from_fn(n, n, |i, j| {
            if i == j {
                4.0 + i as f64
            } else if i.abs_diff(j) == 1 {
                -1.0
            } else {
                0.0
            }
        })
    }

    /// Plain textbook CG, kept separate from the implementation under test.
    /// Returns the iterate and the residual norms after each step.
    fn reference_cg(a: &DenseMatrix, b: &[f64], steps: usize) -> (Vec<f64>, Vec<f64>) {
        let n = b.len();
        let mut x = vec![0.0; n];
        let mut r = b.to_vec();
        let mut p = r.clone();
        let mut rr: f64 = r.iter().map(|v| v * v).sum();
        let mut history = Vec::new();
        for _ in 0..steps {
            let ap = a.matvec(&p);
            let alpha = rr / p.iter().zip(&ap).map(|(a, b)| a * b).sum::<f64>();
            for i in 0..n {
                x[i] += alpha * p[i];
                r[i] -= alpha * ap[i];
            }
            let rr_new: f64 = r.iter().map(|v| v * v).sum();
            history.push(rr_new.sqrt());
            for i in 0..n {
                p[i] = r[i] + rr_new / rr * p[i];
            }
            rr = rr_new;
        }
        (x, history)
    }

    #[test]
    fn exact_preconditioner_takes_one_iteration() {
        let a = spd(6);
        let chol = crate::linalg::DenseCholesky::new(&a).unwrap();
        let b = vec![1.0, 2.0, 0.0, -1.0, 3.0, 0.5];
        let (x, rep) = pcg(|v| a.matvec(v), |r| chol.solve(r), &b, &PcgConfig::default()).unwrap();
        assert_eq!(rep.iterations, 1);
        assert!((rep.condition - 1.0).abs() < 1e-10);
        let ax = a.matvec(&x);
        for (u, v) in ax.iter().zip(&b) {
            assert!((u - v).abs() < 1e-12);
        }
    }

    #[test]
    fn identity_preconditioner_follows_textbook_cg() {
        let a = spd(10);
        let b: Vec<f64> = (0..10).map(|i| (i as f64).sin() + 1.0).collect();
        let cfg = PcgConfig {
            tolerance: 1e-13,
            ..PcgConfig::default()
        };
        let (x, rep) = pcg(|v| a.matvec(v), |r| r.to_vec(), &b, &cfg).unwrap();
        let (expected, history) = reference_cg(&a, &b, rep.iterations);
        for (u, v) in x.iter().zip(&expected) {
            assert!((u - v).abs() < 1e-10);
        }
        let bn = norm(&b);
        for (k, h) in history.iter().enumerate() {
            assert!((rep.residuals[k + 1] - h / bn).abs() < 1e-10);
        }
    }

    #[test]
    fn diagonal_spectrum_condition() {
        let d: Vec<f64> = (1..=10).map(|i| i as f64).collect();
        let b = vec![1.0; 10];
        let cfg = PcgConfig {
            tolerance: 1e-14,
            ..PcgConfig::default()
        };
        let (_, rep) = pcg(
            |v| v.iter().zip(&d).map(|(a, b)| a * b).collect(),
            |r| r.to_vec(),
            &b,
            &cfg,
        )
        .unwrap();
        assert_eq!(rep.iterations, 10);
        assert!((rep.condition - 10.0).abs() < 1e-6);
        assert!((lanczos_condition_estimate(&rep.alphas, &rep.betas) - 10.0).abs() < 1e-6);
    }

    #[test]
    fn non_convergence_carries_report() {
        let a = spd(20);
        let b = vec![1.0; 20];
        let cfg = PcgConfig {
            tolerance: 1e-14,
            max_iterations: 2,
            ..PcgConfig::default()
        };
        match pcg(|v| a.matvec(v), |r| r.to_vec(), &b, &cfg) {
            Err(Error::MaxIterationsExceeded(rep)) => {
                assert_eq!(rep.iterations, 2);
                assert!(!rep.converged);
            }
            _ => panic!("expected failure"),
        }
    }

    #[test]
    fn zero_rhs_returns_zero() {
        let (x, rep) = pcg(|v| v.to_vec(), |r| r.to_vec(), &[0.0; 3], &PcgConfig::default()).unwrap();
        assert_eq!(x, vec![0.0; 3]);
        assert_eq!(rep.iterations, 0);
    }
}
