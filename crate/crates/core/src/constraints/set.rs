use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::linalg::dense::{dot, norm};
use crate::linalg::CsrMatrix;
use crate::substructuring::{EmbeddingMaps, Glob, GlobKind, GlobSet};

/// Relative tolerance for numerically dependent averages on one glob.
pub const DEPENDENCE_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    Arithmetic,
    Adaptive { pair: (usize, usize) },
}

/// One weighted average over a glob, to be equal on every subdomain sharing
/// the glob. Coefficients follow `glob_dofs`.
#[derive(Debug, Clone, PartialEq)]
pub struct GlobAverage {
    pub glob: usize,
    pub coefficients: Vec<f64>,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArithmeticGlobs {
    Edges,
    Faces,
    EdgesAndFaces,
}

/// Global dofs of a glob: nodes in order, components innermost.
pub fn glob_dofs(glob: &Glob, dofs_per_node: usize) -> Vec<usize> {
    glob.nodes
        .iter()
        .flat_map(|&v| (0..dofs_per_node).map(move |c| v * dofs_per_node + c))
        .collect()
}

/// `W^c` index of the copy of global dof `g` in subdomain `s`.
pub fn wc_index(maps: &EmbeddingMaps, g: usize, s: usize) -> usize {
    let &(_, l) = maps.copies[g]
        .iter()
        .find(|&&(t, _)| t == s)
        .expect("subdomain holds the glob dof");
    maps.local_to_wc[s][l]
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConstraintSet {
    pub averages: Vec<GlobAverage>,
}

/// Unweighted averages of each displacement component over the selected
/// globs, excluding Dirichlet dofs.
pub fn arithmetic_constraints(globs: &GlobSet, dofs_per_node: usize, fixed: &[bool], which: ArithmeticGlobs) -> ConstraintSet {
    let wanted = |k: GlobKind| match which {
        ArithmeticGlobs::Edges => k == GlobKind::Edge,
        ArithmeticGlobs::Faces => k == GlobKind::Face,
        ArithmeticGlobs::EdgesAndFaces => k != GlobKind::Corner,
    };
    let mut averages = Vec::new();
    for (g, glob) in globs.globs.iter().enumerate() {
        if !wanted(glob.kind) {
            continue;
        }
        let dofs = glob_dofs(glob, dofs_per_node);
        for c in 0..dofs_per_node {
            let free = (0..dofs.len()).filter(|&k| k % dofs_per_node == c && !fixed[dofs[k]]);
            let count = free.clone().count();
            if count == 0 {
                continue;
            }
            let mut coefficients = vec![0.0; dofs.len()];
            for k in free {
                coefficients[k] = 1.0 / count as f64;
            }
            averages.push(GlobAverage {
                glob: g,
                coefficients,
                provenance: Provenance::Arithmetic,
            });
        }
    }
    ConstraintSet { averages }
}

impl ConstraintSet {
    pub fn is_empty(&self) -> bool {
        self.averages.is_empty()
    }

    pub fn len(&self) -> usize {
        self.averages.len()
    }

    pub fn extend(&mut self, other: ConstraintSet) {
        self.averages.extend(other.averages);
    }

    /// Averages grouped by glob, in insertion order within each glob.
    pub fn by_glob(&self) -> BTreeMap<usize, Vec<&GlobAverage>> {
        let mut out: BTreeMap<usize, Vec<&GlobAverage>> = BTreeMap::new();
        for a in &self.averages {
            out.entry(a.glob).or_default().push(a);
        }
        out
    }

    /// Rows of `D`: `multiplicity − 1` per average.
    pub fn row_count(&self, globs: &GlobSet) -> usize {
        self.averages
            .iter()
            .map(|a| globs.globs[a.glob].multiplicity() - 1)
            .sum()
    }

    /// Removes averages that depend linearly on earlier averages of the same
    /// glob (Gram–Schmidt in insertion order). Returns the number removed.
    pub fn filter_dependent(&mut self) -> usize {
        let mut kept: Vec<GlobAverage> = Vec::with_capacity(self.averages.len());
        let mut basis: BTreeMap<usize, Vec<Vec<f64>>> = BTreeMap::new();
        let mut dropped = 0;
        for a in self.averages.drain(..) {
            let q = basis.entry(a.glob).or_default();
            let scale = norm(&a.coefficients);
            let mut r = a.coefficients.clone();
            for _ in 0..2 {
                for b in q.iter() {
                    let p = dot(&r, b);
                    for (x, y) in r.iter_mut().zip(b) {
                        *x -= p * y;
                    }
                }
            }
            let rest = norm(&r);
            if scale == 0.0 || rest <= DEPENDENCE_TOL * scale {
                dropped += 1;
                continue;
            }
            q.push(r.iter().map(|x| x / rest).collect());
            kept.push(a);
        }
        self.averages = kept;
        dropped
    }

    /// `D^c` in `W^c` numbering: for each average and each subdomain `s`
    /// after the first in the glob, the average on the first copy minus the
    /// average on copy `s`.
    pub fn rows_wc(&self, globs: &GlobSet, maps: &EmbeddingMaps) -> CsrMatrix {
        let mut triplets = Vec::new();
        let mut row = 0;
        for a in &self.averages {
            let glob = &globs.globs[a.glob];
            let dofs = glob_dofs(glob, maps.dofs_per_node);
            let first = glob.subdomains[0];
            for &s in &glob.subdomains[1..] {
                for (k, &c) in a.coefficients.iter().enumerate() {
                    if c != 0.0 {
                        triplets.push((row, wc_index(maps, dofs[k], first), c));
                        triplets.push((row, wc_index(maps, dofs[k], s), -c));
                    }
                }
                row += 1;
            }
        }
        CsrMatrix::from_triplets(row, maps.wc_dim, &triplets)
    }

    /// Plain-text listing: glob, provenance, coefficients.
    pub fn dump(&self) -> String {
        let mut s = String::new();
        for a in &self.averages {
            let prov = match a.provenance {
                Provenance::Arithmetic => "arithmetic".to_string(),
                Provenance::Adaptive { pair } => format!("adaptive({},{})", pair.0, pair.1),
            };
            let coeffs: Vec<String> = a.coefficients.iter().map(|c| format!("{c:.6e}")).collect();
            let _ = writeln!(s, "{} {} {}", a.glob, prov, coeffs.join(" "));
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn proportional_rows_are_filtered() {
        let mut set = ConstraintSet {
            averages: vec![
                GlobAverage {
                    glob: 0,
                    coefficients: vec![1.0, 2.0, 0.0],
                    provenance: Provenance::Arithmetic,
                },
                GlobAverage {
                    glob: 0,
                    coefficients: vec![-2.0, -4.0, 0.0],
                    provenance: Provenance::Arithmetic,
                },
                GlobAverage {
                    glob: 1,
                    coefficients: vec![1.0, 2.0, 0.0],
                    provenance: Provenance::Arithmetic,
                },
            ],
        };
        assert_eq!(set.filter_dependent(), 1);
        assert_eq!(set.len(), 2);
        assert_eq!(set.averages[1].glob, 1);
    }
}
