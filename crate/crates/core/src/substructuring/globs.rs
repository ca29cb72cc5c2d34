use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::fem::{Decomposition, Mesh, Physics};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GlobKind {
    Corner,
    Edge,
    Face,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Glob {
    pub kind: GlobKind,
    /// Sorted global nodes.
    pub nodes: Vec<usize>,
    /// Sorted sharing subdomains.
    pub subdomains: Vec<usize>,
}

impl Glob {
    pub fn multiplicity(&self) -> usize {
        self.subdomains.len()
    }

    pub fn contains_pair(&self, i: usize, j: usize) -> bool {
        self.subdomains.binary_search(&i).is_ok() && self.subdomains.binary_search(&j).is_ok()
    }
}

/// Partition of the interface nodes into corners, edges and faces.
#[derive(Debug, Clone)]
pub struct GlobSet {
    pub globs: Vec<Glob>,
    /// Glob of every mesh node; `None` for interior nodes.
    pub node_glob: Vec<Option<usize>>,
}

impl GlobSet {
    fn from_globs(mut globs: Vec<Glob>, node_count: usize) -> Self {
        globs.retain(|g| !g.nodes.is_empty());
        globs.sort_by(|a, b| (a.kind, a.nodes[0]).cmp(&(b.kind, b.nodes[0])));
        let mut node_glob = vec![None; node_count];
        for (g, glob) in globs.iter().enumerate() {
            for &v in &glob.nodes {
                node_glob[v] = Some(g);
            }
        }
        GlobSet { globs, node_glob }
    }

    pub fn count(&self, kind: GlobKind) -> usize {
        self.globs.iter().filter(|g| g.kind == kind).count()
    }

    pub fn is_corner(&self, node: usize) -> bool {
        self.node_glob[node].is_some_and(|g| self.globs[g].kind == GlobKind::Corner)
    }

    pub fn corner_nodes(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self
            .globs
            .iter()
            .filter(|g| g.kind == GlobKind::Corner)
            .flat_map(|g| g.nodes.iter().copied())
            .collect();
        v.sort_unstable();
        v
    }

    /// Face-sharing subdomain pairs `(i, j)` with `i < j`, sorted.
    pub fn adjacent_pairs(&self) -> Vec<(usize, usize)> {
        let set: BTreeSet<(usize, usize)> = self
            .globs
            .iter()
            .filter(|g| g.kind == GlobKind::Face)
            .map(|g| (g.subdomains[0], g.subdomains[1]))
            .collect();
        set.into_iter().collect()
    }

    /// Face globs shared by exactly `i` and `j`.
    pub fn faces_between(&self, i: usize, j: usize) -> Vec<usize> {
        let key = if i < j { [i, j] } else { [j, i] };
        (0..self.globs.len())
            .filter(|&g| self.globs[g].kind == GlobKind::Face && self.globs[g].subdomains == key)
            .collect()
    }

    /// Globs of subdomain `i`.
    pub fn globs_of(&self, i: usize) -> Vec<usize> {
        (0..self.globs.len())
            .filter(|&g| self.globs[g].subdomains.binary_search(&i).is_ok())
            .collect()
    }

    pub fn summary(&self) -> String {
        let mut s = String::new();
        for kind in [GlobKind::Corner, GlobKind::Edge, GlobKind::Face] {
            let sizes: Vec<usize> = self
                .globs
                .iter()
                .filter(|g| g.kind == kind)
                .map(|g| g.nodes.len())
                .collect();
            let total: usize = sizes.iter().sum();
            let _ = writeln!(s, "{kind:?}: {} globs, {} nodes", sizes.len(), total);
        }
        for (g, glob) in self.globs.iter().enumerate() {
            let _ = writeln!(
                s,
                "  glob {g} {:?} nodes={} subdomains={:?}",
                glob.kind,
                glob.nodes.len(),
                glob.subdomains
            );
        }
        s
    }
}

/// Groups interface nodes by their sharing set; each connected component of
/// a group forms a glob.
pub fn classify_globs(mesh: &Mesh, decomposition: &Decomposition) -> GlobSet {
    let mut groups: BTreeMap<&[usize], Vec<usize>> = BTreeMap::new();
    for (v, subs) in decomposition.node_subdomains.iter().enumerate() {
        if subs.len() > 1 {
            groups.entry(subs.as_slice()).or_default().push(v);
        }
    }
    let mut globs = Vec::new();
    for (subs, nodes) in groups {
        for component in components(mesh, &nodes) {
            let kind = if subs.len() == 2 {
                GlobKind::Face
            } else if component.len() == 1 {
                GlobKind::Corner
            } else {
                GlobKind::Edge
            };
            globs.push(Glob {
                kind,
                nodes: component,
                subdomains: subs.to_vec(),
            });
        }
    }
    GlobSet::from_globs(globs, mesh.node_count())
}

fn components(mesh: &Mesh, nodes: &[usize]) -> Vec<Vec<usize>> {
    let members: BTreeSet<usize> = nodes.iter().copied().collect();
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for &start in nodes {
        if !seen.insert(start) {
            continue;
        }
        let mut comp = vec![start];
        let mut stack = vec![start];
        while let Some(v) = stack.pop() {
            for w in mesh.grid.neighbors(v) {
                if members.contains(&w) && seen.insert(w) {
                    comp.push(w);
                    stack.push(w);
                }
            }
        }
        comp.sort_unstable();
        out.push(comp);
    }
    out
}

/// Promotes nodes to corners: edge endpoints not next to an existing corner,
/// then face nodes until every face-sharing pair has one corner (scalar) or
/// three non-collinear corners (elasticity). `fixed_nodes` are never chosen
/// by the pair repair.
pub fn select_corners(globs: &GlobSet, mesh: &Mesh, physics: Physics, fixed_nodes: &[bool]) -> Result<GlobSet> {
    let mut corner: BTreeSet<usize> = globs.corner_nodes().into_iter().collect();
    let sharing = |v: usize| -> Vec<usize> { globs.globs[globs.node_glob[v].unwrap()].subdomains.clone() };

    for glob in globs.globs.iter().filter(|g| g.kind == GlobKind::Edge) {
        let members: BTreeSet<usize> = glob.nodes.iter().copied().collect();
        for &v in &glob.nodes {
            let inside = mesh.grid.neighbors(v).iter().filter(|w| members.contains(w)).count();
            if inside >= 2 {
                continue;
            }
            let near_corner = mesh.grid.neighbors(v).iter().any(|w| corner.contains(w));
            if !near_corner {
                corner.insert(v);
            }
        }
    }

    let pairs = globs.adjacent_pairs();
    for &(i, j) in &pairs {
        let mut face_nodes: Vec<usize> = globs
            .faces_between(i, j)
            .into_iter()
            .flat_map(|g| globs.globs[g].nodes.iter().copied())
            .collect();
        face_nodes.sort_unstable();
        let centroid = mean(&face_nodes.iter().map(|&v| mesh.coordinates[v]).collect::<Vec<_>>());
        loop {
            let pair_corners: Vec<[f64; 3]> = corner
                .iter()
                .filter(|&&v| {
                    let s = sharing(v);
                    s.contains(&i) && s.contains(&j)
                })
                .map(|&v| mesh.coordinates[v])
                .collect();
            let satisfied = match physics {
                Physics::Scalar => !pair_corners.is_empty(),
                Physics::Elasticity => spans_plane(&pair_corners),
            };
            if satisfied {
                break;
            }
            let candidates: Vec<usize> = face_nodes
                .iter()
                .copied()
                .filter(|&v| !corner.contains(&v) && !fixed_nodes[v])
                .collect();
            let score = |v: usize| -> f64 {
                let x = mesh.coordinates[v];
                match pair_corners.len() {
                    0 => 0.0,
                    1 => dist(x, pair_corners[0]),
                    _ => {
                        let (a, b) = farthest_pair(&pair_corners);
                        line_distance(x, a, b)
                    }
                }
            };
            let pick = if pair_corners.is_empty() {
                candidates.first().copied()
            } else {
                best_candidate(&candidates, score, |v| dist(mesh.coordinates[v], centroid))
            };
            match pick {
                Some(v) => {
                    corner.insert(v);
                }
                None => return Err(Error::CornerSelectionFailed(i, j)),
            }
        }
    }

    let mut out: Vec<Glob> = Vec::new();
    for glob in &globs.globs {
        let rest: Vec<usize> = glob.nodes.iter().copied().filter(|v| !corner.contains(v)).collect();
        for &v in glob.nodes.iter().filter(|v| corner.contains(v)) {
            out.push(Glob {
                kind: GlobKind::Corner,
                nodes: vec![v],
                subdomains: glob.subdomains.clone(),
            });
        }
        if !rest.is_empty() {
            out.push(Glob {
                kind: glob.kind,
                nodes: rest,
                subdomains: glob.subdomains.clone(),
            });
        }
    }
    Ok(GlobSet::from_globs(out, mesh.node_count()))
}

/// Maximal score; ties (to 1e-12 relative) go to the smaller tie-break value,
/// then to the smaller node. `None` when every score is zero.
fn best_candidate(candidates: &[usize], score: impl Fn(usize) -> f64, tie: impl Fn(usize) -> f64) -> Option<usize> {
    let best = candidates.iter().map(|&v| score(v)).fold(0.0f64, f64::max);
    if best <= 0.0 {
        return None;
    }
    candidates
        .iter()
        .copied()
        .filter(|&v| score(v) >= best * (1.0 - 1e-12))
        .min_by(|&a, &b| tie(a).total_cmp(&tie(b)).then(a.cmp(&b)))
}

fn mean(points: &[[f64; 3]]) -> [f64; 3] {
    let mut c = [0.0; 3];
    for p in points {
        for k in 0..3 {
            c[k] += p[k];
        }
    }
    let n = points.len().max(1) as f64;
    c.map(|v| v / n)
}

fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn len(a: [f64; 3]) -> f64 {
    (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt()
}

fn dist(a: [f64; 3], b: [f64; 3]) -> f64 {
    len(sub(a, b))
}

fn farthest_pair(points: &[[f64; 3]]) -> ([f64; 3], [f64; 3]) {
    let mut best = (points[0], points[0], -1.0);
    for (k, &a) in points.iter().enumerate() {
        for &b in &points[k + 1..] {
            let d = dist(a, b);
            if d > best.2 {
                best = (a, b, d);
            }
        }
    }
    (best.0, best.1)
}

fn line_distance(x: [f64; 3], a: [f64; 3], b: [f64; 3]) -> f64 {
    let ab = sub(b, a);
    let l = len(ab);
    if l == 0.0 {
        return dist(x, a);
    }
    len(cross(sub(x, a), ab)) / l
}

/// At least three points, not all on one line.
pub fn spans_plane(points: &[[f64; 3]]) -> bool {
    if points.len() < 3 {
        return false;
    }
    let (a, b) = farthest_pair(points);
    let scale = dist(a, b);
    if scale == 0.0 {
        return false;
    }
    points.iter().any(|&p| line_distance(p, a, b) > 1e-9 * scale)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::build_cube_mesh;

    fn select(per_axis: [usize; 3], h: usize, physics: Physics) -> (Mesh, GlobSet, GlobSet) {
        let (mesh, dec) = build_cube_mesh(per_axis, h, physics);
        let g = classify_globs(&mesh, &dec);
        let s = select_corners(&g, &mesh, physics, &vec![false; mesh.node_count()]).unwrap();
        (mesh, g, s)
    }

    #[test]
    fn cube_2x2x2_classification() {
        let (_, g, s) = select([2, 2, 2], 4, Physics::Elasticity);
        assert_eq!(g.count(GlobKind::Corner), 1);
        assert_eq!(g.count(GlobKind::Edge), 6);
        assert_eq!(g.count(GlobKind::Face), 12);
        assert_eq!(s.count(GlobKind::Corner), 7);
        assert_eq!(s.count(GlobKind::Edge), 6);
        assert_eq!(s.count(GlobKind::Face), 12);
    }

    #[test]
    fn two_subdomains_have_one_face() {
        let (_, g, s) = select([1, 1, 2], 3, Physics::Elasticity);
        assert_eq!(g.count(GlobKind::Face), 1);
        assert_eq!(g.count(GlobKind::Edge), 0);
        assert_eq!(g.count(GlobKind::Corner), 0);
        assert_eq!(s.count(GlobKind::Corner), 3);
        let (_, _, s) = select([1, 1, 2], 3, Physics::Scalar);
        assert_eq!(s.count(GlobKind::Corner), 1);
    }

    #[test]
    fn planar_line_is_one_edge() {
        let (_, g, s) = select([2, 2, 1], 4, Physics::Elasticity);
        assert_eq!(g.count(GlobKind::Edge), 1);
        assert_eq!(g.globs.iter().find(|g| g.kind == GlobKind::Edge).unwrap().nodes.len(), 5);
        // Two promoted endpoints plus one repair corner per face.
        assert_eq!(s.count(GlobKind::Corner), 2 + 4);
    }

    #[test]
    fn globs_partition_the_interface() {
        let (mesh, dec) = build_cube_mesh([3, 2, 2], 2, Physics::Scalar);
        let g = classify_globs(&mesh, &dec);
        let s = select_corners(&g, &mesh, Physics::Elasticity, &vec![false; mesh.node_count()]).unwrap();
        for set in [&g, &s] {
            let mut count = vec![0; mesh.node_count()];
            for glob in &set.globs {
                for &v in &glob.nodes {
                    count[v] += 1;
                }
                match glob.kind {
                    GlobKind::Face => assert_eq!(glob.multiplicity(), 2),
                    GlobKind::Edge => assert!(glob.multiplicity() > 2),
                    GlobKind::Corner => assert_eq!(glob.nodes.len(), 1),
                }
            }
            for v in 0..mesh.node_count() {
                let expected = usize::from(dec.is_interface_node(v));
                assert_eq!(count[v], expected);
            }
        }
    }

    #[test]
    fn every_pair_gets_non_collinear_corners() {
        let (mesh, _, s) = select([3, 2, 1], 3, Physics::Elasticity);
        for (i, j) in s.adjacent_pairs() {
            let pts: Vec<[f64; 3]> = s
                .globs
                .iter()
                .filter(|g| g.kind == GlobKind::Corner && g.contains_pair(i, j))
                .map(|g| mesh.coordinates[g.nodes[0]])
                .collect();
            assert!(spans_plane(&pts), "pair {i},{j}");
        }
    }

    #[test]
    fn failure_when_face_is_fully_fixed() {
        let (mesh, dec) = build_cube_mesh([1, 1, 2], 1, Physics::Elasticity);
        let g = classify_globs(&mesh, &dec);
        let fixed = vec![true; mesh.node_count()];
        assert!(matches!(
            select_corners(&g, &mesh, Physics::Elasticity, &fixed),
            Err(Error::CornerSelectionFailed(0, 1))
        ));
    }
}
