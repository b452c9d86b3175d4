//! PL scalar fields on triangulated surfaces: construction (heights,
//! geodesic distance fields, sidecar files), Lipschitz estimation, the
//! sup-norm gap to a distance function, injective perturbation and PL
//! criticality via lower/upper link connectivity.

use std::io::Write;
use std::path::Path;
use std::sync::Arc;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::mesh::{geodesic_distances, TriMesh};
use crate::unionfind::UnionFind;
use crate::{ReebError, Result};

/// One real value per mesh vertex, interpolated linearly over simplices.
#[derive(Debug, Clone)]
pub struct ScalarField {
    mesh: Arc<TriMesh>,
    values: Vec<f64>,
    lipschitz_l: f64,
    distinct: bool,
}

impl ScalarField {
    pub fn from_values(mesh: Arc<TriMesh>, values: Vec<f64>) -> Result<Self> {
        if values.len() != mesh.vertex_count() {
            return Err(ReebError::FieldLengthMismatch {
                got: values.len(),
                expected: mesh.vertex_count(),
            });
        }
        for (v, &x) in values.iter().enumerate() {
            if !x.is_finite() {
                return Err(ReebError::NonFiniteValue { vertex: v, value: x });
            }
        }
        let lipschitz_l = edge_lipschitz(&mesh, &values);
        let distinct = values_distinct(&values);
        Ok(Self {
            mesh,
            values,
            lipschitz_l,
            distinct,
        })
    }

    pub fn mesh(&self) -> &Arc<TriMesh> {
        &self.mesh
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, v: usize) -> f64 {
        self.values[v]
    }

    /// Max edge slope |df| / edge length.
    pub fn lipschitz_l(&self) -> f64 {
        self.lipschitz_l
    }

    pub fn distinct(&self) -> bool {
        self.distinct
    }

    pub fn range(&self) -> (f64, f64) {
        let lo = self.values.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        (lo, hi)
    }

    /// The negative filtration -f.
    pub fn negated(&self) -> Self {
        Self {
            mesh: self.mesh.clone(),
            values: self.values.iter().map(|v| -v).collect(),
            lipschitz_l: self.lipschitz_l,
            distinct: self.distinct,
        }
    }

    /// Sidecar format: one decimal value per line, line i = vertex i.
    pub fn load_sidecar(mesh: Arc<TriMesh>, path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        let mut values = Vec::with_capacity(mesh.vertex_count());
        for (i, line) in text.lines().enumerate() {
            let body = line.trim();
            if body.is_empty() {
                continue;
            }
            let x: f64 = body.parse().map_err(|_| ReebError::Parse {
                path: path.display().to_string(),
                line: i + 1,
                message: format!("bad field value '{body}'"),
            })?;
            values.push(x);
        }
        Self::from_values(mesh, values)
    }

    pub fn write_sidecar(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
        for v in &self.values {
            writeln!(out, "{v}")?;
        }
        Ok(())
    }
}

fn edge_lipschitz(mesh: &TriMesh, values: &[f64]) -> f64 {
    mesh.edges()
        .iter()
        .map(|e| (values[e.ends[0]] - values[e.ends[1]]).abs() / e.length)
        .fold(0.0, f64::max)
}

fn values_distinct(values: &[f64]) -> bool {
    let mut sorted: Vec<f64> = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted.windows(2).all(|w| w[0] < w[1])
}

/// value(v) = <position(v), axis/|axis|>. Edge slopes never exceed 1.
pub fn height_field(mesh: Arc<TriMesh>, axis: Vector3<f64>) -> Result<ScalarField> {
    let n = axis.norm();
    if !(n > 0.0) || !n.is_finite() {
        return Err(ReebError::ZeroAxis);
    }
    let unit = axis / n;
    let values = mesh
        .positions()
        .iter()
        .map(|p| p.coords.dot(&unit))
        .collect();
    ScalarField::from_values(mesh, values)
}

/// value(v) = edge-graph geodesic distance to `p`.
pub fn distance_field(mesh: Arc<TriMesh>, p: usize, subdivision: u32) -> Result<ScalarField> {
    mesh.require_connected()?;
    mesh.check_vertex(p)?;
    let idx = geodesic_distances(&mesh, &[p], subdivision)?;
    ScalarField::from_values(mesh, idx.distances)
}

/// Sup-norm gap between f and the distance function d(p,.), optionally
/// minimized over an additive shift of f.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpsilonP {
    pub eps: f64,
    pub shift_c: f64,
}

pub fn epsilon_p(
    field: &ScalarField,
    p: usize,
    optimize_shift: bool,
    subdivision: u32,
) -> Result<EpsilonP> {
    let mesh = field.mesh();
    mesh.require_connected()?;
    mesh.check_vertex(p)?;
    let d = geodesic_distances(mesh, &[p], subdivision)?.distances;
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for (fv, dv) in field.values().iter().zip(&d) {
        let g = fv - dv;
        lo = lo.min(g);
        hi = hi.max(g);
    }
    if optimize_shift {
        Ok(EpsilonP {
            eps: (hi - lo) / 2.0,
            shift_c: -(hi + lo) / 2.0,
        })
    } else {
        Ok(EpsilonP {
            eps: hi.abs().max(lo.abs()),
            shift_c: 0.0,
        })
    }
}

/// Deterministic injective perturbation: add rank(v) * eta where ranks come
/// from sorting by (value, vertex index). Keeps ||f' - f||_inf <= epsilon
/// and the Lipschitz increase below delta.
pub fn make_excellent(field: &ScalarField, epsilon: f64, delta: f64) -> Result<ScalarField> {
    if !(epsilon > 0.0) || !(delta > 0.0) {
        return Err(ReebError::InvalidParameter(
            "make_excellent needs epsilon > 0 and delta > 0".into(),
        ));
    }
    if field.distinct() {
        return Ok(field.clone());
    }
    let mesh = field.mesh().clone();
    let n = field.values().len();
    let min_edge = mesh
        .edges()
        .iter()
        .map(|e| e.length)
        .fold(f64::INFINITY, f64::min);
    let scale = field
        .values()
        .iter()
        .fold(1.0f64, |acc, v| acc.max(v.abs()));
    let eta_floor = 8.0 * f64::EPSILON * scale;
    let eta_full = epsilon.min(delta * min_edge) / n as f64;
    if eta_full < eta_floor {
        return Err(ReebError::PerturbationInfeasible {
            epsilon,
            min_epsilon: eta_floor * n as f64,
        });
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        field.values()[a]
            .total_cmp(&field.values()[b])
            .then(a.cmp(&b))
    });
    let mut eta = eta_full;
    for _ in 0..64 {
        let mut values = field.values().to_vec();
        for (rank, &v) in order.iter().enumerate() {
            values[v] += rank as f64 * eta;
        }
        if values_distinct(&values) {
            return ScalarField::from_values(mesh, values);
        }
        eta *= 0.5;
        if eta < eta_floor {
            break;
        }
    }
    Err(ReebError::PerturbationInfeasible {
        epsilon,
        min_epsilon: eta_floor * n as f64,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "class", rename_all = "snake_case")]
pub enum VertexClass {
    Regular,
    Min,
    Max,
    Saddle { multiplicity: usize },
}

/// PL criticality via lower/upper link component counts.
#[derive(Debug, Clone)]
pub struct CriticalityScan {
    pub classes: Vec<VertexClass>,
    /// Values of critical vertices, ascending.
    pub critical_values: Vec<f64>,
    /// Whether critical values are pairwise distinct; automatic for
    /// distinct-valued fields.
    pub excellent: bool,
}

impl CriticalityScan {
    pub fn count(&self, want: impl Fn(&VertexClass) -> bool) -> usize {
        self.classes.iter().filter(|c| want(c)).count()
    }

    pub fn minima(&self) -> usize {
        self.count(|c| matches!(c, VertexClass::Min))
    }

    pub fn maxima(&self) -> usize {
        self.count(|c| matches!(c, VertexClass::Max))
    }

    pub fn saddles(&self) -> usize {
        self.count(|c| matches!(c, VertexClass::Saddle { .. }))
    }

    pub fn saddle_multiplicity(&self) -> usize {
        self.classes
            .iter()
            .map(|c| match c {
                VertexClass::Saddle { multiplicity } => *multiplicity,
                _ => 0,
            })
            .sum()
    }

    /// min - saddle multiplicity + max; equals the Euler characteristic on
    /// closed surfaces.
    pub fn index_sum(&self) -> i64 {
        self.minima() as i64 + self.maxima() as i64 - self.saddle_multiplicity() as i64
    }

    pub fn critical_vertices(&self) -> impl Iterator<Item = usize> + '_ {
        self.classes
            .iter()
            .enumerate()
            .filter(|(_, c)| !matches!(c, VertexClass::Regular))
            .map(|(v, _)| v)
    }
}

/// Lower-link component count of `v` restricted to neighbors selected by
/// `keep`.
fn link_components(mesh: &TriMesh, v: usize, keep: impl Fn(usize) -> bool) -> usize {
    let members: Vec<usize> = mesh
        .vertex_neighbors(v)
        .map(|(u, _)| u)
        .filter(|&u| keep(u))
        .collect();
    if members.is_empty() {
        return 0;
    }
    let index: std::collections::HashMap<usize, usize> = members
        .iter()
        .enumerate()
        .map(|(i, &u)| (u, i))
        .collect();
    let mut uf = UnionFind::new(members.len());
    for (a, b) in mesh.link_edges(v) {
        if let (Some(&ia), Some(&ib)) = (index.get(&a), index.get(&b)) {
            uf.union(ia, ib);
        }
    }
    uf.class_count(0..members.len())
}

pub fn criticality_scan(field: &ScalarField) -> Result<CriticalityScan> {
    if !field.distinct() {
        return Err(ReebError::NonDistinctField);
    }
    let mesh = field.mesh();
    let values = field.values();
    let mut classes = Vec::with_capacity(values.len());
    let mut critical_values = Vec::new();
    for v in 0..values.len() {
        let fv = values[v];
        let lower = link_components(mesh, v, |u| values[u] < fv);
        let class = if lower == 0 {
            VertexClass::Min
        } else {
            let upper = link_components(mesh, v, |u| values[u] > fv);
            if upper == 0 {
                VertexClass::Max
            } else if lower >= 2 {
                VertexClass::Saddle {
                    multiplicity: lower - 1,
                }
            } else {
                VertexClass::Regular
            }
        };
        if !matches!(class, VertexClass::Regular) {
            critical_values.push(fv);
        }
        classes.push(class);
    }
    critical_values.sort_by(f64::total_cmp);
    let excellent = critical_values.windows(2).all(|w| w[0] < w[1]);
    Ok(CriticalityScan {
        classes,
        critical_values,
        excellent,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::{gen_sphere, gen_torus, TorusOrientation};
    use crate::mesh::tests::flat_pillow;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn sphere(refinements: u32) -> Arc<TriMesh> {
        Arc::new(gen_sphere(1.0, refinements).unwrap())
    }

    fn pole(mesh: &TriMesh, south: bool) -> usize {
        let mut best = 0;
        for v in 0..mesh.vertex_count() {
            let z = mesh.position(v).z;
            let bz = mesh.position(best).z;
            if (south && z < bz) || (!south && z > bz) {
                best = v;
            }
        }
        best
    }

    #[test]
    fn height_field_basics() {
        let m = sphere(2);
        let f = height_field(m.clone(), Vector3::new(0.0, 0.0, 1.0)).unwrap();
        let (lo, hi) = f.range();
        assert!(lo >= -1.0 - 1e-12 && hi <= 1.0 + 1e-12);
        assert!(f.lipschitz_l() <= 1.0 + 1e-12);
        let neg = height_field(m.clone(), Vector3::new(0.0, 0.0, -1.0)).unwrap();
        for v in 0..m.vertex_count() {
            assert_relative_eq!(neg.value(v), -f.value(v), epsilon = 1e-15);
        }
        assert!(matches!(
            height_field(m, Vector3::zeros()),
            Err(ReebError::ZeroAxis)
        ));
    }

    #[test]
    fn in_plane_height_on_flat_pillow_hits_slope_one() {
        let m = Arc::new(flat_pillow(4, 2, 2.0, 1.0));
        let f = height_field(m.clone(), Vector3::new(1.0, 0.0, 0.0)).unwrap();
        // axis-parallel edges have |df| equal to their length
        let exact = m
            .edges()
            .iter()
            .any(|e| {
                let d = (f.value(e.ends[0]) - f.value(e.ends[1])).abs();
                d > 0.0 && (d - e.length).abs() < 1e-12
            });
        assert!(exact);
        assert_relative_eq!(f.lipschitz_l(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn distance_field_matches_antipodal_arc() {
        let m = sphere(3);
        let north = pole(&m, false);
        let south = pole(&m, true);
        let f = distance_field(m, north, 2).unwrap();
        assert_eq!(f.value(north), 0.0);
        assert!((f.value(south) - PI).abs() / PI < 0.03);
        assert!(f.lipschitz_l() <= 1.0 + 1e-12);
    }

    #[test]
    fn epsilon_p_of_distance_field_is_zero() {
        let m = sphere(2);
        let p = pole(&m, true);
        let f = distance_field(m, p, 2).unwrap();
        let a = epsilon_p(&f, p, false, 2).unwrap();
        let b = epsilon_p(&f, p, true, 2).unwrap();
        assert_relative_eq!(a.eps, 0.0, epsilon = 1e-12);
        assert_relative_eq!(b.eps, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn epsilon_p_of_height_matches_analytic() {
        // independent oracle: on the unit sphere with f = z and p the south
        // pole, g(z) = z - arccos(-z) is monotone, so
        // unshifted eps = pi - 1 and shifted eps = (pi - 2) / 2
        let m = sphere(3);
        let south = pole(&m, true);
        let f = height_field(m, Vector3::new(0.0, 0.0, 1.0)).unwrap();
        let u = epsilon_p(&f, south, false, 2).unwrap();
        let s = epsilon_p(&f, south, true, 2).unwrap();
        assert!((u.eps - (PI - 1.0)).abs() / (PI - 1.0) < 0.03, "unshifted {}", u.eps);
        assert!(
            (s.eps - (PI - 2.0) / 2.0).abs() / ((PI - 2.0) / 2.0) < 0.03,
            "shifted {}",
            s.eps
        );
        assert!(s.eps <= u.eps);
        assert_eq!(u.shift_c, 0.0);
    }

    #[test]
    fn epsilon_p_of_constant_field_is_eccentricity() {
        let m = sphere(2);
        let p = 17usize;
        let f = ScalarField::from_values(m.clone(), vec![0.0; m.vertex_count()]).unwrap();
        // brute-force oracle over vertices
        let d = geodesic_distances(&m, &[p], 2).unwrap().distances;
        let ecc = d.iter().copied().fold(0.0f64, f64::max);
        let u = epsilon_p(&f, p, false, 2).unwrap();
        let s = epsilon_p(&f, p, true, 2).unwrap();
        assert_relative_eq!(u.eps, ecc, epsilon = 1e-12);
        assert_relative_eq!(s.eps, ecc / 2.0, epsilon = 1e-12);
    }

    #[test]
    fn make_excellent_identity_and_perturbation() {
        let m = sphere(2);
        let f = height_field(m.clone(), Vector3::new(0.37, -0.11, 0.92)).unwrap();
        if f.distinct() {
            let g = make_excellent(&f, 1e-6, 1e-6).unwrap();
            assert_eq!(f.values(), g.values());
        }
        let constant = ScalarField::from_values(m.clone(), vec![0.0; m.vertex_count()]).unwrap();
        let g = make_excellent(&constant, 1e-6, 1e-3).unwrap();
        assert!(g.distinct());
        assert!(g.values().iter().all(|v| v.abs() <= 1e-6));
        // idempotent on its own output
        let h = make_excellent(&g, 1e-6, 1e-3).unwrap();
        assert_eq!(g.values(), h.values());
    }

    #[test]
    fn make_excellent_controls_lipschitz_increase() {
        let m = sphere(2);
        // force a tied pair on a shared edge
        let mut values: Vec<f64> = m.positions().iter().map(|p| p.z).collect();
        let e = &m.edges()[0];
        let tied = values[e.ends[0]];
        values[e.ends[1]] = tied;
        let f = ScalarField::from_values(m.clone(), values).unwrap();
        assert!(!f.distinct());
        let delta = 1e-4;
        let g = make_excellent(&f, 1e-6, delta).unwrap();
        assert!(g.distinct());
        assert!(g.lipschitz_l() <= f.lipschitz_l() + delta);
        let max_move = f
            .values()
            .iter()
            .zip(g.values())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        assert!(max_move <= 1e-6);
    }

    #[test]
    fn make_excellent_reports_infeasible_epsilon() {
        let m = sphere(1);
        let f = ScalarField::from_values(m.clone(), vec![1.0; m.vertex_count()]).unwrap();
        match make_excellent(&f, 1e-300, 1.0) {
            Err(ReebError::PerturbationInfeasible { min_epsilon, .. }) => {
                assert!(min_epsilon > 1e-300);
            }
            other => panic!("expected infeasibility, got {other:?}"),
        }
    }

    #[test]
    fn criticality_on_sphere_height() {
        let m = sphere(3);
        let f = height_field(m, Vector3::new(0.0, 0.0, 1.0)).unwrap();
        let f = make_excellent(&f, 1e-9, 1e-6).unwrap();
        let scan = criticality_scan(&f).unwrap();
        assert_eq!(scan.minima(), 1);
        assert_eq!(scan.maxima(), 1);
        assert_eq!(scan.saddles(), 0);
        assert_eq!(scan.index_sum(), 2);
        assert!(scan.excellent);
    }

    #[test]
    fn criticality_on_standing_torus() {
        let m = Arc::new(gen_torus(2.0, 0.5, 32, 16, TorusOrientation::Standing).unwrap());
        let f = height_field(m.clone(), Vector3::new(0.0, 0.0, 1.0)).unwrap();
        let f = make_excellent(&f, 1e-9, 1e-6).unwrap();
        let scan = criticality_scan(&f).unwrap();
        assert_eq!(scan.minima(), 1);
        assert_eq!(scan.maxima(), 1);
        assert_eq!(scan.saddles(), 2);
        assert_eq!(scan.index_sum(), 0);
        assert_eq!(scan.index_sum(), m.euler_characteristic());
    }

    #[test]
    fn criticality_rejects_non_distinct() {
        let m = sphere(1);
        let f = ScalarField::from_values(m.clone(), vec![0.0; m.vertex_count()]).unwrap();
        assert!(matches!(
            criticality_scan(&f),
            Err(ReebError::NonDistinctField)
        ));
    }

    #[test]
    fn sidecar_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let m = sphere(1);
        let f = height_field(m.clone(), Vector3::new(0.0, 0.0, 1.0)).unwrap();
        let path = dir.path().join("f.field");
        f.write_sidecar(&path).unwrap();
        let g = ScalarField::load_sidecar(m, &path).unwrap();
        assert_eq!(f.values(), g.values());
    }
}
