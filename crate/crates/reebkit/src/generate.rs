//! Reproducible test-manifold factory: icospheres, tori, and thickened
//! filtered graphs (forks, inverse forks and half-sphere caps glued along
//! matching boundary circles), plus closed-form sphere/fork constants.

use std::collections::HashMap;
use std::f64::consts::PI;

use nalgebra::Point3;
use serde::{Deserialize, Serialize};

use crate::field::ScalarField;
use crate::mesh::TriMesh;
use crate::{ReebError, Result};

// ---------------------------------------------------------------------------
// icosphere

const ICO_FACES: [[usize; 3]; 20] = [
    [0, 11, 5],
    [0, 5, 1],
    [0, 1, 7],
    [0, 7, 10],
    [0, 10, 11],
    [1, 5, 9],
    [5, 11, 4],
    [11, 10, 2],
    [10, 7, 6],
    [7, 1, 8],
    [3, 9, 4],
    [3, 4, 2],
    [3, 2, 6],
    [3, 6, 8],
    [3, 8, 9],
    [4, 9, 5],
    [2, 4, 11],
    [6, 2, 10],
    [8, 6, 7],
    [9, 8, 1],
];

fn icosahedron(radius: f64) -> (Vec<Point3<f64>>, Vec<[usize; 3]>) {
    let phi = (1.0 + 5.0f64.sqrt()) / 2.0;
    let raw = [
        (-1.0, phi, 0.0),
        (1.0, phi, 0.0),
        (-1.0, -phi, 0.0),
        (1.0, -phi, 0.0),
        (0.0, -1.0, phi),
        (0.0, 1.0, phi),
        (0.0, -1.0, -phi),
        (0.0, 1.0, -phi),
        (phi, 0.0, -1.0),
        (phi, 0.0, 1.0),
        (-phi, 0.0, -1.0),
        (-phi, 0.0, 1.0),
    ];
    let positions = raw
        .iter()
        .map(|&(x, y, z)| {
            let n = (x * x + y * y + z * z).sqrt();
            Point3::new(x / n * radius, y / n * radius, z / n * radius)
        })
        .collect();
    (positions, ICO_FACES.to_vec())
}

/// Icosahedron subdivided `refinements` times with radial projection.
/// 10*4^r + 2 vertices; for r >= 1 the mesh has exact vertices at both
/// poles (0, 0, +-radius).
pub fn gen_sphere(radius: f64, refinements: u32) -> Result<TriMesh> {
    if !(radius > 0.0) {
        return Err(ReebError::InvalidParameter("sphere radius must be > 0".into()));
    }
    let (mut positions, mut tris) = icosahedron(radius);
    for _ in 0..refinements {
        let mut cache: HashMap<(usize, usize), usize> = HashMap::new();
        let mut midpoint = |a: usize, b: usize, positions: &mut Vec<Point3<f64>>| -> usize {
            let key = (a.min(b), a.max(b));
            if let Some(&m) = cache.get(&key) {
                return m;
            }
            let p = nalgebra::center(&positions[a], &positions[b]);
            let n = p.coords.norm();
            let m = positions.len();
            positions.push(Point3::from(p.coords / n * radius));
            cache.insert(key, m);
            m
        };
        let mut next = Vec::with_capacity(tris.len() * 4);
        for [a, b, c] in tris {
            let ab = midpoint(a, b, &mut positions);
            let bc = midpoint(b, c, &mut positions);
            let ca = midpoint(c, a, &mut positions);
            next.push([a, ab, ca]);
            next.push([b, bc, ab]);
            next.push([c, ca, bc]);
            next.push([ab, bc, ca]);
        }
        tris = next;
    }
    TriMesh::new(positions, tris)
}

// ---------------------------------------------------------------------------
// torus

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TorusOrientation {
    /// Major circle in a vertical plane; the height field has 4 critical
    /// points and a cycle Reeb graph with two whiskers.
    Standing,
    /// Donut flat on the table; generic heights cut two major circles.
    Lying,
}

pub fn gen_torus(
    major_radius: f64,
    minor_radius: f64,
    seg_major: usize,
    seg_minor: usize,
    orientation: TorusOrientation,
) -> Result<TriMesh> {
    if !(major_radius > minor_radius && minor_radius > 0.0) {
        return Err(ReebError::InvalidParameter(
            "torus requires R > r > 0".into(),
        ));
    }
    if seg_major < 8 || seg_minor < 8 {
        return Err(ReebError::InvalidParameter(
            "torus requires >= 8 segments in both directions".into(),
        ));
    }
    let mut positions = Vec::with_capacity(seg_major * seg_minor);
    for i in 0..seg_major {
        let u = 2.0 * PI * i as f64 / seg_major as f64;
        for j in 0..seg_minor {
            let v = 2.0 * PI * j as f64 / seg_minor as f64;
            let ring = major_radius + minor_radius * v.cos();
            let p = match orientation {
                TorusOrientation::Standing => {
                    Point3::new(ring * u.cos(), minor_radius * v.sin(), ring * u.sin())
                }
                TorusOrientation::Lying => {
                    Point3::new(ring * u.cos(), ring * u.sin(), minor_radius * v.sin())
                }
            };
            positions.push(p);
        }
    }
    let mut tris = Vec::with_capacity(seg_major * seg_minor * 2);
    for i in 0..seg_major {
        let ni = (i + 1) % seg_major;
        for j in 0..seg_minor {
            let nj = (j + 1) % seg_minor;
            let v0 = i * seg_minor + j;
            let v1 = i * seg_minor + nj;
            let v2 = ni * seg_minor + j;
            let v3 = ni * seg_minor + nj;
            tris.push([v0, v1, v2]);
            tris.push([v1, v3, v2]);
        }
    }
    TriMesh::new(positions, tris)
}

// ---------------------------------------------------------------------------
// closed forms

/// Gamma(half/2) for integer half >= 1, via the recurrence from
/// Gamma(1/2) = sqrt(pi) and Gamma(1) = 1. Exact where the result is
/// rational.
fn gamma_half(half: u32) -> f64 {
    let mut x = half;
    let mut acc = 1.0f64;
    while x > 2 {
        x -= 2;
        acc *= x as f64 / 2.0;
    }
    if x == 1 {
        acc * PI.sqrt()
    } else {
        acc
    }
}

/// pi^(j/2) for integer j (possibly negative), keeping integer powers free
/// of square-root round-off.
fn pi_half_pow(j: i32) -> f64 {
    if j.rem_euclid(2) == 0 {
        PI.powi(j / 2)
    } else {
        PI.powi((j - 1) / 2) * PI.sqrt()
    }
}

/// Total n-dimensional Hausdorff measure of the unit n-sphere:
/// s_n = 2 pi^((n+1)/2) / Gamma((n+1)/2).
pub fn sphere_measure(n: u32) -> Result<f64> {
    if n == 0 {
        return Err(ReebError::InvalidParameter("sphere dimension must be >= 1".into()));
    }
    Ok(2.0 * pi_half_pow(n as i32 + 1) / gamma_half(n + 1))
}

/// n-thickness of the n-sphere, s_n / pi^n; independent of the radius.
pub fn sphere_thickness(n: u32) -> Result<f64> {
    if n == 0 {
        return Err(ReebError::InvalidParameter("sphere dimension must be >= 1".into()));
    }
    // s_n / pi^n = 2 pi^((1-n)/2) / Gamma((n+1)/2)
    Ok(2.0 * pi_half_pow(1 - n as i32) / gamma_half(n + 1))
}

/// Thickness lower bound of an n-dimensional thickened k-fork:
/// s_(n-1) / (k pi)^(n-1).
pub fn fork_bound(n: u32, k: u32) -> Result<f64> {
    if n < 2 {
        return Err(ReebError::InvalidParameter("fork bound needs n >= 2".into()));
    }
    if k == 0 {
        return Err(ReebError::InvalidParameter("fork arity must be >= 1".into()));
    }
    Ok(sphere_thickness(n - 1)? / (k as f64).powi(n as i32 - 1))
}

/// Thickness lower bound of an n-dimensional thickened graph whose maximal
/// fork arity is K.
pub fn graph_bound(n: u32, k_max: u32) -> Result<f64> {
    fork_bound(n, k_max)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ClosedFormQuery {
    SphereMeasure { n: u32 },
    SphereThickness { n: u32 },
    ForkBound { n: u32, k: u32 },
    GraphBound { n: u32, k_max: u32 },
}

pub fn closed_forms(query: ClosedFormQuery) -> Result<f64> {
    match query {
        ClosedFormQuery::SphereMeasure { n } => sphere_measure(n),
        ClosedFormQuery::SphereThickness { n } => sphere_thickness(n),
        ClosedFormQuery::ForkBound { n, k } => fork_bound(n, k),
        ClosedFormQuery::GraphBound { n, k_max } => graph_bound(n, k_max),
    }
}

// ---------------------------------------------------------------------------
// thickened filtered graphs

/// One vertical block of a thickened filtered graph. Consecutive blocks
/// glue along their boundary circles, which must match in count, radius and
/// center positions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Block {
    /// Half-sphere opening upward; the first block.
    CapBottom { center: f64, radius: f64 },
    /// Half-spheres closing every open boundary circle; the last block.
    CapTop,
    /// One tube fanning out into `centers.len()` tubes. Disk centers are
    /// collinear on the x-axis and move linearly from the merged
    /// configuration to `centers` across the block height.
    Fork {
        centers: Vec<f64>,
        radius: f64,
        height: f64,
    },
    /// A fork with the negative filtration: `centers.len()` tubes merging
    /// into one.
    InverseFork {
        centers: Vec<f64>,
        radius: f64,
        height: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThickenedGraphSpec {
    pub blocks: Vec<Block>,
    /// Target segments around one circle; sets the in-plane grid step.
    #[serde(default = "default_segments")]
    pub segments: usize,
    /// Vertical grid steps across the shortest block.
    #[serde(default = "default_slices")]
    pub slices: usize,
}

fn default_segments() -> usize {
    24
}

fn default_slices() -> usize {
    10
}

impl ThickenedGraphSpec {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text)
            .map_err(|e| ReebError::RejectedSpec(format!("spec parse error: {e}")))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("spec serializes")
    }
}

/// Horizontal configuration at one height: disk centers on the x-axis and
/// the common disk radius.
#[derive(Debug, Clone)]
struct SliceConfig {
    centers: Vec<f64>,
    radius: f64,
}

#[derive(Debug, Clone)]
struct BlockProfile {
    z_lo: f64,
    z_hi: f64,
    kind: ProfileKind,
}

#[derive(Debug, Clone)]
enum ProfileKind {
    CapBottom { center: f64, radius: f64 },
    CapTop { centers: Vec<f64>, radius: f64 },
    Fork { from: Vec<f64>, to: Vec<f64>, radius: f64 },
}

impl BlockProfile {
    fn config_at(&self, z: f64) -> SliceConfig {
        let span = self.z_hi - self.z_lo;
        let tau = ((z - self.z_lo) / span).clamp(0.0, 1.0);
        match &self.kind {
            ProfileKind::CapBottom { center, radius } => {
                let a = tau * span;
                SliceConfig {
                    centers: vec![*center],
                    radius: (2.0 * radius * a - a * a).max(0.0).sqrt(),
                }
            }
            ProfileKind::CapTop { centers, radius } => {
                let a = tau * span;
                SliceConfig {
                    centers: centers.clone(),
                    radius: (radius * radius - a * a).max(0.0).sqrt(),
                }
            }
            ProfileKind::Fork { from, to, radius } => SliceConfig {
                centers: from
                    .iter()
                    .zip(to)
                    .map(|(&a, &b)| (1.0 - tau) * a + tau * b)
                    .collect(),
                radius: *radius,
            },
        }
    }
}

pub struct ThickenedGraph {
    pub mesh: std::sync::Arc<TriMesh>,
    pub field: ScalarField,
    /// Maximal fork arity used in the construction.
    pub k_max: u32,
    /// First Betti number of the generated surface (mod 2).
    pub b1: usize,
}

const CENTER_TOL: f64 = 1e-9;

fn validate_blocks(spec: &ThickenedGraphSpec) -> Result<(Vec<BlockProfile>, u32)> {
    if spec.blocks.len() < 2 {
        return Err(ReebError::RejectedSpec(
            "need at least a bottom cap and a top cap".into(),
        ));
    }
    let mut profiles = Vec::new();
    let mut k_max = 1u32;
    // open boundary circles carried between blocks: sorted centers + radius
    let mut state: Option<(Vec<f64>, f64)> = None;
    let mut z = 0.0f64;
    for (bi, block) in spec.blocks.iter().enumerate() {
        match block {
            Block::CapBottom { center, radius } => {
                if bi != 0 {
                    return Err(ReebError::RejectedSpec(
                        "cap_bottom must be the first block".into(),
                    ));
                }
                if !(radius > &0.0) {
                    return Err(ReebError::RejectedSpec("cap radius must be > 0".into()));
                }
                profiles.push(BlockProfile {
                    z_lo: z,
                    z_hi: z + radius,
                    kind: ProfileKind::CapBottom {
                        center: *center,
                        radius: *radius,
                    },
                });
                z += radius;
                state = Some((vec![*center], *radius));
            }
            Block::CapTop => {
                let (centers, radius) = state.take().ok_or_else(|| {
                    ReebError::RejectedSpec("cap_top with no open boundary circles".into())
                })?;
                if bi != spec.blocks.len() - 1 {
                    return Err(ReebError::RejectedSpec(
                        "cap_top must be the last block".into(),
                    ));
                }
                profiles.push(BlockProfile {
                    z_lo: z,
                    z_hi: z + radius,
                    kind: ProfileKind::CapTop { centers, radius },
                });
                z += radius;
            }
            Block::Fork {
                centers,
                radius,
                height,
            }
            | Block::InverseFork {
                centers,
                radius,
                height,
            } => {
                let inverse = matches!(block, Block::InverseFork { .. });
                let k = centers.len();
                if k < 2 {
                    return Err(ReebError::RejectedSpec(format!(
                        "block {bi}: fork needs at least 2 branch centers"
                    )));
                }
                if !(height > &0.0) || !(radius > &0.0) {
                    return Err(ReebError::RejectedSpec(format!(
                        "block {bi}: fork height and radius must be > 0"
                    )));
                }
                let mut sorted = centers.clone();
                sorted.sort_by(f64::total_cmp);
                if sorted.windows(2).any(|w| w[1] - w[0] < 2.0 * radius + CENTER_TOL) {
                    return Err(ReebError::RejectedSpec(format!(
                        "block {bi}: split-side disks overlap (consecutive centers closer than 2*radius)"
                    )));
                }
                let (prev_centers, prev_radius) = state.take().ok_or_else(|| {
                    ReebError::RejectedSpec(format!("block {bi}: nothing to glue onto"))
                })?;
                if (prev_radius - radius).abs() > CENTER_TOL {
                    return Err(ReebError::GluingMismatch {
                        lower: bi - 1,
                        upper: bi,
                        message: format!("radius {prev_radius} vs {radius}"),
                    });
                }
                let merged = sorted.iter().sum::<f64>() / k as f64;
                let (bottom, top): (Vec<f64>, Vec<f64>) = if inverse {
                    (sorted.clone(), vec![merged; k])
                } else {
                    (vec![prev_centers[0]; k], sorted.clone())
                };
                // gluing: bottom boundary circles must match what is open
                let bottom_circles: Vec<f64> = if inverse {
                    sorted.clone()
                } else {
                    vec![prev_centers[0]]
                };
                if prev_centers.len() != bottom_circles.len()
                    || prev_centers
                        .iter()
                        .zip(&bottom_circles)
                        .any(|(a, b)| (a - b).abs() > CENTER_TOL)
                {
                    return Err(ReebError::GluingMismatch {
                        lower: bi - 1,
                        upper: bi,
                        message: format!(
                            "open circles at {prev_centers:?}, block expects {bottom_circles:?}"
                        ),
                    });
                }
                k_max = k_max.max(k as u32);
                profiles.push(BlockProfile {
                    z_lo: z,
                    z_hi: z + height,
                    kind: ProfileKind::Fork {
                        from: bottom,
                        to: top,
                        radius: *radius,
                    },
                });
                z += height;
                state = Some((
                    if inverse { vec![merged] } else { sorted },
                    *radius,
                ));
            }
        }
    }
    if state.is_some() {
        return Err(ReebError::RejectedSpec(
            "open boundary circles left unglued and uncapped".into(),
        ));
    }
    Ok((profiles, k_max))
}

struct SliceField {
    profiles: Vec<BlockProfile>,
}

impl SliceField {
    /// Signed distance-to-surface proxy: negative inside the thickened
    /// graph, zero on it. Outside the block stack it extends by the 3D
    /// distance to the nearest cap apex, which keeps it continuous.
    fn eval(&self, x: f64, y: f64, z: f64) -> f64 {
        let first = self.profiles.first().unwrap();
        let last = self.profiles.last().unwrap();
        if z < first.z_lo {
            let c = first.config_at(first.z_lo);
            return dist_to_apexes(x, y, z - first.z_lo, &c.centers);
        }
        if z > last.z_hi {
            let c = last.config_at(last.z_hi);
            return dist_to_apexes(x, y, z - last.z_hi, &c.centers);
        }
        let profile = self
            .profiles
            .iter()
            .find(|p| z <= p.z_hi)
            .unwrap_or(last);
        let c = profile.config_at(z);
        let d2d = c
            .centers
            .iter()
            .map(|&cx| ((x - cx).powi(2) + y * y).sqrt())
            .fold(f64::INFINITY, f64::min);
        d2d - c.radius
    }
}

fn dist_to_apexes(x: f64, y: f64, dz: f64, centers: &[f64]) -> f64 {
    centers
        .iter()
        .map(|&cx| ((x - cx).powi(2) + y * y + dz * dz).sqrt())
        .fold(f64::INFINITY, f64::min)
}

/// Kuhn decomposition of the unit cube into 6 tetrahedra sharing the main
/// diagonal; translation-invariant, so shared cube faces triangulate
/// identically and the extracted surface is watertight.
const CUBE_TETS: [[usize; 4]; 6] = [
    [0, 1, 3, 7],
    [0, 3, 2, 7],
    [0, 2, 6, 7],
    [0, 6, 4, 7],
    [0, 4, 5, 7],
    [0, 5, 1, 7],
];

pub fn gen_thickened_graph(spec: &ThickenedGraphSpec) -> Result<ThickenedGraph> {
    if spec.segments < 8 {
        return Err(ReebError::RejectedSpec("segments must be >= 8".into()));
    }
    if spec.slices < 4 {
        return Err(ReebError::RejectedSpec("slices must be >= 4".into()));
    }
    let (profiles, k_max) = validate_blocks(spec)?;

    let mut radius_max = 0.0f64;
    let mut x_lo = f64::INFINITY;
    let mut x_hi = f64::NEG_INFINITY;
    let mut h_min = f64::INFINITY;
    for p in &profiles {
        h_min = h_min.min(p.z_hi - p.z_lo);
        for tau in [0.0, 1.0] {
            let c = p.config_at(p.z_lo + tau * (p.z_hi - p.z_lo));
            radius_max = radius_max.max(c.radius);
            for &cx in &c.centers {
                x_lo = x_lo.min(cx - c.radius);
                x_hi = x_hi.max(cx + c.radius);
            }
        }
    }
    let z_lo = profiles.first().unwrap().z_lo;
    let z_hi = profiles.last().unwrap().z_hi;

    let dxy = 2.0 * PI * radius_max / spec.segments as f64;
    let dz = h_min / spec.slices as f64;
    let pad = 2.0;
    let x0 = x_lo - pad * dxy;
    let y0 = -radius_max - pad * dxy;
    let z0 = z_lo - pad * dz;
    let nx = (((x_hi - x_lo) + 2.0 * pad * dxy) / dxy).ceil() as usize + 1;
    let ny = ((2.0 * radius_max + 2.0 * pad * dxy) / dxy).ceil() as usize + 1;
    let nz = (((z_hi - z_lo) + 2.0 * pad * dz) / dz).ceil() as usize + 1;

    let field = SliceField { profiles };
    let nudge = 1e-7 * radius_max;
    let grid_id = |ix: usize, iy: usize, iz: usize| (ix * (ny + 1) + iy) * (nz + 1) + iz;
    let mut values = vec![0.0f64; (nx + 1) * (ny + 1) * (nz + 1)];
    let mut points = vec![Point3::origin(); values.len()];
    for ix in 0..=nx {
        for iy in 0..=ny {
            for iz in 0..=nz {
                let p = Point3::new(
                    x0 + ix as f64 * dxy,
                    y0 + iy as f64 * dxy,
                    z0 + iz as f64 * dz,
                );
                let mut v = field.eval(p.x, p.y, p.z);
                if v.abs() < nudge {
                    v = if v >= 0.0 { nudge } else { -nudge };
                }
                let id = grid_id(ix, iy, iz);
                values[id] = v;
                points[id] = p;
            }
        }
    }

    let mut crossing: HashMap<(usize, usize), usize> = HashMap::new();
    let mut positions: Vec<Point3<f64>> = Vec::new();
    let mut tris: Vec<[usize; 3]> = Vec::new();
    let mut cross_vertex = |a: usize, b: usize,
                            positions: &mut Vec<Point3<f64>>,
                            values: &[f64],
                            points: &[Point3<f64>]|
     -> usize {
        let key = (a.min(b), a.max(b));
        if let Some(&v) = crossing.get(&key) {
            return v;
        }
        let (fa, fb) = (values[a], values[b]);
        // clamped interpolation keeps crossings away from grid corners so
        // no sliver edge collapses to zero length
        let t = (fa / (fa - fb)).clamp(1e-3, 1.0 - 1e-3);
        let p = points[a] + (points[b] - points[a]) * t;
        let id = positions.len();
        positions.push(p);
        crossing.insert(key, id);
        id
    };

    for ix in 0..nx {
        for iy in 0..ny {
            for iz in 0..nz {
                let corner = |bits: usize| {
                    grid_id(
                        ix + (bits & 1),
                        iy + ((bits >> 1) & 1),
                        iz + ((bits >> 2) & 1),
                    )
                };
                let cube: [usize; 8] = std::array::from_fn(corner);
                // quick reject: all corners on one side
                let any_neg = cube.iter().any(|&c| values[c] < 0.0);
                let any_pos = cube.iter().any(|&c| values[c] > 0.0);
                if !(any_neg && any_pos) {
                    continue;
                }
                for tet in &CUBE_TETS {
                    let ids = [cube[tet[0]], cube[tet[1]], cube[tet[2]], cube[tet[3]]];
                    let neg: Vec<usize> = ids.iter().copied().filter(|&i| values[i] < 0.0).collect();
                    let pos: Vec<usize> = ids.iter().copied().filter(|&i| values[i] > 0.0).collect();
                    match (neg.len(), pos.len()) {
                        (1, 3) | (3, 1) => {
                            let (lone, others) = if neg.len() == 1 {
                                (neg[0], pos)
                            } else {
                                (pos[0], neg)
                            };
                            let v: Vec<usize> = others
                                .iter()
                                .map(|&o| cross_vertex(lone, o, &mut positions, &values, &points))
                                .collect();
                            tris.push([v[0], v[1], v[2]]);
                        }
                        (2, 2) => {
                            let (a, b) = (neg[0], neg[1]);
                            let (c, d) = (pos[0], pos[1]);
                            let ac = cross_vertex(a, c, &mut positions, &values, &points);
                            let ad = cross_vertex(a, d, &mut positions, &values, &points);
                            let bc = cross_vertex(b, c, &mut positions, &values, &points);
                            let bd = cross_vertex(b, d, &mut positions, &values, &points);
                            tris.push([ac, ad, bd]);
                            tris.push([ac, bd, bc]);
                        }
                        _ => {}
                    }
                }
            }
        }
    }

    if tris.is_empty() {
        return Err(ReebError::RejectedSpec("spec produced an empty surface".into()));
    }
    let mesh = std::sync::Arc::new(TriMesh::new(positions, tris)?);
    let b1 = crate::homology::betti(&mesh)?.b1;
    let values: Vec<f64> = mesh.positions().iter().map(|p| p.z).collect();
    let field = ScalarField::from_values(mesh.clone(), values)?;
    Ok(ThickenedGraph {
        mesh,
        field,
        k_max,
        b1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn closed_form_constants() {
        assert_eq!(sphere_thickness(1).unwrap(), 2.0);
        assert_relative_eq!(sphere_thickness(2).unwrap(), 4.0 / PI, max_relative = 1e-14);
        assert_eq!(fork_bound(2, 2).unwrap(), 1.0);
        assert_eq!(fork_bound(2, 3).unwrap(), 2.0 / 3.0);
        assert_relative_eq!(fork_bound(3, 2).unwrap(), 1.0 / PI, max_relative = 1e-14);
        assert_relative_eq!(sphere_measure(1).unwrap(), 2.0 * PI, max_relative = 1e-14);
        assert_relative_eq!(sphere_measure(2).unwrap(), 4.0 * PI, max_relative = 1e-14);
        assert_relative_eq!(sphere_measure(3).unwrap(), 2.0 * PI * PI, max_relative = 1e-14);
        assert!(sphere_measure(0).is_err());
        assert!(fork_bound(2, 0).is_err());
    }

    #[test]
    fn icosphere_counts_and_euler() {
        for (r, v) in [(0u32, 12usize), (1, 42), (2, 162), (3, 642), (4, 2562)] {
            let m = gen_sphere(1.0, r).unwrap();
            assert_eq!(m.vertex_count(), v);
            assert_eq!(m.euler_characteristic(), 2);
        }
    }

    #[test]
    fn sphere_area_scales_with_radius() {
        let m = gen_sphere(2.0, 3).unwrap();
        let analytic = 16.0 * PI;
        assert!((m.total_area() - analytic).abs() / analytic < 0.02);
    }

    #[test]
    fn torus_topology() {
        let m = gen_torus(2.0, 0.5, 24, 12, TorusOrientation::Standing).unwrap();
        assert_eq!(m.euler_characteristic(), 0);
        assert_eq!(m.components(), 1);
        assert!(gen_torus(0.5, 2.0, 24, 12, TorusOrientation::Standing).is_err());
        assert!(gen_torus(2.0, 0.5, 4, 12, TorusOrientation::Standing).is_err());
    }

    fn fork_spec(centers: Vec<f64>, segments: usize, slices: usize) -> ThickenedGraphSpec {
        ThickenedGraphSpec {
            blocks: vec![
                Block::CapBottom {
                    center: centers.iter().sum::<f64>() / centers.len() as f64,
                    radius: 0.5,
                },
                Block::Fork {
                    centers,
                    radius: 0.5,
                    height: 2.0,
                },
                Block::CapTop,
            ],
            segments,
            slices,
        }
    }

    #[test]
    fn two_fork_is_a_sphere() {
        let g = gen_thickened_graph(&fork_spec(vec![-0.75, 0.75], 20, 8)).unwrap();
        assert_eq!(g.mesh.euler_characteristic(), 2);
        assert_eq!(g.b1, 0);
        assert_eq!(g.k_max, 2);
        assert_eq!(g.mesh.components(), 1);
    }

    #[test]
    fn theta_graph_is_a_torus() {
        let spec = ThickenedGraphSpec {
            blocks: vec![
                Block::CapBottom { center: 0.0, radius: 0.5 },
                Block::Fork {
                    centers: vec![-0.75, 0.75],
                    radius: 0.5,
                    height: 2.0,
                },
                Block::InverseFork {
                    centers: vec![-0.75, 0.75],
                    radius: 0.5,
                    height: 2.0,
                },
                Block::CapTop,
            ],
            segments: 20,
            slices: 8,
        };
        let g = gen_thickened_graph(&spec).unwrap();
        assert_eq!(g.mesh.euler_characteristic(), 0);
        assert_eq!(g.b1, 2);
        assert_eq!(g.k_max, 2);
    }

    #[test]
    fn three_fork_rejoined_is_genus_two() {
        let spec = ThickenedGraphSpec {
            blocks: vec![
                Block::CapBottom { center: 0.0, radius: 0.5 },
                Block::Fork {
                    centers: vec![-1.5, 0.0, 1.5],
                    radius: 0.5,
                    height: 2.0,
                },
                Block::InverseFork {
                    centers: vec![-1.5, 0.0, 1.5],
                    radius: 0.5,
                    height: 2.0,
                },
                Block::CapTop,
            ],
            segments: 20,
            slices: 8,
        };
        let g = gen_thickened_graph(&spec).unwrap();
        assert_eq!(g.mesh.euler_characteristic(), -2);
        assert_eq!(g.b1, 4);
        assert_eq!(g.k_max, 3);
    }

    #[test]
    fn degenerate_cap_pair_is_a_sphere() {
        let spec = ThickenedGraphSpec {
            blocks: vec![
                Block::CapBottom { center: 0.0, radius: 0.5 },
                Block::CapTop,
            ],
            segments: 24,
            slices: 8,
        };
        let g = gen_thickened_graph(&spec).unwrap();
        assert_eq!(g.mesh.euler_characteristic(), 2);
        assert_eq!(g.b1, 0);
        let area = g.mesh.total_area();
        let analytic = 4.0 * PI * 0.25;
        assert!((area - analytic).abs() / analytic < 0.05, "area {area} vs {analytic}");
    }

    #[test]
    fn gluing_mismatch_rejected() {
        let spec = ThickenedGraphSpec {
            blocks: vec![
                Block::CapBottom { center: 0.0, radius: 0.5 },
                Block::Fork {
                    centers: vec![-0.75, 0.75],
                    radius: 0.4,
                    height: 2.0,
                },
                Block::CapTop,
            ],
            segments: 16,
            slices: 6,
        };
        assert!(matches!(
            gen_thickened_graph(&spec),
            Err(ReebError::GluingMismatch { .. })
        ));
    }

    #[test]
    fn overlapping_split_disks_rejected() {
        let spec = fork_spec(vec![-0.4, 0.4], 16, 6);
        assert!(matches!(
            gen_thickened_graph(&spec),
            Err(ReebError::RejectedSpec(_))
        ));
    }

    #[test]
    fn spec_toml_round_trip() {
        let spec = fork_spec(vec![-1.5, 0.0, 1.5], 20, 8);
        let text = spec.to_toml();
        let back = ThickenedGraphSpec::from_toml(&text).unwrap();
        assert_eq!(spec, back);
    }

    #[test]
    fn height_field_is_one_lipschitz_within_slack() {
        let g = gen_thickened_graph(&fork_spec(vec![-0.75, 0.75], 20, 8)).unwrap();
        assert!(g.field.lipschitz_l() <= 1.0 + 1e-12);
    }
}
