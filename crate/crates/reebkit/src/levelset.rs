//! Level sets of PL fields: extraction into closed polylines, per-component
//! length and geodesic diameter, the thickness invariant (infimum over
//! sampled levels of length/diameter), the coarea inequality check, and the
//! fiber-diameter bound evaluated from measured ingredients.

use std::collections::HashMap;

use nalgebra::Point3;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::field::{criticality_scan, ScalarField};
use crate::mesh::{EdgeGraph, SurfacePoint};
use crate::reeb::{GraphPoint, ReebGraph};
use crate::{ReebError, Result, SamplingConfig};

/// Crossing point of a level on a mesh edge.
#[derive(Debug, Clone)]
pub struct LevelPoint {
    pub edge: usize,
    pub position: Point3<f64>,
}

/// One closed polyline of a level set.
#[derive(Debug, Clone)]
pub struct LevelComponent {
    /// Cyclic point sequence.
    pub points: Vec<LevelPoint>,
    /// Polyline length (the 1-dimensional Hausdorff measure for n = 2).
    pub measure: f64,
}

impl LevelComponent {
    /// measure / diameter^(n-1); by convention 1 when the diameter is 0.
    pub fn thickness(&self, diameter: f64) -> f64 {
        if diameter == 0.0 {
            1.0
        } else {
            self.measure / diameter
        }
    }

    pub fn surface_points(&self) -> impl Iterator<Item = SurfacePoint> + '_ {
        self.points.iter().map(|p| SurfacePoint::OnEdge {
            edge: p.edge,
            position: p.position,
        })
    }
}

#[derive(Debug, Clone)]
pub struct LevelSetSlice {
    /// Level actually extracted (after any nudge).
    pub t: f64,
    /// Requested level when a nudge was applied.
    pub nudged_from: Option<f64>,
    /// Regular after nudging: t differs from every vertex value.
    pub is_regular: bool,
    pub components: Vec<LevelComponent>,
}

fn nudge_to_regular(field: &ScalarField, mut t: f64) -> (f64, Option<f64>) {
    let values = field.values();
    let (lo, hi) = field.range();
    let step = 1e-9 * (hi - lo).max(f64::MIN_POSITIVE);
    if !values.iter().any(|&v| v == t) {
        return (t, None);
    }
    let requested = t;
    for _ in 0..64 {
        // shift toward the midpoint of the surrounding distinct values
        let below = values.iter().copied().filter(|&v| v < t).fold(lo, f64::max);
        let above = values.iter().copied().filter(|&v| v > t).fold(hi, f64::min);
        let mid = (below + above) / 2.0;
        t += if mid >= t { step } else { -step };
        if !values.iter().any(|&v| v == t) {
            return (t, Some(requested));
        }
    }
    (t, Some(requested))
}

/// Extracts the level set at t as closed polylines. t is nudged to the
/// nearest regular value when it collides with a vertex value.
pub fn extract_level(field: &ScalarField, t: f64) -> Result<LevelSetSlice> {
    extract_level_filtered(field, t, None)
}

/// Same as [`extract_level`] but keeps only components all of whose
/// crossing edges belong to `allowed` (sorted mesh-edge ids).
pub fn extract_level_filtered(
    field: &ScalarField,
    t: f64,
    allowed: Option<&[usize]>,
) -> Result<LevelSetSlice> {
    let mesh = field.mesh();
    let values = field.values();
    let (lo, hi) = field.range();
    if !(lo < t && t < hi) {
        return Err(ReebError::LevelOutOfRange { t, lo, hi });
    }
    let (t, nudged_from) = nudge_to_regular(field, t);

    // pair crossing edges through their triangles; each crossing edge has
    // exactly two partner segments on a closed mesh
    let mut partners: HashMap<usize, Vec<usize>> = HashMap::new();
    for tri in mesh.triangles() {
        let mut crossed: Vec<usize> = Vec::with_capacity(2);
        for (a, b) in [(tri[0], tri[1]), (tri[1], tri[2]), (tri[2], tri[0])] {
            let ei = mesh.edge_between(a, b).unwrap();
            if (values[a] - t) * (values[b] - t) < 0.0 {
                crossed.push(ei);
            }
        }
        if crossed.len() == 2 {
            partners.entry(crossed[0]).or_default().push(crossed[1]);
            partners.entry(crossed[1]).or_default().push(crossed[0]);
        }
    }

    let point_on = |ei: usize| -> LevelPoint {
        let e = &mesh.edges()[ei];
        let (fa, fb) = (values[e.ends[0]], values[e.ends[1]]);
        let lam = (t - fa) / (fb - fa);
        let pa = mesh.position(e.ends[0]);
        let pb = mesh.position(e.ends[1]);
        LevelPoint {
            edge: ei,
            position: pa + (pb - pa) * lam,
        }
    };

    let in_allowed = |ei: usize| allowed.is_none_or(|a| a.binary_search(&ei).is_ok());

    let mut start_edges: Vec<usize> = partners.keys().copied().collect();
    start_edges.sort_unstable();
    let mut visited: std::collections::HashSet<usize> = std::collections::HashSet::new();
    let mut components = Vec::new();
    for &start in &start_edges {
        if visited.contains(&start) {
            continue;
        }
        // walk the cycle; canonical direction: toward the smaller partner id
        let mut cycle = vec![start];
        visited.insert(start);
        let nexts = &partners[&start];
        let mut prev = start;
        let mut cur = *nexts.iter().min().unwrap();
        while cur != start {
            visited.insert(cur);
            cycle.push(cur);
            let ns = &partners[&cur];
            let nxt = if ns[0] == prev { ns[1] } else { ns[0] };
            prev = cur;
            cur = nxt;
        }
        if !cycle.iter().all(|&ei| in_allowed(ei)) {
            continue;
        }
        let points: Vec<LevelPoint> = cycle.into_iter().map(point_on).collect();
        let mut measure = 0.0;
        for i in 0..points.len() {
            let j = (i + 1) % points.len();
            measure += (points[i].position - points[j].position).norm();
        }
        components.push(LevelComponent { points, measure });
    }

    Ok(LevelSetSlice {
        t,
        nudged_from,
        is_regular: true,
        components,
    })
}

/// The fiber over an interior point of a Reeb edge, as a level polyline
/// restricted to that edge's preimage.
pub fn extract_fiber(
    field: &ScalarField,
    graph: &ReebGraph,
    point: GraphPoint,
) -> Result<LevelComponent> {
    let GraphPoint::OnEdge { edge, f } = graph.canonical(point) else {
        return Err(ReebError::InvalidParameter(
            "fiber extraction needs an interior edge point".into(),
        ));
    };
    let slice = extract_level_filtered(field, f, Some(graph.edge_preimage(edge)))?;
    slice
        .components
        .into_iter()
        .next()
        .ok_or_else(|| {
            ReebError::InternalConsistency(format!(
                "no fiber component found on edge {edge} at f={f}"
            ))
        })
}

/// Max pairwise geodesic distance between `samples` evenly spaced polyline
/// points, with the points inserted into the subdivided edge graph. A lower
/// bound on the true subspace diameter, monotone under sample doubling.
pub fn component_diameter(
    graph: &EdgeGraph,
    component: &LevelComponent,
    samples: usize,
) -> Result<f64> {
    if samples < 2 {
        return Err(ReebError::InvalidParameter("samples must be >= 2".into()));
    }
    if component.points.is_empty() {
        return Err(ReebError::InvalidParameter("empty level component".into()));
    }
    let pts = &component.points;
    let chosen: Vec<usize> = if pts.len() <= samples {
        (0..pts.len()).collect()
    } else {
        // evenly spaced along arc length, snapped to polyline points
        let mut cum = vec![0.0f64; pts.len() + 1];
        for i in 0..pts.len() {
            let j = (i + 1) % pts.len();
            cum[i + 1] = cum[i] + (pts[i].position - pts[j].position).norm();
        }
        let total = cum[pts.len()];
        let mut picks: Vec<usize> = (0..samples)
            .map(|k| {
                let target = total * k as f64 / samples as f64;
                match cum.binary_search_by(|c| c.total_cmp(&target)) {
                    Ok(i) => i.min(pts.len() - 1),
                    Err(i) => (i - 1).min(pts.len() - 1),
                }
            })
            .collect();
        picks.sort_unstable();
        picks.dedup();
        picks
    };
    if chosen.len() < 2 {
        return Ok(0.0);
    }
    let anchors: Vec<SurfacePoint> = chosen
        .iter()
        .map(|&i| SurfacePoint::OnEdge {
            edge: pts[i].edge,
            position: pts[i].position,
        })
        .collect();
    let best = anchors
        .par_iter()
        .enumerate()
        .map(|(i, a)| {
            let dist = graph.sweep(&[(a.clone(), 0.0)]);
            let mut local = 0.0f64;
            for b in anchors.iter().skip(i + 1) {
                let mut d = graph.eval(&dist, b);
                if let Some(chord) = graph.direct_chord(a, b) {
                    d = d.min(chord);
                }
                local = local.max(d);
            }
            local
        })
        .reduce(|| 0.0, f64::max);
    Ok(best)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LevelRow {
    pub t: f64,
    pub component: usize,
    pub measure: f64,
    pub diameter: f64,
    pub thickness: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ThicknessReport {
    /// min over sampled levels and components of measure/diameter;
    /// +infinity only when the sampling is empty.
    pub t: f64,
    pub argmin_level: f64,
    pub argmin_component: usize,
    pub levels_sampled: usize,
    pub levels_per_interval: usize,
    pub rows: Vec<LevelRow>,
    /// Largest component diameter seen in the sweep (the measured fiber
    /// diameter bound C).
    pub max_component_diameter: f64,
}

impl ThicknessReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,component,measure,diameter,thickness\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                r.t, r.component, r.measure, r.diameter, r.thickness
            ));
        }
        out
    }
}

/// Sampled levels: for each interval between consecutive critical values,
/// the midpoint plus `m` evenly spaced interior values. Written so the set
/// is exactly symmetric under negation of the field.
pub fn sample_levels(critical_values: &[f64], m: usize) -> Vec<f64> {
    let mut levels = Vec::new();
    for w in critical_values.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        let steps = m + 1;
        for j in 1..steps {
            let a = (steps - j) as f64 / steps as f64;
            let b = j as f64 / steps as f64;
            levels.push(lo * a + hi * b);
        }
        if m % 2 == 0 {
            levels.push(lo * 0.5 + hi * 0.5);
        }
    }
    levels.sort_by(f64::total_cmp);
    levels.dedup();
    levels
}

pub fn thickness(field: &ScalarField, cfg: &SamplingConfig) -> Result<ThicknessReport> {
    thickness_in_range(field, cfg, None)
}

/// Thickness with the level sweep restricted to a height range; used for
/// per-block thickness of glued constructions.
pub fn thickness_in_range(
    field: &ScalarField,
    cfg: &SamplingConfig,
    range: Option<(f64, f64)>,
) -> Result<ThicknessReport> {
    if !field.distinct() {
        return Err(ReebError::NonDistinctField);
    }
    cfg.validate()?;
    let scan = criticality_scan(field)?;
    let mut crit = scan.critical_values.clone();
    if let Some((lo, hi)) = range {
        crit.retain(|&c| lo <= c && c <= hi);
        crit.insert(0, lo);
        crit.push(hi);
        crit.sort_by(f64::total_cmp);
        crit.dedup();
        let (flo, fhi) = field.range();
        crit.retain(|&c| flo <= c && c <= fhi);
    }
    let levels = sample_levels(&crit, cfg.levels_per_interval);
    let graph = EdgeGraph::new(field.mesh(), cfg.subdivision);

    let mut rows = Vec::new();
    for &t in &levels {
        let slice = extract_level(field, t)?;
        for (ci, comp) in slice.components.iter().enumerate() {
            let diameter = component_diameter(&graph, comp, cfg.diameter_samples)?;
            rows.push(LevelRow {
                t: slice.t,
                component: ci,
                measure: comp.measure,
                diameter,
                thickness: comp.thickness(diameter),
            });
        }
    }
    let mut t_min = f64::INFINITY;
    let mut argmin_level = f64::NAN;
    let mut argmin_component = 0;
    let mut max_diam = 0.0f64;
    for r in &rows {
        if r.thickness < t_min {
            t_min = r.thickness;
            argmin_level = r.t;
            argmin_component = r.component;
        }
        max_diam = max_diam.max(r.diameter);
    }
    Ok(ThicknessReport {
        t: t_min,
        argmin_level,
        argmin_component,
        levels_sampled: levels.len(),
        levels_per_interval: cfg.levels_per_interval,
        rows,
        max_component_diameter: max_diam,
    })
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct CoareaCheck {
    /// Area of the slab preimage f^-1[t0, t1].
    pub lhs: f64,
    /// Trapezoidal integral of level measure / L over [t0, t1].
    pub rhs: f64,
    pub holds: bool,
}

/// Area of the part of triangle `ti` with value in [t0, t1], clipping the
/// triangle linearly in value space.
fn clipped_triangle_area(
    mesh: &crate::TriMesh,
    values: &[f64],
    ti: usize,
    t0: f64,
    t1: f64,
) -> f64 {
    let tri = mesh.triangles()[ti];
    let mut poly: Vec<(Point3<f64>, f64)> = tri
        .iter()
        .map(|&v| (mesh.position(v), values[v]))
        .collect();
    // keep f >= t0, then f <= t1
    for (bound, keep_above) in [(t0, true), (t1, false)] {
        let mut out: Vec<(Point3<f64>, f64)> = Vec::with_capacity(poly.len() + 2);
        for i in 0..poly.len() {
            let (pa, fa) = poly[i];
            let (pb, fb) = poly[(i + 1) % poly.len()];
            let ina = if keep_above { fa >= bound } else { fa <= bound };
            let inb = if keep_above { fb >= bound } else { fb <= bound };
            if ina {
                out.push((pa, fa));
            }
            if ina != inb {
                let lam = (bound - fa) / (fb - fa);
                out.push((pa + (pb - pa) * lam, bound));
            }
        }
        poly = out;
        if poly.is_empty() {
            return 0.0;
        }
    }
    let mut area = 0.0;
    for i in 1..poly.len() - 1 {
        let u = poly[i].0 - poly[0].0;
        let v = poly[i + 1].0 - poly[0].0;
        area += 0.5 * u.cross(&v).norm();
    }
    area
}

/// Checks the inequality: slab area >= integral of level measure / L.
/// `slack` is the relative audit budget applied to the integral side.
pub fn coarea_check(
    field: &ScalarField,
    t0: f64,
    t1: f64,
    m: usize,
    slack: f64,
) -> Result<CoareaCheck> {
    if !(t0 < t1) {
        return Err(ReebError::DegenerateInterval { t0, t1 });
    }
    let (lo, hi) = field.range();
    if t0 < lo - 1e-12 || t1 > hi + 1e-12 {
        return Err(ReebError::LevelOutOfRange {
            t: if t0 < lo { t0 } else { t1 },
            lo,
            hi,
        });
    }
    if m < 2 {
        return Err(ReebError::InvalidParameter(
            "coarea needs at least 2 integration samples".into(),
        ));
    }
    let lipschitz = field.lipschitz_l();
    if !(lipschitz > 0.0) {
        return Err(ReebError::InvalidParameter(
            "coarea check needs a nonconstant field".into(),
        ));
    }
    let mesh = field.mesh();
    let values = field.values();
    let lhs: f64 = (0..mesh.triangle_count())
        .map(|ti| clipped_triangle_area(mesh, values, ti, t0, t1))
        .sum();

    let dt = (t1 - t0) / (m - 1) as f64;
    let mut rhs = 0.0;
    let mut prev: Option<f64> = None;
    for i in 0..m {
        let t = t0 + dt * i as f64;
        // clamp interior so endpoint levels stay extractable
        let t = t.clamp(lo + (hi - lo) * 1e-9, hi - (hi - lo) * 1e-9);
        let g = extract_level(field, t)?
            .components
            .iter()
            .map(|c| c.measure)
            .sum::<f64>()
            / lipschitz;
        if let Some(p) = prev {
            rhs += (p + g) / 2.0 * dt;
        }
        prev = Some(g);
    }
    Ok(CoareaCheck {
        lhs,
        rhs,
        holds: lhs >= rhs * (1.0 - slack),
    })
}

/// Ingredients of the fiber-diameter bound.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct FiberBoundInputs {
    pub n: u32,
    pub b1: usize,
    pub lipschitz_l: f64,
    pub eps_p: f64,
    pub thickness: f64,
    pub diam: f64,
    pub volume: f64,
}

/// Upper bound on the diameter of any level-set component:
/// max(8(b1+1) eps, (2^(n+1) L (b1+1)^(n-1) vol / T)^(1/n)
///     + 8(b1+1) diam^(1/n) eps^((n-1)/n)).
pub fn fiber_diameter_bound(inp: &FiberBoundInputs) -> Result<f64> {
    if !(inp.thickness > 0.0) {
        return Err(ReebError::InvalidParameter(
            "fiber diameter bound is unbounded at thickness 0".into(),
        ));
    }
    let n = inp.n as f64;
    let b = (inp.b1 + 1) as f64;
    let first = 8.0 * b * inp.eps_p;
    let main = (2.0f64.powf(n + 1.0) * inp.lipschitz_l * b.powf(n - 1.0) * inp.volume
        / inp.thickness)
        .powf(1.0 / n);
    let eps_term = 8.0 * b * inp.diam.powf(1.0 / n) * inp.eps_p.powf((n - 1.0) / n);
    Ok(first.max(main + eps_term))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{height_field, make_excellent};
    use crate::generate::{gen_sphere, gen_torus, TorusOrientation};
    use crate::reeb::build_reeb;
    use nalgebra::Vector3;
    use std::f64::consts::PI;
    use std::sync::Arc;

    fn sphere_height(refinements: u32) -> ScalarField {
        let m = Arc::new(gen_sphere(1.0, refinements).unwrap());
        let f = height_field(m, Vector3::new(0.0, 0.0, 1.0)).unwrap();
        make_excellent(&f, 1e-9, 1e-6).unwrap()
    }

    #[test]
    fn equator_has_one_component_near_2pi() {
        let f = sphere_height(3);
        let slice = extract_level(&f, 0.0).unwrap();
        assert_eq!(slice.components.len(), 1);
        let len = slice.components[0].measure;
        assert!((len - 2.0 * PI).abs() / (2.0 * PI) < 0.03, "equator length {len}");
    }

    #[test]
    fn torus_mid_level_has_two_components() {
        let m = Arc::new(gen_torus(2.0, 0.5, 32, 16, TorusOrientation::Standing).unwrap());
        let f = height_field(m, Vector3::new(0.0, 0.0, 1.0)).unwrap();
        let f = make_excellent(&f, 1e-9, 1e-6).unwrap();
        let slice = extract_level(&f, 0.1).unwrap();
        assert_eq!(slice.components.len(), 2);
    }

    #[test]
    fn level_out_of_range_errors() {
        let f = sphere_height(1);
        assert!(matches!(
            extract_level(&f, 2.0),
            Err(ReebError::LevelOutOfRange { .. })
        ));
    }

    #[test]
    fn vertex_value_levels_are_nudged() {
        let f = sphere_height(2);
        let t = f.value(5);
        let slice = extract_level(&f, t).unwrap();
        assert_eq!(slice.nudged_from, Some(t));
        assert!(slice.t != t);
        assert!(slice.is_regular);
    }

    #[test]
    fn equator_diameter_near_pi() {
        let f = sphere_height(3);
        let slice = extract_level(&f, 0.0).unwrap();
        let graph = EdgeGraph::new(f.mesh(), 2);
        let d = component_diameter(&graph, &slice.components[0], 24).unwrap();
        assert!((d - PI).abs() / PI < 0.05, "equator diameter {d}");
    }

    #[test]
    fn small_polar_circle_diameter() {
        // analytic: the circle at height z has geodesic diameter
        // 2 arccos(z) through the pole while 2 arccos(z) < pi sin(theta)
        let f = sphere_height(4);
        let t = 0.99;
        let slice = extract_level(&f, t).unwrap();
        let comp = slice
            .components
            .iter()
            .min_by(|a, b| a.measure.total_cmp(&b.measure))
            .unwrap();
        let graph = EdgeGraph::new(f.mesh(), 2);
        let d = component_diameter(&graph, comp, 24).unwrap();
        let analytic = 2.0 * t.acos();
        assert!(
            (d - analytic).abs() / analytic < 0.10,
            "polar circle diameter {d} vs {analytic}"
        );
    }

    #[test]
    fn diameter_monotone_under_sample_doubling() {
        let f = sphere_height(3);
        let slice = extract_level(&f, 0.3).unwrap();
        let graph = EdgeGraph::new(f.mesh(), 2);
        let d8 = component_diameter(&graph, &slice.components[0], 8).unwrap();
        let d16 = component_diameter(&graph, &slice.components[0], 16).unwrap();
        let d32 = component_diameter(&graph, &slice.components[0], 32).unwrap();
        assert!(d8 <= d16 + 1e-12);
        assert!(d16 <= d32 + 1e-12);
    }

    #[test]
    fn degenerate_diameter_thickness_convention() {
        let comp = LevelComponent {
            points: vec![],
            measure: 0.0,
        };
        assert_eq!(comp.thickness(0.0), 1.0);
    }

    #[test]
    fn sphere_thickness_near_two() {
        let f = sphere_height(3);
        let cfg = SamplingConfig::default();
        let rep = thickness(&f, &cfg).unwrap();
        assert!(
            rep.t > 1.8 && rep.t < 2.1,
            "sphere thickness {} (argmin at {})",
            rep.t,
            rep.argmin_level
        );
        assert!(rep.argmin_level.abs() < 0.2, "argmin should sit near the equator");
        // every surface level component is at least 1-thick within slack
        for r in &rep.rows {
            assert!(r.thickness >= 1.0 - 0.05, "row {r:?}");
        }
    }

    #[test]
    fn thickness_invariant_under_negation() {
        let f = sphere_height(2);
        let cfg = SamplingConfig::default();
        let a = thickness(&f, &cfg).unwrap();
        let b = thickness(&f.negated(), &cfg).unwrap();
        assert_eq!(a.t, b.t);
    }

    #[test]
    fn level_census_matches_reeb_edges() {
        let m = Arc::new(gen_torus(2.0, 0.5, 32, 16, TorusOrientation::Standing).unwrap());
        let f = height_field(m, Vector3::new(0.0, 0.0, 1.0)).unwrap();
        let f = make_excellent(&f, 1e-9, 1e-6).unwrap();
        let (graph, _) = build_reeb(&f).unwrap();
        let scan = criticality_scan(&f).unwrap();
        for &t in &sample_levels(&scan.critical_values, 4) {
            let slice = extract_level(&f, t).unwrap();
            let expect = graph.edges_crossing(slice.t).count();
            assert_eq!(
                slice.components.len(),
                expect,
                "census mismatch at t={t}"
            );
        }
    }

    #[test]
    fn fiber_extraction_matches_edge() {
        let m = Arc::new(gen_torus(2.0, 0.5, 32, 16, TorusOrientation::Standing).unwrap());
        let f = height_field(m, Vector3::new(0.0, 0.0, 1.0)).unwrap();
        let f = make_excellent(&f, 1e-9, 1e-6).unwrap();
        let (graph, _) = build_reeb(&f).unwrap();
        let arcs: Vec<usize> = graph.edges_crossing(0.0).collect();
        assert_eq!(arcs.len(), 2);
        let fa = extract_fiber(&f, &graph, GraphPoint::OnEdge { edge: arcs[0], f: 0.0 }).unwrap();
        let fb = extract_fiber(&f, &graph, GraphPoint::OnEdge { edge: arcs[1], f: 0.0 }).unwrap();
        // the two fibers are the two tube circles, disjoint supports
        let ea: std::collections::HashSet<usize> = fa.points.iter().map(|p| p.edge).collect();
        let eb: std::collections::HashSet<usize> = fb.points.iter().map(|p| p.edge).collect();
        assert!(ea.is_disjoint(&eb));
        // tube circles have length about 2 pi r
        for c in [&fa, &fb] {
            assert!((c.measure - PI).abs() / PI < 0.05, "tube length {}", c.measure);
        }
    }

    #[test]
    fn coarea_on_sphere_band() {
        // analytic oracle: band area 2 pi (z1 - z0), integral of
        // 2 pi sqrt(1-z^2) dz is smaller
        let f = sphere_height(3);
        let c = coarea_check(&f, -0.5, 0.5, 33, 0.05).unwrap();
        assert!(c.holds);
        let band = 2.0 * PI;
        assert!((c.lhs - band).abs() / band < 0.03, "band area {}", c.lhs);
        let integral = 2.0 * (0.5 * 0.75f64.sqrt() + 0.5f64.asin()) * PI;
        assert!((c.rhs - integral).abs() / integral < 0.05, "integral {}", c.rhs);
        assert!(c.lhs >= c.rhs);
    }

    #[test]
    fn coarea_full_range_holds() {
        let f = sphere_height(3);
        let (lo, hi) = f.range();
        let eps = (hi - lo) * 1e-6;
        let c = coarea_check(&f, lo + eps, hi - eps, 65, 0.05).unwrap();
        assert!(c.holds, "lhs {} rhs {}", c.lhs, c.rhs);
    }

    #[test]
    fn coarea_rejects_bad_interval() {
        let f = sphere_height(1);
        assert!(matches!(
            coarea_check(&f, 0.5, 0.5, 8, 0.05),
            Err(ReebError::DegenerateInterval { .. })
        ));
        assert!(coarea_check(&f, 0.5, -0.5, 8, 0.05).is_err());
    }

    #[test]
    fn fiber_bound_formula() {
        // eps = 0 collapses to the volume branch
        let inp = FiberBoundInputs {
            n: 2,
            b1: 0,
            lipschitz_l: 1.0,
            eps_p: 0.0,
            thickness: 2.0,
            diam: PI,
            volume: 4.0 * PI,
        };
        let b = fiber_diameter_bound(&inp).unwrap();
        let expect = (8.0 * 4.0 * PI / 2.0).sqrt();
        assert!((b - expect).abs() < 1e-12);
        let unbounded = FiberBoundInputs { thickness: 0.0, ..inp };
        assert!(fiber_diameter_bound(&unbounded).is_err());
    }
}
