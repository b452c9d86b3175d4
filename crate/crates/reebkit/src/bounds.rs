//! Measured distortion of the Reeb quotient map, the distortion upper
//! bound assembled from measured ingredients, the fiber-diameter route, and
//! the supporting inequalities as audited checks.
//!
//! The audit slack is applied only to the measured (geodesic, hence
//! overestimating) side of paper inequalities, never to the bound formulas
//! themselves.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::field::{epsilon_p, EpsilonP, ScalarField};
use crate::homology::betti;
use crate::levelset::{
    coarea_check, extract_fiber, extract_level, fiber_diameter_bound, thickness,
    FiberBoundInputs,
};
use crate::mesh::{mesh_stats, DiameterMode, EdgeGraph, SurfacePoint};
use crate::reeb::{build_reeb, GraphPoint, QuotientMap, ReebGraph};
use crate::unionfind::UnionFind;
use crate::{ReebError, Result, SamplingConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum PairBudget {
    /// All vertex pairs.
    Exact,
    /// Farthest-point-seeded sources against all targets; a lower bound.
    Sampled { count: usize },
}

impl PairBudget {
    pub fn auto(vertex_count: usize, cfg: &SamplingConfig) -> Self {
        if vertex_count <= cfg.exact_pair_threshold {
            PairBudget::Exact
        } else {
            PairBudget::Sampled {
                count: cfg.sampled_pairs,
            }
        }
    }

    pub fn describe(&self) -> String {
        match self {
            PairBudget::Exact => "exact".into(),
            PairBudget::Sampled { count } => format!("sampled({count})"),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DistortionReport {
    /// sup over evaluated pairs of |d(x,y) - d_f(pi x, pi y)|.
    pub value: f64,
    pub pairs: PairBudget,
    pub is_lower_bound: bool,
}

/// Measured metric distortion of the quotient map over vertex pairs.
pub fn measured_distortion(
    field: &ScalarField,
    graph: &ReebGraph,
    quotient: &QuotientMap,
    pairs: PairBudget,
    subdivision: u32,
) -> Result<DistortionReport> {
    let mesh = field.mesh();
    let nv = mesh.vertex_count();
    if quotient.images().len() != nv {
        return Err(ReebError::MismatchedInputs(format!(
            "quotient map covers {} vertices, mesh has {nv}",
            quotient.images().len()
        )));
    }
    for v in 0..nv {
        // also validates that images lie on this graph
        graph.distance(quotient.image(v), quotient.image(v))?;
    }
    let egraph = EdgeGraph::new(mesh, subdivision);

    let discrepancy_from = |source: usize, dist: &[f64]| -> f64 {
        let a = quotient.image(source);
        let mut worst = 0.0f64;
        for y in 0..nv {
            let df = graph
                .distance(a, quotient.image(y))
                .expect("images validated");
            let disc = (dist[y] - df).abs();
            if disc > worst {
                worst = disc;
            }
        }
        worst
    };

    let value = match pairs {
        PairBudget::Exact => (0..nv)
            .into_par_iter()
            .map(|v| {
                let dist = egraph.sweep_from_vertex(v);
                discrepancy_from(v, &dist)
            })
            .reduce(|| 0.0, f64::max),
        PairBudget::Sampled { count } => {
            if count == 0 {
                return Err(ReebError::InvalidParameter(
                    "sampled pair budget must be >= 1".into(),
                ));
            }
            let mut nearest = vec![f64::INFINITY; nv];
            let mut current = 0usize;
            let mut worst = 0.0f64;
            for _ in 0..count.min(nv) {
                let dist = egraph.sweep_from_vertex(current);
                worst = worst.max(discrepancy_from(current, &dist));
                let mut far = (0usize, -1.0f64);
                for v in 0..nv {
                    nearest[v] = nearest[v].min(dist[v]);
                    if nearest[v] > far.1 {
                        far = (v, nearest[v]);
                    }
                }
                current = far.0;
            }
            worst
        }
    };
    Ok(DistortionReport {
        value,
        pairs,
        is_lower_bound: matches!(pairs, PairBudget::Sampled { .. }),
    })
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct TheoremTerms {
    /// (2^(n+1) L / (b1+1) * vol / T)^(1/n)
    pub term_i_prime: f64,
    /// diam^(1/n) eps^((n-1)/n) + eps
    pub term_ii_prime: f64,
    /// 2 (b1+1)^2 * term_i_prime
    pub term_i: f64,
    /// 2 (b1+1)^2 * 16 * term_ii_prime
    pub term_ii: f64,
    /// |L-1| diam
    pub term_iii: f64,
    pub bound: f64,
}

/// The distortion upper bound
/// 2(b1+1)^2 ( (2^(n+1) L/(b1+1) * vol/T)^(1/n)
///             + 16( diam^(1/n) eps^((n-1)/n) + eps ) ) + |L-1| diam.
pub fn evaluate_theorem_terms(
    n: u32,
    b1: usize,
    lipschitz_l: f64,
    volume: f64,
    thickness: f64,
    diam: f64,
    eps: f64,
) -> Result<TheoremTerms> {
    if !(thickness > 0.0) {
        return Err(ReebError::InvalidParameter(
            "distortion bound needs thickness > 0".into(),
        ));
    }
    let nf = n as f64;
    let b = (b1 + 1) as f64;
    let term_i_prime =
        (2.0f64.powf(nf + 1.0) * lipschitz_l / b * volume / thickness).powf(1.0 / nf);
    let term_ii_prime = diam.powf(1.0 / nf) * eps.powf((nf - 1.0) / nf) + eps;
    let front = 2.0 * b * b;
    let term_i = front * term_i_prime;
    let term_ii = front * 16.0 * term_ii_prime;
    let term_iii = (lipschitz_l - 1.0).abs() * diam;
    Ok(TheoremTerms {
        term_i_prime,
        term_ii_prime,
        term_i,
        term_ii,
        term_iii,
        bound: front * (term_i_prime + 16.0 * term_ii_prime) + term_iii,
    })
}

/// dis(pi) <= (2 b1 + 1)(C + 4 eps) + |L-1| diam, where C bounds the
/// diameter of every fiber.
pub fn prop45_bound(b1: usize, fiber_c: f64, eps: f64, lipschitz_l: f64, diam: f64) -> f64 {
    (2.0 * b1 as f64 + 1.0) * (fiber_c + 4.0 * eps) + (lipschitz_l - 1.0).abs() * diam
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Ingredients {
    pub n: u32,
    pub b1: usize,
    pub lipschitz_l: f64,
    pub eps_p_unshifted: EpsilonP,
    pub eps_p_shifted: EpsilonP,
    pub thickness: f64,
    pub thickness_argmin_level: f64,
    pub diam_x: f64,
    pub diameter_mode: DiameterMode,
    pub diameter_is_lower_bound: bool,
    pub volume: f64,
    pub base_point: usize,
}

/// Everything the distortion certificate rests on: measured ingredients,
/// the bound's terms, both epsilon variants, the fiber-diameter route and
/// the measured distortion.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoundReport {
    pub schema: String,
    pub sampling: SamplingConfig,
    pub ingredients: Ingredients,
    pub term_i_prime: f64,
    pub term_ii_prime: f64,
    pub term_i: f64,
    pub term_ii: f64,
    pub term_iii: f64,
    /// Bound with the shift-optimized epsilon (the default certificate).
    pub theorem_bound: f64,
    /// Bound with the plain sup-norm epsilon.
    pub theorem_bound_unshifted_eps: f64,
    /// Largest level-component diameter observed in the sweep.
    pub fiber_c_measured: f64,
    /// Fiber-diameter bound with the plain epsilon (audited form).
    pub prop62_bound: f64,
    /// Fiber-diameter bound with the shifted epsilon (certificate chain).
    pub prop62_bound_shifted_eps: f64,
    pub prop45_bound_measured_c: f64,
    pub prop45_bound_prop62_c: f64,
    pub measured_distortion: f64,
    pub distortion_pairs: String,
    pub distortion_is_lower_bound: bool,
    /// measured * (1 - audit_slack) <= theorem_bound.
    pub certified: bool,
}

pub const REPORT_SCHEMA: &str = "reebkit-report-v1";

/// Runs the full measurement pipeline and assembles the certificate.
pub fn theorem_bound(field: &ScalarField, p: usize, cfg: &SamplingConfig) -> Result<BoundReport> {
    cfg.validate()?;
    let mesh = field.mesh();
    mesh.require_connected()?;
    mesh.check_vertex(p)?;
    if !field.distinct() {
        return Err(ReebError::NonDistinctField);
    }
    let homology = betti(mesh)?;
    let mode = DiameterMode::auto(mesh, cfg);
    let stats = mesh_stats(mesh, mode, cfg.subdivision)?;
    let eps_u = epsilon_p(field, p, false, cfg.subdivision)?;
    let eps_s = epsilon_p(field, p, true, cfg.subdivision)?;
    let (graph, mut quotient) = build_reeb(field)?;
    quotient.designate_base(p);
    let thick = thickness(field, cfg)?;
    let budget = PairBudget::auto(mesh.vertex_count(), cfg);
    let distortion = measured_distortion(field, &graph, &quotient, budget, cfg.subdivision)?;

    let lipschitz_l = field.lipschitz_l();
    let terms = evaluate_theorem_terms(
        2,
        homology.b1,
        lipschitz_l,
        stats.total_measure,
        thick.t,
        stats.diameter,
        eps_s.eps,
    )?;
    let terms_unshifted = evaluate_theorem_terms(
        2,
        homology.b1,
        lipschitz_l,
        stats.total_measure,
        thick.t,
        stats.diameter,
        eps_u.eps,
    )?;
    let prop62 = fiber_diameter_bound(&FiberBoundInputs {
        n: 2,
        b1: homology.b1,
        lipschitz_l,
        eps_p: eps_u.eps,
        thickness: thick.t,
        diam: stats.diameter,
        volume: stats.total_measure,
    })?;
    let prop62_shifted = fiber_diameter_bound(&FiberBoundInputs {
        n: 2,
        b1: homology.b1,
        lipschitz_l,
        eps_p: eps_s.eps,
        thickness: thick.t,
        diam: stats.diameter,
        volume: stats.total_measure,
    })?;

    let certified = distortion.value * (1.0 - cfg.audit_slack) <= terms.bound;
    Ok(BoundReport {
        schema: REPORT_SCHEMA.into(),
        sampling: cfg.clone(),
        ingredients: Ingredients {
            n: 2,
            b1: homology.b1,
            lipschitz_l,
            eps_p_unshifted: eps_u,
            eps_p_shifted: eps_s,
            thickness: thick.t,
            thickness_argmin_level: thick.argmin_level,
            diam_x: stats.diameter,
            diameter_mode: stats.diameter_mode,
            diameter_is_lower_bound: stats.diameter_is_lower_bound,
            volume: stats.total_measure,
            base_point: p,
        },
        term_i_prime: terms.term_i_prime,
        term_ii_prime: terms.term_ii_prime,
        term_i: terms.term_i,
        term_ii: terms.term_ii,
        term_iii: terms.term_iii,
        theorem_bound: terms.bound,
        theorem_bound_unshifted_eps: terms_unshifted.bound,
        fiber_c_measured: thick.max_component_diameter,
        prop62_bound: prop62,
        prop62_bound_shifted_eps: prop62_shifted,
        prop45_bound_measured_c: prop45_bound(
            homology.b1,
            thick.max_component_diameter,
            eps_s.eps,
            lipschitz_l,
            stats.diameter,
        ),
        prop45_bound_prop62_c: prop45_bound(
            homology.b1,
            prop62_shifted,
            eps_s.eps,
            lipschitz_l,
            stats.diameter,
        ),
        measured_distortion: distortion.value,
        distortion_pairs: distortion.pairs.describe(),
        distortion_is_lower_bound: distortion.is_lower_bound,
        certified,
    })
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct AuditCheck {
    pub name: String,
    pub checked: usize,
    pub skipped: usize,
    pub violations: usize,
    /// Largest lhs - rhs margin seen (negative means comfortable).
    pub worst_margin: f64,
}

impl AuditCheck {
    fn new(name: &str) -> Self {
        Self {
            name: name.into(),
            worst_margin: f64::NEG_INFINITY,
            ..Default::default()
        }
    }

    fn record(&mut self, lhs: f64, rhs: f64) {
        self.checked += 1;
        self.worst_margin = self.worst_margin.max(lhs - rhs);
        if lhs > rhs {
            self.violations += 1;
        }
    }

    fn skip(&mut self) {
        self.skipped += 1;
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AuditReport {
    pub checks: Vec<AuditCheck>,
    pub passed: bool,
}

impl AuditReport {
    pub fn check(&self, name: &str) -> Option<&AuditCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Audits the separation-based comparison inequalities on random
/// configurations whose hypotheses were verified via separation queries.
/// `df_scale` rescales graph distances and exists for fault-injection
/// tests; 1.0 means honest distances.
pub fn comparison_audit(
    field: &ScalarField,
    graph: &ReebGraph,
    quotient: &QuotientMap,
    trials: usize,
    cfg: &SamplingConfig,
    df_scale: f64,
) -> Result<(AuditCheck, AuditCheck)> {
    let theta = quotient.theta().ok_or_else(|| {
        ReebError::InvalidParameter("comparison audit needs a designated base point".into())
    })?;
    let mesh = field.mesh();
    let base = match theta {
        GraphPoint::Node(_) | GraphPoint::OnEdge { .. } => quotient
            .images()
            .iter()
            .position(|&img| graph.same_point(img, theta))
            .unwrap_or(0),
    };
    let eps = epsilon_p(field, base, false, cfg.subdivision)?.eps;
    let egraph = EdgeGraph::new(mesh, cfg.subdivision);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let slack = cfg.audit_slack;

    let mut dist_to_fiber = AuditCheck::new("prop-dist-to-fiber");
    let mut fiber_to_fiber = AuditCheck::new("prop-fiber-to-fiber");

    let random_interior = |rng: &mut ChaCha8Rng, edge: usize| -> Option<GraphPoint> {
        let e = &graph.edges()[edge];
        let span = e.f_hi - e.f_lo;
        if !(span > 0.0) {
            return None;
        }
        let u: f64 = rng.gen_range(0.05..0.95);
        Some(GraphPoint::OnEdge {
            edge,
            f: e.f_lo + span * u,
        })
    };

    for _ in 0..trials {
        // dist(x, C_s) <= d_f(r, s) + 2 eps, when s separates r from theta
        let x = rng.gen_range(0..mesh.vertex_count());
        let r = quotient.image(x);
        let se = rng.gen_range(0..graph.edges().len());
        let Some(s) = random_interior(&mut rng, se) else {
            dist_to_fiber.skip();
            continue;
        };
        if !graph.separates(&[s], r, theta)? {
            dist_to_fiber.skip();
        } else {
            let fiber = extract_fiber(field, graph, s)?;
            let seeds: Vec<(SurfacePoint, f64)> =
                fiber.surface_points().map(|sp| (sp, 0.0)).collect();
            let dvec = egraph.sweep(&seeds);
            let lhs = dvec[x];
            let rhs = graph.distance(r, s)? * df_scale + 2.0 * eps;
            dist_to_fiber.record(lhs * (1.0 - slack), rhs);
        }

        // dist(C_r, C_s) <= length(gamma) + 4 eps, when {r, s} separates
        // the open subpath between them from theta
        let ge = rng.gen_range(0..graph.edges().len());
        let e = &graph.edges()[ge];
        let span = e.f_hi - e.f_lo;
        if !(span > 0.0) {
            fiber_to_fiber.skip();
            continue;
        }
        let mut f1: f64 = rng.gen_range(0.05..0.95);
        let mut f2: f64 = rng.gen_range(0.05..0.95);
        if (f1 - f2).abs() < 1e-3 {
            fiber_to_fiber.skip();
            continue;
        }
        if f1 > f2 {
            std::mem::swap(&mut f1, &mut f2);
        }
        let r2 = GraphPoint::OnEdge { edge: ge, f: e.f_lo + span * f1 };
        let s2 = GraphPoint::OnEdge { edge: ge, f: e.f_lo + span * f2 };
        let mid = GraphPoint::OnEdge {
            edge: ge,
            f: e.f_lo + span * (f1 + f2) / 2.0,
        };
        if !graph.separates(&[r2, s2], mid, theta)? {
            fiber_to_fiber.skip();
            continue;
        }
        let fr = extract_fiber(field, graph, r2)?;
        let fs = extract_fiber(field, graph, s2)?;
        let seeds: Vec<(SurfacePoint, f64)> = fr.surface_points().map(|sp| (sp, 0.0)).collect();
        let dvec = egraph.sweep(&seeds);
        let lhs = fs
            .surface_points()
            .map(|sp| egraph.eval(&dvec, &sp))
            .fold(f64::INFINITY, f64::min);
        let gamma_len = span * (f2 - f1) * df_scale;
        let rhs = gamma_len + 4.0 * eps;
        fiber_to_fiber.record(lhs * (1.0 - slack), rhs);
    }
    Ok((dist_to_fiber, fiber_to_fiber))
}

/// Runs every supported inequality audit on one field. Returns per-check
/// statistics; `passed` means zero violations anywhere.
pub fn audit_suite(
    field: &ScalarField,
    p: usize,
    trials: usize,
    cfg: &SamplingConfig,
    df_scale: f64,
) -> Result<AuditReport> {
    cfg.validate()?;
    let mesh = field.mesh();
    mesh.require_connected()?;
    mesh.check_vertex(p)?;
    let homology = betti(mesh)?;
    let (graph, mut quotient) = build_reeb(field)?;
    quotient.designate_base(p);
    let egraph = EdgeGraph::new(mesh, cfg.subdivision);
    let lipschitz_l = field.lipschitz_l();
    let eps_u = epsilon_p(field, p, false, cfg.subdivision)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x5eeb);
    let slack = cfg.audit_slack;
    let mut checks: Vec<AuditCheck> = Vec::new();

    // quotient map is L-Lipschitz: d_f(pi x, pi y) <= L d(x, y)
    {
        let mut c = AuditCheck::new("prop-quotient-lipschitz");
        let sources: Vec<usize> = (0..32.min(mesh.vertex_count()))
            .map(|_| rng.gen_range(0..mesh.vertex_count()))
            .collect();
        let per_source = (1000 / sources.len()).max(1);
        for &x in &sources {
            let dvec = egraph.sweep_from_vertex(x);
            for _ in 0..per_source {
                let y = rng.gen_range(0..mesh.vertex_count());
                let df = graph.distance(quotient.image(x), quotient.image(y))? * df_scale;
                c.record(df, lipschitz_l * dvec[y] + 1e-9);
            }
        }
        checks.push(c);
    }

    // f on the graph is 1-Lipschitz: |f(a) - f(b)| <= d_f(a, b)
    {
        let mut c = AuditCheck::new("prop-value-lipschitz");
        for _ in 0..1000 {
            let pick = |rng: &mut ChaCha8Rng| -> GraphPoint {
                let e = rng.gen_range(0..graph.edges().len());
                let ed = &graph.edges()[e];
                GraphPoint::OnEdge {
                    edge: e,
                    f: ed.f_lo + (ed.f_hi - ed.f_lo) * rng.gen_range(0.0..1.0),
                }
            };
            let a = pick(&mut rng);
            let b = pick(&mut rng);
            let df = graph.distance(a, b)? * df_scale;
            c.record(
                (graph.point_value(a) - graph.point_value(b)).abs(),
                df + 1e-12,
            );
        }
        checks.push(c);
    }

    // node degrees stay at 3 or below
    {
        let mut c = AuditCheck::new("prop-degree-bound");
        for n in 0..graph.nodes().len() {
            c.record(graph.node_degree(n) as f64, 3.0);
        }
        checks.push(c);
    }

    // beta_1 of the graph never exceeds beta_1 of the surface
    {
        let mut c = AuditCheck::new("prop-graph-betti");
        c.record(graph.b1() as f64, homology.b1 as f64);
        checks.push(c);
    }

    // open edge preimages are connected in the mesh
    {
        let mut c = AuditCheck::new("prop-preimage-connected");
        for ei in 0..graph.edges().len() {
            let pre = graph.edge_preimage(ei);
            if pre.is_empty() {
                c.skip();
                continue;
            }
            let index: std::collections::HashMap<usize, usize> =
                pre.iter().enumerate().map(|(i, &e)| (e, i)).collect();
            let mut uf = UnionFind::new(pre.len());
            for &me in pre {
                for &ti in &mesh.edges()[me].faces {
                    let tri = mesh.triangles()[ti];
                    let mut prev: Option<usize> = None;
                    for (a, b) in [(tri[0], tri[1]), (tri[1], tri[2]), (tri[2], tri[0])] {
                        let other = mesh.edge_between(a, b).unwrap();
                        if let Some(&sl) = index.get(&other) {
                            if let Some(pv) = prev {
                                uf.union(pv, sl);
                            }
                            prev = Some(sl);
                        }
                    }
                }
            }
            c.record(uf.class_count(0..pre.len()) as f64, 1.0);
        }
        checks.push(c);
    }

    // separation comparisons (distance to fiber, fiber to fiber)
    {
        let (a, b) = comparison_audit(field, &graph, &quotient, trials, cfg, df_scale)?;
        checks.push(a);
        checks.push(b);
    }

    // coarea inequality on random intervals
    {
        let mut c = AuditCheck::new("prop-coarea");
        let (lo, hi) = field.range();
        for _ in 0..20 {
            let a = lo + (hi - lo) * rng.gen_range(0.0..1.0);
            let b = lo + (hi - lo) * rng.gen_range(0.0..1.0);
            let (t0, t1) = (a.min(b), a.max(b));
            if t1 - t0 < (hi - lo) * 1e-3 {
                c.skip();
                continue;
            }
            let res = coarea_check(field, t0, t1, 17, slack)?;
            c.record(res.rhs * (1.0 - slack), res.lhs);
        }
        checks.push(c);
    }

    // thickness sweep once; reused by the three level-set checks
    let thick = thickness(field, cfg)?;

    // every level component of a surface is at least 1-thick
    {
        let mut c = AuditCheck::new("prop-surface-thickness");
        for r in &thick.rows {
            c.record(1.0 - slack, r.thickness);
        }
        checks.push(c);
    }

    // fiber diameters stay below the fiber-diameter bound
    {
        let mut c = AuditCheck::new("prop-fiber-diameter");
        let stats_mode = DiameterMode::auto(mesh, cfg);
        let stats = mesh_stats(mesh, stats_mode, cfg.subdivision)?;
        let bound = fiber_diameter_bound(&FiberBoundInputs {
            n: 2,
            b1: homology.b1,
            lipschitz_l,
            eps_p: eps_u.eps,
            thickness: thick.t,
            diam: stats.diameter,
            volume: stats.total_measure,
        })?;
        for r in &thick.rows {
            c.record(r.diameter * (1.0 - slack), bound);
        }
        checks.push(c);
    }

    // level measure lower bound from component diameters
    {
        let mut c = AuditCheck::new("prop-level-measure");
        let b = (homology.b1 + 1) as f64;
        let fp = field.value(p);
        let (lo, hi) = field.range();
        for _ in 0..50 {
            let t = lo + (hi - lo) * rng.gen_range(0.05..0.95);
            if t <= fp {
                c.skip();
                continue;
            }
            let slice = extract_level(field, t)?;
            if slice.components.is_empty() {
                c.skip();
                continue;
            }
            let pick = rng.gen_range(0..slice.components.len());
            let comp = &slice.components[pick];
            let diam = crate::levelset::component_diameter(&egraph, comp, cfg.diameter_samples)?;
            // positivity window for t0: rhs > 0 needs
            // t - t0 < diam / (2 b) - 2 eps
            let window = diam / (2.0 * b) - 2.0 * eps_u.eps;
            if window <= 0.0 {
                c.skip();
                continue;
            }
            let t0_lo = (t - window).max(fp + (hi - lo) * 1e-6);
            if t0_lo >= t {
                c.skip();
                continue;
            }
            let t0 = t0_lo + (t - t0_lo) * rng.gen_range(0.1..0.9);
            let lhs_measure: f64 = extract_level(field, t0)?
                .components
                .iter()
                .map(|cc| cc.measure)
                .sum();
            let rhs = thick.t * (diam - 2.0 * b * (t - t0 + 2.0 * eps_u.eps));
            if rhs <= 0.0 {
                c.skip();
                continue;
            }
            // 10% relative slack on this check
            c.record(rhs * 0.90, lhs_measure);
        }
        checks.push(c);
    }

    let passed = checks.iter().all(|c| c.violations == 0);
    Ok(AuditReport { checks, passed })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{height_field, make_excellent};
    use crate::generate::{gen_sphere, gen_torus, TorusOrientation};
    use nalgebra::Vector3;
    use std::f64::consts::PI;
    use std::sync::Arc;

    fn sphere_case(refinements: u32) -> (ScalarField, usize) {
        let m = Arc::new(gen_sphere(1.0, refinements).unwrap());
        let f = height_field(m.clone(), Vector3::new(0.0, 0.0, 1.0)).unwrap();
        let f = make_excellent(&f, 1e-9, 1e-6).unwrap();
        let south = (0..m.vertex_count())
            .min_by(|&a, &b| m.position(a).z.total_cmp(&m.position(b).z))
            .unwrap();
        (f, south)
    }

    #[test]
    fn sphere_distortion_near_pi() {
        // brute force oracle: equatorial antipodes land on the same graph
        // point, so the distortion approaches their geodesic distance pi
        let (f, _) = sphere_case(2);
        let (graph, quotient) = build_reeb(&f).unwrap();
        let d = measured_distortion(&f, &graph, &quotient, PairBudget::Exact, 2).unwrap();
        assert!((d.value - PI).abs() / PI < 0.05, "distortion {}", d.value);
        assert!(!d.is_lower_bound);
    }

    #[test]
    fn sampled_distortion_lower_bounds_exact() {
        let (f, _) = sphere_case(2);
        let (graph, quotient) = build_reeb(&f).unwrap();
        let exact = measured_distortion(&f, &graph, &quotient, PairBudget::Exact, 2).unwrap();
        let sampled = measured_distortion(
            &f,
            &graph,
            &quotient,
            PairBudget::Sampled { count: 12 },
            2,
        )
        .unwrap();
        assert!(sampled.value <= exact.value + 1e-12);
        assert!(sampled.is_lower_bound);
    }

    #[test]
    fn theorem_bound_certifies_sphere() {
        let (f, south) = sphere_case(2);
        let cfg = SamplingConfig::default();
        let report = theorem_bound(&f, south, &cfg).unwrap();
        assert!(report.certified);
        assert!(report.measured_distortion < report.theorem_bound);
        // decomposition is recomputable from the stored terms exactly
        let b = (report.ingredients.b1 + 1) as f64;
        let recomposed =
            2.0 * b * b * (report.term_i_prime + 16.0 * report.term_ii_prime) + report.term_iii;
        assert!((recomposed - report.theorem_bound).abs() < 1e-12);
        // the trivial worst case: distortion is near or below the diameter
        assert!(report.measured_distortion <= report.ingredients.diam_x * (1.0 + 0.05));
        // chain consistency
        assert!(report.theorem_bound >= report.prop45_bound_prop62_c - 1e-9);
        // shifted epsilon never exceeds the unshifted one
        assert!(report.ingredients.eps_p_shifted.eps <= report.ingredients.eps_p_unshifted.eps);
        assert!(report.theorem_bound <= report.theorem_bound_unshifted_eps + 1e-12);
    }

    #[test]
    fn distance_field_bound_drops_eps_terms() {
        let m = Arc::new(gen_sphere(1.0, 2).unwrap());
        let south = (0..m.vertex_count())
            .min_by(|&a, &b| m.position(a).z.total_cmp(&m.position(b).z))
            .unwrap();
        let f = crate::field::distance_field(m, south, 2).unwrap();
        let f = make_excellent(&f, 1e-9, 1e-6).unwrap();
        let cfg = SamplingConfig::default();
        let report = theorem_bound(&f, south, &cfg).unwrap();
        // eps_p of a distance field against its own base point is tiny;
        // term II scales with sqrt(eps), so it stays small but not zero
        assert!(report.ingredients.eps_p_shifted.eps < 1e-6);
        assert!(report.term_ii < 0.01);
        assert!(report.term_iii < 1e-6 * report.ingredients.diam_x);
        assert!(report.certified);
    }

    #[test]
    fn prop45_arithmetic() {
        assert!((prop45_bound(0, PI, 0.0, 1.0, PI) - PI).abs() < 1e-15);
        let with_eps = prop45_bound(2, 1.0, 0.5, 1.0, PI);
        assert!((with_eps - 5.0 * 3.0).abs() < 1e-12);
        // monotone in C
        assert!(prop45_bound(1, 2.0, 0.1, 1.0, 1.0) < prop45_bound(1, 3.0, 0.1, 1.0, 1.0));
    }

    #[test]
    fn bound_monotonicity_in_ingredients() {
        let base = evaluate_theorem_terms(2, 1, 1.0, 10.0, 2.0, 3.0, 0.5).unwrap();
        let thicker = evaluate_theorem_terms(2, 1, 1.0, 10.0, 2.5, 3.0, 0.5).unwrap();
        assert!(thicker.bound <= base.bound);
        let bigger = evaluate_theorem_terms(2, 1, 1.0, 12.0, 2.0, 3.0, 0.5).unwrap();
        assert!(bigger.bound >= base.bound);
        assert!(evaluate_theorem_terms(2, 1, 1.0, 10.0, 0.0, 3.0, 0.5).is_err());
    }

    #[test]
    fn audit_suite_passes_on_torus() {
        let m = Arc::new(gen_torus(2.0, 0.5, 24, 12, TorusOrientation::Standing).unwrap());
        let f = height_field(m.clone(), Vector3::new(0.0, 0.0, 1.0)).unwrap();
        let f = make_excellent(&f, 1e-9, 1e-6).unwrap();
        let south = (0..m.vertex_count())
            .min_by(|&a, &b| m.position(a).z.total_cmp(&m.position(b).z))
            .unwrap();
        let cfg = SamplingConfig::default();
        let report = audit_suite(&f, south, 60, &cfg, 1.0).unwrap();
        for c in &report.checks {
            assert_eq!(c.violations, 0, "{} violated: {c:?}", c.name);
        }
        assert!(report.passed);
        let comparisons = report.check("prop-dist-to-fiber").unwrap();
        assert!(comparisons.checked > 0, "no separation configurations found");
    }

    #[test]
    fn corrupted_df_fails_the_audit() {
        let (f, south) = sphere_case(2);
        let cfg = SamplingConfig::default();
        let report = audit_suite(&f, south, 40, &cfg, 0.5).unwrap();
        assert!(!report.passed, "shrunken d_f must violate value-Lipschitz");
    }

    #[test]
    fn distortion_trivia() {
        // r = s: the distance from x to its own fiber is zero, and the
        // comparison inequality degenerates to 0 <= 2 eps
        let (f, south) = sphere_case(2);
        let (graph, mut quotient) = build_reeb(&f).unwrap();
        quotient.designate_base(south);
        let x = 10usize;
        let r = quotient.image(x);
        if let GraphPoint::OnEdge { .. } = r {
            let fiber = extract_fiber(&f, &graph, r).unwrap();
            let egraph = EdgeGraph::new(f.mesh(), 2);
            let seeds: Vec<(SurfacePoint, f64)> =
                fiber.surface_points().map(|sp| (sp, 0.0)).collect();
            let dvec = egraph.sweep(&seeds);
            let eps = epsilon_p(&f, south, false, 2).unwrap().eps;
            assert!(dvec[x] <= 2.0 * eps);
        }
    }
}
