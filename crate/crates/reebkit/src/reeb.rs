//! Reeb graph of a distinct-valued PL field, the length metric induced by
//! f-spans, the quotient map, and the combinatorial queries behind the
//! distortion bound (separation, path splitting).
//!
//! Construction works interval by interval: between consecutive critical
//! values every connected region of the slab preimage is a cylinder, so
//! regions become Reeb edge pieces. Pieces chain across a critical value
//! wherever they share a level component not containing the critical
//! vertex, and attach to the critical vertex's node otherwise.

use std::collections::HashMap;

use serde::Serialize;

use crate::field::{criticality_scan, ScalarField};
use crate::unionfind::UnionFind;
use crate::{ReebError, Result};

#[derive(Debug, Clone)]
pub struct ReebNode {
    /// Field value of the node.
    pub f: f64,
    /// Critical mesh vertex this node arose from.
    pub mesh_vertex: usize,
}

#[derive(Debug, Clone)]
pub struct ReebEdge {
    pub lower: usize,
    pub upper: usize,
    pub f_lo: f64,
    pub f_hi: f64,
}

impl ReebEdge {
    /// d_f length: exactly the f-span.
    pub fn length(&self) -> f64 {
        self.f_hi - self.f_lo
    }

    pub fn span_contains(&self, t: f64) -> bool {
        self.f_lo < t && t < self.f_hi
    }
}

/// A point of the Reeb graph: a node, or an interior point of an edge
/// addressed by its f-value (f parameterizes every edge injectively).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GraphPoint {
    Node(usize),
    OnEdge { edge: usize, f: f64 },
}

#[derive(Debug, Clone)]
pub struct QuotientMap {
    images: Vec<GraphPoint>,
    theta: Option<GraphPoint>,
}

impl QuotientMap {
    pub fn image(&self, v: usize) -> GraphPoint {
        self.images[v]
    }

    pub fn images(&self) -> &[GraphPoint] {
        &self.images
    }

    /// Designate the base point p; theta = pi(p).
    pub fn designate_base(&mut self, p: usize) {
        self.theta = Some(self.images[p]);
    }

    pub fn theta(&self) -> Option<GraphPoint> {
        self.theta
    }
}

#[derive(Debug, Clone)]
pub struct ReebGraph {
    nodes: Vec<ReebNode>,
    edges: Vec<ReebEdge>,
    node_edges: Vec<Vec<usize>>,
    b1: usize,
    /// Mesh edges supporting each Reeb edge's open preimage.
    edge_preimage: Vec<Vec<usize>>,
    node_dist: Vec<Vec<f64>>,
    next_hop: Vec<Vec<usize>>,
    hop_edge: Vec<Vec<usize>>,
}

struct Builder {
    /// per interval: (edge id, region id) pairs
    interval_edges: Vec<Vec<(usize, usize)>>,
    region_lookup: HashMap<(usize, usize), usize>,
    region_count: usize,
}

fn build_regions(field: &ScalarField, crit_values: &[f64]) -> Builder {
    let mesh = field.mesh();
    let values = field.values();
    let k = crit_values.len();
    let mut interval_edges: Vec<Vec<usize>> = vec![Vec::new(); k.saturating_sub(1)];
    for (ei, e) in mesh.edges().iter().enumerate() {
        let (fa, fb) = (values[e.ends[0]], values[e.ends[1]]);
        let (lo, hi) = (fa.min(fb), fa.max(fb));
        // intervals (crit[i], crit[i+1]) intersecting (lo, hi)
        let start = crit_values.partition_point(|&c| c <= lo);
        let first = start.saturating_sub(1);
        for i in first..k.saturating_sub(1) {
            if crit_values[i] >= hi {
                break;
            }
            if crit_values[i + 1] > lo {
                interval_edges[i].push(ei);
            }
        }
    }

    let mut region_lookup: HashMap<(usize, usize), usize> = HashMap::new();
    let mut region_count = 0usize;
    let mut interval_regions: Vec<Vec<(usize, usize)>> = Vec::with_capacity(interval_edges.len());
    let mut slot = vec![usize::MAX; mesh.edge_count()];
    for (iv, edges) in interval_edges.iter().enumerate() {
        for (local, &ei) in edges.iter().enumerate() {
            slot[ei] = local;
        }
        let mut uf = UnionFind::new(edges.len());
        for &ei in edges {
            let e = &mesh.edges()[ei];
            for &ti in &e.faces {
                let tri = mesh.triangles()[ti];
                let mut prev: Option<usize> = None;
                for (a, b) in [(tri[0], tri[1]), (tri[1], tri[2]), (tri[2], tri[0])] {
                    let other = mesh.edge_between(a, b).unwrap();
                    if slot[other] != usize::MAX {
                        if let Some(p) = prev {
                            uf.union(p, slot[other]);
                        }
                        prev = Some(slot[other]);
                    }
                }
            }
        }
        let mut root_to_region: HashMap<usize, usize> = HashMap::new();
        let mut pairs = Vec::with_capacity(edges.len());
        for (local, &ei) in edges.iter().enumerate() {
            let root = uf.find(local);
            let region = *root_to_region.entry(root).or_insert_with(|| {
                let id = region_count;
                region_count += 1;
                id
            });
            region_lookup.insert((iv, ei), region);
            pairs.push((ei, region));
        }
        for &ei in edges {
            slot[ei] = usize::MAX;
        }
        interval_regions.push(pairs);
    }

    Builder {
        interval_edges: interval_regions,
        region_lookup,
        region_count,
    }
}

/// Builds the Reeb graph and the quotient map of a distinct-valued field on
/// a connected closed mesh.
pub fn build_reeb(field: &ScalarField) -> Result<(ReebGraph, QuotientMap)> {
    if !field.distinct() {
        return Err(ReebError::NonDistinctField);
    }
    let mesh = field.mesh();
    mesh.require_connected()?;
    let values = field.values();
    let scan = criticality_scan(field)?;
    let mut crit: Vec<usize> = scan.critical_vertices().collect();
    crit.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let crit_values: Vec<f64> = crit.iter().map(|&v| values[v]).collect();
    if crit.len() < 2 {
        return Err(ReebError::InternalConsistency(
            "closed surface field must have at least a minimum and a maximum".into(),
        ));
    }

    let builder = build_regions(field, &crit_values);

    // chain regions across critical values; record node attachments
    let mut chains = UnionFind::new(builder.region_count);
    // region -> critical vertex its bottom/top boundary attaches to
    let mut bottom_attach: HashMap<usize, usize> = HashMap::new();
    let mut top_attach: HashMap<usize, usize> = HashMap::new();

    for (ci, &vc) in crit.iter().enumerate() {
        let c = crit_values[ci];
        let below = ci.checked_sub(1);
        let above = if ci + 1 < crit.len() { Some(ci) } else { None };

        // level components at c over crossing edges plus the critical vertex
        let mut crossing: Vec<usize> = Vec::new();
        let mut slot: HashMap<usize, usize> = HashMap::new();
        // collect crossing edges from the adjacent interval edge lists
        let consider = |ei: usize, slot: &mut HashMap<usize, usize>, crossing: &mut Vec<usize>| {
            let e = &mesh.edges()[ei];
            let (fa, fb) = (values[e.ends[0]], values[e.ends[1]]);
            if (fa - c) * (fb - c) < 0.0 && !slot.contains_key(&ei) {
                slot.insert(ei, crossing.len());
                crossing.push(ei);
            }
        };
        if let Some(b) = below {
            for &(ei, _) in &builder.interval_edges[b] {
                consider(ei, &mut slot, &mut crossing);
            }
        }
        if let Some(a) = above {
            for &(ei, _) in &builder.interval_edges[a] {
                consider(ei, &mut slot, &mut crossing);
            }
        }
        let vc_slot = crossing.len();
        let mut uf = UnionFind::new(vc_slot + 1);
        let mut seen_faces: std::collections::HashSet<usize> = std::collections::HashSet::new();
        for &ei in &crossing {
            for &ti in &mesh.edges()[ei].faces {
                seen_faces.insert(ti);
            }
        }
        for &ti in mesh.vertex_faces(vc) {
            seen_faces.insert(ti);
        }
        for &ti in &seen_faces {
            let tri = mesh.triangles()[ti];
            let mut prev: Option<usize> = None;
            if tri.contains(&vc) {
                prev = Some(vc_slot);
            }
            for (a, b) in [(tri[0], tri[1]), (tri[1], tri[2]), (tri[2], tri[0])] {
                let ei = mesh.edge_between(a, b).unwrap();
                if let Some(&s) = slot.get(&ei) {
                    if let Some(p) = prev {
                        uf.union(p, s);
                    }
                    prev = Some(s);
                }
            }
        }
        let critical_comp = uf.find(vc_slot);

        // pass-through gluing for regular components
        if let (Some(b), Some(a)) = (below, above) {
            for &ei in &crossing {
                if uf.find(slot[&ei]) != critical_comp {
                    let rb = builder.region_lookup[&(b, ei)];
                    let ra = builder.region_lookup[&(a, ei)];
                    chains.union(rb, ra);
                }
            }
        }

        // attachments through the critical vertex's own edges
        for (u, ei) in mesh.vertex_neighbors(vc) {
            if values[u] < c {
                if let Some(b) = below {
                    let r = builder.region_lookup[&(b, ei)];
                    top_attach.insert(r, vc);
                }
            } else if let Some(a) = above {
                let r = builder.region_lookup[&(a, ei)];
                bottom_attach.insert(r, vc);
            }
        }
    }

    // nodes: one per critical vertex
    let mut node_of_vertex: HashMap<usize, usize> = HashMap::new();
    let mut nodes: Vec<ReebNode> = Vec::with_capacity(crit.len());
    for &vc in &crit {
        node_of_vertex.insert(vc, nodes.len());
        nodes.push(ReebNode {
            f: values[vc],
            mesh_vertex: vc,
        });
    }

    // edges: one per chain, endpoints from the unique bottom/top attachments
    let mut chain_edge: HashMap<usize, usize> = HashMap::new();
    let mut chain_bottom: HashMap<usize, usize> = HashMap::new();
    let mut chain_top: HashMap<usize, usize> = HashMap::new();
    for (&region, &vc) in &bottom_attach {
        let root = chains.find(region);
        if let Some(&prev) = chain_bottom.get(&root) {
            if prev != vc {
                return Err(ReebError::InternalConsistency(
                    "chain with two bottom attachments".into(),
                ));
            }
        }
        chain_bottom.insert(root, vc);
    }
    for (&region, &vc) in &top_attach {
        let root = chains.find(region);
        if let Some(&prev) = chain_top.get(&root) {
            if prev != vc {
                return Err(ReebError::InternalConsistency(
                    "chain with two top attachments".into(),
                ));
            }
        }
        chain_top.insert(root, vc);
    }

    let mut edges: Vec<ReebEdge> = Vec::new();
    let mut edge_preimage: Vec<Vec<usize>> = Vec::new();
    let mut roots: Vec<usize> = (0..builder.region_count)
        .map(|r| chains.find(r))
        .collect();
    roots.sort_unstable();
    roots.dedup();
    for &root in &roots {
        let lower_v = *chain_bottom.get(&root).ok_or_else(|| {
            ReebError::InternalConsistency("chain without bottom attachment".into())
        })?;
        let upper_v = *chain_top.get(&root).ok_or_else(|| {
            ReebError::InternalConsistency("chain without top attachment".into())
        })?;
        let edge_id = edges.len();
        chain_edge.insert(root, edge_id);
        edges.push(ReebEdge {
            lower: node_of_vertex[&lower_v],
            upper: node_of_vertex[&upper_v],
            f_lo: values[lower_v],
            f_hi: values[upper_v],
        });
        edge_preimage.push(Vec::new());
    }
    for pairs in builder.interval_edges.iter() {
        for &(ei, region) in pairs {
            let root = chains.find(region);
            edge_preimage[chain_edge[&root]].push(ei);
        }
    }
    for pre in edge_preimage.iter_mut() {
        pre.sort_unstable();
        pre.dedup();
    }

    // quotient map
    let mut images: Vec<GraphPoint> = Vec::with_capacity(values.len());
    for v in 0..values.len() {
        if let Some(&n) = node_of_vertex.get(&v) {
            images.push(GraphPoint::Node(n));
            continue;
        }
        let fv = values[v];
        let iv = crit_values.partition_point(|&c| c < fv) - 1;
        let ei = mesh.vertex_edges(v)[0];
        let region = builder.region_lookup[&(iv, ei)];
        let edge = chain_edge[&chains.find(region)];
        images.push(GraphPoint::OnEdge { edge, f: fv });
    }

    // multi-saddle splitting keeps degrees at 3 or below
    split_high_degree_nodes(&mut nodes, &mut edges, &mut edge_preimage, &scan, &crit_values)?;

    let graph = ReebGraph::assemble(nodes, edges, edge_preimage)?;
    let quotient = QuotientMap {
        images,
        theta: None,
    };
    Ok((graph, quotient))
}

/// Splits nodes of degree above 3 into chains of simple events separated by
/// machine-epsilon f offsets. Metrically negligible; excellent-Morse inputs
/// never trigger it except at PL multi-saddles.
fn split_high_degree_nodes(
    nodes: &mut Vec<ReebNode>,
    edges: &mut Vec<ReebEdge>,
    edge_preimage: &mut Vec<Vec<usize>>,
    _scan: &crate::field::CriticalityScan,
    crit_values: &[f64],
) -> Result<()> {
    loop {
        let mut incident: Vec<(Vec<usize>, Vec<usize>)> = vec![(Vec::new(), Vec::new()); nodes.len()];
        for (ei, e) in edges.iter().enumerate() {
            incident[e.upper].0.push(ei);
            incident[e.lower].1.push(ei);
        }
        let Some(n) = (0..nodes.len())
            .find(|&n| incident[n].0.len() + incident[n].1.len() > 3)
        else {
            return Ok(());
        };
        let (mut below, mut above) = incident[n].clone();
        below.sort_unstable();
        above.sort_unstable();
        let c = nodes[n].f;
        // stay clear of neighboring critical values
        let gap = crit_values
            .iter()
            .map(|&v| (v - c).abs())
            .filter(|&d| d > 0.0)
            .fold(f64::INFINITY, f64::min);
        let ulp = f64::EPSILON * c.abs().max(1.0);
        let step = (4.0 * ulp).min(gap / 16.0);
        if below.len() >= 2 {
            // peel two lower ends into a merge node just below
            let m = nodes.len();
            nodes.push(ReebNode {
                f: c - step,
                mesh_vertex: nodes[n].mesh_vertex,
            });
            let mut pre = Vec::new();
            for &ei in below.iter().take(2) {
                edges[ei].upper = m;
                edges[ei].f_hi = c - step;
                pre.extend(edge_preimage[ei].iter().copied());
            }
            pre.sort_unstable();
            pre.dedup();
            edges.push(ReebEdge {
                lower: m,
                upper: n,
                f_lo: c - step,
                f_hi: c,
            });
            edge_preimage.push(pre);
        } else if above.len() >= 2 {
            let m = nodes.len();
            nodes.push(ReebNode {
                f: c + step,
                mesh_vertex: nodes[n].mesh_vertex,
            });
            let mut pre = Vec::new();
            for &ei in above.iter().take(2) {
                edges[ei].lower = m;
                edges[ei].f_lo = c + step;
                pre.extend(edge_preimage[ei].iter().copied());
            }
            pre.sort_unstable();
            pre.dedup();
            edges.push(ReebEdge {
                lower: n,
                upper: m,
                f_lo: c,
                f_hi: c + step,
            });
            edge_preimage.push(pre);
        } else {
            return Err(ReebError::InternalConsistency(
                "degree > 3 without a splittable side".into(),
            ));
        }
    }
}

impl ReebGraph {
    fn assemble(
        nodes: Vec<ReebNode>,
        edges: Vec<ReebEdge>,
        edge_preimage: Vec<Vec<usize>>,
    ) -> Result<Self> {
        let mut node_edges = vec![Vec::new(); nodes.len()];
        for (ei, e) in edges.iter().enumerate() {
            node_edges[e.lower].push(ei);
            node_edges[e.upper].push(ei);
        }
        let mut uf = UnionFind::new(nodes.len());
        for e in &edges {
            uf.union(e.lower, e.upper);
        }
        let components = uf.class_count(0..nodes.len());
        let b1 = edges.len() + components - nodes.len();

        // all-pairs node distances with next-hop reconstruction
        let n = nodes.len();
        let mut dist = vec![vec![f64::INFINITY; n]; n];
        let mut next = vec![vec![usize::MAX; n]; n];
        let mut hop = vec![vec![usize::MAX; n]; n];
        for i in 0..n {
            dist[i][i] = 0.0;
            next[i][i] = i;
        }
        for (ei, e) in edges.iter().enumerate() {
            let (a, b) = (e.lower, e.upper);
            if e.length() < dist[a][b] {
                dist[a][b] = e.length();
                dist[b][a] = e.length();
                next[a][b] = b;
                next[b][a] = a;
                hop[a][b] = ei;
                hop[b][a] = ei;
            }
        }
        for k in 0..n {
            for i in 0..n {
                if dist[i][k].is_infinite() {
                    continue;
                }
                for j in 0..n {
                    let alt = dist[i][k] + dist[k][j];
                    if alt < dist[i][j] {
                        dist[i][j] = alt;
                        next[i][j] = next[i][k];
                        hop[i][j] = hop[i][k];
                    }
                }
            }
        }

        Ok(Self {
            nodes,
            edges,
            node_edges,
            b1,
            edge_preimage,
            node_dist: dist,
            next_hop: next,
            hop_edge: hop,
        })
    }

    pub fn nodes(&self) -> &[ReebNode] {
        &self.nodes
    }

    pub fn edges(&self) -> &[ReebEdge] {
        &self.edges
    }

    pub fn node_degree(&self, n: usize) -> usize {
        self.node_edges[n].len()
    }

    pub fn node_edges(&self, n: usize) -> &[usize] {
        &self.node_edges[n]
    }

    /// First Betti number of the graph, E - N + components.
    pub fn b1(&self) -> usize {
        self.b1
    }

    /// Mesh edges crossing the open preimage of a Reeb edge.
    pub fn edge_preimage(&self, edge: usize) -> &[usize] {
        &self.edge_preimage[edge]
    }

    /// Edges whose open f-span contains t.
    pub fn edges_crossing(&self, t: f64) -> impl Iterator<Item = usize> + '_ {
        self.edges
            .iter()
            .enumerate()
            .filter(move |(_, e)| e.span_contains(t))
            .map(|(ei, _)| ei)
    }

    pub fn point_value(&self, p: GraphPoint) -> f64 {
        match p {
            GraphPoint::Node(n) => self.nodes[n].f,
            GraphPoint::OnEdge { f, .. } => f,
        }
    }

    fn check_point(&self, p: GraphPoint) -> Result<()> {
        match p {
            GraphPoint::Node(n) => {
                if n >= self.nodes.len() {
                    return Err(ReebError::PointNotOnGraph(format!("node {n}")));
                }
            }
            GraphPoint::OnEdge { edge, f } => {
                if edge >= self.edges.len() {
                    return Err(ReebError::PointNotOnGraph(format!("edge {edge}")));
                }
                let e = &self.edges[edge];
                if !(e.f_lo <= f && f <= e.f_hi) {
                    return Err(ReebError::PointNotOnGraph(format!(
                        "f={f} outside edge span [{}, {}]",
                        e.f_lo, e.f_hi
                    )));
                }
            }
        }
        Ok(())
    }

    /// Collapses edge endpoints to their nodes so positional equality is
    /// well defined.
    pub fn canonical(&self, p: GraphPoint) -> GraphPoint {
        match p {
            GraphPoint::OnEdge { edge, f } => {
                let e = &self.edges[edge];
                if f == e.f_lo {
                    GraphPoint::Node(e.lower)
                } else if f == e.f_hi {
                    GraphPoint::Node(e.upper)
                } else {
                    p
                }
            }
            node => node,
        }
    }

    pub fn same_point(&self, a: GraphPoint, b: GraphPoint) -> bool {
        self.canonical(a) == self.canonical(b)
    }

    fn point_ends(&self, p: GraphPoint) -> ([(usize, f64); 2], usize) {
        match p {
            GraphPoint::Node(n) => ([(n, 0.0), (0, 0.0)], 1),
            GraphPoint::OnEdge { edge, f } => {
                let e = &self.edges[edge];
                ([(e.lower, f - e.f_lo), (e.upper, e.f_hi - f)], 2)
            }
        }
    }

    /// The length metric d_f: shortest path length where every edge is
    /// measured by its f-span.
    pub fn distance(&self, a: GraphPoint, b: GraphPoint) -> Result<f64> {
        self.check_point(a)?;
        self.check_point(b)?;
        let a = self.canonical(a);
        let b = self.canonical(b);
        let mut best = f64::INFINITY;
        if let (GraphPoint::OnEdge { edge: ea, f: fa }, GraphPoint::OnEdge { edge: eb, f: fb }) =
            (a, b)
        {
            if ea == eb {
                best = (fa - fb).abs();
            }
        }
        let (ea, na) = self.point_ends(a);
        let (eb, nb) = self.point_ends(b);
        for &(va, ca) in &ea[..na] {
            for &(vb, cb) in &eb[..nb] {
                let d = ca + self.node_dist[va][vb] + cb;
                if d < best {
                    best = d;
                }
            }
        }
        Ok(best)
    }

    /// True when a and b land in different components of the graph minus
    /// the cut points. A query point lying exactly on the cut counts as
    /// separated (it cannot be joined to anything without touching the
    /// cut), except when a and b coincide.
    pub fn separates(&self, cut: &[GraphPoint], a: GraphPoint, b: GraphPoint) -> Result<bool> {
        for &p in cut {
            self.check_point(p)?;
        }
        self.check_point(a)?;
        self.check_point(b)?;
        let a = self.canonical(a);
        let b = self.canonical(b);
        if a == b {
            return Ok(false);
        }
        let cut: Vec<GraphPoint> = cut.iter().map(|&p| self.canonical(p)).collect();
        if cut.contains(&a) || cut.contains(&b) {
            return Ok(true);
        }
        let cut_nodes: Vec<usize> = cut
            .iter()
            .filter_map(|p| match p {
                GraphPoint::Node(n) => Some(*n),
                _ => None,
            })
            .collect();

        // units: nodes, then one unit per edge sub-segment
        let mut uf_size = self.nodes.len();
        let mut segment_units: Vec<Vec<(f64, f64, usize)>> = Vec::with_capacity(self.edges.len());
        for (ei, e) in self.edges.iter().enumerate() {
            let mut cuts: Vec<f64> = cut
                .iter()
                .filter_map(|p| match p {
                    GraphPoint::OnEdge { edge, f } if *edge == ei => Some(*f),
                    _ => None,
                })
                .collect();
            cuts.sort_by(f64::total_cmp);
            cuts.dedup();
            let mut bounds = vec![e.f_lo];
            bounds.extend(cuts);
            bounds.push(e.f_hi);
            let mut units = Vec::new();
            for w in bounds.windows(2) {
                units.push((w[0], w[1], uf_size));
                uf_size += 1;
            }
            segment_units.push(units);
        }
        let mut uf = UnionFind::new(uf_size);
        for (ei, e) in self.edges.iter().enumerate() {
            let units = &segment_units[ei];
            let first = units.first().unwrap();
            let last = units.last().unwrap();
            // a segment joins its endpoint node when that endpoint is the
            // edge end itself (not a cut point) and the node is not cut
            if first.0 == e.f_lo && units.len() >= 1 && !cut_nodes.contains(&e.lower) {
                // only when no cut sits exactly at the edge start
                uf.union(first.2, e.lower);
            }
            if last.1 == e.f_hi && !cut_nodes.contains(&e.upper) {
                uf.union(last.2, e.upper);
            }
        }

        let locate = |p: GraphPoint| -> usize {
            match p {
                GraphPoint::Node(n) => n,
                GraphPoint::OnEdge { edge, f } => {
                    let units = &segment_units[edge];
                    for &(lo, hi, id) in units {
                        if lo <= f && f <= hi {
                            return id;
                        }
                    }
                    units.last().unwrap().2
                }
            }
        };
        let (ua, ub) = (locate(a), locate(b));
        Ok(uf.find(ua) != uf.find(ub))
    }

    /// Shortest path between two points as a point sequence where
    /// consecutive points lie on a common edge.
    pub fn shortest_path(&self, a: GraphPoint, b: GraphPoint) -> Result<ReebPath> {
        self.check_point(a)?;
        self.check_point(b)?;
        let ca = self.canonical(a);
        let cb = self.canonical(b);
        if self.same_point(ca, cb) {
            return Ok(ReebPath { points: vec![ca] });
        }
        // candidate routes: direct same-edge, or via end nodes
        let mut best: Option<(f64, Vec<GraphPoint>)> = None;
        if let (GraphPoint::OnEdge { edge: ea, f: fa }, GraphPoint::OnEdge { edge: eb, f: fb }) =
            (ca, cb)
        {
            if ea == eb {
                best = Some(((fa - fb).abs(), vec![ca, cb]));
            }
        }
        let ends = |p: GraphPoint| -> Vec<(usize, f64)> {
            match p {
                GraphPoint::Node(n) => vec![(n, 0.0)],
                GraphPoint::OnEdge { edge, f } => {
                    let e = &self.edges[edge];
                    vec![(e.lower, f - e.f_lo), (e.upper, e.f_hi - f)]
                }
            }
        };
        for &(na, costa) in &ends(ca) {
            for &(nb, costb) in &ends(cb) {
                let d = costa + self.node_dist[na][nb] + costb;
                if best.as_ref().is_none_or(|(bd, _)| d < *bd) {
                    let mut pts = vec![ca];
                    let mut cur = na;
                    pts.push(GraphPoint::Node(cur));
                    while cur != nb {
                        let nxt = self.next_hop[cur][nb];
                        if nxt == usize::MAX {
                            break;
                        }
                        pts.push(GraphPoint::Node(nxt));
                        cur = nxt;
                    }
                    pts.push(cb);
                    best = Some((d, pts));
                }
            }
        }
        let (_, mut points) = best.ok_or_else(|| {
            ReebError::InternalConsistency("no path between graph points".into())
        })?;
        points.dedup_by(|x, y| self.same_point(*x, *y));
        Ok(ReebPath { points })
    }

    /// The (min-length) edge joining two adjacent nodes.
    fn edge_between_nodes(&self, a: usize, b: usize) -> Option<usize> {
        if self.hop_edge[a][b] != usize::MAX && self.next_hop[a][b] == b {
            return Some(self.hop_edge[a][b]);
        }
        self.node_edges[a]
            .iter()
            .copied()
            .find(|&ei| {
                let e = &self.edges[ei];
                (e.lower == a && e.upper == b) || (e.lower == b && e.upper == a)
            })
    }

    /// Edge shared by two path-consecutive points, if any.
    fn common_edge(&self, a: GraphPoint, b: GraphPoint) -> Option<usize> {
        let edge_set = |p: GraphPoint| -> Vec<usize> {
            match self.canonical(p) {
                GraphPoint::Node(n) => self.node_edges[n].clone(),
                GraphPoint::OnEdge { edge, .. } => vec![edge],
            }
        };
        match (self.canonical(a), self.canonical(b)) {
            (GraphPoint::Node(na), GraphPoint::Node(nb)) => self.edge_between_nodes(na, nb),
            (pa, pb) => {
                let sa = edge_set(pa);
                let sb = edge_set(pb);
                sa.into_iter().find(|e| sb.contains(e))
            }
        }
    }

    /// Points r_1..r_n on the path (n <= 2 b1 + 1) such that the first
    /// separates the path start from theta, the last separates the path end
    /// from theta, and each consecutive pair separates the open subpath
    /// between them from theta. Brute-force over path nodes plus one
    /// interior point per traversed edge segment.
    pub fn split_points(&self, theta: GraphPoint, path: &ReebPath) -> Result<Vec<GraphPoint>> {
        self.check_point(theta)?;
        if path.points.is_empty() {
            return Err(ReebError::InvalidParameter("empty path".into()));
        }
        let r = path.points[0];
        let s = *path.points.last().unwrap();
        // candidates in path order: every path point and each segment midpoint
        let mut candidates: Vec<GraphPoint> = Vec::new();
        for (i, &p) in path.points.iter().enumerate() {
            candidates.push(p);
            if i + 1 < path.points.len() {
                let q = path.points[i + 1];
                if let Some(edge) = self.common_edge(p, q) {
                    let f = (self.point_value(p) + self.point_value(q)) / 2.0;
                    candidates.push(GraphPoint::OnEdge { edge, f });
                } else {
                    return Err(ReebError::InvalidParameter(
                        "path points must share edges consecutively".into(),
                    ));
                }
            }
        }
        let n_max = 2 * self.b1 + 1;
        let m = candidates.len();
        let mut combo: Vec<usize> = Vec::new();

        fn search(
            graph: &ReebGraph,
            candidates: &[GraphPoint],
            theta: GraphPoint,
            r: GraphPoint,
            s: GraphPoint,
            combo: &mut Vec<usize>,
            start: usize,
            want: usize,
            m: usize,
        ) -> Result<Option<Vec<usize>>> {
            if combo.len() == want {
                return Ok(if check_combo(graph, candidates, theta, r, s, combo)? {
                    Some(combo.clone())
                } else {
                    None
                });
            }
            for i in start..m {
                combo.push(i);
                if let Some(found) =
                    search(graph, candidates, theta, r, s, combo, i + 1, want, m)?
                {
                    return Ok(Some(found));
                }
                combo.pop();
            }
            Ok(None)
        }

        fn check_combo(
            graph: &ReebGraph,
            candidates: &[GraphPoint],
            theta: GraphPoint,
            r: GraphPoint,
            s: GraphPoint,
            combo: &[usize],
        ) -> Result<bool> {
            let first = candidates[combo[0]];
            let last = candidates[*combo.last().unwrap()];
            if !graph.separates(&[first], r, theta)? {
                return Ok(false);
            }
            if !graph.separates(&[last], s, theta)? {
                return Ok(false);
            }
            for w in combo.windows(2) {
                let (ci, cj) = (w[0], w[1]);
                let cut = [candidates[ci], candidates[cj]];
                // sample the open subpath: candidates strictly between plus
                // midpoints of adjacent candidate pairs
                for k in ci..cj {
                    if k > ci {
                        let q = candidates[k];
                        if graph.same_point(q, cut[0]) || graph.same_point(q, cut[1]) {
                            continue;
                        }
                        if !graph.separates(&cut, q, theta)? {
                            return Ok(false);
                        }
                    }
                    let (p, q) = (candidates[k], candidates[k + 1]);
                    if let Some(edge) = graph.common_edge(p, q) {
                        let f = (graph.point_value(p) + graph.point_value(q)) / 2.0;
                        let mid = GraphPoint::OnEdge { edge, f };
                        if graph.same_point(mid, cut[0]) || graph.same_point(mid, cut[1]) {
                            continue;
                        }
                        if !graph.separates(&cut, mid, theta)? {
                            return Ok(false);
                        }
                    }
                }
            }
            Ok(true)
        }

        for want in 1..=n_max {
            if let Some(found) = search(
                self,
                &candidates,
                theta,
                r,
                s,
                &mut combo,
                0,
                want,
                m,
            )? {
                return Ok(found.into_iter().map(|i| candidates[i]).collect());
            }
        }
        Err(ReebError::InternalConsistency(format!(
            "no split-point set of size <= {n_max} found"
        )))
    }

    pub fn to_dot(&self) -> String {
        let mut out = String::from("graph reeb {\n");
        for (i, n) in self.nodes.iter().enumerate() {
            out.push_str(&format!(
                "  n{i} [label=\"n{i} f={:.6} deg={}\"];\n",
                n.f,
                self.node_degree(i)
            ));
        }
        for e in &self.edges {
            out.push_str(&format!(
                "  n{} -- n{} [label=\"{:.6}\"];\n",
                e.lower,
                e.upper,
                e.length()
            ));
        }
        out.push_str("}\n");
        out
    }

    pub fn export(&self, quotient: &QuotientMap) -> ReebGraphExport {
        ReebGraphExport {
            schema: "reebkit-reeb-v1".into(),
            nodes: self
                .nodes
                .iter()
                .enumerate()
                .map(|(i, n)| NodeExport {
                    id: i,
                    f: n.f,
                    degree: self.node_degree(i),
                    mesh_vertex: n.mesh_vertex,
                })
                .collect(),
            edges: self
                .edges
                .iter()
                .map(|e| EdgeExport {
                    lower: e.lower,
                    upper: e.upper,
                    f_lo: e.f_lo,
                    f_hi: e.f_hi,
                    length: e.length(),
                })
                .collect(),
            b1: self.b1,
            vertex_images: quotient
                .images
                .iter()
                .map(|p| match *p {
                    GraphPoint::Node(n) => ImageExport {
                        kind: "node".into(),
                        id: n,
                        f: self.nodes[n].f,
                    },
                    GraphPoint::OnEdge { edge, f } => ImageExport {
                        kind: "edge".into(),
                        id: edge,
                        f,
                    },
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ReebPath {
    pub points: Vec<GraphPoint>,
}

impl ReebPath {
    pub fn start(&self) -> GraphPoint {
        self.points[0]
    }

    pub fn end(&self) -> GraphPoint {
        *self.points.last().unwrap()
    }
}

#[derive(Debug, Serialize)]
pub struct ReebGraphExport {
    pub schema: String,
    pub nodes: Vec<NodeExport>,
    pub edges: Vec<EdgeExport>,
    pub b1: usize,
    pub vertex_images: Vec<ImageExport>,
}

#[derive(Debug, Serialize)]
pub struct NodeExport {
    pub id: usize,
    pub f: f64,
    pub degree: usize,
    pub mesh_vertex: usize,
}

#[derive(Debug, Serialize)]
pub struct EdgeExport {
    pub lower: usize,
    pub upper: usize,
    pub f_lo: f64,
    pub f_hi: f64,
    pub length: f64,
}

#[derive(Debug, Serialize)]
pub struct ImageExport {
    pub kind: String,
    pub id: usize,
    pub f: f64,
}
