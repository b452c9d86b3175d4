//! Triangulated closed surfaces: data model, OFF I/O, edge-graph geodesics
//! and global metric statistics.
//!
//! Geodesics are shortest paths in a subdivided edge graph: every mesh edge
//! is split into `subdivision` segments and all pairs of boundary points of
//! each triangle are joined by in-face chords. Graph paths are genuine
//! surface paths, so distances overestimate the intrinsic PL metric and the
//! overestimate shrinks as the subdivision grows.

use std::collections::BinaryHeap;
use std::collections::HashMap;
use std::io::{BufRead, Write};
use std::path::Path;

use nalgebra::Point3;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::unionfind::UnionFind;
use crate::{ReebError, Result};

#[derive(Debug, Clone)]
pub struct MeshEdge {
    /// Endpoint vertices, `ends[0] < ends[1]`.
    pub ends: [usize; 2],
    pub length: f64,
    /// The two incident triangles (closed manifold).
    pub faces: [usize; 2],
}

/// Triangulated closed surface. Immutable after construction; all queries
/// are safe to run concurrently.
#[derive(Debug, Clone)]
pub struct TriMesh {
    positions: Vec<Point3<f64>>,
    triangles: Vec<[usize; 3]>,
    edges: Vec<MeshEdge>,
    edge_index: HashMap<(usize, usize), usize>,
    vertex_edges: Vec<Vec<usize>>,
    vertex_faces: Vec<Vec<usize>>,
    component_of: Vec<usize>,
    components: usize,
}

impl TriMesh {
    pub fn new(positions: Vec<Point3<f64>>, triangles: Vec<[usize; 3]>) -> Result<Self> {
        if triangles.is_empty() {
            return Err(ReebError::EmptyMesh);
        }
        for (vi, p) in positions.iter().enumerate() {
            if !(p.x.is_finite() && p.y.is_finite() && p.z.is_finite()) {
                return Err(ReebError::InvalidParameter(format!(
                    "vertex {vi} has a non-finite coordinate"
                )));
            }
        }
        for (ti, tri) in triangles.iter().enumerate() {
            for &v in tri {
                if v >= positions.len() {
                    return Err(ReebError::VertexIndexOutOfRange {
                        triangle: ti,
                        vertex: v,
                        vertex_count: positions.len(),
                    });
                }
            }
            if tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2] {
                return Err(ReebError::InvalidParameter(format!(
                    "triangle {ti} repeats a vertex"
                )));
            }
        }

        let mut edge_faces: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
        for (ti, tri) in triangles.iter().enumerate() {
            for (a, b) in [(tri[0], tri[1]), (tri[1], tri[2]), (tri[2], tri[0])] {
                let key = (a.min(b), a.max(b));
                edge_faces.entry(key).or_default().push(ti);
            }
        }

        let mut keys: Vec<(usize, usize)> = edge_faces.keys().copied().collect();
        keys.sort_unstable();
        let mut edges = Vec::with_capacity(keys.len());
        let mut edge_index = HashMap::with_capacity(keys.len());
        for key in keys {
            let faces = &edge_faces[&key];
            if faces.len() != 2 {
                return Err(ReebError::NonManifoldEdge {
                    a: key.0,
                    b: key.1,
                    count: faces.len(),
                });
            }
            let length = (positions[key.0] - positions[key.1]).norm();
            if !(length > 0.0) || !length.is_finite() {
                return Err(ReebError::DegenerateEdge { a: key.0, b: key.1 });
            }
            edge_index.insert(key, edges.len());
            edges.push(MeshEdge {
                ends: [key.0, key.1],
                length,
                faces: [faces[0], faces[1]],
            });
        }

        let mut vertex_edges = vec![Vec::new(); positions.len()];
        for (ei, e) in edges.iter().enumerate() {
            vertex_edges[e.ends[0]].push(ei);
            vertex_edges[e.ends[1]].push(ei);
        }
        let mut vertex_faces = vec![Vec::new(); positions.len()];
        for (ti, tri) in triangles.iter().enumerate() {
            for &v in tri {
                vertex_faces[v].push(ti);
            }
        }
        for (vi, es) in vertex_edges.iter().enumerate() {
            if es.is_empty() {
                return Err(ReebError::InvalidParameter(format!(
                    "vertex {vi} is not used by any triangle"
                )));
            }
        }

        let mut uf = UnionFind::new(positions.len());
        for e in &edges {
            uf.union(e.ends[0], e.ends[1]);
        }
        let mut roots: HashMap<usize, usize> = HashMap::new();
        let mut component_of = vec![0usize; positions.len()];
        for v in 0..positions.len() {
            let r = uf.find(v);
            let next = roots.len();
            let id = *roots.entry(r).or_insert(next);
            component_of[v] = id;
        }
        let components = roots.len();

        Ok(Self {
            positions,
            triangles,
            edges,
            edge_index,
            vertex_edges,
            vertex_faces,
            component_of,
            components,
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.positions.len()
    }

    pub fn triangle_count(&self) -> usize {
        self.triangles.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Intrinsic dimension; this crate works with surfaces.
    pub fn dimension(&self) -> usize {
        2
    }

    pub fn positions(&self) -> &[Point3<f64>] {
        &self.positions
    }

    pub fn position(&self, v: usize) -> Point3<f64> {
        self.positions[v]
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn edges(&self) -> &[MeshEdge] {
        &self.edges
    }

    pub fn edge_between(&self, a: usize, b: usize) -> Option<usize> {
        self.edge_index.get(&(a.min(b), a.max(b))).copied()
    }

    pub fn vertex_edges(&self, v: usize) -> &[usize] {
        &self.vertex_edges[v]
    }

    pub fn vertex_faces(&self, v: usize) -> &[usize] {
        &self.vertex_faces[v]
    }

    pub fn components(&self) -> usize {
        self.components
    }

    pub fn component_of(&self, v: usize) -> usize {
        self.component_of[v]
    }

    pub fn is_connected(&self) -> bool {
        self.components == 1
    }

    pub fn require_connected(&self) -> Result<()> {
        if self.is_connected() {
            Ok(())
        } else {
            Err(ReebError::DisconnectedMesh {
                components: self.components,
            })
        }
    }

    pub fn check_vertex(&self, v: usize) -> Result<()> {
        if v < self.positions.len() {
            Ok(())
        } else {
            Err(ReebError::InvalidVertex {
                index: v,
                count: self.positions.len(),
            })
        }
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.vertex_count() as i64 - self.edge_count() as i64 + self.triangle_count() as i64
    }

    pub fn triangle_area(&self, ti: usize) -> f64 {
        let [a, b, c] = self.triangles[ti];
        let u = self.positions[b] - self.positions[a];
        let v = self.positions[c] - self.positions[a];
        0.5 * u.cross(&v).norm()
    }

    /// Sum of triangle areas (the 2-dimensional Hausdorff measure of the
    /// PL surface).
    pub fn total_area(&self) -> f64 {
        (0..self.triangles.len()).map(|t| self.triangle_area(t)).sum()
    }

    /// Neighbor vertices of `v`, each paired with the connecting edge.
    pub fn vertex_neighbors(&self, v: usize) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.vertex_edges[v].iter().map(move |&ei| {
            let e = &self.edges[ei];
            let u = if e.ends[0] == v { e.ends[1] } else { e.ends[0] };
            (u, ei)
        })
    }

    /// Edges of the link of `v`: for each incident triangle, the edge
    /// opposite to `v`.
    pub fn link_edges(&self, v: usize) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.vertex_faces[v].iter().map(move |&ti| {
            let tri = self.triangles[ti];
            let mut others = tri.iter().copied().filter(|&u| u != v);
            (others.next().unwrap(), others.next().unwrap())
        })
    }

    pub fn load_off(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path)?;
        let reader = std::io::BufReader::new(file);
        let pname = path.display().to_string();
        let mut lines = Vec::new();
        for (i, line) in reader.lines().enumerate() {
            let line = line?;
            let content = line.split('#').next().unwrap_or("").trim().to_string();
            if !content.is_empty() {
                lines.push((i + 1, content));
            }
        }
        let perr = |line: usize, message: String| ReebError::Parse {
            path: pname.clone(),
            line,
            message,
        };
        let mut it = lines.into_iter();
        let (hline, header) = it
            .next()
            .ok_or_else(|| perr(1, "empty file".into()))?;
        let mut counts_tokens: Vec<String> = Vec::new();
        {
            let mut toks = header.split_whitespace();
            let first = toks.next().unwrap_or("");
            if first != "OFF" {
                return Err(perr(hline, format!("expected OFF header, got '{first}'")));
            }
            counts_tokens.extend(toks.map(|s| s.to_string()));
        }
        let counts_line: (usize, Vec<String>) = if counts_tokens.is_empty() {
            let (l, s) = it
                .next()
                .ok_or_else(|| perr(hline, "missing counts line".into()))?;
            (l, s.split_whitespace().map(|t| t.to_string()).collect())
        } else {
            (hline, counts_tokens)
        };
        let (cline, counts) = counts_line;
        if counts.len() < 2 {
            return Err(perr(cline, "counts line needs vertex and face counts".into()));
        }
        let nv: usize = counts[0]
            .parse()
            .map_err(|_| perr(cline, format!("bad vertex count '{}'", counts[0])))?;
        let nf: usize = counts[1]
            .parse()
            .map_err(|_| perr(cline, format!("bad face count '{}'", counts[1])))?;

        let mut positions = Vec::with_capacity(nv);
        for _ in 0..nv {
            let (l, s) = it
                .next()
                .ok_or_else(|| perr(cline, format!("expected {nv} vertex lines")))?;
            let toks: Vec<&str> = s.split_whitespace().collect();
            if toks.len() != 3 {
                return Err(perr(l, format!("expected 3 coordinates, got {}", toks.len())));
            }
            let mut xyz = [0.0f64; 3];
            for (k, t) in toks.iter().enumerate() {
                xyz[k] = t
                    .parse()
                    .map_err(|_| perr(l, format!("bad coordinate '{t}'")))?;
            }
            positions.push(Point3::new(xyz[0], xyz[1], xyz[2]));
        }
        let mut triangles = Vec::with_capacity(nf);
        for _ in 0..nf {
            let (l, s) = it
                .next()
                .ok_or_else(|| perr(cline, format!("expected {nf} face lines")))?;
            let toks: Vec<&str> = s.split_whitespace().collect();
            if toks.is_empty() {
                return Err(perr(l, "empty face line".into()));
            }
            let n: usize = toks[0]
                .parse()
                .map_err(|_| perr(l, format!("bad face size '{}'", toks[0])))?;
            if n != 3 {
                return Err(perr(l, format!("only triangle faces supported, got {n}-gon")));
            }
            if toks.len() < 4 {
                return Err(perr(l, "truncated face line".into()));
            }
            let mut tri = [0usize; 3];
            for k in 0..3 {
                tri[k] = toks[k + 1]
                    .parse()
                    .map_err(|_| perr(l, format!("bad vertex index '{}'", toks[k + 1])))?;
            }
            triangles.push(tri);
        }
        Self::new(positions, triangles)
    }

    pub fn write_off(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(out, "OFF")?;
        writeln!(out, "{} {} {}", self.vertex_count(), self.triangle_count(), self.edge_count())?;
        for p in &self.positions {
            writeln!(out, "{} {} {}", p.x, p.y, p.z)?;
        }
        for t in &self.triangles {
            writeln!(out, "3 {} {} {}", t[0], t[1], t[2])?;
        }
        Ok(())
    }
}

pub fn load_mesh(path: impl AsRef<Path>) -> Result<TriMesh> {
    TriMesh::load_off(path)
}

/// A point on the mesh surface addressable by the edge graph: either a mesh
/// vertex or a point in the interior of a mesh edge.
#[derive(Debug, Clone, PartialEq)]
pub enum SurfacePoint {
    Vertex(usize),
    OnEdge { edge: usize, position: Point3<f64> },
}

impl SurfacePoint {
    pub fn position(&self, mesh: &TriMesh) -> Point3<f64> {
        match self {
            SurfacePoint::Vertex(v) => mesh.position(*v),
            SurfacePoint::OnEdge { position, .. } => *position,
        }
    }

    fn faces(&self, mesh: &TriMesh) -> Vec<usize> {
        match self {
            SurfacePoint::Vertex(v) => mesh.vertex_faces(*v).to_vec(),
            SurfacePoint::OnEdge { edge, .. } => mesh.edges()[*edge].faces.to_vec(),
        }
    }
}

/// Subdivided edge graph over a mesh. Node ids: `0..V` are mesh vertices,
/// followed by `subdivision - 1` Steiner points per edge in edge order.
pub struct EdgeGraph<'m> {
    mesh: &'m TriMesh,
    subdivision: u32,
    node_pos: Vec<Point3<f64>>,
    adj_offsets: Vec<u32>,
    adj_targets: Vec<u32>,
    adj_weights: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct HeapEntry {
    dist: f64,
    node: u32,
}

impl Eq for HeapEntry {}

impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        // reversed: BinaryHeap is a max-heap, we want smallest distance first
        other
            .dist
            .total_cmp(&self.dist)
            .then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl<'m> EdgeGraph<'m> {
    pub fn new(mesh: &'m TriMesh, subdivision: u32) -> Self {
        let s = subdivision.max(1) as usize;
        let nv = mesh.vertex_count();
        let ne = mesh.edge_count();
        let mut node_pos = mesh.positions().to_vec();
        node_pos.reserve(ne * (s - 1));
        for e in mesh.edges() {
            let a = mesh.position(e.ends[0]);
            let b = mesh.position(e.ends[1]);
            for j in 1..s {
                let t = j as f64 / s as f64;
                node_pos.push(a + (b - a) * t);
            }
        }

        let steiner = |ei: usize, j: usize| -> u32 { (nv + ei * (s - 1) + (j - 1)) as u32 };
        // nodes along an edge from ends[0] to ends[1]
        let edge_chain = |ei: usize| -> Vec<u32> {
            let e = &mesh.edges()[ei];
            let mut chain = Vec::with_capacity(s + 1);
            chain.push(e.ends[0] as u32);
            for j in 1..s {
                chain.push(steiner(ei, j));
            }
            chain.push(e.ends[1] as u32);
            chain
        };

        let mut arcs: Vec<(u32, u32, f64)> = Vec::new();
        let mut push = |a: u32, b: u32, pos: &[Point3<f64>]| {
            let w = (pos[a as usize] - pos[b as usize]).norm();
            arcs.push((a, b, w));
            arcs.push((b, a, w));
        };
        for ei in 0..ne {
            let chain = edge_chain(ei);
            for w in chain.windows(2) {
                push(w[0], w[1], &node_pos);
            }
        }
        // in-face chords between nodes on different boundary edges
        for tri in mesh.triangles() {
            let tri_edges: Vec<usize> = [(tri[0], tri[1]), (tri[1], tri[2]), (tri[2], tri[0])]
                .iter()
                .map(|&(a, b)| mesh.edge_between(a, b).unwrap())
                .collect();
            let mut groups: Vec<Vec<u32>> = Vec::with_capacity(3);
            for &ei in &tri_edges {
                groups.push(edge_chain(ei));
            }
            for gi in 0..3 {
                for gj in (gi + 1)..3 {
                    for &a in &groups[gi] {
                        for &b in &groups[gj] {
                            if a == b {
                                continue;
                            }
                            // corner pairs of a face always share an edge;
                            // skip them here, the edge chain covers them
                            if (a as usize) < nv && (b as usize) < nv {
                                continue;
                            }
                            push(a, b, &node_pos);
                        }
                    }
                }
            }
        }

        let n = node_pos.len();
        let mut counts = vec![0u32; n + 1];
        for &(a, _, _) in &arcs {
            counts[a as usize + 1] += 1;
        }
        for i in 0..n {
            counts[i + 1] += counts[i];
        }
        let mut adj_targets = vec![0u32; arcs.len()];
        let mut adj_weights = vec![0.0f64; arcs.len()];
        let mut cursor = counts.clone();
        for &(a, b, w) in &arcs {
            let at = cursor[a as usize] as usize;
            adj_targets[at] = b;
            adj_weights[at] = w;
            cursor[a as usize] += 1;
        }

        Self {
            mesh,
            subdivision: s as u32,
            node_pos,
            adj_offsets: counts,
            adj_targets,
            adj_weights,
        }
    }

    pub fn mesh(&self) -> &TriMesh {
        self.mesh
    }

    pub fn subdivision(&self) -> u32 {
        self.subdivision
    }

    pub fn node_count(&self) -> usize {
        self.node_pos.len()
    }

    /// All graph nodes on the boundary of face `ti`: its 3 corners plus the
    /// Steiner points of its 3 edges.
    fn face_nodes(&self, ti: usize) -> Vec<u32> {
        let s = self.subdivision as usize;
        let nv = self.mesh.vertex_count();
        let tri = self.mesh.triangles()[ti];
        let mut nodes: Vec<u32> = tri.iter().map(|&v| v as u32).collect();
        for (a, b) in [(tri[0], tri[1]), (tri[1], tri[2]), (tri[2], tri[0])] {
            let ei = self.mesh.edge_between(a, b).unwrap();
            for j in 1..s {
                nodes.push((nv + ei * (s - 1) + (j - 1)) as u32);
            }
        }
        nodes
    }

    /// Multi-source Dijkstra. Seeds carry an initial distance offset; edge
    /// points are attached through the boundary nodes of their two incident
    /// faces.
    pub fn sweep(&self, seeds: &[(SurfacePoint, f64)]) -> Vec<f64> {
        let n = self.node_count();
        let mut dist = vec![f64::INFINITY; n];
        let mut heap: BinaryHeap<HeapEntry> = BinaryHeap::new();
        let offer = |dist: &mut Vec<f64>, heap: &mut BinaryHeap<HeapEntry>, node: u32, d: f64| {
            if d < dist[node as usize] {
                dist[node as usize] = d;
                heap.push(HeapEntry { dist: d, node });
            }
        };
        for (sp, init) in seeds {
            match sp {
                SurfacePoint::Vertex(v) => offer(&mut dist, &mut heap, *v as u32, *init),
                SurfacePoint::OnEdge { edge, position } => {
                    for &f in &self.mesh.edges()[*edge].faces {
                        for node in self.face_nodes(f) {
                            let d = *init + (self.node_pos[node as usize] - position).norm();
                            offer(&mut dist, &mut heap, node, d);
                        }
                    }
                }
            }
        }
        while let Some(HeapEntry { dist: d, node }) = heap.pop() {
            if d > dist[node as usize] {
                continue;
            }
            let lo = self.adj_offsets[node as usize] as usize;
            let hi = self.adj_offsets[node as usize + 1] as usize;
            for k in lo..hi {
                let t = self.adj_targets[k];
                let nd = d + self.adj_weights[k];
                if nd < dist[t as usize] {
                    dist[t as usize] = nd;
                    heap.push(HeapEntry { dist: nd, node: t });
                }
            }
        }
        dist
    }

    pub fn sweep_from_vertex(&self, v: usize) -> Vec<f64> {
        self.sweep(&[(SurfacePoint::Vertex(v), 0.0)])
    }

    /// Distance at an arbitrary surface point, read off a sweep result.
    pub fn eval(&self, dist: &[f64], q: &SurfacePoint) -> f64 {
        match q {
            SurfacePoint::Vertex(v) => dist[*v],
            SurfacePoint::OnEdge { edge, position } => {
                let mut best = f64::INFINITY;
                for &f in &self.mesh.edges()[*edge].faces {
                    for node in self.face_nodes(f) {
                        let d = dist[node as usize] + (self.node_pos[node as usize] - position).norm();
                        if d < best {
                            best = d;
                        }
                    }
                }
                best
            }
        }
    }

    /// Direct in-face chord between two surface points, when they share a
    /// face. Used as a shortcut candidate next to [`EdgeGraph::eval`].
    pub fn direct_chord(&self, a: &SurfacePoint, b: &SurfacePoint) -> Option<f64> {
        let fa = a.faces(self.mesh);
        let fb = b.faces(self.mesh);
        if fa.iter().any(|f| fb.contains(f)) {
            Some((a.position(self.mesh) - b.position(self.mesh)).norm())
        } else {
            None
        }
    }

    /// Per-vertex distances from a sweep (first `V` node entries).
    pub fn vertex_distances(&self, dist: &[f64]) -> Vec<f64> {
        dist[..self.mesh.vertex_count()].to_vec()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GeodesicProvenance {
    ExactAllPairs,
    LandmarkSampled,
}

/// Distances from a source set to every mesh vertex.
#[derive(Debug, Clone)]
pub struct GeodesicIndex {
    pub distances: Vec<f64>,
    pub provenance: GeodesicProvenance,
}

/// Shortest edge-graph distance from the nearest source to every vertex.
/// Monotone non-increasing under subdivision doubling.
pub fn geodesic_distances(mesh: &TriMesh, sources: &[usize], subdivision: u32) -> Result<GeodesicIndex> {
    if sources.is_empty() {
        return Err(ReebError::InvalidParameter("sources must be nonempty".into()));
    }
    if subdivision == 0 {
        return Err(ReebError::InvalidParameter("subdivision must be >= 1".into()));
    }
    for &s in sources {
        mesh.check_vertex(s)?;
    }
    let graph = EdgeGraph::new(mesh, subdivision);
    let seeds: Vec<(SurfacePoint, f64)> = sources
        .iter()
        .map(|&v| (SurfacePoint::Vertex(v), 0.0))
        .collect();
    let dist = graph.sweep(&seeds);
    Ok(GeodesicIndex {
        distances: graph.vertex_distances(&dist),
        provenance: GeodesicProvenance::ExactAllPairs,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum DiameterMode {
    Exact,
    Landmarks(usize),
}

impl DiameterMode {
    /// Exact all-pairs up to 3000 vertices, 64 farthest-point landmarks above.
    pub fn auto(mesh: &TriMesh, cfg: &crate::SamplingConfig) -> Self {
        if mesh.vertex_count() <= cfg.exact_pair_threshold {
            DiameterMode::Exact
        } else {
            DiameterMode::Landmarks(cfg.landmark_count)
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MeshStats {
    pub diameter: f64,
    pub diameter_mode: DiameterMode,
    /// Landmark mode only ever underestimates the true maximum.
    pub diameter_is_lower_bound: bool,
    pub total_measure: f64,
    pub components: usize,
}

/// Diameter (max pairwise vertex geodesic distance), total area and
/// component count.
pub fn mesh_stats(mesh: &TriMesh, mode: DiameterMode, subdivision: u32) -> Result<MeshStats> {
    if let DiameterMode::Landmarks(0) = mode {
        return Err(ReebError::InvalidParameter("landmark count must be >= 1".into()));
    }
    let graph = EdgeGraph::new(mesh, subdivision);
    let nv = mesh.vertex_count();
    let diameter = match mode {
        DiameterMode::Exact => (0..nv)
            .into_par_iter()
            .map(|v| {
                let dist = graph.sweep_from_vertex(v);
                dist[..nv].iter().copied().fold(0.0f64, f64::max)
            })
            .reduce(|| 0.0, f64::max),
        DiameterMode::Landmarks(count) => {
            let mut nearest = vec![f64::INFINITY; nv];
            let mut current = 0usize;
            let mut best = 0.0f64;
            for _ in 0..count.min(nv) {
                let dist = graph.sweep_from_vertex(current);
                let mut far = (0usize, -1.0f64);
                for v in 0..nv {
                    best = best.max(dist[v]);
                    nearest[v] = nearest[v].min(dist[v]);
                    if nearest[v] > far.1 {
                        far = (v, nearest[v]);
                    }
                }
                current = far.0;
            }
            best
        }
    };
    Ok(MeshStats {
        diameter,
        diameter_mode: mode,
        diameter_is_lower_bound: matches!(mode, DiameterMode::Landmarks(_)),
        total_measure: mesh.total_area(),
        components: mesh.components(),
    })
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::generate::{gen_sphere, gen_torus, TorusOrientation};
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    /// Closed flat pillow: two copies of an nx-by-ny rectangle grid glued
    /// along the boundary, with the back sheet offset by 1e-9 so edges are
    /// nondegenerate.
    pub(crate) fn flat_pillow(nx: usize, ny: usize, w: f64, h: f64) -> TriMesh {
        let mut pos = Vec::new();
        for side in 0..2 {
            for i in 0..=nx {
                for j in 0..=ny {
                    let x = w * i as f64 / nx as f64;
                    let y = h * j as f64 / ny as f64;
                    let z = if side == 0 { 0.0 } else { 1e-9 };
                    pos.push(Point3::new(x, y, z));
                }
            }
        }
        let vid = |side: usize, i: usize, j: usize| side * (nx + 1) * (ny + 1) + i * (ny + 1) + j;
        let mut tris = Vec::new();
        for side in 0..2 {
            for i in 0..nx {
                for j in 0..ny {
                    let (a, b, c, d) = (
                        vid(side, i, j),
                        vid(side, i + 1, j),
                        vid(side, i + 1, j + 1),
                        vid(side, i, j + 1),
                    );
                    if side == 0 {
                        tris.push([a, b, c]);
                        tris.push([a, c, d]);
                    } else {
                        // opposite diagonal so welded corner cells do not
                        // duplicate the front sheet's diagonal edge
                        tris.push([a, d, b]);
                        tris.push([b, d, c]);
                    }
                }
            }
        }
        let mut remap: Vec<usize> = (0..pos.len()).collect();
        for i in 0..=nx {
            for j in 0..=ny {
                if i == 0 || i == nx || j == 0 || j == ny {
                    remap[vid(1, i, j)] = vid(0, i, j);
                }
            }
        }
        for t in tris.iter_mut() {
            for v in t.iter_mut() {
                *v = remap[*v];
            }
        }
        let mut used = vec![false; pos.len()];
        for t in &tris {
            for &v in t {
                used[v] = true;
            }
        }
        let mut newid = vec![usize::MAX; pos.len()];
        let mut newpos = Vec::new();
        for (v, &u) in used.iter().enumerate() {
            if u {
                newid[v] = newpos.len();
                newpos.push(pos[v]);
            }
        }
        for t in tris.iter_mut() {
            for v in t.iter_mut() {
                *v = newid[*v];
            }
        }
        TriMesh::new(newpos, tris).unwrap()
    }

    fn octahedron() -> TriMesh {
        let positions = vec![
            Point3::new(1.0, 0.0, 0.0),
            Point3::new(-1.0, 0.0, 0.0),
            Point3::new(0.0, 1.0, 0.0),
            Point3::new(0.0, -1.0, 0.0),
            Point3::new(0.0, 0.0, 1.0),
            Point3::new(0.0, 0.0, -1.0),
        ];
        let triangles = vec![
            [0, 2, 4],
            [2, 1, 4],
            [1, 3, 4],
            [3, 0, 4],
            [2, 0, 5],
            [1, 2, 5],
            [3, 1, 5],
            [0, 3, 5],
        ];
        TriMesh::new(positions, triangles).unwrap()
    }

    #[test]
    fn octahedron_combinatorics() {
        let m = octahedron();
        assert_eq!(m.vertex_count(), 6);
        assert_eq!(m.triangle_count(), 8);
        assert_eq!(m.edge_count(), 12);
        assert_eq!(m.euler_characteristic(), 2);
        assert_eq!(m.components(), 1);
    }

    #[test]
    fn off_round_trip_and_parse_errors() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("oct.off");
        octahedron().write_off(&path).unwrap();
        let m = TriMesh::load_off(&path).unwrap();
        assert_eq!(m.vertex_count(), 6);
        assert_eq!(m.edge_count(), 12);

        let bad = dir.path().join("bad.off");
        std::fs::write(&bad, "OFF\n3 1 0\n0 0 0\n1 0 0\nnope 1 0\n3 0 1 2\n").unwrap();
        let err = TriMesh::load_off(&bad).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains(":5:"), "line number missing in: {msg}");
    }

    #[test]
    fn boundary_edge_is_rejected() {
        // a single triangle has three boundary edges
        let positions = vec![
            Point3::new(0.0, 0.0, 0.0),
            Point3::new(1.0, 0.0, 0.0),
            Point3::new(0.0, 1.0, 0.0),
        ];
        let err = TriMesh::new(positions, vec![[0, 1, 2]]).unwrap_err();
        match err {
            ReebError::NonManifoldEdge { count, .. } => assert_eq!(count, 1),
            other => panic!("expected NonManifoldEdge, got {other}"),
        }
    }

    #[test]
    fn empty_mesh_is_rejected() {
        assert!(matches!(
            TriMesh::new(vec![], vec![]),
            Err(ReebError::EmptyMesh)
        ));
    }

    #[test]
    fn two_tetrahedra_flagged_two_components() {
        let tet = |offset: f64, base: usize| {
            let pos = vec![
                Point3::new(offset, 0.0, 0.0),
                Point3::new(offset + 1.0, 0.0, 0.0),
                Point3::new(offset, 1.0, 0.0),
                Point3::new(offset, 0.0, 1.0),
            ];
            let tris = vec![
                [base, base + 1, base + 2],
                [base, base + 3, base + 1],
                [base, base + 2, base + 3],
                [base + 1, base + 3, base + 2],
            ];
            (pos, tris)
        };
        let (mut pos, mut tris) = tet(0.0, 0);
        let (p2, t2) = tet(10.0, 4);
        pos.extend(p2);
        tris.extend(t2);
        let m = TriMesh::new(pos, tris).unwrap();
        assert_eq!(m.components(), 2);
        assert!(m.require_connected().is_err());
    }

    #[test]
    fn pole_to_pole_distance_near_pi() {
        // independent oracle: the analytic great-circle distance on the unit
        // sphere between antipodal poles is pi
        let m = gen_sphere(1.0, 3).unwrap();
        let north = (0..m.vertex_count())
            .max_by(|&a, &b| m.position(a).z.total_cmp(&m.position(b).z))
            .unwrap();
        let south = (0..m.vertex_count())
            .min_by(|&a, &b| m.position(a).z.total_cmp(&m.position(b).z))
            .unwrap();
        assert_relative_eq!(m.position(north).z, 1.0, epsilon = 1e-12);
        assert_relative_eq!(m.position(south).z, -1.0, epsilon = 1e-12);
        let idx = geodesic_distances(&m, &[north], 1).unwrap();
        let d1 = idx.distances[south];
        assert!((d1 - PI).abs() / PI < 0.03, "subdivision 1: {d1} vs {PI}");
        let d2 = geodesic_distances(&m, &[north], 2).unwrap().distances[south];
        assert!((d2 - PI).abs() / PI < 0.01, "subdivision 2: {d2} vs {PI}");
        // nested subdivision can only shorten paths
        let d4 = geodesic_distances(&m, &[north], 4).unwrap().distances[south];
        assert!(d2 <= d1 + 1e-12);
        assert!(d4 <= d2 + 1e-12);
    }

    #[test]
    fn all_sources_gives_zero() {
        let m = octahedron();
        let all: Vec<usize> = (0..m.vertex_count()).collect();
        let idx = geodesic_distances(&m, &all, 2).unwrap();
        assert!(idx.distances.iter().all(|&d| d == 0.0));
    }

    #[test]
    fn strip_diagonal_within_sqrt2_factor() {
        // closed strip: a 4x1 rectangle grid folded into a flat pillow;
        // the edge-graph path between opposite corners stays within
        // sqrt(2) of the Euclidean diagonal
        let (w, h) = (4.0, 1.0);
        let m = flat_pillow(8, 2, w, h);
        let corner0 = (0..m.vertex_count())
            .find(|&v| (m.position(v) - Point3::new(0.0, 0.0, 0.0)).norm() < 1e-12)
            .unwrap();
        let corner1 = (0..m.vertex_count())
            .find(|&v| (m.position(v) - Point3::new(w, h, 0.0)).norm() < 1e-12)
            .unwrap();
        let d = geodesic_distances(&m, &[corner0], 1).unwrap().distances[corner1];
        let diag = (w * w + h * h).sqrt();
        assert!(d >= diag - 1e-9, "graph distance {d} below diagonal {diag}");
        assert!(d <= diag * 2.0f64.sqrt() + 1e-9, "graph distance {d} above sqrt2 factor");
    }

    #[test]
    fn sphere_stats_match_analytic() {
        let m = gen_sphere(1.0, 3).unwrap();
        let stats = mesh_stats(&m, DiameterMode::Exact, 2).unwrap();
        assert!((stats.total_measure - 4.0 * PI).abs() / (4.0 * PI) < 0.02);
        assert!((stats.diameter - PI).abs() / PI < 0.03);
        assert_eq!(stats.components, 1);
        // landmark mode is a lower bound
        let lm = mesh_stats(&m, DiameterMode::Landmarks(16), 2).unwrap();
        assert!(lm.diameter <= stats.diameter + 1e-12);
        assert!(lm.diameter_is_lower_bound);
    }

    #[test]
    fn torus_area_matches_analytic() {
        let m = gen_torus(2.0, 0.5, 48, 24, TorusOrientation::Standing).unwrap();
        let analytic = 4.0 * PI * PI * 2.0 * 0.5;
        let stats = mesh_stats(&m, DiameterMode::Landmarks(8), 1).unwrap();
        assert!(
            (stats.total_measure - analytic).abs() / analytic < 0.02,
            "area {} vs {analytic}",
            stats.total_measure
        );
    }

    #[test]
    fn landmark_count_zero_rejected() {
        let m = octahedron();
        assert!(mesh_stats(&m, DiameterMode::Landmarks(0), 1).is_err());
    }

    #[test]
    fn geodesic_symmetry() {
        let m = gen_sphere(1.0, 2).unwrap();
        let a = 3usize;
        let b = 77usize;
        let da = geodesic_distances(&m, &[a], 2).unwrap().distances[b];
        let db = geodesic_distances(&m, &[b], 2).unwrap().distances[a];
        assert_eq!(da, db);
    }

    #[test]
    fn area_converges_under_refinement() {
        let coarse = gen_sphere(1.0, 3).unwrap().total_area();
        let fine = gen_sphere(1.0, 4).unwrap().total_area();
        let target = 4.0 * PI;
        assert!((target - fine) < (target - coarse));
        assert!((fine - coarse).abs() / target < 0.01);
    }
}
