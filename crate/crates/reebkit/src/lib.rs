//! Reeb graphs of PL scalar fields on closed triangulated surfaces, the
//! length metric they carry, the level-set thickness invariant, and
//! certified upper bounds on the metric distortion of the quotient map.

pub mod bounds;
pub mod config;
pub mod error;
pub mod field;
pub mod generate;
pub mod homology;
pub mod levelset;
pub mod mesh;
pub mod reeb;
mod unionfind;

pub use bounds::{
    audit_suite, comparison_audit, evaluate_theorem_terms, measured_distortion, prop45_bound,
    theorem_bound, AuditCheck, AuditReport, BoundReport, DistortionReport, Ingredients,
    PairBudget, TheoremTerms, REPORT_SCHEMA,
};
pub use config::SamplingConfig;
pub use error::{ReebError, Result};
pub use levelset::{
    coarea_check, component_diameter, extract_fiber, extract_level, extract_level_filtered,
    fiber_diameter_bound, sample_levels, thickness, thickness_in_range, CoareaCheck,
    FiberBoundInputs, LevelComponent, LevelPoint, LevelRow, LevelSetSlice, ThicknessReport,
};
pub use reeb::{
    build_reeb, GraphPoint, QuotientMap, ReebEdge, ReebGraph, ReebNode, ReebPath,
};
pub use field::{
    criticality_scan, distance_field, epsilon_p, height_field, make_excellent, CriticalityScan,
    EpsilonP, ScalarField, VertexClass,
};
pub use generate::{
    closed_forms, fork_bound, gen_sphere, gen_thickened_graph, gen_torus, graph_bound,
    sphere_measure, sphere_thickness, Block, ClosedFormQuery, ThickenedGraph, ThickenedGraphSpec,
    TorusOrientation,
};
pub use homology::{betti, BettiProfile};
pub use mesh::{
    geodesic_distances, load_mesh, mesh_stats, DiameterMode, EdgeGraph, GeodesicIndex,
    GeodesicProvenance, MeshStats, SurfacePoint, TriMesh,
};
